//! Numerical tolerance profile shared by every structural check.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Environment variable holding a comma-separated override list,
/// e.g. `POLEDEC_TOLERANCES="psd=1e-30,herm=1e-12"`.
pub const TOLERANCE_ENV: &str = "POLEDEC_TOLERANCES";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// max |M - M^dag|
    pub herm: f64,
    /// |Tr rho - 1|
    pub trace: f64,
    /// max |<i|j> - delta_ij|
    pub orth: f64,
    /// allowed negative eigenvalue magnitude
    pub psd: f64,
    /// leaked norm of truncated coherent states
    pub trunc: f64,
    /// eigenvalue gap below which eigenvectors form one block
    pub degen: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { herm: 1e-10, trace: 1e-10, orth: 1e-10, psd: 1e-8, trunc: 1e-9, degen: 1e-8 }
    }
}

impl Tolerances {
    /// Applies `key=value` overrides separated by commas.
    pub fn with_overrides(mut self, spec: &str) -> Result<Self> {
        for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (key, value) =
                item.split_once('=').ok_or_else(|| Error::Parse(format!("tolerance override '{item}' lacks '='")))?;
            let value: f64 =
                value.trim().parse().map_err(|_| Error::Parse(format!("tolerance '{key}' is not a number")))?;
            if !(value.is_finite() && value >= 0.0) {
                return Err(Error::Parse(format!("tolerance '{key}' must be finite and >= 0")));
            }
            let slot = match key.trim() {
                "herm" => &mut self.herm,
                "trace" => &mut self.trace,
                "orth" => &mut self.orth,
                "psd" => &mut self.psd,
                "trunc" => &mut self.trunc,
                "degen" => &mut self.degen,
                other => return Err(Error::Parse(format!("unknown tolerance '{other}'"))),
            };
            *slot = value;
        }
        Ok(self)
    }

    /// Defaults, overridden by [`TOLERANCE_ENV`] when set.
    pub fn from_env() -> Result<Self> {
        match std::env::var(TOLERANCE_ENV) {
            Ok(spec) => Self::default().with_overrides(&spec),
            Err(_) => Ok(Self::default()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_parse() {
        let t = Tolerances::default().with_overrides("psd=1e-30, herm = 2e-12").unwrap();
        assert_eq!(t.psd, 1e-30);
        assert_eq!(t.herm, 2e-12);
        assert_eq!(t.trace, 1e-10);
    }

    #[test]
    fn bad_override_rejected() {
        assert!(Tolerances::default().with_overrides("psd").is_err());
        assert!(Tolerances::default().with_overrides("bogus=1").is_err());
        assert!(Tolerances::default().with_overrides("psd=-1").is_err());
    }
}
