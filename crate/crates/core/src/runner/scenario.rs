//! Scenario files: a flat TOML document describing one two-branch run.
//!
//! ```toml
//! omega = 1.0
//! alpha2_abs_sq = 50.0        # or: L = 10.0
//! a = [0.7071067811865476, 0.0]
//! b = [0.7071067811865476, 0.0]
//! dim = 128
//! density = { kind = "ohmic", eta = 0.01, lambda_cutoff = 10.0 }
//! grid = { t_min = 1e-3, t_max = 1e2, count = 200, spacing = "log", unit = "relaxation" }
//! ```
//!
//! Frequencies are in units of `omega_unit`; reported times are `hbar`
//! times natural time divided by `omega_unit`.

use std::path::{Path, PathBuf};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{SpectralDensity, Tabulated};
use crate::tolerances::Tolerances;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum DensitySpec {
    Ohmic {
        eta: f64,
        lambda_cutoff: f64,
    },
    /// Two-column `omega,J` CSV, relative to the scenario file.
    Tabulated {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TimeUnit {
    /// Multiples of the relaxation time `hbar / gamma0`.
    Relaxation,
    /// Physical time.
    Absolute,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub t_min: f64,
    pub t_max: f64,
    pub count: usize,
    pub spacing: Spacing,
    #[serde(default = "default_unit")]
    pub unit: TimeUnit,
    /// Prepend `t = 0` to a log grid.
    #[serde(default = "yes")]
    pub include_zero: bool,
}

fn default_unit() -> TimeUnit {
    TimeUnit::Relaxation
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub density: DensitySpec,
    pub omega: f64,
    #[serde(default = "one")]
    pub hbar: f64,
    #[serde(default = "one")]
    pub mass: f64,
    #[serde(default = "one")]
    pub omega_unit: f64,
    /// Branch separation; `alpha2 = kappa L` with `kappa^2 = m w0' / (2 hbar^2)`.
    #[serde(default, rename = "L", skip_serializing_if = "Option::is_none")]
    pub separation: Option<f64>,
    /// `|alpha2|^2` given directly (overrides `L`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha2_abs_sq: Option<f64>,
    /// Superposition weights as `[re, im]`.
    pub a: [f64; 2],
    pub b: [f64; 2],
    pub dim: usize,
    pub grid: GridSpec,
    #[serde(default = "default_ladder")]
    pub ladder_size: usize,
    /// Leading Fock block written to the trajectory CSV.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub export_dim: Option<usize>,
    /// Number of tracked basis vectors written to the basis CSV.
    #[serde(default = "default_rank")]
    pub basis_rank: usize,
    #[serde(default)]
    pub tolerances: TolerancePatch,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

/// Per-scenario tolerance overrides; unset fields keep the defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TolerancePatch {
    pub herm: Option<f64>,
    pub trace: Option<f64>,
    pub orth: Option<f64>,
    pub psd: Option<f64>,
    pub trunc: Option<f64>,
    pub degen: Option<f64>,
}

fn one() -> f64 {
    1.0
}

fn default_ladder() -> usize {
    8
}

fn default_rank() -> usize {
    4
}

pub const DEFAULT_SCENARIO: &str = include_str!("../../../../scenarios/default.toml");

impl Scenario {
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let mut s: Scenario = toml::from_str(text).map_err(|e| Error::InvalidScenario(e.to_string()))?;
        s.base_dir = base_dir.to_path_buf();
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&text, &dir)
    }

    pub fn default_scenario() -> Self {
        Self::parse(DEFAULT_SCENARIO, Path::new(".")).expect("bundled scenario is valid")
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidScenario(msg));
        for (name, v) in [("hbar", self.hbar), ("mass", self.mass), ("omega_unit", self.omega_unit)] {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{name} = {v} must be positive"));
            }
        }
        if !(self.omega.is_finite() && self.omega > 0.0) {
            return bad(format!("omega = {} must be positive", self.omega));
        }
        if self.a.iter().chain(&self.b).any(|x| !x.is_finite()) {
            return bad("weights must be finite".into());
        }
        if self.weight_a().norm() == 0.0 && self.weight_b().norm() == 0.0 {
            return bad("weights a and b are both zero".into());
        }
        match (self.separation, self.alpha2_abs_sq) {
            (None, None) => return bad("set either L or alpha2_abs_sq".into()),
            (Some(l), _) if !l.is_finite() => return bad(format!("L = {l} must be finite")),
            (_, Some(x)) if !(x.is_finite() && x >= 0.0) => return bad(format!("alpha2_abs_sq = {x} must be >= 0")),
            _ => {}
        }
        if self.dim == 0 {
            return bad("dim must be at least 1".into());
        }
        let g = &self.grid;
        if g.count < 8 {
            return bad(format!("grid count {} must be at least 8", g.count));
        }
        if !(g.t_min.is_finite() && g.t_max.is_finite() && g.t_max > g.t_min && g.t_min >= 0.0) {
            return bad(format!("grid bounds [{}, {}] are invalid", g.t_min, g.t_max));
        }
        if g.spacing == Spacing::Log && g.t_min <= 0.0 {
            return bad("log grid needs t_min > 0".into());
        }
        if self.ladder_size < 1 {
            return bad("ladder_size must be at least 1".into());
        }
        if let DensitySpec::Ohmic { eta, lambda_cutoff } = self.density {
            SpectralDensity::ohmic(eta, lambda_cutoff).map_err(|e| Error::InvalidScenario(e.to_string()))?;
        }
        self.tolerances(None)?;
        Ok(())
    }

    pub fn weight_a(&self) -> C64 {
        C64::new(self.a[0], self.a[1])
    }

    pub fn weight_b(&self) -> C64 {
        C64::new(self.b[0], self.b[1])
    }

    /// Spectral density in units of `omega_unit`.
    pub fn spectral_density(&self) -> Result<SpectralDensity> {
        match &self.density {
            DensitySpec::Ohmic { eta, lambda_cutoff } => SpectralDensity::ohmic(*eta, *lambda_cutoff),
            DensitySpec::Tabulated { path } => {
                let full = if path.is_absolute() { path.clone() } else { self.base_dir.join(path) };
                Ok(SpectralDensity::Tabulated(Tabulated::from_csv_path(&full)?))
            }
        }
    }

    /// Defaults, then scenario overrides, then an optional override string.
    pub fn tolerances(&self, overrides: Option<&str>) -> Result<Tolerances> {
        let mut t = Tolerances::default();
        let p = &self.tolerances;
        for (slot, v) in [
            (&mut t.herm, p.herm),
            (&mut t.trace, p.trace),
            (&mut t.orth, p.orth),
            (&mut t.psd, p.psd),
            (&mut t.trunc, p.trunc),
            (&mut t.degen, p.degen),
        ] {
            if let Some(v) = v {
                if !(v.is_finite() && v >= 0.0) {
                    return Err(Error::InvalidScenario(format!("tolerance {v} must be >= 0")));
                }
                *slot = v;
            }
        }
        match overrides {
            Some(s) => t.with_overrides(s),
            None => Ok(t),
        }
    }

    /// `kappa^2 = m w0' / (2 hbar^2)` with `w0'` the physical pole frequency.
    pub fn kappa_sq(&self, omega_prime: f64) -> f64 {
        self.mass * omega_prime * self.omega_unit / (2.0 * self.hbar * self.hbar)
    }

    /// `|alpha2(0)|^2`, from `alpha2_abs_sq` or from `L`.
    pub fn alpha2_abs_sq(&self, omega_prime: f64) -> f64 {
        match (self.alpha2_abs_sq, self.separation) {
            (Some(x), _) => x,
            (None, Some(l)) => self.kappa_sq(omega_prime) * l * l,
            (None, None) => unreachable!("validated"),
        }
    }

    /// Physical time per unit of natural time.
    pub fn time_scale(&self) -> f64 {
        self.hbar / self.omega_unit
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_default() {
        let s = Scenario::default_scenario();
        assert_eq!(s.dim, 128);
        assert_eq!(s.alpha2_abs_sq(0.9), 50.0);
        assert_eq!(s.density, DensitySpec::Ohmic { eta: 0.01, lambda_cutoff: 10.0 });
        assert_eq!(s.grid.spacing, Spacing::Log);
        let back = Scenario::parse(&s.to_toml(), Path::new(".")).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn separation_uses_kappa() {
        let text = DEFAULT_SCENARIO.replace("alpha2_abs_sq = 50.0", "L = 4.0");
        let s = Scenario::parse(&text, Path::new(".")).unwrap();
        assert_eq!(s.alpha2_abs_sq(1.0), 8.0);
    }

    #[test]
    fn invalid_scenarios() {
        let cases = [
            ("hbar = 1.0", "hbar = 0.0"),
            ("count = 200", "count = 4"),
            ("dim = 128", "dim = 0"),
            ("alpha2_abs_sq = 50.0", "alpha2_abs_sq = -1.0"),
            ("eta = 0.01", "eta = -0.01"),
            ("dim = 128", "dim = 128\nunknown_key = 3"),
        ];
        for (from, to) in cases {
            let text = DEFAULT_SCENARIO.replace(from, to);
            assert_ne!(text, DEFAULT_SCENARIO, "{from}");
            assert!(matches!(Scenario::parse(&text, Path::new(".")), Err(Error::InvalidScenario(_))), "{to}");
        }
        let zero = DEFAULT_SCENARIO
            .replace("a = [0.7071067811865476, 0.0]", "a = [0.0, 0.0]")
            .replace("b = [0.7071067811865476, 0.0]", "b = [0.0, 0.0]");
        assert!(Scenario::parse(&zero, Path::new(".")).is_err());
    }

    #[test]
    fn tolerance_layers() {
        let text = DEFAULT_SCENARIO.replace("dim = 128", "dim = 128\ntolerances = { psd = 1e-6 }");
        let s = Scenario::parse(&text, Path::new(".")).unwrap();
        assert_eq!(s.tolerances(None).unwrap().psd, 1e-6);
        assert_eq!(s.tolerances(Some("psd=1e-30")).unwrap().psd, 1e-30);
        assert_eq!(s.tolerances(None).unwrap().herm, Tolerances::default().herm);
    }
}
