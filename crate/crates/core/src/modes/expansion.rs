//! Signals of the form `eq + sum_i a_i cos(w_i t + phi_i) exp(-gamma_i t)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayMode {
    /// `a_i`; the mode contributes `a_i cos(phase)` at `t = 0`.
    pub amplitude: f64,
    pub gamma: f64,
    pub omega: f64,
    #[serde(default)]
    pub phase: f64,
}

impl DecayMode {
    pub fn new(amplitude: f64, gamma: f64, omega: f64) -> Result<Self> {
        Self::with_phase(amplitude, gamma, omega, 0.0)
    }

    pub fn with_phase(amplitude: f64, gamma: f64, omega: f64, phase: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::InvalidArgument(format!("mode width {gamma} must be > 0")));
        }
        if !(amplitude.is_finite() && omega.is_finite() && phase.is_finite()) {
            return Err(Error::InvalidArgument("mode parameters must be finite".into()));
        }
        Ok(Self { amplitude, gamma, omega, phase })
    }

    /// `a_i(0)`
    pub fn initial(&self) -> f64 {
        self.amplitude * self.phase.cos()
    }

    pub fn value(&self, t: f64) -> f64 {
        self.amplitude * (self.omega * t + self.phase).cos() * (-self.gamma * t).exp()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeExpansion {
    pub equilibrium: f64,
    modes: Vec<DecayMode>,
}

impl ModeExpansion {
    /// Sorts by `(gamma, omega)` and merges modes that agree in width,
    /// frequency and phase.
    pub fn new(equilibrium: f64, mut modes: Vec<DecayMode>) -> Result<Self> {
        for m in &modes {
            DecayMode::with_phase(m.amplitude, m.gamma, m.omega, m.phase)?;
        }
        modes.sort_by(|a, b| a.gamma.total_cmp(&b.gamma).then(a.omega.total_cmp(&b.omega)));
        let mut merged: Vec<DecayMode> = Vec::with_capacity(modes.len());
        for m in modes {
            match merged.last_mut() {
                Some(last) if last.gamma == m.gamma && last.omega == m.omega && last.phase == m.phase => {
                    last.amplitude += m.amplitude;
                }
                _ => merged.push(m),
            }
        }
        Ok(Self { equilibrium, modes: merged })
    }

    pub fn modes(&self) -> &[DecayMode] {
        &self.modes
    }

    pub fn is_static(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn evaluate(&self, t: f64) -> f64 {
        self.equilibrium + self.modes.iter().map(|m| m.value(t)).sum::<f64>()
    }

    pub(crate) fn require_modes(&self) -> Result<()> {
        if self.modes.is_empty() {
            return Err(Error::EmptyExpansion);
        }
        Ok(())
    }
}

pub fn evaluate_expansion(exp: &ModeExpansion, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::NegativeTime(t));
    }
    Ok(exp.evaluate(t))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_exponential() {
        let e = ModeExpansion::new(0.5, vec![DecayMode::new(0.5, 1.0, 0.0).unwrap()]).unwrap();
        assert_eq!(evaluate_expansion(&e, 0.0).unwrap(), 1.0);
        assert!((evaluate_expansion(&e, 1.0).unwrap() - (0.5 + 0.5 / std::f64::consts::E)).abs() < 1e-15);
        assert!((evaluate_expansion(&e, 1.0).unwrap() - 0.6839).abs() < 1e-4);
        assert!((evaluate_expansion(&e, 100.0).unwrap() - 0.5).abs() <= 0.5 * (-100.0_f64).exp());
        assert!(evaluate_expansion(&e, -1.0).is_err());
    }

    #[test]
    fn sorted_and_merged() {
        let e = ModeExpansion::new(
            0.0,
            vec![
                DecayMode::new(1.0, 3.0, 0.0).unwrap(),
                DecayMode::new(1.0, 1.0, 2.0).unwrap(),
                DecayMode::new(2.0, 1.0, 0.0).unwrap(),
                DecayMode::new(0.5, 3.0, 0.0).unwrap(),
            ],
        )
        .unwrap();
        let g: Vec<_> = e.modes().iter().map(|m| (m.amplitude, m.gamma, m.omega)).collect();
        assert_eq!(g, vec![(2.0, 1.0, 0.0), (1.0, 1.0, 2.0), (1.5, 3.0, 0.0)]);
    }

    #[test]
    fn invalid_width_rejected() {
        assert!(DecayMode::new(1.0, 0.0, 0.0).is_err());
        assert!(DecayMode::new(1.0, -2.0, 0.0).is_err());
    }
}
