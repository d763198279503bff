//! The preferred state: equilibrium plus the slow modes of every entry.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::decomposition::{ComplexMode, EntrywiseModeDecomposition};
use crate::error::{Error, Result};
use crate::fock::FockSpace;
use crate::linalg;
use crate::modes::timescales::is_slow;

/// `sum |c_k| gamma_k / sum |c_k|` over every mode of the matrix.
///
/// A static decomposition has no fast modes; it reports `+inf`.
pub fn pooled_gamma_eff(decomp: &EntrywiseModeDecomposition) -> f64 {
    let (num, den) =
        decomp.pooled_modes().fold((0.0, 0.0), |(n, d), m| (n + m.amplitude.norm() * m.gamma, d + m.amplitude.norm()));
    if den > 0.0 {
        num / den
    } else {
        f64::INFINITY
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PreferredState {
    pub matrix: DMatrix<C64>,
    /// Largest entry change made by Hermitization.
    pub hermitian_correction: f64,
    /// Weight added to `|0><0|` to restore unit trace.
    pub trace_correction: f64,
}

/// `rho_P(t)`: slow modes only, Hermitized, with the trace restored on the vacuum.
pub fn preferred_state(decomp: &EntrywiseModeDecomposition, t: f64, gamma_eff: f64) -> Result<PreferredState> {
    if !(t >= 0.0) {
        return Err(Error::NegativeTime(t));
    }
    let truncated = decomp.evaluate_filtered(t, |m| is_slow(m.gamma, gamma_eff));
    let hermitian_correction = 0.5 * linalg::hermitian_deviation(&truncated);
    let mut matrix = linalg::hermitize(&truncated);
    let trace_correction = 1.0 - matrix.trace().re;
    matrix[(0, 0)] += trace_correction;
    Ok(PreferredState { matrix, hermitian_correction, trace_correction })
}

/// `sum_fast |c_k| exp(-gamma_k t)` over every entry.
pub fn truncation_bound(decomp: &EntrywiseModeDecomposition, t: f64, gamma_eff: f64) -> f64 {
    fast_envelope(decomp.pooled_modes(), t, gamma_eff)
}

/// [`truncation_bound`] plus the largest possible vacuum trace correction,
/// i.e. the fast envelope of the diagonal counted twice.
pub fn compensated_truncation_bound(decomp: &EntrywiseModeDecomposition, t: f64, gamma_eff: f64) -> f64 {
    let diagonal = decomp.upper_entries().filter(|((m, n), _)| m == n).flat_map(|(_, e)| e.modes.iter());
    truncation_bound(decomp, t, gamma_eff) + fast_envelope(diagonal, t, gamma_eff)
}

fn fast_envelope<'a>(modes: impl Iterator<Item = &'a ComplexMode>, t: f64, gamma_eff: f64) -> f64 {
    modes.filter(|m| !is_slow(m.gamma, gamma_eff)).map(|m| m.amplitude.norm() * (-m.gamma * t).exp()).sum()
}

/// Hermitian, unit-trace operators `rho_P(t)` on a time grid.
///
/// Slow-mode truncation does not preserve positivity, so the states are not
/// required to be positive semidefinite.
#[derive(Debug, Clone)]
pub struct PreferredStateTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<DMatrix<C64>>,
    pub gamma_eff: f64,
    pub max_hermitian_correction: f64,
    pub max_trace_correction: f64,
    pub space: FockSpace,
}

impl PreferredStateTrajectory {
    pub fn new(decomp: &EntrywiseModeDecomposition, times: &[f64], space: FockSpace) -> Result<Self> {
        space.check_len(decomp.dim())?;
        let gamma_eff = pooled_gamma_eff(decomp);
        let mut states = Vec::with_capacity(times.len());
        let (mut herm, mut trace) = (0.0_f64, 0.0_f64);
        for &t in times {
            let p = preferred_state(decomp, t, gamma_eff)?;
            herm = herm.max(p.hermitian_correction);
            trace = trace.max(p.trace_correction.abs());
            states.push(p.matrix);
        }
        Ok(Self {
            times: times.to_vec(),
            states,
            gamma_eff,
            max_hermitian_correction: herm,
            max_trace_correction: trace,
            space,
        })
    }

    /// Checks Hermiticity and unit trace of every state.
    pub fn validate(&self) -> Result<()> {
        let tol = self.space.tolerances();
        for s in &self.states {
            self.space.check_len(s.nrows())?;
            let deviation = linalg::hermitian_deviation(s);
            if !(deviation <= tol.herm) {
                return Err(Error::NotHermitian { deviation });
            }
            let deviation = (s.trace() - C64::new(1.0, 0.0)).norm();
            if !(deviation <= tol.trace) {
                return Err(Error::TraceNotUnit { deviation });
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::decomposition::{decompose_two_branch, EntryExpansion};
    use crate::evolution::{equilibrium_state, TwoBranchSystem};
    use crate::fock::CoherentLabel;
    use crate::spectral::Pole;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn two_pole() -> EntrywiseModeDecomposition {
        // population a0 e^{-g0 t} + a1 e^{-g1 t} moving out of level 1
        let (a0, g0, a1, g1) = (0.3, 0.01, 0.2, 10.0);
        EntrywiseModeDecomposition::from_fn(2, |m, n| match (m, n) {
            (0, 0) => EntryExpansion {
                equilibrium: c(1.0),
                modes: vec![
                    ComplexMode { amplitude: c(-a0), gamma: g0, nu: 0.0 },
                    ComplexMode { amplitude: c(-a1), gamma: g1, nu: 0.0 },
                ],
            },
            (1, 1) => EntryExpansion {
                equilibrium: c(0.0),
                modes: vec![
                    ComplexMode { amplitude: c(a0), gamma: g0, nu: 0.0 },
                    ComplexMode { amplitude: c(a1), gamma: g1, nu: 0.0 },
                ],
            },
            _ => EntryExpansion {
                equilibrium: c(0.0),
                modes: vec![ComplexMode { amplitude: C64::new(0.1, 0.05), gamma: g1, nu: 1.0 }],
            },
        })
    }

    #[test]
    fn two_pole_truncation_bound() {
        let d = two_pole();
        let g = pooled_gamma_eff(&d);
        assert!(g > 0.01 && g < 10.0);
        let t = 5.0 / 10.0;
        let p = preferred_state(&d, t, g).unwrap();
        let diff = (&p.matrix - d.evaluate(t)).norm();
        assert!(diff <= truncation_bound(&d, t, g));
        // only the population mode a1 on the diagonal plus the coherence
        let a1_bound = 2.0 * 0.2 * (-5.0_f64).exp() + 2.0 * C64::new(0.1, 0.05).norm() * (-5.0_f64).exp();
        assert!(diff <= a1_bound + 1e-15);
        assert!(p.trace_correction.abs() < 1e-15);
    }

    #[test]
    fn all_slow_reproduces_state() {
        let d = two_pole();
        for t in [0.0, 0.3, 20.0] {
            let p = preferred_state(&d, t, f64::INFINITY).unwrap();
            assert!((&p.matrix - d.evaluate(t)).norm() < 1e-15);
        }
    }

    #[test]
    fn long_time_limit_is_vacuum() {
        let space = FockSpace::new(48).unwrap();
        let sys = TwoBranchSystem::new(
            c(0.6),
            c(0.8),
            CoherentLabel::real(0.0).unwrap(),
            CoherentLabel::real(3.0).unwrap(),
            Pole::new(1.0, 0.05).unwrap(),
            space,
        )
        .unwrap();
        let times = [0.0, 1.0, 10.0, 100.0, 1000.0, 5000.0];
        let d = decompose_two_branch(&sys, &times).unwrap();
        let traj = PreferredStateTrajectory::new(&d, &times, space).unwrap();
        traj.validate().unwrap();
        let eq = equilibrium_state(space);
        assert!((traj.states.last().unwrap() - eq.entries()).norm() < 1e-12);
    }
}
