//! How diagonal `rho_S(t)` is in the moving basis, and how close that basis
//! is to the evolved coherent branches.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::Serialize;

use super::decomposition::EntrywiseModeDecomposition;
use super::moving::{BasisFrame, BasisTrajectory};
use super::preferred::{compensated_truncation_bound, truncation_bound};
use crate::error::{Error, Result};
use crate::evolution::evolve_branch;
use crate::fock::{self, CoherentLabel, DensityMatrix};
use crate::linalg;
use crate::spectral::Pole;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiagonalityRow {
    pub time: f64,
    /// Off-diagonal Frobenius mass of `rho_S(t)` in the basis at `t`.
    pub mass: f64,
    /// `sum_fast |a_i| exp(-gamma_i t) + eps_herm dim`
    pub bound: f64,
    /// `bound` widened by the vacuum trace correction of `rho_P`.
    pub compensated_bound: f64,
}

pub fn diagonality_report(
    states: &[DensityMatrix],
    basis: &BasisTrajectory,
    decomp: &EntrywiseModeDecomposition,
    gamma_eff: f64,
) -> Result<Vec<DiagonalityRow>> {
    if states.len() != basis.frames.len() {
        return Err(Error::GridMismatch);
    }
    states
        .iter()
        .zip(&basis.frames)
        .map(|(rho, frame)| {
            let slack = rho.space().tolerances().herm * rho.space().dim() as f64;
            Ok(DiagonalityRow {
                time: frame.time,
                mass: fock::offdiagonal_mass_in(rho, &frame.vectors)?,
                bound: truncation_bound(decomp, frame.time, gamma_eff) + slack,
                compensated_bound: compensated_truncation_bound(decomp, frame.time, gamma_eff) + slack,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FidelityRow {
    pub time: f64,
    pub fidelity: f64,
    /// The evolved branches are (numerically) the same state, so the
    /// comparison uses single-vector spans.
    pub branches_coincide: bool,
}

/// Subspace fidelity `||A^dag B||_F^2 / k` between the `k` leading
/// eigenvectors `A` of each frame and the orthonormalized branch span `B`.
///
/// When the last selected eigenvalue sits in a degenerate cluster the
/// cluster vectors best aligned with `B` are used.
pub fn coherent_basis_fidelity(
    basis: &BasisTrajectory,
    alpha1: CoherentLabel,
    alpha2: CoherentLabel,
    pole: &Pole,
    times: &[f64],
) -> Result<Vec<FidelityRow>> {
    if times.len() != basis.frames.len()
        || times.iter().zip(&basis.frames).any(|(t, f)| (t - f.time).abs() > 1e-12 * t.abs().max(1.0))
    {
        return Err(Error::GridMismatch);
    }
    basis
        .frames
        .iter()
        .map(|frame| {
            let dim = frame.vectors.nrows();
            let b1 = evolve_branch(alpha1, pole, frame.time)?.label.alpha;
            let b2 = evolve_branch(alpha2, pole, frame.time)?.label.alpha;
            let v1 = unit(fock::coherent_amplitudes(b1, dim));
            let v2 = unit(fock::coherent_amplitudes(b2, dim));
            let pair = DMatrix::from_columns(&[v1.clone(), v2]);
            let (span, coincide) = match (b1 != b2).then(|| linalg::lowdin(&pair)).and_then(|r| r.ok()) {
                Some(s) => (s, false),
                None => (DMatrix::from_columns(&[v1]), true),
            };
            let k = span.ncols();
            let leading = leading_subspace(frame, &span, k);
            let fidelity = (leading.adjoint() * &span).norm_squared() / k as f64;
            Ok(FidelityRow { time: frame.time, fidelity, branches_coincide: coincide })
        })
        .collect()
}

fn unit(v: nalgebra::DVector<C64>) -> nalgebra::DVector<C64> {
    let n = v.norm();
    v.unscale(n)
}

// The k leading eigenvectors; from a degenerate cluster that would overfill
// the selection, take the directions closest to `target`.
fn leading_subspace(frame: &BasisFrame, target: &DMatrix<C64>, k: usize) -> DMatrix<C64> {
    let order = frame.descending();
    let mut chosen: Vec<nalgebra::DVector<C64>> = Vec::with_capacity(k);
    let mut pos = 0;
    while chosen.len() < k && pos < order.len() {
        let head = order[pos];
        let group: Vec<usize> = match frame.block[head] {
            Some(b) => order[pos..].iter().copied().filter(|&i| frame.block[i] == Some(b)).collect(),
            None => vec![head],
        };
        pos += group.len();
        let need = k - chosen.len();
        if group.len() <= need {
            chosen.extend(group.iter().map(|&i| frame.vectors.column(i).into_owned()));
        } else {
            let w = DMatrix::from_fn(frame.vectors.nrows(), group.len(), |r, c| frame.vectors[(r, group[c])]);
            // faer sorts singular values in descending order
            let Ok((_, right)) = linalg::svd_right(&(target.adjoint() * &w)) else {
                chosen.extend(group.iter().take(need).map(|&i| frame.vectors.column(i).into_owned()));
                continue;
            };
            for s in 0..need.min(right.ncols()) {
                chosen.push(&w * right.column(s));
            }
        }
    }
    DMatrix::from_columns(&chosen)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::decomposition::decompose_two_branch;
    use crate::basis::moving::moving_basis;
    use crate::basis::preferred::PreferredStateTrajectory;
    use crate::evolution::TwoBranchSystem;
    use crate::fock::FockSpace;
    use proptest::prelude::*;

    fn pole() -> Pole {
        Pole::new(1.0, 0.05).unwrap()
    }

    fn pipeline(
        alpha_sq: f64,
        dim: usize,
        times: &[f64],
    ) -> (TwoBranchSystem, EntrywiseModeDecomposition, PreferredStateTrajectory, BasisTrajectory) {
        let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let space = FockSpace::new(dim).unwrap();
        let sys = TwoBranchSystem::new(
            h,
            h,
            CoherentLabel::real(0.0).unwrap(),
            CoherentLabel::real(alpha_sq.sqrt()).unwrap(),
            pole(),
            space,
        )
        .unwrap();
        let d = decompose_two_branch(&sys, times).unwrap();
        let p = PreferredStateTrajectory::new(&d, times, space).unwrap();
        let b = moving_basis(&p).unwrap();
        (sys, d, p, b)
    }

    fn grid() -> Vec<f64> {
        (0..40).map(|k| 20.0 * (1.2f64.powi(k) - 1.0) / 1.2f64.powi(39)).collect()
    }

    #[test]
    fn coincident_branches_flagged() {
        let (sys, _, _, b) = pipeline(4.0, 32, &grid());
        let a = CoherentLabel::real(2.0).unwrap();
        let rows = coherent_basis_fidelity(&b, a, a, &sys.pole, &grid()).unwrap();
        assert!(rows.iter().all(|r| r.branches_coincide));
        assert!(rows.iter().all(|r| (0.0..=1.0 + 1e-12).contains(&r.fidelity)));
    }

    #[test]
    fn small_separation_degrades_fidelity() {
        let times = grid();
        let (sys, _, _, b) = pipeline(1.0, 32, &times);
        let rows = coherent_basis_fidelity(&b, sys.alpha1, sys.alpha2, &sys.pole, &times).unwrap();
        assert!(rows[0].fidelity < 0.99);
    }

    #[test]
    fn mass_vanishes_at_late_times() {
        let times: Vec<f64> = vec![0.0, 10.0, 100.0, 1000.0, 3000.0];
        let (sys, d, p, b) = pipeline(4.0, 32, &times);
        let states: Vec<_> = times.iter().map(|&t| sys.reduced_state(t).unwrap()).collect();
        let rows = diagonality_report(&states, &b, &d, p.gamma_eff).unwrap();
        assert!(rows[0].mass > 0.1);
        assert!(rows.last().unwrap().mass < 1e-12);
        assert!(diagonality_report(&states[1..], &b, &d, p.gamma_eff).is_err());
    }

    fn rephase(b: &BasisTrajectory, phases: &[f64]) -> BasisTrajectory {
        let mut out = b.clone();
        for f in &mut out.frames {
            for (k, mut col) in f.vectors.column_iter_mut().enumerate() {
                col *= C64::from_polar(1.0, phases[k % phases.len()]);
            }
        }
        out
    }

    proptest! {
        #![proptest_config(ProptestConfig { cases: 8, ..ProptestConfig::default() })]

        #[test]
        fn gauge_invariance(phases in prop::collection::vec(0.0f64..std::f64::consts::TAU, 1..16)) {
            let times = vec![0.0, 2.0, 20.0, 200.0];
            let (sys, d, p, b) = pipeline(4.0, 32, &times);
            let states: Vec<_> = times.iter().map(|&t| sys.reduced_state(t).unwrap()).collect();
            let r = rephase(&b, &phases);
            let m0 = diagonality_report(&states, &b, &d, p.gamma_eff).unwrap();
            let m1 = diagonality_report(&states, &r, &d, p.gamma_eff).unwrap();
            let f0 = coherent_basis_fidelity(&b, sys.alpha1, sys.alpha2, &sys.pole, &times).unwrap();
            let f1 = coherent_basis_fidelity(&r, sys.alpha1, sys.alpha2, &sys.pole, &times).unwrap();
            for (x, y) in m0.iter().zip(&m1) {
                prop_assert!((x.mass - y.mass).abs() < 1e-12);
            }
            for (x, y) in f0.iter().zip(&f1) {
                prop_assert!((x.fidelity - y.fidelity).abs() < 1e-12);
            }
        }
    }
}
