//! Non-unitary pole evolution `exp(-i z0 N t)` of two coherent branches and
//! the vacuum-compensated reduced state.
//!
//! Times are natural (`hbar = 1`); a pole's `gamma` is then a rate.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::{self, CoherentLabel, DensityMatrix, FockSpace, StateVector};
use crate::modes::{DecayMode, ModeExpansion};
use crate::spectral::Pole;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveHamiltonian {
    pub pole: Pole,
}

impl EffectiveHamiltonian {
    /// Complex energy `n z0` of level `n`.
    pub fn level(&self, n: usize) -> C64 {
        self.pole.z() * n as f64
    }

    /// `exp(-i n z0 t)`
    pub fn level_propagator(&self, n: usize, t: f64) -> C64 {
        let k = n as f64;
        C64::from_polar((-0.5 * k * self.pole.gamma * t).exp(), -k * self.pole.omega_prime * t)
    }

    pub fn propagate(&self, c: &DVector<C64>, t: f64) -> Result<DVector<C64>> {
        check_time(t)?;
        Ok(DVector::from_fn(c.len(), |n, _| c[n] * self.level_propagator(n, t)))
    }
}

/// A coherent branch after pole evolution: the shrinking label
/// `alpha exp(-i z0 t)` and the retained weight of the branch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolvedBranch {
    pub label: CoherentLabel,
    pub survival: f64,
}

pub fn evolve_branch(alpha: CoherentLabel, pole: &Pole, t: f64) -> Result<EvolvedBranch> {
    check_time(t)?;
    let x = (-pole.gamma * t).exp();
    Ok(EvolvedBranch {
        label: CoherentLabel { alpha: alpha.alpha * pole.propagator(t) },
        survival: (-alpha.abs_sq() * (1.0 - x)).exp(),
    })
}

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::NegativeTime(t));
    }
    Ok(())
}

/// `sum_n b_n a_n^* exp(-i n z0 t)`
pub fn amplitude(a: &[C64], b: &[C64], pole: &Pole, t: f64) -> Result<C64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    check_time(t)?;
    let h = EffectiveHamiltonian { pole: *pole };
    Ok(a.iter().zip(b).enumerate().map(|(n, (an, bn))| bn * an.conj() * h.level_propagator(n, t)).sum())
}

/// `<alpha_i(0)|alpha_j(t)>` for untruncated coherent states:
/// `exp(-(|ai|^2 + |aj|^2)/2) exp(ai^* aj exp(-i z0 t))`.
pub fn coherent_overlap(ai: CoherentLabel, aj: CoherentLabel, pole: &Pole, t: f64) -> Result<C64> {
    check_time(t)?;
    let cross = ai.alpha.conj() * aj.alpha * pole.propagator(t);
    Ok((cross - 0.5 * (ai.abs_sq() + aj.abs_sq())).exp())
}

/// `exp(-|alpha2|^2 (1 - exp(-gamma t)))`
pub fn offdiag_factor(alpha2_abs_sq: f64, pole: &Pole, t: f64) -> Result<f64> {
    check_time(t)?;
    if !(alpha2_abs_sq >= 0.0) {
        return Err(Error::InvalidArgument(format!("|alpha2|^2 = {alpha2_abs_sq} must be >= 0")));
    }
    Ok((-alpha2_abs_sq * (-(-pole.gamma * t).exp_m1())).exp())
}

/// [`offdiag_factor`] as a sum of decaying modes:
/// `e^{-c} + sum_{k>=1} e^{-c} c^k / k! e^{-k gamma t}` with `c = |alpha2|^2`.
///
/// Terms are kept up to `k = c + 12 sqrt(c) + 40`. The Poisson weights are
/// built by ratio recurrence outward from the mode and then normalized, which
/// keeps their sum at one to rounding even for large `c`.
pub fn offdiag_factor_expansion(alpha2_abs_sq: f64, pole: &Pole) -> Result<ModeExpansion> {
    let c = alpha2_abs_sq;
    if !(c >= 0.0 && c.is_finite()) {
        return Err(Error::InvalidArgument(format!("|alpha2|^2 = {c} must be finite and >= 0")));
    }
    if c == 0.0 {
        return ModeExpansion::new(1.0, Vec::new());
    }
    let k_max = (c + 12.0 * c.sqrt() + 40.0).ceil() as usize;
    let peak = (c.floor() as usize).min(k_max);
    let mut w = vec![0.0; k_max + 1];
    w[peak] = 1.0;
    for k in (0..peak).rev() {
        w[k] = w[k + 1] * (k + 1) as f64 / c;
    }
    for k in peak + 1..=k_max {
        w[k] = w[k - 1] * c / k as f64;
    }
    let total: f64 = w.iter().sum();
    let mut modes = Vec::with_capacity(k_max);
    for (k, wk) in w.iter().enumerate().skip(1) {
        if *wk > 0.0 {
            modes.push(DecayMode::new(wk / total, k as f64 * pole.gamma, 0.0)?);
        }
    }
    ModeExpansion::new(w[0] / total, modes)
}

pub fn equilibrium_state(space: FockSpace) -> DensityMatrix {
    let vac = StateVector::number(0, space).expect("dimension >= 1");
    DensityMatrix::pure(&vac).expect("vacuum projector is valid")
}

/// Raw-trace excess treated as rounding rather than interference.
pub const TRACE_ROUNDING: f64 = 1e-12;

/// The initial superposition `a|alpha1> + b|alpha2>` together with the pole
/// that drives it.
#[derive(Debug, Clone)]
pub struct TwoBranchSystem {
    pub a: C64,
    pub b: C64,
    pub alpha1: CoherentLabel,
    pub alpha2: CoherentLabel,
    pub pole: Pole,
    space: FockSpace,
    v1: DVector<C64>,
    v2: DVector<C64>,
    norm0: f64,
}

/// Coefficients of the raw (uncompensated) evolved state on normalized
/// coherent dyads, `sum_ij c_ij |alpha_i(t)><alpha_j(t)|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DyadCoefficients {
    pub c11: f64,
    pub c22: f64,
    pub c12: C64,
}

impl TwoBranchSystem {
    pub fn new(
        a: C64,
        b: C64,
        alpha1: CoherentLabel,
        alpha2: CoherentLabel,
        pole: Pole,
        space: FockSpace,
    ) -> Result<Self> {
        let v1 = fock::coherent_vector(alpha1, space)?.components().clone();
        let v2 = fock::coherent_vector(alpha2, space)?.components().clone();
        let phi = &v1 * a + &v2 * b;
        let norm0 = phi.norm_squared();
        if norm0 <= 1e-24 * (a.norm_sqr() + b.norm_sqr()) {
            return Err(Error::ZeroState { norm_sq: norm0 });
        }
        Ok(Self { a, b, alpha1, alpha2, pole, space, v1, v2, norm0 })
    }

    pub fn space(&self) -> &FockSpace {
        &self.space
    }

    /// Squared norm of the truncated initial superposition.
    pub fn initial_norm_sq(&self) -> f64 {
        self.norm0
    }

    pub fn branches(&self, t: f64) -> Result<(EvolvedBranch, EvolvedBranch)> {
        Ok((evolve_branch(self.alpha1, &self.pole, t)?, evolve_branch(self.alpha2, &self.pole, t)?))
    }

    /// Environment which-path factor `exp(-|alpha2 - alpha1|^2 (1 - e^{-gamma t}) / 2)`.
    pub fn which_path(&self, t: f64) -> f64 {
        let d = (self.alpha2.alpha - self.alpha1.alpha).norm_sqr();
        (0.5 * d * (-self.pole.gamma * t).exp_m1()).exp()
    }

    pub fn dyad_coefficients(&self, t: f64) -> Result<DyadCoefficients> {
        let (b1, b2) = self.branches(t)?;
        let n0 = self.norm0;
        Ok(DyadCoefficients {
            c11: self.a.norm_sqr() * b1.survival / n0,
            c22: self.b.norm_sqr() * b2.survival / n0,
            c12: self.a * self.b.conj() * (b1.survival * b2.survival).sqrt() * self.which_path(t) / n0,
        })
    }

    /// Truncated, unnormalized `exp(-i z0 N t)|alpha_k>` for branch `k` in {1, 2}.
    pub(crate) fn propagated(&self, k: usize, t: f64) -> DVector<C64> {
        let h = EffectiveHamiltonian { pole: self.pole };
        let v = if k == 1 { &self.v1 } else { &self.v2 };
        DVector::from_fn(v.len(), |n, _| v[n] * h.level_propagator(n, t))
    }

    /// Truncated initial branch vectors.
    pub(crate) fn initial_vectors(&self) -> (&DVector<C64>, &DVector<C64>) {
        (&self.v1, &self.v2)
    }

    /// The pole-evolved matrix before vacuum compensation.
    pub fn raw_state(&self, t: f64) -> Result<DMatrix<C64>> {
        check_time(t)?;
        let u1 = self.propagated(1, t);
        let u2 = self.propagated(2, t);
        let e = self.which_path(t);
        let p1 = &u1 * self.a;
        let p2 = &u2 * self.b;
        let cross = &p1 * p2.adjoint() * C64::new(e, 0.0);
        let m = &p1 * p1.adjoint() + &p2 * p2.adjoint() + &cross + cross.adjoint();
        Ok(m.unscale(self.norm0))
    }

    /// `rho_S(t)`: the raw matrix with its lost trace deposited on `|0><0|`.
    /// If interference pushes the raw trace above one it is rescaled instead.
    pub fn reduced_state(&self, t: f64) -> Result<DensityMatrix> {
        let (m, _) = self.reduced_matrix(t)?;
        DensityMatrix::new(m, self.space)
    }

    /// Unvalidated reduced matrix and the applied vacuum correction.
    pub fn reduced_matrix(&self, t: f64) -> Result<(DMatrix<C64>, f64)> {
        let mut m = self.raw_state(t)?;
        let tr = m.trace().re;
        let deficit = 1.0 - tr;
        if deficit >= -TRACE_ROUNDING {
            m[(0, 0)] += deficit;
        } else {
            m.unscale_mut(tr);
        }
        Ok((m, deficit))
    }

    /// Branch cross coefficient read back from the reduced matrix: with
    /// `v1, v2` the normalized evolved branches and `u = v2 - <v1|v2> v1`,
    /// the `|v1><v2|` coefficient is `<v1|rho|u>/|u|^2 - B <v1|v2>` where
    /// `B = <u|rho|u>/|u|^4`. Vacuum compensation only feeds the `|v1><v1|`
    /// term when `alpha1 = 0`.
    pub fn extracted_cross_coefficient(&self, rho: &DMatrix<C64>, t: f64) -> Result<C64> {
        let (b1, b2) = self.branches(t)?;
        let v1 = fock::coherent_amplitudes(b1.label.alpha, self.space.dim());
        let v2 = fock::coherent_amplitudes(b2.label.alpha, self.space.dim());
        let v1 = v1.unscale(v1.norm());
        let v2 = v2.unscale(v2.norm());
        let s = v1.dotc(&v2);
        let u = &v2 - &v1 * s;
        let n2 = u.norm_squared();
        if !(n2 > 0.0) {
            return Err(Error::InvalidArgument("evolved branches coincide".into()));
        }
        let rho_u = rho * &u;
        let big_b = u.dotc(&rho_u).re / (n2 * n2);
        Ok(v1.dotc(&rho_u) / n2 - s * big_b)
    }

    /// Trace distance between `rho_S(t)` and `|0><0|` from untruncated
    /// coherent-state algebra, for the vacuum-branch case `alpha1 = 0`.
    pub fn trace_distance_to_vacuum_closed_form(&self, t: f64) -> Result<f64> {
        if self.alpha1.alpha != C64::new(0.0, 0.0) {
            return Err(Error::InvalidArgument("closed form needs alpha1 = 0".into()));
        }
        let (_, b2) = self.branches(t)?;
        let s0 = (-0.5 * self.alpha2.abs_sq()).exp();
        let n0 = self.a.norm_sqr() + self.b.norm_sqr() + 2.0 * (self.a.conj() * self.b).re * s0;
        let s = (-0.5 * b2.label.abs_sq()).exp();
        let r = (-(-b2.label.abs_sq()).exp_m1()).sqrt();
        let big_b = self.b.norm_sqr() * b2.survival / n0;
        let c = self.a * self.b.conj() * b2.survival.sqrt() * self.which_path(t) / n0;
        let mut big_a = self.a.norm_sqr() / n0;
        let raw_trace = big_a + big_b + 2.0 * c.re * s;
        let (mut big_b, mut c) = (big_b, c);
        if raw_trace <= 1.0 {
            big_a += 1.0 - raw_trace;
        } else {
            big_a /= raw_trace;
            big_b /= raw_trace;
            c /= raw_trace;
        }
        // rho - |0><0| in the orthonormal pair {|0>, (v - s|0>)/r}
        let p = big_a + big_b * s * s + 2.0 * c.re * s - 1.0;
        let q = (c + big_b * s) * r;
        let d = big_b * r * r;
        let mean = 0.5 * (p + d);
        let rad = (0.25 * (p - d) * (p - d) + q.norm_sqr()).sqrt();
        Ok(0.5 * ((mean + rad).abs() + (mean - rad).abs()))
    }
}

/// [`TwoBranchSystem::reduced_state`] as a free function.
pub fn reduced_state(
    a: C64,
    b: C64,
    alpha1: CoherentLabel,
    alpha2: CoherentLabel,
    pole: &Pole,
    t: f64,
    space: FockSpace,
) -> Result<DensityMatrix> {
    TwoBranchSystem::new(a, b, alpha1, alpha2, *pole, space)?.reduced_state(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{expectation, superposition_density, Observable};
    use proptest::prelude::*;

    const H: f64 = std::f64::consts::FRAC_1_SQRT_2;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn pole() -> Pole {
        Pole::new(1.0, 0.05).unwrap()
    }

    fn label(x: f64) -> CoherentLabel {
        CoherentLabel::real(x).unwrap()
    }

    fn vacuum_cat(alpha_sq: f64, dim: usize) -> TwoBranchSystem {
        let space = FockSpace::new(dim).unwrap();
        TwoBranchSystem::new(c(H), c(H), label(0.0), label(alpha_sq.sqrt()), pole(), space).unwrap()
    }

    #[test]
    fn amplitude_examples() {
        let p = pole();
        let vac = [c(1.0), c(0.0), c(0.0)];
        assert_eq!(amplitude(&vac, &vac, &p, 7.0).unwrap(), c(1.0));
        let one = [c(0.0), c(1.0), c(0.0)];
        let t: f64 = 3.0;
        let expected = C64::from_polar((-0.05 * t / 2.0).exp(), -t);
        assert!((amplitude(&one, &one, &p, t).unwrap() - expected).norm() < 1e-15);
        let x = [c(0.3), C64::new(0.1, 0.2), c(-0.5)];
        let y = [C64::new(0.0, 1.0), c(0.4), c(0.2)];
        let plain: C64 = x.iter().zip(&y).map(|(a, b)| b * a.conj()).sum();
        assert_eq!(amplitude(&x, &y, &p, 0.0).unwrap(), plain);
        assert!(matches!(amplitude(&x, &y[..2], &p, 0.0), Err(Error::LengthMismatch(3, 2))));
        assert!(matches!(amplitude(&x, &y, &p, -1.0), Err(Error::NegativeTime(_))));
    }

    #[test]
    fn overlap_examples() {
        let p = pole();
        let a = label(1.5);
        assert!((coherent_overlap(a, a, &p, 0.0).unwrap() - c(1.0)).norm() < 1e-15);
        for t in [0.0, 1.0, 30.0] {
            let o = coherent_overlap(label(0.0), a, &p, t).unwrap();
            assert!((o - c((-1.125_f64).exp())).norm() < 1e-15);
        }
        let late = coherent_overlap(a, a, &p, 2000.0).unwrap();
        assert!((late - c((-2.25_f64).exp())).norm() < 1e-15);
    }

    #[test]
    fn offdiag_factor_examples() {
        let p = pole();
        assert_eq!(offdiag_factor(50.0, &p, 0.0).unwrap(), 1.0);
        assert!((offdiag_factor(50.0, &p, 1e5).unwrap() / (-50.0_f64).exp() - 1.0).abs() < 1e-12);
        for k in 1..=10 {
            let t = 0.001 * k as f64 / p.gamma;
            let f = offdiag_factor(50.0, &p, t).unwrap();
            let linear = (-50.0 * p.gamma * t).exp();
            assert!((f / linear - 1.0).abs() < 0.01);
        }
    }

    #[test]
    fn equilibrium_is_vacuum() {
        let s = FockSpace::new(4).unwrap();
        let rho = equilibrium_state(s);
        assert_eq!(rho.entries()[(0, 0)], c(1.0));
        assert_eq!(rho.entries().iter().filter(|z| z.norm() != 0.0).count(), 1);
        assert_eq!(expectation(&rho, &Observable::number(s)).unwrap(), 0.0);
    }

    #[test]
    fn reduced_state_starts_at_superposition() {
        let sys = vacuum_cat(16.0, 64);
        let rho0 = sys.reduced_state(0.0).unwrap();
        let expected = superposition_density(c(H), c(H), label(0.0), label(4.0), *sys.space()).unwrap();
        assert!((rho0.entries() - expected.entries()).camax() < 1e-9);
    }

    #[test]
    fn reduced_state_relaxes_to_vacuum() {
        let sys = vacuum_cat(16.0, 64);
        let eq = equilibrium_state(*sys.space());
        let d50 = sys.reduced_state(50.0 / pole().gamma).unwrap().trace_distance(&eq).unwrap();
        assert!(d50 < 1e-3);
        let d100 = sys.reduced_state(100.0 / pole().gamma).unwrap().trace_distance(&eq).unwrap();
        assert!(d100 < 1e-6);
    }

    #[test]
    fn cross_coefficient_follows_offdiag_factor() {
        let sys = vacuum_cat(16.0, 64);
        let c0 = sys.extracted_cross_coefficient(&sys.raw_state(0.0).unwrap(), 0.0).unwrap();
        for &t in &[0.3, 3.0, 30.0, 300.0, 3000.0] {
            let (m, _) = sys.reduced_matrix(t).unwrap();
            let ct = sys.extracted_cross_coefficient(&m, t).unwrap();
            let f = offdiag_factor(16.0, &pole(), t).unwrap();
            assert!(((ct / c0).re / f - 1.0).abs() < 1e-10, "t = {t}");
            assert!((ct / c0).im.abs() < 1e-10 * f);
        }
    }

    #[test]
    fn closed_form_trace_distance_matches_matrix() {
        let sys = vacuum_cat(9.0, 64);
        let eq = equilibrium_state(*sys.space());
        for &t in &[0.0, 5.0, 20.0, 80.0] {
            let m = sys.reduced_state(t).unwrap().trace_distance(&eq).unwrap();
            let cf = sys.trace_distance_to_vacuum_closed_form(t).unwrap();
            assert!((m - cf).abs() < 1e-9, "t = {t}: {m} vs {cf}");
        }
    }

    #[test]
    fn branch_label_shrinks() {
        let p = pole();
        let mut prev = f64::INFINITY;
        for k in 0..20 {
            let t = k as f64 * 4.0;
            let b = evolve_branch(label(3.0), &p, t).unwrap();
            let r = b.label.alpha.norm();
            assert!((r - 3.0 * (-p.gamma * t / 2.0).exp()).abs() < 1e-14);
            assert!(r < prev && b.survival > 0.0 && b.survival <= 1.0);
            prev = r;
        }
        assert_eq!(evolve_branch(label(3.0), &p, 0.0).unwrap().survival, 1.0);
    }

    fn clabel() -> impl Strategy<Value = CoherentLabel> {
        (-3.0f64..3.0, -3.0f64..3.0).prop_map(|(x, y)| CoherentLabel::new(C64::new(x, y)).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig { cases: 32, ..ProptestConfig::default() })]

        #[test]
        fn overlap_bounded(ai in clabel(), aj in clabel(), t in 0.0f64..500.0) {
            prop_assert!(coherent_overlap(ai, aj, &pole(), t).unwrap().norm() <= 1.0 + 1e-15);
        }

        #[test]
        fn levels_never_mix(n in 0usize..12, t in 0.0f64..100.0) {
            let mut a = vec![c(0.0); 12];
            a[n] = c(1.0);
            let amp = amplitude(&a, &a, &pole(), t).unwrap();
            let z = pole().z();
            let expected = (-C64::i() * z * (n as f64) * t).exp();
            prop_assert!((amp - expected).norm() < 1e-13);
        }

        #[test]
        fn reduced_state_is_valid_and_purifies(
            a1 in clabel(), a2 in clabel(),
            wa in 0.1f64..1.0, wb in -1.0f64..1.0, phase in 0.0f64..std::f64::consts::TAU,
        ) {
            let space = FockSpace::new(64).unwrap();
            let sys = TwoBranchSystem::new(c(wa), C64::from_polar(wb, phase), a1, a2, pole(), space);
            prop_assume!(sys.is_ok());
            let sys = sys.unwrap();
            let eq = equilibrium_state(space);
            let mut prev = f64::INFINITY;
            for k in 0..12 {
                let t = 2.0_f64.powi(k) - 1.0;
                let rho = sys.reduced_state(t);
                prop_assert!(rho.is_ok(), "t = {}: {:?}", t, rho.err());
                let d = rho.unwrap().trace_distance(&eq).unwrap();
                if a1.alpha == C64::new(0.0, 0.0) {
                    prop_assert!(d <= prev + 1e-9);
                }
                prev = d;
            }
        }
    }

    #[test]
    fn offdiag_expansion_sums_to_factor() {
        let p = pole();
        for c in [0.0, 1.0, 16.0, 50.0, 2000.0] {
            let exp = offdiag_factor_expansion(c, &p).unwrap();
            for t in [0.0, 0.3, 2.0, 40.0] {
                let want = offdiag_factor(c, &p, t).unwrap();
                assert!((exp.evaluate(t) - want).abs() < 1e-12 * want.max(1e-300) + 1e-15, "c={c} t={t}");
            }
        }
    }
}
