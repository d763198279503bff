//! Matrix-pencil recovery of decaying modes from uniformly sampled signals.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::expansion::{DecayMode, ModeExpansion};
use crate::error::{Error, Result};
use crate::linalg;

/// Relative singular-value floor below which the signal is rank deficient.
const RANK_FLOOR: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq)]
pub struct ExtractedModes {
    pub equilibrium: f64,
    /// Recovered modes with `gamma > 0`.
    pub modes: Vec<DecayMode>,
    /// Non-decaying or growing components, kept for diagnostics.
    pub unstable: Vec<DecayMode>,
    pub max_residual: f64,
}

impl ExtractedModes {
    pub fn has_unstable(&self) -> bool {
        !self.unstable.is_empty()
    }

    pub fn expansion(&self) -> Result<ModeExpansion> {
        ModeExpansion::new(self.equilibrium, self.modes.clone())
    }
}

/// Fits `model_order` complex exponentials plus a constant.
///
/// A damped cosine counts as two exponentials, so a signal with `k` pure
/// decays and `j` oscillating modes needs `model_order = k + 2j`.
pub fn extract_modes(samples: &[(f64, f64)], model_order: usize) -> Result<ExtractedModes> {
    if model_order < 1 {
        return Err(Error::InvalidArgument("model order must be at least 1".into()));
    }
    let needed = 2 * model_order + 2;
    if samples.len() < needed {
        return Err(Error::TooFewSamples { needed, got: samples.len() });
    }
    let dt = samples[1].0 - samples[0].0;
    if !(dt > 0.0) {
        return Err(Error::NonUniformSampling { index: 1 });
    }
    for (k, w) in samples.windows(2).enumerate() {
        let step = w[1].0 - w[0].0;
        if (step - dt).abs() > 1e-9 * dt {
            return Err(Error::NonUniformSampling { index: k + 1 });
        }
    }
    let t0 = samples[0].0;
    let y: Vec<f64> = samples.iter().map(|s| s.1).collect();
    let diffs: Vec<f64> = y.windows(2).map(|w| w[1] - w[0]).collect();
    let scale = y.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if diffs.iter().all(|d| d.abs() <= 1e-14 * scale.max(f64::MIN_POSITIVE)) {
        // nothing decays: the only component is a constant
        let eq = y.iter().sum::<f64>() / y.len() as f64;
        return Ok(ExtractedModes {
            equilibrium: eq,
            modes: vec![],
            unstable: vec![DecayMode { amplitude: 0.0, gamma: 0.0, omega: 0.0, phase: 0.0 }],
            max_residual: y.iter().map(|v| (v - eq).abs()).fold(0.0, f64::max),
        });
    }

    let poles = pencil_poles(&diffs, model_order)?;
    let coeffs = vandermonde_fit(&y, &poles)?;
    let fitted = |k: usize| {
        coeffs[0].re + poles.iter().zip(coeffs.iter().skip(1)).map(|(z, c)| (c * z.powu(k as u32)).re).sum::<f64>()
    };
    let max_residual = (0..y.len()).map(|k| (fitted(k) - y[k]).abs()).fold(0.0, f64::max);

    let mut modes = Vec::new();
    let mut unstable = Vec::new();
    let im_tol = 1e-9;
    for (z, c) in poles.iter().zip(coeffs.iter().skip(1)) {
        let gamma = -z.norm().ln() / dt;
        let angle = z.arg();
        let mode = if angle.abs() <= im_tol {
            DecayMode { amplitude: c.re, gamma, omega: 0.0, phase: 0.0 }
        } else if (PI - angle.abs()) <= im_tol {
            DecayMode { amplitude: c.re, gamma, omega: PI / dt, phase: 0.0 }
        } else if angle > 0.0 {
            // conjugate partner carries the complex-conjugate coefficient
            DecayMode { amplitude: 2.0 * c.norm(), gamma, omega: angle / dt, phase: c.arg() }
        } else {
            continue;
        };
        // shift the time origin back to t = 0
        let mode =
            DecayMode { amplitude: mode.amplitude * (gamma * t0).exp(), phase: mode.phase - mode.omega * t0, ..mode };
        if gamma > 0.0 {
            modes.push(mode);
        } else {
            unstable.push(mode);
        }
    }
    modes.sort_by(|a, b| a.gamma.total_cmp(&b.gamma).then(a.omega.total_cmp(&b.omega)));
    Ok(ExtractedModes { equilibrium: coeffs[0].re, modes, unstable, max_residual })
}

fn pencil_poles(x: &[f64], order: usize) -> Result<Vec<C64>> {
    let n = x.len();
    let l = (n / 3).max(order);
    let rows = n - l;
    if rows < order || l < order {
        return Err(Error::TooFewSamples { needed: 3 * order + 1, got: n + 1 });
    }
    let hankel = DMatrix::from_fn(rows, l + 1, |i, j| x[i + j]);
    let (sv, right) = linalg::svd_right(&hankel)?;
    let rank = sv.iter().filter(|&&s| s > RANK_FLOOR * sv[0]).count();
    if rank < order {
        return Err(Error::RankDeficient { rank, requested: order });
    }
    // (l+1) x order matrix of the dominant right singular vectors
    let v = right.columns(0, order).into_owned();
    let pencil = least_squares(v.rows(0, l).into_owned(), &v.rows(1, l).into_owned())?;
    Ok(pencil.complex_eigenvalues().iter().copied().collect())
}

/// Householder least squares for a tall matrix of full column rank.
fn least_squares<T: nalgebra::ComplexField<RealField = f64> + Copy>(
    a: DMatrix<T>,
    b: &DMatrix<T>,
) -> Result<DMatrix<T>> {
    let n = a.ncols();
    let qr = a.qr();
    let rhs = qr.q().adjoint() * b;
    qr.r()
        .solve_upper_triangular(&rhs.rows(0, n).into_owned())
        .ok_or_else(|| Error::InvalidArgument("least-squares system is singular".into()))
}

fn vandermonde_fit(y: &[f64], poles: &[C64]) -> Result<Vec<C64>> {
    let n = y.len();
    let m = poles.len() + 1;
    let a = DMatrix::from_fn(n, m, |k, j| if j == 0 { C64::new(1.0, 0.0) } else { poles[j - 1].powu(k as u32) });
    let b = DMatrix::from_fn(n, 1, |k, _| C64::new(y[k], 0.0));
    Ok(least_squares(a, &b)?.iter().copied().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(f: impl Fn(f64) -> f64, n: usize, dt: f64) -> Vec<(f64, f64)> {
        (0..n).map(|k| (k as f64 * dt, f(k as f64 * dt))).collect()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn two_decays_and_constant() {
        let s = sample(|t| 2.0 * (-0.1 * t).exp() + 0.5 * (-1.5 * t).exp() + 0.3, 64, 0.5);
        let r = extract_modes(&s, 2).unwrap();
        assert!(!r.has_unstable());
        assert!(rel(r.equilibrium, 0.3) < 1e-6);
        let m = &r.modes;
        assert!(rel(m[0].amplitude, 2.0) < 1e-6 && rel(m[0].gamma, 0.1) < 1e-6 && m[0].omega == 0.0);
        assert!(rel(m[1].amplitude, 0.5) < 1e-6 && rel(m[1].gamma, 1.5) < 1e-6 && m[1].omega == 0.0);
    }

    #[test]
    fn constant_is_flagged() {
        let s = sample(|_| 0.42, 20, 1.0);
        let r = extract_modes(&s, 1).unwrap();
        assert!(r.has_unstable());
        assert!(r.modes.is_empty());
        assert!(r.unstable[0].gamma.abs() < 1e-12);
        assert!((r.equilibrium - 0.42).abs() < 1e-15);
    }

    #[test]
    fn damped_cosine() {
        let s = sample(|t| (-t).exp() * (2.0 * t).cos(), 64, 0.05);
        let r = extract_modes(&s, 2).unwrap();
        assert_eq!(r.modes.len(), 1);
        let m = r.modes[0];
        assert!(rel(m.gamma, 1.0) < 1e-6 && rel(m.omega, 2.0) < 1e-6);
        assert!(rel(m.amplitude, 1.0) < 1e-6 && m.phase.abs() < 1e-6);
        assert!(r.equilibrium.abs() < 1e-6);
    }

    #[test]
    fn shifted_time_origin() {
        let s: Vec<_> = (0..40)
            .map(|k| {
                let t = 3.0 + 0.25 * k as f64;
                (t, 1.5 * (-0.4 * t).exp() - 0.1)
            })
            .collect();
        let r = extract_modes(&s, 1).unwrap();
        assert!(rel(r.modes[0].amplitude, 1.5) < 1e-8);
        assert!(rel(r.equilibrium, -0.1) < 1e-8);
    }

    #[test]
    fn growing_mode_is_unstable() {
        let s = sample(|t| (0.05 * t).exp() + 1.0, 30, 0.5);
        let r = extract_modes(&s, 1).unwrap();
        assert!(r.has_unstable());
        assert!(r.unstable[0].gamma < 0.0);
    }

    #[test]
    fn preconditions() {
        let s = sample(|t| (-t).exp(), 5, 0.1);
        assert!(matches!(extract_modes(&s, 2), Err(Error::TooFewSamples { needed: 6, got: 5 })));
        let mut s = sample(|t| (-t).exp(), 20, 0.1);
        s[7].0 += 0.01;
        assert!(matches!(extract_modes(&s, 1), Err(Error::NonUniformSampling { index: 7 })));
        let s = sample(|t| (-t).exp(), 30, 0.1);
        assert!(matches!(extract_modes(&s, 3), Err(Error::RankDeficient { rank: 1, requested: 3 })));
    }
}
