//! Second-order self-energy, the complex pole `z0 = w' - (i/2) gamma` and
//! its integer ladder `z_n = n z0`.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::density::{SpectralDensity, Tabulated};
use super::quadrature::{uniform_edges, GaussLegendre};
use crate::error::{Error, Result};

/// Numerical settings for the principal-value integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PvQuadrature {
    pub nodes_per_panel: usize,
    pub panels: usize,
    /// Accepted error estimate relative to `max(|shift|, pi J(w))`.
    pub rel_tol: f64,
}

impl Default for PvQuadrature {
    fn default() -> Self {
        Self { nodes_per_panel: 256, panels: 16, rel_tol: 1e-9 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelfEnergy {
    /// Principal-value frequency shift.
    pub shift: f64,
    /// `pi J(w)`.
    pub width_part: f64,
    pub error_estimate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pole {
    pub omega_prime: f64,
    pub gamma: f64,
}

impl Pole {
    pub fn new(omega_prime: f64, gamma: f64) -> Result<Self> {
        if !omega_prime.is_finite() {
            return Err(Error::InvalidPole(omega_prime));
        }
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::InvalidPole(gamma));
        }
        Ok(Self { omega_prime, gamma })
    }

    /// `w' - (i/2) gamma`
    pub fn z(&self) -> C64 {
        C64::new(self.omega_prime, -0.5 * self.gamma)
    }

    /// `exp(-i z t)`, the single-quantum propagator over natural time `t`.
    pub fn propagator(&self, t: f64) -> C64 {
        C64::from_polar((-0.5 * self.gamma * t).exp(), -self.omega_prime * t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoleLadder {
    base: Pole,
    n_max: usize,
}

impl PoleLadder {
    pub fn base(&self) -> Pole {
        self.base
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// `z_n = n z0` for `1 <= n <= n_max`.
    pub fn member(&self, n: usize) -> Option<Pole> {
        (1..=self.n_max).contains(&n).then(|| {
            let k = n as f64;
            Pole { omega_prime: k * self.base.omega_prime, gamma: k * self.base.gamma }
        })
    }

    pub fn members(&self) -> impl Iterator<Item = (usize, Pole)> + '_ {
        (1..=self.n_max).map(|n| (n, self.member(n).unwrap()))
    }
}

pub fn pole_ladder(base: Pole, n_max: usize) -> Result<PoleLadder> {
    if n_max < 1 {
        return Err(Error::EmptyLadder);
    }
    Ok(PoleLadder { base, n_max })
}

pub fn self_energy(j: &SpectralDensity, omega: f64) -> Result<SelfEnergy> {
    self_energy_with(j, omega, &PvQuadrature::default())
}

pub fn self_energy_with(j: &SpectralDensity, omega: f64, q: &PvQuadrature) -> Result<SelfEnergy> {
    let (lo, hi) = j.hull();
    if !(omega > lo && omega < hi) {
        return Err(Error::OutsideSupport { omega });
    }
    let j_w = j.evaluate(omega)?;
    let width_part = PI * j_w;
    let (shift, error_estimate) = match j {
        SpectralDensity::Ohmic { eta, lambda } => {
            if *eta == 0.0 {
                (0.0, 0.0)
            } else {
                let w_max = (10.0 * lambda).max(omega + 10.0 * lambda);
                ohmic_pv(j, omega, j_w, w_max, q)?
            }
        }
        SpectralDensity::Tabulated(t) => {
            if j_w == 0.0 && t.values().iter().any(|v| *v > 0.0) {
                return Err(Error::OutsideSupport { omega });
            }
            tabulated_pv(t, j, omega, j_w)?
        }
    };
    let scale = shift.abs().max(width_part).max(f64::MIN_POSITIVE);
    if error_estimate > q.rel_tol * scale {
        return Err(Error::QuadratureNonConvergence { estimate: error_estimate });
    }
    Ok(SelfEnergy { shift, width_part, error_estimate })
}

/// `w' = w + shift`, `gamma = 2 pi J(w)`.
pub fn pole_second_order(j: &SpectralDensity, omega: f64) -> Result<Pole> {
    let se = self_energy(j, omega)?;
    if se.width_part <= 0.0 {
        return Err(Error::FreeSystem);
    }
    Pole::new(omega + se.shift, 2.0 * se.width_part)
}

// Regular part of the subtracted integrand `[J(x) - J(w)] / (w - x)`.
fn subtracted(x: f64, omega: f64, j_w: f64, slope: f64, j: impl Fn(f64) -> f64) -> f64 {
    let d = omega - x;
    if d.abs() < 1e-8 * omega.abs().max(1.0) {
        -slope
    } else {
        (j(x) - j_w) / d
    }
}

fn ohmic_pv(j: &SpectralDensity, omega: f64, j_w: f64, w_max: f64, q: &PvQuadrature) -> Result<(f64, f64)> {
    let slope = j.derivative(omega)?;
    let rule = GaussLegendre::new(q.nodes_per_panel);
    let f = |x: f64| subtracted(x, omega, j_w, slope, |y| j.eval_inner(y));
    let (fine, abs_sum) = rule.composite(&uniform_edges(0.0, w_max, q.panels), f);
    let (coarse, _) = rule.composite(&uniform_edges(0.0, w_max, (q.panels / 2).max(1)), f);
    let log_term = j_w * (omega / (w_max - omega)).ln();
    let estimate = (fine - coarse).abs().max(64.0 * f64::EPSILON * abs_sum);
    Ok((fine + log_term + ohmic_tail(j, omega, w_max), estimate))
}

// Exact `int_{w_max}^inf J(x) / (w - x) dx` for the ohmic form:
// `-eta [lambda e^{-w_max/lambda} + w e^{-w/lambda} E1((w_max - w)/lambda)]`.
fn ohmic_tail(j: &SpectralDensity, omega: f64, w_max: f64) -> f64 {
    let SpectralDensity::Ohmic { eta, lambda } = *j else { return 0.0 };
    -eta * (lambda * (-w_max / lambda).exp()
        + omega * (-omega / lambda).exp() * exp_integral_e1((w_max - omega) / lambda))
}

/// `E1(x) = int_x^inf e^{-s}/s ds` for `x >= 1`, by its continued fraction.
pub(crate) fn exp_integral_e1(x: f64) -> f64 {
    debug_assert!(x >= 1.0);
    let tiny = 1e-300;
    let mut b = x + 1.0;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..200 {
        let an = -((i * i) as f64);
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h * (-x).exp()
}

// Each knot interval holds a cubic p_k. On interval k the subtracted
// integrand splits into [p_k(x) - p_k(w)] / (w - x), a polynomial handled
// by Gauss-Legendre, and [p_k(w) - J(w)] / (w - x), integrated in closed form.
fn tabulated_pv(t: &Tabulated, j: &SpectralDensity, omega: f64, j_w: f64) -> Result<(f64, f64)> {
    let slope = j.derivative(omega)?;
    let coarse_rule = GaussLegendre::new(16);
    let fine_rule = GaussLegendre::new(32);
    let own = t.interval(omega);
    let grid = t.grid();
    let mut fine = 0.0;
    let mut coarse = 0.0;
    let mut abs_sum = 0.0;
    for k in 0..grid.len() - 1 {
        let (a, b) = (grid[k], grid[k + 1]);
        let p_w = if k == own { j_w } else { t.eval_piece(k, omega) };
        let s = if k == own { slope } else { 0.0 };
        let f = |x: f64| subtracted(x, omega, p_w, s, |y| t.eval_piece(k, y));
        let (vf, af) = fine_rule.composite(&[a, b], f);
        let (vc, _) = coarse_rule.composite(&[a, b], f);
        fine += vf;
        coarse += vc;
        abs_sum += af;
        if k != own && omega != a && omega != b {
            let c = p_w - j_w;
            if c != 0.0 {
                fine += c * ((omega - a) / (omega - b)).abs().ln();
                coarse += c * ((omega - a) / (omega - b)).abs().ln();
            }
        }
    }
    let (lo, hi) = (grid[0], *grid.last().unwrap());
    let log_term = j_w * ((omega - lo) / (hi - omega)).ln();
    let estimate = (fine - coarse).abs().max(64.0 * f64::EPSILON * abs_sum);
    Ok((fine + log_term, estimate))
}
