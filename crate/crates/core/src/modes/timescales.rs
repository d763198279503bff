//! Relaxation and decoherence times of a mode expansion.
//!
//! Widths are rates (`hbar = 1`), so `t_R = 1/gamma_min` and `t_D = 1/gamma_eff`.

use serde::{Deserialize, Serialize};

use super::expansion::{DecayMode, ModeExpansion};
use crate::error::{Error, Result};

/// Which modes enter the amplitude-weighted width average.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GammaEffReading {
    /// Leave out the slowest width `gamma_0`, unless nothing else remains.
    #[default]
    PaperStyle,
    AllModes,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaEff {
    pub value: f64,
    pub reading: GammaEffReading,
    /// Set when mixed-sign amplitudes put the value outside the width range.
    pub outside_width_range: bool,
}

fn weighted_modes(exp: &ModeExpansion, reading: GammaEffReading) -> Result<Vec<DecayMode>> {
    exp.require_modes()?;
    let modes = exp.modes();
    let g0 = modes[0].gamma;
    let faster: Vec<DecayMode> = modes.iter().copied().filter(|m| m.gamma > g0).collect();
    Ok(match reading {
        GammaEffReading::PaperStyle if !faster.is_empty() => faster,
        _ => modes.to_vec(),
    })
}

/// `sum a_i(0) gamma_i / sum a_i(0)` over the modes selected by `reading`.
pub fn gamma_eff(exp: &ModeExpansion, reading: GammaEffReading) -> Result<GammaEff> {
    let modes = weighted_modes(exp, reading)?;
    let sum: f64 = modes.iter().map(DecayMode::initial).sum();
    let total: f64 = modes.iter().map(|m| m.initial().abs()).sum();
    if !(sum.abs() > 1e-12 * total) {
        return Err(Error::DegenerateExpansion { sum, total });
    }
    let value = modes.iter().map(|m| m.initial() * m.gamma).sum::<f64>() / sum;
    let lo = modes.iter().map(|m| m.gamma).fold(f64::INFINITY, f64::min);
    let hi = modes.iter().map(|m| m.gamma).fold(0.0, f64::max);
    let slack = 1e-12 * hi;
    Ok(GammaEff { value, reading, outside_width_range: value < lo - slack || value > hi + slack })
}

pub fn relaxation_time(exp: &ModeExpansion) -> Result<f64> {
    exp.require_modes()?;
    Ok(1.0 / exp.modes()[0].gamma)
}

pub fn decoherence_time(exp: &ModeExpansion, reading: GammaEffReading) -> Result<f64> {
    Ok(1.0 / gamma_eff(exp, reading)?.value)
}

/// Splits at `gamma_eff`; a width equal to it (to rounding) counts as slow.
pub fn split_at(modes: &[DecayMode], gamma_eff: f64) -> (Vec<DecayMode>, Vec<DecayMode>) {
    modes.iter().partition(|m| is_slow(m.gamma, gamma_eff))
}

pub(crate) fn is_slow(gamma: f64, gamma_eff: f64) -> bool {
    gamma <= gamma_eff * (1.0 + 1e-12)
}

pub fn classify_modes(exp: &ModeExpansion, reading: GammaEffReading) -> Result<(Vec<DecayMode>, Vec<DecayMode>)> {
    let g = gamma_eff(exp, reading)?;
    Ok(split_at(exp.modes(), g.value))
}

/// `(g0, g1)` with `g0 = ln sum a_i(0)` and `g1 = -sum a_i(0) gamma_i / sum a_i(0)`
/// over all modes.
pub fn short_time_log_expansion(exp: &ModeExpansion) -> Result<(f64, f64)> {
    exp.require_modes()?;
    let sum: f64 = exp.modes().iter().map(DecayMode::initial).sum();
    if !(sum > 0.0) {
        return Err(Error::NonPositiveAmplitudeSum(sum));
    }
    let rate = exp.modes().iter().map(|m| m.initial() * m.gamma).sum::<f64>() / sum;
    Ok((sum.ln(), -rate))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimescaleReport {
    pub gamma0: f64,
    pub gamma_eff: GammaEff,
    pub slow: Vec<DecayMode>,
    pub fast: Vec<DecayMode>,
}

impl TimescaleReport {
    pub fn new(exp: &ModeExpansion, reading: GammaEffReading) -> Result<Self> {
        let gamma_eff = gamma_eff(exp, reading)?;
        let (slow, fast) = split_at(exp.modes(), gamma_eff.value);
        Ok(Self { gamma0: exp.modes()[0].gamma, gamma_eff, slow, fast })
    }

    pub fn t_r(&self) -> f64 {
        1.0 / self.gamma0
    }

    pub fn t_d(&self) -> f64 {
        1.0 / self.gamma_eff.value
    }
}
