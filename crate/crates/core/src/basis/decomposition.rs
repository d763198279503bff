//! Mode expansions of every matrix element of `rho_S(t)` in the Fock basis.
//!
//! Entry `(m, n)` is `eq + sum_k c_k exp(-gamma_k t) exp(-i nu_k t)` with
//! complex `eq` and `c_k`. Only `m <= n` is stored; the lower triangle is the
//! conjugate mirror.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::evolution::{TwoBranchSystem, TRACE_ROUNDING};
use crate::modes::{extract_modes, DecayMode, ModeExpansion};

/// Amplitudes below this are dropped from analytic expansions.
pub const AMPLITUDE_FLOOR: f64 = 1e-20;
/// Round-trip tolerance between an expansion and the entries it came from.
pub const ROUND_TRIP_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexMode {
    pub amplitude: C64,
    pub gamma: f64,
    pub nu: f64,
}

impl ComplexMode {
    pub fn value(&self, t: f64) -> C64 {
        self.amplitude * C64::from_polar((-self.gamma * t).exp(), -self.nu * t)
    }

    fn mirrored(&self) -> Self {
        Self { amplitude: self.amplitude.conj(), gamma: self.gamma, nu: -self.nu }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct EntryExpansion {
    pub equilibrium: C64,
    pub modes: Vec<ComplexMode>,
}

impl EntryExpansion {
    pub fn evaluate(&self, t: f64) -> C64 {
        self.equilibrium + self.modes.iter().map(|m| m.value(t)).sum::<C64>()
    }

    pub fn conj(&self) -> Self {
        Self { equilibrium: self.equilibrium.conj(), modes: self.modes.iter().map(ComplexMode::mirrored).collect() }
    }

    /// Real part as a cosine expansion.
    pub fn real_part(&self) -> Result<ModeExpansion> {
        let modes = self.modes.iter().map(|m| to_cosine(m.amplitude, m.gamma, m.nu)).collect::<Result<Vec<_>>>()?;
        ModeExpansion::new(self.equilibrium.re, modes)
    }

    /// Imaginary part as a cosine expansion.
    pub fn imag_part(&self) -> Result<ModeExpansion> {
        let modes =
            self.modes.iter().map(|m| to_cosine(-C64::i() * m.amplitude, m.gamma, m.nu)).collect::<Result<Vec<_>>>()?;
        ModeExpansion::new(self.equilibrium.im, modes)
    }
}

// Re(c exp(-i nu t)) = |c| cos(nu t - arg c), written with a non-negative frequency.
fn to_cosine(c: C64, gamma: f64, nu: f64) -> Result<DecayMode> {
    if nu >= 0.0 {
        DecayMode::with_phase(c.norm(), gamma, nu, -c.arg())
    } else {
        DecayMode::with_phase(c.norm(), gamma, -nu, c.arg())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntrywiseModeDecomposition {
    dim: usize,
    /// Upper triangle, row-major: (0,0), (0,1), ..., (0,d-1), (1,1), ...
    upper: Vec<EntryExpansion>,
}

impl EntrywiseModeDecomposition {
    /// Builds from a function giving the expansion of each `m <= n` entry.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> EntryExpansion) -> Self {
        let mut upper = Vec::with_capacity(dim * (dim + 1) / 2);
        for m in 0..dim {
            for n in m..dim {
                let mut e = f(m, n);
                if m == n {
                    // diagonal entries are real: keep the self-conjugate part
                    e = hermitian_diagonal(e);
                }
                upper.push(e);
            }
        }
        Self { dim, upper }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn index(&self, m: usize, n: usize) -> usize {
        m * self.dim - m * (m + 1) / 2 + n
    }

    /// Expansion of entry `(m, n)`; the lower triangle is mirrored.
    pub fn entry(&self, m: usize, n: usize) -> EntryExpansion {
        if m <= n {
            self.upper[self.index(m, n)].clone()
        } else {
            self.upper[self.index(n, m)].conj()
        }
    }

    /// Stored upper-triangle entries with their indices.
    pub fn upper_entries(&self) -> impl Iterator<Item = ((usize, usize), &EntryExpansion)> {
        let d = self.dim;
        (0..d).flat_map(move |m| (m..d).map(move |n| (m, n))).zip(self.upper.iter())
    }

    /// Every mode of the full matrix, counting mirrored entries separately.
    pub fn pooled_modes(&self) -> impl Iterator<Item = &ComplexMode> {
        self.upper_entries().flat_map(|((m, n), e)| {
            let copies = if m == n { 1 } else { 2 };
            e.modes.iter().flat_map(move |md| std::iter::repeat_n(md, copies))
        })
    }

    /// Full matrix, keeping the equilibrium and only modes accepted by `keep`.
    pub fn evaluate_filtered(&self, t: f64, keep: impl Fn(&ComplexMode) -> bool) -> DMatrix<C64> {
        let mut out = DMatrix::zeros(self.dim, self.dim);
        for ((m, n), e) in self.upper_entries() {
            let v = e.equilibrium + e.modes.iter().filter(|md| keep(md)).map(|md| md.value(t)).sum::<C64>();
            out[(m, n)] = v;
            if m != n {
                out[(n, m)] = v.conj();
            }
        }
        out
    }

    pub fn evaluate(&self, t: f64) -> DMatrix<C64> {
        self.evaluate_filtered(t, |_| true)
    }

    /// Checks the expansion against sampled matrices.
    pub fn check_round_trip(&self, times: &[f64], matrices: &[DMatrix<C64>]) -> Result<()> {
        if times.len() != matrices.len() {
            return Err(Error::GridMismatch);
        }
        for (&t, target) in times.iter().zip(matrices) {
            let value = self.evaluate(t);
            for m in 0..self.dim {
                for n in m..self.dim {
                    let deviation = (value[(m, n)] - target[(m, n)]).norm();
                    if !(deviation <= ROUND_TRIP_TOL) {
                        return Err(Error::RoundTrip { row: m, col: n, time: t, deviation });
                    }
                }
            }
        }
        Ok(())
    }
}

fn hermitian_diagonal(e: EntryExpansion) -> EntryExpansion {
    let mut e = e;
    e.equilibrium = C64::new(e.equilibrium.re, 0.0);
    e
}

/// Closed-form expansion of `rho_S(t)` for the pole-evolved two-branch state.
///
/// Each direct dyad entry is one mode of width `(m+n) gamma / 2`; the cross
/// dyads carry the which-path factor `exp(-D(1 - e^{-gamma t})/2)`, whose
/// Taylor series in `e^{-gamma t}` adds widths `((m+n)/2 + j) gamma`. The
/// vacuum entry absorbs the lost trace, so its modes are minus those of
/// every other diagonal entry.
pub fn decompose_two_branch(sys: &TwoBranchSystem, times: &[f64]) -> Result<EntrywiseModeDecomposition> {
    let dim = sys.space().dim();
    let pole = sys.pole;
    let (v1, v2) = sys.initial_vectors();
    let n0 = sys.initial_norm_sq();
    let (a, b) = (sys.a, sys.b);
    let d = (sys.alpha2.alpha - sys.alpha1.alpha).norm_sqr();
    let half = 0.5 * d;

    // Poisson weights e^{-D/2} (D/2)^j / j!, in log space
    let mut poisson = Vec::new();
    if half == 0.0 {
        poisson.push(1.0);
    } else {
        let j_max = (half + 12.0 * half.sqrt() + 40.0).ceil() as usize;
        for j in 0..=j_max {
            let lw = -half + j as f64 * half.ln() - ln_factorial(j);
            poisson.push(lw.exp());
        }
    }

    let entry = |m: usize, n: usize| -> Vec<ComplexMode> {
        let base = 0.5 * (m + n) as f64;
        let nu = (m as f64 - n as f64) * pole.omega_prime;
        let mut modes = Vec::new();
        let direct = (v1[m] * v1[n].conj() * a.norm_sqr() + v2[m] * v2[n].conj() * b.norm_sqr()) / n0;
        if direct.norm() > AMPLITUDE_FLOOR {
            modes.push(ComplexMode { amplitude: direct, gamma: base * pole.gamma, nu });
        }
        let cross = (a * b.conj() * v1[m] * v2[n].conj() + b * a.conj() * v2[m] * v1[n].conj()) / n0;
        if cross.norm() > AMPLITUDE_FLOOR {
            for (j, w) in poisson.iter().enumerate() {
                let c = cross * *w;
                if c.norm() > AMPLITUDE_FLOOR {
                    modes.push(ComplexMode { amplitude: c, gamma: (base + j as f64) * pole.gamma, nu });
                }
            }
        }
        modes
    };

    // Diagonal widths are integer multiples of gamma, all nonzero off the
    // vacuum. The vacuum entry is 1 minus the other diagonal entries.
    let mut deposit: BTreeMap<usize, f64> = BTreeMap::new();
    for m in 1..dim {
        for md in entry(m, m) {
            let k = (md.gamma / pole.gamma).round() as usize;
            *deposit.entry(k).or_default() -= md.amplitude.re;
        }
    }
    let decomp = EntrywiseModeDecomposition::from_fn(dim, |m, n| {
        if (m, n) == (0, 0) {
            let modes = deposit
                .iter()
                .filter(|(_, amp)| amp.abs() > AMPLITUDE_FLOOR)
                .map(|(&k, &amp)| ComplexMode { amplitude: C64::new(amp, 0.0), gamma: k as f64 * pole.gamma, nu: 0.0 })
                .collect();
            EntryExpansion { equilibrium: C64::new(1.0, 0.0), modes }
        } else {
            EntryExpansion { equilibrium: C64::new(0.0, 0.0), modes: entry(m, n) }
        }
    });

    let mut samples = Vec::with_capacity(times.len());
    for &t in times {
        let (m, deficit) = sys.reduced_matrix(t)?;
        if deficit < -TRACE_ROUNDING {
            return Err(Error::InvalidArgument(format!(
                "raw trace exceeds one at t = {t}; the rescaled state has no finite mode expansion"
            )));
        }
        samples.push(m);
    }
    decomp.check_round_trip(times, &samples)?;
    Ok(decomp)
}

fn ln_factorial(j: usize) -> f64 {
    (1..=j).map(|k| (k as f64).ln()).sum()
}

/// Expansion of sampled Hermitian matrices, entry by entry, with the matrix
/// pencil. Each real and imaginary part is fitted with at most `model_order`
/// exponentials; the order is lowered while the data are rank deficient.
pub fn decompose_samples(
    times: &[f64],
    matrices: &[DMatrix<C64>],
    model_order: usize,
) -> Result<EntrywiseModeDecomposition> {
    if times.len() != matrices.len() || matrices.is_empty() {
        return Err(Error::GridMismatch);
    }
    let dim = matrices[0].nrows();
    let mut failure = None;
    let decomp = EntrywiseModeDecomposition::from_fn(dim, |m, n| {
        if failure.is_some() {
            return EntryExpansion::default();
        }
        let re: Vec<(f64, f64)> = times.iter().zip(matrices).map(|(t, x)| (*t, x[(m, n)].re)).collect();
        let im: Vec<(f64, f64)> = times.iter().zip(matrices).map(|(t, x)| (*t, x[(m, n)].im)).collect();
        let fit = fit_part(&re, model_order).and_then(|r| {
            let i = if m == n { None } else { Some(fit_part(&im, model_order)?) };
            Ok((r, i))
        });
        match fit {
            Ok((r, i)) => {
                let mut out = EntryExpansion { equilibrium: C64::new(r.equilibrium, 0.0), modes: vec![] };
                push_cosines(&mut out.modes, r.modes(), C64::new(1.0, 0.0));
                if let Some(i) = i {
                    out.equilibrium.im = i.equilibrium;
                    push_cosines(&mut out.modes, i.modes(), C64::i());
                }
                out
            }
            Err(e) => {
                failure = Some(Error::EntryExtraction { row: m, col: n, source: Box::new(e) });
                EntryExpansion::default()
            }
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }
    decomp.check_round_trip(times, matrices)?;
    Ok(decomp)
}

fn fit_part(samples: &[(f64, f64)], model_order: usize) -> Result<ModeExpansion> {
    let mut order = model_order;
    loop {
        match extract_modes(samples, order) {
            Ok(r) if r.unstable.iter().all(|u| u.amplitude.abs() <= ROUND_TRIP_TOL) => return r.expansion(),
            Ok(_) => return Err(Error::InvalidArgument("non-decaying component in entry".into())),
            Err(Error::RankDeficient { rank, .. }) if rank < order && rank >= 1 => order = rank,
            Err(e) => return Err(e),
        }
    }
}

// a cos(w t + phi) = (a/2) (e^{i(w t + phi)} + e^{-i(w t + phi)})
fn push_cosines(out: &mut Vec<ComplexMode>, modes: &[DecayMode], unit: C64) {
    for md in modes {
        if md.omega == 0.0 {
            out.push(ComplexMode { amplitude: unit * md.amplitude * md.phase.cos(), gamma: md.gamma, nu: 0.0 });
        } else {
            let half = 0.5 * md.amplitude;
            out.push(ComplexMode { amplitude: unit * C64::from_polar(half, md.phase), gamma: md.gamma, nu: -md.omega });
            out.push(ComplexMode { amplitude: unit * C64::from_polar(half, -md.phase), gamma: md.gamma, nu: md.omega });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{CoherentLabel, FockSpace};
    use crate::spectral::Pole;

    const H: f64 = std::f64::consts::FRAC_1_SQRT_2;

    fn system(a: C64, b: C64, x1: C64, x2: C64, dim: usize) -> TwoBranchSystem {
        TwoBranchSystem::new(
            a,
            b,
            CoherentLabel::new(x1).unwrap(),
            CoherentLabel::new(x2).unwrap(),
            Pole::new(1.0, 0.05).unwrap(),
            FockSpace::new(dim).unwrap(),
        )
        .unwrap()
    }

    fn log_grid(n: usize) -> Vec<f64> {
        let mut v = vec![0.0];
        v.extend((0..n).map(|k| 0.02 * 10f64.powf(5.0 * k as f64 / (n - 1) as f64)));
        v
    }

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn vacuum_projector_is_static() {
        let sys = system(c(1.0), c(0.0), c(0.0), c(0.0), 6);
        let d = decompose_two_branch(&sys, &log_grid(20)).unwrap();
        for ((m, n), e) in d.upper_entries() {
            assert!(e.modes.is_empty(), "({m},{n})");
            let expected = if (m, n) == (0, 0) { 1.0 } else { 0.0 };
            assert_eq!(e.equilibrium, c(expected));
        }
    }

    #[test]
    fn vacuum_entry_relaxes_to_one() {
        let sys = system(c(H), c(H), c(0.0), c(3.0), 64);
        let d = decompose_two_branch(&sys, &log_grid(40)).unwrap();
        let e = d.entry(0, 0);
        assert_eq!(e.equilibrium, c(1.0));
        assert!(!e.modes.is_empty());
        assert!(e.modes.iter().all(|m| m.nu == 0.0 && m.gamma > 0.0));
        assert!((e.evaluate(1e6) - c(1.0)).norm() < 1e-12);
    }

    #[test]
    fn mirror_is_exact_conjugate() {
        let sys = system(c(0.6), C64::new(0.3, 0.5), C64::new(0.5, -0.2), C64::new(-1.0, 1.2), 40);
        let d = decompose_two_branch(&sys, &log_grid(30)).unwrap();
        for &(m, n) in &[(0, 3), (2, 5), (7, 1)] {
            let upper = d.entry(m, n);
            let lower = d.entry(n, m);
            assert_eq!(upper.conj(), lower);
            for t in [0.0, 3.0, 40.0] {
                assert_eq!(upper.evaluate(t).conj(), lower.evaluate(t));
            }
        }
    }

    #[test]
    fn real_and_imaginary_parts() {
        let e = EntryExpansion {
            equilibrium: C64::new(0.1, -0.2),
            modes: vec![
                ComplexMode { amplitude: C64::new(0.3, 0.4), gamma: 0.5, nu: 2.0 },
                ComplexMode { amplitude: C64::new(-0.2, 0.1), gamma: 1.5, nu: -1.0 },
            ],
        };
        let re = e.real_part().unwrap();
        let im = e.imag_part().unwrap();
        for t in [0.0, 0.7, 3.1] {
            let z = e.evaluate(t);
            assert!((re.evaluate(t) - z.re).abs() < 1e-15);
            assert!((im.evaluate(t) - z.im).abs() < 1e-15);
        }
    }

    #[test]
    fn sampled_path_recovers_planted_modes() {
        let planted = EntrywiseModeDecomposition::from_fn(3, |m, n| {
            let k = (m + n) as f64;
            let mut modes = vec![ComplexMode {
                amplitude: C64::new(0.1 + 0.05 * k, if m == n { 0.0 } else { 0.02 }),
                gamma: 0.2 * (1.0 + k),
                nu: (m as f64 - n as f64) * 0.7,
            }];
            if m == 0 && n == 2 {
                modes.push(ComplexMode { amplitude: C64::new(0.0, 0.07), gamma: 0.9, nu: -1.4 });
            }
            EntryExpansion { equilibrium: C64::new(if m == n { 0.3 } else { 0.01 }, 0.0), modes }
        });
        let times: Vec<f64> = (0..150).map(|k| 0.2 * k as f64).collect();
        let mats: Vec<_> = times.iter().map(|&t| planted.evaluate(t)).collect();
        let d = decompose_samples(&times, &mats, 4).unwrap();
        for t in [0.1, 7.3, 40.0] {
            assert!((d.evaluate(t) - planted.evaluate(t)).norm() < 1e-8);
        }
        let diag = d.entry(1, 1).real_part().unwrap();
        assert_eq!(diag.modes().len(), 1);
        assert!((diag.modes()[0].gamma - 0.6).abs() < 1e-8);
    }

    #[test]
    fn sampled_path_reports_entry() {
        let times: Vec<f64> = (0..20).map(f64::from).collect();
        let mats: Vec<_> = times
            .iter()
            .map(|&t| DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(1.0 + 0.1 * t), c(0.0)])))
            .collect();
        let err = decompose_samples(&times, &mats, 2).unwrap_err();
        assert!(matches!(err, Error::EntryExtraction { row: 0, col: 0, .. }), "{err:?}");
    }
}
