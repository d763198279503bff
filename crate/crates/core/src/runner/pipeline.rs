//! Scenario orchestration: poles, evolution, timescales and the moving basis.
//!
//! Everything is computed in natural units; times are converted to
//! physical units only when tables are written.

use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::csvio::Table;
use super::grid::natural_times;
use super::report::{Corrections, LadderSummary, RunReport};
use super::scenario::Scenario;
use crate::basis::{
    coherent_basis_fidelity, decompose_two_branch, diagonality_report, moving_basis, BasisTrajectory, DiagonalityRow,
    EntrywiseModeDecomposition, FidelityRow, PreferredStateTrajectory,
};
use crate::error::{Error, Result};
use crate::evolution::{equilibrium_state, offdiag_factor, offdiag_factor_expansion, TwoBranchSystem};
use crate::fock::{CoherentLabel, DensityMatrix, FockSpace};
use crate::modes::{gamma_eff, GammaEffReading, ModeExpansion};
use crate::spectral::{pole_ladder, pole_second_order, self_energy, Pole, PoleLadder, SelfEnergy, SpectralDensity};
use crate::tolerances::Tolerances;

/// A scenario with its pole solved and its time grid laid out.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub scenario: Scenario,
    pub tolerances: Tolerances,
    pub density: SpectralDensity,
    pub self_energy: SelfEnergy,
    pub pole: Pole,
    pub ladder: PoleLadder,
    /// Real label of the displaced branch; the other branch is the vacuum.
    pub alpha2: f64,
    /// Natural-unit grid.
    pub times: Vec<f64>,
}

impl Prepared {
    /// `overrides` is a `key=value,...` tolerance list applied last.
    pub fn new(scenario: Scenario, overrides: Option<&str>) -> Result<Self> {
        let tolerances = scenario.tolerances(overrides)?;
        let density = scenario.spectral_density()?;
        let self_energy = self_energy(&density, scenario.omega)?;
        let pole = pole_second_order(&density, scenario.omega)?;
        let ladder = pole_ladder(pole, scenario.ladder_size)?;
        let alpha2 = match (scenario.alpha2_abs_sq, scenario.separation) {
            (Some(x), _) => x.sqrt(),
            (None, Some(l)) => scenario.kappa_sq(pole.omega_prime).sqrt() * l,
            (None, None) => return Err(Error::InvalidScenario("set either L or alpha2_abs_sq".into())),
        };
        let times = natural_times(&scenario.grid, 1.0 / pole.gamma, scenario.time_scale());
        let space = FockSpace::with_tolerances(scenario.dim, tolerances)?;
        crate::fock::check_truncation(alpha2 * alpha2, &space)?;
        Ok(Self { scenario, tolerances, density, self_energy, pole, ladder, alpha2, times })
    }

    pub fn alpha2_abs_sq(&self) -> f64 {
        self.alpha2 * self.alpha2
    }

    /// Natural time to physical time.
    pub fn physical(&self, t: f64) -> f64 {
        t * self.scenario.time_scale()
    }

    pub fn space(&self) -> Result<FockSpace> {
        FockSpace::with_tolerances(self.scenario.dim, self.tolerances)
    }

    pub fn system(&self) -> Result<TwoBranchSystem> {
        TwoBranchSystem::new(
            self.scenario.weight_a(),
            self.scenario.weight_b(),
            CoherentLabel::real(0.0)?,
            CoherentLabel::real(self.alpha2)?,
            self.pole,
            self.space()?,
        )
    }

    fn export_dim(&self) -> usize {
        self.scenario.export_dim.unwrap_or(16).min(self.scenario.dim)
    }

    fn ladder_summary(&self) -> LadderSummary {
        LadderSummary { n_max: self.ladder.n_max(), base: self.pole }
    }
}

// ---------------------------------------------------------------- evolution

#[derive(Debug, Clone)]
pub struct Trajectory {
    /// Natural-unit times.
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    /// Trace added to `|0><0|` at each time (negative when the raw state was rescaled).
    pub vacuum_deposits: Vec<f64>,
    pub offdiag_factor: Vec<f64>,
    /// Branch cross coefficient read back from `rho_S(t)`, relative to its `t = 0` value.
    pub offdiag_ratio: Vec<f64>,
    /// Trace distance to the equilibrium `|0><0|`.
    pub trace_distance: Vec<f64>,
}

pub fn trajectory(p: &Prepared) -> Result<Trajectory> {
    let sys = p.system()?;
    let eq = equilibrium_state(*sys.space());
    let c0 = sys.dyad_coefficients(0.0)?.c12;
    let c = p.alpha2_abs_sq();
    let n = p.times.len();
    let mut out = Trajectory {
        times: p.times.clone(),
        states: Vec::with_capacity(n),
        vacuum_deposits: Vec::with_capacity(n),
        offdiag_factor: Vec::with_capacity(n),
        offdiag_ratio: Vec::with_capacity(n),
        trace_distance: Vec::with_capacity(n),
    };
    for &t in &p.times {
        let (m, deposit) = sys.reduced_matrix(t)?;
        let ratio = match sys.extracted_cross_coefficient(&m, t) {
            Ok(x) if c0.norm() > 0.0 => (x / c0).re,
            _ => f64::NAN,
        };
        let rho = DensityMatrix::new(m, *sys.space())?;
        out.trace_distance.push(rho.trace_distance(&eq)?);
        out.offdiag_factor.push(offdiag_factor(c, &p.pole, t)?);
        out.offdiag_ratio.push(ratio);
        out.vacuum_deposits.push(deposit);
        out.states.push(rho);
    }
    Ok(out)
}

// --------------------------------------------------------------- timescales

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReadingSummary {
    pub reading: GammaEffReading,
    /// Natural-unit rate.
    pub gamma_eff: f64,
    /// Physical time `hbar / gamma_eff`.
    pub t_d: f64,
    pub outside_width_range: bool,
    pub slow_modes: usize,
    pub fast_modes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timescales {
    /// Physical time per natural time unit.
    pub time_scale: f64,
    pub omega_prime: f64,
    pub shift: f64,
    pub shift_error_estimate: f64,
    pub gamma0: f64,
    pub alpha2_abs_sq: f64,
    /// `hbar / gamma0`, physical.
    pub t_r: f64,
    /// Decoherence time under the default reading, physical.
    pub t_d: Option<f64>,
    /// `t_r / |alpha2|^2`.
    pub predicted_t_d: Option<f64>,
    pub paper_style: Option<ReadingSummary>,
    pub all_modes: Option<ReadingSummary>,
    /// Modes in the expansion of the off-diagonal factor.
    pub coherence_modes: usize,
}

/// Mode expansion of the branch coherence `exp(-|alpha2|^2 (1 - e^{-gamma0 t}))`.
pub fn coherence_expansion(p: &Prepared) -> Result<ModeExpansion> {
    offdiag_factor_expansion(p.alpha2_abs_sq(), &p.pole)
}

pub fn timescales(p: &Prepared) -> Result<Timescales> {
    let exp = coherence_expansion(p)?;
    let scale = p.scenario.time_scale();
    let summary = |reading| -> Result<Option<ReadingSummary>> {
        if exp.is_static() {
            return Ok(None);
        }
        let g = gamma_eff(&exp, reading)?;
        let (slow, fast) = crate::modes::timescales::split_at(exp.modes(), g.value);
        Ok(Some(ReadingSummary {
            reading,
            gamma_eff: g.value,
            t_d: scale / g.value,
            outside_width_range: g.outside_width_range,
            slow_modes: slow.len(),
            fast_modes: fast.len(),
        }))
    };
    let paper_style = summary(GammaEffReading::PaperStyle)?;
    let all_modes = summary(GammaEffReading::AllModes)?;
    let t_r = scale / p.pole.gamma;
    let c = p.alpha2_abs_sq();
    Ok(Timescales {
        time_scale: scale,
        omega_prime: p.pole.omega_prime,
        shift: p.self_energy.shift,
        shift_error_estimate: p.self_energy.error_estimate,
        gamma0: p.pole.gamma,
        alpha2_abs_sq: c,
        t_r,
        t_d: paper_style.as_ref().map(|s| s.t_d),
        predicted_t_d: (c > 0.0).then(|| t_r / c),
        paper_style,
        all_modes,
        coherence_modes: exp.modes().len(),
    })
}

// -------------------------------------------------------------------- basis

#[derive(Debug, Clone)]
pub struct BasisRun {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    pub decomposition: EntrywiseModeDecomposition,
    pub preferred: PreferredStateTrajectory,
    pub basis: BasisTrajectory,
    pub diagonality: Vec<DiagonalityRow>,
    pub fidelity: Vec<FidelityRow>,
}

pub fn basis_run(p: &Prepared) -> Result<BasisRun> {
    basis_run_on(p, &p.times)
}

/// [`basis_run`] on a caller-chosen natural-unit grid.
pub fn basis_run_on(p: &Prepared, times: &[f64]) -> Result<BasisRun> {
    let sys = p.system()?;
    let decomposition = decompose_two_branch(&sys, times)?;
    let preferred = PreferredStateTrajectory::new(&decomposition, times, *sys.space())?;
    preferred.validate()?;
    let basis = moving_basis(&preferred)?;
    let states = times.iter().map(|&t| sys.reduced_state(t)).collect::<Result<Vec<_>>>()?;
    let diagonality = diagonality_report(&states, &basis, &decomposition, preferred.gamma_eff)?;
    let fidelity = coherent_basis_fidelity(&basis, sys.alpha1, sys.alpha2, &p.pole, times)?;
    Ok(BasisRun { times: times.to_vec(), states, decomposition, preferred, basis, diagonality, fidelity })
}

// ------------------------------------------------------------------ tables

pub fn poles_table(p: &Prepared) -> Table {
    let mut t = Table::new(["n", "re_z", "im_z", "gamma_n"].map(String::from).to_vec()).with_integer_columns(&["n"]);
    for (n, z) in p.ladder.members() {
        t.push(vec![n as f64, z.z().re, z.z().im, z.gamma]);
    }
    t
}

pub fn trajectory_table(p: &Prepared, tr: &Trajectory) -> Table {
    let e = p.export_dim();
    let mut columns = vec!["time".to_string()];
    for m in 0..e {
        for n in 0..e {
            columns.push(format!("re_{m}_{n}"));
            columns.push(format!("im_{m}_{n}"));
        }
    }
    columns.extend(["offdiag_factor", "offdiag_ratio", "trace_distance"].map(String::from));
    let mut t = Table::new(columns);
    for (i, &time) in tr.times.iter().enumerate() {
        let rho = tr.states[i].entries();
        let mut row = Vec::with_capacity(t.columns.len());
        row.push(p.physical(time));
        for m in 0..e {
            for n in 0..e {
                row.push(rho[(m, n)].re);
                row.push(rho[(m, n)].im);
            }
        }
        row.extend([tr.offdiag_factor[i], tr.offdiag_ratio[i], tr.trace_distance[i]]);
        t.push(row);
    }
    t
}

pub fn basis_table(p: &Prepared, run: &BasisRun) -> Table {
    let e = p.export_dim();
    let rank = p.scenario.basis_rank.min(p.scenario.dim);
    let mut columns = ["time", "track", "eigenvalue", "degenerate_block"].map(String::from).to_vec();
    for k in 0..e {
        columns.push(format!("re_{k}"));
        columns.push(format!("im_{k}"));
    }
    let mut t = Table::new(columns).with_integer_columns(&["track", "degenerate_block"]);
    for frame in &run.basis.frames {
        for track in 0..rank {
            let mut row = vec![
                p.physical(frame.time),
                track as f64,
                frame.eigenvalues[track],
                frame.block[track].map_or(-1.0, |b| b as f64),
            ];
            let v = frame.vectors.column(track);
            for k in 0..e {
                row.push(v[k].re);
                row.push(v[k].im);
            }
            t.push(row);
        }
    }
    t
}

pub fn diagonality_table(p: &Prepared, rows: &[DiagonalityRow]) -> Table {
    let mut t = Table::new(["time", "mass", "bound", "compensated_bound"].map(String::from).to_vec());
    for r in rows {
        t.push(vec![p.physical(r.time), r.mass, r.bound, r.compensated_bound]);
    }
    t
}

pub fn fidelity_table(p: &Prepared, rows: &[FidelityRow]) -> Table {
    let mut t = Table::new(["time", "fidelity", "branches_coincide"].map(String::from).to_vec())
        .with_integer_columns(&["branches_coincide"]);
    for r in rows {
        t.push(vec![p.physical(r.time), r.fidelity, if r.branches_coincide { 1.0 } else { 0.0 }]);
    }
    t
}

// ---------------------------------------------------------------- commands

fn prepare_out(out: &Path) -> Result<()> {
    std::fs::create_dir_all(out).map_err(|e| Error::Io(format!("{}: {e}", out.display())))
}

fn write_table(out: &Path, name: &str, table: &Table, artifacts: &mut Vec<String>) -> Result<()> {
    table.write(&out.join(name))?;
    artifacts.push(name.to_string());
    Ok(())
}

fn write_json<T: Serialize>(out: &Path, name: &str, value: &T, artifacts: &mut Vec<String>) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
    std::fs::write(out.join(name), text + "\n").map_err(|e| Error::Io(format!("{name}: {e}")))?;
    artifacts.push(name.to_string());
    Ok(())
}

fn report(p: &Prepared, command: &str) -> RunReport {
    RunReport {
        command: command.to_string(),
        pole: p.pole,
        ladder: p.ladder_summary(),
        timescales: None,
        artifacts: Vec::new(),
        corrections: Corrections::default(),
        preferred_gamma_eff: None,
        warnings: Vec::new(),
    }
}

pub fn run_poles(p: &Prepared, out: &Path) -> Result<RunReport> {
    prepare_out(out)?;
    let mut r = report(p, "poles");
    write_table(out, "poles.csv", &poles_table(p), &mut r.artifacts)?;
    r.write(out)?;
    Ok(r)
}

pub fn run_evolve(p: &Prepared, out: &Path) -> Result<RunReport> {
    prepare_out(out)?;
    let mut r = report(p, "evolve");
    let tr = trajectory(p)?;
    let max_deposit = tr.vacuum_deposits.iter().fold(0.0_f64, |a, d| a.max(d.abs()));
    r.corrections.max_vacuum_deposit = Some(max_deposit);
    if tr.vacuum_deposits.iter().any(|d| *d < -crate::evolution::TRACE_ROUNDING) {
        r.warnings.push("raw trace exceeded one on part of the grid; those states were rescaled".into());
    }
    write_table(out, "trajectory.csv", &trajectory_table(p, &tr), &mut r.artifacts)?;
    r.write(out)?;
    Ok(r)
}

pub fn run_timescales(p: &Prepared, out: &Path) -> Result<RunReport> {
    prepare_out(out)?;
    let mut r = report(p, "timescales");
    let ts = timescales(p)?;
    if ts.t_d.is_none() {
        r.warnings.push("branches coincide; the coherence has no decaying modes and no decoherence time".into());
    }
    for s in [&ts.paper_style, &ts.all_modes].into_iter().flatten() {
        if s.outside_width_range {
            r.warnings.push(format!("{:?} gamma_eff lies outside the mode width range", s.reading));
        }
    }
    write_json(out, "timescales.json", &ts, &mut r.artifacts)?;
    r.timescales = Some(ts);
    r.write(out)?;
    Ok(r)
}

pub fn run_basis(p: &Prepared, out: &Path) -> Result<RunReport> {
    prepare_out(out)?;
    let mut r = report(p, "basis");
    let run = basis_run(p)?;
    r.corrections.max_hermitian_correction = Some(run.preferred.max_hermitian_correction);
    r.corrections.max_trace_correction = Some(run.preferred.max_trace_correction);
    r.preferred_gamma_eff = run.preferred.gamma_eff.is_finite().then_some(run.preferred.gamma_eff);
    if r.preferred_gamma_eff.is_none() {
        r.warnings.push("reduced state is static; the preferred state keeps every mode".into());
    }
    let exceeded = run.diagonality.iter().filter(|d| d.mass > d.compensated_bound).count();
    if exceeded > 0 {
        r.warnings.push(format!("off-diagonal mass exceeds the compensated truncation bound at {exceeded} times"));
    }
    write_table(out, "basis.csv", &basis_table(p, &run), &mut r.artifacts)?;
    write_table(out, "diagonality.csv", &diagonality_table(p, &run.diagonality), &mut r.artifacts)?;
    write_table(out, "fidelity.csv", &fidelity_table(p, &run.fidelity), &mut r.artifacts)?;
    r.write(out)?;
    Ok(r)
}

/// Largest entrywise deviation between two matrices; used by table checks.
pub fn max_abs_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    (a - b).iter().fold(0.0, |m, z| m.max(z.norm()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::superposition_density;
    use crate::runner::scenario::DEFAULT_SCENARIO;
    use std::path::Path;

    fn small(extra: &str) -> Prepared {
        let text = DEFAULT_SCENARIO
            .replace("alpha2_abs_sq = 50.0", "alpha2_abs_sq = 4.0")
            .replace("dim = 128", &format!("dim = 24\n{extra}"))
            .replace("count = 200", "count = 40");
        Prepared::new(Scenario::parse(&text, Path::new(".")).unwrap(), None).unwrap()
    }

    #[test]
    fn first_row_is_initial_superposition() {
        let p = small("");
        let tr = trajectory(&p).unwrap();
        assert_eq!(tr.times[0], 0.0);
        let sys = p.system().unwrap();
        let want = superposition_density(sys.a, sys.b, sys.alpha1, sys.alpha2, *sys.space()).unwrap();
        assert!(max_abs_diff(tr.states[0].entries(), want.entries()) < 1e-14);
    }

    #[test]
    fn ratio_tracks_factor() {
        let tr = trajectory(&small("")).unwrap();
        for (r, f) in tr.offdiag_ratio.iter().zip(&tr.offdiag_factor) {
            assert!((r - f).abs() < 1e-10, "{r} vs {f}");
        }
        let last = *tr.trace_distance.last().unwrap();
        assert!(last < 1e-12, "{last}");
    }

    #[test]
    fn timescales_follow_the_ladder() {
        let p = small("");
        let ts = timescales(&p).unwrap();
        assert_eq!(ts.t_r, 1.0 / p.pole.gamma);
        let all = ts.all_modes.unwrap();
        // sum_k k P(k) / sum_k P(k) over k >= 1 is c / (1 - e^{-c})
        let want = 4.0 * p.pole.gamma / (1.0 - (-4.0f64).exp());
        assert!((all.gamma_eff - want).abs() < 1e-12 * want);
        assert!(ts.paper_style.unwrap().gamma_eff > all.gamma_eff);
    }

    #[test]
    fn zero_separation_has_no_decoherence_time() {
        let text = DEFAULT_SCENARIO.replace("alpha2_abs_sq = 50.0", "alpha2_abs_sq = 0.0");
        let p = Prepared::new(Scenario::parse(&text, Path::new(".")).unwrap(), None).unwrap();
        let ts = timescales(&p).unwrap();
        assert!(ts.t_d.is_none() && ts.paper_style.is_none());
    }

    #[test]
    fn commands_write_parseable_artifacts() {
        let p = small("export_dim = 6");
        let dir = tempfile::tempdir().unwrap();
        for run in [run_poles, run_evolve, run_timescales, run_basis] {
            let r = run(&p, dir.path()).unwrap();
            r.check_artifacts(dir.path()).unwrap();
        }
        let traj = Table::read(&dir.path().join("trajectory.csv")).unwrap();
        assert_eq!(traj.columns.len(), 1 + 2 * 36 + 3);
        assert_eq!(traj.rows.len(), 41);
        let basis = Table::read(&dir.path().join("basis.csv")).unwrap();
        assert_eq!(basis.rows.len(), 41 * 4);
    }
}
