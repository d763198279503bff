//! Eigenbases of `rho_P(t)` tracked continuously along a time grid.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::preferred::PreferredStateTrajectory;
use crate::error::{Error, Result};
use crate::linalg;

#[derive(Debug, Clone, PartialEq)]
pub struct BasisFrame {
    pub time: f64,
    /// Eigenvalue of each tracked vector.
    pub eigenvalues: Vec<f64>,
    /// Tracked eigenvectors as columns.
    pub vectors: DMatrix<C64>,
    /// Degenerate cluster of each vector, `None` when its eigenvalue is simple.
    pub block: Vec<Option<usize>>,
}

impl BasisFrame {
    /// Column indices ordered by descending eigenvalue.
    pub fn descending(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.eigenvalues.len()).collect();
        idx.sort_by(|&a, &b| self.eigenvalues[b].total_cmp(&self.eigenvalues[a]));
        idx
    }
}

/// Per-time orthonormal eigenbases. Column `k` of every frame follows one
/// eigenvector continuously; at the first time columns are in descending
/// eigenvalue order.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisTrajectory {
    pub frames: Vec<BasisFrame>,
}

impl BasisTrajectory {
    pub fn times(&self) -> Vec<f64> {
        self.frames.iter().map(|f| f.time).collect()
    }
}

// Ranges of consecutive (descending) eigenvalues separated by less than eps.
fn clusters(vals: &[f64], eps: f64) -> Vec<std::ops::Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    for k in 1..=vals.len() {
        if k == vals.len() || vals[k - 1] - vals[k] >= eps {
            out.push(start..k);
            start = k;
        }
    }
    out
}

/// Makes the largest-magnitude component of each column real and positive.
fn fix_phases(v: &mut DMatrix<C64>) {
    for mut col in v.column_iter_mut() {
        let max = col.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if let Some(pivot) = col.iter().find(|z| z.norm() >= max * (1.0 - 1e-12)).copied() {
            let phase = pivot.conj() / pivot.norm();
            col *= phase;
        }
    }
}

fn block_ids(ranges: &[std::ops::Range<usize>], n: usize) -> Vec<Option<usize>> {
    let mut block = vec![None; n];
    let mut id = 0;
    for r in ranges {
        if r.len() > 1 {
            for k in r.clone() {
                block[k] = Some(id);
            }
            id += 1;
        }
    }
    block
}

pub fn moving_basis(traj: &PreferredStateTrajectory) -> Result<BasisTrajectory> {
    traj.validate()?;
    let tol = *traj.space.tolerances();
    let mut frames: Vec<BasisFrame> = Vec::with_capacity(traj.times.len());
    for (&time, state) in traj.times.iter().zip(&traj.states) {
        let (vals, mut vecs) = linalg::eigh_descending(state);
        let ranges = clusters(&vals, tol.degen);
        let frame = match frames.last() {
            None => {
                fix_phases(&mut vecs);
                BasisFrame { time, block: block_ids(&ranges, vals.len()), eigenvalues: vals, vectors: vecs }
            }
            Some(prev) => track(prev, time, state, &vals, &vecs, &ranges)?,
        };
        let deviation = linalg::orthonormality_deviation(&frame.vectors);
        if !(deviation <= tol.orth) {
            return Err(Error::NonOrthonormalBasis { deviation });
        }
        frames.push(frame);
    }
    Ok(BasisTrajectory { frames })
}

fn track(
    prev: &BasisFrame,
    time: f64,
    state: &DMatrix<C64>,
    vals: &[f64],
    vecs: &DMatrix<C64>,
    ranges: &[std::ops::Range<usize>],
) -> Result<BasisFrame> {
    let n = vals.len();
    let overlaps = prev.vectors.adjoint() * vecs;
    // weight of previous track i in cluster c
    let mut pairs = Vec::with_capacity(n * ranges.len());
    for i in 0..n {
        for (c, r) in ranges.iter().enumerate() {
            let w: f64 = r.clone().map(|j| overlaps[(i, j)].norm_sqr()).sum();
            pairs.push((w, i, c));
        }
    }
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut capacity: Vec<usize> = ranges.iter().map(|r| r.len()).collect();
    let mut owner = vec![usize::MAX; n];
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); ranges.len()];
    for (_, i, c) in pairs {
        if owner[i] == usize::MAX && capacity[c] > 0 {
            owner[i] = c;
            capacity[c] -= 1;
            members[c].push(i);
        }
    }

    let mut vectors = DMatrix::zeros(n, n);
    let mut eigenvalues = vec![0.0; n];
    let mut block = vec![None; n];
    let mut next_block = 0;
    for (c, r) in ranges.iter().enumerate() {
        let tracks = &members[c];
        if r.len() == 1 {
            let (i, j) = (tracks[0], r.start);
            let o = overlaps[(i, j)];
            let phase = if o.norm() > 0.0 { o.conj() / o.norm() } else { C64::new(1.0, 0.0) };
            vectors.set_column(i, &(vecs.column(j) * phase));
            eigenvalues[i] = vals[j];
            continue;
        }
        // Procrustes alignment inside the degenerate subspace
        let q = vecs.columns(r.start, r.len()).into_owned();
        let prev_cols = DMatrix::from_fn(n, tracks.len(), |row, k| prev.vectors[(row, tracks[k])]);
        let projected = &q * (q.adjoint() * &prev_cols);
        let aligned = linalg::lowdin(&projected).unwrap_or_else(|_| q.clone());
        for (k, &i) in tracks.iter().enumerate() {
            let v = aligned.column(k).into_owned();
            eigenvalues[i] = v.dotc(&(state * &v)).re;
            vectors.set_column(i, &v);
            block[i] = Some(next_block);
        }
        next_block += 1;
    }
    Ok(BasisFrame { time, eigenvalues, vectors, block })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::FockSpace;
    use nalgebra::DVector;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn trajectory(times: &[f64], f: impl Fn(f64) -> DMatrix<C64>, dim: usize) -> PreferredStateTrajectory {
        PreferredStateTrajectory {
            times: times.to_vec(),
            states: times.iter().map(|&t| f(t)).collect(),
            gamma_eff: 1.0,
            max_hermitian_correction: 0.0,
            max_trace_correction: 0.0,
            space: FockSpace::new(dim).unwrap(),
        }
    }

    #[test]
    fn diagonal_state_gives_fock_basis() {
        let diag = DMatrix::from_diagonal(&DVector::from_vec(vec![c(0.7), c(0.3), c(0.0), c(0.0)]));
        let traj = trajectory(&[0.0, 1.0, 2.0], |_| diag.clone(), 4);
        let b = moving_basis(&traj).unwrap();
        for f in &b.frames {
            assert!((f.vectors.columns(0, 2) - DMatrix::<C64>::identity(4, 4).columns(0, 2)).norm() < 1e-12);
            assert_eq!(f.eigenvalues[..2], [0.7, 0.3]);
            assert_eq!(f.block, vec![None, None, Some(0), Some(0)]);
        }
    }

    #[test]
    fn rank_one_projector() {
        let psi = DVector::from_vec(vec![c(0.6), C64::new(0.0, 0.8), c(0.0)]);
        let rho = &psi * psi.adjoint();
        let traj = trajectory(&[0.0], |_| rho.clone(), 3);
        let b = moving_basis(&traj).unwrap();
        let f = &b.frames[0];
        let v0 = f.vectors.column(0);
        assert!((v0.dotc(&psi).norm() - 1.0).abs() < 1e-12);
        // the 0.8 component carries the phase convention
        assert!((v0[1] - c(0.8)).norm() < 1e-12);
        assert_eq!(f.block, vec![None, Some(0), Some(0)]);
    }

    #[test]
    fn crossing_eigenvalues_are_followed() {
        // a rotating basis whose eigenvalues cross at t = 0.75
        let rho = |t: f64| {
            let (co, si) = ((0.3 * t).cos(), (0.3 * t).sin());
            let u =
                DMatrix::from_row_slice(3, 3, &[c(co), c(-si), c(0.0), c(si), c(co), c(0.0), c(0.0), c(0.0), c(1.0)]);
            let d = DMatrix::from_diagonal(&DVector::from_vec(vec![
                c(0.5 - 0.4 * (t - 0.5)),
                c(0.3 + 0.4 * (t - 0.5)),
                c(0.2),
            ]));
            &u * d * u.adjoint()
        };
        let times: Vec<f64> = (0..=40).map(|k| 0.025 * k as f64).filter(|t| (t - 0.75_f64).abs() > 1e-9).collect();
        let b = moving_basis(&trajectory(&times, rho, 3)).unwrap();
        for w in b.frames.windows(2) {
            for k in 0..3 {
                let o = w[0].vectors.column(k).dotc(&w[1].vectors.column(k));
                assert!(o.norm() > 0.99 && (o.re - o.norm()).abs() < 1e-12);
            }
        }
        // tracks start as (0.7, 0.2, 0.1) and end as (0.3, 0.2, 0.5)
        let last = b.frames.last().unwrap();
        assert!((last.eigenvalues[0] - 0.3).abs() < 1e-12 && (last.eigenvalues[2] - 0.5).abs() < 1e-12);
    }
}
