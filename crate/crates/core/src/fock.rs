//! Truncated Fock-space linear algebra: states, density matrices, coherent
//! states, observables and their structural checks.
//!
//! A [`FockSpace`] keeps the number states `|0>, ..., |dim-1>` and carries the
//! tolerance profile used to validate every object built against it.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg;
use crate::tolerances::Tolerances;

#[derive(Debug, Clone, Copy)]
pub struct FockSpace {
    dim: usize,
    tol: Tolerances,
}

impl FockSpace {
    pub fn new(dim: usize) -> Result<Self> {
        Self::with_tolerances(dim, Tolerances::default())
    }

    pub fn with_tolerances(dim: usize, tol: Tolerances) -> Result<Self> {
        if dim == 0 {
            return Err(Error::EmptySpace);
        }
        Ok(Self { dim, tol })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tol
    }

    pub(crate) fn check_len(&self, len: usize) -> Result<()> {
        if len != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: len });
        }
        Ok(())
    }

    pub(crate) fn check_same(&self, other: &FockSpace) -> Result<()> {
        self.check_len(other.dim)
    }
}

#[derive(Debug, Clone)]
pub struct StateVector {
    components: DVector<C64>,
    space: FockSpace,
}

impl StateVector {
    pub fn new(components: DVector<C64>, space: FockSpace) -> Result<Self> {
        space.check_len(components.len())?;
        Ok(Self { components, space })
    }

    /// Number state `|n>`.
    pub fn number(n: usize, space: FockSpace) -> Result<Self> {
        if n >= space.dim {
            return Err(Error::DimensionMismatch { expected: space.dim, got: n + 1 });
        }
        let mut c = DVector::zeros(space.dim);
        c[n] = C64::new(1.0, 0.0);
        Ok(Self { components: c, space })
    }

    pub fn components(&self) -> &DVector<C64> {
        &self.components
    }

    pub fn space(&self) -> &FockSpace {
        &self.space
    }

    pub fn norm_sq(&self) -> f64 {
        self.components.norm_squared()
    }

    /// `<self|other>`
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        self.space.check_same(&other.space)?;
        Ok(self.components.dotc(&other.components))
    }

    pub fn projector(&self) -> DMatrix<C64> {
        &self.components * self.components.adjoint()
    }
}

/// Complex displacement labelling a coherent state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherentLabel {
    pub alpha: C64,
}

impl CoherentLabel {
    pub fn new(alpha: C64) -> Result<Self> {
        if !(alpha.re.is_finite() && alpha.im.is_finite()) {
            return Err(Error::InvalidArgument(format!("coherent label {alpha} is not finite")));
        }
        Ok(Self { alpha })
    }

    pub fn real(x: f64) -> Result<Self> {
        Self::new(C64::new(x, 0.0))
    }

    pub fn abs_sq(&self) -> f64 {
        self.alpha.norm_sqr()
    }
}

/// Smallest dimension that holds a coherent state of mean number `alpha_sq`
/// with leaked norm below ~1e-12: mean plus eight Poisson standard deviations.
pub fn required_dim(alpha_sq: f64) -> f64 {
    alpha_sq + 8.0 * (alpha_sq + 1.0).sqrt()
}

pub(crate) fn check_truncation(alpha_sq: f64, space: &FockSpace) -> Result<()> {
    let required = required_dim(alpha_sq);
    // the vacuum is represented exactly in any dimension
    if alpha_sq > 0.0 && required > space.dim as f64 {
        return Err(Error::TruncationInadequate { alpha_sq, required, dim: space.dim });
    }
    Ok(())
}

/// Fock amplitudes `e^{-|a|^2/2} a^n / sqrt(n!)` for `n < len`, without the
/// adequacy check. Magnitudes are accumulated in log space so large labels
/// do not underflow.
pub(crate) fn coherent_amplitudes(alpha: C64, len: usize) -> DVector<C64> {
    let mut c = DVector::zeros(len);
    if len == 0 {
        return c;
    }
    let r = alpha.norm();
    if r == 0.0 {
        c[0] = C64::new(1.0, 0.0);
        return c;
    }
    let theta = alpha.arg();
    let ln_r = r.ln();
    let mut log_mag = -0.5 * r * r;
    for n in 0..len {
        if n > 0 {
            log_mag += ln_r - 0.5 * (n as f64).ln();
        }
        c[n] = C64::from_polar(log_mag.exp(), n as f64 * theta);
    }
    c
}

/// Coherent state `|alpha>` expanded in the truncated number basis.
pub fn coherent_vector(label: CoherentLabel, space: FockSpace) -> Result<StateVector> {
    check_truncation(label.abs_sq(), &space)?;
    Ok(StateVector { components: coherent_amplitudes(label.alpha, space.dim), space })
}

/// Exact overlap `<alpha|beta>` of untruncated coherent states.
pub fn coherent_overlap_exact(alpha: C64, beta: C64) -> C64 {
    (-(alpha.norm_sqr() + beta.norm_sqr()) / 2.0 + alpha.conj() * beta).exp()
}

/// A Hermitian, unit-trace, positive semidefinite operator.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    entries: DMatrix<C64>,
    space: FockSpace,
}

impl DensityMatrix {
    /// Validates all three invariants against the space's tolerances.
    pub fn new(entries: DMatrix<C64>, space: FockSpace) -> Result<Self> {
        space.check_len(entries.nrows())?;
        space.check_len(entries.ncols())?;
        let tol = space.tol;
        let deviation = linalg::hermitian_deviation(&entries);
        if !(deviation <= tol.herm) {
            return Err(Error::NotHermitian { deviation });
        }
        let tr = entries.trace();
        let deviation = (tr - C64::new(1.0, 0.0)).norm();
        if !(deviation <= tol.trace) {
            return Err(Error::TraceNotUnit { deviation });
        }
        let min_eigenvalue = linalg::eigvals_descending(&entries).last().copied().unwrap_or(0.0);
        if !(min_eigenvalue >= -tol.psd) {
            return Err(Error::NotPositive { min_eigenvalue });
        }
        Ok(Self { entries, space })
    }

    /// Projector onto a normalized copy of `state`.
    pub fn pure(state: &StateVector) -> Result<Self> {
        let n = state.norm_sq();
        if !(n > 1e-300) {
            return Err(Error::ZeroState { norm_sq: n });
        }
        Self::new(state.projector().unscale(n), state.space)
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn into_entries(self) -> DMatrix<C64> {
        self.entries
    }

    pub fn space(&self) -> &FockSpace {
        &self.space
    }

    pub fn trace(&self) -> f64 {
        self.entries.trace().re
    }

    /// Eigenpairs, descending, with small negative eigenvalues clipped to zero.
    pub fn eigen(&self) -> (Vec<f64>, DMatrix<C64>) {
        let (mut vals, vecs) = linalg::eigh_descending(&self.entries);
        for v in &mut vals {
            if *v < 0.0 && *v >= -self.space.tol.psd {
                *v = 0.0;
            }
        }
        (vals, vecs)
    }

    /// `(1/2) ||self - other||_1`
    pub fn trace_distance(&self, other: &DensityMatrix) -> Result<f64> {
        self.space.check_same(&other.space)?;
        let diff = &self.entries - &other.entries;
        Ok(0.5 * linalg::eigvals_descending(&diff).iter().map(|l| l.abs()).sum::<f64>())
    }
}

#[derive(Debug, Clone)]
pub struct Observable {
    entries: DMatrix<C64>,
    space: FockSpace,
}

impl Observable {
    pub fn new(entries: DMatrix<C64>, space: FockSpace) -> Result<Self> {
        space.check_len(entries.nrows())?;
        space.check_len(entries.ncols())?;
        let deviation = linalg::hermitian_deviation(&entries);
        if !(deviation <= space.tol.herm) {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(Self { entries, space })
    }

    /// `N = a^dag a`, diagonal in the number basis.
    pub fn number(space: FockSpace) -> Self {
        let diag = DVector::from_fn(space.dim, |n, _| C64::new(n as f64, 0.0));
        Self { entries: DMatrix::from_diagonal(&diag), space }
    }

    pub fn identity(space: FockSpace) -> Self {
        Self { entries: DMatrix::identity(space.dim, space.dim), space }
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }
}

/// Normalized `|Phi><Phi|` for `|Phi> = a|alpha1> + b|alpha2>`.
pub fn superposition_density(
    a: C64,
    b: C64,
    alpha1: CoherentLabel,
    alpha2: CoherentLabel,
    space: FockSpace,
) -> Result<DensityMatrix> {
    if a.norm() == 0.0 && b.norm() == 0.0 {
        return Err(Error::ZeroState { norm_sq: 0.0 });
    }
    let v1 = coherent_vector(alpha1, space)?;
    let v2 = coherent_vector(alpha2, space)?;
    let phi = v1.components * a + v2.components * b;
    let norm_sq = phi.norm_squared();
    // cancellation floor relative to the branch weights
    if norm_sq <= 1e-24 * (a.norm_sqr() + b.norm_sqr()) {
        return Err(Error::ZeroState { norm_sq });
    }
    let proj = (&phi * phi.adjoint()).unscale(norm_sq);
    DensityMatrix::new(proj, space)
}

/// `Tr(rho O)`; the imaginary residue must stay within the Hermiticity tolerance.
pub fn expectation(rho: &DensityMatrix, obs: &Observable) -> Result<f64> {
    rho.space.check_same(&obs.space)?;
    let value = (&rho.entries * &obs.entries).trace();
    let scale = 1.0_f64.max(value.re.abs());
    if value.im.abs() > rho.space.tol.herm * scale {
        return Err(Error::NotHermitian { deviation: value.im.abs() });
    }
    Ok(value.re)
}

/// Frobenius mass of the off-diagonal entries of `rho` in the given basis.
pub fn offdiagonal_mass(rho: &DensityMatrix, basis: &[StateVector]) -> Result<f64> {
    let dim = rho.space.dim;
    let mut v = DMatrix::zeros(dim, basis.len());
    for (k, s) in basis.iter().enumerate() {
        rho.space.check_same(&s.space)?;
        v.set_column(k, &s.components);
    }
    offdiagonal_mass_in(rho, &v)
}

/// As [`offdiagonal_mass`], with basis vectors given as matrix columns.
pub fn offdiagonal_mass_in(rho: &DensityMatrix, basis: &DMatrix<C64>) -> Result<f64> {
    rho.space.check_len(basis.nrows())?;
    let deviation = linalg::orthonormality_deviation(basis);
    if !(deviation <= rho.space.tol.orth) {
        return Err(Error::NonOrthonormalBasis { deviation });
    }
    let projected = basis.adjoint() * &rho.entries * basis;
    let captured = projected.trace().re;
    if captured < rho.trace() - rho.space.tol.trunc {
        return Err(Error::IncompleteBasis { captured });
    }
    Ok(linalg::offdiagonal_frobenius(&projected))
}
