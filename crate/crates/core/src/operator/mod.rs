//! Dense complex-matrix substrate: Hermitian, positive and density operators,
//! spectral calculus and the multipartite tensor algebra.

mod algebra;
mod layout;
mod spectral;

use std::ops::{Add, Deref, Sub};

use nalgebra::{Complex, ComplexField, DVector};

use crate::error::{Error, Result};
use crate::scalar::{c, CMatrix, CVector, Real};

pub use algebra::{kron, partial_trace, partial_transpose, permute_subsystems, tensor};
pub(crate) use algebra::{partial_trace_matrix, partial_transpose_matrix};
pub(crate) use layout::normalize_indices;
pub use layout::{Partition, PartitionSet, SystemLayout};
pub(crate) use spectral::frechet_log_with;
pub use spectral::{frechet_log, spectral_apply, support_projector};

/// Relative asymmetry above which a matrix is rejected as non-Hermitian.
pub const HERMITIAN_REJECT_TOL: f64 = 1e-8;
/// Negative eigenvalues down to `-PSD_CLIP_TOL * ||A||` are clipped to zero.
pub const PSD_CLIP_TOL: f64 = 1e-10;
/// Allowed deviation of a density operator's trace from 1.
pub const TRACE_TOL: f64 = 1e-10;

/// Square complex matrix equal to its conjugate transpose.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator<R: Real> {
    matrix: CMatrix<R>,
}

impl<R: Real> HermitianOperator<R> {
    /// Validates and symmetrizes `matrix`.
    pub fn new(matrix: CMatrix<R>) -> Result<Self> {
        let (rows, cols) = matrix.shape();
        if rows != cols || rows == 0 {
            return Err(Error::NotSquare { rows, cols });
        }
        let mut asym = R::zero();
        let mut scale = R::one();
        for i in 0..rows {
            for j in 0..cols {
                let d = (matrix[(i, j)] - matrix[(j, i)].conj()).modulus();
                asym = asym.max(d);
                scale = scale.max(matrix[(i, j)].modulus());
            }
        }
        if asym > R::lit(HERMITIAN_REJECT_TOL) * scale {
            return Err(Error::NotHermitian(asym.as_f64()));
        }
        Ok(Self::symmetrized(matrix))
    }

    /// Takes the Hermitian part `(M + M†)/2` without validation.
    pub(crate) fn symmetrized(matrix: CMatrix<R>) -> Self {
        let adj = matrix.adjoint();
        Self { matrix: (matrix + adj) * c(R::lit(0.5)) }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { matrix: CMatrix::zeros(dim, dim) }
    }

    pub fn identity(dim: usize) -> Self {
        Self { matrix: CMatrix::identity(dim, dim) }
    }

    pub fn from_real_diagonal(diag: &[R]) -> Self {
        let v = DVector::from_iterator(diag.len(), diag.iter().map(|&x| c(x)));
        Self { matrix: CMatrix::from_diagonal(&v) }
    }

    /// Rank-one `|v><v|`.
    pub fn projector(v: &CVector<R>) -> Self {
        Self::symmetrized(v * v.adjoint())
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix<R> {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix<R> {
        self.matrix
    }

    pub fn trace(&self) -> R {
        self.matrix.diagonal().iter().fold(R::zero(), |acc, z| acc + z.re)
    }

    /// Hilbert–Schmidt pairing `Tr(A B)`, real for Hermitian arguments.
    pub fn inner(&self, other: &Self) -> R {
        self.matrix.iter().zip(other.matrix.iter()).fold(R::zero(), |acc, (a, b)| acc + (*a * b.conj()).re)
    }

    /// `<v| A |v>`.
    pub fn expectation(&self, v: &CVector<R>) -> R {
        v.dotc(&(&self.matrix * v)).re
    }

    pub fn scaled(&self, s: R) -> Self {
        Self { matrix: &self.matrix * c(s) }
    }

    /// Eigendecomposition with eigenvalues in ascending order.
    pub fn eigh(&self) -> Spectrum<R> {
        Spectrum::of(&self.matrix)
    }

    pub fn trace_norm(&self) -> R {
        self.eigh().values.iter().fold(R::zero(), |acc, &l| acc + l.abs())
    }

    pub fn operator_norm(&self) -> R {
        self.eigh().values.iter().fold(R::zero(), |acc, &l| acc.max(l.abs()))
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> R {
        self.matrix.iter().zip(other.matrix.iter()).fold(R::zero(), |acc, (a, b)| acc.max((*a - *b).modulus()))
    }

    pub fn cast<S: Real>(&self) -> HermitianOperator<S> {
        HermitianOperator { matrix: self.matrix.map(|z| Complex::new(S::lit(z.re.as_f64()), S::lit(z.im.as_f64()))) }
    }
}

impl<'a, R: Real> Add<&'a HermitianOperator<R>> for &'a HermitianOperator<R> {
    type Output = HermitianOperator<R>;
    fn add(self, rhs: &'a HermitianOperator<R>) -> HermitianOperator<R> {
        HermitianOperator { matrix: &self.matrix + &rhs.matrix }
    }
}

impl<'a, R: Real> Sub<&'a HermitianOperator<R>> for &'a HermitianOperator<R> {
    type Output = HermitianOperator<R>;
    fn sub(self, rhs: &'a HermitianOperator<R>) -> HermitianOperator<R> {
        HermitianOperator { matrix: &self.matrix - &rhs.matrix }
    }
}

/// Eigendecomposition `H = V diag(values) V†`, values ascending.
#[derive(Clone, Debug)]
pub struct Spectrum<R: Real> {
    pub values: DVector<R>,
    pub vectors: CMatrix<R>,
}

impl<R: Real> Spectrum<R> {
    pub(crate) fn of(m: &CMatrix<R>) -> Self {
        let eig = m.clone().symmetric_eigen();
        let n = eig.eigenvalues.len();
        let mut order: Vec<usize> = (0..n).collect();
        order
            .sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap_or(std::cmp::Ordering::Equal));
        let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
        let mut vectors = CMatrix::zeros(n, n);
        for (k, &i) in order.iter().enumerate() {
            vectors.set_column(k, &eig.eigenvectors.column(i));
        }
        Self { values, vectors }
    }

    pub fn min(&self) -> R {
        self.values[0]
    }

    pub fn max(&self) -> R {
        self.values[self.values.len() - 1]
    }

    /// `V f(Λ) V†`.
    pub fn apply(&self, f: impl Fn(R) -> R) -> HermitianOperator<R> {
        self.with_values(|k| f(self.values[k]))
    }

    /// `V diag(f(0), ..., f(n-1)) V†`.
    pub(crate) fn with_values(&self, f: impl Fn(usize) -> R) -> HermitianOperator<R> {
        let mut scaled = self.vectors.clone();
        for k in 0..self.values.len() {
            let fl = c(f(k));
            for z in scaled.column_mut(k).iter_mut() {
                *z *= fl;
            }
        }
        HermitianOperator::symmetrized(scaled * self.vectors.adjoint())
    }

    /// Diagonal of `V† A V`, i.e. `<v_k|A|v_k>` for every eigenvector.
    pub fn diagonal_of(&self, a: &CMatrix<R>) -> DVector<R> {
        let av = a * &self.vectors;
        DVector::from_iterator(
            self.values.len(),
            (0..self.values.len()).map(|k| self.vectors.column(k).dotc(&av.column(k)).re),
        )
    }
}

/// Hermitian operator with non-negative spectrum.
#[derive(Clone, Debug, PartialEq)]
pub struct PositiveOperator<R: Real> {
    op: HermitianOperator<R>,
    trace: R,
}

impl<R: Real> PositiveOperator<R> {
    /// Clips eigenvalues in `[-1e-10 ||H||, 0)` to zero, rejects anything more negative.
    pub fn new(op: HermitianOperator<R>) -> Result<Self> {
        let spec = op.eigh();
        let norm = spec.min().abs().max(spec.max().abs());
        let min = spec.min();
        if min < -R::lit(PSD_CLIP_TOL) * norm {
            return Err(Error::NotPositive(min.as_f64()));
        }
        let op = if min < R::zero() { spec.apply(|l| l.max(R::zero())) } else { op };
        let trace = op.trace();
        Ok(Self { op, trace })
    }

    pub fn from_matrix(m: CMatrix<R>) -> Result<Self> {
        Self::new(HermitianOperator::new(m)?)
    }

    /// Skips the spectral check; callers guarantee positivity by construction.
    pub(crate) fn from_trusted(op: HermitianOperator<R>) -> Self {
        let trace = op.trace();
        Self { op, trace }
    }

    pub fn zero(dim: usize) -> Self {
        Self { op: HermitianOperator::zeros(dim), trace: R::zero() }
    }

    pub fn trace(&self) -> R {
        self.trace
    }

    pub fn hermitian(&self) -> &HermitianOperator<R> {
        &self.op
    }

    pub fn scaled(&self, s: R) -> Result<Self> {
        if s < R::zero() {
            return Err(Error::InvalidArgument("negative scale of a positive operator".into()));
        }
        Ok(Self::from_trusted(self.op.scaled(s)))
    }

    pub fn support_projector(&self, tol: R) -> HermitianOperator<R> {
        support_projector(self, tol)
    }
}

impl<R: Real> Deref for PositiveOperator<R> {
    type Target = HermitianOperator<R>;
    fn deref(&self) -> &HermitianOperator<R> {
        &self.op
    }
}

/// Unit-trace positive operator on a multipartite layout.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator<R: Real> {
    pos: PositiveOperator<R>,
    layout: SystemLayout,
}

impl<R: Real> DensityOperator<R> {
    pub fn new(pos: PositiveOperator<R>, layout: SystemLayout) -> Result<Self> {
        layout.check_dim(pos.dim())?;
        if (pos.trace() - R::one()).abs() > R::lit(TRACE_TOL) {
            return Err(Error::NotNormalized(pos.trace().as_f64()));
        }
        Ok(Self { pos, layout })
    }

    pub fn from_matrix(m: CMatrix<R>, layout: SystemLayout) -> Result<Self> {
        Self::new(PositiveOperator::from_matrix(m)?, layout)
    }

    /// `A / Tr A`.
    pub fn normalized(pos: PositiveOperator<R>, layout: SystemLayout) -> Result<Self> {
        let t = pos.trace();
        if t <= R::zero() {
            return Err(Error::NotNormalized(t.as_f64()));
        }
        let scaled = PositiveOperator::from_trusted(pos.op.scaled(R::one() / t));
        Self::new(scaled, layout)
    }

    pub(crate) fn from_trusted(op: HermitianOperator<R>, layout: SystemLayout) -> Self {
        Self { pos: PositiveOperator::from_trusted(op), layout }
    }

    /// `|v><v| / <v|v>`.
    pub fn pure(v: &CVector<R>, layout: SystemLayout) -> Result<Self> {
        layout.check_dim(v.len())?;
        let n = v.norm();
        if n <= R::zero() {
            return Err(Error::InvalidArgument("zero state vector".into()));
        }
        let u = v.unscale(n);
        Ok(Self::from_trusted(HermitianOperator::projector(&u), layout))
    }

    pub fn maximally_mixed(layout: SystemLayout) -> Self {
        let d = layout.total();
        let op = HermitianOperator::identity(d).scaled(R::one() / R::from_usize_lossy(d));
        Self::from_trusted(op, layout)
    }

    pub fn layout(&self) -> &SystemLayout {
        &self.layout
    }

    pub fn positive(&self) -> &PositiveOperator<R> {
        &self.pos
    }

    pub fn into_positive(self) -> PositiveOperator<R> {
        self.pos
    }

    pub fn with_layout(self, layout: SystemLayout) -> Result<Self> {
        layout.check_dim(self.dim())?;
        Ok(Self { pos: self.pos, layout })
    }

    /// `p * self + (1 - p) * other`.
    pub fn mix(&self, other: &Self, p: R) -> Result<Self> {
        if self.layout != other.layout {
            return Err(Error::InvalidArgument("mixing states on different layouts".into()));
        }
        if p < R::zero() || p > R::one() {
            return Err(Error::InvalidArgument(format!("mixing weight {} outside [0,1]", p.as_f64())));
        }
        let op = &self.hermitian().scaled(p) + &other.hermitian().scaled(R::one() - p);
        Ok(Self::from_trusted(op, self.layout.clone()))
    }

    /// Convex combination with the given (non-negative, summing to one) weights.
    pub fn convex_combination(states: &[Self], weights: &[R]) -> Result<Self> {
        let first = states.first().ok_or_else(|| Error::InvalidArgument("empty convex combination".into()))?;
        if states.len() != weights.len() {
            return Err(Error::InvalidArgument("weights and states differ in length".into()));
        }
        let mut acc = CMatrix::zeros(first.dim(), first.dim());
        let mut total = R::zero();
        for (s, &w) in states.iter().zip(weights) {
            if s.layout != first.layout || w < R::zero() {
                return Err(Error::InvalidArgument("invalid convex combination".into()));
            }
            acc += s.matrix() * c(w);
            total += w;
        }
        if (total - R::one()).abs() > R::lit(TRACE_TOL) {
            return Err(Error::NotNormalized(total.as_f64()));
        }
        Ok(Self::from_trusted(HermitianOperator::symmetrized(acc), first.layout.clone()))
    }

    /// `||self - other||_1`.
    pub fn trace_distance(&self, other: &Self) -> R {
        (self.hermitian() - other.hermitian()).trace_norm()
    }

    pub fn is_faithful(&self, tol: R) -> bool {
        self.eigh().min() > tol
    }

    pub fn tensor(&self, other: &Self) -> Self {
        let m = kron(self.matrix(), other.matrix());
        Self::from_trusted(HermitianOperator::symmetrized(m), self.layout.join(&other.layout))
    }

    /// Reduced state on the factors in `keep`.
    pub fn marginal(&self, keep: &[usize]) -> Result<Self> {
        let sub = self.layout.subsystem(keep)?;
        let pos = partial_trace(&self.pos, &self.layout, keep)?;
        Ok(Self::from_trusted(pos.op, sub))
    }

    pub fn cast<S: Real>(&self) -> DensityOperator<S> {
        DensityOperator::from_trusted(self.hermitian().cast(), self.layout.clone())
    }
}

impl<R: Real> Deref for DensityOperator<R> {
    type Target = PositiveOperator<R>;
    fn deref(&self) -> &PositiveOperator<R> {
        &self.pos
    }
}
