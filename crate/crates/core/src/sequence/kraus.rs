//! Completely positive trace-non-increasing maps in Kraus form.

use nalgebra::DMatrix;

use super::State;
use crate::error::{Error, Result};
use crate::operator::{kron, HermitianOperator, PositiveOperator, Spectrum, SystemLayout};
use crate::scalar::CMatrix;

/// Slack allowed in `Σ K†K ⪯ I`.
pub const KRAUS_TOL: f64 = 1e-10;

/// `Φ(X) = Σ_i K_i X K_i†` with `Σ_i K_i† K_i ⪯ I`.
#[derive(Clone, Debug, PartialEq)]
pub struct KrausOperation {
    input: SystemLayout,
    output: SystemLayout,
    kraus: Vec<CMatrix<f64>>,
}

impl KrausOperation {
    pub fn new(input: SystemLayout, output: SystemLayout, kraus: Vec<CMatrix<f64>>) -> Result<Self> {
        if kraus.is_empty() {
            return Err(Error::InvalidArgument("operation without Kraus operators".into()));
        }
        for k in &kraus {
            if k.nrows() != output.total() || k.ncols() != input.total() {
                return Err(Error::LayoutMismatch {
                    expected: output.total() * input.total(),
                    found: k.nrows() * k.ncols(),
                });
            }
        }
        let op = Self { input, output, kraus };
        let excess = op.completeness_excess();
        if excess > KRAUS_TOL {
            return Err(Error::InvalidArgument(format!("Kraus operators exceed identity by {excess:.3e}")));
        }
        Ok(op)
    }

    pub fn identity(layout: SystemLayout) -> Self {
        let d = layout.total();
        Self { input: layout.clone(), output: layout, kraus: vec![CMatrix::identity(d, d)] }
    }

    /// `⊗_k K_k`, one single-factor operator per factor of `layout`.
    pub fn local(layout: SystemLayout, factors: &[CMatrix<f64>]) -> Result<Self> {
        if factors.len() != layout.parties() {
            return Err(Error::LayoutMismatch { expected: layout.parties(), found: factors.len() });
        }
        let mut k = DMatrix::identity(1, 1);
        for f in factors {
            k = kron(&k, f);
        }
        Self::new(layout.clone(), layout, vec![k])
    }

    pub fn input(&self) -> &SystemLayout {
        &self.input
    }

    pub fn output(&self) -> &SystemLayout {
        &self.output
    }

    pub fn kraus(&self) -> &[CMatrix<f64>] {
        &self.kraus
    }

    /// `λ_max(Σ K†K) − 1`.
    pub fn completeness_excess(&self) -> f64 {
        let d = self.input.total();
        let mut sum = CMatrix::zeros(d, d);
        for k in &self.kraus {
            sum += k.adjoint() * k;
        }
        Spectrum::of(&HermitianOperator::symmetrized(sum).into_matrix()).max() - 1.0
    }

    pub fn apply(&self, x: &HermitianOperator<f64>) -> HermitianOperator<f64> {
        let d = self.output.total();
        let mut acc = CMatrix::zeros(d, d);
        for k in &self.kraus {
            acc += k * x.matrix() * k.adjoint();
        }
        HermitianOperator::symmetrized(acc)
    }

    /// `Φ(ρ) / Tr Φ(ρ)` together with `Tr Φ(ρ)`.
    pub fn normalized_image(&self, rho: &State) -> Result<(State, f64)> {
        if rho.layout() != &self.input {
            return Err(Error::LayoutMismatch { expected: self.input.total(), found: rho.dim() });
        }
        let image = PositiveOperator::new(self.apply(rho.hermitian()))?;
        let c = image.trace();
        if c < 1e-12 {
            return Err(Error::DegenerateOperation(c));
        }
        Ok((State::normalized(image, self.output.clone())?, c))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Complex;

    #[test]
    fn rank_one_local_projection() {
        let layout = SystemLayout::bipartite(2, 2).unwrap();
        let mut p = CMatrix::zeros(2, 2);
        p[(0, 0)] = Complex::new(1.0, 0.0);
        let op = KrausOperation::local(layout.clone(), &[p, CMatrix::identity(2, 2)]).unwrap();
        let rho = State::maximally_mixed(layout);
        let (out, c) = op.normalized_image(&rho).unwrap();
        assert!((c - 0.5).abs() < 1e-15);
        let expected = HermitianOperator::from_real_diagonal(&[0.5, 0.5, 0.0, 0.0]);
        assert!(out.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn rejects_trace_increasing_maps() {
        let layout = SystemLayout::single(2).unwrap();
        let k = CMatrix::identity(2, 2) * Complex::new(1.01, 0.0);
        assert!(KrausOperation::new(layout.clone(), layout, vec![k]).is_err());
    }

    #[test]
    fn vanishing_output_is_degenerate() {
        let layout = SystemLayout::single(2).unwrap();
        let mut p = CMatrix::zeros(2, 2);
        p[(1, 1)] = Complex::new(1.0, 0.0);
        let op = KrausOperation::new(layout.clone(), layout.clone(), vec![p]).unwrap();
        let rho = State::from_trusted(HermitianOperator::from_real_diagonal(&[1.0, 0.0]), layout);
        assert!(matches!(op.normalized_image(&rho), Err(Error::DegenerateOperation(_))));
    }
}
