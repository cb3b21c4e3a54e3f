//! Tensor products, subsystem permutations, partial traces and partial transposes.

use super::{normalize_indices, HermitianOperator, PositiveOperator, SystemLayout};
use crate::error::Result;
use crate::scalar::{CMatrix, Real};

pub fn kron<R: Real>(a: &CMatrix<R>, b: &CMatrix<R>) -> CMatrix<R> {
    a.kronecker(b)
}

/// `A ⊗ B` for Hermitian operators.
pub fn tensor<R: Real>(a: &HermitianOperator<R>, b: &HermitianOperator<R>) -> HermitianOperator<R> {
    HermitianOperator::symmetrized(kron(a.matrix(), b.matrix()))
}

fn digits(mut index: usize, dims: &[usize], out: &mut [usize]) {
    for k in (0..dims.len()).rev() {
        out[k] = index % dims[k];
        index /= dims[k];
    }
}

fn flatten(digits: &[usize], dims: &[usize]) -> usize {
    digits.iter().zip(dims).fold(0, |acc, (&x, &d)| acc * d + x)
}

/// Map from flat index under `dims` to flat index after reordering the
/// factors so that new factor `k` is old factor `order[k]`.
fn permutation_map(dims: &[usize], order: &[usize]) -> Vec<usize> {
    let total: usize = dims.iter().product();
    let new_dims: Vec<usize> = order.iter().map(|&o| dims[o]).collect();
    let mut old = vec![0; dims.len()];
    let mut new = vec![0; dims.len()];
    (0..total)
        .map(|i| {
            digits(i, dims, &mut old);
            for (k, &o) in order.iter().enumerate() {
                new[k] = old[o];
            }
            flatten(&new, &new_dims)
        })
        .collect()
}

/// Reorders tensor factors: factor `k` of the output is factor `order[k]` of the input.
pub fn permute_subsystems<R: Real>(m: &CMatrix<R>, dims: &[usize], order: &[usize]) -> CMatrix<R> {
    let map = permutation_map(dims, order);
    let n = m.nrows();
    let mut out = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            out[(map[i], map[j])] = m[(i, j)];
        }
    }
    out
}

pub(crate) fn partial_trace_matrix<R: Real>(m: &CMatrix<R>, dims: &[usize], keep: &[usize]) -> CMatrix<R> {
    let traced: Vec<usize> = (0..dims.len()).filter(|i| !keep.contains(i)).collect();
    let order: Vec<usize> = keep.iter().chain(traced.iter()).copied().collect();
    let permuted = permute_subsystems(m, dims, &order);
    let kd: usize = keep.iter().map(|&i| dims[i]).product();
    let td: usize = traced.iter().map(|&i| dims[i]).product();
    CMatrix::from_fn(kd, kd, |a, b| {
        (0..td).fold(nalgebra::Complex::new(R::zero(), R::zero()), |acc, t| acc + permuted[(a * td + t, b * td + t)])
    })
}

/// Reduced operator on the factors in `keep` (ascending order).
pub fn partial_trace<R: Real>(
    op: &PositiveOperator<R>,
    layout: &SystemLayout,
    keep: &[usize],
) -> Result<PositiveOperator<R>> {
    layout.check_dim(op.dim())?;
    let keep = normalize_indices(keep, layout.parties())?;
    let m = partial_trace_matrix(op.matrix(), layout.dims(), &keep);
    Ok(PositiveOperator::from_trusted(HermitianOperator::symmetrized(m)))
}

pub(crate) fn partial_transpose_matrix<R: Real>(m: &CMatrix<R>, dims: &[usize], subsystems: &[usize]) -> CMatrix<R> {
    let n = m.nrows();
    let mut out = CMatrix::zeros(n, n);
    let mut ri = vec![0; dims.len()];
    let mut ci = vec![0; dims.len()];
    for i in 0..n {
        for j in 0..n {
            digits(i, dims, &mut ri);
            digits(j, dims, &mut ci);
            for &s in subsystems {
                std::mem::swap(&mut ri[s], &mut ci[s]);
            }
            out[(flatten(&ri, dims), flatten(&ci, dims))] = m[(i, j)];
        }
    }
    out
}

/// Transpose on the listed factors; preserves Hermiticity and trace.
pub fn partial_transpose<R: Real>(
    op: &HermitianOperator<R>,
    layout: &SystemLayout,
    subsystems: &[usize],
) -> Result<HermitianOperator<R>> {
    layout.check_dim(op.dim())?;
    let subs = normalize_indices(subsystems, layout.parties())?;
    Ok(HermitianOperator::symmetrized(partial_transpose_matrix(op.matrix(), layout.dims(), &subs)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::DensityOperator;
    use crate::scalar::CVector;
    use nalgebra::Complex;

    fn bell() -> DensityOperator<f64> {
        let s = 0.5f64.sqrt();
        let v = CVector::from_vec(vec![
            Complex::new(s, 0.0),
            Complex::new(0.0, 0.0),
            Complex::new(0.0, 0.0),
            Complex::new(s, 0.0),
        ]);
        DensityOperator::pure(&v, SystemLayout::bipartite(2, 2).unwrap()).unwrap()
    }

    #[test]
    fn bell_marginal_is_maximally_mixed() {
        // Direct index summation: (rho_A)_{ab} = sum_t rho_{(a,t),(b,t)}.
        let rho = bell();
        let m = rho.matrix();
        let mut oracle = CMatrix::<f64>::zeros(2, 2);
        for a in 0..2 {
            for b in 0..2 {
                for t in 0..2 {
                    oracle[(a, b)] += m[(2 * a + t, 2 * b + t)];
                }
            }
        }
        let ra = rho.marginal(&[0]).unwrap();
        assert!((ra.matrix() - &oracle).norm() < 1e-14);
        assert!((ra.matrix()[(0, 0)].re - 0.5).abs() < 1e-14);
        assert!(ra.matrix()[(0, 1)].norm() < 1e-14);
    }

    #[test]
    fn bell_partial_transpose_spectrum() {
        let rho = bell();
        let pt = partial_transpose(rho.hermitian(), rho.layout(), &[1]).unwrap();
        let vals = pt.eigh().values;
        let expect = [-0.5, 0.5, 0.5, 0.5];
        for (v, e) in vals.iter().zip(expect) {
            assert!((v - e).abs() < 1e-12);
        }
        assert!((pt.trace() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn trace_recovers_product_factor() {
        let a = DensityOperator::<f64>::from_matrix(
            CMatrix::from_row_slice(
                2,
                2,
                &[Complex::new(0.7, 0.0), Complex::new(0.1, 0.2), Complex::new(0.1, -0.2), Complex::new(0.3, 0.0)],
            ),
            SystemLayout::single(2).unwrap(),
        )
        .unwrap();
        let b = DensityOperator::maximally_mixed(SystemLayout::single(3).unwrap());
        let ab = a.tensor(&b);
        assert_eq!(ab.layout().dims(), &[2, 3]);
        assert!((ab.marginal(&[0]).unwrap().matrix() - a.matrix()).norm() < 1e-14);
        assert!((ab.marginal(&[1]).unwrap().matrix() - b.matrix()).norm() < 1e-14);
        let ba = DensityOperator::from_trusted(
            HermitianOperator::symmetrized(permute_subsystems(ab.matrix(), &[2, 3], &[1, 0])),
            SystemLayout::new(vec![3, 2]).unwrap(),
        );
        assert!((ba.matrix() - kron(b.matrix(), a.matrix())).norm() < 1e-14);
    }

    #[test]
    fn out_of_range_indices_rejected() {
        let rho = bell();
        assert!(rho.marginal(&[2]).is_err());
        assert!(partial_transpose(rho.hermitian(), rho.layout(), &[5]).is_err());
    }
}
