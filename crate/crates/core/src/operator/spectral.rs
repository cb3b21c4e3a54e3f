//! Functional calculus on Hermitian operators.

use nalgebra::{Complex, ComplexField};

use super::{HermitianOperator, PositiveOperator, Spectrum};
use crate::error::{Error, Result};
use crate::scalar::{CMatrix, Real};

/// Eigenvalue gaps below `DEGENERACY_TOL * λ_max` use the confluent kernel.
pub const DEGENERACY_TOL: f64 = 1e-9;

/// `U f(Λ) U†` for `H = U Λ U†`.
pub fn spectral_apply<R: Real>(h: &HermitianOperator<R>, f: impl Fn(R) -> R) -> HermitianOperator<R> {
    h.eigh().apply(f)
}

/// Projector onto the span of eigenvectors with eigenvalue above `tol * λ_max`.
pub fn support_projector<R: Real>(rho: &PositiveOperator<R>, tol: R) -> HermitianOperator<R> {
    let spec = rho.eigh();
    let cut = tol * spec.max();
    spec.apply(|l| if l > cut && l > R::zero() { R::one() } else { R::zero() })
}

/// Divided difference of `ln` at `(a, b)`, both positive.
pub(crate) fn log_divided_difference<R: Real>(a: R, b: R, degenerate: R) -> R {
    let d = a - b;
    if d.abs() < degenerate {
        R::lit(2.0) / (a + b)
    } else if a > b {
        (d / b).ln_1p() / d
    } else {
        (-d / a).ln_1p() / (-d)
    }
}

/// Fréchet derivative of the matrix logarithm at `sigma` in direction `x`.
///
/// In the eigenbasis of `sigma` the derivative is the Hadamard product of `x`
/// with the divided differences of `ln`. Only the support of `sigma`
/// (eigenvalues above `tol * λ_max`) is used; `x` must not carry weight
/// outside it beyond `tol`.
pub fn frechet_log<R: Real>(
    sigma: &PositiveOperator<R>,
    x: &HermitianOperator<R>,
    tol: R,
) -> Result<HermitianOperator<R>> {
    frechet_log_with(&sigma.eigh(), x, tol)
}

pub(crate) fn frechet_log_with<R: Real>(
    spec: &Spectrum<R>,
    x: &HermitianOperator<R>,
    tol: R,
) -> Result<HermitianOperator<R>> {
    let n = spec.values.len();
    if x.dim() != n {
        return Err(Error::LayoutMismatch { expected: n, found: x.dim() });
    }
    let lmax = spec.max();
    let cut = tol * lmax;
    let in_support: Vec<bool> = spec.values.iter().map(|&l| l > cut && l > R::zero()).collect();
    let v = &spec.vectors;
    let y: CMatrix<R> = v.adjoint() * x.matrix() * v;
    let scale = x.matrix().iter().fold(R::one(), |acc, z| acc.max(z.modulus()));
    let degenerate = R::lit(DEGENERACY_TOL) * lmax;
    let mut leak = R::zero();
    let mut k = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if in_support[i] && in_support[j] {
                let w = log_divided_difference(spec.values[i], spec.values[j], degenerate);
                k[(i, j)] = y[(i, j)] * Complex::new(w, R::zero());
            } else {
                leak = leak.max(y[(i, j)].modulus());
            }
        }
    }
    if leak > tol * scale {
        return Err(Error::SupportViolation(leak.as_f64()));
    }
    Ok(HermitianOperator::symmetrized(v * k * v.adjoint()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::SystemLayout;
    use crate::random::{random_density, random_hermitian};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn spectral_apply_diagonal_log() {
        let h = HermitianOperator::<f64>::from_real_diagonal(&[1.0, 2.0]);
        let l = spectral_apply(&h, f64::ln);
        let expect = HermitianOperator::from_real_diagonal(&[0.0, 2f64.ln()]);
        assert!(l.max_abs_diff(&expect) < 1e-15);
    }

    #[test]
    fn spectral_apply_exp_of_identity() {
        let h = HermitianOperator::<f64>::identity(3);
        let e = spectral_apply(&h, f64::exp);
        assert!(e.max_abs_diff(&HermitianOperator::identity(3).scaled(std::f64::consts::E)) < 1e-14);
    }

    #[test]
    fn spectral_apply_square_of_pauli_x() {
        let one = Complex::new(1.0, 0.0);
        let zero = Complex::new(0.0, 0.0);
        let x = HermitianOperator::new(CMatrix::from_row_slice(2, 2, &[zero, one, one, zero])).unwrap();
        let sq = spectral_apply(&x, |l| l * l);
        assert!(sq.max_abs_diff(&HermitianOperator::identity(2)) < 1e-14);
    }

    #[test]
    fn spectral_apply_identity_function() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = random_hermitian::<f64, _>(5, &mut rng);
        assert!(spectral_apply(&h, |l| l).max_abs_diff(&h) < 1e-12);
    }

    #[test]
    fn support_projector_cases() {
        let full = PositiveOperator::new(HermitianOperator::<f64>::from_real_diagonal(&[0.3, 0.7])).unwrap();
        assert!(support_projector(&full, 1e-12).max_abs_diff(&HermitianOperator::identity(2)) < 1e-14);

        let v = crate::scalar::CVector::from_vec(vec![Complex::new(0.6, 0.0), Complex::new(0.0, 0.8)]);
        let pure = HermitianOperator::projector(&v);
        let p = support_projector(&PositiveOperator::new(pure.clone()).unwrap(), 1e-12);
        assert!(p.max_abs_diff(&pure) < 1e-14);

        let tiny = PositiveOperator::new(HermitianOperator::<f64>::from_real_diagonal(&[0.5, 0.5, 1e-16])).unwrap();
        let p = support_projector(&tiny, 1e-12);
        assert!((p.trace() - 2.0).abs() < 1e-14);
        assert!(p.matrix()[(2, 2)].norm() < 1e-14);
    }

    #[test]
    fn frechet_log_at_identity_is_identity_map() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = random_hermitian::<f64, _>(4, &mut rng);
        let id = PositiveOperator::new(HermitianOperator::identity(4)).unwrap();
        assert!(frechet_log(&id, &x, 1e-10).unwrap().max_abs_diff(&x) < 1e-14);
    }

    #[test]
    fn frechet_log_commuting_case() {
        let s = PositiveOperator::new(HermitianOperator::<f64>::from_real_diagonal(&[0.2, 0.8])).unwrap();
        let x = HermitianOperator::from_real_diagonal(&[1.5, -0.4]);
        let d = frechet_log(&s, &x, 1e-10).unwrap();
        let expect = HermitianOperator::from_real_diagonal(&[1.5 / 0.2, -0.4 / 0.8]);
        assert!(d.max_abs_diff(&expect) < 1e-13);
    }

    #[test]
    fn frechet_log_matches_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let layout = SystemLayout::single(4).unwrap();
        for _ in 0..5 {
            let sigma = random_density::<f64, _>(&layout, &mut rng);
            let x = random_hermitian::<f64, _>(4, &mut rng).scaled(0.1);
            let h = 1e-5;
            let plus = spectral_apply(&(sigma.hermitian() + &x.scaled(h)), f64::ln);
            let minus = spectral_apply(&(sigma.hermitian() - &x.scaled(h)), f64::ln);
            let fd = (&plus - &minus).scaled(0.5 / h);
            let d = frechet_log(sigma.positive(), &x, 1e-10).unwrap();
            assert!(d.max_abs_diff(&fd) < 1e-6, "{}", d.max_abs_diff(&fd));
        }
    }

    #[test]
    fn frechet_log_rejects_weight_outside_support() {
        let s = PositiveOperator::new(HermitianOperator::<f64>::from_real_diagonal(&[1.0, 0.0])).unwrap();
        let x = HermitianOperator::from_real_diagonal(&[0.5, 0.5]);
        assert!(matches!(frechet_log(&s, &x, 1e-10), Err(Error::SupportViolation(_))));
        let inside = HermitianOperator::from_real_diagonal(&[0.5, 0.0]);
        let d = frechet_log(&s, &inside, 1e-10).unwrap();
        assert!((d.matrix()[(0, 0)].re - 0.5).abs() < 1e-15);
    }

    #[test]
    fn degenerate_spectrum_uses_confluent_kernel() {
        let s = PositiveOperator::new(HermitianOperator::<f64>::from_real_diagonal(&[0.5, 0.5 + 1e-13])).unwrap();
        let one = Complex::new(1.0, 0.0);
        let zero = Complex::new(0.0, 0.0);
        let x = HermitianOperator::new(CMatrix::from_row_slice(2, 2, &[zero, one, one, zero])).unwrap();
        let d = frechet_log(&s, &x, 1e-10).unwrap();
        assert!((d.matrix()[(0, 1)].re - 2.0).abs() < 1e-9);
    }
}
