//! Seeded random operators and states.

use nalgebra::{Complex, ComplexField};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::operator::{DensityOperator, HermitianOperator, SystemLayout};
use crate::scalar::{CMatrix, CVector, Real};

fn gaussian<R: Real, G: Rng + ?Sized>(rng: &mut G) -> Complex<R> {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex::new(R::lit(re), R::lit(im))
}

pub fn ginibre<R: Real, G: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut G) -> CMatrix<R> {
    CMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

/// Haar-random unit vector.
pub fn random_unit_vector<R: Real, G: Rng + ?Sized>(dim: usize, rng: &mut G) -> CVector<R> {
    let v = CVector::from_fn(dim, |_, _| gaussian(rng));
    let n = v.norm();
    v.unscale(n)
}

/// GUE-like Hermitian matrix.
pub fn random_hermitian<R: Real, G: Rng + ?Sized>(dim: usize, rng: &mut G) -> HermitianOperator<R> {
    HermitianOperator::symmetrized(ginibre(dim, dim, rng))
}

/// Hilbert–Schmidt random density operator (faithful with probability one).
pub fn random_density<R: Real, G: Rng + ?Sized>(layout: &SystemLayout, rng: &mut G) -> DensityOperator<R> {
    random_density_rank(layout, layout.total(), rng)
}

/// Induced-measure density operator of rank at most `rank`.
pub fn random_density_rank<R: Real, G: Rng + ?Sized>(
    layout: &SystemLayout,
    rank: usize,
    rng: &mut G,
) -> DensityOperator<R> {
    let d = layout.total();
    let g = ginibre::<R, _>(d, rank.max(1), rng);
    let w = HermitianOperator::symmetrized(&g * g.adjoint());
    let t = w.trace();
    DensityOperator::from_trusted(w.scaled(R::one() / t), layout.clone())
}

pub fn random_pure<R: Real, G: Rng + ?Sized>(layout: &SystemLayout, rng: &mut G) -> DensityOperator<R> {
    let v = random_unit_vector(layout.total(), rng);
    DensityOperator::from_trusted(HermitianOperator::projector(&v), layout.clone())
}

/// Haar-random unitary via QR of a Ginibre matrix with phase correction.
pub fn random_unitary<R: Real, G: Rng + ?Sized>(dim: usize, rng: &mut G) -> CMatrix<R> {
    random_isometry(dim, dim, rng)
}

/// Random isometry `V: C^cols -> C^rows` (`V†V = I`), `rows >= cols`.
pub fn random_isometry<R: Real, G: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut G) -> CMatrix<R> {
    let g = ginibre::<R, _>(rows, cols, rng);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for k in 0..cols {
        let d = r[(k, k)];
        let n = d.modulus();
        if n > R::zero() {
            let phase = d.unscale(n);
            for z in q.column_mut(k).iter_mut() {
                *z *= phase;
            }
        }
    }
    q
}

/// Uniform point on the probability simplex.
pub fn simplex_weights<R: Real, G: Rng + ?Sized>(n: usize, rng: &mut G) -> Vec<R> {
    let raw: Vec<f64> = (0..n).map(|_| -rng.random::<f64>().max(f64::MIN_POSITIVE).ln()).collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|x| R::lit(x / s)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn isometry_is_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let v = random_isometry::<f64, _>(6, 3, &mut rng);
        let g = v.adjoint() * &v;
        assert!((g - CMatrix::identity(3, 3)).norm() < 1e-12);
    }

    #[test]
    fn random_density_is_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let layout = SystemLayout::bipartite(2, 3).unwrap();
        let rho = random_density::<f64, _>(&layout, &mut rng);
        assert!((rho.trace() - 1.0).abs() < 1e-12);
        assert!(rho.eigh().min() > 0.0);
        let w: Vec<f64> = simplex_weights(4, &mut rng);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
