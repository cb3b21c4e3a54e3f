//! Alternating minimization of `<ψ_1⊗…⊗ψ_m| G |ψ_1⊗…⊗ψ_m>` over product vectors.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::OracleConfig;
use crate::error::{Error, Result};
use crate::operator::{DensityOperator, HermitianOperator, Spectrum, SystemLayout};
use crate::random::random_unit_vector;
use crate::scalar::{c, CMatrix, CVector, Real};

/// One unit vector per factor of a layout.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductPureState<R: Real> {
    layout: SystemLayout,
    factors: Vec<CVector<R>>,
}

impl<R: Real> ProductPureState<R> {
    pub fn new(layout: SystemLayout, factors: Vec<CVector<R>>) -> Result<Self> {
        if factors.len() != layout.parties() || factors.iter().zip(layout.dims()).any(|(f, &d)| f.len() != d) {
            return Err(Error::LayoutMismatch {
                expected: layout.total(),
                found: factors.iter().map(|f| f.len()).product(),
            });
        }
        let factors = factors
            .into_iter()
            .map(|f| {
                let n = f.norm();
                if n <= R::zero() {
                    Err(Error::InvalidArgument("zero factor in product state".into()))
                } else {
                    Ok(f.unscale(n))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { layout, factors })
    }

    pub fn layout(&self) -> &SystemLayout {
        &self.layout
    }

    pub fn factors(&self) -> &[CVector<R>] {
        &self.factors
    }

    /// `ψ_1 ⊗ … ⊗ ψ_m`.
    pub fn vector(&self) -> CVector<R> {
        kron_vectors(&self.factors)
    }

    pub fn density(&self) -> DensityOperator<R> {
        DensityOperator::from_trusted(HermitianOperator::projector(&self.vector()), self.layout.clone())
    }
}

fn kron_vectors<R: Real>(vs: &[CVector<R>]) -> CVector<R> {
    let mut acc = CVector::from_element(1, c(R::one()));
    for v in vs {
        acc = acc.kronecker(v);
    }
    acc
}

/// Best product state found, with the running best after each restart.
#[derive(Clone, Debug)]
pub struct ProductSearch<R: Real> {
    pub state: ProductPureState<R>,
    pub value: R,
    pub running_best: Vec<R>,
}

/// Matrix whose columns are `ψ_<j ⊗ e_a ⊗ ψ_>j`, `a = 0..d_j`.
fn embedding<R: Real>(factors: &[CVector<R>], j: usize) -> CMatrix<R> {
    let left = kron_vectors(&factors[..j]);
    let right = kron_vectors(&factors[j + 1..]);
    let d = factors[j].len();
    let id = CMatrix::<R>::identity(d, d);
    left.kronecker(&id).kronecker(&right)
}

fn single_run<R: Real>(g: &CMatrix<R>, dims: &[usize], cfg: &OracleConfig<R>, restart: usize) -> (Vec<CVector<R>>, R) {
    let mut rng = ChaCha8Rng::seed_from_u64(restart_seed(cfg.seed, restart));
    let mut factors: Vec<CVector<R>> = dims.iter().map(|&d| random_unit_vector(d, &mut rng)).collect();
    let v = kron_vectors(&factors);
    let mut value = v.dotc(&(g * &v)).re;
    for _ in 0..cfg.sweeps.max(1) {
        let before = value;
        for j in 0..dims.len() {
            let phi = embedding(&factors, j);
            let h = phi.adjoint() * g * &phi;
            let spec = Spectrum::of(&HermitianOperator::symmetrized(h).into_matrix());
            factors[j] = spec.vectors.column(0).into_owned();
            value = spec.min();
        }
        if before - value <= cfg.tolerance * value.abs().max(R::one()) {
            break;
        }
    }
    (factors, value)
}

pub(crate) fn restart_seed(seed: u64, restart: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add((restart as u64).wrapping_mul(0xBF58_476D_1CE4_E5B9))
        ^ 0x94D0_49BB_1331_11EB
}

/// Approximately minimizes `<ψ|G|ψ>` over product unit vectors on `layout`,
/// by alternating smallest-eigenvector updates from `cfg.restarts` random
/// starts. Restarts run in parallel; the reduction keeps the lowest value and
/// the smallest restart index among ties, so the result depends only on the seed.
pub fn closest_product_state<R: Real>(
    g: &HermitianOperator<R>,
    layout: &SystemLayout,
    cfg: &OracleConfig<R>,
) -> Result<ProductSearch<R>> {
    layout.check_dim(g.dim())?;
    cfg.validate()?;
    let dims = layout.dims();
    let runs: Vec<(Vec<CVector<R>>, R)> =
        (0..cfg.restarts).into_par_iter().map(|r| single_run(g.matrix(), dims, cfg, r)).collect();
    let mut best = 0;
    let mut running_best = Vec::with_capacity(runs.len());
    for (i, (_, v)) in runs.iter().enumerate() {
        if *v < runs[best].1 {
            best = i;
        }
        running_best.push(runs[best].1);
    }
    let (factors, value) = runs.into_iter().nth(best).expect("at least one restart");
    Ok(ProductSearch { state: ProductPureState::new(layout.clone(), factors)?, value, running_best })
}

/// `v` is a product vector across every factor of `layout`: each
/// single-factor marginal of `|v><v|` has rank one (within `tol`).
pub fn is_product_vector<R: Real>(v: &CVector<R>, layout: &SystemLayout, tol: R) -> bool {
    let n2 = v.norm_squared();
    if n2 <= R::zero() {
        return true;
    }
    let rho = HermitianOperator::projector(&v.unscale(n2.sqrt()));
    (0..layout.parties()).all(|k| {
        let m = crate::operator::partial_trace_matrix(rho.matrix(), layout.dims(), &[k]);
        let spec = Spectrum::of(&m);
        let n = spec.values.len();
        n < 2 || spec.values[n - 2].abs() <= tol
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::random_hermitian;
    use nalgebra::Complex;

    fn cfg() -> OracleConfig<f64> {
        OracleConfig { seed: 7, ..OracleConfig::default() }
    }

    #[test]
    fn identity_gives_unit_value() {
        let layout = SystemLayout::new(vec![2, 3]).unwrap();
        let r = closest_product_state(&HermitianOperator::identity(6), &layout, &cfg()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
        assert!((r.state.vector().norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn diagonal_picks_minimal_basis_vector() {
        let layout = SystemLayout::new(vec![2, 2, 2]).unwrap();
        let diag = [0.9, 0.4, 0.7, -0.3, 0.5, 0.2, 0.8, 0.1];
        let g = HermitianOperator::from_real_diagonal(&diag);
        let r = closest_product_state(&g, &layout, &cfg()).unwrap();
        assert!((r.value + 0.3).abs() < 1e-10);
        let v = r.state.vector();
        assert!((v[3].norm_sqr() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn bell_projector_minimum_matches_grid_search() {
        // <a⊗b|Φ+><Φ+|a⊗b> = |<a|conj(b)>|^2 / 2; maximize the negative projector
        // over a Bloch-angle grid and compare with the oracle.
        let s = 0.5f64.sqrt();
        let phi = CVector::from_vec(vec![
            Complex::new(s, 0.0),
            Complex::new(0.0, 0.0),
            Complex::new(0.0, 0.0),
            Complex::new(s, 0.0),
        ]);
        let g = HermitianOperator::projector(&phi).scaled(-1.0);
        let layout = SystemLayout::bipartite(2, 2).unwrap();
        let r = closest_product_state(&g, &layout, &cfg()).unwrap();

        let steps = 40;
        let mut grid_best = 0.0f64;
        let qubit = |t: f64, p: f64| {
            CVector::from_vec(vec![Complex::new((t / 2.0).cos(), 0.0), Complex::from_polar((t / 2.0).sin(), p)])
        };
        for it in 0..=steps {
            for ip in 0..steps {
                for jt in 0..=steps {
                    for jp in 0..steps {
                        let (t1, p1) = (
                            std::f64::consts::PI * it as f64 / steps as f64,
                            2.0 * std::f64::consts::PI * ip as f64 / steps as f64,
                        );
                        let (t2, p2) = (
                            std::f64::consts::PI * jt as f64 / steps as f64,
                            2.0 * std::f64::consts::PI * jp as f64 / steps as f64,
                        );
                        let v = qubit(t1, p1).kronecker(&qubit(t2, p2));
                        grid_best = grid_best.min(g.expectation(&v));
                    }
                }
            }
        }
        assert!((grid_best + 0.5).abs() < 1e-3);
        assert!((r.value - grid_best).abs() < 1e-3);
        assert!((r.value + 0.5).abs() < 1e-10);
    }

    #[test]
    fn running_best_is_monotone_and_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let layout = SystemLayout::new(vec![2, 2, 2]).unwrap();
        let g = random_hermitian::<f64, _>(8, &mut rng);
        let a = closest_product_state(&g, &layout, &cfg()).unwrap();
        let b = closest_product_state(&g, &layout, &cfg()).unwrap();
        assert!(a.running_best.windows(2).all(|w| w[1] <= w[0]));
        assert_eq!(a.value, b.value);
        assert_eq!(a.state, b.state);
        assert!(is_product_vector(&a.state.vector(), &layout, 1e-10));
    }
}
