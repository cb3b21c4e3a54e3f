//! Linear minimization over states with positive partial transpose.
//!
//! Solves `min Tr(Gσ)` subject to `σ ⪰ 0`, `Tr σ = 1`, `σ^Γ ⪰ 0` by ADMM on the
//! splitting `Y = σ^Γ`, with residual-balanced penalty. Every check computes
//! a feasible primal point (the iterate mixed with `I/d` until its partial
//! transpose is positive) and a dual bound `λ_min(G − Z^Γ)` from the
//! projected multiplier `Z ⪰ 0`; their difference is the reported gap.

use super::OracleConfig;
use crate::error::Result;
use crate::operator::{partial_transpose_matrix, HermitianOperator, Spectrum, SystemLayout};
use crate::scalar::{CMatrix, Real};

#[derive(Clone, Debug)]
pub struct PptSolution<R: Real> {
    /// Feasible PPT state attaining `value`.
    pub point: HermitianOperator<R>,
    pub value: R,
    /// Certified lower bound on the minimum.
    pub lower_bound: R,
    pub converged: bool,
    pub iterations: usize,
}

impl<R: Real> PptSolution<R> {
    pub fn gap(&self) -> R {
        self.value - self.lower_bound
    }
}

pub(crate) fn project_psd<R: Real>(m: &CMatrix<R>) -> HermitianOperator<R> {
    Spectrum::of(m).apply(|l| l.max(R::zero()))
}

/// Euclidean projection of a real vector onto the probability simplex.
pub(crate) fn simplex_projection<R: Real>(v: &[R]) -> Vec<R> {
    let mut u: Vec<R> = v.to_vec();
    u.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    let mut cumsum = R::zero();
    let mut theta = R::zero();
    for (j, &x) in u.iter().enumerate() {
        cumsum += x;
        let t = (cumsum - R::one()) / R::from_usize_lossy(j + 1);
        if x - t > R::zero() {
            theta = t;
        }
    }
    v.iter().map(|&x| (x - theta).max(R::zero())).collect()
}

/// Projection onto `{X ⪰ 0, Tr X = 1}` in the Hilbert–Schmidt norm.
pub(crate) fn project_spectraplex<R: Real>(m: &CMatrix<R>) -> HermitianOperator<R> {
    let spec = Spectrum::of(m);
    let projected = simplex_projection(spec.values.as_slice());
    spec.with_values(|k| projected[k])
}

struct Certificate<R: Real> {
    point: HermitianOperator<R>,
    upper: R,
    lower: R,
}

fn certify<R: Real>(
    g: &HermitianOperator<R>,
    x: &HermitianOperator<R>,
    dual: &CMatrix<R>,
    dims: &[usize],
    transposed: &[usize],
) -> Certificate<R> {
    let d = x.dim();
    let inv_d = R::one() / R::from_usize_lossy(d);
    let min_pt = Spectrum::of(&partial_transpose_matrix(x.matrix(), dims, transposed)).min();
    let point = if min_pt >= R::zero() {
        x.clone()
    } else {
        // (1-t) min_pt + t/d >= 0, with a hair of slack for round-off
        let t = ((-min_pt) / (-min_pt + inv_d) * R::lit(1.0 + 1e-12)).min(R::one());
        &x.scaled(R::one() - t) + &HermitianOperator::identity(d).scaled(t * inv_d)
    };
    let upper = g.inner(&point);
    let z = project_psd(dual);
    let shifted = g.matrix() - partial_transpose_matrix(z.matrix(), dims, transposed);
    let lower = Spectrum::of(&HermitianOperator::symmetrized(shifted).into_matrix()).min();
    Certificate { point, upper, lower }
}

pub fn minimize_over_ppt<R: Real>(
    g: &HermitianOperator<R>,
    layout: &SystemLayout,
    transposed: &[usize],
    cfg: &OracleConfig<R>,
) -> Result<PptSolution<R>> {
    layout.check_dim(g.dim())?;
    let dims = layout.dims();
    let d = g.dim();
    let scale = g.matrix().norm().max(R::lit(1e-300));
    let gs = g.scaled(R::one() / scale);
    let pt = |m: &CMatrix<R>| partial_transpose_matrix(m, dims, transposed);

    let mut x = HermitianOperator::identity(d).scaled(R::one() / R::from_usize_lossy(d));
    let mut y = pt(x.matrix());
    let mut u = CMatrix::<R>::zeros(d, d);
    let mut penalty = R::one();

    let mut best = certify(&gs, &x, &CMatrix::zeros(d, d), dims, transposed);
    let mut best_lower = best.lower;
    let mut iterations = 0;
    let tol = cfg.ppt_tolerance;
    let check_every = 10;

    for it in 1..=cfg.ppt_iterations {
        iterations = it;
        let target = pt(&(&y - &u)) - gs.matrix() * crate::scalar::c(R::one() / penalty);
        x = project_spectraplex(&target);
        let xt = pt(x.matrix());
        let y_prev = y;
        y = project_psd(&(&xt + &u)).into_matrix();
        u += &xt - &y;

        if it % check_every == 0 {
            let dual = &u * crate::scalar::c(-penalty);
            let cert = certify(&gs, &x, &dual, dims, transposed);
            if cert.lower > best_lower {
                best_lower = cert.lower;
            }
            if cert.upper < best.upper {
                best = cert;
            }
            if best.upper - best_lower <= tol {
                break;
            }
            let primal = (&xt - &y).norm();
            let dual_res = (&y - &y_prev).norm() * penalty;
            let two = R::lit(2.0);
            if primal > R::lit(10.0) * dual_res {
                penalty *= two;
                u /= crate::scalar::c(two);
            } else if dual_res > R::lit(10.0) * primal {
                penalty /= two;
                u *= crate::scalar::c(two);
            }
        }
    }
    let converged = best.upper - best_lower <= tol;
    Ok(PptSolution {
        point: best.point,
        value: best.upper * scale,
        lower_bound: best_lower * scale,
        converged,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::random_hermitian;
    use crate::scalar::CVector;
    use nalgebra::Complex;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn simplex_projection_examples() {
        assert_eq!(simplex_projection(&[0.2f64, 0.8]), vec![0.2, 0.8]);
        let p = simplex_projection(&[2.0f64, 0.0]);
        assert!((p[0] - 1.0).abs() < 1e-15 && p[1] == 0.0);
        let p = simplex_projection(&[0.5f64, 0.5, 0.5]);
        assert!(p.iter().all(|&x| (x - 1.0 / 3.0).abs() < 1e-15));
    }

    #[test]
    fn negative_bell_projector_over_ppt() {
        let s = 0.5f64.sqrt();
        let phi = CVector::from_vec(vec![
            Complex::new(s, 0.0),
            Complex::new(0.0, 0.0),
            Complex::new(0.0, 0.0),
            Complex::new(s, 0.0),
        ]);
        let g = HermitianOperator::projector(&phi).scaled(-1.0);
        let layout = SystemLayout::bipartite(2, 2).unwrap();
        let sol = minimize_over_ppt(&g, &layout, &[1], &OracleConfig::default()).unwrap();
        assert!(sol.converged);
        assert!((sol.value + 0.5).abs() < 1e-6, "{}", sol.value);
        assert!(sol.lower_bound <= sol.value + 1e-12);
        assert!((sol.lower_bound + 0.5).abs() < 1e-6);
        let pt = partial_transpose_matrix(sol.point.matrix(), &[2, 2], &[1]);
        assert!(Spectrum::of(&pt).min() >= -1e-12);
        assert!(sol.point.eigh().min() >= -1e-12);
        assert!((sol.point.trace() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bounds_bracket_random_objectives() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let layout = SystemLayout::bipartite(2, 3).unwrap();
        for _ in 0..5 {
            let g = random_hermitian::<f64, _>(6, &mut rng);
            let sol = minimize_over_ppt(&g, &layout, &[1], &OracleConfig::default()).unwrap();
            assert!(sol.converged, "gap {}", sol.gap());
            assert!(sol.lower_bound <= sol.value + 1e-12);
            assert!(sol.value >= g.eigh().min() - 1e-9);
        }
    }
}
