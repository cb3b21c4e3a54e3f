//! Randomized identity suites run by `relent verify`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use relent_core::entropy::{fiden_residual, relative_entropy, relative_entropy_expansion, FidenResidual, SUPPORT_TOL};
use relent_core::random::{random_density, random_density_rank, random_unitary, simplex_weights};
use relent_core::{Density, Extended, Hermitian, Positive, SystemLayout};

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteOutcome {
    pub name: &'static str,
    pub passed: usize,
    pub total: usize,
    /// Largest deviation among finite comparisons.
    pub worst: f64,
}

impl SuiteOutcome {
    fn new(name: &'static str) -> Self {
        Self { name, passed: 0, total: 0, worst: 0.0 }
    }

    fn record(&mut self, deviation: Option<f64>, tol: f64) {
        self.total += 1;
        match deviation {
            Some(d) => {
                self.worst = self.worst.max(d);
                if d <= tol {
                    self.passed += 1;
                }
            }
            None => self.worst = f64::INFINITY,
        }
    }

    pub fn ok(&self) -> bool {
        self.passed == self.total
    }
}

/// Finite values compare by absolute difference, `+∞` only matches `+∞`.
fn deviation(a: Extended<f64>, b: Extended<f64>) -> Option<f64> {
    match (a, b) {
        (Extended::Finite(x), Extended::Finite(y)) => Some((x - y).abs()),
        (Extended::Infinite, Extended::Infinite) => Some(0.0),
        _ => None,
    }
}

fn layout(k: usize) -> SystemLayout {
    if k.is_multiple_of(2) {
        SystemLayout::bipartite(2, 2).expect("valid dims")
    } else {
        SystemLayout::bipartite(2, 3).expect("valid dims")
    }
}

/// Every fifth reference state is rank-deficient so the `+∞` branch is hit.
fn reference(layout: &SystemLayout, k: usize, rng: &mut ChaCha8Rng) -> Density {
    if k % 5 == 4 {
        random_density_rank(layout, 1 + k % 2, rng)
    } else {
        random_density(layout, rng)
    }
}

/// `Σ p_i U_i ρ U_i†`, a random mixed-unitary channel.
fn mixed_unitary(
    rho: &Density,
    rng: &mut ChaCha8Rng,
) -> (Density, Vec<nalgebra::DMatrix<nalgebra::Complex<f64>>>, Vec<f64>) {
    let d = rho.dim();
    let us: Vec<_> = (0..3).map(|_| random_unitary::<f64, _>(d, rng)).collect();
    let p: Vec<f64> = simplex_weights(3, rng);
    (apply_mixed(rho, &us, &p), us, p)
}

fn apply_mixed(rho: &Density, us: &[nalgebra::DMatrix<nalgebra::Complex<f64>>], p: &[f64]) -> Density {
    let d = rho.dim();
    let mut acc = nalgebra::DMatrix::zeros(d, d);
    for (u, &w) in us.iter().zip(p) {
        acc += (u * rho.matrix() * u.adjoint()) * nalgebra::Complex::new(w, 0.0);
    }
    let h = Hermitian::new(acc).expect("conjugation keeps Hermiticity");
    Density::normalized(Positive::new(h).expect("image of a state is positive"), rho.layout().clone())
        .expect("unit trace")
}

pub fn run_suites(count: usize, seed: u64) -> Vec<SuiteOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fiden = SuiteOutcome::new("product-identity");
    let mut expansion = SuiteOutcome::new("expansion");
    let mut scaling = SuiteOutcome::new("scaling");
    let mut processing = SuiteOutcome::new("data-processing");
    let tol = SUPPORT_TOL;

    for k in 0..count {
        let l = layout(k);
        let rho = random_density(&l, &mut rng);
        let sigma = reference(&l, k, &mut rng);

        let a = SystemLayout::single(l.dims()[0]).expect("valid dims");
        let b = SystemLayout::single(l.dims()[1]).expect("valid dims");
        let (wa, wb) = (reference(&a, k, &mut rng), random_density(&b, &mut rng));
        fiden.record(
            match fiden_residual(&rho, &wa, &wb, tol) {
                Ok(FidenResidual::Finite(r)) => Some(r),
                Ok(FidenResidual::BothInfinite) => Some(0.0),
                _ => None,
            },
            1e-8,
        );

        let d = relative_entropy(rho.positive(), sigma.positive(), tol);
        expansion.record(deviation(d, relative_entropy_expansion(rho.positive(), sigma.positive(), tol)), 1e-8);

        for c in [0.1, 1.0, 7.0] {
            let (cr, cs) = (rho.positive().scaled(c).expect("c > 0"), sigma.positive().scaled(c).expect("c > 0"));
            scaling.record(deviation(relative_entropy(&cr, &cs, tol), d.map(|x| c * x)), 1e-9);
        }
        let c: f64 = rng.random_range(0.2..5.0);
        let cs = sigma.positive().scaled(c).expect("c > 0");
        scaling.record(deviation(relative_entropy(rho.positive(), &cs, tol), d.map(|x| x - c.ln() + (c - 1.0))), 1e-9);

        // monotone under partial traces and a random mixed-unitary channel
        for keep in [[0usize], [1]] {
            let (ra, sa) = (rho.marginal(&keep).expect("bipartite"), sigma.marginal(&keep).expect("bipartite"));
            let reduced = relative_entropy(ra.positive(), sa.positive(), tol);
            processing.record(Some(if reduced <= d + Extended::Finite(1e-10) { 0.0 } else { 1.0 }), 0.0);
        }
        let (r2, us, p) = mixed_unitary(&rho, &mut rng);
        let s2 = apply_mixed(&sigma, &us, &p);
        let mapped = relative_entropy(r2.positive(), s2.positive(), tol);
        processing.record(Some(if mapped <= d + Extended::Finite(1e-10) { 0.0 } else { 1.0 }), 0.0);
    }
    vec![fiden, expansion, scaling, processing]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suites_pass_on_a_small_batch() {
        for s in run_suites(20, 3) {
            assert!(s.ok(), "{s:?}");
            assert!(s.total >= 20);
        }
    }
}
