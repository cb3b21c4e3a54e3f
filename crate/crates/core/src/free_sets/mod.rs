//! Convex sets of free states and their linear-minimization oracles.
//!
//! Extreme points of the (π-)separable sets are product pure states across
//! the blocks of a partition; minimizing a linear functional over the convex
//! hull of a union reduces to the minimum over its components. The separable
//! oracle is a heuristic (the exact problem is NP-hard); the PPT oracle comes
//! with a dual certificate and bounds the separable one from below.

mod ppt;
mod product;

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::operator::{
    normalize_indices, partial_transpose_matrix, permute_subsystems, DensityOperator, HermitianOperator, Partition,
    PartitionSet, Spectrum, SystemLayout,
};
use crate::random::{random_density_rank, random_unit_vector, simplex_weights};
use crate::scalar::Real;

pub(crate) use ppt::simplex_projection;
pub use ppt::{minimize_over_ppt, PptSolution};
pub(crate) use product::restart_seed as draw_seed;
pub use product::{closest_product_state, is_product_vector, ProductPureState, ProductSearch};

/// Settings for the linear-minimization oracles.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleConfig<R> {
    /// Random starts of the alternating product-state search.
    pub restarts: usize,
    /// Alternating sweeps per start.
    pub sweeps: usize,
    pub seed: u64,
    /// Relative improvement below which a sweep sequence stops.
    pub tolerance: R,
    /// ADMM iteration cap for the PPT oracle.
    pub ppt_iterations: usize,
    /// Primal–dual gap (relative to `||G||_F`) at which the PPT oracle stops.
    pub ppt_tolerance: R,
}

impl<R: Real> Default for OracleConfig<R> {
    fn default() -> Self {
        Self {
            restarts: 32,
            sweeps: 200,
            seed: 0,
            tolerance: R::lit(1e-12),
            ppt_iterations: 20_000,
            ppt_tolerance: R::lit(1e-9),
        }
    }
}

impl<R: Real> OracleConfig<R> {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::InvalidArgument("oracle needs at least one restart".into()));
        }
        Ok(())
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }
}

/// A convex set of free states.
#[derive(Clone, Debug, PartialEq)]
pub enum FreeSetModel<R: Real> {
    FullySeparable {
        layout: SystemLayout,
    },
    PiSeparable {
        layout: SystemLayout,
        partitions: PartitionSet,
    },
    /// States whose partial transpose on `transposed` is positive.
    Ppt {
        layout: SystemLayout,
        transposed: Vec<usize>,
    },
    ConvexHull {
        vertices: Vec<DensityOperator<R>>,
    },
}

impl<R: Real> FreeSetModel<R> {
    pub fn separable(layout: SystemLayout) -> Self {
        Self::FullySeparable { layout }
    }

    pub fn pi_separable(layout: SystemLayout, partitions: PartitionSet) -> Result<Self> {
        if partitions.parties() != layout.parties() {
            return Err(Error::InvalidModel(format!(
                "partitions over {} parties on a {}-party layout",
                partitions.parties(),
                layout.parties()
            )));
        }
        Ok(Self::PiSeparable { layout, partitions })
    }

    /// `transposed` must be a non-empty proper subset of the factors, so the
    /// model is PPT across the bipartite cut it defines.
    pub fn ppt(layout: SystemLayout, transposed: Vec<usize>) -> Result<Self> {
        let transposed =
            normalize_indices(&transposed, layout.parties()).map_err(|e| Error::InvalidModel(e.to_string()))?;
        if transposed.is_empty() || transposed.len() == layout.parties() {
            return Err(Error::InvalidModel("PPT needs a bipartite cut".into()));
        }
        Ok(Self::Ppt { layout, transposed })
    }

    pub fn hull(vertices: Vec<DensityOperator<R>>) -> Result<Self> {
        let first = vertices.first().ok_or_else(|| Error::InvalidModel("empty convex hull".into()))?;
        if vertices.iter().any(|v| v.layout() != first.layout()) {
            return Err(Error::InvalidModel("hull vertices on different layouts".into()));
        }
        Ok(Self::ConvexHull { vertices })
    }

    pub fn layout(&self) -> &SystemLayout {
        match self {
            Self::FullySeparable { layout } | Self::PiSeparable { layout, .. } | Self::Ppt { layout, .. } => layout,
            Self::ConvexHull { vertices } => vertices[0].layout(),
        }
    }

    /// Whether `I/d` belongs to the set (true for every variant but hulls).
    pub fn contains_maximally_mixed(&self) -> bool {
        !matches!(self, Self::ConvexHull { .. })
    }

    pub fn descriptor(&self) -> String {
        self.to_string()
    }
}

impl<R: Real> fmt::Display for FreeSetModel<R> {
    /// `separable`, `pi:{{1,2},{3}}|{{1},{2,3}}`, `ppt:{2}`, `hull:<n>`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::FullySeparable { .. } => f.write_str("separable"),
            Self::PiSeparable { partitions, .. } => write!(f, "pi:{partitions}"),
            Self::Ppt { transposed, .. } => {
                let items: Vec<String> = transposed.iter().map(|i| (i + 1).to_string()).collect();
                write!(f, "ppt:{{{}}}", items.join(","))
            }
            Self::ConvexHull { vertices } => write!(f, "hull:{}", vertices.len()),
        }
    }
}

/// Coarse-grained layout of a partition, with the factor order that lays
/// each block out contiguously.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupedLayout {
    pub layout: SystemLayout,
    /// Factor `k` of the reordered system is original factor `order[k]`.
    pub order: Vec<usize>,
}

impl GroupedLayout {
    fn fine_dims(&self, original: &SystemLayout) -> Vec<usize> {
        self.order.iter().map(|&o| original.dims()[o]).collect()
    }

    /// Operator on the original layout, reordered so blocks are contiguous.
    pub fn to_grouped<R: Real>(&self, m: &HermitianOperator<R>, original: &SystemLayout) -> HermitianOperator<R> {
        HermitianOperator::symmetrized(permute_subsystems(m.matrix(), original.dims(), &self.order))
    }

    /// Inverse of [`GroupedLayout::to_grouped`].
    pub fn to_original<R: Real>(&self, m: &HermitianOperator<R>, original: &SystemLayout) -> HermitianOperator<R> {
        let mut inverse = vec![0; self.order.len()];
        for (k, &o) in self.order.iter().enumerate() {
            inverse[o] = k;
        }
        HermitianOperator::symmetrized(permute_subsystems(m.matrix(), &self.fine_dims(original), &inverse))
    }
}

pub fn group_layout(layout: &SystemLayout, partition: &Partition) -> Result<GroupedLayout> {
    if partition.parties() != layout.parties() {
        return Err(Error::InvalidPartition(format!(
            "partition of {} parties on a {}-party layout",
            partition.parties(),
            layout.parties()
        )));
    }
    let dims = partition.blocks().iter().map(|b| b.iter().map(|&i| layout.dims()[i]).product()).collect();
    let order = partition.blocks().iter().flatten().copied().collect();
    Ok(GroupedLayout { layout: SystemLayout::new(dims)?, order })
}

/// Result of a linear-minimization oracle call.
#[derive(Clone, Debug)]
pub struct LmoOutcome<R: Real> {
    pub vertex: DensityOperator<R>,
    /// `Tr(G vertex)`.
    pub value: R,
    /// Lower bound on `min Tr(Gσ)` over the set; equals `value` for the
    /// exact and heuristic oracles, the dual bound for PPT.
    pub lower_bound: R,
    /// Set when the PPT subsolver hit its iteration cap; carries its gap.
    pub residual: Option<R>,
}

fn product_lmo<R: Real>(
    g: &HermitianOperator<R>,
    layout: &SystemLayout,
    partitions: &[Partition],
    cfg: &OracleConfig<R>,
) -> Result<LmoOutcome<R>> {
    let mut best: Option<LmoOutcome<R>> = None;
    for p in partitions {
        let grouped = group_layout(layout, p)?;
        let search = closest_product_state(&grouped.to_grouped(g, layout), &grouped.layout, cfg)?;
        if best.as_ref().is_some_and(|b| b.value <= search.value) {
            continue;
        }
        let vertex = grouped.to_original(search.state.density().hermitian(), layout);
        best = Some(LmoOutcome {
            vertex: DensityOperator::from_trusted(vertex, layout.clone()),
            value: search.value,
            lower_bound: search.value,
            residual: None,
        });
    }
    Ok(best.expect("partition set is non-empty"))
}

/// Extreme point (approximately) minimizing `Tr(Gσ)` over the model's set.
pub fn lmo<R: Real>(g: &HermitianOperator<R>, model: &FreeSetModel<R>, cfg: &OracleConfig<R>) -> Result<LmoOutcome<R>> {
    model.layout().check_dim(g.dim())?;
    match model {
        FreeSetModel::ConvexHull { vertices } => {
            let mut best = 0;
            let mut best_value = g.inner(vertices[0].hermitian());
            for (i, v) in vertices.iter().enumerate().skip(1) {
                let value = g.inner(v.hermitian());
                if value < best_value {
                    best = i;
                    best_value = value;
                }
            }
            Ok(LmoOutcome {
                vertex: vertices[best].clone(),
                value: best_value,
                lower_bound: best_value,
                residual: None,
            })
        }
        FreeSetModel::FullySeparable { layout } => product_lmo(g, layout, &[Partition::finest(layout.parties())], cfg),
        FreeSetModel::PiSeparable { layout, partitions } => product_lmo(g, layout, partitions.partitions(), cfg),
        FreeSetModel::Ppt { layout, transposed } => {
            let sol = minimize_over_ppt(g, layout, transposed, cfg)?;
            let residual = (!sol.converged).then(|| sol.gap());
            Ok(LmoOutcome {
                vertex: DensityOperator::from_trusted(sol.point, layout.clone()),
                value: sol.value,
                lower_bound: sol.lower_bound,
                residual,
            })
        }
    }
}

/// Partial transpose on `transposed` is positive within `tol`.
pub fn is_ppt<R: Real>(rho: &DensityOperator<R>, transposed: &[usize], tol: R) -> Result<bool> {
    let t = normalize_indices(transposed, rho.layout().parties())?;
    Ok(Spectrum::of(&partial_transpose_matrix(rho.matrix(), rho.layout().dims(), &t)).min() >= -tol)
}

const PPT_SAMPLING_CAP: usize = 10_000;

fn random_block_product<R: Real>(
    layout: &SystemLayout,
    partition: &Partition,
    rng: &mut ChaCha8Rng,
) -> Result<HermitianOperator<R>> {
    let grouped = group_layout(layout, partition)?;
    let factors = grouped.layout.dims().iter().map(|&d| random_unit_vector(d, rng)).collect();
    let state = ProductPureState::new(grouped.layout.clone(), factors)?;
    Ok(grouped.to_original(state.density().hermitian(), layout))
}

/// A random element of the model's set.
///
/// Separable variants draw a simplex-weighted mixture of `d` random product
/// pure states (each across a uniformly chosen partition for π-sets); hulls
/// draw simplex weights over the vertices; PPT rejection-samples random
/// states blended with `I/d`.
pub fn sample_free_state<R: Real>(model: &FreeSetModel<R>, seed: u64) -> Result<DensityOperator<R>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let layout = model.layout().clone();
    let mixture_of = |parts: &[Partition], rng: &mut ChaCha8Rng| -> Result<DensityOperator<R>> {
        let terms = layout.total();
        let weights: Vec<R> = simplex_weights(terms, rng);
        let mut acc = HermitianOperator::zeros(layout.total());
        for w in weights {
            let p = &parts[rng.random_range(0..parts.len())];
            acc = &acc + &random_block_product(&layout, p, rng)?.scaled(w);
        }
        Ok(DensityOperator::from_trusted(acc, layout.clone()))
    };
    match model {
        FreeSetModel::FullySeparable { layout } => mixture_of(&[Partition::finest(layout.parties())], &mut rng),
        FreeSetModel::PiSeparable { partitions, .. } => mixture_of(partitions.partitions(), &mut rng),
        FreeSetModel::ConvexHull { vertices } => {
            let w: Vec<R> = simplex_weights(vertices.len(), &mut rng);
            DensityOperator::convex_combination(vertices, &w)
        }
        FreeSetModel::Ppt { layout, transposed } => {
            let mixed = DensityOperator::maximally_mixed(layout.clone());
            for _ in 0..PPT_SAMPLING_CAP {
                let rank = rng.random_range(1..=layout.total());
                let candidate = random_density_rank::<R, _>(layout, rank, &mut rng);
                let t = R::lit(rng.random::<f64>());
                let blended = candidate.mix(&mixed, R::one() - t)?;
                if is_ppt(&blended, transposed, R::lit(1e-12))? {
                    return Ok(blended);
                }
            }
            Err(Error::SamplingCap(PPT_SAMPLING_CAP))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::random_hermitian;
    use crate::scalar::CVector;
    use nalgebra::Complex;

    fn bell_projector() -> HermitianOperator<f64> {
        let s = 0.5f64.sqrt();
        let phi = CVector::from_vec(vec![
            Complex::new(s, 0.0),
            Complex::new(0.0, 0.0),
            Complex::new(0.0, 0.0),
            Complex::new(s, 0.0),
        ]);
        HermitianOperator::projector(&phi)
    }

    fn l(d: &[usize]) -> SystemLayout {
        SystemLayout::new(d.to_vec()).unwrap()
    }

    #[test]
    fn group_layout_examples() {
        let base = l(&[2, 2, 2]);
        assert_eq!(group_layout(&base, &Partition::finest(3)).unwrap().layout.dims(), &[2, 2, 2]);
        let p = Partition::parse("{{1,2},{3}}", 3).unwrap();
        assert_eq!(group_layout(&base, &p).unwrap().layout.dims(), &[4, 2]);
        let single = Partition::parse("{{1,2}}", 2).unwrap();
        assert_eq!(group_layout(&l(&[2, 3]), &single).unwrap().layout.dims(), &[6]);
        assert!(group_layout(&l(&[2, 3]), &p).is_err());
    }

    #[test]
    fn grouping_round_trips_operators() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let base = l(&[2, 3, 2]);
        let p = Partition::parse("{{1,3},{2}}", 3).unwrap();
        let g = group_layout(&base, &p).unwrap();
        assert_eq!(g.layout.dims(), &[4, 3]);
        let h = random_hermitian::<f64, _>(12, &mut rng);
        let back = g.to_original(&g.to_grouped(&h, &base), &base);
        assert!(back.max_abs_diff(&h) < 1e-15);
    }

    #[test]
    fn hull_lmo_returns_argmin_vertex() {
        let layout = l(&[2]);
        let w1 = DensityOperator::from_trusted(HermitianOperator::from_real_diagonal(&[1.0, 0.0]), layout.clone());
        let w2 = DensityOperator::from_trusted(HermitianOperator::from_real_diagonal(&[0.0, 1.0]), layout);
        let model = FreeSetModel::hull(vec![w1.clone(), w2]).unwrap();
        let g = HermitianOperator::from_real_diagonal(&[-1.0, 2.0]);
        let out = lmo(&g, &model, &OracleConfig::default()).unwrap();
        assert_eq!(out.vertex, w1);
        assert_eq!(out.value, -1.0);
    }

    #[test]
    fn separable_lmo_delegates_to_product_search() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let layout = l(&[2, 2]);
        let g = random_hermitian::<f64, _>(4, &mut rng);
        let cfg = OracleConfig { seed: 5, ..OracleConfig::default() };
        let out = lmo(&g, &FreeSetModel::separable(layout.clone()), &cfg).unwrap();
        let direct = closest_product_state(&g, &layout, &cfg).unwrap();
        assert!((out.value - direct.value).abs() < 1e-14);
        assert!(out.vertex.max_abs_diff(direct.state.density().hermitian()) < 1e-14);
        assert!((g.inner(out.vertex.hermitian()) - out.value).abs() < 1e-12);
    }

    #[test]
    fn ppt_lmo_on_negative_bell_projector() {
        let layout = l(&[2, 2]);
        let g = bell_projector().scaled(-1.0);
        let model = FreeSetModel::ppt(layout.clone(), vec![1]).unwrap();
        let out = lmo(&g, &model, &OracleConfig::default()).unwrap();
        assert!(out.residual.is_none());
        assert!((out.value + 0.5).abs() < 1e-6);

        // Dual certificate: Z = singlet projector gives λ_min(G − Z^Γ) = −1/2.
        let s = 0.5f64.sqrt();
        let singlet = CVector::from_vec(vec![
            Complex::new(0.0, 0.0),
            Complex::new(s, 0.0),
            Complex::new(-s, 0.0),
            Complex::new(0.0, 0.0),
        ]);
        let z = HermitianOperator::projector(&singlet);
        let zt = partial_transpose_matrix(z.matrix(), &[2, 2], &[1]);
        let certificate = Spectrum::of(&(g.matrix() - zt)).min();
        assert!((certificate + 0.5).abs() < 1e-12);
        assert!(out.lower_bound <= out.value && out.lower_bound >= certificate - 1e-6);

        // Randomized search over PPT states never beats the certificate.
        for seed in 0..200 {
            let s = sample_free_state(&model, seed).unwrap();
            assert!(g.inner(s.hermitian()) >= certificate - 1e-12);
        }
    }

    #[test]
    fn pi_lmo_not_above_separable() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let layout = l(&[2, 2, 2]);
        let pis = PartitionSet::parse("{{1,2},{3}}|{{1},{2,3}}", 3).unwrap();
        let pi = FreeSetModel::pi_separable(layout.clone(), pis).unwrap();
        let sep = FreeSetModel::separable(layout);
        let cfg = OracleConfig::default();
        for _ in 0..10 {
            let g = random_hermitian::<f64, _>(8, &mut rng);
            let a = lmo(&g, &sep, &cfg).unwrap();
            let b = lmo(&g, &pi, &cfg).unwrap();
            assert!(a.value >= b.value - 1e-6);
        }
    }

    #[test]
    fn samples_are_valid_members() {
        let layout = l(&[2, 2]);
        let sep = FreeSetModel::<f64>::separable(layout.clone());
        for seed in 0..20 {
            let s = sample_free_state(&sep, seed).unwrap();
            assert!((s.trace() - 1.0).abs() < 1e-12);
            assert!(is_ppt(&s, &[1], 1e-12).unwrap());
        }
        let w = sample_free_state(&sep, 99).unwrap();
        let single = FreeSetModel::hull(vec![w.clone()]).unwrap();
        assert!(sample_free_state(&single, 1).unwrap().max_abs_diff(w.hermitian()) < 1e-15);

        // π = {finest} samples the same family as the separable model.
        let finest =
            FreeSetModel::pi_separable(layout.clone(), PartitionSet::new(vec![Partition::finest(2)]).unwrap()).unwrap();
        for seed in 0..5 {
            let a = sample_free_state(&finest, seed).unwrap();
            let b = sample_free_state(&sep, seed).unwrap();
            assert!(a.max_abs_diff(b.hermitian()) < 1e-15);
        }
    }

    #[test]
    fn model_validation_and_descriptors() {
        let layout = l(&[2, 2, 2]);
        assert!(FreeSetModel::<f64>::ppt(layout.clone(), vec![]).is_err());
        assert!(FreeSetModel::<f64>::ppt(layout.clone(), vec![0, 1, 2]).is_err());
        assert!(FreeSetModel::<f64>::hull(vec![]).is_err());
        let p = FreeSetModel::<f64>::ppt(layout.clone(), vec![2]).unwrap();
        assert_eq!(p.to_string(), "ppt:{3}");
        let pis = PartitionSet::parse("{{1,2},{3}}|{{1},{2,3}}", 3).unwrap();
        assert_eq!(FreeSetModel::<f64>::pi_separable(layout, pis).unwrap().to_string(), "pi:{{1,2},{3}}|{{1},{2,3}}");
        let bad = PartitionSet::parse("{{1},{2}}", 2).unwrap();
        assert!(FreeSetModel::<f64>::pi_separable(l(&[2, 2, 2]), bad).is_err());
    }
}
