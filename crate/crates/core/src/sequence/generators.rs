//! Sequence families built to satisfy one sufficient condition each.

use nalgebra::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::kraus::KrausOperation;
use super::{Premise, Provenance, State, StateSequence};
use crate::error::{Error, Result};
use crate::free_sets::{is_ppt, sample_free_state, FreeSetModel};
use crate::operator::{partial_trace_matrix, HermitianOperator, Partition, Spectrum, SystemLayout};
use crate::random::{random_hermitian, random_unit_vector};
use crate::scalar::{CMatrix, CVector};

/// Slack in the domination eigencheck `σ − cρ_n ⪰ 0`.
pub const DOMINATION_TOL: f64 = 1e-12;

/// Largest factor dimension `gen_lsc_gap` accepts.
pub const LSC_GAP_MAX_DIM: usize = 4;

const MAX_HALVINGS: usize = 64;
const PRESERVATION_SAMPLES: usize = 32;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DominatedOptions {
    /// Trace norm of the first perturbation; `None` uses `λ_min(σ)`.
    pub delta: Option<f64>,
}

fn dominated(sigma: &State, rho: &HermitianOperator<f64>, c: f64) -> bool {
    let slack = sigma.hermitian() - &rho.scaled(c);
    slack.eigh().min() >= -DOMINATION_TOL && rho.eigh().min() >= 0.0
}

/// `ρ_n = σ + Δ_n` with random traceless `Δ_n` of trace norm at most `δ/n`,
/// halved until `σ − cρ_n ⪰ 0` holds; `ρ_0 = σ`. Norms are capped by their
/// predecessor so distances to the limit never increase.
pub fn gen_dominated(sigma: &State, c: f64, len: usize, seed: u64, opts: DominatedOptions) -> Result<StateSequence> {
    if !(c > 0.0 && c <= 1.0) {
        return Err(Error::InvalidArgument(format!("domination constant {c} outside (0, 1]")));
    }
    if len == 0 {
        return Err(Error::InvalidArgument("empty sequence".into()));
    }
    let d = sigma.dim();
    let delta = opts.delta.unwrap_or_else(|| sigma.eigh().min().max(0.0));
    if delta < 0.0 {
        return Err(Error::InvalidArgument("negative perturbation size".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cap = delta;
    let mut prefix = Vec::with_capacity(len);
    for n in 1..=len {
        let h = random_hermitian::<f64, _>(d, &mut rng);
        let shift = h.trace() / d as f64;
        let traceless = &h - &HermitianOperator::identity(d).scaled(shift);
        let norm = traceless.trace_norm();
        let mut size = (delta / n as f64).min(cap);
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let rho = if size == 0.0 || norm == 0.0 {
                sigma.hermitian().clone()
            } else {
                sigma.hermitian() + &traceless.scaled(size / norm)
            };
            if dominated(sigma, &rho, c) {
                accepted = Some(rho);
                break;
            }
            size /= 2.0;
        }
        let rho = accepted.ok_or(Error::SamplingCap(MAX_HALVINGS))?;
        cap = size;
        prefix.push(State::from_trusted(rho, sigma.layout().clone()));
    }
    let provenance = Provenance::new("dominated").with("c", c).with("delta", delta).with("n", len).with("seed", seed);
    let premise = Premise::Dominated { sigma: sigma.clone(), c };
    StateSequence::with_premise(prefix, sigma.clone(), provenance, premise)
}

/// `ρ_n = p_n A_n + (1 − p_n) B_n`, limit `p_0 A_0 + (1 − p_0) B_0`.
pub fn gen_mixture(
    first: &StateSequence,
    second: &StateSequence,
    weights: &[f64],
    limit_weight: f64,
) -> Result<StateSequence> {
    if first.len() != second.len() || weights.len() != first.len() {
        return Err(Error::InvalidArgument(format!(
            "mixture of sequences of lengths {} and {} with {} weights",
            first.len(),
            second.len(),
            weights.len()
        )));
    }
    if first.layout() != second.layout() {
        return Err(Error::LayoutMismatch { expected: first.layout().total(), found: second.layout().total() });
    }
    let prefix = first
        .prefix()
        .iter()
        .zip(second.prefix())
        .zip(weights)
        .map(|((a, b), &p)| a.mix(b, p))
        .collect::<Result<Vec<_>>>()?;
    let limit = first.limit().mix(second.limit(), limit_weight)?;
    let provenance = Provenance::new("mixture")
        .with("first", &first.provenance().family)
        .with("second", &second.provenance().family)
        .with("p0", limit_weight);
    let premise = Premise::Mixture {
        weights: weights.to_vec(),
        limit_weight,
        first: Box::new(first.clone()),
        second: Box::new(second.clone()),
    };
    StateSequence::with_premise(prefix, limit, provenance, premise)
}

/// Every Kraus image of a random extreme point of the model's set stays in
/// the set's cone. Extreme points of (π-)separable sets are product pure
/// states across a partition; their Kraus images must be products across a
/// partition of the same set. PPT images are tested directly.
pub(crate) fn preserves_free_cone(op: &KrausOperation, model: &FreeSetModel<f64>, seed: u64) -> Result<bool> {
    let layout = model.layout();
    if op.input() != layout || op.output() != layout {
        return Ok(false);
    }
    let partitions: Vec<Partition> = match model {
        FreeSetModel::FullySeparable { layout } => vec![Partition::finest(layout.parties())],
        FreeSetModel::PiSeparable { partitions, .. } => partitions.partitions().to_vec(),
        FreeSetModel::Ppt { transposed, .. } => {
            for k in 0..PRESERVATION_SAMPLES {
                let omega = sample_free_state(model, seed.wrapping_add(k as u64))?;
                let image = op.apply(omega.hermitian());
                let scale = image.trace().max(1e-300);
                let image = State::from_trusted(image.scaled(1.0 / scale), layout.clone());
                if image.trace() > 1e-12 && !is_ppt(&image, transposed, 1e-10)? {
                    return Ok(false);
                }
            }
            return Ok(true);
        }
        FreeSetModel::ConvexHull { .. } => return Ok(false),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..PRESERVATION_SAMPLES {
        let source = &partitions[rng.random_range(0..partitions.len())];
        let psi = random_block_vector(layout, source, &mut rng);
        for k in op.kraus() {
            let v = k * &psi;
            if v.norm() > 1e-9 && !partitions.iter().any(|p| is_block_product(&v, layout, p)) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn random_block_vector(layout: &SystemLayout, partition: &Partition, rng: &mut ChaCha8Rng) -> CVector<f64> {
    // Build the product in grouped order, then scatter amplitudes back.
    let dims = layout.dims();
    let blocks = partition.blocks();
    let factors: Vec<CVector<f64>> =
        blocks.iter().map(|b| random_unit_vector(b.iter().map(|&i| dims[i]).product(), rng)).collect();
    let total = layout.total();
    let mut out = CVector::zeros(total);
    for (index, amp) in out.iter_mut().enumerate() {
        let digits = digits_of(index, dims);
        let mut value = Complex::new(1.0, 0.0);
        for (b, f) in blocks.iter().zip(&factors) {
            let mut local = 0;
            for &i in b {
                local = local * dims[i] + digits[i];
            }
            value *= f[local];
        }
        *amp = value;
    }
    out
}

fn digits_of(mut index: usize, dims: &[usize]) -> Vec<usize> {
    let mut digits = vec![0; dims.len()];
    for k in (0..dims.len()).rev() {
        digits[k] = index % dims[k];
        index /= dims[k];
    }
    digits
}

/// `v` factorizes across the blocks of `partition`: each block marginal of
/// `|v><v|` is pure.
fn is_block_product(v: &CVector<f64>, layout: &SystemLayout, partition: &Partition) -> bool {
    let unit = v.unscale(v.norm());
    let m = &unit * unit.adjoint();
    partition.blocks().iter().all(|b| {
        if b.len() == layout.parties() {
            return true;
        }
        let marginal = partial_trace_matrix(&m, layout.dims(), b);
        let purity: f64 = (&marginal * &marginal).trace().re;
        (purity - 1.0).abs() <= 1e-9
    })
}

/// `ρ_n = Φ_n(A_n) / Tr Φ_n(A_n)`. Each operation must act on the
/// sequence's own layout, and must map every model in `declared` into its
/// cone; the check runs on sampled extreme points.
pub fn gen_pushforward(
    seq: &StateSequence,
    operations: Vec<KrausOperation>,
    limit_operation: KrausOperation,
    declared: &[FreeSetModel<f64>],
    seed: u64,
) -> Result<StateSequence> {
    if operations.len() != seq.len() {
        return Err(Error::InvalidArgument(format!("{} operations for {} states", operations.len(), seq.len())));
    }
    for op in operations.iter().chain(std::iter::once(&limit_operation)) {
        if op.input() != seq.layout() || op.output() != seq.layout() {
            return Err(Error::InvalidArgument("operations must map the sequence's layout to itself".into()));
        }
    }
    let mut preserved = Vec::new();
    for model in declared {
        for (k, op) in operations.iter().chain(std::iter::once(&limit_operation)).enumerate() {
            if !preserves_free_cone(op, model, seed.wrapping_add(k as u64))? {
                return Err(Error::InvalidArgument(format!("operation {k} does not preserve the {model} cone")));
            }
        }
        preserved.push(model.to_string());
    }
    let mut prefix = Vec::with_capacity(seq.len());
    let mut traces = Vec::with_capacity(seq.len());
    for (op, rho) in operations.iter().zip(seq.prefix()) {
        let (state, c) = op.normalized_image(rho)?;
        prefix.push(state);
        traces.push(c);
    }
    let (limit, limit_trace) = limit_operation.normalized_image(seq.limit())?;
    let provenance = Provenance::new("pushforward").with("inner", &seq.provenance().family).with("seed", seed);
    let premise = Premise::Pushforward {
        inner: Box::new(seq.clone()),
        operations,
        limit_operation,
        traces,
        limit_trace,
        preserved,
    };
    StateSequence::with_premise(prefix, limit, provenance, premise)
}

/// `min(1, 1 / ln d)` per entry of a dimension schedule.
pub fn lsc_gap_weights(dims: &[usize]) -> Vec<f64> {
    dims.iter().map(|&d| (1.0 / (d as f64).ln()).min(1.0)).collect()
}

fn embedded_max_entangled(d: usize, ambient: usize) -> CVector<f64> {
    let mut v = CVector::zeros(ambient * ambient);
    let amp = Complex::new(1.0 / (d as f64).sqrt(), 0.0);
    for i in 0..d {
        v[i * ambient + i] = amp;
    }
    v
}

/// `ρ_n = (1 − ε_n)|00⟩⟨00| + ε_n Φ⁺_{d_n}` on a fixed `D × D` layout,
/// `D = max d_n`, with limit `|00⟩⟨00|`.
pub fn gen_lsc_gap(dims: &[usize], weights: &[f64]) -> Result<StateSequence> {
    if dims.is_empty() || dims.len() != weights.len() {
        return Err(Error::InvalidArgument("dimension and weight schedules differ in length".into()));
    }
    if dims.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidArgument("dimension schedule must be non-decreasing".into()));
    }
    let ambient = *dims.last().expect("non-empty");
    if dims[0] < 2 || ambient > LSC_GAP_MAX_DIM {
        return Err(Error::InvalidArgument(format!("dimensions must lie in 2..={LSC_GAP_MAX_DIM}")));
    }
    if weights.iter().any(|&e| !(0.0..=1.0).contains(&e)) {
        return Err(Error::InvalidArgument("weights must lie in [0, 1]".into()));
    }
    let layout = SystemLayout::bipartite(ambient, ambient)?;
    let mut zero = CVector::zeros(ambient * ambient);
    zero[0] = Complex::new(1.0, 0.0);
    let limit = State::pure(&zero, layout.clone())?;
    let prefix = dims
        .iter()
        .zip(weights)
        .map(|(&d, &e)| {
            let phi = State::pure(&embedded_max_entangled(d, ambient), layout.clone())?;
            phi.mix(&limit, e)
        })
        .collect::<Result<Vec<_>>>()?;
    let provenance =
        Provenance::new("lsc-gap").with("dims", format!("{dims:?}")).with("weights", format!("{weights:?}"));
    StateSequence::new(prefix, limit, provenance)
}

/// Single-factor unitaries `exp(-i t H)` for a fixed Hermitian generator.
pub fn unitary_path(h: &HermitianOperator<f64>, t: f64) -> CMatrix<f64> {
    let spec = Spectrum::of(h.matrix());
    let mut scaled = spec.vectors.clone();
    for (k, &l) in spec.values.iter().enumerate() {
        let phase = Complex::from_polar(1.0, -t * l);
        for z in scaled.column_mut(k).iter_mut() {
            *z *= phase;
        }
    }
    scaled * spec.vectors.adjoint()
}
