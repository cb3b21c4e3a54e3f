//! Converging state sequences, their provenance, and finite-prefix
//! continuity diagnostics for relative-entropy distances.
//!
//! Limits cannot be observed on a finite prefix, so every verdict here is a
//! surrogate: agreement within `τ` on the last `k` indices, degraded to
//! "inconclusive" whenever the solver brackets are too wide to tell.
//! Everything in this module works in `f64`.

mod generators;
mod harness;
mod kraus;
mod marginal;
mod witness;

pub use generators::{
    gen_dominated, gen_lsc_gap, gen_mixture, gen_pushforward, lsc_gap_weights, unitary_path, DominatedOptions,
    DOMINATION_TOL, LSC_GAP_MAX_DIM,
};
pub use harness::{
    run_continuity_harness, Agreement, Clause, ConvergenceReport, HarnessConfig, ImplicationCheck, IndexRow,
    ModelReport, Observed, Prediction,
};
pub use kraus::KrausOperation;
pub use marginal::{marginal_reports, DirectionVerdict, MarginalReport};
pub use witness::{check_witness_condition, ConditionVerdict, WitnessReport, WitnessSequence};

use crate::error::{Error, Result};
use crate::operator::{DensityOperator, SystemLayout};

pub type State = DensityOperator<f64>;

/// Distances closer than this count as equal when checking monotonicity.
const MONOTONE_SLACK: f64 = 1e-12;

/// Family tag and the parameters a sequence was generated from.
#[derive(Clone, Debug, PartialEq)]
pub struct Provenance {
    pub family: String,
    pub parameters: Vec<(String, String)>,
}

impl Provenance {
    pub fn new(family: &str) -> Self {
        Self { family: family.to_string(), parameters: Vec::new() }
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.parameters.push((key.to_string(), value.to_string()));
        self
    }
}

/// The structural fact a generator built into its output, which the
/// harness re-checks and turns into a convergence prediction.
#[derive(Clone, Debug)]
pub enum Premise {
    None,
    /// `c ρ_n ≤ σ` for every `n ≥ 0`.
    Dominated {
        sigma: State,
        c: f64,
    },
    /// `ρ_n = p_n A_n + (1 − p_n) B_n`.
    Mixture {
        weights: Vec<f64>,
        limit_weight: f64,
        first: Box<StateSequence>,
        second: Box<StateSequence>,
    },
    /// `ρ_n = Φ_n(A_n) / c_n`, with the free sets each `Φ_n` was checked
    /// to map into their own cone.
    Pushforward {
        inner: Box<StateSequence>,
        operations: Vec<KrausOperation>,
        limit_operation: KrausOperation,
        traces: Vec<f64>,
        limit_trace: f64,
        preserved: Vec<String>,
    },
}

/// Finite prefix `ρ_1..ρ_N` of a sequence converging to `ρ_0`.
#[derive(Clone, Debug)]
pub struct StateSequence {
    prefix: Vec<State>,
    limit: State,
    provenance: Provenance,
    premise: Premise,
    burn_in: usize,
}

impl StateSequence {
    /// All states must share the limit's layout. The burn-in is the first
    /// index from which `‖ρ_n − ρ_0‖_1` never increases.
    pub fn new(prefix: Vec<State>, limit: State, provenance: Provenance) -> Result<Self> {
        Self::with_premise(prefix, limit, provenance, Premise::None)
    }

    pub(crate) fn with_premise(
        prefix: Vec<State>,
        limit: State,
        provenance: Provenance,
        premise: Premise,
    ) -> Result<Self> {
        if prefix.is_empty() {
            return Err(Error::InvalidArgument("empty sequence".into()));
        }
        if let Some(bad) = prefix.iter().find(|s| s.layout() != limit.layout()) {
            return Err(Error::LayoutMismatch { expected: limit.dim(), found: bad.dim() });
        }
        let distances: Vec<f64> = prefix.iter().map(|s| s.trace_distance(&limit)).collect();
        let mut burn_in = distances.len() - 1;
        while burn_in > 0 && distances[burn_in - 1] + MONOTONE_SLACK >= distances[burn_in] {
            burn_in -= 1;
        }
        Ok(Self { prefix, limit, provenance, premise, burn_in })
    }

    /// `ρ_n ≡ ρ`.
    pub fn constant(rho: State, len: usize) -> Result<Self> {
        Self::new(vec![rho.clone(); len], rho, Provenance::new("constant").with("n", len))
    }

    pub fn prefix(&self) -> &[State] {
        &self.prefix
    }

    pub fn limit(&self) -> &State {
        &self.limit
    }

    pub fn len(&self) -> usize {
        self.prefix.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prefix.is_empty()
    }

    pub fn layout(&self) -> &SystemLayout {
        self.limit.layout()
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn premise(&self) -> &Premise {
        &self.premise
    }

    /// 0-based index into the prefix from which distances to the limit are
    /// non-increasing.
    pub fn burn_in(&self) -> usize {
        self.burn_in
    }

    pub fn trace_distances(&self) -> Vec<f64> {
        self.prefix.iter().map(|s| s.trace_distance(&self.limit)).collect()
    }

    /// `ρ_n = ρ_0` for every `n` (entrywise within `1e-14`).
    pub fn is_constant(&self) -> bool {
        self.prefix.iter().all(|s| s.max_abs_diff(self.limit.hermitian()) <= 1e-14)
    }
}

/// Last `k` entries of a slice (all of it if shorter).
pub(crate) fn tail<T>(v: &[T], k: usize) -> &[T] {
    &v[v.len().saturating_sub(k)..]
}
