//! Measures free distances along a sequence and compares what the sequence's
//! premises predict with what the finite prefix shows.

use std::fmt;

use rayon::prelude::*;

use super::{tail, Premise, State, StateSequence};
use crate::entropy::{mutual_information, relative_entropy, Extended, SUPPORT_TOL};
use crate::error::{Error, Result};
use crate::free_sets::FreeSetModel;
use crate::operator::HermitianOperator;
use crate::solver::{free_distance, SolverConfig};

#[derive(Clone, Debug, PartialEq)]
pub struct HarnessConfig {
    /// Agreement tolerance in nats.
    pub tau: f64,
    /// Number of trailing indices the verdicts look at.
    pub tail: usize,
    pub solver: SolverConfig<f64>,
}

impl Default for HarnessConfig {
    fn default() -> Self {
        Self { tau: 5e-3, tail: 3, solver: SolverConfig::default() }
    }
}

/// One solved index; `n = 0` is the limit.
#[derive(Clone, Debug, PartialEq)]
pub struct IndexRow {
    pub n: usize,
    pub trace_distance: f64,
    pub lower: Extended<f64>,
    pub upper: Extended<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// The PPT oracle stopped short and the bracket is partial.
    pub oracle_failure: bool,
    pub mutual_information: Option<f64>,
}

impl IndexRow {
    pub fn gap(&self) -> f64 {
        match (self.lower, self.upper) {
            (Extended::Finite(l), Extended::Finite(u)) => u - l,
            (Extended::Infinite, Extended::Infinite) => 0.0,
            _ => f64::INFINITY,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Observed {
    Yes,
    No,
    Inconclusive,
}

impl fmt::Display for Observed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Observed::Yes => "yes",
            Observed::No => "no",
            Observed::Inconclusive => "inconclusive",
        })
    }
}

/// Sufficient conditions the harness knows how to recognize.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Clause {
    Constant,
    /// `cρ_n ≤ σ` with `D_F(σ)` finite.
    Dominated,
    /// Mixture of two sequences that are each predicted to converge.
    Mixture,
    /// Normalized image of a predicted sequence under cone-preserving operations.
    Pushforward,
    /// Mutual information of `ρ_n` settles at that of `ρ_0`.
    TotalCorrelation,
    /// Prediction inherited from the fully separable set, which is contained in this one.
    Nesting,
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Clause::Constant => "constant",
            Clause::Dominated => "dominated",
            Clause::Mixture => "mixture",
            Clause::Pushforward => "pushforward",
            Clause::TotalCorrelation => "total-correlation",
            Clause::Nesting => "nesting",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Prediction {
    Converges(Vec<Clause>),
    NoPrediction,
}

impl Prediction {
    pub fn converges(&self) -> bool {
        matches!(self, Prediction::Converges(_))
    }
}

impl fmt::Display for Prediction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Prediction::Converges(_) => f.write_str("converges"),
            Prediction::NoPrediction => f.write_str("no-prediction"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Agreement {
    /// Predicted to converge and observed to.
    Agree,
    /// Predicted to converge, brackets too wide to tell.
    Undetermined,
    /// Nothing predicted; any observation is consistent.
    Consistent,
    /// Predicted to converge with tight brackets, observed not to.
    Contradiction,
}

impl fmt::Display for Agreement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Agreement::Agree => "agree",
            Agreement::Undetermined => "undetermined",
            Agreement::Consistent => "consistent",
            Agreement::Contradiction => "contradiction",
        })
    }
}

#[derive(Clone, Debug)]
pub struct ModelReport {
    pub descriptor: String,
    pub rows: Vec<IndexRow>,
    pub limit: IndexRow,
    pub observed: Observed,
    pub predicted: Prediction,
    pub agreement: Agreement,
    /// `min_{tail} lower_n − upper_0`.
    pub separation: f64,
    /// `upper_0 ≤ min_{tail} upper_n + τ`.
    pub lower_semicontinuity: bool,
}

/// Whether a "yes" for the fully separable set came with a "yes" for a
/// π-separable set on the same sequence.
#[derive(Clone, Debug, PartialEq)]
pub struct ImplicationCheck {
    pub coarse: String,
    pub separable: Observed,
    pub coarse_observed: Observed,
    pub holds: bool,
}

#[derive(Clone, Debug)]
pub struct ConvergenceReport {
    pub family: String,
    pub burn_in: usize,
    pub tau: f64,
    pub tail: usize,
    pub mutual_information: Vec<Option<f64>>,
    pub mutual_information_limit: Option<f64>,
    pub models: Vec<ModelReport>,
    pub implications: Vec<ImplicationCheck>,
    pub nesting_violations: Vec<String>,
}

impl ConvergenceReport {
    pub fn model(&self, descriptor: &str) -> Option<&ModelReport> {
        self.models.iter().find(|m| m.descriptor == descriptor)
    }
}

fn mi(rho: &State) -> Option<f64> {
    if rho.layout().parties() < 2 {
        return None;
    }
    mutual_information(rho).ok().and_then(|m| m.value.finite())
}

fn mi_settles(seq: &StateSequence, tau: f64, k: usize) -> bool {
    let Some(limit) = mi(seq.limit()) else { return false };
    let values: Vec<Option<f64>> = seq.prefix().iter().map(mi).collect();
    tail(&values, k).iter().all(|v| v.is_some_and(|x| (x - limit).abs() <= tau))
}

/// `D_F(σ) < ∞`: automatic when `I/d` is free, otherwise decided by the
/// support of the hull's barycenter.
fn finite_distance(sigma: &State, model: &FreeSetModel<f64>) -> bool {
    match model {
        FreeSetModel::ConvexHull { vertices } => {
            let w = vec![1.0 / vertices.len() as f64; vertices.len()];
            State::convex_combination(vertices, &w)
                .map(|b| relative_entropy(sigma.positive(), b.positive(), SUPPORT_TOL).is_finite())
                .unwrap_or(false)
        }
        _ => true,
    }
}

fn clauses(seq: &StateSequence, model: &FreeSetModel<f64>, tau: f64, k: usize) -> Vec<Clause> {
    let mut fired = Vec::new();
    if seq.is_constant() {
        fired.push(Clause::Constant);
    }
    match seq.premise() {
        Premise::None => {}
        Premise::Dominated { sigma, .. } => {
            if finite_distance(sigma, model) {
                fired.push(Clause::Dominated);
            }
        }
        Premise::Mixture { first, second, .. } => {
            if !clauses(first, model, tau, k).is_empty() && !clauses(second, model, tau, k).is_empty() {
                fired.push(Clause::Mixture);
            }
        }
        Premise::Pushforward { inner, preserved, .. } => {
            if preserved.contains(&model.to_string()) && !clauses(inner, model, tau, k).is_empty() {
                fired.push(Clause::Pushforward);
            }
        }
    }
    let parties = model.layout().parties();
    let correlation_applies = match model {
        FreeSetModel::FullySeparable { .. } | FreeSetModel::PiSeparable { .. } => parties >= 2,
        FreeSetModel::Ppt { .. } => parties == 2,
        FreeSetModel::ConvexHull { .. } => false,
    };
    if correlation_applies && mi_settles(seq, tau, k) {
        fired.push(Clause::TotalCorrelation);
    }
    let contains_separable = match model {
        FreeSetModel::PiSeparable { .. } => true,
        FreeSetModel::Ppt { .. } => parties == 2,
        _ => false,
    };
    if contains_separable && !clauses(seq, &FreeSetModel::separable(model.layout().clone()), tau, k).is_empty() {
        fired.push(Clause::Nesting);
    }
    fired.sort();
    fired.dedup();
    fired
}

fn predict(seq: &StateSequence, model: &FreeSetModel<f64>, tau: f64, k: usize) -> Prediction {
    let fired = clauses(seq, model, tau, k);
    if fired.is_empty() {
        Prediction::NoPrediction
    } else {
        Prediction::Converges(fired)
    }
}

fn close(a: &HermitianOperator<f64>, b: &HermitianOperator<f64>, tol: f64) -> bool {
    a.max_abs_diff(b) <= tol
}

/// Re-checks, independently of the generator, the facts a premise asserts.
pub(crate) fn revalidate(seq: &StateSequence) -> Result<()> {
    let all = || seq.prefix().iter().chain(std::iter::once(seq.limit()));
    for rho in all() {
        if (rho.trace() - 1.0).abs() > 1e-10 || rho.eigh().min() < -1e-10 {
            return Err(Error::InvalidArgument(format!("{} sequence holds a non-state", seq.provenance().family)));
        }
    }
    match seq.premise() {
        Premise::None => Ok(()),
        Premise::Dominated { sigma, c } => {
            for rho in all() {
                let slack = sigma.hermitian() - &rho.hermitian().scaled(*c);
                let m = slack.eigh().min();
                if m < -super::generators::DOMINATION_TOL {
                    return Err(Error::InvalidArgument(format!("domination violated by {m:.3e}")));
                }
            }
            Ok(())
        }
        Premise::Mixture { weights, limit_weight, first, second } => {
            revalidate(first)?;
            revalidate(second)?;
            let ps = weights.iter().chain(std::iter::once(limit_weight));
            let a = first.prefix().iter().chain(std::iter::once(first.limit()));
            let b = second.prefix().iter().chain(std::iter::once(second.limit()));
            for (((rho, a), b), &p) in all().zip(a).zip(b).zip(ps) {
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::InvalidArgument(format!("mixing weight {p} outside [0, 1]")));
                }
                let expected = &a.hermitian().scaled(p) + &b.hermitian().scaled(1.0 - p);
                if !close(rho.hermitian(), &expected, 1e-12) {
                    return Err(Error::InvalidArgument("mixture does not match its components".into()));
                }
            }
            Ok(())
        }
        Premise::Pushforward { inner, operations, limit_operation, traces, limit_trace, .. } => {
            revalidate(inner)?;
            let ops = operations.iter().chain(std::iter::once(limit_operation));
            let cs = traces.iter().chain(std::iter::once(limit_trace));
            let src = inner.prefix().iter().chain(std::iter::once(inner.limit()));
            for (((rho, op), &c), a) in all().zip(ops).zip(cs).zip(src) {
                if op.completeness_excess() > super::kraus::KRAUS_TOL {
                    return Err(Error::InvalidArgument("operation increases trace".into()));
                }
                let image = op.apply(a.hermitian());
                if c < 1e-12 || (image.trace() - c).abs() > 1e-12 {
                    return Err(Error::DegenerateOperation(c));
                }
                if !close(rho.hermitian(), &image.scaled(1.0 / c), 1e-12) {
                    return Err(Error::InvalidArgument("pushforward does not match its operation".into()));
                }
            }
            Ok(())
        }
    }
}

fn observe(rows: &[IndexRow], limit: &IndexRow, tau: f64, k: usize) -> (Observed, f64) {
    let window = tail(rows, k);
    let separation = window.iter().map(|r| r.lower.to_f64()).fold(f64::INFINITY, f64::min) - limit.upper.to_f64();
    let Some(v0) = limit.upper.finite() else { return (Observed::Inconclusive, separation) };
    let wide = |r: &IndexRow| r.oracle_failure || !r.upper.is_finite() || r.gap() > tau / 2.0;
    if wide(limit) || window.iter().any(wide) {
        return (Observed::Inconclusive, separation);
    }
    // Every suffix of the tail agreeing is the same as the whole tail agreeing.
    if window.iter().all(|r| (r.upper.to_f64() - v0).abs() <= tau) {
        (Observed::Yes, separation)
    } else {
        (Observed::No, separation)
    }
}

fn solve(rho: &State, n: usize, distance: f64, model: &FreeSetModel<f64>, cfg: &SolverConfig<f64>) -> Result<IndexRow> {
    let mutual_information = mi(rho);
    match free_distance(rho, model, cfg) {
        Ok(r) => Ok(IndexRow {
            n,
            trace_distance: distance,
            lower: r.lower,
            upper: r.upper,
            iterations: r.iterations,
            converged: r.converged,
            oracle_failure: false,
            mutual_information,
        }),
        Err(Error::OracleFailure { lower, upper, .. }) => Ok(IndexRow {
            n,
            trace_distance: distance,
            lower: Extended::Finite(lower),
            upper: Extended::Finite(upper),
            iterations: cfg.max_iterations,
            converged: false,
            oracle_failure: true,
            mutual_information,
        }),
        Err(e) => Err(e),
    }
}

/// Solves every index of `seq` for every model, then renders verdicts.
///
/// "Observed yes" means the tail upper bounds lie within `τ` of the limit's;
/// "no" means some tail value is further than `τ` while every bracket on the
/// tail and at the limit is narrower than `τ/2`; anything else is
/// "inconclusive". Separable lower bounds on bipartite layouts are raised to
/// the certified PPT floor when a PPT model is part of the run.
pub fn run_continuity_harness(
    seq: &StateSequence,
    models: &[FreeSetModel<f64>],
    cfg: &HarnessConfig,
) -> Result<ConvergenceReport> {
    if cfg.tau <= 0.0 || cfg.tail == 0 {
        return Err(Error::InvalidArgument("harness needs τ > 0 and a non-empty tail".into()));
    }
    if let Some(m) = models.iter().find(|m| m.layout() != seq.layout()) {
        return Err(Error::LayoutMismatch { expected: seq.layout().total(), found: m.layout().total() });
    }
    revalidate(seq)?;

    let distances = seq.trace_distances();
    let states: Vec<(usize, &State, f64)> = std::iter::once((0, seq.limit(), 0.0))
        .chain(seq.prefix().iter().enumerate().map(|(i, s)| (i + 1, s, distances[i])))
        .collect();
    // repeated states are solved once
    let first: Vec<usize> = (0..states.len())
        .map(|i| (0..i).find(|&j| states[j].1.hermitian() == states[i].1.hermitian()).unwrap_or(i))
        .collect();
    let jobs: Vec<(usize, usize)> =
        (0..models.len()).flat_map(|m| (0..states.len()).filter(|&i| first[i] == i).map(move |i| (m, i))).collect();
    let distinct: Vec<IndexRow> = jobs
        .par_iter()
        .map(|&(m, i)| {
            let (n, rho, d) = states[i];
            solve(rho, n, d, &models[m], &cfg.solver)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut solved = Vec::with_capacity(models.len() * states.len());
    for m in 0..models.len() {
        for (i, &(n, _, d)) in states.iter().enumerate() {
            let k = jobs.iter().position(|&job| job == (m, first[i])).expect("job for every distinct state");
            solved.push(IndexRow { n, trace_distance: d, ..distinct[k].clone() });
        }
    }
    let mut tables: Vec<Vec<IndexRow>> = solved.chunks(states.len()).map(|c| c.to_vec()).collect();

    if seq.layout().parties() == 2 {
        let floor = models.iter().position(|m| matches!(m, FreeSetModel::Ppt { .. })).map(|p| tables[p].clone());
        if let Some(floor) = floor {
            for (m, table) in models.iter().zip(tables.iter_mut()) {
                if matches!(m, FreeSetModel::FullySeparable { .. }) {
                    for (row, f) in table.iter_mut().zip(&floor) {
                        if let (Extended::Finite(l), Extended::Finite(fl)) = (row.lower, f.lower) {
                            row.lower = Extended::Finite(l.max(fl).min(row.upper.to_f64()));
                        }
                    }
                }
            }
        }
    }

    let mut reports = Vec::with_capacity(models.len());
    for (model, mut table) in models.iter().zip(tables) {
        let limit = table.remove(0);
        let (observed, separation) = observe(&table, &limit, cfg.tau, cfg.tail);
        let predicted = predict(seq, model, cfg.tau, cfg.tail);
        let agreement = match (&predicted, observed) {
            (Prediction::NoPrediction, _) => Agreement::Consistent,
            (_, Observed::Yes) => Agreement::Agree,
            (_, Observed::Inconclusive) => Agreement::Undetermined,
            (_, Observed::No) => Agreement::Contradiction,
        };
        let tail_min = tail(&table, cfg.tail).iter().map(|r| r.upper.to_f64()).fold(f64::INFINITY, f64::min);
        let lower_semicontinuity = limit.upper.to_f64() <= tail_min + cfg.tau;
        reports.push(ModelReport {
            descriptor: model.to_string(),
            rows: table,
            limit,
            observed,
            predicted,
            agreement,
            separation,
            lower_semicontinuity,
        });
    }

    let mut implications = Vec::new();
    let mut nesting_violations = Vec::new();
    for (sep_model, sep) in models.iter().zip(&reports) {
        if !matches!(sep_model, FreeSetModel::FullySeparable { .. }) {
            continue;
        }
        for (other_model, other) in models.iter().zip(&reports) {
            let nested = match other_model {
                FreeSetModel::PiSeparable { .. } => true,
                FreeSetModel::Ppt { .. } => seq.layout().parties() == 2,
                _ => false,
            };
            if !nested {
                continue;
            }
            if matches!(other_model, FreeSetModel::PiSeparable { .. }) && sep.observed == Observed::Yes {
                implications.push(ImplicationCheck {
                    coarse: other.descriptor.clone(),
                    separable: sep.observed,
                    coarse_observed: other.observed,
                    holds: other.observed == Observed::Yes,
                });
            }
            let rows = std::iter::once((&sep.limit, &other.limit)).chain(sep.rows.iter().zip(&other.rows));
            for (a, b) in rows {
                let slack = a.gap() + b.gap() + 1e-9;
                if b.upper.to_f64() > a.upper.to_f64() + slack {
                    nesting_violations.push(format!(
                        "n={}: {} value {} exceeds separable value {}",
                        a.n, other.descriptor, b.upper, a.upper
                    ));
                }
            }
        }
    }

    Ok(ConvergenceReport {
        family: seq.provenance().family.clone(),
        burn_in: seq.burn_in(),
        tau: cfg.tau,
        tail: cfg.tail,
        mutual_information: seq.prefix().iter().map(mi).collect(),
        mutual_information_limit: mi(seq.limit()),
        models: reports,
        implications,
        nesting_violations,
    })
}
