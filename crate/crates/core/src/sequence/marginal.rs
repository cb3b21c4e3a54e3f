//! Convergence of the distance to separability for a block of factors, its
//! complement, and the whole system, tied together by `I(B:B̄)`.

use super::harness::{run_continuity_harness, ConvergenceReport, HarnessConfig, Observed};
use super::{tail, Provenance, State, StateSequence};
use crate::entropy::mutual_information;
use crate::error::{Error, Result};
use crate::free_sets::FreeSetModel;
use crate::operator::{normalize_indices, permute_subsystems, HermitianOperator, SystemLayout};

/// A predicted/observed pair for one direction of the marginal statement.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DirectionVerdict {
    pub predicted: bool,
    pub observed: Observed,
}

impl DirectionVerdict {
    /// A prediction is only contradicted by an observed "no".
    pub fn consistent(&self) -> bool {
        !self.predicted || self.observed != Observed::No
    }
}

#[derive(Clone, Debug)]
pub struct MarginalReport {
    pub block: Vec<usize>,
    pub complement: Vec<usize>,
    pub block_report: ConvergenceReport,
    pub complement_report: ConvergenceReport,
    pub joint_report: ConvergenceReport,
    /// `I(B:B̄)` along the prefix.
    pub mutual_information: Vec<f64>,
    pub mutual_information_limit: f64,
    /// Joint convergence ⇒ convergence on both blocks.
    pub forward: DirectionVerdict,
    /// Both blocks converge and `I(B:B̄)` settles ⇒ joint convergence.
    pub backward: DirectionVerdict,
}

fn marginal_sequence(seq: &StateSequence, keep: &[usize]) -> Result<StateSequence> {
    let prefix = seq.prefix().iter().map(|s| s.marginal(keep)).collect::<Result<Vec<_>>>()?;
    let provenance =
        Provenance::new(&format!("{}-marginal", seq.provenance().family)).with("keep", format!("{keep:?}"));
    StateSequence::new(prefix, seq.limit().marginal(keep)?, provenance)
}

/// `I(B:B̄)` after regrouping the factors into the two blocks.
fn cut_information(rho: &State, block: &[usize], complement: &[usize]) -> Result<f64> {
    let layout = rho.layout();
    let order: Vec<usize> = block.iter().chain(complement).copied().collect();
    let m = permute_subsystems(rho.matrix(), layout.dims(), &order);
    let d_b = block.iter().map(|&i| layout.dims()[i]).product();
    let d_c = complement.iter().map(|&i| layout.dims()[i]).product();
    let grouped = State::from_matrix(HermitianOperator::new(m)?.into_matrix(), SystemLayout::bipartite(d_b, d_c)?)?;
    Ok(mutual_information(&grouped)?.via_entropies)
}

fn combined(a: Observed, b: Observed) -> Observed {
    match (a, b) {
        (Observed::Yes, Observed::Yes) => Observed::Yes,
        (Observed::No, _) | (_, Observed::No) => Observed::No,
        _ => Observed::Inconclusive,
    }
}

fn separable_observed(report: &ConvergenceReport) -> Observed {
    report.models[0].observed
}

/// Distances to the fully separable states of `B`, of its complement, and
/// of the whole system along `seq`, with verdicts for both directions.
pub fn marginal_reports(seq: &StateSequence, block: &[usize], cfg: &HarnessConfig) -> Result<MarginalReport> {
    let parties = seq.layout().parties();
    let block = normalize_indices(block, parties)?;
    if block.is_empty() || block.len() == parties {
        return Err(Error::InvalidArgument("block must be a non-empty proper subset of the factors".into()));
    }
    let complement: Vec<usize> = (0..parties).filter(|i| !block.contains(i)).collect();

    let on = |s: &StateSequence| run_continuity_harness(s, &[FreeSetModel::separable(s.layout().clone())], cfg);
    let block_seq = marginal_sequence(seq, &block)?;
    let complement_seq = marginal_sequence(seq, &complement)?;
    let block_report = on(&block_seq)?;
    let complement_report = on(&complement_seq)?;
    let joint_report = on(seq)?;

    let mutual_information =
        seq.prefix().iter().map(|s| cut_information(s, &block, &complement)).collect::<Result<Vec<_>>>()?;
    let mutual_information_limit = cut_information(seq.limit(), &block, &complement)?;
    let settles = tail(&mutual_information, cfg.tail).iter().all(|v| (v - mutual_information_limit).abs() <= cfg.tau);

    let joint = separable_observed(&joint_report);
    let marginals = combined(separable_observed(&block_report), separable_observed(&complement_report));
    Ok(MarginalReport {
        forward: DirectionVerdict { predicted: joint == Observed::Yes, observed: marginals },
        backward: DirectionVerdict { predicted: marginals == Observed::Yes && settles, observed: joint },
        block,
        complement,
        block_report,
        complement_report,
        joint_report,
        mutual_information,
        mutual_information_limit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::random_density;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn product_with_constant_block() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a_layout = SystemLayout::single(2).unwrap();
        let b_layout = SystemLayout::bipartite(2, 2).unwrap();
        let fixed = random_density::<f64, _>(&b_layout, &mut rng);
        let moving: Vec<State> = (0..4).map(|_| random_density::<f64, _>(&a_layout, &mut rng)).collect();
        let a0 = random_density::<f64, _>(&a_layout, &mut rng);
        let prefix = moving.iter().map(|a| a.tensor(&fixed)).collect();
        let seq = StateSequence::new(prefix, a0.tensor(&fixed), Provenance::new("test")).unwrap();
        let r = marginal_reports(&seq, &[1, 2], &HarnessConfig::default()).unwrap();
        let values: Vec<f64> = r.block_report.models[0].rows.iter().map(|row| row.upper.to_f64()).collect();
        assert!(values.windows(2).all(|w| (w[0] - w[1]).abs() < 2e-3));
        assert!(r.mutual_information.iter().all(|&x| x.abs() < 1e-10));
        assert!(marginal_reports(&seq, &[0, 1, 2], &HarnessConfig::default()).is_err());
    }
}
