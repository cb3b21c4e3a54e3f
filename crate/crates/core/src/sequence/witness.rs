//! Sequences of free states paired with a state sequence, and the two
//! witness conditions: convergence of `D(ρ_n‖ω_n)` and of `Tr ρ_n(−ln ω_n)`.

use super::{tail, State, StateSequence};
use crate::entropy::{cross_entropy, product_of_marginals, relative_entropy, Extended, SUPPORT_TOL};
use crate::error::{Error, Result};

/// Number of trailing indices a witness condition is judged on.
pub const WITNESS_TAIL: usize = 3;

/// `ω_1..ω_N → ω_0`, each with a note on why it is free.
#[derive(Clone, Debug)]
pub struct WitnessSequence {
    prefix: Vec<State>,
    limit: State,
    notes: Vec<String>,
}

impl WitnessSequence {
    /// `notes` covers the prefix followed by the limit (`N + 1` entries).
    pub fn new(prefix: Vec<State>, limit: State, notes: Vec<String>) -> Result<Self> {
        if notes.len() != prefix.len() + 1 || notes.iter().any(|n| n.trim().is_empty()) {
            return Err(Error::InvalidArgument("every witness state needs a membership note".into()));
        }
        if let Some(bad) = prefix.iter().find(|s| s.layout() != limit.layout()) {
            return Err(Error::LayoutMismatch { expected: limit.dim(), found: bad.dim() });
        }
        Ok(Self { prefix, limit, notes })
    }

    /// The sequence itself, for sequences known to lie in the free set.
    pub fn from_members(seq: &StateSequence, note: &str) -> Result<Self> {
        Self::new(seq.prefix().to_vec(), seq.limit().clone(), vec![note.to_string(); seq.len() + 1])
    }

    /// `ω_n = ρ_n^{A_1} ⊗ … ⊗ ρ_n^{A_m}`, free for every model containing
    /// the fully separable states.
    pub fn marginal_products(seq: &StateSequence) -> Result<Self> {
        let prefix = seq.prefix().iter().map(product_of_marginals).collect::<Result<Vec<_>>>()?;
        let limit = product_of_marginals(seq.limit())?;
        Self::new(prefix, limit, vec!["product of marginals".to_string(); seq.len() + 1])
    }

    pub fn prefix(&self) -> &[State] {
        &self.prefix
    }

    pub fn limit(&self) -> &State {
        &self.limit
    }

    pub fn notes(&self) -> &[String] {
        &self.notes
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConditionVerdict {
    /// Finite everywhere and within tolerance of the limit on the tail.
    Holds,
    Fails,
    InfiniteValues,
}

#[derive(Clone, Debug)]
pub struct WitnessReport {
    pub relative_entropy: Vec<Extended<f64>>,
    pub relative_entropy_limit: Extended<f64>,
    pub cross_entropy: Vec<Extended<f64>>,
    pub cross_entropy_limit: Extended<f64>,
    pub relative_entropy_verdict: ConditionVerdict,
    pub cross_entropy_verdict: ConditionVerdict,
}

fn verdict(values: &[Extended<f64>], limit: Extended<f64>, tol: f64) -> ConditionVerdict {
    let Some(l) = limit.finite() else { return ConditionVerdict::InfiniteValues };
    if values.iter().any(|v| !v.is_finite()) {
        return ConditionVerdict::InfiniteValues;
    }
    let close = tail(values, WITNESS_TAIL).iter().all(|v| (v.to_f64() - l).abs() <= tol);
    if close {
        ConditionVerdict::Holds
    } else {
        ConditionVerdict::Fails
    }
}

pub fn check_witness_condition(seq: &StateSequence, wit: &WitnessSequence, tol: f64) -> Result<WitnessReport> {
    if seq.len() != wit.prefix.len() || seq.layout() != wit.limit.layout() {
        return Err(Error::InvalidArgument("witness does not match the sequence".into()));
    }
    let pairs = seq.prefix().iter().zip(&wit.prefix);
    let rel: Vec<Extended<f64>> =
        pairs.clone().map(|(r, w)| relative_entropy(r.positive(), w.positive(), SUPPORT_TOL)).collect();
    let cross: Vec<Extended<f64>> =
        pairs.map(|(r, w)| cross_entropy(r.positive(), w.positive(), SUPPORT_TOL)).collect();
    let rel0 = relative_entropy(seq.limit().positive(), wit.limit.positive(), SUPPORT_TOL);
    let cross0 = cross_entropy(seq.limit().positive(), wit.limit.positive(), SUPPORT_TOL);
    Ok(WitnessReport {
        relative_entropy_verdict: verdict(&rel, rel0, tol),
        cross_entropy_verdict: verdict(&cross, cross0, tol),
        relative_entropy: rel,
        relative_entropy_limit: rel0,
        cross_entropy: cross,
        cross_entropy_limit: cross0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::mutual_information;
    use crate::operator::{HermitianOperator, SystemLayout};
    use crate::random::random_density;
    use crate::sequence::{gen_dominated, DominatedOptions, Provenance};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn self_witness_has_zero_divergence() {
        let layout = SystemLayout::bipartite(2, 2).unwrap();
        let s = StateSequence::constant(State::maximally_mixed(layout), 5).unwrap();
        let w = WitnessSequence::from_members(&s, "maximally mixed is separable").unwrap();
        let r = check_witness_condition(&s, &w, 1e-9).unwrap();
        assert!(r.relative_entropy.iter().all(|v| v.to_f64().abs() < 1e-12));
        assert_eq!(r.relative_entropy_verdict, ConditionVerdict::Holds);
    }

    #[test]
    fn marginal_product_witness_reproduces_mutual_information() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let sigma = random_density::<f64, _>(&SystemLayout::new(vec![2, 2, 2]).unwrap(), &mut rng);
        let s = gen_dominated(&sigma, 0.5, 6, 3, DominatedOptions::default()).unwrap();
        let w = WitnessSequence::marginal_products(&s).unwrap();
        let r = check_witness_condition(&s, &w, 1e-3).unwrap();
        for (rho, d) in s.prefix().iter().zip(&r.relative_entropy) {
            let mi = mutual_information(rho).unwrap();
            assert!((d.to_f64() - mi.via_entropies).abs() < 1e-10);
        }
    }

    #[test]
    fn shrinking_support_gives_infinite_values() {
        let layout = SystemLayout::single(2).unwrap();
        let faithful = State::maximally_mixed(layout.clone());
        let s = StateSequence::new(vec![faithful.clone(); 3], faithful, Provenance::new("test")).unwrap();
        let pure = State::from_trusted(HermitianOperator::from_real_diagonal(&[1.0, 0.0]), layout);
        let w = WitnessSequence::new(vec![pure.clone(); 3], pure, vec!["vertex".into(); 4]).unwrap();
        let r = check_witness_condition(&s, &w, 1e-3).unwrap();
        assert_eq!(r.relative_entropy_verdict, ConditionVerdict::InfiniteValues);
        assert_eq!(r.cross_entropy_verdict, ConditionVerdict::InfiniteValues);
    }

    #[test]
    fn notes_are_required() {
        let layout = SystemLayout::single(2).unwrap();
        let m = State::maximally_mixed(layout);
        assert!(WitnessSequence::new(vec![m.clone()], m.clone(), vec!["ok".into()]).is_err());
        assert!(WitnessSequence::new(vec![m.clone()], m, vec!["ok".into(), " ".into()]).is_err());
    }
}
