//! Experiment manifests: a sequence family, the models to test it against,
//! solver settings and a seed.

use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use relent_core::random::{random_density, random_hermitian};
use relent_core::sequence::{
    gen_dominated, gen_lsc_gap, gen_mixture, gen_pushforward, lsc_gap_weights, unitary_path, DominatedOptions,
    HarnessConfig, KrausOperation, StateSequence,
};
use relent_core::{Density, FreeSet, SystemLayout};
use serde::Deserialize;

use crate::descriptor::parse_descriptor;
use crate::state_file::read_state;
use crate::CliError;

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub enum StateSource {
    /// Path to a state file, relative to the manifest.
    File(PathBuf),
    /// Hilbert–Schmidt random state on the given factor dimensions.
    Random {
        dims: Vec<usize>,
    },
    MaximallyMixed {
        dims: Vec<usize>,
    },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub enum Family {
    Constant {
        state: StateSource,
        len: usize,
    },
    Dominated {
        sigma: StateSource,
        c: f64,
        len: usize,
        delta: Option<f64>,
    },
    Mixture {
        first: Box<Family>,
        second: Box<Family>,
        weights: Vec<f64>,
        limit_weight: f64,
    },
    /// Local unitaries `⊗_k exp(−i t_n H_k)` with `t_n = strength / n` and
    /// random single-factor `H_k`, applied to `inner`.
    Pushforward {
        inner: Box<Family>,
        strength: Option<f64>,
    },
    LscGap {
        dims: Vec<usize>,
        weights: Option<Vec<f64>>,
    },
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub tau: Option<f64>,
    pub tail: Option<usize>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub family: Family,
    pub models: Vec<String>,
    #[serde(default)]
    pub solver: Settings,
    #[serde(default)]
    pub seed: u64,
}

/// Everything needed to run the harness.
pub struct Experiment {
    pub sequence: StateSequence,
    pub models: Vec<FreeSet>,
    pub config: HarnessConfig,
}

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

/// Hands out one seed per random draw, in manifest order.
struct Seeds {
    base: u64,
    next: u64,
}

impl Seeds {
    fn take(&mut self) -> u64 {
        self.next += 1;
        self.base.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(self.next)
    }
}

struct Builder<'a> {
    base: &'a Path,
    seeds: Seeds,
    /// Models pushforward operations are checked against.
    declared: Vec<String>,
}

impl Builder<'_> {
    fn state(&mut self, src: &StateSource) -> Result<Density, CliError> {
        match src {
            StateSource::File(p) => read_state(&self.base.join(p)),
            StateSource::Random { dims } => {
                let layout = SystemLayout::new(dims.clone()).map_err(usage)?;
                Ok(random_density(&layout, &mut ChaCha8Rng::seed_from_u64(self.seeds.take())))
            }
            StateSource::MaximallyMixed { dims } => {
                Ok(Density::maximally_mixed(SystemLayout::new(dims.clone()).map_err(usage)?))
            }
        }
    }

    fn family(&mut self, f: &Family) -> Result<StateSequence, CliError> {
        match f {
            Family::Constant { state, len } => StateSequence::constant(self.state(state)?, *len).map_err(usage),
            Family::Dominated { sigma, c, len, delta } => {
                let sigma = self.state(sigma)?;
                let seed = self.seeds.take();
                gen_dominated(&sigma, *c, *len, seed, DominatedOptions { delta: *delta }).map_err(usage)
            }
            Family::Mixture { first, second, weights, limit_weight } => {
                let a = self.family(first)?;
                let b = self.family(second)?;
                gen_mixture(&a, &b, weights, *limit_weight).map_err(usage)
            }
            Family::Pushforward { inner, strength } => {
                let inner = self.family(inner)?;
                let layout = inner.layout().clone();
                let mut rng = ChaCha8Rng::seed_from_u64(self.seeds.take());
                let hs: Vec<_> = layout.dims().iter().map(|&d| random_hermitian::<f64, _>(d, &mut rng)).collect();
                let strength = strength.unwrap_or(1.0);
                let op = |t: f64| {
                    let us: Vec<_> = hs.iter().map(|h| unitary_path(h, t)).collect();
                    KrausOperation::local(layout.clone(), &us)
                };
                let ops =
                    (1..=inner.len()).map(|n| op(strength / n as f64)).collect::<Result<Vec<_>, _>>().map_err(usage)?;
                let declared = self
                    .declared
                    .iter()
                    .filter(|d| !d.starts_with("hull:"))
                    .map(|d| parse_descriptor(d, &layout, self.base))
                    .collect::<Result<Vec<_>, _>>()?;
                let seed = self.seeds.take();
                gen_pushforward(&inner, ops, op(0.0).map_err(usage)?, &declared, seed).map_err(usage)
            }
            Family::LscGap { dims, weights } => {
                let w = weights.clone().unwrap_or_else(|| lsc_gap_weights(dims));
                gen_lsc_gap(dims, &w).map_err(usage)
            }
        }
    }
}

impl Manifest {
    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| usage(format!("manifest: {e}")))
    }

    /// `base` is the directory relative paths are resolved against.
    pub fn build(&self, base: &Path) -> Result<Experiment, CliError> {
        if self.models.is_empty() {
            return Err(usage("manifest lists no models"));
        }
        let mut builder = Builder { base, seeds: Seeds { base: self.seed, next: 0 }, declared: self.models.clone() };
        let sequence = builder.family(&self.family)?;
        let models =
            self.models.iter().map(|d| parse_descriptor(d, sequence.layout(), base)).collect::<Result<Vec<_>, _>>()?;
        let mut config = HarnessConfig::default();
        config.solver.oracle.seed = self.seed;
        if let Some(t) = self.solver.tol {
            config.solver.stopping_gap = t;
        }
        if let Some(m) = self.solver.max_iter {
            config.solver.max_iterations = m;
        }
        if let Some(t) = self.solver.tau {
            config.tau = t;
        }
        if let Some(k) = self.solver.tail {
            config.tail = k;
        }
        config.solver.validate().map_err(usage)?;
        Ok(Experiment { sequence, models, config })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_rejected() {
        let ok = r#"{"family": {"constant": {"state": {"maximally_mixed": {"dims": [2, 2]}}, "len": 3}}, "models": ["separable"]}"#;
        assert!(Manifest::parse(ok).unwrap().build(Path::new(".")).is_ok());
        let extra = r#"{"family": {"constant": {"state": {"maximally_mixed": {"dims": [2]}}, "len": 3}}, "models": [], "colour": 1}"#;
        assert!(Manifest::parse(extra).is_err());
        let nested =
            r#"{"family": {"constant": {"state": {"random": {"dims": [2], "rank": 1}}, "len": 3}}, "models": []}"#;
        assert!(Manifest::parse(nested).is_err());
    }

    #[test]
    fn same_seed_same_sequence() {
        let text = r#"{"family": {"dominated": {"sigma": {"random": {"dims": [2, 2]}}, "c": 0.5, "len": 4}}, "models": ["separable"], "seed": 9}"#;
        let a = Manifest::parse(text).unwrap().build(Path::new(".")).unwrap();
        let b = Manifest::parse(text).unwrap().build(Path::new(".")).unwrap();
        assert_eq!(a.sequence.prefix(), b.sequence.prefix());
    }
}
