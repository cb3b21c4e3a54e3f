//! Relative-entropy distances from quantum states to convex sets of free
//! states, and finite-prefix diagnostics of their continuity along
//! converging state sequences.
//!
//! The numerical core ([`operator`], [`entropy`], [`free_sets`], [`solver`])
//! is generic over the real scalar via [`Real`]; the aliases at the crate
//! root fix it to `f64`, which is what every tolerance is tuned for.
//! [`sequence`] is the experiment layer and works in `f64` directly.
//!
//! All logarithms are natural; every entropic quantity is in nats.

pub mod entropy;
pub mod error;
pub mod free_sets;
pub mod operator;
pub mod random;
pub mod scalar;
pub mod sequence;
pub mod solver;

pub use entropy::Extended;
pub use error::{Error, Result};
pub use operator::{Partition, PartitionSet, SystemLayout};
pub use scalar::Real;

pub type Hermitian = operator::HermitianOperator<f64>;
pub type Positive = operator::PositiveOperator<f64>;
pub type Density = operator::DensityOperator<f64>;
pub type ExtendedReal = entropy::Extended<f64>;
pub type FreeSet = free_sets::FreeSetModel<f64>;
pub type Solution = solver::SolverResult<f64>;
