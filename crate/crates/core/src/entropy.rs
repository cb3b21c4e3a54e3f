//! Entropic functionals on positive operators with the extended-value
//! conventions: homogeneous von Neumann entropy, Lindblad relative entropy
//! (`+inf` outside the support, `D(0||σ) = Tr σ`), and multipartite mutual
//! information.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Add;

use crate::error::{Error, Result};
use crate::operator::{DensityOperator, PositiveOperator, Spectrum};
use crate::scalar::{eta, Real};

/// Default support tolerance: eigenvalues of the reference operator below
/// `SUPPORT_TOL * λ_max` are outside its support, and leaked weight above
/// `SUPPORT_TOL` makes the relative entropy infinite.
pub const SUPPORT_TOL: f64 = 1e-10;

/// A real number or `+inf`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Extended<R> {
    Finite(R),
    Infinite,
}

impl<R: Real> Extended<R> {
    pub fn is_finite(&self) -> bool {
        matches!(self, Extended::Finite(_))
    }

    pub fn finite(&self) -> Option<R> {
        match *self {
            Extended::Finite(x) => Some(x),
            Extended::Infinite => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match *self {
            Extended::Finite(x) => x.as_f64(),
            Extended::Infinite => f64::INFINITY,
        }
    }

    pub fn map(self, f: impl FnOnce(R) -> R) -> Self {
        match self {
            Extended::Finite(x) => Extended::Finite(f(x)),
            Extended::Infinite => Extended::Infinite,
        }
    }
}

impl<R: Real> Add for Extended<R> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        match (self, rhs) {
            (Extended::Finite(a), Extended::Finite(b)) => Extended::Finite(a + b),
            _ => Extended::Infinite,
        }
    }
}

impl<R: Real> PartialOrd for Extended<R> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (Extended::Finite(a), Extended::Finite(b)) => a.partial_cmp(b),
            (Extended::Finite(_), Extended::Infinite) => Some(Ordering::Less),
            (Extended::Infinite, Extended::Finite(_)) => Some(Ordering::Greater),
            (Extended::Infinite, Extended::Infinite) => Some(Ordering::Equal),
        }
    }
}

impl<R: Real> fmt::Display for Extended<R> {
    /// Six decimals, or the literal `inf`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Extended::Finite(x) => write!(f, "{:.6}", x.as_f64()),
            Extended::Infinite => f.write_str("inf"),
        }
    }
}

/// `S(ρ) = Tr η(ρ) − η(Tr ρ)`; zero for the zero operator.
pub fn von_neumann_entropy<R: Real>(rho: &PositiveOperator<R>) -> Extended<R> {
    let spec = rho.eigh();
    let total = spec.values.iter().fold(R::zero(), |acc, &l| acc + l.max(R::zero()));
    let s = spec.values.iter().fold(R::zero(), |acc, &l| acc + eta(l)) - eta(total);
    Extended::Finite(s)
}

/// Pieces of `Tr ρ ln σ` resolved in the eigenbasis of `σ`.
struct LogPairing<R: Real> {
    /// `Σ_j <s_j|ρ|s_j> ln μ_j` over the support of `σ`.
    inside: R,
    /// `Tr ρ (I − P_σ)`.
    leaked: R,
}

fn log_pairing<R: Real>(rho: &PositiveOperator<R>, sigma: &Spectrum<R>, tol: R) -> LogPairing<R> {
    let weights = sigma.diagonal_of(rho.matrix());
    let cut = tol * sigma.max();
    let mut inside = R::zero();
    let mut leaked = R::zero();
    for (&mu, &w) in sigma.values.iter().zip(weights.iter()) {
        if mu > cut && mu > R::zero() {
            inside += w * mu.ln();
        } else {
            leaked += w;
        }
    }
    LogPairing { inside, leaked }
}

fn leaks<R: Real>(leaked: R, rho_trace: R, tol: R) -> bool {
    leaked > tol * rho_trace.max(R::one())
}

/// Lindblad relative entropy `Σ_i <φ_i| ρ ln ρ − ρ ln σ + σ − ρ |φ_i>`.
pub fn relative_entropy<R: Real>(rho: &PositiveOperator<R>, sigma: &PositiveOperator<R>, tol: R) -> Extended<R> {
    relative_entropy_with(rho, &rho.eigh(), &sigma.eigh(), sigma.trace(), tol)
}

pub(crate) fn relative_entropy_with<R: Real>(
    rho: &PositiveOperator<R>,
    rho_spec: &Spectrum<R>,
    sigma_spec: &Spectrum<R>,
    sigma_trace: R,
    tol: R,
) -> Extended<R> {
    let pairing = log_pairing(rho, sigma_spec, tol);
    if leaks(pairing.leaked, rho.trace(), tol) {
        return Extended::Infinite;
    }
    let rho_log_rho = rho_spec.values.iter().fold(R::zero(), |acc, &l| acc - eta(l));
    Extended::Finite(rho_log_rho - pairing.inside + sigma_trace - rho.trace())
}

/// `Tr ρ(−ln σ)`, infinite when `ρ` leaks outside the support of `σ`.
pub fn cross_entropy<R: Real>(rho: &PositiveOperator<R>, sigma: &PositiveOperator<R>, tol: R) -> Extended<R> {
    let pairing = log_pairing(rho, &sigma.eigh(), tol);
    if leaks(pairing.leaked, rho.trace(), tol) {
        Extended::Infinite
    } else {
        Extended::Finite(-pairing.inside)
    }
}

/// The expansion `Tr ρ(−ln σ) − S(ρ) − η(Tr ρ) + Tr σ − Tr ρ`, evaluated with
/// a full matrix product for the first term.
pub fn relative_entropy_expansion<R: Real>(
    rho: &PositiveOperator<R>,
    sigma: &PositiveOperator<R>,
    tol: R,
) -> Extended<R> {
    let spec = sigma.eigh();
    let cut = tol * spec.max();
    let neg_log = spec.apply(|l| if l > cut && l > R::zero() { -l.ln() } else { R::zero() });
    let outside = spec.apply(|l| if l > cut && l > R::zero() { R::zero() } else { R::one() });
    if leaks(rho.inner(&outside), rho.trace(), tol) {
        return Extended::Infinite;
    }
    let cross = rho.inner(&neg_log);
    let s = von_neumann_entropy(rho).finite().expect("finite dimension");
    Extended::Finite(cross - s - eta(rho.trace()) + sigma.trace() - rho.trace())
}

/// Mutual information computed two ways, with their discrepancy as a self-check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MutualInformation<R> {
    /// `D(ρ || ρ_1 ⊗ ... ⊗ ρ_m)`.
    pub value: Extended<R>,
    /// `Σ_k S(ρ_k) − S(ρ)`.
    pub via_entropies: R,
    pub discrepancy: R,
}

/// `ρ_1 ⊗ ... ⊗ ρ_m` over the single-factor marginals.
pub fn product_of_marginals<R: Real>(rho: &DensityOperator<R>) -> Result<DensityOperator<R>> {
    let parties = rho.layout().parties();
    let mut acc = rho.marginal(&[0])?;
    for k in 1..parties {
        acc = acc.tensor(&rho.marginal(&[k])?);
    }
    Ok(acc)
}

pub fn mutual_information<R: Real>(rho: &DensityOperator<R>) -> Result<MutualInformation<R>> {
    let parties = rho.layout().parties();
    if parties < 2 {
        return Err(Error::InvalidArgument("mutual information needs at least two parties".into()));
    }
    let product = product_of_marginals(rho)?;
    let value = relative_entropy(rho.positive(), product.positive(), R::lit(SUPPORT_TOL));
    let s_joint = von_neumann_entropy(rho.positive()).finite().expect("finite dimension");
    let mut s_marg = R::zero();
    for k in 0..parties {
        s_marg += von_neumann_entropy(rho.marginal(&[k])?.positive()).finite().expect("finite dimension");
    }
    let via_entropies = s_marg - s_joint;
    let discrepancy = match value {
        Extended::Finite(v) => (v - via_entropies).abs(),
        Extended::Infinite => R::max_value().unwrap_or_else(|| R::lit(f64::MAX)),
    };
    Ok(MutualInformation { value, via_entropies, discrepancy })
}

/// Outcome of comparing `D(ρ||ω_A⊗ω_B)` with `D(ρ_A||ω_A) + D(ρ_B||ω_B) + I(A:B)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FidenResidual<R> {
    /// Both sides finite; absolute difference.
    Finite(R),
    BothInfinite,
    Mismatch,
}

pub fn fiden_residual<R: Real>(
    rho: &DensityOperator<R>,
    omega_a: &DensityOperator<R>,
    omega_b: &DensityOperator<R>,
    tol: R,
) -> Result<FidenResidual<R>> {
    let layout = rho.layout();
    if layout.parties() != 2 {
        return Err(Error::InvalidArgument("identity check needs a bipartite state".into()));
    }
    if omega_a.dim() != layout.dims()[0] || omega_b.dim() != layout.dims()[1] {
        return Err(Error::LayoutMismatch { expected: layout.total(), found: omega_a.dim() * omega_b.dim() });
    }
    let lhs = relative_entropy(rho.positive(), omega_a.tensor(omega_b).positive(), tol);
    let rho_a = rho.marginal(&[0])?;
    let rho_b = rho.marginal(&[1])?;
    let rhs = relative_entropy(rho_a.positive(), omega_a.positive(), tol)
        + relative_entropy(rho_b.positive(), omega_b.positive(), tol)
        + mutual_information(rho)?.value;
    Ok(match (lhs, rhs) {
        (Extended::Finite(l), Extended::Finite(r)) => FidenResidual::Finite((l - r).abs()),
        (Extended::Infinite, Extended::Infinite) => FidenResidual::BothInfinite,
        _ => FidenResidual::Mismatch,
    })
}
