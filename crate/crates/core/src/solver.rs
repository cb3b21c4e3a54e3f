//! Relative-entropy distance to a free set by conditional gradients.
//!
//! The iterate is kept as an explicit convex combination of oracle outputs
//! (its active set), so every `σ_k` lies in the set by construction. Each
//! outer iteration queries the oracle at the current gradient, which
//! certifies the gap, then takes a Frank–Wolfe step chosen by golden-section
//! search and re-optimizes the weights of the active set by projected
//! gradient before the next query. Steps are accepted only if they lower
//! `D(ρ‖σ)`, so the upper bound never increases.

use crate::entropy::{relative_entropy_with, Extended};
use crate::error::{Error, Result};
use crate::free_sets::{lmo, sample_free_state, simplex_projection, FreeSetModel, OracleConfig};
use crate::operator::{frechet_log_with, DensityOperator, HermitianOperator, Spectrum};
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig<R: Real> {
    pub max_iterations: usize,
    /// Frank–Wolfe gap (nats) at which the loop stops.
    pub stopping_gap: R,
    /// Objective evaluations per golden-section line search.
    pub line_search_evals: usize,
    pub oracle: OracleConfig<R>,
    pub support_tol: R,
    /// Cap on weight-reoptimization steps between oracle calls (0 disables).
    pub corrective_steps: usize,
    /// Weight of `I/d` mixed into the starting point.
    pub blend: R,
    /// Sampled free states averaged into the starting point.
    pub initial_draws: usize,
    /// Consecutive non-improving steps after which the loop gives up.
    pub stall_limit: usize,
}

impl<R: Real> Default for SolverConfig<R> {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            stopping_gap: R::lit(1e-3),
            line_search_evals: 60,
            oracle: OracleConfig::default(),
            support_tol: R::lit(1e-10),
            corrective_steps: 100,
            blend: R::lit(1e-6),
            initial_draws: 4,
            stall_limit: 5,
        }
    }
}

impl<R: Real> SolverConfig<R> {
    pub fn validate(&self) -> Result<()> {
        if self.stopping_gap <= R::zero() {
            return Err(Error::InvalidArgument("stopping gap must be positive".into()));
        }
        if self.line_search_evals < 3 {
            return Err(Error::InvalidArgument("line search needs at least 3 evaluations".into()));
        }
        if self.blend < R::zero() || self.blend >= R::one() {
            return Err(Error::InvalidArgument("blend weight must lie in [0, 1)".into()));
        }
        if self.initial_draws == 0 {
            return Err(Error::InvalidArgument("need at least one initial draw".into()));
        }
        self.oracle.validate()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IterationRecord<R> {
    pub upper: R,
    pub gap: R,
}

#[derive(Clone, Debug)]
pub struct SolverResult<R: Real> {
    /// Best value found, `D(ρ‖σ*)`.
    pub value: Extended<R>,
    pub sigma_star: DensityOperator<R>,
    pub fw_gap: R,
    pub iterations: usize,
    pub lower: Extended<R>,
    pub upper: Extended<R>,
    pub converged: bool,
    /// Whether `lower` rests on an exact or dual-certified oracle; the
    /// separable oracles are heuristic.
    pub lower_certified: bool,
    pub history: Vec<IterationRecord<R>>,
    pub diagnostic: Option<String>,
}

impl<R: Real> SolverResult<R> {
    pub fn width(&self) -> Extended<R> {
        match (self.lower, self.upper) {
            (Extended::Finite(l), Extended::Finite(u)) => Extended::Finite(u - l),
            (Extended::Infinite, Extended::Infinite) => Extended::Finite(R::zero()),
            _ => Extended::Infinite,
        }
    }

    fn exact(value: Extended<R>, sigma: DensityOperator<R>) -> Self {
        Self {
            value,
            sigma_star: sigma,
            fw_gap: R::zero(),
            iterations: 0,
            lower: value,
            upper: value,
            converged: true,
            lower_certified: true,
            history: Vec::new(),
            diagnostic: None,
        }
    }
}

/// Gradient of `σ ↦ D(ρ‖σ)`: `I − Dlog_σ(ρ)`.
pub fn relent_gradient<R: Real>(
    rho: &DensityOperator<R>,
    sigma: &DensityOperator<R>,
    tol: R,
) -> Result<HermitianOperator<R>> {
    if rho.layout() != sigma.layout() {
        return Err(Error::LayoutMismatch { expected: sigma.dim(), found: rho.dim() });
    }
    gradient_at(rho, &sigma.eigh(), tol)
}

fn gradient_at<R: Real>(rho: &DensityOperator<R>, spec: &Spectrum<R>, tol: R) -> Result<HermitianOperator<R>> {
    let dlog = frechet_log_with(spec, rho.hermitian(), tol)?;
    Ok(&HermitianOperator::identity(rho.dim()) - &dlog)
}

struct Objective<'a, R: Real> {
    rho: &'a DensityOperator<R>,
    rho_spec: Spectrum<R>,
    tol: R,
}

impl<R: Real> Objective<'_, R> {
    fn at(&self, sigma: &HermitianOperator<R>) -> (Extended<R>, Spectrum<R>) {
        let spec = sigma.eigh();
        let v = relative_entropy_with(self.rho.positive(), &self.rho_spec, &spec, sigma.trace(), self.tol);
        (v, spec)
    }
}

/// Convex decomposition of the iterate.
struct ActiveSet<R: Real> {
    atoms: Vec<HermitianOperator<R>>,
    weights: Vec<R>,
}

impl<R: Real> ActiveSet<R> {
    fn point(&self) -> HermitianOperator<R> {
        let mut acc = HermitianOperator::zeros(self.atoms[0].dim());
        for (a, &w) in self.atoms.iter().zip(&self.weights) {
            acc = &acc + &a.scaled(w);
        }
        acc
    }

    fn find(&self, atom: &HermitianOperator<R>) -> Option<usize> {
        self.atoms.iter().position(|a| a.max_abs_diff(atom) <= R::lit(1e-13))
    }

    /// `σ ← (1−γ)σ + γ v`.
    fn toward(&mut self, v: HermitianOperator<R>, gamma: R) {
        for w in &mut self.weights {
            *w *= R::one() - gamma;
        }
        match self.find(&v) {
            Some(i) => self.weights[i] += gamma,
            None => {
                self.atoms.push(v);
                self.weights.push(gamma);
            }
        }
        self.prune();
    }

    fn with_weights(&mut self, weights: Vec<R>) {
        self.weights = weights;
        self.prune();
    }

    fn prune(&mut self) {
        let floor = R::lit(1e-15);
        let mut k = 0;
        while k < self.atoms.len() {
            if self.weights[k] <= floor && self.atoms.len() > 1 {
                self.atoms.swap_remove(k);
                self.weights.swap_remove(k);
            } else {
                k += 1;
            }
        }
        let total = self.weights.iter().fold(R::zero(), |a, &w| a + w);
        for w in &mut self.weights {
            *w /= total;
        }
    }
}

/// Golden-section minimization of `f` on `[lo, hi]` using `evals` evaluations.
fn golden_section<R: Real, F>(f: F, lo: R, hi: R, evals: usize) -> (R, Extended<R>)
where
    F: Fn(R) -> Extended<R>,
{
    let ratio = R::lit((5f64.sqrt() - 1.0) / 2.0);
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - ratio * (b - a);
    let mut x2 = a + ratio * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 2..evals {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - ratio * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + ratio * (b - a);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// The point every atom is blended toward: `I/d` when it is free, otherwise
/// the hull barycenter. Its support contains that of every free state.
fn anchor<R: Real>(model: &FreeSetModel<R>) -> HermitianOperator<R> {
    match model {
        FreeSetModel::ConvexHull { vertices } => {
            let w = R::one() / R::from_usize_lossy(vertices.len());
            let mut acc = vertices[0].hermitian().scaled(w);
            for v in &vertices[1..] {
                acc = &acc + &v.hermitian().scaled(w);
            }
            acc
        }
        _ => DensityOperator::<R>::maximally_mixed(model.layout().clone()).hermitian().clone(),
    }
}

/// `(1 − b) v + b · anchor`. Free whenever `v` is, and every mixture of such
/// atoms dominates `b · anchor`, so the iterate never loses support.
fn floored<R: Real>(v: &HermitianOperator<R>, anchor: &HermitianOperator<R>, b: R) -> HermitianOperator<R> {
    if b == R::zero() {
        return v.clone();
    }
    &v.scaled(R::one() - b) + &anchor.scaled(b)
}

fn initial_point<R: Real>(
    model: &FreeSetModel<R>,
    cfg: &SolverConfig<R>,
    anchor: &HermitianOperator<R>,
) -> Result<ActiveSet<R>> {
    let draws: Vec<HermitianOperator<R>> = match model {
        FreeSetModel::ConvexHull { vertices } => vertices.iter().map(|v| v.hermitian().clone()).collect(),
        _ => (0..cfg.initial_draws)
            .map(|k| Ok(sample_free_state(model, crate::free_sets::draw_seed(cfg.oracle.seed, k))?.hermitian().clone()))
            .collect::<Result<_>>()?,
    };
    let w = R::one() / R::from_usize_lossy(draws.len());
    let mut set = ActiveSet { atoms: Vec::new(), weights: Vec::new() };
    for v in &draws {
        let atom = floored(v, anchor, cfg.blend);
        match set.find(&atom) {
            Some(i) => set.weights[i] += w,
            None => {
                set.atoms.push(atom);
                set.weights.push(w);
            }
        }
    }
    Ok(set)
}

/// Projected-gradient descent on the active-set weights, stopping once the
/// gap restricted to the active atoms falls below `target`. Returns the new
/// iterate, its value and spectrum.
#[allow(clippy::too_many_arguments)]
fn reoptimize_weights<R: Real>(
    objective: &Objective<'_, R>,
    active: &mut ActiveSet<R>,
    sigma: HermitianOperator<R>,
    value: R,
    spec: Spectrum<R>,
    target: R,
    steps: usize,
) -> Result<(HermitianOperator<R>, R, Spectrum<R>)> {
    let (mut sigma, mut value, mut spec) = (sigma, value, spec);
    let mut eta = R::one();
    let mut previous: Option<(Vec<R>, Vec<R>)> = None;
    for _ in 0..steps {
        if active.atoms.len() < 2 {
            break;
        }
        let g = gradient_at(objective.rho, &spec, objective.tol)?;
        let grads: Vec<R> = active.atoms.iter().map(|a| g.inner(a)).collect();
        let at_sigma = g.inner(&sigma);
        let floor = grads.iter().copied().fold(grads[0], |m, x| m.min(x));
        if at_sigma - floor <= target {
            break;
        }
        if let Some((w0, g0)) = &previous {
            // Barzilai–Borwein step length
            let (mut ss, mut sy) = (R::zero(), R::zero());
            for i in 0..w0.len() {
                let ds = active.weights[i] - w0[i];
                ss += ds * ds;
                sy += ds * (grads[i] - g0[i]);
            }
            if sy > R::zero() {
                eta = ss / sy;
            }
        }
        let mut accepted = false;
        for _ in 0..40 {
            let trial: Vec<R> = active.weights.iter().zip(&grads).map(|(&w, &gi)| w - eta * gi).collect();
            let w_new = simplex_projection(&trial);
            let decrease = w_new
                .iter()
                .zip(&active.weights)
                .zip(&grads)
                .fold(R::zero(), |acc, ((&a, &b), &gi)| acc + (a - b) * gi);
            if decrease >= R::zero() {
                eta /= R::lit(2.0);
                continue;
            }
            let mut candidate = HermitianOperator::zeros(sigma.dim());
            for (a, &w) in active.atoms.iter().zip(&w_new) {
                candidate = &candidate + &a.scaled(w);
            }
            let (f_new, s_new) = objective.at(&candidate);
            match f_new {
                Extended::Finite(v) if v <= value + R::lit(1e-4) * decrease => {
                    previous = Some((active.weights.clone(), grads.clone()));
                    active.weights = w_new;
                    sigma = candidate;
                    value = v;
                    spec = s_new;
                    accepted = true;
                    break;
                }
                _ => eta /= R::lit(2.0),
            }
        }
        if !accepted {
            break;
        }
    }
    let weights = active.weights.clone();
    let before = active.atoms.len();
    active.with_weights(weights);
    if active.atoms.len() != before {
        // pruning renormalizes; keep the iterate consistent with the atoms
        let resynced = active.point();
        let (f, s) = objective.at(&resynced);
        if let Extended::Finite(v) = f {
            if v <= value {
                return Ok((resynced, v, s));
            }
        }
    }
    Ok((sigma, value, spec))
}

/// `inf_{σ ∈ model} D(ρ‖σ)` with a bracket `[lower, upper]`, `upper = f(σ_k)`.
///
/// The lower end is the best of the Frank–Wolfe bounds `f(σ_j) − g_j` seen
/// so far, and the reported `fw_gap` is `upper − lower`. Hull models are
/// decided exactly when they have a single vertex or when `ρ` leaks outside
/// the support of their barycenter (then every hull element leaks and the
/// distance is `+∞`). Otherwise every atom is blended with weight `blend`
/// toward `I/d` (or the hull barycenter), which keeps the iterate free and
/// its support fixed; the cost is at most `−ln(1 − blend)` on the upper end.
pub fn free_distance<R: Real>(
    rho: &DensityOperator<R>,
    model: &FreeSetModel<R>,
    cfg: &SolverConfig<R>,
) -> Result<SolverResult<R>> {
    cfg.validate()?;
    if rho.layout() != model.layout() {
        return Err(Error::LayoutMismatch { expected: model.layout().total(), found: rho.dim() });
    }
    let objective = Objective { rho, rho_spec: rho.eigh(), tol: cfg.support_tol };
    let layout = model.layout().clone();

    if let FreeSetModel::ConvexHull { vertices } = model {
        if vertices.len() == 1 {
            let (v, _) = objective.at(vertices[0].hermitian());
            return Ok(SolverResult::exact(v, vertices[0].clone()));
        }
    }

    let anchor = anchor(model);
    let mut active = initial_point(model, cfg, &anchor)?;
    let mut sigma = active.point();
    let (f0, mut spec) = objective.at(&sigma);
    let mut fk = match f0 {
        Extended::Finite(x) => x,
        Extended::Infinite => {
            let mut result = SolverResult::exact(Extended::Infinite, DensityOperator::from_trusted(sigma, layout));
            if !matches!(model, FreeSetModel::ConvexHull { .. }) {
                result.converged = false;
                result.diagnostic = Some("starting point does not cover the support of the state".into());
            }
            return Ok(result);
        }
    };

    let certified = matches!(model, FreeSetModel::ConvexHull { .. } | FreeSetModel::Ppt { .. });
    let mut history = Vec::new();
    let mut lower = R::min_value().unwrap_or(R::lit(f64::MIN));
    let mut iterations = 0;
    let mut stalls = 0;
    let mut last_residual = None;
    let mut diagnostic = None;
    let mut converged = false;

    while iterations < cfg.max_iterations {
        let g = gradient_at(rho, &spec, cfg.support_tol)?;
        let at_sigma = g.inner(&sigma);
        let oracle = cfg.oracle.with_seed(crate::free_sets::draw_seed(cfg.oracle.seed, iterations + 1));
        let out = lmo(&g, model, &oracle)?;
        last_residual = out.residual;
        iterations += 1;

        // Active atoms are free too, so they bound the oracle.
        let (best_atom, best_atom_value) = active
            .atoms
            .iter()
            .map(|a| g.inner(a))
            .enumerate()
            .fold((0, R::max_value().unwrap_or(R::lit(f64::MAX))), |b, (i, v)| if v < b.1 { (i, v) } else { b });
        let (vertex, vertex_value) = if best_atom_value < out.value {
            (active.atoms[best_atom].clone(), best_atom_value)
        } else {
            (floored(out.vertex.hermitian(), &anchor, cfg.blend), out.value)
        };
        let gap = (at_sigma - out.lower_bound.min(vertex_value)).max(R::zero());
        history.push(IterationRecord { upper: fk, gap });
        if fk - gap > lower {
            lower = fk - gap;
        }
        if fk - lower <= cfg.stopping_gap {
            converged = true;
            break;
        }

        let direction = &vertex - &sigma;
        let along = |gamma: R| objective.at(&(&sigma + &direction.scaled(gamma))).0;
        let (mut gamma, mut value) =
            golden_section(along, R::lit(1e-9), R::one() - R::lit(1e-9), cfg.line_search_evals);
        let end = along(R::one());
        if end <= value {
            gamma = R::one();
            value = end;
        }
        let moved = match value {
            Extended::Finite(v) if v < fk => {
                active.toward(vertex, gamma);
                sigma = &sigma + &direction.scaled(gamma);
                fk = v;
                spec = sigma.eigh();
                true
            }
            _ => false,
        };
        if cfg.corrective_steps > 0 {
            let target = (fk - lower) / R::lit(4.0);
            let (s, v, sp) =
                reoptimize_weights(&objective, &mut active, sigma, fk, spec, target, cfg.corrective_steps)?;
            let improved = v < fk;
            sigma = s;
            fk = v;
            spec = sp;
            if moved || improved {
                stalls = 0;
                continue;
            }
        } else if moved {
            stalls = 0;
            continue;
        }
        stalls += 1;
        if stalls >= cfg.stall_limit {
            diagnostic = Some(format!("no descent along oracle directions, gap {:.3e}", (fk - lower).as_f64()));
            break;
        }
    }

    if !converged {
        if let Some(residual) = last_residual {
            return Err(Error::OracleFailure {
                residual: residual.as_f64(),
                lower: lower.as_f64(),
                upper: fk.as_f64(),
            });
        }
        diagnostic.get_or_insert_with(|| format!("iteration cap reached with gap {:.3e}", (fk - lower).as_f64()));
    }
    Ok(SolverResult {
        value: Extended::Finite(fk),
        sigma_star: DensityOperator::from_trusted(sigma, layout),
        fw_gap: fk - lower,
        iterations,
        lower: Extended::Finite(lower),
        upper: Extended::Finite(fk),
        converged,
        lower_certified: certified,
        history,
        diagnostic,
    })
}
