//! One-step maps and the time-stepping driver.

mod driver;
mod engine;
mod foils;
mod imex2;
mod imim2;
mod lpfr;
mod newton;

use std::ops::AddAssign;

pub use driver::{drive, integrate, integrate_final, DriveOptions, Observer, Trajectory};
pub use engine::{OracleStepper, PmgarkStepper};
pub use foils::{ExplicitMidpoint, ForwardEuler};
pub use imex2::MrImex2;
pub use imim2::MrImim2;
pub use lpfr::MrLpfr;
pub use newton::{newton_solve, newton_solve_fn, NewtonProblem};

use crate::systems::{Part, PhaseState, SeparableSystem};
use crate::tableau::{Matrix, Vector};
use crate::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum JacobianMode {
    /// Closed-form Hessians where the system provides them, differences of
    /// gradients otherwise.
    Analytic,
    /// Central differences of the whole stage residual.
    FiniteDifference,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig {
    pub newton_rel_tol: f64,
    pub newton_abs_tol: f64,
    pub max_iters: usize,
    pub jacobian_mode: JacobianMode,
    pub fd_step_scale: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            newton_rel_tol: 1e-12,
            newton_abs_tol: 1e-14,
            max_iters: 50,
            jacobian_mode: JacobianMode::Analytic,
            fd_step_scale: f64::EPSILON.sqrt(),
        }
    }
}

impl SolverConfig {
    /// Residual bound accepted for an iterate of max-norm `scale`.
    pub fn tolerance(&self, scale: f64) -> f64 {
        self.newton_abs_tol + self.newton_rel_tol * scale
    }

    /// Negative substeps of compositions get twice the iteration budget.
    pub fn for_step(&self, h: f64) -> SolverConfig {
        let mut c = *self;
        if h < 0.0 {
            c.max_iters *= 2;
        }
        c
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.newton_rel_tol > 0.0
            && self.newton_abs_tol > 0.0
            && self.max_iters >= 1
            && self.fd_step_scale > 0.0;
        if ok {
            Ok(())
        } else {
            Err(crate::Error::Config(format!("invalid solver settings {self:?}")))
        }
    }
}

/// Evaluation counters. Forces are potential gradients; kinetic gradients
/// are counted separately.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StepStats {
    pub slow_force_evals: usize,
    pub fast_force_evals: usize,
    pub kinetic_evals: usize,
    pub newton_iters: usize,
    /// Applications of a non-composed one-step map.
    pub base_steps: usize,
}

impl AddAssign for StepStats {
    fn add_assign(&mut self, o: StepStats) {
        self.slow_force_evals += o.slow_force_evals;
        self.fast_force_evals += o.fast_force_evals;
        self.kinetic_evals += o.kinetic_evals;
        self.newton_iters += o.newton_iters;
        self.base_steps += o.base_steps;
    }
}

/// Slow force left over from the closing kick of the previous step.
#[derive(Clone, Debug, Default)]
pub struct KickCache {
    entry: Option<(Vector, Vector)>,
}

impl KickCache {
    pub fn clear(&mut self) {
        self.entry = None;
    }

    /// Slow potential gradient at `q`, evaluated only on a cache miss.
    pub(crate) fn slow_gradient(
        &mut self,
        sys: &dyn SeparableSystem,
        q: &Vector,
        stats: &mut StepStats,
    ) -> Option<Vector> {
        if sys.is_zero(Part::SlowPotential) {
            return None;
        }
        if let Some((cq, g)) = &self.entry {
            if cq == q {
                return Some(g.clone());
            }
        }
        let g = gradient(sys, Part::SlowPotential, q, stats)?;
        self.entry = Some((q.clone(), g.clone()));
        Some(g)
    }
}

/// Receives `(fraction of the macro-step, state)` at the micro grid.
pub type MicroObserver<'a> = dyn FnMut(f64, &PhaseState) + 'a;

/// A one-step map `y -> Phi_H(y)`. Steppers hold no per-trajectory state.
pub trait Stepper: Send + Sync {
    fn name(&self) -> String;

    fn step(&self, sys: &dyn SeparableSystem, y: &PhaseState, h: f64, stats: &mut StepStats) -> Result<PhaseState>;

    /// Same map, reusing the slow force of the previous closing kick.
    fn step_fused(
        &self,
        sys: &dyn SeparableSystem,
        y: &PhaseState,
        h: f64,
        _cache: &mut KickCache,
        stats: &mut StepStats,
    ) -> Result<PhaseState> {
        self.step(sys, y, h, stats)
    }

    /// Same map, reporting intermediate states on the micro grid.
    fn step_observed(
        &self,
        sys: &dyn SeparableSystem,
        y: &PhaseState,
        h: f64,
        stats: &mut StepStats,
        observer: &mut MicroObserver<'_>,
    ) -> Result<PhaseState> {
        let y1 = self.step(sys, y, h, stats)?;
        observer(1.0, &y1);
        Ok(y1)
    }
}

impl<S: Stepper + ?Sized> Stepper for Box<S> {
    fn name(&self) -> String {
        (**self).name()
    }

    fn step(&self, sys: &dyn SeparableSystem, y: &PhaseState, h: f64, stats: &mut StepStats) -> Result<PhaseState> {
        (**self).step(sys, y, h, stats)
    }

    fn step_fused(
        &self,
        sys: &dyn SeparableSystem,
        y: &PhaseState,
        h: f64,
        cache: &mut KickCache,
        stats: &mut StepStats,
    ) -> Result<PhaseState> {
        (**self).step_fused(sys, y, h, cache, stats)
    }

    fn step_observed(
        &self,
        sys: &dyn SeparableSystem,
        y: &PhaseState,
        h: f64,
        stats: &mut StepStats,
        observer: &mut MicroObserver<'_>,
    ) -> Result<PhaseState> {
        (**self).step_observed(sys, y, h, stats, observer)
    }
}

/// Counted gradient of one part; `None` when the part vanishes.
pub(crate) fn gradient(sys: &dyn SeparableSystem, part: Part, x: &Vector, stats: &mut StepStats) -> Option<Vector> {
    if sys.is_zero(part) {
        return None;
    }
    match part {
        Part::SlowPotential => stats.slow_force_evals += 1,
        Part::FastPotential => stats.fast_force_evals += 1,
        _ => stats.kinetic_evals += 1,
    }
    Some(sys.grad(part, x))
}

/// Sum of the gradients of several parts, `None` when all vanish.
pub(crate) fn gradient_sum(
    sys: &dyn SeparableSystem,
    parts: &[Part],
    x: &Vector,
    stats: &mut StepStats,
) -> Option<Vector> {
    parts
        .iter()
        .filter_map(|&part| gradient(sys, part, x, stats))
        .reduce(|a, b| a + b)
}

/// `x += c * g` when `g` is present.
pub(crate) fn axpy(x: &mut Vector, c: f64, g: &Option<Vector>) {
    if let Some(g) = g {
        x.axpy(c, g, 1.0);
    }
}

/// Hessian of a part, by differences of gradients when no closed form is
/// available.
pub(crate) fn hessian(sys: &dyn SeparableSystem, part: Part, x: &Vector, cfg: &SolverConfig) -> Matrix {
    let n = x.len();
    if sys.is_zero(part) {
        return Matrix::zeros(n, n);
    }
    if cfg.jacobian_mode == JacobianMode::Analytic {
        if let Some(h) = sys.hessian(part, x.as_slice()) {
            return h;
        }
    }
    let mut m = Matrix::zeros(n, n);
    let mut xs = x.clone();
    for j in 0..n {
        let d = cfg.fd_step_scale * (1.0 + x[j].abs());
        xs[j] = x[j] + d;
        let up = sys.grad(part, &xs);
        xs[j] = x[j] - d;
        let down = sys.grad(part, &xs);
        xs[j] = x[j];
        m.set_column(j, &((up - down) / (2.0 * d)));
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn negative_steps_get_more_iterations() {
        let c = SolverConfig::default();
        assert_eq!(c.for_step(-0.1).max_iters, 100);
        assert_eq!(c.for_step(0.1).max_iters, 50);
        assert!(c.validate().is_ok());
    }

    #[test]
    fn stats_accumulate() {
        let mut a = StepStats {
            slow_force_evals: 1,
            ..Default::default()
        };
        a += StepStats {
            slow_force_evals: 2,
            base_steps: 1,
            ..Default::default()
        };
        assert_eq!((a.slow_force_evals, a.base_steps), (3, 1));
    }
}
