//! Implicit-explicit multirate scheme as an impulse method: a slow half kick
//! with the slow potential, `M` implicit midpoint micro-steps on the fast
//! field `(-V^f_q, T^s_p + T^f_p)`, and a closing slow half kick.

use super::engine::check_state;
use super::newton::{newton_solve, NewtonProblem};
use super::{axpy, gradient, gradient_sum, hessian, KickCache, MicroObserver, SolverConfig, StepStats, Stepper};
use crate::systems::{Part, PhaseState, SeparableSystem};
use crate::tableau::{Matrix, Vector};
use crate::Result;

const KINETIC: [Part; 2] = [Part::SlowKinetic, Part::FastKinetic];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MrImex2 {
    m: usize,
    pub cfg: SolverConfig,
}

impl MrImex2 {
    pub fn new(m: usize, cfg: SolverConfig) -> Result<Self> {
        if m == 0 {
            return Err(crate::Error::tableau("M must be positive"));
        }
        cfg.validate()?;
        Ok(MrImex2 { m, cfg })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    fn run(
        &self,
        sys: &dyn SeparableSystem,
        y: &PhaseState,
        big_h: f64,
        cache: &mut KickCache,
        stats: &mut StepStats,
        observer: &mut MicroObserver<'_>,
    ) -> Result<PhaseState> {
        check_state(sys, y)?;
        stats.base_steps += 1;
        let cfg = self.cfg.for_step(big_h);
        let h = big_h / self.m as f64;
        let n = y.dim();
        let mut z = y.clone();
        axpy(&mut z.p, -0.5 * big_h, &cache.slow_gradient(sys, &z.q, stats));
        let mut guess = z.to_vector();
        for l in 1..=self.m {
            let start = z.to_vector();
            let mut stage = MidpointStage {
                sys,
                kinetic: &KINETIC,
                start: &start,
                n,
                h,
                cfg: &cfg,
                stats: &mut *stats,
            };
            let (mid, iters) = newton_solve(&mut stage, guess, &cfg)?;
            stats.newton_iters += iters;
            z = PhaseState::from_vector(n, &(&mid * 2.0 - &start));
            guess = mid;
            if l < self.m {
                observer(l as f64 / self.m as f64, &z);
            }
        }
        axpy(&mut z.p, -0.5 * big_h, &cache.slow_gradient(sys, &z.q, stats));
        observer(1.0, &z);
        Ok(z)
    }
}

/// `Y = y + h/2 f(Y)` for `f = (-V^f_q, sum of kinetic gradients)`,
/// unknown `Y = (P, Q)`.
pub(crate) struct MidpointStage<'a> {
    pub sys: &'a dyn SeparableSystem,
    pub kinetic: &'a [Part],
    pub start: &'a Vector,
    pub n: usize,
    pub h: f64,
    pub cfg: &'a SolverConfig,
    pub stats: &'a mut StepStats,
}

/// `[[0, -V''], [T'', 0]]` for the potential part and the kinetic parts.
pub(crate) fn field_jacobian(
    sys: &dyn SeparableSystem,
    potential: Part,
    kinetic: &[Part],
    x: &Vector,
    cfg: &SolverConfig,
) -> Matrix {
    let n = x.len() / 2;
    let (p, q) = (x.rows(0, n).into_owned(), x.rows(n, n).into_owned());
    let hv = hessian(sys, potential, &q, cfg);
    let ht = kinetic
        .iter()
        .map(|&k| hessian(sys, k, &p, cfg))
        .fold(Matrix::zeros(n, n), |a, b| a + b);
    let mut j = Matrix::zeros(2 * n, 2 * n);
    j.view_mut((0, n), (n, n)).copy_from(&-hv);
    j.view_mut((n, 0), (n, n)).copy_from(&ht);
    j
}

impl NewtonProblem for MidpointStage<'_> {
    fn residual(&mut self, x: &Vector) -> Vector {
        let n = self.n;
        let (p, q) = (x.rows(0, n).into_owned(), x.rows(n, n).into_owned());
        let mut r = x - self.start;
        if let Some(g) = gradient(self.sys, Part::FastPotential, &q, self.stats) {
            let mut rp = r.rows_mut(0, n);
            rp.axpy(0.5 * self.h, &g, 1.0);
        }
        if let Some(g) = gradient_sum(self.sys, self.kinetic, &p, self.stats) {
            let mut rq = r.rows_mut(n, n);
            rq.axpy(-0.5 * self.h, &g, 1.0);
        }
        r
    }

    fn jacobian(&mut self, x: &Vector) -> Option<Matrix> {
        let f = field_jacobian(self.sys, Part::FastPotential, self.kinetic, x, self.cfg);
        Some(Matrix::identity(2 * self.n, 2 * self.n) - f * (0.5 * self.h))
    }
}

impl Stepper for MrImex2 {
    fn name(&self) -> String {
        format!("mr-imex2(M={})", self.m)
    }

    fn step(&self, sys: &dyn SeparableSystem, y: &PhaseState, h: f64, stats: &mut StepStats) -> Result<PhaseState> {
        self.run(sys, y, h, &mut KickCache::default(), stats, &mut |_, _| {})
    }

    fn step_fused(
        &self,
        sys: &dyn SeparableSystem,
        y: &PhaseState,
        h: f64,
        cache: &mut KickCache,
        stats: &mut StepStats,
    ) -> Result<PhaseState> {
        self.run(sys, y, h, cache, stats, &mut |_, _| {})
    }

    fn step_observed(
        &self,
        sys: &dyn SeparableSystem,
        y: &PhaseState,
        h: f64,
        stats: &mut StepStats,
        observer: &mut MicroObserver<'_>,
    ) -> Result<PhaseState> {
        self.run(sys, y, h, &mut KickCache::default(), stats, observer)
    }
}
