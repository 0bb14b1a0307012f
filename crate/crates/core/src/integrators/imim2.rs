//! Implicit-implicit multirate midpoint scheme.
//!
//! One slow midpoint stage `Y^s` and `M` fast midpoint micro-steps. For a
//! fixed `Y^s` the fast stages form a chain of midpoint steps shifted by
//! `H fs_l f^s(Y^s)`, so the step is a Newton iteration on `Y^s` alone
//! whose Jacobian is propagated through the chain.

use super::engine::check_state;
use super::imex2::{field_jacobian, MidpointStage};
use super::newton::{newton_solve, NewtonProblem};
use super::{gradient, MicroObserver, SolverConfig, StepStats, Stepper};
use crate::systems::{Part, PhaseState, SeparableSystem};
use crate::tableau::{mr_imim2, Matrix, MgarkTableau, Vector};
use crate::Result;

const SLOW_KINETIC: [Part; 1] = [Part::SlowKinetic];
const FAST_KINETIC: [Part; 1] = [Part::FastKinetic];

#[derive(Clone, Debug, PartialEq)]
pub struct MrImim2 {
    m: usize,
    /// Slow-from-fast and fast-from-slow coupling weights per micro-step.
    sf: Vec<f64>,
    fs: Vec<f64>,
    pub cfg: SolverConfig,
}

impl MrImim2 {
    pub fn new(m: usize, cfg: SolverConfig) -> Result<Self> {
        cfg.validate()?;
        let t: MgarkTableau = mr_imim2(m)?;
        Ok(MrImim2 {
            m,
            sf: t.sf.iter().map(|b| b[(0, 0)]).collect(),
            fs: t.fs.iter().map(|b| b[(0, 0)]).collect(),
            cfg,
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }
}

/// `f^s(Y) = (-V^s_q, T^s_p)`.
fn slow_field(sys: &dyn SeparableSystem, y: &Vector, stats: &mut StepStats) -> Vector {
    let n = y.len() / 2;
    let mut f = Vector::zeros(2 * n);
    if let Some(g) = gradient(sys, Part::SlowPotential, &y.rows(n, n).into_owned(), stats) {
        f.rows_mut(0, n).copy_from(&-g);
    }
    if let Some(g) = gradient(sys, Part::SlowKinetic, &y.rows(0, n).into_owned(), stats) {
        f.rows_mut(n, n).copy_from(&g);
    }
    f
}

struct Chain {
    /// `h sum_l sf_l f^f(Y^{f,l})`.
    coupling: Vector,
    /// Fast part of the step, `y0 + h sum_l f^f(Y^{f,l})`.
    end: Vector,
    slow_field: Vector,
    stages: Vec<Vector>,
    sensitivity: Option<Matrix>,
}

struct SlowStage<'a> {
    scheme: &'a MrImim2,
    sys: &'a dyn SeparableSystem,
    y0: Vector,
    big_h: f64,
    cfg: SolverConfig,
    stats: &'a mut StepStats,
    guesses: Vec<Vector>,
    error: Option<crate::Error>,
}

impl SlowStage<'_> {
    fn chain(&mut self, ys: &Vector, sensitivity: bool) -> Result<Chain> {
        let m = self.scheme.m;
        let n = ys.len() / 2;
        let h = self.big_h / m as f64;
        let fs_val = slow_field(self.sys, ys, self.stats);
        let dfs = sensitivity.then(|| field_jacobian(self.sys, Part::SlowPotential, &SLOW_KINETIC, ys, &self.cfg));
        let mut z = self.y0.clone();
        let mut dz = sensitivity.then(|| Matrix::zeros(2 * n, 2 * n));
        let mut coupling = Vector::zeros(2 * n);
        let mut dcoupling = sensitivity.then(|| Matrix::zeros(2 * n, 2 * n));
        let mut stages = Vec::with_capacity(m);
        for l in 0..m {
            let shift = self.big_h * self.scheme.fs[l];
            let start = &z + &fs_val * shift;
            let guess = self.guesses.get(l).cloned().unwrap_or_else(|| start.clone());
            let mut stage = MidpointStage {
                sys: self.sys,
                kinetic: &FAST_KINETIC,
                start: &start,
                n,
                h,
                cfg: &self.cfg,
                stats: &mut *self.stats,
            };
            let (y, iters) = newton_solve(&mut stage, guess, &self.cfg)?;
            self.stats.newton_iters += iters;
            // h f^f(Y) = 2 (Y - start)
            let incr = (&y - &start) * 2.0;
            coupling.axpy(self.scheme.sf[l], &incr, 1.0);
            if let (Some(dfs), Some(dz), Some(dc)) = (&dfs, dz.as_mut(), dcoupling.as_mut()) {
                let dstart = &*dz + dfs * shift;
                let jf = field_jacobian(self.sys, Part::FastPotential, &FAST_KINETIC, &y, &self.cfg);
                let a = Matrix::identity(2 * n, 2 * n) - jf * (0.5 * h);
                let dy = a.lu().solve(&dstart).ok_or(crate::Error::SingularJacobian { iters })?;
                let dincr = (dy - &dstart) * 2.0;
                *dc += &dincr * self.scheme.sf[l];
                *dz += dincr;
            }
            z += incr;
            stages.push(y);
        }
        let sensitivity = dcoupling.map(|dc| {
            let dfs = dfs.unwrap();
            Matrix::identity(2 * n, 2 * n) - dfs * (0.5 * self.big_h) - dc
        });
        Ok(Chain {
            coupling,
            end: z,
            slow_field: fs_val,
            stages,
            sensitivity,
        })
    }
}

impl NewtonProblem for SlowStage<'_> {
    fn residual(&mut self, ys: &Vector) -> Vector {
        match self.chain(ys, false) {
            Ok(c) => {
                self.guesses = c.stages;
                ys - &self.y0 - c.slow_field * (0.5 * self.big_h) - c.coupling
            }
            Err(e) => {
                self.error = Some(e);
                Vector::from_element(ys.len(), f64::NAN)
            }
        }
    }

    fn jacobian(&mut self, ys: &Vector) -> Option<Matrix> {
        match self.chain(ys, true) {
            Ok(c) => c.sensitivity,
            Err(e) => {
                self.error = Some(e);
                None
            }
        }
    }
}

impl MrImim2 {
    fn run(
        &self,
        sys: &dyn SeparableSystem,
        y: &PhaseState,
        big_h: f64,
        stats: &mut StepStats,
        observer: &mut MicroObserver<'_>,
    ) -> Result<PhaseState> {
        check_state(sys, y)?;
        stats.base_steps += 1;
        let n = y.dim();
        let y0 = y.to_vector();
        let cfg = self.cfg.for_step(big_h);
        let mut slow = SlowStage {
            scheme: self,
            sys,
            y0: y0.clone(),
            big_h,
            cfg,
            stats,
            guesses: Vec::new(),
            error: None,
        };
        let solved = newton_solve(&mut slow, y0.clone(), &cfg);
        if let Some(e) = slow.error.take() {
            return Err(e);
        }
        let (ys, iters) = solved?;
        slow.stats.newton_iters += iters;
        let chain = slow.chain(&ys, false)?;
        let h = big_h / self.m as f64;
        // the slow increment is spread evenly over the micro grid when observed
        let mut z = y0.clone();
        for (l, stage) in chain.stages.iter().enumerate().take(self.m - 1) {
            let start = &z + &chain.slow_field * (big_h * self.fs[l]);
            z += (stage - &start) * 2.0;
            let shown = &z + &chain.slow_field * (h * (l + 1) as f64);
            observer((l + 1) as f64 / self.m as f64, &PhaseState::from_vector(n, &shown));
        }
        let y1 = PhaseState::from_vector(n, &(chain.end + chain.slow_field * big_h));
        observer(1.0, &y1);
        Ok(y1)
    }
}

impl Stepper for MrImim2 {
    fn name(&self) -> String {
        format!("mr-imim2(M={})", self.m)
    }

    fn step(&self, sys: &dyn SeparableSystem, y: &PhaseState, h: f64, stats: &mut StepStats) -> Result<PhaseState> {
        self.run(sys, y, h, stats, &mut |_, _| {})
    }

    fn step_observed(
        &self,
        sys: &dyn SeparableSystem,
        y: &PhaseState,
        h: f64,
        stats: &mut StepStats,
        observer: &mut MicroObserver<'_>,
    ) -> Result<PhaseState> {
        self.run(sys, y, h, stats, observer)
    }
}
