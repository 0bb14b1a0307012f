//! Explicit multirate leapfrog: a slow half kick, `M/2` fast leapfrog
//! micro-steps, a slow drift over the whole macro-step, `M/2` more fast
//! micro-steps and a closing slow half kick.

use super::engine::check_state;
use super::{axpy, gradient, gradient_sum, KickCache, MicroObserver, StepStats, Stepper};
use crate::systems::{Part, PhaseState, SeparableSystem};
use crate::tableau::Vector;
use crate::{Error, Result};

/// `M = 1` is the single-rate leapfrog on the whole Hamiltonian.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MrLpfr {
    m: usize,
}

impl MrLpfr {
    pub fn new(m: usize) -> Result<Self> {
        match m {
            0 => Err(Error::tableau("M must be positive")),
            1 => Ok(MrLpfr { m }),
            m if m % 2 == 1 => Err(Error::OddMultirate(m)),
            m => Ok(MrLpfr { m }),
        }
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
        let (mut p, mut q) = (y.p.clone(), y.q.clone());
        if self.m == 1 {
            let all_v = [Part::SlowPotential, Part::FastPotential];
            let all_t = [Part::SlowKinetic, Part::FastKinetic];
            axpy(&mut p, -0.5 * big_h, &gradient_sum(sys, &all_v, &q, stats));
            axpy(&mut q, big_h, &gradient_sum(sys, &all_t, &p, stats));
            axpy(&mut p, -0.5 * big_h, &gradient_sum(sys, &all_v, &q, stats));
            observer(1.0, &PhaseState::new(p.clone(), q.clone()));
            return Ok(PhaseState::new(p, q));
        }
        let h = big_h / self.m as f64;
        let half = self.m / 2;
        axpy(&mut p, -0.5 * big_h, &cache.slow_gradient(sys, &q, stats));
        // fast force at the current q, shared by adjacent half kicks
        let mut fast: Option<(Vector, Option<Vector>)> = None;
        let mut fast_at = |q: &Vector, stats: &mut StepStats| -> Option<Vector> {
            match &fast {
                Some((fq, g)) if fq == q => g.clone(),
                _ => {
                    let g = gradient(sys, Part::FastPotential, q, stats);
                    fast = Some((q.clone(), g.clone()));
                    g
                }
            }
        };
        let mut micro = |p: &mut Vector, q: &mut Vector, stats: &mut StepStats| {
            axpy(p, -0.5 * h, &fast_at(q, stats));
            axpy(q, h, &gradient(sys, Part::FastKinetic, p, stats));
            axpy(p, -0.5 * h, &fast_at(q, stats));
        };
        for l in 1..=half {
            micro(&mut p, &mut q, stats);
            observer(l as f64 / self.m as f64, &PhaseState::new(p.clone(), q.clone()));
        }
        axpy(&mut q, big_h, &gradient(sys, Part::SlowKinetic, &p, stats));
        for l in half + 1..=self.m {
            micro(&mut p, &mut q, stats);
            if l < self.m {
                observer(l as f64 / self.m as f64, &PhaseState::new(p.clone(), q.clone()));
            }
        }
        axpy(&mut p, -0.5 * big_h, &cache.slow_gradient(sys, &q, stats));
        let y1 = PhaseState::new(p, q);
        observer(1.0, &y1);
        Ok(y1)
    }
}

impl Stepper for MrLpfr {
    fn name(&self) -> String {
        format!("mr-lpfr(M={})", self.m)
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
