//! Fixed-step time loop.

use std::ops::ControlFlow;

use super::{KickCache, StepStats, Stepper};
use crate::systems::{PhaseState, SeparableSystem};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DriveOptions {
    /// Reuse the closing slow kick of one step as the opening kick of the next.
    pub fuse_kicks: bool,
    /// Also report states on the micro grid inside each macro-step.
    pub micro: bool,
    pub t0: f64,
}

/// Called with the time, the state and the cumulative counters after each
/// reported point. Micro-grid points of a step are reported once the step
/// has finished.
pub trait Observer {
    fn observe(&mut self, t: f64, y: &PhaseState, stats: &StepStats) -> ControlFlow<()>;
}

impl<F: FnMut(f64, &PhaseState, &StepStats) -> ControlFlow<()>> Observer for F {
    fn observe(&mut self, t: f64, y: &PhaseState, stats: &StepStats) -> ControlFlow<()> {
        self(t, y, stats)
    }
}

#[derive(Clone, Debug, Default)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<PhaseState>,
    /// Counters accumulated up to each point.
    pub stats: Vec<StepStats>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<&PhaseState> {
        self.states.last()
    }

    pub fn total(&self) -> StepStats {
        self.stats.last().copied().unwrap_or_default()
    }
}

/// Takes `n_steps` steps of size `h` from `y0`, reporting `t0` first.
/// Returns the last state and the counters; an observer break ends the
/// run early.
pub fn drive(
    stepper: &dyn Stepper,
    sys: &dyn SeparableSystem,
    y0: &PhaseState,
    h: f64,
    n_steps: usize,
    opts: &DriveOptions,
    observer: &mut dyn Observer,
) -> Result<(PhaseState, StepStats)> {
    let mut stats = StepStats::default();
    let mut cache = KickCache::default();
    let mut y = y0.clone();
    let mut micro = Vec::new();
    if observer.observe(opts.t0, &y, &stats).is_break() {
        return Ok((y, stats));
    }
    for k in 0..n_steps {
        let t = opts.t0 + k as f64 * h;
        let fail = |e: Error| Error::StepFailed {
            index: k,
            time: t,
            source: Box::new(e),
        };
        micro.clear();
        y = if opts.micro {
            stepper
                .step_observed(sys, &y, h, &mut stats, &mut |f, s| micro.push((f, s.clone())))
                .map_err(fail)?
        } else if opts.fuse_kicks {
            stepper.step_fused(sys, &y, h, &mut cache, &mut stats).map_err(fail)?
        } else {
            stepper.step(sys, &y, h, &mut stats).map_err(fail)?
        };
        if !y.is_finite() {
            return Err(fail(Error::NonFinite));
        }
        // the last observation is the step result itself
        micro.pop();
        for (f, s) in &micro {
            if observer.observe(t + f * h, s, &stats).is_break() {
                return Ok((y, stats));
            }
        }
        let t1 = opts.t0 + (k + 1) as f64 * h;
        if observer.observe(t1, &y, &stats).is_break() {
            break;
        }
    }
    Ok((y, stats))
}

/// Records every reported point.
pub fn integrate(
    stepper: &dyn Stepper,
    sys: &dyn SeparableSystem,
    y0: &PhaseState,
    h: f64,
    n_steps: usize,
    opts: &DriveOptions,
) -> Result<Trajectory> {
    let mut tr = Trajectory::default();
    drive(stepper, sys, y0, h, n_steps, opts, &mut |t: f64, y: &PhaseState, s: &StepStats| {
        tr.times.push(t);
        tr.states.push(y.clone());
        tr.stats.push(*s);
        ControlFlow::Continue(())
    })?;
    Ok(tr)
}

pub fn integrate_final(
    stepper: &dyn Stepper,
    sys: &dyn SeparableSystem,
    y0: &PhaseState,
    h: f64,
    n_steps: usize,
    opts: &DriveOptions,
) -> Result<(PhaseState, StepStats)> {
    drive(stepper, sys, y0, h, n_steps, opts, &mut |_: f64, _: &PhaseState, _: &StepStats| {
        ControlFlow::Continue(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrators::{ForwardEuler, MrImex2, MrLpfr, SolverConfig};
    use crate::systems::{Fpu, FpuParams, Harmonic};

    #[test]
    fn records_initial_and_every_step() {
        let sys = Fpu::new(FpuParams::default());
        let tr = integrate(
            &MrLpfr::new(10).unwrap(),
            &sys,
            &sys.benchmark_initial_state(),
            0.1,
            10,
            &DriveOptions::default(),
        )
        .unwrap();
        assert_eq!(tr.len(), 11);
        assert!((tr.times[10] - 1.0).abs() < 1e-15);
        assert_eq!(tr.total().base_steps, 10);
    }

    #[test]
    fn micro_points_are_interleaved() {
        let sys = Fpu::new(FpuParams::default());
        let opts = DriveOptions {
            micro: true,
            ..Default::default()
        };
        let tr = integrate(&MrLpfr::new(4).unwrap(), &sys, &sys.benchmark_initial_state(), 0.1, 2, &opts).unwrap();
        assert_eq!(tr.len(), 9);
        assert!(tr.times.windows(2).all(|w| w[1] > w[0]));
        assert!((tr.times[3] - 0.075).abs() < 1e-15);
    }

    #[test]
    fn fused_and_plain_runs_agree() {
        let sys = Fpu::new(FpuParams::default());
        let s = MrImex2::new(5, SolverConfig::default()).unwrap();
        let y0 = sys.benchmark_initial_state();
        let fused = DriveOptions {
            fuse_kicks: true,
            ..Default::default()
        };
        let (a, sa) = integrate_final(&s, &sys, &y0, 0.1, 10, &fused).unwrap();
        let (b, sb) = integrate_final(&s, &sys, &y0, 0.1, 10, &DriveOptions::default()).unwrap();
        assert_eq!(a, b);
        assert_eq!((sa.slow_force_evals, sb.slow_force_evals), (11, 20));
    }

    #[test]
    fn observer_can_stop_the_run() {
        let sys = Harmonic::new(1.0);
        let mut seen = 0;
        let (_, stats) = drive(
            &MrLpfr::new(1).unwrap(),
            &sys,
            &PhaseState::from_slices(&[0.0], &[1.0]),
            0.1,
            100,
            &DriveOptions::default(),
            &mut |_: f64, _: &PhaseState, _: &StepStats| {
                seen += 1;
                if seen == 4 {
                    ControlFlow::Break(())
                } else {
                    ControlFlow::Continue(())
                }
            },
        )
        .unwrap();
        assert_eq!(stats.base_steps, 3);
    }

    #[test]
    fn blow_up_is_reported_with_its_step() {
        let sys = Harmonic::new(1e3);
        let err = integrate_final(
            &ForwardEuler,
            &sys,
            &PhaseState::from_slices(&[0.0], &[1.0]),
            0.1,
            100_000,
            &DriveOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::StepFailed { .. }), "{err}");
    }
}
