//! Fixed-step reference solutions: a symmetric composition of the
//! single-rate leapfrog on the whole Hamiltonian, checked against a rerun
//! at half the step.

use crate::composition::CompositionWeights;
use crate::systems::{Part, PhaseState, SeparableSystem};
use crate::{Error, Result};

use super::{steps_for, ComponentMask};

#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceConfig {
    pub step: f64,
    /// Largest accepted deviation between the run and its half-step rerun.
    pub gate: f64,
    pub weights: CompositionWeights,
    /// Components compared by the gate; all when `None`.
    pub mask: Option<ComponentMask>,
}

impl Default for ReferenceConfig {
    fn default() -> Self {
        ReferenceConfig {
            step: 1e-5,
            gate: 1e-10,
            weights: CompositionWeights::triple_jump(2).expect("valid base order"),
            mask: None,
        }
    }
}

const KINETIC: [Part; 2] = [Part::SlowKinetic, Part::FastKinetic];
const POTENTIAL: [Part; 2] = [Part::SlowPotential, Part::FastPotential];

/// Composed leapfrog with buffers reused across steps and the kicks of
/// adjacent substeps merged.
struct Kernel<'a> {
    sys: &'a dyn SeparableSystem,
    gammas: &'a [f64],
    p: Vec<f64>,
    q: Vec<f64>,
    grad: Vec<f64>,
    acc: Vec<f64>,
}

impl<'a> Kernel<'a> {
    fn new(sys: &'a dyn SeparableSystem, gammas: &'a [f64], y: &PhaseState) -> Self {
        let n = y.dim();
        Kernel {
            sys,
            gammas,
            p: y.p.as_slice().to_vec(),
            q: y.q.as_slice().to_vec(),
            grad: vec![0.0; n],
            acc: vec![0.0; n],
        }
    }

    fn total_gradient(&mut self, parts: &[Part], kinetic: bool) {
        self.acc.fill(0.0);
        let x = if kinetic { &self.p } else { &self.q };
        for &part in parts {
            if self.sys.is_zero(part) {
                continue;
            }
            self.sys.gradient(part, x, &mut self.grad);
            self.acc.iter_mut().zip(&self.grad).for_each(|(a, g)| *a += g);
        }
    }

    fn kick(&mut self, c: f64) {
        self.total_gradient(&POTENTIAL, false);
        self.p.iter_mut().zip(&self.acc).for_each(|(p, g)| *p -= c * g);
    }

    fn drift(&mut self, c: f64) {
        self.total_gradient(&KINETIC, true);
        self.q.iter_mut().zip(&self.acc).for_each(|(q, g)| *q += c * g);
    }

    /// `n` steps of size `h`; the state is synchronised at the end.
    fn advance(&mut self, h: f64, n: usize) {
        if n == 0 {
            return;
        }
        let g = self.gammas;
        let r = g.len();
        self.kick(0.5 * g[0] * h);
        for k in 0..n {
            for i in 0..r {
                self.drift(g[i] * h);
                let next = if i + 1 < r {
                    g[i + 1]
                } else if k + 1 < n {
                    g[0]
                } else {
                    0.0
                };
                self.kick(0.5 * (g[i] + next) * h);
            }
        }
    }

    fn state(&self) -> PhaseState {
        PhaseState::from_slices(&self.p, &self.q)
    }
}

/// States at `t = k * interval`, `k = 0..=samples`, with the reference step.
fn sampled(
    sys: &dyn SeparableSystem,
    y0: &PhaseState,
    interval: f64,
    samples: usize,
    step: f64,
    gammas: &[f64],
) -> Result<Vec<PhaseState>> {
    let per = if interval == 0.0 { 0 } else { steps_for(interval, step)? };
    let mut k = Kernel::new(sys, gammas, y0);
    let mut out = Vec::with_capacity(samples + 1);
    out.push(y0.clone());
    for _ in 0..samples {
        k.advance(step, per);
        let y = k.state();
        if !y.is_finite() {
            return Err(Error::NonFinite);
        }
        out.push(y);
    }
    Ok(out)
}

/// Reference states on the grid `t = k * interval`, `k = 0..=samples`.
/// Fails when the run and its half-step rerun differ by more than the gate
/// on any grid point.
pub fn reference_trajectory(
    sys: &dyn SeparableSystem,
    y0: &PhaseState,
    interval: f64,
    samples: usize,
    cfg: &ReferenceConfig,
) -> Result<Vec<PhaseState>> {
    let g = cfg.weights.gammas();
    let (coarse, fine) = rayon::join(
        || sampled(sys, y0, interval, samples, cfg.step, g),
        || sampled(sys, y0, interval, samples, 0.5 * cfg.step, g),
    );
    let (coarse, fine) = (coarse?, fine?);
    let deviation = coarse
        .iter()
        .zip(&fine)
        .map(|(a, b)| match &cfg.mask {
            Some(m) => m.distance(a, b),
            None => a.distance(b),
        })
        .fold(0.0, f64::max);
    if deviation.is_nan() || deviation > cfg.gate {
        return Err(Error::Reference {
            deviation,
            tol: cfg.gate,
        });
    }
    Ok(fine)
}

/// Reference state at `t_end`.
pub fn reference_solution(sys: &dyn SeparableSystem, y0: &PhaseState, t_end: f64, cfg: &ReferenceConfig) -> Result<PhaseState> {
    let mut states = reference_trajectory(sys, y0, t_end, 1, cfg)?;
    Ok(states.pop().expect("two samples"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::composition::compose_stepper;
    use crate::integrators::{MrLpfr, StepStats, Stepper};
    use crate::systems::{Fpu, FpuParams, Harmonic};

    #[test]
    fn kernel_is_the_composed_leapfrog() {
        let sys = Fpu::new(FpuParams::default());
        let y0 = sys.benchmark_initial_state();
        let w = CompositionWeights::triple_jump(2).unwrap();
        let s = compose_stepper(MrLpfr::new(1).unwrap(), w.clone());
        let mut y = y0.clone();
        for _ in 0..5 {
            y = s.step(&sys, &y, 0.001, &mut StepStats::default()).unwrap();
        }
        let mut k = Kernel::new(&sys, w.gammas(), &y0);
        k.advance(0.001, 5);
        assert!(k.state().distance(&y) < 1e-13);
    }

    #[test]
    fn harmonic_reference_matches_the_exact_flow() {
        let sys = Harmonic::new(1.0);
        let y0 = PhaseState::from_slices(&[0.3], &[1.0]);
        let y = reference_solution(&sys, &y0, 1.0, &ReferenceConfig::default()).unwrap();
        assert!(y.distance(&sys.flow(&y0, 1.0)) < 1e-10);
    }

    #[test]
    fn zero_time_returns_the_initial_state() {
        let sys = Harmonic::new(1.0);
        let y0 = PhaseState::from_slices(&[0.3], &[1.0]);
        assert_eq!(reference_solution(&sys, &y0, 0.0, &ReferenceConfig::default()).unwrap(), y0);
    }

    #[test]
    fn a_coarse_reference_fails_its_gate() {
        let sys = Harmonic::new(1.0);
        let cfg = ReferenceConfig {
            step: 0.1,
            ..Default::default()
        };
        let e = reference_solution(&sys, &PhaseState::from_slices(&[0.0], &[1.0]), 1.0, &cfg).unwrap_err();
        assert!(matches!(e, Error::Reference { .. }));
    }
}
