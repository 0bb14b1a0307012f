//! Non-symplectic single-rate reference maps on the whole Hamiltonian.

use super::engine::check_state;
use super::{gradient_sum, StepStats, Stepper};
use crate::systems::{Part, PhaseState, SeparableSystem};
use crate::tableau::Vector;
use crate::Result;

const POTENTIAL: [Part; 2] = [Part::SlowPotential, Part::FastPotential];
const KINETIC: [Part; 2] = [Part::SlowKinetic, Part::FastKinetic];

/// `(p', q') = (-V_q(q), T_p(p))` with all parts summed.
fn field(sys: &dyn SeparableSystem, y: &PhaseState, stats: &mut StepStats) -> PhaseState {
    let n = y.dim();
    let p = gradient_sum(sys, &POTENTIAL, &y.q, stats).map_or_else(|| Vector::zeros(n), |g| -g);
    let q = gradient_sum(sys, &KINETIC, &y.p, stats).unwrap_or_else(|| Vector::zeros(n));
    PhaseState::new(p, q)
}

fn advance(y: &PhaseState, f: &PhaseState, h: f64) -> PhaseState {
    PhaseState::new(&y.p + &f.p * h, &y.q + &f.q * h)
}

#[derive(Clone, Copy, Debug, Default)]
pub struct ForwardEuler;

impl Stepper for ForwardEuler {
    fn name(&self) -> String {
        "forward-euler".into()
    }

    fn step(&self, sys: &dyn SeparableSystem, y: &PhaseState, h: f64, stats: &mut StepStats) -> Result<PhaseState> {
        check_state(sys, y)?;
        stats.base_steps += 1;
        Ok(advance(y, &field(sys, y, stats), h))
    }
}

/// Classical second-order explicit midpoint rule.
#[derive(Clone, Copy, Debug, Default)]
pub struct ExplicitMidpoint;

impl Stepper for ExplicitMidpoint {
    fn name(&self) -> String {
        "rk2".into()
    }

    fn step(&self, sys: &dyn SeparableSystem, y: &PhaseState, h: f64, stats: &mut StepStats) -> Result<PhaseState> {
        check_state(sys, y)?;
        stats.base_steps += 1;
        let mid = advance(y, &field(sys, y, stats), 0.5 * h);
        Ok(advance(y, &field(sys, &mid, stats), h))
    }
}
