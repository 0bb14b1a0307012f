use std::ops::ControlFlow;

use super::{fit_slope, steps_for};
use crate::integrators::{drive, DriveOptions, StepStats, Stepper};
use crate::systems::{Fpu, Harmonic, PhaseState, Problem, SeparableSystem};
use crate::{Error, Result};

/// Systems with a stiff oscillatory energy `I = I_1 + ... + I_m`.
pub trait Oscillatory: SeparableSystem {
    /// `(I_1..I_m, I)`.
    fn oscillatory_energy(&self, y: &PhaseState) -> (Vec<f64>, f64);
}

impl Oscillatory for Fpu {
    fn oscillatory_energy(&self, y: &PhaseState) -> (Vec<f64>, f64) {
        Fpu::oscillatory_energy(self, y)
    }
}

/// The oscillator reports its total energy.
impl Oscillatory for Harmonic {
    fn oscillatory_energy(&self, y: &PhaseState) -> (Vec<f64>, f64) {
        let e = self.hamiltonian(y);
        (vec![e], e)
    }
}

impl Oscillatory for Problem {
    fn oscillatory_energy(&self, y: &PhaseState) -> (Vec<f64>, f64) {
        Problem::oscillatory_energy(self, y)
    }
}

/// Where and why a run stopped early.
#[derive(Clone, Debug, PartialEq)]
pub struct RunFailure {
    pub step: usize,
    pub time: f64,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnergySeries {
    pub times: Vec<f64>,
    pub hamiltonian: Vec<f64>,
    /// One row per time: `I_1..I_m, I`.
    pub oscillatory: Vec<Vec<f64>>,
    /// Least-squares slope of `H(t) - H(0)` against `t`.
    pub drift_slope: f64,
    /// `max |H(t) - H(0)|`; infinite after a blow-up.
    pub max_deviation: f64,
    /// Largest `|I(t) - I(0)|`.
    pub max_invariant_deviation: f64,
    pub failure: Option<RunFailure>,
    pub stats: StepStats,
}

impl EnergySeries {
    fn from_states<S: Oscillatory + ?Sized>(sys: &S, times: Vec<f64>, states: &[PhaseState]) -> Self {
        let hamiltonian: Vec<f64> = states.iter().map(|y| sys.hamiltonian(y)).collect();
        let oscillatory: Vec<Vec<f64>> = states
            .iter()
            .map(|y| {
                let (mut parts, total) = sys.oscillatory_energy(y);
                parts.push(total);
                parts
            })
            .collect();
        let h0 = hamiltonian.first().copied().unwrap_or(0.0);
        let drift: Vec<f64> = hamiltonian.iter().map(|h| h - h0).collect();
        let drift_slope = if times.len() > 1 { fit_slope(&times, &drift) } else { 0.0 };
        let max_deviation = drift.iter().map(|d| d.abs()).fold(0.0, f64::max);
        let i0 = oscillatory.first().and_then(|r| r.last()).copied().unwrap_or(0.0);
        let max_invariant_deviation = oscillatory
            .iter()
            .filter_map(|r| r.last())
            .map(|i| (i - i0).abs())
            .fold(0.0, f64::max);
        EnergySeries {
            times,
            hamiltonian,
            oscillatory,
            drift_slope,
            max_deviation,
            max_invariant_deviation,
            failure: None,
            stats: StepStats::default(),
        }
    }

    /// Energies along a given trajectory sampled at `times`.
    pub fn along<S: Oscillatory + ?Sized>(sys: &S, times: Vec<f64>, states: &[PhaseState]) -> Self {
        Self::from_states(sys, times, states)
    }

    /// `t,H,I_1..I_m,I`.
    pub fn to_csv(&self) -> String {
        let m = self.oscillatory.first().map_or(1, |r| r.len()) - 1;
        let mut s = String::from("t,H");
        for j in 1..=m {
            s += &format!(",I_{j}");
        }
        s += ",I\n";
        for ((t, h), row) in self.times.iter().zip(&self.hamiltonian).zip(&self.oscillatory) {
            s += &format!("{t:.16e},{h:.16e}");
            for v in row {
                s += &format!(",{v:.16e}");
            }
            s.push('\n');
        }
        s
    }
}

/// Records `H` and the oscillatory energies on the macro grid up to
/// `t_end`. A failing step ends the series early; the failure is kept in
/// the result.
pub fn energy_study<S: Oscillatory>(
    stepper: &dyn Stepper,
    sys: &S,
    y0: &PhaseState,
    h: f64,
    t_end: f64,
) -> Result<EnergySeries> {
    let n = steps_for(t_end, h)?;
    let mut times = Vec::with_capacity(n + 1);
    let mut states = Vec::with_capacity(n + 1);
    let opts = DriveOptions {
        fuse_kicks: true,
        ..Default::default()
    };
    let run = drive(stepper, sys, y0, h, n, &opts, &mut |t: f64, y: &PhaseState, _: &StepStats| {
        times.push(t);
        states.push(y.clone());
        ControlFlow::Continue(())
    });
    let (failure, stats) = match run {
        Ok((_, stats)) => (None, stats),
        Err(Error::StepFailed { index, time, source }) => (
            Some(RunFailure {
                step: index,
                time,
                message: source.to_string(),
            }),
            StepStats::default(),
        ),
        Err(e) => return Err(e),
    };
    let mut series = EnergySeries::from_states(sys, times, &states);
    if failure.is_some() {
        series.max_deviation = f64::INFINITY;
    }
    series.failure = failure;
    series.stats = stats;
    Ok(series)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrators::{ExplicitMidpoint, MrLpfr};
    use crate::systems::FpuParams;

    #[test]
    fn leapfrog_keeps_the_energy_of_the_oscillator() {
        let sys = Harmonic::new(2.0);
        let s = energy_study(&MrLpfr::new(1).unwrap(), &sys, &PhaseState::from_slices(&[0.0], &[1.0]), 0.05, 20.0).unwrap();
        assert_eq!(s.times.len(), 401);
        assert!(s.max_deviation < 0.01 && s.drift_slope.abs() < 1e-4);
        assert!(s.failure.is_none());
        assert!(s.to_csv().starts_with("t,H,I_1,I\n"));
    }

    #[test]
    fn unstable_runs_are_recorded_not_raised() {
        let sys = Fpu::new(FpuParams::default());
        let s = energy_study(&MrLpfr::new(1).unwrap(), &sys, &sys.benchmark_initial_state(), 0.1, 220.0).unwrap();
        let f = s.failure.as_ref().expect("blows up");
        assert!(f.time < 220.0);
        assert!(s.max_deviation > 1.0);
    }

    #[test]
    fn explicit_midpoint_drifts() {
        let sys = Harmonic::new(1.0);
        let s = energy_study(&ExplicitMidpoint, &sys, &PhaseState::from_slices(&[0.0], &[1.0]), 0.1, 50.0).unwrap();
        assert!(s.drift_slope.abs() > 1e-5);
    }
}
