//! Numerical checks of one-step maps and the benchmark studies.

mod convergence;
mod energy;
mod reference;
mod sweep;

pub use convergence::{convergence_order, ConvergenceResult};
pub use energy::{energy_study, EnergySeries, Oscillatory, RunFailure};
pub use reference::{reference_solution, reference_trajectory, ReferenceConfig};
pub use sweep::{default_sweep_steps, stability_sweep, SweepCell, SweepScheme, SweepTable, SWEEP_OMEGAS};

use crate::integrators::{StepStats, Stepper};
use crate::systems::{momentum_reversal, Fpu, PhaseState, Problem, SeparableSystem};
use crate::tableau::{Matrix, Vector};
use crate::{Error, Result};

/// Relative perturbation of the finite-difference step Jacobian.
pub const FD_STEP: f64 = 1e-6;

/// Which entries of the stacked state `(p, q)` enter an error norm.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComponentMask(pub Vec<bool>);

impl ComponentMask {
    /// Every component of a state of dimension `n`.
    pub fn all(n: usize) -> Self {
        ComponentMask(vec![true; 2 * n])
    }

    /// Positions `q_{0,i}` of the slow variables of the chain. Their
    /// momenta are excluded: the soft springs couple them to the fast phase.
    pub fn fpu_slow(fpu: &Fpu) -> Self {
        let n = fpu.dim();
        ComponentMask((0..2 * n).map(|i| i >= n && (i - n).is_multiple_of(2)).collect())
    }

    /// The slow variables where the problem distinguishes them.
    pub fn slow(problem: &Problem) -> Self {
        match problem {
            Problem::Fpu(f) => Self::fpu_slow(f),
            Problem::Harmonic(h) => Self::all(h.dim()),
        }
    }

    pub fn count(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    /// Max-norm distance over the selected components.
    pub fn distance(&self, a: &PhaseState, b: &PhaseState) -> f64 {
        let (a, b) = (a.to_vector(), b.to_vector());
        self.0
            .iter()
            .zip(a.iter().zip(b.iter()))
            .filter(|(m, _)| **m)
            .map(|(_, (x, y))| (x - y).abs())
            .fold(0.0, f64::max)
    }
}

/// Number of steps of size `h` in `t_end`, rejecting a non-integral ratio.
pub fn steps_for(t_end: f64, h: f64) -> Result<usize> {
    if !(h > 0.0 && h.is_finite() && t_end >= 0.0 && t_end.is_finite()) {
        return Err(Error::Config(format!("need H > 0 and t_end >= 0, got H = {h}, t_end = {t_end}")));
    }
    let ratio = t_end / h;
    let n = ratio.round();
    if (ratio - n).abs() > 1e-9 * n.max(1.0) {
        return Err(Error::NonIntegralSteps(ratio));
    }
    Ok(n as usize)
}

/// Least-squares slope of `y` against `x`.
pub fn fit_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Canonical structure matrix for states stacked as `(p, q)`.
fn structure_matrix(n: usize) -> Matrix {
    let mut j = Matrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        j[(i, n + i)] = 1.0;
        j[(n + i, i)] = -1.0;
    }
    j
}

/// Central-difference Jacobian of one step of `stepper` at `y`.
pub fn step_jacobian(stepper: &dyn Stepper, sys: &dyn SeparableSystem, y: &PhaseState, h: f64) -> Result<Matrix> {
    let n = y.dim();
    let v = y.to_vector();
    let mut m = Matrix::zeros(2 * n, 2 * n);
    let mut stats = StepStats::default();
    let at = |x: Vector, stats: &mut StepStats| -> Result<Vector> {
        Ok(stepper.step(sys, &PhaseState::from_vector(n, &x), h, stats)?.to_vector())
    };
    for j in 0..2 * n {
        let d = FD_STEP * (1.0 + v[j].abs());
        let mut up = v.clone();
        up[j] += d;
        let mut down = v.clone();
        down[j] -= d;
        let col = (at(up, &mut stats)? - at(down, &mut stats)?) / (2.0 * d);
        m.set_column(j, &col);
    }
    Ok(m)
}

/// `max |M^T J M - J|` for the finite-difference step Jacobian `M`.
pub fn symplecticity_residual(stepper: &dyn Stepper, sys: &dyn SeparableSystem, y: &PhaseState, h: f64) -> Result<f64> {
    let m = step_jacobian(stepper, sys, y, h)?;
    let j = structure_matrix(y.dim());
    Ok((m.transpose() * &j * m - j).amax())
}

/// `|rho(Phi_H(rho(Phi_H(y)))) - y|` in the max norm.
pub fn reversibility_residual(stepper: &dyn Stepper, sys: &dyn SeparableSystem, y: &PhaseState, h: f64) -> Result<f64> {
    let mut stats = StepStats::default();
    let y1 = stepper.step(sys, y, h, &mut stats)?;
    let back = stepper.step(sys, &momentum_reversal(&y1), h, &mut stats)?;
    Ok(momentum_reversal(&back).distance(y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrators::{ForwardEuler, MrImex2, MrLpfr, SolverConfig};
    use crate::systems::{FpuParams, Harmonic};

    /// Exact harmonic flow as a stepper.
    struct Exact;

    impl Stepper for Exact {
        fn name(&self) -> String {
            "exact".into()
        }

        fn step(&self, _: &dyn SeparableSystem, y: &PhaseState, h: f64, _: &mut StepStats) -> Result<PhaseState> {
            Ok(Harmonic::new(3.0).flow(y, h))
        }
    }

    #[test]
    fn exact_rotation_is_symplectic() {
        let sys = Harmonic::new(3.0);
        let y = PhaseState::from_slices(&[0.2], &[0.7]);
        assert!(symplecticity_residual(&Exact, &sys, &y, 0.3).unwrap() < 1e-9);
    }

    #[test]
    fn euler_is_not_symplectic() {
        let sys = Harmonic::new(1.0);
        let y = PhaseState::from_slices(&[0.0], &[1.0]);
        // det M = 1 + h^2
        let r = symplecticity_residual(&ForwardEuler, &sys, &y, 0.1).unwrap();
        assert!((r - 0.01).abs() < 1e-8, "{r}");
    }

    #[test]
    fn leapfrog_is_symplectic_on_the_chain() {
        let sys = Fpu::new(FpuParams::default());
        let r = symplecticity_residual(&MrLpfr::new(2).unwrap(), &sys, &sys.benchmark_initial_state(), 0.01).unwrap();
        assert!(r < 1e-6, "{r}");
    }

    #[test]
    fn reversibility() {
        let sys = Fpu::new(FpuParams::default());
        let y = sys.benchmark_initial_state();
        let s = MrImex2::new(5, SolverConfig::default()).unwrap();
        assert!(reversibility_residual(&s, &sys, &y, 0.05).unwrap() < 1e-11);
        assert_eq!(reversibility_residual(&s, &sys, &y, 0.0).unwrap(), 0.0);
        let h = Harmonic::new(1.0);
        let r = reversibility_residual(&ForwardEuler, &h, &PhaseState::from_slices(&[0.0], &[1.0]), 0.1).unwrap();
        assert!(r > 1e-4);
    }

    #[test]
    fn step_counts_must_be_integral() {
        assert_eq!(steps_for(3.0, 0.1).unwrap(), 30);
        assert_eq!(steps_for(0.0, 0.1).unwrap(), 0);
        assert!(matches!(steps_for(1.0, 0.3), Err(Error::NonIntegralSteps(_))));
        assert!(steps_for(1.0, 0.0).is_err());
    }

    #[test]
    fn slow_mask_picks_slow_positions() {
        let m = ComponentMask::fpu_slow(&Fpu::new(FpuParams { m: 2, omega: 5.0 }));
        assert_eq!(m.0, [false, false, false, false, true, false, true, false]);
    }

    #[test]
    fn slope_of_a_power_law() {
        let x: Vec<f64> = [1.0f64, 2.0, 4.0].iter().map(|v| v.ln()).collect();
        let y: Vec<f64> = [1.0f64, 8.0, 64.0].iter().map(|v| v.ln()).collect();
        assert!((fit_slope(&x, &y) - 3.0).abs() < 1e-14);
    }
}
