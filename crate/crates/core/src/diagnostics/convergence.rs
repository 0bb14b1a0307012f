use rayon::prelude::*;

use super::{fit_slope, steps_for, ComponentMask};
use crate::integrators::{integrate_final, DriveOptions, Stepper};
use crate::systems::{PhaseState, SeparableSystem};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceResult {
    /// Strictly decreasing.
    pub step_sizes: Vec<f64>,
    pub errors: Vec<f64>,
    /// Least-squares slope of `log error` against `log H`.
    pub slope: f64,
    pub component_mask: ComponentMask,
}

impl ConvergenceResult {
    /// `H,error` rows and a closing `slope` row.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("H,error\n");
        for (h, e) in self.step_sizes.iter().zip(&self.errors) {
            s += &format!("{h:.16e},{e:.16e}\n");
        }
        s += &format!("slope,{:.16e}\n", self.slope);
        s
    }
}

/// Integrates to `t_end` with a stepper built for each step size and fits
/// the order from the masked max-norm errors against `reference`.
pub fn convergence_order<S, F>(
    make: F,
    sys: &dyn SeparableSystem,
    y0: &PhaseState,
    t_end: f64,
    step_sizes: &[f64],
    reference: &PhaseState,
    mask: &ComponentMask,
) -> Result<ConvergenceResult>
where
    S: Stepper,
    F: Fn(f64) -> Result<S> + Sync,
{
    if step_sizes.len() < 2 || step_sizes.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Config("need at least two strictly decreasing step sizes".into()));
    }
    let counts = step_sizes
        .iter()
        .map(|&h| steps_for(t_end, h))
        .collect::<Result<Vec<_>>>()?;
    let opts = DriveOptions {
        fuse_kicks: true,
        ..Default::default()
    };
    let errors = step_sizes
        .par_iter()
        .zip(&counts)
        .map(|(&h, &n)| {
            let stepper = make(h)?;
            let (y, _) = integrate_final(&stepper, sys, y0, h, n, &opts)?;
            Ok(mask.distance(&y, reference))
        })
        .collect::<Result<Vec<f64>>>()?;
    let lx: Vec<f64> = step_sizes.iter().map(|h| h.ln()).collect();
    let ly: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    Ok(ConvergenceResult {
        step_sizes: step_sizes.to_vec(),
        slope: fit_slope(&lx, &ly),
        errors,
        component_mask: mask.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::composition::{compose_stepper, CompositionWeights};
    use crate::integrators::MrLpfr;
    use crate::systems::Harmonic;

    #[test]
    fn leapfrog_and_its_triple_jump_on_the_oscillator() {
        let sys = Harmonic::new(1.0);
        let y0 = PhaseState::from_slices(&[0.0], &[1.0]);
        let exact = sys.flow(&y0, 1.0);
        let hs: Vec<f64> = (0..5).map(|k| 0.1 * 0.5f64.powi(k)).collect();
        let mask = ComponentMask::all(1);
        let lf = convergence_order(|_| MrLpfr::new(2), &sys, &y0, 1.0, &hs, &exact, &mask).unwrap();
        assert!((lf.slope - 2.0).abs() < 0.1, "{}", lf.slope);
        let tj = convergence_order(
            |_| Ok(compose_stepper(MrLpfr::new(2)?, CompositionWeights::triple_jump(2)?)),
            &sys,
            &y0,
            1.0,
            &hs,
            &exact,
            &mask,
        )
        .unwrap();
        assert!((tj.slope - 4.0).abs() < 0.3, "{}", tj.slope);
        assert!(tj.to_csv().ends_with(&format!("slope,{:.16e}\n", tj.slope)));
    }

    #[test]
    fn rejects_non_integral_step_counts() {
        let sys = Harmonic::new(1.0);
        let y0 = PhaseState::from_slices(&[0.0], &[1.0]);
        let r = convergence_order(|_| MrLpfr::new(1), &sys, &y0, 1.0, &[0.3, 0.1], &y0, &ComponentMask::all(1));
        assert!(matches!(r, Err(Error::NonIntegralSteps(_))));
    }
}
