//! Long-time energy behaviour: the multirate schemes against an unstable
//! step ratio and a non-symplectic method.

use smgark::diagnostics::energy_study;
use smgark::integrators::{ExplicitMidpoint, MrImex2, MrLpfr, SolverConfig, Stepper};
use smgark::systems::{Fpu, FpuParams};

fn main() -> smgark::Result<()> {
    let fpu = Fpu::new(FpuParams::default());
    let y0 = fpu.benchmark_initial_state();
    let runs: Vec<(Box<dyn Stepper>, f64)> = vec![
        (Box::new(MrImex2::new(50, SolverConfig::default())?), 0.1),
        (Box::new(MrLpfr::new(50)?), 0.1),
        (Box::new(MrLpfr::new(1)?), 0.1),
        (Box::new(ExplicitMidpoint), 0.01),
    ];
    for (stepper, h) in &runs {
        let s = energy_study(stepper.as_ref(), &fpu, &y0, *h, 50.0)?;
        let end = match &s.failure {
            Some(f) => format!("failed at t = {:.2}", f.time),
            None => "completed".into(),
        };
        println!(
            "{:14} H = {h}: max |H - H0| {:.3e}, drift slope {:.2e}, max |I - I0| {:.3}, {end}",
            stepper.name(),
            s.max_deviation,
            s.drift_slope,
            s.max_invariant_deviation
        );
    }
    Ok(())
}
