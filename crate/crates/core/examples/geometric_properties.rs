//! Symplecticity and time reversibility measured on the one-step maps
//! themselves, with explicit Euler as the counterexample.

use smgark::composition::{compose_stepper, CompositionWeights};
use smgark::diagnostics::{reversibility_residual, symplecticity_residual};
use smgark::integrators::{ForwardEuler, MrImex2, MrImim2, MrLpfr, SolverConfig, Stepper};
use smgark::systems::{Fpu, FpuParams};

fn main() -> smgark::Result<()> {
    let fpu = Fpu::new(FpuParams::default());
    let y0 = fpu.benchmark_initial_state();
    let cfg = SolverConfig::default();
    let steppers: Vec<Box<dyn Stepper>> = vec![
        Box::new(MrLpfr::new(4)?),
        Box::new(MrImex2::new(5, cfg)?),
        Box::new(MrImim2::new(5, cfg)?),
        Box::new(compose_stepper(MrLpfr::new(2)?, CompositionWeights::triple_jump(2)?)),
        Box::new(ForwardEuler),
    ];
    println!("{:30} {:>14} {:>14}", "scheme", "|J^T S J - S|", "reversibility");
    for s in &steppers {
        println!(
            "{:30} {:14.2e} {:14.2e}",
            s.name(),
            symplecticity_residual(s.as_ref(), &fpu, &y0, 0.01)?,
            reversibility_residual(s.as_ref(), &fpu, &y0, 0.01)?
        );
    }
    Ok(())
}
