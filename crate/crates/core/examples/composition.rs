//! Composition weights, their substep counts, and composing both a tableau
//! and a stepper.

use smgark::composition::{advanced_composition, compose_stepper, compose_tableau, CompositionWeights, Family};
use smgark::conditions::{is_symmetric, is_symplectic, DEFAULT_TOL};
use smgark::integrators::{MrLpfr, StepStats, Stepper};
use smgark::systems::{Fpu, FpuParams};
use smgark::tableau::mr_lpfr;

fn main() -> smgark::Result<()> {
    println!("family  order  substeps  in window  order residual");
    for family in [
        Family::TripleJump,
        Family::Suzuki,
        Family::AdvancedComposition { in_window: false },
        Family::AdvancedComposition { in_window: true },
    ] {
        for order in [4, 6, 8] {
            let w = family.weights(order)?;
            println!(
                "{:6}  {order:5}  {:8}  {:9}  {:.1e}",
                family.name(),
                w.r(),
                w.stays_in_window(),
                w.order_residual()
            );
        }
    }

    let tj = CompositionWeights::triple_jump(2)?;
    println!("triple jump: {:?}", tj.gammas());

    let t = compose_tableau(&mr_lpfr(2)?, &tj);
    println!(
        "composed mr-lpfr: {} micro-steps, symplectic {}, symmetric {}",
        t.m(),
        is_symplectic(&t, DEFAULT_TOL).pass(),
        is_symmetric(&t, DEFAULT_TOL).pass()
    );

    let fpu = Fpu::new(FpuParams::default());
    let y0 = fpu.benchmark_initial_state();
    let stepper = compose_stepper(MrLpfr::new(2)?, advanced_composition(6, true)?);
    let mut stats = StepStats::default();
    stepper.step(&fpu, &y0, 0.01, &mut stats)?;
    println!("{}: {} base steps per macro-step", stepper.name(), stats.base_steps);
    Ok(())
}
