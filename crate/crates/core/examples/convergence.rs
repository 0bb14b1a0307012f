//! Measured order of the implicit-explicit scheme and of its triple-jump
//! composition on the slow positions of the chain.

use smgark::composition::{compose_stepper, CompositionWeights};
use smgark::diagnostics::{convergence_order, reference_solution, ComponentMask, ReferenceConfig};
use smgark::integrators::{MrImex2, SolverConfig};
use smgark::systems::{Fpu, FpuParams};

fn main() -> smgark::Result<()> {
    let fpu = Fpu::new(FpuParams { m: 3, omega: 50.0 });
    let y0 = fpu.benchmark_initial_state();
    let t_end = 3.0;
    let mask = ComponentMask::fpu_slow(&fpu);
    let reference = reference_solution(
        &fpu,
        &y0,
        t_end,
        &ReferenceConfig {
            mask: Some(mask.clone()),
            ..Default::default()
        },
    )?;
    let steps: Vec<f64> = (5..=9).map(|k| 0.5f64.powi(k)).collect();
    let cfg = SolverConfig::default();

    let base = convergence_order(|_| MrImex2::new(1, cfg), &fpu, &y0, t_end, &steps, &reference, &mask)?;
    print!("mr-imex2\n{}", base.to_csv());

    let tj = CompositionWeights::triple_jump(2)?;
    let composed = convergence_order(
        |_| Ok(compose_stepper(MrImex2::new(1, cfg)?, tj.clone())),
        &fpu,
        &y0,
        t_end,
        &steps,
        &reference,
        &mask,
    )?;
    print!("mr-imex2 + triple jump\n{}", composed.to_csv());
    Ok(())
}
