//! Runs the three multirate schemes on the chain and compares the fast
//! positions on the micro grid with a reference trajectory.

use smgark::diagnostics::{reference_trajectory, ReferenceConfig};
use smgark::integrators::{integrate, DriveOptions, MrImex2, MrImim2, MrLpfr, SolverConfig, Stepper};
use smgark::systems::{Fpu, FpuParams, SeparableSystem};

fn main() -> smgark::Result<()> {
    let fpu = Fpu::new(FpuParams::default());
    let y0 = fpu.benchmark_initial_state();
    let cfg = SolverConfig::default();
    let (h, n) = (0.1, 10);

    let opts = DriveOptions {
        micro: true,
        ..Default::default()
    };
    let steppers: Vec<Box<dyn Stepper>> = vec![
        Box::new(MrLpfr::new(50)?),
        Box::new(MrImex2::new(50, cfg)?),
        Box::new(MrImim2::new(50, cfg)?),
    ];

    let reference = reference_trajectory(&fpu, &y0, 0.002, 500, &ReferenceConfig::default())?;
    for s in &steppers {
        let tr = integrate(s.as_ref(), &fpu, &y0, h, n, &opts)?;
        let fast_dev = tr
            .states
            .iter()
            .zip(&reference)
            .flat_map(|(a, b)| (0..fpu.dim()).skip(1).step_by(2).map(move |i| (a.q[i] - b.q[i]).abs()))
            .fold(0.0, f64::max);
        let total = tr.total();
        println!(
            "{:10} {} points, fast-position deviation {:.2e}, {} slow / {} fast force evaluations",
            s.name(),
            tr.len(),
            fast_dev,
            total.slow_force_evals,
            total.fast_force_evals
        );
    }
    Ok(())
}
