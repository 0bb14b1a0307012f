//! Error against step size for increasingly stiff chains.

use smgark::composition::{compose_stepper, CompositionWeights};
use smgark::diagnostics::{stability_sweep, ReferenceConfig, SweepScheme};
use smgark::integrators::{MrImex2, SolverConfig};

fn main() -> smgark::Result<()> {
    let cfg = SolverConfig::default();
    let schemes = vec![
        SweepScheme::new("mr-imex2", MrImex2::new(1, cfg)?),
        SweepScheme::new("mr-imex2+tj4", compose_stepper(MrImex2::new(1, cfg)?, CompositionWeights::triple_jump(2)?)),
    ];
    let omegas = [50.0, 1000.0];
    let steps: Vec<f64> = (4..=8).map(|k| 0.5f64.powi(k)).collect();
    let table = stability_sweep(&schemes, &omegas, &steps, 1.0, 3, &ReferenceConfig::default())?;
    print!("{}", table.to_csv());
    for s in &schemes {
        for &w in &omegas {
            println!("{} at omega {w}: slope {:.2}", s.name, table.slope(&s.name, w, steps[4], steps[0]));
        }
    }
    Ok(())
}
