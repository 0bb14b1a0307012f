//! Integrates with a tableau given in the text format, through the generic
//! stepper, and checks it against the exact oscillator flow.

use smgark::conditions::{is_symplectic, order_report, DEFAULT_TOL};
use smgark::integrators::{integrate_final, DriveOptions, PmgarkStepper, SolverConfig};
use smgark::systems::{Harmonic, PhaseState};
use smgark::tableau::{mr_imim2, parse_tableau, write_tableau};

fn main() -> smgark::Result<()> {
    // any tableau file works here; this one is written on the fly
    let text = write_tableau(&mr_imim2(3)?.partitioned());
    let t = parse_tableau(&text)?;
    println!(
        "order 2: {}, symplectic: {}",
        order_report(&t, 2, DEFAULT_TOL).pass(),
        is_symplectic(&t, DEFAULT_TOL).pass()
    );

    let sys = Harmonic::new(4.0).with_slow(1.0);
    let stepper = PmgarkStepper::new(t, SolverConfig::default())?.with_name("from-text");
    let y0 = PhaseState::from_slices(&[0.0], &[1.0]);
    for k in 3..7 {
        let h = 0.5f64.powi(k);
        let n = (2.0 / h) as usize;
        let (y, stats) = integrate_final(&stepper, &sys, &y0, h, n, &DriveOptions::default())?;
        println!(
            "H = {h:<8} error {:.3e}  newton iterations {}",
            y.distance(&sys.flow(&y0, 2.0)),
            stats.newton_iters
        );
    }
    Ok(())
}
