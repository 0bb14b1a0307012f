//! The stiff-soft spring chain: its energy split, oscillatory energies and
//! a finite-difference check of every force.

use smgark::systems::{gradient_residual, imex_split, Fpu, FpuParams, Part, SeparableSystem, TwoWaySystem};

fn main() {
    let fpu = Fpu::new(FpuParams { m: 3, omega: 50.0 });
    let y0 = fpu.benchmark_initial_state();
    println!("dimension {}  H(y0) = {:.6}", fpu.dim(), fpu.hamiltonian(&y0));
    for part in Part::ALL {
        let x = if part.is_kinetic() { &y0.p } else { &y0.q };
        println!(
            "{part:?}: energy {:.6}, gradient vs differences {:.1e}",
            fpu.energy(part, x.as_slice()),
            gradient_residual(&fpu, part, x.as_slice(), 1e-6)
        );
    }
    let (parts, total) = fpu.oscillatory_energy(&y0);
    println!("I_j = {parts:?}, I = {total}");

    // the implicit-explicit split moves all kinetic energy to the fast side
    let split = imex_split(fpu.clone());
    let slow = split.f_slow(y0.q.as_slice());
    let fast = split.f_fast(&y0);
    println!("slow field |dp| = {:.3}, fast field |dq| = {:.3}", slow.p.amax(), fast.q.amax());
}
