//! Symplecticity, symmetry, explicitness and decoupling of the builtin
//! schemes as coefficient checks.

use smgark::conditions::{is_decoupled_partitioned, is_explicit, is_symmetric, is_symplectic, positive_weights, DEFAULT_TOL};
use smgark::integrators::{PmgarkStepper, SolverConfig};
use smgark::tableau::{mr_imex2, mr_imim2, mr_lpfr};

fn main() -> smgark::Result<()> {
    let schemes = [
        ("mr-lpfr", mr_lpfr(4)?),
        ("mr-imex2", mr_imex2(4)?.partitioned()),
        ("mr-imim2", mr_imim2(4)?.partitioned()),
    ];
    println!("scheme     symplectic  symmetric  explicit  decoupled  positive  stage groups");
    for (name, t) in schemes {
        let sp = is_symplectic(&t, DEFAULT_TOL);
        let sy = is_symmetric(&t, DEFAULT_TOL);
        let groups = PmgarkStepper::new(t.clone(), SolverConfig::default())?.group_sizes();
        let largest = groups.iter().max().copied().unwrap_or(0);
        println!(
            "{name:10} {:10.1e}  {:9.1e}  {:8}  {:9}  {:8}  {} solves, largest {largest}",
            sp.max_residual(),
            sy.max_residual(),
            is_explicit(&t),
            is_decoupled_partitioned(&t),
            positive_weights(&t),
            groups.len(),
        );
    }

    // moving one weight breaks symplecticity
    let mut t = mr_lpfr(2)?;
    t.tilde.slow.b[0] += 0.1;
    let sp = is_symplectic(&t, DEFAULT_TOL);
    println!("perturbed mr-lpfr fails: {:?}", sp.failing().map(|e| e.id.as_str()).collect::<Vec<_>>());
    Ok(())
}
