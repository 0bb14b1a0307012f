//! Order-condition residuals of the builtin schemes, and what a corrupted
//! weight looks like.

use smgark::conditions::{order_report, order_report_flattened, DEFAULT_TOL};
use smgark::tableau::{mr_imex2, mr_imim2, mr_lpfr};

fn main() -> smgark::Result<()> {
    let schemes = [
        ("mr-lpfr", mr_lpfr(4)?),
        ("mr-imex2", mr_imex2(4)?.partitioned()),
        ("mr-imim2", mr_imim2(4)?.partitioned()),
    ];
    for (name, t) in &schemes {
        let r = order_report(t, 3, DEFAULT_TOL);
        let worst = |p: &str| r.select(p).map(|e| e.residual.abs()).fold(0.0, f64::max);
        println!(
            "{name:9} {} rows  order 1: {:.1e}  order 2: {:.1e}  order 3: {:.1e}",
            r.entries.len(),
            worst("p1"),
            worst("p2"),
            worst("p3")
        );
        let flat = order_report_flattened(t, 2, DEFAULT_TOL);
        assert!(flat.pass(), "{name}: monolithic rows disagree");
    }

    let mut t = mr_lpfr(2)?;
    t.bar.slow.b[0] = 0.6;
    let r = order_report(&t, 2, DEFAULT_TOL);
    for e in r.failing() {
        println!("corrupted: {} lhs {:.3} rhs {:.3}", e.id, e.lhs, e.rhs);
    }
    Ok(())
}
