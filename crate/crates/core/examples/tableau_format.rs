//! Builds the multirate leapfrog tableau, prints it in the text format and
//! reads it back.

use smgark::tableau::{mr_imex2, mr_lpfr, parse_tableau, write_tableau};

fn main() -> smgark::Result<()> {
    let t = mr_lpfr(2)?;
    let text = write_tableau(&t);
    println!("{text}");

    let back = parse_tableau(&text)?;
    assert_eq!(back, t);

    let flat = t.flatten();
    println!(
        "M = {}: {} slow + {} fast stages per half, flattened to {} stages",
        t.m(),
        t.bar.slow.stages(),
        t.bar.fast[0].stages(),
        flat.bar.stages()
    );

    // single-tableau schemes are used for both halves
    let imex = mr_imex2(3)?;
    println!("mr-imex2 with M = 3 has {} micro-steps", imex.m());
    Ok(())
}
