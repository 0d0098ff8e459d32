//! H(tau, r) <= exp(-g(tau) r) when -t g'(t) is non-increasing; a single
//! exponential kernel violates the hypothesis and is refused.

use viscofront::cm::{geometric_grid, CmFunction};
use viscofront::dispersion::Medium;
use viscofront::material::{make_direct, make_log_g};
use viscofront::wavefront::upper_bound_check;

fn main() -> viscofront::Result<()> {
    let taus = geometric_grid(1e-4, 1e-1, 4);
    let m = Medium::new(make_log_g(1.0, 1.0, 1.0, 1.0, 1.0)?)?;
    let b = upper_bound_check(&m, &[0.5, 1.0, 2.0], &taus)?;
    println!(
        "log kernel: max violation {:.3e}, displayed bound {:?}",
        b.max_violation, b.displayed_bound_violation
    );

    let atom = Medium::new(make_direct(
        1.0,
        CmFunction::exponential(1.0, 1.0)?,
        1.0,
        "single atom",
    )?)?;
    match upper_bound_check(&atom, &[1.0], &taus) {
        Err(e) => println!("single atom: {e}"),
        Ok(b) => println!("single atom unexpectedly checked: {b:?}"),
    }
    Ok(())
}
