//! Jump criterion and jump amplitude for a standard linear solid.

use viscofront::dispersion::Medium;
use viscofront::inversion::greens_u_direct;
use viscofront::material::make_zener;
use viscofront::wavefront::{jump_amplitude, jump_criterion};

fn main() -> viscofront::Result<()> {
    let m = Medium::new(make_zener(1.0, 1.0, 1.0, 1.0)?)?;
    let c = jump_criterion(&m);
    println!("verdict: {:?}", c.verdict);
    let a = jump_amplitude(&m, 1.0)?;
    println!("jump at r = 1: {:.10}", a.value);
    println!("  via J'(0+): {:.10}", a.via_creep_rate.unwrap_or(f64::NAN));
    println!("  via G'(0+): {:.10}", a.via_relaxation.unwrap_or(f64::NAN));
    let front = 1.0 / m.c0();
    for tau in [1e-1, 1e-2, 1e-3, 1e-4] {
        let u = greens_u_direct(&m, front + tau, 1.0)?;
        println!("u(front + {tau:e}, 1) = {:.10}", u.u);
    }
    Ok(())
}
