//! The wavefront kernel of g(t) = t^(-1/2) / sqrt(pi) is erfc(r / (2 sqrt(tau))).

use statrs::function::erf::erfc;
use viscofront::cm::geometric_grid;
use viscofront::dispersion::Medium;
use viscofront::inversion::wavefront_kernel;
use viscofront::material::make_powerlaw_g;

fn main() -> viscofront::Result<()> {
    let m = Medium::new(make_powerlaw_g(1.0, 1.0, 0.5, 1.0)?)?;
    let taus = geometric_grid(1e-2, 10.0, 2);
    let k = wavefront_kernel(&m, 1.0, &taus)?;
    println!("{:>10} {:>22} {:>22}", "tau", "H", "erfc");
    for (&t, &h) in taus.iter().zip(&k.h) {
        println!("{t:>10.3e} {h:>22.15e} {:>22.15e}", erfc(0.5 / t.sqrt()));
    }
    Ok(())
}
