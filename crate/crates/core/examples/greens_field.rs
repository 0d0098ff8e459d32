//! Green's function of a power-law medium by the kernel and direct routes.

use viscofront::dispersion::Medium;
use viscofront::inversion::{greens_field, GreensRoute};
use viscofront::material::make_powerlaw_g;

fn main() -> viscofront::Result<()> {
    let m = Medium::new(make_powerlaw_g(1.0, 1.0, 0.5, 1.0)?)?;
    let times: Vec<f64> = (1..=12).map(|k| 0.25 * k as f64).collect();
    let a = greens_field(&m, &times, &[1.0], GreensRoute::Kernel)?;
    let b = greens_field(&m, &times, &[1.0], GreensRoute::Direct)?;
    for (u, v) in a.values.iter().zip(&b.values) {
        println!(
            "t = {:5.2}: kernel {:.12e}  direct {:.12e}  {}",
            u.t,
            u.u,
            v.u,
            u.flag.as_str()
        );
    }
    Ok(())
}
