//! Stepwise regularisation: near the front H(tau, r) ~ tau^(r b) for the
//! logarithmic kernel, so smoothness grows with distance.

use viscofront::dispersion::Medium;
use viscofront::material::make_log_g;
use viscofront::wavefront::regularization_exponent;

fn main() -> viscofront::Result<()> {
    for b in [1.0, 2.0] {
        let m = Medium::new(make_log_g(1.0, 1.0, b, 1.0, 1.0)?)?;
        for r in [0.5, 1.0, 2.0] {
            let fit = regularization_exponent(&m, r, (1e-4, 1e-3))?;
            println!(
                "b = {b}, r = {r}: exponent {:.4} (r b = {})",
                fit.exponent, fit.expected
            );
        }
    }
    Ok(())
}
