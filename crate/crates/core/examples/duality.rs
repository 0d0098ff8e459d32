//! Relaxation modulus from a creep compliance by solving (G * dJ)(t) = 1.

use viscofront::material::{make_zener, solve_duality, DualityOptions, ModelSpec};

fn main() -> viscofront::Result<()> {
    let model = make_zener(1.0, 1.0, 1.0, 1.0)?;
    let ModelSpec::Compliance(j) = &model.spec else {
        unreachable!("zener is a compliance model")
    };
    let g = solve_duality(j, &DualityOptions::for_compliance(j))?;
    println!("residual {:.3e}, G'(0+) = {:.8}", g.residual, g.g_prime0);
    for (&t, &v) in g.times.iter().zip(&g.values).step_by(256) {
        let exact = 0.5 + 0.5 * (-2.0 * t).exp();
        println!("t = {t:6.3}: G = {v:.12} (exact {exact:.12})");
    }
    Ok(())
}
