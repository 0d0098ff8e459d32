//! Attenuation and dispersion of a Zener solid, and the identity linking the
//! compliance route for p g~(p) to the route through the spectral measure of g.

use viscofront::cm::geometric_grid;
use viscofront::dispersion::Medium;
use viscofront::material::make_zener;

fn main() -> viscofront::Result<()> {
    let m = Medium::new(make_zener(1.0, 1.0, 1.0, 1.0)?)?;
    let omega = geometric_grid(1e-2, 1e2, 2);
    let ad = m.attenuation_dispersion(&omega)?;
    println!("{:>10} {:>14} {:>14} {:>14}", "omega", "A", "D", "c");
    for i in 0..omega.len() {
        println!(
            "{:>10.3e} {:>14.6e} {:>14.6e} {:>14.6e}",
            ad.omega[i], ad.attenuation[i], ad.dispersion[i], ad.phase_speed[i]
        );
    }
    let res = m.kk_identity_residual(&geometric_grid(1e-2, 1e2, 8))?;
    println!("identity residual: {res:.3e}");
    Ok(())
}
