//! Complete monotonicity checks and spectral measures.

use viscofront::cm::{check_bernstein_pair, check_cm, geometric_grid, CmFunction, LogGrid};

fn main() -> viscofront::Result<()> {
    let grid = geometric_grid(1e-2, 1e2, 4);
    let f = CmFunction::sum(vec![
        CmFunction::power_law(1.0, 0.3)?,
        CmFunction::exponential(2.0, 5.0)?,
    ]);
    let rep = check_cm(|t| f.eval(t).unwrap(), &grid, 4);
    println!("power law + exponential: CM up to order 4 = {}", rep.pass());

    let not_cm = check_cm(|x| x / (x + 1.0), &grid, 4);
    println!(
        "x/(x+1): first failing order = {:?}",
        not_cm.first_failure()
    );
    // 1/(x(x+1)) transforms the non-decreasing 1 - e^{-t}; 1/(x+1) transforms e^{-t}.
    let rising = check_bernstein_pair(|x| 1.0 / (x * (x + 1.0)), &grid, 4);
    let falling = check_bernstein_pair(|x| 1.0 / (x + 1.0), &grid, 4);
    println!(
        "pair check: 1/(x(x+1)) {}, 1/(x+1) {}",
        rising.pass(),
        falling.pass()
    );

    let log = CmFunction::logarithmic(1.0, 1.0, 1.0)?;
    let mu = log.spectral_measure(&LogGrid::for_scale(1.0))?;
    for t in [0.1, 1.0, 10.0] {
        println!(
            "t = {t}: closed form {:.10}, via measure {:.10}",
            log.eval(t)?,
            mu.eval(t).value
        );
    }
    Ok(())
}
