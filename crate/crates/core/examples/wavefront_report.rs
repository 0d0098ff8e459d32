//! Full wavefront report for a composite kernel read from TOML.

use viscofront::config::RunConfig;
use viscofront::dispersion::Medium;
use viscofront::wavefront::{wavefront_report, ReportOptions};

const CONFIG: &str = r#"
[model]
kind = "composite_g"
c0 = 1.0
rho = 1.0
kernels = [
  { kind = "power_law", amplitude = 0.5, exponent = 0.4 },
  { kind = "exponential", weight = 1.0, rate = 2.0 },
]
"#;

fn main() -> viscofront::Result<()> {
    let cfg = RunConfig::parse(CONFIG, "inline")?;
    let m = Medium::new(cfg.build_model()?)?;
    let report = wavefront_report(&m, &ReportOptions::for_medium(&m, 1.0))?;
    print!("{}", report.to_text());
    Ok(())
}
