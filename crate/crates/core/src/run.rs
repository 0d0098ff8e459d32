//! Task execution for the command-line front end.
//!
//! CSV files use ',' separators, '.' decimals, 17 significant digits and a
//! single '#' header line naming the model and the columns.

use crate::cm::geometric_grid;
use crate::config::{GridConfig, ModelConfig, OutputFormat, RunConfig, Spacing, TaskKind};
use crate::dispersion::{default_omega_grid, Medium};
use crate::error::{Error, Result};
use crate::inversion::{greens_field, wavefront_kernel, GreensRoute};
use crate::material::{solve_duality, DualityOptions, ModelSpec};
use crate::verify::{verify_medium, VerifyReport};
use crate::wavefront::{wavefront_report, ReportOptions};
use serde::Serialize;
use std::path::{Path, PathBuf};

/// Default agreement tolerance between independent routes.
pub const DEFAULT_TOL: f64 = 1e-6;

/// Command-line overrides of the `[output]` block.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out: Option<PathBuf>,
    pub tol: Option<f64>,
    pub format: Option<OutputFormat>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub files: Vec<PathBuf>,
    pub summary: String,
    /// `Some(false)` when a verification task found a failing check.
    pub verified: Option<bool>,
}

pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn csv_header(label: &str, columns: &[&str]) -> String {
    format!("# model={label}; columns={}\n", columns.join(","))
}

fn csv_rows(label: &str, columns: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut out = csv_header(label, columns);
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

struct Writer {
    dir: PathBuf,
    prefix: String,
    files: Vec<PathBuf>,
}

impl Writer {
    fn write(&mut self, suffix: &str, contents: &str) -> Result<()> {
        let path = self.dir.join(format!("{}_{suffix}", self.prefix));
        std::fs::write(&path, contents)?;
        self.files.push(path);
        Ok(())
    }

    fn json<T: Serialize>(&mut self, suffix: &str, value: &T) -> Result<()> {
        let text = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
        self.write(suffix, &(text + "\n"))
    }
}

fn grid_or(
    grid: &Option<GridConfig>,
    path: &str,
    default: impl FnOnce() -> Vec<f64>,
) -> Result<Vec<f64>> {
    match grid {
        Some(g) => g.values(path),
        None => Ok(default()),
    }
}

pub fn run(config: &RunConfig, task: TaskKind, options: &RunOptions) -> Result<RunOutcome> {
    config.validate()?;
    let dir = options
        .out
        .clone()
        .unwrap_or_else(|| config.output.dir.clone());
    let format = options.format.unwrap_or(config.output.format);
    let tol = options.tol.or(config.output.tol).unwrap_or(DEFAULT_TOL);
    if !(tol > 0.0) {
        return Err(Error::Config {
            path: "--tol".into(),
            detail: format!("tolerance {tol} must be positive"),
        });
    }
    std::fs::create_dir_all(&dir)?;
    let mut w = Writer {
        dir,
        prefix: config.output.prefix.clone(),
        files: Vec::new(),
    };
    let mut echo = config.clone();
    echo.task.kind = Some(task);
    w.write("config.toml", &echo.to_toml())?;

    let (summary, verified) = match task {
        TaskKind::Curves => (curves(config, format, &mut w)?, None),
        TaskKind::Greens => (greens(config, format, &mut w)?, None),
        TaskKind::Wavefront => (wavefront(config, format, &mut w)?, None),
        TaskKind::Duality => (duality(config, format, &mut w)?, None),
        TaskKind::Verify => {
            let report = verify(config, tol)?;
            match format {
                OutputFormat::Csv => w.write("verify.txt", &report.to_text())?,
                OutputFormat::Json => w.json("verify.json", &report)?,
            }
            (report.to_text(), Some(report.pass()))
        }
    };
    Ok(RunOutcome {
        files: w.files,
        summary,
        verified,
    })
}

fn medium(config: &RunConfig) -> Result<Medium> {
    Medium::new(config.build_model()?)
}

fn curves(config: &RunConfig, format: OutputFormat, w: &mut Writer) -> Result<String> {
    let m = medium(config)?;
    let s = m.scale();
    let omega = grid_or(&config.grid.omega, "grid.omega", || default_omega_grid(s))?;
    let times = grid_or(&config.grid.t, "grid.t", || {
        geometric_grid(1e-3 * s, 1e3 * s, 10)
    })?;
    let ad = m.attenuation_dispersion(&omega)?;
    let mut g = Vec::with_capacity(times.len());
    let mut f = Vec::with_capacity(times.len());
    for &t in &times {
        g.push(m.g_of_t(t)?);
        f.push(m.f_integral(t)?);
    }
    let label = &m.model().label;
    match format {
        OutputFormat::Csv => {
            let rows = (0..omega.len()).map(|i| {
                vec![
                    num(ad.omega[i]),
                    num(ad.attenuation[i]),
                    num(ad.dispersion[i]),
                    num(ad.phase_speed[i]),
                ]
            });
            w.write(
                "curves.csv",
                &csv_rows(label, &["omega", "A", "D", "c"], rows),
            )?;
            let rows = (0..times.len()).map(|i| vec![num(times[i]), num(g[i]), num(f[i])]);
            w.write("g.csv", &csv_rows(label, &["t", "g", "f"], rows))?;
        }
        OutputFormat::Json => {
            #[derive(Serialize)]
            struct Curves<'a> {
                label: &'a str,
                c0: f64,
                curves: &'a crate::dispersion::AttenuationDispersion,
                t: &'a [f64],
                g: &'a [f64],
                f: &'a [f64],
            }
            w.json(
                "curves.json",
                &Curves {
                    label,
                    c0: m.c0(),
                    curves: &ad,
                    t: &times,
                    g: &g,
                    f: &f,
                },
            )?;
        }
    }
    Ok(format!(
        "curves: {} frequencies, {} times for {label}\n",
        omega.len(),
        times.len()
    ))
}

fn greens(config: &RunConfig, format: OutputFormat, w: &mut Writer) -> Result<String> {
    let m = medium(config)?;
    let xs = grid_or(&config.grid.x, "grid.x", || vec![1.0])?;
    let x_max = xs.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
    let front = x_max / m.c0();
    let times = grid_or(&config.grid.t, "grid.t", || {
        let g = GridConfig {
            min: 0.05 * front.max(m.scale()),
            max: front + 3.0 * m.scale(),
            count: 60,
            spacing: Spacing::Lin,
        };
        g.values("grid.t").unwrap_or_default()
    })?;
    if let Some(&bad) = times.iter().find(|&&t| !(t > 0.0)) {
        return Err(Error::Config {
            path: "grid.t".into(),
            detail: format!("times must be positive, got {bad}"),
        });
    }
    let route = config.task.route.unwrap_or(GreensRoute::Kernel);
    let field = greens_field(&m, &times, &xs, route)?;
    match format {
        OutputFormat::Csv => {
            let rows = field.values.iter().map(|v| {
                vec![
                    num(v.t),
                    num(v.x),
                    num(v.tau),
                    num(v.u),
                    v.flag.as_str().to_string(),
                ]
            });
            w.write(
                "greens.csv",
                &csv_rows(&field.label, &["t", "x", "tau", "u", "flag"], rows),
            )?;
        }
        OutputFormat::Json => w.json("greens.json", &field)?,
    }
    Ok(format!(
        "greens: {} points ({route:?} route)\n",
        field.values.len()
    ))
}

fn wavefront(config: &RunConfig, format: OutputFormat, w: &mut Writer) -> Result<String> {
    let m = medium(config)?;
    let r = config.task.r.unwrap_or(1.0);
    let s = m.scale();
    let report = wavefront_report(&m, &ReportOptions::for_medium(&m, r))?;
    let taus = grid_or(&config.grid.tau, "grid.tau", || {
        geometric_grid(1e-4 * s, 1e2 * s, 10)
    })?;
    let kernel = wavefront_kernel(&m, r, &taus)?;
    match format {
        OutputFormat::Csv => {
            w.write("wavefront.txt", &report.to_text())?;
            let rows = kernel
                .tau
                .iter()
                .zip(&kernel.h)
                .map(|(&t, &h)| vec![num(t), num(h)]);
            w.write("kernel.csv", &csv_rows(&report.label, &["tau", "H"], rows))?;
        }
        OutputFormat::Json => {
            #[derive(Serialize)]
            struct Out<'a> {
                report: &'a crate::wavefront::WavefrontReport,
                kernel: &'a crate::inversion::WavefrontKernel,
            }
            w.json(
                "wavefront.json",
                &Out {
                    report: &report,
                    kernel: &kernel,
                },
            )?;
        }
    }
    Ok(report.to_text())
}

fn duality(config: &RunConfig, format: OutputFormat, w: &mut Writer) -> Result<String> {
    let model = config.build_model()?;
    let ModelSpec::Compliance(j) = &model.spec else {
        return Err(Error::Config {
            path: "model.kind".into(),
            detail: "the duality task needs a compliance model (elastic or zener)".into(),
        });
    };
    let mut opts = DualityOptions::for_compliance(j);
    if let Some(g) = &config.grid.t {
        if g.spacing != Spacing::Lin || g.min != 0.0 || g.count < 3 {
            return Err(Error::Config {
                path: "grid.t".into(),
                detail: "duality needs a linear grid starting at 0 with at least 3 nodes".into(),
            });
        }
        opts.t_max = g.max;
        opts.steps = (g.count - 1).div_ceil(2) * 2;
    }
    let relax = solve_duality(j, &opts)?;
    match format {
        OutputFormat::Csv => {
            let rows = relax
                .times
                .iter()
                .zip(&relax.values)
                .map(|(&t, &g)| vec![num(t), num(g)]);
            w.write("duality.csv", &csv_rows(&model.label, &["t", "G"], rows))?;
        }
        OutputFormat::Json => w.json("duality.json", &relax)?,
    }
    Ok(format!(
        "duality: {} nodes, residual {:.3e}, G'(0+) = {:.10e}\n",
        relax.times.len(),
        relax.residual,
        relax.g_prime0
    ))
}

pub fn verify(config: &RunConfig, tol: f64) -> Result<VerifyReport> {
    let models = match &config.model {
        Some(m) => vec![m.clone()],
        None => ModelConfig::catalog(),
    };
    let mut suites = Vec::with_capacity(models.len());
    for m in models {
        let medium = Medium::new(m.build()?)?;
        suites.push(verify_medium(&medium, tol));
    }
    Ok(VerifyReport { suites })
}

/// Maps an error to the process exit code: 2 for configuration problems,
/// 3 for computation failures.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config { .. } => 2,
        _ => 3,
    }
}

/// Reads a config file, reporting I/O and parse failures as config errors.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    RunConfig::load(path)
}
