//! TOML run configuration.
//!
//! ```toml
//! [model]
//! kind = "zener"
//! j0 = 1.0
//! j1 = 1.0
//! tau = 1.0
//! rho = 1.0
//!
//! [task]
//! r = 1.0
//!
//! [grid.t]
//! min = 1.0
//! max = 3.0
//! count = 21
//! spacing = "lin"
//!
//! [output]
//! dir = "out"
//! prefix = "zener"
//! ```

use crate::cm::CmFunction;
use crate::error::{Error, Result};
use crate::inversion::GreensRoute;
use crate::material::{
    make_composite_g, make_elastic, make_log_g, make_powerlaw_g, make_zener, MaterialModel,
};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelConfig {
    Elastic {
        j0: f64,
        rho: f64,
    },
    Zener {
        j0: f64,
        j1: f64,
        tau: f64,
        rho: f64,
    },
    PowerlawG {
        c0: f64,
        a: f64,
        alpha: f64,
        rho: f64,
    },
    LogG {
        c0: f64,
        a: f64,
        b: f64,
        #[serde(rename = "A")]
        big_a: f64,
        rho: f64,
    },
    CompositeG {
        c0: f64,
        rho: f64,
        kernels: Vec<KernelConfig>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelConfig {
    PowerLaw {
        amplitude: f64,
        exponent: f64,
    },
    Logarithmic {
        rate: f64,
        strength: f64,
        offset: f64,
    },
    Exponential {
        weight: f64,
        rate: f64,
    },
    Constant {
        value: f64,
    },
}

impl KernelConfig {
    fn build(&self) -> Result<CmFunction> {
        match *self {
            KernelConfig::PowerLaw {
                amplitude,
                exponent,
            } => CmFunction::power_law(amplitude, exponent),
            KernelConfig::Logarithmic {
                rate,
                strength,
                offset,
            } => CmFunction::logarithmic(rate, strength, offset),
            KernelConfig::Exponential { weight, rate } => CmFunction::exponential(weight, rate),
            KernelConfig::Constant { value } => CmFunction::constant(value),
        }
    }
}

impl ModelConfig {
    pub fn build(&self) -> Result<MaterialModel> {
        let built = match self {
            ModelConfig::Elastic { j0, rho } => make_elastic(*j0, *rho),
            ModelConfig::Zener { j0, j1, tau, rho } => make_zener(*j0, *j1, *tau, *rho),
            ModelConfig::PowerlawG { c0, a, alpha, rho } => make_powerlaw_g(*c0, *a, *alpha, *rho),
            ModelConfig::LogG {
                c0,
                a,
                b,
                big_a,
                rho,
            } => make_log_g(*c0, *a, *b, *big_a, *rho),
            ModelConfig::CompositeG { c0, rho, kernels } => {
                let mut built = Vec::with_capacity(kernels.len());
                for (i, k) in kernels.iter().enumerate() {
                    built.push(
                        k.build()
                            .map_err(|e| config_error(format!("model.kernels[{i}]"), e))?,
                    );
                }
                make_composite_g(*c0, built, *rho)
            }
        };
        built.map_err(|e| config_error("model", e))
    }

    /// The catalog exercised by the verification suite.
    pub fn catalog() -> Vec<ModelConfig> {
        vec![
            ModelConfig::Elastic { j0: 1.0, rho: 1.0 },
            ModelConfig::Zener {
                j0: 1.0,
                j1: 1.0,
                tau: 1.0,
                rho: 1.0,
            },
            ModelConfig::PowerlawG {
                c0: 1.0,
                a: 1.0,
                alpha: 0.5,
                rho: 1.0,
            },
            ModelConfig::LogG {
                c0: 1.0,
                a: 1.0,
                b: 1.0,
                big_a: 1.0,
                rho: 1.0,
            },
        ]
    }
}

fn config_error(path: impl Into<String>, e: Error) -> Error {
    match e {
        Error::Config { .. } => e,
        other => Error::Config {
            path: path.into(),
            detail: other.to_string(),
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    #[default]
    Lin,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

impl GridConfig {
    pub fn log(min: f64, max: f64, count: usize) -> Self {
        GridConfig {
            min,
            max,
            count,
            spacing: Spacing::Log,
        }
    }

    pub fn values(&self, path: &str) -> Result<Vec<f64>> {
        let bad = |detail: String| Error::Config {
            path: path.to_string(),
            detail,
        };
        if self.count == 0 {
            return Err(bad("count must be at least 1".into()));
        }
        if !(self.min.is_finite() && self.max.is_finite()) {
            return Err(bad("bounds must be finite".into()));
        }
        if self.count == 1 {
            return Ok(vec![self.min]);
        }
        if !(self.max > self.min) {
            return Err(bad(format!(
                "max {} must exceed min {}",
                self.max, self.min
            )));
        }
        let n = (self.count - 1) as f64;
        Ok(match self.spacing {
            Spacing::Lin => (0..self.count)
                .map(|i| self.min + (self.max - self.min) * i as f64 / n)
                .collect(),
            Spacing::Log => {
                if !(self.min > 0.0) {
                    return Err(bad("log spacing needs min > 0".into()));
                }
                let ratio = self.max / self.min;
                (0..self.count)
                    .map(|i| self.min * ratio.powf(i as f64 / n))
                    .collect()
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct Grids {
    pub t: Option<GridConfig>,
    pub x: Option<GridConfig>,
    pub omega: Option<GridConfig>,
    pub tau: Option<GridConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    Curves,
    Greens,
    Wavefront,
    Verify,
    Duality,
}

impl TaskKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            TaskKind::Curves => "curves",
            TaskKind::Greens => "greens",
            TaskKind::Wavefront => "wavefront",
            TaskKind::Verify => "verify",
            TaskKind::Duality => "duality",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct TaskConfig {
    pub kind: Option<TaskKind>,
    /// Propagation distance for wavefront diagnostics.
    pub r: Option<f64>,
    pub route: Option<GreensRoute>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    #[serde(default = "default_prefix")]
    pub prefix: String,
    #[serde(default)]
    pub format: OutputFormat,
    /// Agreement tolerance between independent routes.
    pub tol: Option<f64>,
}

fn default_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_prefix() -> String {
    "run".into()
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: default_dir(),
            prefix: default_prefix(),
            format: OutputFormat::Csv,
            tol: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: Option<ModelConfig>,
    #[serde(default)]
    pub task: TaskConfig,
    #[serde(default)]
    pub grid: Grids,
    #[serde(default)]
    pub output: OutputConfig,
}

impl RunConfig {
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config {
            path: origin.to_string(),
            detail: e.to_string().trim_end().to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config {
            path: path.display().to_string(),
            detail: e.to_string(),
        })?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config serialises")
    }

    /// Checks every parameter and grid before any computation.
    pub fn validate(&self) -> Result<()> {
        if let Some(m) = &self.model {
            m.build()?;
        }
        for (name, g) in [
            ("grid.t", &self.grid.t),
            ("grid.x", &self.grid.x),
            ("grid.omega", &self.grid.omega),
            ("grid.tau", &self.grid.tau),
        ] {
            if let Some(g) = g {
                g.values(name)?;
            }
        }
        for (name, g) in [
            ("grid.omega", &self.grid.omega),
            ("grid.tau", &self.grid.tau),
        ] {
            if let Some(g) = g {
                if g.values(name)?.iter().any(|&v| !(v > 0.0)) {
                    return Err(Error::Config {
                        path: name.into(),
                        detail: "values must be positive".into(),
                    });
                }
            }
        }
        if let Some(r) = self.task.r {
            if !(r >= 0.0 && r.is_finite()) {
                return Err(Error::Config {
                    path: "task.r".into(),
                    detail: format!("distance {r} must be non-negative"),
                });
            }
        }
        if let Some(tol) = self.output.tol {
            if !(tol > 0.0) {
                return Err(Error::Config {
                    path: "output.tol".into(),
                    detail: format!("tolerance {tol} must be positive"),
                });
            }
        }
        Ok(())
    }

    pub fn build_model(&self) -> Result<MaterialModel> {
        self.model
            .as_ref()
            .ok_or_else(|| Error::Config {
                path: "model".into(),
                detail: "this task needs a [model] block".into(),
            })?
            .build()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const ZENER: &str = r#"
[model]
kind = "zener"
j0 = 1.0
j1 = 1.0
tau = 1.0
rho = 1.0

[grid.t]
min = 1.0
max = 3.0
count = 5

[output]
dir = "out"
"#;

    #[test]
    fn parses_and_round_trips() {
        let cfg = RunConfig::parse(ZENER, "inline").unwrap();
        assert_eq!(
            cfg.grid.t.unwrap().values("grid.t").unwrap(),
            vec![1.0, 1.5, 2.0, 2.5, 3.0]
        );
        let again = RunConfig::parse(&cfg.to_toml(), "echo").unwrap();
        assert_eq!(again, cfg);
    }

    #[test]
    fn reports_field_paths() {
        let bad = ZENER.replace("tau = 1.0", "tau = -1.0");
        match RunConfig::parse(&bad, "inline") {
            Err(Error::Config { path, .. }) => assert_eq!(path, "model"),
            other => panic!("{other:?}"),
        }
        let bad = ZENER.replace("count = 5", "count = 0");
        match RunConfig::parse(&bad, "inline") {
            Err(Error::Config { path, .. }) => assert_eq!(path, "grid.t"),
            other => panic!("{other:?}"),
        }
        let bad = ZENER.replace("j1 = 1.0", "j1 = 1.0\nextra = 2");
        assert!(matches!(
            RunConfig::parse(&bad, "inline"),
            Err(Error::Config { .. })
        ));
        let log = "[model]\nkind = \"log_g\"\nc0 = 1\na = 1\nb = 1\nA = 0.5\nrho = 1\n";
        assert!(matches!(
            RunConfig::parse(log, "inline"),
            Err(Error::Config { .. })
        ));
    }

    #[test]
    fn catalog_builds() {
        for m in ModelConfig::catalog() {
            m.build().unwrap();
        }
    }
}
