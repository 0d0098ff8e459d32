//! Material models: creep compliances, direct `(c0, g)` specifications and
//! the relaxation modulus obtained from the duality equation.

mod duality;

pub use duality::{solve_duality, DualityOptions, RelaxationModulus};

use crate::cm::{check_cm, geometric_grid, CmFunction, Limit};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Bernstein creep compliance `J(t) = J0 + int_0^t J'(s) ds` with CM `J'`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CreepCompliance {
    j0: f64,
    creep_rate: CmFunction,
}

impl CreepCompliance {
    pub fn new(j0: f64, creep_rate: CmFunction) -> Result<Self> {
        if !(j0 >= 0.0 && j0.is_finite()) {
            return Err(Error::Construction(format!(
                "J0 = {j0} must be non-negative"
            )));
        }
        Ok(CreepCompliance { j0, creep_rate })
    }

    pub fn j0(&self) -> f64 {
        self.j0
    }

    pub fn creep_rate(&self) -> &CmFunction {
        &self.creep_rate
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        Ok(self.j0 + self.creep_rate.integral(t)?)
    }

    /// `p J~(p) = J0 + L[J'](p)` on the cut plane.
    pub fn p_laplace(&self, p: num_complex::Complex64) -> num_complex::Complex64 {
        self.j0 + self.creep_rate.laplace_cut(p)
    }

    /// Reference timescale of the creep rate.
    pub fn scale(&self) -> f64 {
        self.creep_rate.scale()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSpec {
    Compliance(CreepCompliance),
    /// Wavefront speed and attenuation kernel given directly.
    Direct {
        c0: f64,
        g: CmFunction,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaterialModel {
    pub rho: f64,
    pub spec: ModelSpec,
    pub label: String,
}

fn check_rho(rho: f64) -> Result<()> {
    if rho > 0.0 && rho.is_finite() {
        Ok(())
    } else {
        Err(Error::Construction(format!(
            "density rho = {rho} must be positive"
        )))
    }
}

fn check_c0(c0: f64) -> Result<()> {
    if c0 > 0.0 && c0.is_finite() {
        Ok(())
    } else {
        Err(Error::Construction(format!(
            "wavefront speed c0 = {c0} must be positive and finite"
        )))
    }
}

impl MaterialModel {
    pub fn compliance(&self) -> Option<&CreepCompliance> {
        match &self.spec {
            ModelSpec::Compliance(j) => Some(j),
            ModelSpec::Direct { .. } => None,
        }
    }

    pub fn is_direct(&self) -> bool {
        matches!(self.spec, ModelSpec::Direct { .. })
    }

    /// Reference timescale used for grid placement.
    pub fn scale(&self) -> f64 {
        match &self.spec {
            ModelSpec::Compliance(j) => j.scale(),
            ModelSpec::Direct { g, .. } => g.scale(),
        }
    }
}

/// Purely elastic medium, `J(t) = J0`.
pub fn make_elastic(j0: f64, rho: f64) -> Result<MaterialModel> {
    check_rho(rho)?;
    if !(j0 > 0.0) {
        return Err(Error::Construction(format!("J0 = {j0} must be positive")));
    }
    Ok(MaterialModel {
        rho,
        spec: ModelSpec::Compliance(CreepCompliance::new(j0, CmFunction::Zero)?),
        label: format!("elastic J0={j0} rho={rho}"),
    })
}

/// Standard linear solid, `J(t) = J0 + J1 (1 - exp(-t/tau))`.
pub fn make_zener(j0: f64, j1: f64, tau: f64, rho: f64) -> Result<MaterialModel> {
    check_rho(rho)?;
    if !(j0 > 0.0 && j0.is_finite()) {
        return Err(Error::Construction(format!("J0 = {j0} must be positive")));
    }
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::Construction(format!("tau = {tau} must be positive")));
    }
    if !(j1 >= 0.0 && j1.is_finite()) {
        return Err(Error::Construction(format!(
            "J1 = {j1} must be non-negative"
        )));
    }
    let creep_rate = if j1 == 0.0 {
        CmFunction::Zero
    } else {
        CmFunction::exponential(j1 / tau, 1.0 / tau)?
    };
    Ok(MaterialModel {
        rho,
        spec: ModelSpec::Compliance(CreepCompliance::new(j0, creep_rate)?),
        label: format!("zener J0={j0} J1={j1} tau={tau} rho={rho}"),
    })
}

/// General Bernstein compliance with a caller-supplied CM creep rate.
pub fn make_compliance(j0: f64, creep_rate: CmFunction, rho: f64) -> Result<MaterialModel> {
    check_rho(rho)?;
    let label = format!("compliance J0={j0} rho={rho}");
    Ok(MaterialModel {
        rho,
        spec: ModelSpec::Compliance(CreepCompliance::new(j0, creep_rate)?),
        label,
    })
}

/// `g(t) = a t^(-alpha) / Gamma(1 - alpha)`, i.e. `p g~(p) = a p^alpha`.
pub fn make_powerlaw_g(c0: f64, a: f64, alpha: f64, rho: f64) -> Result<MaterialModel> {
    check_rho(rho)?;
    check_c0(c0)?;
    Ok(MaterialModel {
        rho,
        spec: ModelSpec::Direct {
            c0,
            g: CmFunction::power_law(a, alpha)?,
        },
        label: format!("powerlaw_g c0={c0} a={a} alpha={alpha} rho={rho}"),
    })
}

/// `g(t) = b ln(1/(a t) + A)` with `A >= 1`.
pub fn make_log_g(c0: f64, a: f64, b: f64, big_a: f64, rho: f64) -> Result<MaterialModel> {
    check_rho(rho)?;
    check_c0(c0)?;
    Ok(MaterialModel {
        rho,
        spec: ModelSpec::Direct {
            c0,
            g: CmFunction::logarithmic(a, b, big_a)?,
        },
        label: format!("log_g c0={c0} a={a} b={b} A={big_a} rho={rho}"),
    })
}

/// Direct specification with an arbitrary kernel; `g` is sign-tested for
/// complete monotonicity before acceptance.
pub fn make_direct(
    c0: f64,
    g: CmFunction,
    rho: f64,
    label: impl Into<String>,
) -> Result<MaterialModel> {
    check_rho(rho)?;
    check_c0(c0)?;
    let scale = g.scale();
    let grid = geometric_grid(1e-3 * scale, 1e3 * scale, 8);
    let values = grid
        .iter()
        .map(|&t| g.eval(t))
        .collect::<Result<Vec<f64>>>()?;
    let report = check_cm(
        |t| values[grid.iter().position(|&s| s == t).expect("grid point")],
        &grid,
        4,
    );
    if !report.pass() {
        return Err(Error::ModelValidity(format!(
            "g fails the CM sign test at order {:?} (violation {:.3e})",
            report.first_failure(),
            report.max_violation
        )));
    }
    Ok(MaterialModel {
        rho,
        spec: ModelSpec::Direct { c0, g },
        label: label.into(),
    })
}

/// Sum of attenuation kernels sharing one wavefront speed.
pub fn make_composite_g(c0: f64, kernels: Vec<CmFunction>, rho: f64) -> Result<MaterialModel> {
    if kernels.is_empty() {
        return Err(Error::Construction(
            "composite model needs at least one kernel".into(),
        ));
    }
    let n = kernels.len();
    make_direct(
        c0,
        CmFunction::sum(kernels),
        rho,
        format!("composite_g c0={c0} terms={n} rho={rho}"),
    )
}

/// `J'(0+)`: analytic for closed forms, total creep-rate mass otherwise.
pub fn creep_rate_limit(j: &CreepCompliance) -> Limit {
    j.creep_rate.limit_at_zero()
}
