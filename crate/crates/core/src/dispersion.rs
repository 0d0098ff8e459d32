//! Complex wavenumber, wavefront speed, the attenuation kernel `g` and the
//! attenuation/dispersion functions.
//!
//! For a compliance model `kappa(p) = sqrt(rho) p sqrt(p J~(p))`; for a direct
//! model `kappa(p) = p/c0 + p g~(p)`. The compliance route and the spectral
//! route through `g` are kept separate so that one can check the other.

use crate::cm::{CmFunction, DensityGrid, Limit, LogGrid, SpectralMeasure};
use crate::error::{Error, Result};
use crate::material::{creep_rate_limit, CreepCompliance, MaterialModel, ModelSpec};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Angular offset from the cut used for numerical boundary values.
pub const BOUNDARY_EPS: f64 = 1e-8;

const PANEL_ORDER: usize = 64;

pub fn wavefront_speed(model: &MaterialModel) -> Result<f64> {
    match &model.spec {
        ModelSpec::Direct { c0, .. } => Ok(*c0),
        ModelSpec::Compliance(j) => {
            if j.j0() > 0.0 {
                Ok(1.0 / (model.rho * j.j0()).sqrt())
            } else {
                Err(Error::Unsupported(
                    "J0 = 0: the wavefront speed is infinite".into(),
                ))
            }
        }
    }
}

/// `kappa(p)` on the open right half-plane.
pub fn kappa(model: &MaterialModel, p: Complex64) -> Result<Complex64> {
    if !(p.re > 0.0) {
        return Err(Error::domain(
            "kappa",
            format!(
                "Re p = {} must be positive; use extract_density for the cut",
                p.re
            ),
        ));
    }
    let c0 = wavefront_speed(model)?;
    Ok(p / c0 + excess(model, p))
}

/// `kappa(p) - p/c0 = p g~(p)` by the model's native route, valid on the
/// plane cut along `]-inf, 0]`.
pub fn excess(model: &MaterialModel, p: Complex64) -> Complex64 {
    match &model.spec {
        ModelSpec::Direct { g, .. } => g.p_laplace_cut(p),
        ModelSpec::Compliance(j) => compliance_excess(model.rho, j, p),
    }
}

/// `sqrt(rho) p (sqrt(X) - sqrt(J0))` with `X = p J~(p)`, written without
/// cancellation as `sqrt(rho) p L[J'](p) / (sqrt(X) + sqrt(J0))`.
fn compliance_excess(rho: f64, j: &CreepCompliance, p: Complex64) -> Complex64 {
    let creep = j.creep_rate().laplace_cut(p);
    let x = j.j0() + creep;
    rho.sqrt() * p * creep / (x.sqrt() + j.j0().sqrt())
}

/// Exponential and constant components of a creep rate whose transform is
/// rational, `L[J'](p) = c/p + sum w_k/(p + l_k)`.
fn rational_poles(f: &CmFunction, out: &mut Vec<(f64, f64)>) -> bool {
    match f {
        CmFunction::Zero => true,
        CmFunction::Constant { value } => {
            out.push((*value, 0.0));
            true
        }
        CmFunction::Exponential { weight, rate } => {
            out.push((*weight, *rate));
            true
        }
        CmFunction::Measure { measure } if measure.density().is_none() => {
            out.extend(measure.atoms().iter().map(|a| (a.weight, a.location)));
            true
        }
        CmFunction::Sum { terms } => terms.iter().all(|t| rational_poles(t, out)),
        _ => false,
    }
}

fn contains_sampled_density(f: &CmFunction) -> bool {
    match f {
        CmFunction::Measure { measure } => measure.density().is_some(),
        CmFunction::Sum { terms } => terms.iter().any(contains_sampled_density),
        _ => false,
    }
}

/// Density of `nu` at `r` from the boundary value of `sqrt(p J~(p))` just
/// below the cut, `p = r exp(-i(pi - eps))`.
pub fn boundary_density(model: &MaterialModel, r: f64) -> Result<f64> {
    let ModelSpec::Compliance(j) = &model.spec else {
        return Err(Error::Unsupported(
            "boundary density is defined through the compliance; direct models carry g".into(),
        ));
    };
    if !(r > 0.0) {
        return Err(Error::domain(
            "boundary_density",
            format!("r = {r} must be positive"),
        ));
    }
    let mut poles = Vec::new();
    if rational_poles(j.creep_rate(), &mut poles) {
        let x = j.j0() + poles.iter().map(|&(w, l)| w / (l - r)).sum::<f64>();
        return Ok(model.rho.sqrt() / PI * (-x).max(0.0).sqrt());
    }
    let p = Complex64::from_polar(r, -(PI - BOUNDARY_EPS));
    let x = j.j0() + j.creep_rate().laplace_cut(p);
    if x.im < -1e-10 * x.norm() {
        return Err(Error::ModelValidity(format!(
            "negative spectral density at r = {r:.6e}: J is not a Bernstein function"
        )));
    }
    Ok(model.rho.sqrt() / PI * x.sqrt().im.max(0.0))
}

/// Spectral measure of `g` for a compliance model.
///
/// Rational `p J~(p)` is handled exactly: the density lives on the intervals
/// between each pole `-l_k` and the next zero of `p J~(p)` on the negative
/// axis, integrated with cosine-mapped Gauss panels. Other closed-form creep
/// rates are sampled on `grid` (default placement when `None`).
pub fn extract_density(model: &MaterialModel, grid: Option<&LogGrid>) -> Result<SpectralMeasure> {
    let ModelSpec::Compliance(j) = &model.spec else {
        return Err(Error::Unsupported(
            "extract_density applies to compliance models".into(),
        ));
    };
    if j.j0() <= 0.0 {
        return Err(Error::Unsupported(
            "J0 = 0 is outside the finite-speed regime".into(),
        ));
    }
    let scale = j.scale();
    if j.creep_rate().is_zero() {
        return SpectralMeasure::new(Vec::new(), None, scale);
    }
    let mut poles = Vec::new();
    if rational_poles(j.creep_rate(), &mut poles) {
        return rational_density(model.rho, j.j0(), poles, scale);
    }
    if contains_sampled_density(j.creep_rate()) {
        return Err(Error::Unsupported(
            "boundary values of a sampled creep-rate density are not resolved; \
             supply a closed-form creep rate"
                .into(),
        ));
    }
    let default = LogGrid::for_scale(scale);
    let grid = grid.unwrap_or(&default);
    let nodes = grid.nodes();
    let values = nodes
        .iter()
        .map(|&r| boundary_density(model, r))
        .collect::<Result<Vec<f64>>>()?;
    let density = DensityGrid::from_log_samples(nodes, values)?;
    SpectralMeasure::new(Vec::new(), Some(density), scale)
}

fn rational_density(
    rho: f64,
    j0: f64,
    mut poles: Vec<(f64, f64)>,
    scale: f64,
) -> Result<SpectralMeasure> {
    poles.retain(|&(w, _)| w > 0.0);
    poles.sort_by(|a, b| a.1.total_cmp(&b.1));
    // merge equal rates
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for (w, l) in poles {
        match merged.last_mut() {
            Some(last) if last.1 == l => last.0 += w,
            _ => merged.push((w, l)),
        }
    }
    let x_real = |r: f64| -> f64 { j0 + merged.iter().map(|&(w, l)| w / (l - r)).sum::<f64>() };
    let mut panels = Vec::new();
    for (k, &(_, l)) in merged.iter().enumerate() {
        let lo = l;
        let mut hi = match merged.get(k + 1) {
            Some(&(_, next)) => next,
            None => {
                let mut b = 2.0 * lo.max(1e-300) + 1.0 / scale;
                while x_real(b) < 0.0 {
                    b *= 2.0;
                }
                b
            }
        };
        // X(-r) increases from -inf to +inf (or J0) on ]lo, hi[; bisect for its zero.
        let mut a = lo;
        for _ in 0..200 {
            let mid = 0.5 * (a + hi);
            if mid <= a || mid >= hi {
                break;
            }
            if x_real(mid) < 0.0 {
                a = mid;
            } else {
                hi = mid;
            }
        }
        let zero = 0.5 * (a + hi);
        if zero > lo {
            panels.push((lo, zero));
        }
    }
    let sqrt_rho = rho.sqrt();
    let density = DensityGrid::panel_gauss(&panels, PANEL_ORDER, |r| {
        sqrt_rho / PI * (-x_real(r)).max(0.0).sqrt()
    })?;
    SpectralMeasure::new(Vec::new(), Some(density), scale)
}

/// A model prepared for repeated evaluation: wavefront speed and attenuation
/// kernel `g` resolved once.
#[derive(Debug, Clone)]
pub struct Medium {
    model: MaterialModel,
    c0: f64,
    g: CmFunction,
}

impl Medium {
    pub fn new(model: MaterialModel) -> Result<Self> {
        let c0 = wavefront_speed(&model)?;
        let g = match &model.spec {
            ModelSpec::Direct { g, .. } => g.clone(),
            ModelSpec::Compliance(j) if j.creep_rate().is_zero() => CmFunction::Zero,
            ModelSpec::Compliance(_) => CmFunction::from_measure(extract_density(&model, None)?),
        };
        Ok(Medium { model, c0, g })
    }

    pub fn model(&self) -> &MaterialModel {
        &self.model
    }

    pub fn rho(&self) -> f64 {
        self.model.rho
    }

    pub fn c0(&self) -> f64 {
        self.c0
    }

    pub fn scale(&self) -> f64 {
        self.model.scale()
    }

    /// The attenuation kernel `g`.
    pub fn g(&self) -> &CmFunction {
        &self.g
    }

    pub fn kappa(&self, p: Complex64) -> Result<Complex64> {
        kappa(&self.model, p)
    }

    /// `p g~(p)` by the native route (compliance or closed form).
    pub fn excess(&self, p: Complex64) -> Complex64 {
        excess(&self.model, p)
    }

    /// `p g~(p)` through the spectral measure of `g`.
    pub fn excess_via_measure(&self, p: Complex64) -> Complex64 {
        self.g.p_laplace_cut(p)
    }

    pub fn g_of_t(&self, t: f64) -> Result<f64> {
        self.g.eval(t)
    }

    /// `f(t) = int_0^t g`.
    pub fn f_integral(&self, t: f64) -> Result<f64> {
        self.g.integral(t)
    }

    /// `g(0+)`: the closed-form limit for direct models and
    /// `rho c0 J'(0+) / 2` for compliance models.
    pub fn g0(&self) -> Limit {
        match &self.model.spec {
            ModelSpec::Direct { g, .. } => g.limit_at_zero(),
            ModelSpec::Compliance(j) => match creep_rate_limit(j) {
                Limit::Finite(v) => Limit::Finite(self.model.rho * self.c0 * v / 2.0),
                other => other,
            },
        }
    }

    /// `g(inf)`, non-zero only for direct kernels with a constant part.
    pub fn g_inf(&self) -> f64 {
        self.g.limit_at_infinity()
    }

    pub fn attenuation_dispersion(&self, omega: &[f64]) -> Result<AttenuationDispersion> {
        if let Some(&w) = omega.iter().find(|&&w| !(w > 0.0)) {
            return Err(Error::domain(
                "attenuation_dispersion",
                format!("omega = {w} must be positive"),
            ));
        }
        let mut out = AttenuationDispersion {
            omega: omega.to_vec(),
            attenuation: Vec::with_capacity(omega.len()),
            dispersion: Vec::with_capacity(omega.len()),
            phase_speed: Vec::with_capacity(omega.len()),
        };
        for &w in omega {
            let e = self.excess(Complex64::new(0.0, -w));
            let d = -e.im;
            out.attenuation.push(e.re);
            out.dispersion.push(d);
            out.phase_speed.push(w / (d + w / self.c0));
        }
        Ok(out)
    }

    /// Max relative discrepancy between the native `kappa` and
    /// `p/c0 + p g~(p)` from the spectral measure of `g`.
    pub fn kk_identity_residual(&self, p_grid: &[f64]) -> Result<f64> {
        let spectral = match &self.model.spec {
            ModelSpec::Compliance(_) => self.g.clone(),
            ModelSpec::Direct { g, .. } => {
                let m = g.spectral_measure(&LogGrid::for_scale(g.scale()))?;
                CmFunction::sum(vec![
                    CmFunction::constant(g.limit_at_infinity())?,
                    CmFunction::from_measure(m),
                ])
            }
        };
        let mut worst: f64 = 0.0;
        for &p in p_grid {
            let pc = Complex64::new(p, 0.0);
            let native = self.kappa(pc)?;
            let other = pc / self.c0 + spectral.p_laplace_cut(pc);
            worst = worst.max((native - other).norm() / native.norm());
        }
        Ok(worst)
    }
}

/// Six decades of angular frequency around `1/scale`.
pub fn default_omega_grid(scale: f64) -> Vec<f64> {
    crate::cm::geometric_grid(1e-3 / scale, 1e3 / scale, 10)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttenuationDispersion {
    pub omega: Vec<f64>,
    pub attenuation: Vec<f64>,
    pub dispersion: Vec<f64>,
    pub phase_speed: Vec<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::material::{make_elastic, make_powerlaw_g, make_zener};

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn kappa_examples() {
        let el = make_elastic(1.0, 4.0).unwrap();
        let k = kappa(&el, c(3.0)).unwrap();
        assert!((k - c(3.0 * 2.0)).norm() < 1e-15);
        let pl = make_powerlaw_g(1.0, 1.0, 0.5, 1.0).unwrap();
        assert!((kappa(&pl, c(4.0)).unwrap() - c(6.0)).norm() < 1e-14);
        let z = make_zener(1.0, 1.0, 1.0, 1.0).unwrap();
        // p J~(p) = J0 + J1/(1 + p tau), independently of the creep-rate code
        let x: f64 = 1.0 + 1.0 / (1.0 + 1.0);
        assert!((kappa(&z, c(1.0)).unwrap() - c(x.sqrt())).norm() < 1e-15);
        assert!(kappa(&z, Complex64::new(0.0, 1.0)).is_err());
    }

    #[test]
    fn wavefront_speed_examples() {
        assert_eq!(
            wavefront_speed(&make_elastic(1.0, 1.0).unwrap()).unwrap(),
            1.0
        );
        assert_eq!(
            wavefront_speed(&make_elastic(1.0, 4.0).unwrap()).unwrap(),
            0.5
        );
        assert_eq!(
            wavefront_speed(&make_powerlaw_g(3.0, 1.0, 0.5, 1.0).unwrap()).unwrap(),
            3.0
        );
    }

    #[test]
    fn zener_density_closed_form() {
        let z = make_zener(1.0, 1.0, 1.0, 1.0).unwrap();
        for &r in &[1.1, 1.5, 1.9] {
            let h = boundary_density(&z, r).unwrap();
            let exact = ((2.0 - r) / (r - 1.0)).sqrt() / PI;
            assert!((h - exact).abs() < 1e-6, "r={r}: {h} vs {exact}");
        }
        assert_eq!(boundary_density(&z, 0.5).unwrap(), 0.0);
        assert!(boundary_density(&z, 2.5).unwrap() < 1e-7);
        let m = extract_density(&z, None).unwrap();
        let Limit::Finite(mass) = m.total_mass() else {
            panic!()
        };
        assert!((mass - 0.5).abs() < 1e-12, "{mass}");
        assert!(m.atoms().is_empty());
    }

    #[test]
    fn zener_g_and_round_trip() {
        let med = Medium::new(make_zener(1.0, 1.0, 1.0, 1.0).unwrap()).unwrap();
        assert_eq!(med.g0(), Limit::Finite(0.5));
        assert!((med.g_of_t(1e-9).unwrap() - 0.5).abs() < 1e-8);
        for &p in &[1e-2, 1.0, 1e2] {
            let a = med.excess(c(p));
            let b = med.excess_via_measure(c(p));
            assert!((a - b).norm() < 1e-12 * a.norm().max(1e-300), "p={p}");
        }
        assert!(
            med.kk_identity_residual(&[1e-2, 0.1, 1.0, 10.0, 100.0])
                .unwrap()
                < 1e-10
        );
    }

    #[test]
    fn attenuation_examples() {
        let el = Medium::new(make_elastic(1.0, 1.0).unwrap()).unwrap();
        let ad = el.attenuation_dispersion(&[0.1, 1.0, 10.0]).unwrap();
        assert!(ad.attenuation.iter().all(|&a| a == 0.0));
        assert!(ad.phase_speed.iter().all(|&s| s == 1.0));
        let pl = Medium::new(make_powerlaw_g(1.0, 1.0, 0.5, 1.0).unwrap()).unwrap();
        let ad = pl.attenuation_dispersion(&[4.0]).unwrap();
        assert!((ad.attenuation[0] - 2.0 * 0.5f64.sqrt()).abs() < 1e-14);
        assert!(ad.phase_speed[0] < 1.0);
        let z = Medium::new(make_zener(1.0, 1.0, 1.0, 1.0).unwrap()).unwrap();
        let ad = z.attenuation_dispersion(&[1e6]).unwrap();
        assert!((ad.attenuation[0] - 0.5).abs() < 1e-5);
    }

    #[test]
    fn power_law_creep_density_round_trip() {
        // J(t) = 1 + 2 sqrt(t/pi); g from sampled boundary values.
        let j =
            crate::material::make_compliance(1.0, CmFunction::power_law(1.0, 0.5).unwrap(), 1.0)
                .unwrap();
        let med = Medium::new(j).unwrap();
        for &p in &[1e-2, 1.0, 1e2] {
            let a = med.excess(c(p));
            let b = med.excess_via_measure(c(p));
            assert!((a - b).norm() < 1e-6 * a.norm(), "p={p}: {a} vs {b}");
        }
    }
}
