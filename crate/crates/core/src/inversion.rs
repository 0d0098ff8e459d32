//! Numerical inverse Laplace transform and the Green's function evaluators.
//!
//! Inversion uses Weideman's optimised Talbot contour
//! `z(th) = (N/t)(-0.6122 + 0.5017 th cot(0.6407 th) + 0.2645 i th)` with the
//! midpoint rule in `th`. Transforms are supplied as `ln F(p)` so that the
//! strongly decaying wavefront factors never overflow. When the real saddle of
//! `e^{pt} F(p)` lies beyond the contour's crossing point the node count is
//! raised until the contour passes through it.

use crate::dispersion::Medium;
use crate::error::{Error, Result};
use crate::special::gauss_legendre_on;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

const CONTOUR_A: f64 = -0.6122;
const CONTOUR_B: f64 = 0.5017;
const CONTOUR_C: f64 = 0.6407;
const CONTOUR_D: f64 = 0.2645;
/// Real-axis crossing of the contour in units of `N/t`.
const CONTOUR_CROSSING: f64 = CONTOUR_A + CONTOUR_B / CONTOUR_C;
const UNDERFLOW_LOG: f64 = -700.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TalbotParams {
    /// Base node count on the full contour (even).
    pub nodes: usize,
    /// Upper bound for saddle-adapted node counts.
    pub max_nodes: usize,
}

impl Default for TalbotParams {
    fn default() -> Self {
        TalbotParams {
            nodes: 64,
            max_nodes: 8192,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Inverted {
    pub value: f64,
    pub nodes: usize,
    /// The saddle-adapted node count hit `max_nodes`.
    pub capped: bool,
}

/// Inverse Laplace transform of `exp(log_transform(p))`.
pub struct BromwichEvaluator<F> {
    log_transform: F,
    params: TalbotParams,
    non_decreasing: bool,
}

impl<F: Fn(Complex64) -> Complex64> BromwichEvaluator<F> {
    pub fn new(log_transform: F) -> Self {
        BromwichEvaluator {
            log_transform,
            params: TalbotParams::default(),
            non_decreasing: false,
        }
    }

    pub fn with_params(mut self, params: TalbotParams) -> Self {
        self.params = params;
        self
    }

    /// Declares the original non-negative and non-decreasing, which licenses
    /// returning 0 when `sigma e^{sigma t} F(sigma)` underflows.
    pub fn non_decreasing(mut self) -> Self {
        self.non_decreasing = true;
        self
    }

    /// `min over sigma > 0 of sigma t + Re ln F(sigma)` and its minimiser,
    /// by golden section in `ln sigma` (the objective is convex in `sigma`).
    fn saddle(&self, t: f64, with_log_sigma: bool) -> (f64, f64) {
        let obj = |u: f64| {
            let s = u.exp();
            let v = s * t + (self.log_transform)(Complex64::new(s, 0.0)).re;
            if with_log_sigma {
                v + u
            } else {
                v
            }
        };
        let (mut a, mut b) = ((1e-8 / t).ln(), (1e14 / t).ln());
        let phi = 0.5 * (5f64.sqrt() - 1.0);
        let mut c = b - phi * (b - a);
        let mut d = a + phi * (b - a);
        let (mut fc, mut fd) = (obj(c), obj(d));
        for _ in 0..120 {
            if fc.is_nan() || fc <= fd {
                b = d;
                d = c;
                fd = fc;
                c = b - phi * (b - a);
                fc = obj(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + phi * (b - a);
                fd = obj(d);
            }
            if b - a < 1e-10 {
                break;
            }
        }
        let u = 0.5 * (a + b);
        (obj(u), u.exp())
    }

    pub fn invert(&self, t: f64) -> Result<Inverted> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::domain(
                "invert_laplace",
                format!("t = {t} must be positive"),
            ));
        }
        if self.non_decreasing {
            let (bound, _) = self.saddle(t, true);
            if bound < UNDERFLOW_LOG {
                return Ok(Inverted {
                    value: 0.0,
                    nodes: 0,
                    capped: false,
                });
            }
        }
        let (_, sigma) = self.saddle(t, false);
        let wanted = (sigma * t / CONTOUR_CROSSING).ceil();
        let mut n = self.params.nodes.max(wanted.min(1e9) as usize);
        n += n % 2;
        let capped = n > self.params.max_nodes;
        if capped {
            n = self.params.max_nodes;
        }
        let value = self.talbot(t, n)?;
        Ok(Inverted {
            value,
            nodes: n,
            capped,
        })
    }

    fn talbot(&self, t: f64, n: usize) -> Result<f64> {
        let scale = n as f64 / t;
        let mut sum = 0.0;
        for k in 0..n / 2 {
            let th = (2 * k + 1) as f64 * std::f64::consts::PI / n as f64;
            let ct = 1.0 / (CONTOUR_C * th).tan();
            let st = (CONTOUR_C * th).sin();
            let z = scale * Complex64::new(CONTOUR_A + CONTOUR_B * th * ct, CONTOUR_D * th);
            let dz = scale
                * Complex64::new(
                    CONTOUR_B * ct - CONTOUR_B * CONTOUR_C * th / (st * st),
                    CONTOUR_D,
                );
            let log_term = z * t + (self.log_transform)(z) + dz.ln();
            let term = log_term.exp();
            if !(term.re.is_finite() && term.im.is_finite()) {
                return Err(Error::Inversion {
                    t,
                    detail: format!("non-finite integrand at node {k} (p = {z})"),
                });
            }
            sum += term.im;
        }
        Ok(2.0 / n as f64 * sum)
    }
}

/// Inverse transform of `exp(log_f(p))` at `t` with default parameters.
pub fn invert_laplace(log_f: impl Fn(Complex64) -> Complex64, t: f64) -> Result<f64> {
    BromwichEvaluator::new(log_f).invert(t).map(|i| i.value)
}

/// Sampled `H(tau, r)`, the inverse transform of `exp(-r p g~(p)) / p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WavefrontKernel {
    pub r: f64,
    pub tau: Vec<f64>,
    pub h: Vec<f64>,
    /// Per-sample failure or accuracy notes.
    pub flags: Vec<Option<String>>,
}

impl WavefrontKernel {
    pub fn is_non_decreasing(&self, slack: f64) -> bool {
        self.h.windows(2).all(|w| w[1] >= w[0] - slack)
    }
}

/// `H(tau, r)` at a single `tau > 0`.
pub fn kernel_value(medium: &Medium, r: f64, tau: f64) -> Result<Inverted> {
    if !(r >= 0.0) {
        return Err(Error::domain(
            "wavefront_kernel",
            format!("r = {r} must be non-negative"),
        ));
    }
    BromwichEvaluator::new(|p: Complex64| -r * medium.excess(p) - p.ln())
        .non_decreasing()
        .invert(tau)
}

/// `H(0+, r) = exp(-g(0+) r)`, zero when `g(0+)` is infinite.
pub fn kernel_at_front(medium: &Medium, r: f64) -> f64 {
    match medium.g0().finite() {
        Some(g0) => (-g0 * r).exp(),
        None => 0.0,
    }
}

pub fn wavefront_kernel(medium: &Medium, r: f64, tau: &[f64]) -> Result<WavefrontKernel> {
    if let Some(&bad) = tau.iter().find(|&&t| !(t > 0.0)) {
        return Err(Error::domain(
            "wavefront_kernel",
            format!("tau = {bad} must be positive"),
        ));
    }
    let results: Vec<(f64, Option<String>)> = tau
        .par_iter()
        .map(|&t| match kernel_value(medium, r, t) {
            Ok(inv) if inv.capped => (inv.value, Some("node cap reached".to_string())),
            Ok(inv) => (inv.value, None),
            Err(e) => (f64::NAN, Some(e.to_string())),
        })
        .collect();
    let (h, flags) = results.into_iter().unzip();
    Ok(WavefrontKernel {
        r,
        tau: tau.to_vec(),
        h,
        flags,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldFlag {
    /// `t < |x|/c0`: the field vanishes.
    Ahead,
    /// `t = |x|/c0`: the post-wavefront one-sided limit is returned.
    JumpTop,
    /// Within `1e-3 scale` behind the front, where accuracy degrades.
    NearFront,
    Behind,
    /// The inversion hit its node cap.
    Capped,
}

impl FieldFlag {
    pub fn as_str(&self) -> &'static str {
        match self {
            FieldFlag::Ahead => "ahead",
            FieldFlag::JumpTop => "jump_top",
            FieldFlag::NearFront => "near_front",
            FieldFlag::Behind => "behind",
            FieldFlag::Capped => "capped",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldValue {
    pub t: f64,
    pub x: f64,
    pub tau: f64,
    pub u: f64,
    pub flag: FieldFlag,
}

fn classify(medium: &Medium, t: f64, x: f64) -> Result<(f64, Option<FieldFlag>)> {
    if !(t > 0.0) {
        return Err(Error::domain(
            "greens_u",
            format!("t = {t} must be positive"),
        ));
    }
    let tau = t - x.abs() / medium.c0();
    let flag = if tau < 0.0 {
        Some(FieldFlag::Ahead)
    } else if tau == 0.0 {
        Some(FieldFlag::JumpTop)
    } else {
        None
    };
    Ok((tau, flag))
}

fn front_value(medium: &Medium, tau: f64, x: f64, flag: FieldFlag) -> f64 {
    match flag {
        FieldFlag::JumpTop => kernel_at_front(medium, x.abs()) / (2.0 * medium.rho() * medium.c0()),
        _ => {
            debug_assert!(tau < 0.0);
            0.0
        }
    }
}

fn behind_flag(medium: &Medium, tau: f64, capped: bool) -> FieldFlag {
    if capped {
        FieldFlag::Capped
    } else if tau < 1e-3 * medium.scale() {
        FieldFlag::NearFront
    } else {
        FieldFlag::Behind
    }
}

/// `u(t, x) = (1/2 rho) [H(tau)/c0 + (g * H)(tau)]`, `tau = t - |x|/c0`, with the
/// convolution done by graded Gauss-Legendre panels.
pub fn greens_u(medium: &Medium, t: f64, x: f64) -> Result<FieldValue> {
    let (tau, flag) = classify(medium, t, x)?;
    if let Some(flag) = flag {
        let u = front_value(medium, tau, x, flag);
        return Ok(FieldValue { t, x, tau, u, flag });
    }
    let r = x.abs();
    let h_tau = kernel_value(medium, r, tau)?;
    let mut capped = h_tau.capped;
    let mut conv = 0.0;
    if !medium.g().is_zero() {
        let mut h_at = |u: f64| -> Result<f64> {
            let inv = kernel_value(medium, r, u)?;
            capped |= inv.capped;
            Ok(inv.value)
        };
        let g = medium.g();
        const LEVELS: i32 = 24;
        const ORDER: usize = 12;
        let half = 0.5 * tau;
        let s_min = half * 2f64.powi(-LEVELS);
        // Innermost piece near s = 0, where g may be singular: H is flat there.
        conv += g.integral(s_min)? * h_tau.value;
        for k in 0..LEVELS {
            let (a, b) = (half * 2f64.powi(-k - 1), half * 2f64.powi(-k));
            // s in [a, b]
            for (s, w) in gauss_legendre_on(ORDER, a, b) {
                conv += w * g.eval(s)? * h_at(tau - s)?;
            }
            // u = tau - s in [a, b]
            for (u, w) in gauss_legendre_on(ORDER, a, b) {
                conv += w * g.eval(tau - u)? * h_at(u)?;
            }
        }
        for (u, w) in gauss_legendre_on(ORDER, 0.0, s_min) {
            conv += w * g.eval(tau - u)? * h_at(u)?;
        }
    }
    let u = (h_tau.value / medium.c0() + conv) / (2.0 * medium.rho());
    Ok(FieldValue {
        t,
        x,
        tau,
        u,
        flag: behind_flag(medium, tau, capped),
    })
}

/// `u(t, x)` by direct inversion of `kappa/(2 rho p^2) e^{-kappa |x|}` in the
/// wavefront-relative time `tau`.
pub fn greens_u_direct(medium: &Medium, t: f64, x: f64) -> Result<FieldValue> {
    let (tau, flag) = classify(medium, t, x)?;
    if let Some(flag) = flag {
        let u = front_value(medium, tau, x, flag);
        return Ok(FieldValue { t, x, tau, u, flag });
    }
    let r = x.abs();
    let c0 = medium.c0();
    let rho = medium.rho();
    // u <= (1/c0 + f(tau)) H(tau) / (2 rho), so an underflowing H bound suffices.
    let bound =
        BromwichEvaluator::new(|p: Complex64| -r * medium.excess(p) - p.ln()).non_decreasing();
    let (log_bound, _) = bound.saddle(tau, true);
    if log_bound < UNDERFLOW_LOG {
        return Ok(FieldValue {
            t,
            x,
            tau,
            u: 0.0,
            flag: behind_flag(medium, tau, false),
        });
    }
    let inv = BromwichEvaluator::new(|p: Complex64| {
        let e = medium.excess(p);
        (1.0 / c0 + e / p).ln() - (2.0 * rho).ln() - p.ln() - r * e
    })
    .invert(tau)?;
    Ok(FieldValue {
        t,
        x,
        tau,
        u: inv.value,
        flag: behind_flag(medium, tau, inv.capped),
    })
}

/// `f(t) = int_0^t g(s) ds`.
pub fn f_integral(medium: &Medium, t: f64) -> Result<f64> {
    medium.f_integral(t)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GreensRoute {
    Kernel,
    Direct,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreensField {
    pub label: String,
    pub route: GreensRoute,
    pub values: Vec<FieldValue>,
}

/// `u` on the tensor grid `t x x`, evaluated in parallel.
pub fn greens_field(
    medium: &Medium,
    times: &[f64],
    xs: &[f64],
    route: GreensRoute,
) -> Result<GreensField> {
    let pairs: Vec<(f64, f64)> = times
        .iter()
        .flat_map(|&t| xs.iter().map(move |&x| (t, x)))
        .collect();
    let values = pairs
        .par_iter()
        .map(|&(t, x)| match route {
            GreensRoute::Kernel => greens_u(medium, t, x),
            GreensRoute::Direct => greens_u_direct(medium, t, x),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GreensField {
        label: medium.model().label.clone(),
        route,
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::material::{make_elastic, make_powerlaw_g, make_zener};

    #[test]
    fn closed_form_trio() {
        let step = invert_laplace(|p| -p.ln(), 1.0).unwrap();
        assert!((step - 1.0).abs() < 1e-10, "{step}");
        let decay = invert_laplace(|p| -(p + 1.0).ln(), 1.0).unwrap();
        assert!((decay - (-1f64).exp()).abs() < 1e-10, "{decay}");
        let v = invert_laplace(|p| -p.sqrt() - p.ln(), 1.0).unwrap();
        // erfc(1/2)
        assert!((v - 0.479_500_122_186_953_5).abs() < 1e-10, "{v}");
        assert!(invert_laplace(|p| -p.ln(), 0.0).is_err());
    }

    #[test]
    fn elastic_kernel_and_field() {
        let m = Medium::new(make_elastic(1.0, 2.0).unwrap()).unwrap();
        let k = wavefront_kernel(&m, 1.0, &[1e-3, 1.0, 10.0]).unwrap();
        assert!(k.h.iter().all(|&h| (h - 1.0).abs() < 1e-10));
        let c0 = m.c0();
        let u = greens_u(&m, 2.0, 0.5).unwrap();
        assert!((u.u - 1.0 / (2.0 * 2.0 * c0)).abs() < 1e-10);
        assert_eq!(greens_u(&m, 0.1, 5.0).unwrap().u, 0.0);
    }

    #[test]
    fn zener_front_limit() {
        let m = Medium::new(make_zener(1.0, 1.0, 1.0, 1.0).unwrap()).unwrap();
        let top = greens_u(&m, 1.0, 1.0).unwrap();
        assert_eq!(top.flag, FieldFlag::JumpTop);
        assert!((top.u - 0.5 * (-0.5f64).exp()).abs() < 1e-14);
        let h = kernel_value(&m, 1.0, 1e-4).unwrap().value;
        assert!((h - (-0.5f64).exp()).abs() < 1e-3, "{h}");
    }

    #[test]
    fn kernel_and_direct_routes_agree() {
        let m = Medium::new(make_powerlaw_g(1.0, 1.0, 0.5, 1.0).unwrap()).unwrap();
        let a = greens_u(&m, 2.0, 1.0).unwrap().u;
        let b = greens_u_direct(&m, 2.0, 1.0).unwrap().u;
        assert!((a - b).abs() < 1e-6 * b.abs(), "{a} vs {b}");
        let z = Medium::new(make_zener(1.0, 1.0, 1.0, 1.0).unwrap()).unwrap();
        let a = greens_u(&z, 1.5, 1.0).unwrap().u;
        let b = greens_u_direct(&z, 1.5, 1.0).unwrap().u;
        assert!((a - b).abs() < 1e-6 * b.abs(), "{a} vs {b}");
    }
}
