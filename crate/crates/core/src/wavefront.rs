//! Wavefront diagnostics: jump criterion and amplitude, asymptotic phase,
//! constant-free upper bounds, stepwise regularisation and slow variation.

use crate::cm::{geometric_grid, CmFunction, Limit};
use crate::dispersion::Medium;
use crate::error::{Error, Result};
use crate::inversion::{kernel_at_front, kernel_value};
use crate::material::{creep_rate_limit, solve_duality, DualityOptions, ModelSpec};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

/// Ratio of successive increments of `p g~(p)` below which the sequence is
/// taken as convergent, and above which as divergent.
const CONVERGENT_RATIO: f64 = 0.3;
const DIVERGENT_RATIO: f64 = 0.7;

const HYPOTHESIS_SLACK: f64 = 1e-9;
const FD_STEP: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Verdict {
    Discontinuous { g0: f64 },
    Continuous,
    Undetermined,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JumpCriterion {
    pub verdict: Verdict,
    /// `g(0+)` from the closed form or from `rho c0 J'(0+) / 2`.
    pub analytic_route: Limit,
    /// `g(0+)` from extrapolating `p g~(p)` along `p = 10^k / scale`.
    pub transform_route: Limit,
    /// `p g~(p)` samples used by the transform route.
    pub transform_samples: Vec<(f64, f64)>,
}

/// Extrapolates `p g~(p)` along `p = 10^k / scale`, `k = 2..6`.
fn transform_route(medium: &Medium) -> (Limit, Vec<(f64, f64)>) {
    let samples: Vec<(f64, f64)> = (2..=6)
        .map(|k| {
            let p = 10f64.powi(k) / medium.scale();
            (p, medium.excess(Complex64::new(p, 0.0)).re)
        })
        .collect();
    let n = samples.len();
    let last = samples[n - 1].1;
    let d1 = samples[n - 1].1 - samples[n - 2].1;
    let d0 = samples[n - 2].1 - samples[n - 3].1;
    if d1.abs() <= 1e-13 * last.abs().max(1e-300) || last == 0.0 {
        return (Limit::Finite(last), samples);
    }
    let q = d1 / d0;
    let limit = if (0.0..CONVERGENT_RATIO).contains(&q) {
        Limit::Finite(last + d1 * q / (1.0 - q))
    } else if q >= DIVERGENT_RATIO {
        Limit::Infinite
    } else {
        Limit::Undetermined
    };
    (limit, samples)
}

pub fn jump_criterion(medium: &Medium) -> JumpCriterion {
    let analytic = medium.g0();
    let (transform, samples) = transform_route(medium);
    let verdict = match (analytic, transform) {
        (Limit::Finite(a), Limit::Finite(b)) => {
            if (a - b).abs() <= 1e-3 * a.abs().max(1e-12) {
                Verdict::Discontinuous { g0: a }
            } else {
                Verdict::Undetermined
            }
        }
        (Limit::Infinite, Limit::Infinite) => Verdict::Continuous,
        // A closed-form limit on a direct model is authoritative.
        (Limit::Finite(a), Limit::Undetermined) if medium.model().is_direct() => {
            Verdict::Discontinuous { g0: a }
        }
        (Limit::Infinite, Limit::Undetermined) if medium.model().is_direct() => Verdict::Continuous,
        (Limit::Undetermined, Limit::Finite(b)) => Verdict::Discontinuous { g0: b },
        (Limit::Undetermined, Limit::Infinite) => Verdict::Continuous,
        _ => Verdict::Undetermined,
    };
    JumpCriterion {
        verdict,
        analytic_route: analytic,
        transform_route: transform,
        transform_samples: samples,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JumpAmplitude {
    pub r: f64,
    /// `e^{-g0 r} / (2 rho c0)`.
    pub value: f64,
    /// The same with `g0 = J'(0+) / (2 J0 c0)`.
    pub via_creep_rate: Option<f64>,
    /// The same with `g0 = -G'(0+) / (2 rho c0^3)`, `G'(0+)` from the duality solver.
    pub via_relaxation: Option<f64>,
    /// Largest relative discrepancy among the available routes.
    pub discrepancy: f64,
}

pub fn jump_amplitude(medium: &Medium, r: f64) -> Result<JumpAmplitude> {
    if !(r >= 0.0) {
        return Err(Error::domain(
            "jump_amplitude",
            format!("r = {r} must be non-negative"),
        ));
    }
    let Verdict::Discontinuous { g0 } = jump_criterion(medium).verdict else {
        return Err(Error::Unsupported(
            "the wavefront carries no jump: g(0+) is not finite".into(),
        ));
    };
    let (rho, c0) = (medium.rho(), medium.c0());
    let amp = |g: f64| (-g * r).exp() / (2.0 * rho * c0);
    let value = amp(g0);
    let (mut via_creep_rate, mut via_relaxation) = (None, None);
    if let ModelSpec::Compliance(j) = &medium.model().spec {
        if let Limit::Finite(jp) = creep_rate_limit(j) {
            via_creep_rate = Some(amp(jp / (2.0 * j.j0() * c0)));
        }
        let relax = solve_duality(j, &DualityOptions::for_compliance(j))?;
        via_relaxation = Some(amp(-relax.g_prime0 / (2.0 * rho * c0.powi(3))));
    }
    let discrepancy = [via_creep_rate, via_relaxation]
        .iter()
        .flatten()
        .map(|v| (v - value).abs() / value)
        .fold(0.0, f64::max);
    Ok(JumpAmplitude {
        r,
        value,
        via_creep_rate,
        via_relaxation,
        discrepancy,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseTrace {
    pub r: f64,
    pub tau: Vec<f64>,
    /// `H(tau, r) e^{g(tau) r}`.
    pub ratio: Vec<f64>,
    pub flags: Vec<Option<String>>,
}

impl PhaseTrace {
    /// `|ratio - 1|` is non-increasing along the (decreasing) `tau` sequence.
    pub fn monotone_toward_one(&self) -> bool {
        self.ratio
            .windows(2)
            .all(|w| (w[1] - 1.0).abs() <= (w[0] - 1.0).abs() + 1e-9)
    }
}

pub fn asymptotic_phase_ratio(medium: &Medium, r: f64, tau: &[f64]) -> Result<PhaseTrace> {
    if let Some(&bad) = tau.iter().find(|&&t| !(t > 0.0)) {
        return Err(Error::domain(
            "asymptotic_phase_ratio",
            format!("tau = {bad} must be positive"),
        ));
    }
    let rows: Vec<(f64, Option<String>)> = tau
        .par_iter()
        .map(|&t| {
            let g = match medium.g_of_t(t) {
                Ok(g) => g,
                Err(e) => return (f64::NAN, Some(e.to_string())),
            };
            match kernel_value(medium, r, t) {
                Ok(inv) if inv.value > 0.0 => {
                    let flag = inv.capped.then(|| "node cap reached".to_string());
                    ((inv.value.ln() + g * r).exp(), flag)
                }
                Ok(_) => (f64::NAN, Some("H underflow".to_string())),
                Err(e) => (f64::NAN, Some(e.to_string())),
            }
        })
        .collect();
    let (ratio, flags) = rows.into_iter().unzip();
    Ok(PhaseTrace {
        r,
        tau: tau.to_vec(),
        ratio,
        flags,
    })
}

/// Samples `-t g'(t)` on a geometric grid and returns the first `t` where it
/// increases, if any.
pub fn hypothesis_violation(g: &CmFunction, t_min: f64, t_max: f64) -> Result<Option<f64>> {
    let grid = geometric_grid(t_min, t_max, 16);
    let mut prev: Option<f64> = None;
    for &t in &grid {
        let d = (g.eval(t * (1.0 + FD_STEP))? - g.eval(t * (1.0 - FD_STEP))?) / (2.0 * t * FD_STEP);
        let q = -t * d;
        if let Some(p) = prev {
            if q > p + HYPOTHESIS_SLACK * p.abs().max(q.abs()) {
                return Ok(Some(t));
            }
        }
        prev = Some(q);
    }
    Ok(None)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    /// `max (H e^{g r} - 1)^+` over the grid.
    pub max_violation: f64,
    pub worst_r: f64,
    pub worst_tau: f64,
    /// The same against `(1/(a tau) + A)^{-b r}` for logarithmic kernels.
    pub displayed_bound_violation: Option<f64>,
}

/// Checks `H(tau, r) <= e^{-g(tau) r}` after testing the hypothesis that
/// `-t g'(t)` is non-increasing over the `tau` range.
pub fn upper_bound_check(medium: &Medium, r_grid: &[f64], tau_grid: &[f64]) -> Result<BoundCheck> {
    let (lo, hi) = tau_grid
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(a, b), &t| (a.min(t), b.max(t)));
    if !(lo > 0.0) || r_grid.is_empty() {
        return Err(Error::domain(
            "upper_bound_check",
            "grids must be non-empty and tau > 0",
        ));
    }
    if let Some(at) = hypothesis_violation(medium.g(), lo, hi.max(lo * 10.0))? {
        return Err(Error::Hypothesis {
            at,
            detail: "-t g'(t) is not non-increasing".into(),
        });
    }
    let log_params = match medium.g() {
        CmFunction::Logarithmic {
            rate,
            strength,
            offset,
        } => Some((*rate, *strength, *offset)),
        _ => None,
    };
    let pairs: Vec<(f64, f64)> = r_grid
        .iter()
        .flat_map(|&r| tau_grid.iter().map(move |&t| (r, t)))
        .collect();
    let rows = pairs
        .par_iter()
        .map(|&(r, t)| -> Result<(f64, f64, f64, f64)> {
            let h = kernel_value(medium, r, t)?.value;
            let g = medium.g_of_t(t)?;
            let v = (h * (g * r).exp() - 1.0).max(0.0);
            let displayed = log_params.map_or(0.0, |(a, b, big_a)| {
                (h * (1.0 / (a * t) + big_a).powf(b * r) - 1.0).max(0.0)
            });
            Ok((v, displayed, r, t))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = BoundCheck {
        max_violation: 0.0,
        worst_r: rows[0].2,
        worst_tau: rows[0].3,
        displayed_bound_violation: log_params.map(|_| 0.0),
    };
    for (v, d, r, t) in rows {
        if v > out.max_violation {
            out.max_violation = v;
            out.worst_r = r;
            out.worst_tau = t;
        }
        if let Some(m) = out.displayed_bound_violation.as_mut() {
            *m = m.max(d);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub exponent: f64,
    /// `r b` for logarithmic kernels.
    pub expected: f64,
    pub points: usize,
}

/// Least-squares slope of `ln H` against `ln tau` over `window`, sampled at 16
/// points per decade.
pub fn regularization_exponent(medium: &Medium, r: f64, window: (f64, f64)) -> Result<ExponentFit> {
    let CmFunction::Logarithmic { strength, .. } = medium.g() else {
        return Err(Error::Unsupported(
            "stepwise regularisation applies to logarithmic kernels".into(),
        ));
    };
    let (lo, hi) = window;
    if !(lo > 0.0 && hi >= 10.0 * lo * (1.0 - 1e-12)) {
        return Err(Error::Fit(format!(
            "window [{lo:e}, {hi:e}] must span at least one decade"
        )));
    }
    let taus = geometric_grid(lo, hi, 16);
    let logs = taus
        .par_iter()
        .map(|&t| -> Result<(f64, f64)> {
            let h = kernel_value(medium, r, t)?.value;
            if !(h > 0.0) {
                return Err(Error::Fit(format!("H underflows at tau = {t:e}")));
            }
            Ok((t.ln(), h.ln()))
        })
        .collect::<Result<Vec<_>>>()?;
    let n = logs.len() as f64;
    let (sx, sy) = logs
        .iter()
        .fold((0.0, 0.0), |(a, b), &(x, y)| (a + x, b + y));
    let (mx, my) = (sx / n, sy / n);
    let (sxy, sxx) = logs.iter().fold((0.0, 0.0), |(a, b), &(x, y)| {
        (a + (x - mx) * (y - my), b + (x - mx) * (x - mx))
    });
    Ok(ExponentFit {
        exponent: sxy / sxx,
        expected: r * strength,
        points: logs.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlowVariation {
    pub r: f64,
    pub lambdas: Vec<f64>,
    pub p: Vec<f64>,
    /// `max over lambda of |l(lambda p)/l(p) - 1|` with `l = exp(-r p g~(p))`.
    pub ratio_deviation: Vec<f64>,
    /// `max over lambda of |ln l(lambda p) / ln l(p) - 1|`.
    pub exponent_deviation: Vec<f64>,
}

impl SlowVariation {
    pub fn top_deviation(&self) -> f64 {
        *self.ratio_deviation.last().unwrap_or(&0.0)
    }

    pub fn decreasing(&self) -> bool {
        self.ratio_deviation
            .windows(2)
            .all(|w| w[1] <= w[0] + 1e-12)
    }
}

pub fn slowly_varying_check(
    medium: &Medium,
    r: f64,
    lambdas: &[f64],
    p_grid: &[f64],
) -> Result<SlowVariation> {
    if lambdas.iter().any(|&l| !(l > 0.0)) || p_grid.iter().any(|&p| !(p > 0.0)) {
        return Err(Error::domain(
            "slowly_varying_check",
            "lambda and p must be positive",
        ));
    }
    let phi = |p: f64| r * medium.excess(Complex64::new(p, 0.0)).re;
    let mut ratio_deviation = Vec::with_capacity(p_grid.len());
    let mut exponent_deviation = Vec::with_capacity(p_grid.len());
    for &p in p_grid {
        let base = phi(p);
        let (mut a, mut b) = (0.0f64, 0.0f64);
        for &l in lambdas {
            let other = phi(l * p);
            a = a.max((-(other - base)).exp_m1().abs());
            if base != 0.0 {
                b = b.max((other / base - 1.0).abs());
            }
        }
        ratio_deviation.push(a);
        exponent_deviation.push(b);
    }
    Ok(SlowVariation {
        r,
        lambdas: lambdas.to_vec(),
        p: p_grid.to_vec(),
        ratio_deviation,
        exponent_deviation,
    })
}

/// `max over t of g(t) - rho c0 J'(t) / 2`; non-positive for admissible models.
pub fn g_vs_creep_rate_check(medium: &Medium, t_grid: &[f64]) -> Result<f64> {
    let ModelSpec::Compliance(j) = &medium.model().spec else {
        return Err(Error::Unsupported(
            "the creep-rate inequality needs a compliance model".into(),
        ));
    };
    let factor = medium.rho() * medium.c0() / 2.0;
    let mut worst = f64::NEG_INFINITY;
    for &t in t_grid {
        worst = worst.max(medium.g_of_t(t)? - factor * j.creep_rate().eval(t)?);
    }
    Ok(worst)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoundOutcome {
    Checked(BoundCheck),
    Refused { at: f64, detail: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WavefrontReport {
    pub label: String,
    pub c0: f64,
    pub g0: Limit,
    pub criterion: JumpCriterion,
    pub jump_amplitude: Option<JumpAmplitude>,
    pub kernel_at_front: f64,
    pub bound_check: BoundOutcome,
    pub phase_ratio_trace: PhaseTrace,
    pub regularization_exponent: Option<ExponentFit>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportOptions {
    pub r: f64,
    /// Decreasing `tau` sequence for the phase trace.
    pub phase_tau: Vec<f64>,
    pub bound_tau: Vec<f64>,
    pub fit_window: (f64, f64),
}

impl ReportOptions {
    /// Near-wavefront band `[1e-4, 1e-1] scale` at distance `r`.
    pub fn for_medium(medium: &Medium, r: f64) -> Self {
        let s = medium.scale();
        let mut phase_tau = geometric_grid(1e-3 * s, 1e-1 * s, 2);
        phase_tau.reverse();
        ReportOptions {
            r,
            phase_tau,
            bound_tau: geometric_grid(1e-4 * s, 1e-1 * s, 4),
            fit_window: (1e-4 * s, 1e-3 * s),
        }
    }
}

pub fn wavefront_report(medium: &Medium, options: &ReportOptions) -> Result<WavefrontReport> {
    let criterion = jump_criterion(medium);
    let jump = match criterion.verdict {
        Verdict::Discontinuous { .. } => Some(jump_amplitude(medium, options.r)?),
        _ => None,
    };
    let bound_check = match upper_bound_check(medium, &[options.r], &options.bound_tau) {
        Ok(b) => BoundOutcome::Checked(b),
        Err(Error::Hypothesis { at, detail }) => BoundOutcome::Refused { at, detail },
        Err(e) => return Err(e),
    };
    let regularization = match medium.g() {
        CmFunction::Logarithmic { .. } => Some(regularization_exponent(
            medium,
            options.r,
            options.fit_window,
        )?),
        _ => None,
    };
    Ok(WavefrontReport {
        label: medium.model().label.clone(),
        c0: medium.c0(),
        g0: medium.g0(),
        jump_amplitude: jump,
        kernel_at_front: kernel_at_front(medium, options.r),
        bound_check,
        phase_ratio_trace: asymptotic_phase_ratio(medium, options.r, &options.phase_tau)?,
        regularization_exponent: regularization,
        criterion,
    })
}

fn fmt_limit(l: &Limit) -> String {
    match l {
        Limit::Finite(v) => format!("{v:.10e}"),
        Limit::Infinite => "infinite".into(),
        Limit::Undetermined => "undetermined".into(),
    }
}

impl WavefrontReport {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "model: {}", self.label);
        let _ = writeln!(s, "c0: {:.10e}", self.c0);
        let _ = writeln!(s, "g0: {}", fmt_limit(&self.g0));
        let verdict = match self.criterion.verdict {
            Verdict::Discontinuous { g0 } => format!("discontinuous (g0 = {g0:.10e})"),
            Verdict::Continuous => "continuous".into(),
            Verdict::Undetermined => "undetermined".into(),
        };
        let _ = writeln!(s, "wavefront: {verdict}");
        let _ = writeln!(
            s,
            "  routes: analytic {}, transform {}",
            fmt_limit(&self.criterion.analytic_route),
            fmt_limit(&self.criterion.transform_route)
        );
        if let Some(j) = &self.jump_amplitude {
            let _ = writeln!(s, "jump(r = {}): {:.10e}", j.r, j.value);
            if let Some(v) = j.via_creep_rate {
                let _ = writeln!(s, "  via J'(0+): {v:.10e}");
            }
            if let Some(v) = j.via_relaxation {
                let _ = writeln!(s, "  via G'(0+): {v:.10e}");
            }
            let _ = writeln!(s, "  max route discrepancy: {:.3e}", j.discrepancy);
        }
        let _ = writeln!(s, "H(0+, r): {:.10e}", self.kernel_at_front);
        match &self.bound_check {
            BoundOutcome::Checked(b) => {
                let _ = writeln!(
                    s,
                    "upper bound: max violation {:.3e} at tau = {:.3e}",
                    b.max_violation, b.worst_tau
                );
            }
            BoundOutcome::Refused { at, detail } => {
                let _ = writeln!(s, "upper bound: refused at tau = {at:.6e} ({detail})");
            }
        }
        let _ = writeln!(s, "phase ratio H e^(g r):");
        for (t, q) in self
            .phase_ratio_trace
            .tau
            .iter()
            .zip(&self.phase_ratio_trace.ratio)
        {
            let _ = writeln!(s, "  tau = {t:.3e}: {q:.10e}");
        }
        if let Some(f) = &self.regularization_exponent {
            let _ = writeln!(
                s,
                "regularisation exponent: {:.6} (r b = {:.6}, {} points)",
                f.exponent, f.expected, f.points
            );
        }
        s
    }
}
