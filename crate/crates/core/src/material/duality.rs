//! Product-integration solver for `int_0^t G(s) J(t - s) ds = t`.
//!
//! The equation is differentiated once to the second-kind form
//! `J0 G(t) + int_0^t J'(t - s) G(s) ds = 1` and marched with piecewise-linear
//! `G` against exact kernel moments. Two step sizes are combined by Richardson
//! extrapolation. The result is then checked against the undifferentiated
//! equation with an independent piecewise-quadratic quadrature.

use super::CreepCompliance;
use crate::cm::{CmFunction, Limit, LogGrid};
use crate::error::{Error, Result};
use crate::special::{gamma, gauss_legendre_on, one_minus_exp_over};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DualityOptions {
    pub steps: usize,
    pub t_max: f64,
    /// Bound on `max |(G*J)(t) - t| / max(t, h)`.
    pub tolerance: f64,
}

impl DualityOptions {
    /// 2048 uniform steps over `[0, 10 scale]`.
    pub fn for_compliance(j: &CreepCompliance) -> Self {
        DualityOptions {
            steps: 2048,
            t_max: 10.0 * j.scale(),
            tolerance: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelaxationModulus {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    /// `G(0+) = 1/J0`.
    pub g0: Limit,
    /// One-sided difference estimate of `G'(0+)`.
    pub g_prime0: f64,
    /// Relative first-kind residual of the returned samples.
    pub residual: f64,
    pub step: f64,
}

impl RelaxationModulus {
    pub fn is_non_increasing(&self, slack: f64) -> bool {
        self.values.windows(2).all(|w| w[1] <= w[0] + slack)
    }

    /// `t,G` rows in the crate's CSV dialect.
    pub fn to_csv(&self, header: &str) -> String {
        let mut out = format!("# model={header}; columns=t,G\n");
        for (t, g) in self.times.iter().zip(&self.values) {
            out.push_str(&format!("{t:.16e},{g:.16e}\n"));
        }
        out
    }
}

/// Kernel `J'` split into exponentials `w exp(-l t)` (including `l = 0`) and
/// power laws `c t^(-b)`.
struct Kernel {
    exps: Vec<(f64, f64)>,
    powers: Vec<(f64, f64)>,
    /// `int_0^h` contribution of spectral mass beyond the grid top.
    impulse: f64,
}

impl Kernel {
    fn from_cm(f: &CmFunction) -> Result<Self> {
        let mut k = Kernel {
            exps: Vec::new(),
            powers: Vec::new(),
            impulse: 0.0,
        };
        k.push(f)?;
        Ok(k)
    }

    fn push(&mut self, f: &CmFunction) -> Result<()> {
        match f {
            CmFunction::Zero => {}
            CmFunction::Constant { value } => self.exps.push((*value, 0.0)),
            CmFunction::Exponential { weight, rate } => self.exps.push((*weight, *rate)),
            CmFunction::PowerLaw {
                amplitude,
                exponent,
            } => self
                .powers
                .push((amplitude / gamma(1.0 - exponent), *exponent)),
            CmFunction::Logarithmic { .. } => {
                self.exps.push((f.limit_at_infinity(), 0.0));
                let m = f.spectral_measure(&LogGrid::for_scale(f.scale()))?;
                self.push(&CmFunction::from_measure(m))?;
            }
            CmFunction::Measure { measure } => {
                self.exps
                    .extend(measure.point_masses().into_iter().map(|(r, m)| (m, r)));
                self.impulse += measure.high_tail_impulse();
            }
            CmFunction::Sum { terms } => {
                for t in terms {
                    self.push(t)?;
                }
            }
        }
        Ok(())
    }

    /// `int_0^u K`.
    fn integral(&self, u: f64) -> f64 {
        let e: f64 = self
            .exps
            .iter()
            .map(|&(w, l)| w * u * one_minus_exp_over(l * u))
            .sum();
        let p: f64 = self
            .powers
            .iter()
            .map(|&(c, b)| c * u.powf(1.0 - b) / (1.0 - b))
            .sum();
        e + p
    }

    /// `(A0_m, A1_m) = int_0^h w^q K(m h + w) dw` for `q = 0, 1`.
    fn moments(&self, m: usize, h: f64) -> (f64, f64) {
        let mut a0 = 0.0;
        let mut a1 = 0.0;
        let base = m as f64 * h;
        for &(w, l) in &self.exps {
            let x = l * h;
            let decay = (-l * base).exp();
            a0 += w * decay * h * one_minus_exp_over(x);
            a1 += w * decay * h * h * psi(x);
        }
        for &(c, b) in &self.powers {
            if m < 4 {
                let (lo, hi) = (base, base + h);
                let i0 = (hi.powf(1.0 - b) - lo.powf(1.0 - b)) / (1.0 - b);
                let i1 = (hi.powf(2.0 - b) - lo.powf(2.0 - b)) / (2.0 - b) - base * i0;
                a0 += c * i0;
                a1 += c * i1;
            } else {
                for (w, wt) in gauss_legendre_on(12, 0.0, h) {
                    let k = c * (base + w).powf(-b);
                    a0 += wt * k;
                    a1 += wt * w * k;
                }
            }
        }
        if m == 0 {
            a0 += self.impulse;
        }
        (a0, a1)
    }
}

/// `(1 - e^{-x}(1 + x)) / x^2`.
fn psi(x: f64) -> f64 {
    if x < 0.5 {
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 0..30 {
            sum += term / (k as f64 + 2.0);
            term *= -x / (k as f64 + 1.0);
        }
        sum
    } else {
        (1.0 - (-x).exp() * (1.0 + x)) / (x * x)
    }
}

fn march(j0: f64, kernel: &Kernel, steps: usize, h: f64) -> Vec<f64> {
    let (alpha, beta): (Vec<f64>, Vec<f64>) = (0..steps)
        .map(|m| {
            let (a0, a1) = kernel.moments(m, h);
            (a0 - a1 / h, a1 / h)
        })
        .unzip();
    let mut g = Vec::with_capacity(steps + 1);
    g.push(1.0 / j0);
    for n in 1..=steps {
        let mut acc = 1.0;
        for j in 0..n {
            acc -= g[j] * beta[n - 1 - j];
        }
        for j in 0..n - 1 {
            acc -= g[j + 1] * alpha[n - 1 - j];
        }
        g.push(acc / (j0 + alpha[0]));
    }
    g
}

/// `max_n |J0 int_0^t G + int_0^t G(s) Q(t - s) ds - t| / max(t, h)` over even
/// nodes, with `Q = J - J0` and `G` piecewise quadratic on node pairs.
fn first_kind_residual(j0: f64, kernel: &Kernel, g: &[f64], h: f64) -> f64 {
    let panels = (g.len() - 1) / 2;
    let q = |u: f64| kernel.integral(u);
    // mu[M][k] = int_0^{2h} (v/h)^k Q(M h + v) dv, M even.
    let rule = gauss_legendre_on(16, 0.0, 2.0 * h);
    let mut mu = Vec::with_capacity(panels);
    for i in 0..panels {
        let base = 2.0 * i as f64 * h;
        let mut m = [0.0; 3];
        if i == 0 {
            m = first_panel_moments(kernel, h);
        } else {
            for &(v, w) in &rule {
                let qv = q(base + v);
                let y = v / h;
                m[0] += w * qv;
                m[1] += w * y * qv;
                m[2] += w * y * y * qv;
            }
        }
        mu.push(m);
    }
    let mut worst: f64 = 0.0;
    let mut simpson = 0.0;
    for n in 1..=panels {
        simpson += h / 3.0 * (g[2 * n - 2] + 4.0 * g[2 * n - 1] + g[2 * n]);
        let mut conv = 0.0;
        for i in 0..n {
            let m = mu[n - 1 - i];
            let (g0, g1, g2) = (g[2 * i], g[2 * i + 1], g[2 * i + 2]);
            conv += g0 * 0.5 * (m[2] - m[1])
                + g1 * (2.0 * m[1] - m[2])
                + g2 * 0.5 * (2.0 * m[0] - 3.0 * m[1] + m[2]);
        }
        let t = 2.0 * n as f64 * h;
        let r = (j0 * simpson + conv - t).abs() / t.max(h);
        worst = worst.max(r);
    }
    worst
}

fn first_panel_moments(kernel: &Kernel, h: f64) -> [f64; 3] {
    let span = 2.0 * h;
    let mut m = [0.0; 3];
    let rule = gauss_legendre_on(16, 0.0, span);
    for &(w, l) in &kernel.exps {
        let x = l * span;
        if x < 1.0 {
            for &(v, wt) in &rule {
                let qv = w * v * one_minus_exp_over(l * v);
                let y = v / h;
                m[0] += wt * qv;
                m[1] += wt * y * qv;
                m[2] += wt * y * y * qv;
            }
        } else {
            let e = (-x).exp();
            let lower = [
                (1.0 - e) / l,
                (1.0 - e * (1.0 + x)) / (l * l),
                (2.0 - e * (2.0 + 2.0 * x + x * x)) / (l * l * l),
            ];
            for (k, lk) in lower.iter().enumerate() {
                let poly = span.powi(k as i32 + 1) / (k as f64 + 1.0);
                m[k] += w / l * (poly - lk) / h.powi(k as i32);
            }
        }
    }
    for &(c, b) in &kernel.powers {
        for (k, mk) in m.iter_mut().enumerate() {
            let e = k as f64 + 2.0 - b;
            *mk += c / (1.0 - b) * span.powf(e) / e / h.powi(k as i32);
        }
    }
    m
}

/// Solves the duality equation for `G` given `J`.
pub fn solve_duality(j: &CreepCompliance, options: &DualityOptions) -> Result<RelaxationModulus> {
    let j0 = j.j0();
    if j0 == 0.0 {
        return Err(Error::Unsupported(
            "J0 = 0 gives G(0+) = inf and an infinite wavefront speed".into(),
        ));
    }
    if options.steps < 2 || !options.steps.is_multiple_of(2) {
        return Err(Error::domain(
            "solve_duality",
            format!("step count {} must be even and at least 2", options.steps),
        ));
    }
    if !(options.t_max > 0.0 && options.t_max.is_finite()) {
        return Err(Error::domain(
            "solve_duality",
            format!("t_max = {} must be positive", options.t_max),
        ));
    }
    let kernel = Kernel::from_cm(j.creep_rate())?;
    let n = options.steps;
    let h = options.t_max / n as f64;
    let coarse = march(j0, &kernel, n, h);
    let fine = march(j0, &kernel, 2 * n, 0.5 * h);
    let values: Vec<f64> = (0..=n)
        .map(|k| (4.0 * fine[2 * k] - coarse[k]) / 3.0)
        .collect();
    let residual = first_kind_residual(j0, &kernel, &values, h);
    if !(residual <= options.tolerance) {
        return Err(Error::Solver {
            residual,
            tolerance: options.tolerance,
        });
    }
    let one_sided = |g: &[f64], step: f64| (-3.0 * g[0] + 4.0 * g[1] - g[2]) / (2.0 * step);
    let g_prime0 = (4.0 * one_sided(&fine, 0.5 * h) - one_sided(&coarse, h)) / 3.0;
    Ok(RelaxationModulus {
        times: (0..=n).map(|k| k as f64 * h).collect(),
        values,
        g0: Limit::Finite(1.0 / j0),
        g_prime0,
        residual,
        step: h,
    })
}
