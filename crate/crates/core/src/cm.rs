//! Completely monotone functions and their spectral measures.
//!
//! A locally integrable completely monotone (LICM) function is represented
//! either by a closed form or by a positive measure `nu` on `]0, inf[`:
//!
//! ```text
//! phi(t) = a + int exp(-r t) nu(dr),      phi~(p) = a/p + int nu(dr) / (p + r)
//! ```
//!
//! Measures carry atoms plus a sampled density with an attached quadrature
//! rule, so both the time-domain value and the Stieltjes-type transform are
//! finite weighted sums.

use crate::error::{Error, Result};
use crate::special::{exp_e1, gamma, gauss_legendre, one_minus_exp_over, EULER_GAMMA};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Relative tolerance of the density quadrature, used by mass detection.
pub const QUADRATURE_TOL: f64 = 1e-6;

/// Relative threshold below which a divided-difference sign flip is
/// attributed to round-off.
pub const CM_SIGN_TOL: f64 = 1e-7;

const DECAY_CUTOFF: f64 = 36.0;

/// Placement of a logarithmic density grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogGrid {
    pub r_min: f64,
    pub r_max: f64,
    pub per_decade: usize,
}

impl LogGrid {
    /// Default placement for a model with reference timescale `scale`:
    /// `r` from `1e-6/scale` to `1e12/scale`, 64 points per decade.
    pub fn for_scale(scale: f64) -> Self {
        LogGrid {
            r_min: 1e-6 / scale,
            r_max: 1e12 / scale,
            per_decade: 64,
        }
    }

    pub fn refined(&self) -> Self {
        LogGrid {
            per_decade: self.per_decade * 2,
            ..*self
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        let decades = (self.r_max / self.r_min).log10();
        let n = (decades * self.per_decade as f64).round() as usize;
        (0..=n)
            .map(|j| self.r_min * 10f64.powf(j as f64 / self.per_decade as f64))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum QuadratureRule {
    /// Trapezoid in `ln r` (weights `r * dln r`), with power-law tail
    /// extrapolation beyond both grid edges.
    LogTrapezoid,
    /// Gauss-Legendre on panels under the map `r = a + (b-a)(1 - cos th)/2`,
    /// exact for square-root endpoint behaviour.
    PanelGauss,
}

/// Power-law continuation `h(r) ~ value * (r/edge)^slope` beyond a grid edge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerTail {
    pub edge: f64,
    pub value: f64,
    pub slope: f64,
}

impl PowerTail {
    fn low_mass(&self) -> f64 {
        self.value * self.edge / (self.slope + 1.0)
    }

    fn low_centroid(&self) -> f64 {
        self.edge * (self.slope + 1.0) / (self.slope + 2.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityGrid {
    nodes: Vec<f64>,
    values: Vec<f64>,
    weights: Vec<f64>,
    rule: QuadratureRule,
    low_tail: Option<PowerTail>,
    high_tail: Option<PowerTail>,
}

impl DensityGrid {
    /// Samples `h` on a logarithmic grid.
    pub fn log_trapezoid(grid: &LogGrid, h: impl Fn(f64) -> f64) -> Result<Self> {
        if !(grid.r_min > 0.0 && grid.r_max > grid.r_min && grid.per_decade >= 2) {
            return Err(Error::Construction(format!("bad log grid {grid:?}")));
        }
        let nodes = grid.nodes();
        let values: Vec<f64> = nodes.iter().map(|&r| h(r)).collect();
        Self::from_log_samples(nodes, values)
    }

    /// Trapezoid in `ln r` over caller-supplied samples.
    pub fn from_log_samples(nodes: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 || nodes.len() != values.len() {
            return Err(Error::Construction(
                "density needs at least two samples and matching lengths".into(),
            ));
        }
        validate_abscissa(&nodes)?;
        validate_values(&values)?;
        let n = nodes.len();
        let mut weights = vec![0.0; n];
        for j in 0..n - 1 {
            let dl = (nodes[j + 1] / nodes[j]).ln();
            weights[j] += 0.5 * dl * nodes[j];
            weights[j + 1] += 0.5 * dl * nodes[j + 1];
        }
        // Gregory end corrections: the integrand has not decayed at the grid
        // edges, so the plain trapezoid would be only second order.
        let dl0 = (nodes[1] / nodes[0]).ln();
        let uniform = n >= 8
            && nodes
                .windows(2)
                .all(|w| ((w[1] / w[0]).ln() - dl0).abs() <= 1e-9 * dl0);
        if uniform {
            const GREGORY: [f64; 3] = [3.0 / 8.0, 7.0 / 6.0, 23.0 / 24.0];
            for (k, g) in GREGORY.iter().enumerate() {
                weights[k] = g * dl0 * nodes[k];
                weights[n - 1 - k] = g * dl0 * nodes[n - 1 - k];
            }
        }
        let low_tail =
            edge_tail(nodes[0], nodes[1], values[0], values[1]).filter(|t| t.slope > -1.0);
        let high_tail = edge_tail(nodes[n - 1], nodes[n - 2], values[n - 1], values[n - 2]);
        if let Some(t) = high_tail {
            if t.slope >= 0.0 {
                return Err(Error::ModelValidity(format!(
                    "density grows like r^{:.3} at r = {:.3e}; int nu(dr)/(1+r) diverges",
                    t.slope, t.edge
                )));
            }
        }
        Ok(DensityGrid {
            nodes,
            values,
            weights,
            rule: QuadratureRule::LogTrapezoid,
            low_tail,
            high_tail,
        })
    }

    /// Cosine-mapped Gauss-Legendre on each panel `(a, b)`.
    pub fn panel_gauss(
        panels: &[(f64, f64)],
        order: usize,
        h: impl Fn(f64) -> f64,
    ) -> Result<Self> {
        let (x, w) = gauss_legendre(order);
        let mut nodes = Vec::with_capacity(panels.len() * order);
        let mut weights = Vec::with_capacity(panels.len() * order);
        for &(a, b) in panels {
            if !(a >= 0.0 && b > a) {
                return Err(Error::Construction(format!("bad panel ({a}, {b})")));
            }
            for (&xi, &wi) in x.iter().zip(&w) {
                let th = 0.5 * PI * (xi + 1.0);
                nodes.push(a + 0.5 * (b - a) * (1.0 - th.cos()));
                weights.push(0.5 * PI * wi * 0.5 * (b - a) * th.sin());
            }
        }
        validate_abscissa(&nodes)?;
        let values: Vec<f64> = nodes.iter().map(|&r| h(r)).collect();
        validate_values(&values)?;
        Ok(DensityGrid {
            nodes,
            values,
            weights,
            rule: QuadratureRule::PanelGauss,
            low_tail: None,
            high_tail: None,
        })
    }

    pub fn rule(&self) -> QuadratureRule {
        self.rule
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Quadrature masses `w_j * h(r_j)`.
    pub fn masses(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes
            .iter()
            .zip(self.weights.iter().zip(&self.values))
            .map(|(&r, (&w, &h))| (r, w * h))
    }

    pub fn r_min(&self) -> f64 {
        self.nodes[0]
    }

    pub fn r_max(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    fn laplace(&self, p: Complex64) -> Complex64 {
        let mut acc: Complex64 = self.masses().map(|(r, m)| m / (p + r)).sum();
        if let Some(t) = self.low_tail {
            acc += t.low_mass() / (p + t.low_centroid());
        }
        if let Some(t) = self.high_tail {
            acc += t.value / (-t.slope) - p * t.value / (t.edge * (1.0 - t.slope));
        }
        acc
    }

    fn eval(&self, t: f64) -> f64 {
        let mut acc: f64 = self.masses().map(|(r, m)| m * (-r * t).exp()).sum();
        if let Some(tail) = self.low_tail {
            acc += tail.low_mass() * (-tail.low_centroid() * t).exp();
        }
        if let Some(tail) = self.high_tail {
            let x = tail.edge * t;
            acc += tail.value * tail.edge * (-x).exp() / (x - tail.slope);
        }
        acc
    }

    fn integral(&self, t: f64) -> f64 {
        let mut acc: f64 = self
            .masses()
            .map(|(r, m)| m * t * one_minus_exp_over(r * t))
            .sum();
        if let Some(tail) = self.low_tail {
            acc += tail.low_mass() * t * one_minus_exp_over(tail.low_centroid() * t);
        }
        if let Some(tail) = self.high_tail {
            let x = tail.edge * t;
            acc += tail.value / (-tail.slope) - tail.value * (-x).exp() / (x - tail.slope);
        }
        acc
    }

    fn quadrature_mass(&self) -> f64 {
        self.masses().map(|(_, m)| m).sum()
    }
}

fn edge_tail(edge: f64, inner: f64, h_edge: f64, h_inner: f64) -> Option<PowerTail> {
    if h_edge > 0.0 && h_inner > 0.0 {
        Some(PowerTail {
            edge,
            value: h_edge,
            slope: (h_edge / h_inner).ln() / (edge / inner).ln(),
        })
    } else {
        None
    }
}

fn validate_abscissa(nodes: &[f64]) -> Result<()> {
    if nodes.iter().any(|&r| !(r > 0.0 && r.is_finite())) {
        return Err(Error::Construction(
            "measure locations must be positive".into(),
        ));
    }
    if nodes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Construction(
            "measure locations must be strictly increasing".into(),
        ));
    }
    Ok(())
}

fn validate_values(values: &[f64]) -> Result<()> {
    if values.iter().any(|&h| !(h >= 0.0 && h.is_finite())) {
        return Err(Error::Construction(
            "density values must be finite and non-negative".into(),
        ));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub location: f64,
    pub weight: f64,
}

/// Outcome of a limit or total-mass determination.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Limit {
    Finite(f64),
    Infinite,
    Undetermined,
}

impl Limit {
    pub fn finite(&self) -> Option<f64> {
        match *self {
            Limit::Finite(v) => Some(v),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AccuracyWarning {
    /// `t * r_max` too small: the kernel has not decayed at the grid top.
    TruncatedHigh,
    /// `t * r_min` large: the whole grid has decayed, the low tail dominates.
    TruncatedLow,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluated {
    pub value: f64,
    pub warning: Option<AccuracyWarning>,
}

/// Positive Radon measure on `]0, inf[`: atoms plus a sampled density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralMeasure {
    atoms: Vec<Atom>,
    density: Option<DensityGrid>,
    scale: f64,
}

impl SpectralMeasure {
    pub fn new(mut atoms: Vec<Atom>, density: Option<DensityGrid>, scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::Construction("measure scale must be positive".into()));
        }
        atoms.retain(|a| a.weight != 0.0);
        atoms.sort_by(|a, b| a.location.total_cmp(&b.location));
        let locs: Vec<f64> = atoms.iter().map(|a| a.location).collect();
        validate_abscissa(&locs)?;
        if atoms
            .iter()
            .any(|a| !(a.weight > 0.0 && a.weight.is_finite()))
        {
            return Err(Error::Construction(
                "atom weights must be non-negative".into(),
            ));
        }
        Ok(SpectralMeasure {
            atoms,
            density,
            scale,
        })
    }

    pub fn empty() -> Self {
        SpectralMeasure {
            atoms: Vec::new(),
            density: None,
            scale: 1.0,
        }
    }

    pub fn atom(location: f64, weight: f64) -> Result<Self> {
        Self::new(vec![Atom { location, weight }], None, 1.0 / location)
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn density(&self) -> Option<&DensityGrid> {
        self.density.as_ref()
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Discrete point masses: atoms followed by density quadrature nodes.
    pub fn point_masses(&self) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64)> = self.atoms.iter().map(|a| (a.location, a.weight)).collect();
        if let Some(d) = &self.density {
            out.extend(d.masses());
            if let Some(t) = d.low_tail {
                out.push((t.low_centroid(), t.low_mass()));
            }
        }
        out
    }

    /// `int exp(-r t) nu(dr)`.
    pub fn eval(&self, t: f64) -> Evaluated {
        let mut value: f64 = self
            .atoms
            .iter()
            .map(|a| a.weight * (-a.location * t).exp())
            .sum();
        let mut warning = None;
        if let Some(d) = &self.density {
            value += d.eval(t);
            if d.rule == QuadratureRule::LogTrapezoid {
                if t * d.r_max() < DECAY_CUTOFF && d.high_tail.is_some() {
                    warning = Some(AccuracyWarning::TruncatedHigh);
                } else if t * d.r_min() > DECAY_CUTOFF {
                    warning = Some(AccuracyWarning::TruncatedLow);
                }
            }
        }
        Evaluated { value, warning }
    }

    /// `int nu(dr) / (p + r)`, valid off the negative real axis.
    pub fn laplace(&self, p: Complex64) -> Complex64 {
        let mut acc: Complex64 = self.atoms.iter().map(|a| a.weight / (p + a.location)).sum();
        if let Some(d) = &self.density {
            acc += d.laplace(p);
        }
        acc
    }

    /// `int_0^t phi(s) ds` for `phi(t) = int exp(-r t) nu(dr)`.
    pub fn integral(&self, t: f64) -> f64 {
        let mut acc: f64 = self
            .atoms
            .iter()
            .map(|a| a.weight * t * one_minus_exp_over(a.location * t))
            .sum();
        if let Some(d) = &self.density {
            acc += d.integral(t);
        }
        acc
    }

    /// `int_{r_max}^inf h(r) / r dr` of the high-tail continuation, the part
    /// of the measure that acts as an impulse at grid resolution.
    pub fn high_tail_impulse(&self) -> f64 {
        self.density
            .as_ref()
            .and_then(|d| d.high_tail)
            .map_or(0.0, |t| t.value / (-t.slope))
    }

    /// `int nu(dr) / (1 + r)`.
    pub fn doss_integral(&self) -> f64 {
        self.laplace(Complex64::new(1.0, 0.0)).re
    }

    /// Total mass, with decade-increment detection of divergence for
    /// logarithmic grids.
    pub fn total_mass(&self) -> Limit {
        let atoms: f64 = self.atoms.iter().map(|a| a.weight).sum();
        let Some(d) = &self.density else {
            return Limit::Finite(atoms);
        };
        let low = d.low_tail.map_or(0.0, |t| t.low_mass());
        let body = d.quadrature_mass();
        if d.rule == QuadratureRule::PanelGauss {
            return Limit::Finite(atoms + low + body);
        }
        let top = d.r_max();
        let decade_mass = |k: f64| -> f64 {
            let hi = top / 10f64.powf(k);
            let lo = hi / 10.0;
            d.masses()
                .filter(|&(r, _)| r > lo * (1.0 + 1e-12) && r <= hi * (1.0 + 1e-12))
                .map(|(_, m)| m)
                .sum()
        };
        let total = atoms + low + body;
        if total == 0.0 {
            return Limit::Finite(0.0);
        }
        let increments = [decade_mass(0.0), decade_mass(1.0), decade_mass(2.0)];
        let threshold = QUADRATURE_TOL * total;
        let converging = increments.iter().all(|&m| m <= threshold);
        let diverging = increments.iter().all(|&m| m > threshold);
        match (converging, diverging) {
            (true, _) => {
                let high = d
                    .high_tail
                    .filter(|t| t.slope < -1.0)
                    .map_or(0.0, |t| t.value * t.edge / (-t.slope - 1.0));
                Limit::Finite(total + high)
            }
            (false, true) => Limit::Infinite,
            _ => Limit::Undetermined,
        }
    }

    /// Pointwise sum with another measure; densities collapse to point masses.
    pub fn merged(&self, other: &SpectralMeasure) -> Result<SpectralMeasure> {
        let mut masses = self.point_masses();
        masses.extend(other.point_masses());
        masses.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut atoms: Vec<Atom> = Vec::with_capacity(masses.len());
        for (location, weight) in masses {
            match atoms.last_mut() {
                Some(last) if last.location == location => last.weight += weight,
                _ => atoms.push(Atom { location, weight }),
            }
        }
        SpectralMeasure::new(atoms, None, self.scale.min(other.scale))
    }
}

/// A locally integrable completely monotone function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CmFunction {
    Zero,
    Constant {
        value: f64,
    },
    /// `weight * exp(-rate t)`.
    Exponential {
        weight: f64,
        rate: f64,
    },
    /// `amplitude * t^(-exponent) / Gamma(1 - exponent)`, so that
    /// `p * f~(p) = amplitude * p^exponent`.
    PowerLaw {
        amplitude: f64,
        exponent: f64,
    },
    /// `strength * ln(1/(rate t) + offset)`, `offset >= 1`.
    Logarithmic {
        rate: f64,
        strength: f64,
        offset: f64,
    },
    Measure {
        measure: SpectralMeasure,
    },
    Sum {
        terms: Vec<CmFunction>,
    },
}

impl CmFunction {
    pub fn constant(value: f64) -> Result<Self> {
        if !(value >= 0.0 && value.is_finite()) {
            return Err(Error::Construction(format!(
                "constant {value} must be non-negative"
            )));
        }
        Ok(CmFunction::Constant { value })
    }

    pub fn exponential(weight: f64, rate: f64) -> Result<Self> {
        if !(weight >= 0.0 && rate > 0.0 && weight.is_finite() && rate.is_finite()) {
            return Err(Error::Construction(format!(
                "exponential needs weight >= 0 and rate > 0, got ({weight}, {rate})"
            )));
        }
        Ok(CmFunction::Exponential { weight, rate })
    }

    pub fn power_law(amplitude: f64, exponent: f64) -> Result<Self> {
        if !(amplitude > 0.0 && amplitude.is_finite()) {
            return Err(Error::Construction(format!(
                "power-law amplitude {amplitude} must be > 0"
            )));
        }
        if !(exponent > 0.0 && exponent < 1.0) {
            return Err(Error::Construction(format!(
                "power-law exponent {exponent} must lie in ]0, 1["
            )));
        }
        Ok(CmFunction::PowerLaw {
            amplitude,
            exponent,
        })
    }

    pub fn logarithmic(rate: f64, strength: f64, offset: f64) -> Result<Self> {
        if !(rate > 0.0 && strength > 0.0 && rate.is_finite() && strength.is_finite()) {
            return Err(Error::Construction(format!(
                "logarithmic kernel needs a, b > 0, got a = {rate}, b = {strength}"
            )));
        }
        if !(offset >= 1.0 && offset.is_finite()) {
            return Err(Error::Construction(format!(
                "logarithmic kernel needs A >= 1, got {offset}"
            )));
        }
        Ok(CmFunction::Logarithmic {
            rate,
            strength,
            offset,
        })
    }

    pub fn from_measure(measure: SpectralMeasure) -> Self {
        CmFunction::Measure { measure }
    }

    pub fn sum(terms: Vec<CmFunction>) -> Self {
        CmFunction::Sum { terms }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            CmFunction::Zero => true,
            CmFunction::Constant { value } => *value == 0.0,
            CmFunction::Exponential { weight, .. } => *weight == 0.0,
            CmFunction::Measure { measure } => {
                measure.atoms.is_empty()
                    && measure
                        .density
                        .as_ref()
                        .is_none_or(|d| d.values.iter().all(|&h| h == 0.0))
            }
            CmFunction::Sum { terms } => terms.iter().all(CmFunction::is_zero),
            _ => false,
        }
    }

    /// Reference timescale used to place density grids.
    pub fn scale(&self) -> f64 {
        match self {
            CmFunction::Exponential { rate, .. } => 1.0 / rate,
            CmFunction::Logarithmic { rate, .. } => 1.0 / rate,
            CmFunction::Measure { measure } => measure.scale,
            CmFunction::Sum { terms } => terms.first().map_or(1.0, CmFunction::scale),
            _ => 1.0,
        }
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        self.eval_detailed(t).map(|e| e.value)
    }

    pub fn eval_detailed(&self, t: f64) -> Result<Evaluated> {
        if !(t > 0.0) {
            return Err(Error::domain(
                "eval_cm",
                format!("t = {t} must be positive"),
            ));
        }
        Ok(self.eval_unchecked(t))
    }

    fn eval_unchecked(&self, t: f64) -> Evaluated {
        let plain = |value| Evaluated {
            value,
            warning: None,
        };
        match self {
            CmFunction::Zero => plain(0.0),
            CmFunction::Constant { value } => plain(*value),
            CmFunction::Exponential { weight, rate } => plain(weight * (-rate * t).exp()),
            CmFunction::PowerLaw {
                amplitude,
                exponent,
            } => plain(amplitude * t.powf(-exponent) / gamma(1.0 - exponent)),
            CmFunction::Logarithmic {
                rate,
                strength,
                offset,
            } => plain(strength * (1.0 / (rate * t) + offset).ln()),
            CmFunction::Measure { measure } => measure.eval(t),
            CmFunction::Sum { terms } => {
                let mut value = 0.0;
                let mut warning = None;
                for term in terms {
                    let e = term.eval_unchecked(t);
                    value += e.value;
                    warning = warning.or(e.warning);
                }
                Evaluated { value, warning }
            }
        }
    }

    /// Laplace transform on the open right half-plane.
    pub fn laplace(&self, p: Complex64) -> Result<Complex64> {
        if !(p.re > 0.0) {
            return Err(Error::domain(
                "laplace_cm",
                format!(
                    "Re p = {} must be positive; boundary values live in dispersion",
                    p.re
                ),
            ));
        }
        Ok(self.laplace_cut(p))
    }

    /// Analytic continuation of the Laplace transform to the plane cut
    /// along `]-inf, 0]`.
    pub fn laplace_cut(&self, p: Complex64) -> Complex64 {
        match self {
            CmFunction::Zero => Complex64::new(0.0, 0.0),
            _ => self.p_laplace_cut(p) / p,
        }
    }

    /// `p * f~(p)` on the cut plane, computed without dividing by `p` where a
    /// closed form exists.
    pub fn p_laplace_cut(&self, p: Complex64) -> Complex64 {
        match self {
            CmFunction::Zero => Complex64::new(0.0, 0.0),
            CmFunction::Constant { value } => Complex64::new(*value, 0.0),
            CmFunction::Exponential { weight, rate } => *weight * p / (p + rate),
            CmFunction::PowerLaw {
                amplitude,
                exponent,
            } => *amplitude * (*exponent * p.ln()).exp(),
            CmFunction::Logarithmic {
                rate,
                strength,
                offset,
            } => {
                let x = p / (rate * offset);
                *strength * (offset.ln() + x.ln() + EULER_GAMMA + exp_e1(x))
            }
            CmFunction::Measure { measure } => p * measure.laplace(p),
            CmFunction::Sum { terms } => terms.iter().map(|f| f.p_laplace_cut(p)).sum(),
        }
    }

    /// `lim_{t -> 0+}`.
    pub fn limit_at_zero(&self) -> Limit {
        match self {
            CmFunction::Zero => Limit::Finite(0.0),
            CmFunction::Constant { value } => Limit::Finite(*value),
            CmFunction::Exponential { weight, .. } => Limit::Finite(*weight),
            CmFunction::PowerLaw { .. } | CmFunction::Logarithmic { .. } => Limit::Infinite,
            CmFunction::Measure { measure } => measure.total_mass(),
            CmFunction::Sum { terms } => {
                let mut total = 0.0;
                let mut undetermined = false;
                for term in terms {
                    match term.limit_at_zero() {
                        Limit::Finite(v) => total += v,
                        Limit::Infinite => return Limit::Infinite,
                        Limit::Undetermined => undetermined = true,
                    }
                }
                if undetermined {
                    Limit::Undetermined
                } else {
                    Limit::Finite(total)
                }
            }
        }
    }

    /// `lim_{t -> inf}`, the mass of the measure at `r = 0`.
    pub fn limit_at_infinity(&self) -> f64 {
        match self {
            CmFunction::Constant { value } => *value,
            CmFunction::Logarithmic {
                strength, offset, ..
            } => strength * offset.ln(),
            CmFunction::Sum { terms } => terms.iter().map(CmFunction::limit_at_infinity).sum(),
            _ => 0.0,
        }
    }

    /// `int_0^t f(s) ds`.
    pub fn integral(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::domain(
                "f_integral",
                format!("t = {t} must be non-negative"),
            ));
        }
        if t == 0.0 {
            return Ok(0.0);
        }
        Ok(match self {
            CmFunction::Zero => 0.0,
            CmFunction::Constant { value } => value * t,
            CmFunction::Exponential { weight, rate } => weight * t * one_minus_exp_over(rate * t),
            CmFunction::PowerLaw {
                amplitude,
                exponent,
            } => amplitude * t.powf(1.0 - exponent) / gamma(2.0 - exponent),
            CmFunction::Logarithmic {
                rate,
                strength,
                offset,
            } => {
                let aa = rate * offset;
                strength * (t * (1.0 / (rate * t) + offset).ln() + (aa * t).ln_1p() / aa)
            }
            CmFunction::Measure { measure } => measure.integral(t),
            CmFunction::Sum { terms } => {
                let mut acc = 0.0;
                for term in terms {
                    acc += term.integral(t)?;
                }
                acc
            }
        })
    }

    /// Spectral measure of the non-constant part (the constant is the mass at
    /// `r = 0`, see [`CmFunction::limit_at_infinity`]).
    pub fn spectral_measure(&self, grid: &LogGrid) -> Result<SpectralMeasure> {
        let scale = self.scale();
        match self {
            CmFunction::Zero | CmFunction::Constant { .. } => Ok(SpectralMeasure {
                scale,
                ..SpectralMeasure::empty()
            }),
            CmFunction::Exponential { weight, rate } => SpectralMeasure::new(
                vec![Atom {
                    location: *rate,
                    weight: *weight,
                }],
                None,
                scale,
            ),
            CmFunction::PowerLaw { .. } | CmFunction::Logarithmic { .. } => {
                let density = DensityGrid::log_trapezoid(grid, |r| self.closed_form_density(r))?;
                SpectralMeasure::new(Vec::new(), Some(density), scale)
            }
            CmFunction::Measure { measure } => Ok(measure.clone()),
            CmFunction::Sum { terms } => {
                let mut acc = SpectralMeasure::empty();
                for term in terms {
                    acc = acc.merged(&term.spectral_measure(grid)?)?;
                }
                acc.scale = scale;
                Ok(acc)
            }
        }
    }

    /// Closed-form spectral density where one exists.
    pub fn closed_form_density(&self, r: f64) -> f64 {
        match self {
            CmFunction::PowerLaw {
                amplitude,
                exponent,
            } => amplitude * (exponent * PI).sin() / PI * r.powf(exponent - 1.0),
            CmFunction::Logarithmic {
                rate,
                strength,
                offset,
            } => strength * one_minus_exp_over(r / (rate * offset)) / (rate * offset),
            CmFunction::Sum { terms } => terms.iter().map(|f| f.closed_form_density(r)).sum(),
            _ => 0.0,
        }
    }
}

/// Per-order outcome of a divided-difference sign test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderCheck {
    pub order: usize,
    pub max_violation: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CmReport {
    pub max_violation: f64,
    pub orders: Vec<OrderCheck>,
}

impl CmReport {
    pub fn pass(&self) -> bool {
        self.orders.iter().all(|o| o.pass)
    }

    /// First order whose sign test failed.
    pub fn first_failure(&self) -> Option<usize> {
        self.orders.iter().find(|o| !o.pass).map(|o| o.order)
    }
}

/// Geometric grid with `per_decade` points per decade.
pub fn geometric_grid(t_min: f64, t_max: f64, per_decade: usize) -> Vec<f64> {
    let n = ((t_max / t_min).log10() * per_decade as f64)
        .ceil()
        .max(1.0) as usize;
    (0..=n)
        .map(|j| t_min * (t_max / t_min).powf(j as f64 / n as f64))
        .collect()
}

/// Divided-difference sign test of complete monotonicity.
///
/// For a CM function every divided difference of order `n` has the sign of
/// `(-1)^n`. A violation is measured relative to `sum_j |f_j| / prod |x_j - x_k|`,
/// the size of the round-off in the difference itself.
#[allow(clippy::needless_range_loop)]
pub fn check_cm(f: impl Fn(f64) -> f64, grid: &[f64], max_order: usize) -> CmReport {
    assert!(max_order >= 1, "order must be at least 1");
    assert!(
        grid.windows(2).all(|w| w[1] > w[0]),
        "grid must be strictly increasing"
    );
    let values: Vec<f64> = grid.iter().map(|&t| f(t)).collect();
    let mut table = values.clone();
    let mut orders = Vec::with_capacity(max_order);
    for n in 1..=max_order.min(grid.len().saturating_sub(1)) {
        for i in 0..grid.len() - n {
            table[i] = (table[i + 1] - table[i]) / (grid[i + n] - grid[i]);
        }
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        let mut worst: f64 = 0.0;
        for i in 0..grid.len() - n {
            let magnitude: f64 = (i..=i + n)
                .map(|j| {
                    let denom: f64 = (i..=i + n)
                        .filter(|&k| k != j)
                        .map(|k| (grid[j] - grid[k]).abs())
                        .product();
                    values[j].abs() / denom
                })
                .sum();
            if magnitude == 0.0 {
                continue;
            }
            let v = (-sign * table[i]).max(0.0) / magnitude;
            worst = worst.max(v);
        }
        orders.push(OrderCheck {
            order: n,
            max_violation: worst,
            pass: worst <= CM_SIGN_TOL,
        });
    }
    let max_violation = orders.iter().map(|o| o.max_violation).fold(0.0, f64::max);
    CmReport {
        max_violation,
        orders,
    }
}

/// Tests that `x f(x)` is CM, i.e. that `f` is the Laplace transform of a
/// non-negative non-decreasing function.
pub fn check_bernstein_pair(f: impl Fn(f64) -> f64, grid: &[f64], max_order: usize) -> CmReport {
    check_cm(|x| x * f(x), grid, max_order)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn eval_examples() {
        let pl = CmFunction::power_law(1.0, 0.5).unwrap();
        // 1/Gamma(1/2) = 1/sqrt(pi)
        assert!((pl.eval(1.0).unwrap() - 1.0 / PI.sqrt()).abs() < 1e-12);
        assert_eq!(CmFunction::Zero.eval(3.7).unwrap(), 0.0);
        let atom = CmFunction::from_measure(SpectralMeasure::atom(1.0, 1.0).unwrap());
        assert!((atom.eval(2f64.ln()).unwrap() - 0.5).abs() < 1e-15);
        assert!(matches!(pl.eval(0.0), Err(Error::Domain { .. })));
        assert!(matches!(pl.eval(-1.0), Err(Error::Domain { .. })));
    }

    #[test]
    fn laplace_examples() {
        let pl = CmFunction::power_law(1.0, 0.5).unwrap();
        assert!((pl.laplace(c(4.0)).unwrap().re - 0.5).abs() < 1e-14);
        assert_eq!(CmFunction::Zero.laplace(c(2.0)).unwrap(), c(0.0));
        let atom = CmFunction::from_measure(SpectralMeasure::atom(1.0, 1.0).unwrap());
        assert!((atom.laplace(c(1.0)).unwrap() - 0.5).norm() < 1e-15);
        assert!(pl.laplace(Complex64::new(0.0, 1.0)).is_err());
        assert!(pl.laplace(c(-1.0)).is_err());
    }

    #[test]
    fn check_cm_examples() {
        let grid = geometric_grid(0.1, 10.0, 4);
        let r = check_cm(|t| (-t).exp(), &grid, 6);
        assert!(r.pass(), "{r:?}");
        let r = check_cm(|t| (1.0 / t + 2.0).ln(), &grid, 6);
        assert!(r.pass(), "{r:?}");
        let r = check_cm(f64::sin, &geometric_grid(0.1, 1.5, 6), 2);
        assert_eq!(r.first_failure(), Some(1));
    }

    #[test]
    fn bernstein_pair_examples() {
        let grid = geometric_grid(0.05, 20.0, 5);
        // g = theta(t): f = 1/x, x f = 1
        assert!(check_bernstein_pair(|x| 1.0 / x, &grid, 6).pass());
        // g = t: f = 1/x^2, x f = 1/x
        assert!(check_bernstein_pair(|x| 1.0 / (x * x), &grid, 6).pass());
        // g = exp(-t) is decreasing: x/(x+1) is increasing, not CM.
        let r = check_bernstein_pair(|x| 1.0 / (x + 1.0), &grid, 6);
        assert_eq!(r.first_failure(), Some(1));
    }

    #[test]
    fn log_closed_form_matches_its_measure() {
        let f = CmFunction::logarithmic(2.0, 1.5, 3.0).unwrap();
        let grid = LogGrid::for_scale(f.scale());
        let m = CmFunction::sum(vec![
            CmFunction::constant(f.limit_at_infinity()).unwrap(),
            CmFunction::from_measure(f.spectral_measure(&grid).unwrap()),
        ]);
        for &t in &[1e-3, 0.1, 1.0, 10.0] {
            let (a, b) = (f.eval(t).unwrap(), m.eval(t).unwrap());
            assert!((a - b).abs() < 1e-8 * a, "t={t}: {a} vs {b}");
        }
        for &p in &[0.1, 1.0, 10.0, 1e3] {
            let (a, b) = (f.laplace(c(p)).unwrap(), m.laplace(c(p)).unwrap());
            assert!((a - b).norm() < 1e-8 * a.norm(), "p={p}: {a} vs {b}");
        }
        // mpmath reference: p g~(p) at p = 1 for (a, b, A) = (2, 1.5, 3)
        assert!((f.p_laplace_cut(c(1.0)).re - 2.261_799_847_369_374).abs() < 1e-12);
    }

    #[test]
    fn power_law_measure_reproduces_closed_form() {
        let f = CmFunction::power_law(1.0, 0.5).unwrap();
        let grid = LogGrid::for_scale(1.0);
        let m = CmFunction::from_measure(f.spectral_measure(&grid).unwrap());
        for &p in &[1e-2, 1.0, 1e2, 1e4] {
            let (a, b) = (f.p_laplace_cut(c(p)), m.p_laplace_cut(c(p)));
            assert!((a - b).norm() < 1e-7 * a.norm(), "p={p}: {a} vs {b}");
        }
        assert_eq!(m.limit_at_zero(), Limit::Infinite);
    }

    #[test]
    fn mass_detection() {
        let grid = LogGrid::for_scale(1.0);
        let log = CmFunction::logarithmic(1.0, 1.0, 1.0).unwrap();
        assert_eq!(
            log.spectral_measure(&grid).unwrap().total_mass(),
            Limit::Infinite
        );
        let finite = SpectralMeasure::new(
            Vec::new(),
            Some(DensityGrid::log_trapezoid(&grid, |r| 1.0 / (1.0 + r * r)).unwrap()),
            1.0,
        )
        .unwrap();
        let Limit::Finite(m) = finite.total_mass() else {
            panic!("expected finite mass");
        };
        assert!((m - PI / 2.0).abs() < 1e-6, "{m}");
    }

    #[test]
    fn construction_errors() {
        assert!(CmFunction::power_law(1.0, 1.0).is_err());
        assert!(CmFunction::power_law(1.0, 0.0).is_err());
        assert!(CmFunction::logarithmic(1.0, 1.0, 0.5).is_err());
        assert!(SpectralMeasure::new(
            vec![Atom {
                location: -1.0,
                weight: 1.0
            }],
            None,
            1.0
        )
        .is_err());
        assert!(DensityGrid::from_log_samples(vec![1.0, 2.0], vec![1.0, -1.0]).is_err());
        assert!(DensityGrid::from_log_samples(vec![2.0, 1.0], vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn refinement_changes_little() {
        let f = CmFunction::logarithmic(1.0, 1.0, 1.0).unwrap();
        let grid = LogGrid::for_scale(1.0);
        let m1 = f.spectral_measure(&grid).unwrap();
        let m2 = f.spectral_measure(&grid.refined()).unwrap();
        for &t in &[1e-4, 1e-2, 1.0, 1e2] {
            let (a, b) = (m1.eval(t).value, m2.eval(t).value);
            assert!((a - b).abs() < QUADRATURE_TOL * a.abs(), "t={t}");
        }
        for &p in &[1e-2, 1.0, 1e3] {
            let (a, b) = (m1.laplace(c(p)), m2.laplace(c(p)));
            assert!((a - b).norm() < QUADRATURE_TOL * a.norm(), "p={p}");
        }
    }
}
