//! Verification suite: module invariants evaluated on a model, each reported
//! with its residual and tolerance.
//!
//! Checks whose failure reflects a slow mathematical approach rather than a
//! defect (the phase ratio and the large-`tau` kernel limit for singular `g`)
//! are advisory and never gate the verdict.

use crate::cm::{check_cm, geometric_grid, CmFunction, Limit};
use crate::dispersion::Medium;
use crate::error::{Error, Result};
use crate::inversion::{greens_u, greens_u_direct, kernel_value, wavefront_kernel};
use crate::material::{solve_duality, DualityOptions, ModelSpec};
use crate::wavefront::{
    asymptotic_phase_ratio, g_vs_creep_rate_check, jump_amplitude, jump_criterion,
    regularization_exponent, upper_bound_check, Verdict,
};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub gating: bool,
    pub note: String,
}

impl Check {
    fn gate(name: &str, residual: f64, tolerance: f64) -> Self {
        Check {
            name: name.into(),
            residual,
            tolerance,
            pass: residual <= tolerance,
            gating: true,
            note: String::new(),
        }
    }

    fn advisory(name: &str, residual: f64, tolerance: f64, note: &str) -> Self {
        Check {
            gating: false,
            note: note.into(),
            ..Self::gate(name, residual, tolerance)
        }
    }

    fn failed(name: &str, e: &Error) -> Self {
        Check {
            name: name.into(),
            residual: f64::NAN,
            tolerance: 0.0,
            pass: false,
            gating: true,
            note: e.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSuite {
    pub label: String,
    pub checks: Vec<Check>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub suites: Vec<ModelSuite>,
}

impl VerifyReport {
    pub fn pass(&self) -> bool {
        self.suites
            .iter()
            .flat_map(|s| &s.checks)
            .all(|c| c.pass || !c.gating)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for suite in &self.suites {
            let _ = writeln!(s, "[{}]", suite.label);
            for c in &suite.checks {
                let status = match (c.pass, c.gating) {
                    (true, _) => "pass",
                    (false, true) => "FAIL",
                    (false, false) => "advisory",
                };
                let _ = write!(
                    s,
                    "  {status:<8} {:<28} residual {:.3e} (tol {:.1e})",
                    c.name, c.residual, c.tolerance
                );
                if !c.note.is_empty() {
                    let _ = write!(s, "  {}", c.note);
                }
                s.push('\n');
            }
        }
        let _ = writeln!(s, "verdict: {}", if self.pass() { "pass" } else { "FAIL" });
        s
    }
}

fn run(name: &str, checks: &mut Vec<Check>, f: impl FnOnce() -> Result<Check>) {
    checks.push(f().unwrap_or_else(|e| Check::failed(name, &e)));
}

/// Runs every applicable invariant on `medium`. `tol` is the agreement
/// tolerance between the kernel and direct Green's function routes.
pub fn verify_medium(medium: &Medium, tol: f64) -> ModelSuite {
    let s = medium.scale();
    let r = 1.0;
    let mut checks = Vec::new();

    run("g completely monotone", &mut checks, || {
        let grid = geometric_grid(1e-2 * s, 1e2 * s, 4);
        let vals = grid
            .iter()
            .map(|&t| medium.g_of_t(t))
            .collect::<Result<Vec<_>>>()?;
        let rep = check_cm(
            |t| vals[grid.iter().position(|&x| x == t).unwrap()],
            &grid,
            4,
        );
        Ok(Check::gate(
            "g completely monotone",
            rep.max_violation,
            crate::cm::CM_SIGN_TOL,
        ))
    });

    run("kernel monotone and bounded", &mut checks, || {
        let taus = geometric_grid(1e-3 * s, 1e2 * s, 4);
        let k = wavefront_kernel(medium, r, &taus)?;
        let mut worst: f64 = 0.0;
        for w in k.h.windows(2) {
            worst = worst.max(w[0] - w[1]);
        }
        for &h in &k.h {
            worst = worst.max(-h).max(h - 1.0);
        }
        Ok(Check::gate(
            "kernel monotone and bounded",
            worst.max(0.0),
            1e-9,
        ))
    });

    run("kernel long-time limit", &mut checks, || {
        let h = kernel_value(medium, r, 1e3 * s)?.value;
        let target = (-medium.g_inf() * r).exp();
        let dev = (h - target).abs();
        Ok(if matches!(medium.g0(), Limit::Finite(_)) {
            Check::gate("kernel long-time limit", dev, 1e-4)
        } else {
            Check::advisory(
                "kernel long-time limit",
                dev,
                1e-4,
                "slow algebraic approach for singular g",
            )
        })
    });

    run("causality", &mut checks, || {
        let x = 1.0;
        let t = 0.5 * x / medium.c0();
        let u = greens_u(medium, t, x)?
            .u
            .abs()
            .max(greens_u_direct(medium, t, x)?.u.abs());
        Ok(Check::gate("causality", u, 0.0))
    });

    run("kernel vs direct route", &mut checks, || {
        let x = 1.0;
        let front = x / medium.c0();
        let mut worst: f64 = 0.0;
        for &tau in &[1e-2 * s, 0.3 * s, 2.0 * s] {
            let a = greens_u(medium, front + tau, x)?.u;
            let b = greens_u_direct(medium, front + tau, x)?.u;
            worst = worst.max((a - b).abs() / b.abs().max(1e-300));
        }
        Ok(Check::gate("kernel vs direct route", worst, tol))
    });

    let criterion = jump_criterion(medium);
    checks.push(Check {
        pass: criterion.verdict != Verdict::Undetermined,
        note: format!("{:?}", criterion.verdict),
        ..Check::gate("jump criterion routes agree", 0.0, 0.0)
    });

    if let Verdict::Discontinuous { .. } = criterion.verdict {
        run("jump amplitude routes", &mut checks, || {
            let a = jump_amplitude(medium, r)?;
            Ok(Check::gate("jump amplitude routes", a.discrepancy, 1e-3))
        });
    }

    let hypothesis_holds = !medium.g().is_zero()
        && crate::wavefront::hypothesis_violation(medium.g(), 1e-4 * s, 1e-1 * s)
            .ok()
            .flatten()
            .is_none();
    if hypothesis_holds {
        run("upper bound", &mut checks, || {
            let b = upper_bound_check(
                medium,
                &[0.5, 1.0, 2.0],
                &geometric_grid(1e-4 * s, 1e-1 * s, 4),
            )?;
            Ok(Check::gate("upper bound", b.max_violation, 1e-3))
        });
    }

    run("phase ratio", &mut checks, || {
        let mut taus = geometric_grid(1e-3 * s, 1e-1 * s, 2);
        taus.reverse();
        let trace = asymptotic_phase_ratio(medium, r, &taus)?;
        let last = *trace.ratio.last().unwrap_or(&f64::NAN);
        let dev = if trace.monotone_toward_one() {
            (last - 1.0).abs()
        } else {
            f64::INFINITY
        };
        Ok(Check::advisory(
            "phase ratio",
            dev,
            0.05,
            "t phi'(t) -> 0 is needed for the limit",
        ))
    });

    if let CmFunction::Logarithmic { .. } = medium.g() {
        run("regularisation exponent", &mut checks, || {
            let fit = regularization_exponent(medium, r, (1e-4 * s, 1e-3 * s))?;
            Ok(Check::gate(
                "regularisation exponent",
                (fit.exponent - fit.expected).abs() / fit.expected,
                0.1,
            ))
        });
    }

    if let ModelSpec::Compliance(j) = &medium.model().spec {
        run("Kramers-Kronig identity", &mut checks, || {
            let grid = geometric_grid(1e-2 / s, 1e2 / s, 4);
            Ok(Check::gate(
                "Kramers-Kronig identity",
                medium.kk_identity_residual(&grid)?,
                1e-4,
            ))
        });
        run("g <= rho c0 J'/2", &mut checks, || {
            let grid = geometric_grid(1e-2 * s, 10.0 * s, 8);
            Ok(Check::gate(
                "g <= rho c0 J'/2",
                g_vs_creep_rate_check(medium, &grid)?.max(0.0),
                1e-6,
            ))
        });
        run("duality residual", &mut checks, || {
            let g = solve_duality(j, &DualityOptions::for_compliance(j))?;
            let mut c = Check::gate("duality residual", g.residual, 1e-6);
            if let Limit::Finite(jp) = crate::material::creep_rate_limit(j) {
                let identity = (jp * (1.0 / j.j0()) + g.g_prime0 * j.j0()).abs();
                let scale = (jp / j.j0()).abs().max(1e-300);
                c.note = format!("J'(0+) G0 + G'(0+) J0 = {identity:.3e}");
                c.pass &= identity / scale <= 1e-3;
            }
            Ok(c)
        });
    }

    ModelSuite {
        label: medium.model().label.clone(),
        checks,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::material::make_zener;

    #[test]
    fn zener_suite_passes() {
        let m = Medium::new(make_zener(1.0, 1.0, 1.0, 1.0).unwrap()).unwrap();
        let suite = verify_medium(&m, 1e-6);
        let report = VerifyReport {
            suites: vec![suite],
        };
        assert!(report.pass(), "{}", report.to_text());
    }
}
