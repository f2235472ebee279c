//! Cross-checks of the closed-form results against the moment-equation
//! oracle, collected into a printable report.

use std::fmt::{self, Write as _};

use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::gaussian::CovarianceMatrix;
use crate::model::{initial_covariance, Regime, SystemParams};
use crate::oracle::{default_dt, integrate_moments, lyapunov_steady, MomentOde};
use crate::propagator::Propagator;
use crate::steady::{compare_moments, SteadyMoments, CLOSED_FORM_TOL, MOMENT_NAMES};

pub const DEFAULT_T_GRID: [f64; 5] = [0.1, 1.0, 5.0, 20.0, 100.0];
pub const COVARIANCE_TOL: f64 = 1e-6;
/// Transient factor `e^{-40}` for the long-time comparison.
const RELAXATION_E_FOLDS: f64 = 40.0;
const REGIME_CHECK_RATIO: f64 = 1e4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CheckStatus {
    Pass,
    Fail,
    /// Known discrepancy in the published closed form; reported, not gated.
    Flagged,
    /// Documented rejection of this parameter set (e.g. no dissipation).
    Unsupported,
}

impl fmt::Display for CheckStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CheckStatus::Pass => "PASS",
            CheckStatus::Fail => "FAIL",
            CheckStatus::Flagged => "FLAG",
            CheckStatus::Unsupported => "UNSUPPORTED",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub status: CheckStatus,
    pub deviation: Option<f64>,
    pub tolerance: Option<f64>,
    pub detail: String,
}

impl Check {
    fn gated(name: String, deviation: f64, tolerance: f64) -> Check {
        let status = if deviation <= tolerance { CheckStatus::Pass } else { CheckStatus::Fail };
        Check { name, status, deviation: Some(deviation), tolerance: Some(tolerance), detail: String::new() }
    }

    fn from_error(name: String, err: &Error) -> Check {
        let status = if expected_unsupported(err) { CheckStatus::Unsupported } else { CheckStatus::Fail };
        Check { name, status, deviation: None, tolerance: None, detail: err.to_string() }
    }
}

fn expected_unsupported(err: &Error) -> bool {
    matches!(
        err,
        Error::DegenerateSpectrum { .. } | Error::SingularNormalization(_) | Error::NotHurwitz { .. }
    ) || matches!(err, Error::InvalidParameter(msg) if msg.contains("gamma1 + gamma2"))
}

/// Published, exact and oracle values of one steady moment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentRow {
    pub moment: &'static str,
    pub printed: f64,
    pub corrected: f64,
    pub oracle: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentTable {
    pub label: String,
    pub params: SystemParams,
    pub rows: Vec<MomentRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
    pub moment_tables: Vec<MomentTable>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != CheckStatus::Fail)
    }

    pub fn count(&self, status: CheckStatus) -> usize {
        self.checks.iter().filter(|c| c.status == status).count()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let _ = write!(out, "[{}] {}", c.status, c.name);
            if let (Some(dev), Some(tol)) = (c.deviation, c.tolerance) {
                let _ = write!(out, ": max rel dev {dev:.3e} (tol {tol:.0e})");
            }
            if !c.detail.is_empty() {
                let _ = write!(out, " -- {}", c.detail);
            }
            out.push('\n');
        }
        for table in &self.moment_tables {
            let _ = writeln!(out, "\nsteady moments, {}:", table.label);
            let _ = writeln!(out, "{:<6} {:>24} {:>24} {:>24}", "moment", "published", "exact", "lyapunov");
            for r in &table.rows {
                let _ = writeln!(out, "{:<6} {:>24.16e} {:>24.16e} {:>24.16e}", r.moment, r.printed, r.corrected, r.oracle);
            }
        }
        let _ = writeln!(
            out,
            "\n{} pass, {} fail, {} flagged, {} unsupported",
            self.count(CheckStatus::Pass),
            self.count(CheckStatus::Fail),
            self.count(CheckStatus::Flagged),
            self.count(CheckStatus::Unsupported)
        );
        out
    }
}

fn transient_checks(cfg: &RunConfig, t_grid: &[f64], checks: &mut Vec<Check>) -> Option<Propagator> {
    let prop = match Propagator::new(&cfg.params, &cfg.init) {
        Ok(p) => p,
        Err(e) => {
            checks.push(Check::from_error("analytic propagator".into(), &e));
            return None;
        }
    };
    let ode = MomentOde::from_params(&cfg.params);
    let dt = default_dt(&cfg.params);
    let start = match initial_covariance(&cfg.init, &cfg.params) {
        Ok(g) => g,
        Err(e) => {
            checks.push(Check::from_error("initial covariance".into(), &e));
            return None;
        }
    };
    for &t in t_grid {
        let name = format!("analytic vs RK4 at t = {t}");
        let outcome: Result<f64> = prop
            .covariance_at(t)
            .and_then(|g| Ok(g.relative_deviation(&integrate_moments(&start, &ode, t, dt)?.covariance)));
        checks.push(match outcome {
            Ok(dev) => Check::gated(name, dev, COVARIANCE_TOL),
            Err(e) => Check::from_error(name, &e),
        });
    }
    Some(prop)
}

fn moment_table(label: String, params: &SystemParams, oracle: &CovarianceMatrix) -> Result<MomentTable> {
    let printed = SteadyMoments::printed(params)?;
    let corrected = SteadyMoments::corrected(params)?;
    let reference = SteadyMoments::from_covariance(oracle);
    let rows = MOMENT_NAMES
        .iter()
        .enumerate()
        .map(|(k, &moment)| MomentRow {
            moment,
            printed: printed.values()[k],
            corrected: corrected.values()[k],
            oracle: reference.values()[k],
        })
        .collect();
    Ok(MomentTable { label, params: *params, rows })
}

/// Published closed form (flagged on mismatch) and exact closed form (gated)
/// against the Lyapunov solution.
fn closed_form_checks(label: &str, params: &SystemParams, oracle: &CovarianceMatrix, report: &mut ValidationReport) {
    let table = match moment_table(label.to_string(), params, oracle) {
        Ok(t) => t,
        Err(e) => {
            report.checks.push(Check::from_error(format!("steady closed forms, {label}"), &e));
            return;
        }
    };
    let printed = SteadyMoments::printed(params).expect("checked by moment_table");
    let mismatches = compare_moments(&printed, oracle);
    for name in MOMENT_NAMES {
        let check_name = format!("published <{name}> vs Lyapunov, {label}");
        match mismatches.iter().find(|m| m.moment == name) {
            Some(m) => report.checks.push(Check {
                name: check_name,
                status: CheckStatus::Flagged,
                deviation: Some(m.deviation),
                tolerance: Some(CLOSED_FORM_TOL),
                detail: format!("published {:.12e}, Lyapunov {:.12e}", m.printed, m.oracle),
            }),
            None => report.checks.push(Check {
                name: check_name,
                status: CheckStatus::Pass,
                deviation: None,
                tolerance: None,
                detail: String::new(),
            }),
        }
    }
    let corrected = SteadyMoments::corrected(params).expect("checked by moment_table");
    let worst = corrected
        .values()
        .iter()
        .zip(SteadyMoments::from_covariance(oracle).values())
        .map(|(a, b)| 2.0 * (a - b).abs())
        .fold(0.0, f64::max)
        / oracle.matrix().amax();
    report.checks.push(Check::gated(format!("exact steady moments vs Lyapunov, {label}"), worst, CLOSED_FORM_TOL));
    report.moment_tables.push(table);
}

/// A bath configuration with `T1 != T2`, for the moments that vanish at
/// equal temperatures.
fn asymmetric_variant(p: &SystemParams) -> SystemParams {
    let t1 = if p.t1 > 0.0 { p.t1 } else { 1.0 };
    SystemParams { t1, t2: 4.0 * t1, ..*p }
}

fn regime_check(p: &SystemParams) -> Check {
    let name = format!("weak vs high-t steady state at T/omega0 = {REGIME_CHECK_RATIO:.0e}");
    let t = REGIME_CHECK_RATIO * p.omega0;
    let hot = |regime| SystemParams { t1: t, t2: t, regime, ..*p };
    let outcome = lyapunov_steady(&MomentOde::from_params(&hot(Regime::WeakCoupling))).and_then(|weak| {
        let high = lyapunov_steady(&MomentOde::from_params(&hot(Regime::HighTemperature)))?;
        Ok(weak.relative_deviation(&high))
    });
    match outcome {
        Ok(dev) => Check::gated(name, dev, COVARIANCE_TOL),
        Err(e) => Check::from_error(name, &e),
    }
}

pub fn validate(cfg: &RunConfig, t_grid: &[f64]) -> ValidationReport {
    let mut report = ValidationReport { checks: Vec::new(), moment_tables: Vec::new() };
    let prop = transient_checks(cfg, t_grid, &mut report.checks);

    let p = cfg.params;
    let steady = match p.require_dissipation().and_then(|_| lyapunov_steady(&MomentOde::from_params(&p))) {
        Ok(x) => x,
        Err(e) => {
            report.checks.push(Check::from_error("Lyapunov steady state".into(), &e));
            return report;
        }
    };

    if let Some(prop) = prop {
        let name = "analytic at long time vs Lyapunov".to_string();
        match prop.relaxation_time(RELAXATION_E_FOLDS) {
            Some(t) => report.checks.push(match prop.covariance_at(t) {
                Ok(g) => {
                    let mut c = Check::gated(name, g.relative_deviation(&steady), COVARIANCE_TOL);
                    c.detail = format!("t = {t:.6e}");
                    c
                }
                Err(e) => Check::from_error(name, &e),
            }),
            None => report.checks.push(Check {
                name,
                status: CheckStatus::Unsupported,
                deviation: None,
                tolerance: None,
                detail: "no decaying mode".into(),
            }),
        }
    }

    closed_form_checks("configured baths", &p, &steady, &mut report);
    if p.t1 == p.t2 {
        let q = asymmetric_variant(&p);
        let label = format!("T1 = {}, T2 = {}", q.t1, q.t2);
        match lyapunov_steady(&MomentOde::from_params(&q)) {
            Ok(x) => closed_form_checks(&label, &q, &x, &mut report),
            Err(e) => report.checks.push(Check::from_error(format!("Lyapunov steady state, {label}"), &e)),
        }
    }
    report.checks.push(regime_check(&p));
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_configuration_passes_with_flags() {
        let report = validate(&RunConfig::default(), &DEFAULT_T_GRID);
        assert!(report.passed(), "{}", report.render());
        let flagged: Vec<_> = report
            .checks
            .iter()
            .filter(|c| c.status == CheckStatus::Flagged)
            .map(|c| c.name.as_str())
            .collect();
        assert_eq!(flagged.len(), 4, "{flagged:?}");
        assert!(flagged.iter().any(|n| n.contains("<xx1>")));
        assert!(flagged.iter().any(|n| n.contains("<x1p2>")));
        assert_eq!(report.moment_tables.len(), 1);
        let text = report.render();
        assert!(text.contains("[FLAG] published <x1p2> vs Lyapunov"));
        assert!(text.contains("lyapunov"));
    }

    #[test]
    fn equal_temperatures_add_an_asymmetric_case() {
        let mut cfg = RunConfig::default();
        cfg.params.t2 = cfg.params.t1;
        let report = validate(&cfg, &[1.0]);
        assert!(report.passed());
        assert_eq!(report.moment_tables.len(), 2);
        let asym = &report.moment_tables[1];
        assert_ne!(asym.params.t1, asym.params.t2);
        let x1p2 = asym.rows.iter().find(|r| r.moment == "x1p2").unwrap();
        assert_eq!(x1p2.printed, 0.0);
        assert!(x1p2.oracle.abs() > 1e-3);
    }

    #[test]
    fn undamped_configuration_is_unsupported() {
        let mut cfg = RunConfig::default();
        cfg.params.gamma1 = 0.0;
        cfg.params.gamma2 = 0.0;
        cfg.params.kappa = 0.0;
        let report = validate(&cfg, &DEFAULT_T_GRID);
        assert!(report.passed(), "{}", report.render());
        assert!(report.count(CheckStatus::Unsupported) >= 2);
    }

    #[test]
    fn regime_limits_agree() {
        let c = regime_check(&RunConfig::default().params);
        assert_eq!(c.status, CheckStatus::Pass);
        assert!(c.deviation.unwrap() < 1e-8);
    }
}
