//! Time series of entanglement, entropy and covariance on a uniform grid.

use std::io::{self, Write};

use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::gaussian::{
    entropy_from_spectrum, log_negativity_from_spectrum, partial_transpose, symplectic_spectrum,
    CovarianceMatrix,
};
use crate::propagator::Propagator;

pub const DEFAULT_SAMPLES: usize = 400;

pub const COVARIANCE_COLUMNS: [&str; 10] = [
    "g_x1x1", "g_x1p1", "g_x1x2", "g_x1p2", "g_p1p1", "g_p1x2", "g_p1p2", "g_x2x2", "g_x2p2", "g_p2p2",
];

/// `samples` evenly spaced times from 0 to `t_max`; a single sample is `t = 0`.
pub fn time_grid(t_max: f64, samples: usize) -> Result<Vec<f64>> {
    if !(t_max.is_finite() && t_max >= 0.0) {
        return Err(Error::InvalidParameter(format!("t-max must be finite and >= 0, got {t_max}")));
    }
    match samples {
        0 => Err(Error::InvalidParameter("samples must be >= 1".into())),
        1 => Ok(vec![0.0]),
        n => Ok((0..n).map(|i| t_max * i as f64 / (n - 1) as f64).collect()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Observables {
    pub log_negativity: f64,
    /// `None` when the spectrum of `Γ` dips below 1 (see `status`).
    pub entropy: Option<f64>,
    /// Smaller symplectic eigenvalue of the partial transpose.
    pub nu_min_pt: f64,
    pub covariance: [f64; 10],
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesRow {
    pub t: f64,
    pub observables: Option<Observables>,
    /// `None` when every column is valid, otherwise the name of the error.
    pub failure: Option<&'static str>,
}

impl SeriesRow {
    pub fn status(&self) -> &'static str {
        self.failure.unwrap_or("ok")
    }
}

/// Negativity, entropy and spectrum of one covariance. Entropy failures are
/// reported separately so the negativity column survives them.
pub fn observables(g: &CovarianceMatrix) -> Result<(Observables, Option<Error>)> {
    let pt = symplectic_spectrum(&partial_transpose(g))?;
    let spec = symplectic_spectrum(g)?;
    let (entropy, err) = match entropy_from_spectrum(&spec) {
        Ok(s) => (Some(s), None),
        Err(e) => (None, Some(e)),
    };
    Ok((
        Observables {
            log_negativity: log_negativity_from_spectrum(&pt),
            entropy,
            nu_min_pt: pt.min(),
            covariance: g.upper_triangle(),
        },
        err,
    ))
}

/// Evaluates every grid time directly from `t = 0`. Failures in a single row
/// are recorded and the run continues; only a basis that cannot be built is
/// fatal.
pub fn evolve(config: &RunConfig, times: &[f64]) -> Result<Vec<SeriesRow>> {
    let prop = Propagator::new(&config.params, &config.init)?;
    Ok(times
        .iter()
        .map(|&t| match prop.covariance_at(t).and_then(|g| observables(&g)) {
            Ok((obs, err)) => SeriesRow { t, observables: Some(obs), failure: err.map(|e| e.name()) },
            Err(e) => SeriesRow { t, observables: None, failure: Some(e.name()) },
        })
        .collect())
}

/// 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_series_csv<W: Write>(rows: &[SeriesRow], mut w: W) -> io::Result<()> {
    write!(w, "t,log_negativity,entropy,nu_min_pt")?;
    for c in COVARIANCE_COLUMNS {
        write!(w, ",{c}")?;
    }
    writeln!(w, ",status")?;
    for row in rows {
        write!(w, "{}", fmt_f64(row.t))?;
        match &row.observables {
            Some(obs) => {
                let entropy = obs.entropy.map(fmt_f64).unwrap_or_default();
                write!(w, ",{},{entropy},{}", fmt_f64(obs.log_negativity), fmt_f64(obs.nu_min_pt))?;
                for v in obs.covariance {
                    write!(w, ",{}", fmt_f64(v))?;
                }
            }
            None => write!(w, "{}", ",".repeat(3 + COVARIANCE_COLUMNS.len()))?,
        }
        writeln!(w, ",{}", row.status())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{InitialState, SystemParams};

    fn fig1(t1: f64, t2: f64) -> RunConfig {
        let mut cfg = RunConfig::default();
        cfg.params.t1 = t1;
        cfg.params.t2 = t2;
        cfg
    }

    #[test]
    fn grid_shapes() {
        assert_eq!(time_grid(0.0, 1).unwrap(), vec![0.0]);
        assert_eq!(time_grid(2.0, 3).unwrap(), vec![0.0, 1.0, 2.0]);
        assert_eq!(time_grid(10.0, DEFAULT_SAMPLES).unwrap().len(), 400);
        assert!(time_grid(1.0, 0).is_err());
        assert!(time_grid(-1.0, 4).is_err());
    }

    #[test]
    fn single_sample_is_pure() {
        let rows = evolve(&RunConfig::default(), &time_grid(0.0, 1).unwrap()).unwrap();
        assert_eq!(rows.len(), 1);
        let obs = rows[0].observables.unwrap();
        assert!(obs.entropy.unwrap() < 1e-9);
        assert!(obs.log_negativity > 0.0);
        assert_eq!(rows[0].status(), "ok");
    }

    #[test]
    fn low_temperature_keeps_entanglement_longer() {
        // The stationary state itself is separable here (nu_min ~ 1.02), but
        // entanglement revives well past the damping time m/gamma = 200.
        let rows = evolve(&fig1(1.0, 0.25), &time_grid(800.0, 1601).unwrap()).unwrap();
        let positive: Vec<f64> = rows
            .iter()
            .filter(|r| r.observables.unwrap().log_negativity > 0.0)
            .map(|r| r.t)
            .collect();
        assert!(positive.iter().any(|&t| t > 500.0), "{positive:?}");
    }

    #[test]
    fn hot_baths_lose_entanglement() {
        // Sudden death with short revivals: the last positive stretch ends
        // near t = 40.3 for (1, 4) and t = 22.45 for (4, 4).
        for (t1, t2, death) in [(1.0, 4.0, 40.33), (4.0, 4.0, 22.45)] {
            let rows = evolve(&fig1(t1, t2), &time_grid(600.0, 12001).unwrap()).unwrap();
            let last = rows
                .iter()
                .filter(|r| r.observables.unwrap().log_negativity > 0.0)
                .map(|r| r.t)
                .fold(0.0, f64::max);
            assert!((last - death).abs() < 0.1, "T=({t1},{t2}) last positive at {last}");
        }
    }

    #[test]
    fn revival_after_first_death_is_real() {
        let cfg = fig1(4.0, 4.0);
        let rows = evolve(&cfg, &[6.5, 21.5]).unwrap();
        assert_eq!(rows[0].observables.unwrap().log_negativity, 0.0);
        assert!(rows[1].observables.unwrap().log_negativity > 0.3);
    }

    #[test]
    fn csv_layout() {
        let rows = evolve(&RunConfig::default(), &time_grid(1.0, 2).unwrap()).unwrap();
        let mut buf = Vec::new();
        write_series_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].starts_with("t,log_negativity,entropy,nu_min_pt,g_x1x1,"));
        for line in &lines {
            assert_eq!(line.split(',').count(), 15);
        }
        assert!(lines[1].starts_with("0.0000000000000000e0,"));
        assert!(lines[1].ends_with(",ok"));
    }

    #[test]
    fn failed_rows_are_marked() {
        let row = SeriesRow { t: 1.0, observables: None, failure: Some("NonPositive") };
        let mut buf = Vec::new();
        write_series_csv(&[row], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let last = text.lines().nth(1).unwrap();
        assert_eq!(last.split(',').count(), 15);
        assert!(last.ends_with(",NonPositive"));
    }

    #[test]
    fn degenerate_basis_is_fatal() {
        let cfg = RunConfig {
            params: SystemParams { kappa: 0.0, gamma1: 0.0, gamma2: 0.0, m: 1.0, ..RunConfig::default().params },
            init: InitialState { s: 1.0, d: 6.0 },
        };
        assert!(matches!(evolve(&cfg, &[0.0]), Err(Error::DegenerateSpectrum { .. })));
    }
}
