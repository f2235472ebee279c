//! Two-parameter grid sweeps evaluated in parallel.
//!
//! Each cell is an independent pure evaluation. Results are written into
//! pre-indexed slots, so the output never depends on scheduling.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;
use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::gaussian::{partial_transpose, symplectic_spectrum, CovarianceMatrix};
use crate::model::{InitialState, SystemParams};
use crate::propagator::covariance_at;
use crate::series::fmt_f64;
use crate::steady::{log_negativity_closed_form, steady_state_covariance, ClosedFormCheck, SteadyMoments, MOMENT_NAMES};

/// Sweepable parameter. `T` sets both bath temperatures; `alpha` sets
/// `kappa = alpha m omega0²` after every other axis has been applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SweepParam {
    #[serde(rename = "m")]
    M,
    #[serde(rename = "omega0")]
    Omega0,
    #[serde(rename = "kappa")]
    Kappa,
    #[serde(rename = "gamma1")]
    Gamma1,
    #[serde(rename = "gamma2")]
    Gamma2,
    T1,
    T2,
    T,
    #[serde(rename = "alpha")]
    Alpha,
    #[serde(rename = "s")]
    S,
    #[serde(rename = "d")]
    D,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::M => "m",
            SweepParam::Omega0 => "omega0",
            SweepParam::Kappa => "kappa",
            SweepParam::Gamma1 => "gamma1",
            SweepParam::Gamma2 => "gamma2",
            SweepParam::T1 => "T1",
            SweepParam::T2 => "T2",
            SweepParam::T => "T",
            SweepParam::Alpha => "alpha",
            SweepParam::S => "s",
            SweepParam::D => "d",
        }
    }

    const ALL: [SweepParam; 11] = [
        SweepParam::M,
        SweepParam::Omega0,
        SweepParam::Kappa,
        SweepParam::Gamma1,
        SweepParam::Gamma2,
        SweepParam::T1,
        SweepParam::T2,
        SweepParam::T,
        SweepParam::Alpha,
        SweepParam::S,
        SweepParam::D,
    ];

    fn apply(self, p: &mut SystemParams, init: &mut InitialState, v: f64) {
        match self {
            SweepParam::M => p.m = v,
            SweepParam::Omega0 => p.omega0 = v,
            SweepParam::Kappa => p.kappa = v,
            SweepParam::Gamma1 => p.gamma1 = v,
            SweepParam::Gamma2 => p.gamma2 = v,
            SweepParam::T1 => p.t1 = v,
            SweepParam::T2 => p.t2 = v,
            SweepParam::T => {
                p.t1 = v;
                p.t2 = v;
            }
            SweepParam::Alpha => p.kappa = v * p.m * p.omega0 * p.omega0,
            SweepParam::S => init.s = v,
            SweepParam::D => init.d = v,
        }
    }
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SweepParam::ALL.into_iter().find(|p| p.name() == s).ok_or_else(|| {
            let names: Vec<_> = SweepParam::ALL.iter().map(|p| p.name()).collect();
            Error::InvalidParameter(format!("unknown sweep parameter '{s}' (expected one of {})", names.join(", ")))
        })
    }
}

/// Linear grid `name:min:max:count`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Axis {
    pub param: SweepParam,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Axis {
    pub fn new(param: SweepParam, min: f64, max: f64, count: usize) -> Result<Self> {
        if count < 2 {
            return Err(Error::InvalidParameter(format!("axis {} needs count >= 2, got {count}", param.name())));
        }
        if !(min.is_finite() && max.is_finite()) {
            return Err(Error::InvalidParameter(format!("axis {} bounds must be finite", param.name())));
        }
        Ok(Axis { param, min, max, count })
    }

    pub fn values(&self) -> Vec<f64> {
        let n = (self.count - 1) as f64;
        (0..self.count).map(|i| self.min + (self.max - self.min) * i as f64 / n).collect()
    }
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<_> = s.split(':').collect();
        let bad = || Error::InvalidParameter(format!("axis '{s}' is not name:min:max:count"));
        if parts.len() != 4 {
            return Err(bad());
        }
        let param = parts[0].parse()?;
        let min = parts[1].parse().map_err(|_| bad())?;
        let max = parts[2].parse().map_err(|_| bad())?;
        let count = parts[3].parse().map_err(|_| bad())?;
        Axis::new(param, min, max, count)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Observable {
    LogNegativity,
    /// Closed-form steady-state negativity; ignores the time and the
    /// initial state.
    LogNegativityClosedForm,
    Entropy,
    SymplecticMin,
    SteadyMoment(String),
}

impl Observable {
    pub fn name(&self) -> String {
        match self {
            Observable::LogNegativity => "log-negativity".into(),
            Observable::LogNegativityClosedForm => "log-negativity-closed".into(),
            Observable::Entropy => "entropy".into(),
            Observable::SymplecticMin => "symplectic-min".into(),
            Observable::SteadyMoment(m) => format!("moment:{m}"),
        }
    }
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for Observable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "log-negativity" | "ln" => Ok(Observable::LogNegativity),
            "log-negativity-closed" | "ln-closed" => Ok(Observable::LogNegativityClosedForm),
            "entropy" => Ok(Observable::Entropy),
            "symplectic-min" => Ok(Observable::SymplecticMin),
            _ => match s.strip_prefix("moment:") {
                Some(m) if MOMENT_NAMES.contains(&m) => Ok(Observable::SteadyMoment(m.to_string())),
                _ => Err(Error::InvalidParameter(format!(
                    "unknown observable '{s}' (expected log-negativity, log-negativity-closed, entropy, symplectic-min or moment:<{}>)",
                    MOMENT_NAMES.join("|")
                ))),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSpec {
    pub axis1: Axis,
    pub axis2: Axis,
    pub base: RunConfig,
    pub observable: Observable,
    /// Evaluate `Γ(t)` at this time; `None` means the steady state.
    pub time: Option<f64>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.axis1.param == self.axis2.param {
            return Err(Error::InvalidParameter("sweep axes must differ".into()));
        }
        if let Some(t) = self.time {
            if !(t.is_finite() && t >= 0.0) {
                return Err(Error::InvalidParameter(format!("time must be finite and >= 0, got {t}")));
            }
        }
        Ok(())
    }

    fn cell_inputs(&self, v1: f64, v2: f64) -> (SystemParams, InitialState) {
        let mut p = self.base.params;
        let mut init = self.base.init;
        let mut axes = [(self.axis1.param, v1), (self.axis2.param, v2)];
        axes.sort_by_key(|(param, _)| *param == SweepParam::Alpha);
        for (param, v) in axes {
            param.apply(&mut p, &mut init, v);
        }
        (p, init)
    }
}

fn covariance(spec: &SweepSpec, p: &SystemParams, init: &InitialState) -> Result<CovarianceMatrix> {
    match spec.time {
        Some(t) => covariance_at(init, p, t),
        None => Ok(steady_state_covariance(p, ClosedFormCheck::Off)?.covariance),
    }
}

fn evaluate(spec: &SweepSpec, p: &SystemParams, init: &InitialState) -> Result<f64> {
    match &spec.observable {
        Observable::LogNegativityClosedForm => {
            if p.regime != crate::model::Regime::WeakCoupling {
                return Err(Error::Domain("closed-form negativity needs the weak regime".into()));
            }
            if !(p.m > 0.0) {
                return Err(Error::InvalidParameter(format!("m must be > 0, got {}", p.m)));
            }
            log_negativity_closed_form(p.omega0, p.alpha(), p.t1, p.t2)
        }
        Observable::LogNegativity => crate::gaussian::log_negativity(&covariance(spec, p, init)?),
        Observable::Entropy => crate::gaussian::von_neumann_entropy(&covariance(spec, p, init)?),
        Observable::SymplecticMin => {
            Ok(symplectic_spectrum(&partial_transpose(&covariance(spec, p, init)?))?.min())
        }
        Observable::SteadyMoment(name) => {
            let moments = SteadyMoments::from_covariance(&covariance(spec, p, init)?);
            Ok(moments.get(name).expect("validated moment name"))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepCell {
    pub i: usize,
    pub j: usize,
    pub v1: f64,
    pub v2: f64,
    pub value: Option<f64>,
    /// `"ok"` or the error name.
    pub status: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepMetadata {
    pub version: &'static str,
    pub regime: String,
    /// Unix seconds; `SOURCE_DATE_EPOCH` wins when set.
    pub timestamp: u64,
    pub observable: String,
    pub time: Option<f64>,
    pub axis1: Axis,
    pub axis2: Axis,
    pub params: SystemParams,
    pub initial_state: InitialState,
    pub cells: usize,
    pub failed: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub spec: SweepSpec,
    /// Row-major: `cells[i * axis2.count + j]`.
    pub cells: Vec<SweepCell>,
}

fn timestamp() -> u64 {
    std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or_else(|| SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0))
}

impl SweepResult {
    pub fn succeeded(&self) -> usize {
        self.cells.iter().filter(|c| c.value.is_some()).count()
    }

    pub fn metadata(&self) -> SweepMetadata {
        SweepMetadata {
            version: env!("CARGO_PKG_VERSION"),
            regime: self.spec.base.params.regime.to_string(),
            timestamp: timestamp(),
            observable: self.spec.observable.name(),
            time: self.spec.time,
            axis1: self.spec.axis1,
            axis2: self.spec.axis2,
            params: self.spec.base.params,
            initial_state: self.spec.base.init,
            cells: self.cells.len(),
            failed: self.cells.len() - self.succeeded(),
        }
    }

    /// Value matrix, `None` for failed cells.
    pub fn matrix(&self) -> Vec<Vec<Option<f64>>> {
        self.cells
            .chunks(self.spec.axis2.count)
            .map(|row| row.iter().map(|c| c.value).collect())
            .collect()
    }

    /// Long format: `i,j,<axis1>,<axis2>,value,status`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "i,j,{},{},value,status", self.spec.axis1.param.name(), self.spec.axis2.param.name())?;
        for c in &self.cells {
            let value = c.value.map(fmt_f64).unwrap_or_default();
            writeln!(w, "{},{},{},{},{value},{}", c.i, c.j, fmt_f64(c.v1), fmt_f64(c.v2), c.status)?;
        }
        Ok(())
    }

    pub fn write_metadata<W: Write>(&self, w: W) -> io::Result<()> {
        serde_json::to_writer_pretty(w, &self.metadata()).map_err(io::Error::other)
    }
}

/// Evaluates every cell on a pool of `jobs` threads.
pub fn run_sweep(spec: &SweepSpec, jobs: usize) -> Result<SweepResult> {
    spec.validate()?;
    if jobs == 0 {
        return Err(Error::InvalidParameter("jobs must be >= 1".into()));
    }
    let xs = spec.axis1.values();
    let ys = spec.axis2.values();
    let n2 = ys.len();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    let cells = pool.install(|| {
        (0..xs.len() * n2)
            .into_par_iter()
            .map(|k| {
                let (i, j) = (k / n2, k % n2);
                let (p, init) = spec.cell_inputs(xs[i], ys[j]);
                let outcome = evaluate(spec, &p, &init).and_then(|v| {
                    if v.is_finite() {
                        Ok(v)
                    } else {
                        Err(Error::Domain(format!("non-finite value {v}")))
                    }
                });
                let (value, status) = match outcome {
                    Ok(v) => (Some(v), "ok"),
                    Err(e) => (None, e.name()),
                };
                SweepCell { i, j, v1: xs[i], v2: ys[j], value, status }
            })
            .collect()
    });
    Ok(SweepResult { spec: spec.clone(), cells })
}
