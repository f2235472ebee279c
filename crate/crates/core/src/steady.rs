//! Non-equilibrium steady state: closed-form second moments, the
//! weak-coupling symplectic eigenvalues and the critical temperatures below
//! which the steady state is entangled.
//!
//! Two closed forms are kept side by side. [`SteadyMoments::printed`] is the
//! published expression, transcribed as is. [`SteadyMoments::corrected`]
//! solves the moment equations exactly; it differs from the printed one in
//! `<x1²>`, `<x2²>` (a factor `1/m`), the sign of `<x1 x2>`, and `<x1 p2>`,
//! whose printed numerator cancels to zero.

use nalgebra::Matrix4;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gaussian::CovarianceMatrix;
use crate::model::{coth_half, thermal_weight, Regime, SystemParams};
use crate::oracle;

/// Relative tolerance, against the largest covariance entry, for accepting
/// a closed-form moment.
pub const CLOSED_FORM_TOL: f64 = 1e-6;

const BISECTION_RESIDUAL: f64 = 1e-12;
const BISECTION_MAX_ITER: usize = 200;

/// Nonzero steady-state second moments. `<x2 p1> = -<x1 p2>`, while
/// `<{x1,p1}>`, `<{x2,p2}>` and `<p1 p2>` vanish.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SteadyMoments {
    pub xx1: f64,
    pub xx2: f64,
    pub pp1: f64,
    pub pp2: f64,
    pub x1x2: f64,
    pub x1p2: f64,
}

pub const MOMENT_NAMES: [&str; 6] = ["xx1", "xx2", "pp1", "pp2", "x1x2", "x1p2"];

struct Scalars {
    m: f64,
    w2: f64,
    k: f64,
    g1: f64,
    g2: f64,
    kt1: f64,
    kt2: f64,
}

impl Scalars {
    fn new(params: &SystemParams) -> Result<Self> {
        params.validate()?;
        params.require_dissipation()?;
        let temps = params.effective_temps();
        Ok(Scalars {
            m: params.m,
            w2: params.omega0 * params.omega0,
            k: params.kappa,
            g1: params.gamma1,
            g2: params.gamma2,
            kt1: temps.kt1,
            kt2: temps.kt2,
        })
    }

    /// `(m²ω0⁴ - κ²)`
    fn potential(&self) -> f64 {
        self.m * self.m * self.w2 * self.w2 - self.k * self.k
    }

    /// `(γ1γ2ω0² + κ²)`
    fn damping(&self) -> f64 {
        self.g1 * self.g2 * self.w2 + self.k * self.k
    }
}

impl SteadyMoments {
    /// The published closed form, term by term.
    pub fn printed(params: &SystemParams) -> Result<Self> {
        let s = Scalars::new(params)?;
        let (pot, damp) = (s.potential(), s.damping());
        let Scalars { m, w2, k, g1, g2, kt1, kt2 } = s;
        let gsum = g1 + g2;
        let m2 = m * m;
        let w4 = w2 * w2;
        let k2 = k * k;

        let xx = |ga: f64, kta: f64, gb: f64, ktb: f64| {
            (ga * kta * (gb * gb * m2 * w4 - gb * gb * k2 + ga * gb * m2 * w4 + k2 * m2 * w2)
                + gb * ktb * k2 * (m2 * w2 + ga * gb))
                / (pot * gsum * damp)
        };
        let pp = |ga: f64, kta: f64, gb: f64, ktb: f64| {
            m * (ga * kta * (gb * gb * w2 + ga * gb * w2 + k2) + gb * ktb * k2) / (gsum * damp)
        };
        Ok(SteadyMoments {
            xx1: xx(g1, kt1, g2, kt2),
            xx2: xx(g2, kt2, g1, kt1),
            pp1: pp(g1, kt1, g2, kt2),
            pp2: pp(g2, kt2, g1, kt1),
            x1x2: (g1 * kt1 * k + g2 * kt2 * k) / (gsum * pot),
            x1p2: (g1 * kt2 * g2 * k - g2 * kt2 * g1 * k) / (gsum * damp),
        })
    }

    /// Exact solution of the steady moment equations.
    pub fn corrected(params: &SystemParams) -> Result<Self> {
        let printed = Self::printed(params)?;
        let s = Scalars::new(params)?;
        let gsum = s.g1 + s.g2;
        Ok(SteadyMoments {
            xx1: printed.xx1 / s.m,
            xx2: printed.xx2 / s.m,
            x1x2: -s.k * (s.g1 * s.kt1 + s.g2 * s.kt2) / (gsum * s.potential()),
            x1p2: s.g1 * s.g2 * s.k * (s.kt2 - s.kt1) / (gsum * s.damping()),
            ..printed
        })
    }

    /// Moments read back from a covariance matrix (`<ab> = Γ_ab / 2`).
    pub fn from_covariance(g: &CovarianceMatrix) -> Self {
        SteadyMoments {
            xx1: 0.5 * g[(0, 0)],
            xx2: 0.5 * g[(2, 2)],
            pp1: 0.5 * g[(1, 1)],
            pp2: 0.5 * g[(3, 3)],
            x1x2: 0.5 * g[(0, 2)],
            x1p2: 0.5 * g[(0, 3)],
        }
    }

    pub fn values(&self) -> [f64; 6] {
        [self.xx1, self.xx2, self.pp1, self.pp2, self.x1x2, self.x1p2]
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        MOMENT_NAMES.iter().position(|n| *n == name).map(|i| self.values()[i])
    }

    pub fn to_covariance(&self) -> Result<CovarianceMatrix> {
        let SteadyMoments { xx1, xx2, pp1, pp2, x1x2, x1p2 } = *self;
        #[rustfmt::skip]
        let g = Matrix4::new(
            2.0 * xx1,  0.0,         2.0 * x1x2, 2.0 * x1p2,
            0.0,        2.0 * pp1,   -2.0 * x1p2, 0.0,
            2.0 * x1x2, -2.0 * x1p2, 2.0 * xx2,  0.0,
            2.0 * x1p2, 0.0,         0.0,        2.0 * pp2,
        );
        CovarianceMatrix::new(g)
    }
}

/// How [`steady_state_covariance`] treats the published closed form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ClosedFormCheck {
    /// Skip the Lyapunov solve and return the exact closed form.
    Off,
    /// Compare with the Lyapunov solution and use it where they differ.
    #[default]
    PreferOracle,
    /// Compare with the Lyapunov solution and fail on any difference.
    Strict,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SteadySource {
    ClosedForm,
    Oracle,
}

/// One published moment that disagrees with the Lyapunov solution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentMismatch {
    pub moment: &'static str,
    pub printed: f64,
    pub oracle: f64,
    /// `|2·printed - 2·oracle| / max|Γ_oracle|`.
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SteadyState {
    pub covariance: CovarianceMatrix,
    pub source: SteadySource,
    pub mismatches: Vec<MomentMismatch>,
}

/// Per-moment comparison of `closed` against the oracle covariance.
pub fn compare_moments(closed: &SteadyMoments, oracle: &CovarianceMatrix) -> Vec<MomentMismatch> {
    let reference = SteadyMoments::from_covariance(oracle);
    let scale = oracle.matrix().amax();
    MOMENT_NAMES
        .iter()
        .zip(closed.values().iter().zip(reference.values()))
        .filter_map(|(&moment, (&printed, oracle))| {
            let deviation = 2.0 * (printed - oracle).abs() / scale;
            (deviation > CLOSED_FORM_TOL).then_some(MomentMismatch { moment, printed, oracle, deviation })
        })
        .collect()
}

pub fn steady_state_covariance(params: &SystemParams, check: ClosedFormCheck) -> Result<SteadyState> {
    if check == ClosedFormCheck::Off {
        return Ok(SteadyState {
            covariance: SteadyMoments::corrected(params)?.to_covariance()?,
            source: SteadySource::ClosedForm,
            mismatches: Vec::new(),
        });
    }
    let printed = SteadyMoments::printed(params)?;
    let oracle = oracle::steady_covariance(params)?;
    let mismatches = compare_moments(&printed, &oracle);
    if mismatches.is_empty() {
        return Ok(SteadyState {
            covariance: printed.to_covariance()?,
            source: SteadySource::ClosedForm,
            mismatches,
        });
    }
    if check == ClosedFormCheck::Strict {
        let worst = mismatches
            .iter()
            .max_by(|a, b| a.deviation.total_cmp(&b.deviation))
            .expect("nonempty");
        return Err(Error::ClosedFormMismatch {
            moment: mismatches.iter().map(|m| m.moment).collect::<Vec<_>>().join(","),
            deviation: worst.deviation,
        });
    }
    Ok(SteadyState { covariance: oracle, source: SteadySource::Oracle, mismatches })
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !alpha.is_finite() || alpha.abs() > 1.0 {
        return Err(Error::UnstableSystem { alpha: alpha.abs() });
    }
    Ok(())
}

fn check_omega(omega: f64) -> Result<()> {
    if !(omega.is_finite() && omega > 0.0) {
        return Err(Error::InvalidParameter(format!("omega must be > 0, got {omega}")));
    }
    Ok(())
}

fn check_temperature(name: &str, t: f64) -> Result<()> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidParameter(format!("{name} must be finite and >= 0, got {t}")));
    }
    Ok(())
}

/// `(coth(ω/2T1) + coth(ω/2T2)) / (2√(1 ± α))`, returned as `[λ+, λ-]`.
///
/// Leading order in `γ` of the partially transposed steady-state spectrum
/// for `γ1 = γ2` under weak coupling; the linear term in `γ` vanishes. At
/// `|α| = 1` the `1 - |α|` branch is `+∞`.
pub fn symplectic_closed_form(omega: f64, alpha: f64, t1: f64, t2: f64) -> Result<[f64; 2]> {
    check_omega(omega)?;
    check_alpha(alpha)?;
    check_temperature("T1", t1)?;
    check_temperature("T2", t2)?;
    let sum = coth_half(omega, t1) + coth_half(omega, t2);
    Ok([0.5 * sum / (1.0 + alpha).sqrt(), 0.5 * sum / (1.0 - alpha).sqrt()])
}

/// `-2 log2 min(1, (coth(ω/2T1) + coth(ω/2T2)) / (2√(1 + |α|)))`.
///
/// Only the `1 + |α|` eigenvalue can drop below 1, so the other one never
/// contributes.
pub fn log_negativity_closed_form(omega: f64, alpha: f64, t1: f64, t2: f64) -> Result<f64> {
    let [nu, _] = symplectic_closed_form(omega, alpha.abs(), t1, t2)?;
    if nu >= 1.0 {
        return Ok(0.0);
    }
    Ok(-2.0 * nu.log2())
}

fn require_weak(params: &SystemParams) -> Result<()> {
    if params.regime != Regime::WeakCoupling {
        return Err(Error::Domain(
            "the closed-form steady spectrum is the weak-coupling result".into(),
        ));
    }
    Ok(())
}

/// [`symplectic_closed_form`] for a weak-coupling parameter set.
pub fn steady_symplectic_weak(params: &SystemParams) -> Result<[f64; 2]> {
    require_weak(params)?;
    symplectic_closed_form(params.omega0, params.alpha(), params.t1, params.t2)
}

/// [`log_negativity_closed_form`] for a weak-coupling parameter set.
pub fn steady_log_negativity(params: &SystemParams) -> Result<f64> {
    require_weak(params)?;
    log_negativity_closed_form(params.omega0, params.alpha(), params.t1, params.t2)
}

/// `(1/2) ln((x+1)/(x-1))` for `x > 1`.
fn arccoth(x: f64) -> f64 {
    0.5 * ((x + 1.0) / (x - 1.0)).ln()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalTemperature {
    pub value: f64,
    /// Set at `α = 0`, where the critical temperature is the `α → 0` limit 0.
    pub zero_coupling_limit: bool,
}

/// Equal-temperature entanglement threshold `T^c = ω / (2 arccoth √(1+|α|))`.
pub fn critical_temperature_equilibrium(omega: f64, alpha: f64) -> Result<CriticalTemperature> {
    check_omega(omega)?;
    check_alpha(alpha)?;
    if alpha == 0.0 {
        return Ok(CriticalTemperature { value: 0.0, zero_coupling_limit: true });
    }
    Ok(CriticalTemperature {
        value: omega / (2.0 * arccoth((1.0 + alpha.abs()).sqrt())),
        zero_coupling_limit: false,
    })
}

/// Temperature `T2` on the boundary `coth(ω/2T1) + coth(ω/2T2) = 2√(1+|α|)`,
/// or `None` when bath 1 alone is already too hot for any entanglement.
pub fn critical_temperature_curve(omega: f64, alpha: f64, t1: f64) -> Result<Option<f64>> {
    check_omega(omega)?;
    check_alpha(alpha)?;
    check_temperature("T1", t1)?;
    if alpha == 0.0 {
        return Err(Error::Domain("no entangled region at alpha = 0".into()));
    }
    let target = 2.0 * (1.0 + alpha.abs()).sqrt() - coth_half(omega, t1);
    if target <= 1.0 {
        return Ok(None);
    }
    let residual = |t2: f64| coth_half(omega, t2) - target;

    let mut hi = omega;
    while residual(hi) < 0.0 {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    let mut mid = hi;
    for _ in 0..BISECTION_MAX_ITER {
        mid = 0.5 * (lo + hi);
        let r = residual(mid);
        if r.abs() < BISECTION_RESIDUAL {
            break;
        }
        if r < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(mid))
}

/// High-temperature counterpart of the closed-form spectrum,
/// `(T1 + T2) / (ω √(1 ± α))`; for `T1 = T2 = T` this is `2(T/ω)/√(1 ± α)`.
pub fn symplectic_high_temperature(omega: f64, alpha: f64, t1: f64, t2: f64) -> Result<[f64; 2]> {
    check_omega(omega)?;
    check_alpha(alpha)?;
    let sum = 2.0 * (thermal_weight(Regime::HighTemperature, omega, t1)
        + thermal_weight(Regime::HighTemperature, omega, t2))
        / omega;
    Ok([0.5 * sum / (1.0 + alpha).sqrt(), 0.5 * sum / (1.0 - alpha).sqrt()])
}
