//! Physical parameters of the two-oscillator model and its initial state.
//!
//! Units: hbar = k_B = 1 everywhere. Temperatures are therefore energies and
//! the frequency that enters the weak-coupling thermal weight
//! `(omega/2) coth(omega / 2T)` is taken to be the oscillator frequency
//! `omega0`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::CovarianceMatrix;

/// Which master equation drives the baths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    /// Quantum Brownian motion limit, valid for `T / omega0 >> 1`.
    #[serde(rename = "high-t")]
    HighTemperature,
    /// Weak system-bath coupling, valid for `gamma << omega0, m, kappa`.
    #[serde(rename = "weak")]
    WeakCoupling,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::HighTemperature => "high-t",
            Regime::WeakCoupling => "weak",
        }
    }

    pub fn other(self) -> Regime {
        match self {
            Regime::HighTemperature => Regime::WeakCoupling,
            Regime::WeakCoupling => Regime::HighTemperature,
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "high-t" | "hight" | "high" | "high-temperature" | "hightemperature" => {
                Ok(Regime::HighTemperature)
            }
            "weak" | "weak-coupling" | "weakcoupling" => Ok(Regime::WeakCoupling),
            other => Err(Error::InvalidParameter(format!(
                "unknown regime '{other}' (expected high-t or weak)"
            ))),
        }
    }
}

/// Constants of the Hamiltonian and the two baths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub m: f64,
    pub omega0: f64,
    /// Bilinear coupling `kappa * x1 * x2`; may be negative.
    pub kappa: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    #[serde(rename = "T1")]
    pub t1: f64,
    #[serde(rename = "T2")]
    pub t2: f64,
    pub regime: Regime,
}

impl SystemParams {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        m: f64,
        omega0: f64,
        kappa: f64,
        gamma1: f64,
        gamma2: f64,
        t1: f64,
        t2: f64,
        regime: Regime,
    ) -> Result<Self> {
        let p = SystemParams {
            m,
            omega0,
            kappa,
            gamma1,
            gamma2,
            t1,
            t2,
            regime,
        };
        p.validate()?;
        Ok(p)
    }

    /// Dimensionless coupling `kappa / (m omega0^2)`.
    pub fn alpha(&self) -> f64 {
        self.kappa / (self.m * self.omega0 * self.omega0)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            ("m", self.m),
            ("omega0", self.omega0),
            ("kappa", self.kappa),
            ("gamma1", self.gamma1),
            ("gamma2", self.gamma2),
            ("T1", self.t1),
            ("T2", self.t2),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be finite, got {v}")));
            }
        }
        if self.m <= 0.0 {
            return Err(Error::InvalidParameter(format!("m must be > 0, got {}", self.m)));
        }
        if self.omega0 <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "omega0 must be > 0, got {}",
                self.omega0
            )));
        }
        if self.gamma1 < 0.0 || self.gamma2 < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "friction must be >= 0, got gamma1={} gamma2={}",
                self.gamma1, self.gamma2
            )));
        }
        if self.t1 < 0.0 || self.t2 < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "temperatures must be >= 0, got T1={} T2={}",
                self.t1, self.t2
            )));
        }
        let alpha = self.alpha();
        if alpha.abs() >= 1.0 {
            return Err(Error::UnstableSystem { alpha });
        }
        Ok(())
    }

    /// Extra precondition of every steady-state operation.
    pub fn require_dissipation(&self) -> Result<()> {
        if self.gamma1 + self.gamma2 > 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidParameter(
                "steady state needs gamma1 + gamma2 > 0".into(),
            ))
        }
    }

    /// Human-readable notes about parameters outside a regime's domain of validity.
    pub fn validity_warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.regime == Regime::HighTemperature {
            for (name, t) in [("T1", self.t1), ("T2", self.t2)] {
                if t / self.omega0 < 1.0 {
                    out.push(format!(
                        "high-temperature regime with {name}/omega0 = {:.3} < 1; the master equation assumes T/omega0 >> 1",
                        t / self.omega0
                    ));
                }
            }
        }
        out
    }

    /// Same physics with the oscillator labels exchanged.
    pub fn swapped(&self) -> SystemParams {
        SystemParams {
            gamma1: self.gamma2,
            gamma2: self.gamma1,
            t1: self.t2,
            t2: self.t1,
            ..*self
        }
    }

    pub fn effective_temps(&self) -> EffectiveTemps {
        effective_temps(self)
    }
}

/// Thermal weights `k T_i` that enter every noise term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveTemps {
    pub kt1: f64,
    pub kt2: f64,
}

/// `coth(omega / 2T)`, with the `T = 0` limit equal to 1.
pub fn coth_half(omega: f64, t: f64) -> f64 {
    let x = omega / (2.0 * t);
    1.0 / x.tanh()
}

/// Thermal weight of one bath under the given regime.
pub fn thermal_weight(regime: Regime, omega0: f64, t: f64) -> f64 {
    match regime {
        Regime::HighTemperature => t,
        Regime::WeakCoupling => 0.5 * omega0 * coth_half(omega0, t),
    }
}

pub fn effective_temps(params: &SystemParams) -> EffectiveTemps {
    EffectiveTemps {
        kt1: thermal_weight(params.regime, params.omega0, params.t1),
        kt2: thermal_weight(params.regime, params.omega0, params.t2),
    }
}

/// Two-particle Gaussian wavefunction with relative width `s` and
/// centre-of-mass width `d`:
/// `Psi ∝ exp(-(x1-x2)^2 / 4s^2) exp(-(x1+x2)^2 / 16d^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialState {
    pub s: f64,
    pub d: f64,
}

impl InitialState {
    pub fn new(s: f64, d: f64) -> Result<Self> {
        let st = InitialState { s, d };
        st.validate()?;
        Ok(st)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.s.is_finite() && self.s > 0.0 && self.d.is_finite() && self.d > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "initial widths must be finite and > 0, got s={} d={}",
                self.s, self.d
            )));
        }
        Ok(())
    }

    /// `eps_± = 1/(2 s^2) ± 1/(8 d^2)`.
    pub fn eps_plus(&self) -> f64 {
        0.5 / (self.s * self.s) + 0.125 / (self.d * self.d)
    }

    pub fn eps_minus(&self) -> f64 {
        0.5 / (self.s * self.s) - 0.125 / (self.d * self.d)
    }

    /// `eps~_± = eps_± / (4 (eps_+^2 - eps_-^2))`.
    ///
    /// `eps_+^2 - eps_-^2 = 1/(4 s^2 d^2)` is used directly to avoid the
    /// cancellation in the difference of squares.
    pub fn eps_tilde_plus(&self) -> f64 {
        self.eps_plus() * self.s * self.s * self.d * self.d
    }

    pub fn eps_tilde_minus(&self) -> f64 {
        self.eps_minus() * self.s * self.s * self.d * self.d
    }
}

/// Covariance matrix of the initial wavefunction from its position and
/// momentum moments (no dynamics involved).
///
/// With `r = x1 - x2` and `R = (x1 + x2)/2`, `|Psi|^2` factorizes into
/// independent Gaussians with `Var r = s^2` and `Var R = d^2`; the momenta
/// `p_r = (p1 - p2)/2` and `P_R = p1 + p2` have the minimum-uncertainty
/// variances `1/(4 s^2)` and `1/(4 d^2)`.
pub fn initial_covariance(init: &InitialState, params: &SystemParams) -> Result<CovarianceMatrix> {
    init.validate()?;
    params.validate()?;
    let (s2, d2) = (init.s * init.s, init.d * init.d);
    let xx = d2 + 0.25 * s2;
    let x1x2 = d2 - 0.25 * s2;
    let pp = 1.0 / (16.0 * d2) + 1.0 / (4.0 * s2);
    let p1p2 = 1.0 / (16.0 * d2) - 1.0 / (4.0 * s2);
    // Real wavefunction: no position-momentum correlations.
    let g = nalgebra::Matrix4::new(
        2.0 * xx, 0.0, 2.0 * x1x2, 0.0,
        0.0, 2.0 * pp, 0.0, 2.0 * p1p2,
        2.0 * x1x2, 0.0, 2.0 * xx, 0.0,
        0.0, 2.0 * p1p2, 0.0, 2.0 * pp,
    );
    CovarianceMatrix::new(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn fig1() -> SystemParams {
        SystemParams::new(2.0, 1.0, -1.0, 0.01, 0.01, 1.0, 0.25, Regime::HighTemperature).unwrap()
    }

    #[test]
    fn effective_temps_follow_regime() {
        let mut p = fig1();
        p.t1 = 1.0;
        assert_eq!(effective_temps(&p).kt1, 1.0);

        let mut w = SystemParams::new(1.0, 1.0, 0.2, 0.1, 0.1, 0.0, 100.0, Regime::WeakCoupling).unwrap();
        assert_eq!(effective_temps(&w).kt1, 0.5);
        // (1/2) coth(1/200), arbitrary-precision reference.
        assert_relative_eq!(effective_temps(&w).kt2, 100.000_833_331_944_447_75, max_relative = 1e-14);
        w.t1 = 100.0;
        assert_relative_eq!(effective_temps(&w).kt1, 100.000_833_331_944_447_75, max_relative = 1e-14);
    }

    #[test]
    fn high_temperature_at_zero_temperature_warns() {
        let mut p = fig1();
        p.t1 = 0.0;
        assert_eq!(effective_temps(&p).kt1, 0.0);
        assert!(!p.validity_warnings().is_empty());
    }

    #[test]
    fn swapping_baths_swaps_effective_temps() {
        for regime in [Regime::HighTemperature, Regime::WeakCoupling] {
            let p = SystemParams::new(1.3, 0.7, 0.2, 0.03, 0.05, 0.4, 2.5, regime).unwrap();
            let a = effective_temps(&p);
            let b = effective_temps(&p.swapped());
            assert_eq!(a.kt1, b.kt2);
            assert_eq!(a.kt2, b.kt1);
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(matches!(
            SystemParams::new(1.0, 1.0, 1.0, 0.1, 0.1, 1.0, 1.0, Regime::HighTemperature),
            Err(Error::UnstableSystem { .. })
        ));
        assert!(SystemParams::new(0.0, 1.0, 0.0, 0.1, 0.1, 1.0, 1.0, Regime::HighTemperature).is_err());
        assert!(SystemParams::new(1.0, 1.0, 0.0, -0.1, 0.1, 1.0, 1.0, Regime::HighTemperature).is_err());
        assert!(SystemParams::new(1.0, 1.0, 0.0, 0.1, 0.1, -1.0, 1.0, Regime::HighTemperature).is_err());
        assert!(InitialState::new(0.0, 1.0).is_err());
    }

    #[test]
    fn eps_identities() {
        for (s, d) in [(1.0, 6.0), (6.0, 3.0), (0.3, 0.2), (10.0, 6.0)] {
            let st = InitialState::new(s, d).unwrap();
            let (ep, em) = (st.eps_plus(), st.eps_minus());
            let (tp, tm) = (st.eps_tilde_plus(), st.eps_tilde_minus());
            assert!(ep > em.abs());
            assert_relative_eq!(tp, ep / (4.0 * (ep * ep - em * em)), max_relative = 1e-12);
            assert_relative_eq!(tp * tp - tm * tm, 1.0 / (16.0 * (ep * ep - em * em)), max_relative = 1e-12);
        }
    }

    #[test]
    fn initial_covariance_symmetry_point() {
        let g = initial_covariance(&InitialState::new(2.0, 1.0).unwrap(), &fig1()).unwrap();
        assert_eq!(g[(0, 2)], 0.0);
        assert_eq!(g[(0, 0)] / 2.0, 2.0);
    }

    /// Brute-force second moments of |Psi|^2 on a grid.
    #[test]
    fn initial_covariance_matches_quadrature() {
        let (s, d) = (1.0_f64, 6.0_f64);
        let psi2 = |x1: f64, x2: f64| {
            let r = x1 - x2;
            let sum = x1 + x2;
            (-(r * r) / (2.0 * s * s) - sum * sum / (8.0 * d * d)).exp() / (2.0 * std::f64::consts::PI * s * d)
        };
        let n = 1200;
        let l = 60.0;
        let h = 2.0 * l / n as f64;
        let (mut norm, mut m11, mut m12) = (0.0, 0.0, 0.0);
        for i in 0..=n {
            let x1 = -l + i as f64 * h;
            for j in 0..=n {
                let x2 = -l + j as f64 * h;
                let w = psi2(x1, x2) * h * h;
                norm += w;
                m11 += w * x1 * x1;
                m12 += w * x1 * x2;
            }
        }
        assert_relative_eq!(norm, 1.0, max_relative = 1e-6);
        let g = initial_covariance(&InitialState::new(s, d).unwrap(), &fig1()).unwrap();
        assert_relative_eq!(m11 / norm, 36.25, max_relative = 1e-6);
        assert_relative_eq!(m12 / norm, 35.75, max_relative = 1e-6);
        assert_relative_eq!(g[(0, 0)] / 2.0, 36.25, max_relative = 1e-14);
        assert_relative_eq!(g[(0, 2)] / 2.0, 35.75, max_relative = 1e-14);
    }

    #[test]
    fn regime_parses() {
        assert_eq!("high-t".parse::<Regime>().unwrap(), Regime::HighTemperature);
        assert_eq!("weak".parse::<Regime>().unwrap(), Regime::WeakCoupling);
        assert!("cold".parse::<Regime>().is_err());
    }
}
