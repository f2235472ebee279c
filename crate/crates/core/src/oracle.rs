//! Reference solvers that work directly on the second-moment equations,
//! independently of the closed-form propagator.
//!
//! From the master equation, the symmetrized moments obey
//! `dΓ/dt = AΓ + ΓAᵀ + 2D` with
//!
//! ```text
//! d<x_i>/dt = <p_i>/m
//! d<p_i>/dt = -m ω0² <x_i> - κ <x_j> - (γ_i/m) <p_i>
//! ```
//!
//! and `D = diag(0, 2γ1 kT1, 0, 2γ2 kT2)` coming from the `[x_i, [x_i, ρ]]`
//! term, which adds `2 γ_i kT_i` to `d<p_i²>/dt`.

use nalgebra::{DMatrix, DVector, Matrix4};

use crate::error::{Error, Result};
use crate::gaussian::{eigenvalues, CovarianceMatrix};
use crate::model::SystemParams;

const MIN_STEP: f64 = 1e-12;
const LYAPUNOV_RESIDUAL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentOde {
    pub a: Matrix4<f64>,
    pub ddiff: Matrix4<f64>,
}

impl MomentOde {
    pub fn from_params(params: &SystemParams) -> Self {
        let SystemParams { m, omega0, kappa, gamma1, gamma2, .. } = *params;
        let k = m * omega0 * omega0;
        #[rustfmt::skip]
        let a = Matrix4::new(
            0.0,    1.0 / m,      0.0,    0.0,
            -k,     -gamma1 / m,  -kappa, 0.0,
            0.0,    0.0,          0.0,    1.0 / m,
            -kappa, 0.0,          -k,     -gamma2 / m,
        );
        let temps = params.effective_temps();
        let mut ddiff = Matrix4::zeros();
        ddiff[(1, 1)] = 2.0 * gamma1 * temps.kt1;
        ddiff[(3, 3)] = 2.0 * gamma2 * temps.kt2;
        MomentOde { a, ddiff }
    }

    /// `AΓ + ΓAᵀ + 2D`.
    pub fn derivative(&self, gamma: &Matrix4<f64>) -> Matrix4<f64> {
        self.a * gamma + gamma * self.a.transpose() + 2.0 * self.ddiff
    }

    fn rk4_step(&self, g: &Matrix4<f64>, h: f64) -> Matrix4<f64> {
        let k1 = self.derivative(g);
        let k2 = self.derivative(&(g + k1 * (0.5 * h)));
        let k3 = self.derivative(&(g + k2 * (0.5 * h)));
        let k4 = self.derivative(&(g + k3 * h));
        g + (k1 + 2.0 * k2 + 2.0 * k3 + k4) * (h / 6.0)
    }

    fn run(&self, init: &Matrix4<f64>, t_end: f64, steps: usize) -> Matrix4<f64> {
        let h = t_end / steps as f64;
        let mut g = *init;
        for _ in 0..steps {
            g = self.rk4_step(&g, h);
        }
        0.5 * (g + g.transpose())
    }
}

/// `min(0.01, 0.01 m / max(γ1, γ2, 1))`.
pub fn default_dt(params: &SystemParams) -> f64 {
    let rate = params.gamma1.max(params.gamma2).max(1.0);
    0.01f64.min(0.01 * params.m / rate)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeSolution {
    /// Result of the half-step run.
    pub covariance: CovarianceMatrix,
    /// Richardson estimate `|Γ_{h/2} - Γ_h|_max / 15` of the half-step error.
    pub error_estimate: f64,
    pub steps: usize,
    pub dt: f64,
}

/// Fixed-step RK4 from `init` to `t_end`, run at `dt` and at `dt/2`.
/// The step is shrunk so that an integer number of steps lands on `t_end`.
pub fn integrate_moments(
    init: &CovarianceMatrix,
    ode: &MomentOde,
    t_end: f64,
    dt: f64,
) -> Result<OdeSolution> {
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidParameter(format!("t_end must be finite and >= 0, got {t_end}")));
    }
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
    }
    if t_end == 0.0 {
        return Ok(OdeSolution { covariance: *init, error_estimate: 0.0, steps: 0, dt: 0.0 });
    }
    let steps = (t_end / dt).ceil().max(1.0) as usize;
    let h = t_end / steps as f64;
    if h / 2.0 < MIN_STEP {
        return Err(Error::StepSizeUnderflow { dt: h / 2.0 });
    }
    let coarse = ode.run(init.matrix(), t_end, steps);
    let fine = ode.run(init.matrix(), t_end, 2 * steps);
    Ok(OdeSolution {
        covariance: CovarianceMatrix::new(fine)?,
        error_estimate: (fine - coarse).amax() / 15.0,
        steps: 2 * steps,
        dt: h / 2.0,
    })
}

/// Solves `AX + XAᵀ + 2D = 0` through the 16×16 system
/// `(I ⊗ A + A ⊗ I) vec(X) = -2 vec(D)`.
pub fn lyapunov_steady(ode: &MomentOde) -> Result<CovarianceMatrix> {
    let max_re = eigenvalues(ode.a)?
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max);
    if max_re >= -1e-12 {
        return Err(Error::NotHurwitz { max_re });
    }

    let mut kron = DMatrix::<f64>::zeros(16, 16);
    for col in 0..4 {
        for row in 0..4 {
            let r = col * 4 + row;
            for k in 0..4 {
                kron[(r, col * 4 + k)] += ode.a[(row, k)];
                kron[(r, k * 4 + row)] += ode.a[(col, k)];
            }
        }
    }
    let rhs = DVector::from_iterator(16, ode.ddiff.iter().map(|v| -2.0 * v));
    let sol = kron
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Singular("Lyapunov operator is singular".into()))?;
    let x = Matrix4::from_iterator(sol.iter().copied());
    let x = 0.5 * (x + x.transpose());

    let residual = ode.derivative(&x).amax();
    let scale = ode.a.amax() * x.amax() + ode.ddiff.amax();
    if residual > LYAPUNOV_RESIDUAL * scale {
        return Err(Error::Singular(format!(
            "Lyapunov residual {:.3e} exceeds tolerance",
            residual / scale
        )));
    }
    CovarianceMatrix::new(x)
}

/// Steady state of `params` from the Lyapunov solve.
pub fn steady_covariance(params: &SystemParams) -> Result<CovarianceMatrix> {
    params.validate()?;
    lyapunov_steady(&MomentOde::from_params(params))
}
