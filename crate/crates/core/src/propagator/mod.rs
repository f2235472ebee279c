//! Closed-form time evolution of the Gaussian state.
//!
//! The master equation is written for the characteristic function
//! `P~(q, z, t)` (position representation, `x = u + z`, `y = u - z`, Fourier
//! transform in `u`), solved by characteristics `dv/dt = M v / 2m` on
//! `v = (z1, z2, q1, q2)`, and the resulting Gaussian exponent is read off as
//! a covariance matrix. Every query is evaluated directly from `t = 0`.

mod basis;
mod coefficients;
mod flow;
mod noise;

pub use basis::{build_drift_matrix, eigendecompose, quartic_roots, DriftMatrix, PropagatorBasis};
pub use coefficients::{solution_coefficients, SolutionCoefficients};
pub use flow::{flow_coefficients, FlowCoefficients};
pub use noise::{growth_integral, noise_integrals, settled_noise_integrals, NoiseIntegrals};

use crate::error::{Error, Result};
use crate::gaussian::CovarianceMatrix;
use crate::model::{EffectiveTemps, InitialState, SystemParams};

/// Parameter set plus its eigenbasis, computed once and shared by all
/// time queries.
#[derive(Debug, Clone)]
pub struct Propagator {
    params: SystemParams,
    init: InitialState,
    temps: EffectiveTemps,
    basis: PropagatorBasis,
}

impl Propagator {
    pub fn new(params: &SystemParams, init: &InitialState) -> Result<Self> {
        params.validate()?;
        init.validate()?;
        let basis = eigendecompose(&build_drift_matrix(params))?;
        Ok(Propagator {
            params: *params,
            init: *init,
            temps: params.effective_temps(),
            basis,
        })
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    pub fn initial_state(&self) -> &InitialState {
        &self.init
    }

    pub fn basis(&self) -> &PropagatorBasis {
        &self.basis
    }

    /// Diffusion up to `t` on the monomials of the final coordinates.
    pub fn noise_at(&self, t: f64) -> Result<NoiseIntegrals> {
        settled_noise_integrals(
            &self.basis,
            (self.params.gamma1, self.params.gamma2),
            &self.temps,
            self.params.m,
            t,
        )
    }

    pub fn coefficients_at(&self, t: f64) -> Result<SolutionCoefficients> {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::InvalidParameter(format!("time must be finite and >= 0, got {t}")));
        }
        let backward = flow_coefficients(&self.basis, self.params.m, -t);
        let noise = self.noise_at(t)?;
        solution_coefficients(&self.init, &backward, &noise)
    }

    pub fn covariance_at(&self, t: f64) -> Result<CovarianceMatrix> {
        self.coefficients_at(t)?.covariance()
    }

    /// Time after which the initial-condition transient has shrunk by
    /// `e^{-e_folds}`; `None` without dissipation.
    pub fn relaxation_time(&self, e_folds: f64) -> Option<f64> {
        let rate = self.basis.slowest_rate(self.params.m);
        (rate > 0.0).then(|| e_folds / rate)
    }
}

/// One-shot convenience wrapper around [`Propagator`].
pub fn covariance_at(init: &InitialState, params: &SystemParams, t: f64) -> Result<CovarianceMatrix> {
    Propagator::new(params, init)?.covariance_at(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{log_negativity, symplectic_spectrum, von_neumann_entropy};
    use crate::model::{initial_covariance, Regime};
    use approx::assert_relative_eq;

    fn fig1() -> SystemParams {
        SystemParams::new(2.0, 1.0, -1.0, 0.01, 0.01, 1.0, 0.25, Regime::HighTemperature).unwrap()
    }

    #[test]
    fn reproduces_initial_exponent_at_zero() {
        let init = InitialState::new(1.0, 6.0).unwrap();
        let c = Propagator::new(&fig1(), &init).unwrap().coefficients_at(0.0).unwrap();
        assert_relative_eq!(c.b1, 0.5 + 1.0 / 288.0, max_relative = 1e-10);
        assert_relative_eq!(c.b2, init.eps_plus(), max_relative = 1e-10);
        assert_relative_eq!(c.a1, init.eps_tilde_plus(), max_relative = 1e-10);
        assert_relative_eq!(c.a2, init.eps_tilde_plus(), max_relative = 1e-10);
        assert_relative_eq!(c.e, 2.0 * init.eps_tilde_minus(), max_relative = 1e-10);
        assert_relative_eq!(c.d, -2.0 * init.eps_minus(), max_relative = 1e-10);
        for v in c.c.iter().flatten() {
            assert!(v.abs() < 1e-9);
        }
    }

    #[test]
    fn zero_time_limit_equals_direct_moments() {
        for (s, d) in [(1.0, 6.0), (6.0, 3.0), (6.0, 1.0), (2.0, 1.0)] {
            let init = InitialState::new(s, d).unwrap();
            let analytic = covariance_at(&init, &fig1(), 0.0).unwrap();
            let direct = initial_covariance(&init, &fig1()).unwrap();
            let err = (analytic.matrix() - direct.matrix()).amax();
            assert!(err < 1e-8, "(s,d)=({s},{d}): {err}");
        }
    }

    #[test]
    fn symmetry_point_has_no_position_correlation() {
        let g = covariance_at(&InitialState::new(2.0, 1.0).unwrap(), &fig1(), 0.0).unwrap();
        assert!(g[(0, 2)].abs() < 1e-10);
    }

    #[test]
    fn initial_state_is_pure() {
        let g = covariance_at(&InitialState::new(1.0, 6.0).unwrap(), &fig1(), 0.0).unwrap();
        let spec = symplectic_spectrum(&g).unwrap();
        assert!((spec.nu[0] - 1.0).abs() < 1e-9 && (spec.nu[1] - 1.0).abs() < 1e-9);
        assert!(von_neumann_entropy(&g).unwrap() < 1e-9);
        assert!(log_negativity(&g).unwrap() > 0.0);
    }

    #[test]
    fn coefficients_become_stationary() {
        let p = fig1();
        let prop = Propagator::new(&p, &InitialState::new(1.0, 6.0).unwrap()).unwrap();
        let t = 30.0 / p.gamma1;
        let h = 1e-3;
        let a = prop.coefficients_at(t - h).unwrap();
        let b = prop.coefficients_at(t + h).unwrap();
        let pairs = [
            (a.a1, b.a1), (a.a2, b.a2), (a.b1, b.b1), (a.b2, b.b2), (a.d, b.d), (a.e, b.e),
            (a.c[0][0], b.c[0][0]), (a.c[0][1], b.c[0][1]), (a.c[1][0], b.c[1][0]), (a.c[1][1], b.c[1][1]),
        ];
        for (x, y) in pairs {
            assert!(((y - x) / (2.0 * h)).abs() < 1e-8, "{x} {y}");
        }
    }

    #[test]
    fn late_time_drift_is_the_moment_equation_drift() {
        let p = fig1();
        let prop = Propagator::new(&p, &InitialState::new(1.0, 6.0).unwrap()).unwrap();
        let ode = crate::oracle::MomentOde::from_params(&p);
        let h = 1e-3;
        for t in [30.0 / p.gamma1, 60.0 / p.gamma1] {
            let fd = (prop.covariance_at(t + h).unwrap().matrix() - prop.covariance_at(t - h).unwrap().matrix())
                / (2.0 * h);
            let exact = ode.derivative(prop.covariance_at(t).unwrap().matrix());
            assert!((fd - exact).amax() < 1e-9, "t={t}");
        }
        let late = prop.covariance_at(60.0 / p.gamma1).unwrap();
        assert!(ode.derivative(late.matrix()).amax() < 1e-10);
    }

    #[test]
    fn label_swap_permutes_covariance() {
        let p = SystemParams::new(1.0, 1.3, -1.6, 0.009, 0.01, 2.0, 4.0, Regime::HighTemperature).unwrap();
        let init = InitialState::new(1.0, 6.0).unwrap();
        for t in [0.5, 7.0, 120.0] {
            let g = covariance_at(&init, &p, t).unwrap();
            let gs = covariance_at(&init, &p.swapped(), t).unwrap();
            let err = (gs.matrix() - g.swap_modes().matrix()).amax();
            assert!(err < 1e-9 * g.matrix().amax(), "t={t}: {err}");
        }
    }

    #[test]
    fn strong_damping_stays_accurate_at_late_times() {
        let p = SystemParams::new(0.62, 0.5, -0.126, 0.267, 0.425, 4.74, 3.42, Regime::HighTemperature).unwrap();
        let init = InitialState::new(0.3, 0.3).unwrap();
        let prop = Propagator::new(&p, &init).unwrap();
        let ode = crate::oracle::MomentOde::from_params(&p);
        let start = crate::model::initial_covariance(&init, &p).unwrap();
        let g = prop.covariance_at(38.0).unwrap();
        let rk4 = crate::oracle::integrate_moments(&start, &ode, 38.0, 1e-3).unwrap().covariance;
        assert!((g.matrix() - rk4.matrix()).amax() < 1e-9 * g.matrix().amax());

        let late = prop.covariance_at(400.0).unwrap();
        let steady = crate::oracle::steady_covariance(&p).unwrap();
        assert!((late.matrix() - steady.matrix()).amax() < 1e-9 * steady.matrix().amax());
        let swapped = covariance_at(&init, &p.swapped(), 38.0).unwrap();
        assert!((swapped.matrix() - g.swap_modes().matrix()).amax() < 1e-9 * g.matrix().amax());
    }

    #[test]
    fn energy_conserved_without_friction() {
        let mut p = fig1();
        p.gamma1 = 0.0;
        p.gamma2 = 0.0;
        let prop = Propagator::new(&p, &InitialState::new(1.0, 6.0).unwrap()).unwrap();
        let energy = |g: &CovarianceMatrix| {
            (g[(1, 1)] + g[(3, 3)]) / (4.0 * p.m)
                + 0.25 * p.m * p.omega0 * p.omega0 * (g[(0, 0)] + g[(2, 2)])
                + 0.5 * p.kappa * g[(0, 2)]
        };
        let e0 = energy(&prop.covariance_at(0.0).unwrap());
        for i in 1..=50 {
            let t = 2.0 * i as f64;
            let e = energy(&prop.covariance_at(t).unwrap());
            assert!(((e - e0) / e0).abs() < 1e-8, "t={t}: {e} vs {e0}");
        }
    }

    #[test]
    fn rejects_negative_time() {
        let prop = Propagator::new(&fig1(), &InitialState::new(1.0, 6.0).unwrap()).unwrap();
        assert!(prop.covariance_at(-1.0).is_err());
    }
}
