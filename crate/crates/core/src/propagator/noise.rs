use nalgebra::Matrix4;
use num_complex::Complex64;

use super::basis::PropagatorBasis;
use crate::error::{Error, Result};
use crate::model::EffectiveTemps;

type C = Complex64;

/// Accumulated diffusion along a characteristic,
/// `∫_0^t 4(γ1 kT1 z1(τ)² + γ2 kT2 z2(τ)²) dτ = 4 Σ (coefficient × initial monomial)`
/// with monomials `z10², z20², q10², q20²` (`chi`), `z10 z20`, `q10 q20`
/// (`theta`) and `z_{i0} q_{j0}` (`lambda[i][j]`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseIntegrals {
    pub chi_z: [C; 2],
    pub chi_q: [C; 2],
    pub theta_z: C,
    pub theta_q: C,
    pub lambda: [[C; 2]; 2],
}

impl NoiseIntegrals {
    /// Symmetric matrix `N` with exponent `-v0^T N v0` on `v0 = (z10, z20, q10, q20)`.
    pub fn quadratic_form(&self) -> Matrix4<C> {
        let mut n = Matrix4::<C>::zeros();
        n[(0, 0)] = 4.0 * self.chi_z[0];
        n[(1, 1)] = 4.0 * self.chi_z[1];
        n[(2, 2)] = 4.0 * self.chi_q[0];
        n[(3, 3)] = 4.0 * self.chi_q[1];
        let mut set = |i: usize, j: usize, v: C| {
            n[(i, j)] = 2.0 * v;
            n[(j, i)] = 2.0 * v;
        };
        set(0, 1, self.theta_z);
        set(2, 3, self.theta_q);
        set(0, 2, self.lambda[0][0]);
        set(0, 3, self.lambda[0][1]);
        set(1, 2, self.lambda[1][0]);
        set(1, 3, self.lambda[1][1]);
        n
    }

    /// Coefficient of `v_u v_v` in `v^T N v` (indices 0..4 = z1, z2, q1, q2).
    pub fn coefficient(&self, u: usize, v: usize) -> C {
        let n = self.quadratic_form();
        if u == v {
            n[(u, u)]
        } else {
            2.0 * n[(u, v)]
        }
    }

    /// Smallest eigenvalue of the real part of the quadratic form, relative
    /// to its largest magnitude entry (0 for the zero form).
    pub fn min_relative_eigenvalue(&self) -> f64 {
        let n = self.quadratic_form().map(|v| v.re);
        let scale = n.amax();
        if scale == 0.0 {
            return 0.0;
        }
        n.symmetric_eigenvalues().min() / scale
    }
}

/// `(e^{σt} - 1)/σ`, by its 4-term Taylor series when `|σt| < 1e-6`.
pub fn growth_integral(sigma: C, t: f64) -> C {
    let x = sigma * t;
    if x.norm() < 1e-6 {
        t * (1.0 + x / 2.0 + x * x / 6.0 + x * x * x / 24.0)
    } else {
        exp_m1(x) / sigma
    }
}

/// `e^x - 1` without cancellation for small `|x|`.
fn exp_m1(x: C) -> C {
    let half_sin = (0.5 * x.im).sin();
    C::new(
        x.re.exp_m1() * x.im.cos() - 2.0 * half_sin * half_sin,
        x.re.exp() * x.im.sin(),
    )
}

/// Integrated weight of the product of modes `i` and `k`:
/// `(γ1 kT1 a_i a_k + γ2 kT2 b_i b_k) (e^{(λ_i+λ_k)t/2m} - 1) 2m/(λ_i+λ_k)`.
///
/// On the diagonal this is the `m/λ_i (e^{λ_i t/m} - 1)` factor; off the
/// diagonal the two orderings `(i,k)`, `(k,i)` give the `4m/(λ_i+λ_k)` factor.
/// With `settled` each weight is multiplied by `e^{-(λ_i+λ_k)t/2m}`, giving
/// `(1 - e^{-(λ_i+λ_k)t/2m}) 2m/(λ_i+λ_k)`.
fn pair_weights(
    basis: &PropagatorBasis,
    gamma: (f64, f64),
    temps: &EffectiveTemps,
    m: f64,
    t: f64,
    settled: bool,
) -> Result<[[C; 4]; 4]> {
    let scale = basis.max_abs_lambda();
    let (g1t1, g2t2) = (gamma.0 * temps.kt1, gamma.1 * temps.kt2);
    let mut w = [[C::new(0.0, 0.0); 4]; 4];
    for i in 0..4 {
        for k in i..4 {
            let coefficient = g1t1 * basis.a(i) * basis.a(k) + g2t2 * basis.b(i) * basis.b(k);
            if coefficient.norm() == 0.0 {
                continue;
            }
            let sum = basis.lambda[i] + basis.lambda[k];
            if sum.norm() < 1e-12 * scale {
                return Err(Error::SingularNormalization(format!(
                    "lambda_{} + lambda_{} vanishes with nonzero noise weight",
                    i + 1,
                    k + 1
                )));
            }
            let rate = if settled { -sum } else { sum } / (2.0 * m);
            let v = coefficient * growth_integral(rate, t);
            w[i][k] = v;
            w[k][i] = v;
        }
    }
    Ok(w)
}

/// Coefficient of the initial monomial `v0_j v0_l` in `∫ (γ1kT1 z1² + γ2kT2 z2²)`,
/// where `z(τ)` is expanded in the rows of `Q^-1`.
fn monomial(w: &[[C; 4]; 4], qinv: &Matrix4<C>, j: usize, l: usize) -> C {
    let mut acc = C::new(0.0, 0.0);
    for i in 0..4 {
        for k in 0..4 {
            let prod = if j == l {
                qinv[(i, j)] * qinv[(k, j)]
            } else {
                qinv[(i, j)] * qinv[(k, l)] + qinv[(i, l)] * qinv[(k, j)]
            };
            acc += w[i][k] * prod;
        }
    }
    acc
}

/// Diffusion accumulated up to `t`, on the monomials of the initial
/// characteristic coordinates `v0`. Grows like `e^{max Re λ t/m}`.
pub fn noise_integrals(
    basis: &PropagatorBasis,
    gamma: (f64, f64),
    temps: &EffectiveTemps,
    m: f64,
    t: f64,
) -> Result<NoiseIntegrals> {
    accumulate(basis, gamma, temps, m, t, false)
}

/// The same diffusion on the monomials of the final coordinates `v(t)`,
/// i.e. [`noise_integrals`] with the backward flow already substituted. The
/// weights stay bounded, so nothing cancels at late times.
pub fn settled_noise_integrals(
    basis: &PropagatorBasis,
    gamma: (f64, f64),
    temps: &EffectiveTemps,
    m: f64,
    t: f64,
) -> Result<NoiseIntegrals> {
    accumulate(basis, gamma, temps, m, t, true)
}

fn accumulate(
    basis: &PropagatorBasis,
    gamma: (f64, f64),
    temps: &EffectiveTemps,
    m: f64,
    t: f64,
    settled: bool,
) -> Result<NoiseIntegrals> {
    if !(t >= 0.0) {
        return Err(Error::InvalidParameter(format!("time must be >= 0, got {t}")));
    }
    let w = pair_weights(basis, gamma, temps, m, t, settled)?;
    let q = &basis.qinv;
    // Cross monomials collect both orderings, e.g. `2m ã_1 ã_2/λ_1 (...)`
    // and `4m (ã_1 b̃_2 + b̃_1 ã_2)/(λ_1+λ_2) (...)` for `theta_z`.
    let cross = |j: usize, l: usize| monomial(&w, q, j, l);
    Ok(NoiseIntegrals {
        chi_z: [monomial(&w, q, 0, 0), monomial(&w, q, 1, 1)],
        chi_q: [monomial(&w, q, 2, 2), monomial(&w, q, 3, 3)],
        theta_z: cross(0, 1),
        theta_q: cross(2, 3),
        lambda: [[cross(0, 2), cross(0, 3)], [cross(1, 2), cross(1, 3)]],
    })
}
