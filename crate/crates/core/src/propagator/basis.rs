use nalgebra::Matrix4;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::SystemParams;

type C = Complex64;

const DEGENERACY_TOL: f64 = 1e-8;
const SINGULAR_TOL: f64 = 1e-12;

/// Characteristic matrix acting on `v = (z1, z2, q1, q2)`; the characteristics
/// of the Fourier-transformed master equation obey `dv/dt = M v / 2m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftMatrix {
    pub m: Matrix4<f64>,
}

pub fn build_drift_matrix(params: &SystemParams) -> DriftMatrix {
    let SystemParams {
        m,
        omega0,
        kappa,
        gamma1,
        gamma2,
        ..
    } = *params;
    let w = 4.0 * m * m * omega0 * omega0;
    let k = 4.0 * m * kappa;
    DriftMatrix {
        m: Matrix4::new(
            2.0 * gamma1, 0.0, 1.0, 0.0,
            0.0, 2.0 * gamma2, 0.0, 1.0,
            -w, -k, 0.0, 0.0,
            -k, -w, 0.0, 0.0,
        ),
    }
}

impl DriftMatrix {
    fn gamma1(&self) -> f64 {
        0.5 * self.m[(0, 0)]
    }

    fn gamma2(&self) -> f64 {
        0.5 * self.m[(1, 1)]
    }

    /// `4 m^2 omega0^2`.
    fn w(&self) -> f64 {
        -self.m[(2, 0)]
    }

    /// `4 m kappa`.
    fn k(&self) -> f64 {
        -self.m[(2, 1)]
    }

    /// Monic characteristic polynomial coefficients `[c0, c1, c2, c3]` of
    /// `det(λ - M) = (λ² - 2γ1λ + w)(λ² - 2γ2λ + w) - k²`.
    pub fn characteristic_polynomial(&self) -> [f64; 4] {
        let (g1, g2, w, k) = (self.gamma1(), self.gamma2(), self.w(), self.k());
        [
            w * w - k * k,
            -2.0 * w * (g1 + g2),
            2.0 * w + 4.0 * g1 * g2,
            -2.0 * (g1 + g2),
        ]
    }
}

/// Eigenvalues and closed-form eigenvectors of the characteristic matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct PropagatorBasis {
    /// Sorted by real part, then imaginary part, both descending.
    pub lambda: [C; 4],
    /// Columns are eigenvectors; rows hold `a_i, b_i, c_i, f_i`.
    pub q: Matrix4<C>,
    /// Rows hold `ã, b̃, c̃, f̃`.
    pub qinv: Matrix4<C>,
}

impl PropagatorBasis {
    pub fn a(&self, i: usize) -> C {
        self.q[(0, i)]
    }

    pub fn b(&self, i: usize) -> C {
        self.q[(1, i)]
    }

    pub fn c(&self, i: usize) -> C {
        self.q[(2, i)]
    }

    pub fn f(&self, i: usize) -> C {
        self.q[(3, i)]
    }

    pub fn max_abs_lambda(&self) -> f64 {
        self.lambda.iter().map(|l| l.norm()).fold(0.0, f64::max)
    }

    /// Slowest decay rate of the covariance transient, `min Re λ / m`.
    pub fn slowest_rate(&self, m: f64) -> f64 {
        self.lambda.iter().map(|l| l.re).fold(f64::INFINITY, f64::min) / m
    }
}

fn eval_poly(c: &[f64; 4], z: C) -> (C, C) {
    // Horner for p and p'.
    let mut p = C::new(1.0, 0.0);
    let mut dp = C::new(0.0, 0.0);
    for &coef in c.iter().rev() {
        dp = dp * z + p;
        p = p * z + coef;
    }
    (p, dp)
}

/// Roots of a monic quartic by Aberth-Ehrlich iteration with a final Newton
/// polish. Conjugate pairs are symmetrized exactly since the coefficients
/// are real.
pub fn quartic_roots(c: &[f64; 4]) -> [C; 4] {
    let center = -c[3] / 4.0;
    let radius = c
        .iter()
        .enumerate()
        .map(|(k, v)| v.abs().powf(1.0 / (4 - k) as f64))
        .fold(0.0, f64::max)
        .max(1e-3);
    let mut z: [C; 4] = std::array::from_fn(|k| {
        let phase = 0.4 + std::f64::consts::FRAC_PI_2 * k as f64;
        C::new(center, 0.0) + C::from_polar(radius, phase)
    });

    for _ in 0..500 {
        let mut max_step: f64 = 0.0;
        for k in 0..4 {
            let (p, dp) = eval_poly(c, z[k]);
            if p == C::new(0.0, 0.0) {
                continue;
            }
            let ratio = p / dp;
            let repulsion: C = (0..4)
                .filter(|&j| j != k)
                .map(|j| C::new(1.0, 0.0) / (z[k] - z[j]))
                .sum();
            let step = ratio / (C::new(1.0, 0.0) - ratio * repulsion);
            if step.is_finite() {
                z[k] -= step;
                max_step = max_step.max(step.norm() / z[k].norm().max(1e-300));
            }
        }
        if max_step < 1e-15 {
            break;
        }
    }
    for root in z.iter_mut() {
        for _ in 0..2 {
            let (p, dp) = eval_poly(c, *root);
            let step = p / dp;
            if step.is_finite() && step.norm() < 1e-6 * root.norm().max(1.0) {
                *root -= step;
            }
        }
    }

    symmetrize_conjugates(&mut z);
    z
}

fn symmetrize_conjugates(z: &mut [C; 4]) {
    let scale = z.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1e-300);
    let mut used = [false; 4];
    for i in 0..4 {
        if used[i] {
            continue;
        }
        if z[i].im.abs() <= 1e-14 * scale {
            z[i].im = 0.0;
            used[i] = true;
            continue;
        }
        let partner = (0..4)
            .filter(|&j| j != i && !used[j])
            .min_by(|&a, &b| {
                (z[a] - z[i].conj())
                    .norm()
                    .total_cmp(&(z[b] - z[i].conj()).norm())
            });
        if let Some(j) = partner {
            let re = 0.5 * (z[i].re + z[j].re);
            let im = 0.5 * (z[i].im.abs() + z[j].im.abs());
            z[i] = C::new(re, im.copysign(z[i].im));
            z[j] = z[i].conj();
            used[i] = true;
            used[j] = true;
        }
    }
}

/// Real part descending, imaginary part descending among roots whose real
/// parts agree to rounding.
fn sort_eigenvalues(z: &mut [C; 4]) {
    let scale = z.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let tol = 1e-12 * scale;
    z.sort_by(|a, b| b.re.total_cmp(&a.re));
    let mut start = 0;
    while start < 4 {
        let mut end = start + 1;
        while end < 4 && (z[end - 1].re - z[end].re).abs() <= tol {
            end += 1;
        }
        z[start..end].sort_by(|a, b| b.im.total_cmp(&a.im));
        start = end;
    }
}

/// Eigenvalues from the characteristic quartic, eigenvectors from the closed
/// forms `b_i = f_i / (λ_i - 2γ2)`, `a_i = c_i / (λ_i - 2γ1)` with `f_i = 1`.
///
/// `c_i` has three algebraically equivalent forms on the spectrum (they agree
/// because `P1 P2 = k²` with `P_j = λ(λ - 2γ_j) + w`):
///
/// ```text
/// c = -(λ-2γ1)/(λ-2γ2) · (P2 + k) / (P1 + k)
///   = -(λ-2γ1)/(λ-2γ2) · k / P1
///   = -(λ-2γ1)/(λ-2γ2) · P2 / k
/// ```
///
/// The first is 0/0 on half the spectrum whenever `γ1 = γ2`, so the form
/// with the largest denominator is used.
pub fn eigendecompose(drift: &DriftMatrix) -> Result<PropagatorBasis> {
    let mut lambda = quartic_roots(&drift.characteristic_polynomial());
    sort_eigenvalues(&mut lambda);

    let scale = lambda.iter().map(|l| l.norm()).fold(0.0, f64::max);
    let mut min_gap = f64::INFINITY;
    for i in 0..4 {
        for j in i + 1..4 {
            min_gap = min_gap.min((lambda[i] - lambda[j]).norm());
        }
    }
    let threshold = DEGENERACY_TOL * scale;
    if min_gap < threshold {
        return Err(Error::DegenerateSpectrum { min_gap, threshold });
    }

    let (g1, g2, w, k) = (drift.gamma1(), drift.gamma2(), drift.w(), drift.k());
    let mut q = Matrix4::<C>::zeros();
    for (i, &l) in lambda.iter().enumerate() {
        let d1 = l - 2.0 * g1;
        let d2 = l - 2.0 * g2;
        if d1.norm() < SINGULAR_TOL * scale || d2.norm() < SINGULAR_TOL * scale {
            return Err(Error::SingularNormalization(format!(
                "lambda_{} = {l} coincides with 2*gamma",
                i + 1
            )));
        }
        let p1 = l * d1 + w;
        let p2 = l * d2 + w;
        let forms = [
            (p1 + k, p2 + k),
            (p1, C::new(k, 0.0)),
            (C::new(k, 0.0), p2),
        ];
        let (den, num) = forms
            .iter()
            .copied()
            .max_by(|a, b| a.0.norm().total_cmp(&b.0.norm()))
            .expect("three candidate forms");
        if den.norm() < SINGULAR_TOL * scale * scale {
            return Err(Error::SingularNormalization(format!(
                "c_{} denominator vanishes (decoupled oscillators?)",
                i + 1
            )));
        }
        let f = C::new(1.0, 0.0);
        let c = -(d1 / d2) * num / den;
        q[(0, i)] = c / d1;
        q[(1, i)] = f / d2;
        q[(2, i)] = c;
        q[(3, i)] = f;
    }

    let qinv = q
        .try_inverse()
        .ok_or_else(|| Error::Singular("eigenvector matrix Q is not invertible".into()))?;

    let basis = PropagatorBasis { lambda, q, qinv };
    check_basis(drift, &basis)?;
    Ok(basis)
}

fn check_basis(drift: &DriftMatrix, basis: &PropagatorBasis) -> Result<()> {
    let mc = drift.m.map(|v| C::new(v, 0.0));
    let diag = Matrix4::from_diagonal(&nalgebra::Vector4::from(basis.lambda));
    let lhs = mc * basis.q;
    let residual = (lhs - basis.q * diag).iter().map(|v| v.norm()).fold(0.0, f64::max);
    let norm = lhs.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if residual > 1e-10 * norm {
        return Err(Error::SingularNormalization(format!(
            "closed-form eigenvectors miss M Q = Q D by {residual:e}"
        )));
    }
    let id = basis.q * basis.qinv - Matrix4::<C>::identity();
    let err = id.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if err > 1e-10 {
        return Err(Error::Singular(format!("Q Q^-1 deviates from I by {err:e}")));
    }
    Ok(())
}
