use num_complex::Complex64;

use super::flow::FlowCoefficients;
use super::noise::NoiseIntegrals;
use crate::error::{Error, Result};
use crate::gaussian::CovarianceMatrix;
use crate::model::InitialState;

type C = Complex64;

const RESIDUE_TOL: f64 = 1e-8;

/// Exponent of the evolved characteristic function
/// `P~(q, z, t) = exp(-A1 q1² - A2 q2² - B1 z1² - B2 z2² - E q1q2 - D z1z2
///                    - C11 z1q1 - C22 z2q2 - C12 z1q2 - C21 z2q1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolutionCoefficients {
    pub a1: f64,
    pub a2: f64,
    pub b1: f64,
    pub b2: f64,
    /// `c[i][j]` multiplies `z_{i+1} q_{j+1}`.
    pub c: [[f64; 2]; 2],
    pub d: f64,
    pub e: f64,
}

/// Weights of the initial-state exponent on the initial monomials.
struct InitialForm {
    z1: C,
    z2: C,
    q1: C,
    q2: C,
    /// `-2ε-`, on `z10 z20`.
    zz: C,
    /// `2ε~-`, on `q10 q20`.
    qq: C,
}

impl InitialForm {
    fn new(init: &InitialState) -> Self {
        let (ep, em) = (init.eps_plus(), init.eps_minus());
        let (tp, tm) = (init.eps_tilde_plus(), init.eps_tilde_minus());
        let c = |x: f64| C::new(x, 0.0);
        InitialForm {
            z1: c(ep),
            z2: c(ep),
            q1: c(tp),
            q2: c(tp),
            zz: c(-2.0 * em),
            qq: c(2.0 * tm),
        }
    }

    /// Coefficient of `u v` after substituting the backward flow
    /// `z10 = ζ^- · (z, q)`, `z20 = ξ^- · (z, q)`, `q10 = τ^- · (z, q)`,
    /// `q20 = ϑ^- · (z, q)`. Indices 0..4 are `z1, z2, q1, q2`.
    ///
    /// For `u = v` this is e.g. `A_1 = ε+ ζ1^{q-}² + ... + 2ε~- τ1^{q-} ϑ1^{q-}`;
    /// for `u != v` each product is symmetrized, so squares pick up the factor 2
    /// seen in `D`, `E` and `C_ij`.
    fn pair(&self, back: &FlowCoefficients, u: usize, v: usize) -> C {
        let zeta = back.row(0);
        let xi = back.row(1);
        let tau = back.row(2);
        let vt = back.row(3);
        let prod = |x: &[C; 4], y: &[C; 4]| {
            if u == v {
                x[u] * y[u]
            } else {
                x[u] * y[v] + x[v] * y[u]
            }
        };
        self.z1 * prod(&zeta, &zeta)
            + self.z2 * prod(&xi, &xi)
            + self.q1 * prod(&tau, &tau)
            + self.q2 * prod(&vt, &vt)
            + self.zz * prod(&zeta, &xi)
            + self.qq * prod(&tau, &vt)
    }
}

fn realify(name: &'static str, z: C, scale: f64) -> Result<f64> {
    if z.im.abs() > RESIDUE_TOL * scale {
        return Err(Error::ImaginaryResidue {
            name,
            residue: z.im.abs() / scale,
        });
    }
    Ok(z.re)
}

/// Final Gaussian exponent at time `t`, from the flow evaluated at `-t` and
/// the noise up to `t` on the final monomials (see
/// [`settled_noise_integrals`](super::settled_noise_integrals)).
pub fn solution_coefficients(
    init: &InitialState,
    backward: &FlowCoefficients,
    settled_noise: &NoiseIntegrals,
) -> Result<SolutionCoefficients> {
    let form = InitialForm::new(init);
    let term = |u: usize, v: usize| form.pair(backward, u, v) + settled_noise.coefficient(u, v);
    let (z1, z2, q1, q2) = (0, 1, 2, 3);
    let raw = [
        ("A1", term(q1, q1)),
        ("A2", term(q2, q2)),
        ("B1", term(z1, z1)),
        ("B2", term(z2, z2)),
        ("C11", term(z1, q1)),
        ("C12", term(z1, q2)),
        ("C21", term(z2, q1)),
        ("C22", term(z2, q2)),
        ("D", term(z1, z2)),
        ("E", term(q1, q2)),
    ];
    let scale = raw.iter().map(|(_, z)| z.norm()).fold(0.0, f64::max);
    let mut re = [0.0; 10];
    for (slot, (name, z)) in re.iter_mut().zip(raw.iter()) {
        *slot = realify(name, *z, scale)?;
    }
    let coeffs = SolutionCoefficients {
        a1: re[0],
        a2: re[1],
        b1: re[2],
        b2: re[3],
        c: [[re[4], re[5]], [re[6], re[7]]],
        d: re[8],
        e: re[9],
    };
    for (name, value) in [("A1", coeffs.a1), ("A2", coeffs.a2), ("B1", coeffs.b1), ("B2", coeffs.b2)] {
        if !(value > 0.0) {
            return Err(Error::NonNormalizable { name, value });
        }
    }
    Ok(coeffs)
}

impl SolutionCoefficients {
    /// Covariance in `[x1, p1, x2, p2]` ordering:
    ///
    /// ```text
    /// [ 4A1   -C11  2E    -C21 ]
    /// [ -C11  B1    -C12  D/2  ]
    /// [ 2E    -C12  4A2   -C22 ]
    /// [ -C21  D/2   -C22  B2   ]
    /// ```
    pub fn covariance(&self) -> Result<CovarianceMatrix> {
        let c = &self.c;
        CovarianceMatrix::new(nalgebra::Matrix4::new(
            4.0 * self.a1, -c[0][0], 2.0 * self.e, -c[1][0],
            -c[0][0], self.b1, -c[0][1], 0.5 * self.d,
            2.0 * self.e, -c[0][1], 4.0 * self.a2, -c[1][1],
            -c[1][0], 0.5 * self.d, -c[1][1], self.b2,
        ))
    }
}
