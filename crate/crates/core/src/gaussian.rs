//! Symplectic algebra on two-mode covariance matrices.
//!
//! Covariance convention: `G_jk = 2 Re Tr[rho R_j R_k]` with
//! `R = (x1, p1, x2, p2)`, so the vacuum of a unit oscillator is `G = I`.

use std::ops::Index;

use nalgebra::{Cholesky, Matrix4, Schur, Vector4, SVD};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const SYMMETRY_TOL: f64 = 1e-9;
const PAIRING_TOL: f64 = 1e-7;
/// Absolute floor of the pairing check, relative to the largest eigenvalue:
/// the general eigensolver only resolves small eigenvalues to about
/// `eps * max|λ|`.
const PAIRING_FLOOR: f64 = 1e-12;
const RESIDUE_TOL: f64 = 1e-8;
const NON_PHYSICAL_TOL: f64 = 1e-6;
const BOUNDARY_TOL: f64 = 1e-12;
const MAX_QR_ITERATIONS: usize = 400;

/// Real symmetric 4x4 second-moment matrix in ordering `[x1, p1, x2, p2]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CovarianceMatrix(Matrix4<f64>);

impl CovarianceMatrix {
    /// Validates symmetry (relative to the max-norm) and a positive diagonal,
    /// then stores the exactly symmetrized matrix.
    pub fn new(g: Matrix4<f64>) -> Result<Self> {
        if g.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("covariance has non-finite entries".into()));
        }
        let scale = g.amax();
        let asym = (g - g.transpose()).amax();
        if asym > SYMMETRY_TOL * scale {
            return Err(Error::InvalidParameter(format!(
                "covariance not symmetric: max |G - G^T| = {asym:e}"
            )));
        }
        if let Some(i) = (0..4).find(|&i| g[(i, i)] <= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "covariance diagonal entry {i} is {} (must be > 0)",
                g[(i, i)]
            )));
        }
        Ok(CovarianceMatrix(0.5 * (g + g.transpose())))
    }

    pub fn matrix(&self) -> &Matrix4<f64> {
        &self.0
    }

    pub fn into_inner(self) -> Matrix4<f64> {
        self.0
    }

    /// The ten independent entries, row-major upper triangle.
    pub fn upper_triangle(&self) -> [f64; 10] {
        let g = &self.0;
        [
            g[(0, 0)], g[(0, 1)], g[(0, 2)], g[(0, 3)],
            g[(1, 1)], g[(1, 2)], g[(1, 3)],
            g[(2, 2)], g[(2, 3)],
            g[(3, 3)],
        ]
    }

    /// `P G P^T` for the permutation exchanging modes 1 and 2.
    pub fn swap_modes(&self) -> CovarianceMatrix {
        let p = mode_swap();
        CovarianceMatrix(p * self.0 * p.transpose())
    }

    /// `S G S^T` for a linear (typically symplectic) transform.
    pub fn transform(&self, s: &Matrix4<f64>) -> Result<CovarianceMatrix> {
        CovarianceMatrix::new(s * self.0 * s.transpose())
    }

    /// Max-norm relative deviation `|A - B|_max / |B|_max`.
    pub fn relative_deviation(&self, reference: &CovarianceMatrix) -> f64 {
        (self.0 - reference.0).amax() / reference.0.amax()
    }
}

impl Index<(usize, usize)> for CovarianceMatrix {
    type Output = f64;

    fn index(&self, idx: (usize, usize)) -> &f64 {
        &self.0[idx]
    }
}

pub(crate) fn mode_swap() -> Matrix4<f64> {
    Matrix4::new(
        0.0, 0.0, 1.0, 0.0,
        0.0, 0.0, 0.0, 1.0,
        1.0, 0.0, 0.0, 0.0,
        0.0, 1.0, 0.0, 0.0,
    )
}

/// Symplectic form `⊕ [[0, 1], [-1, 0]]`.
pub fn symplectic_form() -> Matrix4<f64> {
    Matrix4::new(
        0.0, 1.0, 0.0, 0.0,
        -1.0, 0.0, 0.0, 0.0,
        0.0, 0.0, 0.0, 1.0,
        0.0, 0.0, -1.0, 0.0,
    )
}

/// Symplectic eigenvalues of a two-mode covariance matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymplecticSpectrum {
    /// One value per mode, descending.
    pub nu: [f64; 2],
    /// The four eigenvalues of `-σGσG` came out as two degenerate pairs.
    pub paired: bool,
}

impl SymplecticSpectrum {
    pub fn min(&self) -> f64 {
        self.nu[1]
    }

    pub fn max(&self) -> f64 {
        self.nu[0]
    }
}

/// Sends `p1 -> -p1`: `G^{T1} = L G L` with `L = diag(1, -1, 1, 1)`.
pub fn partial_transpose(gamma: &CovarianceMatrix) -> CovarianceMatrix {
    let mut g = gamma.0;
    for j in 0..4 {
        if j != 1 {
            g[(1, j)] = -g[(1, j)];
            g[(j, 1)] = -g[(j, 1)];
        }
    }
    CovarianceMatrix(g)
}

/// Eigenvalues of a general 4x4 matrix with a bounded QR iteration count.
pub(crate) fn eigenvalues(m: Matrix4<f64>) -> Result<Vector4<Complex64>> {
    Schur::try_new(m, f64::EPSILON, MAX_QR_ITERATIONS)
        .map(|schur| schur.complex_eigenvalues())
        .ok_or(Error::NoConvergence { iterations: MAX_QR_ITERATIONS })
}

/// Eigenvalues of `-σGσG`, ascending, through the similar symmetric
/// matrix `KᵀK` with `K = Lᵀ σ L` and `G = L Lᵀ` (squared singular values of
/// `K`). Unlike a general eigensolver on `-σGσG` this keeps full accuracy
/// when `G` is badly conditioned. `None` if `G` is not positive definite.
fn cholesky_spectrum(g: &Matrix4<f64>) -> Option<[f64; 4]> {
    let l = Cholesky::new(*g)?.unpack();
    let k = l.transpose() * symplectic_form() * l;
    let sv = SVD::try_new(k, false, false, f64::EPSILON, MAX_QR_ITERATIONS)?.singular_values;
    let mut values = [0.0; 4];
    for (slot, v) in values.iter_mut().zip(sv.iter()) {
        *slot = v * v;
    }
    values.sort_by(f64::total_cmp);
    Some(values)
}

/// Eigenvalues of `-σGσG` from the general eigensolver, ascending, after
/// checking positivity and the imaginary residue.
fn general_spectrum(g: &Matrix4<f64>) -> Result<[f64; 4]> {
    let sigma = symplectic_form();
    let eig = eigenvalues(-(sigma * g * sigma * g))?;
    let scale = eig.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut values = [0.0; 4];
    for (slot, z) in values.iter_mut().zip(eig.iter()) {
        if z.re <= 0.0 || z.im.abs() > RESIDUE_TOL * scale {
            return Err(Error::NonPositive { re: z.re, im: z.im });
        }
        *slot = z.re;
    }
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// Square roots of the eigenvalues of `-σGσG`, checked to be positive and
/// to come in degenerate pairs. Positive definite `G` goes through
/// [`cholesky_spectrum`]; anything else through the general eigensolver,
/// which reports what is wrong with it.
pub fn symplectic_spectrum(gamma: &CovarianceMatrix) -> Result<SymplecticSpectrum> {
    let values = match cholesky_spectrum(&gamma.0) {
        Some(values) if values[0] > 0.0 => values,
        Some(values) => return Err(Error::NonPositive { re: values[0], im: 0.0 }),
        None => general_spectrum(&gamma.0)?,
    };
    let floor = PAIRING_FLOOR * values[3].abs();
    let close = |a: f64, b: f64| (a - b).abs() <= PAIRING_TOL * a.abs().max(b.abs()) + floor;
    let paired = close(values[0], values[1]) && close(values[2], values[3]);
    if !paired {
        return Err(Error::UnpairedSpectrum(values));
    }
    let hi = (0.5 * (values[2] + values[3])).sqrt();
    let lo = (0.5 * (values[0] + values[1])).sqrt();
    Ok(SymplecticSpectrum {
        nu: [hi, lo],
        paired,
    })
}

fn clamp_boundary(nu: f64) -> f64 {
    if (nu - 1.0).abs() < BOUNDARY_TOL {
        1.0
    } else {
        nu
    }
}

/// Logarithmic negativity from the partially transposed spectrum,
/// `-2 Σ_k log2 min(1, ν~_k)`.
pub fn log_negativity(gamma: &CovarianceMatrix) -> Result<f64> {
    let spec = symplectic_spectrum(&partial_transpose(gamma))?;
    Ok(log_negativity_from_spectrum(&spec))
}

pub fn log_negativity_from_spectrum(spec: &SymplecticSpectrum) -> f64 {
    let sum: f64 = spec
        .nu
        .iter()
        .map(|&nu| clamp_boundary(nu).min(1.0).log2())
        .sum();
    // -0.0 when every mode is clamped.
    (-2.0 * sum).max(0.0)
}

/// Von Neumann entropy (natural log) from the spectrum of `G` itself,
/// with thermal occupations `N_k = (ν_k - 1)/2`.
pub fn von_neumann_entropy(gamma: &CovarianceMatrix) -> Result<f64> {
    let spec = symplectic_spectrum(gamma)?;
    entropy_from_spectrum(&spec)
}

pub fn entropy_from_spectrum(spec: &SymplecticSpectrum) -> Result<f64> {
    let mut s = 0.0;
    for &nu in &spec.nu {
        if nu < 1.0 - NON_PHYSICAL_TOL {
            return Err(Error::NonPhysical { nu });
        }
        let n = (0.5 * (nu - 1.0)).max(0.0);
        s += mode_entropy(n);
    }
    Ok(s)
}

/// `(N+1) ln(N+1) - N ln N` with `0 ln 0 = 0`.
pub fn mode_entropy(n: f64) -> f64 {
    let tail = if n > 0.0 { n * n.ln() } else { 0.0 };
    (n + 1.0) * (n + 1.0).ln() - tail
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn cov(g: Matrix4<f64>) -> CovarianceMatrix {
        CovarianceMatrix::new(g).unwrap()
    }

    /// Pure state s=1, d=6 for m=2 (mass does not enter the wavefunction).
    fn pure_state() -> CovarianceMatrix {
        let (s, d) = (1.0_f64, 6.0_f64);
        let xx = 2.0 * (d * d + s * s / 4.0);
        let x12 = 2.0 * (d * d - s * s / 4.0);
        let pp = 2.0 * (1.0 / (16.0 * d * d) + 1.0 / (4.0 * s * s));
        let p12 = 2.0 * (1.0 / (16.0 * d * d) - 1.0 / (4.0 * s * s));
        cov(Matrix4::new(
            xx, 0.0, x12, 0.0,
            0.0, pp, 0.0, p12,
            x12, 0.0, xx, 0.0,
            0.0, p12, 0.0, pp,
        ))
    }

    #[test]
    fn rejects_asymmetric_or_nonpositive() {
        let mut g = Matrix4::identity();
        g[(0, 1)] = 0.1;
        assert!(CovarianceMatrix::new(g).is_err());
        let mut g = Matrix4::identity();
        g[(2, 2)] = 0.0;
        assert!(CovarianceMatrix::new(g).is_err());
    }

    #[test]
    fn partial_transpose_basics() {
        let id = cov(Matrix4::identity());
        assert_eq!(partial_transpose(&id), id);
        let g = pure_state();
        let mut h = *g.matrix();
        h[(0, 3)] = 0.3;
        h[(3, 0)] = 0.3;
        h[(1, 2)] = -0.2;
        h[(2, 1)] = -0.2;
        let h = cov(h);
        let pt = partial_transpose(&h);
        assert_eq!(pt[(0, 3)], h[(0, 3)]);
        assert_eq!(pt[(1, 2)], -h[(1, 2)]);
        assert_eq!(pt[(1, 1)], h[(1, 1)]);
        assert_eq!(partial_transpose(&pt), h);
    }

    #[test]
    fn spectrum_of_simple_states() {
        let s = symplectic_spectrum(&cov(Matrix4::identity())).unwrap();
        assert_relative_eq!(s.nu[0], 1.0, max_relative = 1e-12);
        assert_relative_eq!(s.nu[1], 1.0, max_relative = 1e-12);
        let s = symplectic_spectrum(&cov(Matrix4::identity() * 3.0)).unwrap();
        assert_relative_eq!(s.nu[0], 3.0, max_relative = 1e-12);
        assert_relative_eq!(s.nu[1], 3.0, max_relative = 1e-12);
        assert!(s.paired);
    }

    #[test]
    fn vacuum_has_no_negativity() {
        assert_eq!(log_negativity(&cov(Matrix4::identity())).unwrap(), 0.0);
    }

    /// Reference value from a direct eigensolve of iσG^{T1} (eigenvalues ±ν~)
    /// done outside this crate: ν~ = {1/12, 12}.
    #[test]
    fn pure_state_negativity_matches_direct_eigensolve() {
        let g = pure_state();
        let spec = symplectic_spectrum(&partial_transpose(&g)).unwrap();
        assert_relative_eq!(spec.nu[1], 1.0 / 12.0, max_relative = 1e-10);
        assert_relative_eq!(spec.nu[0], 12.0, max_relative = 1e-10);
        assert_relative_eq!(log_negativity(&g).unwrap(), 7.169_925_001_442_322, max_relative = 1e-10);
    }

    #[test]
    fn pure_state_entropy_is_zero() {
        assert!(von_neumann_entropy(&pure_state()).unwrap().abs() < 1e-9);
    }

    #[test]
    fn entropy_of_thermal_mode() {
        assert_relative_eq!(mode_entropy(1.0), 2.0 * 2f64.ln(), max_relative = 1e-15);
        assert_eq!(mode_entropy(0.0), 0.0);
        let g = cov(Matrix4::from_diagonal(&nalgebra::Vector4::new(3.0, 3.0, 1.0, 1.0)));
        assert_relative_eq!(von_neumann_entropy(&g).unwrap(), 1.386_294_361_119_890_6, max_relative = 1e-12);
    }

    #[test]
    fn entropy_reports_nonphysical_states() {
        let g = cov(Matrix4::identity() * 0.5);
        assert!(matches!(von_neumann_entropy(&g), Err(Error::NonPhysical { .. })));
    }

    #[test]
    fn swap_modes_is_involution() {
        let g = pure_state();
        assert_eq!(g.swap_modes().swap_modes(), g);
    }

    #[test]
    fn ill_conditioned_spectrum_keeps_precision() {
        // Reference values from a 60-digit evaluation of the same matrices.
        #[rustfmt::skip]
        let g = cov(Matrix4::new(
            1.2232594793498615, 54.38203859994118, 0.7438214321310095, 53.12976360957575,
            54.38203859994118, 3787.0858094019823, 83.83605496721648, 3816.4262119495293,
            0.7438214321310095, 83.83605496721648, 2.3544068371120344, 86.35028237865403,
            53.12976360957575, 3816.4262119495293, 86.35028237865403, 3855.3597821242693,
        ));
        #[rustfmt::skip]
        let s = Matrix4::new(
            0.7528609499689844, -0.4307862421059003, 0.2841059223065774, 0.9464152045480753,
            -1.2710493433975745, 1.159336547580431, -0.5717631053883506, 0.47026847664553295,
            -1.1167602372323586, 1.201565212551286, 0.26097599949671074, -0.6213701075337266,
            -1.3004889073418544, 0.7950595348407082, 0.24181638524347346, 0.6706025512196744,
        );
        for (m, hi, lo) in [
            (g, 7.987846647647599740, 1.091155007947073270),
            (g.transform(&s).unwrap(), 7.987846647647598533, 1.091155007947072753),
        ] {
            let spec = symplectic_spectrum(&m).unwrap();
            assert_relative_eq!(spec.nu[0], hi, max_relative = 1e-10);
            assert_relative_eq!(spec.nu[1], lo, max_relative = 1e-10);
        }
    }
}
