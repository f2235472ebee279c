//! Strategies and checks for the Gaussian-state property suite. Shared with
//! the CLI acceptance target.

#![allow(dead_code)]

use nalgebra::{Matrix2, Matrix4};
use ness_core::{
    covariance_at, log_negativity, partial_transpose, symplectic_form, symplectic_spectrum,
    von_neumann_entropy,
    CovarianceMatrix, InitialState, Regime, SystemParams,
};
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

pub fn params() -> impl Strategy<Value = SystemParams> {
    (
        0.5..3.0f64,
        0.5..2.0f64,
        -0.9..0.9f64,
        (0.005..0.5f64, 0.005..0.5f64),
        (0.2..5.0f64, 0.2..5.0f64),
        prop_oneof![Just(Regime::HighTemperature), Just(Regime::WeakCoupling)],
    )
        .prop_map(|(m, omega0, alpha, (g1, g2), (t1, t2), regime)| SystemParams {
            m,
            omega0,
            kappa: alpha * m * omega0 * omega0,
            gamma1: g1,
            gamma2: g2,
            t1,
            t2,
            regime,
        })
}

pub fn initial_state() -> impl Strategy<Value = InitialState> {
    (0.3..10.0f64, 0.3..10.0f64).prop_map(|(s, d)| InitialState { s, d })
}

/// Physical states reached by the dynamics, entangled ones included. Both
/// master equations can leave the physical set far outside their regime of
/// validity; those draws are discarded.
pub fn evolved() -> impl Strategy<Value = (SystemParams, InitialState, f64, CovarianceMatrix)> {
    (params(), initial_state(), 0.0..40.0f64).prop_filter_map("unphysical or rejected draw", |(p, init, t)| {
        let g = covariance_at(&init, &p, t).ok()?;
        let physical = symplectic_spectrum(&g).ok()?.min() >= 1.0 - 1e-6;
        physical.then_some((p, init, t, g))
    })
}

fn single_mode() -> impl Strategy<Value = Matrix2<f64>> {
    (0.0..std::f64::consts::TAU, -1.0..1.0f64, -1.0..1.0f64).prop_map(|(theta, r, shear)| {
        let (s, c) = theta.sin_cos();
        Matrix2::new(c, -s, s, c) * Matrix2::new(r.exp(), 0.0, 0.0, (-r).exp()) * Matrix2::new(1.0, 0.0, shear, 1.0)
    })
}

fn direct_sum(a: &Matrix2<f64>, b: &Matrix2<f64>) -> Matrix4<f64> {
    let mut s = Matrix4::zeros();
    s.fixed_view_mut::<2, 2>(0, 0).copy_from(a);
    s.fixed_view_mut::<2, 2>(2, 2).copy_from(b);
    s
}

pub fn local_symplectic() -> impl Strategy<Value = Matrix4<f64>> {
    (single_mode(), single_mode()).prop_map(|(a, b)| direct_sum(&a, &b))
}

/// Local operations, a beam splitter and a two-mode squeezer.
pub fn global_symplectic() -> impl Strategy<Value = Matrix4<f64>> {
    (local_symplectic(), local_symplectic(), 0.0..std::f64::consts::PI, -0.8..0.8f64).prop_map(
        |(l1, l2, theta, r)| {
            let (s, c) = theta.sin_cos();
            #[rustfmt::skip]
            let splitter = Matrix4::new(
                c, 0.0, s, 0.0,
                0.0, c, 0.0, s,
                -s, 0.0, c, 0.0,
                0.0, -s, 0.0, c,
            );
            let (ch, sh) = (r.cosh(), r.sinh());
            #[rustfmt::skip]
            let squeezer = Matrix4::new(
                ch, 0.0, sh, 0.0,
                0.0, ch, 0.0, -sh,
                sh, 0.0, ch, 0.0,
                0.0, -sh, 0.0, ch,
            );
            l1 * splitter * squeezer * l2
        },
    )
}

pub fn is_symplectic(s: &Matrix4<f64>) -> bool {
    let j = symplectic_form();
    (s * j * s.transpose() - j).amax() < 1e-12 * s.amax() * s.amax()
}

pub fn check_pt_involution(g: &CovarianceMatrix) -> Result<(), TestCaseError> {
    let twice = partial_transpose(&partial_transpose(g));
    prop_assert_eq!(twice.matrix(), g.matrix());
    Ok(())
}

pub fn check_local_invariance(g: &CovarianceMatrix, s: &Matrix4<f64>) -> Result<(), TestCaseError> {
    prop_assert!(is_symplectic(s));
    let before = log_negativity(g).map_err(|e| TestCaseError::fail(e.to_string()))?;
    let after = log_negativity(&g.transform(s).unwrap()).map_err(|e| TestCaseError::fail(e.to_string()))?;
    prop_assert!((before - after).abs() < 1e-8, "L_N {} -> {}", before, after);
    Ok(())
}

/// Largest condition number of `S G S^T` for which double precision still
/// resolves the entropy to 1e-8; the symplectic eigenvalues of any stored
/// `S G S^T` are only determined to about `eps * cond`.
const MAX_TRANSFORMED_CONDITION: f64 = 1e8;

fn condition(g: &Matrix4<f64>) -> f64 {
    let eig = g.symmetric_eigenvalues();
    eig.max() / eig.min()
}

pub fn check_global_invariance(g: &CovarianceMatrix, s: &Matrix4<f64>) -> Result<(), TestCaseError> {
    prop_assert!(is_symplectic(s));
    let transformed = g.transform(s).unwrap();
    prop_assume!(condition(transformed.matrix()) <= MAX_TRANSFORMED_CONDITION);
    let before = von_neumann_entropy(g).map_err(|e| TestCaseError::fail(e.to_string()))?;
    let after = von_neumann_entropy(&transformed).map_err(|e| TestCaseError::fail(e.to_string()))?;
    prop_assert!((before - after).abs() < 1e-8, "S {} -> {}", before, after);
    Ok(())
}

pub fn check_label_swap(p: &SystemParams, init: &InitialState, t: f64, g: &CovarianceMatrix) -> Result<(), TestCaseError> {
    let swapped = covariance_at(init, &p.swapped(), t).map_err(|e| TestCaseError::fail(e.to_string()))?;
    let err = (swapped.matrix() - g.swap_modes().matrix()).amax() / g.matrix().amax();
    prop_assert!(err < 1e-9, "relative deviation {:e}", err);
    Ok(())
}

/// Eigenvalues of `-σGσG`, recomputed here, pair up within 1e-7.
pub fn check_pairing(g: &CovarianceMatrix) -> Result<(), TestCaseError> {
    for m in [*g, partial_transpose(g)] {
        let j = symplectic_form();
        let product = -(j * m.matrix() * j * m.matrix());
        let mut re: Vec<f64> = product.complex_eigenvalues().iter().map(|z| z.re).collect();
        re.sort_by(f64::total_cmp);
        let scale = re[3].abs();
        prop_assert!((re[0] - re[1]).abs() <= 1e-7 * scale, "{:?}", re);
        prop_assert!((re[2] - re[3]).abs() <= 1e-7 * scale, "{:?}", re);
    }
    Ok(())
}

