use nalgebra::Matrix4;
use num_complex::Complex64;

use super::basis::PropagatorBasis;

type C = Complex64;

/// Entries of `Q exp(D t / 2m) Q^-1`, named after the component of `v(t)`
/// they produce: `zeta` for `z1`, `xi` for `z2`, `tau` for `q1`, `vartheta`
/// for `q2`. The `_z[j]` / `_q[j]` suffix selects the initial component
/// `z_{j+1,0}` / `q_{j+1,0}` being multiplied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowCoefficients {
    pub zeta_z: [C; 2],
    pub zeta_q: [C; 2],
    pub xi_z: [C; 2],
    pub xi_q: [C; 2],
    pub tau_z: [C; 2],
    pub tau_q: [C; 2],
    pub vartheta_z: [C; 2],
    pub vartheta_q: [C; 2],
}

impl FlowCoefficients {
    pub fn as_matrix(&self) -> Matrix4<C> {
        let rows = [
            (self.zeta_z, self.zeta_q),
            (self.xi_z, self.xi_q),
            (self.tau_z, self.tau_q),
            (self.vartheta_z, self.vartheta_q),
        ];
        Matrix4::from_fn(|r, c| {
            let (z, q) = rows[r];
            if c < 2 {
                z[c]
            } else {
                q[c - 2]
            }
        })
    }

    /// Row of the flow producing output component `row` (0..4 = z1, z2, q1, q2),
    /// as coefficients of `(z1, z2, q1, q2)`.
    pub fn row(&self, row: usize) -> [C; 4] {
        let (z, q) = match row {
            0 => (self.zeta_z, self.zeta_q),
            1 => (self.xi_z, self.xi_q),
            2 => (self.tau_z, self.tau_q),
            3 => (self.vartheta_z, self.vartheta_q),
            _ => panic!("flow row index {row} out of range"),
        };
        [z[0], z[1], q[0], q[1]]
    }
}

/// `Σ_i Q[row][i] e^{λ_i t/2m} Q^-1[i][col]`, e.g. for `row = 0, col = 0`:
/// `ζ_1^z = a_1 ã_1 e^{λ_1 t/2m} + a_2 b̃_1 e^{λ_2 t/2m} + a_3 c̃_1 e^{λ_3 t/2m} + a_4 f̃_1 e^{λ_4 t/2m}`.
fn flow_entry(basis: &PropagatorBasis, growth: &[C; 4], row: usize, col: usize) -> C {
    (0..4)
        .map(|i| basis.q[(row, i)] * basis.qinv[(i, col)] * growth[i])
        .sum()
}

pub fn flow_coefficients(basis: &PropagatorBasis, m: f64, t: f64) -> FlowCoefficients {
    let growth: [C; 4] = std::array::from_fn(|i| (basis.lambda[i] * (t / (2.0 * m))).exp());
    let pair = |row: usize, first_col: usize| {
        [
            flow_entry(basis, &growth, row, first_col),
            flow_entry(basis, &growth, row, first_col + 1),
        ]
    };
    FlowCoefficients {
        zeta_z: pair(0, 0),
        zeta_q: pair(0, 2),
        xi_z: pair(1, 0),
        xi_q: pair(1, 2),
        tau_z: pair(2, 0),
        tau_q: pair(2, 2),
        vartheta_z: pair(3, 0),
        vartheta_q: pair(3, 2),
    }
}
