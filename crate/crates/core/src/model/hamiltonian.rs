use num_complex::Complex64;

use super::params::SystemParams;
use super::pulse::PulsePolicy;

pub type Mat3 = [[Complex64; 3]; 3];
pub type Vec3 = [Complex64; 3];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Non-Hermitian Hamiltonian on {|u0>, |g1>, |e0>} for a given drive value.
pub fn hamiltonian_with_drive(params: &SystemParams, omega: Complex64) -> Mat3 {
    let g = Complex64::new(params.g, 0.0);
    [
        [Complex64::new(params.delta_u, 0.0), ZERO, omega],
        [ZERO, Complex64::new(0.0, -params.kappa), g],
        [
            omega.conj(),
            g,
            Complex64::new(params.delta_e, -params.excited_decay()),
        ],
    ]
}

/// H_eff(t) with the pump evaluated at `t`.
pub fn effective_hamiltonian(params: &SystemParams, policy: &PulsePolicy, t: f64) -> Mat3 {
    hamiltonian_with_drive(params, policy.eval(t))
}

pub fn mat_vec(m: &Mat3, v: &Vec3) -> Vec3 {
    [
        m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
        m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
        m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
    ]
}

pub fn mat_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut out = [[ZERO; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
        }
    }
    out
}

pub fn identity() -> Mat3 {
    let one = Complex64::new(1.0, 0.0);
    [[one, ZERO, ZERO], [ZERO, one, ZERO], [ZERO, ZERO, one]]
}
