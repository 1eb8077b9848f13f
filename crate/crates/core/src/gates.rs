//! Gate matrices and small dense linear algebra helpers.
//!
//! Multi-qubit matrices index their basis with the first listed qubit as the
//! least-significant bit, matching the register convention of the simulator.

use nalgebra::DMatrix;
use num_complex::Complex64;
use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type Matrix = DMatrix<Complex64>;

/// Row-major 2x2 matrix `[m00, m01, m10, m11]`.
pub type Mat2 = [C64; 4];

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Tolerance used when validating user supplied unitaries.
pub const UNITARY_TOL: f64 = 1e-10;

pub fn h() -> Mat2 {
    let s = C64::new(FRAC_1_SQRT_2, 0.0);
    [s, s, s, -s]
}

pub fn x() -> Mat2 {
    [ZERO, ONE, ONE, ZERO]
}

pub fn y() -> Mat2 {
    [ZERO, -I, I, ZERO]
}

pub fn z() -> Mat2 {
    [ONE, ZERO, ZERO, -ONE]
}

pub fn identity2() -> Mat2 {
    [ONE, ZERO, ZERO, ONE]
}

pub fn phase(theta: f64) -> Mat2 {
    [ONE, ZERO, ZERO, C64::from_polar(1.0, theta)]
}

pub fn rx(theta: f64) -> Mat2 {
    let (s, c) = (theta / 2.0).sin_cos();
    [C64::new(c, 0.0), C64::new(0.0, -s), C64::new(0.0, -s), C64::new(c, 0.0)]
}

pub fn ry(theta: f64) -> Mat2 {
    let (s, c) = (theta / 2.0).sin_cos();
    [C64::new(c, 0.0), C64::new(-s, 0.0), C64::new(s, 0.0), C64::new(c, 0.0)]
}

pub fn rz(theta: f64) -> Mat2 {
    [
        C64::from_polar(1.0, -theta / 2.0),
        ZERO,
        ZERO,
        C64::from_polar(1.0, theta / 2.0),
    ]
}

pub fn mat2_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    [
        a[0] * b[0] + a[1] * b[2],
        a[0] * b[1] + a[1] * b[3],
        a[2] * b[0] + a[3] * b[2],
        a[2] * b[1] + a[3] * b[3],
    ]
}

pub fn mat2_adjoint(a: &Mat2) -> Mat2 {
    [a[0].conj(), a[2].conj(), a[1].conj(), a[3].conj()]
}

pub fn mat2_to_matrix(a: &Mat2) -> Matrix {
    Matrix::from_row_slice(2, 2, a)
}

pub fn matrix_to_mat2(m: &Matrix) -> Mat2 {
    [m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]]
}

/// Largest entry of `|U^dag U - I|`.
pub fn unitary_deviation(m: &Matrix) -> f64 {
    if m.nrows() != m.ncols() {
        return f64::INFINITY;
    }
    let prod = m.adjoint() * m;
    let mut worst = 0.0f64;
    for r in 0..prod.nrows() {
        for c in 0..prod.ncols() {
            let target = if r == c { ONE } else { ZERO };
            worst = worst.max((prod[(r, c)] - target).norm());
        }
    }
    worst
}

pub fn check_unitary(m: &Matrix) -> Result<()> {
    let deviation = unitary_deviation(m);
    if deviation > UNITARY_TOL {
        return Err(Error::NotUnitary { deviation });
    }
    Ok(())
}

/// Kronecker product `a ⊗ b`; `b` occupies the low-order index bits.
pub fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    a.kronecker(b)
}

/// Integer matrix power by repeated squaring.
pub fn matrix_power(m: &Matrix, mut exp: u64) -> Matrix {
    let mut result = Matrix::identity(m.nrows(), m.ncols());
    let mut base = m.clone();
    while exp > 0 {
        if exp & 1 == 1 {
            result = &result * &base;
        }
        exp >>= 1;
        if exp > 0 {
            base = &base * &base;
        }
    }
    result
}

/// Controlled version of `u`: the control is the least-significant bit and the
/// targets follow, so `C(U) = |0><0| ⊗ I + |1><1| ⊗ U` in that basis order.
pub fn controlled(u: &Matrix) -> Matrix {
    let d = u.nrows();
    let mut m = Matrix::zeros(2 * d, 2 * d);
    for r in 0..d {
        m[(2 * r, 2 * r)] = ONE;
        for c in 0..d {
            m[(2 * r + 1, 2 * c + 1)] = u[(r, c)];
        }
    }
    m
}

/// Euler angles with `u = e^{i alpha} Rz(beta) Ry(gamma) Rz(delta)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZyzAngles {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
}

pub fn zyz_decompose(u: &Mat2) -> ZyzAngles {
    let det = u[0] * u[3] - u[1] * u[2];
    let alpha = det.arg() / 2.0;
    // Strip the global phase so the remainder lies in SU(2).
    let phase = C64::from_polar(1.0, -alpha);
    let v: Vec<C64> = u.iter().map(|e| e * phase).collect();
    // v = [[e^{-i(b+d)/2} cos(g/2), -e^{-i(b-d)/2} sin(g/2)],
    //      [e^{ i(b-d)/2} sin(g/2),  e^{ i(b+d)/2} cos(g/2)]]
    let gamma = 2.0 * v[2].norm().atan2(v[0].norm());
    let (beta, delta) = if v[0].norm() < 1e-12 {
        let b_minus_d = 2.0 * v[2].arg();
        (b_minus_d, 0.0)
    } else if v[2].norm() < 1e-12 {
        let b_plus_d = 2.0 * v[3].arg();
        (b_plus_d, 0.0)
    } else {
        let b_plus_d = 2.0 * v[3].arg();
        let b_minus_d = 2.0 * v[2].arg();
        ((b_plus_d + b_minus_d) / 2.0, (b_plus_d - b_minus_d) / 2.0)
    };
    let mut angles = ZyzAngles { alpha, beta, gamma, delta };
    // The half-angle parametrisation is only fixed up to a sign; repair it.
    let rebuilt = zyz_compose(&angles);
    if (rebuilt[0] - u[0]).norm() + (rebuilt[3] - u[3]).norm() + (rebuilt[2] - u[2]).norm() > 1e-8 {
        angles.alpha += std::f64::consts::PI;
    }
    angles
}

pub fn zyz_compose(a: &ZyzAngles) -> Mat2 {
    let m = mat2_mul(&rz(a.beta), &mat2_mul(&ry(a.gamma), &rz(a.delta)));
    let g = C64::from_polar(1.0, a.alpha);
    [m[0] * g, m[1] * g, m[2] * g, m[3] * g]
}

/// Returns `Some(phase)` when `u = e^{i phase} I`.
pub fn global_phase_of_identity(u: &Matrix, tol: f64) -> Option<f64> {
    let p = u[(0, 0)];
    if (p.norm() - 1.0).abs() > tol {
        return None;
    }
    for r in 0..u.nrows() {
        for c in 0..u.ncols() {
            let target = if r == c { p } else { ZERO };
            if (u[(r, c)] - target).norm() > tol {
                return None;
            }
        }
    }
    Some(p.arg())
}

/// Completes a normalized column vector into a unitary whose first column is
/// that vector (Gram–Schmidt against the computational basis).
pub fn unitary_with_first_column(v: &[C64]) -> Matrix {
    let d = v.len();
    let mut cols: Vec<Vec<C64>> = vec![v.to_vec()];
    for k in 0..d {
        if cols.len() == d {
            break;
        }
        let mut e = vec![ZERO; d];
        e[k] = ONE;
        for c in &cols {
            let overlap: C64 = c.iter().zip(&e).map(|(a, b)| a.conj() * b).sum();
            for (ei, ci) in e.iter_mut().zip(c) {
                *ei -= overlap * ci;
            }
        }
        let norm = e.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-8 {
            cols.push(e.into_iter().map(|a| a / norm).collect());
        }
    }
    Matrix::from_fn(d, d, |r, c| cols[c][r])
}
