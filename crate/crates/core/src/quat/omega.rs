//! The complex embedding `ω(A₁ + jA₂) = [[A₁, Ā₂], [−A₂, Ā₁]]` and the matching
//! identification of `H^n` with `C^{2n}`.
//!
//! A quaternion vector `v = v₁ + j v₂` is represented by the first column of
//! its embedding, `φ(v) = [v₁; −v₂]`. With this convention `ω(A)φ(v) = φ(Av)` and
//! `φ(vc) = φ(v)c` for complex `c`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::matrix::QMatrix;
use super::scalar::Quaternion;
use crate::error::{Error, Result};
use crate::tolerance::Tolerance;

pub type ComplexMatrix = DMatrix<Complex64>;

/// `ω` applied to a matrix of any shape (`m x n` maps to `2m x 2n`).
pub fn embed(a: &QMatrix) -> ComplexMatrix {
    let (m, n) = a.shape();
    let mut out = ComplexMatrix::zeros(2 * m, 2 * n);
    for r in 0..m {
        for c in 0..n {
            let (c1, c2) = a[(r, c)].complex_parts();
            out[(r, c)] = c1;
            out[(r, n + c)] = c2.conj();
            out[(m + r, c)] = -c2;
            out[(m + r, n + c)] = c1.conj();
        }
    }
    out
}

/// `ω_n(A)` for a square `n x n` quaternion matrix.
pub fn omega_embed(a: &QMatrix) -> Result<ComplexMatrix> {
    if !a.is_square() {
        return Err(Error::NotSquare { rows: a.rows(), cols: a.cols() });
    }
    Ok(embed(a))
}

/// Reads the quaternion matrix off a `2m x 2n` complex matrix by averaging the
/// two copies of each block. No structure check.
pub fn extract_unchecked(m: &ComplexMatrix) -> QMatrix {
    let (r2, c2) = m.shape();
    let (r, c) = (r2 / 2, c2 / 2);
    QMatrix::from_fn(r, c, |i, j| {
        let a1 = (m[(i, j)] + m[(r + i, c + j)].conj()) * 0.5;
        let a2 = (m[(i, c + j)].conj() - m[(r + i, j)]) * 0.5;
        Quaternion::from_complex_parts(a1, a2)
    })
}

/// Largest entrywise deviation of `m` from the `Ω` block pattern.
pub fn omega_deviation(m: &ComplexMatrix) -> f64 {
    let (r2, c2) = m.shape();
    let (r, c) = (r2 / 2, c2 / 2);
    let mut dev: f64 = 0.0;
    for i in 0..r {
        for j in 0..c {
            dev = dev.max((m[(i, j)] - m[(r + i, c + j)].conj()).norm());
            dev = dev.max((m[(i, c + j)] + m[(r + i, j)].conj()).norm());
        }
    }
    dev
}

/// Inverse of `ω`: recovers `A` from `ω(A)`, rejecting matrices that are not
/// within `residual_tol` (relative to the largest entry) of the block pattern.
pub fn omega_extract(m: &ComplexMatrix, tol: &Tolerance) -> Result<QMatrix> {
    let (r2, c2) = m.shape();
    if r2 % 2 != 0 || c2 % 2 != 0 {
        return Err(Error::DimensionMismatch(format!("{r2}x{c2} is not of even order")));
    }
    let scale = m.iter().map(|z| z.norm()).fold(1.0_f64, f64::max);
    let deviation = omega_deviation(m);
    if deviation > tol.residual_tol * scale {
        return Err(Error::NotOmegaStructured { deviation });
    }
    Ok(extract_unchecked(m))
}

/// `φ` applied column-wise: `n x k` quaternion to `2n x k` complex.
pub fn vec_embed(v: &QMatrix) -> ComplexMatrix {
    let (n, k) = v.shape();
    let mut out = ComplexMatrix::zeros(2 * n, k);
    for r in 0..n {
        for c in 0..k {
            let (c1, c2) = v[(r, c)].complex_parts();
            out[(r, c)] = c1;
            out[(n + r, c)] = -c2;
        }
    }
    out
}

/// Inverse of [`vec_embed`]; every complex `2n`-vector is the image of exactly
/// one quaternion `n`-vector.
pub fn vec_pull(z: &ComplexMatrix) -> QMatrix {
    let (n2, k) = z.shape();
    let n = n2 / 2;
    QMatrix::from_fn(n, k, |r, c| Quaternion::from_complex_parts(z[(r, c)], -z[(n + r, c)]))
}

/// The antilinear map `φ(v) ↦ φ(v·j)`; it commutes with every `ω(A)` and squares to `−1`.
pub fn jmap(z: &ComplexMatrix) -> ComplexMatrix {
    let (n2, k) = z.shape();
    let n = n2 / 2;
    let mut out = ComplexMatrix::zeros(n2, k);
    for c in 0..k {
        for r in 0..n {
            out[(r, c)] = z[(n + r, c)].conj();
            out[(n + r, c)] = -z[(r, c)].conj();
        }
    }
    out
}
