//! Indefinite inner products `[x, y] = y* H x` on `H^n` and the structural
//! predicates built on them.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quat::linalg::{hermitian_eigh, inverse, kernel_basis, rank, rank_at_scale, spectral_norm};
use crate::quat::{QMatrix, Quaternion};
use crate::tolerance::Tolerance;

/// An invertible Hermitian quaternion matrix together with its inverse and inertia.
#[derive(Debug, Clone, PartialEq)]
pub struct HForm {
    h: QMatrix,
    h_inv: QMatrix,
    signature: (usize, usize),
}

impl HForm {
    /// Validates `H* = H` and invertibility; the supplied `H` is symmetrized.
    pub fn new(h: QMatrix, tol: &Tolerance) -> Result<HForm> {
        if !h.is_square() {
            return Err(Error::NotSquare { rows: h.rows(), cols: h.cols() });
        }
        if !h.is_finite() {
            return Err(Error::DimensionMismatch("H has non-finite entries".into()));
        }
        let residual = h.distance(&h.conj_transpose());
        if residual > tol.residual_tol * h.frobenius_norm().max(1.0) {
            return Err(Error::NotHermitian { residual });
        }
        let h = h.hermitian_part();
        let h_inv = inverse(&h, tol)?.hermitian_part();
        let (vals, _) = hermitian_eigh(&h);
        let plus = vals.iter().filter(|&&v| v > 0.0).count();
        Ok(HForm { h, h_inv, signature: (plus, vals.len() - plus) })
    }

    /// The standard Euclidean form `H = I`.
    pub fn euclidean(n: usize) -> HForm {
        HForm { h: QMatrix::identity(n), h_inv: QMatrix::identity(n), signature: (n, 0) }
    }

    pub fn matrix(&self) -> &QMatrix {
        &self.h
    }

    pub fn inverse(&self) -> &QMatrix {
        &self.h_inv
    }

    /// `(number of positive eigenvalues, number of negative eigenvalues)`.
    pub fn signature(&self) -> (usize, usize) {
        self.signature
    }

    pub fn dim(&self) -> usize {
        self.h.rows()
    }

    /// Gram matrix `G_{ij} = [w_j, w_i]`, i.e. `W* H W`.
    pub fn gram(&self, w: &QMatrix) -> QMatrix {
        &(&w.conj_transpose() * &self.h) * w
    }

    /// `Y* H X` for two blocks of columns.
    pub fn pairing(&self, x: &QMatrix, y: &QMatrix) -> QMatrix {
        &(&y.conj_transpose() * &self.h) * x
    }
}

/// Outcome of a numerical predicate together with the residual that decided it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Check {
    pub holds: bool,
    pub residual: f64,
}

/// `[x, y] = y* H x`.
pub fn inner_product(x: &QMatrix, y: &QMatrix, h: &HForm) -> Result<Quaternion> {
    let n = h.dim();
    if x.shape() != (n, 1) || y.shape() != (n, 1) {
        return Err(Error::DimensionMismatch(format!(
            "vectors of shape {:?} and {:?} against a form of order {n}",
            x.shape(),
            y.shape()
        )));
    }
    Ok(QMatrix::dot(y, &(h.matrix() * x)))
}

/// `X^{[*]} = H₁⁻¹ X* H₂` for `X` mapping the `h1`-space into the `h2`-space.
pub fn h_adjoint(x: &QMatrix, h1: &HForm, h2: &HForm) -> Result<QMatrix> {
    if x.rows() != h2.dim() || x.cols() != h1.dim() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} matrix between spaces of order {} and {}",
            x.rows(),
            x.cols(),
            h1.dim(),
            h2.dim()
        )));
    }
    Ok(&(h1.inverse() * &x.conj_transpose()) * h2.matrix())
}

/// `‖H⁻¹A*H − A‖ ≤ residual_tol·(1 + ‖A‖)`.
pub fn is_h_selfadjoint(a: &QMatrix, h: &HForm, tol: &Tolerance) -> Check {
    if a.shape() != (h.dim(), h.dim()) {
        return Check { holds: false, residual: f64::INFINITY };
    }
    // compare H A with (H A)*, which avoids amplifying by ‖H⁻¹‖
    let ha = h.matrix() * a;
    let residual = ha.distance(&ha.conj_transpose()) / (spectral_norm(h.matrix()).max(f64::MIN_POSITIVE));
    Check { holds: residual <= tol.residual_tol * (1.0 + a.frobenius_norm()), residual }
}

/// `‖U*HU − H‖ ≤ residual_tol·‖H‖`.
pub fn is_h_unitary(u: &QMatrix, h: &HForm, tol: &Tolerance) -> Check {
    if u.shape() != (h.dim(), h.dim()) {
        return Check { holds: false, residual: f64::INFINITY };
    }
    let residual = h.gram(u).distance(h.matrix());
    Check { holds: residual <= tol.residual_tol * h.matrix().frobenius_norm(), residual }
}

/// Whether `[U0 x, U0 y]₂ = [x, y]₁` on the span of the columns of `v`.
/// `u0_images` holds `U0 v_i` column by column.
pub fn is_isometry_on(v: &QMatrix, u0_images: &QMatrix, h1: &HForm, h2: &HForm, tol: &Tolerance) -> Check {
    if v.rows() != h1.dim() || u0_images.rows() != h2.dim() || v.cols() != u0_images.cols() {
        return Check { holds: false, residual: f64::INFINITY };
    }
    let g1 = h1.gram(v);
    let g2 = h2.gram(u0_images);
    let residual = g1.distance(&g2);
    let scale = g1.frobenius_norm().max(g2.frobenius_norm()).max(1.0);
    Check { holds: residual <= tol.residual_tol * scale, residual }
}

/// Basis of `W^{[⊥]} = {x : [x, w] = 0 for all w ∈ W}`, i.e. `Ker (W* H)`.
pub fn orthogonal_companion(w: &QMatrix, h: &HForm, tol: &Tolerance) -> QMatrix {
    if w.cols() == 0 {
        return QMatrix::identity(h.dim());
    }
    kernel_basis(&(&w.conj_transpose() * h.matrix()), tol)
}

/// Whether the Gramian of the columns of `w` is invertible.
pub fn is_nondegenerate(w: &QMatrix, h: &HForm, tol: &Tolerance) -> bool {
    let d = w.cols();
    if d == 0 {
        return true;
    }
    let g = h.gram(w);
    let scale = spectral_norm(h.matrix()) * spectral_norm(w).powi(2);
    rank_at_scale(&g, scale, tol) == d && rank(w, tol) == d
}

/// The sip matrix `Q_k` with ones on the anti-diagonal.
pub fn sip(k: usize) -> QMatrix {
    QMatrix::from_fn(k, k, |r, c| if r + c + 1 == k { Quaternion::ONE } else { Quaternion::ZERO })
}

/// Upper Jordan block `J_k(λ)` with `Im λ ≥ 0`.
pub fn jordan_block(lambda: Complex64, k: usize) -> Result<QMatrix> {
    if lambda.im < 0.0 {
        return Err(Error::InvalidBlock(format!("eigenvalue {lambda} lies in the lower half-plane")));
    }
    Ok(jordan_block_any(lambda, k))
}

/// `J_k(λ)` without the half-plane convention; used for the conjugate partner of a pair.
pub(crate) fn jordan_block_any(lambda: Complex64, k: usize) -> QMatrix {
    let l = Quaternion::from_complex(lambda);
    QMatrix::from_fn(k, k, |r, c| {
        if r == c {
            l
        } else if c == r + 1 {
            Quaternion::ONE
        } else {
            Quaternion::ZERO
        }
    })
}
