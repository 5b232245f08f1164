//! Isometries between subspaces: factoring `Y = U₀X` through an injective
//! isometry, extending isometries to the whole space, and the parametrization
//! of all extensions by `(P₁, P₂, P₃)`.

use crate::canonical::with_real_pivot;
use crate::error::{Error, Result};
use crate::indefinite::{h_adjoint, orthogonal_companion, HForm};
use crate::quat::linalg::{
    distance_from_span, hermitian_eigh, image_basis, inverse, kernel_basis, pinv, rank, spectral_norm,
};
use crate::quat::QMatrix;
use crate::tolerance::Tolerance;

/// Inertia of the form restricted to a subspace.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GramProfile {
    pub m0: usize,
    pub m_plus: usize,
    pub m_minus: usize,
    pub m: usize,
}

/// A linear map given on a basis: `domain` column `i` is sent to `images` column `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceMap {
    pub domain: QMatrix,
    pub images: QMatrix,
}

impl SubspaceMap {
    pub fn new(domain: QMatrix, images: QMatrix) -> Result<SubspaceMap> {
        if domain.cols() != images.cols() {
            return Err(Error::DimensionMismatch(format!(
                "{} domain vectors but {} images",
                domain.cols(),
                images.cols()
            )));
        }
        Ok(SubspaceMap { domain, images })
    }

    /// The identity on the span of `basis`.
    pub fn identity_on(basis: QMatrix) -> SubspaceMap {
        SubspaceMap { images: basis.clone(), domain: basis }
    }

    pub fn dim(&self) -> usize {
        self.domain.cols()
    }

    /// Applies the map to vectors lying in the span of the domain.
    pub fn apply(&self, v: &QMatrix, tol: &Tolerance) -> QMatrix {
        &self.images * &(&pinv(&self.domain, tol) * v)
    }
}

/// The bases `E` (domain side) and `F = UE` (image side) in which every
/// extension has the block form, and their common Gramian.
#[derive(Debug, Clone, PartialEq)]
pub struct WittBasis {
    /// `e₁…e_m, ẽ₁…ẽ_{m₀}, completion`.
    pub e: QMatrix,
    /// `f₁…f_m, f̃₁…f̃_{m₀}, completion`.
    pub f: QMatrix,
    pub gramian: QMatrix,
    pub profile: GramProfile,
    /// Diagonal of `J₂`, the Gramian of the completion vectors.
    pub j2: Vec<f64>,
}

impl WittBasis {
    /// `n − m − m₀`.
    pub fn free_dim(&self) -> usize {
        self.j2.len()
    }

    pub fn j2_matrix(&self) -> QMatrix {
        QMatrix::from_real_diag(&self.j2)
    }
}

/// `P₁` is `J₂`-unitary, `P₃` skew-Hermitian, `P₂` arbitrary.
#[derive(Debug, Clone, PartialEq)]
pub struct WittParams {
    pub p1: QMatrix,
    pub p2: QMatrix,
    pub p3: QMatrix,
}

impl WittParams {
    /// `P₁ = I`, `P₂ = 0`, `P₃ = 0`: the extension built directly from the bases.
    pub fn trivial(basis: &WittBasis) -> WittParams {
        let k = basis.free_dim();
        let m0 = basis.profile.m0;
        WittParams { p1: QMatrix::identity(k), p2: QMatrix::zeros(k, m0), p3: QMatrix::zeros(m0, m0) }
    }

    pub fn validate(&self, basis: &WittBasis, tol: &Tolerance) -> Result<()> {
        let k = basis.free_dim();
        let m0 = basis.profile.m0;
        if self.p1.shape() != (k, k) || self.p2.shape() != (k, m0) || self.p3.shape() != (m0, m0) {
            return Err(Error::InvalidParams(format!(
                "expected P1 {k}x{k}, P2 {k}x{m0}, P3 {m0}x{m0}; got {:?}, {:?}, {:?}",
                self.p1.shape(),
                self.p2.shape(),
                self.p3.shape()
            )));
        }
        let j2 = basis.j2_matrix();
        let r1 = (&(&self.p1.conj_transpose() * &j2) * &self.p1).distance(&j2);
        if r1 > tol.residual_tol * (1.0 + self.p1.frobenius_norm().powi(2)) {
            return Err(Error::InvalidParams(format!("P1 is not J2-unitary (residual {r1:.3e})")));
        }
        let r3 = self.p3.distance(&self.p3.conj_transpose().scale(-1.0));
        if r3 > tol.residual_tol * (1.0 + self.p3.frobenius_norm()) {
            return Err(Error::InvalidParams(format!("P3 is not skew-Hermitian (residual {r3:.3e})")));
        }
        Ok(())
    }
}

fn form_scale(h: &HForm, v: &QMatrix) -> f64 {
    spectral_norm(h.matrix()) * spectral_norm(v).powi(2)
}

/// Change of basis `C` such that the Gramian of `V C` is `diag(0, I, −I)`, with
/// the isotropic directions first.
fn profile_transform(v: &QMatrix, h: &HForm, tol: &Tolerance) -> (GramProfile, QMatrix) {
    let m = v.cols();
    if m == 0 {
        return (GramProfile { m0: 0, m_plus: 0, m_minus: 0, m: 0 }, QMatrix::zeros(0, 0));
    }
    let (vals, vecs) = hermitian_eigh(&h.gram(v).hermitian_part());
    let thresh = tol.residual_tol * form_scale(h, v).max(f64::MIN_POSITIVE);
    let zero: Vec<usize> = (0..m).filter(|&i| vals[i].abs() <= thresh).collect();
    // eigenvalues ascend: positives taken from the top, negatives from the bottom
    let plus: Vec<usize> = (0..m).rev().filter(|&i| vals[i] > thresh).collect();
    let minus: Vec<usize> = (0..m).filter(|&i| vals[i] < -thresh).collect();
    let mut cols = Vec::with_capacity(m);
    // a unit phase per column keeps the Gramian and makes the basis deterministic
    for &i in &zero {
        cols.push(with_real_pivot(&vecs.column(i)));
    }
    for &i in plus.iter().chain(&minus) {
        cols.push(with_real_pivot(&vecs.column(i)).scale(1.0 / vals[i].abs().sqrt()));
    }
    let profile = GramProfile { m0: zero.len(), m_plus: plus.len(), m_minus: minus.len(), m };
    (profile, QMatrix::from_columns(m, &cols))
}

/// Counts of isotropic, positive and negative directions of `V` and a basis of
/// `V` whose Gramian is `diag(0_{m₀}, I_{m₊}, −I_{m₋})`.
pub fn gram_profile(v: &QMatrix, h: &HForm, tol: &Tolerance) -> (GramProfile, QMatrix) {
    let (profile, c) = profile_transform(v, h, tol);
    (profile, v * &c)
}

/// Dual vectors of the isotropic part and a ±1-orthonormal completion.
/// Returns `(ẽ, completion, completion signs)`.
fn dual_and_completion(e: &QMatrix, m0: usize, h: &HForm, tol: &Tolerance) -> (QMatrix, QMatrix, Vec<f64>) {
    let n = h.dim();
    let m = e.cols();
    // [ẽ_j, e_i] = e_i* H ẽ_j = δ_ij, minimum-norm solution
    let mut rhs = QMatrix::zeros(m, m0);
    for k in 0..m0 {
        rhs[(k, k)] = crate::quat::Quaternion::ONE;
    }
    let mut t = &pinv(&(&e.conj_transpose() * h.matrix()), tol) * &rhs;
    if m0 > 0 {
        // ẽ ← ẽ − ½ e₀ [ẽ, ẽ] makes the duals mutually isotropic
        let g = h.gram(&t).hermitian_part();
        let e0 = e.column_range(0, m0);
        t = &t - &(&e0 * &g).scale(0.5);
    }
    let w = e.hstack(&t);
    let comp = orthogonal_companion(&w, h, tol);
    let k = n - m - m0;
    if comp.cols() != k || k == 0 {
        return (t, QMatrix::zeros(n, 0), Vec::new());
    }
    let (vals, vecs) = hermitian_eigh(&h.gram(&comp).hermitian_part());
    let mut cols = Vec::with_capacity(k);
    let mut signs = Vec::with_capacity(k);
    for i in (0..k).rev().filter(|&i| vals[i] > 0.0).chain((0..k).filter(|&i| vals[i] <= 0.0)) {
        cols.push(&comp * &vecs.column(i).scale(1.0 / vals[i].abs().max(f64::MIN_POSITIVE).sqrt()));
        signs.push(vals[i].signum());
    }
    (t, QMatrix::from_columns(n, &cols), signs)
}

/// The block Gramian `[[0,0,I,0],[0,J₁,0,0],[I,0,0,0],[0,0,0,J₂]]`.
fn block_gramian(profile: &GramProfile, j2: &[f64]) -> QMatrix {
    let m0 = profile.m0;
    let m = profile.m;
    let n = m + m0 + j2.len();
    let mut g = QMatrix::zeros(n, n);
    for k in 0..m0 {
        g[(k, m + k)] = crate::quat::Quaternion::ONE;
        g[(m + k, k)] = crate::quat::Quaternion::ONE;
    }
    for i in 0..profile.m_plus + profile.m_minus {
        let s = if i < profile.m_plus { 1.0 } else { -1.0 };
        g[(m0 + i, m0 + i)] = crate::quat::Quaternion::real(s);
    }
    for (i, &s) in j2.iter().enumerate() {
        g[(m + m0 + i, m + m0 + i)] = crate::quat::Quaternion::real(s);
    }
    g
}

fn check_forms(u0: &SubspaceMap, h1: &HForm, h2: &HForm, tol: &Tolerance) -> Result<()> {
    let n = h1.dim();
    if h2.dim() != n || u0.domain.rows() != n || u0.images.rows() != n {
        return Err(Error::DimensionMismatch(format!(
            "forms of order {} and {}, vectors of length {} and {}",
            n,
            h2.dim(),
            u0.domain.rows(),
            u0.images.rows()
        )));
    }
    if h1.signature() != h2.signature() {
        return Err(Error::SignatureMismatch { first: h1.signature(), second: h2.signature() });
    }
    let m = u0.dim();
    if rank(&u0.domain, tol) != m || rank(&u0.images, tol) != m {
        return Err(Error::SingularIsometry);
    }
    let g1 = h1.gram(&u0.domain);
    let g2 = h2.gram(&u0.images);
    let residual = g1.distance(&g2);
    let scale = form_scale(h1, &u0.domain).max(form_scale(h2, &u0.images)).max(f64::MIN_POSITIVE);
    if residual > tol.residual_tol * scale {
        return Err(Error::NotIsometry { residual });
    }
    Ok(())
}

/// Builds the bases `E` and `F` for an isometry `U₀ : V₁ → V₂`.
pub fn witt_basis(u0: &SubspaceMap, h1: &HForm, h2: &HForm, tol: &Tolerance) -> Result<WittBasis> {
    check_forms(u0, h1, h2, tol)?;
    let (profile, c) = profile_transform(&u0.domain, h1, tol);
    let e = &u0.domain * &c;
    let f = &u0.images * &c;
    let (et, ec, j2e) = dual_and_completion(&e, profile.m0, h1, tol);
    let (ft, fc, j2f) = dual_and_completion(&f, profile.m0, h2, tol);
    let k = h1.dim() - profile.m - profile.m0;
    if j2e.len() != k || j2f.len() != k {
        return Err(Error::Ambiguity("orthogonal companion has the wrong dimension".into()));
    }
    if j2e != j2f {
        // equal signatures force equal completion inertia
        return Err(Error::SignatureMismatch { first: h1.signature(), second: h2.signature() });
    }
    let basis = WittBasis {
        e: e.hstack(&et).hstack(&ec),
        f: f.hstack(&ft).hstack(&fc),
        gramian: block_gramian(&profile, &j2e),
        profile,
        j2: j2e,
    };
    for (m, h) in [(&basis.e, h1), (&basis.f, h2)] {
        let residual = h.gram(m).distance(&basis.gramian);
        let bound = tol.residual_tol * form_scale(h, m).max(1.0);
        if residual > bound {
            return Err(Error::Certification { what: "Witt basis Gramian", residual, bound });
        }
    }
    Ok(basis)
}

/// The extension matrix in the `E`/`F` bases.
fn block_matrix(basis: &WittBasis, params: &WittParams) -> QMatrix {
    let GramProfile { m0, m, .. } = basis.profile;
    let k = basis.free_dim();
    let n = m + m0 + k;
    let j2 = basis.j2_matrix();
    let p2s = params.p2.conj_transpose();
    let mut u = QMatrix::identity(n);
    let corner = &(&(&p2s * &j2) * &params.p2).scale(-0.5) + &params.p3;
    u.set_submatrix(0, m, &corner);
    u.set_submatrix(0, m + m0, &(&(&p2s * &j2) * &params.p1).scale(-1.0));
    u.set_submatrix(m + m0, m, &params.p2);
    u.set_submatrix(m + m0, m + m0, &params.p1);
    u
}

/// Residual checks every Witt extension must pass.
pub fn certify_extension(u: &QMatrix, u0: &SubspaceMap, h1: &HForm, h2: &HForm, tol: &Tolerance) -> Result<()> {
    let residual = h2.gram(u).distance(h1.matrix());
    let bound = tol.residual_tol * h1.matrix().frobenius_norm();
    if residual > bound {
        return Err(Error::Certification { what: "H1-H2-unitarity", residual, bound });
    }
    let residual = (u * &u0.domain).distance(&u0.images);
    let bound = tol.residual_tol * u0.images.frobenius_norm().max(1.0);
    if residual > bound {
        return Err(Error::Certification { what: "restriction to V1", residual, bound });
    }
    Ok(())
}

/// `Ũ = F M E⁻¹` where `M` is the block form determined by `params`.
pub fn witt_from_params(
    u0: &SubspaceMap,
    basis: &WittBasis,
    params: &WittParams,
    h1: &HForm,
    h2: &HForm,
    tol: &Tolerance,
) -> Result<QMatrix> {
    params.validate(basis, tol)?;
    let e_inv = inverse(&basis.e, tol)?;
    let u = &(&basis.f * &block_matrix(basis, params)) * &e_inv;
    certify_extension(&u, u0, h1, h2, tol)?;
    Ok(u)
}

/// An `H₁`-`H₂`-unitary `U` with `U = U₀` on `V₁`.
pub fn extend_isometry(u0: &SubspaceMap, h1: &HForm, h2: &HForm, tol: &Tolerance) -> Result<QMatrix> {
    let basis = witt_basis(u0, h1, h2, tol)?;
    witt_from_params(u0, &basis, &WittParams::trivial(&basis), h1, h2, tol)
}

/// Writes `Y = U₀X` with `U₀` an injective isometry from `Im X` onto `Im Y`.
/// `X, Y` map the `h1`-space into the `h2`-space.
pub fn factor_isometry(x: &QMatrix, y: &QMatrix, h1: &HForm, h2: &HForm, tol: &Tolerance) -> Result<SubspaceMap> {
    if x.shape() != y.shape() {
        return Err(Error::DimensionMismatch(format!("X is {:?} but Y is {:?}", x.shape(), y.shape())));
    }
    let bx = &h_adjoint(x, h1, h2)? * x;
    let by = &h_adjoint(y, h1, h2)? * y;
    let residual = bx.distance(&by);
    let w = spectral_norm(h1.inverse()) * spectral_norm(h2.matrix());
    let scale = 1.0 + w * (spectral_norm(x).powi(2) + spectral_norm(y).powi(2));
    if residual > tol.residual_tol * scale {
        return Err(Error::GramMismatch { residual });
    }
    let kx = kernel_basis(x, tol);
    let ky = kernel_basis(y, tol);
    let residual = if kx.cols() == ky.cols() {
        distance_from_span(&kx, &ky).max(distance_from_span(&ky, &kx))
    } else {
        f64::INFINITY
    };
    if residual > tol.rank_tol.sqrt() {
        return Err(Error::KernelMismatch { dim_x: kx.cols(), dim_y: ky.cols(), residual });
    }
    // fᵢ spans Im X, eᵢ with X eᵢ = fᵢ, gᵢ = Y eᵢ
    let f = image_basis(x, tol);
    let e = &pinv(x, tol) * &f;
    let g = y * &e;
    Ok(SubspaceMap { domain: f, images: g })
}
