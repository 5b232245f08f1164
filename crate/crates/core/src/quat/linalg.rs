//! Dense quaternion linear algebra routed through the complex embedding.
//!
//! Every rank decision here uses singular values of `ω(A)`; they occur in equal
//! pairs, so a quaternion rank `r` shows up as `2r` large singular values.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::matrix::QMatrix;
use super::omega::{embed, extract_unchecked, vec_pull, ComplexMatrix};
use super::scalar::Quaternion;
use crate::error::{Error, Result};
use crate::tolerance::Tolerance;

/// Full singular value decomposition `M = U diag(s) V*` with `V` square and
/// singular values sorted descending.
pub(crate) struct FullSvd {
    pub u: ComplexMatrix,
    pub s: Vec<f64>,
    pub v: ComplexMatrix,
}

fn to_faer(m: &ComplexMatrix) -> faer::Mat<Complex64> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn from_faer(m: faer::MatRef<'_, Complex64>) -> ComplexMatrix {
    ComplexMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

const RETRIES: u64 = 4;

/// A fixed pseudorandom unitary of order `n`.
fn retry_unitary(n: usize, attempt: u64) -> ComplexMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED_0000 + attempt);
    let z = ComplexMatrix::from_fn(n, n, |_, _| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    nalgebra::QR::new(z).q()
}

/// Runs a faer decomposition on `m`. The exactly paired spectra of embedded
/// matrices occasionally stall its iterations; on failure the decomposition is
/// retried on `Q m` (or `Q* m Q` when `similarity`) for fixed generic unitaries
/// `Q`, which keeps singular values and eigenvalues. Returns the `Q` used.
pub(crate) fn decompose<T, E: std::fmt::Debug>(
    m: &ComplexMatrix,
    similarity: bool,
    f: impl Fn(faer::Mat<Complex64>) -> std::result::Result<T, E>,
) -> (T, Option<ComplexMatrix>) {
    let mut last = match f(to_faer(m)) {
        Ok(t) => return (t, None),
        Err(e) => e,
    };
    for attempt in 0..RETRIES {
        let q = retry_unitary(m.nrows(), attempt);
        let rotated = if similarity { &(q.adjoint() * m) * &q } else { &q * m };
        match f(to_faer(&rotated)) {
            Ok(t) => return (t, Some(q)),
            Err(e) => last = e,
        }
    }
    panic!("dense decomposition failed to converge after {RETRIES} retries: {last:?}")
}

pub(crate) fn full_svd(m: &ComplexMatrix) -> FullSvd {
    let (r, c) = m.shape();
    if r == 0 || c == 0 {
        return FullSvd { u: ComplexMatrix::identity(r, r), s: Vec::new(), v: ComplexMatrix::identity(c, c) };
    }
    let ((u, s, v), q) = decompose(m, false, |a| {
        a.svd().map(|svd| {
            let s: Vec<f64> = (0..r.min(c)).map(|i| svd.S()[i].re).collect();
            (from_faer(svd.U()), s, from_faer(svd.V()))
        })
    });
    // Q M = U S V* gives M = (Q* U) S V*
    let u = match q {
        Some(q) => q.adjoint() * u,
        None => u,
    };
    FullSvd { u, s, v }
}

pub fn singular_values(m: &ComplexMatrix) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    decompose(m, false, |a| a.singular_values()).0
}

/// Operator 2-norm of a quaternion matrix.
pub fn spectral_norm(a: &QMatrix) -> f64 {
    if a.rows() == 0 || a.cols() == 0 {
        return 0.0;
    }
    singular_values(&embed(a)).first().copied().unwrap_or(0.0)
}

/// Smallest singular value over largest, `0` for empty or zero matrices.
pub fn inverse_condition(a: &QMatrix) -> f64 {
    let s = singular_values(&embed(a));
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if hi > 0.0 => lo / hi,
        _ => 0.0,
    }
}

/// Inverse of a square quaternion matrix.
pub fn inverse(a: &QMatrix, tol: &Tolerance) -> Result<QMatrix> {
    if !a.is_square() {
        return Err(Error::NotSquare { rows: a.rows(), cols: a.cols() });
    }
    if a.rows() == 0 {
        return Ok(QMatrix::zeros(0, 0));
    }
    let ratio = inverse_condition(a);
    if ratio <= tol.rank_tol {
        return Err(Error::SingularForm { ratio });
    }
    let inv = embed(a).try_inverse().ok_or(Error::SingularForm { ratio })?;
    Ok(extract_unchecked(&inv))
}

/// Moore-Penrose pseudo-inverse with singular values below `rank_tol·σ_max` dropped.
pub fn pinv(a: &QMatrix, tol: &Tolerance) -> QMatrix {
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return QMatrix::zeros(n, m);
    }
    let w = embed(a);
    let svd = full_svd(&w);
    let smax = svd.s.first().copied().unwrap_or(0.0);
    let mut out = ComplexMatrix::zeros(2 * n, 2 * m);
    for (idx, &s) in svd.s.iter().enumerate() {
        if s <= tol.rank_tol * smax || s == 0.0 || idx >= svd.u.ncols() {
            continue;
        }
        let v = svd.v.column(idx);
        let u = svd.u.column(idx);
        out += (v * u.adjoint()) * Complex64::new(1.0 / s, 0.0);
    }
    extract_unchecked(&out)
}

/// Minimum-norm least-squares solution of `A x = b`.
pub fn solve_min_norm(a: &QMatrix, b: &QMatrix, tol: &Tolerance) -> QMatrix {
    &pinv(a, tol) * b
}

/// Solves `A X = B` for square invertible `A`.
pub fn solve(a: &QMatrix, b: &QMatrix, tol: &Tolerance) -> Result<QMatrix> {
    Ok(&inverse(a, tol)? * b)
}

/// Quaternion Gram-Schmidt with column pivoting: selects up to `max_count`
/// orthonormal vectors spanning (approximately) the columns of `cols`,
/// stopping when the largest remaining residual drops below `drop_tol`.
pub fn orthonormal_span(cols: &QMatrix, max_count: usize, drop_tol: f64) -> QMatrix {
    let n = cols.rows();
    let mut remaining: Vec<QMatrix> = cols.columns();
    let mut basis: Vec<QMatrix> = Vec::new();
    while basis.len() < max_count && !remaining.is_empty() {
        let (best, norm) = remaining
            .iter()
            .enumerate()
            .map(|(i, v)| (i, v.frobenius_norm()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("non-empty");
        if norm <= drop_tol {
            break;
        }
        let mut q = remaining.swap_remove(best).scale(1.0 / norm);
        // second pass against accumulated error
        for b in &basis {
            let c = QMatrix::dot(b, &q);
            q = &q - &b.mul_scalar_right(c);
        }
        let nq = q.frobenius_norm();
        q = q.scale(1.0 / nq);
        for v in remaining.iter_mut() {
            let c = QMatrix::dot(&q, v);
            *v = &*v - &q.mul_scalar_right(c);
        }
        basis.push(q);
    }
    QMatrix::from_columns(n, &basis)
}

/// Kernel, image and rank of a quaternion matrix.
#[derive(Debug, Clone)]
pub struct Subspaces {
    /// Orthonormal basis of `Ker A` (columns).
    pub kernel: QMatrix,
    /// Orthonormal basis of `Im A` (columns).
    pub image: QMatrix,
    pub rank: usize,
}

/// Quaternion rank: half the number of singular values of `ω(A)` above `rank_tol·σ_max`.
pub fn rank(a: &QMatrix, tol: &Tolerance) -> usize {
    rank_at_scale(a, 0.0, tol)
}

/// Rank with singular values measured against `max(σ_max, scale)`. A matrix
/// that is pure roundoff of something of size `scale` then has rank zero.
pub fn rank_at_scale(a: &QMatrix, scale: f64, tol: &Tolerance) -> usize {
    let s = singular_values(&embed(a));
    let reference = s.first().copied().unwrap_or(0.0).max(scale);
    if reference == 0.0 {
        return 0;
    }
    let big = s.iter().filter(|&&x| x > tol.rank_tol * reference).count();
    big.div_ceil(2)
}

/// Bases of `Ker A` and `Im A`; `dim Ker A + rank A = cols`.
pub fn subspace_extract(a: &QMatrix, tol: &Tolerance) -> Subspaces {
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return Subspaces { kernel: QMatrix::identity(n), image: QMatrix::zeros(m, 0), rank: 0 };
    }
    let w = embed(a);
    let svd = full_svd(&w);
    let smax = svd.s.first().copied().unwrap_or(0.0);
    let big = if smax == 0.0 { 0 } else { svd.s.iter().filter(|&&x| x > tol.rank_tol * smax).count() };
    let r = big.div_ceil(2);
    let null_dim = n - r;
    let kernel_vecs = ComplexMatrix::from_fn(2 * n, 2 * n - 2 * r, |i, j| svd.v[(i, 2 * r + j)]);
    let kernel = orthonormal_span(&vec_pull(&kernel_vecs), null_dim, 1e-6);
    let image_vecs = ComplexMatrix::from_fn(2 * m, 2 * r, |i, j| svd.u[(i, j)]);
    let image = orthonormal_span(&vec_pull(&image_vecs), r, 1e-6);
    Subspaces { kernel, image, rank: r }
}

pub fn kernel_basis(a: &QMatrix, tol: &Tolerance) -> QMatrix {
    subspace_extract(a, tol).kernel
}

pub fn image_basis(a: &QMatrix, tol: &Tolerance) -> QMatrix {
    subspace_extract(a, tol).image
}

/// The `dim`-dimensional subspace on which `A` is smallest: spanned by the
/// right singular vectors of the `2·dim` smallest singular values of `ω(A)`.
/// Returns the basis and the ratio `σ_{small} / σ_{next}` measuring the gap.
pub fn smallest_subspace(a: &QMatrix, dim: usize) -> (QMatrix, f64) {
    let n = a.cols();
    let svd = full_svd(&embed(a));
    let total = svd.s.len();
    let start = 2 * n - 2 * dim;
    let vecs = ComplexMatrix::from_fn(2 * n, 2 * dim, |i, j| svd.v[(i, start + j)]);
    let basis = orthonormal_span(&vec_pull(&vecs), dim, 1e-6);
    let gap = if dim == 0 || start == 0 || total < 2 * n {
        0.0
    } else {
        let inside = svd.s[start];
        let outside = svd.s[start - 1];
        if outside == 0.0 {
            1.0
        } else {
            inside / outside
        }
    };
    (basis, gap)
}

/// Spectral decomposition of a Hermitian quaternion matrix: eigenvalues (real,
/// ascending) and an orthonormal quaternion eigenbasis `Q` with `Q* H Q = diag`.
pub fn hermitian_eigh(h: &QMatrix) -> (Vec<f64>, QMatrix) {
    let n = h.rows();
    if n == 0 {
        return (Vec::new(), QMatrix::zeros(0, 0));
    }
    let ((eigenvalues, eigenvectors), q) = decompose(&embed(&h.hermitian_part()), true, |w| {
        w.self_adjoint_eigen(faer::Side::Lower)
            .map(|eig| ((0..2 * n).map(|i| eig.S()[i].re).collect::<Vec<f64>>(), from_faer(eig.U())))
    });
    let eigenvectors = match q {
        Some(q) => q * eigenvectors,
        None => eigenvectors,
    };
    let mut order: Vec<usize> = (0..2 * n).collect();
    order.sort_by(|&a, &b| eigenvalues[a].total_cmp(&eigenvalues[b]));
    let scale = eigenvalues.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    let mut values = Vec::with_capacity(n);
    let mut vectors: Vec<QMatrix> = Vec::with_capacity(n);
    let mut start = 0;
    while start < 2 * n {
        let mut end = start + 1;
        while end < 2 * n
            && (eigenvalues[order[end]] - eigenvalues[order[end - 1]]).abs() <= 1e-9 * scale
        {
            end += 1;
        }
        let group = ComplexMatrix::from_fn(2 * n, end - start, |i, j| eigenvectors[(i, order[start + j])]);
        let mut cand = vec_pull(&group);
        // project out what is already selected
        for b in &vectors {
            for c in 0..cand.cols() {
                let col = cand.column(c);
                let coef = QMatrix::dot(b, &col);
                let fixed = &col - &b.mul_scalar_right(coef);
                cand.set_submatrix(0, c, &fixed);
            }
        }
        let want = ((end - start) / 2).max(1).min(n - vectors.len());
        let picked = orthonormal_span(&cand, want, 1e-8);
        for c in 0..picked.cols() {
            let v = picked.column(c);
            let rq = QMatrix::dot(&v, &(h * &v)).re;
            values.push(rq);
            vectors.push(v);
        }
        start = end;
    }
    // groups that were merged across a pair boundary can leave us short; fill
    // from the orthogonal complement
    if vectors.len() < n {
        let current = QMatrix::from_columns(n, &vectors);
        let comp = kernel_basis(&current.conj_transpose(), &Tolerance::default());
        for c in 0..comp.cols().min(n - vectors.len()) {
            let v = comp.column(c);
            values.push(QMatrix::dot(&v, &(h * &v)).re);
            vectors.push(v);
        }
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let vals = idx.iter().map(|&i| values[i]).collect();
    let q = QMatrix::from_columns(n, &idx.iter().map(|&i| vectors[i].clone()).collect::<Vec<_>>());
    (vals, q)
}

/// Intersection of the column spans of `a` and `b` (orthonormal basis).
pub fn intersect(a: &QMatrix, b: &QMatrix, tol: &Tolerance) -> QMatrix {
    let n = a.rows();
    if a.cols() == 0 || b.cols() == 0 {
        return QMatrix::zeros(n, 0);
    }
    let stacked = a.hstack(&b.scale(-1.0));
    let ker = kernel_basis(&stacked, tol);
    let part = ker.submatrix(0, 0, a.cols(), ker.cols());
    let vecs = a * &part;
    orthonormal_span(&vecs, ker.cols(), 1e-8)
}

/// Relative distance of `v` (columns) from the span of the orthonormal columns of `basis`.
pub fn distance_from_span(basis: &QMatrix, v: &QMatrix) -> f64 {
    let proj = basis * &(&basis.conj_transpose() * v);
    let denom = v.frobenius_norm().max(f64::MIN_POSITIVE);
    (v - &proj).frobenius_norm() / denom
}

/// Whether two orthonormal bases span the same subspace.
pub fn same_span(a: &QMatrix, b: &QMatrix, threshold: f64) -> bool {
    a.cols() == b.cols()
        && (a.cols() == 0 || (distance_from_span(a, b) <= threshold && distance_from_span(b, a) <= threshold))
}

/// Real part of the quaternion trace divided by the order.
pub fn mean_diagonal(a: &QMatrix) -> Quaternion {
    let n = a.rows().max(1) as f64;
    a.trace() / n
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn svd_of_stalling_matrix() {
        // a Gaussian draw on which the unrotated SVD iteration does not converge
        let e = [
            [-1.032240739316715, 0.3392700978473084, 0.5369220239855641, -0.03070058077242068],
            [0.27477096909186555, 0.42079812472648925, 0.8633811991289024, -0.19807011420312368],
            [1.5900389037609963, 0.8530686754757648, -0.08696604629675068, 2.9848570576239006],
            [1.644020478922636, -1.1588472241958592, -1.0895324221177012, -0.9490524231155026],
            [0.41932218249995773, 1.8024017817192424, 0.41652066008517163, -1.6353588542471358],
            [-0.7709666865412941, 0.4755483838619631, 0.6129389727646652, 3.043482736845165],
            [0.5419614078195472, 0.9958820933549143, 0.9303275365251543, -1.371821254022096],
            [-0.10704576667912737, 1.6732660788453653, -2.135218537808302, -0.8196453578218003],
            [0.9695300111478011, 1.1068137159005451, -1.2942685455234448, 0.16112182408808362],
        ];
        let a = QMatrix::from_fn(3, 3, |r, c| {
            let q = e[3 * r + c];
            Quaternion::new(q[0], q[1], q[2], q[3])
        });
        let w = embed(&a);
        let svd = full_svd(&w);
        let s = ComplexMatrix::from_diagonal(&nalgebra::DVector::from_iterator(6, svd.s.iter().map(|&x| Complex64::new(x, 0.0))));
        assert!((&svd.u * s * svd.v.adjoint() - &w).norm() < 1e-12 * w.norm());
        assert!((svd.u.adjoint() * &svd.u - ComplexMatrix::identity(6, 6)).norm() < 1e-12);
        let (vals, _) = hermitian_eigh(&(&a + &a.conj_transpose()));
        assert_eq!(vals.len(), 3);
    }

    #[test]
    fn zero_matrix_has_full_kernel() {
        let s = subspace_extract(&QMatrix::zeros(2, 2), &tol());
        assert_eq!(s.rank, 0);
        assert_eq!(s.kernel.cols(), 2);
        assert_eq!(s.image.cols(), 0);
    }

    #[test]
    fn diagonal_projector() {
        let a = QMatrix::from_real(&[&[1.0, 0.0], &[0.0, 0.0]]);
        let s = subspace_extract(&a, &tol());
        assert_eq!(s.rank, 1);
        assert!(same_span(&s.kernel, &QMatrix::unit(2, 1), 1e-12));
        assert!(same_span(&s.image, &QMatrix::unit(2, 0), 1e-12));
    }

    #[test]
    fn rank_one_row() {
        let a = QMatrix::from_real(&[&[1.0, -1.0], &[0.0, 0.0]]);
        let s = subspace_extract(&a, &tol());
        assert_eq!(s.rank, 1);
        let v = QMatrix::from_real(&[&[1.0], &[1.0]]).scale(1.0 / 2f64.sqrt());
        assert!(same_span(&s.kernel, &v, 1e-12));
    }

    #[test]
    fn quaternion_kernel_is_not_complex() {
        // [1, j] x = 0 has the 1-dimensional solution space spanned by (-j, 1)
        let a = QMatrix::from_rows(vec![vec![Quaternion::ONE, Quaternion::J]]);
        let s = subspace_extract(&a, &tol());
        assert_eq!(s.kernel.cols(), 1);
        assert!((&a * &s.kernel).frobenius_norm() < 1e-14);
    }

    #[test]
    fn inverse_and_pinv() {
        let a = QMatrix::from_rows(vec![
            vec![Quaternion::new(1.0, 2.0, 0.0, 1.0), Quaternion::J],
            vec![Quaternion::K, Quaternion::new(2.0, 0.0, -1.0, 0.0)],
        ]);
        let ai = inverse(&a, &tol()).unwrap();
        assert!((&a * &ai).distance(&QMatrix::identity(2)) < 1e-13);
        assert!(pinv(&a, &tol()).distance(&ai) < 1e-12);
        assert!(matches!(inverse(&QMatrix::zeros(2, 2), &tol()), Err(Error::SingularForm { .. })));
    }

    #[test]
    fn hermitian_diagonalization() {
        let h = QMatrix::from_rows(vec![
            vec![Quaternion::real(2.0), Quaternion::new(0.0, 1.0, 1.0, 0.0), Quaternion::ZERO],
            vec![Quaternion::new(0.0, -1.0, -1.0, 0.0), Quaternion::real(-1.0), Quaternion::K],
            vec![Quaternion::ZERO, -Quaternion::K, Quaternion::real(0.5)],
        ]);
        let (vals, q) = hermitian_eigh(&h);
        assert_eq!(vals.len(), 3);
        let d = &(&q.conj_transpose() * &h) * &q;
        assert!(d.distance(&QMatrix::from_real_diag(&vals)) < 1e-12);
        assert!((&q.conj_transpose() * &q).distance(&QMatrix::identity(3)) < 1e-12);
        let (vals, _) = hermitian_eigh(&QMatrix::identity(3));
        assert_eq!(vals.len(), 3);
    }
}
