//! Canonical form of a pair `(A, H)` with `A` H-selfadjoint: an invertible `S`
//! with `S⁻¹AS = J` and `S*HS = Hc`, where real eigenvalues contribute blocks
//! `(J_k(λ), ηQ_k)` and nonreal ones pairs `(J_k(λ) ⊕ J_k(λ̄), Q_2k)`.
//!
//! Chains are built per eigenvalue cluster on the root subspace, which is
//! isolated by shifted inverse subspace iteration on `ω(A)`.

use std::fmt;

use nalgebra::QR;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::indefinite::{is_h_selfadjoint, jordan_block_any, sip, HForm};
use crate::quat::linalg::{full_svd, hermitian_eigh, inverse, orthonormal_span, smallest_subspace, spectral_norm};
use crate::quat::omega::{embed, jmap, vec_pull, ComplexMatrix};
use crate::quat::spectrum::{eigen_clusters, EigenCluster};
use crate::quat::{QMatrix, Quaternion};
use crate::tolerance::Tolerance;

/// Sign characteristic of a real block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sign {
    Minus,
    Plus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn from_value(v: f64) -> Sign {
        if v < 0.0 {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        })
    }
}

/// One Jordan block of the canonical form. Real blocks carry a sign; a
/// nonreal block stands for the pair `J_k(λ) ⊕ J_k(λ̄)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CanonicalBlock {
    pub lambda: Complex64,
    pub size: usize,
    pub sign: Option<Sign>,
}

impl CanonicalBlock {
    pub fn real(lambda: f64, size: usize, sign: Sign) -> CanonicalBlock {
        CanonicalBlock { lambda: Complex64::new(lambda, 0.0), size, sign: Some(sign) }
    }

    pub fn nonreal(lambda: Complex64, size: usize) -> CanonicalBlock {
        CanonicalBlock { lambda, size, sign: None }
    }

    pub fn is_real(&self) -> bool {
        self.sign.is_some()
    }

    /// Quaternion dimension occupied in the assembled form.
    pub fn dim(&self) -> usize {
        if self.is_real() {
            self.size
        } else {
            2 * self.size
        }
    }

    /// Checks the block against the conventions: positive size, a sign exactly
    /// for real eigenvalues, nonreal eigenvalues in the open upper half-plane.
    pub fn validate(&self) -> Result<()> {
        if self.size == 0 {
            return Err(Error::InvalidBlock("block of size 0".into()));
        }
        if !self.lambda.re.is_finite() || !self.lambda.im.is_finite() {
            return Err(Error::InvalidBlock("non-finite eigenvalue".into()));
        }
        match self.sign {
            Some(_) if self.lambda.im != 0.0 => {
                Err(Error::InvalidBlock(format!("signed block with nonreal eigenvalue {}", self.lambda)))
            }
            None if self.lambda.im <= 0.0 => Err(Error::InvalidBlock(format!(
                "unsigned block needs an eigenvalue with positive imaginary part, got {}",
                self.lambda
            ))),
            _ => Ok(()),
        }
    }

    fn order_key(&self, other: &CanonicalBlock) -> std::cmp::Ordering {
        self.lambda
            .re
            .total_cmp(&other.lambda.re)
            .then(self.lambda.im.total_cmp(&other.lambda.im))
            .then(other.size.cmp(&self.size))
            .then(other.sign.cmp(&self.sign))
    }
}

impl fmt::Display for CanonicalBlock {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.sign {
            Some(s) => write!(f, "({}, {}, {})", self.lambda.re, self.size, s),
            None => write!(f, "({}+{}i, {})", self.lambda.re, self.lambda.im, self.size),
        }
    }
}

/// Sorts blocks by eigenvalue `(Re, Im)`, then size descending, then sign descending.
pub fn sort_blocks(blocks: &mut [CanonicalBlock]) {
    blocks.sort_by(|a, b| a.order_key(b));
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Residuals {
    /// `‖AS − SJ‖ / (‖A‖·‖S‖)`.
    pub similarity: f64,
    /// `‖S*HS − Hc‖ / (‖H‖·‖S‖²)`.
    pub congruence: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalForm {
    pub blocks: Vec<CanonicalBlock>,
    pub s: QMatrix,
    pub residuals: Residuals,
}

impl CanonicalForm {
    /// A form given directly by its blocks, with `S = I`.
    pub fn from_blocks(mut blocks: Vec<CanonicalBlock>) -> Result<CanonicalForm> {
        for b in &blocks {
            b.validate()?;
        }
        sort_blocks(&mut blocks);
        let n = blocks.iter().map(CanonicalBlock::dim).sum();
        Ok(CanonicalForm { blocks, s: QMatrix::identity(n), residuals: Residuals::default() })
    }

    pub fn dim(&self) -> usize {
        self.blocks.iter().map(CanonicalBlock::dim).sum()
    }

    /// The assembled `(J, Hc)`.
    pub fn assembled(&self) -> (QMatrix, QMatrix) {
        assemble(&self.blocks)
    }
}

/// Direct sums `J` and `Hc`: real blocks first, in the given order, then the
/// nonreal pairs `J_k(λ) ⊕ J_k(λ̄)` with `Q_2k`.
pub fn assemble(blocks: &[CanonicalBlock]) -> (QMatrix, QMatrix) {
    let mut js = Vec::new();
    let mut hs = Vec::new();
    for b in blocks.iter().filter(|b| b.is_real()) {
        js.push(jordan_block_any(b.lambda, b.size));
        hs.push(sip(b.size).scale(b.sign.map_or(1.0, Sign::value)));
    }
    for b in blocks.iter().filter(|b| !b.is_real()) {
        js.push(jordan_block_any(b.lambda, b.size).direct_sum(&jordan_block_any(b.lambda.conj(), b.size)));
        hs.push(sip(2 * b.size));
    }
    (QMatrix::block_diag(&js), QMatrix::block_diag(&hs))
}

/// Equality of block multisets: sizes and signs exactly, eigenvalues within `cluster_radius`.
pub fn forms_equal(f1: &CanonicalForm, f2: &CanonicalForm, tol: &Tolerance) -> bool {
    blocks_equal(&f1.blocks, &f2.blocks, tol.cluster_radius)
}

pub fn blocks_equal(a: &[CanonicalBlock], b: &[CanonicalBlock], radius: f64) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut used = vec![false; b.len()];
    'outer: for x in a {
        for (i, y) in b.iter().enumerate() {
            if !used[i] && x.size == y.size && x.sign == y.sign && (x.lambda - y.lambda).norm() <= radius {
                used[i] = true;
                continue 'outer;
            }
        }
        return false;
    }
    true
}

/// Computes the canonical form of `(A, H)`.
pub fn canonical_form(a: &QMatrix, h: &HForm, tol: &Tolerance) -> Result<CanonicalForm> {
    let n = h.dim();
    if a.shape() != (n, n) {
        return Err(Error::DimensionMismatch(format!("A is {}x{}, H has order {n}", a.rows(), a.cols())));
    }
    let check = is_h_selfadjoint(a, h, tol);
    if !check.holds {
        return Err(Error::NotSelfAdjoint { residual: check.residual });
    }
    if n == 0 {
        return CanonicalForm::from_blocks(Vec::new());
    }
    let clusters = eigen_clusters(a, tol)?;
    let wa = embed(a);
    let scale = spectral_norm(a).max(1.0);

    let mut pieces: Vec<(CanonicalBlock, QMatrix)> = Vec::new();
    for (idx, cl) in clusters.iter().enumerate() {
        let others: Vec<Complex64> = clusters
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != idx)
            .flat_map(|(_, c)| [c.value, c.value.conj()])
            .chain((!cl.is_real()).then(|| cl.value.conj()))
            .collect();
        let found = if cl.is_real() {
            real_cluster_chains(a, h, &wa, cl, &others, scale, tol)?
        } else {
            nonreal_cluster_chains(h, &wa, cl, &others, tol)?
        };
        pieces.extend(found);
    }
    pieces.sort_by(|x, y| x.0.order_key(&y.0));
    let blocks: Vec<CanonicalBlock> = pieces.iter().map(|p| p.0).collect();
    let cols: Vec<QMatrix> = pieces
        .iter()
        .filter(|p| p.0.is_real())
        .chain(pieces.iter().filter(|p| !p.0.is_real()))
        .map(|p| p.1.clone())
        .collect();
    let s = cols.iter().skip(1).fold(cols[0].clone(), |acc, c| acc.hstack(c));
    let form = CanonicalForm { residuals: Residuals::default(), blocks, s };
    certify(a, h, form, tol)
}

/// Fills in the residuals and rejects forms that do not meet `residual_tol`.
pub fn certify(a: &QMatrix, h: &HForm, mut form: CanonicalForm, tol: &Tolerance) -> Result<CanonicalForm> {
    let (j, hc) = form.assembled();
    let s = &form.s;
    if s.shape() != a.shape() {
        return Err(Error::DimensionMismatch("transform does not match the matrix".into()));
    }
    let ns = spectral_norm(s);
    let na = spectral_norm(a).max(f64::MIN_POSITIVE);
    let nh = spectral_norm(h.matrix());
    let similarity = (&(a * s) - &(s * &j)).frobenius_norm() / (na.max(1.0) * ns);
    let congruence = h.gram(s).distance(&hc) / (nh * ns * ns).max(1.0);
    form.residuals = Residuals { similarity, congruence };
    if similarity > tol.residual_tol {
        return Err(Error::Certification { what: "similarity", residual: similarity, bound: tol.residual_tol });
    }
    if congruence > tol.residual_tol {
        return Err(Error::Certification { what: "congruence", residual: congruence, bound: tol.residual_tol });
    }
    inverse(s, tol)?;
    Ok(form)
}

fn complex_orth(z: &ComplexMatrix) -> ComplexMatrix {
    if z.ncols() == 0 {
        return z.clone();
    }
    QR::new(z.clone()).q()
}

/// Orthonormal basis of the root subspace of `ω(A)` at `lambda` with complex
/// dimension `dim`. `others` lists the remaining eigenvalues of `ω(A)`.
fn root_subspace(wa: &ComplexMatrix, lambda: Complex64, dim: usize, others: &[Complex64]) -> Result<ComplexMatrix> {
    let n2 = wa.nrows();
    if dim == n2 {
        return Ok(ComplexMatrix::identity(n2, n2));
    }
    let shifted = wa - ComplexMatrix::identity(n2, n2) * lambda;
    let mut power = shifted.clone();
    for _ in 1..dim {
        power = &power * &shifted;
        let nrm = power.norm();
        if nrm > 0.0 {
            power /= Complex64::new(nrm, 0.0);
        }
    }
    let svd = full_svd(&power);
    let mut z = ComplexMatrix::from_fn(n2, dim, |i, j| svd.v[(i, n2 - dim + j)]);
    let dmin = others.iter().map(|o| (o - lambda).norm()).fold(f64::INFINITY, f64::min);
    if !dmin.is_finite() {
        return Ok(complex_orth(&z));
    }
    let mu = lambda + Complex64::new(0.1 * dmin, 0.0);
    let resolvent = (wa - ComplexMatrix::identity(n2, n2) * mu)
        .try_inverse()
        .ok_or_else(|| Error::Ambiguity("shift for root subspace hit an eigenvalue".into()))?;
    for _ in 0..200 {
        let next = complex_orth(&(&resolvent * &z));
        let change = (&next - &z * (z.adjoint() * &next)).norm();
        z = next;
        if change < 1e-14 {
            break;
        }
    }
    Ok(z)
}

/// Polynomial coefficients of `h(t)^{-1/2}` modulo `t^k` for `h(0) = 1`.
pub(crate) fn inverse_sqrt_series(h: &[f64]) -> Vec<f64> {
    let k = h.len();
    // r = h^{-1}, then s with s² = r by the recursion s_q = (r_q − Σ_{0<i<q} s_i s_{q−i}) / 2
    let mut r = vec![0.0; k];
    r[0] = 1.0 / h[0];
    for q in 1..k {
        let acc: f64 = (1..=q).map(|i| h[i] * r[q - i]).sum();
        r[q] = -acc / h[0];
    }
    let mut s = vec![0.0; k];
    s[0] = r[0].sqrt();
    for q in 1..k {
        let acc: f64 = (1..q).map(|i| s[i] * s[q - i]).sum();
        s[q] = (r[q] - acc) / (2.0 * s[0]);
    }
    s
}

/// Smallest `p` with `N^p` vanishing on the span of the orthonormal columns `w`.
fn nilpotency_index(n_op: &QMatrix, w: &QMatrix, tol: &Tolerance) -> usize {
    let norm = spectral_norm(n_op).max(1.0);
    let thresh = tol.rank_tol.sqrt();
    let mut v = w.clone();
    let mut p = 0;
    let mut norm_p: f64 = 1.0;
    while p < w.cols() {
        let nv = spectral_norm(&v);
        if nv <= thresh * norm_p {
            break;
        }
        v = n_op * &v;
        p += 1;
        norm_p *= norm;
    }
    p.max(1)
}

/// Right-multiplies the chain by the unit quaternion that makes the largest
/// entry of its eigenvector real and positive. This preserves both the chain
/// relations (the eigenvalue is real) and the Gram matrix.
pub(crate) fn with_real_pivot(chain: &QMatrix) -> QMatrix {
    let pivot = (0..chain.rows())
        .map(|r| chain[(r, 0)])
        .max_by(|a, b| a.abs().total_cmp(&b.abs()))
        .unwrap_or(Quaternion::ONE);
    match pivot.inv() {
        Some(inv) => chain.mul_scalar_right(inv * pivot.abs()),
        None => chain.clone(),
    }
}

/// Jordan chains for a real eigenvalue; each chain comes with its columns of `S`.
fn real_cluster_chains(
    a: &QMatrix,
    h: &HForm,
    wa: &ComplexMatrix,
    cl: &EigenCluster,
    others: &[Complex64],
    scale: f64,
    tol: &Tolerance,
) -> Result<Vec<(CanonicalBlock, QMatrix)>> {
    let n = a.rows();
    let m = cl.multiplicity;
    let zc = root_subspace(wa, cl.value, 2 * m, others)?;
    let w = orthonormal_span(&vec_pull(&zc), m, 1e-6);
    if w.cols() != m {
        return Err(Error::Ambiguity(format!("root subspace at {} lost dimension", cl.value.re)));
    }
    let t = &(&w.conj_transpose() * a) * &w;
    let mut lam = t.trace().re / m as f64;
    if lam.abs() <= tol.cluster_radius * scale {
        lam = 0.0;
    }
    let nop = &t - &QMatrix::identity(m).scale(lam);
    let hr = h.gram(&w).hermitian_part();

    let mut out = Vec::new();
    let mut cur = QMatrix::identity(m);
    while cur.cols() > 0 {
        let k = nilpotency_index(&nop, &cur, tol);
        let top = &hr * &nop.pow(k - 1);
        let form = &(&cur.conj_transpose() * &top) * &cur;
        let (vals, vecs) = hermitian_eigh(&form.hermitian_part());
        let (best, mu) = vals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.abs().total_cmp(&y.1.abs()))
            .map(|(i, &v)| (i, v))
            .expect("nonempty");
        if mu.abs() <= tol.rank_tol * top.frobenius_norm().max(f64::MIN_POSITIVE) || mu == 0.0 {
            return Err(Error::Ambiguity(format!("degenerate chain form at eigenvalue {lam}")));
        }
        let eta = Sign::from_value(mu);
        let v = (&cur * &vecs.column(best)).scale(1.0 / mu.abs().sqrt());
        let mut powers = vec![v.clone()];
        for _ in 1..k {
            let next = &nop * powers.last().expect("nonempty");
            powers.push(next);
        }
        let g: Vec<f64> = powers.iter().map(|p| QMatrix::dot(&v, &(&hr * p)).re).collect();
        let hs: Vec<f64> = (0..k).map(|j| g[k - 1 - j] * eta.value()).collect();
        let coef = inverse_sqrt_series(&hs);
        let mut vp = QMatrix::zeros(m, 1);
        for (q, c) in coef.iter().enumerate() {
            vp = &vp + &powers[q].scale(*c);
        }
        let mut chain = vec![vp];
        for _ in 1..k {
            let next = &nop * chain.last().expect("nonempty");
            chain.push(next);
        }
        chain.reverse();
        let c = QMatrix::from_columns(m, &chain);
        out.push((CanonicalBlock::real(lam, k, eta), with_real_pivot(&(&w * &c))));

        let rest = cur.cols() - k;
        if rest == 0 {
            break;
        }
        let constraints = &(&c.conj_transpose() * &hr) * &cur;
        let (y, _) = smallest_subspace(&constraints, rest);
        cur = orthonormal_span(&(&cur * &y), rest, 1e-8);
        if cur.cols() != rest {
            return Err(Error::Ambiguity("chain complement lost dimension".into()));
        }
    }
    if out.iter().map(|b| b.0.size).sum::<usize>() != m || n < m {
        return Err(Error::Ambiguity(format!("chains at {lam} do not fill the root subspace")));
    }
    Ok(out)
}

/// Jordan chain pairs for a nonreal eigenvalue `λ` (Im λ > 0).
fn nonreal_cluster_chains(
    h: &HForm,
    wa: &ComplexMatrix,
    cl: &EigenCluster,
    others: &[Complex64],
    tol: &Tolerance,
) -> Result<Vec<(CanonicalBlock, QMatrix)>> {
    let mdim = cl.multiplicity;
    let w = root_subspace(wa, cl.value, mdim, others)?;
    let t = w.adjoint() * wa * &w;
    let lam = t.trace() / mdim as f64;
    if lam.im <= 0.0 {
        return Err(Error::Ambiguity(format!("nonreal cluster drifted to {lam}")));
    }
    let nop = &t - ComplexMatrix::identity(mdim, mdim) * lam;
    // β(Wa, Wb) = bᵀ B a with β(x, y) = (Jy)* ω(H) x
    let wh = embed(h.matrix());
    let bform = jmap(&w).adjoint() * &wh * &w;
    let nscale = nop.norm().max(1.0);

    let mut out = Vec::new();
    let mut cur = ComplexMatrix::identity(mdim, mdim);
    while cur.ncols() > 0 {
        // index of N on the current subspace
        let mut k = 0;
        let mut v = cur.clone();
        let mut norm_p = 1.0;
        while k < cur.ncols() / 2 {
            if v.norm() <= tol.rank_tol.sqrt() * norm_p {
                break;
            }
            v = &nop * &v;
            k += 1;
            norm_p *= nscale;
        }
        let k = k.max(1);
        let npow = nop.pow((k - 1) as u32);
        let g = cur.transpose() * &bform * &npow * &cur;
        let svd = full_svd(&g);
        let sigma = svd.s[0];
        if sigma <= tol.rank_tol * g.norm().max(f64::MIN_POSITIVE) || sigma == 0.0 {
            return Err(Error::Ambiguity(format!("degenerate chain pairing at eigenvalue {lam}")));
        }
        let x = &cur * svd.v.column(0);
        let y = (&cur * svd.u.column(0).map(|z| z.conj())) / Complex64::new(sigma, 0.0);

        let mut xs = vec![x.clone()];
        let mut ys = vec![y.clone()];
        for _ in 1..k {
            let nx = &nop * xs.last().expect("nonempty");
            let ny = &nop * ys.last().expect("nonempty");
            xs.push(nx);
            ys.push(ny);
        }
        // g(s) = β(N^s x, y)
        let beta = |p: &nalgebra::DVector<Complex64>, q: &nalgebra::DVector<Complex64>| (q.transpose() * &bform * p)[(0, 0)];
        let gs: Vec<Complex64> = xs.iter().map(|xv| beta(xv, &y)).collect();
        let mut coef = vec![Complex64::new(0.0, 0.0); k];
        coef[0] = Complex64::new(1.0, 0.0) / gs[k - 1];
        for q in 1..k {
            let acc: Complex64 = (0..q).map(|r| coef[r] * gs[k - 1 - q + r]).sum();
            coef[q] = -acc / gs[k - 1];
        }
        let mut yp = nalgebra::DVector::<Complex64>::zeros(mdim);
        for (q, c) in coef.iter().enumerate() {
            yp += &ys[q] * *c;
        }
        let mut ychain = vec![yp];
        for _ in 1..k {
            let next = &nop * ychain.last().expect("nonempty");
            ychain.push(next);
        }
        xs.reverse();
        ychain.reverse();
        let xc = ComplexMatrix::from_columns(&xs);
        let yc = ComplexMatrix::from_columns(&ychain);
        let u = vec_pull(&(&w * &xc));
        let tq = vec_pull(&(&w * &yc)).mul_scalar_right(Quaternion::J);
        out.push((CanonicalBlock::nonreal(lam, k), u.hstack(&tq)));

        let rest = cur.ncols() - 2 * k;
        if rest == 0 {
            break;
        }
        let both = ComplexMatrix::from_columns(&xs.iter().chain(ychain.iter()).cloned().collect::<Vec<_>>());
        let constraints = both.transpose() * &bform * &cur;
        let csvd = full_svd(&constraints);
        let c = cur.ncols();
        let null = ComplexMatrix::from_fn(c, rest, |i, j| csvd.v[(i, c - rest + j)]);
        cur = complex_orth(&(&cur * null));
    }
    Ok(out)
}
