//! H-selfadjoint square roots of H-selfadjoint matrices.
//!
//! Existence is read off the canonical form: negative-eigenvalue blocks must
//! come in opposite-sign twins and the nilpotent part must split into merged
//! pairs `(a+1, a)` of equal sign, equal-size pairs of opposite sign, and
//! single `1×1` blocks. Roots are built blockwise in canonical coordinates.

use std::collections::HashMap;

use num_complex::Complex64;

use crate::canonical::{canonical_form, CanonicalBlock, CanonicalForm, Sign};
use crate::error::{Error, Result};
use crate::indefinite::{is_h_selfadjoint, jordan_block_any, HForm};
use crate::quat::linalg::{
    hermitian_eigh, image_basis, intersect, inverse, kernel_basis, orthonormal_span, pinv, rank, same_span,
    smallest_subspace, spectral_norm,
};
use crate::quat::{QMatrix, Quaternion};
use crate::tolerance::Tolerance;

/// How one or two blocks of the canonical form are covered by a square root.
/// Indices refer to `CanonicalForm::blocks`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pairing {
    Positive(usize),
    Nonreal(usize),
    /// Twin negative blocks `(λ, k, +)` and `(λ, k, −)`.
    Negative { plus: usize, minus: usize },
    /// A `1×1` zero block on its own.
    ZeroSingle(usize),
    /// Zero blocks of sizes `a+1` and `a` with equal signs.
    ZeroMerged { long: usize, short: usize },
    /// Zero blocks of equal size and opposite signs.
    ZeroEqual { plus: usize, minus: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SqrtReport {
    pub exists: bool,
    /// Negative-eigenvalue blocks `(λ, k, sign)` without an opposite-sign twin.
    pub negative_violations: Vec<(f64, usize, Sign)>,
    /// Zero blocks `(size, sign)` left over by the best partition.
    pub zero_violations: Vec<(usize, Sign)>,
    /// The pairing used for construction; complete only when `exists`.
    pub pairing: Vec<Pairing>,
}

/// Decides whether the pair behind `form` has an H-selfadjoint square root.
pub fn sqrt_exists(form: &CanonicalForm) -> SqrtReport {
    let radius = Tolerance::default().cluster_radius;
    let blocks = &form.blocks;
    let mut pairing = Vec::new();
    let mut negative_violations = Vec::new();

    let mut negatives: Vec<usize> = Vec::new();
    let mut zeros: Vec<usize> = Vec::new();
    for (i, b) in blocks.iter().enumerate() {
        match b.sign {
            None => pairing.push(Pairing::Nonreal(i)),
            Some(_) if b.lambda.re > 0.0 => pairing.push(Pairing::Positive(i)),
            Some(_) if b.lambda.re < 0.0 => negatives.push(i),
            Some(_) => zeros.push(i),
        }
    }

    // twins among negative blocks: equal eigenvalue, equal size, opposite sign
    let mut taken = vec![false; blocks.len()];
    for &i in &negatives {
        if taken[i] || blocks[i].sign != Some(Sign::Plus) {
            continue;
        }
        let twin = negatives.iter().copied().find(|&j| {
            !taken[j]
                && blocks[j].sign == Some(Sign::Minus)
                && blocks[j].size == blocks[i].size
                && (blocks[j].lambda - blocks[i].lambda).norm() <= radius
        });
        if let Some(j) = twin {
            taken[i] = true;
            taken[j] = true;
            pairing.push(Pairing::Negative { plus: i, minus: j });
        }
    }
    for &i in &negatives {
        if !taken[i] {
            let b = blocks[i];
            negative_violations.push((b.lambda.re, b.size, b.sign.expect("real block")));
        }
    }

    let (zero_pairs, zero_left) = partition_zero_blocks(blocks, &zeros);
    pairing.extend(zero_pairs);
    let zero_violations: Vec<(usize, Sign)> =
        zero_left.iter().map(|&i| (blocks[i].size, blocks[i].sign.expect("real block"))).collect();

    SqrtReport { exists: negative_violations.is_empty() && zero_violations.is_empty(), negative_violations, zero_violations, pairing }
}

#[derive(Clone, Copy)]
enum ZeroChoice {
    Leave,
    Single,
    Merged,
    Equal,
}

fn slot(size: usize, sign: Sign) -> usize {
    2 * size + usize::from(sign == Sign::Plus)
}

/// Partition of the zero blocks leaving the fewest blocks unmatched.
/// The largest remaining block must sit in a part together with a block of
/// size one less (same sign) or the same size (opposite sign), or alone if
/// it is `1×1`; a memoized search over block counts explores these options.
fn partition_zero_blocks(blocks: &[CanonicalBlock], zeros: &[usize]) -> (Vec<Pairing>, Vec<usize>) {
    let max_size = zeros.iter().map(|&i| blocks[i].size).max().unwrap_or(0);
    let mut counts = vec![0usize; 2 * max_size + 2];
    for &i in zeros {
        counts[slot(blocks[i].size, blocks[i].sign.expect("real block"))] += 1;
    }
    let mut memo: HashMap<Vec<usize>, (usize, ZeroChoice)> = HashMap::new();
    best_partition(&counts, &mut memo);

    // replay the optimal choices on concrete block indices
    let mut pools: HashMap<usize, Vec<usize>> = HashMap::new();
    for &i in zeros.iter().rev() {
        pools.entry(slot(blocks[i].size, blocks[i].sign.expect("real block"))).or_default().push(i);
    }
    let mut take = |s: usize| pools.get_mut(&s).and_then(Vec::pop).expect("count and pool agree");
    let mut pairs = Vec::new();
    let mut left = Vec::new();
    let mut state = counts;
    while let Some(top) = state.iter().rposition(|&c| c > 0) {
        let (size, sign) = (top / 2, if top % 2 == 1 { Sign::Plus } else { Sign::Minus });
        let choice = memo[&state].1;
        state[top] -= 1;
        let i = take(top);
        match choice {
            ZeroChoice::Leave => left.push(i),
            ZeroChoice::Single => pairs.push(Pairing::ZeroSingle(i)),
            ZeroChoice::Merged => {
                let s = slot(size - 1, sign);
                state[s] -= 1;
                pairs.push(Pairing::ZeroMerged { long: i, short: take(s) });
            }
            ZeroChoice::Equal => {
                let s = slot(size, sign.flip());
                state[s] -= 1;
                let j = take(s);
                let (plus, minus) = if sign == Sign::Plus { (i, j) } else { (j, i) };
                pairs.push(Pairing::ZeroEqual { plus, minus });
            }
        }
    }
    (pairs, left)
}

fn best_partition(state: &[usize], memo: &mut HashMap<Vec<usize>, (usize, ZeroChoice)>) -> usize {
    let Some(top) = state.iter().rposition(|&c| c > 0) else { return 0 };
    if let Some(&(cost, _)) = memo.get(state) {
        return cost;
    }
    let (size, sign) = (top / 2, if top % 2 == 1 { Sign::Plus } else { Sign::Minus });
    let mut rest = state.to_vec();
    rest[top] -= 1;
    let mut best = (1 + best_partition(&rest, memo), ZeroChoice::Leave);
    if size == 1 {
        let c = best_partition(&rest, memo);
        if c < best.0 {
            best = (c, ZeroChoice::Single);
        }
    }
    if size >= 2 && rest[slot(size - 1, sign)] > 0 {
        let mut r = rest.clone();
        r[slot(size - 1, sign)] -= 1;
        let c = best_partition(&r, memo);
        if c < best.0 {
            best = (c, ZeroChoice::Merged);
        }
    }
    if rest[slot(size, sign.flip())] > 0 {
        let mut r = rest.clone();
        r[slot(size, sign.flip())] -= 1;
        let c = best_partition(&r, memo);
        if c < best.0 {
            best = (c, ZeroChoice::Equal);
        }
    }
    memo.insert(state.to_vec(), best);
    best.0
}

/// Coefficients `binom(1/2, q) λ^{1/2 − q}` of the principal square root
/// expanded around `λ`, so `√(J_k(λ)) = Σ_q c_q N^q`.
fn sqrt_taylor(lambda: Complex64, k: usize) -> Vec<Complex64> {
    let root = lambda.sqrt();
    let mut out = Vec::with_capacity(k);
    let mut binom = 1.0;
    let mut pow = root;
    for q in 0..k {
        out.push(pow * binom);
        binom *= (0.5 - q as f64) / (q as f64 + 1.0);
        pow /= lambda;
    }
    out
}

fn toeplitz(coef: &[Complex64]) -> QMatrix {
    let k = coef.len();
    QMatrix::from_fn(k, k, |r, c| if c >= r { Quaternion::from_complex(coef[c - r]) } else { Quaternion::ZERO })
}

/// Offsets of each block inside the assembled form (real blocks first).
pub(crate) fn block_offsets(blocks: &[CanonicalBlock]) -> Vec<usize> {
    let mut offsets = vec![0; blocks.len()];
    let mut at = 0;
    for (i, b) in blocks.iter().enumerate().filter(|(_, b)| b.is_real()) {
        offsets[i] = at;
        at += b.dim();
    }
    for (i, b) in blocks.iter().enumerate().filter(|(_, b)| !b.is_real()) {
        offsets[i] = at;
        at += b.dim();
    }
    offsets
}

/// Adds `X J_ℓ(0) X*` for orthonormal chain columns `X = [x_1 … x_ℓ]`; the
/// result maps each `x_i` to `x_{i−1}` and `x_1` to zero.
fn add_chain_shift(a: &mut QMatrix, chain: &[QMatrix]) {
    let n = a.rows();
    let x = QMatrix::from_columns(n, chain);
    let shift = &(&x * &jordan_block_any(Complex64::new(0.0, 0.0), chain.len())) * &x.conj_transpose();
    *a = &*a + &shift;
}

/// Square root of the assembled canonical matrix, block by block, following `pairing`.
fn canonical_root(form: &CanonicalForm, pairing: &[Pairing], skip_zero: bool) -> QMatrix {
    let n = form.dim();
    let blocks = &form.blocks;
    let offsets = block_offsets(blocks);
    let mut a = QMatrix::zeros(n, n);
    let unit = |i: usize| QMatrix::unit(n, i);
    for p in pairing {
        match *p {
            Pairing::Positive(i) => {
                let b = blocks[i];
                a.set_submatrix(offsets[i], offsets[i], &toeplitz(&sqrt_taylor(b.lambda, b.size)));
            }
            Pairing::Nonreal(i) => {
                let b = blocks[i];
                let coef = sqrt_taylor(b.lambda, b.size);
                let conj: Vec<Complex64> = coef.iter().map(|c| c.conj()).collect();
                a.set_submatrix(offsets[i], offsets[i], &toeplitz(&coef));
                a.set_submatrix(offsets[i] + b.size, offsets[i] + b.size, &toeplitz(&conj));
            }
            Pairing::Negative { plus, minus } => {
                // [[0, R], [−R, 0]] with R² = |λ|I − N squares to λI + N on each twin
                let b = blocks[plus];
                let coef: Vec<Complex64> = sqrt_taylor(Complex64::new(-b.lambda.re, 0.0), b.size)
                    .iter()
                    .enumerate()
                    .map(|(q, c)| if q % 2 == 1 { -c } else { *c })
                    .collect();
                let r = toeplitz(&coef);
                a.set_submatrix(offsets[plus], offsets[minus], &r);
                a.set_submatrix(offsets[minus], offsets[plus], &r.scale(-1.0));
            }
            Pairing::ZeroSingle(_) => {}
            Pairing::ZeroMerged { long, short } if !skip_zero => {
                let (ol, os) = (offsets[long], offsets[short]);
                let a_size = blocks[short].size;
                let mut chain = Vec::new();
                for t in 0..a_size {
                    chain.push(unit(ol + t));
                    chain.push(unit(os + t));
                }
                chain.push(unit(ol + a_size));
                add_chain_shift(&mut a, &chain);
            }
            Pairing::ZeroEqual { plus, minus } if !skip_zero => {
                let (op, om) = (offsets[plus], offsets[minus]);
                let s = std::f64::consts::FRAC_1_SQRT_2;
                let mut chain = Vec::new();
                for t in 0..blocks[plus].size {
                    chain.push((&unit(op + t) + &unit(om + t)).scale(s));
                    chain.push((&unit(op + t) - &unit(om + t)).scale(s));
                }
                add_chain_shift(&mut a, &chain);
            }
            _ => {}
        }
    }
    a
}

/// An H-selfadjoint `A` with `A² = B`; with `kernel_target` (columns spanning
/// a subspace) the root additionally satisfies `Ker A = span(kernel_target)`.
pub fn sqrt_build(b: &QMatrix, h: &HForm, tol: &Tolerance, kernel_target: Option<&QMatrix>) -> Result<QMatrix> {
    let form = canonical_form(b, h, tol)?;
    sqrt_from_form(b, h, &form, tol, kernel_target)
}

/// As [`sqrt_build`] with the canonical form of `(B, H)` already computed.
pub fn sqrt_from_form(
    b: &QMatrix,
    h: &HForm,
    form: &CanonicalForm,
    tol: &Tolerance,
    kernel_target: Option<&QMatrix>,
) -> Result<QMatrix> {
    let n = h.dim();
    let report = sqrt_exists(form);
    if !report.exists {
        return Err(Error::NoSquareRoot(describe_violations(&report)));
    }
    let s = &form.s;
    let s_inv = inverse(s, tol)?;
    let mut a_c = canonical_root(form, &report.pairing, kernel_target.is_some());

    if let Some(target) = kernel_target {
        if target.rows() != n {
            return Err(Error::DimensionMismatch(format!("kernel basis has {} rows, expected {n}", target.rows())));
        }
        let (z0, z1) = zero_range(form);
        let k_c = &s_inv * target;
        let outside = (0..k_c.cols())
            .map(|c| {
                let col = k_c.column(c);
                let inside = col.submatrix(z0, 0, z1 - z0, 1).frobenius_norm();
                (col.frobenius_norm() - inside).max(0.0) / col.frobenius_norm().max(f64::MIN_POSITIVE)
            })
            .fold(0.0, f64::max);
        if outside > tol.residual_tol.sqrt() {
            return Err(Error::KernelUnachievable("target is not inside the kernel of B".into()));
        }
        if z1 > z0 {
            let (jz, hz) = crate::canonical::assemble(&form.blocks[zero_block_range(form)]);
            let kz = k_c.submatrix(z0, 0, z1 - z0, k_c.cols());
            let a0 = nilpotent_root_with_kernel(&jz, &hz, &kz, tol)?;
            a_c.set_submatrix(z0, z0, &a0);
        } else if rank(target, tol) > 0 {
            return Err(Error::KernelUnachievable("B is invertible, so every root is invertible".into()));
        }
    }

    let a = &(s * &a_c) * &s_inv;
    certify_root(&a, b, h, tol)?;
    if let Some(target) = kernel_target {
        let ker = kernel_basis(&a, tol);
        let t = orthonormal_span(target, target.cols(), 1e-8);
        if !same_span(&ker, &t, tol.residual_tol.sqrt()) {
            return Err(Error::Certification { what: "kernel", residual: ker.cols().abs_diff(t.cols()) as f64, bound: 0.0 });
        }
    }
    Ok(a)
}

fn describe_violations(report: &SqrtReport) -> String {
    let mut parts = Vec::new();
    for (l, k, s) in &report.negative_violations {
        parts.push(format!("negative block ({l}, {k}, {s}) has no opposite-sign twin"));
    }
    for (k, s) in &report.zero_violations {
        parts.push(format!("zero block ({k}, {s}) cannot be paired"));
    }
    parts.join("; ")
}

/// Residual checks for a constructed root: selfadjointness and `‖A² − B‖ ≤ residual_tol·(1 + ‖B‖)`.
pub fn certify_root(a: &QMatrix, b: &QMatrix, h: &HForm, tol: &Tolerance) -> Result<()> {
    let sa = is_h_selfadjoint(a, h, tol);
    if !sa.holds {
        return Err(Error::Certification { what: "selfadjointness of the root", residual: sa.residual, bound: tol.residual_tol });
    }
    let res = (&(a * a) - b).frobenius_norm() / (1.0 + spectral_norm(b));
    if res > tol.residual_tol {
        return Err(Error::Certification { what: "square of the root", residual: res, bound: tol.residual_tol });
    }
    Ok(())
}

fn zero_block_range(form: &CanonicalForm) -> std::ops::Range<usize> {
    let idx: Vec<usize> = form
        .blocks
        .iter()
        .enumerate()
        .filter(|(_, b)| b.is_real() && b.lambda.re == 0.0)
        .map(|(i, _)| i)
        .collect();
    match (idx.first(), idx.last()) {
        (Some(&f), Some(&l)) => f..l + 1,
        _ => 0..0,
    }
}

/// Coordinates `[z0, z1)` occupied by the zero blocks of the assembled form.
fn zero_range(form: &CanonicalForm) -> (usize, usize) {
    let offsets = block_offsets(&form.blocks);
    let r = zero_block_range(form);
    if r.is_empty() {
        return (0, 0);
    }
    let start = offsets[r.start];
    let end = r.clone().map(|i| offsets[i] + form.blocks[i].size).max().unwrap_or(start);
    (start, end)
}

/// A canonical Jordan chain `c_1, …, c_p` (eigenvector first) of the nilpotent `B`.
type Chain = Vec<QMatrix>;

enum Role {
    Merged(Sign),
    EvenPlus(usize),
    EvenMinus(usize),
    Reserved(Sign),
}

/// Nilpotent H-selfadjoint `B` (in canonical coordinates `(J, H)`) and a
/// subspace `K`: builds an H-selfadjoint `A` with `A² = B` and `Ker A = K`.
///
/// Works down the levels `p = L, …, 1`. On the current B-invariant subspace
/// `W` (where `B^p = 0`) the space `V_p = B^{p−1}W` carries the nondegenerate
/// form `φ(B^{p−1}x, B^{p−1}y) = [B^{p−1}x, y]`. Kernel vectors at level `p`
/// are heads of A-chains of length `2p−1` (φ-definite) or `2p` (φ-isotropic,
/// paired with a hyperbolic partner); the rest of `V_p` must exactly host the
/// short partners owed to the merged chains of level `p+1`.
pub(crate) fn nilpotent_root_with_kernel(bz: &QMatrix, hz: &QMatrix, k: &QMatrix, tol: &Tolerance) -> Result<QMatrix> {
    let d = bz.rows();
    let ip = |x: &QMatrix, y: &QMatrix| QMatrix::dot(y, &(hz * x));
    let thresh = tol.rank_tol.sqrt();
    let mut wc = QMatrix::identity(d);
    let korth = orthonormal_span(k, k.cols(), 1e-8);
    if (bz * &korth).frobenius_norm() > thresh * (1.0 + spectral_norm(bz)) {
        return Err(Error::KernelUnachievable("target is not inside the kernel of B".into()));
    }
    let mut kc = korth;
    let mut levels = 0;
    let mut probe = QMatrix::identity(d);
    while probe.frobenius_norm() > thresh && levels < d {
        probe = bz * &probe;
        levels += 1;
    }

    let mut pending: Vec<(Sign, Chain)> = Vec::new();
    let mut achains: Vec<Chain> = Vec::new();
    for p in (1..=levels).rev() {
        let bp = bz.pow(p - 1);
        let bpw = &bp * &wc;
        let v = image_basis(&bpw, tol);
        let r_plus = pending.iter().filter(|c| c.0 == Sign::Plus).count();
        let r_minus = pending.len() - r_plus;
        if v.cols() == 0 {
            if !pending.is_empty() {
                return Err(Error::KernelUnachievable(format!("no room for short partners at level {p}")));
            }
            continue;
        }
        let z = &(&wc * &pinv(&bpw, tol)) * &v;
        let phi = (&(&z.conj_transpose() * hz) * &v).hermitian_part();
        let phi_scale = phi.max_abs().max(f64::MIN_POSITIVE);

        let kp = intersect(&kc, &v, tol);
        let krest = if kp.cols() == 0 {
            kc.clone()
        } else {
            let basis = &kc * &kernel_basis(&(&kp.conj_transpose() * &kc), tol);
            orthonormal_span(&basis, kc.cols() - kp.cols(), 1e-8)
        };
        let ck = &v.conj_transpose() * &kp;
        let (vals, vecs) = hermitian_eigh(&(&(&ck.conj_transpose() * &phi) * &ck));
        let mut radical = Vec::new();
        let mut merged = Vec::new();
        for (i, &val) in vals.iter().enumerate() {
            let coord = &ck * &vecs.column(i);
            if val.abs() <= thresh * phi_scale {
                radical.push(coord);
            } else {
                merged.push((Sign::from_value(val), coord.scale(1.0 / val.abs().sqrt())));
            }
        }
        let s0 = radical.len();
        let vdim = v.cols();
        if vdim != r_plus + r_minus + merged.len() + 2 * s0 {
            return Err(Error::KernelUnachievable(format!(
                "at chain level {p}: {vdim} head directions but the kernel and owed partners need {}",
                r_plus + r_minus + merged.len() + 2 * s0
            )));
        }
        let rmat = QMatrix::from_columns(vdim, &radical);
        let nmat = QMatrix::from_columns(vdim, &merged.iter().map(|m| m.1.clone()).collect::<Vec<_>>());

        // hyperbolic partners: φ(r_i, d_j) = δ_ij, φ(m, d_j) = 0, then made isotropic
        let dmat = if s0 > 0 {
            let m = &rmat.hstack(&nmat).conj_transpose() * &phi;
            let rhs = QMatrix::identity(s0).vstack(&QMatrix::zeros(nmat.cols(), s0));
            let dm = &pinv(&m, tol) * &rhs;
            let gamma = (&(&dm.conj_transpose() * &phi) * &dm).hermitian_part();
            &dm - &(&rmat * &gamma).scale(0.5)
        } else {
            QMatrix::zeros(vdim, 0)
        };
        let used = rmat.hstack(&nmat).hstack(&dmat);
        let free = vdim - used.cols();
        let (ybasis, _) = smallest_subspace(&(&used.conj_transpose() * &phi), free);
        let (yvals, yvecs) = hermitian_eigh(&(&(&ybasis.conj_transpose() * &phi) * &ybasis));
        let y_plus = yvals.iter().filter(|&&x| x > 0.0).count();
        if free > 0 && yvals.iter().any(|x| x.abs() <= thresh * phi_scale) {
            return Err(Error::Ambiguity(format!("degenerate partner space at chain level {p}")));
        }
        if (y_plus, free - y_plus) != (r_plus, r_minus) {
            return Err(Error::KernelUnachievable(format!(
                "at chain level {p}: partner directions have signature ({y_plus}, {}) but ({r_plus}, {r_minus}) are owed",
                free - y_plus
            )));
        }

        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut heads: Vec<(Role, Sign, QMatrix)> = Vec::new();
        for (sg, c) in merged {
            heads.push((Role::Merged(sg), sg, c));
        }
        for i in 0..s0 {
            let (r, dv) = (rmat.column(i), dmat.column(i));
            heads.push((Role::EvenPlus(i), Sign::Plus, (&r + &dv).scale(s)));
            heads.push((Role::EvenMinus(i), Sign::Minus, (&r - &dv).scale(s)));
        }
        for (i, &val) in yvals.iter().enumerate() {
            let c = (&ybasis * &yvecs.column(i)).scale(1.0 / val.abs().sqrt());
            heads.push((Role::Reserved(Sign::from_value(val)), Sign::from_value(val), c));
        }

        let mut new_pending = Vec::new();
        let mut even: HashMap<usize, (Option<Chain>, Option<Chain>)> = HashMap::new();
        for (role, sign, coord) in heads {
            let head = &v * &coord;
            let bpw_cur = &bp * &wc;
            let mut top = &(&wc * &pinv(&bpw_cur, tol)) * &head;
            if (&(&bp * &top) - &head).frobenius_norm() > thresh * (1.0 + head.frobenius_norm()) {
                return Err(Error::Ambiguity(format!("head at chain level {p} has no preimage")));
            }
            if krest.cols() > 0 {
                let wk = &wc * &kernel_basis(&bpw_cur, tol);
                let mk = &(&wk.conj_transpose() * hz) * &krest;
                let rhs = (&(&krest.conj_transpose() * hz) * &top).scale(-1.0);
                let y = &pinv(&mk.conj_transpose(), tol) * &rhs;
                top = &top + &(&wk * &y);
            }
            let chain = normalized_chain(bz, &top, p, sign, &ip);
            let cm = QMatrix::from_columns(d, &chain);
            let rest = wc.cols() - p;
            if rest > 0 {
                let (y, _) = smallest_subspace(&(&(&cm.conj_transpose() * hz) * &wc), rest);
                wc = orthonormal_span(&(&wc * &y), rest, 1e-8);
            } else {
                wc = QMatrix::zeros(d, 0);
            }
            match role {
                Role::Merged(sg) if p == 1 => {
                    let _ = sg;
                    achains.push(chain);
                }
                Role::Merged(sg) => new_pending.push((sg, chain)),
                Role::EvenPlus(i) => even.entry(i).or_default().0 = Some(chain),
                Role::EvenMinus(i) => even.entry(i).or_default().1 = Some(chain),
                Role::Reserved(sg) => {
                    let at = pending
                        .iter()
                        .position(|c| c.0 == sg)
                        .ok_or_else(|| Error::Ambiguity("unmatched short partner".into()))?;
                    let (_, long) = pending.swap_remove(at);
                    let mut x = Vec::new();
                    for t in 0..p {
                        x.push(long[t].clone());
                        x.push(chain[t].clone());
                    }
                    x.push(long[p].clone());
                    achains.push(x);
                }
            }
        }
        let mut keys: Vec<usize> = even.keys().copied().collect();
        keys.sort_unstable();
        for i in keys {
            let (Some(u), Some(w)) = even.remove(&i).expect("key present") else {
                return Err(Error::Ambiguity("incomplete hyperbolic pair".into()));
            };
            let mut x = Vec::new();
            for t in 0..p {
                x.push((&u[t] + &w[t]).scale(s));
                x.push((&u[t] - &w[t]).scale(s));
            }
            achains.push(x);
        }
        pending = new_pending;
        kc = krest;
    }
    if !pending.is_empty() || kc.cols() > 0 || wc.cols() > 0 {
        return Err(Error::KernelUnachievable("kernel vectors left unplaced".into()));
    }

    let mut cols = Vec::new();
    let mut jblocks = Vec::new();
    for c in &achains {
        cols.extend(c.iter().cloned());
        jblocks.push(jordan_block_any(Complex64::new(0.0, 0.0), c.len()));
    }
    let t = QMatrix::from_columns(d, &cols);
    let t_inv = inverse(&t, tol)?;
    Ok(&(&t * &QMatrix::block_diag(&jblocks)) * &t_inv)
}

/// Canonical chain of length `p` through `top`, normalized so that the Gram
/// matrix is `sign·Q_p` and the eigenvector `B^{p−1}top` is unchanged (up to
/// rounding, since `[B^{p−1}top, top] = sign`).
fn normalized_chain(
    bz: &QMatrix,
    top: &QMatrix,
    p: usize,
    sign: Sign,
    ip: &dyn Fn(&QMatrix, &QMatrix) -> Quaternion,
) -> Chain {
    let mut powers = vec![top.clone()];
    for _ in 1..p {
        let next = bz * powers.last().expect("nonempty");
        powers.push(next);
    }
    let g: Vec<f64> = powers.iter().map(|x| ip(x, top).re).collect();
    let hs: Vec<f64> = (0..p).map(|j| g[p - 1 - j] * sign.value()).collect();
    let coef = crate::canonical::inverse_sqrt_series(&hs);
    let mut vp = QMatrix::zeros(top.rows(), 1);
    for (q, c) in coef.iter().enumerate() {
        vp = &vp + &powers[q].scale(*c);
    }
    let mut chain = vec![vp];
    for _ in 1..p {
        let next = bz * chain.last().expect("nonempty");
        chain.push(next);
    }
    chain.reverse();
    chain
}
