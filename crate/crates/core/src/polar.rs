//! H-polar decompositions `X = UA` with `U` H-unitary and `A` H-selfadjoint.
//!
//! `X` decomposes exactly when `X^{[*]}X` has an H-selfadjoint square root `A`
//! with `Ker A = Ker X`. The report splits this into the negative-eigenvalue
//! pairing, the zero-block pairing and the kernel condition.

use std::fmt;

use crate::canonical::{assemble, canonical_form, CanonicalBlock, CanonicalForm, Sign};
use crate::error::{Error, Result};
use crate::indefinite::{is_h_selfadjoint, HForm};
use crate::quat::linalg::{distance_from_span, kernel_basis, orthonormal_span, pinv, rank};
use crate::quat::QMatrix;
use crate::sqroot::{block_offsets, nilpotent_root_with_kernel, sqrt_exists, sqrt_from_form};
use crate::tolerance::Tolerance;
use crate::witt::{extend_isometry, factor_isometry};

/// Outcome of one existence condition with a human-readable witness.
#[derive(Debug, Clone, PartialEq)]
pub struct Condition {
    pub holds: bool,
    pub witness: String,
}

impl Condition {
    fn pass(witness: impl Into<String>) -> Condition {
        Condition { holds: true, witness: witness.into() }
    }

    fn fail(witness: impl Into<String>) -> Condition {
        Condition { holds: false, witness: witness.into() }
    }
}

/// One zero block of the canonical form of `(X^{[*]}X, H)` with its basis
/// vectors `e_1, …, e_ℓ` (columns of `S`).
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroBlock {
    pub size: usize,
    pub sign: Sign,
    pub vectors: QMatrix,
}

/// The zero blocks of a canonical form, in the order of the form.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroBlockBasis {
    pub blocks: Vec<ZeroBlock>,
}

impl ZeroBlockBasis {
    pub fn from_form(form: &CanonicalForm) -> ZeroBlockBasis {
        let offsets = block_offsets(&form.blocks);
        let blocks = form
            .blocks
            .iter()
            .zip(&offsets)
            .filter(|(b, _)| b.is_real() && b.lambda.re == 0.0)
            .map(|(b, &at)| ZeroBlock {
                size: b.size,
                sign: b.sign.unwrap_or(Sign::Plus),
                vectors: form.s.column_range(at, at + b.size),
            })
            .collect();
        ZeroBlockBasis { blocks }
    }

    /// Total dimension `Σ ℓ_i`.
    pub fn dim(&self) -> usize {
        self.blocks.iter().map(|b| b.size).sum()
    }

    /// All basis vectors side by side.
    pub fn vectors(&self, n: usize) -> QMatrix {
        self.blocks.iter().fold(QMatrix::zeros(n, 0), |acc, b| acc.hstack(&b.vectors))
    }

    /// The `1×1` blocks: number `k₀` and the diagonal of `H₀`.
    pub fn singletons(&self) -> Vec<Sign> {
        self.blocks.iter().filter(|b| b.size == 1).map(|b| b.sign).collect()
    }

    fn canonical_blocks(&self) -> Vec<CanonicalBlock> {
        self.blocks.iter().map(|b| CanonicalBlock::real(0.0, b.size, b.sign)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolarReport {
    pub exists: bool,
    /// Negative eigenvalues come in twin blocks of opposite signs.
    pub cond_i: Condition,
    /// Zero blocks pair up as `(k+1, k)` with equal signs or `(k, k)` with opposite signs.
    pub cond_ii: Condition,
    /// `Ker X` is the kernel of some H-selfadjoint square root.
    pub cond_iii: Condition,
    /// Canonical form of `(X^{[*]}X, H)`.
    pub form: CanonicalForm,
    pub zero_basis: ZeroBlockBasis,
    /// Orthonormal basis of `Ker X`.
    pub kernel: QMatrix,
}

impl PolarReport {
    /// The first failing condition, named as in the report.
    pub fn failure(&self) -> Option<String> {
        [("(i)", &self.cond_i), ("(ii)", &self.cond_ii), ("(iii)", &self.cond_iii)]
            .into_iter()
            .find(|(_, c)| !c.holds)
            .map(|(name, c)| format!("condition {name}: {}", c.witness))
    }
}

impl fmt::Display for PolarReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "exists: {}", self.exists)?;
        for (name, c) in [("i", &self.cond_i), ("ii", &self.cond_ii), ("iii", &self.cond_iii)] {
            writeln!(f, "condition ({name}): {} ({})", if c.holds { "pass" } else { "fail" }, c.witness)?;
        }
        Ok(())
    }
}

/// Residuals of a candidate decomposition, all relative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarResiduals {
    /// `‖X − UA‖ / max(1, ‖X‖)`.
    pub factorization: f64,
    /// `‖U*HU − H‖ / ‖H‖`.
    pub unitarity: f64,
    /// `‖H⁻¹A*H − A‖ / max(1, ‖A‖)`.
    pub selfadjointness: f64,
    /// Distance between `Ker A` and `Ker X`; infinite when the dimensions differ.
    pub kernel: f64,
    pub certified: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolarDecomposition {
    pub u: QMatrix,
    pub a: QMatrix,
    pub residuals: PolarResiduals,
}

/// `X^{[*]}X = H⁻¹ X* H X`, with `X* H X` symmetrized.
pub fn gram_product(x: &QMatrix, h: &HForm) -> QMatrix {
    h.inverse() * &h.gram(x).hermitian_part()
}

/// Whether some H-selfadjoint root of the nilpotent part described by `zb` has
/// kernel `span(ker_x)`. `ker_x` must lie in the span of the zero-block vectors.
pub fn kernel_condition_check(ker_x: &QMatrix, zb: &ZeroBlockBasis, h: &HForm, tol: &Tolerance) -> Result<Condition> {
    let n = h.dim();
    if ker_x.rows() != n {
        return Err(Error::DimensionMismatch(format!("kernel basis has {} rows, expected {n}", ker_x.rows())));
    }
    let kdim = rank(ker_x, tol);
    if zb.blocks.is_empty() {
        return Ok(if kdim == 0 {
            Condition::pass("X is invertible")
        } else {
            Condition::fail("X^[*]X is invertible but X is singular")
        });
    }
    let z = zb.vectors(n);
    let coords = &pinv(&z, tol) * ker_x;
    let outside = (&z * &coords).distance(ker_x) / ker_x.frobenius_norm().max(f64::MIN_POSITIVE);
    if outside > tol.residual_tol.sqrt() {
        return Ok(Condition::fail("Ker X leaves the root subspace of 0"));
    }
    let (jz, hz) = assemble(&zb.canonical_blocks());
    match nilpotent_root_with_kernel(&jz, &hz, &coords, tol) {
        Ok(_) => Ok(Condition::pass(format!("Ker X of dimension {kdim} is realized by a root"))),
        Err(Error::KernelUnachievable(why)) => {
            let isotropic = h.gram(ker_x).frobenius_norm() <= tol.residual_tol.sqrt() * ker_x.frobenius_norm().powi(2);
            let tag = if isotropic { "" } else { " (non-isotropic)" };
            Ok(Condition::fail(format!("kernel not alignable{tag}: {why}")))
        }
        Err(e) => Err(e),
    }
}

/// Decides whether `X` admits an H-polar decomposition.
pub fn polar_exists(x: &QMatrix, h: &HForm, tol: &Tolerance) -> Result<PolarReport> {
    let n = h.dim();
    if x.shape() != (n, n) {
        return Err(Error::DimensionMismatch(format!("X is {}x{}, H has order {n}", x.rows(), x.cols())));
    }
    let b = gram_product(x, h);
    let form = canonical_form(&b, h, tol)?;
    let sq = sqrt_exists(&form);
    let cond_i = if sq.negative_violations.is_empty() {
        Condition::pass("negative eigenvalues come in opposite-sign twins")
    } else {
        let list: Vec<String> =
            sq.negative_violations.iter().map(|(l, k, s)| format!("({l}, {k}, {s})")).collect();
        Condition::fail(format!("unpaired negative blocks {}", list.join(", ")))
    };
    let cond_ii = if sq.zero_violations.is_empty() {
        Condition::pass("zero blocks pair up")
    } else {
        let list: Vec<String> = sq.zero_violations.iter().map(|(k, s)| format!("({k}, {s})")).collect();
        Condition::fail(format!("unpaired zero blocks {}", list.join(", ")))
    };
    let zero_basis = ZeroBlockBasis::from_form(&form);
    let kernel = kernel_basis(x, tol);
    let cond_iii = if cond_i.holds && cond_ii.holds {
        kernel_condition_check(&kernel, &zero_basis, h, tol)?
    } else {
        Condition::fail("not evaluated: X^[*]X has no H-selfadjoint square root")
    };
    Ok(PolarReport {
        exists: cond_i.holds && cond_ii.holds && cond_iii.holds,
        cond_i,
        cond_ii,
        cond_iii,
        form,
        zero_basis,
        kernel,
    })
}

/// Recomputes the certification residuals of `X = UA`.
pub fn verify_polar(x: &QMatrix, h: &HForm, u: &QMatrix, a: &QMatrix, tol: &Tolerance) -> PolarResiduals {
    let n = h.dim();
    if [x.shape(), u.shape(), a.shape()].iter().any(|&s| s != (n, n)) {
        let inf = f64::INFINITY;
        return PolarResiduals { factorization: inf, unitarity: inf, selfadjointness: inf, kernel: inf, certified: false };
    }
    let factorization = (u * a).distance(x) / x.frobenius_norm().max(1.0);
    let unitarity = h.gram(u).distance(h.matrix()) / h.matrix().frobenius_norm();
    let adj = &(h.inverse() * &a.conj_transpose()) * h.matrix();
    let selfadjointness = adj.distance(a) / a.frobenius_norm().max(1.0);
    let kx = kernel_basis(x, tol);
    let ka = kernel_basis(a, tol);
    let kernel = if kx.cols() != ka.cols() {
        f64::INFINITY
    } else if kx.cols() == 0 {
        0.0
    } else {
        distance_from_span(&kx, &ka).max(distance_from_span(&ka, &kx))
    };
    let certified = factorization <= tol.residual_tol
        && unitarity <= tol.residual_tol
        && selfadjointness <= tol.residual_tol
        && kernel <= tol.rank_tol.sqrt();
    PolarResiduals { factorization, unitarity, selfadjointness, kernel, certified }
}

/// Computes a certified H-polar decomposition. `A` is the square root of
/// `X^{[*]}X` with kernel `Ker X` on the deterministic branch, and `U` the
/// Witt extension of `A x ↦ X x` built from minimum-norm dual vectors.
pub fn polar_decompose(x: &QMatrix, h: &HForm, tol: &Tolerance) -> Result<PolarDecomposition> {
    let report = polar_exists(x, h, tol)?;
    if let Some(why) = report.failure() {
        return Err(Error::NoPolarDecomposition(why));
    }
    let b = gram_product(x, h);
    let kernel = orthonormal_span(&report.kernel, report.kernel.cols(), 1e-8);
    let a = sqrt_from_form(&b, h, &report.form, tol, Some(&kernel))?;
    let u0 = factor_isometry(&a, x, h, h, tol)?;
    let u = extend_isometry(&u0, h, h, tol)?;
    let residuals = verify_polar(x, h, &u, &a, tol);
    if !residuals.certified {
        let worst = residuals.factorization.max(residuals.unitarity).max(residuals.selfadjointness);
        return Err(Error::Certification { what: "polar decomposition", residual: worst.max(residuals.kernel), bound: tol.residual_tol });
    }
    debug_assert!(is_h_selfadjoint(&a, h, tol).holds);
    Ok(PolarDecomposition { u, a, residuals })
}
