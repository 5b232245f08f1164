//! Instances with known ground truth: pairs `(A, H)` built from a prescribed
//! canonical form, H-unitary matrices, and random block lists.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::canonical::{assemble, CanonicalBlock, CanonicalForm, Sign};
use crate::error::{Error, Result};
use crate::indefinite::{is_h_selfadjoint, is_h_unitary, HForm};
use crate::polar::{verify_polar, PolarDecomposition};
use crate::sqroot::{sqrt_exists, sqrt_from_form};
use crate::witt::{SubspaceMap, WittBasis, WittParams};
use crate::quat::linalg::{full_svd, inverse, spectral_norm};
use crate::quat::omega::{embed, extract_unchecked, ComplexMatrix};
use crate::quat::{QMatrix, Quaternion};
use crate::tolerance::Tolerance;

/// Seed of a deterministic pseudorandom stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Seed(pub u64);

impl Seed {
    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }

    /// A seed derived from this one, for independent sub-streams.
    pub fn derive(self, salt: u64) -> Seed {
        Seed(self.0 ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15).rotate_left(17))
    }
}

pub fn gaussian_quaternion<R: Rng>(rng: &mut R) -> Quaternion {
    Quaternion::new(
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
    )
}

pub fn gaussian_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> QMatrix {
    QMatrix::from_fn(rows, cols, |_, _| gaussian_quaternion(rng))
}

/// Raises the small singular values of `ω(S)` to `σ_max / cond_cap`. The map
/// acts on singular values only, so the result keeps the quaternion structure.
pub fn clip_condition(s: &QMatrix, cond_cap: f64) -> QMatrix {
    let w = embed(s);
    let svd = full_svd(&w);
    let smax = svd.s[0];
    let floor = smax / cond_cap.max(1.0);
    let mut out = ComplexMatrix::zeros(w.nrows(), w.ncols());
    for (i, &sv) in svd.s.iter().enumerate() {
        let u = svd.u.column(i);
        let v = svd.v.column(i);
        out += (u * v.adjoint()) * Complex64::new(sv.max(floor), 0.0);
    }
    extract_unchecked(&out)
}

/// Random invertible quaternion matrix with condition number at most `cond_cap`.
pub fn random_invertible<R: Rng>(rng: &mut R, n: usize, cond_cap: f64) -> QMatrix {
    let s = gaussian_matrix(rng, n, n);
    let s = clip_condition(&s, cond_cap);
    let norm = spectral_norm(&s);
    s.scale(1.0 / norm.max(f64::MIN_POSITIVE))
}

/// `(A, H, S)` with `A = S J S⁻¹`, `H = S^{-*} Hc S⁻¹` for the assembled `(J, Hc)`.
pub fn gen_selfadjoint_pair(blocks: &[CanonicalBlock], seed: Seed, cond_cap: f64) -> Result<(QMatrix, HForm, QMatrix)> {
    let tol = Tolerance::default();
    for b in blocks {
        b.validate()?;
    }
    let (j, hc) = assemble(blocks);
    let n = j.rows();
    let mut rng = seed.rng();
    for _ in 0..16 {
        // scale to unit spectral norm; the condition cap bounds the other end
        let s = random_invertible(&mut rng, n, cond_cap).scale(n.max(1) as f64);
        let Ok(si) = inverse(&s, &tol) else { continue };
        let a = &(&s * &j) * &si;
        let h = (&(&si.conj_transpose() * &hc) * &si).hermitian_part();
        let Ok(hf) = HForm::new(h, &tol) else { continue };
        if is_h_selfadjoint(&a, &hf, &tol).holds {
            return Ok((a, hf, s));
        }
    }
    Err(Error::Generation("could not produce a certified selfadjoint pair".into()))
}

/// The canonical pair itself, `S = I`.
pub fn gen_canonical_pair(blocks: &[CanonicalBlock]) -> Result<(QMatrix, HForm, QMatrix)> {
    for b in blocks {
        b.validate()?;
    }
    let (j, hc) = assemble(blocks);
    let n = j.rows();
    Ok((j, HForm::new(hc, &Tolerance::default())?, QMatrix::identity(n)))
}

/// `U = (I − K)(I + K)⁻¹` with `K = H⁻¹Z`, `Z* = −Z`; then `K^{[*]} = −K` and `U` is H-unitary.
pub fn gen_h_unitary(h: &HForm, seed: Seed) -> Result<QMatrix> {
    let tol = Tolerance::default();
    let n = h.dim();
    let mut rng = seed.rng();
    let id = QMatrix::identity(n);
    for _ in 0..16 {
        let g = gaussian_matrix(&mut rng, n, n);
        let z = (&g - &g.conj_transpose()).scale(0.5);
        let k = h.inverse() * &z;
        let nk = spectral_norm(&k);
        if nk == 0.0 {
            return Ok(id);
        }
        // ‖K‖ ≈ 1 keeps U well-conditioned without being close to I
        let k = k.scale(1.0 / nk);
        let Ok(inv) = inverse(&(&id + &k), &tol) else { continue };
        let u = &(&id - &k) * &inv;
        if is_h_unitary(&u, h, &tol).holds {
            return Ok(u);
        }
    }
    Err(Error::Generation("Cayley transform stayed singular".into()))
}

/// The Cayley transform of a given `K`; `K = 0` gives `U = I`.
pub fn cayley(k: &QMatrix) -> Result<QMatrix> {
    let id = QMatrix::identity(k.rows());
    Ok(&(&id - k) * &inverse(&(&id + k), &Tolerance::default())?)
}

fn random_sign<R: Rng>(rng: &mut R) -> Sign {
    if rng.random_bool(0.5) {
        Sign::Plus
    } else {
        Sign::Minus
    }
}

const REAL_POOL: [f64; 7] = [-3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0];

/// Random well-separated block list of total quaternion dimension in `1..=max_n`,
/// block sizes 1 to 3, mixing real and nonreal eigenvalues.
pub fn random_blocks(seed: Seed, max_n: usize) -> Vec<CanonicalBlock> {
    let mut rng = seed.rng();
    let target = rng.random_range(1..=max_n.max(1));
    let mut blocks = Vec::new();
    let mut used = 0;
    while used < target {
        let room = target - used;
        let size = rng.random_range(1..=room.min(3));
        if room >= 2 * size && rng.random_bool(0.3) {
            let re = rng.random_range(-2..=2) as f64;
            let im = rng.random_range(1..=2) as f64;
            blocks.push(CanonicalBlock::nonreal(Complex64::new(re, im), size));
            used += 2 * size;
        } else {
            let lam = REAL_POOL[rng.random_range(0..REAL_POOL.len())];
            blocks.push(CanonicalBlock::real(lam, size, random_sign(&mut rng)));
            used += size;
        }
    }
    blocks
}

/// Random block list of total dimension at most `max_n` (and at least one block)
/// whose selfadjoint pairs admit selfadjoint square roots.
pub fn random_sqrt_blocks(seed: Seed, max_n: usize) -> Vec<CanonicalBlock> {
    let mut rng = seed.rng();
    let target = rng.random_range(1..=max_n.max(1));
    let mut blocks = Vec::new();
    let mut used = 0;
    while used < target {
        let room = target - used;
        match rng.random_range(0..6) {
            0 | 1 => {
                let size = rng.random_range(1..=room.min(3));
                let lam = [1.0, 2.0, 3.0][rng.random_range(0..3)];
                blocks.push(CanonicalBlock::real(lam, size, random_sign(&mut rng)));
                used += size;
            }
            2 if room >= 2 => {
                let size = rng.random_range(1..=(room / 2).min(2));
                let re = rng.random_range(-2..=2) as f64;
                let im = rng.random_range(1..=2) as f64;
                blocks.push(CanonicalBlock::nonreal(Complex64::new(re, im), size));
                used += 2 * size;
            }
            3 if room >= 2 => {
                let size = rng.random_range(1..=(room / 2).min(2));
                let lam = [-1.0, -2.0][rng.random_range(0..2)];
                blocks.push(CanonicalBlock::real(lam, size, Sign::Plus));
                blocks.push(CanonicalBlock::real(lam, size, Sign::Minus));
                used += 2 * size;
            }
            4 if room >= 3 => {
                // merged zero pair of sizes a+1 and a with equal signs
                let a = rng.random_range(1..=((room - 1) / 2).min(2));
                let s = random_sign(&mut rng);
                blocks.push(CanonicalBlock::real(0.0, a + 1, s));
                blocks.push(CanonicalBlock::real(0.0, a, s));
                used += 2 * a + 1;
            }
            5 if room >= 2 => {
                // equal zero pair with opposite signs
                let a = rng.random_range(1..=(room / 2).min(2));
                blocks.push(CanonicalBlock::real(0.0, a, Sign::Plus));
                blocks.push(CanonicalBlock::real(0.0, a, Sign::Minus));
                used += 2 * a;
            }
            _ => {
                blocks.push(CanonicalBlock::real(0.0, 1, random_sign(&mut rng)));
                used += 1;
            }
        }
    }
    blocks
}

/// Condition cap of the similarity used for polar instances.
const POLAR_COND_CAP: f64 = 1e3;

/// `X = UA` with `A` the H-selfadjoint square root of a generated pair
/// `(B, H)` and `U` a random H-unitary matrix.
pub fn gen_polar_instance(blocks: &[CanonicalBlock], seed: Seed) -> Result<(QMatrix, HForm, PolarDecomposition)> {
    let tol = Tolerance::default();
    let form = CanonicalForm::from_blocks(blocks.to_vec())?;
    let report = sqrt_exists(&form);
    if !report.exists {
        return Err(Error::NoSquareRoot("block list admits no H-selfadjoint square root".into()));
    }
    let (b, h, s) = gen_selfadjoint_pair(&form.blocks, seed, POLAR_COND_CAP)?;
    // the generating similarity is a canonical transform of (B, H)
    let known = CanonicalForm { s, ..form };
    let a = sqrt_from_form(&b, &h, &known, &tol, None)?;
    let u = gen_h_unitary(&h, seed.derive(1))?;
    let x = &u * &a;
    let residuals = verify_polar(&x, &h, &u, &a, &tol);
    if !residuals.certified {
        return Err(Error::Generation("generated polar instance failed certification".into()));
    }
    Ok((x, h, PolarDecomposition { u, a, residuals }))
}

/// Shape of a Witt instance: order `n`, `positive` positive directions of the
/// forms, and the inertia `(m0, m_plus, m_minus)` of the subspace.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WittShape {
    pub n: usize,
    pub positive: usize,
    pub m0: usize,
    pub m_plus: usize,
    pub m_minus: usize,
}

impl WittShape {
    pub fn is_valid(&self) -> bool {
        let negative = self.n.saturating_sub(self.positive);
        self.positive <= self.n && self.m0 + self.m_plus <= self.positive && self.m0 + self.m_minus <= negative
    }
}

/// An isometry between subspaces together with one of its Witt extensions.
#[derive(Debug, Clone, PartialEq)]
pub struct WittInstance {
    pub h1: HForm,
    pub h2: HForm,
    pub u0: SubspaceMap,
    pub extension: QMatrix,
}

pub fn random_witt_shape(seed: Seed, max_n: usize) -> WittShape {
    let mut rng = seed.rng();
    let n = rng.random_range(1..=max_n.max(1));
    let positive = rng.random_range(0..=n);
    let negative = n - positive;
    let m0 = rng.random_range(0..=positive.min(negative));
    let m_plus = rng.random_range(0..=positive - m0);
    let m_minus = rng.random_range(0..=negative - m0);
    WittShape { n, positive, m0, m_plus, m_minus }
}

/// Builds `H₁ = S⁻* D S⁻¹`, `H₂ = T⁻* D T⁻¹` for `D = diag(I, −I)`, a subspace
/// `V₁ = S V₀ R` of the requested inertia and `U = T P S⁻¹` with `P` D-unitary.
pub fn gen_witt_instance(shape: WittShape, seed: Seed, cond_cap: f64) -> Result<WittInstance> {
    if !shape.is_valid() {
        return Err(Error::Generation(format!("invalid Witt shape {shape:?}")));
    }
    let tol = Tolerance::default();
    let WittShape { n, positive, m0, m_plus, m_minus } = shape;
    let signs: Vec<f64> = (0..n).map(|i| if i < positive { 1.0 } else { -1.0 }).collect();
    let d = HForm::new(QMatrix::from_real_diag(&signs), &tol)?;
    let m = m0 + m_plus + m_minus;
    let mut v0 = QMatrix::zeros(n, m);
    for k in 0..m0 {
        v0[(k, k)] = Quaternion::ONE;
        v0[(positive + k, k)] = Quaternion::ONE;
    }
    for k in 0..m_plus {
        v0[(m0 + k, m0 + k)] = Quaternion::ONE;
    }
    for k in 0..m_minus {
        v0[(positive + m0 + k, m0 + m_plus + k)] = Quaternion::ONE;
    }
    let mut rng = seed.rng();
    let s = random_invertible(&mut rng, n, cond_cap).scale(n as f64);
    let t = random_invertible(&mut rng, n, cond_cap).scale(n as f64);
    let r = if m == 0 { QMatrix::zeros(0, 0) } else { random_invertible(&mut rng, m, cond_cap).scale(m as f64) };
    let p = gen_h_unitary(&d, seed.derive(2))?;
    let si = inverse(&s, &tol)?;
    let ti = inverse(&t, &tol)?;
    let h1 = HForm::new((&(&si.conj_transpose() * d.matrix()) * &si).hermitian_part(), &tol)?;
    let h2 = HForm::new((&(&ti.conj_transpose() * d.matrix()) * &ti).hermitian_part(), &tol)?;
    let v1 = &(&s * &v0) * &r;
    let u = &(&t * &p) * &si;
    let images = &u * &v1;
    Ok(WittInstance { h1, h2, u0: SubspaceMap { domain: v1, images }, extension: u })
}

/// Random parameters for the block form of a Witt extension: `P₁` by a Cayley
/// transform in the `J₂` form, `P₂` Gaussian, `P₃` the skew part of a Gaussian.
pub fn random_witt_params(basis: &WittBasis, seed: Seed) -> Result<WittParams> {
    let tol = Tolerance::default();
    let k = basis.free_dim();
    let m0 = basis.profile.m0;
    let mut rng = seed.rng();
    let p1 = if k == 0 { QMatrix::zeros(0, 0) } else { gen_h_unitary(&HForm::new(basis.j2_matrix(), &tol)?, seed.derive(3))? };
    let p2 = gaussian_matrix(&mut rng, k, m0);
    let g = gaussian_matrix(&mut rng, m0, m0);
    let p3 = (&g - &g.conj_transpose()).scale(0.5);
    Ok(WittParams { p1, p2, p3 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic() {
        let blocks = random_blocks(Seed(7), 8);
        assert_eq!(blocks, random_blocks(Seed(7), 8));
        let a = gen_selfadjoint_pair(&blocks, Seed(3), 1e3).unwrap();
        let b = gen_selfadjoint_pair(&blocks, Seed(3), 1e3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn identity_mode() {
        let (a, h, s) = gen_canonical_pair(&[CanonicalBlock::real(0.0, 2, Sign::Plus)]).unwrap();
        assert_eq!(a, QMatrix::from_real(&[&[0.0, 1.0], &[0.0, 0.0]]));
        assert_eq!(h.matrix(), &crate::indefinite::sip(2));
        assert_eq!(s, QMatrix::identity(2));
    }

    #[test]
    fn condition_clipping() {
        let mut rng = Seed(11).rng();
        let s = random_invertible(&mut rng, 6, 50.0);
        let cond = 1.0 / crate::quat::linalg::inverse_condition(&s);
        assert!(cond <= 50.0 * (1.0 + 1e-9));
    }

    #[test]
    fn cayley_of_zero_is_identity() {
        assert_eq!(cayley(&QMatrix::zeros(2, 2)).unwrap(), QMatrix::identity(2));
    }

    #[test]
    fn unitary_for_euclidean_and_sip() {
        let tol = Tolerance::default();
        let e = HForm::euclidean(3);
        let u = gen_h_unitary(&e, Seed(1)).unwrap();
        assert!((&u.conj_transpose() * &u).distance(&QMatrix::identity(3)) < 1e-12);
        let q = HForm::new(crate::indefinite::sip(2), &tol).unwrap();
        assert!(is_h_unitary(&gen_h_unitary(&q, Seed(2)).unwrap(), &q, &tol).holds);
    }

    #[test]
    fn polar_instances() {
        let (x, h, ground) = gen_polar_instance(&[CanonicalBlock::real(1.0, 1, Sign::Plus)], Seed(5)).unwrap();
        assert_eq!(x.shape(), (1, 1));
        assert!(ground.residuals.certified);
        assert!(is_h_unitary(&ground.u, &h, &Tolerance::default()).holds);
        let blocks = [CanonicalBlock::real(0.0, 2, Sign::Plus), CanonicalBlock::real(0.0, 1, Sign::Plus)];
        let (x, _, ground) = gen_polar_instance(&blocks, Seed(6)).unwrap();
        assert_eq!(x.shape(), (3, 3));
        assert!(ground.residuals.certified);
        let twins = [CanonicalBlock::real(-1.0, 1, Sign::Plus), CanonicalBlock::real(-1.0, 1, Sign::Plus)];
        assert!(matches!(gen_polar_instance(&twins, Seed(7)), Err(Error::NoSquareRoot(_))));
    }

    #[test]
    fn witt_instance_is_consistent() {
        let tol = Tolerance::default();
        let shape = WittShape { n: 5, positive: 3, m0: 1, m_plus: 1, m_minus: 1 };
        let w = gen_witt_instance(shape, Seed(9), 1e2).unwrap();
        crate::witt::certify_extension(&w.extension, &w.u0, &w.h1, &w.h2, &tol).unwrap();
        for i in 0..20 {
            assert!(random_witt_shape(Seed(i), 10).is_valid());
        }
    }
}
