use num_complex::Complex64;
use proptest::prelude::*;
use quatpolar::canonical::{assemble, blocks_equal, canonical_form, forms_equal, CanonicalBlock, CanonicalForm, Sign};
use quatpolar::gen::{gen_selfadjoint_pair, random_blocks, Seed};
use quatpolar::indefinite::{sip, HForm};
use quatpolar::{QMatrix, Quaternion, Tolerance};

use Sign::{Minus, Plus};

fn tol() -> Tolerance {
    Tolerance::default()
}

fn form(h: QMatrix) -> HForm {
    HForm::new(h, &tol()).unwrap()
}

#[test]
fn nilpotent_block_is_already_canonical() {
    let a = QMatrix::from_real(&[&[0.0, 1.0], &[0.0, 0.0]]);
    let cf = canonical_form(&a, &form(sip(2)), &tol()).unwrap();
    assert_eq!(cf.blocks, vec![CanonicalBlock::real(0.0, 2, Plus)]);
    // S is determined up to the centralizer; it must carry the pair onto itself
    assert!((&(&a * &cf.s) - &(&cf.s * &a)).frobenius_norm() < 1e-12);
    assert!((&(&cf.s.conj_transpose() * &sip(2)) * &cf.s).distance(&sip(2)) < 1e-12);
}

#[test]
fn scalar_matrix_on_euclidean_plane() {
    let a = QMatrix::from_real_diag(&[2.0, 2.0]);
    let cf = canonical_form(&a, &HForm::euclidean(2), &tol()).unwrap();
    assert_eq!(cf.blocks, vec![CanonicalBlock::real(2.0, 1, Plus); 2]);
}

#[test]
fn nonreal_pair() {
    let a = QMatrix::from_diag(&[Quaternion::I, -Quaternion::I]);
    let h = form(sip(2));
    let cf = canonical_form(&a, &h, &tol()).unwrap();
    assert_eq!(cf.blocks.len(), 1);
    assert!(!cf.blocks[0].is_real());
    assert!((cf.blocks[0].lambda - Complex64::new(0.0, 1.0)).norm() < 1e-10);
    assert_eq!(cf.blocks[0].size, 1);
}

#[test]
fn assembly() {
    let (j, hc) = assemble(&[CanonicalBlock::real(0.0, 2, Plus)]);
    assert_eq!((j, hc), (QMatrix::from_real(&[&[0.0, 1.0], &[0.0, 0.0]]), sip(2)));
    let (j, hc) = assemble(&[CanonicalBlock::real(-1.0, 1, Plus), CanonicalBlock::real(-1.0, 1, Minus)]);
    assert_eq!((j, hc), (QMatrix::from_real_diag(&[-1.0, -1.0]), QMatrix::from_real_diag(&[1.0, -1.0])));
    let (j, hc) = assemble(&[CanonicalBlock::nonreal(Complex64::new(0.0, 1.0), 1)]);
    assert_eq!((j, hc), (QMatrix::from_diag(&[Quaternion::I, -Quaternion::I]), sip(2)));
}

#[test]
fn comparison_ignores_order_but_not_signs() {
    let mk = |blocks: Vec<CanonicalBlock>| CanonicalForm::from_blocks(blocks).unwrap();
    let a = vec![CanonicalBlock::real(0.0, 2, Plus), CanonicalBlock::real(3.0, 1, Minus)];
    let mut b = a.clone();
    b.reverse();
    assert!(forms_equal(&mk(a.clone()), &mk(a.clone()), &tol()));
    assert!(forms_equal(&mk(a), &mk(b), &tol()));
    let p = mk(vec![CanonicalBlock::real(0.0, 2, Plus)]);
    let m = mk(vec![CanonicalBlock::real(0.0, 2, Minus)]);
    assert!(!forms_equal(&p, &m, &tol()));
}

#[test]
fn non_selfadjoint_input_is_rejected() {
    let a = QMatrix::from_real(&[&[0.0, 1.0], &[0.0, 1.0]]);
    let err = canonical_form(&a, &form(sip(2)), &tol()).unwrap_err();
    assert_eq!(err.class(), quatpolar::ErrorClass::InvalidInput);
}

#[test]
fn signs_survive_a_congruence() {
    // the mixed-sign Jordan chain (1, 2, -) with a (1, 1, +) block of the same eigenvalue
    let blocks = [CanonicalBlock::real(1.0, 2, Minus), CanonicalBlock::real(1.0, 1, Plus)];
    let (a, h, _) = gen_selfadjoint_pair(&blocks, Seed(11), 1e3).unwrap();
    let cf = canonical_form(&a, &h, &tol()).unwrap();
    assert!(blocks_equal(&cf.blocks, &blocks, 1e-6), "{:?}", cf.blocks);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn construct_then_recover(seed in any::<u64>()) {
        let blocks = random_blocks(Seed(seed), 8);
        let (a, h, _) = gen_selfadjoint_pair(&blocks, Seed(seed).derive(9), 1e3).unwrap();
        let cf = canonical_form(&a, &h, &tol()).unwrap();
        prop_assert!(blocks_equal(&cf.blocks, &blocks, 1e-5), "{:?} vs {:?}", cf.blocks, blocks);
        let (j, hc) = cf.assembled();
        let s = &cf.s;
        let scale = 1e-8 * (1.0 + a.frobenius_norm()) * s.frobenius_norm();
        prop_assert!((&a * s).distance(&(s * &j)) <= scale);
        prop_assert!((&(&s.conj_transpose() * h.matrix()) * s).distance(&hc) <= 1e-8 * h.matrix().frobenius_norm() * s.frobenius_norm().powi(2));
    }
}
