use num_complex::Complex64;
use proptest::prelude::*;
use quatpolar::gen::{gaussian_matrix, gaussian_quaternion, Seed};
use quatpolar::indefinite::{
    h_adjoint, inner_product, is_h_selfadjoint, is_h_unitary, is_isometry_on, is_nondegenerate, jordan_block,
    orthogonal_companion, sip, HForm,
};
use quatpolar::quat::linalg::same_span;
use quatpolar::{QMatrix, Quaternion, Tolerance};

fn tol() -> Tolerance {
    Tolerance::default()
}

fn form(h: QMatrix) -> HForm {
    HForm::new(h, &tol()).unwrap()
}

fn q2() -> HForm {
    form(sip(2))
}

fn col(v: &[f64]) -> QMatrix {
    QMatrix::column_vector(&v.iter().map(|&x| Quaternion::real(x)).collect::<Vec<_>>())
}

#[test]
fn inner_products() {
    let e1 = col(&[1.0, 0.0]);
    assert_eq!(inner_product(&e1, &e1, &q2()).unwrap(), Quaternion::ZERO);
    assert_eq!(inner_product(&e1, &e1, &HForm::euclidean(2)).unwrap(), Quaternion::ONE);
    let s = col(&[1.0, 1.0]);
    assert_eq!(inner_product(&s, &s, &q2()).unwrap(), Quaternion::real(2.0));
    assert!(inner_product(&col(&[1.0]), &e1, &q2()).is_err());
}

#[test]
fn adjoints() {
    let x = QMatrix::from_real(&[&[1.0, 0.0], &[0.0, 0.0]]);
    assert_eq!(&h_adjoint(&x, &q2(), &q2()).unwrap() * &x, QMatrix::zeros(2, 2));
    let h = form(QMatrix::from_real_diag(&[3.0, -1.0, 2.0]));
    assert_eq!(h_adjoint(&QMatrix::identity(3), &h, &h).unwrap(), QMatrix::identity(3));
    let d = form(QMatrix::from_real_diag(&[1.0, -1.0]));
    let swap = QMatrix::from_real(&[&[0.0, 1.0], &[1.0, 0.0]]);
    assert_eq!(h_adjoint(&swap, &d, &d).unwrap(), QMatrix::from_real(&[&[0.0, -1.0], &[-1.0, 0.0]]));
}

#[test]
fn selfadjointness() {
    assert!(is_h_selfadjoint(&QMatrix::from_real(&[&[0.0, 0.0], &[1.0, 0.0]]), &q2(), &tol()).holds);
    assert!(is_h_selfadjoint(&QMatrix::identity(2), &q2(), &tol()).holds);
    let i = QMatrix::from_rows(vec![vec![Quaternion::I]]);
    assert!(!is_h_selfadjoint(&i, &HForm::euclidean(1), &tol()).holds);
}

#[test]
fn unitarity() {
    assert!(is_h_unitary(&sip(2), &q2(), &tol()).holds);
    let h = form(QMatrix::from_real_diag(&[1.0, -2.0, 5.0]));
    assert!(is_h_unitary(&QMatrix::identity(3), &h, &tol()).holds);
    let u = QMatrix::from_rows(vec![vec![Quaternion::ONE, Quaternion::I], vec![Quaternion::ZERO, Quaternion::ONE]]);
    assert!(is_h_unitary(&u, &q2(), &tol()).holds);
    let v = QMatrix::from_rows(vec![vec![Quaternion::ONE, Quaternion::ONE], vec![Quaternion::ZERO, Quaternion::ONE]]);
    assert!(!is_h_unitary(&v, &q2(), &tol()).holds);
}

#[test]
fn isometries_on_subspaces() {
    let (e1, e2) = (col(&[1.0, 0.0]), col(&[0.0, 1.0]));
    let h = form(QMatrix::from_real_diag(&[1.0, -1.0]));
    assert!(is_isometry_on(&e1, &e1, &h, &h, &tol()).holds);
    assert!(is_isometry_on(&e1, &e2, &q2(), &q2(), &tol()).holds);
    let minus = form(QMatrix::from_real_diag(&[-1.0, -1.0]));
    assert!(!is_isometry_on(&e1, &e1, &HForm::euclidean(2), &minus, &tol()).holds);
}

#[test]
fn companions() {
    let e1 = col(&[1.0, 0.0]);
    assert!(same_span(&orthogonal_companion(&e1, &q2(), &tol()), &e1, 1e-12));
    assert_eq!(orthogonal_companion(&QMatrix::identity(2), &q2(), &tol()).cols(), 0);
    let c = orthogonal_companion(&e1, &HForm::euclidean(2), &tol());
    assert!(same_span(&c, &col(&[0.0, 1.0]), 1e-12));
}

#[test]
fn nondegeneracy() {
    assert!(!is_nondegenerate(&col(&[1.0, 0.0]), &q2(), &tol()));
    assert!(is_nondegenerate(&QMatrix::identity(2), &q2(), &tol()));
    assert!(is_nondegenerate(&col(&[1.0, 1.0]), &q2(), &tol()));
    // a Gram value of 2e-17 against ||H|| ||w||^2 = 1 is roundoff, not a nonzero pivot
    assert!(!is_nondegenerate(&col(&[1.0, 1e-17]), &q2(), &tol()));
}

#[test]
fn sip_and_jordan_blocks() {
    assert_eq!(sip(1), QMatrix::identity(1));
    assert_eq!(sip(2), QMatrix::from_real(&[&[0.0, 1.0], &[1.0, 0.0]]));
    assert_eq!(&sip(3) * &sip(3), QMatrix::identity(3));
    assert_eq!(jordan_block(Complex64::new(3.0, 0.0), 1).unwrap(), QMatrix::from_real(&[&[3.0]]));
    let j = jordan_block(Complex64::new(0.0, 0.0), 2).unwrap();
    assert_eq!(j, QMatrix::from_real(&[&[0.0, 1.0], &[0.0, 0.0]]));
    assert_eq!(&j * &j, QMatrix::zeros(2, 2));
    assert!(jordan_block(Complex64::new(0.0, -1.0), 1).is_err());
}

#[test]
fn forms_are_validated() {
    assert!(matches!(
        HForm::new(QMatrix::from_real(&[&[1.0, 2.0], &[0.0, 1.0]]), &tol()),
        Err(quatpolar::Error::NotHermitian { .. })
    ));
    assert!(matches!(
        HForm::new(QMatrix::from_real(&[&[1.0, 1.0], &[1.0, 1.0]]), &tol()),
        Err(quatpolar::Error::SingularForm { .. })
    ));
    assert_eq!(form(QMatrix::from_real_diag(&[1.0, -1.0, -3.0])).signature(), (1, 2));
}

fn random_form(seed: u64, n: usize) -> Option<HForm> {
    let mut rng = Seed(seed).rng();
    let g = gaussian_matrix(&mut rng, n, n);
    HForm::new((&g + &g.conj_transpose()).hermitian_part(), &tol()).ok()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sesquilinearity(seed in any::<u64>(), n in 1..5usize) {
        let h = random_form(seed, n);
        prop_assume!(h.is_some());
        let h = h.unwrap();
        let mut rng = Seed(seed).derive(1).rng();
        let x = gaussian_matrix(&mut rng, n, 1);
        let y = gaussian_matrix(&mut rng, n, 1);
        let a = gaussian_quaternion(&mut rng);
        let xy = inner_product(&x, &y, &h).unwrap();
        let scale = 1e-12 * (1.0 + h.matrix().frobenius_norm() * x.frobenius_norm() * y.frobenius_norm() * (1.0 + a.abs()));
        prop_assert!((xy.conj() - inner_product(&y, &x, &h).unwrap()).abs() <= scale);
        prop_assert!((inner_product(&x.mul_scalar_right(a), &y, &h).unwrap() - xy * a).abs() <= scale);
        prop_assert!((inner_product(&x, &y.mul_scalar_right(a), &h).unwrap() - a.conj() * xy).abs() <= scale);
    }

    #[test]
    fn adjoint_is_characterized_by_the_form(seed in any::<u64>(), n in 1..5usize) {
        let h = random_form(seed, n);
        prop_assume!(h.is_some());
        let h = h.unwrap();
        let mut rng = Seed(seed).derive(2).rng();
        let a = gaussian_matrix(&mut rng, n, n);
        let x = gaussian_matrix(&mut rng, n, 1);
        let y = gaussian_matrix(&mut rng, n, 1);
        let adj = h_adjoint(&a, &h, &h).unwrap();
        let lhs = inner_product(&(&a * &x), &y, &h).unwrap();
        let rhs = inner_product(&x, &(&adj * &y), &h).unwrap();
        let cond = 1.0 / quatpolar::quat::linalg::inverse_condition(h.matrix());
        prop_assert!((lhs - rhs).abs() <= 1e-10 * cond * (1.0 + lhs.abs()) * (1.0 + a.frobenius_norm()));
    }
}
