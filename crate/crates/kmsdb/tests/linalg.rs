mod common;

use common::{assert_close, dist};
use kmsdb::linalg::{self, c, CMatrix, C64};
use kmsdb::{random, Error};

#[test]
fn vec_of_sandwich_is_kronecker_product() {
    let mut rng = random::rng(1);
    let (a, b, x) = (random::ginibre(&mut rng, 3, 3), random::ginibre(&mut rng, 3, 3), random::ginibre(&mut rng, 3, 3));
    let lhs = linalg::vec(&(&a * &x * b.transpose()));
    let rhs = linalg::kron(&a, &b) * linalg::vec(&x);
    assert!((lhs - rhs).iter().all(|z| z.norm() < 1e-12));
    let s = linalg::sandwich_superop(&a, &b);
    assert!(dist(&linalg::apply_superop(&s, &x), &(&a * &x * &b)) < 1e-12);
}

#[test]
fn unvec_inverts_vec_and_checks_length() {
    let mut rng = random::rng(2);
    let m = random::ginibre(&mut rng, 2, 3);
    assert_eq!(linalg::unvec(&linalg::vec(&m), 2, 3).unwrap(), m);
    assert!(matches!(linalg::unvec(&linalg::vec(&m), 3, 3), Err(Error::Shape(_))));
}

#[test]
fn psd_sqrt_squares_back() {
    let mut rng = random::rng(3);
    let p = random::psd(&mut rng, 5);
    let r = linalg::psd_sqrt(&p, None).unwrap();
    assert!(dist(&(&r * &r), &p) < 1e-13);
    assert!(linalg::is_hermitian(&r, 1e-12));
}

#[test]
fn psd_sqrt_rejects_negative_and_clamps_roundoff() {
    let neg = linalg::diag_real(&[1.0, -0.1]);
    assert!(matches!(linalg::psd_sqrt(&neg, None), Err(Error::NotPsd { .. })));
    let tiny = linalg::diag_real(&[1.0, -1e-14]);
    let r = linalg::psd_sqrt(&tiny, None).unwrap();
    assert_eq!(r[(1, 1)], c(0.0, 0.0));
}

#[test]
fn hermitian_checks_reject_bad_input() {
    let mut m = linalg::from_real_rows(&[&[1.0, 2.0], &[0.0, 1.0]]);
    assert!(matches!(linalg::check_hermitian(&m), Err(Error::SymmetryViolation { .. })));
    m[(0, 1)] = c(f64::NAN, 0.0);
    assert!(matches!(linalg::check_finite(&m), Err(Error::NonFinite { row: 0, col: 1 })));
    assert!(matches!(linalg::check_square(&linalg::zeros(2, 3)), Err(Error::Shape(_))));
}

#[test]
fn matrix_func_reports_domain_errors() {
    let m = linalg::diag_real(&[0.0, 1.0]);
    assert!(matches!(linalg::matrix_func(&m, |x| 1.0 / x), Err(Error::Domain { .. })));
    let e = linalg::matrix_func(&m, f64::exp).unwrap();
    assert_close(e[(1, 1)].re, 1f64.exp(), 1e-15);
}

#[test]
fn expm_matches_spectral_exponential() {
    let mut rng = random::rng(4);
    let h = random::gue_with_norm(&mut rng, 4, 2.0);
    let u = linalg::expm(&(&h * c(0.0, -0.7)));
    let eig = linalg::herm_eig(&h).unwrap();
    let v = eig.apply_complex(|e| C64::from_polar(1.0, -0.7 * e));
    assert!(dist(&u, &v) < 1e-12);
}

#[test]
fn norms_agree_with_singular_values() {
    let m = linalg::diag_real(&[3.0, -4.0, 0.5]);
    assert_close(linalg::op_norm(&m), 4.0, 1e-14);
    assert_close(linalg::trace_norm(&m), 7.5, 1e-14);
    assert_close(linalg::hermitian_trace_norm(&m), 7.5, 1e-14);
    assert_close(linalg::hermitian_norm(&m), 4.0, 1e-14);
    let mut rng = random::rng(5);
    let g = random::ginibre(&mut rng, 4, 4);
    let s = linalg::svd(&g);
    assert!(s.sigma.windows(2).all(|w| w[0] >= w[1]));
    assert!(dist(&s.reconstruct(), &g) < 1e-12);
}

#[test]
fn eigen_system_round_trips() {
    let mut rng = random::rng(6);
    let h = random::gue_with_norm(&mut rng, 5, 1.0);
    let eig = linalg::herm_eig(&h).unwrap();
    assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
    assert!(dist(&eig.reconstruct(), &h) < 1e-13);
    assert!(dist(&eig.from_basis(&eig.to_basis(&h)), &h) < 1e-13);
}

#[test]
fn null_space_counts_zero_singular_values() {
    let m = linalg::diag_real(&[1.0, 0.0, 2.0, 0.0]);
    assert_eq!(linalg::null_space_dim(&m, 1e-12), 2);
}

#[test]
fn commutators() {
    let x = kmsdb::hamiltonian::pauli_x();
    let z = kmsdb::hamiltonian::pauli_z();
    let y = kmsdb::hamiltonian::pauli_y();
    assert!(dist(&linalg::comm(&x, &z), &(&y * c(0.0, -2.0))) < 1e-15);
    assert!(linalg::max_abs(&linalg::anticomm(&x, &z)) < 1e-15);
    let _: CMatrix = linalg::identity(2);
}

#[test]
fn general_eigenvalues() {
    let m = linalg::from_real_rows(&[&[0.0, 1.0], &[-1.0, 0.0]]);
    let mut ev = linalg::eigenvalues(&m).unwrap();
    ev.sort_by(|a, b| a.im.total_cmp(&b.im));
    assert!((ev[0] - c(0.0, -1.0)).norm() < 1e-14);
    assert!((ev[1] - c(0.0, 1.0)).norm() < 1e-14);
    assert!(linalg::eigenvalues(&linalg::zeros(0, 0)).unwrap().is_empty());
}
