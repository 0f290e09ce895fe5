mod common;

use common::{assert_close, dist, qubit};
use kmsdb::cpmap::{self, CPMap};
use kmsdb::hamiltonian::{self, GibbsState, HamiltonianModel};
use kmsdb::linalg::{self, c};
use kmsdb::{random, Error};

#[test]
fn kraus_and_superoperator_agree() {
    let mut rng = random::rng(21);
    let t = random::self_adjoint_map(&mut rng, 3, 2).unwrap();
    let x = random::ginibre(&mut rng, 3, 3);
    let mut direct = linalg::zeros(3, 3);
    for a in t.kraus() {
        direct += a * &x * a.adjoint();
    }
    assert!(dist(&t.apply(&x), &direct) < 1e-13);
    let mut adj = linalg::zeros(3, 3);
    for a in t.kraus() {
        adj += a.adjoint() * &x * a;
    }
    assert!(dist(&t.apply_adjoint(&x), &adj) < 1e-13);
}

#[test]
fn choi_round_trip_and_kraus_recovery() {
    let mut rng = random::rng(22);
    let t = CPMap::from_kraus(vec![random::ginibre(&mut rng, 3, 3), random::ginibre(&mut rng, 3, 3)]).unwrap();
    let choi = t.choi();
    assert!(dist(&cpmap::superop_of_choi(&choi, 3), t.superop()) < 1e-14);
    let rebuilt = CPMap::from_superop(t.superop().clone()).unwrap();
    assert!(rebuilt.kraus_count() <= 2);
    let again = CPMap::from_kraus_dim(3, rebuilt.kraus().to_vec()).unwrap();
    assert!(dist(again.superop(), t.superop()) < 1e-12);
    assert!(t.choi_min_eig() > -1e-12);
}

#[test]
fn non_cp_superoperators_are_rejected() {
    // The transpose map is positive but not completely positive.
    let mut s = linalg::zeros(4, 4);
    for i in 0..2 {
        for j in 0..2 {
            s[(j * 2 + i, i * 2 + j)] = c(1.0, 0.0);
        }
    }
    assert!(matches!(CPMap::from_superop(s), Err(Error::NotPsd { .. })));
}

#[test]
fn davies_qubit_discriminant_is_hermitian() {
    // Hand-built Davies map: √γ components of X for H = diag(−ε, ε).
    let eps = 0.7f64;
    let (_, rho) = qubit(eps);
    let up = linalg::ketbra(2, 1, 0) * c((-eps).exp(), 0.0);
    let down = linalg::ketbra(2, 0, 1);
    let t = CPMap::from_kraus(vec![up, down]).unwrap();
    assert!(cpmap::db_residual(&t, &rho) < 1e-14);
    // The bare bit flip |1⟩⟨0| with rate 1 in both directions is not balanced.
    let flat = CPMap::from_kraus(vec![linalg::ketbra(2, 1, 0), linalg::ketbra(2, 0, 1)]).unwrap();
    assert!(cpmap::db_residual(&flat, &rho) > 0.1);
    let disc = cpmap::discriminant(&t, &rho);
    assert!(dist(&cpmap::from_discriminant(&disc, &rho), t.superop()) < 1e-14);
}

#[test]
fn balance_implies_fixed_point() {
    let eps = 0.4f64;
    let (_, rho) = qubit(eps);
    let up = linalg::ketbra(2, 1, 0) * c((-eps).exp(), 0.0);
    let down = linalg::ketbra(2, 0, 1);
    let t = CPMap::from_kraus(vec![up, down]).unwrap();
    let d = t.trace_operator();
    // 𝒯[ρ] = ½{D, ρ} for commuting D, so ρ is stationary for the Lindbladian.
    let lhs = t.apply(rho.rho());
    let rhs = linalg::anticomm(&d, rho.rho()) * c(0.5, 0.0);
    assert!(dist(&lhs, &rhs) < 1e-14);
}

#[test]
fn cptp_check_of_unitary_channel() {
    let mut rng = random::rng(23);
    let h = random::gue_with_norm(&mut rng, 3, 1.0);
    let u = linalg::expm(&(h * c(0.0, 1.0)));
    let q = CPMap::from_kraus(vec![u]).unwrap();
    let r = cpmap::cptp_check(&q);
    assert!(r.trace_residual < 1e-13);
    assert!(r.cp_min_eig > -1e-13);
}

#[test]
fn ergodicity_of_pauli_and_z_jumps() {
    let all = hamiltonian::pauli_jump_set(2);
    let e = cpmap::ergodicity_check(&CPMap::from_kraus(all.ops).unwrap());
    assert!(e.ergodic);
    assert_eq!(e.commutant_dim, 1);
    let z = hamiltonian::single_pauli_jump_set(2, 'Z').unwrap();
    let e = cpmap::ergodicity_check(&CPMap::from_kraus(z.ops).unwrap());
    assert!(!e.ergodic);
    assert_eq!(e.commutant_dim, 4);
}

#[test]
fn kraus_balance_condition() {
    let h = HamiltonianModel::diagonal(&[0.0, 1.0, 2.5]).unwrap();
    let rho = GibbsState::new(&h);
    let k = linalg::diag_real(&[0.3, 0.2, 0.9]);
    assert!(cpmap::kraus_balance_residual(&k, &rho) < 1e-15);
    let bad = linalg::ketbra(3, 0, 2);
    assert!(cpmap::kraus_balance_residual(&bad, &rho) > 0.1);
}

#[test]
fn scaling_summing_and_adjoints() {
    let mut rng = random::rng(24);
    let t = random::self_adjoint_map(&mut rng, 3, 1).unwrap();
    assert!(t.is_self_adjoint(1e-12));
    let a = CPMap::from_kraus(vec![random::ginibre(&mut rng, 3, 3)]).unwrap();
    assert!(!a.is_self_adjoint(1e-6));
    assert!(dist(a.adjoint_map().superop(), &a.superop().adjoint()) < 1e-15);
    let s = t.sum(&t.scaled(2.0).unwrap()).unwrap();
    assert!(dist(s.superop(), &(t.superop() * c(3.0, 0.0))) < 1e-13);
    assert!(t.scaled(-1.0).is_err());
    assert_close(CPMap::zero(3).norm(), 0.0, 0.0);
    assert!(t.sum(&CPMap::identity(2)).is_err());
}
