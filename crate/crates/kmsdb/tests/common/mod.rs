//! Shared fixtures for the integration tests.
#![allow(dead_code)]

use kmsdb::cpmap::CPMap;
use kmsdb::hamiltonian::{GibbsState, HamiltonianModel};
use kmsdb::linalg::{self, CMatrix};
use kmsdb::random;

/// A random Hamiltonian, its Gibbs state and a random self-adjoint map.
pub struct Fixture {
    pub h: HamiltonianModel,
    pub rho: GibbsState,
    pub t: CPMap,
}

pub fn fixture(seed: u64, d: usize) -> Fixture {
    let mut rng = random::rng(seed);
    let h = random::default_hamiltonian(&mut rng, d).unwrap();
    let rho = GibbsState::new(&h);
    let t = random::self_adjoint_map(&mut rng, d, 2).unwrap();
    Fixture { h, rho, t }
}

/// Two-level system `H = diag(−ε, ε)`.
pub fn qubit(eps: f64) -> (HamiltonianModel, GibbsState) {
    let h = HamiltonianModel::diagonal(&[-eps, eps]).unwrap();
    let rho = GibbsState::new(&h);
    (h, rho)
}

pub fn dist(a: &CMatrix, b: &CMatrix) -> f64 {
    linalg::max_abs(&(a - b))
}

/// Rescale a CP map so `‖𝒯†[I]‖ = target`.
pub fn normalized(t: &CPMap, target: f64) -> CPMap {
    let n = linalg::hermitian_norm(&t.trace_operator());
    t.scaled(target / n).unwrap()
}

pub fn assert_close(a: f64, b: f64, tol: f64) {
    assert!((a - b).abs() <= tol, "{a} vs {b} (tolerance {tol})");
}
