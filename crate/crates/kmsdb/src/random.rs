//! Seeded random instances (ChaCha8): Hamiltonians, self-adjoint CP maps,
//! operators and states.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::cpmap::CPMap;
use crate::error::Result;
use crate::hamiltonian::HamiltonianModel;
use crate::linalg::{self, c, CMatrix};

pub type Rand = ChaCha8Rng;

pub fn rng(seed: u64) -> Rand {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn ginibre(rng: &mut Rand, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c(re, im) * std::f64::consts::FRAC_1_SQRT_2
    })
}

/// GUE matrix rescaled to operator norm `target`.
pub fn gue_with_norm(rng: &mut Rand, d: usize, target: f64) -> CMatrix {
    let g = ginibre(rng, d, d);
    let h = linalg::hermitian_part(&g);
    let n = linalg::hermitian_norm(&h);
    if n == 0.0 {
        return h;
    }
    h * c(target / n, 0.0)
}

/// Random Hamiltonian with `‖H‖` uniform in `[lo, hi]`.
pub fn hamiltonian(rng: &mut Rand, d: usize, lo: f64, hi: f64) -> Result<HamiltonianModel> {
    let target = rng.random_range(lo..=hi);
    HamiltonianModel::new(gue_with_norm(rng, d, target))
}

/// Random Hamiltonian with the default norm range `[0.5, 5]`.
pub fn default_hamiltonian(rng: &mut Rand, d: usize) -> Result<HamiltonianModel> {
    hamiltonian(rng, d, 0.5, 5.0)
}

/// Operator with operator norm one.
pub fn unit_matrix(rng: &mut Rand, d: usize) -> CMatrix {
    let a = ginibre(rng, d, d);
    let n = linalg::op_norm(&a);
    a * c(1.0 / n, 0.0)
}

/// Hermitian operator with operator norm one.
pub fn unit_hermitian(rng: &mut Rand, d: usize) -> CMatrix {
    gue_with_norm(rng, d, 1.0)
}

/// Self-adjoint CP map with Kraus set `{A_k, A_k†}`, `k < pairs`, each `A_k`
/// of operator norm `1/√(2·pairs)` (so `‖𝒯†[I]‖ ≤ 1`).
pub fn self_adjoint_map(rng: &mut Rand, d: usize, pairs: usize) -> Result<CPMap> {
    let scale = c(1.0 / (2.0 * pairs as f64).sqrt(), 0.0);
    let mut kraus = Vec::with_capacity(2 * pairs);
    for _ in 0..pairs {
        let a = unit_matrix(rng, d) * scale;
        kraus.push(a.adjoint());
        kraus.push(a);
    }
    CPMap::from_kraus_dim(d, kraus)
}

/// Random positive semidefinite matrix `G G†` of unit trace norm.
pub fn psd(rng: &mut Rand, d: usize) -> CMatrix {
    let g = ginibre(rng, d, d);
    let p = &g * g.adjoint();
    let t = linalg::trace(&p).re;
    linalg::hermitian_part(&(p * c(1.0 / t, 0.0)))
}

/// Random full-rank density matrix.
pub fn density(rng: &mut Rand, d: usize) -> CMatrix {
    psd(rng, d)
}
