//! Completely positive maps, KMS detailed-balance residuals, discriminants,
//! trace-preservation and ergodicity checks.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::GibbsState;
use crate::linalg::{self, c, CMatrix, CVector, I};

/// A CP map `X ↦ Σ_a A^a X A^a†` stored both as Kraus operators and as its
/// superoperator matrix `𝓣 = Σ_a A^a ⊗ conj(A^a)`.
///
/// When built from a superoperator the stored matrix is kept verbatim and the
/// Kraus list is recovered from the Choi matrix.
#[derive(Debug, Clone)]
pub struct CPMap {
    dim: usize,
    kraus: Vec<CMatrix>,
    superop: CMatrix,
}

impl CPMap {
    pub fn from_kraus(kraus: Vec<CMatrix>) -> Result<Self> {
        let d = kraus
            .first()
            .map(|k| k.nrows())
            .ok_or_else(|| Error::Shape("a Kraus list needs at least one operator; use CPMap::zero".into()))?;
        Self::from_kraus_dim(d, kraus)
    }

    pub fn from_kraus_dim(d: usize, kraus: Vec<CMatrix>) -> Result<Self> {
        for k in &kraus {
            if k.nrows() != d || k.ncols() != d {
                return Err(Error::Shape(format!(
                    "Kraus operator is {}x{}, expected {d}x{d}",
                    k.nrows(),
                    k.ncols()
                )));
            }
            linalg::check_finite(k)?;
        }
        let superop = superop_of_kraus(d, &kraus);
        Ok(CPMap { dim: d, kraus, superop })
    }

    /// Build from a superoperator matrix whose Choi matrix is PSD (up to the
    /// clamp tolerance `1e-10 · Tr(Choi)`); Kraus operators come from the Choi
    /// eigendecomposition.
    pub fn from_superop(superop: CMatrix) -> Result<Self> {
        let n = linalg::check_square(&superop)?;
        linalg::check_finite(&superop)?;
        let d = (n as f64).sqrt().round() as usize;
        if d * d != n {
            return Err(Error::Shape(format!("superoperator size {n} is not a perfect square")));
        }
        let kraus = kraus_from_choi(&choi_of_superop(&superop, d), d)?;
        Ok(CPMap { dim: d, kraus, superop })
    }

    pub fn zero(d: usize) -> Self {
        CPMap { dim: d, kraus: Vec::new(), superop: linalg::zeros(d * d, d * d) }
    }

    pub fn identity(d: usize) -> Self {
        CPMap::from_kraus_dim(d, vec![linalg::identity(d)]).expect("identity is well formed")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    pub fn kraus_count(&self) -> usize {
        self.kraus.len()
    }

    pub fn superop(&self) -> &CMatrix {
        &self.superop
    }

    pub fn apply(&self, x: &CMatrix) -> CMatrix {
        linalg::apply_superop(&self.superop, x)
    }

    /// Heisenberg picture `𝒯†[X]`.
    pub fn apply_adjoint(&self, x: &CMatrix) -> CMatrix {
        linalg::apply_superop(&self.superop.adjoint(), x)
    }

    /// `𝒯†[I] = Σ_a A^a† A^a`, computed from the superoperator.
    pub fn trace_operator(&self) -> CMatrix {
        linalg::hermitian_part(&self.apply_adjoint(&linalg::identity(self.dim)))
    }

    pub fn choi(&self) -> CMatrix {
        choi_of_superop(&self.superop, self.dim)
    }

    /// Smallest eigenvalue of the Choi matrix.
    pub fn choi_min_eig(&self) -> f64 {
        if self.dim == 0 {
            return 0.0;
        }
        let choi = linalg::hermitian_part(&self.choi());
        linalg::herm_eig_unchecked(&choi).values[0]
    }

    /// `s · 𝒯` for `s ≥ 0` (Kraus operators scaled by `√s`).
    pub fn scaled(&self, s: f64) -> Result<Self> {
        if !(s >= 0.0 && s.is_finite()) {
            return Err(Error::Invalid(format!("CP maps can only be scaled by finite s >= 0, got {s}")));
        }
        let r = c(s.sqrt(), 0.0);
        Ok(CPMap {
            dim: self.dim,
            kraus: self.kraus.iter().map(|k| k * r).collect(),
            superop: &self.superop * c(s, 0.0),
        })
    }

    pub fn sum(&self, other: &CPMap) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::Shape(format!("cannot add maps of dimensions {} and {}", self.dim, other.dim)));
        }
        let mut kraus = self.kraus.clone();
        kraus.extend(other.kraus.iter().cloned());
        Ok(CPMap { dim: self.dim, kraus, superop: &self.superop + &other.superop })
    }

    /// Append Kraus operators, updating the superoperator incrementally.
    pub fn with_extra_kraus(&self, extra: &[CMatrix]) -> Result<Self> {
        let add = CPMap::from_kraus_dim(self.dim, extra.to_vec())?;
        self.sum(&add)
    }

    /// The Hilbert–Schmidt adjoint map `𝒯†` (Kraus operators `A^a†`).
    pub fn adjoint_map(&self) -> Self {
        CPMap {
            dim: self.dim,
            kraus: self.kraus.iter().map(|k| k.adjoint()).collect(),
            superop: self.superop.adjoint(),
        }
    }

    /// `‖𝓣 − 𝓣†‖`, zero for self-adjoint maps.
    pub fn self_adjoint_defect(&self) -> f64 {
        linalg::hermitian_norm(&((&self.superop - self.superop.adjoint()) * I))
    }

    pub fn is_self_adjoint(&self, rel_tol: f64) -> bool {
        self.self_adjoint_defect() <= rel_tol * self.norm().max(1.0)
    }

    /// Spectral norm of the superoperator matrix.
    pub fn norm(&self) -> f64 {
        linalg::op_norm(&self.superop)
    }
}

/// `Σ_a A ⊗ conj(A)`.
pub fn superop_of_kraus(d: usize, kraus: &[CMatrix]) -> CMatrix {
    let mut s = linalg::zeros(d * d, d * d);
    for a in kraus {
        s += linalg::kron(a, &a.map(|z| z.conj()));
    }
    s
}

/// Reshuffle `Choi[(i,k),(j,l)] = 𝓣[(i,j),(k,l)]`; equivalently
/// `Choi = Σ_a vec(A^a) vec(A^a)†`.
pub fn choi_of_superop(s: &CMatrix, d: usize) -> CMatrix {
    let n = d * d;
    let mut choi = linalg::zeros(n, n);
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                for l in 0..d {
                    choi[(i * d + k, j * d + l)] = s[(i * d + j, k * d + l)];
                }
            }
        }
    }
    choi
}

/// Inverse reshuffle of [`choi_of_superop`] (the reshuffle is an involution).
pub fn superop_of_choi(choi: &CMatrix, d: usize) -> CMatrix {
    choi_of_superop(choi, d)
}

/// Kraus operators `√λ · unvec(v)` from the Choi eigenpairs, discarding
/// eigenvalues below `1e-12 · Tr(Choi)`. Eigenvalues below
/// `−1e-10 · max(1, Tr Choi)` mean the map is not CP.
pub fn kraus_from_choi(choi: &CMatrix, d: usize) -> Result<Vec<CMatrix>> {
    let choi = linalg::hermitian_part(choi);
    let eig = linalg::herm_eig_unchecked(&choi);
    let tr: f64 = eig.values.iter().map(|v| v.max(0.0)).sum();
    let clamp = 1e-10 * tr.max(1.0);
    if let Some(&low) = eig.values.first() {
        if low < -clamp {
            return Err(Error::NotPsd { eigenvalue: low, clamp_tol: clamp });
        }
    }
    let keep = 1e-12 * tr;
    let mut kraus = Vec::new();
    for (idx, &lam) in eig.values.iter().enumerate().rev() {
        if lam <= keep || lam <= 0.0 {
            continue;
        }
        let v: CVector = eig.vectors.column(idx).into_owned() * c(lam.sqrt(), 0.0);
        kraus.push(linalg::unvec(&v, d, d)?);
    }
    Ok(kraus)
}

/// Superoperator of `X ↦ M X M`.
fn conj_superop(m: &CMatrix) -> CMatrix {
    linalg::sandwich_superop(m, m)
}

/// Discriminant `𝒟[·] = ρ^{−1/4} 𝓜[ρ^{1/4} · ρ^{1/4}] ρ^{−1/4}` of a
/// superoperator matrix; Hermitian exactly when `𝓜` is KMS detailed balanced.
pub fn discriminant_superop(superop: &CMatrix, rho: &GibbsState) -> CMatrix {
    let left = conj_superop(rho.pow_neg_quarter());
    let right = conj_superop(rho.pow_quarter());
    left * superop * right
}

pub fn discriminant(t: &CPMap, rho: &GibbsState) -> CMatrix {
    discriminant_superop(t.superop(), rho)
}

/// Inverse of [`discriminant_superop`].
pub fn from_discriminant(disc: &CMatrix, rho: &GibbsState) -> CMatrix {
    conj_superop(rho.pow_quarter()) * disc * conj_superop(rho.pow_neg_quarter())
}

/// `‖𝒟 − 𝒟†‖` (operator norm) for any superoperator matrix.
pub fn db_residual_superop(superop: &CMatrix, rho: &GibbsState) -> f64 {
    let disc = discriminant_superop(superop, rho);
    linalg::hermitian_norm(&((&disc - disc.adjoint()) * I))
}

pub fn db_residual(t: &CPMap, rho: &GibbsState) -> f64 {
    db_residual_superop(t.superop(), rho)
}

/// Residuals and spectral data of a construction.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub db_residual: f64,
    pub trace_residual: f64,
    pub cp_min_eig: f64,
    pub fixed_point_residual: f64,
    pub gap: Option<f64>,
    pub notes: Vec<String>,
}

/// Trace preservation and complete positivity of a would-be channel.
pub fn cptp_check(q: &CPMap) -> VerificationReport {
    let d = q.dim();
    let trace_residual = linalg::op_norm(&(q.trace_operator() - linalg::identity(d)));
    VerificationReport { trace_residual, cp_min_eig: q.choi_min_eig(), ..Default::default() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ergodicity {
    pub ergodic: bool,
    pub commutant_dim: usize,
}

/// Ergodicity via the commutant of the adjoint-closed Kraus set: the null space
/// of `G = Σ_A B_A† B_A` with `B_A = A ⊗ I − I ⊗ Aᵀ` (the matrix of `[A, ·]`).
pub fn ergodicity_check(t: &CPMap) -> Ergodicity {
    commutant_of(t.dim(), t.kraus())
}

pub fn commutant_of(d: usize, ops: &[CMatrix]) -> Ergodicity {
    let id = linalg::identity(d);
    let mut g = linalg::zeros(d * d, d * d);
    for a in ops {
        for op in [a.clone(), a.adjoint()] {
            let b = linalg::kron(&op, &id) - linalg::kron(&id, &op.transpose());
            g += b.adjoint() * &b;
        }
    }
    let eig = linalg::herm_eig_unchecked(&linalg::hermitian_part(&g));
    let top = eig.values.last().copied().unwrap_or(0.0).max(0.0);
    let commutant_dim = if top == 0.0 {
        d * d
    } else {
        eig.values.iter().filter(|&&v| v <= 1e-10 * top).count()
    };
    Ergodicity { ergodic: commutant_dim == 1, commutant_dim }
}

/// Operator-norm distance between two matrices.
pub fn op_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    linalg::op_norm(&(a - b))
}

/// Single-Kraus balance residual `‖ρ^{−1/4} K ρ^{1/4} − ρ^{1/4} K† ρ^{−1/4}‖`.
pub fn kraus_balance_residual(k: &CMatrix, rho: &GibbsState) -> f64 {
    let lhs = rho.pow_neg_quarter() * k * rho.pow_quarter();
    let rhs = rho.pow_quarter() * k.adjoint() * rho.pow_neg_quarter();
    linalg::op_norm(&(lhs - rhs))
}
