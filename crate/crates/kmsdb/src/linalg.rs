//! Dense complex linear algebra used throughout the crate.
//!
//! Vectorization convention: `vec` is row-major, `vec(X)[i*d + j] = X[(i, j)]`.
//! With this choice `vec(A X Bᵀ) = (A ⊗ B) vec(X)`, so the superoperator of
//! `X ↦ A X B†` is `A ⊗ conj(B)`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Relative tolerance used for Hermiticity checks at construction.
pub const HERMITIAN_TOL: f64 = 1e-12;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(d: usize) -> CMatrix {
    CMatrix::identity(d, d)
}

pub fn zeros(r: usize, c: usize) -> CMatrix {
    CMatrix::zeros(r, c)
}

/// Build a matrix from row-major real entries.
pub fn from_real_rows(rows: &[&[f64]]) -> CMatrix {
    let r = rows.len();
    let cols = rows.first().map_or(0, |row| row.len());
    CMatrix::from_fn(r, cols, |i, j| c(rows[i][j], 0.0))
}

pub fn diag_real(values: &[f64]) -> CMatrix {
    let d = values.len();
    CMatrix::from_fn(d, d, |i, j| if i == j { c(values[i], 0.0) } else { ZERO })
}

/// `|i⟩⟨j|` in dimension `d`.
pub fn ketbra(d: usize, i: usize, j: usize) -> CMatrix {
    let mut m = zeros(d, d);
    m[(i, j)] = ONE;
    m
}

pub fn check_finite(m: &CMatrix) -> Result<()> {
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let z = m[(i, j)];
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::NonFinite { row: i, col: j });
            }
        }
    }
    Ok(())
}

pub fn check_square(m: &CMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::Shape(format!(
            "expected a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(m.nrows())
}

pub fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Spectral (operator) norm: the largest singular value.
pub fn op_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().iter().cloned().fold(0.0, f64::max)
}

/// Trace norm: the sum of singular values.
pub fn trace_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().iter().sum()
}

pub fn trace(m: &CMatrix) -> C64 {
    m.diagonal().iter().sum()
}

/// max |M − M†|, entrywise.
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn is_hermitian(m: &CMatrix, rel_tol: f64) -> bool {
    m.nrows() == m.ncols() && hermiticity_defect(m) <= rel_tol * frobenius(m).max(1.0)
}

/// Validate a Hermitian-tagged matrix: square, finite, and Hermitian within
/// `1e-12 · max(1, ‖M‖_F)`.
pub fn check_hermitian(m: &CMatrix) -> Result<()> {
    check_square(m)?;
    check_finite(m)?;
    let defect = hermiticity_defect(m);
    if defect > HERMITIAN_TOL * frobenius(m).max(1.0) {
        return Err(Error::SymmetryViolation { residual: defect });
    }
    Ok(())
}

pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * c(0.5, 0.0)
}

pub fn anti_hermitian_part(m: &CMatrix) -> CMatrix {
    (m - m.adjoint()) * c(0.5, 0.0)
}

/// Eigen-decomposition of a Hermitian matrix with ascending eigenvalues.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `V diag(f(E)) V†`.
    pub fn apply<F: Fn(f64) -> f64>(&self, f: F) -> CMatrix {
        let d = self.dim();
        let mut scaled = self.vectors.clone();
        for j in 0..d {
            let fj = f(self.values[j]);
            scaled.column_mut(j).scale_mut(fj);
        }
        &scaled * self.vectors.adjoint()
    }

    /// `V diag(f(E)) V†` for a complex-valued spectral function.
    pub fn apply_complex<F: Fn(f64) -> C64>(&self, f: F) -> CMatrix {
        let d = self.dim();
        let mut scaled = self.vectors.clone();
        for j in 0..d {
            let fj = f(self.values[j]);
            for i in 0..d {
                scaled[(i, j)] *= fj;
            }
        }
        &scaled * self.vectors.adjoint()
    }

    pub fn reconstruct(&self) -> CMatrix {
        self.apply(|x| x)
    }

    /// `V† M V`: express `m` in the eigenbasis.
    pub fn to_basis(&self, m: &CMatrix) -> CMatrix {
        self.vectors.adjoint() * m * &self.vectors
    }

    /// `V M V†`: bring `m` back from the eigenbasis.
    pub fn from_basis(&self, m: &CMatrix) -> CMatrix {
        &self.vectors * m * self.vectors.adjoint()
    }
}

/// Hermitian eigendecomposition, eigenvalues sorted ascending.
pub fn herm_eig(m: &CMatrix) -> Result<EigenSystem> {
    check_hermitian(m)?;
    Ok(herm_eig_unchecked(&hermitian_part(m)))
}

/// Same as [`herm_eig`] but skips validation; the caller guarantees the input
/// is exactly Hermitian (e.g. it came from [`hermitian_part`]).
pub fn herm_eig_unchecked(m: &CMatrix) -> EigenSystem {
    let d = m.nrows();
    if d == 0 {
        return EigenSystem { values: vec![], vectors: zeros(0, 0) };
    }
    let eig = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = CMatrix::from_fn(d, d, |i, j| eig.eigenvectors[(i, order[j])]);
    EigenSystem { values, vectors }
}

/// Spectral calculus `f(M)` for Hermitian `M`.
pub fn matrix_func<F: Fn(f64) -> f64>(m: &CMatrix, f: F) -> Result<CMatrix> {
    let eig = herm_eig(m)?;
    for &e in &eig.values {
        if !f(e).is_finite() {
            return Err(Error::Domain { eigenvalue: e });
        }
    }
    Ok(eig.apply(f))
}

/// Default clamp tolerance for [`psd_sqrt`]: `1e-10 · ‖P‖`.
pub fn default_clamp_tol(p: &CMatrix) -> f64 {
    1e-10 * op_norm(p)
}

/// Square root of a positive semidefinite matrix. Eigenvalues in
/// `[-clamp_tol, 0)` are treated as zero; anything more negative is an error.
pub fn psd_sqrt(p: &CMatrix, clamp_tol: Option<f64>) -> Result<CMatrix> {
    check_hermitian(p)?;
    let eig = herm_eig_unchecked(&hermitian_part(p));
    let tol = clamp_tol.unwrap_or_else(|| 1e-10 * eig.values.iter().fold(0.0f64, |a, v| a.max(v.abs())));
    if let Some(&lowest) = eig.values.first() {
        if lowest < -tol {
            return Err(Error::NotPsd { eigenvalue: lowest, clamp_tol: tol });
        }
    }
    Ok(eig.apply(|x| x.max(0.0).sqrt()))
}

/// Singular value decomposition `M = U Σ W†` with Σ descending.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: CMatrix,
    pub sigma: Vec<f64>,
    pub w: CMatrix,
}

impl Svd {
    pub fn reconstruct(&self) -> CMatrix {
        let k = self.sigma.len();
        let mut us = self.u.clone();
        for j in 0..k {
            us.column_mut(j).scale_mut(self.sigma[j]);
        }
        us * self.w.adjoint()
    }
}

pub fn svd(m: &CMatrix) -> Svd {
    let k = m.nrows().min(m.ncols());
    let dec = m.clone().svd(true, true);
    let u = dec.u.expect("left singular vectors requested");
    let w = dec.v_t.expect("right singular vectors requested").adjoint();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| dec.singular_values[b].total_cmp(&dec.singular_values[a]));
    Svd {
        u: CMatrix::from_fn(u.nrows(), k, |i, j| u[(i, order[j])]),
        sigma: order.iter().map(|&j| dec.singular_values[j]).collect(),
        w: CMatrix::from_fn(w.nrows(), k, |i, j| w[(i, order[j])]),
    }
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Row-major vectorization.
pub fn vec(m: &CMatrix) -> CVector {
    let (r, cols) = m.shape();
    CVector::from_fn(r * cols, |k, _| m[(k / cols, k % cols)])
}

pub fn unvec(v: &CVector, rows: usize, cols: usize) -> Result<CMatrix> {
    if v.len() != rows * cols {
        return Err(Error::Shape(format!(
            "cannot reshape a vector of length {} into {rows}x{cols}",
            v.len()
        )));
    }
    Ok(CMatrix::from_fn(rows, cols, |i, j| v[i * cols + j]))
}

/// Superoperator of `X ↦ L X R`.
pub fn sandwich_superop(l: &CMatrix, r: &CMatrix) -> CMatrix {
    kron(l, &r.transpose())
}

/// Apply a d²×d² superoperator matrix to a d×d operator.
pub fn apply_superop(s: &CMatrix, x: &CMatrix) -> CMatrix {
    let d = x.nrows();
    let v = s * vec(x);
    CMatrix::from_fn(d, d, |i, j| v[i * d + j])
}

/// Matrix exponential by scaling and squaring with a Padé core.
pub fn expm(m: &CMatrix) -> CMatrix {
    m.exp()
}

/// Eigenvalues of a general square matrix (complex Schur form).
pub fn eigenvalues(m: &CMatrix) -> Result<Vec<C64>> {
    if m.is_empty() {
        return Ok(vec![]);
    }
    // The unbounded Schur iteration can stall on highly degenerate input.
    let schur = m.clone().try_schur(f64::EPSILON, SCHUR_MAX_ITER).ok_or_else(|| {
        Error::Accuracy(format!("Schur iteration did not converge in {SCHUR_MAX_ITER} sweeps"))
    })?;
    let (_, t) = schur.unpack();
    Ok(t.diagonal().iter().cloned().collect())
}

const SCHUR_MAX_ITER: usize = 10_000;

/// Dimension of the null space of `M`, counting singular values below
/// `rel_tol · σ_max`.
pub fn null_space_dim(m: &CMatrix, rel_tol: f64) -> usize {
    let sv = m.clone().singular_values();
    let top = sv.iter().cloned().fold(0.0, f64::max);
    let rank = sv.iter().filter(|&&s| s > rel_tol * top.max(f64::MIN_POSITIVE)).count();
    m.ncols() - rank
}

/// Trace distance-style norm for Hermitian matrices: the sum of absolute
/// eigenvalues (cheaper than an SVD).
pub fn hermitian_trace_norm(m: &CMatrix) -> f64 {
    herm_eig_unchecked(&hermitian_part(m)).values.iter().map(|v| v.abs()).sum()
}

/// Largest absolute eigenvalue of a Hermitian matrix.
pub fn hermitian_norm(m: &CMatrix) -> f64 {
    herm_eig_unchecked(&hermitian_part(m))
        .values
        .iter()
        .fold(0.0, |a: f64, v| a.max(v.abs()))
}

/// Anticommutator `{A, B}`.
pub fn anticomm(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b + b * a
}

/// Commutator `[A, B]`.
pub fn comm(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}
