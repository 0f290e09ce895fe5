//! Hamiltonians, Gibbs states, Bohr-frequency structure and jump sets.
//!
//! The inverse temperature is absorbed into `H`, so the target state is
//! `ρ ∝ exp(−H)`. Eigenvalues are stored ascending and all downstream code works
//! with eigen-indices, never with ordering assumptions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix, EigenSystem, ONE, ZERO};
use crate::serial::MatrixJson;

/// Largest supported `‖H‖`; beyond it `ρ^{±1/2}` loses double-precision headroom.
pub const MAX_H_NORM: f64 = 60.0;

/// Largest supported Hilbert-space dimension (superoperators stay ≤ 4096²).
pub const MAX_DIM: usize = 64;

/// A Hermitian matrix together with its eigensystem and clustered Bohr
/// frequencies `ν = E_i − E_j`.
#[derive(Debug, Clone)]
pub struct HamiltonianModel {
    h: CMatrix,
    eig: EigenSystem,
    norm: f64,
    cluster_tol: f64,
    /// Representative frequency of each cluster, ascending.
    bohr: Vec<f64>,
    /// Cluster index of the pair (i, j), stored row-major.
    pair_cluster: Vec<usize>,
    members: Vec<Vec<(usize, usize)>>,
    /// Energy level (degenerate-eigenvalue cluster) of each eigen-index.
    level_of: Vec<usize>,
    levels: Vec<f64>,
    notes: Vec<String>,
}

impl HamiltonianModel {
    /// Build with the default cluster tolerance `1e-9 · max(1, ‖H‖)`.
    pub fn new(h: CMatrix) -> Result<Self> {
        Self::build(h, None)
    }

    pub fn with_cluster_tol(h: CMatrix, cluster_tol: f64) -> Result<Self> {
        if !(cluster_tol >= 0.0 && cluster_tol.is_finite()) {
            return Err(Error::Invalid(format!("cluster tolerance {cluster_tol} must be finite and >= 0")));
        }
        Self::build(h, Some(cluster_tol))
    }

    pub fn diagonal(energies: &[f64]) -> Result<Self> {
        Self::new(linalg::diag_real(energies))
    }

    fn build(h: CMatrix, cluster_tol: Option<f64>) -> Result<Self> {
        linalg::check_hermitian(&h)?;
        let d = h.nrows();
        if d == 0 {
            return Err(Error::Shape("Hamiltonian must have dimension >= 1".into()));
        }
        if d > MAX_DIM {
            return Err(Error::Size(format!(
                "dimension {d} exceeds {MAX_DIM} (superoperators would exceed 4096x4096)"
            )));
        }
        let h = linalg::hermitian_part(&h);
        let eig = linalg::herm_eig_unchecked(&h);
        let norm = eig.values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if norm > MAX_H_NORM {
            return Err(Error::Size(format!(
                "||H|| = {norm:.3} exceeds the supported maximum {MAX_H_NORM}"
            )));
        }
        let cluster_tol = cluster_tol.unwrap_or(1e-9 * norm.max(1.0));

        // Bohr clusters by single linkage on the sorted differences. The
        // difference set is exactly antisymmetric, so the clusters come in
        // mirror pairs; representatives are symmetrized to make ν ↦ −ν exact.
        let mut diffs: Vec<(f64, usize, usize)> = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                diffs.push((eig.values[i] - eig.values[j], i, j));
            }
        }
        diffs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut members: Vec<Vec<(usize, usize)>> = Vec::new();
        let mut sums: Vec<f64> = Vec::new();
        let mut last = f64::NEG_INFINITY;
        for &(nu, i, j) in &diffs {
            if members.is_empty() || nu - last > cluster_tol {
                members.push(Vec::new());
                sums.push(0.0);
            }
            members.last_mut().unwrap().push((i, j));
            *sums.last_mut().unwrap() += nu;
            last = nu;
        }
        let mut pair_cluster = vec![0usize; d * d];
        for (k, m) in members.iter().enumerate() {
            for &(i, j) in m {
                pair_cluster[i * d + j] = k;
            }
        }
        let n = members.len();
        let mut bohr = vec![0.0; n];
        for k in 0..n {
            let (i, j) = members[k][0];
            let mirror = pair_cluster[j * d + i];
            let mean_k = sums[k] / members[k].len() as f64;
            if mirror == k {
                bohr[k] = 0.0;
            } else if k < mirror {
                let mean_m = sums[mirror] / members[mirror].len() as f64;
                bohr[k] = 0.5 * (mean_k - mean_m);
                bohr[mirror] = -bohr[k];
            }
        }

        // Energy levels (used by the two-sided construction).
        let mut level_of = vec![0usize; d];
        let mut levels: Vec<f64> = Vec::new();
        let mut level_members: Vec<Vec<usize>> = Vec::new();
        for i in 0..d {
            let e = eig.values[i];
            if i == 0 || e - eig.values[i - 1] > cluster_tol {
                levels.push(0.0);
                level_members.push(Vec::new());
            }
            let l = levels.len() - 1;
            level_members[l].push(i);
            level_of[i] = l;
        }
        for (l, m) in level_members.iter().enumerate() {
            levels[l] = m.iter().map(|&i| eig.values[i]).sum::<f64>() / m.len() as f64;
        }

        let mut notes = Vec::new();
        for k in 1..n {
            let gap = bohr[k] - bohr[k - 1];
            if gap < 10.0 * cluster_tol {
                notes.push(format!(
                    "Bohr clusters {:.6e} and {:.6e} are closer than 10*cluster_tol ({:.1e})",
                    bohr[k - 1],
                    bohr[k],
                    cluster_tol
                ));
            }
        }

        Ok(Self { h, eig, norm, cluster_tol, bohr, pair_cluster, members, level_of, levels, notes })
    }

    pub fn dim(&self) -> usize {
        self.h.nrows()
    }

    pub fn h(&self) -> &CMatrix {
        &self.h
    }

    pub fn eig(&self) -> &EigenSystem {
        &self.eig
    }

    pub fn energies(&self) -> &[f64] {
        &self.eig.values
    }

    /// Operator norm `‖H‖ = max |E_i|`.
    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn cluster_tol(&self) -> f64 {
        self.cluster_tol
    }

    /// Representative Bohr frequencies, ascending.
    pub fn bohr_frequencies(&self) -> &[f64] {
        &self.bohr
    }

    pub fn cluster_members(&self, k: usize) -> &[(usize, usize)] {
        &self.members[k]
    }

    /// Cluster index of the eigen-index pair `(i, j)`.
    pub fn cluster_of(&self, i: usize, j: usize) -> usize {
        self.pair_cluster[i * self.dim() + j]
    }

    /// Clustered frequency of the pair `(i, j)`.
    pub fn nu(&self, i: usize, j: usize) -> f64 {
        self.bohr[self.cluster_of(i, j)]
    }

    pub fn level_energy(&self, i: usize) -> f64 {
        self.levels[self.level_of[i]]
    }

    pub fn level_of(&self, i: usize) -> usize {
        self.level_of[i]
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    /// Diagnostics such as near-coincident Bohr clusters.
    pub fn notes(&self) -> &[String] {
        &self.notes
    }

    /// Index of the cluster whose representative matches `nu` within the
    /// cluster tolerance.
    pub fn find_cluster(&self, nu: f64) -> Result<usize> {
        let tol = self.cluster_tol.max(1e-300);
        self.bohr
            .iter()
            .position(|&b| (b - nu).abs() <= tol)
            .ok_or(Error::UnknownFrequency { nu })
    }

    pub fn to_eigenbasis(&self, m: &CMatrix) -> CMatrix {
        self.eig.to_basis(m)
    }

    pub fn from_eigenbasis(&self, m: &CMatrix) -> CMatrix {
        self.eig.from_basis(m)
    }

    /// `M_ν = Σ_{(i,j) ∈ cluster ν} ⟨ψ_i|M|ψ_j⟩ |ψ_i⟩⟨ψ_j|`.
    pub fn component_at_frequency(&self, m: &CMatrix, nu: f64) -> Result<CMatrix> {
        self.check_dim(m)?;
        let k = self.find_cluster(nu)?;
        Ok(self.component_of_cluster(&self.to_eigenbasis(m), k))
    }

    /// Component of cluster `k`, given `m` already in the eigenbasis.
    pub fn component_of_cluster(&self, m_eig: &CMatrix, k: usize) -> CMatrix {
        let d = self.dim();
        let mut part = linalg::zeros(d, d);
        for &(i, j) in &self.members[k] {
            part[(i, j)] = m_eig[(i, j)];
        }
        self.from_eigenbasis(&part)
    }

    /// All components `(ν, M_ν)` with `M_ν ≠ 0`.
    pub fn components(&self, m: &CMatrix) -> Result<Vec<(f64, CMatrix)>> {
        self.check_dim(m)?;
        let m_eig = self.to_eigenbasis(m);
        let mut out = Vec::new();
        for k in 0..self.bohr.len() {
            if self.members[k].iter().any(|&(i, j)| m_eig[(i, j)] != ZERO) {
                out.push((self.bohr[k], self.component_of_cluster(&m_eig, k)));
            }
        }
        Ok(out)
    }

    /// `Σ_ν w(ν) M_ν`, evaluated entrywise in the eigenbasis.
    pub fn schur_apply<F: Fn(f64) -> num_complex::Complex64>(&self, m: &CMatrix, w: F) -> CMatrix {
        let d = self.dim();
        let weights: Vec<_> = self.bohr.iter().map(|&nu| w(nu)).collect();
        let mut m_eig = self.to_eigenbasis(m);
        for i in 0..d {
            for j in 0..d {
                m_eig[(i, j)] *= weights[self.cluster_of(i, j)];
            }
        }
        self.from_eigenbasis(&m_eig)
    }

    pub fn check_dim(&self, m: &CMatrix) -> Result<()> {
        let d = self.dim();
        if m.nrows() != d || m.ncols() != d {
            return Err(Error::Shape(format!(
                "operator is {}x{}, Hamiltonian is {d}x{d}",
                m.nrows(),
                m.ncols()
            )));
        }
        Ok(())
    }
}

/// The Gibbs state `ρ = e^{−H}/Z` with cached fractional powers.
#[derive(Debug, Clone)]
pub struct GibbsState {
    rho: CMatrix,
    probs: Vec<f64>,
    vectors: CMatrix,
    pow_quarter: CMatrix,
    pow_neg_quarter: CMatrix,
    pow_half: CMatrix,
    pow_neg_half: CMatrix,
    shift: f64,
    condition: f64,
    notes: Vec<String>,
}

impl GibbsState {
    pub fn new(model: &HamiltonianModel) -> Self {
        let eig = model.eig();
        let shift = eig.values[0];
        let weights: Vec<f64> = eig.values.iter().map(|&e| (-(e - shift)).exp()).collect();
        let z: f64 = weights.iter().sum();
        let probs: Vec<f64> = weights.iter().map(|w| w / z).collect();
        let pmin = probs.iter().cloned().fold(f64::INFINITY, f64::min);
        let pmax = probs.iter().cloned().fold(0.0, f64::max);
        let condition = pmax / pmin;
        let power = |p: f64| power_from(eig, &probs, p);
        let mut notes = Vec::new();
        if condition > 1e14 {
            notes.push(format!("ill-conditioned Gibbs state: condition number {condition:.3e} > 1e14"));
        }
        GibbsState {
            rho: power(1.0),
            pow_quarter: power(0.25),
            pow_neg_quarter: power(-0.25),
            pow_half: power(0.5),
            pow_neg_half: power(-0.5),
            probs,
            vectors: eig.vectors.clone(),
            shift,
            condition,
            notes,
        }
    }

    pub fn dim(&self) -> usize {
        self.rho.nrows()
    }

    pub fn rho(&self) -> &CMatrix {
        &self.rho
    }

    /// Eigenvalues of ρ in the Hamiltonian's (ascending-energy) eigen-order.
    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    pub fn eigenvectors(&self) -> &CMatrix {
        &self.vectors
    }

    pub fn pow_quarter(&self) -> &CMatrix {
        &self.pow_quarter
    }

    pub fn pow_neg_quarter(&self) -> &CMatrix {
        &self.pow_neg_quarter
    }

    pub fn sqrt(&self) -> &CMatrix {
        &self.pow_half
    }

    pub fn inv_sqrt(&self) -> &CMatrix {
        &self.pow_neg_half
    }

    /// `E_min`, subtracted before exponentiating.
    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn condition_number(&self) -> f64 {
        self.condition
    }

    pub fn notes(&self) -> &[String] {
        &self.notes
    }
}

fn power_from(eig: &EigenSystem, probs: &[f64], p: f64) -> CMatrix {
    let d = probs.len();
    let mut scaled = eig.vectors.clone();
    for j in 0..d {
        scaled.column_mut(j).scale_mut(probs[j].powf(p));
    }
    &scaled * eig.vectors.adjoint()
}

pub fn gibbs(model: &HamiltonianModel) -> GibbsState {
    GibbsState::new(model)
}

/// A labeled list of jump operators.
#[derive(Debug, Clone)]
pub struct JumpSet {
    pub labels: Vec<String>,
    pub ops: Vec<CMatrix>,
    pub self_adjoint: bool,
}

impl JumpSet {
    pub fn new(labels: Vec<String>, ops: Vec<CMatrix>) -> Self {
        let self_adjoint = ops.iter().all(|a| {
            let ad = a.adjoint();
            ops.iter()
                .any(|b| linalg::max_abs(&(&ad - b)) <= 1e-12 * linalg::max_abs(a).max(1.0))
        });
        JumpSet { labels, ops, self_adjoint }
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }
}

pub fn pauli_x() -> CMatrix {
    linalg::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]])
}

pub fn pauli_y() -> CMatrix {
    let mut m = linalg::zeros(2, 2);
    m[(0, 1)] = c(0.0, -1.0);
    m[(1, 0)] = c(0.0, 1.0);
    m
}

pub fn pauli_z() -> CMatrix {
    linalg::diag_real(&[1.0, -1.0])
}

/// `op` acting on `site` of an `l`-qubit chain; site 0 is the leftmost
/// (most significant) tensor factor.
pub fn embed_site(op: &CMatrix, site: usize, l: usize) -> CMatrix {
    let mut out = CMatrix::from_element(1, 1, ONE);
    for s in 0..l {
        let factor = if s == site { op.clone() } else { linalg::identity(op.nrows()) };
        out = out.kronecker(&factor);
    }
    out
}

/// The 3L single-site Pauli jumps `σ_x, σ_y, σ_z` on every site.
pub fn pauli_jump_set(l: usize) -> JumpSet {
    let mut labels = Vec::with_capacity(3 * l);
    let mut ops = Vec::with_capacity(3 * l);
    for site in 0..l {
        for (name, p) in [("X", pauli_x()), ("Y", pauli_y()), ("Z", pauli_z())] {
            labels.push(format!("{name}{site}"));
            ops.push(embed_site(&p, site, l));
        }
    }
    JumpSet { labels, ops, self_adjoint: true }
}

/// Single-site jumps of one Pauli type only (e.g. `Z` on every site).
pub fn single_pauli_jump_set(l: usize, which: char) -> Result<JumpSet> {
    let p = match which {
        'X' | 'x' => pauli_x(),
        'Y' | 'y' => pauli_y(),
        'Z' | 'z' => pauli_z(),
        other => return Err(Error::Invalid(format!("unknown Pauli '{other}'"))),
    };
    let labels = (0..l).map(|s| format!("{}{s}", which.to_ascii_uppercase())).collect();
    let ops = (0..l).map(|s| embed_site(&p, s, l)).collect();
    Ok(JumpSet { labels, ops, self_adjoint: true })
}

/// Nearest-neighbour hopping jumps `|i⟩⟨i+1| + |i+1⟩⟨i|` on a d-level system.
pub fn hopping_jump_set(d: usize) -> JumpSet {
    let mut labels = Vec::new();
    let mut ops = Vec::new();
    for i in 0..d.saturating_sub(1) {
        labels.push(format!("hop{i}"));
        ops.push(linalg::ketbra(d, i, i + 1) + linalg::ketbra(d, i + 1, i));
    }
    JumpSet { labels, ops, self_adjoint: true }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Ising,
    Heisenberg,
    Diagonal,
    Matrix,
}

/// Explicit entries for `diagonal` (a list of energies) or `matrix` models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entries {
    Vector(Vec<f64>),
    Real(Vec<Vec<f64>>),
    Complex(MatrixJson),
}

fn default_beta() -> f64 {
    1.0
}

fn default_j() -> f64 {
    1.0
}

/// Model descriptor, as accepted on the command line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub model: ModelKind,
    #[serde(rename = "L", default)]
    pub l: Option<usize>,
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(rename = "J", default = "default_j")]
    pub j: f64,
    #[serde(default)]
    pub hx: f64,
    #[serde(default)]
    pub hz: f64,
    #[serde(default)]
    pub periodic: bool,
    #[serde(default)]
    pub entries: Option<Entries>,
}

impl ModelSpec {
    pub fn ising(l: usize, beta: f64, j: f64, hx: f64, hz: f64, periodic: bool) -> Self {
        ModelSpec { model: ModelKind::Ising, l: Some(l), beta, j, hx, hz, periodic, entries: None }
    }

    pub fn heisenberg(l: usize, beta: f64, j: f64, hx: f64, hz: f64, periodic: bool) -> Self {
        ModelSpec { model: ModelKind::Heisenberg, l: Some(l), beta, j, hx, hz, periodic, entries: None }
    }

    pub fn diagonal(energies: Vec<f64>, beta: f64) -> Self {
        ModelSpec {
            model: ModelKind::Diagonal,
            l: None,
            beta,
            j: 1.0,
            hx: 0.0,
            hz: 0.0,
            periodic: false,
            entries: Some(Entries::Vector(energies)),
        }
    }

    /// Parse a JSON descriptor or one of the shorthands `ising-L<n>` /
    /// `heisenberg-L<n>` (unit couplings, `hx = 1`, open chain, β = 1).
    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim();
        for (prefix, kind) in [("ising-L", ModelKind::Ising), ("heisenberg-L", ModelKind::Heisenberg)] {
            if let Some(rest) = t.strip_prefix(prefix) {
                let l: usize = rest
                    .parse()
                    .map_err(|_| Error::Invalid(format!("bad chain length in '{t}'")))?;
                let mut spec = ModelSpec::ising(l, 1.0, 1.0, 1.0, 0.0, false);
                spec.model = kind;
                return Ok(spec);
            }
        }
        serde_json::from_str(t).map_err(|e| Error::Invalid(format!("model descriptor: {e}")))
    }

    /// Number of qubits when the model is a chain or has dimension 2^L.
    pub fn sites(&self) -> Option<usize> {
        match self.model {
            ModelKind::Ising | ModelKind::Heisenberg => self.l,
            _ => self.dim().ok().and_then(|d| {
                if d.is_power_of_two() {
                    Some(d.trailing_zeros() as usize)
                } else {
                    None
                }
            }),
        }
    }

    pub fn dim(&self) -> Result<usize> {
        match self.model {
            ModelKind::Ising | ModelKind::Heisenberg => {
                let l = self.chain_length()?;
                Ok(1usize << l)
            }
            ModelKind::Diagonal | ModelKind::Matrix => Ok(self.entries_matrix()?.nrows()),
        }
    }

    fn chain_length(&self) -> Result<usize> {
        let l = self.l.ok_or_else(|| Error::Invalid("chain models need \"L\"".into()))?;
        if l == 0 {
            return Err(Error::Invalid("\"L\" must be >= 1".into()));
        }
        if l > 6 {
            return Err(Error::Size(format!(
                "L = {l} gives d^2 = {} > 4096; dense superoperators are limited to L <= 6",
                1u64 << (2 * l)
            )));
        }
        Ok(l)
    }

    fn entries_matrix(&self) -> Result<CMatrix> {
        let entries = self
            .entries
            .as_ref()
            .ok_or_else(|| Error::Invalid("model needs \"entries\"".into()))?;
        match (self.model, entries) {
            (ModelKind::Diagonal, Entries::Vector(v)) => Ok(linalg::diag_real(v)),
            (ModelKind::Matrix, Entries::Real(rows)) => {
                let n = rows.len();
                if rows.iter().any(|r| r.len() != n) {
                    return Err(Error::Shape("\"entries\" must be a square matrix".into()));
                }
                Ok(CMatrix::from_fn(n, n, |i, j| c(rows[i][j], 0.0)))
            }
            (ModelKind::Matrix, Entries::Complex(m)) => m.to_matrix(),
            _ => Err(Error::Invalid(
                "diagonal models take a list of energies; matrix models a square matrix".into(),
            )),
        }
    }

    /// The dimensionless model Hamiltonian before scaling by β.
    pub fn raw_hamiltonian(&self) -> Result<CMatrix> {
        match self.model {
            ModelKind::Ising | ModelKind::Heisenberg => {
                let l = self.chain_length()?;
                let d = 1usize << l;
                let (x, y, z) = (pauli_x(), pauli_y(), pauli_z());
                let mut h = linalg::zeros(d, d);
                let mut bonds: Vec<(usize, usize)> = (0..l.saturating_sub(1)).map(|s| (s, s + 1)).collect();
                if self.periodic && l > 2 {
                    bonds.push((l - 1, 0));
                }
                let couplers: Vec<&CMatrix> = match self.model {
                    ModelKind::Ising => vec![&z],
                    _ => vec![&x, &y, &z],
                };
                for &(a, b) in &bonds {
                    for p in &couplers {
                        h += embed_site(p, a, l) * embed_site(p, b, l) * c(self.j, 0.0);
                    }
                }
                for s in 0..l {
                    h += embed_site(&x, s, l) * c(self.hx, 0.0);
                    h += embed_site(&z, s, l) * c(self.hz, 0.0);
                }
                Ok(h)
            }
            _ => self.entries_matrix(),
        }
    }

    /// `β · H_model`.
    pub fn hamiltonian_matrix(&self) -> Result<CMatrix> {
        if !self.beta.is_finite() {
            return Err(Error::Invalid("beta must be finite".into()));
        }
        Ok(self.raw_hamiltonian()? * c(self.beta, 0.0))
    }

    pub fn with_beta(&self, beta: f64) -> Self {
        ModelSpec { beta, ..self.clone() }
    }
}

/// Build `β·H_model` as a [`HamiltonianModel`].
pub fn lattice_hamiltonian(spec: &ModelSpec) -> Result<HamiltonianModel> {
    HamiltonianModel::new(spec.hamiltonian_matrix()?)
}
