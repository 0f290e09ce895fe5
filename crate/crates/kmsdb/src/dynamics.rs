//! Completing a detailed-balanced CP transition part `𝒯′` into dynamics: the
//! Lindbladian `𝒯′ − ½{D,·} − i[C,·]` with `D = 𝒯′†[I]`, and quantum channels
//! with an exact, Taylor-expanded, or recursively built rejection part.

use serde::{Deserialize, Serialize};

use crate::analysis;
use crate::balance::{s_map, s_minus, s_plus};
use crate::cpmap::{self, CPMap};
use crate::error::{Error, Result};
use crate::hamiltonian::{GibbsState, HamiltonianModel};
use crate::linalg::{self, c, CMatrix, I};

/// Relative detailed-balance tolerance required of transition parts.
pub const BALANCE_TOL: f64 = 1e-8;

/// Computable upper surrogate `s = 1 + (1/π) ln(1 + ‖H‖/2)` for `‖𝒮±‖_{∞→∞}`.
pub fn s_surrogate(h_norm: f64) -> f64 {
    1.0 + (1.0 + h_norm / 2.0).ln() / std::f64::consts::PI
}

fn require_balanced(t: &CPMap, h: &HamiltonianModel, rho: &GibbsState) -> Result<()> {
    if t.dim() != h.dim() || rho.dim() != h.dim() {
        return Err(Error::Shape(format!(
            "transition part has dimension {}, Hamiltonian {}, Gibbs state {}",
            t.dim(),
            h.dim(),
            rho.dim()
        )));
    }
    let residual = cpmap::db_residual(t, rho);
    let tol = BALANCE_TOL * t.norm().max(1.0);
    if residual > tol {
        return Err(Error::Unbalanced { residual, tol });
    }
    Ok(())
}

/// A KMS detailed-balanced Lindbladian.
#[derive(Debug, Clone)]
pub struct Lindbladian {
    pub transition: CPMap,
    /// `D = 𝒯′†[I]`.
    pub decay: CMatrix,
    /// Traceless Hermitian coherent term `C = i 𝒮[D]`.
    pub coherent: CMatrix,
    pub superop: CMatrix,
}

impl Lindbladian {
    pub fn dim(&self) -> usize {
        self.transition.dim()
    }

    pub fn apply(&self, x: &CMatrix) -> CMatrix {
        linalg::apply_superop(&self.superop, x)
    }

    /// `‖𝓛†[I]‖`, zero for a trace-preserving generator.
    pub fn trace_residual(&self) -> f64 {
        let id = linalg::identity(self.dim());
        linalg::op_norm(&linalg::apply_superop(&self.superop.adjoint(), &id))
    }
}

/// Lindbladian with the detailed-balance-preserving coherent term.
pub fn lindblad_from_cp(t: &CPMap, h: &HamiltonianModel, rho: &GibbsState) -> Result<Lindbladian> {
    require_balanced(t, h, rho)?;
    let d = t.dim();
    let decay = t.trace_operator();
    let mut coherent = linalg::hermitian_part(&(s_map(&decay, h) * I));
    let shift = linalg::trace(&coherent) / c(d as f64, 0.0);
    for i in 0..d {
        coherent[(i, i)] -= shift;
    }
    let id = linalg::identity(d);
    let anti = linalg::kron(&decay, &id) + linalg::kron(&id, &decay.transpose());
    let comm = linalg::kron(&coherent, &id) - linalg::kron(&id, &coherent.transpose());
    let superop = t.superop() - anti * c(0.5, 0.0) - comm * I;
    Ok(Lindbladian { transition: t.clone(), decay, coherent, superop })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TraceFix {
    None,
    Sqrt,
    Db,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Provenance {
    ExactK,
    TaylorK { order: usize },
    Recursive { levels: usize, trace_fix: TraceFix },
}

/// A quantum channel `𝒬 = 𝒯′ + Σ K[·]K†` with the rejection Kraus operators
/// listed separately.
#[derive(Debug, Clone)]
pub struct Channel {
    pub map: CPMap,
    pub transition: CPMap,
    pub reject: Vec<CMatrix>,
    pub provenance: Provenance,
    pub notes: Vec<String>,
}

impl Channel {
    fn assemble(transition: &CPMap, reject: Vec<CMatrix>, provenance: Provenance) -> Result<Self> {
        let map = transition.with_extra_kraus(&reject)?;
        Ok(Channel { map, transition: transition.clone(), reject, provenance, notes: Vec::new() })
    }

    pub fn dim(&self) -> usize {
        self.map.dim()
    }

    /// `‖𝒬†[I] − I‖`.
    pub fn trace_residual(&self) -> f64 {
        cpmap::cptp_check(&self.map).trace_residual
    }
}

fn check_normalized(d_op: &CMatrix) -> Result<()> {
    let top = linalg::herm_eig_unchecked(d_op).values.last().copied().unwrap_or(0.0);
    if top > 1.0 + 1e-10 {
        return Err(Error::Normalization { norm: top, suggested_scale: 1.0 / top });
    }
    Ok(())
}

/// `√(√ρ P √ρ) ρ^{−1/2}` for a PSD `P` commuting appropriately with the
/// construction (the detailed-balanced square root).
fn balanced_root(p: &CMatrix, rho: &GibbsState) -> Result<CMatrix> {
    let inner = linalg::hermitian_part(&(rho.sqrt() * p * rho.sqrt()));
    Ok(linalg::psd_sqrt(&inner, None)? * rho.inv_sqrt())
}

/// Rejection Kraus operator `K = √(√ρ(I − 𝒯′†[I])√ρ) ρ^{−1/2}`.
pub fn reject_exact(t: &CPMap, h: &HamiltonianModel, rho: &GibbsState) -> Result<CMatrix> {
    require_balanced(t, h, rho)?;
    let d_op = t.trace_operator();
    check_normalized(&d_op)?;
    balanced_root(&(linalg::identity(t.dim()) - d_op), rho)
}

pub fn channel_exact(t: &CPMap, h: &HamiltonianModel, rho: &GibbsState) -> Result<Channel> {
    let k = reject_exact(t, h, rho)?;
    Channel::assemble(t, vec![k], Provenance::ExactK)
}

/// The terms `∇^{(k)}[O]`, `k = 1..=order`:
/// `∇^{(1)} = O`, `∇^{(k)} = Σ_{p=1}^{k−1} 𝒮⁺[∇^{(p)}] 𝒮⁻[∇^{(k−p)}]`.
pub fn nabla_terms(o: &CMatrix, h: &HamiltonianModel, order: usize) -> Vec<CMatrix> {
    let mut terms: Vec<CMatrix> = Vec::with_capacity(order);
    let mut plus: Vec<CMatrix> = Vec::with_capacity(order);
    let mut minus: Vec<CMatrix> = Vec::with_capacity(order);
    for k in 1..=order {
        let term = if k == 1 {
            o.clone()
        } else {
            let mut acc = linalg::zeros(o.nrows(), o.ncols());
            for p in 1..k {
                acc += &plus[p - 1] * &minus[k - p - 1];
            }
            acc
        };
        plus.push(s_plus(&term, h));
        minus.push(s_minus(&term, h));
        terms.push(term);
    }
    terms
}

/// Taylor coefficients `a_k` of `1 − √(1 − x) = Σ_k a_k x^k`.
pub fn sqrt_taylor_coefficient(k: usize) -> f64 {
    assert!(k >= 1, "coefficients start at k = 1");
    let mut a = 0.5;
    for j in 1..k {
        a *= (j as f64 - 0.5) / (j as f64 + 1.0);
    }
    a
}

/// Bound `Σ_{k>order} a_k x^k / (2s)` with `x = 4 s² ‖O‖` on the distance
/// between the truncated and exact rejection operators.
pub fn taylor_error_bound(order: usize, o_norm: f64, s: f64) -> f64 {
    let x = 4.0 * s * s * o_norm;
    if x >= 1.0 {
        return f64::INFINITY;
    }
    let mut a = sqrt_taylor_coefficient(order + 1);
    let mut term = a * x.powi(order as i32 + 1);
    let mut sum: f64 = 0.0;
    let mut k = order + 1;
    while term > 1e-18 * sum.max(f64::MIN_POSITIVE) && k < order + 100_000 {
        sum += term;
        a *= (k as f64 - 0.5) / (k as f64 + 1.0);
        term = a * x.powi(k as i32 + 1);
        k += 1;
    }
    sum / (2.0 * s)
}

/// Order `⌊log₂(1/ε)⌋` that guarantees accuracy ε under the norm premise.
pub fn taylor_order_for(eps: f64) -> usize {
    (1.0 / eps).log2().floor().max(1.0) as usize
}

/// Truncated Taylor series `K ≈ I − Σ_{k≤order} 𝒮⁻[∇^{(k)}[O]]` with
/// `O = 𝒯′†[I]`; requires `‖O‖ ≤ 1/(4s²)`.
pub fn reject_taylor(t: &CPMap, h: &HamiltonianModel, rho: &GibbsState, order: usize) -> Result<CMatrix> {
    require_balanced(t, h, rho)?;
    if order == 0 {
        return Err(Error::Invalid("Taylor order must be at least 1".into()));
    }
    let o = t.trace_operator();
    let s = s_surrogate(h.norm());
    let o_norm = linalg::hermitian_norm(&o);
    let limit = 1.0 / (4.0 * s * s);
    if o_norm > limit {
        return Err(Error::Precondition(format!(
            "Taylor rejection needs ||T'^dag[I]|| <= 1/(4 s^2) = {limit:.6e}, got {o_norm:.6e}"
        )));
    }
    let mut k = linalg::identity(t.dim());
    for term in nabla_terms(&o, h, order) {
        k -= s_minus(&term, h);
    }
    Ok(k)
}

pub fn channel_taylor(t: &CPMap, h: &HamiltonianModel, rho: &GibbsState, order: usize) -> Result<Channel> {
    let k = reject_taylor(t, h, rho, order)?;
    let mut ch = Channel::assemble(t, vec![k], Provenance::TaylorK { order })?;
    let s = s_surrogate(h.norm());
    let bound = taylor_error_bound(order, linalg::hermitian_norm(&t.trace_operator()), s);
    ch.notes.push(format!("truncation bound on ||K - K_exact||: {bound:.3e}"));
    Ok(ch)
}

/// The sequence `B₁ = 𝒯′†[I]`, `B_{k+1} = 𝒮⁺[B_k] 𝒮⁻[B_k]`, returned as
/// `[B₁, …, B_{levels+1}]`.
pub fn b_sequence(t: &CPMap, h: &HamiltonianModel, levels: usize) -> Vec<CMatrix> {
    let mut seq = vec![t.trace_operator()];
    for _ in 0..levels {
        let b = seq.last().expect("non-empty");
        let next = s_plus(b, h) * s_minus(b, h);
        seq.push(next);
    }
    seq
}

/// `c_k = 2^{−k/2}`.
pub fn recursive_c(k: usize) -> f64 {
    2f64.powf(-(k as f64) / 2.0)
}

/// `b_k = 2^{2^k − 1}`, so `b_0 = 1`.
pub fn recursive_b(k: usize) -> f64 {
    2f64.powf(2f64.powi(k as i32) - 1.0)
}

/// Recursive rejection family `K_k = c_k (I − b_k 𝒮⁻[B_k])`, `k = 1..=ℓ`,
/// plus an optional trace-restoring last operator.
pub fn channel_recursive(
    t: &CPMap,
    h: &HamiltonianModel,
    rho: &GibbsState,
    levels: usize,
    trace_fix: TraceFix,
) -> Result<Channel> {
    require_balanced(t, h, rho)?;
    let s = s_surrogate(h.norm());
    let b1 = t.trace_operator();
    let lambda = linalg::hermitian_norm(&b1) * s * s;
    if lambda >= 0.25 {
        return Err(Error::Precondition(format!(
            "recursive rejection needs ||T'^dag[I]|| s^2 < 1/4, got {lambda:.6e} (s = {s:.6})"
        )));
    }
    let d = t.dim();
    let id = linalg::identity(d);
    let seq = b_sequence(t, h, levels);
    let mut reject = Vec::with_capacity(levels + 1);
    for k in 1..=levels {
        let kk = (&id - s_minus(&seq[k - 1], h) * c(recursive_b(k), 0.0)) * c(recursive_c(k), 0.0);
        reject.push(kk);
    }
    let b_last = recursive_b(levels);
    let rest = linalg::hermitian_part(&(&id - &seq[levels] * c(b_last * b_last, 0.0)));
    let scale = c(2f64.powf(-(levels as f64) / 2.0), 0.0);
    let lowest = linalg::herm_eig_unchecked(&rest).values[0];
    match trace_fix {
        TraceFix::None => {}
        TraceFix::Sqrt | TraceFix::Db => {
            if lowest < -1e-10 {
                return Err(Error::LevelTooShallow { eigenvalue: lowest });
            }
            let root = if trace_fix == TraceFix::Sqrt {
                linalg::psd_sqrt(&rest, Some(1e-10))?
            } else {
                balanced_root(&rest, rho)?
            };
            reject.push(root * scale);
        }
    }
    let mut ch = Channel::assemble(t, reject, Provenance::Recursive { levels, trace_fix })?;
    let defect = 2f64.powf(-(levels as f64)) * b_last * b_last * linalg::hermitian_norm(&seq[levels]);
    ch.notes.push(format!("lambda = {lambda:.3e}; truncation trace defect 2^-l b_l^2 ||B_(l+1)|| = {defect:.3e}"));
    if trace_fix == TraceFix::Sqrt {
        ch.notes.push(format!(
            "sqrt trace fix does not preserve detailed balance; residual {:.3e}",
            cpmap::db_residual(&ch.map, rho)
        ));
    }
    Ok(ch)
}

/// `Σ_{k≤ℓ} K_k†K_k` minus its telescoped closed form
/// `(1 − 2^{−ℓ})I − B₁ + 2^{−ℓ} b_ℓ² B_{ℓ+1}`, in operator norm.
pub fn telescoping_residual(ch: &Channel, seq: &[CMatrix], levels: usize) -> f64 {
    let d = ch.dim();
    let mut sum = linalg::zeros(d, d);
    for k in ch.reject.iter().take(levels) {
        sum += k.adjoint() * k;
    }
    let b = recursive_b(levels);
    let closed = linalg::identity(d) * c(1.0 - 2f64.powf(-(levels as f64)), 0.0) - &seq[0]
        + &seq[levels] * c(2f64.powf(-(levels as f64)) * b * b, 0.0);
    linalg::op_norm(&(sum - closed))
}

/// Comparison of a channel's gap with that of the Lindbladian built from
/// its transition part.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapComparison {
    pub gap_channel: f64,
    pub gap_lindbladian: f64,
    pub holds: bool,
    pub notes: Vec<String>,
}

pub const GAP_COMPARE_TOL: f64 = 1e-9;

/// `gap(𝒬) ≥ gap(𝓛^{(1)})`, where `𝓛^{(1)}` is the Lindbladian of `𝒬`'s
/// transition part.
pub fn gap_compare(q: &Channel, l1: &Lindbladian, rho: &GibbsState) -> Result<GapComparison> {
    let gq = analysis::spectral_gap(&analysis::QuantumDynamics::Channel(q.map.clone()), rho)?;
    let gl = analysis::spectral_gap(&analysis::QuantumDynamics::Lindbladian(l1.superop.clone()), rho)?;
    let mut notes = gq.notes.clone();
    notes.extend(gl.notes.iter().cloned());
    Ok(GapComparison {
        gap_channel: gq.gap,
        gap_lindbladian: gl.gap,
        holds: gq.gap >= gl.gap - GAP_COMPARE_TOL,
        notes,
    })
}

/// Diamond-norm surrogate `(‖A‖ + ‖B‖) ‖A − B‖` for the distance between
/// `A[·]A†` and `B[·]B†`.
pub fn kraus_difference_bound(a: &CMatrix, b: &CMatrix) -> f64 {
    (linalg::op_norm(a) + linalg::op_norm(b)) * linalg::op_norm(&(a - b))
}
