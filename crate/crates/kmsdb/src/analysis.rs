//! Spectral gaps from Hermitian discriminants, lattice constructions at
//! inverse temperature β, gap sweeps, and mixing simulations.

use serde::{Deserialize, Serialize};

use crate::balance::{self, OmegaWeight, TwoSidedWeight};
use crate::cpmap::{self, CPMap};
use crate::dynamics::{self, Channel, Lindbladian};
use crate::error::{Error, Result};
use crate::hamiltonian::{self, GibbsState, HamiltonianModel, JumpSet, ModelSpec};
use crate::linalg::{self, c, CMatrix, CVector};
use crate::profile::WeightProfile;

/// Relative detailed-balance tolerance for gap computations.
pub const GAP_BALANCE_TOL: f64 = 1e-8;

/// Top eigenvalues closer than this count as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-9;

/// Mixing threshold on the trace distance.
pub const MIXING_THRESHOLD: f64 = 1.0 / 3.0;

#[derive(Debug, Clone)]
pub enum QuantumDynamics {
    /// Generator superoperator `𝓛`.
    Lindbladian(CMatrix),
    Channel(CPMap),
}

impl QuantumDynamics {
    pub fn superop(&self) -> &CMatrix {
        match self {
            QuantumDynamics::Lindbladian(s) => s,
            QuantumDynamics::Channel(q) => q.superop(),
        }
    }

    pub fn is_channel(&self) -> bool {
        matches!(self, QuantumDynamics::Channel(_))
    }
}

impl From<&Lindbladian> for QuantumDynamics {
    fn from(l: &Lindbladian) -> Self {
        QuantumDynamics::Lindbladian(l.superop.clone())
    }
}

impl From<&Channel> for QuantumDynamics {
    fn from(q: &Channel) -> Self {
        QuantumDynamics::Channel(q.map.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub gap: f64,
    /// Largest discriminant eigenvalue (1 for a channel, 0 for a Lindbladian).
    pub top: f64,
    pub second: f64,
    /// Bendixson bound `‖(𝒟 − 𝒟†)/2‖` on the imaginary parts of the raw
    /// discriminant's eigenvalues.
    pub imag_bound: f64,
    pub notes: Vec<String>,
}

/// Spectral gap from the Hermitian discriminant: `1 − λ₂` for channels and
/// `−λ₂` for Lindbladians.
pub fn spectral_gap(dynamics: &QuantumDynamics, rho: &GibbsState) -> Result<GapReport> {
    let s = dynamics.superop();
    let n = linalg::check_square(s)?;
    if n != rho.dim() * rho.dim() {
        return Err(Error::Shape(format!("superoperator size {n} does not match dimension {}", rho.dim())));
    }
    let residual = cpmap::db_residual_superop(s, rho);
    let tol = GAP_BALANCE_TOL * linalg::op_norm(s).max(1.0);
    if residual > tol {
        return Err(Error::Unbalanced { residual, tol });
    }
    let disc = cpmap::discriminant_superop(s, rho);
    let herm = linalg::hermitian_part(&disc);
    let values = linalg::herm_eig_unchecked(&herm).values;
    let imag_bound = linalg::hermitian_norm(&((&disc - disc.adjoint()) * c(0.0, -0.5)));
    let top = values[n - 1];
    let mut notes = Vec::new();
    if n < 2 {
        notes.push("one-dimensional system: gap undefined, reported as 0".into());
        return Ok(GapReport { gap: 0.0, top, second: top, imag_bound, notes });
    }
    let second = values[n - 2];
    let raw = if dynamics.is_channel() { 1.0 - second } else { -second };
    let gap = if top - second <= DEGENERACY_TOL {
        notes.push(format!("degenerate top eigenvalue ({top:.6e}, {second:.6e}): not ergodic, gap 0"));
        0.0
    } else {
        raw
    };
    Ok(GapReport { gap, top, second, imag_bound, notes })
}

/// Balance constructions selectable by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Construction {
    Davies,
    Coherent,
    Oft,
    TwoSided,
    Interpolated,
}

impl Construction {
    pub const ALL: [Construction; 5] =
        [Construction::Davies, Construction::Coherent, Construction::Oft, Construction::TwoSided, Construction::Interpolated];

    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "davies" => Ok(Construction::Davies),
            "coherent" => Ok(Construction::Coherent),
            "oft" => Ok(Construction::Oft),
            "two-sided" => Ok(Construction::TwoSided),
            "interpolated" => Ok(Construction::Interpolated),
            other => Err(Error::Invalid(format!(
                "unknown construction '{other}' (expected davies, coherent, oft, two-sided, interpolated)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Construction::Davies => "davies",
            Construction::Coherent => "coherent",
            Construction::Oft => "oft",
            Construction::TwoSided => "two-sided",
            Construction::Interpolated => "interpolated",
        }
    }

    /// Profile used when none is given.
    pub fn default_profile(&self) -> WeightProfile {
        match self {
            Construction::Coherent => WeightProfile::sqrt_glauber(),
            _ => WeightProfile::metropolis(),
        }
    }

    /// Whether the construction uses the weight profile (OFT and two-sided
    /// use their frequency weights instead).
    pub fn uses_profile(&self) -> bool {
        matches!(self, Construction::Davies | Construction::Coherent | Construction::Interpolated)
    }

    /// Apply the construction. Davies takes the Davies-class form of the
    /// profile (`|f|²` for amplitudes), coherent the amplitude form (`√γ`).
    pub fn build(&self, t: &CPMap, h: &HamiltonianModel, profile: &WeightProfile, sigma: f64) -> Result<CPMap> {
        match self {
            Construction::Davies => balance::davies(t, h, &profile.as_davies()?),
            Construction::Coherent => balance::coherent(t, h, &profile.as_amplitude()?),
            Construction::Oft => balance::oft(t, h, sigma, &OmegaWeight::shifted_metropolis(sigma)),
            Construction::TwoSided => balance::two_sided(t, h, sigma, &TwoSidedWeight::exponential(sigma)),
            Construction::Interpolated => balance::interpolated(t, h, sigma, profile),
        }
    }
}

/// Jump-operator families for models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum JumpChoice {
    /// Single-site Paulis for qubit chains, nearest-level hopping otherwise.
    Default,
    Pauli,
    PauliZ,
    Hopping,
    None,
}

impl JumpChoice {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "default" => Ok(JumpChoice::Default),
            "pauli" => Ok(JumpChoice::Pauli),
            "pauli-z" | "z" => Ok(JumpChoice::PauliZ),
            "hopping" => Ok(JumpChoice::Hopping),
            "none" => Ok(JumpChoice::None),
            other => Err(Error::Invalid(format!(
                "unknown jump set '{other}' (expected default, pauli, pauli-z, hopping, none)"
            ))),
        }
    }

    pub fn jumps(&self, spec: &ModelSpec) -> Result<JumpSet> {
        let d = spec.dim()?;
        let qubits = qubit_count(d);
        let need_qubits = |what: &str| {
            qubits.ok_or_else(|| Error::Invalid(format!("{what} jumps need a dimension that is a power of two, got {d}")))
        };
        match self {
            JumpChoice::Default => Ok(match qubits {
                Some(l) if l >= 1 => hamiltonian::pauli_jump_set(l),
                _ => hamiltonian::hopping_jump_set(d),
            }),
            JumpChoice::Pauli => Ok(hamiltonian::pauli_jump_set(need_qubits("Pauli")?)),
            JumpChoice::PauliZ => hamiltonian::single_pauli_jump_set(need_qubits("Pauli")?, 'Z'),
            JumpChoice::Hopping => Ok(hamiltonian::hopping_jump_set(d)),
            JumpChoice::None => Ok(JumpSet::new(Vec::new(), Vec::new())),
        }
    }
}

fn qubit_count(d: usize) -> Option<usize> {
    if d.is_power_of_two() && d >= 2 {
        Some(d.trailing_zeros() as usize)
    } else {
        None
    }
}

/// `𝒯 = Σ_a A^a[·]A^a†` for a jump list.
pub fn jump_map(d: usize, ops: &[CMatrix]) -> Result<CPMap> {
    CPMap::from_kraus_dim(d, ops.to_vec())
}

/// A model together with its Gibbs state and jumps.
#[derive(Debug, Clone)]
pub struct Instance {
    pub spec: ModelSpec,
    pub h: HamiltonianModel,
    pub rho: GibbsState,
    pub jumps: JumpSet,
}

impl Instance {
    pub fn new(spec: &ModelSpec, jumps: JumpChoice) -> Result<Self> {
        let h = hamiltonian::lattice_hamiltonian(spec)?;
        let rho = GibbsState::new(&h);
        let jumps = jumps.jumps(spec)?;
        Ok(Instance { spec: spec.clone(), h, rho, jumps })
    }

    pub fn transition_map(&self) -> Result<CPMap> {
        jump_map(self.h.dim(), &self.jumps.ops)
    }
}

/// Continuous-time lattice dynamics: the construction applied to all jumps,
/// with no prefactor.
pub fn lattice_lindbladian(
    inst: &Instance,
    construction: Construction,
    profile: &WeightProfile,
    sigma: f64,
) -> Result<Lindbladian> {
    let t = if inst.jumps.is_empty() {
        CPMap::zero(inst.h.dim())
    } else {
        construction.build(&inst.transition_map()?, &inst.h, profile, sigma)?
    };
    dynamics::lindblad_from_cp(&t, &inst.h, &inst.rho)
}

/// Rejection scheme of discrete-time constructions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DiscreteScheme {
    Exact,
    Taylor { order: usize },
    Recursive { levels: usize },
}

impl DiscreteScheme {
    /// `exact`, `taylor:N` or `recursive:L`.
    pub fn parse(text: &str) -> Result<Self> {
        let bad = || Error::Invalid(format!("discrete scheme '{text}' must be exact, taylor:N or recursive:L"));
        match text.split_once(':') {
            None if text == "exact" => Ok(DiscreteScheme::Exact),
            Some(("taylor", n)) => Ok(DiscreteScheme::Taylor { order: n.parse().map_err(|_| bad())? }),
            Some(("recursive", n)) => Ok(DiscreteScheme::Recursive { levels: n.parse().map_err(|_| bad())? }),
            _ => Err(bad()),
        }
    }

    pub fn label(&self) -> String {
        match self {
            DiscreteScheme::Exact => "exact".into(),
            DiscreteScheme::Taylor { order } => format!("taylor:{order}"),
            DiscreteScheme::Recursive { levels } => format!("recursive:{levels}"),
        }
    }

    /// Largest admissible `‖𝒯′†[I]‖` for surrogate `s`.
    fn norm_limit(&self, s: f64) -> f64 {
        match self {
            DiscreteScheme::Exact => 1.0,
            DiscreteScheme::Taylor { .. } => 1.0 / (4.0 * s * s),
            DiscreteScheme::Recursive { .. } => 0.2 / (s * s),
        }
    }

    pub fn complete(&self, t: &CPMap, h: &HamiltonianModel, rho: &GibbsState) -> Result<Channel> {
        match *self {
            DiscreteScheme::Exact => dynamics::channel_exact(t, h, rho),
            DiscreteScheme::Taylor { order } => dynamics::channel_taylor(t, h, rho, order),
            DiscreteScheme::Recursive { levels } => {
                dynamics::channel_recursive(t, h, rho, levels, dynamics::TraceFix::Db)
            }
        }
    }
}

/// Scale a transition part down so `‖𝒯′†[I]‖` fits the scheme's premise,
/// returning the factor used (1 if none was needed).
fn fit_premise(t: &CPMap, limit: f64) -> Result<(CPMap, f64)> {
    let norm = linalg::hermitian_norm(&t.trace_operator());
    if norm > limit {
        // Aim just inside the limit so rounding cannot trip the strict check.
        let factor = limit * (1.0 - 1e-12) / norm;
        Ok((t.scaled(factor)?, factor))
    } else {
        Ok((t.clone(), 1.0))
    }
}

/// Discrete-time lattice channel
/// `𝒬 = (1/n) Σ_a complete(𝕊⟦A^a[·]A^a†⟧ / s²)`, `s = 1 + (1/π)ln(1 + ‖H‖/2)`.
/// Parts whose trace operator exceeds the scheme's premise are scaled down
/// (recorded in the notes).
pub fn lattice_channel(
    inst: &Instance,
    construction: Construction,
    profile: &WeightProfile,
    sigma: f64,
    scheme: DiscreteScheme,
) -> Result<(Channel, Vec<String>)> {
    let d = inst.h.dim();
    let n = inst.jumps.len();
    if n == 0 {
        let ch = scheme.complete(&CPMap::zero(d), &inst.h, &inst.rho)?;
        return Ok((ch, vec!["no jumps: identity channel".into()]));
    }
    let s = dynamics::s_surrogate(inst.h.norm());
    let mut notes = Vec::new();
    let mut total: Option<CPMap> = None;
    let mut transition: Option<CPMap> = None;
    let mut reject = Vec::new();
    for (label, a) in inst.jumps.labels.iter().zip(&inst.jumps.ops) {
        let part = construction.build(&jump_map(d, std::slice::from_ref(a))?, &inst.h, profile, sigma)?;
        let part = part.scaled(1.0 / (s * s))?;
        let (part, factor) = fit_premise(&part, scheme.norm_limit(s))?;
        if factor < 1.0 {
            notes.push(format!("part {label} scaled by {factor:.6e} to meet the {} premise", scheme.label()));
        }
        let ch = scheme.complete(&part, &inst.h, &inst.rho)?;
        let weighted = ch.map.scaled(1.0 / n as f64)?;
        let weighted_t = ch.transition.scaled(1.0 / n as f64)?;
        total = Some(match total {
            None => weighted,
            Some(acc) => acc.sum(&weighted)?,
        });
        transition = Some(match transition {
            None => weighted_t,
            Some(acc) => acc.sum(&weighted_t)?,
        });
        let r = c((1.0 / n as f64).sqrt(), 0.0);
        reject.extend(ch.reject.iter().map(|k| k * r));
    }
    let provenance = match scheme {
        DiscreteScheme::Exact => dynamics::Provenance::ExactK,
        DiscreteScheme::Taylor { order } => dynamics::Provenance::TaylorK { order },
        DiscreteScheme::Recursive { levels } => {
            dynamics::Provenance::Recursive { levels, trace_fix: dynamics::TraceFix::Db }
        }
    };
    let ch = Channel {
        map: total.expect("at least one jump"),
        transition: transition.expect("at least one jump"),
        reject,
        provenance,
        notes: notes.clone(),
    };
    Ok((ch, notes))
}

/// Canonical initial states: `|0…0⟩`, `|1…1⟩` (the last basis state) and the
/// uniform superposition `|+…+⟩`.
pub fn default_initial_states(d: usize) -> Vec<(String, CMatrix)> {
    let mut uniform = CVector::from_element(d, c(1.0 / (d as f64).sqrt(), 0.0));
    uniform.normalize_mut();
    let plus = &uniform * uniform.adjoint();
    vec![
        ("zeros".into(), linalg::ketbra(d, 0, 0)),
        ("ones".into(), linalg::ketbra(d, d - 1, d - 1)),
        ("plus".into(), plus),
    ]
}

/// Exact continuous evolution `e^{t𝓛}` of a balanced generator, diagonalized
/// through its Hermitian discriminant
/// `e^{t𝓛} = (ρ^{1/4}⊗ρ^{1/4*}) U e^{tΛ} U† (ρ^{−1/4}⊗ρ^{−1/4*})`.
#[derive(Debug, Clone)]
pub struct Evolution {
    left: CMatrix,
    right: CMatrix,
    values: Vec<f64>,
    vectors: CMatrix,
    d: usize,
}

impl Evolution {
    pub fn new(superop: &CMatrix, rho: &GibbsState) -> Result<Self> {
        let residual = cpmap::db_residual_superop(superop, rho);
        let tol = GAP_BALANCE_TOL * linalg::op_norm(superop).max(1.0);
        if residual > tol {
            return Err(Error::Unbalanced { residual, tol });
        }
        let disc = linalg::hermitian_part(&cpmap::discriminant_superop(superop, rho));
        let eig = linalg::herm_eig_unchecked(&disc);
        let left = linalg::sandwich_superop(rho.pow_neg_quarter(), rho.pow_neg_quarter());
        let right = linalg::sandwich_superop(rho.pow_quarter(), rho.pow_quarter());
        Ok(Evolution { left, right, values: eig.values, vectors: eig.vectors, d: rho.dim() })
    }

    pub fn apply(&self, t: f64, x: &CMatrix) -> CMatrix {
        let v = linalg::vec(x);
        let mut w = self.vectors.adjoint() * (&self.left * v);
        for (k, lam) in self.values.iter().enumerate() {
            w[k] *= c((t * lam).exp(), 0.0);
        }
        let out = &self.right * (&self.vectors * w);
        linalg::unvec(&out, self.d, self.d).expect("dimensions agree")
    }
}

/// Trace-norm distance `‖σ − ρ‖₁` for Hermitian arguments.
pub fn trace_distance(sigma: &CMatrix, rho: &CMatrix) -> f64 {
    linalg::hermitian_trace_norm(&(sigma - rho))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixingReport {
    pub times: Vec<f64>,
    pub labels: Vec<String>,
    /// `curves[s][k]`: distance of initial state `s` at `times[k]`.
    pub curves: Vec<Vec<f64>>,
    /// Channels only: distances of `(𝒬^t + 𝒬^{t+1})/2`.
    pub lazy: Option<Vec<Vec<f64>>>,
    /// First grid time at which every curve is ≤ 1/3.
    pub mixing_time: Option<f64>,
    /// Exponential decay rate fitted to the tail of the slowest curve.
    pub fitted_rate: Option<f64>,
    pub gap: Option<f64>,
    pub notes: Vec<String>,
}

fn first_mixing_time(times: &[f64], curves: &[Vec<f64>]) -> Option<f64> {
    (0..times.len()).find(|&k| curves.iter().all(|cv| cv[k] <= MIXING_THRESHOLD)).map(|k| times[k])
}

/// Least-squares slope of `−ln(distance)` over points with distance in
/// `[1e−9, 1e−2]` on the slowest curve.
fn fit_rate(times: &[f64], curves: &[Vec<f64>]) -> Option<f64> {
    let slowest: Vec<f64> = (0..times.len()).map(|k| curves.iter().map(|cv| cv[k]).fold(0.0, f64::max)).collect();
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(&slowest)
        .filter(|(_, &y)| (1e-9..=1e-2).contains(&y))
        .map(|(&t, &y)| (t, y.ln()))
        .collect();
    if pts.len() < 3 {
        return None;
    }
    let n = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / n, pts.iter().map(|p| p.1).sum::<f64>() / n);
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    Some(-sxy / sxx)
}

/// Distance-to-ρ curves. Lindbladians are evaluated at the given times;
/// channels at the integer steps `0..=steps`.
pub fn mixing_sim(
    dynamics: &QuantumDynamics,
    rho: &GibbsState,
    initial: &[(String, CMatrix)],
    times: &[f64],
) -> Result<MixingReport> {
    let gap = spectral_gap(dynamics, rho).ok().map(|g| g.gap);
    let labels: Vec<String> = initial.iter().map(|(l, _)| l.clone()).collect();
    let mut notes = Vec::new();
    let report = match dynamics {
        QuantumDynamics::Lindbladian(s) => {
            let evo = Evolution::new(s, rho)?;
            let curves: Vec<Vec<f64>> = initial
                .iter()
                .map(|(_, x)| times.iter().map(|&t| trace_distance(&evo.apply(t, x), rho.rho())).collect())
                .collect();
            MixingReport {
                mixing_time: first_mixing_time(times, &curves),
                fitted_rate: fit_rate(times, &curves),
                times: times.to_vec(),
                labels,
                curves,
                lazy: None,
                gap,
                notes: Vec::new(),
            }
        }
        QuantumDynamics::Channel(q) => {
            let steps = times.iter().cloned().fold(0.0, f64::max).ceil() as usize;
            let grid: Vec<f64> = (0..=steps).map(|k| k as f64).collect();
            let mut curves = Vec::new();
            let mut lazy = Vec::new();
            for (_, x) in initial {
                let mut cur = x.clone();
                let mut states = vec![cur.clone()];
                for _ in 0..=steps {
                    cur = q.apply(&cur);
                    states.push(cur.clone());
                }
                curves.push((0..=steps).map(|k| trace_distance(&states[k], rho.rho())).collect::<Vec<_>>());
                lazy.push(
                    (0..=steps)
                        .map(|k| {
                            let avg = (&states[k] + &states[k + 1]) * c(0.5, 0.0);
                            trace_distance(&avg, rho.rho())
                        })
                        .collect::<Vec<_>>(),
                );
            }
            notes.push("channel curves at integer steps".into());
            MixingReport {
                mixing_time: first_mixing_time(&grid, &curves),
                fitted_rate: fit_rate(&grid, &curves),
                times: grid,
                labels,
                curves,
                lazy: Some(lazy),
                gap,
                notes: Vec::new(),
            }
        }
    };
    Ok(MixingReport { notes, ..report })
}

/// Empirical mixing time of a Lindbladian on the grid `t = 0, 0.05, …, 40`,
/// stopping at the first crossing.
pub fn mixing_time_estimate(l: &CMatrix, rho: &GibbsState) -> Result<Option<f64>> {
    let evo = Evolution::new(l, rho)?;
    let initial = default_initial_states(rho.dim());
    for k in 0..=800 {
        let t = 0.05 * k as f64;
        let worst = initial
            .iter()
            .map(|(_, x)| trace_distance(&evo.apply(t, x), rho.rho()))
            .fold(0.0, f64::max);
        if worst <= MIXING_THRESHOLD {
            return Ok(Some(t));
        }
    }
    Ok(None)
}

/// Sweep configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepConfig {
    pub model: ModelSpec,
    pub construction: Construction,
    pub profile: String,
    pub sigma: f64,
    pub betas: Vec<f64>,
    pub discrete: DiscreteScheme,
    pub jumps: JumpChoice,
    pub mixing: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub model: String,
    #[serde(rename = "L")]
    pub l: usize,
    pub beta: f64,
    pub construction: String,
    pub gap_continuous: f64,
    pub gap_discrete: f64,
    pub mixing_time_est: Option<f64>,
    pub db_residual: f64,
}

/// Per-β outcome with the discrete-vs-continuous comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub row: SweepRow,
    /// `gap(𝒬) ≥ gap(𝓛)/(n s²) − 1e−9`.
    pub discrete_bound_holds: bool,
    pub discrete_bound: f64,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub gap_at_zero: Option<f64>,
    /// `max_{β>0} |gap(β) − gap(0)|/β`.
    pub continuity_constant: Option<f64>,
    pub max_successive_delta: f64,
    /// Largest grid β with continuous gap ≥ ½.
    pub beta_threshold: Option<f64>,
    pub all_discrete_bounds_hold: bool,
}

fn model_name(spec: &ModelSpec) -> String {
    serde_json::to_value(spec.model).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default()
}

/// One sweep point at inverse temperature β.
pub fn sweep_point(cfg: &SweepConfig, beta: f64) -> Result<SweepPoint> {
    let spec = cfg.model.with_beta(beta);
    let inst = Instance::new(&spec, cfg.jumps)?;
    let profile = resolve_profile(&cfg.profile, cfg.construction)?;
    let l = lattice_lindbladian(&inst, cfg.construction, &profile, cfg.sigma)?;
    let lq = QuantumDynamics::Lindbladian(l.superop.clone());
    let gc = spectral_gap(&lq, &inst.rho)?;
    let (ch, mut notes) = lattice_channel(&inst, cfg.construction, &profile, cfg.sigma, cfg.discrete)?;
    let gd = spectral_gap(&QuantumDynamics::Channel(ch.map.clone()), &inst.rho)?;
    notes.extend(gc.notes.iter().map(|n| format!("continuous: {n}")));
    notes.extend(gd.notes.iter().map(|n| format!("discrete: {n}")));
    let s = dynamics::s_surrogate(inst.h.norm());
    let n = inst.jumps.len().max(1) as f64;
    let bound = gc.gap / (n * s * s);
    let holds = gd.gap >= bound - 1e-9;
    let mixing_time_est = if cfg.mixing { mixing_time_estimate(&l.superop, &inst.rho)? } else { None };
    let db = cpmap::db_residual_superop(&l.superop, &inst.rho).max(cpmap::db_residual(&ch.map, &inst.rho));
    Ok(SweepPoint {
        row: SweepRow {
            model: model_name(&spec),
            l: spec.sites().unwrap_or(0),
            beta,
            construction: cfg.construction.name().into(),
            gap_continuous: gc.gap,
            gap_discrete: gd.gap,
            mixing_time_est,
            db_residual: db,
        },
        discrete_bound_holds: holds,
        discrete_bound: bound,
        notes,
    })
}

/// Named profile, a custom-profile JSON document, or the construction default
/// for `"default"`.
pub fn resolve_profile(name: &str, construction: Construction) -> Result<WeightProfile> {
    match name {
        "default" | "" => Ok(construction.default_profile()),
        text if text.trim_start().starts_with('{') => WeightProfile::from_json(text),
        other => WeightProfile::by_name(other),
    }
}

pub fn summarize(points: &[SweepPoint]) -> SweepSummary {
    let gap0 = points.iter().find(|p| p.row.beta == 0.0).map(|p| p.row.gap_continuous);
    let continuity_constant = gap0.and_then(|g0| {
        points
            .iter()
            .filter(|p| p.row.beta > 0.0)
            .map(|p| (p.row.gap_continuous - g0).abs() / p.row.beta)
            .fold(None, |acc: Option<f64>, x| Some(acc.map_or(x, |a| a.max(x))))
    });
    let max_successive_delta = points
        .windows(2)
        .map(|w| (w[1].row.gap_continuous - w[0].row.gap_continuous).abs())
        .fold(0.0, f64::max);
    let beta_threshold = points
        .iter()
        .filter(|p| p.row.gap_continuous >= 0.5)
        .map(|p| p.row.beta)
        .fold(None, |acc: Option<f64>, b| Some(acc.map_or(b, |a| a.max(b))));
    SweepSummary {
        gap_at_zero: gap0,
        continuity_constant,
        max_successive_delta,
        beta_threshold,
        all_discrete_bounds_hold: points.iter().all(|p| p.discrete_bound_holds),
    }
}

/// Sequential sweep over `cfg.betas` (callers may parallelize over
/// [`sweep_point`] themselves; the result order is the grid order).
pub fn gap_sweep(cfg: &SweepConfig) -> Result<(Vec<SweepPoint>, SweepSummary)> {
    if let Some(l) = cfg.model.sites() {
        if l > 5 {
            return Err(Error::Size(format!("gap sweeps support at most 5 sites, got {l}")));
        }
    }
    let points = cfg.betas.iter().map(|&b| sweep_point(cfg, b)).collect::<Result<Vec<_>>>()?;
    let summary = summarize(&points);
    Ok((points, summary))
}
