//! Bohr-frequency reweighing superoperators `𝒮^{[f]}`, `𝒮`, `𝒮±`, `𝒮_c`, and
//! the super-superoperators that turn a self-adjoint CP map into a KMS
//! detailed-balanced one: Davies, coherent reweighing, operator Fourier
//! transform, the two-sided (phase-estimation) variant, and the interpolated
//! scheme.
//!
//! Everything is evaluated exactly in the Hamiltonian eigenbasis. Writing
//! `Ã = V†AV`, a map's eigenbasis superoperator is
//! `𝓣̃[(p,q),(i,k)] = Σ_a Ã_pi conj(Ã_qk)`, and the Fourier-type constructions
//! multiply it entrywise by a coefficient tensor.

use std::sync::Arc;

use crate::classical;
use crate::cpmap::CPMap;
use crate::error::{Error, Result};
use crate::hamiltonian::HamiltonianModel;
use crate::linalg::{self, c, CMatrix, C64};
use crate::profile::{SymmetryClass, WeightProfile};
use crate::quad::{self, Refinement};

/// Relative self-adjointness tolerance for inputs of the constructors.
pub const SELF_ADJOINT_TOL: f64 = 1e-10;

/// `𝒮^{[f]}[M] = Σ_ν f(ν) M_ν`.
pub fn schur_weight(m: &CMatrix, h: &HamiltonianModel, f: &WeightProfile) -> Result<CMatrix> {
    h.check_dim(m)?;
    Ok(h.schur_apply(m, |nu| f.eval(nu)))
}

/// Weight `½ tanh(ν/4)` of `𝒮`.
pub fn s_weight(nu: f64) -> f64 {
    0.5 * (nu / 4.0).tanh()
}

/// Weight `1/(2 cosh(ν/4))` of `𝒮_c`.
pub fn s_c_weight(nu: f64) -> f64 {
    0.5 / (nu / 4.0).cosh()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

/// `𝒮[M] = Σ_ν ½ tanh(ν/4) M_ν`.
pub fn s_map(m: &CMatrix, h: &HamiltonianModel) -> CMatrix {
    h.schur_apply(m, |nu| c(s_weight(nu), 0.0))
}

/// `𝒮±[M] = M/2 ± 𝒮[M]`; `𝒮⁻` has weight `f_G(ν) = 1/(1 + e^{ν/2})`.
pub fn s_pm(m: &CMatrix, h: &HamiltonianModel, sign: Sign) -> CMatrix {
    match sign {
        Sign::Plus => h.schur_apply(m, |nu| c(crate::profile::f_glauber(-nu), 0.0)),
        Sign::Minus => h.schur_apply(m, |nu| c(crate::profile::f_glauber(nu), 0.0)),
    }
}

pub fn s_minus(m: &CMatrix, h: &HamiltonianModel) -> CMatrix {
    s_pm(m, h, Sign::Minus)
}

pub fn s_plus(m: &CMatrix, h: &HamiltonianModel) -> CMatrix {
    s_pm(m, h, Sign::Plus)
}

/// `𝒮_c[M] = Σ_ν M_ν / (2 cosh(ν/4))`.
pub fn s_c(m: &CMatrix, h: &HamiltonianModel) -> CMatrix {
    h.schur_apply(m, |nu| c(s_c_weight(nu), 0.0))
}

fn require_self_adjoint(t: &CPMap, h: &HamiltonianModel) -> Result<()> {
    if t.dim() != h.dim() {
        return Err(Error::Shape(format!("map acts on dimension {}, Hamiltonian has {}", t.dim(), h.dim())));
    }
    let defect = t.self_adjoint_defect();
    let tol = SELF_ADJOINT_TOL * t.norm().max(1.0);
    if defect > tol {
        return Err(Error::Precondition(format!(
            "input map is not self-adjoint: ||T - T^dag|| = {defect:.3e} > {tol:.3e}"
        )));
    }
    Ok(())
}

fn require_class(f: &WeightProfile, class: SymmetryClass, h: &HamiltonianModel, who: &str) -> Result<()> {
    if f.class() != class {
        let want = match class {
            SymmetryClass::Davies => "a Davies-class rate profile",
            SymmetryClass::Amplitude => "an amplitude-class profile",
        };
        return Err(Error::InvalidProfile { name: f.name().into(), reason: format!("{who} needs {want}") });
    }
    f.validate(h.bohr_frequencies())
}

/// Davies super-superoperator: Kraus operators `√γ(ν) A^a_ν` over all Bohr
/// clusters (zero components are dropped).
pub fn davies(t: &CPMap, h: &HamiltonianModel, gamma: &WeightProfile) -> Result<CPMap> {
    require_self_adjoint(t, h)?;
    require_class(gamma, SymmetryClass::Davies, h, "davies")?;
    let mut kraus = Vec::new();
    for a in t.kraus() {
        let a_eig = h.to_eigenbasis(a);
        for (k, &nu) in h.bohr_frequencies().iter().enumerate() {
            let g = gamma.eval_real(nu);
            if g == 0.0 {
                continue;
            }
            if h.cluster_members(k).iter().all(|&(i, j)| a_eig[(i, j)] == linalg::ZERO) {
                continue;
            }
            kraus.push(h.component_of_cluster(&a_eig, k) * c(g.sqrt(), 0.0));
        }
    }
    CPMap::from_kraus_dim(t.dim(), kraus)
}

/// Coherent reweighing: Kraus operators `𝒮^{[f]}[A^a]`, one per input Kraus.
pub fn coherent(t: &CPMap, h: &HamiltonianModel, f: &WeightProfile) -> Result<CPMap> {
    require_self_adjoint(t, h)?;
    require_class(f, SymmetryClass::Amplitude, h, "coherent reweighing")?;
    let kraus = t.kraus().iter().map(|a| h.schur_apply(a, |nu| f.eval(nu))).collect();
    CPMap::from_kraus_dim(t.dim(), kraus)
}

/// Eigenbasis superoperator `W† 𝓣 W` with `W = V ⊗ conj(V)`.
pub fn eigenbasis_superop(t: &CPMap, h: &HamiltonianModel) -> CMatrix {
    let w = eigen_w(h);
    w.adjoint() * t.superop() * &w
}

fn eigen_w(h: &HamiltonianModel) -> CMatrix {
    let v = &h.eig().vectors;
    linalg::kron(v, &v.map(|z| z.conj()))
}

/// Multiply the eigenbasis superoperator entrywise by
/// `coef(p, i, q, k)` and transform back.
fn reweigh_superop<F: Fn(usize, usize, usize, usize) -> C64>(t: &CPMap, h: &HamiltonianModel, coef: F) -> CMatrix {
    let d = h.dim();
    let w = eigen_w(h);
    let mut s = w.adjoint() * t.superop() * &w;
    for p in 0..d {
        for q in 0..d {
            for i in 0..d {
                for k in 0..d {
                    s[(p * d + q, i * d + k)] *= coef(p, i, q, k);
                }
            }
        }
    }
    &w * s * w.adjoint()
}

/// A non-negative frequency weight `γ(ω)` for the operator Fourier transform,
/// with the points where it is not smooth.
#[derive(Clone)]
pub struct OmegaWeight {
    pub name: String,
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub breakpoints: Vec<f64>,
}

impl std::fmt::Debug for OmegaWeight {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OmegaWeight").field("name", &self.name).field("breakpoints", &self.breakpoints).finish()
    }
}

impl OmegaWeight {
    pub fn new<F: Fn(f64) -> f64 + Send + Sync + 'static>(name: &str, f: F, breakpoints: Vec<f64>) -> Self {
        OmegaWeight { name: name.into(), f: Arc::new(f), breakpoints }
    }

    /// Shifted Metropolis weight `e^{−max(ω + σ²/2, 0)}`.
    pub fn shifted_metropolis(sigma: f64) -> Self {
        let shift = sigma * sigma / 2.0;
        OmegaWeight::new("shifted-metropolis", move |w| (-(w + shift).max(0.0)).exp(), vec![-shift])
    }

    pub fn constant_one() -> Self {
        OmegaWeight::new("one", |_| 1.0, vec![])
    }

    /// The family `γ^{(g)}(ω) = ∫_{σ²/2}^∞ g(x) e^{−(ω + x)²/(4x − 2σ²)} dx`,
    /// evaluated with a fixed rule in `x = σ²/2 + w²`, `w ∈ [0, √60]`.
    pub fn from_g<G: Fn(f64) -> f64 + Send + Sync + 'static>(sigma: f64, g: G) -> Self {
        let x0 = sigma * sigma / 2.0;
        let (nodes, weights) = quad::gauss_legendre(16);
        let panels = 48;
        let wmax = 60f64.sqrt();
        let h = wmax / panels as f64;
        let mut xs = Vec::new();
        let mut ws = Vec::new();
        for p in 0..panels {
            let mid = (p as f64 + 0.5) * h;
            for (t, wt) in nodes.iter().zip(&weights) {
                let w = mid + 0.5 * h * t;
                let x = x0 + w * w;
                xs.push(x);
                ws.push(0.5 * h * wt * 2.0 * w * g(x));
            }
        }
        OmegaWeight::new(
            "gamma-g",
            move |omega| {
                xs.iter()
                    .zip(&ws)
                    .map(|(&x, &w)| {
                        let den = 4.0 * (x - x0);
                        w * (-(omega + x).powi(2) / den).exp()
                    })
                    .sum()
            },
            vec![],
        )
    }

    pub fn eval(&self, omega: f64) -> f64 {
        (self.f)(omega)
    }
}

/// `E_{ω ∼ N(ν̄, σ²)}[γ(ω)]` over `[ν̄ − 8σ, ν̄ + 8σ]`, refined until
/// successive estimates agree to 1e-11.
pub fn gaussian_average(weight: &OmegaWeight, center: f64, sigma: f64) -> Result<f64> {
    let norm = 1.0 / (sigma * (2.0 * std::f64::consts::PI).sqrt());
    let integrand = |w: f64| {
        let z = (w - center) / sigma;
        weight.eval(w) * norm * (-0.5 * z * z).exp()
    };
    let cfg = Refinement { abs_tol: 1e-12, rel_tol: 1e-11, ..Refinement::default() };
    let est = quad::refine_with_breaks(&integrand, center - 8.0 * sigma, center + 8.0 * sigma, &weight.breakpoints, cfg)?;
    Ok(est.value)
}

/// Operator-Fourier-transform coefficient
/// `c(ν₁, ν₂) = ∫ γ(ω) f̂_σ(ω − ν₁) f̂_σ(ω − ν₂) dω
///            = e^{−(ν₁−ν₂)²/8σ²} · E_{N((ν₁+ν₂)/2, σ²)}[γ]`.
pub fn oft_coefficient(nu1: f64, nu2: f64, sigma: f64, weight: &OmegaWeight) -> Result<f64> {
    let delta = nu1 - nu2;
    let overlap = (-(delta * delta) / (8.0 * sigma * sigma)).exp();
    if overlap == 0.0 {
        return Ok(0.0);
    }
    Ok(overlap * gaussian_average(weight, 0.5 * (nu1 + nu2), sigma)?)
}

fn check_sigma(sigma: f64) -> Result<()> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::Invalid(format!("sigma must be positive and finite, got {sigma}")));
    }
    Ok(())
}

/// Operator Fourier transform weighted by `γ(ω)`.
pub fn oft(t: &CPMap, h: &HamiltonianModel, sigma: f64, weight: &OmegaWeight) -> Result<CPMap> {
    check_sigma(sigma)?;
    require_self_adjoint(t, h)?;
    let bohr = h.bohr_frequencies();
    let n = bohr.len();
    let mut table = vec![0.0; n * n];
    // c depends on ν̄ and Δ only; cache the Gaussian averages by ν̄.
    let mut averages: std::collections::HashMap<u64, f64> = std::collections::HashMap::new();
    for a in 0..n {
        for b in 0..n {
            let delta = bohr[a] - bohr[b];
            let overlap = (-(delta * delta) / (8.0 * sigma * sigma)).exp();
            if overlap == 0.0 {
                continue;
            }
            let center = 0.5 * (bohr[a] + bohr[b]);
            let key = center.to_bits();
            let avg = match averages.get(&key) {
                Some(&v) => v,
                None => {
                    let v = gaussian_average(weight, center, sigma)?;
                    if !(v >= 0.0 && v.is_finite()) {
                        return Err(Error::Invalid(format!(
                            "frequency weight '{}' has a negative or non-finite average {v} near {center}",
                            weight.name
                        )));
                    }
                    averages.insert(key, v);
                    v
                }
            };
            table[a * n + b] = overlap * avg;
        }
    }
    let s = reweigh_superop(t, h, |p, i, q, k| c(table[h.cluster_of(p, i) * n + h.cluster_of(q, k)], 0.0));
    CPMap::from_superop(s)
}

/// Unweighted operator Fourier transform (γ ≡ 1): coefficient
/// `e^{−(ν₁−ν₂)²/8σ²}`, which tends to the identity super-superoperator as
/// σ → ∞ and to the exact-frequency (Davies, γ ≡ 1) form as σ → 0.
pub fn oft_unweighted(t: &CPMap, h: &HamiltonianModel, sigma: f64) -> Result<CPMap> {
    check_sigma(sigma)?;
    require_self_adjoint(t, h)?;
    let bohr = h.bohr_frequencies();
    let s = reweigh_superop(t, h, |p, i, q, k| {
        let delta = bohr[h.cluster_of(p, i)] - bohr[h.cluster_of(q, k)];
        c((-(delta * delta) / (8.0 * sigma * sigma)).exp(), 0.0)
    });
    CPMap::from_superop(s)
}

/// Weight `g(x) ≥ 0` on `[σ², ∞)` for the two-sided construction.
#[derive(Clone)]
pub struct TwoSidedWeight {
    pub name: String,
    g: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl std::fmt::Debug for TwoSidedWeight {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TwoSidedWeight").field("name", &self.name).finish()
    }
}

impl TwoSidedWeight {
    pub fn new<G: Fn(f64) -> f64 + Send + Sync + 'static>(name: &str, g: G) -> Self {
        TwoSidedWeight { name: name.into(), g: Arc::new(g) }
    }

    /// Default weight `g(x) = e^{−(x − σ²)}`.
    pub fn exponential(sigma: f64) -> Self {
        let s2 = sigma * sigma;
        TwoSidedWeight::new("exponential", move |x| (-(x - s2)).exp())
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.g)(x)
    }
}

/// Fixed composite rule for the x-integral of the two-sided coefficients, in
/// the variable `x = σ² + w²`, `w ∈ [0, √40]`.
#[derive(Debug, Clone)]
pub struct TwoSidedRule {
    xs: Vec<f64>,
    /// Quadrature weight times `g(x) √(1 − σ²/x) dx/dw`.
    ws: Vec<f64>,
}

impl TwoSidedRule {
    pub fn new(sigma: f64, g: &TwoSidedWeight, panels: usize) -> Result<Self> {
        check_sigma(sigma)?;
        let s2 = sigma * sigma;
        let (nodes, weights) = quad::gauss_legendre(16);
        let wmax = 40f64.sqrt();
        let h = wmax / panels as f64;
        let mut xs = Vec::with_capacity(panels * 16);
        let mut ws = Vec::with_capacity(panels * 16);
        for p in 0..panels {
            let mid = (p as f64 + 0.5) * h;
            for (t, wt) in nodes.iter().zip(&weights) {
                let w = mid + 0.5 * h * t;
                let x = s2 + w * w;
                let gx = g.eval(x);
                if !(gx >= 0.0 && gx.is_finite()) {
                    return Err(Error::Invalid(format!("two-sided weight g({x}) = {gx} must be finite and >= 0")));
                }
                xs.push(x);
                ws.push(0.5 * h * wt * gx * (w / x.sqrt()) * 2.0 * w);
            }
        }
        Ok(TwoSidedRule { xs, ws })
    }

    /// `I(u) = ∫ g(x) √(1 − σ²/x) e^{−(u − 2x)²/16x} dx`.
    pub fn integral(&self, u: f64) -> f64 {
        self.xs
            .iter()
            .zip(&self.ws)
            .map(|(&x, &w)| w * (-(u - 2.0 * x).powi(2) / (16.0 * x)).exp())
            .sum()
    }

    /// `α_{E₁E₂E₃E₄} = ½ e^{−(E₁−E₃)²/8σ² − (E₂−E₄)²/8σ²} I(E₁ + E₃ − E₂ − E₄)`.
    pub fn alpha(&self, sigma: f64, e1: f64, e2: f64, e3: f64, e4: f64) -> f64 {
        let s8 = 8.0 * sigma * sigma;
        let pre = 0.5 * (-(e1 - e3).powi(2) / s8 - (e2 - e4).powi(2) / s8).exp();
        if pre == 0.0 {
            return 0.0;
        }
        pre * self.integral(e1 + e3 - e2 - e4)
    }
}

/// Default number of panels of the two-sided rule (checked against twice as many).
pub const TWO_SIDED_PANELS: usize = 64;

/// Coefficient tensor over energy levels, indexed `[l1][l2][l3][l4]`.
pub fn two_sided_alpha_table(h: &HamiltonianModel, sigma: f64, g: &TwoSidedWeight) -> Result<Vec<f64>> {
    let rule = TwoSidedRule::new(sigma, g, TWO_SIDED_PANELS)?;
    let fine = TwoSidedRule::new(sigma, g, 2 * TWO_SIDED_PANELS)?;
    let lv = h.levels();
    let n = lv.len();
    let mut table = vec![0.0; n * n * n * n];
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for a in 0..n {
        for b in 0..n {
            for cc in 0..n {
                for d in 0..n {
                    let v = rule.alpha(sigma, lv[a], lv[b], lv[cc], lv[d]);
                    let vf = fine.alpha(sigma, lv[a], lv[b], lv[cc], lv[d]);
                    worst = worst.max((v - vf).abs());
                    scale = scale.max(v.abs());
                    table[((a * n + b) * n + cc) * n + d] = v;
                }
            }
        }
    }
    if worst > 1e-10 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::Accuracy(format!(
            "two-sided coefficients changed by {worst:.3e} (scale {scale:.3e}) when doubling the x-rule"
        )));
    }
    Ok(table)
}

/// Largest relative violation of
/// `α_{E₁E₂E₃E₄} = α_{E₂E₁E₄E₃} e^{(E₁ − E₂ + E₃ − E₄)/2}` over all levels.
pub fn two_sided_skew_defect(h: &HamiltonianModel, sigma: f64, g: &TwoSidedWeight) -> Result<f64> {
    let rule = TwoSidedRule::new(sigma, g, TWO_SIDED_PANELS)?;
    let lv = h.levels();
    let mut worst: f64 = 0.0;
    for &e1 in lv {
        for &e2 in lv {
            for &e3 in lv {
                for &e4 in lv {
                    let lhs = rule.alpha(sigma, e1, e2, e3, e4);
                    let rhs = rule.alpha(sigma, e2, e1, e4, e3) * ((e1 - e2 + e3 - e4) / 2.0).exp();
                    let scale = lhs.abs().max(rhs.abs());
                    if scale > 0.0 {
                        worst = worst.max((lhs - rhs).abs() / scale);
                    }
                }
            }
        }
    }
    Ok(worst)
}

/// Two-sided (phase-estimation-type) construction
/// `Σ_a Σ α_{E₁E₂E₃E₄} Π_{E₂} A Π_{E₁} [·] Π_{E₃} A† Π_{E₄}`.
pub fn two_sided(t: &CPMap, h: &HamiltonianModel, sigma: f64, g: &TwoSidedWeight) -> Result<CPMap> {
    check_sigma(sigma)?;
    require_self_adjoint(t, h)?;
    let table = two_sided_alpha_table(h, sigma, g)?;
    let n = h.levels().len();
    let s = reweigh_superop(t, h, |p, i, q, k| {
        let (l1, l2, l3, l4) = (h.level_of(i), h.level_of(p), h.level_of(k), h.level_of(q));
        c(table[((l1 * n + l2) * n + l3) * n + l4], 0.0)
    });
    CPMap::from_superop(s)
}

/// Interpolated scheme: coherent reweighing (with `√γ` for a Davies-class
/// profile) applied to the unweighted operator Fourier transform.
pub fn interpolated(t: &CPMap, h: &HamiltonianModel, sigma: f64, profile: &WeightProfile) -> Result<CPMap> {
    let f = profile.as_amplitude()?;
    let smeared = oft_unweighted(t, h, sigma)?;
    coherent(&smeared, h, &f)
}

/// Classical Gaussian-uncertainty rate re-exported for OFT oracles.
pub fn shifted_metropolis_average(center: f64, sigma: f64) -> f64 {
    classical::gaussian_uncertain_gamma(center, sigma)
}
