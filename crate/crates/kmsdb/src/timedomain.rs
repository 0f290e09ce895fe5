//! Time-integral representations of `𝒮` and `𝒮_c` evaluated by quadrature of
//! Heisenberg-evolved operators, and numerical checks of the Fourier pairs
//! behind their kernels. These are independent of the Bohr-frequency sums in
//! [`crate::balance`] and serve as oracles for them.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::HamiltonianModel;
use crate::linalg::{self, c, CMatrix, C64};
use crate::quad::{self, Refinement};

/// Integration domain and rule actually used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureScheme {
    /// Excluded core `(−θ, θ)`; zero when there is none.
    pub core: f64,
    /// Half-width `T` of the symmetric interval `[−T, T]`.
    pub half_width: f64,
    pub rule: String,
    pub nodes: usize,
    pub estimated_error: f64,
}

#[derive(Debug, Clone)]
pub struct TimeIntegral {
    pub value: CMatrix,
    pub scheme: QuadratureScheme,
    pub notes: Vec<String>,
}

fn refinement(scale: f64) -> Refinement {
    Refinement { abs_tol: 1e-11 * scale.max(1e-300), rel_tol: 0.0, ..Refinement::default() }
}

/// `e^{−iHt} M e^{iHt}` evaluated in the eigenbasis (`m_eig` is `V†MV`).
fn heisenberg(h: &HamiltonianModel, m_eig: &CMatrix, t: f64) -> CMatrix {
    let e = h.energies();
    let d = h.dim();
    let mut out = m_eig.clone();
    for i in 0..d {
        for j in 0..d {
            out[(i, j)] *= C64::from_polar(1.0, -(e[i] - e[j]) * t);
        }
    }
    out
}

/// `𝒮̃[M] = ∫_{θ<|t|<T} (i/sinh 2πt) e^{−iHt} M e^{iHt} dt` with
/// `T = ln(4/ε)/(2π)` and `θ = ε/(2‖H‖)`. Nodes are paired `±t`, so the odd
/// singular kernel cancels exactly; the result approximates `𝒮[M]` within
/// `(ε/2)‖M‖`.
pub fn s_truncated(m: &CMatrix, h: &HamiltonianModel, eps: f64) -> Result<TimeIntegral> {
    h.check_dim(m)?;
    if !(eps > 0.0 && eps <= 0.2) {
        return Err(Error::Invalid(format!("truncation parameter must lie in (0, 1/5], got {eps}")));
    }
    let big_t = (4.0 / eps).ln() / (2.0 * PI);
    let theta = if h.norm() > 0.0 { eps / (2.0 * h.norm()) } else { f64::INFINITY };
    let d = h.dim();
    if theta >= big_t {
        let scheme = QuadratureScheme {
            core: theta,
            half_width: big_t,
            rule: "empty".into(),
            nodes: 0,
            estimated_error: 0.0,
        };
        return Ok(TimeIntegral {
            value: linalg::zeros(d, d),
            scheme,
            notes: vec!["truncated domain is empty; the truncated integral is 0".into()],
        });
    }
    let m_eig = h.to_eigenbasis(m);
    // Pair t and −t: (i/sinh 2πt)(M(t) − M(−t)) on [θ, T].
    let integrand = |t: f64| {
        let diff = heisenberg(h, &m_eig, t) - heisenberg(h, &m_eig, -t);
        diff * c(0.0, 1.0 / (2.0 * PI * t).sinh())
    };
    let est = quad::refine(&integrand, theta, big_t, refinement(linalg::max_abs(m)))?;
    let scheme = QuadratureScheme {
        core: theta,
        half_width: big_t,
        rule: "symmetric composite Gauss-Legendre (16 nodes/panel)".into(),
        nodes: 2 * 16 * est.panels,
        estimated_error: est.error,
    };
    Ok(TimeIntegral { value: h.from_eigenbasis(&est.value), scheme, notes: Vec::new() })
}

/// `𝒮_c[M] ≈ ∫_{−t_max}^{t_max} e^{−iHt} M e^{iHt} / cosh(2πt) dt`; the
/// neglected tail is at most `2 e^{−2π t_max} ‖M‖/π`.
pub fn s_c_integral(m: &CMatrix, h: &HamiltonianModel, t_max: f64) -> Result<TimeIntegral> {
    h.check_dim(m)?;
    if !(t_max >= 2.0 && t_max.is_finite()) {
        return Err(Error::Invalid(format!("t_max must be >= 2, got {t_max}")));
    }
    let m_eig = h.to_eigenbasis(m);
    let integrand = |t: f64| {
        let sum = heisenberg(h, &m_eig, t) + heisenberg(h, &m_eig, -t);
        sum * c(1.0 / (2.0 * PI * t).cosh(), 0.0)
    };
    let est = quad::refine(&integrand, 0.0, t_max, refinement(linalg::max_abs(m)))?;
    let scheme = QuadratureScheme {
        core: 0.0,
        half_width: t_max,
        rule: "symmetric composite Gauss-Legendre (16 nodes/panel)".into(),
        nodes: 2 * 16 * est.panels,
        estimated_error: est.error,
    };
    let tail = 2.0 * (-2.0 * PI * t_max).exp() / PI;
    Ok(TimeIntegral {
        value: h.from_eigenbasis(&est.value),
        scheme,
        notes: vec![format!("analytic tail bound {tail:.3e} x ||M||")],
    })
}

/// Scalar weight of [`s_truncated`] at Bohr frequency ν:
/// `2 ∫_θ^T sin(νt)/sinh(2πt) dt`.
pub fn s_truncated_weight(nu: f64, theta: f64, big_t: f64) -> Result<f64> {
    if theta >= big_t {
        return Ok(0.0);
    }
    let f = |t: f64| 2.0 * (nu * t).sin() / (2.0 * PI * t).sinh();
    Ok(quad::refine(&f, theta, big_t, refinement(1.0))?.value)
}

/// The kernel identities behind `𝒮`, the Metropolis profile and `𝒮_c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FourierPair {
    /// `(1/√2π) PV∫ e^{iωt} i√(2π)/sinh(2πt) dt = −½ tanh(ω/4)`, on an ω grid.
    Tanh,
    /// `(1/√2π) ∫ min(1, e^{−ω}) e^{−iωt} dω = 1/(√(2π) t (t − i))`, on a t grid.
    Metropolis,
    /// `(1/√2π) ∫ e^{−iωt}/(2cosh(ω/4)) dω = √(2π)/cosh(2πt)`, on a t grid.
    Sech,
}

impl FourierPair {
    pub const ALL: [FourierPair; 3] = [FourierPair::Tanh, FourierPair::Metropolis, FourierPair::Sech];

    pub fn name(&self) -> &'static str {
        match self {
            FourierPair::Tanh => "tanh",
            FourierPair::Metropolis => "metropolis",
            FourierPair::Sech => "sech",
        }
    }

    /// ω ∈ [−10, 10] in steps of ½ for [`FourierPair::Tanh`]; midpoints
    /// `t = −3 + (k + ½)/10`, `k < 60`, otherwise (avoiding t = 0).
    pub fn default_grid(&self) -> Vec<f64> {
        match self {
            FourierPair::Tanh => (0..=40).map(|k| -10.0 + 0.5 * k as f64).collect(),
            _ => (0..60).map(|k| -3.0 + (k as f64 + 0.5) * 0.1).collect(),
        }
    }

    pub fn closed_form(&self, x: f64) -> C64 {
        match self {
            FourierPair::Tanh => c(-0.5 * (x / 4.0).tanh(), 0.0),
            FourierPair::Metropolis => c(1.0, 0.0) / (c((2.0 * PI).sqrt() * x, 0.0) * c(x, -1.0)),
            FourierPair::Sech => c((2.0 * PI).sqrt() / (2.0 * PI * x).cosh(), 0.0),
        }
    }

    /// Numerical transform at one grid point.
    pub fn numeric(&self, x: f64) -> Result<C64> {
        let cfg = Refinement { abs_tol: 1e-13, rel_tol: 1e-13, ..Refinement::default() };
        let inv_root = 1.0 / (2.0 * PI).sqrt();
        match self {
            FourierPair::Tanh => {
                // i e^{iωt}/sinh is odd in its real part; pairing ±t leaves
                // −2 ∫₀^∞ sin(ωt)/sinh(2πt) dt.
                let f = |t: f64| -2.0 * (x * t).sin() / (2.0 * PI * t).sinh();
                Ok(c(quad::refine(&f, 0.0, 7.0, cfg)?.value, 0.0))
            }
            FourierPair::Metropolis => {
                if x == 0.0 {
                    return Err(Error::Invalid("the Metropolis transform is singular at t = 0".into()));
                }
                // ω > 0: ∫₀^∞ e^{−ω(1+it)} dω, truncated where e^{−ω} < 1e−17.
                let pos = |w: f64| C64::from_polar((-w).exp(), -w * x);
                let right = quad::refine(&pos, 0.0, 40.0, cfg)?.value;
                // ω < 0: ∫₀^∞ e^{iωt} dω, rotated onto ω = i·sign(t)·u.
                let rot = |u: f64| (-u * x.abs()).exp();
                let left = c(0.0, x.signum()) * quad::refine(&rot, 0.0, 40.0 / x.abs(), cfg)?.value;
                Ok((left + right) * inv_root)
            }
            FourierPair::Sech => {
                // Even kernel: 2 ∫₀^150 cos(ωt)/(2cosh(ω/4)) dω.
                let f = |w: f64| (w * x).cos() / (w / 4.0).cosh();
                Ok(c(quad::refine(&f, 0.0, 150.0, cfg)?.value * inv_root, 0.0))
            }
        }
    }
}

/// Maximum deviation `|numeric − closed form|` over the grid.
pub fn fourier_pair_check(pair: FourierPair, grid: &[f64]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &x in grid {
        if !x.is_finite() {
            return Err(Error::Invalid("grid points must be finite".into()));
        }
        worst = worst.max((pair.numeric(x)? - pair.closed_form(x)).norm());
    }
    Ok(worst)
}
