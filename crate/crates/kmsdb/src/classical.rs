//! Classical reference chains: Metropolis/Glauber-type acceptance rules for
//! column-stochastic matrices and Laplacians, the Hastings rule, and the
//! Gaussian-uncertainty Metropolis rate.

use nalgebra::DMatrix;
use libm::erfc;

use crate::error::{Error, Result};

pub type RMatrix = DMatrix<f64>;

/// Column-sum tolerance for stochastic matrices and Laplacians.
pub const COLUMN_TOL: f64 = 1e-12;

/// Column-stochastic matrix: non-negative entries, columns sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticMatrix(RMatrix);

/// Continuous-time generator: off-diagonals non-negative, columns sum to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Laplacian(RMatrix);

fn check_square(m: &RMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return Err(Error::Shape(format!("expected a non-empty square matrix, got {}x{}", m.nrows(), m.ncols())));
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::Invalid("matrix has non-finite entries".into()));
    }
    Ok(m.nrows())
}

impl StochasticMatrix {
    pub fn new(m: RMatrix) -> Result<Self> {
        let d = check_square(&m)?;
        if m.iter().any(|&x| x < 0.0) {
            return Err(Error::Invalid("stochastic matrix has a negative entry".into()));
        }
        for j in 0..d {
            let s: f64 = m.column(j).sum();
            if (s - 1.0).abs() > COLUMN_TOL * d as f64 {
                return Err(Error::Invalid(format!("column {j} sums to {s}, not 1")));
            }
        }
        Ok(StochasticMatrix(m))
    }

    pub fn matrix(&self) -> &RMatrix {
        &self.0
    }
}

impl Laplacian {
    pub fn new(m: RMatrix) -> Result<Self> {
        let d = check_square(&m)?;
        for i in 0..d {
            for j in 0..d {
                if i != j && m[(i, j)] < 0.0 {
                    return Err(Error::Invalid(format!("Laplacian off-diagonal ({i}, {j}) is negative")));
                }
            }
        }
        for j in 0..d {
            let s: f64 = m.column(j).sum();
            let scale = m.column(j).iter().map(|x| x.abs()).sum::<f64>().max(1.0);
            if s.abs() > COLUMN_TOL * scale {
                return Err(Error::Invalid(format!("column {j} sums to {s}, not 0")));
            }
        }
        Ok(Laplacian(m))
    }

    pub fn matrix(&self) -> &RMatrix {
        &self.0
    }
}

/// Matrices the acceptance rules act on; the diagonal is rebuilt after
/// reweighing the off-diagonal transition weights.
pub trait Chain: Sized {
    fn entries(&self) -> &RMatrix;
    fn with_off_diagonal(off: RMatrix) -> Result<Self>;
}

impl Chain for StochasticMatrix {
    fn entries(&self) -> &RMatrix {
        &self.0
    }

    fn with_off_diagonal(mut off: RMatrix) -> Result<Self> {
        let d = off.nrows();
        for j in 0..d {
            let out: f64 = (0..d).filter(|&i| i != j).map(|i| off[(i, j)]).sum();
            let stay = 1.0 - out;
            if stay < -COLUMN_TOL * d as f64 {
                return Err(Error::InvalidRule(format!(
                    "reweighed column {j} leaks probability {out} > 1; the rule must satisfy g <= 1 here"
                )));
            }
            off[(j, j)] = stay.max(0.0);
        }
        Ok(StochasticMatrix(off))
    }
}

impl Chain for Laplacian {
    fn entries(&self) -> &RMatrix {
        &self.0
    }

    fn with_off_diagonal(mut off: RMatrix) -> Result<Self> {
        let d = off.nrows();
        for j in 0..d {
            let out: f64 = (0..d).filter(|&i| i != j).map(|i| off[(i, j)]).sum();
            off[(j, j)] = -out;
        }
        Ok(Laplacian(off))
    }
}

/// Metropolis acceptance `g_M(r) = min(1, r)`.
pub fn g_metropolis(r: f64) -> f64 {
    r.min(1.0)
}

/// Glauber acceptance `g_G(r) = 1/(1 + 1/r)`.
pub fn g_glauber(r: f64) -> f64 {
    r / (1.0 + r)
}

/// Check `g(r) = r·g(1/r)` on a log-spaced grid `r ∈ [1e−6, 1e6]`.
pub fn check_rule_symmetry<G: Fn(f64) -> f64>(g: &G) -> Result<()> {
    let n = 121;
    for k in 0..n {
        let r = 10f64.powf(-6.0 + 12.0 * k as f64 / (n - 1) as f64);
        let (lhs, rhs) = (g(r), r * g(1.0 / r));
        if !lhs.is_finite() || !rhs.is_finite() || lhs < 0.0 {
            return Err(Error::InvalidRule(format!("g({r:.3e}) = {lhs} is not a finite non-negative number")));
        }
        let scale = lhs.abs().max(rhs.abs()).max(f64::MIN_POSITIVE);
        if (lhs - rhs).abs() > 1e-12 * scale {
            return Err(Error::InvalidRule(format!(
                "g(r) = r g(1/r) fails at r = {r:.3e}: {lhs:.16e} vs {rhs:.16e}"
            )));
        }
    }
    Ok(())
}

fn check_weights(v: &[f64], d: usize) -> Result<()> {
    if v.len() != d {
        return Err(Error::Shape(format!("{} weights for a {d}-state chain", v.len())));
    }
    if v.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
        return Err(Error::Invalid("weights must be positive and finite".into()));
    }
    Ok(())
}

/// Generalized acceptance rule `P'_ij = P_ij · g(v_i/v_j)` for `i ≠ j` on a
/// symmetric chain; the diagonal is restored so the output is again
/// stochastic (resp. a Laplacian) and `π ∝ v` detailed balanced.
pub fn generalized_rule<M: Chain, G: Fn(f64) -> f64>(p: &M, v: &[f64], g: G) -> Result<M> {
    let m = p.entries();
    let d = m.nrows();
    check_weights(v, d)?;
    check_rule_symmetry(&g)?;
    for i in 0..d {
        for j in 0..i {
            let (a, b) = (m[(i, j)], m[(j, i)]);
            if (a - b).abs() > 1e-12 * a.abs().max(b.abs()).max(1.0) {
                return Err(Error::InvalidRule(format!(
                    "generalized rule needs a symmetric chain; entries ({i},{j}) and ({j},{i}) differ (use hastings_rule)"
                )));
            }
        }
    }
    let off = RMatrix::from_fn(d, d, |i, j| if i == j { 0.0 } else { m[(i, j)] * g(v[i] / v[j]) });
    M::with_off_diagonal(off)
}

/// Hastings rule `P'_ij = P_ij · g(P_ji v_i / (P_ij v_j))`; a zero proposal
/// `P_ij = 0` gives weight 0 (the convention `g(1/0) := 0`).
pub fn hastings_rule<G: Fn(f64) -> f64>(p: &StochasticMatrix, v: &[f64], g: G) -> Result<StochasticMatrix> {
    let m = p.matrix();
    let d = m.nrows();
    check_weights(v, d)?;
    check_rule_symmetry(&g)?;
    let off = RMatrix::from_fn(d, d, |i, j| {
        if i == j || m[(i, j)] == 0.0 {
            0.0
        } else {
            m[(i, j)] * g(m[(j, i)] * v[i] / (m[(i, j)] * v[j]))
        }
    });
    StochasticMatrix::with_off_diagonal(off)
}

/// Normalized stationary distribution `π ∝ v`.
pub fn normalize(v: &[f64]) -> Vec<f64> {
    let z: f64 = v.iter().sum();
    v.iter().map(|x| x / z).collect()
}

/// `max_ij |M_ij π_j − M_ji π_i|`.
pub fn detailed_balance_residual(m: &RMatrix, pi: &[f64]) -> f64 {
    let d = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..d {
        for j in 0..d {
            worst = worst.max((m[(i, j)] * pi[j] - m[(j, i)] * pi[i]).abs());
        }
    }
    worst
}

/// Gaussian-uncertainty Metropolis rate
/// `½(e^{−ν} erfc((σ² − 2ν)/(2√2σ)) + erfc((σ² + 2ν)/(2√2σ)))`,
/// which satisfies `γ(−ν) = e^ν γ(ν)`.
pub fn gaussian_uncertain_gamma(nu: f64, sigma: f64) -> f64 {
    assert!(sigma > 0.0, "sigma must be positive");
    let s = 2.0 * std::f64::consts::SQRT_2 * sigma;
    let a = erfc((sigma * sigma - 2.0 * nu) / s);
    let b = erfc((sigma * sigma + 2.0 * nu) / s);
    let first = if a == 0.0 { 0.0 } else { (-nu).exp() * a };
    0.5 * (first + b)
}
