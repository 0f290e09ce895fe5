//! Gauss–Legendre quadrature: fixed composite rules and panel-doubling
//! refinement for scalar, complex and matrix-valued integrands.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, C64};

/// Nodes and weights of the n-point Gauss–Legendre rule on [−1, 1], ascending,
/// exactly symmetric about 0.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Newton iteration from the Chebyshev-like initial guess.
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Values that can be accumulated by a quadrature rule.
pub trait Quadrable: Clone {
    fn scaled(&self, w: f64) -> Self;
    fn add_assign(&mut self, other: &Self);
    /// Size used for convergence tests.
    fn magnitude(&self) -> f64;
    fn distance(&self, other: &Self) -> f64;
}

impl Quadrable for f64 {
    fn scaled(&self, w: f64) -> Self {
        self * w
    }
    fn add_assign(&mut self, other: &Self) {
        *self += other;
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
    fn distance(&self, other: &Self) -> f64 {
        (self - other).abs()
    }
}

impl Quadrable for C64 {
    fn scaled(&self, w: f64) -> Self {
        self * w
    }
    fn add_assign(&mut self, other: &Self) {
        *self += other;
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
    fn distance(&self, other: &Self) -> f64 {
        (self - other).norm()
    }
}

impl Quadrable for CMatrix {
    fn scaled(&self, w: f64) -> Self {
        self * linalg::c(w, 0.0)
    }
    fn add_assign(&mut self, other: &Self) {
        *self += other;
    }
    fn magnitude(&self) -> f64 {
        linalg::max_abs(self)
    }
    fn distance(&self, other: &Self) -> f64 {
        linalg::max_abs(&(self - other))
    }
}

/// Composite rule with `panels` equal panels of `order` nodes each on [a, b].
pub fn composite<T: Quadrable, F: Fn(f64) -> T>(f: &F, a: f64, b: f64, panels: usize, order: usize) -> T {
    let (x, w) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut acc: Option<T> = None;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        for (xi, wi) in x.iter().zip(&w) {
            let v = f(mid + 0.5 * h * xi).scaled(0.5 * h * wi);
            match acc.as_mut() {
                Some(s) => s.add_assign(&v),
                None => acc = Some(v),
            }
        }
    }
    acc.unwrap_or_else(|| f(a).scaled(0.0))
}

/// Outcome of a refined quadrature.
#[derive(Debug, Clone)]
pub struct Estimate<T> {
    pub value: T,
    /// Change between the last two refinements.
    pub error: f64,
    pub panels: usize,
}

/// Refinement settings: start with `initial_panels` panels of `order` nodes and
/// double until successive estimates differ by less than
/// `abs_tol + rel_tol · |value|`.
#[derive(Debug, Clone, Copy)]
pub struct Refinement {
    pub order: usize,
    pub initial_panels: usize,
    pub max_panels: usize,
    pub abs_tol: f64,
    pub rel_tol: f64,
}

impl Default for Refinement {
    fn default() -> Self {
        Refinement { order: 16, initial_panels: 16, max_panels: 1 << 14, abs_tol: 1e-11, rel_tol: 1e-11 }
    }
}

/// Panel-doubling composite Gauss–Legendre on [a, b].
pub fn refine<T: Quadrable, F: Fn(f64) -> T>(f: &F, a: f64, b: f64, cfg: Refinement) -> Result<Estimate<T>> {
    let mut panels = cfg.initial_panels.max(1);
    let mut prev = composite(f, a, b, panels, cfg.order);
    loop {
        let next_panels = panels * 2;
        let cur = composite(f, a, b, next_panels, cfg.order);
        let err = cur.distance(&prev);
        if err <= cfg.abs_tol + cfg.rel_tol * cur.magnitude() {
            return Ok(Estimate { value: cur, error: err, panels: next_panels });
        }
        if next_panels >= cfg.max_panels {
            return Err(Error::Accuracy(format!(
                "estimate still changed by {err:.3e} on [{a}, {b}] after {next_panels} panels"
            )));
        }
        prev = cur;
        panels = next_panels;
    }
}

/// [`refine`] over consecutive sub-intervals separated by `breakpoints`
/// (points outside (a, b) are ignored), so kinks sit on panel edges.
pub fn refine_with_breaks<T: Quadrable, F: Fn(f64) -> T>(
    f: &F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    cfg: Refinement,
) -> Result<Estimate<T>> {
    let mut cuts: Vec<f64> = breakpoints.iter().cloned().filter(|&x| x > a && x < b).collect();
    cuts.sort_by(f64::total_cmp);
    let mut edges = vec![a];
    edges.extend(cuts);
    edges.push(b);
    let mut total: Option<Estimate<T>> = None;
    for win in edges.windows(2) {
        let est = refine(f, win[0], win[1], cfg)?;
        total = Some(match total {
            None => est,
            Some(mut t) => {
                t.value.add_assign(&est.value);
                t.error += est.error;
                t.panels += est.panels;
                t
            }
        });
    }
    Ok(total.expect("at least one interval"))
}
