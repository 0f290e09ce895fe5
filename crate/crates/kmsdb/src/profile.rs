//! Scalar weight profiles `ν ↦ f(ν)` and their detailed-balance symmetry classes.
//!
//! * Davies class: `γ(−ν) = e^ν γ(ν)`, `γ ≥ 0` (transition rates).
//! * Amplitude class: `f(−ν) = e^{ν/2} conj(f(ν))` (Kraus amplitudes).

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, C64};

/// Relative tolerance of the symmetry validation.
pub const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SymmetryClass {
    Davies,
    Amplitude,
}

#[derive(Clone)]
enum Kind {
    Metropolis,
    Glauber,
    SqrtMetropolis,
    SqrtGlauber,
    Sqrt(Box<WeightProfile>),
    AbsSquared(Box<WeightProfile>),
    Table(Vec<(f64, f64)>),
    Func(Arc<dyn Fn(f64) -> C64 + Send + Sync>),
}

/// A named weight function with a declared symmetry class.
#[derive(Clone)]
pub struct WeightProfile {
    name: String,
    class: SymmetryClass,
    kind: Kind,
}

impl fmt::Debug for WeightProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WeightProfile").field("name", &self.name).field("class", &self.class).finish()
    }
}

/// Metropolis rate `γ_M(ν) = min(1, e^{−ν})`.
pub fn gamma_metropolis(nu: f64) -> f64 {
    if nu <= 0.0 {
        1.0
    } else {
        (-nu).exp()
    }
}

/// Glauber rate `γ_G(ν) = 1/(1 + e^ν)`.
pub fn gamma_glauber(nu: f64) -> f64 {
    if nu > 0.0 {
        let e = (-nu).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + nu.exp())
    }
}

/// `f_M(ν) = min(1, e^{−ν/2}) = √γ_M(ν)`.
pub fn f_metropolis(nu: f64) -> f64 {
    gamma_metropolis(nu / 2.0)
}

/// `f_G(ν) = ½ − ½ tanh(ν/4) = 1/(1 + e^{ν/2})`.
pub fn f_glauber(nu: f64) -> f64 {
    gamma_glauber(nu / 2.0)
}

impl WeightProfile {
    pub fn metropolis() -> Self {
        WeightProfile { name: "metropolis".into(), class: SymmetryClass::Davies, kind: Kind::Metropolis }
    }

    pub fn glauber() -> Self {
        WeightProfile { name: "glauber".into(), class: SymmetryClass::Davies, kind: Kind::Glauber }
    }

    pub fn sqrt_metropolis() -> Self {
        WeightProfile { name: "sqrt-metropolis".into(), class: SymmetryClass::Amplitude, kind: Kind::SqrtMetropolis }
    }

    /// The Glauber-type amplitude `f_G(ν) = ½ − ½ tanh(ν/4)`, the weight of `𝒮⁻`.
    pub fn sqrt_glauber() -> Self {
        WeightProfile { name: "sqrt-glauber".into(), class: SymmetryClass::Amplitude, kind: Kind::SqrtGlauber }
    }

    /// `√γ` of a Davies-class profile, giving an amplitude-class profile.
    pub fn sqrt_of(gamma: &WeightProfile) -> Result<Self> {
        if gamma.class != SymmetryClass::Davies {
            return Err(Error::InvalidProfile {
                name: gamma.name.clone(),
                reason: "square roots are only taken of Davies-class profiles".into(),
            });
        }
        Ok(WeightProfile {
            name: format!("sqrt({})", gamma.name),
            class: SymmetryClass::Amplitude,
            kind: Kind::Sqrt(Box::new(gamma.clone())),
        })
    }

    /// `|f|²` of an amplitude-class profile, giving a Davies-class profile.
    pub fn abs_squared_of(f: &WeightProfile) -> Result<Self> {
        if f.class != SymmetryClass::Amplitude {
            return Err(Error::InvalidProfile {
                name: f.name.clone(),
                reason: "|f|^2 is only formed from amplitude-class profiles".into(),
            });
        }
        Ok(WeightProfile {
            name: format!("abs2({})", f.name),
            class: SymmetryClass::Davies,
            kind: Kind::AbsSquared(Box::new(f.clone())),
        })
    }

    /// The amplitude-class profile to use for Kraus reweighing: `self` if it
    /// already is one, `√γ` for a Davies-class profile.
    pub fn as_amplitude(&self) -> Result<Self> {
        match self.class {
            SymmetryClass::Amplitude => Ok(self.clone()),
            SymmetryClass::Davies => WeightProfile::sqrt_of(self),
        }
    }

    /// The Davies-class profile with the same action on a single Kraus
    /// component: `self`, or `|f|²`.
    pub fn as_davies(&self) -> Result<Self> {
        match self.class {
            SymmetryClass::Davies => Ok(self.clone()),
            SymmetryClass::Amplitude => WeightProfile::abs_squared_of(self),
        }
    }

    /// Real tabulated profile `(ν, value)`, linearly interpolated. Points are
    /// sorted by ν; evaluation outside the table range returns NaN so the
    /// validation step reports it.
    pub fn custom(name: &str, class: SymmetryClass, mut points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidProfile { name: name.into(), reason: "need at least two points".into() });
        }
        if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(Error::InvalidProfile { name: name.into(), reason: "non-finite table entry".into() });
        }
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        if points.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidProfile { name: name.into(), reason: "duplicate frequency in table".into() });
        }
        Ok(WeightProfile { name: name.into(), class, kind: Kind::Table(points) })
    }

    /// Arbitrary closure with a declared class (validated like any profile).
    pub fn from_fn<F>(name: &str, class: SymmetryClass, f: F) -> Self
    where
        F: Fn(f64) -> C64 + Send + Sync + 'static,
    {
        WeightProfile { name: name.into(), class, kind: Kind::Func(Arc::new(f)) }
    }

    /// Built-in profile by name.
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "metropolis" => Ok(Self::metropolis()),
            "glauber" => Ok(Self::glauber()),
            "sqrt-metropolis" => Ok(Self::sqrt_metropolis()),
            "sqrt-glauber" => Ok(Self::sqrt_glauber()),
            other => Err(Error::InvalidProfile {
                name: other.into(),
                reason: "expected metropolis, glauber, sqrt-metropolis, sqrt-glauber or a custom table".into(),
            }),
        }
    }

    /// Parse a custom profile document
    /// `{"name": …, "class": "davies"|"amplitude", "points": [[ν, value], …]}`.
    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Doc {
            #[serde(default)]
            name: Option<String>,
            class: SymmetryClass,
            points: Vec<(f64, f64)>,
        }
        let doc: Doc = serde_json::from_str(text)
            .map_err(|e| Error::InvalidProfile { name: "custom".into(), reason: e.to_string() })?;
        Self::custom(doc.name.as_deref().unwrap_or("custom"), doc.class, doc.points)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn class(&self) -> SymmetryClass {
        self.class
    }

    pub fn eval(&self, nu: f64) -> C64 {
        match &self.kind {
            Kind::Metropolis => c(gamma_metropolis(nu), 0.0),
            Kind::Glauber => c(gamma_glauber(nu), 0.0),
            Kind::SqrtMetropolis => c(f_metropolis(nu), 0.0),
            Kind::SqrtGlauber => c(f_glauber(nu), 0.0),
            Kind::Sqrt(g) => c(g.eval(nu).re.max(0.0).sqrt(), 0.0),
            Kind::AbsSquared(f) => c(f.eval(nu).norm_sqr(), 0.0),
            Kind::Table(points) => c(interpolate(points, nu), 0.0),
            Kind::Func(f) => f(nu),
        }
    }

    pub fn eval_real(&self, nu: f64) -> f64 {
        self.eval(nu).re
    }

    /// Symmetry defect at `ν`, relative to the size of the two sides.
    pub fn symmetry_defect(&self, nu: f64) -> f64 {
        let (lhs, rhs) = match self.class {
            SymmetryClass::Davies => (self.eval(-nu), self.eval(nu) * nu.exp()),
            SymmetryClass::Amplitude => (self.eval(-nu), self.eval(nu).conj() * (nu / 2.0).exp()),
        };
        let scale = lhs.norm().max(rhs.norm());
        if scale == 0.0 {
            0.0
        } else {
            (lhs - rhs).norm() / scale
        }
    }

    /// Check finiteness, the symmetry class and (for Davies profiles)
    /// non-negativity at the given frequencies.
    pub fn validate(&self, freqs: &[f64]) -> Result<()> {
        for &nu in freqs {
            for x in [nu, -nu] {
                let v = self.eval(x);
                if !v.re.is_finite() || !v.im.is_finite() {
                    return Err(self.invalid(format!("not finite at nu = {x:.6e} (outside the tabulated range?)")));
                }
                if self.class == SymmetryClass::Davies && (v.re < 0.0 || v.im != 0.0) {
                    return Err(self.invalid(format!("rate {v} at nu = {x:.6e} is not a non-negative real")));
                }
            }
            let defect = self.symmetry_defect(nu);
            if defect > SYMMETRY_TOL {
                let law = match self.class {
                    SymmetryClass::Davies => "gamma(-nu) = e^nu gamma(nu)",
                    SymmetryClass::Amplitude => "f(-nu) = e^(nu/2) conj(f(nu))",
                };
                return Err(self.invalid(format!("{law} violated at nu = {nu:.6e} (relative defect {defect:.3e})")));
            }
        }
        Ok(())
    }

    fn invalid(&self, reason: String) -> Error {
        Error::InvalidProfile { name: self.name.clone(), reason }
    }
}

fn interpolate(points: &[(f64, f64)], x: f64) -> f64 {
    let (first, last) = (points[0], points[points.len() - 1]);
    if x < first.0 || x > last.0 {
        return f64::NAN;
    }
    let k = points.partition_point(|p| p.0 <= x);
    if k == points.len() {
        return last.1;
    }
    let (x0, y0) = points[k - 1];
    let (x1, y1) = points[k];
    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
}
