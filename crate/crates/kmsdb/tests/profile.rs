mod common;

use common::assert_close;
use kmsdb::linalg::c;
use kmsdb::profile::{self, SymmetryClass, WeightProfile};
use kmsdb::Error;

#[test]
fn built_in_values() {
    assert_close(profile::gamma_metropolis(-1.0), 1.0, 0.0);
    assert_close(profile::gamma_metropolis(2.0), (-2.0f64).exp(), 1e-16);
    assert_close(profile::gamma_glauber(0.0), 0.5, 0.0);
    assert_close(profile::f_glauber(1.3), 0.5 - 0.5 * (1.3f64 / 4.0).tanh(), 1e-15);
    assert_close(profile::f_metropolis(3.0), (-1.5f64).exp(), 1e-16);
    assert_close(profile::gamma_glauber(800.0), 0.0, 1e-300);
    assert!(profile::gamma_glauber(-800.0) == 1.0);
}

#[test]
fn built_ins_satisfy_their_symmetry() {
    let grid: Vec<f64> = (0..41).map(|k| -10.0 + 0.5 * k as f64).collect();
    for name in ["metropolis", "glauber", "sqrt-metropolis", "sqrt-glauber"] {
        WeightProfile::by_name(name).unwrap().validate(&grid).unwrap();
    }
    let s = WeightProfile::sqrt_of(&WeightProfile::glauber()).unwrap();
    assert_eq!(s.class(), SymmetryClass::Amplitude);
    s.validate(&grid).unwrap();
    let a = WeightProfile::abs_squared_of(&WeightProfile::sqrt_glauber()).unwrap();
    a.validate(&grid).unwrap();
    assert!(WeightProfile::sqrt_of(&WeightProfile::sqrt_glauber()).is_err());
}

#[test]
fn asymmetric_profiles_fail_validation() {
    let bad = WeightProfile::from_fn("flat", SymmetryClass::Davies, |_| c(1.0, 0.0));
    assert!(matches!(bad.validate(&[0.5]), Err(Error::InvalidProfile { .. })));
    assert!(bad.validate(&[0.0]).is_ok());
    let negative = WeightProfile::from_fn("neg", SymmetryClass::Davies, |nu| c(-profile::gamma_metropolis(nu), 0.0));
    assert!(negative.validate(&[1.0]).is_err());
    // Complex amplitudes obeying f(−ν) = e^{ν/2} conj f(ν) are valid.
    let phase = WeightProfile::from_fn("phase", SymmetryClass::Amplitude, |nu| {
        c(profile::f_glauber(nu), 0.0) * c(0.0, nu).exp()
    });
    phase.validate(&[0.3, 2.0]).unwrap();
}

#[test]
fn custom_tables_interpolate_and_validate() {
    let pts: Vec<(f64, f64)> = (0..201).map(|k| -5.0 + 0.05 * k as f64).map(|x| (x, profile::gamma_glauber(x))).collect();
    let p = WeightProfile::custom("tab", SymmetryClass::Davies, pts).unwrap();
    assert_close(p.eval_real(0.0), 0.5, 1e-15);
    assert!(p.eval_real(6.0).is_nan());
    assert!(p.validate(&[6.0]).is_err());
    // Linear interpolation of a convex function breaks the symmetry off-grid.
    assert!(p.validate(&[0.025]).is_err());
    let doc = r#"{"name":"two","class":"davies","points":[[-1,1],[1,0.36787944117144233]]}"#;
    let q = WeightProfile::from_json(doc).unwrap();
    assert_eq!(q.name(), "two");
    q.validate(&[1.0]).unwrap();
    assert!(WeightProfile::from_json(r#"{"class":"davies","points":[[0,1]]}"#).is_err());
    assert!(WeightProfile::from_json(r#"{"class":"other","points":[]}"#).is_err());
    assert!(WeightProfile::by_name("nope").is_err());
}
