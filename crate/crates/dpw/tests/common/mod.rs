//! Shared fixtures for the integration tests.
#![allow(dead_code)]

use dpw::cli::RunConfig;
use dpw::loopalg::{ComplexMat2, LaurentMatrix, C64};
use dpw::realform::ClassKind;
use proptest::prelude::*;
use proptest::strategy::ValueTree;
use proptest::test_runner::TestRunner;
use serde_json::json;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// The constant-coefficient test run of each class on an `n × n` grid.
///
/// Domains are small enough that second-order differences stay well inside
/// the acceptance tolerances at `n = 41`.
pub fn class_config(class: ClassKind, n: usize) -> RunConfig {
    let (c8, s8) = ((std::f64::consts::PI / 8.0).cos(), (std::f64::consts::PI / 8.0).sin());
    let (c4, s4) = ((std::f64::consts::PI / 4.0).cos(), (std::f64::consts::PI / 4.0).sin());
    let dom = |w: f64| json!({"re": [-w, w], "im": [-w, w], "nx": n, "ny": n});
    let v = match class {
        ClassKind::C1 => json!({"class": "c1", "domain": dom(0.05),
            "eta": [{"k": -1, "expr": [[0, 1], [0.5, 0]]}], "H": [0, 0.5]}),
        ClassKind::C2 => json!({"class": "c2", "domain": dom(0.03),
            "eta": [{"k": -1, "expr": [[0, [c8, s8]], [[c8, -s8], 0]]}], "H": [0.3, 0.4]}),
        ClassKind::C3 => json!({"class": "c3", "domain": dom(0.05),
            "eta": [{"k": -1, "expr": [[0, 1], [0.5, 0]]}], "H": 0.5}),
        ClassKind::C4 => json!({"class": "c4", "domain": dom(0.05),
            "eta": [{"k": -1, "expr": [[0, 1], [0.5, 0]]}], "H": [0, 0.5], "q": 0.4}),
        ClassKind::S1 => json!({"class": "s1", "domain": dom(0.05),
            "eta": [{"k": -1, "expr": [[0, 1], [1, 0]]}],
            "tau": [{"k": 1, "expr": [[0, [c4, s4]], [[c4, -s4], 0]]}], "H": [0.3, 0.4]}),
        ClassKind::S2 => json!({"class": "s2", "domain": dom(0.05),
            "eta": [{"k": -1, "expr": [[0, [0, 1]], [[0, 0.3], 0]]}],
            "tau": [{"k": 1, "expr": [[0, [0, 0.2]], [[0, 1], 0]]}], "H": [0, 0.5]}),
        ClassKind::S3 => json!({"class": "s3", "domain": dom(0.05),
            "eta": [{"k": -1, "expr": [[0, 1], [-1, 0]]}],
            "tau": [{"k": 1, "expr": [[0, [0, 1]], [[0, 1], 0]]}], "H": [0.3, 0.4]}),
    };
    RunConfig::from_json(&v.to_string()).expect("fixture config is valid")
}

pub fn complex() -> impl Strategy<Value = C64> {
    (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(re, im)| C64::new(re, im))
}

pub fn matrix() -> impl Strategy<Value = ComplexMat2> {
    (complex(), complex(), complex(), complex()).prop_map(|(a, b, c, d)| ComplexMat2::new(a, b, c, d))
}

/// Random twisted series on degrees `−k … k` with entries in the unit box.
pub fn twisted(k: i32) -> impl Strategy<Value = LaurentMatrix> {
    prop::collection::vec(matrix(), (2 * k + 1) as usize).prop_map(move |ms| {
        LaurentMatrix::from_fn(-k, k, true, |n| {
            let m = ms[(n + k) as usize];
            let zero = C64::new(0.0, 0.0);
            if n.rem_euclid(2) == 0 {
                ComplexMat2::diag(m[(0, 0)], m[(1, 1)])
            } else {
                ComplexMat2::new(zero, m[(0, 1)], m[(1, 0)], zero)
            }
        })
    })
}

/// Random traceless twisted series (a twisted loop-algebra element).
pub fn twisted_traceless(k: i32) -> impl Strategy<Value = LaurentMatrix> {
    twisted(k).prop_map(|g| {
        g.map_coeffs(|_, a| {
            let t = a.trace() * 0.5;
            a - ComplexMat2::identity().scale(t)
        })
    })
}

/// Random group element `exp(s·g)` with `g` traceless twisted on `−k … k`.
pub fn group_element(k: i32, s: f64) -> impl Strategy<Value = LaurentMatrix> {
    twisted_traceless(k).prop_map(move |g| g.scale(C64::new(s, 0.0)).exp(16).truncate(12))
}

/// Deterministic samples from a strategy.
pub fn samples<S: Strategy>(strategy: S, n: usize) -> Vec<S::Value> {
    let mut runner = TestRunner::deterministic();
    (0..n)
        .map(|_| strategy.new_tree(&mut runner).expect("strategy").current())
        .collect()
}

/// Points on the unit circle `e^{2πik/n}`, offset to avoid the real axis.
pub fn unit_circle(n: usize) -> Vec<C64> {
    (0..n)
        .map(|k| C64::new(0.0, 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / n as f64).exp())
        .collect()
}
