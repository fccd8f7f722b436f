//! Property tests for the loop algebra, involutions, splits and the Sym formula.

mod common;

use common::{c, complex, group_element, twisted, twisted_traceless, unit_circle};
use dpw::factor::{birkhoff_split, generalized_iwasawa};
use dpw::loopalg::{ComplexMat2, LaurentMatrix, C64};
use dpw::potential::{Potential, Variable};
use dpw::realform::{involute_algebra, involute_group, is_fixed, symmetrize_pair, ClassKind};
use dpw::sym::sym_complex;
use proptest::prelude::*;

fn class() -> impl Strategy<Value = ClassKind> {
    prop::sample::select(ClassKind::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn twisting_closure(a in twisted(3), b in twisted(3)) {
        prop_assert!(a.mul(&b, 12).twist_residual() <= 1e-12);
        prop_assert!(a.lambda_derivative().twist_residual() <= 1e-12);
        let g = a.scale(c(0.1, 0.0)).exp(12);
        prop_assert!(g.inv(1e-12, 12).unwrap().twist_residual() <= 1e-12);
    }

    #[test]
    fn evaluation_homomorphism(a in twisted(3), b in twisted(3), lam in complex()) {
        prop_assume!(lam.norm() > 0.2);
        let lhs = a.mul(&b, 12).evaluate(lam).unwrap();
        let rhs = a.evaluate(lam).unwrap() * b.evaluate(lam).unwrap();
        let scale = 1.0 + rhs.max_abs();
        prop_assert!((lhs - rhs).max_abs() <= 1e-10 * scale);
    }

    #[test]
    fn exponential_is_unimodular(g in twisted_traceless(2)) {
        let e = g.scale(c(0.3, 0.0)).exp(24);
        for lam in unit_circle(8) {
            let d = e.evaluate(lam).unwrap().det();
            prop_assert!((d - c(1.0, 0.0)).norm() <= 1e-9, "det {}", d);
        }
    }

    #[test]
    fn leibniz_rule(a in twisted(3), b in twisted(3)) {
        let lhs = a.mul(&b, 12).lambda_derivative();
        let rhs = &a.lambda_derivative().mul(&b, 12) + &a.mul(&b.lambda_derivative(), 12);
        prop_assert!(lhs.distance(&rhs) <= 1e-12);
    }

    #[test]
    fn inverse_round_trip(d in twisted(2)) {
        // ‖a − id‖ < 0.5 in Wiener norm.
        let n = d.wiener_norm();
        let a = &LaurentMatrix::identity() + &d.scale(c(0.45 / n.max(1e-300), 0.0));
        let inv = a.inv(1e-13, 12).unwrap();
        prop_assert!(a.mul(&inv, 12).distance(&LaurentMatrix::identity()) <= 1e-10);
    }

    #[test]
    fn json_round_trip(a in twisted(3)) {
        let text = serde_json::to_string(&a).unwrap();
        let back: LaurentMatrix = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back.kmin(), a.kmin());
        prop_assert!(back.distance(&a) == 0.0);
    }

    #[test]
    fn algebra_involutions(k in class(), g in twisted(3), h in twisted(3), s in complex()) {
        let inv = |x: &LaurentMatrix| involute_algebra(k, x);
        prop_assert!(inv(&inv(&g)).distance(&g) <= 1e-12);
        prop_assert!(inv(&g.scale(s)).distance(&inv(&g).scale(s.conj())) <= 1e-12);
        let lhs = inv(&g.bracket(&h, 12));
        let rhs = inv(&g).bracket(&inv(&h), 12);
        prop_assert!(lhs.distance(&rhs) <= 1e-10);
    }

    #[test]
    fn fixed_point_algebra_closure(k in class(), g in twisted(2), h in twisted(2), r in -2.0..2.0f64) {
        // ½(x + 𝔦x) is fixed; brackets and real combinations stay fixed.
        let fix = |x: &LaurentMatrix| (x + &involute_algebra(k, x)).scale(c(0.5, 0.0));
        let (a, b) = (fix(&g), fix(&h));
        prop_assert!(is_fixed(k, &a, 1e-12).0);
        prop_assert!(is_fixed(k, &a.bracket(&b, 12), 1e-10).0);
        prop_assert!(is_fixed(k, &(&a + &b.scale(c(r, 0.0))), 1e-12).0);
    }

    #[test]
    fn group_involution_is_involutive(k in class(), g in group_element(1, 0.3)) {
        let once = involute_group(k, &g, 12).unwrap();
        let twice = involute_group(k, &once, 12).unwrap();
        prop_assert!(twice.distance(&g) <= 1e-11, "{}", twice.distance(&g));
    }

    #[test]
    fn symmetrized_pairs_are_fixed(k in class(), a in complex(), b in complex(), e in complex(), f in complex()) {
        prop_assume!(a.norm() > 0.1 && f.norm() > 0.1);
        let zero = c(0.0, 0.0);
        let eta = Potential::constant(Variable::Z, &[(-1, ComplexMat2::new(zero, a, b, zero))]);
        let tau = Potential::constant(Variable::W, &[(1, ComplexMat2::new(zero, e, f, zero))]);
        let Ok(pair) = symmetrize_pair(k, &eta, Some(&tau), &[]) else {
            return Ok(());
        };
        let z = c(0.3, -0.2);
        if k.is_compact() {
            let image = involute_algebra(k, &pair.eta.eval_at(z).unwrap());
            prop_assert!(image.distance(&pair.tau.eval_at(z.conj()).unwrap()) <= 1e-12);
        } else {
            for p in [&pair.eta, &pair.tau] {
                let x = p.eval_at(c(0.3, 0.0)).unwrap();
                prop_assert!(is_fixed(k, &x, 1e-12).0);
            }
        }
    }

    #[test]
    fn split_reconstructs(g in group_element(1, 0.3), h in group_element(1, 0.3)) {
        let s = generalized_iwasawa(&g, &h, 1e-12, 12).unwrap();
        prop_assert!(s.residual <= 1e-9, "{}", s.residual);
        prop_assert!(s.vplus.kmin() >= 0);
        prop_assert!(s.vminus.kmax() <= 0);
        prop_assert!(s.vminus.coeff(0).distance_to_identity() <= 1e-12);
    }

    #[test]
    fn sym_identity(g in group_element(1, 0.3), h in complex(), r in 0.8..1.25f64, th in -3.2..3.2f64) {
        prop_assume!(h.norm() > 0.1);
        let lam = C64::from_polar(r, th);
        let s = sym_complex(&g, h, lam).unwrap();
        let residual = s.psi - s.phi + s.n.scale((h * 2.0).inv());
        let scale = s.psi.max_abs() + s.phi.max_abs() + s.n.max_abs() / h.norm();
        prop_assert!(residual.max_abs() <= 1e-14 * scale);
        prop_assert!(s.psi.trace().norm() <= 1e-12 * scale);
        prop_assert!(s.n.trace().norm() <= 1e-12 * scale);
    }
}

trait IdentityDistance {
    fn distance_to_identity(&self) -> f64;
}

impl IdentityDistance for ComplexMat2 {
    fn distance_to_identity(&self) -> f64 {
        (*self - ComplexMat2::identity()).max_abs()
    }
}

#[test]
fn plus_type_loop_splits_to_its_inverse() {
    let d = c(0.3, -0.1);
    let m = LaurentMatrix::monomial(2, ComplexMat2::diag(d, -d), true).exp(12);
    let s = birkhoff_split(&m, 12).unwrap();
    let expected = m.inv(1e-13, 12).unwrap();
    assert!(s.vplus.distance(&expected) < 1e-12);
    assert!(s.vminus.distance(&LaurentMatrix::identity()) < 1e-12);
}

#[test]
fn exponential_inverse_oracle() {
    for t in [0.1, 0.5, 1.0] {
        let x = LaurentMatrix::monomial(1, ComplexMat2::sigma1(), true).scale(C64::new(t, 0.0));
        let inv = x.exp(12).inv(1e-13, 12).unwrap();
        let oracle = x.scale(C64::new(-1.0, 0.0)).exp(12);
        assert!(inv.distance(&oracle) <= 1e-9);
    }
}
