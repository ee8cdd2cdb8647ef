use std::f64::consts::{PI, TAU};

use proptest::prelude::*;
use randers_core::curve::{enclosed_area, randers_length};
use randers_core::measure::{sigma_closed, volume_factor_quadrature};
use randers_core::variational::{
    hdotdot_form, hdotdot_form_fd, jacobi_residual, weierstrass_e, weierstrass_e_closed,
    JacobiSolution,
};
use randers_core::{
    ClosedCurve, Expr, FourierCoord, LagrangeContext, OneFormSpec, PhiSpec, RandersPlane,
    TangentSample, VolumeKind,
};

fn plane_strategy() -> impl Strategy<Value = RandersPlane> {
    (0usize..2, -PI..PI, 0.05f64..0.9).prop_map(|(which, c, b)| {
        let form = if which == 0 {
            OneFormSpec::constant(c, b)
        } else {
            OneFormSpec::polar(c, b)
        };
        RandersPlane::new(form.unwrap())
    })
}

fn kind_strategy() -> impl Strategy<Value = VolumeKind> {
    prop::sample::select(VolumeKind::ALL.to_vec())
}

fn point_away_from_origin() -> impl Strategy<Value = [f64; 2]> {
    (0.1f64..3.0, -PI..PI).prop_map(|(r, a)| [r * a.cos(), r * a.sin()])
}

fn vector(lo: f64, hi: f64) -> impl Strategy<Value = [f64; 2]> {
    (lo.ln()..hi.ln(), -PI..PI).prop_map(|(l, a)| [l.exp() * a.cos(), l.exp() * a.sin()])
}

fn expr_source() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        (0u32..100).prop_map(|n| format!("{}", n as f64 / 8.0)),
        Just("x1".to_string()),
        Just("x2".to_string()),
        Just("pi".to_string()),
    ];
    leaf.prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            (
                inner.clone(),
                prop::sample::select(vec!["+", "-", "*", "/", "^"]),
                inner.clone()
            )
                .prop_map(|(a, op, b)| format!("({a}){op}({b})")),
            inner.clone().prop_map(|a| format!("-({a})")),
            (
                prop::sample::select(vec!["sin", "cos", "exp", "abs", "sqrt", "log", "tan"]),
                inner.clone()
            )
                .prop_map(|(f, a)| format!("{f}({a})")),
            (inner.clone(), inner).prop_map(|(a, b)| format!("atan2({a}, {b})")),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn printed_expressions_reparse_to_the_same_tree(src in expr_source()) {
        let e = Expr::parse(&src, &["x1", "x2"]).unwrap();
        let again = Expr::parse(&e.to_string(), &["x1", "x2"]).unwrap();
        prop_assert!(e.same_shape(&again), "{} vs {}", e, again);
        prop_assert_eq!(e.to_string(), again.to_string());
    }

    #[test]
    fn metric_is_positively_homogeneous(plane in plane_strategy(), x in point_away_from_origin(),
                                        y in vector(0.1, 10.0), s in 0.01f64..100.0) {
        let f = plane.eval_f(x, y).unwrap();
        let fs = plane.eval_f(x, [s * y[0], s * y[1]]).unwrap();
        prop_assert!(f > 0.0);
        prop_assert!((fs - s * f).abs() <= 1e-12 * fs.abs().max(1.0));
    }

    #[test]
    fn fundamental_tensor_reproduces_the_metric(plane in plane_strategy(), x in point_away_from_origin(),
                                                y in vector(0.1, 10.0)) {
        let g = plane.fundamental_tensor(&TangentSample::new(x, y).unwrap()).unwrap();
        let f = plane.eval_f(x, y).unwrap();
        prop_assert!(g.is_positive_definite());
        prop_assert!((g.contract(y, y) - f * f).abs() <= 1e-8 * f * f);
        let alpha = y[0].hypot(y[1]);
        prop_assert!((g.det() - (f / alpha).powi(3)).abs() <= 1e-6 * g.det());
    }

    #[test]
    fn quadrature_matches_closed_forms(b in 0.0f64..0.95) {
        let phi = PhiSpec::new("1+s", 2, b).unwrap();
        let bh = volume_factor_quadrature(&phi, VolumeKind::BH).unwrap();
        prop_assert!((bh - sigma_closed(VolumeKind::BH, b, 2).unwrap()).abs() < 1e-8);
        let ht = volume_factor_quadrature(&phi, VolumeKind::HT).unwrap();
        prop_assert!((ht - 1.0).abs() < 1e-8);
    }

    #[test]
    fn length_and_area_ignore_the_starting_point(plane in plane_strategy(), kind in kind_strategy(),
                                                 a in 0.3f64..2.0, e in 0.0f64..0.2, shift in 0.0..TAU) {
        let c = ClosedCurve::circle(a).unwrap().with_mode(3, e * a);
        let s = c.phase_shifted(shift);
        let l1 = randers_length(&plane, &c).unwrap();
        let l2 = randers_length(&plane, &s).unwrap();
        prop_assert!((l1 - l2).abs() < 1e-10 * l1);
        let a1 = enclosed_area(&c, kind, plane.b()).unwrap();
        let a2 = enclosed_area(&s, kind, plane.b()).unwrap();
        prop_assert!((a1 - a2).abs() < 1e-10 * a1);
    }

    #[test]
    fn curve_text_round_trips(coeffs in prop::collection::vec(-1.0f64..1.0, 6)) {
        let c = ClosedCurve::new(
            FourierCoord::new(coeffs[0], vec![2.0, coeffs[1]], vec![0.0, coeffs[2]]),
            FourierCoord::new(coeffs[3], vec![0.0, coeffs[4]], vec![2.0, coeffs[5]]),
        );
        if let Ok(c) = c {
            let back = ClosedCurve::from_text(&c.to_text()).unwrap();
            prop_assert_eq!(back, c);
        }
    }

    #[test]
    fn excess_is_nonpositive_and_matches_closed_form(plane in plane_strategy(), kind in kind_strategy(),
                                                     lambda in -3.0f64..-0.1, x in point_away_from_origin(),
                                                     v in vector(0.1, 10.0), u in vector(0.1, 10.0)) {
        let ctx = LagrangeContext::new(plane, kind, lambda).unwrap();
        let closed = weierstrass_e_closed(lambda, v, u);
        prop_assert!(closed <= 0.0);
        let e = weierstrass_e(&ctx, x, v, u).unwrap();
        prop_assert!((e - closed).abs() < 1e-8, "{} vs {}", e, closed);
    }

    #[test]
    fn quadratic_form_closed_form_matches_hessian(plane in plane_strategy(), lambda in -3.0f64..3.0,
                                                 x in point_away_from_origin(),
                                                 v in vector(0.1, 10.0), y in vector(0.1, 10.0)) {
        let ctx = LagrangeContext::new(plane, VolumeKind::BH, lambda).unwrap();
        let q = hdotdot_form(lambda, v, y).unwrap();
        let fd = hdotdot_form_fd(&ctx, x, v, y).unwrap();
        prop_assert!((q - fd).abs() < 1e-6, "{} vs {}", q, fd);
    }

    #[test]
    fn jacobi_family_solves_the_equation(c1 in -10.0f64..10.0, c2 in -10.0f64..10.0, mu in -10.0f64..10.0,
                                         a in 0.1f64..5.0, lambda in -5.0f64..-0.1, t in 0.0..TAU) {
        let s = JacobiSolution::new(c1, c2, mu, a, lambda).unwrap();
        prop_assert!(jacobi_residual(&s, t).abs() < 1e-12);
    }
}
