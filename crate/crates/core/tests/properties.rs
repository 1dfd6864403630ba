use morrey_embed::catalog;
use morrey_embed::estimators::{classify, estimate_with, EstimateOptions, RegimeTag};
use morrey_embed::expr::Expr;
use morrey_embed::numerics::{
    div0, mul0, stieltjes_integrate, sup_over_ray, weighted_lp_norm, Interval, Orientation, QuadratureConfig, TailMeasure,
};
use morrey_embed::oracle::ratio;
use morrey_embed::spaces::{
    lm_norm, parse_weight, v_script, v_tilde, Exponent, ParamQuadruple, RadialProblem, RadialTestFunction,
};
use proptest::prelude::*;
use std::sync::Arc;

fn cfg() -> QuadratureConfig {
    QuadratureConfig::default()
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

fn log_uniform(lo: f64, hi: f64) -> impl Strategy<Value = f64> {
    (lo.ln()..hi.ln()).prop_map(f64::exp)
}

fn step_function() -> impl Strategy<Value = RadialTestFunction> {
    (1usize..5).prop_flat_map(|k| {
        (
            prop::collection::vec(log_uniform(0.05, 20.0), k + 1),
            prop::collection::vec(0.0f64..5.0, k),
        )
            .prop_filter_map("distinct radii", |(mut r, mut c)| {
                r.sort_by(f64::total_cmp);
                if r.windows(2).any(|w| w[1] / w[0] < 1.01) {
                    return None;
                }
                c[0] += 0.5;
                RadialTestFunction::new(r, c).ok()
            })
    })
}

fn estimated_tag() -> impl Strategy<Value = RegimeTag> {
    prop::sample::select(RegimeTag::ESTIMATED.to_vec())
}

fn unchecked(prob: &RadialProblem) -> f64 {
    estimate_with(prob, &cfg(), &EstimateOptions::unchecked()).unwrap().value.unwrap()
}

fn atom() -> impl Strategy<Value = String> {
    prop_oneof![
        (-2.0f64..2.0).prop_map(|a| format!("t^{a}")),
        (-2.0f64..0.5).prop_map(|b| format!("exp({b} * t)")),
        (-3.0f64..3.0).prop_map(|a| format!("(1 + t)^{a}")),
        (0.0f64..2.0, 2.0f64..9.0).prop_map(|(a, b)| format!("chi({a}, {b})")),
        (0.1f64..3.0).prop_map(|c| format!("log({c} + t)")),
        (0.1f64..3.0).prop_map(|c| format!("min(t, {c})")),
        (0.1f64..3.0, 0.1f64..2.0).prop_map(|(c, a)| format!("max(t^{a}, {c})")),
        (0.1f64..10.0).prop_map(|c| format!("{c}")),
    ]
}

fn expression() -> impl Strategy<Value = String> {
    atom().prop_recursive(3, 12, 2, |inner| {
        (inner.clone(), inner, prop::sample::select(vec!["+", "*", "/", "-"]))
            .prop_map(|(a, b, op)| format!("({a}) {op} ({b})"))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dispatcher_is_total_and_deterministic(
        p1 in 0.1f64..10.0, p2 in 0.1f64..10.0, th1 in 0.1f64..10.0, th2 in 0.1f64..10.0,
        ties in prop::collection::vec(any::<bool>(), 3),
    ) {
        // Ties push draws onto the boundaries of the decision table.
        let th2 = if ties[0] { p2 } else { th2 };
        let th1 = if ties[1] { p1 } else { th1 };
        let p1 = if ties[2] { p2.max(p1) } else { p1 };
        let q = ParamQuadruple::new(p1, p2, th1, th2, 1).unwrap();
        let tag = classify(&q);
        prop_assert_eq!(classify(&q), tag);
        prop_assert_eq!(tag == RegimeTag::NotEmbedded, p1 < p2);
        prop_assert_eq!(tag == RegimeTag::OpenCase, p1 >= p2 && th2 < p2);
        if p1 >= p2 && th2 >= p2 {
            prop_assert!(RegimeTag::ESTIMATED.contains(&tag));
        }
    }

    #[test]
    fn conventions(a in prop_oneof![Just(0.0), Just(f64::INFINITY), 1e-300f64..1e300]) {
        prop_assert_eq!(mul0(0.0, f64::INFINITY), 0.0);
        prop_assert_eq!(mul0(a, 0.0), 0.0);
        prop_assert_eq!(div0(0.0, a), 0.0);
        if a > 0.0 && a.is_finite() {
            prop_assert_eq!(div0(a, f64::INFINITY), 0.0);
            prop_assert_eq!(mul0(a, 2.0), 2.0 * a);
        }
    }

    #[test]
    fn script_is_complementary(t in log_uniform(1e-4, 1e4), x in log_uniform(1e-4, 1e4)) {
        let prob = catalog::instance(RegimeTag::Thm1I).unwrap();
        let a = v_script(t, x, &prob, &cfg()).unwrap();
        let b = v_script(x, t, &prob, &cfg()).unwrap();
        prop_assert!((a + b - 1.0).abs() < 1e-12);
    }

    #[test]
    fn expressions_round_trip(src in expression()) {
        let e = Expr::parse(&src).unwrap();
        let back = Expr::parse(&e.to_string()).unwrap();
        for k in 0..1000 {
            let t = 10f64.powf(-6.0 + 12.0 * k as f64 / 999.0);
            let (u, v) = (e.eval(t), back.eval(t));
            prop_assert!(u.is_nan() && v.is_nan() || u == v || rel(u, v) < 1e-12, "{} -> {}: {} vs {} at {}", src, e, u, v, t);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn weighted_norm_is_monotone_and_homogeneous(
        p in 0.3f64..6.0, a in log_uniform(1e-3, 0.5), b in log_uniform(2.0, 1e3),
        shrink in 1.0f64..1.9, lambda in log_uniform(1e-3, 1e3),
    ) {
        let f = |t: f64| (1.0 + t).powf(-2.0) * (1.0 + (t.ln()).sin().abs());
        let w = |t: f64| t.powf(0.3) * (-t / 50.0).exp();
        let outer = Interval::new(a, b).unwrap();
        let inner = Interval::new(a * shrink, b / shrink).unwrap();
        let n_out = weighted_lp_norm(f, p, w, outer, &[], &cfg()).unwrap();
        let n_in = weighted_lp_norm(f, p, w, inner, &[], &cfg()).unwrap();
        prop_assert!(n_in <= n_out * (1.0 + 1e-12));
        let scaled = weighted_lp_norm(|t| lambda * f(t), p, w, outer, &[], &cfg()).unwrap();
        prop_assert!(rel(scaled, lambda * n_out) < 1e-12, "{} vs {}", scaled, lambda * n_out);
    }

    #[test]
    fn stieltjes_is_monotone_in_the_integrand(theta in 0.5f64..4.0, power in 0.5f64..3.0, c in 0.0f64..2.0) {
        let w: morrey_embed::numerics::DynFn = Arc::new(|t| Ok((-t).exp()));
        let m = TailMeasure::new(w, theta, power, Orientation::TailRight, &[], false, &cfg()).unwrap();
        let lo = stieltjes_integrate(|t| Ok(t / (1.0 + t)), &m, &cfg()).unwrap();
        let hi = stieltjes_integrate(|t| Ok(t / (1.0 + t) + c * (-t).exp()), &m, &cfg()).unwrap();
        prop_assert!(lo <= hi * (1.0 + 1e-9));
    }

    #[test]
    fn sup_dominates_samples(a in 0.1f64..3.0, b in 0.1f64..3.0, s in log_uniform(1e-3, 1e3)) {
        let f = |t: f64| (t / s).powf(a) / (1.0 + (t / s).powf(a + b));
        let v = sup_over_ray(f, Interval::new(0.0, f64::INFINITY).unwrap(), &cfg()).unwrap();
        for k in -60..=60 {
            let t = s * 10f64.powf(k as f64 / 13.7);
            prop_assert!(v >= f(t));
        }
        // Interior maximum, known in closed form.
        let t_star = s * (a / b).powf(1.0 / (a + b));
        prop_assert!(rel(v, f(t_star)) < 1e-6);
    }

    #[test]
    fn v_tilde_is_non_decreasing(x in log_uniform(1e-4, 1e4), step in 1.0f64..10.0) {
        for tag in [RegimeTag::Thm2, RegimeTag::Thm4I, RegimeTag::Main01] {
            let prob = catalog::instance(tag).unwrap();
            let lo = v_tilde(x, &prob, &cfg()).unwrap();
            let hi = v_tilde(x * step, &prob, &cfg()).unwrap();
            prop_assert!(lo <= hi * (1.0 + 1e-12));
        }
    }

    #[test]
    fn lm_norm_is_monotone(f in step_function(), bump in 0.0f64..3.0, lambda in 1.0f64..4.0) {
        let e1 = Exponent::new(1.5).unwrap();
        let e2 = Exponent::new(2.5).unwrap();
        let omega = parse_weight("t^-0.2 * exp(-t)").unwrap();
        let v = parse_weight("1 + t").unwrap();
        let base = lm_norm(&f, e1, e2, &omega, &v, 2, &cfg()).unwrap();
        let bigger_f = RadialTestFunction::new(f.breakpoints().to_vec(), f.levels().iter().map(|c| c + bump).collect()).unwrap();
        let bigger_omega = omega.mul(&parse_weight(&format!("1 + {bump} * chi(0.5, 2)")).unwrap());
        let bigger_v = v.scaled(lambda);
        let tol = 1.0 + 1e-9;
        prop_assert!(base <= tol * lm_norm(&bigger_f, e1, e2, &omega, &v, 2, &cfg()).unwrap());
        prop_assert!(base <= tol * lm_norm(&f, e1, e2, &bigger_omega, &v, 2, &cfg()).unwrap());
        prop_assert!(base <= tol * lm_norm(&f, e1, e2, &omega, &bigger_v, 2, &cfg()).unwrap());
    }

    #[test]
    fn ratio_ignores_the_scale_of_f(f in step_function(), lambda in log_uniform(1e-4, 1e4), tag in estimated_tag()) {
        let prob = catalog::instance(tag).unwrap();
        let a = ratio(&f, &prob, &cfg()).unwrap();
        let b = ratio(&f.scaled(lambda), &prob, &cfg()).unwrap();
        prop_assert!(rel(a, b) < 1e-9, "{}: {} vs {}", tag, a, b);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    #[test]
    fn estimates_are_homogeneous(tag in estimated_tag(), lambda in log_uniform(1e-3, 1e3)) {
        let prob = catalog::instance(tag).unwrap();
        let base = unchecked(&prob);
        prop_assert!(rel(unchecked(&prob.with_omega2_scaled(lambda)), lambda * base) < 1e-9);
        prop_assert!(rel(unchecked(&prob.with_omega1_scaled(lambda)), base / lambda) < 1e-9);
        prop_assert!(rel(unchecked(&prob.with_v2_scaled(lambda)), lambda * base) < 1e-9);
    }

    #[test]
    fn estimates_are_monotone_in_the_weights(tag in estimated_tag(), c in 0.05f64..2.0, a in log_uniform(0.05, 5.0)) {
        let prob = catalog::instance(tag).unwrap();
        let base = unchecked(&prob);
        // A smooth bump keeps every tail measure on the density path; with a
        // jump in omega1 the nested Stieltjes sums of Thm3_ii/iv take minutes.
        let bump = parse_weight(&format!("1 + {c} * exp(-(log(t) - {})^2)", a.ln())).unwrap();
        let more2 = RadialProblem { omega2: prob.omega2.mul(&bump), ..prob.clone() };
        let more1 = RadialProblem { omega1: prob.omega1.mul(&bump), ..prob.clone() };
        // Slack covers the quadrature tolerance only.
        prop_assert!(unchecked(&more2) >= base * (1.0 - 1e-7), "{}: omega2 bump lowered the estimate", tag);
        prop_assert!(unchecked(&more1) <= base * (1.0 + 1e-7), "{}: omega1 bump raised the estimate", tag);
    }
}
