use super::*;
use crate::catalog;

fn q(p1: f64, p2: f64, th1: f64, th2: f64) -> ParamQuadruple {
    ParamQuadruple::new(p1, p2, th1, th2, 1).unwrap()
}

#[test]
fn classify_rows() {
    use RegimeTag::*;
    assert_eq!(classify(&q(2.0, 1.0, 2.0, 1.0)), Main01);
    assert_eq!(classify(&q(2.0, 1.0, 2.0, 3.0)), Main02I);
    assert_eq!(classify(&q(3.0, 1.0, 3.0, 2.0)), Main02II);
    assert_eq!(classify(&q(2.0, 1.0, 1.0, 1.0)), Main03I);
    assert_eq!(classify(&q(2.0, 1.0, 3.0, 1.0)), Main03II);
    assert_eq!(classify(&q(2.0, 1.0, 1.0, 3.0)), Thm1I);
    assert_eq!(classify(&q(3.0, 1.0, 1.0, 2.0)), Thm1II);
    assert_eq!(classify(&q(3.0, 1.0, 2.0, 4.0)), Thm3I);
    assert_eq!(classify(&q(2.0, 1.0, 4.0, 3.0)), Thm3II);
    assert_eq!(classify(&q(4.0, 1.0, 2.0, 3.0)), Thm3III);
    assert_eq!(classify(&q(3.0, 1.0, 4.0, 2.0)), Thm3IV);
    assert_eq!(classify(&q(2.0, 2.0, 1.0, 3.0)), Thm2);
    assert_eq!(classify(&q(1.0, 1.0, 2.0, 3.0)), Thm4I);
    assert_eq!(classify(&q(1.0, 1.0, 3.0, 2.0)), Thm4II);
    assert_eq!(classify(&q(1.0, 2.0, 1.0, 2.0)), NotEmbedded);
    assert_eq!(classify(&q(2.0, 1.0, 2.0, 0.5)), OpenCase);
    assert_eq!(classify(&q(2.0, 1.0, f64::INFINITY, 1.0)), Unsupported);
    // p1 = p2 = th1 < th2 has no row of its own.
    assert_eq!(classify(&q(2.0, 2.0, 2.0, 3.0)), Main02I);
}

#[test]
fn classify_boundaries() {
    use RegimeTag::*;
    // p1 = th2 falls into the supremum cases.
    assert_eq!(classify(&q(3.0, 1.0, 3.0, 3.0)), Main02I);
    assert_eq!(classify(&q(3.0, 1.0, 1.0, 3.0)), Thm1I);
    assert_eq!(classify(&q(3.0, 1.0, 2.0, 3.0)), Thm3I);
    // th1 = p2 goes to Thm1, th1 = th2 to the th1 <= th2 branch.
    assert_eq!(classify(&q(3.0, 1.0, 1.0, 2.0)), Thm1II);
    assert_eq!(classify(&q(4.0, 1.0, 3.0, 3.0)), Thm3III);
    assert_eq!(classify(&q(1.0, 1.0, 2.0, 2.0)), Thm4I);
    // p2 = th2 beats p1 = th1 < ... only when both hold.
    assert_eq!(classify(&q(1.0, 1.0, 1.0, 1.0)), Main01);
    assert_eq!(classify(&q(1.0, 1.0, 2.0, 1.0)), Main03II);
}

#[test]
fn tags_round_trip() {
    for t in RegimeTag::ALL {
        assert_eq!(t.as_str().parse::<RegimeTag>().unwrap(), t);
        let json = serde_json::to_string(&t).unwrap();
        assert_eq!(json, format!("\"{}\"", t.as_str()));
    }
    assert!("Thm9".parse::<RegimeTag>().is_err());
}

#[test]
fn main01_closed_form() {
    let prob = catalog::instance(RegimeTag::Main01).unwrap();
    let r = estimate(&prob, &QuadratureConfig::default()).unwrap();
    assert_eq!(r.regime, RegimeTag::Main01);
    let want = (std::f64::consts::PI / 2.0).powf(0.25);
    let got = r.value.unwrap();
    assert!((got - want).abs() < 1e-6 * want, "{got} vs {want}");
    assert!(r.hypotheses_verified, "{:?}", r.hypothesis_checks);
}

#[test]
fn catalog_instances_are_finite_and_verified() {
    let cfg = QuadratureConfig::default();
    for (tag, prob) in catalog::suite() {
        let r = estimate(&prob, &cfg).unwrap_or_else(|e| panic!("{tag}: {e}"));
        assert_eq!(r.regime, tag);
        let v = r.value.unwrap();
        assert!(v.is_finite() && v > 0.0, "{tag}: {v} {:?}", r.terms);
        assert!(
            r.hypotheses_verified,
            "{tag}: {:?}",
            r.hypothesis_checks
                .iter()
                .map(|c| c.summary())
                .collect::<Vec<_>>()
        );
    }
}

#[test]
fn terms_sum_to_value() {
    let prob = catalog::instance(RegimeTag::Main03II).unwrap();
    let r = estimate_with(
        &prob,
        &QuadratureConfig::default(),
        &EstimateOptions::unchecked(),
    )
    .unwrap();
    assert_eq!(r.terms.len(), 2);
    assert!(r.terms["global_term"] > 0.0);
    assert_eq!(r.value.unwrap(), r.terms.values().sum::<f64>());
    assert!(!r.hypotheses_verified);
    assert!(r.warnings.iter().any(|w| w.contains("unverified")));
}

#[test]
fn homogeneity_in_omega1() {
    let cfg = QuadratureConfig::default();
    let opts = EstimateOptions::unchecked();
    for tag in [RegimeTag::Main02II, RegimeTag::Thm1I, RegimeTag::Thm4I] {
        let prob = catalog::instance(tag).unwrap();
        let a = estimate_with(&prob, &cfg, &opts).unwrap().value.unwrap();
        let b = estimate_with(&prob.with_omega1_scaled(3.0), &cfg, &opts)
            .unwrap()
            .value
            .unwrap();
        assert!((b * 3.0 / a - 1.0).abs() < 1e-9, "{tag}: {a} {b}");
    }
}

#[test]
fn bare_reports() {
    let cfg = QuadratureConfig::default();
    let r = estimate(&catalog::instance(RegimeTag::NotEmbedded).unwrap(), &cfg).unwrap();
    assert_eq!(r.value, Some(f64::INFINITY));
    assert!(r.explanation.is_some());
    let json = serde_json::to_value(&r).unwrap();
    assert_eq!(json["value"], "inf");

    let open = catalog::instance(RegimeTag::Main01)
        .unwrap()
        .with_params(q(2.0, 1.0, 2.0, 0.5));
    let r = estimate(&open, &cfg).unwrap();
    assert_eq!(r.regime, RegimeTag::OpenCase);
    assert_eq!(r.value, None);
}

#[test]
fn family_estimators_reject_other_regimes() {
    let cfg = QuadratureConfig::default();
    let prob = catalog::instance(RegimeTag::Main01).unwrap();
    assert!(estimate_main01(&prob, &cfg).is_ok());
    match estimate_thm1(&prob, &cfg) {
        Err(Error::WrongRegime { regime, estimator }) => {
            assert_eq!(regime, "Main01");
            assert_eq!(estimator, "thm1");
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn failing_hypothesis_refuses_unless_forced() {
    let cfg = QuadratureConfig::default();
    // omega2 = chi_(0,1) is not in Omega: its tail vanishes past 1.
    let prob = RadialProblem::unweighted(
        q(2.0, 1.0, 2.0, 1.0),
        crate::spaces::parse_weight("t^-0.25").unwrap(),
        crate::spaces::parse_weight("chi(0,1)").unwrap(),
    );
    match estimate(&prob, &cfg) {
        Err(Error::HypothesisFailed(c)) => assert_eq!(c.subject(), "omega2"),
        other => panic!("{other:?}"),
    }
    let r = estimate_with(&prob, &cfg, &EstimateOptions::forced()).unwrap();
    assert!(!r.hypotheses_verified);
    assert!(r.value.is_some());
    assert!(r.warnings.iter().any(|w| w.contains("force")));
}
