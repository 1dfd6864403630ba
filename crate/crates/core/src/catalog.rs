//! Reference problems, one per regime, with power and exponential weights
//! on the line. All of them satisfy the hypotheses of their regime and have
//! finite functionals; they back the test suites and `morrey-embed sweep`.

use crate::estimators::RegimeTag;
use crate::spaces::{parse_weight, ParamQuadruple, RadialProblem, Weight1D};

fn build(p: [f64; 4], omega1: &str, omega2: &str, v2: &str) -> RadialProblem {
    let params =
        ParamQuadruple::new(p[0], p[1], p[2], p[3], 1).expect("catalog exponents are valid");
    let w = |s: &str| parse_weight(s).expect("catalog weights parse");
    RadialProblem::new(params, w(omega1), w(omega2), Weight1D::one(), w(v2))
}

/// The reference problem for `tag`; `None` for `OpenCase` and `Unsupported`.
pub fn instance(tag: RegimeTag) -> Option<RadialProblem> {
    use RegimeTag::*;
    let e = "exp(-t)";
    Some(match tag {
        Main01 => build([2.0, 1.0, 2.0, 1.0], "t^-0.25", e, "1"),
        Main02I => build([2.0, 1.0, 2.0, 3.0], "t^-0.25", e, "1"),
        Main02II => build([3.0, 1.0, 3.0, 2.0], "t^-0.25", e, "1"),
        Main03I => build([2.0, 1.0, 1.0, 1.0], "t^-0.625", e, "1"),
        Main03II => build([2.0, 1.0, 3.0, 1.0], "t^-0.25 * exp(-t)", e, "1"),
        Thm1I => build([2.0, 1.0, 1.0, 3.0], "t^-0.625", e, "1"),
        Thm1II => build([3.0, 1.0, 1.0, 2.0], "t^-0.625", e, "1"),
        Thm3I => build([3.0, 1.0, 2.0, 4.0], "t^-0.125 * (1 + t)^-0.675", e, "1"),
        Thm3II => build([2.0, 1.0, 4.0, 3.0], "t^0.125", e, "1"),
        Thm3III => build([4.0, 1.0, 2.0, 3.0], "t^-0.125 * (1 + t)^-0.8", e, "1"),
        Thm3IV => build([3.0, 1.0, 4.0, 2.0], "t^0.125", e, "1"),
        Thm2 => build([2.0, 2.0, 1.0, 3.0], "1", e, "t^1.5"),
        Thm4I => build([1.0, 1.0, 2.0, 3.0], "1", "(1 + t)^-2", "t"),
        Thm4II => build([1.0, 1.0, 3.0, 2.0], "1", "(1 + t)^-2", "t"),
        NotEmbedded => build([1.0, 2.0, 1.0, 2.0], "t^-0.5", e, "1"),
        OpenCase | Unsupported => return None,
    })
}

/// `(tag, problem)` for every regime with a functional.
pub fn suite() -> Vec<(RegimeTag, RadialProblem)> {
    RegimeTag::ESTIMATED
        .into_iter()
        .map(|t| {
            (
                t,
                instance(t).expect("every estimated regime has an instance"),
            )
        })
        .collect()
}
