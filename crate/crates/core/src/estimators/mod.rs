//! Regime dispatch and the estimators of the embedding constant
//! `||Id : cLM_{p1 th1, omega1}(R^n, v1) -> LM_{p2 th2, omega2}(R^n, v2)||`.
//!
//! Each regime has a closed functional of the weights that is equivalent to
//! the embedding constant up to constants depending only on the exponents.
//! The estimators evaluate that functional; they do not try to recover the
//! hidden constants. [`crate::oracle`] supplies independent lower bounds.

mod formulas;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::conditions::{
    check_admissible, check_class, check_quasiconcave, phi1_with, phi2_with, CheckConfig,
    ClassKind, HypothesisCheck, TriState,
};
use crate::error::{Error, Result};
use crate::ext;
use crate::numerics::{powe, QuadratureConfig};
use crate::spaces::{Exponent, Kernels, ParamQuadruple, RadialProblem};

pub use formulas::evaluate_terms;

/// Which closed-form characterization applies to a parameter quadruple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RegimeTag {
    Main01,
    #[serde(rename = "Main02_i")]
    Main02I,
    #[serde(rename = "Main02_ii")]
    Main02II,
    #[serde(rename = "Main03_i")]
    Main03I,
    #[serde(rename = "Main03_ii")]
    Main03II,
    #[serde(rename = "Thm1_i")]
    Thm1I,
    #[serde(rename = "Thm1_ii")]
    Thm1II,
    #[serde(rename = "Thm3_i")]
    Thm3I,
    #[serde(rename = "Thm3_ii")]
    Thm3II,
    #[serde(rename = "Thm3_iii")]
    Thm3III,
    #[serde(rename = "Thm3_iv")]
    Thm3IV,
    Thm2,
    #[serde(rename = "Thm4_i")]
    Thm4I,
    #[serde(rename = "Thm4_ii")]
    Thm4II,
    NotEmbedded,
    OpenCase,
    Unsupported,
}

impl RegimeTag {
    /// Every tag, in declaration order.
    pub const ALL: [RegimeTag; 17] = [
        RegimeTag::Main01,
        RegimeTag::Main02I,
        RegimeTag::Main02II,
        RegimeTag::Main03I,
        RegimeTag::Main03II,
        RegimeTag::Thm1I,
        RegimeTag::Thm1II,
        RegimeTag::Thm3I,
        RegimeTag::Thm3II,
        RegimeTag::Thm3III,
        RegimeTag::Thm3IV,
        RegimeTag::Thm2,
        RegimeTag::Thm4I,
        RegimeTag::Thm4II,
        RegimeTag::NotEmbedded,
        RegimeTag::OpenCase,
        RegimeTag::Unsupported,
    ];

    /// Tags with a closed functional.
    pub const ESTIMATED: [RegimeTag; 14] = [
        RegimeTag::Main01,
        RegimeTag::Main02I,
        RegimeTag::Main02II,
        RegimeTag::Main03I,
        RegimeTag::Main03II,
        RegimeTag::Thm1I,
        RegimeTag::Thm1II,
        RegimeTag::Thm3I,
        RegimeTag::Thm3II,
        RegimeTag::Thm3III,
        RegimeTag::Thm3IV,
        RegimeTag::Thm2,
        RegimeTag::Thm4I,
        RegimeTag::Thm4II,
    ];

    pub fn as_str(self) -> &'static str {
        use RegimeTag::*;
        match self {
            Main01 => "Main01",
            Main02I => "Main02_i",
            Main02II => "Main02_ii",
            Main03I => "Main03_i",
            Main03II => "Main03_ii",
            Thm1I => "Thm1_i",
            Thm1II => "Thm1_ii",
            Thm3I => "Thm3_i",
            Thm3II => "Thm3_ii",
            Thm3III => "Thm3_iii",
            Thm3IV => "Thm3_iv",
            Thm2 => "Thm2",
            Thm4I => "Thm4_i",
            Thm4II => "Thm4_ii",
            NotEmbedded => "NotEmbedded",
            OpenCase => "OpenCase",
            Unsupported => "Unsupported",
        }
    }

    pub fn is_estimated(self) -> bool {
        Self::ESTIMATED.contains(&self)
    }

    /// Name of the estimator family handling this tag.
    pub fn family(self) -> &'static str {
        use RegimeTag::*;
        match self {
            Main01 => "main01",
            Main02I | Main02II => "main02",
            Main03I | Main03II => "main03",
            Thm1I | Thm1II => "thm1",
            Thm3I | Thm3II | Thm3III | Thm3IV => "thm3",
            Thm2 => "thm2",
            Thm4I | Thm4II => "thm4",
            NotEmbedded => "not_embedded",
            OpenCase => "open_case",
            Unsupported => "unsupported",
        }
    }
}

impl fmt::Display for RegimeTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RegimeTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        RegimeTag::ALL
            .into_iter()
            .find(|t| t.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Config(format!("unknown regime tag `{s}`")))
    }
}

/// Selects the characterization for `(p1, p2, th1, th2)`; total on
/// `(0, inf]^4`. The first matching row wins:
///
/// | condition | tag |
/// |---|---|
/// | an exponent is infinite | `Unsupported` |
/// | `p1 < p2` | `NotEmbedded` |
/// | `th2 < p2` | `OpenCase` |
/// | `p2 = th2`, `p1 = th1` | `Main01` |
/// | `p2 = th2` | `Main03_i` if `th1 <= p2`, else `Main03_ii` |
/// | `p1 = th1` | `Main02_i` if `p1 <= th2`, else `Main02_ii` |
/// | `p2 < p1`, `th1 <= p2` | `Thm1_i` if `p1 <= th2`, else `Thm1_ii` |
/// | `p2 < p1`, `p2 < th1` | `Thm3_i` .. `Thm3_iv` |
/// | `p1 = p2`, `th1 < p` | `Thm2` |
/// | `p1 = p2 < th1` | `Thm4_i` if `th1 <= th2`, else `Thm4_ii` |
///
/// Past the third row `p2 <= th2` and `p2 <= p1` hold, so after `Main01`,
/// `Main03` and `Main02` the remaining rows all have `p2 < th2`.
pub fn classify(params: &ParamQuadruple) -> RegimeTag {
    use RegimeTag::*;
    if !params.all_finite() {
        return Unsupported;
    }
    let (p1, p2, th1, th2) = params.values();
    if p1 < p2 {
        return NotEmbedded;
    }
    if th2 < p2 {
        return OpenCase;
    }
    if p2 == th2 {
        return if p1 == th1 {
            Main01
        } else if th1 <= p2 {
            Main03I
        } else {
            Main03II
        };
    }
    if p1 == th1 {
        return if p1 <= th2 { Main02I } else { Main02II };
    }
    if p2 < p1 {
        if th1 <= p2 {
            return if p1 <= th2 { Thm1I } else { Thm1II };
        }
        return if p1.max(th1) <= th2 {
            Thm3I
        } else if p1 <= th2 {
            Thm3II
        } else if th1 <= th2 {
            Thm3III
        } else {
            Thm3IV
        };
    }
    // p1 = p2 = p < th2
    if th1 < p1 {
        return Thm2;
    }
    if p1 < th1 {
        return if th1 <= th2 { Thm4I } else { Thm4II };
    }
    Unsupported
}

/// Controls hypothesis checking in [`estimate_with`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EstimateOptions {
    /// Evaluate the functional even when a hypothesis fails.
    pub force: bool,
    /// Run the hypothesis checks at all.
    pub check_hypotheses: bool,
    /// Grid for weight-class and admissibility checks.
    pub class_checks: CheckConfig,
    /// Grid for the quasiconcavity of `phi1`, `phi2`, each sample of which
    /// costs a full supremum or integral.
    pub phi_checks: CheckConfig,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        Self {
            force: false,
            check_hypotheses: true,
            class_checks: CheckConfig::default(),
            phi_checks: CheckConfig {
                points_per_decade: 8,
                ..CheckConfig::default()
            },
        }
    }
}

impl EstimateOptions {
    pub fn forced() -> Self {
        Self {
            force: true,
            ..Self::default()
        }
    }

    /// No checks; the report is marked unverified.
    pub fn unchecked() -> Self {
        Self {
            check_hypotheses: false,
            ..Self::default()
        }
    }
}

/// Result of [`estimate`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateReport {
    pub regime: RegimeTag,
    /// The functional; `inf` means no embedding, `None` that the regime has
    /// no characterization.
    #[serde(serialize_with = "ext::opt_real")]
    pub value: Option<f64>,
    /// Additive sub-terms; `value` is their sum.
    #[serde(serialize_with = "ext::real_map")]
    pub terms: BTreeMap<String, f64>,
    pub hypothesis_checks: Vec<HypothesisCheck>,
    /// True only when every check ran and returned `Yes`.
    pub hypotheses_verified: bool,
    pub warnings: Vec<String>,
    pub explanation: Option<String>,
    #[serde(serialize_with = "ext::opt_real")]
    pub oracle_lower: Option<f64>,
}

impl EstimateReport {
    fn bare(regime: RegimeTag, value: Option<f64>, explanation: &str) -> Self {
        Self {
            regime,
            value,
            terms: BTreeMap::new(),
            hypothesis_checks: Vec::new(),
            hypotheses_verified: false,
            warnings: Vec::new(),
            explanation: Some(explanation.to_string()),
            oracle_lower: None,
        }
    }
}

/// [`estimate_with`] under default options.
pub fn estimate(prob: &RadialProblem, cfg: &QuadratureConfig) -> Result<EstimateReport> {
    estimate_with(prob, cfg, &EstimateOptions::default())
}

/// Classifies, checks the hypotheses of the matching characterization and
/// evaluates its functional.
pub fn estimate_with(
    prob: &RadialProblem,
    cfg: &QuadratureConfig,
    opts: &EstimateOptions,
) -> Result<EstimateReport> {
    let regime = classify(&prob.params);
    match regime {
        RegimeTag::Unsupported => {
            return Ok(EstimateReport::bare(
                regime,
                None,
                "no characterization for these exponents (all four must be finite)",
            ))
        }
        RegimeTag::NotEmbedded => {
            return Ok(EstimateReport::bare(
                regime,
                Some(f64::INFINITY),
                "p1 < p2: only the zero function lies in both spaces, so the embedding fails",
            ))
        }
        RegimeTag::OpenCase => {
            return Ok(EstimateReport::bare(
                regime,
                None,
                "th2 < p2: the embedding constant has no known characterization",
            ))
        }
        _ => {}
    }
    cfg.validate().map_err(Error::Config)?;
    prob.validate()?;

    let mut checks = Vec::new();
    let mut warnings = Vec::new();
    if opts.check_hypotheses {
        let ok = run_checks(prob, regime, cfg, opts, &mut checks)?;
        if !ok {
            warnings.push("a hypothesis failed; value computed because force was set".into());
        }
    } else {
        warnings.push("hypotheses unverified".into());
    }
    for c in &checks {
        if c.verdict() == TriState::Undetermined {
            warnings.push(format!("undetermined: {}", c.summary()));
        }
    }
    let verified = opts.check_hypotheses && checks.iter().all(|c| c.verdict() == TriState::Yes);

    let k = Kernels::new(prob, cfg)?;
    let terms: BTreeMap<String, f64> = evaluate_terms(&k, regime)?.into_iter().collect();
    let value = terms.values().sum();
    Ok(EstimateReport {
        regime,
        value: Some(value),
        terms,
        hypothesis_checks: checks,
        hypotheses_verified: verified,
        warnings,
        explanation: None,
        oracle_lower: None,
    })
}

/// Runs the checks for `regime` into `out`. Returns `Ok(false)` when a check
/// failed under `force`, and the failing check as an error otherwise.
fn run_checks(
    prob: &RadialProblem,
    regime: RegimeTag,
    cfg: &QuadratureConfig,
    opts: &EstimateOptions,
    out: &mut Vec<HypothesisCheck>,
) -> Result<bool> {
    let (p1, _, th1, th2) = prob.params.values();
    let mut ok = true;
    let mut push = |c: HypothesisCheck, out: &mut Vec<HypothesisCheck>| -> Result<()> {
        if c.verdict() == TriState::No {
            if !opts.force {
                return Err(Error::HypothesisFailed(Box::new(c)));
            }
            ok = false;
        }
        out.push(c);
        Ok(())
    };
    let cc = &opts.class_checks;
    push(
        HypothesisCheck::Class {
            subject: "omega1".into(),
            kind: ClassKind::COmega,
            report: check_class(
                &prob.omega1,
                Exponent::new(th1)?,
                ClassKind::COmega,
                cfg,
                cc,
            ),
        },
        out,
    )?;
    push(
        HypothesisCheck::Class {
            subject: "omega2".into(),
            kind: ClassKind::Omega,
            report: check_class(&prob.omega2, Exponent::new(th2)?, ClassKind::Omega, cfg, cc),
        },
        out,
    )?;

    use RegimeTag::*;
    match regime {
        Thm1I | Thm1II | Thm3I | Thm3II | Thm3III | Thm3IV => {
            let k = Kernels::new(prob, cfg)?;
            push(
                HypothesisCheck::Admissible {
                    subject: "V~".into(),
                    verdict: check_admissible(|t| k.v_tilde(t), cc),
                },
                out,
            )?;
            let r12 = prob.params.r12();
            let u = |t: f64| Ok(powe(k.v_tilde(t)?, 1.0 / r12));
            let (subject, report) = if matches!(regime, Thm1I | Thm1II) {
                (
                    "phi1 in Q_U, U = V~^(1/(p1->p2))",
                    check_quasiconcave(|x| phi1_with(&k, x), u, &opts.phi_checks),
                )
            } else {
                (
                    "phi2 in Q_U, U = V~^(1/(p1->p2))",
                    check_quasiconcave(|x| phi2_with(&k, x), u, &opts.phi_checks),
                )
            };
            push(
                HypothesisCheck::Quasiconcave {
                    subject: subject.into(),
                    report,
                },
                out,
            )?;
        }
        Thm2 | Thm4I | Thm4II => {
            let jumps = prob.v_has_jumps();
            push(
                HypothesisCheck::Condition {
                    subject: "v2/v1 continuous".into(),
                    verdict: if jumps { TriState::No } else { TriState::Yes },
                    notes: if jumps {
                        "a weight profile contains chi".into()
                    } else {
                        String::new()
                    },
                },
                out,
            )?;
            if regime != Thm2 {
                // The stated side condition lives on (x, inf), where it
                // cannot hold for omega2 in Omega_th2; it is checked on
                // (0, x), the only reading compatible with the class.
                let r = crate::spaces::arrow(th2, p1);
                let report = check_class(
                    &prob.omega2.pow(-1.0),
                    Exponent::new(r)?,
                    ClassKind::COmega,
                    cfg,
                    cc,
                );
                push(
                    HypothesisCheck::Condition {
                        subject: "0 < ||1/omega2||_{th2->p,(0,x)} < inf".into(),
                        verdict: report.member,
                        notes: report.notes,
                    },
                    out,
                )?;
            }
        }
        _ => {}
    }
    Ok(ok)
}

fn check_family(prob: &RadialProblem, family: &'static str) -> Result<()> {
    let regime = classify(&prob.params);
    if regime.family() != family {
        return Err(Error::WrongRegime {
            regime: regime.to_string(),
            estimator: family,
        });
    }
    Ok(())
}

macro_rules! family_estimator {
    ($(#[$doc:meta])* $name:ident, $family:literal) => {
        $(#[$doc])*
        pub fn $name(prob: &RadialProblem, cfg: &QuadratureConfig) -> Result<EstimateReport> {
            check_family(prob, $family)?;
            estimate(prob, cfg)
        }
    };
}

family_estimator!(
    /// `|| ||omega1||_{p1,(0,|.|)}^-1 ||omega2||_{p2,(|.|,inf)} ||_{p1->p2, v1^-1 v2, R^n}`.
    estimate_main01,
    "main01"
);
family_estimator!(
    /// Ball norm of `||omega1||_{p1,(0,|.|)}^-1` against the tail of `omega2`:
    /// a supremum when `p1 <= th2`, a Stieltjes integral otherwise.
    estimate_main02,
    "main02"
);
family_estimator!(
    /// Ball norm of `||omega2||_{p2,(|.|,inf)}` against the head of `omega1`.
    estimate_main03,
    "main03"
);
family_estimator!(
    /// `sup_x phi1(x)` times a supremum or Stieltjes integral of `V(t, x)`
    /// against the tail of `omega2`.
    estimate_thm1,
    "thm1"
);
family_estimator!(
    /// Two-term functional built from `phi2`; four cases by the order of
    /// `p1`, `th1`, `th2`.
    estimate_thm3,
    "thm3"
);
family_estimator!(
    /// `sup_t ||omega2||_{th2,(t,inf)} sup_{r<t} (v2/v1)(r) / ||omega1||_{th1,(0,r)}`.
    estimate_thm2,
    "thm2"
);
family_estimator!(
    /// Equal inner exponents below both outer ones; two or three terms.
    estimate_thm4,
    "thm4"
);

#[cfg(test)]
mod tests;
