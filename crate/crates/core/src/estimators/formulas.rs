use std::sync::Arc;

use super::RegimeTag;
use crate::conditions::{min_form, phi1_with};
use crate::error::{Error, Result};
use crate::numerics::{
    div0, mul0, powe, stieltjes_integrate_with, sup_over_ray_fallible, Cumulative, DynFn, Fallible,
    Interval, QuadratureConfig, RunningSup, StieltjesMethod, TailMeasure,
};
use crate::spaces::script;
use crate::spaces::{arrow, BallNorm, Kernels};

type Terms = Vec<(String, f64)>;

/// Stopping tolerance of a supremum evaluated under an integral.
const NESTED_SUP_REL_TOL: f64 = 1e-10;

/// Evaluates the functional of `regime` on tabulated kernels, returning its
/// additive terms. No hypotheses are checked here.
pub fn evaluate_terms(k: &Kernels, regime: RegimeTag) -> Result<Terms> {
    use RegimeTag::*;
    let e = Eval::new(k);
    match regime {
        Main01 => e.main01(),
        Main02I | Main02II => e.main02(regime == Main02I),
        Main03I | Main03II => e.main03(regime == Main03I),
        Thm1I | Thm1II => e.thm1(regime == Thm1I),
        Thm3I | Thm3II | Thm3III | Thm3IV => e.thm3(regime),
        Thm2 => e.thm2(),
        Thm4I | Thm4II => e.thm4(regime == Thm4I),
        NotEmbedded | OpenCase | Unsupported => Err(Error::WrongRegime {
            regime: regime.to_string(),
            estimator: "evaluate_terms",
        }),
    }
}

fn term(name: &str, v: f64) -> (String, f64) {
    (name.to_string(), v)
}

struct Eval<'a> {
    k: &'a Kernels,
    k_arc: Arc<Kernels>,
    p1: f64,
    p2: f64,
    th1: f64,
    th2: f64,
    breaks: Vec<f64>,
}

impl<'a> Eval<'a> {
    fn new(k: &'a Kernels) -> Self {
        let (p1, p2, th1, th2) = k.prob.params.values();
        Self {
            k,
            k_arc: Arc::new(k.clone()),
            p1,
            p2,
            th1,
            th2,
            breaks: k.all_breaks(),
        }
    }

    fn sup<F: Fn(f64) -> Fallible>(&self, f: F) -> Result<f64> {
        Ok(sup_over_ray_fallible(f, Interval::half_line(), &self.breaks, &self.k.cfg)?.value)
    }

    /// `int F dmu` with inner quadratures tightened.
    fn stieltjes<F: Fn(f64) -> Fallible>(&self, f: F, mu: &TailMeasure) -> Result<f64> {
        Ok(stieltjes_integrate_with(
            f,
            mu,
            &self.breaks,
            StieltjesMethod::Auto,
            &self.k.cfg,
        )?)
    }

    fn inner_cfg(&self) -> QuadratureConfig {
        self.k.cfg.tightened(0.1)
    }

    fn stieltjes_inner<F: Fn(f64) -> Fallible>(&self, f: F, mu: &TailMeasure) -> Fallible {
        stieltjes_integrate_with(
            f,
            mu,
            &self.breaks,
            StieltjesMethod::Auto,
            &self.inner_cfg(),
        )
    }

    /// `||omega1||_{th1,(0,inf)}^-1 * s`, skipping `s` when the first factor
    /// vanishes.
    fn global<F: FnOnce() -> Result<f64>>(&self, s: F) -> Result<f64> {
        let h = self.k.head1_theta_total();
        if h.is_infinite() {
            return Ok(0.0);
        }
        Ok(mul0(powe(h, -1.0), s()?))
    }

    fn head_p_inverse(&self) -> DynFn {
        let k = self.k_arc.clone();
        Arc::new(move |r| Ok(powe(k.head1_p(r)?, -1.0)))
    }

    fn tail_p(&self) -> DynFn {
        let k = self.k_arc.clone();
        Arc::new(move |r| k.tail2_p(r))
    }

    fn ball(&self, g: DynFn) -> Result<BallNorm> {
        BallNorm::with_factor(&self.k.prob, Some(g), &self.breaks, &self.inner_cfg())
    }

    /// `sup_t V~(t) ||omega2||_{th2,(t,inf)}`.
    fn sup_v_tail(&self) -> Result<f64> {
        self.sup(|t| Ok(mul0(self.k.v_tilde(t)?, self.k.tail2_theta(t)?)))
    }

    fn main01(&self) -> Result<Terms> {
        let k = self.k_arc.clone();
        let g: DynFn = Arc::new(move |r| Ok(div0(k.tail2_p(r)?, k.head1_p(r)?)));
        Ok(vec![term("norm", self.ball(g)?.at_infinity())])
    }

    fn main02(&self, case_i: bool) -> Result<Terms> {
        let b = self.ball(self.head_p_inverse())?;
        if case_i {
            let v = self.sup(|t| Ok(mul0(b.at(t)?, self.k.tail2_theta(t)?)))?;
            return Ok(vec![term("sup_term", v)]);
        }
        let rho = arrow(self.p1, self.th2);
        let mu = self.k.tail2_measure(rho)?;
        let v = self.stieltjes(|t| b.pow_at(t, rho), &mu)?;
        Ok(vec![term("integral_term", powe(v, 1.0 / rho))])
    }

    fn main03(&self, case_i: bool) -> Result<Terms> {
        let kk = self.ball(self.tail_p())?;
        if case_i {
            let v = self.sup(|t| Ok(div0(kk.at(t)?, self.k.head1_theta(t)?)))?;
            return Ok(vec![term("sup_term", v)]);
        }
        let s = arrow(self.th1, self.p2);
        let mu = self.k.head1_measure(s)?;
        let local = powe(self.stieltjes(|t| kk.pow_at(t, s), &mu)?, 1.0 / s);
        let global = self.global(|| Ok(kk.at_infinity()))?;
        Ok(vec![
            term("integral_term", local),
            term("global_term", global),
        ])
    }

    /// `sup_t V(t, x) ||omega2||_{th2,(t,inf)}`.
    fn sup_script_tail(&self, x: f64) -> Fallible {
        self.sup_script_tail_with(x, &self.k.cfg)
    }

    fn sup_script_tail_with(&self, x: f64, cfg: &QuadratureConfig) -> Fallible {
        let vx = self.k.v_tilde(x)?;
        Ok(sup_over_ray_fallible(
            |t| Ok(mul0(script(self.k.v_tilde(t)?, vx), self.k.tail2_theta(t)?)),
            Interval::half_line(),
            &self.breaks,
            cfg,
        )?
        .value)
    }

    /// `int V(t, x)^rho d(-||omega2||_{th2,(t,inf)}^rho)`.
    fn script_integral(&self, x: f64, rho: f64, mu: &TailMeasure) -> Fallible {
        let vx = self.k.v_tilde(x)?;
        self.stieltjes_inner(|t| Ok(powe(script(self.k.v_tilde(t)?, vx), rho)), mu)
    }

    fn thm1(&self, case_i: bool) -> Result<Terms> {
        if case_i {
            let v = self.sup(|x| Ok(mul0(phi1_with(self.k, x)?, self.sup_script_tail(x)?)))?;
            return Ok(vec![term("sup_term", v)]);
        }
        let rho = arrow(self.p1, self.th2);
        let mu = self.k.tail2_measure(rho)?;
        let v = self.sup(|x| {
            Ok(mul0(
                phi1_with(self.k, x)?,
                powe(self.script_integral(x, rho, &mu)?, 1.0 / rho),
            ))
        })?;
        Ok(vec![term("sup_term", v)])
    }

    /// `phi2(x)^s` with `s = th1 -> p2`, before the root.
    fn phi2_pow_s(&self, x: f64, s: f64, mu1: &TailMeasure) -> Fallible {
        let vx = self.k.v_tilde(x)?;
        self.stieltjes_inner(|t| Ok(powe(min_form(self.k.v_tilde(t)?, vx), s)), mu1)
    }

    fn thm3(&self, regime: RegimeTag) -> Result<Terms> {
        use RegimeTag::*;
        let s = arrow(self.th1, self.p2);
        let mu1 = self.k.head1_measure(s)?;
        let rho = arrow(self.p1, self.th2);
        let mu2 = if matches!(regime, Thm3III | Thm3IV) {
            Some(self.k.tail2_measure(rho)?)
        } else {
            None
        };
        let global = match &mu2 {
            None => self.global(|| self.sup_v_tail())?,
            Some(mu2) => self.global(|| {
                Ok(powe(
                    self.stieltjes(|t| self.k.vt.pow_at(t, rho), mu2)?,
                    1.0 / rho,
                ))
            })?,
        };
        // Inside an integral the supremum is resolved more finely, since the
        // outer rule sees its stopping noise amplified by the power `a`.
        let nested = QuadratureConfig {
            sup_rel_tol: NESTED_SUP_REL_TOL.min(self.k.cfg.sup_rel_tol),
            ..self.k.cfg
        };
        let integrated = matches!(regime, Thm3II | Thm3IV);
        // Factor of the local term that involves omega2.
        let omega2_factor = |x: f64| -> Fallible {
            match &mu2 {
                None if integrated => self.sup_script_tail_with(x, &nested),
                None => self.sup_script_tail(x),
                Some(mu2) => Ok(powe(self.script_integral(x, rho, mu2)?, 1.0 / rho)),
            }
        };
        let local = match regime {
            Thm3I | Thm3III => self.sup(|x| {
                Ok(mul0(
                    powe(self.phi2_pow_s(x, s, &mu1)?, 1.0 / s),
                    omega2_factor(x)?,
                ))
            })?,
            _ => {
                // (int phi2^e V~^s F^a dmu1)^(1/a), a = th1 -> th2,
                // e = a s / (th2 -> p2).
                let a = arrow(self.th1, self.th2);
                let b = arrow(self.th2, self.p2);
                let e = a * s / b;
                let f = |x: f64| -> Fallible {
                    let vs = self.k.vt.pow_at(x, s)?;
                    if vs == 0.0 {
                        return Ok(0.0);
                    }
                    let om = omega2_factor(x)?;
                    if om == 0.0 {
                        return Ok(0.0);
                    }
                    Ok(mul0(
                        mul0(powe(self.phi2_pow_s(x, s, &mu1)?, e / s), vs),
                        powe(om, a),
                    ))
                };
                // The outer rule must not chase the residual noise of the
                // nested supremum.
                let outer = match &mu2 {
                    None => self.k.cfg.loosened_to(10.0 * a * nested.sup_rel_tol),
                    Some(_) => self.k.cfg,
                };
                let v =
                    stieltjes_integrate_with(f, &mu1, &self.breaks, StieltjesMethod::Auto, &outer)?;
                powe(v, 1.0 / a)
            }
        };
        Ok(vec![term("local_term", local), term("global_term", global)])
    }

    fn thm2(&self) -> Result<Terms> {
        let k = self.k_arc.clone();
        let g: DynFn = Arc::new(move |r| Ok(powe(k.head1_theta(r)?, -1.0)));
        let b = self.ball(g)?;
        let v = self.sup(|t| Ok(mul0(b.at(t)?, self.k.tail2_theta(t)?)))?;
        Ok(vec![term("sup_term", v)])
    }

    fn thm4(&self, case_i: bool) -> Result<Terms> {
        let s = arrow(self.th1, self.p1);
        let mu1 = Arc::new(self.k.head1_measure(s)?);
        let cfg = self.inner_cfg();
        // J(x) = int_0^x V~^s dmu1.
        let j = {
            let k = self.k_arc.clone();
            let mu = mu1.clone();
            let density: DynFn = Arc::new(move |t| {
                let d = mu.density(t)?;
                if d == 0.0 {
                    return Ok(0.0);
                }
                Ok(mul0(k.vt.pow_at(t, s)?, d))
            });
            Cumulative::new(density, &self.breaks, &cfg)?
        };
        let global = self.global(|| self.sup_v_tail())?;
        if case_i {
            let local = self.sup(|x| {
                let inner = mul0(self.k.vt.pow_at(x, s)?, mu1.mass_above(x, &cfg)?) + j.head(x)?;
                Ok(mul0(powe(inner, 1.0 / s), self.k.tail2_theta(x)?))
            })?;
            return Ok(vec![term("local_term", local), term("global_term", global)]);
        }
        let a = arrow(self.th1, self.th2);
        let b = arrow(self.th2, self.p1);
        let running = {
            let k = self.k_arc.clone();
            RunningSup::new(
                Arc::new(move |t| Ok(mul0(k.v_tilde(t)?, k.tail2_theta(t)?))),
                &self.breaks,
                &cfg,
            )?
        };
        let first = self.stieltjes(
            |x| {
                let r = running.at(x)?;
                if r == 0.0 {
                    return Ok(0.0);
                }
                Ok(mul0(powe(mu1.mass_above(x, &cfg)?, a / b), powe(r, a)))
            },
            &mu1,
        )?;
        let second = self.stieltjes(
            |x| {
                let tail = self.k.tail2_theta(x)?;
                if tail == 0.0 {
                    return Ok(0.0);
                }
                Ok(mul0(
                    mul0(powe(j.head(x)?, a / b), self.k.vt.pow_at(x, s)?),
                    powe(tail, a),
                ))
            },
            &mu1,
        )?;
        Ok(vec![
            term("first_term", powe(first, 1.0 / a)),
            term("second_term", powe(second, 1.0 / a)),
            term("global_term", global),
        ])
    }
}
