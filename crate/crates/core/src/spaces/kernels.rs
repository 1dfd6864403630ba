use std::sync::Arc;

use super::{RadialProblem, Weight1D};
use crate::error::{Error, NumericsError, Result};
use crate::numerics::{
    div0, mul0, powe, Cumulative, DynFn, Fallible, Orientation, QuadratureConfig, RunningSup,
    TailMeasure,
};

/// `x -> ||g(|.|)||_{p1->p2, v1^-1 v2, B(0,x)}` for a radial factor `g`,
/// tabulated. With `g = 1` this is `V~`.
#[derive(Debug, Clone)]
pub enum BallNorm {
    /// `p2 < p1`: `(int_0^x v~ g^r12)^(1/r12)`.
    Integral { mass: Arc<Cumulative>, r12: f64 },
    /// `p1 = p2`: running supremum of `g` times the angular supremum of
    /// `v2/v1`.
    Sup(Arc<RunningSup>),
}

impl BallNorm {
    /// `V~`.
    pub fn new(prob: &RadialProblem, cfg: &QuadratureConfig) -> Result<Self> {
        Self::with_factor(prob, None, &[], cfg)
    }

    /// Ball norm of `g(|.|)`; `breaks` lists jumps of `g`.
    pub fn with_factor(
        prob: &RadialProblem,
        g: Option<DynFn>,
        breaks: &[f64],
        cfg: &QuadratureConfig,
    ) -> Result<Self> {
        let mut all = prob.v_breaks();
        all.extend_from_slice(breaks);
        match prob.v_integral_density() {
            Some(d) => {
                let r12 = prob.params.r12();
                let d = d.as_fn();
                let density: DynFn = match g {
                    None => d,
                    Some(g) => Arc::new(move |r| {
                        let base = d(r)?;
                        if base == 0.0 {
                            return Ok(0.0);
                        }
                        Ok(mul0(base, powe(g(r)?, r12)))
                    }),
                };
                Ok(BallNorm::Integral {
                    mass: Arc::new(Cumulative::new(density, &all, cfg)?),
                    r12,
                })
            }
            None => {
                let s = prob.v_sup_profile().as_fn();
                let profile: DynFn = match g {
                    None => s,
                    Some(g) => Arc::new(move |r| {
                        let base = s(r)?;
                        if base == 0.0 {
                            return Ok(0.0);
                        }
                        Ok(mul0(base, g(r)?))
                    }),
                };
                Ok(BallNorm::Sup(Arc::new(RunningSup::new(
                    profile, &all, cfg,
                )?)))
            }
        }
    }

    pub fn at(&self, x: f64) -> Fallible {
        match self {
            BallNorm::Integral { mass, r12 } => Ok(powe(mass.head(x)?, 1.0 / r12)),
            BallNorm::Sup(s) => s.at(x),
        }
    }

    /// Norm over all of `R^n`.
    pub fn at_infinity(&self) -> f64 {
        match self {
            BallNorm::Integral { mass, r12 } => powe(mass.total(), 1.0 / r12),
            BallNorm::Sup(s) => s.overall(),
        }
    }

    /// `self.at(x)^e` without an intermediate root when possible.
    pub fn pow_at(&self, x: f64, e: f64) -> Fallible {
        match self {
            BallNorm::Integral { mass, r12 } => Ok(powe(mass.head(x)?, e / r12)),
            BallNorm::Sup(s) => Ok(powe(s.at(x)?, e)),
        }
    }
}

/// `V~(x)` for a single point; see [`Kernels`] for repeated use.
pub fn v_tilde(x: f64, prob: &RadialProblem, cfg: &QuadratureConfig) -> Result<f64> {
    Ok(BallNorm::new(prob, cfg)?.at(x)?)
}

/// `V(t, x) = V~(t) / (V~(t) + V~(x))`.
pub fn v_script(t: f64, x: f64, prob: &RadialProblem, cfg: &QuadratureConfig) -> Result<f64> {
    let vt = BallNorm::new(prob, cfg)?;
    if vt.at_infinity() == 0.0 {
        return Err(Error::DegenerateWeight("V~ vanishes identically".into()));
    }
    let (a, b) = (vt.at(t)?, vt.at(x)?);
    Ok(script(a, b))
}

pub(crate) fn script(a: f64, b: f64) -> f64 {
    if a.is_infinite() && b.is_infinite() {
        0.5
    } else if a.is_infinite() {
        1.0
    } else {
        div0(a, a + b)
    }
}

/// Tabulated head and tail norms of the outer weights together with `V~`,
/// shared by every estimator evaluation on one problem.
#[derive(Debug, Clone)]
pub struct Kernels {
    pub prob: RadialProblem,
    pub cfg: QuadratureConfig,
    /// `omega1^th1`.
    pub h1_theta: Arc<Cumulative>,
    /// `omega1^p1`.
    pub h1_p: Arc<Cumulative>,
    /// `omega2^th2`.
    pub t2_theta: Arc<Cumulative>,
    /// `omega2^p2`.
    pub t2_p: Arc<Cumulative>,
    pub vt: BallNorm,
}

impl Kernels {
    pub fn new(prob: &RadialProblem, cfg: &QuadratureConfig) -> Result<Self> {
        cfg.validate().map_err(Error::Config)?;
        let (p1, p2, th1, th2) = prob.params.values();
        let tab = |w: &Weight1D, e: f64| -> Result<Arc<Cumulative>> {
            Ok(Arc::new(Cumulative::new(w.pow_fn(e), &w.breaks(), cfg)?))
        };
        let h1_theta = tab(&prob.omega1, th1)?;
        let h1_p = if p1 == th1 {
            h1_theta.clone()
        } else {
            tab(&prob.omega1, p1)?
        };
        let t2_theta = tab(&prob.omega2, th2)?;
        let t2_p = if p2 == th2 {
            t2_theta.clone()
        } else {
            tab(&prob.omega2, p2)?
        };
        Ok(Self {
            prob: prob.clone(),
            cfg: *cfg,
            h1_theta,
            h1_p,
            t2_theta,
            t2_p,
            vt: BallNorm::new(prob, cfg)?,
        })
    }

    fn exps(&self) -> (f64, f64, f64, f64) {
        self.prob.params.values()
    }

    /// `||omega1||_{th1,(0,t)}`.
    pub fn head1_theta(&self, t: f64) -> Fallible {
        Ok(powe(self.h1_theta.head(t)?, 1.0 / self.exps().2))
    }

    /// `||omega1||_{p1,(0,t)}`.
    pub fn head1_p(&self, t: f64) -> Fallible {
        Ok(powe(self.h1_p.head(t)?, 1.0 / self.exps().0))
    }

    /// `||omega1||_{th1,(0,inf)}`.
    pub fn head1_theta_total(&self) -> f64 {
        powe(self.h1_theta.total(), 1.0 / self.exps().2)
    }

    /// `||omega2||_{th2,(t,inf)}`.
    pub fn tail2_theta(&self, t: f64) -> Fallible {
        Ok(powe(self.t2_theta.tail(t)?, 1.0 / self.exps().3))
    }

    /// `||omega2||_{p2,(t,inf)}`.
    pub fn tail2_p(&self, t: f64) -> Fallible {
        Ok(powe(self.t2_p.tail(t)?, 1.0 / self.exps().1))
    }

    pub fn v_tilde(&self, x: f64) -> Fallible {
        self.vt.at(x)
    }

    /// `V(t, x)`.
    pub fn v_script(&self, t: f64, x: f64) -> Fallible {
        Ok(script(self.vt.at(t)?, self.vt.at(x)?))
    }

    /// `d(-||omega2||_{th2,(t,inf)}^power)`.
    pub fn tail2_measure(&self, power: f64) -> std::result::Result<TailMeasure, NumericsError> {
        let w = &self.prob.omega2;
        TailMeasure::from_profile(
            w.as_fn(),
            self.exps().3,
            power,
            Orientation::TailRight,
            self.t2_theta.clone(),
            w.is_nonsmooth(),
        )
    }

    /// `d(-||omega1||_{th1,(0,t)}^(-power))`.
    pub fn head1_measure(&self, power: f64) -> std::result::Result<TailMeasure, NumericsError> {
        let w = &self.prob.omega1;
        TailMeasure::from_profile(
            w.as_fn(),
            self.exps().2,
            power,
            Orientation::HeadLeftInverse,
            self.h1_theta.clone(),
            w.is_nonsmooth(),
        )
    }

    /// Breakpoints of every weight in the problem.
    pub fn all_breaks(&self) -> Vec<f64> {
        let mut b = self.prob.v_breaks();
        b.extend(self.prob.omega1.breaks());
        b.extend(self.prob.omega2.breaks());
        b.sort_by(f64::total_cmp);
        b.dedup();
        b
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::{parse_weight, ParamQuadruple};
    use approx::assert_relative_eq;

    fn prob(p1: f64, p2: f64, n: u32) -> RadialProblem {
        let params = ParamQuadruple::new(p1, p2, 1.0, 3.0, n).unwrap();
        RadialProblem::unweighted(params, Weight1D::one(), parse_weight("exp(-t)").unwrap())
    }

    #[test]
    fn v_tilde_examples() {
        let cfg = QuadratureConfig::default();
        assert_relative_eq!(
            v_tilde(2.0, &prob(2.0, 1.0, 1), &cfg).unwrap(),
            2.0,
            max_relative = 1e-10
        );
        assert_relative_eq!(
            v_tilde(0.3, &prob(2.0, 2.0, 1), &cfg).unwrap(),
            1.0,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            v_tilde(1.0, &prob(2.0, 1.0, 2), &cfg).unwrap(),
            std::f64::consts::PI.sqrt(),
            max_relative = 1e-10
        );
    }

    #[test]
    fn v_script_examples() {
        let cfg = QuadratureConfig::default();
        let p = prob(2.0, 1.0, 1);
        assert_relative_eq!(
            v_script(1.0, 4.0, &p, &cfg).unwrap(),
            1.0 / 3.0,
            max_relative = 1e-10
        );
        assert_eq!(v_script(2.5, 2.5, &p, &cfg).unwrap(), 0.5);
        assert!(v_script(1e-12, 1.0, &p, &cfg).unwrap() < 1e-5);
    }

    #[test]
    fn kernel_norms() {
        let cfg = QuadratureConfig::default();
        let params = ParamQuadruple::new(2.0, 1.0, 2.0, 1.0, 1).unwrap();
        let p = RadialProblem::unweighted(
            params,
            parse_weight("t^-0.25").unwrap(),
            parse_weight("exp(-t)").unwrap(),
        );
        let k = Kernels::new(&p, &cfg).unwrap();
        for t in [0.01, 1.0, 9.0] {
            assert_relative_eq!(
                k.head1_p(t).unwrap(),
                2f64.sqrt() * t.powf(0.25),
                max_relative = 1e-9
            );
            assert_relative_eq!(k.tail2_p(t).unwrap(), (-t).exp(), max_relative = 1e-9);
        }
        assert!(k.head1_theta_total().is_infinite());
    }
}
