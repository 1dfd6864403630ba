use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{sphere_area, Exponent, Weight1D};
use crate::error::{Error, Result};
use crate::numerics::{
    integrate_fallible, mul0, powe, sup_over_ray_fallible, Cumulative, DynFn, Fallible, Interval,
    QuadratureConfig,
};

/// Which of the two Morrey-type norms: inner norms over balls `B(0,t)` or
/// over their complements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MorreyKind {
    LM,
    CLM,
}

/// A radial step function: `levels[i]` on the annulus
/// `breakpoints[i] < |x| < breakpoints[i+1]`, zero elsewhere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialTestFunction {
    breakpoints: Vec<f64>,
    levels: Vec<f64>,
}

impl RadialTestFunction {
    pub fn new(breakpoints: Vec<f64>, levels: Vec<f64>) -> Result<Self> {
        if breakpoints.len() < 2 || levels.len() + 1 != breakpoints.len() {
            return Err(Error::Config(format!(
                "{} breakpoints need {} levels, got {}",
                breakpoints.len(),
                breakpoints.len().saturating_sub(1),
                levels.len()
            )));
        }
        if !breakpoints.iter().all(|b| *b > 0.0 && b.is_finite())
            || !breakpoints.windows(2).all(|w| w[0] < w[1])
        {
            return Err(Error::Config(
                "breakpoints must be positive, finite and increasing".into(),
            ));
        }
        if !levels.iter().all(|c| *c >= 0.0 && c.is_finite()) {
            return Err(Error::Config(
                "levels must be finite and non-negative".into(),
            ));
        }
        Ok(Self {
            breakpoints,
            levels,
        })
    }

    /// `level` on `a < |x| < b`.
    pub fn annulus(a: f64, b: f64, level: f64) -> Result<Self> {
        Self::new(vec![a, b], vec![level])
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        Self {
            breakpoints: self.breakpoints.clone(),
            levels: self.levels.iter().map(|c| c * lambda).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.levels.iter().all(|c| *c == 0.0)
    }

    pub fn eval(&self, r: f64) -> f64 {
        match self
            .breakpoints
            .windows(2)
            .position(|w| r > w[0] && r < w[1])
        {
            Some(i) => self.levels[i],
            None => 0.0,
        }
    }

    /// `(a, b, level)` for each annulus.
    pub fn annuli(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.breakpoints
            .windows(2)
            .zip(&self.levels)
            .map(|(w, &c)| (w[0], w[1], c))
    }
}

fn finite_inner(p: Exponent) -> Result<f64> {
    if p.is_finite() {
        Ok(p.value())
    } else {
        Err(Error::Config("inner exponent p must be finite".into()))
    }
}

/// Inner norm data of a step function: for each annulus the density
/// `sigma v^p r^(n-1)` integrated over it, scaled by `level^p`.
struct InnerMasses {
    density: DynFn,
    masses: Vec<f64>,
    cfg: QuadratureConfig,
    breaks: Vec<f64>,
}

impl InnerMasses {
    fn new(
        f: &RadialTestFunction,
        p: f64,
        v: &Weight1D,
        n: u32,
        cfg: &QuadratureConfig,
    ) -> Result<Self> {
        let sigma = sphere_area(n);
        let vv = v.clone();
        let dim = n as i32 - 1;
        let density: DynFn = Arc::new(move |r| Ok(mul0(sigma * powe(vv.eval(r), p), r.powi(dim))));
        let inner_cfg = cfg.tightened(0.01);
        let breaks = v.breaks();
        let masses = f
            .annuli()
            .map(|(a, b, c)| {
                if c == 0.0 {
                    return Ok(0.0);
                }
                let m =
                    integrate_fallible(|r| density(r), Interval::new(a, b)?, &breaks, &inner_cfg)?;
                Ok(mul0(powe(c, p), m))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            density,
            masses,
            cfg: inner_cfg,
            breaks,
        })
    }

    fn partial(&self, a: f64, b: f64) -> Fallible {
        if b <= a {
            return Ok(0.0);
        }
        let d = &self.density;
        integrate_fallible(|r| d(r), Interval::new(a, b)?, &self.breaks, &self.cfg)
    }
}

/// Outer `theta`-norm with weight `omega` of a function given piecewise on
/// the segments between consecutive annulus radii.
///
/// `seg(i, t)` is the inner norm to the power `p` on segment `i`; `head` and
/// `tail` are the constant values before the first and after the last radius.
fn outer_norm<S>(
    radii: &[f64],
    head: f64,
    tail: f64,
    seg: S,
    p: f64,
    theta: Exponent,
    omega: &Weight1D,
    cfg: &QuadratureConfig,
) -> Result<f64>
where
    S: Fn(usize, f64) -> Fallible,
{
    let wb = omega.breaks();
    let k = radii.len() - 1;
    if !theta.is_finite() {
        let w = |t: f64| Ok(omega.eval(t));
        let mut best = 0.0f64;
        if head > 0.0 {
            let s = sup_over_ray_fallible(w, Interval::head(radii[0])?, &wb, cfg)?.value;
            best = best.max(mul0(powe(head, 1.0 / p), s));
        }
        if tail > 0.0 {
            let s = sup_over_ray_fallible(w, Interval::tail(radii[k])?, &wb, cfg)?.value;
            best = best.max(mul0(powe(tail, 1.0 / p), s));
        }
        for i in 0..k {
            let g = |t: f64| Ok(mul0(powe(seg(i, t)?, 1.0 / p), omega.eval(t)));
            let s =
                sup_over_ray_fallible(g, Interval::new(radii[i], radii[i + 1])?, &wb, cfg)?.value;
            best = best.max(s);
        }
        return Ok(best);
    }
    let th = theta.value();
    let wt = |t: f64| Ok(powe(omega.eval(t), th));
    let mut total = 0.0;
    if head > 0.0 {
        let m = integrate_fallible(wt, Interval::head(radii[0])?, &wb, cfg)?;
        total += mul0(powe(head, th / p), m);
    }
    if tail > 0.0 {
        let m = integrate_fallible(wt, Interval::tail(radii[k])?, &wb, cfg)?;
        total += mul0(powe(tail, th / p), m);
    }
    for i in 0..k {
        let g = |t: f64| Ok(mul0(powe(seg(i, t)?, th / p), powe(omega.eval(t), th)));
        total += integrate_fallible(g, Interval::new(radii[i], radii[i + 1])?, &wb, cfg)?;
    }
    Ok(powe(total, 1.0 / th))
}

/// `|| ||f||_{p,v,B(0,t)} ||_{theta,omega,(0,inf)}` for a radial step function.
pub fn lm_norm(
    f: &RadialTestFunction,
    p: Exponent,
    theta: Exponent,
    omega: &Weight1D,
    v: &Weight1D,
    n: u32,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    let p = finite_inner(p)?;
    if f.is_zero() {
        return Ok(0.0);
    }
    let inner = InnerMasses::new(f, p, v, n, cfg)?;
    let mut prefix = vec![0.0];
    for m in &inner.masses {
        prefix.push(prefix.last().unwrap() + m);
    }
    let radii = f.breakpoints();
    let levels = f.levels();
    let seg = |i: usize, t: f64| -> Fallible {
        Ok(prefix[i] + mul0(powe(levels[i], p), inner.partial(radii[i], t)?))
    };
    outer_norm(
        radii,
        0.0,
        *prefix.last().unwrap(),
        seg,
        p,
        theta,
        omega,
        cfg,
    )
}

/// `|| ||f||_{p,v,R^n \ B(0,t)} ||_{theta,omega,(0,inf)}` for a radial step
/// function.
pub fn clm_norm(
    f: &RadialTestFunction,
    p: Exponent,
    theta: Exponent,
    omega: &Weight1D,
    v: &Weight1D,
    n: u32,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    let p = finite_inner(p)?;
    if f.is_zero() {
        return Ok(0.0);
    }
    let inner = InnerMasses::new(f, p, v, n, cfg)?;
    let k = inner.masses.len();
    let mut suffix = vec![0.0; k + 1];
    for i in (0..k).rev() {
        suffix[i] = suffix[i + 1] + inner.masses[i];
    }
    let radii = f.breakpoints();
    let levels = f.levels();
    let seg = |i: usize, t: f64| -> Fallible {
        Ok(suffix[i + 1] + mul0(powe(levels[i], p), inner.partial(t, radii[i + 1])?))
    };
    outer_norm(radii, suffix[0], 0.0, seg, p, theta, omega, cfg)
}

/// `(int_{R^n} (f w)^p)^(1/p)` for a radial step function and radial `w`.
pub fn radial_lp_norm<W>(
    f: &RadialTestFunction,
    p: f64,
    w: W,
    n: u32,
    breaks: &[f64],
    cfg: &QuadratureConfig,
) -> Result<f64>
where
    W: Fn(f64) -> Fallible,
{
    let sigma = sphere_area(n);
    let dim = n as i32 - 1;
    let mut total = 0.0;
    for (a, b, c) in f.annuli() {
        if c == 0.0 {
            continue;
        }
        let m = integrate_fallible(
            |r| Ok(mul0(sigma * powe(w(r)?, p), r.powi(dim))),
            Interval::new(a, b)?,
            breaks,
            cfg,
        )?;
        total += mul0(powe(c, p), m);
    }
    Ok(powe(total, 1.0 / p))
}

/// The weight `w` with `LM_{pp,omega}(R^n, v) = L_p(w)`:
/// `w(r) = v(r) ||omega||_{p,(r,inf)}`, or `v(r) ||omega||_{p,(0,r)}` for the
/// complementary space.
#[derive(Debug, Clone)]
pub struct RadialProfile {
    v: Weight1D,
    mass: Arc<Cumulative>,
    p: f64,
    kind: MorreyKind,
}

impl RadialProfile {
    pub fn eval(&self, r: f64) -> Fallible {
        let m = match self.kind {
            MorreyKind::LM => self.mass.tail(r)?,
            MorreyKind::CLM => self.mass.head(r)?,
        };
        Ok(mul0(self.v.eval(r), powe(m, 1.0 / self.p)))
    }

    pub fn breaks(&self) -> Vec<f64> {
        let mut b = self.v.breaks();
        b.extend(self.mass.breaks());
        b.sort_by(f64::total_cmp);
        b.dedup();
        b
    }
}

pub fn lmpp_weight(
    p: Exponent,
    omega: &Weight1D,
    v: &Weight1D,
    kind: MorreyKind,
    cfg: &QuadratureConfig,
) -> Result<RadialProfile> {
    let p = finite_inner(p)?;
    let mass = Arc::new(Cumulative::new(omega.pow_fn(p), &omega.breaks(), cfg)?);
    Ok(RadialProfile {
        v: v.clone(),
        mass,
        p,
        kind,
    })
}
