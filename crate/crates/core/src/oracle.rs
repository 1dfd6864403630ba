//! Lower bounds for the embedding constant from explicit test functions.
//!
//! Any `f` gives `||f||_target / ||f||_source <= ||Id||`, so maximizing the
//! ratio over radial step functions produces a certified lower bound. The
//! search is a seeded coordinate ascent: multiplicative moves on the annulus
//! levels, log-space jitter on the radii, and refinement by splitting every
//! annulus once per level.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::ext;
use crate::numerics::{
    div0, integrate_fallible, mul0, powe, Cumulative, Fallible, Interval, QuadratureConfig,
};
use crate::spaces::{
    clm_norm, lm_norm, radial_lp_norm, Exponent, RadialProblem, RadialTestFunction, Weight1D,
};

/// Search budget for [`maximize_ratio`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OracleConfig {
    /// Annuli of the coarsest level; doubled at each refinement.
    pub annuli_count: usize,
    /// Radii are kept inside `(lo, hi)`.
    pub breakpoint_span: (f64, f64),
    pub restarts: usize,
    /// Sweeps over all coordinates per level.
    pub ascent_iters: usize,
    pub refine_levels: usize,
    pub seed: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            annuli_count: 8,
            breakpoint_span: (1e-3, 1e3),
            restarts: 5,
            ascent_iters: 200,
            refine_levels: 3,
            seed: 0,
        }
    }
}

impl OracleConfig {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.breakpoint_span;
        if self.annuli_count == 0
            || self.restarts == 0
            || self.ascent_iters == 0
            || self.refine_levels == 0
        {
            return Err(Error::Config("oracle budgets must be positive".into()));
        }
        if !(lo > 0.0 && lo < hi && hi.is_finite()) {
            return Err(Error::Config(format!(
                "breakpoint span ({lo}, {hi}) must satisfy 0 < lo < hi < inf"
            )));
        }
        Ok(())
    }

    /// Multiplies every budget but the annulus count by roughly `factor`.
    pub fn scaled_budget(&self, factor: f64) -> Self {
        let s = |n: usize| ((n as f64 * factor).round() as usize).max(1);
        Self {
            restarts: s(self.restarts),
            ascent_iters: s(self.ascent_iters),
            ..*self
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleResult {
    #[serde(serialize_with = "ext::real")]
    pub lower_bound: f64,
    pub best_function: RadialTestFunction,
    /// Best ratio after each level.
    #[serde(serialize_with = "ext::reals")]
    pub trace: Vec<f64>,
    /// Number of ratio evaluations spent.
    pub evaluations: usize,
}

fn exps(prob: &RadialProblem) -> Result<[Exponent; 4]> {
    let (p1, p2, th1, th2) = prob.params.values();
    Ok([
        Exponent::new(p1)?,
        Exponent::new(p2)?,
        Exponent::new(th1)?,
        Exponent::new(th2)?,
    ])
}

/// `||f||_{LM_{p2 th2, omega2}(v2)} / ||f||_{cLM_{p1 th1, omega1}(v1)}`, with
/// `0/0 = 0`.
pub fn ratio(f: &RadialTestFunction, prob: &RadialProblem, cfg: &QuadratureConfig) -> Result<f64> {
    let [p1, p2, th1, th2] = exps(prob)?;
    let n = prob.params.n;
    let num = lm_norm(f, p2, th2, &prob.omega2, &prob.v2, n, cfg)?;
    if num == 0.0 {
        return Ok(0.0);
    }
    let den = clm_norm(f, p1, th1, &prob.omega1, &prob.v1, n, cfg)?;
    Ok(div0(num, den))
}

/// The ratio for the opposite direction
/// `LM_{p1 th1, omega1}(v1) -> cLM_{p2 th2, omega2}(v2)`.
pub fn reverse_ratio(
    f: &RadialTestFunction,
    prob: &RadialProblem,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    let [p1, p2, th1, th2] = exps(prob)?;
    let n = prob.params.n;
    let num = clm_norm(f, p2, th2, &prob.omega2, &prob.v2, n, cfg)?;
    if num == 0.0 {
        return Ok(0.0);
    }
    let den = lm_norm(f, p1, th1, &prob.omega1, &prob.v1, n, cfg)?;
    Ok(div0(num, den))
}

/// Maximizes [`ratio`] over radial step functions.
pub fn maximize_ratio(
    prob: &RadialProblem,
    ocfg: &OracleConfig,
    cfg: &QuadratureConfig,
) -> Result<OracleResult> {
    maximize(|f| ratio(f, prob, cfg), ocfg)
}

/// Maximizes [`reverse_ratio`] with the same search as [`maximize_ratio`].
pub fn maximize_reverse_ratio(
    prob: &RadialProblem,
    ocfg: &OracleConfig,
    cfg: &QuadratureConfig,
) -> Result<OracleResult> {
    maximize(|f| reverse_ratio(f, prob, cfg), ocfg)
}

const LEVEL_STEPS: [f64; 3] = [2.0, 1.25, 1.05];
/// Radii closer than this (relatively) are not resolved by quadrature in
/// `ln t`.
const MIN_LOG_GAP: f64 = 1e-6;

/// Smallest relative gap between radii at `level`: each refinement resolves
/// radii a hundred times finer, down to [`MIN_LOG_GAP`].
fn level_gap(level: usize) -> f64 {
    10f64.powi(-2 * (level as i32 + 1)).max(MIN_LOG_GAP)
}
/// Sweeps improving the ratio by less than `STALL` (relatively) before a
/// level gives up.
const PATIENCE: usize = 5;
const STALL: f64 = 1e-4;

#[derive(Clone)]
struct Candidate {
    /// Natural logs of the radii.
    logs: Vec<f64>,
    levels: Vec<f64>,
}

impl Candidate {
    fn function(&self) -> RadialTestFunction {
        RadialTestFunction::new(
            self.logs.iter().map(|l| l.exp()).collect(),
            self.levels.clone(),
        )
        .expect("candidates keep radii increasing")
    }

    fn grid(k: usize, lo: f64, hi: f64) -> Self {
        let (a, b) = (lo.ln(), hi.ln());
        Self {
            logs: (0..=k).map(|i| a + (b - a) * i as f64 / k as f64).collect(),
            levels: vec![1.0; k],
        }
    }

    fn random(k: usize, lo: f64, hi: f64, rng: &mut ChaCha8Rng) -> Self {
        let (a, b) = (lo.ln(), hi.ln());
        let mut logs: Vec<f64> = (0..=k).map(|_| rng.gen_range(a..b)).collect();
        logs.sort_by(f64::total_cmp);
        logs.dedup();
        while logs.len() < 2 {
            logs = vec![a, b];
        }
        let m = logs.len() - 1;
        Self {
            logs,
            levels: (0..m)
                .map(|_| 10f64.powf(rng.gen_range(-1.0..1.0)))
                .collect(),
        }
    }

    /// Every annulus split at its geometric midpoint.
    fn split(&self) -> Self {
        let mut logs = Vec::with_capacity(2 * self.logs.len());
        let mut levels = Vec::with_capacity(2 * self.levels.len());
        for (w, &c) in self.logs.windows(2).zip(&self.levels) {
            logs.push(w[0]);
            logs.push(0.5 * (w[0] + w[1]));
            levels.push(c);
            levels.push(c);
        }
        logs.push(*self.logs.last().unwrap());
        Self { logs, levels }
    }
}

struct Ascent<'a, F> {
    objective: &'a F,
    evaluations: usize,
    bounds: (f64, f64),
}

impl<F: Fn(&RadialTestFunction) -> Result<f64>> Ascent<'_, F> {
    /// A candidate whose norms cannot be evaluated scores 0, so the move
    /// that produced it is rejected.
    fn eval(&mut self, c: &Candidate) -> Result<f64> {
        self.evaluations += 1;
        Ok(match (self.objective)(&c.function()) {
            Ok(v) if !v.is_nan() => v,
            Ok(_) | Err(Error::Numerics(_)) => 0.0,
            Err(e) => return Err(e),
        })
    }

    /// Coordinate ascent at one level; returns the improved candidate and
    /// its value.
    fn run(
        &mut self,
        mut c: Candidate,
        mut best: f64,
        level: usize,
        iters: usize,
        rng: &mut ChaCha8Rng,
    ) -> Result<(Candidate, f64)> {
        let step = LEVEL_STEPS[level.min(LEVEL_STEPS.len() - 1)];
        let jitter = 0.5 / (1 << level.min(20)) as f64;
        let min_gap = level_gap(level);
        let mut idle = 0;
        for _ in 0..iters {
            if best.is_infinite() {
                break;
            }
            let start = best;
            for i in 0..c.levels.len() {
                for factor in [step, 1.0 / step] {
                    let old = c.levels[i];
                    c.levels[i] = old * factor;
                    let v = self.eval(&c)?;
                    if v > best {
                        best = v;
                        break;
                    }
                    c.levels[i] = old;
                }
            }
            for j in 0..c.logs.len() {
                let left = if j > 0 {
                    c.logs[j] - c.logs[j - 1]
                } else {
                    f64::INFINITY
                };
                let right = if j + 1 < c.logs.len() {
                    c.logs[j + 1] - c.logs[j]
                } else {
                    f64::INFINITY
                };
                let gap = left.min(right);
                let old = c.logs[j];
                let new = (old + jitter * gap * rng.gen_range(-1.0..1.0))
                    .clamp(self.bounds.0, self.bounds.1);
                let ordered = (j == 0 || new - c.logs[j - 1] >= min_gap)
                    && (j + 1 == c.logs.len() || c.logs[j + 1] - new >= min_gap);
                if !ordered || new == old {
                    continue;
                }
                c.logs[j] = new;
                let v = self.eval(&c)?;
                if v > best {
                    best = v;
                } else {
                    c.logs[j] = old;
                }
            }
            if best > start * (1.0 + STALL) {
                idle = 0;
            } else {
                idle += 1;
                if idle >= PATIENCE {
                    break;
                }
            }
        }
        Ok((c, best))
    }
}

fn restart_rng(seed: u64, level: usize, restart: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((level as u64) << 32) | restart as u64);
    rng
}

/// Generic seeded search over step functions; `objective` must be
/// scale-invariant in the levels.
pub(crate) fn maximize<F>(objective: F, ocfg: &OracleConfig) -> Result<OracleResult>
where
    F: Fn(&RadialTestFunction) -> Result<f64> + Sync,
{
    ocfg.validate()?;
    let (lo, hi) = ocfg.breakpoint_span;
    let bounds = (lo.ln(), hi.ln());
    let mut trace = Vec::with_capacity(ocfg.refine_levels);
    let mut evaluations = 0;
    let mut best: Option<(Candidate, f64)> = None;

    for level in 0..ocfg.refine_levels {
        let starts: Vec<(Candidate, ChaCha8Rng)> = (0..ocfg.restarts)
            .map(|r| {
                let mut rng = restart_rng(ocfg.seed, level, r);
                let c = match (&best, r) {
                    (None, 0) => Candidate::grid(ocfg.annuli_count, lo, hi),
                    (None, _) => Candidate::random(ocfg.annuli_count, lo, hi, &mut rng),
                    (Some((b, _)), 0) => b.split(),
                    (Some((b, _)), _) => {
                        // Perturbed copies of the refined incumbent.
                        let mut c = b.split();
                        for l in &mut c.levels {
                            *l *= 10f64.powf(rng.gen_range(-0.3..0.3));
                        }
                        c
                    }
                };
                (c, rng)
            })
            .collect();
        let outcomes: Vec<Result<(Candidate, f64, usize)>> = starts
            .into_par_iter()
            .map(|(c, mut rng)| {
                let mut a = Ascent {
                    objective: &objective,
                    evaluations: 0,
                    bounds,
                };
                let v0 = a.eval(&c)?;
                let (c, v) = a.run(c, v0, level, ocfg.ascent_iters, &mut rng)?;
                Ok((c, v, a.evaluations))
            })
            .collect();
        for o in outcomes {
            let (c, v, e) = o?;
            evaluations += e;
            if best.as_ref().map_or(true, |(_, b)| v > *b) {
                best = Some((c, v));
            }
        }
        trace.push(best.as_ref().map_or(0.0, |(_, v)| *v));
    }
    let (c, _) = best.expect("at least one level ran");
    let best_function = c.function();
    let lower_bound = objective(&best_function)?;
    Ok(OracleResult {
        lower_bound,
        best_function,
        trace,
        evaluations,
    })
}

/// `int_t^inf g`.
pub fn h_star(g: &Weight1D, t: f64, cfg: &QuadratureConfig) -> Result<f64> {
    let iv = if t == 0.0 {
        Interval::new(0.0, f64::INFINITY)?
    } else {
        Interval::tail(t)?
    };
    let w = g.as_fn();
    Ok(integrate_fallible(|s| w(s), iv, &g.breaks(), cfg)?)
}

/// The family searched by [`dual_lower_bound`]: `g = omega2^p2 h` with `h`
/// a step function on `steps` intervals of a log grid over the oracle span.
/// When `p2 = th2` the outer pieces reach `0` and `inf`, so `h = 1` gives
/// the exact optimizer `g = omega2^p2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DualConfig {
    pub steps: usize,
    /// Sweeps of multiplicative moves on the levels of `h`.
    pub ascent_iters: usize,
}

impl Default for DualConfig {
    fn default() -> Self {
        Self {
            steps: 6,
            ascent_iters: 3,
        }
    }
}

/// A non-negative step function on the half-line; the outer breakpoints may
/// be `0` and `inf`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepWeight {
    pub breakpoints: Vec<f64>,
    pub levels: Vec<f64>,
}

impl StepWeight {
    fn pieces(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.breakpoints
            .windows(2)
            .zip(&self.levels)
            .map(|(w, &c)| (w[0], w[1], c))
    }

    /// `H* h (t)`.
    pub fn tail_integral(&self, t: f64) -> f64 {
        self.pieces()
            .map(|(a, b, c)| if b > t { mul0(c, b - a.max(t)) } else { 0.0 })
            .sum()
    }

    /// `||h||_r` on the half-line, `r` possibly infinite.
    fn norm(&self, r: f64) -> f64 {
        if r.is_infinite() {
            return self.levels.iter().fold(0.0, |m, &c| m.max(c));
        }
        let s: f64 = self.pieces().map(|(a, b, c)| mul0(powe(c, r), b - a)).sum();
        powe(s, 1.0 / r)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualResult {
    #[serde(serialize_with = "ext::real")]
    pub lower_bound: f64,
    /// The multiplier `h` of the best `g = omega2^p2 h`.
    pub best_multiplier: StepWeight,
    pub best_function: RadialTestFunction,
}

/// Lower bound through the dual description of the target norm: for
/// `p2 <= th2`,
/// `||Id||^p2 = sup_g ||Id : source -> L_p2(v2 (H* g)^(1/p2))||^p2 / ||g||_{th2/(th2-p2), omega2^-p2}`.
/// Each inner operator norm is itself bounded below by a search over step
/// functions, so the cost is that of [`maximize_ratio`] per `g` tried.
pub fn dual_lower_bound(
    prob: &RadialProblem,
    dcfg: &DualConfig,
    ocfg: &OracleConfig,
    cfg: &QuadratureConfig,
) -> Result<DualResult> {
    let [p1, _, th1, _] = exps(prob)?;
    let (_, p2, _, th2) = prob.params.values();
    if th2 < p2 {
        return Err(Error::Config("the dual bound needs p2 <= th2".into()));
    }
    if dcfg.steps == 0 {
        return Err(Error::Config(
            "the dual bound needs at least one step".into(),
        ));
    }
    ocfg.validate()?;
    // ||omega2^p2 h||_{r, omega2^-p2} = ||h||_r.
    let r = if th2 == p2 {
        f64::INFINITY
    } else {
        th2 / (th2 - p2)
    };
    let n = prob.params.n;
    let (lo, hi) = ocfg.breakpoint_span;
    let (a, b) = (lo.ln(), hi.ln());
    let k = dcfg.steps;
    let mut breakpoints: Vec<f64> = (0..=k)
        .map(|i| (a + (b - a) * i as f64 / k as f64).exp())
        .collect();
    if r.is_infinite() {
        breakpoints[0] = 0.0;
        breakpoints[k] = f64::INFINITY;
    }
    let mass = Cumulative::new(prob.omega2.pow_fn(p2), &prob.omega2.breaks(), cfg)?;
    let v2 = prob.v2.as_fn();
    let mut vb = prob.v2.breaks();
    vb.extend(
        breakpoints
            .iter()
            .copied()
            .filter(|x| *x > 0.0 && x.is_finite()),
    );

    let inner = |h: &StepWeight| -> Result<(f64, RadialTestFunction)> {
        let hn = h.norm(r);
        // H* (omega2^p2 h)(t).
        let tail = |t: f64| -> Fallible {
            let mut s = 0.0;
            for (a, b, c) in h.pieces() {
                if c == 0.0 || b <= t {
                    continue;
                }
                let from = a.max(t);
                s += mul0(
                    c,
                    if b.is_infinite() {
                        mass.tail(from)?
                    } else {
                        mass.mass(from, b)?
                    },
                );
            }
            Ok(s)
        };
        let objective = |f: &RadialTestFunction| -> Result<f64> {
            let num = radial_lp_norm(
                f,
                p2,
                |t| Ok(mul0(v2(t)?, powe(tail(t)?, 1.0 / p2))),
                n,
                &vb,
                cfg,
            )?;
            if num == 0.0 {
                return Ok(0.0);
            }
            let den = clm_norm(f, p1, th1, &prob.omega1, &prob.v1, n, cfg)?;
            Ok(div0(num, den))
        };
        let res = maximize(objective, ocfg)?;
        Ok((
            powe(div0(powe(res.lower_bound, p2), hn), 1.0 / p2),
            res.best_function,
        ))
    };

    let mut h = StepWeight {
        levels: vec![1.0; k],
        breakpoints,
    };
    let (mut best, mut best_f) = inner(&h)?;
    for it in 0..dcfg.ascent_iters {
        let step = LEVEL_STEPS[it.min(LEVEL_STEPS.len() - 1)];
        for i in 0..k {
            for factor in [step, 1.0 / step] {
                let old = h.levels[i];
                h.levels[i] = old * factor;
                let (v, f) = inner(&h)?;
                if v > best {
                    best = v;
                    best_f = f;
                    break;
                }
                h.levels[i] = old;
            }
        }
    }
    Ok(DualResult {
        lower_bound: best,
        best_multiplier: h,
        best_function: best_f,
    })
}

/// `t -> t^(-2/q) w(1/t)`; applied twice it returns `w`.
fn inverted(w: &Weight1D, q: f64) -> Weight1D {
    Weight1D::from_expr(Expr::Var.pow(-2.0 / q)).mul(&w.reciprocal_argument())
}

/// The inversion `x -> x/|x|^2`, `t -> 1/t` maps
/// `LM_{p th, omega}(v)` onto `cLM_{p th, omega~}(v~)` and back, with
/// `v~(r) = v(1/r) r^(-2n/p)` and `omega~(t) = t^(-2/th) omega(1/t)`.
///
/// Given a problem read in the direction `LM -> cLM`, returns the equivalent
/// problem in the direction `cLM -> LM`, and vice versa. Angular reductions
/// are dropped; the transform acts on radial profiles.
pub fn reverse_problem(prob: &RadialProblem) -> RadialProblem {
    let (p1, p2, th1, th2) = prob.params.values();
    let n = prob.params.n as f64;
    RadialProblem::new(
        prob.params,
        inverted(&prob.omega1, th1),
        inverted(&prob.omega2, th2),
        inverted(&prob.v1, p1 / n),
        inverted(&prob.v2, p2 / n),
    )
}

/// The step function `f(x / |x|^2)`.
pub fn invert_function(f: &RadialTestFunction) -> RadialTestFunction {
    let radii: Vec<f64> = f.breakpoints().iter().rev().map(|r| 1.0 / r).collect();
    let levels: Vec<f64> = f.levels().iter().rev().copied().collect();
    RadialTestFunction::new(radii, levels).expect("inversion keeps radii increasing")
}
