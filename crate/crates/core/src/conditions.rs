//! Hypothesis validation: weight-class membership, admissibility,
//! quasiconcavity with non-degeneracy, and the functions `phi1`, `phi2`.
//!
//! Every check samples on logarithmic grids and reports a [`TriState`]:
//! limits at `0` and `inf` are extrapolated from decade sequences, and
//! anything the extrapolation cannot settle is `Undetermined`.

use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{NumericsError, Result};
use crate::ext;
use crate::numerics::{
    decade_point, div0, integrate_fallible, mul0, powe, stieltjes_integrate_with,
    sup_over_ray_fallible, vanishes_by_underflow, Cumulative, Fallible, Interval, QuadratureConfig,
    StieltjesMethod,
};
use crate::spaces::{Exponent, Kernels, RadialProblem, Weight1D};

/// Three-valued verdict of a numerical check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum TriState {
    Yes,
    No,
    Undetermined,
}

impl TriState {
    /// Conjunction: `No` dominates, then `Undetermined`.
    pub fn and(self, other: TriState) -> TriState {
        use TriState::*;
        match (self, other) {
            (No, _) | (_, No) => No,
            (Yes, Yes) => Yes,
            _ => Undetermined,
        }
    }

    pub fn all<I: IntoIterator<Item = TriState>>(it: I) -> TriState {
        it.into_iter().fold(TriState::Yes, TriState::and)
    }
}

impl fmt::Display for TriState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TriState::Yes => "yes",
            TriState::No => "no",
            TriState::Undetermined => "undetermined",
        })
    }
}

/// `Omega`: `0 < ||w||_{theta,(t,inf)} < inf` for all `t`.
/// `COmega`: `0 < ||w||_{theta,(0,t)} < inf` for all `t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ClassKind {
    Omega,
    COmega,
}

impl fmt::Display for ClassKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClassKind::Omega => "Omega",
            ClassKind::COmega => "cOmega",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassReport {
    pub member: TriState,
    /// `(t, norm)` samples: the violating one for `No`, a few supporting
    /// ones otherwise.
    #[serde(serialize_with = "ext::pairs")]
    pub witnesses: Vec<(f64, f64)>,
    pub notes: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuasiconcavityReport {
    pub is_u_quasiconcave: TriState,
    pub is_nondegenerate: TriState,
    /// Extrapolated `lim_{0+} phi`, `lim_inf 1/phi`, `lim_inf phi/U`,
    /// `lim_{0+} U/phi`; `NaN` where the extrapolation was inconclusive.
    #[serde(serialize_with = "ext::four")]
    pub limit_diagnostics: [f64; 4],
    pub notes: String,
}

/// Grids and tolerances of the checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
#[serde(default)]
pub struct CheckConfig {
    /// Grids cover `[10^-span, 10^span]`.
    pub span_decades: u32,
    pub points_per_decade: usize,
    /// Constant allowed in "equivalent to a monotone function".
    pub equivalence_factor: f64,
    /// Decade sequences for limits run out to `10^(+-limit_decades)`.
    pub limit_decades: u32,
}

impl Default for CheckConfig {
    fn default() -> Self {
        Self {
            span_decades: 6,
            points_per_decade: 32,
            equivalence_factor: 1.05,
            limit_decades: 16,
        }
    }
}

impl CheckConfig {
    fn grid(&self, per_decade: usize) -> Vec<f64> {
        let n = (self.span_decades as usize * per_decade) as i64;
        (-n..=n).map(|k| decade_point(k, per_decade)).collect()
    }
}

/// Values above this are treated as straddling the overflow threshold.
const OVERFLOW: f64 = 1e300;

/// Weight-class membership of `omega`, sampled on the check grid.
pub fn check_class(
    omega: &Weight1D,
    theta: Exponent,
    kind: ClassKind,
    quad: &QuadratureConfig,
    cc: &CheckConfig,
) -> ClassReport {
    match class_samples(omega, theta, kind, quad, cc) {
        Ok(r) => r,
        Err(e) => ClassReport {
            member: TriState::Undetermined,
            witnesses: Vec::new(),
            notes: format!("norm evaluation failed: {e}"),
        },
    }
}

fn class_samples(
    omega: &Weight1D,
    theta: Exponent,
    kind: ClassKind,
    quad: &QuadratureConfig,
    cc: &CheckConfig,
) -> std::result::Result<ClassReport, NumericsError> {
    let mut grid = cc.grid(cc.points_per_decade);
    if kind == ClassKind::COmega {
        // Walk away from where the mass lives so that a vanishing norm is
        // always preceded by a positive one.
        grid.reverse();
    }
    let breaks = omega.breaks();
    let norm: Box<dyn Fn(f64) -> Fallible + Sync> = if theta.is_finite() {
        let th = theta.value();
        let cum = Cumulative::new(omega.pow_fn(th), &breaks, quad)?;
        Box::new(move |t| {
            let m = match kind {
                ClassKind::Omega => cum.tail(t)?,
                ClassKind::COmega => cum.head(t)?,
            };
            Ok(powe(m, 1.0 / th))
        })
    } else {
        let w = omega.as_fn();
        let breaks = breaks.clone();
        let quad = *quad;
        Box::new(move |t| {
            let iv = match kind {
                ClassKind::Omega => Interval::tail(t)?,
                ClassKind::COmega => Interval::head(t)?,
            };
            Ok(sup_over_ray_fallible(|s| w(s), iv, &breaks, &quad)?.value)
        })
    };
    let values: Vec<f64> = grid
        .par_iter()
        .map(|&t| norm(t))
        .collect::<std::result::Result<_, _>>()?;

    let mut notes = Vec::new();
    let mut last_good: Option<f64> = None;
    let mut straddle = None;
    for (&t, &v) in grid.iter().zip(&values) {
        if v.is_nan() {
            return Ok(ClassReport {
                member: TriState::Undetermined,
                witnesses: vec![(t, v)],
                notes: "norm undefined".into(),
            });
        }
        if v.is_infinite() {
            if overflows(omega, theta, kind, t, &grid) {
                return Ok(ClassReport {
                    member: TriState::Undetermined,
                    witnesses: vec![(t, v)],
                    notes: format!("norm overflows at t = {t}"),
                });
            }
            return Ok(ClassReport {
                member: TriState::No,
                witnesses: vec![(t, v)],
                notes: format!("norm infinite at t = {t}"),
            });
        }
        if v == 0.0 {
            let benign = match last_good {
                Some(g) => {
                    let th = if theta.is_finite() {
                        theta.value()
                    } else {
                        1.0
                    };
                    vanishes_by_underflow(|s| Ok(powe(norm(s)?, th)), th, g, t)?
                }
                None => false,
            };
            if benign {
                notes.push(format!(
                    "norm underflows beyond t = {t}; treated as positive"
                ));
                break;
            }
            return Ok(ClassReport {
                member: TriState::No,
                witnesses: vec![(t, 0.0)],
                notes: format!("norm vanishes at t = {t}"),
            });
        }
        if v > OVERFLOW && straddle.is_none() {
            straddle = Some((t, v));
        }
        last_good = Some(t);
    }
    if let Some(w) = straddle {
        return Ok(ClassReport {
            member: TriState::Undetermined,
            witnesses: vec![w],
            notes: "norm exceeds the overflow threshold".into(),
        });
    }
    let n = grid.len();
    let witnesses = [0, n / 2, n - 1]
        .iter()
        .map(|&i| (grid[i], values[i]))
        .collect();
    Ok(ClassReport {
        member: TriState::Yes,
        witnesses,
        notes: notes.join("; "),
    })
}

/// True when the weight itself is out of floating-point range somewhere on
/// the grid inside the interval at `t`, so an infinite norm proves nothing.
fn overflows(omega: &Weight1D, theta: Exponent, kind: ClassKind, t: f64, grid: &[f64]) -> bool {
    let th = if theta.is_finite() {
        theta.value()
    } else {
        1.0
    };
    grid.iter()
        .filter(|&&s| match kind {
            ClassKind::Omega => s >= t,
            ClassKind::COmega => s <= t,
        })
        .any(|&s| {
            let w = powe(omega.eval(s), th);
            w.is_finite() && w * s > OVERFLOW || w.is_infinite() && omega.eval(s).is_finite()
        })
}

/// Extrapolates the limit of a sequence sampled at successive decades
/// towards `0` or `inf`.
///
/// Returns `0`, `inf`, a finite limit, or `NaN` when the last samples do not
/// settle into a recognisable pattern. Uses the last five samples: constant
/// ratios of successive differences are summed as a geometric series; ratios
/// near one mean unbounded growth.
pub fn extrapolate_decades(seq: &[f64]) -> f64 {
    if seq.len() < 5 || seq.iter().any(|v| v.is_nan()) {
        return f64::NAN;
    }
    let last = seq[seq.len() - 1];
    if last == 0.0 {
        return 0.0;
    }
    if last.is_infinite() {
        return f64::INFINITY;
    }
    let tail = &seq[seq.len() - 5..];
    if tail.iter().any(|v| !v.is_finite()) {
        return f64::NAN;
    }
    let d: Vec<f64> = tail.windows(2).map(|w| w[1] - w[0]).collect();
    let scale = tail.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if d.iter().all(|x| x.abs() <= 1e-12 * scale) {
        return last;
    }
    let inc = d.iter().all(|&x| x >= 0.0);
    let dec = d.iter().all(|&x| x <= 0.0);
    if !(inc || dec) {
        return f64::NAN;
    }
    if d[3].abs() <= 1e-10 * last.abs() {
        return last;
    }
    if dec && last <= 1e-12 * tail[0] {
        return 0.0;
    }
    if inc && last >= 1e12 * tail[0] {
        return f64::INFINITY;
    }
    let r: Vec<f64> = d.windows(2).map(|w| w[1] / w[0]).collect();
    if r.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
        return f64::NAN;
    }
    let geometric = |rl: f64| {
        let l = last + d[3] * rl / (1.0 - rl);
        if dec && l <= 0.01 * last.abs() {
            0.0
        } else {
            l
        }
    };
    let (rmin, rmax) = r
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
    if rmax <= 1.1 * rmin {
        let rl = r[2];
        if rl >= 0.98 {
            return if inc { f64::INFINITY } else { f64::NAN };
        }
        return geometric(rl);
    }
    if inc && r[0] >= 1.0 && r[1] >= r[0] && r[2] >= r[1] {
        return f64::INFINITY;
    }
    if r[2] < r[1] && r[1] < r[0] && r[2] < 0.9 {
        return geometric(r[2]);
    }
    f64::NAN
}

fn limit_state(l: f64, want_zero: bool) -> TriState {
    if l.is_nan() {
        TriState::Undetermined
    } else if (l == 0.0) == want_zero {
        TriState::Yes
    } else {
        TriState::No
    }
}

/// Samples `f` at `10^(sign * k)` for `k = 0..=decades`.
fn decade_sequence<F>(
    f: &F,
    sign: f64,
    decades: u32,
) -> std::result::Result<Vec<f64>, NumericsError>
where
    F: Fn(f64) -> Fallible + Sync,
{
    (0..=decades)
        .into_par_iter()
        .map(|k| f(10f64.powf(sign * k as f64)))
        .collect()
}

/// Admissibility of `u`: strictly increasing on the grid, `u(0+) = 0` and
/// `u(inf) = inf` by decade extrapolation.
pub fn check_admissible<F>(u: F, cc: &CheckConfig) -> TriState
where
    F: Fn(f64) -> Fallible + Sync,
{
    let grid = cc.grid(cc.points_per_decade);
    let vals: std::result::Result<Vec<f64>, _> = grid.par_iter().map(|&t| u(t)).collect();
    let Ok(vals) = vals else {
        return TriState::Undetermined;
    };
    if vals.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return TriState::No;
    }
    if vals.windows(2).any(|w| w[1] <= w[0]) {
        return TriState::No;
    }
    let (Ok(left), Ok(right)) = (
        decade_sequence(&u, -1.0, cc.limit_decades),
        decade_sequence(&u, 1.0, cc.limit_decades),
    ) else {
        return TriState::Undetermined;
    };
    let at0 = extrapolate_decades(&left);
    let atinf = extrapolate_decades(&right);
    let s0 = limit_state(at0, true);
    let sinf = if atinf.is_nan() {
        TriState::Undetermined
    } else if atinf.is_infinite() {
        TriState::Yes
    } else {
        TriState::No
    };
    s0.and(sinf)
}

/// Checks that `phi` is `u`-quasiconcave and non-degenerate.
///
/// `phi` must be equivalent to a non-decreasing function and `phi / u` to a
/// non-increasing one, each within `equivalence_factor`, on the grid and on
/// its midpoint refinement. Non-degeneracy asks the four limits in
/// [`QuasiconcavityReport::limit_diagnostics`] to vanish.
pub fn check_quasiconcave<F, U>(phi: F, u: U, cc: &CheckConfig) -> QuasiconcavityReport
where
    F: Fn(f64) -> Fallible + Sync,
    U: Fn(f64) -> Fallible + Sync,
{
    let undetermined = |notes: String| QuasiconcavityReport {
        is_u_quasiconcave: TriState::Undetermined,
        is_nondegenerate: TriState::Undetermined,
        limit_diagnostics: [f64::NAN; 4],
        notes,
    };
    let c = cc.equivalence_factor;
    let mut quasi = TriState::Yes;
    let mut notes = Vec::new();
    for per in [cc.points_per_decade, 2 * cc.points_per_decade] {
        let grid = cc.grid(per);
        let pairs: std::result::Result<Vec<(f64, f64)>, NumericsError> =
            grid.par_iter().map(|&t| Ok((phi(t)?, u(t)?))).collect();
        let pairs = match pairs {
            Ok(p) => p,
            Err(e) => return undetermined(format!("evaluation failed: {e}")),
        };
        let mut run_max = 0.0f64;
        let mut run_min = f64::INFINITY;
        for (&t, &(p, uu)) in grid.iter().zip(&pairs) {
            if !(p.is_finite() && p > 0.0) {
                quasi = TriState::No;
                notes.push(format!("phi({t}) = {p} is not finite and positive"));
                break;
            }
            if p * c < run_max {
                quasi = TriState::No;
                notes.push(format!("phi drops by more than {c} at t = {t}"));
                break;
            }
            let ratio = p / uu;
            if ratio > run_min * c {
                quasi = TriState::No;
                notes.push(format!("phi/U rises by more than {c} at t = {t}"));
                break;
            }
            run_max = run_max.max(p);
            run_min = run_min.min(ratio);
        }
        if quasi == TriState::No {
            break;
        }
    }

    let seqs = (
        decade_sequence(&|t| phi(t), -1.0, cc.limit_decades),
        decade_sequence(&|t| phi(t), 1.0, cc.limit_decades),
        decade_sequence(&u, -1.0, cc.limit_decades),
        decade_sequence(&u, 1.0, cc.limit_decades),
    );
    let (Ok(p0), Ok(pinf), Ok(u0), Ok(uinf)) = seqs else {
        return QuasiconcavityReport {
            is_u_quasiconcave: quasi.and(TriState::Undetermined),
            is_nondegenerate: if quasi == TriState::No {
                TriState::No
            } else {
                TriState::Undetermined
            },
            limit_diagnostics: [f64::NAN; 4],
            notes: "limit evaluation failed".into(),
        };
    };
    let inv: Vec<f64> = pinf.iter().map(|&p| div0(1.0, p)).collect();
    let ratio_inf: Vec<f64> = pinf
        .iter()
        .zip(&uinf)
        .map(|(&p, &uu)| div0(p, uu))
        .collect();
    let ratio0: Vec<f64> = u0.iter().zip(&p0).map(|(&uu, &p)| div0(uu, p)).collect();
    let lims = [
        extrapolate_decades(&p0),
        extrapolate_decades(&inv),
        extrapolate_decades(&ratio_inf),
        extrapolate_decades(&ratio0),
    ];
    let nondeg = if quasi == TriState::No {
        TriState::No
    } else {
        quasi.and(TriState::all(lims.iter().map(|&l| limit_state(l, true))))
    };
    QuasiconcavityReport {
        is_u_quasiconcave: quasi,
        is_nondegenerate: nondeg,
        limit_diagnostics: lims,
        notes: notes.join("; "),
    }
}

/// `phi(t) = U(t) int_0^inf w(tau) / (U(tau) + U(t)) dtau`.
pub fn fundamental_function<U>(w: &Weight1D, u: U, t: f64, cfg: &QuadratureConfig) -> Result<f64>
where
    U: Fn(f64) -> Fallible,
{
    let ut = u(t)?;
    let wf = w.as_fn();
    let mut breaks = w.breaks();
    breaks.push(t);
    let integral = integrate_fallible(
        |s| Ok(div0(wf(s)?, u(s)? + ut)),
        Interval::half_line(),
        &breaks,
        cfg,
    )?;
    Ok(mul0(ut, integral))
}

/// `phi(x) = sup_{t<x} U(t) sup_{tau>t} w(tau)/U(tau)`.
pub fn sup_form_function<U>(w: &Weight1D, u: U, x: f64, cfg: &QuadratureConfig) -> Result<f64>
where
    U: Fn(f64) -> Fallible,
{
    let wf = w.as_fn();
    let breaks = w.breaks();
    let inner = |t: f64| -> Fallible {
        Ok(sup_over_ray_fallible(
            |s| Ok(div0(wf(s)?, u(s)?)),
            Interval::tail(t)?,
            &breaks,
            cfg,
        )?
        .value)
    };
    Ok(sup_over_ray_fallible(
        |t| Ok(mul0(u(t)?, inner(t)?)),
        Interval::head(x)?,
        &breaks,
        cfg,
    )?
    .value)
}

/// Sufficient condition for a fundamental function to be non-degenerate:
/// `int_0^1 w/U = int_1^inf w = inf` with the defining integral finite.
pub fn fundamental_sufficient<U>(w: &Weight1D, u: U, cfg: &QuadratureConfig) -> TriState
where
    U: Fn(f64) -> Fallible,
{
    let wf = w.as_fn();
    let breaks = w.breaks();
    let run = || -> std::result::Result<TriState, crate::Error> {
        let near0 = integrate_fallible(
            |s| Ok(div0(wf(s)?, u(s)?)),
            Interval::new(0.0, 1.0)?,
            &breaks,
            cfg,
        )?;
        let far = integrate_fallible(|s| wf(s), Interval::tail(1.0)?, &breaks, cfg)?;
        let defining = fundamental_function(w, &u, 1.0, cfg)?;
        Ok(TriState::all([
            bool_state(near0.is_infinite()),
            bool_state(far.is_infinite()),
            bool_state(defining.is_finite()),
        ]))
    };
    run().unwrap_or(TriState::Undetermined)
}

/// Sufficient condition for a sup-form function to be non-degenerate:
/// `w -> 0` at `0+`, `1/w -> 0` and `w/U -> 0` at `inf`, `U/w -> 0` at `0+`.
pub fn sup_form_sufficient<W, U>(w: W, u: U, cc: &CheckConfig) -> TriState
where
    W: Fn(f64) -> Fallible + Sync,
    U: Fn(f64) -> Fallible + Sync,
{
    let run = || -> std::result::Result<TriState, NumericsError> {
        let (w0, winf) = (
            decade_sequence(&w, -1.0, cc.limit_decades)?,
            decade_sequence(&w, 1.0, cc.limit_decades)?,
        );
        let (u0, uinf) = (
            decade_sequence(&u, -1.0, cc.limit_decades)?,
            decade_sequence(&u, 1.0, cc.limit_decades)?,
        );
        let inv: Vec<f64> = winf.iter().map(|&x| div0(1.0, x)).collect();
        let q_inf: Vec<f64> = winf.iter().zip(&uinf).map(|(&a, &b)| div0(a, b)).collect();
        let q0: Vec<f64> = u0.iter().zip(&w0).map(|(&a, &b)| div0(a, b)).collect();
        Ok(TriState::all(
            [&w0, &inv, &q_inf, &q0]
                .iter()
                .map(|s| limit_state(extrapolate_decades(s), true)),
        ))
    };
    run().unwrap_or(TriState::Undetermined)
}

fn bool_state(b: bool) -> TriState {
    if b {
        TriState::Yes
    } else {
        TriState::No
    }
}

/// `phi1(x) = sup_t V~(t) V(x, t) / ||omega1||_{th1,(0,t)}`.
pub fn phi1_with(k: &Kernels, x: f64) -> Fallible {
    let vx = k.v_tilde(x)?;
    let f = |t: f64| -> Fallible {
        let vt = k.v_tilde(t)?;
        Ok(div0(min_form(vt, vx), k.head1_theta(t)?))
    };
    Ok(sup_over_ray_fallible(f, Interval::half_line(), &k.all_breaks(), &k.cfg)?.value)
}

/// `a b / (a + b)` on the extended half-line.
pub(crate) fn min_form(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        0.0
    } else if a.is_infinite() {
        b
    } else if b.is_infinite() {
        a
    } else {
        a * b / (a + b)
    }
}

pub fn phi1(x: f64, prob: &RadialProblem, cfg: &QuadratureConfig) -> Result<f64> {
    Ok(phi1_with(&Kernels::new(prob, cfg)?, x)?)
}

/// `phi2(x) = (int [V~(t) V(x, t)]^s d(-||omega1||_{th1,(0,t)}^(-s)))^(1/s)`,
/// `s = th1 -> p2`.
pub fn phi2_with(k: &Kernels, x: f64) -> Fallible {
    let (_, p2, th1, _) = k.prob.params.values();
    let s = crate::spaces::arrow(th1, p2);
    let mu = k.head1_measure(s)?;
    let vx = k.v_tilde(x)?;
    let mut breaks = k.all_breaks();
    breaks.push(x);
    let f = |t: f64| -> Fallible { Ok(powe(min_form(k.v_tilde(t)?, vx), s)) };
    let inner = stieltjes_integrate_with(
        f,
        &mu,
        &breaks,
        StieltjesMethod::Auto,
        &k.cfg.tightened(0.1),
    )?;
    Ok(powe(inner, 1.0 / s))
}

pub fn phi2(x: f64, prob: &RadialProblem, cfg: &QuadratureConfig) -> Result<f64> {
    Ok(phi2_with(&Kernels::new(prob, cfg)?, x)?)
}

/// Sufficient condition for `phi1` to be non-degenerate, from the sup-form
/// criterion with `w = V~ / ||omega1||_{th1,(0,.)}` and `U = V~`.
pub fn phi1_sufficient(k: &Kernels, cc: &CheckConfig) -> TriState {
    sup_form_sufficient(
        |t| Ok(div0(k.v_tilde(t)?, k.head1_theta(t)?)),
        |t| k.v_tilde(t),
        cc,
    )
}

/// Sufficient condition for `phi2` to be non-degenerate:
/// `mu(0, 1) = int_1^inf V~^s dmu = inf` with `mu = d(-||omega1||^(-s))`.
pub fn phi2_sufficient(k: &Kernels) -> TriState {
    let run = || -> Result<TriState> {
        let (_, p2, th1, _) = k.prob.params.values();
        let s = crate::spaces::arrow(th1, p2);
        let mu = k.head1_measure(s)?;
        let near0 = mu.mass_below(1.0, &k.cfg)?;
        let far = integrate_fallible(
            |t| Ok(mul0(k.vt.pow_at(t, s)?, mu.density(t)?)),
            Interval::tail(1.0)?,
            &k.all_breaks(),
            &k.cfg,
        )?;
        Ok(bool_state(near0.is_infinite()).and(bool_state(far.is_infinite())))
    };
    run().unwrap_or(TriState::Undetermined)
}

/// One hypothesis verified before an estimator runs.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "check", rename_all = "snake_case")]
pub enum HypothesisCheck {
    Class {
        subject: String,
        kind: ClassKind,
        report: ClassReport,
    },
    Admissible {
        subject: String,
        verdict: TriState,
    },
    Quasiconcave {
        subject: String,
        report: QuasiconcavityReport,
    },
    /// A pointwise side condition on the data.
    Condition {
        subject: String,
        verdict: TriState,
        notes: String,
    },
}

impl HypothesisCheck {
    pub fn subject(&self) -> &str {
        match self {
            HypothesisCheck::Class { subject, .. }
            | HypothesisCheck::Admissible { subject, .. }
            | HypothesisCheck::Quasiconcave { subject, .. }
            | HypothesisCheck::Condition { subject, .. } => subject,
        }
    }

    /// Combined verdict; a quasiconcavity check passes only when the
    /// function is also non-degenerate.
    pub fn verdict(&self) -> TriState {
        match self {
            HypothesisCheck::Class { report, .. } => report.member,
            HypothesisCheck::Admissible { verdict, .. }
            | HypothesisCheck::Condition { verdict, .. } => *verdict,
            HypothesisCheck::Quasiconcave { report, .. } => {
                report.is_u_quasiconcave.and(report.is_nondegenerate)
            }
        }
    }

    pub fn summary(&self) -> String {
        match self {
            HypothesisCheck::Class {
                subject,
                kind,
                report,
            } => {
                let w = report
                    .witnesses
                    .first()
                    .map(|(t, v)| format!(" (t = {t}, norm = {v})"))
                    .unwrap_or_default();
                format!("{subject} in {kind}: {}{w}", report.member)
            }
            HypothesisCheck::Admissible { subject, verdict } => {
                format!("{subject} admissible: {verdict}")
            }
            HypothesisCheck::Quasiconcave { subject, report } => format!(
                "{subject}: quasiconcave {}, non-degenerate {}",
                report.is_u_quasiconcave, report.is_nondegenerate
            ),
            HypothesisCheck::Condition {
                subject,
                verdict,
                notes,
            } => {
                if notes.is_empty() {
                    format!("{subject}: {verdict}")
                } else {
                    format!("{subject}: {verdict} ({notes})")
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::{parse_weight, ParamQuadruple};
    use approx::assert_relative_eq;

    fn q() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    fn cc() -> CheckConfig {
        CheckConfig::default()
    }

    fn e(x: f64) -> Exponent {
        Exponent::new(x).unwrap()
    }

    #[test]
    fn class_examples() {
        let r = check_class(
            &parse_weight("exp(-t)").unwrap(),
            e(1.0),
            ClassKind::Omega,
            &q(),
            &cc(),
        );
        assert_eq!(r.member, TriState::Yes, "{r:?}");
        let r = check_class(
            &parse_weight("chi(0,1)").unwrap(),
            e(1.0),
            ClassKind::Omega,
            &q(),
            &cc(),
        );
        assert_eq!(r.member, TriState::No);
        assert_relative_eq!(r.witnesses[0].0, 1.0, max_relative = 1e-12);
        let r = check_class(&Weight1D::one(), e(2.0), ClassKind::COmega, &q(), &cc());
        assert_eq!(r.member, TriState::Yes);
        let r = check_class(&Weight1D::one(), e(2.0), ClassKind::Omega, &q(), &cc());
        assert_eq!(r.member, TriState::No);
        let r = check_class(
            &parse_weight("chi(1,2)").unwrap(),
            e(1.0),
            ClassKind::COmega,
            &q(),
            &cc(),
        );
        assert_eq!(r.member, TriState::No);
        let r = check_class(
            &parse_weight("exp(-t)").unwrap(),
            Exponent::INFINITY,
            ClassKind::Omega,
            &q(),
            &cc(),
        );
        assert_eq!(r.member, TriState::Yes, "{r:?}");
    }

    #[test]
    fn extrapolation() {
        let seq = |f: &dyn Fn(f64) -> f64, s: f64| {
            (0..=16)
                .map(|k| f(10f64.powf(s * k as f64)))
                .collect::<Vec<_>>()
        };
        assert_eq!(extrapolate_decades(&seq(&|t| t.sqrt(), -1.0)), 0.0);
        assert_eq!(extrapolate_decades(&seq(&|t| t.sqrt(), 1.0)), f64::INFINITY);
        assert_eq!(extrapolate_decades(&seq(&|t| t.ln(), 1.0)), f64::INFINITY);
        assert_eq!(extrapolate_decades(&seq(&|t| t.min(1.0), 1.0)), 1.0);
        assert_relative_eq!(
            extrapolate_decades(&seq(&|t| 2.0 + 1.0 / t, 1.0)),
            2.0,
            max_relative = 1e-9
        );
        assert_relative_eq!(
            extrapolate_decades(&seq(&|t| 3.0 - t.powf(0.3), -1.0)),
            3.0,
            max_relative = 1e-6
        );
        assert!(extrapolate_decades(&seq(&|t| 2.0 + (t.ln()).sin(), 1.0)).is_nan());
    }

    #[test]
    fn admissible_examples() {
        assert_eq!(check_admissible(|t| Ok(t), &cc()), TriState::Yes);
        assert_eq!(check_admissible(|t| Ok(t.min(1.0)), &cc()), TriState::No);
        assert_eq!(check_admissible(|t| Ok(t.sqrt()), &cc()), TriState::Yes);
        assert_eq!(check_admissible(|t| Ok(1.0 + t), &cc()), TriState::No);
    }

    #[test]
    fn quasiconcave_examples() {
        let r = check_quasiconcave(|t| Ok(t.min(1.0)), |t| Ok(t), &cc());
        assert_eq!(r.is_u_quasiconcave, TriState::Yes);
        assert_eq!(r.is_nondegenerate, TriState::No);
        assert_eq!(r.limit_diagnostics[1], 1.0);
        let r = check_quasiconcave(|t| Ok(t.sqrt()), |t| Ok(t), &cc());
        assert_eq!(r.is_u_quasiconcave, TriState::Yes);
        assert_eq!(r.is_nondegenerate, TriState::Yes);
        assert_eq!(r.limit_diagnostics, [0.0; 4]);
        let r = check_quasiconcave(|t| Ok(t * t), |t| Ok(t), &cc());
        assert_eq!(r.is_u_quasiconcave, TriState::No);
        assert_eq!(r.is_nondegenerate, TriState::No);
    }

    #[test]
    fn fundamental_examples() {
        let w = parse_weight("chi(0,1)").unwrap();
        assert_relative_eq!(
            fundamental_function(&w, |t| Ok(t), 1.0, &q()).unwrap(),
            2f64.ln(),
            max_relative = 1e-9
        );
        for t in [0.1f64, 1.0, 10.0] {
            let expect: f64 = t * (1.0f64 + 1.0 / t).ln();
            assert_relative_eq!(
                fundamental_function(&w, |s| Ok(s), t, &q()).unwrap(),
                expect,
                max_relative = 1e-9
            );
        }
        assert_eq!(
            fundamental_function(&Weight1D::constant(0.0), |t| Ok(t), 2.0, &q()).unwrap(),
            0.0
        );
    }

    #[test]
    fn fundamental_sufficient_on_power_weight() {
        // w = t^-1/2, U = t: int_0^1 t^-3/2 = inf, int_1^inf t^-1/2 = inf.
        let w = parse_weight("t^-0.5").unwrap();
        assert_eq!(fundamental_sufficient(&w, |t| Ok(t), &q()), TriState::Yes);
        let r = check_quasiconcave(
            |t| Ok(fundamental_function(&w, |s| Ok(s), t, &q()).unwrap()),
            |t| Ok(t),
            &cc(),
        );
        assert_eq!(r.is_nondegenerate, TriState::Yes, "{r:?}");
        assert_eq!(
            fundamental_sufficient(&parse_weight("chi(0,1)").unwrap(), |t| Ok(t), &q()),
            TriState::No
        );
    }

    #[test]
    fn sup_form_sufficient_on_power_weight() {
        // w = t^1/2, U = t.
        let w = parse_weight("t^0.5").unwrap();
        assert_eq!(
            sup_form_sufficient(|t| Ok(t.sqrt()), |t| Ok(t), &cc()),
            TriState::Yes
        );
        let coarse = CheckConfig {
            points_per_decade: 8,
            ..cc()
        };
        let r = check_quasiconcave(
            |t| Ok(sup_form_function(&w, |s| Ok(s), t, &q()).unwrap()),
            |t| Ok(t),
            &coarse,
        );
        assert_eq!(r.is_nondegenerate, TriState::Yes, "{r:?}");
    }

    fn thm1_problem() -> RadialProblem {
        let params = ParamQuadruple::new(2.0, 1.0, 1.0, 2.0, 1).unwrap();
        RadialProblem::unweighted(
            params,
            parse_weight("t^-0.625").unwrap(),
            parse_weight("exp(-t)").unwrap(),
        )
    }

    #[test]
    fn phi1_closed_form() {
        // V~(t) = (2t)^(1/2), head norm (8/3) t^(3/8); the supremum of
        // min-form / head is attained where d/dt vanishes.
        let prob = thm1_problem();
        let k = Kernels::new(&prob, &q()).unwrap();
        for x in [0.01f64, 1.0, 30.0] {
            let vx = (2.0f64 * x).sqrt();
            let g = |t: f64| {
                let vt = (2.0 * t).sqrt();
                vt * vx / (vt + vx) / (8.0 / 3.0 * t.powf(0.375))
            };
            let brute = (-4000..4000)
                .map(|i| g(x * 10f64.powf(i as f64 / 1000.0)))
                .fold(0.0, f64::max);
            assert_relative_eq!(phi1_with(&k, x).unwrap(), brute, max_relative = 1e-6);
        }
    }

    #[test]
    fn phi1_scaling_and_monotonicity() {
        let prob = thm1_problem();
        let k = Kernels::new(&prob, &q()).unwrap();
        let k2 = Kernels::new(&prob.with_omega1_scaled(3.0), &q()).unwrap();
        let mut prev = 0.0;
        for x in [1e-3, 0.1, 1.0, 10.0, 1e3] {
            let a = phi1_with(&k, x).unwrap();
            assert_relative_eq!(phi1_with(&k2, x).unwrap(), a / 3.0, max_relative = 1e-9);
            assert!(a >= prev);
            prev = a;
        }
        // phi1 ~ x^(1/8) near zero.
        assert!(phi1_with(&k, 1e-40).unwrap() < 1e-4);
    }

    #[test]
    fn phi1_quasiconcave_and_sufficient() {
        let k = Kernels::new(&thm1_problem(), &q()).unwrap();
        assert_eq!(phi1_sufficient(&k, &cc()), TriState::Yes);
        let r12 = k.prob.params.r12();
        let coarse = CheckConfig {
            points_per_decade: 4,
            ..cc()
        };
        let r = check_quasiconcave(
            |x| Ok(phi1_with(&k, x).unwrap()),
            |t| Ok(powe(k.v_tilde(t)?, 1.0 / r12)),
            &coarse,
        );
        assert_eq!(r.is_u_quasiconcave, TriState::Yes, "{r:?}");
        assert_eq!(r.is_nondegenerate, TriState::Yes, "{r:?}");
    }

    #[test]
    fn phi2_density_matches_sums_and_scales() {
        // n = 1, v = 1, p1 = 2, p2 = 1, th1 = 2. With omega1 = 1 the integral
        // diverges logarithmically at 0; a slight singularity restores it.
        let params = ParamQuadruple::new(2.0, 1.0, 2.0, 4.0, 1).unwrap();
        let flat =
            RadialProblem::unweighted(params, Weight1D::one(), parse_weight("exp(-t)").unwrap());
        assert!(phi2(1.0, &flat, &q()).unwrap().is_infinite());
        let prob = RadialProblem::unweighted(
            params,
            parse_weight("t^-0.125").unwrap(),
            parse_weight("exp(-t)").unwrap(),
        );
        let k = Kernels::new(&prob, &q()).unwrap();
        let k3 = Kernels::new(&prob.with_omega1_scaled(3.0), &q()).unwrap();
        let s = 2.0;
        let mu = k.head1_measure(s).unwrap();
        let mut prev = 0.0;
        for x in [0.1, 1.0, 10.0] {
            let a = phi2_with(&k, x).unwrap();
            assert!(a.is_finite() && a > prev);
            prev = a;
            let vx = k.v_tilde(x).unwrap();
            let f = |t: f64| Ok(powe(min_form(k.v_tilde(t)?, vx), s));
            let sums = stieltjes_integrate_with(f, &mu, &[x], StieltjesMethod::Sums, &q())
                .unwrap()
                .sqrt();
            assert_relative_eq!(a, sums, max_relative = 1e-6);
            assert_relative_eq!(phi2_with(&k3, x).unwrap(), a / 3.0, max_relative = 1e-9);
        }
    }
}
