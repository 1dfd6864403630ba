use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::LN_10;

use super::{sup_over_ray_fallible, Fallible, Interval, QuadratureConfig};
use crate::error::NumericsError;

// 15-point Kronrod extension of the 7-point Gauss rule on [-1, 1].
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Integral of `f` over `iv` (see [`integrate_with_breaks`]).
pub fn integrate<F>(f: F, iv: Interval, cfg: &QuadratureConfig) -> Fallible
where
    F: Fn(f64) -> f64,
{
    integrate_with_breaks(f, iv, &[], cfg)
}

/// Integral of a non-negative, piecewise continuous `f` over `iv`.
///
/// `breaks` lists points where `f` may jump; they become subinterval
/// boundaries. Returns `+inf` when the integral diverges.
pub fn integrate_with_breaks<F>(
    f: F,
    iv: Interval,
    breaks: &[f64],
    cfg: &QuadratureConfig,
) -> Fallible
where
    F: Fn(f64) -> f64,
{
    integrate_fallible(|t| Ok(f(t)), iv, breaks, cfg)
}

/// Like [`integrate_with_breaks`] for integrands whose evaluation can fail.
pub fn integrate_fallible<F>(f: F, iv: Interval, breaks: &[f64], cfg: &QuadratureConfig) -> Fallible
where
    F: Fn(f64) -> Fallible,
{
    let g = |u: f64| -> Fallible {
        let t = u.exp();
        let v = f(t)?;
        if v.is_nan() || v < 0.0 {
            return Err(NumericsError::Domain { t, value: v });
        }
        if v == 0.0 {
            return Ok(0.0);
        }
        Ok(v * t)
    };
    let mut ubreaks: Vec<f64> = breaks
        .iter()
        .copied()
        .filter(|&b| iv.contains(b) && b.is_finite())
        .map(f64::ln)
        .collect();
    ubreaks.sort_by(f64::total_cmp);
    ubreaks.dedup();

    let lo_finite = iv.lo() > 0.0;
    let hi_finite = iv.hi().is_finite();
    match (lo_finite, hi_finite) {
        (true, true) => {
            let (a, b) = (iv.lo().ln(), iv.hi().ln());
            Ok(adaptive(
                &g,
                a,
                b,
                &ubreaks,
                cfg.abs_tol,
                cfg.rel_tol,
                cfg.max_subdivisions,
            )?
            .0)
        }
        (false, true) => extend(&g, iv.hi().ln(), -1.0, &ubreaks, 0.0, cfg),
        (true, false) => extend(&g, iv.lo().ln(), 1.0, &ubreaks, 0.0, cfg),
        (false, false) => {
            let right = extend(&g, 0.0, 1.0, &ubreaks, 0.0, cfg)?;
            if right.is_infinite() {
                return Ok(right);
            }
            let left = extend(&g, 0.0, -1.0, &ubreaks, right, cfg)?;
            Ok(left + right)
        }
    }
}

/// `(int_iv (f w)^p)^(1/p)` for finite `p`, `sup_iv f w` for `p = inf`.
///
/// For `p = inf` the supremum is taken on a refining grid; for
/// piecewise-continuous data it coincides with the essential supremum.
pub fn weighted_lp_norm<F, W>(
    f: F,
    p: f64,
    w: W,
    iv: Interval,
    breaks: &[f64],
    cfg: &QuadratureConfig,
) -> Fallible
where
    F: Fn(f64) -> f64,
    W: Fn(f64) -> f64,
{
    if !(p > 0.0) {
        return Err(NumericsError::Domain {
            t: f64::NAN,
            value: p,
        });
    }
    if p.is_infinite() {
        return Ok(sup_over_ray_fallible(|t| Ok((f(t) * w(t)).abs()), iv, breaks, cfg)?.value);
    }
    let integral = integrate_with_breaks(|t| (f(t) * w(t)).abs().powf(p), iv, breaks, cfg)?;
    Ok(super::powe(integral, 1.0 / p))
}

/// One Gauss-Kronrod 7/15 panel: `(kronrod estimate, |kronrod - gauss|)`.
fn gk15<G>(g: &G, a: f64, b: f64) -> Result<(f64, f64), NumericsError>
where
    G: Fn(f64) -> Fallible,
{
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = g(c)?;
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (j, (&x, &wk)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let f1 = g(c - h * x)?;
        let f2 = g(c + h * x)?;
        kron += wk * (f1 + f2);
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let (k, e) = (kron * h, ((kron - gauss) * h).abs());
    if k.is_infinite() {
        return Ok((f64::INFINITY, 0.0));
    }
    Ok((k, e))
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    val: f64,
    err: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err.total_cmp(&other.err) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Globally adaptive GK15 on `[a, b]`, split initially at `splits`.
///
/// Stops when the summed error estimate drops below
/// `max(abs_floor, rel * |integral|)`.
pub(crate) fn adaptive<G>(
    g: &G,
    a: f64,
    b: f64,
    splits: &[f64],
    abs_floor: f64,
    rel: f64,
    budget: usize,
) -> Result<(f64, f64), NumericsError>
where
    G: Fn(f64) -> Fallible,
{
    let mut edges = vec![a];
    edges.extend(splits.iter().copied().filter(|&s| s > a && s < b));
    edges.push(b);

    let mut heap = BinaryHeap::new();
    let mut done: Vec<Panel> = Vec::new();
    for w in edges.windows(2) {
        let (val, err) = gk15(g, w[0], w[1])?;
        if val.is_infinite() {
            return Ok((f64::INFINITY, 0.0));
        }
        heap.push(Panel {
            a: w[0],
            b: w[1],
            val,
            err,
        });
    }
    let mut subdivisions = heap.len();
    loop {
        let (total, err_sum) = heap
            .iter()
            .chain(done.iter())
            .fold((0.0, 0.0), |(v, e), p| (v + p.val, e + p.err));
        if err_sum <= abs_floor.max(rel * total.abs()) {
            return Ok((total, err_sum));
        }
        let Some(worst) = heap.pop() else {
            // Every remaining panel is at machine resolution.
            return Err(NumericsError::NonConvergent {
                lo: a.exp(),
                hi: b.exp(),
                budget,
                estimate: total,
                error: err_sum,
            });
        };
        if subdivisions >= budget {
            return Err(NumericsError::NonConvergent {
                lo: a.exp(),
                hi: b.exp(),
                budget,
                estimate: total,
                error: err_sum,
            });
        }
        let mid = 0.5 * (worst.a + worst.b);
        if worst.b - worst.a <= 1e-13 * (1.0 + mid.abs()) {
            done.push(worst);
            continue;
        }
        for (lo, hi) in [(worst.a, mid), (mid, worst.b)] {
            let (val, err) = gk15(g, lo, hi)?;
            if val.is_infinite() {
                return Ok((f64::INFINITY, 0.0));
            }
            heap.push(Panel {
                a: lo,
                b: hi,
                val,
                err,
            });
        }
        subdivisions += 1;
    }
}

/// Integrates `g` (already in the variable `u`) from `start` towards
/// `dir * inf`, one decade at a time.
///
/// Blocks whose masses decay geometrically are summed in closed form once
/// the decay rate has settled; blocks that stop decaying mean divergence.
fn extend<G>(
    g: &G,
    start: f64,
    dir: f64,
    ubreaks: &[f64],
    base_total: f64,
    cfg: &QuadratureConfig,
) -> Fallible
where
    G: Fn(f64) -> Fallible,
{
    const OVERFLOW: f64 = 1e300;
    const DIVERGENCE_DECADES: usize = 20;
    let max_blocks = cfg.max_extension_decades.max(4) as usize;
    let farthest_break = ubreaks
        .iter()
        .map(|&u| (u - start) * dir)
        .filter(|&d| d > 0.0)
        .fold(0.0f64, f64::max);

    let mut side = 0.0;
    let mut prev: Option<f64> = None;
    let mut ratios: Vec<f64> = Vec::new();
    for k in 0..max_blocks {
        let u0 = start + dir * LN_10 * k as f64;
        let u1 = start + dir * LN_10 * (k + 1) as f64;
        let (a, b) = if dir > 0.0 { (u0, u1) } else { (u1, u0) };
        let floor = cfg.abs_tol.max(0.1 * cfg.rel_tol * (base_total + side));
        let (bk, _) = adaptive(g, a, b, ubreaks, floor, cfg.rel_tol, cfg.max_subdivisions)?;
        if bk.is_infinite() {
            return Ok(f64::INFINITY);
        }
        side += bk;
        let total = base_total + side;
        if total > OVERFLOW {
            return Ok(f64::INFINITY);
        }
        let passed = LN_10 * (k + 1) as f64 >= farthest_break;
        let q = match prev {
            Some(p) if p > 0.0 => Some(bk / p),
            _ => None,
        };
        prev = Some(bk);
        if let Some(q) = q {
            ratios.push(q);
        } else {
            ratios.clear();
        }
        if !passed || k == 0 {
            continue;
        }
        if bk == 0.0 {
            return Ok(side);
        }
        let Some(q) = q else { continue };
        let prev_q = ratios.len().checked_sub(2).map(|i| ratios[i]);
        if q < 1.0 - 1e-6 {
            let tail = bk * q / (1.0 - q);
            let settled = prev_q.is_some_and(|pq| (q - pq).abs() <= 1e-3 * q);
            if tail <= 0.1 * cfg.rel_tol * total {
                if settled {
                    side += tail;
                }
                return Ok(side);
            }
            // A pure power law has a constant block ratio; sum it exactly.
            if ratios.len() >= 3 && prev_q.is_some_and(|pq| (q - pq).abs() <= 1e-9 * q) {
                return Ok(side + tail);
            }
        }
        if k >= DIVERGENCE_DECADES
            && ratios.len() >= 3
            && ratios[ratios.len() - 3..].iter().all(|&r| r >= 1.0 - 1e-9)
        {
            return Ok(f64::INFINITY);
        }
    }
    match ratios.last() {
        Some(&q) if q >= 1.0 - 1e-6 => Ok(f64::INFINITY),
        Some(&q) if q < 1.0 => {
            let bk = prev.unwrap_or(0.0);
            Ok(side + bk * q / (1.0 - q))
        }
        _ => Err(NumericsError::NonConvergent {
            lo: if dir > 0.0 { start.exp() } else { 0.0 },
            hi: if dir > 0.0 {
                f64::INFINITY
            } else {
                start.exp()
            },
            budget: max_blocks,
            estimate: side,
            error: f64::NAN,
        }),
    }
}
