use super::{decade_point, Fallible, Interval, QuadratureConfig};
use crate::error::NumericsError;

/// Supremum of a function over an interval together with the point where
/// the largest sample was taken.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupResult {
    pub value: f64,
    /// Location of the best sample; `0` or `inf` when the supremum is a limit
    /// at that end of the ray.
    pub argmax: f64,
}

/// Supremum of a non-negative, piecewise continuous `f` over `iv`.
pub fn sup_over_ray<F>(f: F, iv: Interval, cfg: &QuadratureConfig) -> Fallible
where
    F: Fn(f64) -> f64,
{
    Ok(sup_over_ray_fallible(|t| Ok(f(t)), iv, &[], cfg)?.value)
}

/// Supremum over a refining logarithmic grid.
///
/// The initial grid spans `sup_span_decades` decades on each side of `t = 1`
/// (clipped to `iv`). When the best sample sits at an open end of the ray the
/// grid is extended one decade at a time until the maximum stops rising; a
/// maximum still rising by more than 1% per decade after
/// `max_extension_decades` is read as unbounded growth. The
/// bracket around each competitive local maximum is then refined until the
/// samples bracketing it are within `sup_rel_tol` of it.
pub fn sup_over_ray_fallible<F>(
    f: F,
    iv: Interval,
    breaks: &[f64],
    cfg: &QuadratureConfig,
) -> Result<SupResult, NumericsError>
where
    F: Fn(f64) -> Fallible,
{
    let eval = |t: f64| -> Fallible {
        let v = f(t)?;
        if v.is_nan() || v < 0.0 {
            return Err(NumericsError::Domain { t, value: v });
        }
        Ok(v)
    };
    let n = cfg.grid_points_per_decade as i64;
    let span = cfg.sup_span_decades as i64;
    let open_left = iv.lo() == 0.0;
    let open_right = iv.hi().is_infinite();

    let lo_k = if open_left {
        let top = if open_right {
            0
        } else {
            (iv.hi().log10() * n as f64).floor() as i64
        };
        top.min(0) - span * n
    } else {
        (iv.lo().log10() * n as f64).ceil() as i64
    };
    let hi_k = if open_right {
        let bottom = if open_left {
            0
        } else {
            (iv.lo().log10() * n as f64).ceil() as i64
        };
        bottom.max(0) + span * n
    } else {
        (iv.hi().log10() * n as f64).floor() as i64
    };

    let mut pts: Vec<f64> = (lo_k..=hi_k)
        .map(|k| decade_point(k, cfg.grid_points_per_decade))
        .filter(|&t| iv.contains(t))
        .collect();
    let nudge = 1e-12;
    if !open_left {
        pts.push(iv.lo() * (1.0 + nudge));
    }
    if !open_right {
        pts.push(iv.hi() * (1.0 - nudge));
    }
    for &b in breaks {
        if b.is_finite() && b > 0.0 {
            for t in [b * (1.0 - nudge), b * (1.0 + nudge)] {
                if iv.contains(t) {
                    pts.push(t);
                }
            }
        }
    }
    if pts.is_empty() {
        // very narrow interval
        pts.push((iv.lo() * iv.hi()).sqrt().max(0.5 * (iv.lo() + iv.hi())));
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();

    let mut samples: Vec<(f64, f64)> = Vec::with_capacity(pts.len());
    for &t in &pts {
        let v = eval(t)?;
        if v.is_infinite() {
            return Ok(SupResult {
                value: v,
                argmax: t,
            });
        }
        samples.push((t, v));
    }

    let argmax_index = |s: &[(f64, f64)]| {
        let mut best = 0;
        for (i, &(_, v)) in s.iter().enumerate() {
            if v > s[best].1 {
                best = i;
            }
        }
        best
    };

    // Extend towards an open end while the maximum keeps sitting there.
    let max_ext = cfg.max_extension_decades as i64;
    for dir in [-1i64, 1] {
        let open = if dir < 0 { open_left } else { open_right };
        if !open {
            continue;
        }
        let mut edge_k = if dir < 0 { lo_k } else { hi_k };
        let mut decades = 0;
        loop {
            let best = argmax_index(&samples);
            let at_edge = if dir < 0 {
                best == 0
            } else {
                best == samples.len() - 1
            };
            if !at_edge {
                break;
            }
            if decades >= max_ext {
                // Still climbing at the extension cap.
                let growth = last_growth(&samples, dir, n as usize);
                if growth > 0.01 {
                    return Ok(SupResult {
                        value: f64::INFINITY,
                        argmax: if dir < 0 { 0.0 } else { f64::INFINITY },
                    });
                }
                break;
            }
            let before = samples[best].1;
            let mut block = Vec::with_capacity(n as usize);
            for j in 1..=n {
                let k = edge_k + dir * j;
                let t = decade_point(k, cfg.grid_points_per_decade);
                let v = eval(t)?;
                if v.is_infinite() {
                    return Ok(SupResult {
                        value: v,
                        argmax: t,
                    });
                }
                block.push((t, v));
            }
            edge_k += dir * n;
            decades += 1;
            if dir < 0 {
                block.reverse();
                block.extend(samples.drain(..));
                samples = block;
            } else {
                samples.extend(block);
            }
            let after = samples[argmax_index(&samples)].1;
            let rise = if before > 0.0 {
                after / before - 1.0
            } else if after > 0.0 {
                f64::INFINITY
            } else {
                0.0
            };
            if rise < cfg.sup_rel_tol {
                break;
            }
        }
    }

    let best = argmax_index(&samples);
    let v_max = samples[best].1;
    if v_max == 0.0 {
        return Ok(SupResult {
            value: 0.0,
            argmax: samples[best].0,
        });
    }
    // Every local maximum of the grid close to the best one is refined: two
    // nearly equal peaks must not be ranked by their grid samples alone.
    let mut peaks: Vec<usize> = (0..samples.len())
        .filter(|&i| {
            let v = samples[i].1;
            v >= PEAK_RATIO * v_max
                && (i == 0 || samples[i - 1].1 <= v)
                && (i + 1 == samples.len() || samples[i + 1].1 <= v)
        })
        .collect();
    peaks.sort_by(|&i, &j| samples[j].1.total_cmp(&samples[i].1).then(i.cmp(&j)));
    peaks.truncate(MAX_PEAKS);
    if !peaks.contains(&best) {
        peaks.insert(0, best);
    }
    let mut out: Option<SupResult> = None;
    for i in peaks {
        let (t, v) = samples[i];
        let mut lo = if i > 0 { samples[i - 1].0 } else { t };
        let hi = if i + 1 < samples.len() {
            samples[i + 1].0
        } else {
            t
        };
        if !open_left && i == 0 {
            lo = lo.max(iv.lo() * (1.0 + nudge));
        }
        let r = refine(&eval, t, v, lo, hi, cfg)?;
        if r.value.is_infinite() {
            return Ok(r);
        }
        if out.is_none_or(|o| r.value > o.value) {
            out = Some(r);
        }
    }
    Ok(out.expect("at least one peak"))
}

/// Grid local maxima within this factor of the best sample are refined.
const PEAK_RATIO: f64 = 0.9;
const MAX_PEAKS: usize = 4;

/// Shrinks the bracket `(lo, hi)` around the sample `(t_best, v_best)` until
/// both bracket ends lie within `sup_rel_tol` of the best value, or the
/// bracket is exhausted.
fn refine<E>(
    eval: &E,
    mut t_best: f64,
    mut v_best: f64,
    mut lo: f64,
    mut hi: f64,
    cfg: &QuadratureConfig,
) -> Result<SupResult, NumericsError>
where
    E: Fn(f64) -> Fallible,
{
    let value_at = |t: f64| if t == t_best { Ok(v_best) } else { eval(t) };
    let mut v_lo = value_at(lo)?;
    let mut v_hi = value_at(hi)?;
    for _ in 0..200 {
        if hi <= lo || (hi / lo).ln() < 1e-13 {
            break;
        }
        let spread = 1.0 - v_lo.min(v_hi) / v_best;
        if spread < cfg.sup_rel_tol {
            break;
        }
        let (la, lb) = (lo.ln(), hi.ln());
        let m = 8;
        let mut cand = Vec::with_capacity(m + 2);
        cand.push((lo, v_lo));
        for j in 1..m {
            let t = (la + (lb - la) * j as f64 / m as f64).exp();
            if (t / t_best - 1.0).abs() < 1e-12 {
                // A near copy of the incumbent would become a bracket end.
                continue;
            }
            let v = eval(t)?;
            if v.is_infinite() {
                return Ok(SupResult {
                    value: v,
                    argmax: t,
                });
            }
            cand.push((t, v));
        }
        cand.push((hi, v_hi));
        if t_best > lo && t_best < hi {
            cand.push((t_best, v_best));
        }
        cand.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut i = 0;
        for (j, c) in cand.iter().enumerate() {
            if c.1 > cand[i].1 {
                i = j;
            }
        }
        if cand[i].1 > v_best {
            t_best = cand[i].0;
            v_best = cand[i].1;
        } else {
            i = cand.iter().position(|c| c.0 == t_best).unwrap_or(i);
        }
        let (l, h) = (i.saturating_sub(1), (i + 1).min(cand.len() - 1));
        (lo, v_lo) = cand[l];
        (hi, v_hi) = cand[h];
    }
    Ok(SupResult {
        value: v_best,
        argmax: t_best,
    })
}

/// Relative rise contributed by the outermost decade in direction `dir`.
fn last_growth(samples: &[(f64, f64)], dir: i64, per_decade: usize) -> f64 {
    if samples.len() <= per_decade {
        return 0.0;
    }
    let (outer, inner) = if dir < 0 {
        (&samples[..per_decade], &samples[per_decade..])
    } else {
        let cut = samples.len() - per_decade;
        (&samples[cut..], &samples[..cut])
    };
    let mo = outer.iter().map(|s| s.1).fold(0.0, f64::max);
    let mi = inner.iter().map(|s| s.1).fold(0.0, f64::max);
    if mi > 0.0 {
        mo / mi - 1.0
    } else if mo > 0.0 {
        f64::INFINITY
    } else {
        0.0
    }
}
