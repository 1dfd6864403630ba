use std::fmt;
use std::sync::Arc;

use super::{
    decade_point, integrate_fallible, sup_over_ray_fallible, Fallible, Interval, QuadratureConfig,
};
use crate::error::NumericsError;

/// Shared, thread-safe real function.
pub type DynFn = Arc<dyn Fn(f64) -> Fallible + Send + Sync>;

const KNOTS_PER_DECADE: usize = 4;
const KNOT_DECADES: i32 = 12;

/// Head and tail masses `int_0^t d` and `int_t^inf d` of a non-negative
/// density, tabulated on a quarter-decade grid so that each query costs one
/// short quadrature.
///
/// Tabulated partial sums are accumulated from the left for heads and from
/// the right for tails, so tiny tails are never obtained by cancellation.
pub struct Cumulative {
    density: DynFn,
    breaks: Vec<f64>,
    cfg: QuadratureConfig,
    knots: Vec<f64>,
    segments: Vec<f64>,
    head_prefix: Vec<f64>,
    tail_suffix: Vec<f64>,
}

impl fmt::Debug for Cumulative {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Cumulative")
            .field("knots", &self.knots.len())
            .field("total", &self.total())
            .finish()
    }
}

impl Cumulative {
    pub fn new(
        density: DynFn,
        breaks: &[f64],
        cfg: &QuadratureConfig,
    ) -> Result<Self, NumericsError> {
        let mut breaks: Vec<f64> = breaks
            .iter()
            .copied()
            .filter(|b| b.is_finite() && *b > 0.0)
            .collect();
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        let n = KNOTS_PER_DECADE as i64;
        let knots: Vec<f64> = (-(KNOT_DECADES as i64) * n..=KNOT_DECADES as i64 * n)
            .map(|k| decade_point(k, KNOTS_PER_DECADE))
            .collect();
        let d = density.clone();
        let f = move |t: f64| d(t);
        let left = integrate_fallible(&f, Interval::head(knots[0])?, &breaks, cfg)?;
        let right = integrate_fallible(&f, Interval::tail(*knots.last().unwrap())?, &breaks, cfg)?;
        let segments = knots
            .windows(2)
            .map(|w| integrate_fallible(&f, Interval::new(w[0], w[1])?, &breaks, cfg))
            .collect::<Result<Vec<_>, _>>()?;
        let mut head_prefix = Vec::with_capacity(knots.len());
        let mut acc = left;
        head_prefix.push(acc);
        for s in &segments {
            acc += s;
            head_prefix.push(acc);
        }
        let mut tail_suffix = vec![0.0; knots.len()];
        let mut acc = right;
        tail_suffix[knots.len() - 1] = acc;
        for (k, s) in segments.iter().enumerate().rev() {
            acc += s;
            tail_suffix[k] = acc;
        }
        Ok(Self {
            density,
            breaks,
            cfg: *cfg,
            knots,
            segments,
            head_prefix,
            tail_suffix,
        })
    }

    /// Convenience constructor for plain closures.
    pub fn from_fn<F>(f: F, breaks: &[f64], cfg: &QuadratureConfig) -> Result<Self, NumericsError>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::new(Arc::new(move |t| Ok(f(t))), breaks, cfg)
    }

    pub fn density(&self, t: f64) -> Fallible {
        (self.density)(t)
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    /// `int_0^inf d`.
    pub fn total(&self) -> f64 {
        self.head_prefix[0] + self.tail_suffix[0]
    }

    fn cell(&self, t: f64) -> Option<usize> {
        let last = *self.knots.last().unwrap();
        if !(t >= self.knots[0] && t < last) {
            return None;
        }
        let mut k = ((t.log10() + KNOT_DECADES as f64) * KNOTS_PER_DECADE as f64).floor() as usize;
        k = k.min(self.segments.len() - 1);
        while k > 0 && self.knots[k] > t {
            k -= 1;
        }
        while k + 1 < self.segments.len() && self.knots[k + 1] <= t {
            k += 1;
        }
        Some(k)
    }

    fn piece(&self, a: f64, b: f64) -> Fallible {
        if b <= a {
            return Ok(0.0);
        }
        let d = &self.density;
        integrate_fallible(|t| d(t), Interval::new(a, b)?, &self.breaks, &self.cfg)
    }

    /// `int_0^t d`.
    pub fn head(&self, t: f64) -> Fallible {
        if t <= 0.0 {
            return Ok(0.0);
        }
        if t.is_infinite() {
            return Ok(self.total());
        }
        match self.cell(t) {
            Some(k) => Ok(self.head_prefix[k] + self.piece(self.knots[k], t)?),
            None if t < self.knots[0] => {
                let d = &self.density;
                integrate_fallible(|s| d(s), Interval::head(t)?, &self.breaks, &self.cfg)
            }
            None => {
                let n = self.knots.len() - 1;
                Ok(self.head_prefix[n] + self.piece(self.knots[n], t)?)
            }
        }
    }

    /// `int_t^inf d`.
    pub fn tail(&self, t: f64) -> Fallible {
        if t <= 0.0 {
            return Ok(self.total());
        }
        if t.is_infinite() {
            return Ok(0.0);
        }
        match self.cell(t) {
            Some(k) => Ok(self.tail_suffix[k + 1] + self.piece(t, self.knots[k + 1])?),
            None if t < self.knots[0] => Ok(self.tail_suffix[0] + self.piece(t, self.knots[0])?),
            None => {
                let d = &self.density;
                integrate_fallible(|s| d(s), Interval::tail(t)?, &self.breaks, &self.cfg)
            }
        }
    }

    /// `int_a^b d` without cancellation between head masses.
    pub fn mass(&self, a: f64, b: f64) -> Fallible {
        if b <= a {
            return Ok(0.0);
        }
        if a <= 0.0 {
            return self.head(b);
        }
        if b.is_infinite() {
            return self.tail(a);
        }
        match (self.cell(a), self.cell(b)) {
            (Some(ka), Some(kb)) if ka == kb => self.piece(a, b),
            (Some(ka), Some(kb)) => {
                let inner: f64 = self.segments[ka + 1..kb].iter().sum();
                Ok(self.piece(a, self.knots[ka + 1])? + inner + self.piece(self.knots[kb], b)?)
            }
            _ => self.piece(a, b),
        }
    }
}

/// Running supremum `t -> sup_{(0, t)} g`, tabulated like [`Cumulative`].
pub struct RunningSup {
    g: DynFn,
    breaks: Vec<f64>,
    cfg: QuadratureConfig,
    knots: Vec<f64>,
    prefix: Vec<f64>,
    overall: f64,
}

impl fmt::Debug for RunningSup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RunningSup")
            .field("overall", &self.overall)
            .finish()
    }
}

impl RunningSup {
    pub fn new(g: DynFn, breaks: &[f64], cfg: &QuadratureConfig) -> Result<Self, NumericsError> {
        let mut breaks: Vec<f64> = breaks
            .iter()
            .copied()
            .filter(|b| b.is_finite() && *b > 0.0)
            .collect();
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        let n = KNOTS_PER_DECADE as i64;
        let knots: Vec<f64> = (-(KNOT_DECADES as i64) * n..=KNOT_DECADES as i64 * n)
            .map(|k| decade_point(k, KNOTS_PER_DECADE))
            .collect();
        let gg = g.clone();
        let f = move |t: f64| gg(t);
        let mut prefix = Vec::with_capacity(knots.len());
        let mut acc = sup_over_ray_fallible(&f, Interval::head(knots[0])?, &breaks, cfg)?.value;
        prefix.push(acc);
        for w in knots.windows(2) {
            let s = sup_over_ray_fallible(&f, Interval::new(w[0], w[1])?, &breaks, cfg)?.value;
            acc = acc.max(s).max(f(w[1])?);
            prefix.push(acc);
        }
        let right =
            sup_over_ray_fallible(&f, Interval::tail(*knots.last().unwrap())?, &breaks, cfg)?.value;
        let overall = acc.max(right);
        Ok(Self {
            g,
            breaks,
            cfg: *cfg,
            knots,
            prefix,
            overall,
        })
    }

    /// `sup_{(0, t)} g`.
    pub fn at(&self, t: f64) -> Fallible {
        if t <= 0.0 {
            return Ok(0.0);
        }
        if t.is_infinite() {
            return Ok(self.overall);
        }
        let g = &self.g;
        let f = |s: f64| g(s);
        if t <= self.knots[0] {
            return Ok(
                sup_over_ray_fallible(f, Interval::head(t)?, &self.breaks, &self.cfg)?.value,
            );
        }
        let last = self.knots.len() - 1;
        let k = if t >= self.knots[last] {
            last
        } else {
            let mut k =
                ((t.log10() + KNOT_DECADES as f64) * KNOTS_PER_DECADE as f64).floor() as usize;
            k = k.min(last - 1);
            while k > 0 && self.knots[k] > t {
                k -= 1;
            }
            while k + 1 < last && self.knots[k + 1] <= t {
                k += 1;
            }
            k
        };
        let base = self.prefix[k];
        if t <= self.knots[k] {
            return Ok(base);
        }
        let rest =
            sup_over_ray_fallible(f, Interval::new(self.knots[k], t)?, &self.breaks, &self.cfg)?
                .value;
        Ok(base.max(rest))
    }

    pub fn overall(&self) -> f64 {
        self.overall
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exponential_head_and_tail() {
        let cfg = QuadratureConfig::default();
        let c = Cumulative::from_fn(|t| (-t).exp(), &[], &cfg).unwrap();
        assert_relative_eq!(c.total(), 1.0, max_relative = 1e-9);
        for &t in &[1e-14, 1e-3, 0.7, 1.0, 5.5, 40.0, 700.0, 1e13] {
            assert_relative_eq!(c.head(t).unwrap(), -(-t).exp_m1(), max_relative = 1e-8);
            let tail = (-t).exp();
            if tail > 1e-290 {
                assert_relative_eq!(c.tail(t).unwrap(), tail, max_relative = 1e-8);
            }
        }
        assert_relative_eq!(
            c.mass(2.0, 2.0 + 1e-9).unwrap(),
            1e-9 * (-2.0f64).exp(),
            max_relative = 1e-6
        );
        assert_relative_eq!(
            c.mass(0.5, 3.0).unwrap(),
            (-0.5f64).exp() - (-3.0f64).exp(),
            max_relative = 1e-9
        );
    }

    #[test]
    fn heavy_head_is_infinite() {
        let cfg = QuadratureConfig::default();
        let c = Cumulative::from_fn(|t| t.powi(-2), &[], &cfg).unwrap();
        assert!(c.head(1.0).unwrap().is_infinite());
        assert_relative_eq!(c.tail(2.0).unwrap(), 0.5, max_relative = 1e-9);
    }

    #[test]
    fn running_sup() {
        let cfg = QuadratureConfig::default();
        let r = RunningSup::new(Arc::new(|t: f64| Ok(t * (-t).exp())), &[], &cfg).unwrap();
        assert_relative_eq!(
            r.at(0.5).unwrap(),
            0.5 * (-0.5f64).exp(),
            max_relative = 1e-9
        );
        assert_relative_eq!(r.at(3.0).unwrap(), (-1.0f64).exp(), max_relative = 1e-9);
        assert_relative_eq!(r.overall(), (-1.0f64).exp(), max_relative = 1e-9);
    }
}
