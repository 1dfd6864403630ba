use std::fmt;
use std::sync::Arc;

use super::profile::{Cumulative, DynFn};
use super::{
    div0, integrate_fallible, mul0, powe, vanishes_by_underflow, Fallible, Interval,
    QuadratureConfig,
};
use crate::error::NumericsError;

/// Which monotone function of `omega` generates the measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Orientation {
    /// `G(t) = ||omega||_{theta,(t,inf)}^r`.
    TailRight,
    /// `G(t) = ||omega||_{theta,(0,t)}^(-r)`.
    HeadLeftInverse,
}

/// How [`stieltjes_integrate_with`] evaluates the integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StieltjesMethod {
    /// Density formula unless the weight is flagged non-smooth.
    #[default]
    Auto,
    /// One quadrature against the density of `-dG`.
    Density,
    /// Riemann-Stieltjes sums on refining logarithmic partitions.
    Sums,
}

/// The non-negative measure `mu = -dG` for a non-increasing `G` built from a
/// head or tail norm of a weight.
#[derive(Clone)]
pub struct TailMeasure {
    omega: DynFn,
    theta: f64,
    power: f64,
    orientation: Orientation,
    profile: Arc<Cumulative>,
    nonsmooth: bool,
}

impl fmt::Debug for TailMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TailMeasure")
            .field("theta", &self.theta)
            .field("power", &self.power)
            .field("orientation", &self.orientation)
            .field("nonsmooth", &self.nonsmooth)
            .finish()
    }
}

impl TailMeasure {
    /// Builds the measure for `omega`, tabulating `omega^theta` internally.
    pub fn new(
        omega: DynFn,
        theta: f64,
        power: f64,
        orientation: Orientation,
        breaks: &[f64],
        nonsmooth: bool,
        cfg: &QuadratureConfig,
    ) -> Result<Self, NumericsError> {
        check_exponent(theta)?;
        let w = omega.clone();
        let density: DynFn = Arc::new(move |t| Ok(powe(w(t)?, theta)));
        let profile = Arc::new(Cumulative::new(density, breaks, cfg)?);
        Self::from_profile(omega, theta, power, orientation, profile, nonsmooth)
    }

    /// Reuses an existing tabulation of `omega^theta`.
    pub fn from_profile(
        omega: DynFn,
        theta: f64,
        power: f64,
        orientation: Orientation,
        profile: Arc<Cumulative>,
        nonsmooth: bool,
    ) -> Result<Self, NumericsError> {
        check_exponent(theta)?;
        if !(power > 0.0 && power.is_finite()) {
            return Err(NumericsError::Domain {
                t: f64::NAN,
                value: power,
            });
        }
        Ok(Self {
            omega,
            theta,
            power,
            orientation,
            profile,
            nonsmooth,
        })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn power(&self) -> f64 {
        self.power
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn is_nonsmooth(&self) -> bool {
        self.nonsmooth
    }

    pub fn breaks(&self) -> &[f64] {
        self.profile.breaks()
    }

    /// `r / theta`, the power applied to the tabulated mass.
    fn rho(&self) -> f64 {
        self.power / self.theta
    }

    /// Tabulated mass behind `G` at `t`: the tail or head mass of `omega^theta`.
    fn base_mass(&self, t: f64) -> Fallible {
        match self.orientation {
            Orientation::TailRight => self.profile.tail(t),
            Orientation::HeadLeftInverse => self.profile.head(t),
        }
    }

    /// `G(t)`.
    pub fn g(&self, t: f64) -> Fallible {
        let m = self.base_mass(t)?;
        Ok(match self.orientation {
            Orientation::TailRight => powe(m, self.rho()),
            Orientation::HeadLeftInverse => powe(m, -self.rho()),
        })
    }

    /// `G(inf)`, the limit at infinity.
    pub fn g_at_infinity(&self) -> f64 {
        match self.orientation {
            Orientation::TailRight => 0.0,
            Orientation::HeadLeftInverse => powe(self.profile.total(), -self.rho()),
        }
    }

    /// Density of `mu` with respect to `dt`.
    pub fn density(&self, t: f64) -> Fallible {
        let w = (self.omega)(t)?;
        if w == 0.0 {
            return Ok(0.0);
        }
        let m = self.base_mass(t)?;
        let e = match self.orientation {
            Orientation::TailRight => self.rho() - 1.0,
            Orientation::HeadLeftInverse => -self.rho() - 1.0,
        };
        Ok(mul0(self.rho() * powe(m, e), powe(w, self.theta)))
    }

    /// `mu([x, inf)) = G(x) - G(inf)`.
    pub fn mass_above(&self, x: f64, cfg: &QuadratureConfig) -> Fallible {
        let gx = self.g(x)?;
        let ginf = self.g_at_infinity();
        if ginf == 0.0 || gx.is_infinite() {
            return Ok(gx);
        }
        let diff = gx - ginf;
        if diff > 1e-3 * gx {
            return Ok(diff.max(0.0));
        }
        // Close to the limit the difference cancels; integrate the density.
        integrate_fallible(|t| self.density(t), Interval::tail(x)?, self.breaks(), cfg)
    }

    /// `mu((0, x)) = G(0+) - G(x)`.
    pub fn mass_below(&self, x: f64, cfg: &QuadratureConfig) -> Fallible {
        integrate_fallible(|t| self.density(t), Interval::head(x)?, self.breaks(), cfg)
    }

    /// `G(a) - G(b)` for `a < b`, computed from the tabulated masses without
    /// cancellation.
    fn increment(&self, mass_ab: f64, inner: f64) -> f64 {
        let rho = self.rho();
        match self.orientation {
            // G(a) - G(b) = (T_b + m)^rho - T_b^rho
            Orientation::TailRight => {
                if inner == 0.0 {
                    powe(mass_ab, rho)
                } else {
                    powe(inner, rho) * (rho * (mass_ab / inner).ln_1p()).exp_m1()
                }
            }
            // G(a) - G(b) = H_a^-rho - (H_a + m)^-rho
            Orientation::HeadLeftInverse => {
                if inner == 0.0 {
                    f64::INFINITY
                } else {
                    -powe(inner, -rho) * (-rho * (mass_ab / inner).ln_1p()).exp_m1()
                }
            }
        }
    }

    /// Checks `0 < G < inf` on a decade grid. A mass that only vanishes
    /// through underflow (super-exponential decay) is not a violation.
    fn check_class(&self) -> Result<(), NumericsError> {
        let grid: Vec<f64> = (-8..=8).map(|k| 10f64.powi(k)).collect();
        let masses = grid
            .iter()
            .map(|&t| self.base_mass(t))
            .collect::<Result<Vec<_>, _>>()?;
        for (i, (&t, &m)) in grid.iter().zip(&masses).enumerate() {
            if m.is_infinite() || m.is_nan() {
                return Err(NumericsError::ClassViolation {
                    t,
                    value: self.g(t)?,
                });
            }
            if m > 0.0 {
                continue;
            }
            // Nearest point on the side where the mass should be positive.
            let good = match self.orientation {
                Orientation::TailRight => (0..i).rev().find(|&j| masses[j] > 0.0),
                Orientation::HeadLeftInverse => (i + 1..grid.len()).find(|&j| masses[j] > 0.0),
            };
            let benign = match good {
                Some(j) => vanishes_by_underflow(|s| self.base_mass(s), self.theta, grid[j], t)?,
                None => false,
            };
            if !benign {
                return Err(NumericsError::ClassViolation {
                    t,
                    value: self.g(t)?,
                });
            }
        }
        Ok(())
    }
}

fn check_exponent(theta: f64) -> Result<(), NumericsError> {
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(NumericsError::Domain {
            t: f64::NAN,
            value: theta,
        });
    }
    Ok(())
}

/// `int_0^inf F d(-G)` with the method chosen by the smoothness flag.
pub fn stieltjes_integrate<F>(f: F, m: &TailMeasure, cfg: &QuadratureConfig) -> Fallible
where
    F: Fn(f64) -> Fallible,
{
    stieltjes_integrate_with(f, m, &[], StieltjesMethod::Auto, cfg)
}

/// `int_0^inf F d(-G)`; `breaks` lists discontinuities of `F`.
pub fn stieltjes_integrate_with<F>(
    f: F,
    m: &TailMeasure,
    breaks: &[f64],
    method: StieltjesMethod,
    cfg: &QuadratureConfig,
) -> Fallible
where
    F: Fn(f64) -> Fallible,
{
    m.check_class()?;
    let mut all: Vec<f64> = breaks
        .iter()
        .chain(m.breaks())
        .copied()
        .filter(|b| b.is_finite() && *b > 0.0)
        .collect();
    all.sort_by(f64::total_cmp);
    all.dedup();
    let use_sums = match method {
        StieltjesMethod::Auto => m.is_nonsmooth(),
        StieltjesMethod::Density => false,
        StieltjesMethod::Sums => true,
    };
    if use_sums {
        stieltjes_sums(&f, m, &all, cfg)
    } else {
        integrate_fallible(
            |t| Ok(mul0(f(t)?, m.density(t)?)),
            Interval::half_line(),
            &all,
            cfg,
        )
    }
}

const SUM_START: usize = 32;
const SUM_MAX: usize = 1 << 14;
/// A block whose Richardson differences stall below `STALL_FACTOR * rel_tol`
/// from `STALL_MIN` subintervals on is accepted.
const STALL_MIN: usize = 1 << 10;
const STALL_FACTOR: f64 = 10.0;

/// Riemann-Stieltjes sum over the decade `[10^k, 10^(k+1)]` with `n`
/// logarithmic cells, tagged at geometric midpoints.
fn block_sum<F>(f: &F, m: &TailMeasure, k: i64, n: usize, breaks: &[f64]) -> Fallible
where
    F: Fn(f64) -> Fallible,
{
    let (a, b) = (10f64.powi(k as i32), 10f64.powi(k as i32 + 1));
    let mut nodes: Vec<f64> = (0..=n)
        .map(|j| 10f64.powf(k as f64 + j as f64 / n as f64))
        .collect();
    nodes.extend(breaks.iter().copied().filter(|&x| x > a && x < b));
    nodes.sort_by(f64::total_cmp);
    nodes.dedup();
    let masses = nodes
        .windows(2)
        .map(|w| m.profile.mass(w[0], w[1]))
        .collect::<Result<Vec<_>, _>>()?;
    let mut sum = 0.0;
    match m.orientation {
        Orientation::TailRight => {
            let mut inner = m.profile.tail(*nodes.last().unwrap())?;
            for (i, w) in nodes.windows(2).enumerate().rev() {
                let dg = m.increment(masses[i], inner);
                sum += mul0(f((w[0] * w[1]).sqrt())?, dg);
                inner += masses[i];
            }
        }
        Orientation::HeadLeftInverse => {
            let mut inner = m.profile.head(nodes[0])?;
            for (i, w) in nodes.windows(2).enumerate() {
                let dg = m.increment(masses[i], inner);
                sum += mul0(f((w[0] * w[1]).sqrt())?, dg);
                inner += masses[i];
            }
        }
    }
    if sum.is_nan() {
        return Err(NumericsError::Domain { t: a, value: sum });
    }
    Ok(sum)
}

/// Refines one decade until successive Richardson values agree to
/// `rel_tol`, or to within `floor` for blocks negligible in the whole, or
/// stall just above `rel_tol`.
fn converged_block<F>(
    f: &F,
    m: &TailMeasure,
    k: i64,
    breaks: &[f64],
    floor: f64,
    cfg: &QuadratureConfig,
) -> Fallible
where
    F: Fn(f64) -> Fallible,
{
    let mut n = SUM_START;
    let mut coarse = block_sum(f, m, k, n, breaks)?;
    let mut prev_rich: Option<f64> = None;
    let mut prev_diff = f64::INFINITY;
    loop {
        n *= 2;
        let fine = block_sum(f, m, k, n, breaks)?;
        if fine.is_infinite() {
            return Ok(fine);
        }
        let rich = (4.0 * fine - coarse) / 3.0;
        if fine == 0.0 && coarse == 0.0 {
            return Ok(0.0);
        }
        if let Some(p) = prev_rich {
            let diff = (rich - p).abs();
            if diff <= (cfg.rel_tol * rich.abs()).max(floor).max(cfg.abs_tol) {
                return Ok(rich.max(0.0));
            }
            // The masses and the integrand come from quadratures of their
            // own; once refinement stops paying off, the differences are
            // their noise and not discretization error.
            if n >= STALL_MIN && diff >= 0.5 * prev_diff && diff <= STALL_FACTOR * cfg.rel_tol * rich.abs() {
                return Ok(rich.max(0.0));
            }
            prev_diff = diff;
        }
        if n >= SUM_MAX {
            return Err(NumericsError::NonConvergent {
                lo: 10f64.powi(k as i32),
                hi: 10f64.powi(k as i32 + 1),
                budget: SUM_MAX,
                estimate: rich,
                error: prev_rich.map_or(f64::INFINITY, |p| (rich - p).abs()),
            });
        }
        prev_rich = Some(rich);
        coarse = fine;
    }
}

fn stieltjes_sums<F>(f: &F, m: &TailMeasure, breaks: &[f64], cfg: &QuadratureConfig) -> Fallible
where
    F: Fn(f64) -> Fallible,
{
    let span = cfg.sup_span_decades as i64;
    let mut rough = 0.0;
    for k in -span..span {
        rough += block_sum(f, m, k, SUM_START, breaks)?;
    }
    let mut total = 0.0;
    for k in -span..span {
        total += converged_block(f, m, k, breaks, 0.1 * cfg.rel_tol * rough, cfg)?;
        if total.is_infinite() {
            return Ok(total);
        }
    }
    let mut extra = 0.0;
    for dir in [-1i64, 1] {
        let mut k = if dir < 0 { -span - 1 } else { span };
        let far_break = if dir < 0 {
            breaks
                .first()
                .map_or(i64::MAX, |b| b.log10().floor() as i64)
        } else {
            breaks.last().map_or(i64::MIN, |b| b.log10().floor() as i64)
        };
        let mut blocks: Vec<f64> = Vec::new();
        loop {
            let passed_breaks = if dir < 0 {
                k < far_break
            } else {
                k > far_break
            };
            let floor = 0.1 * cfg.rel_tol * (rough.max(total) + extra);
            let bk = converged_block(f, m, k, breaks, floor, cfg)?;
            if bk.is_infinite() {
                return Ok(bk);
            }
            extra += bk;
            blocks.push(bk);
            let whole = total + extra;
            if whole > 1e300 {
                return Ok(f64::INFINITY);
            }
            let floor = cfg.abs_tol.max(0.1 * cfg.rel_tol * whole);
            if passed_breaks && bk == 0.0 {
                break;
            }
            let nb = blocks.len();
            if passed_breaks && nb >= 3 {
                let q = div0(bk, blocks[nb - 2]);
                let q_prev = div0(blocks[nb - 2], blocks[nb - 3]);
                if q < 1.0 {
                    let tail = bk * q / (1.0 - q);
                    if tail <= floor {
                        if (q - q_prev).abs() < 0.05 {
                            extra += tail;
                        }
                        break;
                    }
                    if nb >= 5
                        && blocks[nb - 5..]
                            .windows(2)
                            .all(|w| (div0(w[1], w[0]) - q).abs() < 1e-9)
                    {
                        extra += tail;
                        break;
                    }
                }
                if nb >= 20
                    && blocks[nb - 4..]
                        .windows(2)
                        .all(|w| div0(w[1], w[0]) >= 1.0 - 1e-9)
                {
                    return Ok(f64::INFINITY);
                }
            }
            if nb as u32 >= cfg.max_extension_decades {
                let q = div0(bk, blocks[nb - 2]);
                if q >= 1.0 - 1e-6 {
                    return Ok(f64::INFINITY);
                }
                if q < 1.0 {
                    extra += bk * q / (1.0 - q);
                    break;
                }
                return Err(NumericsError::NonConvergent {
                    lo: 10f64.powi(k.min(0) as i32),
                    hi: 10f64.powi(k.max(0) as i32),
                    budget: cfg.max_extension_decades as usize,
                    estimate: total + extra,
                    error: bk,
                });
            }
            k += dir;
        }
    }
    Ok(total + extra)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn exp_measure(power: f64) -> TailMeasure {
        TailMeasure::new(
            Arc::new(|t: f64| Ok((-t).exp())),
            1.0,
            power,
            Orientation::TailRight,
            &[],
            false,
            &QuadratureConfig::default(),
        )
        .unwrap()
    }

    #[test]
    fn total_mass_telescopes() {
        let cfg = QuadratureConfig::default();
        for r in [1.0, 2.0] {
            let m = exp_measure(r);
            let v = stieltjes_integrate(|_| Ok(1.0), &m, &cfg).unwrap();
            assert_relative_eq!(v, 1.0, max_relative = 1e-8);
        }
    }

    #[test]
    fn first_moment() {
        let cfg = QuadratureConfig::default();
        let m = exp_measure(1.0);
        let d =
            stieltjes_integrate_with(|t| Ok(t), &m, &[], StieltjesMethod::Density, &cfg).unwrap();
        let s = stieltjes_integrate_with(|t| Ok(t), &m, &[], StieltjesMethod::Sums, &cfg).unwrap();
        assert_relative_eq!(d, 1.0, max_relative = 1e-8);
        assert_relative_eq!(s, 1.0, max_relative = 1e-6);
    }

    #[test]
    fn head_inverse_measure() {
        // omega = 1, theta = 1, r = 1: G = 1/t, mu = t^-2 dt; int min(t,1)^2 d mu = 1 + 1.
        let cfg = QuadratureConfig::default();
        let m = TailMeasure::new(
            Arc::new(|_| Ok(1.0)),
            1.0,
            1.0,
            Orientation::HeadLeftInverse,
            &[],
            false,
            &cfg,
        )
        .unwrap();
        let f = |t: f64| Ok(t.min(1.0).powi(2));
        let d = stieltjes_integrate_with(f, &m, &[1.0], StieltjesMethod::Density, &cfg).unwrap();
        let s = stieltjes_integrate_with(f, &m, &[1.0], StieltjesMethod::Sums, &cfg).unwrap();
        assert_relative_eq!(d, 2.0, max_relative = 1e-8);
        assert_relative_eq!(s, 2.0, max_relative = 1e-6);
        assert_relative_eq!(m.mass_above(4.0, &cfg).unwrap(), 0.25, max_relative = 1e-10);
    }

    #[test]
    fn class_violation_is_reported() {
        let cfg = QuadratureConfig::default();
        let m = TailMeasure::new(
            Arc::new(|t: f64| Ok(if t < 1.0 { 1.0 } else { 0.0 })),
            1.0,
            1.0,
            Orientation::TailRight,
            &[1.0],
            true,
            &cfg,
        )
        .unwrap();
        let r = stieltjes_integrate(|_| Ok(1.0), &m, &cfg);
        assert!(matches!(r, Err(NumericsError::ClassViolation { .. })));
    }
}
