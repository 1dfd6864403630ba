//! Numerical substrate: improper quadrature on the half-line, weighted
//! Lebesgue norms, suprema over rays and Stieltjes integration against the
//! tail measures `d(-G^r)` that appear throughout the estimators.
//!
//! Everything here works in the logarithmic variable `u = ln t`, which turns
//! the power singularities at `0` and the power tails at `inf` into smooth
//! exponential behaviour that Gauss-Kronrod handles well.
//!
//! All stopping decisions are relative (the absolute tolerance is only a
//! floor), so multiplying an integrand by a positive constant multiplies the
//! result by that constant up to rounding. The estimators rely on this for
//! their homogeneity identities.

mod profile;
mod quadrature;
mod stieltjes;
mod sup;

pub use profile::{Cumulative, DynFn, RunningSup};
pub use quadrature::{integrate, integrate_fallible, integrate_with_breaks, weighted_lp_norm};
pub use stieltjes::{
    stieltjes_integrate, stieltjes_integrate_with, Orientation, StieltjesMethod, TailMeasure,
};
pub use sup::{sup_over_ray, sup_over_ray_fallible, SupResult};

use serde::{Deserialize, Serialize};

use crate::error::NumericsError;

/// A real function evaluated pointwise with error propagation.
pub type Fallible = std::result::Result<f64, NumericsError>;

/// An open interval `(lo, hi)` of the half-line, `hi` possibly infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self, NumericsError> {
        if !(lo >= 0.0) || !(hi > lo) || lo.is_infinite() {
            return Err(NumericsError::BadInterval { lo, hi });
        }
        Ok(Self { lo, hi })
    }

    /// `(0, inf)`.
    pub const fn half_line() -> Self {
        Self {
            lo: 0.0,
            hi: f64::INFINITY,
        }
    }

    /// `(0, t)`.
    pub fn head(t: f64) -> Result<Self, NumericsError> {
        Self::new(0.0, t)
    }

    /// `(t, inf)`.
    pub fn tail(t: f64) -> Result<Self, NumericsError> {
        Self::new(t, f64::INFINITY)
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn is_improper(&self) -> bool {
        self.lo == 0.0 || self.hi.is_infinite()
    }

    pub fn contains(&self, t: f64) -> bool {
        t > self.lo && t < self.hi
    }
}

/// Tolerances and budgets shared by every numerical routine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureConfig {
    /// Relative tolerance for integrals.
    pub rel_tol: f64,
    /// Absolute floor for integral error; only matters for integrals that
    /// are themselves tiny.
    pub abs_tol: f64,
    /// Subinterval budget of one adaptive run.
    pub max_subdivisions: usize,
    /// Initial density of logarithmic grids.
    pub grid_points_per_decade: usize,
    /// Relative stopping tolerance for supremum refinement.
    pub sup_rel_tol: f64,
    /// Half-width, in decades around `t = 1`, of the initial supremum grid.
    pub sup_span_decades: u32,
    /// How far (in decades) improper integrals and suprema may be extended
    /// before a decision is forced.
    pub max_extension_decades: u32,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol: 1e-300,
            max_subdivisions: 4000,
            grid_points_per_decade: 16,
            sup_rel_tol: 1e-6,
            sup_span_decades: 8,
            max_extension_decades: 60,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(format!("rel_tol must lie in (0, 1), got {}", self.rel_tol));
        }
        if !(self.abs_tol > 0.0) {
            return Err(format!("abs_tol must be positive, got {}", self.abs_tol));
        }
        if self.max_subdivisions == 0 {
            return Err("max_subdivisions must be positive".into());
        }
        if self.grid_points_per_decade < 4 {
            return Err(format!(
                "grid_points_per_decade must be at least 4, got {}",
                self.grid_points_per_decade
            ));
        }
        if !(self.sup_rel_tol > 0.0 && self.sup_rel_tol < 1.0) {
            return Err(format!(
                "sup_rel_tol must lie in (0, 1), got {}",
                self.sup_rel_tol
            ));
        }
        Ok(())
    }

    /// Same budgets with a tighter relative tolerance, for integrals that
    /// feed another adaptive routine.
    pub fn tightened(&self, factor: f64) -> Self {
        Self {
            rel_tol: (self.rel_tol * factor).max(1e-13),
            ..*self
        }
    }

    /// Same budgets with the relative tolerance loosened to at least `tol`.
    pub fn loosened_to(&self, tol: f64) -> Self {
        Self {
            rel_tol: self.rel_tol.max(tol),
            ..*self
        }
    }
}

/// `a * b` with `0 * inf = 0`.
pub fn mul0(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        0.0
    } else {
        a * b
    }
}

/// `a / b` with `0/0 = 0`, `a/inf = 0` and `a/0 = inf` for `a > 0`.
pub fn div0(a: f64, b: f64) -> f64 {
    if a == 0.0 {
        0.0
    } else if b.is_infinite() {
        if a.is_infinite() {
            // inf/inf has no convention; the callers never produce it from
            // finite data, so treat it as unbounded.
            f64::INFINITY
        } else {
            0.0
        }
    } else if b == 0.0 {
        f64::INFINITY
    } else {
        a / b
    }
}

/// `x^e` for `x >= 0` on the extended half-line, with `0^0 = 1`,
/// `0^(-e) = inf` and `inf^(-e) = 0`. Subnormal `x` counts as `0`: its few
/// significant bits would turn into noise under a fractional power.
pub fn powe(x: f64, e: f64) -> f64 {
    let x = if x.is_subnormal() { 0.0 } else { x };
    if e == 0.0 {
        1.0
    } else if x == 0.0 {
        if e > 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else if x.is_infinite() {
        if e > 0.0 {
            f64::INFINITY
        } else {
            0.0
        }
    } else {
        x.powf(e)
    }
}

/// Distinguishes a mass that reaches zero through floating-point underflow
/// from one that vanishes because the weight is identically zero.
///
/// `good` is a point where `mass` is positive and `bad` one where it is
/// zero, and `mass` integrates `omega^theta`. The transition between them is
/// located by bisection in `ln t`; the vanishing is an underflow when, just
/// before the transition, the mass or its `theta`-th root (the scale of
/// `omega` itself) is already below `1e-200`.
pub fn vanishes_by_underflow<F>(mass: F, theta: f64, good: f64, bad: f64) -> Result<bool, NumericsError>
where
    F: Fn(f64) -> Fallible,
{
    let (mut g, mut b) = (good.ln(), bad.ln());
    for _ in 0..200 {
        if (g - b).abs() < 1e-12 * (1.0 + g.abs()) {
            break;
        }
        let mid = 0.5 * (g + b);
        if mass(mid.exp())? > 0.0 {
            g = mid;
        } else {
            b = mid;
        }
    }
    let m = mass(g.exp())?;
    Ok(m < 1e-200 || powe(m, 1.0 / theta) < 1e-200)
}

pub(crate) fn decade_point(k: i64, per_decade: usize) -> f64 {
    10f64.powf(k as f64 / per_decade as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conventions() {
        assert_eq!(mul0(0.0, f64::INFINITY), 0.0);
        assert_eq!(div0(0.0, 0.0), 0.0);
        assert_eq!(div0(1.0, f64::INFINITY), 0.0);
        assert_eq!(div0(2.0, 0.0), f64::INFINITY);
        assert_eq!(powe(0.0, -1.0), f64::INFINITY);
        assert_eq!(powe(f64::INFINITY, -0.5), 0.0);
        assert_eq!(powe(4.0, 0.5), 2.0);
    }

    #[test]
    fn interval_rules() {
        assert!(Interval::new(1.0, 1.0).is_err());
        assert!(Interval::new(-1.0, 1.0).is_err());
        assert!(Interval::new(f64::NAN, 1.0).is_err());
        let iv = Interval::tail(2.0).unwrap();
        assert!(iv.is_improper());
        assert!(iv.contains(3.0) && !iv.contains(2.0));
        assert!(!Interval::new(1.0, 2.0).unwrap().is_improper());
    }

    #[test]
    fn config_validation() {
        assert!(QuadratureConfig::default().validate().is_ok());
        let bad = QuadratureConfig {
            grid_points_per_decade: 3,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = QuadratureConfig {
            rel_tol: 1.5,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
