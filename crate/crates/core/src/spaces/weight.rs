use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::numerics::{decade_point, mul0, DynFn};

/// A non-negative weight on `(0, inf)`: a parsed expression times a positive
/// scale factor.
///
/// The scale is kept apart from the expression so that `lambda * omega`
/// evaluates to exactly `lambda` times the original values.
#[derive(Debug, Clone, PartialEq)]
pub struct Weight1D {
    expr: Arc<Expr>,
    scale: f64,
}

/// Parses and validates a weight expression.
pub fn parse_weight(src: &str) -> Result<Weight1D> {
    Weight1D::parse(src)
}

impl Weight1D {
    pub fn parse(src: &str) -> Result<Self> {
        let w = Self::from_expr(Expr::parse(src)?);
        w.validate()?;
        Ok(w)
    }

    /// Wraps an expression without validating it.
    pub fn from_expr(expr: Expr) -> Self {
        Self {
            expr: Arc::new(expr),
            scale: 1.0,
        }
    }

    pub fn constant(c: f64) -> Self {
        Self::from_expr(Expr::Const(c))
    }

    pub fn one() -> Self {
        Self::constant(1.0)
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn eval(&self, t: f64) -> f64 {
        mul0(self.scale, self.expr.eval(t))
    }

    /// `lambda * self`.
    pub fn scaled(&self, lambda: f64) -> Self {
        Self {
            expr: self.expr.clone(),
            scale: self.scale * lambda,
        }
    }

    pub fn mul(&self, other: &Weight1D) -> Self {
        Self {
            expr: Arc::new(Expr::clone(&self.expr).mul(Expr::clone(&other.expr))),
            scale: self.scale * other.scale,
        }
    }

    pub fn div(&self, other: &Weight1D) -> Self {
        Self {
            expr: Arc::new(Expr::clone(&self.expr).div(Expr::clone(&other.expr))),
            scale: self.scale / other.scale,
        }
    }

    pub fn pow(&self, e: f64) -> Self {
        Self {
            expr: Arc::new(Expr::clone(&self.expr).pow(e)),
            scale: self.scale.powf(e),
        }
    }

    /// `t -> self(1/t)`.
    pub fn reciprocal_argument(&self) -> Self {
        Self {
            expr: Arc::new(self.expr.reciprocal_argument()),
            scale: self.scale,
        }
    }

    pub fn breaks(&self) -> Vec<f64> {
        self.expr.breaks()
    }

    pub fn is_nonsmooth(&self) -> bool {
        self.expr.is_nonsmooth()
    }

    pub fn has_jumps(&self) -> bool {
        self.expr.has_jumps()
    }

    pub fn singularities(&self) -> Vec<f64> {
        self.expr.singularities()
    }

    /// Shared closure view for the numerical routines.
    pub fn as_fn(&self) -> DynFn {
        let w = self.clone();
        Arc::new(move |t| Ok(w.eval(t)))
    }

    /// `t -> self(t)^e`, with `0^e = 0` for `e > 0`.
    pub fn pow_fn(&self, e: f64) -> DynFn {
        let w = self.clone();
        Arc::new(move |t| Ok(crate::numerics::powe(w.eval(t), e)))
    }

    /// Rejects weights that are negative or undefined somewhere on a dense
    /// logarithmic grid, reporting the first offending point.
    ///
    /// Zeros are accepted: cut-offs such as `chi(0, 1)` are legitimate
    /// weights, and class membership is checked separately.
    pub fn validate(&self) -> Result<()> {
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(Error::Validation {
                expr: self.to_string(),
                witness: f64::NAN,
                value: self.scale,
            });
        }
        let mut pts: Vec<f64> = (-8 * 16..=8 * 16).map(|k| decade_point(k, 16)).collect();
        for b in self.breaks() {
            pts.extend([b * (1.0 - 1e-9), b * (1.0 + 1e-9), b * 0.5, b * 2.0]);
        }
        pts.sort_by(f64::total_cmp);
        for t in pts {
            let v = self.eval(t);
            if v.is_nan() || v < 0.0 {
                return Err(Error::Validation {
                    expr: self.to_string(),
                    witness: t,
                    value: v,
                });
            }
        }
        Ok(())
    }
}

impl fmt::Display for Weight1D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.scale == 1.0 {
            write!(f, "{}", self.expr)
        } else {
            write!(f, "{:?} * ({})", self.scale, self.expr)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_validate() {
        let w = parse_weight("t^-0.25").unwrap();
        assert_eq!(w.singularities(), vec![0.0]);
        assert!(!w.is_nonsmooth());
        let w = parse_weight("exp(-t)").unwrap();
        assert!(w.singularities().is_empty());
        match parse_weight("chi(0,1) - 2") {
            Err(Error::Validation { witness, value, .. }) => {
                assert!(value < 0.0);
                assert!(witness > 0.0);
            }
            other => panic!("{other:?}"),
        }
        assert!(parse_weight("log(t)").is_err());
        assert!(parse_weight("chi(0, 1)").is_ok());
    }

    #[test]
    fn scaling_is_exact() {
        let w = parse_weight("t^-0.25 * exp(-t)").unwrap();
        let s = w.scaled(3.0);
        for t in [0.01, 1.0, 30.0] {
            assert_eq!(s.eval(t), 3.0 * w.eval(t));
        }
        let text = s.to_string();
        let back = parse_weight(&text).unwrap();
        for t in [0.01, 1.0, 30.0] {
            assert!((back.eval(t) - s.eval(t)).abs() <= 1e-15 * s.eval(t));
        }
    }

    #[test]
    fn algebra() {
        let a = parse_weight("t").unwrap();
        let b = parse_weight("exp(-t)").unwrap().scaled(2.0);
        assert_eq!(a.mul(&b).eval(1.0), 2.0 * (-1.0f64).exp());
        assert_eq!(a.div(&b).eval(1.0), 1.0 / (2.0 * (-1.0f64).exp()));
        assert_eq!(b.pow(2.0).eval(0.0), 4.0);
        assert_eq!(a.reciprocal_argument().eval(4.0), 0.25);
    }
}
