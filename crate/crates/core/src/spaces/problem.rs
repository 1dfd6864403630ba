use super::{sphere_area, ParamQuadruple, Weight1D};
use crate::error::{Error, Result};
use crate::expr::Expr;

/// An embedding problem with radial weights `v1`, `v2` on `R^n`.
///
/// The estimators consume `v1`, `v2` only through two one-dimensional
/// reductions of the ratio `v2 / v1`: its angular integral (with the polar
/// Jacobian, raised to `p1 -> p2`) and its angular supremum. For radial
/// weights both are computed from the profiles; non-radial weights can be
/// described by supplying the reductions directly.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProblem {
    pub params: ParamQuadruple,
    pub omega1: Weight1D,
    pub omega2: Weight1D,
    pub v1: Weight1D,
    pub v2: Weight1D,
    /// Override for `r -> int_{S^(n-1)} (v2/v1)(r x')^(p1->p2) r^(n-1) dx'`.
    pub v_angular_integral: Option<Weight1D>,
    /// Override for `r -> sup_{|x| = r} (v2/v1)(x)`.
    pub v_angular_sup: Option<Weight1D>,
}

impl RadialProblem {
    pub fn new(
        params: ParamQuadruple,
        omega1: Weight1D,
        omega2: Weight1D,
        v1: Weight1D,
        v2: Weight1D,
    ) -> Self {
        Self {
            params,
            omega1,
            omega2,
            v1,
            v2,
            v_angular_integral: None,
            v_angular_sup: None,
        }
    }

    /// Unit `v1`, `v2`.
    pub fn unweighted(params: ParamQuadruple, omega1: Weight1D, omega2: Weight1D) -> Self {
        Self::new(params, omega1, omega2, Weight1D::one(), Weight1D::one())
    }

    pub fn with_reductions(mut self, integral: Option<Weight1D>, sup: Option<Weight1D>) -> Self {
        self.v_angular_integral = integral;
        self.v_angular_sup = sup;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for w in [&self.omega1, &self.omega2, &self.v1, &self.v2] {
            w.validate()?;
        }
        for w in [&self.v_angular_integral, &self.v_angular_sup]
            .into_iter()
            .flatten()
        {
            w.validate()?;
        }
        if !self.params.all_finite() {
            return Err(Error::Config("all four exponents must be finite".into()));
        }
        Ok(())
    }

    /// `v2 / v1` as a radial profile.
    pub fn v_ratio(&self) -> Weight1D {
        self.v2.div(&self.v1)
    }

    /// Density `r -> sigma_(n-1) r^(n-1) (v2/v1)(r)^(p1->p2)` whose head
    /// integral is `V~^(p1->p2)`; `None` when `p1 <= p2`.
    pub fn v_integral_density(&self) -> Option<Weight1D> {
        let r12 = self.params.r12();
        if !r12.is_finite() {
            return None;
        }
        if let Some(w) = &self.v_angular_integral {
            return Some(w.clone());
        }
        let n = self.params.n;
        let ratio = self.v_ratio().pow(r12);
        let jac = if n == 1 {
            Weight1D::constant(sphere_area(1))
        } else {
            Weight1D::from_expr(Expr::Const(sphere_area(n)).mul(Expr::Var.pow((n - 1) as f64)))
        };
        Some(jac.mul(&ratio))
    }

    /// `r -> sup_{|x| = r} (v2/v1)(x)`.
    pub fn v_sup_profile(&self) -> Weight1D {
        self.v_angular_sup.clone().unwrap_or_else(|| self.v_ratio())
    }

    pub fn with_omega1_scaled(&self, lambda: f64) -> Self {
        Self {
            omega1: self.omega1.scaled(lambda),
            ..self.clone()
        }
    }

    pub fn with_omega2_scaled(&self, lambda: f64) -> Self {
        Self {
            omega2: self.omega2.scaled(lambda),
            ..self.clone()
        }
    }

    /// `v2 -> lambda v2`, rescaling any supplied reductions to match.
    pub fn with_v2_scaled(&self, lambda: f64) -> Self {
        let r12 = self.params.r12();
        Self {
            v2: self.v2.scaled(lambda),
            v_angular_integral: self.v_angular_integral.as_ref().map(|w| {
                w.scaled(if r12.is_finite() {
                    lambda.powf(r12)
                } else {
                    1.0
                })
            }),
            v_angular_sup: self.v_angular_sup.as_ref().map(|w| w.scaled(lambda)),
            ..self.clone()
        }
    }

    pub fn with_params(&self, params: ParamQuadruple) -> Self {
        Self {
            params,
            ..self.clone()
        }
    }

    /// Breakpoints of the `v1`, `v2` profiles and of any reductions.
    pub fn v_breaks(&self) -> Vec<f64> {
        let mut b: Vec<f64> = [&self.v1, &self.v2]
            .into_iter()
            .chain(self.v_angular_integral.iter())
            .chain(self.v_angular_sup.iter())
            .flat_map(|w| w.breaks())
            .collect();
        b.sort_by(f64::total_cmp);
        b.dedup();
        b
    }

    /// True when `v2 / v1` (or a supplied reduction) may jump.
    pub fn v_has_jumps(&self) -> bool {
        [&self.v1, &self.v2]
            .into_iter()
            .chain(self.v_angular_integral.iter())
            .chain(self.v_angular_sup.iter())
            .any(|w| w.has_jumps())
    }

    pub fn v_nonsmooth(&self) -> bool {
        [&self.v1, &self.v2]
            .into_iter()
            .chain(self.v_angular_integral.iter())
            .chain(self.v_angular_sup.iter())
            .any(|w| w.is_nonsmooth())
    }
}
