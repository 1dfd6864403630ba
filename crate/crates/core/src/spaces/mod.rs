//! Exponents, weights, radial problems and the two Morrey-type norms.

mod kernels;
mod norms;
mod problem;
mod weight;

pub(crate) use kernels::script;
pub use kernels::{v_script, v_tilde, BallNorm, Kernels};
pub use norms::{
    clm_norm, lm_norm, lmpp_weight, radial_lp_norm, MorreyKind, RadialProfile, RadialTestFunction,
};
pub use problem::RadialProblem;
pub use weight::{parse_weight, Weight1D};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A Lebesgue exponent in `(0, inf]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Exponent(f64);

impl Exponent {
    pub const INFINITY: Exponent = Exponent(f64::INFINITY);

    pub fn new(value: f64) -> Result<Self> {
        if value > 0.0 {
            Ok(Self(value))
        } else {
            Err(Error::Exponent(value))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }

    /// Hölder conjugate, extended to `p < 1` by `p / (1 - p)`.
    pub fn conjugate(self) -> Exponent {
        let p = self.0;
        Exponent(if p < 1.0 {
            p / (1.0 - p)
        } else if p == 1.0 {
            f64::INFINITY
        } else if p.is_finite() {
            p / (p - 1.0)
        } else {
            1.0
        })
    }

    /// `self -> q`, see [`arrow`].
    pub fn arrow(self, q: Exponent) -> Exponent {
        Exponent(arrow(self.0, q.0))
    }
}

/// `(1/q - 1/p)^(-1)` when `q < p`, otherwise `inf`.
pub fn arrow(p: f64, q: f64) -> f64 {
    if q < p {
        1.0 / (1.0 / q - 1.0 / p)
    } else {
        f64::INFINITY
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_infinite() {
            write!(f, "inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let v = match s {
            "inf" | "infinity" | "Inf" => f64::INFINITY,
            _ => {
                if let Some((a, b)) = s.split_once('/') {
                    let a: f64 = a
                        .trim()
                        .parse()
                        .map_err(|_| Error::Config(format!("bad exponent `{s}`")))?;
                    let b: f64 = b
                        .trim()
                        .parse()
                        .map_err(|_| Error::Config(format!("bad exponent `{s}`")))?;
                    a / b
                } else {
                    s.parse()
                        .map_err(|_| Error::Config(format!("bad exponent `{s}`")))?
                }
            }
        };
        Exponent::new(v)
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            s.serialize_f64(self.0)
        } else {
            s.serialize_str("inf")
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Exponent::new(v).map_err(serde::de::Error::custom),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// The four exponents and the dimension of an embedding problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamQuadruple {
    pub p1: Exponent,
    pub p2: Exponent,
    pub th1: Exponent,
    pub th2: Exponent,
    pub n: u32,
}

impl ParamQuadruple {
    pub fn new(p1: f64, p2: f64, th1: f64, th2: f64, n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::Config("dimension n must be at least 1".into()));
        }
        Ok(Self {
            p1: Exponent::new(p1)?,
            p2: Exponent::new(p2)?,
            th1: Exponent::new(th1)?,
            th2: Exponent::new(th2)?,
            n,
        })
    }

    /// `(p1, p2, th1, th2)` as plain numbers.
    pub fn values(&self) -> (f64, f64, f64, f64) {
        (self.p1.0, self.p2.0, self.th1.0, self.th2.0)
    }

    pub fn all_finite(&self) -> bool {
        self.p1.is_finite() && self.p2.is_finite() && self.th1.is_finite() && self.th2.is_finite()
    }

    /// `p1 -> p2`, the exponent of the inner ball norms.
    pub fn r12(&self) -> f64 {
        arrow(self.p1.0, self.p2.0)
    }
}

/// Surface area `2 pi^(n/2) / Gamma(n/2)` of the unit sphere in `R^n`.
pub fn sphere_area(n: u32) -> f64 {
    // Gamma(n/2) by the recursion Gamma(x + 1) = x Gamma(x) from Gamma(1) = 1
    // or Gamma(1/2) = sqrt(pi), accumulated in logs so large n stays finite.
    use std::f64::consts::PI;
    let half_n = n as f64 / 2.0;
    let mut x = if n % 2 == 0 { 1.0 } else { 0.5 };
    let mut gamma = if n % 2 == 0 { 1.0 } else { PI.sqrt() };
    let mut log_gamma = gamma.ln();
    while x < half_n {
        gamma *= x;
        log_gamma += x.ln();
        x += 1.0;
    }
    if n <= 100 {
        2.0 * PI.powf(half_n) / gamma
    } else {
        (std::f64::consts::LN_2 + half_n * PI.ln() - log_gamma).exp()
    }
}
