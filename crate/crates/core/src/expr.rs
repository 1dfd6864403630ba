//! Weight expressions in one variable `t`.
//!
//! Grammar, with the usual precedence and left associativity:
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := '-' factor | atom ('^' signed-number)?
//! atom   := 't' | number | 'exp' '(' expr ')' | 'log' '(' expr ')'
//!         | ('min' | 'max') '(' expr ',' expr ')'
//!         | 'chi' '(' bound ',' bound ')' | '(' expr ')'
//! bound  := number | 'inf'
//! ```
//!
//! `chi(a, b)` is the indicator of the open interval `(a, b)`.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Var,
    Const(f64),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, f64),
    Exp(Box<Expr>),
    Log(Box<Expr>),
    Min(Box<Expr>, Box<Expr>),
    Max(Box<Expr>, Box<Expr>),
    Chi(f64, f64),
}

impl Expr {
    pub fn parse(src: &str) -> Result<Self> {
        let mut p = Parser {
            src: src.as_bytes(),
            pos: 0,
        };
        p.skip_ws();
        if p.at_end() {
            return Err(p.error("empty expression"));
        }
        let e = p.expr()?;
        p.skip_ws();
        if !p.at_end() {
            return Err(p.error("unexpected trailing input"));
        }
        Ok(e)
    }

    /// Value at `t`. Underflowing nodes flush to `0` rather than carry
    /// subnormal values.
    pub fn eval(&self, t: f64) -> f64 {
        let v = self.eval_raw(t);
        if v.is_subnormal() {
            0.0
        } else {
            v
        }
    }

    fn eval_raw(&self, t: f64) -> f64 {
        match self {
            Expr::Var => t,
            Expr::Const(c) => *c,
            Expr::Neg(a) => -a.eval(t),
            Expr::Add(a, b) => a.eval(t) + b.eval(t),
            Expr::Sub(a, b) => a.eval(t) - b.eval(t),
            Expr::Mul(a, b) => {
                let (x, y) = (a.eval(t), b.eval(t));
                // 0 * inf = 0, so cut-offs kill singular factors.
                if x == 0.0 || y == 0.0 {
                    0.0
                } else {
                    x * y
                }
            }
            Expr::Div(a, b) => {
                let x = a.eval(t);
                if x == 0.0 {
                    0.0
                } else {
                    x / b.eval(t)
                }
            }
            Expr::Pow(a, e) => {
                let x = a.eval(t);
                if x == 0.0 && *e < 0.0 {
                    f64::INFINITY
                } else {
                    x.powf(*e)
                }
            }
            Expr::Exp(a) => a.eval(t).exp(),
            Expr::Log(a) => a.eval(t).ln(),
            Expr::Min(a, b) => a.eval(t).min(b.eval(t)),
            Expr::Max(a, b) => a.eval(t).max(b.eval(t)),
            Expr::Chi(lo, hi) => {
                if t > *lo && t < *hi {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    fn walk(&self, visit: &mut impl FnMut(&Expr)) {
        visit(self);
        match self {
            Expr::Var | Expr::Const(_) | Expr::Chi(..) => {}
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Exp(a) | Expr::Log(a) => a.walk(visit),
            Expr::Add(a, b)
            | Expr::Sub(a, b)
            | Expr::Mul(a, b)
            | Expr::Div(a, b)
            | Expr::Min(a, b)
            | Expr::Max(a, b) => {
                a.walk(visit);
                b.walk(visit);
            }
        }
    }

    /// Finite positive endpoints of every `chi`.
    pub fn breaks(&self) -> Vec<f64> {
        let mut out = Vec::new();
        self.walk(&mut |e| {
            if let Expr::Chi(a, b) = e {
                for x in [*a, *b] {
                    if x > 0.0 && x.is_finite() {
                        out.push(x);
                    }
                }
            }
        });
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    /// True when the expression contains `chi`, `min` or `max`.
    pub fn is_nonsmooth(&self) -> bool {
        let mut flag = false;
        self.walk(&mut |e| {
            if matches!(e, Expr::Chi(..) | Expr::Min(..) | Expr::Max(..)) {
                flag = true;
            }
        });
        flag
    }

    /// True when the expression contains `chi`, the only primitive with jumps.
    pub fn has_jumps(&self) -> bool {
        let mut flag = false;
        self.walk(&mut |e| {
            if matches!(e, Expr::Chi(..)) {
                flag = true;
            }
        });
        flag
    }

    /// Points where the expression may be singular: `0` when a negative
    /// power, a division or a logarithm occurs, plus the `chi` endpoints.
    pub fn singularities(&self) -> Vec<f64> {
        let mut at_zero = false;
        self.walk(&mut |e| match e {
            Expr::Pow(_, p) if *p < 0.0 => at_zero = true,
            Expr::Div(..) | Expr::Log(_) => at_zero = true,
            _ => {}
        });
        let mut out = if at_zero { vec![0.0] } else { Vec::new() };
        out.extend(self.breaks());
        out
    }

    /// The expression with `t` replaced by `1/t`.
    pub fn reciprocal_argument(&self) -> Expr {
        let inv = |x: f64| {
            if x == 0.0 {
                f64::INFINITY
            } else if x.is_infinite() {
                0.0
            } else {
                1.0 / x
            }
        };
        let r = |a: &Expr| Box::new(a.reciprocal_argument());
        match self {
            Expr::Var => Expr::Pow(Box::new(Expr::Var), -1.0),
            Expr::Const(c) => Expr::Const(*c),
            Expr::Neg(a) => Expr::Neg(r(a)),
            Expr::Add(a, b) => Expr::Add(r(a), r(b)),
            Expr::Sub(a, b) => Expr::Sub(r(a), r(b)),
            Expr::Mul(a, b) => Expr::Mul(r(a), r(b)),
            Expr::Div(a, b) => Expr::Div(r(a), r(b)),
            Expr::Pow(a, e) => Expr::Pow(r(a), *e),
            Expr::Exp(a) => Expr::Exp(r(a)),
            Expr::Log(a) => Expr::Log(r(a)),
            Expr::Min(a, b) => Expr::Min(r(a), r(b)),
            Expr::Max(a, b) => Expr::Max(r(a), r(b)),
            Expr::Chi(lo, hi) => Expr::Chi(inv(*hi), inv(*lo)),
        }
    }

    pub fn mul(self, other: Expr) -> Expr {
        Expr::Mul(Box::new(self), Box::new(other))
    }

    pub fn div(self, other: Expr) -> Expr {
        Expr::Div(Box::new(self), Box::new(other))
    }

    pub fn pow(self, e: f64) -> Expr {
        Expr::Pow(Box::new(self), e)
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(_) => 3,
            Expr::Pow(..) => 4,
            Expr::Const(c) if *c < 0.0 => 3,
            _ => 5,
        }
    }
}

fn fmt_number(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        // Shortest representation that reads back to the same f64.
        format!("{x:?}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let wrap = |e: &Expr, min: u8| {
            if e.precedence() < min {
                format!("({e})")
            } else {
                e.to_string()
            }
        };
        match self {
            Expr::Var => write!(f, "t"),
            Expr::Const(c) if *c < 0.0 => write!(f, "-{}", fmt_number(-c)),
            Expr::Const(c) => write!(f, "{}", fmt_number(*c)),
            Expr::Neg(a) => write!(f, "-{}", wrap(a, 4)),
            Expr::Add(a, b) => write!(f, "{} + {}", wrap(a, 1), wrap(b, 2)),
            Expr::Sub(a, b) => write!(f, "{} - {}", wrap(a, 1), wrap(b, 2)),
            Expr::Mul(a, b) => write!(f, "{} * {}", wrap(a, 2), wrap(b, 3)),
            Expr::Div(a, b) => write!(f, "{} / {}", wrap(a, 2), wrap(b, 3)),
            Expr::Pow(a, e) => write!(f, "{}^{}", wrap(a, 5), fmt_number(*e)),
            Expr::Exp(a) => write!(f, "exp({a})"),
            Expr::Log(a) => write!(f, "log({a})"),
            Expr::Min(a, b) => write!(f, "min({a}, {b})"),
            Expr::Max(a, b) => write!(f, "max({a}, {b})"),
            Expr::Chi(a, b) => write!(f, "chi({}, {})", fmt_number(*a), fmt_number(*b)),
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, message: &str) -> Error {
        Error::Parse {
            position: self.pos,
            message: message.to_string(),
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.src.len()
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(|c| c.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn eat(&mut self, c: u8) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(&format!("expected '{}'", c as char)))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(b'+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat(b'-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        loop {
            if self.eat(b'*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
            } else if self.eat(b'/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.factor()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn factor(&mut self) -> Result<Expr> {
        // Unary minus binds looser than '^', so -t^2 = -(t^2).
        if self.eat(b'-') {
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        let base = self.atom()?;
        if self.eat(b'^') {
            self.skip_ws();
            let neg = if self.peek() == Some(b'-') {
                self.pos += 1;
                true
            } else {
                self.peek() == Some(b'+') && {
                    self.pos += 1;
                    false
                }
            };
            let e = if self.eat(b'(') {
                let inner_neg = self.eat(b'-');
                let v = self.number()?;
                self.expect(b')')?;
                if inner_neg {
                    -v
                } else {
                    v
                }
            } else {
                self.number()?
            };
            if !e.is_finite() {
                return Err(self.error("exponent must be finite"));
            }
            return Ok(Expr::Pow(Box::new(base), if neg { -e } else { e }));
        }
        Ok(base)
    }

    fn ident(&mut self) -> &str {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_alphabetic()) {
            self.pos += 1;
        }
        std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("")
    }

    fn number(&mut self) -> Result<f64> {
        self.skip_ws();
        let start = self.pos;
        if self.src[self.pos..].starts_with(b"inf") {
            self.pos += 3;
            return Ok(f64::INFINITY);
        }
        while self.peek().is_some_and(|c| c.is_ascii_digit() || c == b'.') {
            self.pos += 1;
        }
        if self.pos > start && matches!(self.peek(), Some(b'e' | b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.peek(), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if self.peek().is_some_and(|c| c.is_ascii_digit()) {
                while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                    self.pos += 1;
                }
            } else {
                // `2exp(t)` style input: not an exponent marker.
                self.pos = save;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
        text.parse::<f64>().map_err(|_| {
            self.pos = start;
            self.error("expected a number")
        })
    }

    fn bound(&mut self) -> Result<f64> {
        let neg = self.eat(b'-');
        let v = self.number()?;
        Ok(if neg { -v } else { v })
    }

    fn atom(&mut self) -> Result<Expr> {
        self.skip_ws();
        match self.peek() {
            None => Err(self.error("unexpected end of input")),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => Ok(Expr::Const(self.number()?)),
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                let name = self.ident().to_string();
                match name.as_str() {
                    "t" => Ok(Expr::Var),
                    "inf" => Ok(Expr::Const(f64::INFINITY)),
                    "exp" | "log" => {
                        self.expect(b'(')?;
                        let a = Box::new(self.expr()?);
                        self.expect(b')')?;
                        Ok(if name == "exp" {
                            Expr::Exp(a)
                        } else {
                            Expr::Log(a)
                        })
                    }
                    "min" | "max" => {
                        self.expect(b'(')?;
                        let a = Box::new(self.expr()?);
                        self.expect(b',')?;
                        let b = Box::new(self.expr()?);
                        self.expect(b')')?;
                        Ok(if name == "min" {
                            Expr::Min(a, b)
                        } else {
                            Expr::Max(a, b)
                        })
                    }
                    "chi" => {
                        self.expect(b'(')?;
                        let a = self.bound()?;
                        self.expect(b',')?;
                        let b = self.bound()?;
                        self.expect(b')')?;
                        if !(a < b) {
                            return Err(self.error("chi(a, b) needs a < b"));
                        }
                        Ok(Expr::Chi(a, b))
                    }
                    _ => {
                        self.pos = start;
                        Err(self.error(&format!("unknown identifier `{name}`")))
                    }
                }
            }
            Some(c) => Err(self.error(&format!("unexpected character '{}'", c as char))),
        }
    }
}
