//! Evaluation of expressions to operators at a fixed level, and back.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use dcongr::{Context, DiffOp, Error, PadicScalar, Result, TateSeries};

use crate::expr::{Expr, Sym};

pub fn eval(e: &Expr, level: u32, ctx: &Context) -> Result<DiffOp> {
    Evaluator {
        level,
        ctx,
        env: HashMap::new(),
    }
    .op(e)
}

struct Evaluator<'a> {
    level: u32,
    ctx: &'a Context,
    env: HashMap<String, i64>,
}

impl Evaluator<'_> {
    fn constant(&self, c: PadicScalar) -> DiffOp {
        DiffOp::function(TateSeries::constant(c), self.level, self.ctx)
    }

    fn integer(&self, e: &Expr) -> Result<i64> {
        let bad = || Error::RangeError(format!("{e} is not an integer"));
        match e {
            Expr::Int(n) => n.to_i64().ok_or_else(bad),
            Expr::Var(v) => self.env.get(v).copied().ok_or_else(bad),
            Expr::Neg(a) => Ok(-self.integer(a)?),
            Expr::Add(a, b) => Ok(self.integer(a)? + self.integer(b)?),
            Expr::Sub(a, b) => Ok(self.integer(a)? - self.integer(b)?),
            Expr::Mul(a, b) => Ok(self.integer(a)? * self.integer(b)?),
            Expr::Pow(a, b) => {
                let exp = self.exponent(b)?;
                Ok(self.integer(a)?.pow(exp))
            }
            _ => Err(bad()),
        }
    }

    fn exponent(&self, e: &Expr) -> Result<u32> {
        let n = self.integer(e)?;
        u32::try_from(n)
            .map_err(|_| Error::RangeError(format!("exponent {n} is negative or too large")))
    }

    fn op(&mut self, e: &Expr) -> Result<DiffOp> {
        let ctx = self.ctx;
        match e {
            Expr::Int(n) => Ok(self.constant(PadicScalar::from_bigint(n.clone(), ctx))),
            Expr::Var(v) => {
                let n = *self
                    .env
                    .get(v)
                    .ok_or_else(|| Error::RangeError(format!("unbound variable {v}")))?;
                Ok(self.constant(PadicScalar::from_int(n, ctx)))
            }
            Expr::Sym(Sym::P) => Ok(self.constant(PadicScalar::p_power(1))),
            Expr::Sym(Sym::T) => Ok(DiffOp::function(
                TateSeries::monomial(PadicScalar::one(), 1, ctx),
                self.level,
                ctx,
            )),
            Expr::Sym(Sym::D) => DiffOp::derivation(self.level, ctx)
                .scale(&PadicScalar::p_power(-(self.level as i64)), ctx),
            Expr::Neg(a) => Ok(self.op(a)?.neg(ctx)),
            Expr::Add(a, b) => self.op(a)?.add(&self.op(b)?, ctx),
            Expr::Sub(a, b) => self.op(a)?.sub(&self.op(b)?, ctx),
            Expr::Mul(a, b) => self.op(a)?.op_mul(&self.op(b)?, ctx),
            Expr::Div(a, b) => {
                let num = self.op(a)?;
                let den = self.op(b)?;
                if den.is_zero() {
                    return Err(Error::DivisionByZero);
                }
                if den.order() != Some(0) {
                    return Err(Error::RangeError("denominators must be functions".into()));
                }
                let f = den.coeff(0);
                if f.degree() == Some(0) {
                    num.scale(&f.coeff(0).inv(ctx)?, ctx)
                } else {
                    num.left_mul_series(&f.invert(ctx)?, ctx)
                }
            }
            Expr::Pow(a, b) => {
                let mut n = self.exponent(b)?;
                let mut base = self.op(a)?;
                let mut acc = DiffOp::one(self.level, ctx);
                while n > 0 {
                    if n & 1 == 1 {
                        acc = acc.op_mul(&base, ctx)?;
                    }
                    n >>= 1;
                    if n > 0 {
                        base = base.op_mul(&base, ctx)?;
                    }
                }
                Ok(acc)
            }
            Expr::Prod { var, lo, hi, body } => {
                let saved = self.env.get(var).copied();
                let mut acc = DiffOp::one(self.level, ctx);
                for n in *lo..=*hi {
                    self.env.insert(var.clone(), n);
                    acc = acc.op_mul(&self.op(body)?, ctx)?;
                }
                match saved {
                    Some(v) => self.env.insert(var.clone(), v),
                    None => self.env.remove(var),
                };
                Ok(acc)
            }
        }
    }
}

fn int(n: BigInt) -> Expr {
    if n.is_negative() {
        Expr::Neg(Box::new(Expr::Int(-n)))
    } else {
        Expr::Int(n)
    }
}

fn p_pow(e: u64) -> Expr {
    match e {
        1 => Expr::Sym(Sym::P),
        _ => Expr::Pow(Box::new(Expr::Sym(Sym::P)), Box::new(Expr::int(e as i64))),
    }
}

/// A scalar as an expression; capped values become `u*p^v` (or `u/p^v`).
pub fn scalar_expr(c: &PadicScalar, ctx: &Context) -> Expr {
    if let Some((n, d)) = c.as_ratio(ctx) {
        return if d.is_one() {
            int(n)
        } else {
            let frac = Expr::Div(Box::new(Expr::Int(n.abs())), Box::new(Expr::Int(d)));
            if n.is_negative() {
                Expr::Neg(Box::new(frac))
            } else {
                frac
            }
        };
    }
    let (v, u) = c.capped_parts(ctx).expect("scalar is exact or capped");
    let negative = u.is_negative();
    let unit = u.abs().is_one();
    let u = Expr::Int(u.abs());
    let body = match v {
        0 => u,
        v if v > 0 && unit => p_pow(v as u64),
        v if v > 0 => Expr::Mul(Box::new(u), Box::new(p_pow(v as u64))),
        v => Expr::Div(Box::new(u), Box::new(p_pow((-v) as u64))),
    };
    if negative {
        Expr::Neg(Box::new(body))
    } else {
        body
    }
}

fn t_pow(i: usize) -> Expr {
    match i {
        1 => Expr::Sym(Sym::T),
        _ => Expr::Pow(Box::new(Expr::Sym(Sym::T)), Box::new(Expr::int(i as i64))),
    }
}

/// Splits a leading negation so sums print as `a - b`.
fn split_sign(e: Expr) -> (bool, Expr) {
    match e {
        Expr::Neg(a) => (true, *a),
        e => (false, e),
    }
}

fn sum(terms: Vec<Expr>) -> Expr {
    let mut acc: Option<Expr> = None;
    for t in terms {
        acc = Some(match acc {
            None => t,
            Some(a) => match split_sign(t) {
                (true, t) => Expr::Sub(Box::new(a), Box::new(t)),
                (false, t) => Expr::Add(Box::new(a), Box::new(t)),
            },
        });
    }
    acc.unwrap_or(Expr::int(0))
}

fn times(c: Expr, m: Expr) -> Expr {
    match split_sign(c) {
        (neg, Expr::Int(n)) if n.is_one() => {
            if neg {
                Expr::Neg(Box::new(m))
            } else {
                m
            }
        }
        (neg, c) => {
            let prod = Expr::Mul(Box::new(c), Box::new(m));
            if neg {
                Expr::Neg(Box::new(prod))
            } else {
                prod
            }
        }
    }
}

pub fn series_expr(f: &TateSeries, ctx: &Context) -> Expr {
    let terms = f
        .coeffs()
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(i, c)| match i {
            0 => scalar_expr(c, ctx),
            _ => times(scalar_expr(c, ctx), t_pow(i)),
        })
        .collect();
    sum(terms)
}

/// `(p^k*D)^n`, the `n`-th power of the level derivation in the input syntax.
fn derivation_power(level: u32, n: usize) -> Expr {
    let base = match level {
        0 => Expr::Sym(Sym::D),
        k => Expr::Mul(Box::new(p_pow(k as u64)), Box::new(Expr::Sym(Sym::D))),
    };
    match n {
        1 => base,
        _ => Expr::Pow(Box::new(base), Box::new(Expr::int(n as i64))),
    }
}

/// The operator in the input syntax, equal to it at the working precision.
pub fn op_expr(h: &DiffOp, ctx: &Context) -> Expr {
    let mut terms = Vec::new();
    for (n, a) in h.coeffs().iter().enumerate() {
        if a.is_zero() {
            continue;
        }
        let s = series_expr(a, ctx);
        if n == 0 {
            terms.push(s);
            continue;
        }
        terms.push(times(s, derivation_power(h.level(), n)));
    }
    sum(terms)
}

pub fn render(h: &DiffOp, ctx: &Context) -> String {
    op_expr(h, ctx).to_string()
}

pub fn is_zero_expr(e: &Expr) -> bool {
    matches!(e, Expr::Int(n) if n.is_zero())
}
