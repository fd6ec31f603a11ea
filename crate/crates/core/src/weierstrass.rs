//! Division by an operator with a normalized dominant coefficient, Hensel
//! factorization and the bracket witness of simplicity.

use serde::Serialize;

use crate::dop::DiffOp;
use crate::error::{Error, Result};
use crate::scalar::{Context, Norm, PadicScalar};
use crate::tate::TateSeries;

/// `H = Q P + R + S` with `R` of order below `nbar(P)` and `S` supported in
/// orders at least `nbar(P)` on polynomials of degree below `nk(P)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DivisionResult {
    pub quotient: DiffOp,
    pub remainder: DiffOp,
    pub tail: DiffOp,
    pub passes: usize,
}

impl DivisionResult {
    pub fn truncated(&self) -> bool {
        self.quotient.truncated() || self.remainder.truncated() || self.tail.truncated()
    }

    pub fn dropped(&self) -> bool {
        self.quotient.dropped() || self.remainder.dropped() || self.tail.dropped()
    }
}

/// `H = Q P + S` with `Q` a unit of norm one and `P` of order `nbar(H)`.
#[derive(Clone, Debug, PartialEq)]
pub struct HenselResult {
    pub unit: DiffOp,
    pub dominant: DiffOp,
    /// Zero exactly when the factorization holds at the origin itself.
    pub tail: DiffOp,
    pub iterations: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Bracket {
    /// `W -> [W, t]`
    T,
    /// `W -> [W, p^k d/dt]`
    Del,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Witness {
    pub op: DiffOp,
    pub word: Vec<Bracket>,
}

/// An operator scaled to norm one, ready to reduce others by its leading data.
#[derive(Clone, Debug)]
pub(crate) struct Reducer {
    pub op: DiffOp,
    pub nbar: usize,
    pub nk: usize,
    unit_inv: TateSeries,
}

impl Reducer {
    /// Normalizes `p`; returns the reducer and the exponent `e` with `p^e * p_op` of norm one.
    pub fn new(p: &DiffOp, ctx: &Context) -> Result<(Self, i64)> {
        if p.is_zero() {
            return Err(Error::ZeroDivisor);
        }
        let shift = p.op_norm().log_p().unwrap();
        let op = p.scale(&PadicScalar::p_power(shift), ctx)?.project(ctx)?;
        let (nbar, nk) = op.indices()?;
        let unit_inv = op.coeff(nbar).shift_down(nk, ctx).invert(ctx)?.stored();
        Ok((
            Reducer {
                op,
                nbar,
                nk,
                unit_inv,
            },
            shift,
        ))
    }

    /// Inverse of the unit part of the dominant coefficient.
    pub fn unit_inv(&self) -> &TateSeries {
        &self.unit_inv
    }
}

/// `h = sum quotients[i] * reducers[i].op + remainder`.
pub(crate) struct Reduction {
    pub quotients: Vec<DiffOp>,
    pub remainder: DiffOp,
    pub passes: usize,
}

/// Reduces every order of `h` against the reducer with the lowest dominant index
/// among those of order at most that order, until the work falls below the floor.
pub(crate) fn reduce_by(h: &DiffOp, reducers: &[Reducer], ctx: &Context) -> Result<Reduction> {
    let level = h.level();
    for r in reducers {
        if r.op.level() != level {
            return Err(Error::LevelMismatch(level, r.op.level()));
        }
    }
    let mut quotients = vec![DiffOp::zero(level); reducers.len()];
    let mut remainder = DiffOp::zero(level);
    let mut work = h.project(ctx)?;
    let limit = (ctx.precision() as usize + 2) * (ctx.opmax() + 2);
    for pass in 0..limit {
        if work.below_floor(ctx) {
            return Ok(Reduction {
                quotients,
                remainder,
                passes: pass,
            });
        }
        let mut rem = Vec::with_capacity(work.coeffs().len());
        let mut qs: Vec<Vec<TateSeries>> = vec![Vec::new(); reducers.len()];
        for (n, w) in work.coeffs().iter().enumerate() {
            let choice = reducers
                .iter()
                .enumerate()
                .filter(|(_, r)| r.nbar <= n)
                .min_by_key(|(_, r)| (r.nk, std::cmp::Reverse(r.nbar)));
            let Some((i, r)) = choice else {
                rem.push(w.clone());
                continue;
            };
            rem.push(w.low_part(r.nk, ctx));
            let q = w.stored().shift_down(r.nk, ctx).mul(&r.unit_inv, ctx)?;
            let slot = n - r.nbar;
            if qs[i].len() <= slot {
                qs[i].resize(slot + 1, TateSeries::zero());
            }
            qs[i][slot] = q;
        }
        let rem = DiffOp::new(level, rem, ctx);
        remainder = remainder.add(&rem, ctx)?;
        work = work.sub(&rem, ctx)?;
        for (i, q) in qs.into_iter().enumerate() {
            if q.is_empty() {
                continue;
            }
            let q = DiffOp::new(level, q, ctx);
            work = work.sub(&q.op_mul(&reducers[i].op, ctx)?, ctx)?;
            quotients[i] = quotients[i].add(&q, ctx)?;
        }
    }
    Err(Error::precision("reduction did not contract to the floor"))
}

/// Runs `f` under a larger degree cap until every output is determined through
/// the cap of `ctx`. Each pass against a dominant coefficient `t^nk * u` moves
/// information down by `nk` degrees.
fn widened<T>(
    ctx: &Context,
    nk: usize,
    f: impl Fn(&Context) -> Result<T>,
    outputs: impl Fn(&T) -> Vec<&DiffOp>,
) -> Result<(T, Vec<DiffOp>)> {
    let target = ctx.tdeg() + 1;
    let mut margin = nk * (ctx.precision() as usize + 2);
    let mut last: Option<Vec<DiffOp>> = None;
    for _ in 0..5 {
        let out = f(&ctx.with_tdeg(ctx.tdeg() + margin)?)?;
        let ops = outputs(&out);
        if ops.iter().all(|h| h.t_known().is_none_or(|k| k >= target)) {
            let clipped = ops.iter().map(|h| h.clip(ctx)).collect();
            return Ok((out, clipped));
        }
        let settled: Vec<DiffOp> = ops.iter().map(|h| h.settled(ctx)).collect();
        if let Some(prev) = &last {
            if prev
                .iter()
                .zip(&settled)
                .all(|(a, b)| a.eq_to_precision(b, ctx))
            {
                return Ok((out, settled));
            }
        }
        last = Some(settled);
        margin = 2 * margin.max(4);
    }
    Err(Error::precision(
        "t-adic determinacy lost below the degree cap",
    ))
}

/// Divides `h` by `p`, returning quotient, remainder and tail.
pub fn divide(h: &DiffOp, p: &DiffOp, ctx: &Context) -> Result<DivisionResult> {
    if h.level() != p.level() {
        return Err(Error::LevelMismatch(h.level(), p.level()));
    }
    let nk = if p.is_zero() { 0 } else { p.nk()? };
    let (d, mut ops) = widened(
        ctx,
        nk,
        |w| divide_within(h, p, w),
        |d| vec![&d.quotient, &d.remainder, &d.tail],
    )?;
    let (tail, remainder, quotient) = (ops.pop().unwrap(), ops.pop().unwrap(), ops.pop().unwrap());
    Ok(DivisionResult {
        quotient,
        remainder,
        tail,
        passes: d.passes,
    })
}

fn divide_within(h: &DiffOp, p: &DiffOp, ctx: &Context) -> Result<DivisionResult> {
    let (reducer, shift) = Reducer::new(p, ctx)?;
    let red = reduce_by(h, std::slice::from_ref(&reducer), ctx)?;
    let level = h.level();
    let d = reducer.nbar;
    let rest = red.remainder.coeffs();
    let remainder = DiffOp::new(level, rest.iter().take(d).cloned().collect(), ctx);
    let mut tail = vec![TateSeries::zero(); d.min(rest.len())];
    tail.extend(rest.iter().skip(d).cloned());
    let quotient = red.quotients[0].scale(&PadicScalar::p_power(shift), ctx)?;
    Ok(DivisionResult {
        quotient,
        remainder,
        tail: DiffOp::new(level, tail, ctx),
        passes: red.passes,
    })
}

/// Factors `h` as a norm-one unit times an operator of order `nbar(h)`.
pub fn hensel_factor(h: &DiffOp, ctx: &Context) -> Result<HenselResult> {
    let (_, nk) = h.indices()?;
    let (r, mut ops) = widened(
        ctx,
        nk,
        |w| hensel_within(h, w),
        |r| vec![&r.unit, &r.dominant, &r.tail],
    )?;
    let (tail, dominant, unit) = (ops.pop().unwrap(), ops.pop().unwrap(), ops.pop().unwrap());
    Ok(HenselResult {
        unit,
        dominant,
        tail,
        iterations: r.iterations,
    })
}

fn hensel_within(h: &DiffOp, ctx: &Context) -> Result<HenselResult> {
    let (nbar, _) = h.indices()?;
    let h = &h.project(ctx)?;
    let level = h.level();
    let mut dominant = DiffOp::new(level, h.coeffs()[..=nbar].to_vec(), ctx);
    let first = divide_within(h, &dominant, ctx)?;
    let mut unit = first.quotient;
    let mut remainder = first.remainder;
    let mut tail = first.tail;
    let limit = (ctx.precision() as usize + 2) * (ctx.opmax() + 2);
    for it in 0..limit {
        if remainder.below_floor(ctx) {
            return Ok(HenselResult {
                unit,
                dominant,
                tail,
                iterations: it,
            });
        }
        dominant = dominant.add(&remainder, ctx)?;
        let defect = unit
            .sub(&DiffOp::one(level, ctx), ctx)?
            .op_mul(&remainder, ctx)?;
        let step = divide_within(&defect.neg(ctx), &dominant, ctx)?;
        unit = unit.add(&step.quotient, ctx)?;
        tail = tail.add(&step.tail, ctx)?;
        remainder = step.remainder;
    }
    Err(Error::precision(
        "factorization did not contract to the floor",
    ))
}

/// Brackets `h` with `t` as many times as `nbar(h)`, then with `p^k d/dt` as many
/// times as `nk(h)`; the result has both indices zero.
pub fn simplicity_witness(h: &DiffOp, ctx: &Context) -> Result<Witness> {
    let (nbar, nk) = h.indices()?;
    let mut op = h.clone();
    let mut word = Vec::with_capacity(nbar + nk);
    for _ in 0..nbar {
        op = op.bracket_t(ctx)?;
        word.push(Bracket::T);
    }
    for _ in 0..nk {
        op = op.bracket_del(ctx)?;
        word.push(Bracket::Del);
    }
    match op.indices() {
        Ok((0, 0)) => Ok(Witness { op, word }),
        Ok(_) => Err(Error::precision("bracket word left a nonzero index")),
        Err(Error::ZeroOperator) => Err(Error::precision("bracket vanished below the floor")),
        Err(e) => Err(e),
    }
}

/// Whether the norm identity `|H| = max(|Q||P|, |R|, |S|)` holds on stored magnitudes.
pub fn norm_identity_holds(h: &DiffOp, p: &DiffOp, d: &DivisionResult) -> bool {
    let lhs = h.op_norm();
    let rhs = [
        d.quotient.op_norm() * p.op_norm(),
        d.remainder.op_norm(),
        d.tail.op_norm(),
    ]
    .into_iter()
    .max()
    .unwrap_or(Norm::ZERO);
    lhs == rhs
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> Context {
        Context::new(5, 12, 24, 16).unwrap()
    }

    fn ints(level: u32, rows: &[&[i64]], c: &Context) -> DiffOp {
        DiffOp::new(
            level,
            rows.iter().map(|r| TateSeries::from_ints(r, c)).collect(),
            c,
        )
    }

    /// Applies an operator to a polynomial directly.
    fn apply(h: &DiffOp, f: &TateSeries, c: &Context) -> TateSeries {
        let mut acc = TateSeries::zero();
        let mut g = f.clone();
        for (n, a) in h.coeffs().iter().enumerate() {
            if n > 0 {
                g = g
                    .derivative(c)
                    .unwrap()
                    .mul_p_power(h.level() as i64, c)
                    .unwrap();
            }
            acc = acc.add(&a.mul(&g, c).unwrap(), c).unwrap();
        }
        acc
    }

    fn check_identity(h: &DiffOp, p: &DiffOp, d: &DivisionResult, c: &Context) {
        for m in 0..6 {
            let f = TateSeries::monomial(PadicScalar::one(), m, c);
            let lhs = apply(h, &f, c);
            let rhs = apply(&d.quotient, &apply(p, &f, c), c)
                .add(&apply(&d.remainder, &f, c), c)
                .unwrap()
                .add(&apply(&d.tail, &f, c), c)
                .unwrap();
            assert!(lhs.eq_to_precision(&rhs, c), "monomial t^{m}");
        }
    }

    #[test]
    fn divide_examples() {
        let c = ctx();
        let d2 = ints(1, &[&[], &[], &[1]], &c);
        let d1 = DiffOp::derivation(1, &c);
        let r = divide(&d2, &d1, &c).unwrap();
        assert!(r.quotient.eq_to_precision(&d1, &c));
        assert!(r.remainder.is_zero() && r.tail.is_zero());

        let t = ints(1, &[&[0, 1]], &c);
        let td = ints(1, &[&[], &[0, 1]], &c);
        let r = divide(&t, &td, &c).unwrap();
        assert!(r.quotient.is_zero() && r.tail.is_zero());
        assert!(r.remainder.eq_to_precision(&t, &c));

        let h = ints(1, &[&[1], &[], &[0, 0, 1]], &c);
        let r = divide(&h, &td, &c).unwrap();
        assert!(r
            .quotient
            .eq_to_precision(&ints(1, &[&[-5], &[0, 1]], &c), &c));
        assert!(r.remainder.eq_to_precision(&ints(1, &[&[1]], &c), &c));
        assert!(r.tail.is_zero());
        check_identity(&h, &td, &r, &c);
        assert!(norm_identity_holds(&h, &td, &r));
    }

    #[test]
    fn divide_produces_tail() {
        let c = ctx();
        let p = ints(1, &[&[5], &[0, 1]], &c);
        let h = ints(1, &[&[], &[1, 2, 3], &[7, 1]], &c);
        let r = divide(&h, &p, &c).unwrap();
        assert!(!r.tail.is_zero());
        for coeff in r.tail.coeffs().iter().skip(1) {
            assert!(coeff.degree().is_none_or(|d| d < 1));
        }
        assert!(r.remainder.order().is_none_or(|o| o < 1));
        check_identity(&h, &p, &r, &c);
        assert!(norm_identity_holds(&h, &p, &r));
        let again = divide(&r.remainder.add(&r.tail, &c).unwrap(), &p, &c).unwrap();
        assert!(again.quotient.is_zero());
    }

    #[test]
    fn divide_rejects() {
        let c = ctx();
        let h = DiffOp::one(1, &c);
        assert_eq!(divide(&h, &DiffOp::zero(1), &c), Err(Error::ZeroDivisor));
        assert_eq!(
            divide(&h, &DiffOp::one(2, &c), &c),
            Err(Error::LevelMismatch(1, 2))
        );
    }

    #[test]
    fn divide_with_unnormalized_lead() {
        let c = ctx();
        let p = ints(1, &[&[1], &[5, 0, 1]], &c);
        let h = ints(1, &[&[2, 1], &[0, 3], &[1, 1, 1, 1]], &c);
        let r = divide(&h, &p, &c).unwrap();
        for coeff in r.tail.coeffs().iter().skip(1) {
            assert!(coeff.degree().is_none_or(|d| d < 2));
        }
        check_identity(&h, &p, &r, &c);
        assert!(norm_identity_holds(&h, &p, &r));
    }

    #[test]
    fn hensel_examples() {
        let c = ctx();
        let h = ints(1, &[&[1], &[-1]], &c);
        let f = hensel_factor(&h, &c).unwrap();
        assert!(f.unit.eq_to_precision(&DiffOp::one(1, &c), &c));
        assert!(f.dominant.eq_to_precision(&h, &c));

        let lin = |e: u32| ints(0, &[&[1], &[-(5i64.pow(e))]], &c);
        let mut prod = DiffOp::one(0, &c);
        for e in 1..=6 {
            prod = prod.op_mul(&lin(e), &c).unwrap();
        }
        for k in 1..=3 {
            let h = prod.rescale_level(k, &c).unwrap();
            let f = hensel_factor(&h, &c).unwrap();
            assert_eq!(f.dominant.order(), Some(k as usize));
            assert_eq!(f.unit.indices(), Ok((0, 0)));
            assert_eq!(f.unit.op_norm(), Norm::ONE);
            assert!(f.tail.is_zero());
            assert!(f.unit.op_mul(&f.dominant, &c).unwrap().close_to(&h, 0, &c));
            let again = hensel_factor(&f.dominant, &c).unwrap();
            assert!(again.dominant.close_to(&f.dominant, 0, &c));
        }
    }

    #[test]
    fn witness_examples() {
        let c = ctx();
        for k in 0..3 {
            let w = simplicity_witness(&DiffOp::derivation(k, &c), &c).unwrap();
            assert_eq!(w.word, vec![Bracket::T]);
            assert_eq!(w.op, ints(k, &[&[5i64.pow(k)]], &c));
            let w = simplicity_witness(&ints(k, &[&[0, 1]], &c), &c).unwrap();
            assert_eq!(w.word, vec![Bracket::Del]);
            assert_eq!(w.op, ints(k, &[&[-(5i64.pow(k))]], &c));
        }
        let h = ints(1, &[&[5], &[], &[0, 0, 1]], &c);
        let w = simplicity_witness(&h, &c).unwrap();
        assert_eq!(
            w.word,
            vec![Bracket::T, Bracket::T, Bracket::Del, Bracket::Del]
        );
        assert_eq!(w.op.indices(), Ok((0, 0)));
    }
}
