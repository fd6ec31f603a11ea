//! Left ideals at the origin: exponents, staircases, division bases, normal
//! forms, and a mod-p linear algebra oracle for the staircase.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use serde::Serialize;

use crate::dop::DiffOp;
use crate::error::{Error, Result};
use crate::scalar::{Context, PadicScalar};
use crate::tate::TateSeries;
use crate::weierstrass::{reduce_by, Reducer};

/// `(valuation, order)` of an operator: `(nk, nbar)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Exponent {
    pub v: usize,
    pub d: usize,
}

impl Exponent {
    pub fn new(v: usize, d: usize) -> Self {
        Exponent { v, d }
    }

    pub fn is_below(self, other: Exponent) -> bool {
        self.v <= other.v && self.d <= other.d
    }
}

impl std::ops::Add for Exponent {
    type Output = Exponent;
    fn add(self, o: Exponent) -> Exponent {
        Exponent::new(self.v + o.v, self.d + o.d)
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.v, self.d)
    }
}

pub fn exponent(p: &DiffOp) -> Result<Exponent> {
    let (d, v) = p.indices()?;
    Ok(Exponent::new(v, d))
}

/// An upward-closed subset of `N^2`, stored by its minimal elements sorted by order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Staircase {
    minimals: Vec<Exponent>,
}

impl Staircase {
    pub fn from_exponents<I: IntoIterator<Item = Exponent>>(exps: I) -> Self {
        let all: BTreeSet<Exponent> = exps.into_iter().collect();
        let mut minimals: Vec<Exponent> = all
            .iter()
            .copied()
            .filter(|e| !all.iter().any(|o| o != e && o.is_below(*e)))
            .collect();
        minimals.sort_by_key(|e| (e.d, std::cmp::Reverse(e.v)));
        Staircase { minimals }
    }

    pub fn minimals(&self) -> &[Exponent] {
        &self.minimals
    }

    pub fn is_empty(&self) -> bool {
        self.minimals.is_empty()
    }

    pub fn contains(&self, e: Exponent) -> bool {
        self.minimals.iter().any(|m| m.is_below(e))
    }

    pub fn is_unit(&self) -> bool {
        self.contains(Exponent::new(0, 0))
    }

    /// Least order in the region.
    pub fn min_order(&self) -> Option<usize> {
        self.minimals.iter().map(|m| m.d).min()
    }

    /// Least valuation in the region.
    pub fn min_valuation(&self) -> Option<usize> {
        self.minimals.iter().map(|m| m.v).min()
    }

    /// Least valuation reached in orders at most `d`.
    pub fn row_threshold(&self, d: usize) -> Option<usize> {
        self.minimals.iter().filter(|m| m.d <= d).map(|m| m.v).min()
    }

    /// Rows are orders (highest on top), columns are valuations.
    pub fn render_ascii(&self, width: usize, height: usize) -> String {
        let mut out = String::new();
        for d in (0..height).rev() {
            out.push_str(&format!("{d:>3} |"));
            for v in 0..width {
                let e = Exponent::new(v, d);
                let ch = if self.minimals.contains(&e) {
                    'o'
                } else if self.contains(e) {
                    '#'
                } else {
                    '.'
                };
                out.push(' ');
                out.push(ch);
            }
            out.push('\n');
        }
        out.push_str("    +");
        out.push_str(&"--".repeat(width));
        out.push('\n');
        out.push_str("     ");
        for v in 0..width {
            out.push_str(&format!("{:>2}", v % 10));
        }
        out.push('\n');
        out
    }
}

/// Echeloned norm-one generators realizing the staircase.
#[derive(Clone, Debug, PartialEq)]
pub struct DivisionBasis {
    pub level: u32,
    pub ops: Vec<DiffOp>,
    pub exponents: Vec<Exponent>,
    pub staircase: Staircase,
    /// Some element only appeared after dividing a combination by p.
    pub torsion: bool,
    /// Digits of absolute precision still trusted in the basis.
    pub precision: i64,
    pub pairs: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub enum IdealBasis {
    UnitIdeal,
    Basis(DivisionBasis),
}

impl IdealBasis {
    pub fn staircase(&self) -> Staircase {
        match self {
            IdealBasis::UnitIdeal => Staircase::from_exponents([Exponent::new(0, 0)]),
            IdealBasis::Basis(b) => b.staircase.clone(),
        }
    }

    pub fn is_unit(&self) -> bool {
        matches!(self, IdealBasis::UnitIdeal)
    }
}

pub const DEFAULT_PAIR_BUDGET: usize = 400;
const PRECISION_GUARD: i64 = 4;

struct Element {
    red: Reducer,
    exp: Exponent,
    eff: i64,
}

enum Inserted {
    Zero,
    Unit,
    Added,
}

struct Completion<'a> {
    ctx: &'a Context,
    level: u32,
    elems: Vec<Element>,
    torsion: bool,
}

impl Completion<'_> {
    fn reducers(&self) -> Vec<Reducer> {
        self.elems.iter().map(|e| e.red.clone()).collect()
    }

    /// Reduces `cand`, known to `eff` absolute digits, and records a nonzero remainder.
    fn insert(&mut self, cand: &DiffOp, eff: i64, from_pair: bool) -> Result<Inserted> {
        let rem = reduce_by(cand, &self.reducers(), self.ctx)?.remainder;
        let Some(e) = rem.op_norm().log_p() else {
            return Ok(Inserted::Zero);
        };
        let val = -e;
        if val >= eff {
            return Ok(Inserted::Zero);
        }
        let eff = eff - val.max(0);
        if eff < PRECISION_GUARD {
            return Err(Error::precision(
                "saturation consumed the working precision",
            ));
        }
        if from_pair && val > 0 {
            self.torsion = true;
        }
        let (red, _) = Reducer::new(&rem, self.ctx)?;
        let exp = Exponent::new(red.nk, red.nbar);
        self.elems.push(Element { red, exp, eff });
        if exp == Exponent::new(0, 0) {
            return Ok(Inserted::Unit);
        }
        Ok(Inserted::Added)
    }

    /// Aligns the leading data of two elements and subtracts.
    fn spair(&self, i: usize, j: usize) -> Result<DiffOp> {
        let (a, b) = (&self.elems[i], &self.elems[j]);
        let top = Exponent::new(a.exp.v.max(b.exp.v), a.exp.d.max(b.exp.d));
        let lift = |el: &Element| -> Result<DiffOp> {
            let ctx = self.ctx;
            let mut x = el.red.op.clone();
            let shift = top.d - el.exp.d;
            if shift > 0 {
                let mut dpow = vec![TateSeries::zero(); shift];
                dpow.push(TateSeries::one(ctx));
                x = DiffOp::new(self.level, dpow, ctx).op_mul(&x, ctx)?;
            }
            let tpow = TateSeries::monomial(PadicScalar::one(), top.v - el.exp.v, ctx);
            let factor = el.red.unit_inv().mul(&tpow, ctx)?;
            x.left_mul_series(&factor, ctx)
        };
        lift(a)?.sub(&lift(b)?, self.ctx)
    }
}

/// Computes a division basis of the left ideal generated by `gens`.
pub fn division_basis(gens: &[DiffOp], ctx: &Context) -> Result<IdealBasis> {
    division_basis_with_budget(gens, DEFAULT_PAIR_BUDGET, ctx)
}

pub fn division_basis_with_budget(
    gens: &[DiffOp],
    budget: usize,
    ctx: &Context,
) -> Result<IdealBasis> {
    let nonzero: Vec<&DiffOp> = gens.iter().filter(|g| !g.is_zero()).collect();
    let Some(first) = nonzero.first() else {
        return Err(Error::ZeroOperator);
    };
    let level = first.level();
    for g in &nonzero {
        if g.level() != level {
            return Err(Error::LevelMismatch(level, g.level()));
        }
    }
    let mut comp = Completion {
        ctx,
        level,
        elems: Vec::new(),
        torsion: false,
    };
    let mut queue: VecDeque<(usize, usize)> = VecDeque::new();
    let n = ctx.precision() as i64;
    for g in nonzero {
        let shift = g.op_norm().log_p().unwrap();
        let g = g.scale(&PadicScalar::p_power(shift), ctx)?;
        let before = comp.elems.len();
        match comp.insert(&g, n, before > 0)? {
            Inserted::Unit => return Ok(IdealBasis::UnitIdeal),
            Inserted::Zero => {}
            Inserted::Added => queue.extend((0..before).map(|i| (i, before))),
        }
    }
    let mut pairs = 0;
    while let Some((i, j)) = queue.pop_front() {
        pairs += 1;
        if pairs > budget {
            return Err(Error::CapExceeded(budget));
        }
        let s = comp.spair(i, j)?;
        let eff = comp.elems[i].eff.min(comp.elems[j].eff);
        let before = comp.elems.len();
        match comp.insert(&s, eff, true)? {
            Inserted::Unit => return Ok(IdealBasis::UnitIdeal),
            Inserted::Zero => {}
            Inserted::Added => queue.extend((0..before).map(|i| (i, before))),
        }
    }
    let staircase = Staircase::from_exponents(comp.elems.iter().map(|e| e.exp));
    let dmin = staircase.min_order().unwrap();
    let vmin = staircase.min_valuation().unwrap();
    let mut ops = Vec::new();
    let mut exponents = Vec::new();
    let mut b = dmin;
    loop {
        let v = staircase.row_threshold(b).unwrap();
        let el = comp
            .elems
            .iter()
            .filter(|e| e.exp.d <= b && e.exp.v == v)
            .max_by_key(|e| e.exp.d)
            .unwrap();
        let mut dpow = vec![TateSeries::zero(); b - el.exp.d];
        dpow.push(TateSeries::one(ctx));
        ops.push(DiffOp::new(level, dpow, ctx).op_mul(&el.red.op, ctx)?);
        exponents.push(Exponent::new(v, b));
        if v == vmin {
            break;
        }
        b += 1;
    }
    let precision = comp.elems.iter().map(|e| e.eff).min().unwrap();
    Ok(IdealBasis::Basis(DivisionBasis {
        level,
        ops,
        exponents,
        staircase,
        torsion: comp.torsion,
        precision,
        pairs,
    }))
}

/// Remainder of `h` after division by the basis.
pub fn normal_form(h: &DiffOp, basis: &DivisionBasis, ctx: &Context) -> Result<DiffOp> {
    let reducers = basis
        .ops
        .iter()
        .map(|p| Reducer::new(p, ctx).map(|r| r.0))
        .collect::<Result<Vec<_>>>()?;
    Ok(reduce_by(h, &reducers, ctx)?.remainder)
}

/// Whether `h` lies in the ideal to the precision the basis still carries.
pub fn is_member(h: &DiffOp, basis: &IdealBasis, ctx: &Context) -> Result<bool> {
    match basis {
        IdealBasis::UnitIdeal => Ok(true),
        IdealBasis::Basis(b) => {
            let r = normal_form(h, b, ctx)?;
            let scale = h.op_norm().log_p().unwrap_or(0);
            Ok(match r.op_norm().log_p() {
                None => true,
                Some(e) => e - scale <= -b.precision,
            })
        }
    }
}

/// Reduction mod p of a norm-one operator as a dense `xi`-by-`t` table over `F_p`.
fn reduce_mod_p(op: &DiffOp, ctx: &Context) -> Result<Vec<Vec<u64>>> {
    op.coeffs().iter().map(|c| c.reduce_mod_p(ctx)).collect()
}

/// Staircase of the mod-p ideal generated by the reduced generators, by linear
/// algebra on the monomials `t^a xi^b` with `a < box_t`, `b < box_xi`.
pub fn oracle_staircase(
    gens: &[DiffOp],
    box_t: usize,
    box_xi: usize,
    ctx: &Context,
) -> Result<Staircase> {
    let p = ctx.prime();
    let mut reduced = Vec::new();
    for g in gens.iter().filter(|g| !g.is_zero()) {
        if g.level() == 0 {
            return Err(Error::RangeError(
                "the mod-p oracle needs level at least 1".into(),
            ));
        }
        let shift = g.op_norm().log_p().unwrap();
        let g = g.scale(&PadicScalar::p_power(shift), ctx)?;
        reduced.push(reduce_mod_p(&g, ctx)?);
    }
    if reduced.is_empty() {
        return Err(Error::ZeroOperator);
    }
    // Column order: higher xi-degree first, then lower t-degree.
    let col = |a: usize, b: usize| (box_xi - 1 - b) * box_t + a;
    let ncols = box_t * box_xi;
    let mut rows: Vec<Vec<u64>> = Vec::new();
    for g in &reduced {
        let deg = g.len() - 1;
        for j in 0..box_xi.saturating_sub(deg) {
            for i in 0..box_t {
                let mut row = vec![0u64; ncols];
                let mut any = false;
                for (n, coeffs) in g.iter().enumerate() {
                    for (a, &c) in coeffs.iter().enumerate() {
                        if c != 0 && a + i < box_t {
                            row[col(a + i, n + j)] = c;
                            any = true;
                        }
                    }
                }
                if any {
                    rows.push(row);
                }
            }
        }
    }
    let pivots = echelon_pivots(&mut rows, p);
    let exps: Vec<Exponent> = pivots
        .into_iter()
        .map(|c| Exponent::new(c % box_t, box_xi - 1 - c / box_t))
        .collect();
    if exps.is_empty() {
        return Err(Error::BoxTooSmall(box_t, box_xi));
    }
    let st = Staircase::from_exponents(exps);
    if st
        .minimals()
        .iter()
        .any(|m| m.v + 1 >= box_t || m.d + 1 >= box_xi)
    {
        return Err(Error::BoxTooSmall(box_t, box_xi));
    }
    Ok(st)
}

fn inv_mod(a: u64, p: u64) -> u64 {
    let mut r = 1u64;
    let mut b = a % p;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            r = (r as u128 * b as u128 % p as u128) as u64;
        }
        b = (b as u128 * b as u128 % p as u128) as u64;
        e >>= 1;
    }
    r
}

/// Row-reduces over `F_p` and returns the pivot columns.
fn echelon_pivots(rows: &mut [Vec<u64>], p: u64) -> Vec<usize> {
    let ncols = rows.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut top = 0;
    for c in 0..ncols {
        let Some(r) = (top..rows.len()).find(|&r| rows[r][c] != 0) else {
            continue;
        };
        rows.swap(top, r);
        let inv = inv_mod(rows[top][c], p);
        for x in rows[top].iter_mut() {
            *x = (*x as u128 * inv as u128 % p as u128) as u64;
        }
        let pivot_row = rows[top].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r == top || row[c] == 0 {
                continue;
            }
            let f = row[c];
            for (x, &y) in row.iter_mut().zip(&pivot_row) {
                *x = (*x + p - (f as u128 * y as u128 % p as u128) as u64) % p;
            }
        }
        pivots.push(c);
        top += 1;
        if top == rows.len() {
            break;
        }
    }
    pivots
}
