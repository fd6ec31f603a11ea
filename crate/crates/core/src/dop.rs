//! Level-k differential operators `sum a_n (p^k d/dt)^n` with Tate series coefficients.

use num_bigint::BigInt;

use crate::error::{Error, Result};
use crate::par;
use crate::scalar::{Context, Norm, PadicScalar};
use crate::tate::TateSeries;

/// A differential operator stored in the basis of powers of `p^k d/dt`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DiffOp {
    level: u32,
    coeffs: Vec<TateSeries>,
    truncated: bool,
}

fn binomial_rows(n: usize, ctx: &Context) -> Vec<Vec<PadicScalar>> {
    let mut rows: Vec<Vec<BigInt>> = vec![vec![BigInt::from(1)]];
    for i in 1..=n {
        let prev = &rows[i - 1];
        let mut row = vec![BigInt::from(1); i + 1];
        for l in 1..i {
            row[l] = &prev[l - 1] + &prev[l];
        }
        rows.push(row);
    }
    rows.into_iter()
        .map(|r| {
            r.into_iter()
                .map(|b| PadicScalar::from_bigint(b, ctx))
                .collect()
        })
        .collect()
}

/// The derivation `factor * d/dt` used to commute functions past the generator.
struct Derivation<'a> {
    factor: Option<&'a TateSeries>,
}

impl Derivation<'_> {
    fn apply(&self, b: &TateSeries, ctx: &Context) -> Result<TateSeries> {
        let d = b.derivative(ctx)?;
        match self.factor {
            None => Ok(d),
            Some(c) => c.mul(&d, ctx),
        }
    }
}

impl DiffOp {
    pub fn new(level: u32, coeffs: Vec<TateSeries>, ctx: &Context) -> Self {
        DiffOp::from_parts(level, coeffs, false, ctx)
    }

    fn from_parts(
        level: u32,
        mut coeffs: Vec<TateSeries>,
        mut truncated: bool,
        ctx: &Context,
    ) -> Self {
        let cap = ctx.opmax() + 1;
        if coeffs.len() > cap {
            if coeffs[cap..]
                .iter()
                .any(|c| !c.below_floor(ctx) || c.bound().is_some_and(|v| v < ctx.n()))
            {
                truncated = true;
            }
            coeffs.truncate(cap);
        }
        while coeffs
            .last()
            .is_some_and(|c| c.is_zero() && c.known().is_none())
        {
            coeffs.pop();
        }
        DiffOp {
            level,
            coeffs,
            truncated,
        }
    }

    pub fn zero(level: u32) -> Self {
        DiffOp {
            level,
            coeffs: vec![],
            truncated: false,
        }
    }

    pub fn one(level: u32, ctx: &Context) -> Self {
        DiffOp::function(TateSeries::one(ctx), level, ctx)
    }

    /// Multiplication by the function `a`.
    pub fn function(a: TateSeries, level: u32, ctx: &Context) -> Self {
        DiffOp::new(level, vec![a], ctx)
    }

    /// The generator `p^k d/dt`.
    pub fn derivation(level: u32, ctx: &Context) -> Self {
        DiffOp::new(level, vec![TateSeries::zero(), TateSeries::one(ctx)], ctx)
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn coeffs(&self) -> &[TateSeries] {
        &self.coeffs
    }

    pub fn coeff(&self, n: usize) -> TateSeries {
        self.coeffs.get(n).cloned().unwrap_or_default()
    }

    pub fn order(&self) -> Option<usize> {
        self.coeffs.iter().rposition(|c| !c.is_zero())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// True when terms of order above `D_max` were discarded.
    pub fn truncated(&self) -> bool {
        self.truncated
    }

    /// True when some coefficient lost digits below the precision floor.
    pub fn dropped(&self) -> bool {
        self.coeffs.iter().any(|c| c.dropped())
    }

    /// Least degree modulo which every coefficient is determined.
    pub(crate) fn t_known(&self) -> Option<usize> {
        self.coeffs.iter().filter_map(|c| c.known()).min()
    }

    /// The stored part taken as exact below the degree cap of `ctx`.
    pub(crate) fn settled(&self, ctx: &Context) -> Self {
        let coeffs = self.coeffs.iter().map(|c| c.stored().clip(ctx)).collect();
        DiffOp::from_parts(self.level, coeffs, self.truncated, ctx)
    }

    pub(crate) fn clip(&self, ctx: &Context) -> Self {
        let coeffs = self.coeffs.iter().map(|c| c.clip(ctx)).collect();
        DiffOp::from_parts(self.level, coeffs, self.truncated, ctx)
    }

    pub fn is_exact(&self) -> bool {
        !self.truncated && self.coeffs.iter().all(|c| c.is_exact())
    }

    pub fn op_norm(&self) -> Norm {
        self.coeffs
            .iter()
            .map(|c| c.gauss_norm())
            .max()
            .unwrap_or(Norm::ZERO)
    }

    /// Largest order whose coefficient attains the operator norm.
    pub fn nbar(&self) -> Result<usize> {
        let n = self.op_norm();
        if n.is_zero() {
            return Err(Error::ZeroOperator);
        }
        Ok(self
            .coeffs
            .iter()
            .rposition(|c| c.gauss_norm() == n)
            .unwrap())
    }

    /// Dominant index of the coefficient at `nbar`.
    pub fn nk(&self) -> Result<usize> {
        let nb = self.nbar()?;
        self.coeffs[nb].n_index()
    }

    /// Both indices at once.
    pub fn indices(&self) -> Result<(usize, usize)> {
        Ok((self.nbar()?, self.nk()?))
    }

    fn check_level(&self, other: &Self) -> Result<()> {
        if self.level != other.level {
            return Err(Error::LevelMismatch(self.level, other.level));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self, ctx: &Context) -> Result<Self> {
        self.check_level(other)?;
        let len = self.coeffs.len().max(other.coeffs.len());
        let mut out = Vec::with_capacity(len);
        for n in 0..len {
            out.push(match (self.coeffs.get(n), other.coeffs.get(n)) {
                (Some(a), Some(b)) => a.add(b, ctx)?,
                (Some(a), None) => a.clone(),
                (None, Some(b)) => b.clone(),
                (None, None) => unreachable!(),
            });
        }
        Ok(DiffOp::from_parts(
            self.level,
            out,
            self.truncated || other.truncated,
            ctx,
        ))
    }

    pub fn neg(&self, ctx: &Context) -> Self {
        DiffOp {
            level: self.level,
            coeffs: self.coeffs.iter().map(|c| c.neg(ctx)).collect(),
            truncated: self.truncated,
        }
    }

    pub fn sub(&self, other: &Self, ctx: &Context) -> Result<Self> {
        self.add(&other.neg(ctx), ctx)
    }

    pub fn scale(&self, s: &PadicScalar, ctx: &Context) -> Result<Self> {
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| c.scale(s, ctx))
            .collect::<Result<_>>()?;
        Ok(DiffOp::from_parts(self.level, coeffs, self.truncated, ctx))
    }

    /// Projects every coefficient onto the capped lattice.
    pub fn project(&self, ctx: &Context) -> Result<Self> {
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| c.project(ctx))
            .collect::<Result<_>>()?;
        Ok(DiffOp::from_parts(self.level, coeffs, self.truncated, ctx))
    }

    /// Scales to norm one, returning the scaled operator and `log_p` of the factor removed.
    pub fn normalized(&self, ctx: &Context) -> Result<(Self, i64)> {
        let e = self.op_norm().log_p().ok_or(Error::ZeroOperator)?;
        Ok((self.scale(&PadicScalar::p_power(e), ctx)?, e))
    }

    /// Reduction mod `p` of the dominant coefficient of the normalized operator.
    pub fn dominant_residue(&self, ctx: &Context) -> Result<Vec<u64>> {
        let (n, _) = self.normalized(ctx)?;
        n.coeffs[n.nbar()?].reduce_mod_p(ctx)
    }

    /// Recenters at `t = c`: every coefficient `f(t)` becomes `f(t + c)`.
    pub fn translate(&self, c: &PadicScalar, ctx: &Context) -> Result<Self> {
        let coeffs = self
            .coeffs
            .iter()
            .map(|f| f.translate(c, ctx))
            .collect::<Result<_>>()?;
        Ok(DiffOp::from_parts(self.level, coeffs, self.truncated, ctx))
    }

    /// The operator `a * self`.
    pub fn left_mul_series(&self, a: &TateSeries, ctx: &Context) -> Result<Self> {
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| a.mul(c, ctx))
            .collect::<Result<_>>()?;
        Ok(DiffOp::from_parts(self.level, coeffs, self.truncated, ctx))
    }

    /// Multiplies each coefficient on the right by the function `s`, without commuting.
    pub(crate) fn coeffwise_mul(&self, s: &TateSeries, ctx: &Context) -> Result<Self> {
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| c.mul(s, ctx))
            .collect::<Result<_>>()?;
        Ok(DiffOp::from_parts(self.level, coeffs, self.truncated, ctx))
    }

    /// Composition `self * other`.
    pub fn op_mul(&self, other: &Self, ctx: &Context) -> Result<Self> {
        self.check_level(other)?;
        product(self, other, &Derivation { factor: None }, ctx)
    }

    /// Re-expresses the operator in the basis of powers of `p^target d/dt`.
    pub fn rescale_level(&self, target: u32, ctx: &Context) -> Result<Self> {
        if target == self.level {
            return Ok(self.clone());
        }
        let diff = self.level as i64 - target as i64;
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        for (n, a) in self.coeffs.iter().enumerate() {
            coeffs.push(a.mul_p_power(n as i64 * diff, ctx)?);
        }
        let out = DiffOp::from_parts(target, coeffs, self.truncated, ctx);
        if let Some(e) = out.op_norm().log_p() {
            if e > ctx.precision() as i64 {
                return Err(Error::NormOverflow(e));
            }
        }
        Ok(out)
    }

    /// The commutator `[self, t]`.
    pub fn bracket_t(&self, ctx: &Context) -> Result<Self> {
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        for (i, a) in self.coeffs.iter().enumerate().skip(1) {
            let f = PadicScalar::from_int(i as i64, ctx).mul_p_power(self.level as i64, ctx)?;
            coeffs.push(a.scale(&f, ctx)?);
        }
        Ok(DiffOp::from_parts(self.level, coeffs, self.truncated, ctx))
    }

    /// The commutator `[self, p^k d/dt]`.
    pub fn bracket_del(&self, ctx: &Context) -> Result<Self> {
        let f = PadicScalar::from_int(-1, ctx).mul_p_power(self.level as i64, ctx)?;
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        for a in &self.coeffs {
            coeffs.push(a.derivative(ctx)?.scale(&f, ctx)?);
        }
        Ok(DiffOp::from_parts(self.level, coeffs, self.truncated, ctx))
    }

    /// Two-sided inverse near the origin, valid when both indices vanish.
    pub fn op_invert(&self, ctx: &Context) -> Result<Self> {
        let (nbar, nk) = self.indices()?;
        if nbar > 0 || nk > 0 {
            return Err(Error::NotInvertible { nbar, nk });
        }
        let mut margin = 16;
        let mut last: Option<DiffOp> = None;
        for _ in 0..5 {
            let g = self
                .invert_within(&ctx.with_opmax(ctx.opmax() + margin)?)?
                .clip(ctx);
            if !g.truncated || last.as_ref().is_some_and(|h| h.eq_to_precision(&g, ctx)) {
                return Ok(g);
            }
            last = Some(g);
            margin *= 2;
        }
        Err(Error::precision("inverse still moving below the order cap"))
    }

    fn invert_within(&self, ctx: &Context) -> Result<Self> {
        let h = self.project(ctx)?;
        let s = h.coeffs[0].invert(ctx)?;
        let level = self.level;
        let mut g = DiffOp::function(s.clone(), level, ctx);
        let mut err = DiffOp::one(level, ctx).sub(&g.op_mul(&h, ctx)?, ctx)?;
        let limit = (ctx.precision() as usize + 2) * (ctx.opmax() + 2);
        for _ in 0..limit {
            if err.below_floor(ctx) {
                return Ok(g);
            }
            let delta = err.coeffwise_mul(&s, ctx)?;
            g = g.add(&delta, ctx)?;
            err = err.sub(&delta.op_mul(&h, ctx)?, ctx)?;
        }
        Err(Error::precision(
            "inverse iteration did not reach the floor",
        ))
    }

    /// Re-expresses the operator in powers of `p^k u d/dt`.
    pub fn rebase_derivation(&self, u: &TateSeries, ctx: &Context) -> Result<Self> {
        self.rebase_derivation_from(&TateSeries::one(ctx), u, ctx)
    }

    /// For an operator written in powers of `p^k c d/dt`, re-expresses it in powers of `p^k u c d/dt`.
    pub fn rebase_derivation_from(
        &self,
        current: &TateSeries,
        u: &TateSeries,
        ctx: &Context,
    ) -> Result<Self> {
        if !u.is_unit() || u.gauss_norm() != Norm::ONE {
            return Err(Error::NotAUnit);
        }
        let factor = u.mul(current, ctx)?;
        let derivation = Derivation {
            factor: Some(&factor),
        };
        let w = DiffOp::new(self.level, vec![TateSeries::zero(), u.invert(ctx)?], ctx);
        let mut acc = DiffOp::zero(self.level);
        for a in self.coeffs.iter().rev() {
            acc = product(&acc, &w, &derivation, ctx)?;
            acc = acc.add(&DiffOp::function(a.clone(), self.level, ctx), ctx)?;
        }
        acc.truncated |= self.truncated;
        Ok(acc)
    }

    /// True when every coefficient vanishes to the working precision.
    pub fn below_floor(&self, ctx: &Context) -> bool {
        self.coeffs.iter().all(|c| c.below_floor(ctx))
    }

    pub fn eq_to_precision(&self, other: &Self, ctx: &Context) -> bool {
        match self.sub(other, ctx) {
            Ok(d) => d.below_floor(ctx),
            Err(_) => false,
        }
    }

    /// Agreement up to `max(|other|, 1) * p^(guard - N_prec)`.
    pub fn close_to(&self, other: &Self, guard: u32, ctx: &Context) -> bool {
        let Ok(d) = self.sub(other, ctx) else {
            return false;
        };
        let scale = other.op_norm().log_p().unwrap_or(0).max(0);
        match d.op_norm().log_p() {
            None => true,
            Some(e) => e <= scale + guard as i64 - ctx.precision() as i64,
        }
    }

    /// Agreement to precision on every order up to `max_order`.
    pub fn agrees_through(&self, other: &Self, max_order: usize, ctx: &Context) -> bool {
        match self.sub(other, ctx) {
            Ok(d) => d
                .coeffs
                .iter()
                .take(max_order + 1)
                .all(|c| c.below_floor(ctx)),
            Err(_) => false,
        }
    }

    pub fn render(&self, ctx: &Context) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut parts = Vec::new();
        for (n, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let s = a.render(ctx);
            parts.push(match n {
                0 => format!("[{s}]"),
                _ => format!("[{s}]*D^{n}"),
            });
        }
        parts.join(" + ")
    }
}

/// Whether orders past the cap in `h q` can reach above the floor.
fn dropped_orders_matter(h: &DiffOp, q: &DiffOp, ctx: &Context) -> bool {
    h.coeffs.iter().enumerate().any(|(i, a)| {
        q.coeffs
            .iter()
            .enumerate()
            .skip((ctx.opmax() + 1).saturating_sub(i))
            .any(|(_, b)| match (a.bound(), b.bound()) {
                (Some(x), Some(y)) => x + y < ctx.n(),
                _ => false,
            })
    })
}

fn product(h: &DiffOp, q: &DiffOp, delta: &Derivation, ctx: &Context) -> Result<DiffOp> {
    let level = h.level;
    let truncated = h.truncated || q.truncated;
    let vanishes = |x: &DiffOp| x.coeffs.iter().all(|c| c.vanishes());
    if vanishes(h) || vanishes(q) {
        return Ok(DiffOp::from_parts(level, vec![], truncated, ctx));
    }
    let k = level as i64;
    let floor = ctx.precision() as i64;
    let dh = h.coeffs.len() - 1;
    let dq = q.coeffs.len() - 1;

    let mut derivs: Vec<Vec<TateSeries>> = Vec::with_capacity(dq + 1);
    for b in &q.coeffs {
        let mut row = vec![b.clone()];
        let mut cur = b.clone();
        for _ in 0..dh {
            cur = delta.apply(&cur, ctx)?.mul_p_power(k, ctx)?;
            if cur.vanishes() {
                break;
            }
            row.push(cur.clone());
        }
        derivs.push(row);
    }
    let binom = binomial_rows(dh, ctx);

    let top = (dh + dq).min(ctx.opmax());
    let orders: Vec<usize> = (0..=top).collect();
    let coefficient = |&u: &usize| -> Result<TateSeries> {
        let mut acc = TateSeries::zero();
        let mut lost = false;
        for (i, a) in h.coeffs.iter().enumerate() {
            let Some(va) = a.bound() else { continue };
            for (j, row) in derivs.iter().enumerate() {
                if i + j < u || i + j - u > i {
                    continue;
                }
                let l = i + j - u;
                let Some(d) = row.get(l) else { continue };
                let Some(vd) = d.bound() else { continue };
                let c = &binom[i][l];
                let vc = c.val().unwrap();
                if va + vc + vd >= floor && !(a.is_exact() && d.is_exact() && c.is_exact()) {
                    lost = true;
                    continue;
                }
                let term = a.mul(d, ctx)?.scale(c, ctx)?;
                acc = acc.add(&term, ctx)?;
            }
        }
        if lost {
            acc.mark_dropped();
        }
        Ok(acc)
    };
    let results = if (dh + 1) * (dq + 1) >= 16 {
        par::map(&orders, coefficient)
    } else {
        par::map_sequential(&orders, coefficient)
    };
    let coeffs = results.into_iter().collect::<Result<Vec<_>>>()?;
    let spill = dh + dq > ctx.opmax() && dropped_orders_matter(h, q, ctx);
    Ok(DiffOp::from_parts(level, coeffs, truncated || spill, ctx))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> Context {
        Context::new(5, 12, 16, 16).unwrap()
    }

    fn ints(level: u32, rows: &[&[i64]], c: &Context) -> DiffOp {
        DiffOp::new(
            level,
            rows.iter().map(|r| TateSeries::from_ints(r, c)).collect(),
            c,
        )
    }

    #[test]
    fn norm_examples() {
        let c = ctx();
        let h = ints(1, &[&[1], &[-1]], &c);
        assert_eq!((h.op_norm(), h.nbar(), h.nk()), (Norm::ONE, Ok(1), Ok(0)));
        let h0 = ints(0, &[&[1], &[-5]], &c);
        assert_eq!(
            (h0.op_norm(), h0.nbar(), h0.nk()),
            (Norm::ONE, Ok(0), Ok(0))
        );
        let h = ints(1, &[&[0, 5], &[0, 0, 1]], &c);
        assert_eq!((h.op_norm(), h.nbar(), h.nk()), (Norm::ONE, Ok(1), Ok(2)));
        assert_eq!(DiffOp::zero(0).nbar(), Err(Error::ZeroOperator));
    }

    #[test]
    fn leibniz_step() {
        let c = ctx();
        for k in 0..3 {
            let d = DiffOp::derivation(k, &c);
            let f = DiffOp::function(TateSeries::from_ints(&[5, 1], &c), k, &c);
            let prod = d.op_mul(&f, &c).unwrap();
            let pk = 5i64.pow(k);
            assert_eq!(prod, ints(k, &[&[pk], &[5, 1]], &c));
            assert_eq!(f.op_mul(&DiffOp::one(k, &c), &c).unwrap(), f);
        }
    }

    #[test]
    fn product_example_at_level_one() {
        let c = ctx();
        let a = ints(1, &[&[1], &[-1]], &c);
        let b = ints(1, &[&[1], &[-5]], &c);
        let ab = a.op_mul(&b, &c).unwrap();
        assert_eq!(ab, ints(1, &[&[1], &[-6], &[5]], &c));
        assert_eq!(
            (ab.op_norm(), ab.nbar(), ab.nk()),
            (Norm::ONE, Ok(1), Ok(0))
        );
    }

    #[test]
    fn level_mismatch() {
        let c = ctx();
        let a = DiffOp::one(0, &c);
        let b = DiffOp::one(1, &c);
        assert_eq!(a.op_mul(&b, &c), Err(Error::LevelMismatch(0, 1)));
    }

    #[test]
    fn rescale_examples() {
        let c = ctx();
        let d = DiffOp::derivation(0, &c).rescale_level(1, &c).unwrap();
        assert_eq!(d.level(), 1);
        assert_eq!(d.op_norm(), Norm::p_pow(1));
        assert_eq!(d.coeff(1).coeff(0), PadicScalar::p_power(-1));
        let h = ints(2, &[&[1, 1], &[3]], &c);
        assert_eq!(h.rescale_level(2, &c).unwrap(), h);
    }

    #[test]
    fn nbar_stabilizes_at_the_order() {
        let c = ctx();
        let lin = |e: u32| ints(0, &[&[1], &[-(5i64.pow(e))]], &c);
        let h = lin(1)
            .op_mul(&lin(2), &c)
            .unwrap()
            .op_mul(&lin(3), &c)
            .unwrap();
        let got: Vec<usize> = (0..5)
            .map(|k| h.rescale_level(k, &c).unwrap().nbar().unwrap())
            .collect();
        assert_eq!(got, vec![0, 1, 2, 3, 3]);
    }

    #[test]
    fn brackets() {
        let c = ctx();
        for k in 0..3 {
            let d2 = ints(k, &[&[], &[], &[1]], &c);
            assert_eq!(
                d2.bracket_t(&c).unwrap(),
                ints(k, &[&[], &[2 * 5i64.pow(k)]], &c)
            );
            let f = ints(k, &[&[3, 4]], &c);
            assert!(f.bracket_t(&c).unwrap().is_zero());
            let t2 = ints(k, &[&[0, 0, 1]], &c);
            assert_eq!(
                t2.bracket_del(&c).unwrap(),
                ints(k, &[&[0, -2 * 5i64.pow(k)]], &c)
            );
        }
    }

    #[test]
    fn brackets_match_commutators() {
        let c = ctx();
        let h = ints(1, &[&[1, 2], &[0, 3, 1], &[4]], &c);
        let t = ints(1, &[&[0, 1]], &c);
        let d = DiffOp::derivation(1, &c);
        let ct = h
            .op_mul(&t, &c)
            .unwrap()
            .sub(&t.op_mul(&h, &c).unwrap(), &c)
            .unwrap();
        assert_eq!(h.bracket_t(&c).unwrap(), ct);
        let cd = h
            .op_mul(&d, &c)
            .unwrap()
            .sub(&d.op_mul(&h, &c).unwrap(), &c)
            .unwrap();
        assert_eq!(h.bracket_del(&c).unwrap(), cd);
    }

    #[test]
    fn invert_examples() {
        let c = ctx();
        for k in 0..3 {
            let one = DiffOp::one(k, &c);
            assert!(one.op_invert(&c).unwrap().eq_to_precision(&one, &c));
            let h = ints(k, &[&[1], &[-5]], &c);
            let g = h.op_invert(&c).unwrap();
            for n in 0..=c.opmax() {
                let want = TateSeries::from_ints(&[5i64.pow(n as u32)], &c);
                assert!(g.coeff(n).eq_to_precision(&want, &c));
            }
            let bad = ints(k, &[&[0, 1], &[0, 1]], &c);
            assert!(matches!(
                bad.op_invert(&c),
                Err(Error::NotInvertible { .. })
            ));
        }
    }

    #[test]
    fn invert_with_series_lead() {
        let c = ctx();
        for k in 1..3 {
            let h = ints(k, &[&[1, 1, 3], &[0, 5], &[10]], &c);
            let g = h.op_invert(&c).unwrap();
            let one = DiffOp::one(k, &c);
            assert!(h.op_mul(&g, &c).unwrap().eq_to_precision(&one, &c));
            let gh = g.op_mul(&h, &c).unwrap();
            assert!(gh.agrees_through(&one, c.opmax() - 2, &c));
            assert_eq!(g.op_norm(), Norm::ONE);
        }
    }

    #[test]
    fn rebase_round_trip() {
        let c = ctx();
        let u = TateSeries::from_ints(&[1, 5], &c);
        let h = ints(1, &[&[0, 5], &[1, 0, 2], &[5]], &c);
        let r = h.rebase_derivation(&u, &c).unwrap();
        assert_eq!(r.op_norm(), h.op_norm());
        assert_eq!(r.indices(), h.indices());
        let back = r
            .rebase_derivation_from(&u, &u.invert(&c).unwrap(), &c)
            .unwrap();
        assert!(back.eq_to_precision(&h, &c));
        assert_eq!(h.rebase_derivation(&TateSeries::one(&c), &c).unwrap(), h);
    }
}
