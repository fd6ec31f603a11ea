//! Truncated Tate series in one variable.
//!
//! A series stores coefficients up to degree `T_deg` and a profile of what
//! the stored part may leave out: from degree `d` on, every missing term has
//! p-adic valuation at least `v`. Exact polynomials have an empty profile.
//! Bounds at or above the precision floor are negligible and discarded, so
//! an unknown tail that is multiplied by something small becomes determined.

use num_bigint::BigInt;

use crate::error::{Error, Result};
use crate::scalar::{Context, Norm, PadicScalar};

/// Valuation bound standing for "no bound".
const UNBOUNDED: i64 = i64::MIN / 4;

/// A power series `c_0 + c_1 t + ...` with p-adic coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct TateSeries {
    coeffs: Vec<PadicScalar>,
    /// Increasing degrees with strictly decreasing valuation bounds.
    noise: Vec<(usize, i64)>,
    dropped: bool,
}

/// Adds `term` into `acc`, treating loss of every digit as a dropped zero.
pub(crate) fn accumulate(
    acc: &mut PadicScalar,
    term: &PadicScalar,
    dropped: &mut bool,
    ctx: &Context,
) -> Result<()> {
    match acc.add(term, ctx) {
        Ok(x) => *acc = x,
        Err(Error::PrecisionExhausted(_)) => {
            *acc = PadicScalar::zero();
            *dropped = true;
        }
        Err(e) => return Err(e),
    }
    Ok(())
}

pub(crate) fn absorb(r: Result<PadicScalar>, dropped: &mut bool) -> Result<PadicScalar> {
    match r {
        Ok(x) => Ok(x),
        Err(Error::PrecisionExhausted(_)) => {
            *dropped = true;
            Ok(PadicScalar::zero())
        }
        Err(e) => Err(e),
    }
}

fn min_val(coeffs: &[PadicScalar]) -> Option<i64> {
    coeffs.iter().filter_map(|c| c.val()).min()
}

/// Sorts a profile and keeps only the entries that tighten nothing earlier.
fn normalize(mut noise: Vec<(usize, i64)>, floor: i64) -> Vec<(usize, i64)> {
    noise.sort_unstable();
    let mut out: Vec<(usize, i64)> = Vec::with_capacity(noise.len());
    let mut best = floor;
    for (d, v) in noise {
        if v < best {
            best = v;
            match out.last_mut() {
                Some(last) if last.0 == d => last.1 = v,
                _ => out.push((d, v)),
            }
        }
    }
    out
}

fn shift_bounds(noise: &[(usize, i64)], by: i64) -> Vec<(usize, i64)> {
    noise
        .iter()
        .map(|&(d, v)| (d, if v == UNBOUNDED { v } else { v + by }))
        .collect()
}

impl TateSeries {
    pub fn zero() -> Self {
        TateSeries::default()
    }

    pub fn constant(c: PadicScalar) -> Self {
        let coeffs = if c.is_zero() { vec![] } else { vec![c] };
        TateSeries {
            coeffs,
            noise: vec![],
            dropped: false,
        }
    }

    pub fn one(ctx: &Context) -> Self {
        TateSeries::constant(PadicScalar::from_int(1, ctx))
    }

    /// The series `c * t^deg`.
    pub fn monomial(c: PadicScalar, deg: usize, ctx: &Context) -> Self {
        let mut v = vec![PadicScalar::zero(); deg];
        v.push(c);
        TateSeries::from_coeffs(v, ctx)
    }

    /// An exact polynomial; degrees above `T_deg` are truncated.
    pub fn from_coeffs(coeffs: Vec<PadicScalar>, ctx: &Context) -> Self {
        TateSeries::from_parts(coeffs, vec![], false, ctx)
    }

    pub fn from_ints(coeffs: &[i64], ctx: &Context) -> Self {
        TateSeries::from_coeffs(
            coeffs
                .iter()
                .map(|&c| PadicScalar::from_int(c, ctx))
                .collect(),
            ctx,
        )
    }

    fn from_parts(
        mut coeffs: Vec<PadicScalar>,
        mut noise: Vec<(usize, i64)>,
        dropped: bool,
        ctx: &Context,
    ) -> Self {
        let cap = ctx.tdeg().saturating_add(1);
        let floor = ctx.precision() as i64;
        if coeffs.len() > cap {
            if let Some(v) = min_val(&coeffs[cap..]) {
                noise.push((cap, v));
            }
            coeffs.truncate(cap);
        }
        noise = normalize(noise, floor);
        if let Some(&(k, _)) = noise.first() {
            if coeffs.len() > k {
                for (i, c) in coeffs.iter().enumerate().skip(k) {
                    if let Some(v) = c.val() {
                        noise.push((i, v));
                    }
                }
                coeffs.truncate(k);
                noise = normalize(noise, floor);
            }
        }
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        TateSeries {
            coeffs,
            noise,
            dropped,
        }
    }

    pub fn coeffs(&self) -> &[PadicScalar] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> PadicScalar {
        self.coeffs.get(i).cloned().unwrap_or_default()
    }

    /// Highest stored nonzero degree.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// No stored coefficient; the series may still carry an unknown tail.
    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Zero with nothing unknown.
    pub(crate) fn vanishes(&self) -> bool {
        self.coeffs.is_empty() && self.noise.is_empty()
    }

    /// `None` when determined in every degree, `Some(n)` when known modulo `t^n`.
    pub fn known(&self) -> Option<usize> {
        self.noise.first().map(|e| e.0)
    }

    /// Lower bound on the valuation of every coefficient, stored or not.
    pub(crate) fn bound(&self) -> Option<i64> {
        let noise = self.noise.iter().map(|e| e.1).min();
        match (min_val(&self.coeffs), noise) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }

    /// True when a coefficient was lost below the precision floor.
    pub fn dropped(&self) -> bool {
        self.dropped
    }

    /// Exact polynomial with exact rational coefficients.
    pub fn is_exact(&self) -> bool {
        self.noise.is_empty() && self.coeffs.iter().all(|c| c.is_exact())
    }

    /// The same series under the degree cap of `ctx`.
    pub(crate) fn clip(&self, ctx: &Context) -> Self {
        TateSeries::from_parts(self.coeffs.clone(), self.noise.clone(), self.dropped, ctx)
    }

    /// The stored part taken as an exact polynomial.
    pub(crate) fn stored(&self) -> Self {
        TateSeries {
            coeffs: self.coeffs.clone(),
            noise: vec![],
            dropped: self.dropped,
        }
    }

    pub(crate) fn mark_dropped(&mut self) {
        self.dropped = true;
    }

    /// t-adic valuation of the stored part.
    pub fn val_t(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    pub fn gauss_norm(&self) -> Norm {
        self.coeffs
            .iter()
            .map(|c| c.norm())
            .max()
            .unwrap_or(Norm::ZERO)
    }

    /// Least index whose coefficient attains the Gauss norm.
    pub fn n_index(&self) -> Result<usize> {
        let n = self.gauss_norm();
        if n.is_zero() {
            return Err(Error::ZeroInput);
        }
        Ok(self.coeffs.iter().position(|c| c.norm() == n).unwrap())
    }

    /// Largest index whose coefficient attains the Gauss norm.
    pub fn top_index(&self) -> Result<usize> {
        let n = self.gauss_norm();
        if n.is_zero() {
            return Err(Error::ZeroInput);
        }
        Ok(self.coeffs.iter().rposition(|c| c.norm() == n).unwrap())
    }

    /// Unit of the local ring: dominant constant term.
    pub fn is_unit(&self) -> bool {
        matches!(self.n_index(), Ok(0))
    }

    pub fn neg(&self, ctx: &Context) -> Self {
        TateSeries {
            coeffs: self.coeffs.iter().map(|c| c.neg(ctx)).collect(),
            noise: self.noise.clone(),
            dropped: self.dropped,
        }
    }

    pub fn add(&self, other: &Self, ctx: &Context) -> Result<Self> {
        let mut noise = self.noise.clone();
        noise.extend_from_slice(&other.noise);
        let len = self.coeffs.len().max(other.coeffs.len());
        let mut dropped = self.dropped || other.dropped;
        let mut out = Vec::with_capacity(len);
        for i in 0..len {
            let mut c = self.coeff(i);
            if let Some(d) = other.coeffs.get(i) {
                accumulate(&mut c, d, &mut dropped, ctx)?;
            }
            out.push(c);
        }
        Ok(TateSeries::from_parts(out, noise, dropped, ctx))
    }

    pub fn sub(&self, other: &Self, ctx: &Context) -> Result<Self> {
        self.add(&other.neg(ctx), ctx)
    }

    pub fn scale(&self, s: &PadicScalar, ctx: &Context) -> Result<Self> {
        let Some(vs) = s.val() else {
            return Ok(TateSeries::zero());
        };
        let mut dropped = self.dropped;
        let mut out = Vec::with_capacity(self.coeffs.len());
        for c in &self.coeffs {
            out.push(absorb(c.mul(s, ctx), &mut dropped)?);
        }
        Ok(TateSeries::from_parts(
            out,
            shift_bounds(&self.noise, vs),
            dropped,
            ctx,
        ))
    }

    pub fn mul_p_power(&self, e: i64, ctx: &Context) -> Result<Self> {
        let mut dropped = self.dropped;
        let mut out = Vec::with_capacity(self.coeffs.len());
        for c in &self.coeffs {
            out.push(absorb(c.mul_p_power(e, ctx), &mut dropped)?);
        }
        Ok(TateSeries::from_parts(
            out,
            shift_bounds(&self.noise, e),
            dropped,
            ctx,
        ))
    }

    /// Lower bound on the t-adic valuation, counting an unknown zero as `t^known`.
    fn t_floor(&self) -> usize {
        self.val_t().or(self.known()).unwrap_or(0)
    }

    /// What the unknown tail of `self` contributes to `self * other`.
    fn noise_times(&self, other: &Self) -> Vec<(usize, i64)> {
        let Some(b) = other.bound() else {
            return vec![];
        };
        self.noise
            .iter()
            .map(|&(d, v)| (d + other.t_floor(), if v == UNBOUNDED { v } else { v + b }))
            .collect()
    }

    pub fn mul(&self, other: &Self, ctx: &Context) -> Result<Self> {
        let mut dropped = self.dropped || other.dropped;
        let mut noise = self.noise_times(other);
        noise.extend(other.noise_times(self));
        let noise = normalize(noise, ctx.precision() as i64);
        if self.is_zero() || other.is_zero() {
            return Ok(TateSeries::from_parts(vec![], noise, dropped, ctx));
        }
        let full = self.coeffs.len() + other.coeffs.len() - 1;
        let mut len = full.min(ctx.tdeg() + 1);
        let mut extra = noise;
        if let Some(k) = extra.first().map(|e| e.0) {
            len = len.min(k);
        }
        if full > len {
            let v = min_val(&self.coeffs).unwrap() + min_val(&other.coeffs).unwrap();
            extra.push((len, v));
        }
        let mut out = vec![PadicScalar::zero(); len];
        for (i, a) in self.coeffs.iter().enumerate() {
            if i >= len || a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if i + j >= len {
                    break;
                }
                if b.is_zero() {
                    continue;
                }
                let prod = absorb(a.mul(b, ctx), &mut dropped)?;
                accumulate(&mut out[i + j], &prod, &mut dropped, ctx)?;
            }
        }
        Ok(TateSeries::from_parts(out, extra, dropped, ctx))
    }

    /// Termwise derivative `d/dt`.
    pub fn derivative(&self, ctx: &Context) -> Result<Self> {
        let mut dropped = self.dropped;
        let mut out = Vec::with_capacity(self.coeffs.len().saturating_sub(1));
        for (i, c) in self.coeffs.iter().enumerate().skip(1) {
            out.push(absorb(
                c.mul(&PadicScalar::from_int(i as i64, ctx), ctx),
                &mut dropped,
            )?);
        }
        let noise = self
            .noise
            .iter()
            .map(|&(d, v)| (d.saturating_sub(1), v))
            .collect();
        Ok(TateSeries::from_parts(out, noise, dropped, ctx))
    }

    /// Inverse in the local ring; requires a dominant nonzero constant term.
    pub fn invert(&self, ctx: &Context) -> Result<Self> {
        match self.n_index() {
            Ok(0) => {}
            _ => return Err(Error::NotAUnit),
        }
        let c0inv = self.coeffs[0].inv(ctx)?;
        if self.coeffs.len() == 1 && self.noise.is_empty() {
            return Ok(TateSeries::constant(c0inv));
        }
        let mut len = ctx.tdeg() + 1;
        if let Some(k) = self.known() {
            len = len.min(k);
        }
        let v0 = self.coeffs[0].val().unwrap();
        let tail = if self.noise.iter().all(|e| e.1 >= v0) {
            -v0
        } else {
            UNBOUNDED
        };
        let mut dropped = self.dropped;
        let mut g: Vec<PadicScalar> = Vec::with_capacity(len);
        g.push(c0inv.clone());
        let minus_c0inv = c0inv.neg(ctx);
        for n in 1..len {
            let mut acc = PadicScalar::zero();
            for i in 1..=n.min(self.coeffs.len() - 1) {
                let ci = &self.coeffs[i];
                if ci.is_zero() || g[n - i].is_zero() {
                    continue;
                }
                let prod = absorb(ci.mul(&g[n - i], ctx), &mut dropped)?;
                accumulate(&mut acc, &prod, &mut dropped, ctx)?;
            }
            g.push(absorb(acc.mul(&minus_c0inv, ctx), &mut dropped)?);
        }
        Ok(TateSeries::from_parts(g, vec![(len, tail)], dropped, ctx))
    }

    /// Coefficients of degree `< n` as an exact-support polynomial.
    pub fn low_part(&self, n: usize, ctx: &Context) -> Self {
        let v: Vec<_> = self.coeffs.iter().take(n).cloned().collect();
        let noise = self.noise.iter().copied().filter(|e| e.0 < n).collect();
        TateSeries::from_parts(v, noise, self.dropped, ctx)
    }

    /// The series `(self - low_part(n)) / t^n`.
    pub fn shift_down(&self, n: usize, ctx: &Context) -> Self {
        let v: Vec<_> = self.coeffs.iter().skip(n).cloned().collect();
        let noise = self
            .noise
            .iter()
            .map(|&(d, v)| (d.saturating_sub(n), v))
            .collect();
        TateSeries::from_parts(v, noise, self.dropped, ctx)
    }

    /// Multiplication by `t^n`.
    pub fn shift_up(&self, n: usize, ctx: &Context) -> Self {
        let mut v = vec![PadicScalar::zero(); n];
        v.extend(self.coeffs.iter().cloned());
        let noise = self.noise.iter().map(|&(d, v)| (d + n, v)).collect();
        TateSeries::from_parts(v, noise, self.dropped, ctx)
    }

    /// Projects exact coefficients onto the capped lattice, dropping those below the floor.
    pub fn project(&self, ctx: &Context) -> Result<Self> {
        let mut dropped = self.dropped;
        let mut out = Vec::with_capacity(self.coeffs.len());
        for c in &self.coeffs {
            out.push(absorb(c.project(ctx), &mut dropped)?);
        }
        Ok(TateSeries::from_parts(
            out,
            self.noise.clone(),
            dropped,
            ctx,
        ))
    }

    /// Residues mod p of an integral series.
    pub fn reduce_mod_p(&self, ctx: &Context) -> Result<Vec<u64>> {
        let mut v = self
            .coeffs
            .iter()
            .map(|c| c.residue(ctx))
            .collect::<Result<Vec<_>>>()?;
        while v.last() == Some(&0) {
            v.pop();
        }
        Ok(v)
    }

    /// The exact polynomial `f(t + c)`.
    pub fn translate(&self, c: &PadicScalar, ctx: &Context) -> Result<Self> {
        if c.is_zero() {
            return Ok(self.clone());
        }
        if !self.noise.is_empty() {
            return Err(Error::precision("translation of a truncated series"));
        }
        let lin = TateSeries::from_coeffs(vec![c.clone(), PadicScalar::from_int(1, ctx)], ctx);
        let mut acc = TateSeries::zero();
        for coef in self.coeffs.iter().rev() {
            acc = acc
                .mul(&lin, ctx)?
                .add(&TateSeries::constant(coef.clone()), ctx)?;
        }
        Ok(acc)
    }

    /// Scales to Gauss norm one, returning the scaled series and `log_p` of the factor removed.
    pub fn normalized(&self, ctx: &Context) -> Result<(Self, i64)> {
        let e = self.gauss_norm().log_p().ok_or(Error::ZeroInput)?;
        Ok((self.mul_p_power(e, ctx)?, e))
    }

    /// True when `self - other` vanishes on every degree both determine.
    pub fn eq_to_precision(&self, other: &Self, ctx: &Context) -> bool {
        match self.sub(other, ctx) {
            Ok(d) => d.below_floor(ctx),
            Err(_) => false,
        }
    }

    /// True when every stored coefficient vanishes to the working precision.
    pub fn below_floor(&self, ctx: &Context) -> bool {
        self.coeffs
            .iter()
            .all(|c| c.val().is_none_or(|v| v >= ctx.precision() as i64))
    }

    pub fn render(&self, ctx: &Context) -> String {
        if self.is_zero() {
            return match self.known() {
                Some(k) => format!("O(t^{k})"),
                None => "0".into(),
            };
        }
        let mut parts = Vec::new();
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let s = c.render(ctx);
            parts.push(match i {
                0 => format!("({s})"),
                1 => format!("({s})*t"),
                _ => format!("({s})*t^{i}"),
            });
        }
        let mut out = parts.join(" + ");
        if let Some(k) = self.known() {
            out.push_str(&format!(" + O(t^{k})"));
        }
        out
    }

    /// Integer coefficients modulo `p^digits` for an integral series.
    pub fn lift_mod(&self, digits: u32, ctx: &Context) -> Result<Vec<BigInt>> {
        self.coeffs
            .iter()
            .map(|c| c.lift_mod(digits, ctx))
            .collect()
    }
}
