//! Exact and capped-precision p-adic scalars, plus the arithmetic context.
//!
//! A [`PadicScalar`] is either an exact rational (kept as numerator and
//! denominator with the p-part split off) or a capped value `p^v * u` whose
//! unit `u` is known modulo `p^r`, where `r = N_prec - min(v, 0)`. Exact
//! values stay exact under exact arithmetic and are projected to capped form
//! only when they meet a capped operand.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};

const SMALL_LIMIT: u64 = 1 << 62;

/// Session-wide arithmetic parameters.
#[derive(Clone)]
pub struct Context {
    prime: u64,
    precision: u32,
    tdeg: usize,
    opmax: usize,
    small_pows: Arc<Vec<u64>>,
    big_pows: Arc<Vec<BigInt>>,
}

impl fmt::Debug for Context {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Context")
            .field("prime", &self.prime)
            .field("precision", &self.precision)
            .field("tdeg", &self.tdeg)
            .field("opmax", &self.opmax)
            .finish()
    }
}

impl PartialEq for Context {
    fn eq(&self, other: &Self) -> bool {
        self.prime == other.prime
            && self.precision == other.precision
            && self.tdeg == other.tdeg
            && self.opmax == other.opmax
    }
}

impl Eq for Context {}

impl Default for Context {
    fn default() -> Self {
        Context::new(5, 40, 64, 64).expect("default context is valid")
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

impl Context {
    /// Builds a context; `prime` must be prime and the other caps positive.
    pub fn new(prime: u64, precision: u32, tdeg: usize, opmax: usize) -> Result<Self> {
        if !is_prime(prime) {
            return Err(Error::InvalidContext(format!("{prime} is not prime")));
        }
        if precision == 0 || tdeg == 0 || opmax == 0 {
            return Err(Error::InvalidContext(
                "precision, tdeg and opmax must be positive".into(),
            ));
        }
        if prime >= SMALL_LIMIT {
            return Err(Error::InvalidContext(format!("{prime} is too large")));
        }
        let mut small = vec![1u64];
        while let Some(next) = small.last().unwrap().checked_mul(prime) {
            if next >= SMALL_LIMIT {
                break;
            }
            small.push(next);
        }
        let cap = 4 * precision as usize + 8;
        let mut big = Vec::with_capacity(cap + 1);
        let pb = BigInt::from(prime);
        let mut acc = BigInt::one();
        for _ in 0..=cap {
            big.push(acc.clone());
            acc *= &pb;
        }
        Ok(Context {
            prime,
            precision,
            tdeg,
            opmax,
            small_pows: Arc::new(small),
            big_pows: Arc::new(big),
        })
    }

    /// Defaults overridden by `DCONGR_PRIME` and `DCONGR_PREC` when set.
    pub fn from_env() -> Result<Self> {
        let d = Context::default();
        let prime = match std::env::var("DCONGR_PRIME") {
            Ok(s) => s
                .trim()
                .parse()
                .map_err(|_| Error::InvalidContext(format!("DCONGR_PRIME={s}")))?,
            Err(_) => d.prime,
        };
        let prec = match std::env::var("DCONGR_PREC") {
            Ok(s) => s
                .trim()
                .parse()
                .map_err(|_| Error::InvalidContext(format!("DCONGR_PREC={s}")))?,
            Err(_) => d.precision,
        };
        Context::new(prime, prec, d.tdeg, d.opmax)
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    /// Absolute precision `N_prec`.
    pub fn precision(&self) -> u32 {
        self.precision
    }

    /// Largest stored t-degree.
    pub fn tdeg(&self) -> usize {
        self.tdeg
    }

    /// Largest stored operator order.
    pub fn opmax(&self) -> usize {
        self.opmax
    }

    pub fn with_precision(&self, precision: u32) -> Result<Self> {
        Context::new(self.prime, precision, self.tdeg, self.opmax)
    }

    pub fn with_tdeg(&self, tdeg: usize) -> Result<Self> {
        Context::new(self.prime, self.precision, tdeg, self.opmax)
    }

    pub fn with_opmax(&self, opmax: usize) -> Result<Self> {
        Context::new(self.prime, self.precision, self.tdeg, opmax)
    }

    pub(crate) fn n(&self) -> i64 {
        self.precision as i64
    }

    /// `p^e` as a big integer.
    pub fn pow_big(&self, e: u32) -> BigInt {
        match self.big_pows.get(e as usize) {
            Some(x) => x.clone(),
            None => num_traits::pow(BigInt::from(self.prime), e as usize),
        }
    }

    fn small_pow(&self, e: u32) -> Option<u64> {
        self.small_pows.get(e as usize).copied()
    }

    /// Relative digits carried by a capped unit at valuation `v`.
    fn rel(&self, v: i64) -> u32 {
        (self.n() - v.min(0)) as u32
    }
}

/// Valuation of a scalar: an integer or `+inf` for zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Valuation {
    Finite(i64),
    Infinite,
}

impl Valuation {
    pub fn finite(self) -> Option<i64> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinite => None,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Infinite => write!(f, "+inf"),
        }
    }
}

/// A magnitude `p^e` or zero, ordered as real numbers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Norm(Option<i64>);

impl Norm {
    pub const ZERO: Norm = Norm(None);
    pub const ONE: Norm = Norm(Some(0));

    /// The magnitude `p^e`.
    pub fn p_pow(e: i64) -> Norm {
        Norm(Some(e))
    }

    pub fn from_valuation(v: Valuation) -> Norm {
        match v {
            Valuation::Finite(v) => Norm(Some(-v)),
            Valuation::Infinite => Norm(None),
        }
    }

    /// `log_p` of the magnitude, `None` for zero.
    pub fn log_p(self) -> Option<i64> {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0.is_none()
    }

    pub fn inv(self) -> Option<Norm> {
        self.0.map(|e| Norm(Some(-e)))
    }
}

impl std::ops::Mul for Norm {
    type Output = Norm;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn mul(self, rhs: Norm) -> Norm {
        match (self.0, rhs.0) {
            (Some(a), Some(b)) => Norm(Some(a + b)),
            _ => Norm(None),
        }
    }
}

impl fmt::Display for Norm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            None => write!(f, "0"),
            Some(0) => write!(f, "1"),
            Some(e) => write!(f, "p^{e}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Digits {
    Small(u64),
    Big(BigInt),
}

impl Digits {
    fn to_big(&self) -> BigInt {
        match self {
            Digits::Small(x) => BigInt::from(*x),
            Digits::Big(x) => x.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Repr {
    Zero,
    /// `p^v * num / den`, both coprime to p, `den > 0`, reduced.
    Exact {
        v: i64,
        num: BigInt,
        den: BigInt,
    },
    /// `p^v * unit` with the unit coprime to p and below `p^rel(v)`.
    Capped {
        v: i64,
        unit: Digits,
    },
}

/// An element of `Q_p`, exact or known to absolute precision `N_prec`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PadicScalar(Repr);

impl Default for PadicScalar {
    fn default() -> Self {
        PadicScalar(Repr::Zero)
    }
}

/// The modulus `p^r` in whichever width fits.
enum Modulus {
    Small(u64),
    Big(BigInt),
}

fn modulus(ctx: &Context, r: u32) -> Modulus {
    match ctx.small_pow(r) {
        Some(m) => Modulus::Small(m),
        None => Modulus::Big(ctx.pow_big(r)),
    }
}

fn split_p(x: &mut BigInt, p: u64) -> i64 {
    let mut k = 0;
    loop {
        let (q, r) = x.div_rem(&BigInt::from(p));
        if !r.is_zero() {
            return k;
        }
        *x = q;
        k += 1;
    }
}

fn split_p_u(x: &mut u128, p: u64) -> i64 {
    let p = p as u128;
    let mut k = 0;
    while x.is_multiple_of(p) {
        *x /= p;
        k += 1;
    }
    k
}

fn inv_mod_u64(a: u64, m: u64) -> u64 {
    let (mut r0, mut r1) = (m as i128, (a % m) as i128);
    let (mut s0, mut s1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    debug_assert_eq!(r0, 1);
    s0.rem_euclid(m as i128) as u64
}

fn inv_mod_big(a: &BigInt, m: &BigInt) -> BigInt {
    a.mod_floor(m)
        .modinv(m)
        .expect("unit is invertible modulo a prime power")
}

impl PadicScalar {
    pub fn zero() -> Self {
        PadicScalar(Repr::Zero)
    }

    pub fn one() -> Self {
        PadicScalar::from_int(1, &Context::default())
    }

    /// An exact integer.
    pub fn from_int(n: i64, ctx: &Context) -> Self {
        PadicScalar::from_bigint(BigInt::from(n), ctx)
    }

    pub fn from_bigint(n: BigInt, ctx: &Context) -> Self {
        Self::exact_parts(0, n, BigInt::one(), ctx.prime)
    }

    /// The exact rational `num / den`.
    pub fn from_ratio(num: BigInt, den: BigInt, ctx: &Context) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Self::exact_parts(0, num, den, ctx.prime))
    }

    /// The exact power `p^e`.
    pub fn p_power(e: i64) -> Self {
        PadicScalar(Repr::Exact {
            v: e,
            num: BigInt::one(),
            den: BigInt::one(),
        })
    }

    /// A capped value `p^v * unit` known to the context precision.
    pub fn capped(v: i64, unit: BigInt, ctx: &Context) -> Result<Self> {
        let r = ctx.rel(v);
        Self::make_capped(v, unit, r as i64, ctx)
    }

    fn exact_parts(v: i64, num: BigInt, den: BigInt, p: u64) -> Self {
        if num.is_zero() {
            return PadicScalar(Repr::Zero);
        }
        let g = num.gcd(&den);
        let (mut num, mut den) = (num / &g, den / &g);
        if den.is_negative() {
            num = -num;
            den = -den;
        }
        let vn = split_p(&mut num, p);
        let vd = split_p(&mut den, p);
        PadicScalar(Repr::Exact {
            v: v + vn - vd,
            num,
            den,
        })
    }

    /// `p^v0 * m`, with `m` meaningful modulo `p^avail`.
    fn make_capped(v0: i64, m: BigInt, avail: i64, ctx: &Context) -> Result<Self> {
        if avail <= 0 {
            return Err(Error::precision("no digits left"));
        }
        let p = ctx.prime;
        match ctx.small_pow(avail as u32) {
            Some(md) => {
                let r = m.mod_floor(&BigInt::from(md)).to_u64().unwrap();
                Self::make_capped_small(v0, r as u128, avail, ctx)
            }
            None => {
                let mut r = m.mod_floor(&ctx.pow_big(avail as u32));
                if r.is_zero() {
                    return Err(Error::precision("total cancellation"));
                }
                let o = split_p(&mut r, p);
                let v = v0 + o;
                if v >= ctx.n() {
                    return Err(Error::precision("value below the precision floor"));
                }
                let rel = ctx.rel(v);
                Ok(PadicScalar(Repr::Capped {
                    v,
                    unit: Self::digits_from_big(r, rel, ctx),
                }))
            }
        }
    }

    fn make_capped_small(v0: i64, mut m: u128, avail: i64, ctx: &Context) -> Result<Self> {
        if m == 0 {
            return Err(Error::precision("total cancellation"));
        }
        let o = split_p_u(&mut m, ctx.prime);
        let _ = avail;
        let v = v0 + o;
        if v >= ctx.n() {
            return Err(Error::precision("value below the precision floor"));
        }
        let rel = ctx.rel(v);
        let unit = match modulus(ctx, rel) {
            Modulus::Small(md) => Digits::Small((m % md as u128) as u64),
            Modulus::Big(md) => Digits::Big(BigInt::from(m).mod_floor(&md)),
        };
        Ok(PadicScalar(Repr::Capped { v, unit }))
    }

    fn digits_from_big(x: BigInt, rel: u32, ctx: &Context) -> Digits {
        match modulus(ctx, rel) {
            Modulus::Small(md) => Digits::Small(x.mod_floor(&BigInt::from(md)).to_u64().unwrap()),
            Modulus::Big(md) => Digits::Big(x.mod_floor(&md)),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.0, Repr::Zero)
    }

    /// True for values carried as exact rationals (including zero).
    pub fn is_exact(&self) -> bool {
        !matches!(self.0, Repr::Capped { .. })
    }

    pub fn valuation(&self) -> Valuation {
        match &self.0 {
            Repr::Zero => Valuation::Infinite,
            Repr::Exact { v, .. } | Repr::Capped { v, .. } => Valuation::Finite(*v),
        }
    }

    /// Finite valuation, `None` for zero.
    pub fn val(&self) -> Option<i64> {
        self.valuation().finite()
    }

    pub fn norm(&self) -> Norm {
        Norm::from_valuation(self.valuation())
    }

    /// Unit part modulo `p^r` as a canonical residue.
    fn unit_mod(&self, r: u32, ctx: &Context) -> Digits {
        match &self.0 {
            Repr::Zero => Digits::Small(0),
            Repr::Exact { num, den, .. } => match modulus(ctx, r) {
                Modulus::Small(md) => {
                    let n = num.mod_floor(&BigInt::from(md)).to_u64().unwrap();
                    if den.is_one() {
                        Digits::Small(n)
                    } else {
                        let d = den.mod_floor(&BigInt::from(md)).to_u64().unwrap();
                        let di = inv_mod_u64(d, md);
                        Digits::Small(((n as u128 * di as u128) % md as u128) as u64)
                    }
                }
                Modulus::Big(md) => {
                    if den.is_one() {
                        Digits::Big(num.mod_floor(&md))
                    } else {
                        Digits::Big((num * inv_mod_big(den, &md)).mod_floor(&md))
                    }
                }
            },
            Repr::Capped { unit, .. } => match modulus(ctx, r) {
                Modulus::Small(md) => match unit {
                    Digits::Small(u) => Digits::Small(u % md),
                    Digits::Big(u) => {
                        Digits::Small(u.mod_floor(&BigInt::from(md)).to_u64().unwrap())
                    }
                },
                Modulus::Big(md) => Digits::Big(unit.to_big().mod_floor(&md)),
            },
        }
    }

    /// Absolute precision of a capped value; `None` when exact.
    fn abs_prec(&self, ctx: &Context) -> Option<i64> {
        match &self.0 {
            Repr::Capped { v, .. } => Some(v + ctx.rel(*v) as i64),
            _ => None,
        }
    }

    /// Projects an exact value onto the capped lattice.
    pub fn project(&self, ctx: &Context) -> Result<Self> {
        match &self.0 {
            Repr::Exact { v, .. } => {
                if *v >= ctx.n() {
                    return Err(Error::precision("value below the precision floor"));
                }
                let r = ctx.rel(*v);
                Ok(PadicScalar(Repr::Capped {
                    v: *v,
                    unit: self.unit_mod(r, ctx),
                }))
            }
            _ => Ok(self.clone()),
        }
    }

    pub fn neg(&self, ctx: &Context) -> Self {
        match &self.0 {
            Repr::Zero => self.clone(),
            Repr::Exact { v, num, den } => PadicScalar(Repr::Exact {
                v: *v,
                num: -num,
                den: den.clone(),
            }),
            Repr::Capped { v, unit } => {
                let r = ctx.rel(*v);
                let unit = match (modulus(ctx, r), unit) {
                    (Modulus::Small(md), Digits::Small(u)) => Digits::Small(md - u),
                    (Modulus::Big(md), u) => Digits::Big(md - u.to_big()),
                    (Modulus::Small(md), Digits::Big(u)) => {
                        Digits::Small(md - u.mod_floor(&BigInt::from(md)).to_u64().unwrap())
                    }
                };
                PadicScalar(Repr::Capped { v: *v, unit })
            }
        }
    }

    pub fn add(&self, other: &Self, ctx: &Context) -> Result<Self> {
        let (v1, v2) = match (&self.0, &other.0) {
            (Repr::Zero, _) => return Ok(other.clone()),
            (_, Repr::Zero) => return Ok(self.clone()),
            (
                Repr::Exact {
                    v: v1,
                    num: n1,
                    den: d1,
                },
                Repr::Exact {
                    v: v2,
                    num: n2,
                    den: d2,
                },
            ) => {
                let vm = (*v1).min(*v2);
                let a = n1 * d2 * ctx.pow_big((*v1 - vm) as u32);
                let b = n2 * d1 * ctx.pow_big((*v2 - vm) as u32);
                return Ok(Self::exact_parts(vm, a + b, d1 * d2, ctx.prime));
            }
            _ => (self.val().unwrap(), other.val().unwrap()),
        };
        let vmin = v1.min(v2);
        let a = match (self.abs_prec(ctx), other.abs_prec(ctx)) {
            (Some(x), Some(y)) => x.min(y),
            (Some(x), None) | (None, Some(x)) => x,
            (None, None) => unreachable!(),
        };
        let digits = a - vmin;
        if digits <= 0 {
            return Err(Error::precision("no digits left"));
        }
        let shift1 = v1 - vmin;
        let shift2 = v2 - vmin;
        if let Some(md) = ctx.small_pow(digits as u32) {
            let term = |x: &Self, shift: i64| -> u128 {
                if shift >= digits {
                    return 0;
                }
                let Digits::Small(u) = x.unit_mod((digits - shift) as u32, ctx) else {
                    unreachable!()
                };
                u as u128 * ctx.small_pow(shift as u32).unwrap() as u128
            };
            let s = (term(self, shift1) + term(other, shift2)) % md as u128;
            return Self::make_capped_small(vmin, s, digits, ctx);
        }
        let term = |x: &Self, shift: i64| -> BigInt {
            if shift >= digits {
                return BigInt::zero();
            }
            x.unit_mod((digits - shift) as u32, ctx).to_big() * ctx.pow_big(shift as u32)
        };
        let s = term(self, shift1) + term(other, shift2);
        Self::make_capped(vmin, s, digits, ctx)
    }

    pub fn sub(&self, other: &Self, ctx: &Context) -> Result<Self> {
        self.add(&other.neg(ctx), ctx)
    }

    pub fn mul(&self, other: &Self, ctx: &Context) -> Result<Self> {
        match (&self.0, &other.0) {
            (Repr::Zero, _) | (_, Repr::Zero) => Ok(PadicScalar::zero()),
            (
                Repr::Exact {
                    v: v1,
                    num: n1,
                    den: d1,
                },
                Repr::Exact {
                    v: v2,
                    num: n2,
                    den: d2,
                },
            ) => {
                let g1 = n1.gcd(d2);
                let g2 = n2.gcd(d1);
                Ok(PadicScalar(Repr::Exact {
                    v: v1 + v2,
                    num: (n1 / &g1) * (n2 / &g2),
                    den: (d1 / &g2) * (d2 / &g1),
                }))
            }
            _ => {
                let v = self.val().unwrap() + other.val().unwrap();
                if v >= ctx.n() {
                    return Err(Error::precision("product below the precision floor"));
                }
                let r = ctx.rel(v);
                let unit = match modulus(ctx, r) {
                    Modulus::Small(md) => {
                        let (Digits::Small(a), Digits::Small(b)) =
                            (self.unit_mod(r, ctx), other.unit_mod(r, ctx))
                        else {
                            unreachable!()
                        };
                        Digits::Small(((a as u128 * b as u128) % md as u128) as u64)
                    }
                    Modulus::Big(md) => Digits::Big(
                        (self.unit_mod(r, ctx).to_big() * other.unit_mod(r, ctx).to_big())
                            .mod_floor(&md),
                    ),
                };
                Ok(PadicScalar(Repr::Capped { v, unit }))
            }
        }
    }

    pub fn inv(&self, ctx: &Context) -> Result<Self> {
        match &self.0 {
            Repr::Zero => Err(Error::DivisionByZero),
            Repr::Exact { v, num, den } => {
                let (mut n, mut d) = (den.clone(), num.clone());
                if d.is_negative() {
                    n = -n;
                    d = -d;
                }
                Ok(PadicScalar(Repr::Exact {
                    v: -v,
                    num: n,
                    den: d,
                }))
            }
            Repr::Capped { v, .. } => {
                let w = -v;
                if w >= ctx.n() {
                    return Err(Error::precision("inverse below the precision floor"));
                }
                let r = ctx.rel(w);
                let unit = match (modulus(ctx, r), self.unit_mod(r, ctx)) {
                    (Modulus::Small(md), Digits::Small(u)) => Digits::Small(inv_mod_u64(u, md)),
                    (Modulus::Big(md), u) => Digits::Big(inv_mod_big(&u.to_big(), &md)),
                    _ => unreachable!(),
                };
                Ok(PadicScalar(Repr::Capped { v: w, unit }))
            }
        }
    }

    pub fn div(&self, other: &Self, ctx: &Context) -> Result<Self> {
        self.mul(&other.inv(ctx)?, ctx)
    }

    /// Multiplication by `p^e`.
    pub fn mul_p_power(&self, e: i64, ctx: &Context) -> Result<Self> {
        match &self.0 {
            Repr::Zero => Ok(self.clone()),
            Repr::Exact { v, num, den } => Ok(PadicScalar(Repr::Exact {
                v: v + e,
                num: num.clone(),
                den: den.clone(),
            })),
            Repr::Capped { v, .. } => {
                let w = v + e;
                if w >= ctx.n() {
                    return Err(Error::precision("shift below the precision floor"));
                }
                let r = ctx.rel(w);
                Ok(PadicScalar(Repr::Capped {
                    v: w,
                    unit: self.unit_mod(r, ctx),
                }))
            }
        }
    }

    /// Residue in `F_p` of an integral scalar.
    pub fn residue(&self, ctx: &Context) -> Result<u64> {
        match self.val() {
            None => Ok(0),
            Some(v) if v > 0 => Ok(0),
            Some(0) => match self.unit_mod(1, ctx) {
                Digits::Small(u) => Ok(u),
                Digits::Big(u) => Ok(u.to_u64().unwrap()),
            },
            Some(_) => Err(Error::RangeError("residue of a non-integral scalar".into())),
        }
    }

    /// Integer representative of an integral scalar modulo `p^digits`.
    pub fn lift_mod(&self, digits: u32, ctx: &Context) -> Result<BigInt> {
        match self.val() {
            None => Ok(BigInt::zero()),
            Some(v) if v < 0 => Err(Error::RangeError("lift of a non-integral scalar".into())),
            Some(v) if v as u64 >= digits as u64 => Ok(BigInt::zero()),
            Some(v) => {
                let u = self.unit_mod(digits - v as u32, ctx).to_big();
                Ok(u * ctx.pow_big(v as u32))
            }
        }
    }

    /// True when `self - other` vanishes to the working precision.
    pub fn eq_to_precision(&self, other: &Self, ctx: &Context) -> bool {
        match self.sub(other, ctx) {
            Ok(d) => match d.val() {
                None => true,
                Some(v) => v >= ctx.n(),
            },
            Err(Error::PrecisionExhausted(_)) => true,
            Err(_) => false,
        }
    }

    /// Deterministic text form: `a/b` when exact, `u*p^v` when capped.
    /// The exact value as a reduced fraction, `None` for capped values.
    pub fn as_ratio(&self, ctx: &Context) -> Option<(BigInt, BigInt)> {
        match &self.0 {
            Repr::Zero => Some((BigInt::zero(), BigInt::one())),
            Repr::Exact { v, num, den } => {
                let mut n = num.clone();
                let mut d = den.clone();
                match v.cmp(&0) {
                    Ordering::Greater => n *= ctx.pow_big(*v as u32),
                    Ordering::Less => d *= ctx.pow_big((-v) as u32),
                    Ordering::Equal => {}
                }
                Some((n, d))
            }
            Repr::Capped { .. } => None,
        }
    }

    /// `(v, u)` with the value `u * p^v + O(p^N)` and `u` the representative nearest zero.
    pub fn capped_parts(&self, ctx: &Context) -> Option<(i64, BigInt)> {
        match &self.0 {
            Repr::Capped { v, unit } => {
                let u = unit.to_big();
                let modulus = ctx.pow_big(ctx.rel(*v));
                let u = if u > &modulus / 2 { u - modulus } else { u };
                Some((*v, u))
            }
            _ => None,
        }
    }

    pub fn render(&self, ctx: &Context) -> String {
        match &self.0 {
            Repr::Zero => "0".into(),
            Repr::Exact { v, num, den } => {
                let mut n = num.clone();
                let mut d = den.clone();
                match v.cmp(&0) {
                    Ordering::Greater => n *= ctx.pow_big(*v as u32),
                    Ordering::Less => d *= ctx.pow_big((-v) as u32),
                    Ordering::Equal => {}
                }
                if d.is_one() {
                    n.to_string()
                } else {
                    format!("{n}/{d}")
                }
            }
            Repr::Capped { v, unit } => {
                let u = unit.to_big();
                let half = ctx.pow_big(ctx.rel(*v)) / 2;
                let u = if u > half {
                    u - ctx.pow_big(ctx.rel(*v))
                } else {
                    u
                };
                match *v {
                    0 => format!("{u} + O(p^{})", ctx.precision),
                    v => format!("{u}*p^{v} + O(p^{})", ctx.precision),
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> Context {
        Context::new(5, 12, 16, 16).unwrap()
    }

    #[test]
    fn valuations_of_simple_values() {
        let c = ctx();
        assert_eq!(PadicScalar::zero().valuation(), Valuation::Infinite);
        let x = PadicScalar::from_int(3 * 5i64.pow(5), &c);
        assert_eq!(x.val(), Some(5));
        let y = PadicScalar::from_ratio(1.into(), 25.into(), &c).unwrap();
        assert_eq!(y.val(), Some(-2));
    }

    #[test]
    fn product_of_p_powers() {
        let c = ctx();
        let x = PadicScalar::p_power(1)
            .mul(&PadicScalar::p_power(2), &c)
            .unwrap();
        assert_eq!(x.val(), Some(3));
    }

    #[test]
    fn exact_cancellation_is_zero() {
        let c = ctx();
        let one = PadicScalar::from_int(1, &c);
        let s = one.add(&one.neg(&c), &c).unwrap();
        assert!(s.is_zero());
    }

    #[test]
    fn capped_cancellation_is_an_error() {
        let c = ctx();
        let one = PadicScalar::from_int(1, &c).project(&c).unwrap();
        let e = one.sub(&one, &c).unwrap_err();
        assert_eq!(e.tag(), "PrecisionExhausted");
    }

    #[test]
    fn inverse_of_one_minus_p_is_geometric() {
        let c = ctx();
        let x = PadicScalar::from_int(1 - 5, &c).project(&c).unwrap();
        let y = x.inv(&c).unwrap();
        let geometric: BigInt = (0..c.precision()).map(|n| c.pow_big(n)).sum();
        assert_eq!(y.lift_mod(c.precision(), &c).unwrap(), geometric);
        let one = PadicScalar::from_int(1, &c);
        assert!(x.mul(&y, &c).unwrap().eq_to_precision(&one, &c));
    }

    #[test]
    fn division_by_zero() {
        let c = ctx();
        assert_eq!(PadicScalar::zero().inv(&c), Err(Error::DivisionByZero));
    }

    #[test]
    fn big_moduli_match_small_moduli() {
        let small = Context::new(5, 12, 8, 8).unwrap();
        let big = Context::new(5, 40, 8, 8).unwrap();
        for c in [&small, &big] {
            let a = PadicScalar::from_ratio(7.into(), 3.into(), c)
                .unwrap()
                .project(c)
                .unwrap();
            let b = PadicScalar::from_int(-11, c).project(c).unwrap();
            let ab = a.mul(&b, c).unwrap();
            let back = ab.div(&b, c).unwrap();
            assert!(back.eq_to_precision(&a, c));
            let s = a.add(&b, c).unwrap().sub(&b, c).unwrap();
            assert!(s.eq_to_precision(&a, c));
        }
    }

    #[test]
    fn residues() {
        let c = ctx();
        assert_eq!(PadicScalar::from_int(7, &c).residue(&c).unwrap(), 2);
        assert_eq!(PadicScalar::from_int(10, &c).residue(&c).unwrap(), 0);
        let third = PadicScalar::from_ratio(1.into(), 3.into(), &c).unwrap();
        assert_eq!(third.residue(&c).unwrap(), 2);
    }

    #[test]
    fn context_validation() {
        assert!(Context::new(6, 10, 4, 4).is_err());
        assert!(Context::new(7, 0, 4, 4).is_err());
        let d = Context::default();
        assert_eq!(
            (d.prime(), d.precision(), d.tdeg(), d.opmax()),
            (5, 40, 64, 64)
        );
    }
}
