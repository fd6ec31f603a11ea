//! Invariants of an element across all congruence levels: order profiles,
//! multiplicities, membership in the holonomic class, and norm tables.

use serde::{Serialize, Serializer};

use crate::charvar::{char_cycle, ModuleDescriptor};
use crate::dop::DiffOp;
use crate::error::{Error, Result};
use crate::fpoly;
use crate::par;
use crate::scalar::{Context, PadicScalar};
use crate::weierstrass::hensel_factor;

pub const DEFAULT_GUARD: u32 = 3;

/// The infinite product of `1 - p^(slope*n + offset) d/dt` over `n >= 1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ProductFamily {
    pub slope: i64,
    pub offset: i64,
    pub guard: u32,
    /// Largest depth the caller allows the truncation to reach.
    pub max_depth: Option<u32>,
}

impl ProductFamily {
    pub fn new(slope: i64, offset: i64) -> Result<Self> {
        if slope < 1 {
            return Err(Error::RangeError("the exponents must grow with n".into()));
        }
        Ok(ProductFamily {
            slope,
            offset,
            guard: DEFAULT_GUARD,
            max_depth: None,
        })
    }

    /// `prod_{n >= 1} (1 - p^n d/dt)`.
    pub fn standard() -> Self {
        ProductFamily::new(1, 0).unwrap()
    }

    pub fn exponent(&self, n: u32) -> i64 {
        self.slope * n as i64 + self.offset
    }

    /// Number of factors that are not units at `level`.
    pub fn non_units(&self, level: u32) -> u32 {
        (1..)
            .take_while(|&n| self.exponent(n) <= level as i64)
            .last()
            .unwrap_or(0)
    }

    /// Truncation depth used for level `level`.
    pub fn depth_for(&self, level: u32) -> Result<u32> {
        let depth = self.non_units(level) + self.guard;
        match self.max_depth {
            Some(cap) if cap < depth => Err(Error::TruncationInsufficient { depth: cap, level }),
            _ => Ok(depth),
        }
    }

    /// `prod_{lo <= n <= hi} (1 - c_n d/dt)` at level 0.
    pub fn partial(&self, lo: u32, hi: u32, ctx: &Context) -> Result<DiffOp> {
        let d = DiffOp::derivation(0, ctx);
        let mut acc = DiffOp::one(0, ctx);
        for n in lo..=hi {
            let f = DiffOp::one(0, ctx)
                .sub(&d.scale(&PadicScalar::p_power(self.exponent(n)), ctx)?, ctx)?;
            acc = acc.op_mul(&f, ctx)?;
        }
        if acc.truncated() {
            return Err(Error::TruncationInsufficient {
                depth: hi,
                level: 0,
            });
        }
        Ok(acc)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum TowerElement {
    /// A finite operator written at level 0.
    FiniteOp(DiffOp),
    ProductFamily(ProductFamily),
}

impl TowerElement {
    pub fn finite(op: DiffOp, ctx: &Context) -> Result<Self> {
        Ok(TowerElement::FiniteOp(op.rescale_level(0, ctx)?))
    }

    /// The element written at `level`.
    pub fn realize(&self, level: u32, ctx: &Context) -> Result<DiffOp> {
        match self {
            TowerElement::FiniteOp(op) => op.rescale_level(level, ctx),
            TowerElement::ProductFamily(f) => {
                let depth = f.depth_for(level)?;
                let op = f.partial(1, depth, ctx).map_err(|e| match e {
                    Error::TruncationInsufficient { depth, .. } => {
                        Error::TruncationInsufficient { depth, level }
                    }
                    e => e,
                })?;
                op.rescale_level(level, ctx)
            }
        }
    }
}

/// Largest dominant index at each level `0..=k_max`.
pub fn nbar_profile(e: &TowerElement, k_max: u32, ctx: &Context) -> Result<Vec<usize>> {
    let levels: Vec<u32> = (0..=k_max).collect();
    par::map(&levels, |&k| e.realize(k, ctx)?.nbar())
        .into_iter()
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderClass {
    Finite(usize),
    InfiniteUpToHorizon,
    Inconclusive,
}

/// Finite when the last `guard + 1` values agree, infinite when they strictly increase.
pub fn classify_profile(profile: &[usize], guard: u32) -> OrderClass {
    let tail = &profile[profile.len().saturating_sub(guard as usize + 1)..];
    if tail.windows(2).all(|w| w[0] == w[1]) {
        OrderClass::Finite(*tail.last().unwrap_or(&0))
    } else if tail.windows(2).all(|w| w[0] < w[1]) {
        OrderClass::InfiniteUpToHorizon
    } else {
        OrderClass::Inconclusive
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Multiplicity {
    Finite(usize),
    Unbounded,
}

impl Serialize for Multiplicity {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Multiplicity::Finite(m) => s.serialize_u64(*m as u64),
            Multiplicity::Unbounded => s.serialize_str("unbounded"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TowerRow {
    pub k: u32,
    pub nbar: usize,
    pub log_p_norm: i64,
    pub m_k: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TowerReport {
    pub rows: Vec<TowerRow>,
    #[serde(rename = "k_M")]
    pub k_m: Option<u32>,
    pub m: Multiplicity,
    pub member: bool,
    pub horizon: u32,
    pub order: OrderClass,
}

fn level_row(e: &TowerElement, k: u32, ctx: &Context) -> Result<TowerRow> {
    let h = e.realize(k, ctx)?;
    let nbar = h.nbar()?;
    let log_p_norm = h.op_norm().log_p().ok_or(Error::ZeroOperator)?;
    let dominant = hensel_factor(&h, ctx)?.dominant;
    let m_k = char_cycle(&ModuleDescriptor::principal(&dominant, ctx)?, ctx)?
        .total()
        .unwrap_or(0);
    Ok(TowerRow {
        k,
        nbar,
        log_p_norm,
        m_k,
    })
}

/// Per-level data up to `k_max` and the multiplicity read off the last levels.
pub fn tower_report(e: &TowerElement, k_max: u32, ctx: &Context) -> Result<TowerReport> {
    let guard = match e {
        TowerElement::ProductFamily(f) => f.guard,
        TowerElement::FiniteOp(_) => DEFAULT_GUARD,
    };
    let levels: Vec<u32> = (0..=k_max).collect();
    let rows = par::map(&levels, |&k| level_row(e, k, ctx))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let profile: Vec<usize> = rows.iter().map(|r| r.nbar).collect();
    let order = classify_profile(&profile, guard);
    let mults: Vec<usize> = rows.iter().map(|r| r.m_k).collect();
    let m = match classify_profile(&mults, guard) {
        OrderClass::Finite(m) => Multiplicity::Finite(m),
        OrderClass::InfiniteUpToHorizon => Multiplicity::Unbounded,
        OrderClass::Inconclusive => return Err(Error::HorizonInconclusive(k_max)),
    };
    let member = matches!(order, OrderClass::Finite(_)) && matches!(m, Multiplicity::Finite(_));
    let k_m = match m {
        Multiplicity::Finite(v) => {
            let from = mults.iter().rposition(|&x| x != v).map_or(0, |i| i + 1);
            Some(from as u32)
        }
        Multiplicity::Unbounded => None,
    };
    Ok(TowerReport {
        rows,
        k_m,
        m,
        member,
        horizon: k_max,
        order,
    })
}

/// Necessary condition for being a unit at every level: order zero up to the
/// horizon and a constant coefficient that is a unit function.
pub fn units_check(e: &TowerElement, k_max: u32, ctx: &Context) -> bool {
    let Ok(profile) = nbar_profile(e, k_max, ctx) else {
        return false;
    };
    if profile.iter().any(|&n| n != 0) {
        return false;
    }
    e.realize(0, ctx)
        .and_then(|h| h.dominant_residue(ctx))
        .map(|r| fpoly::degree(&fpoly::from_residues(&r, ctx.prime())) == Some(0))
        .unwrap_or(false)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NormRow {
    /// Level at which the norm is taken.
    pub level: u32,
    /// Number of factors in the truncation `P_k`.
    pub k: u32,
    /// `log_p` of the norm of `P_k` (when `level == k`) or of `P - P_k`.
    pub log_p_norm: i64,
    pub difference: bool,
}

/// `log_p ||P_k||_k` where `P_k` keeps the factors `n <= k`.
pub fn truncation_norm(f: &ProductFamily, k: u32, ctx: &Context) -> Result<i64> {
    let pk = f.partial(1, k, ctx)?.rescale_level(k, ctx)?;
    pk.op_norm().log_p().ok_or(Error::ZeroOperator)
}

/// `log_p ||P - P_k||_m`, with `P` truncated at depth `depth`.
pub fn difference_norm(
    f: &ProductFamily,
    k: u32,
    m: u32,
    depth: u32,
    ctx: &Context,
) -> Result<i64> {
    if k <= m {
        return Err(Error::RangeError(format!(
            "need k > m, got k = {k}, m = {m}"
        )));
    }
    if depth < k + f.guard {
        return Err(Error::TruncationInsufficient { depth, level: m });
    }
    let pk = f.partial(1, k, ctx)?;
    let p = pk.op_mul(&f.partial(k + 1, depth, ctx)?, ctx)?;
    let diff = p.sub(&pk, ctx)?.rescale_level(m, ctx)?;
    diff.op_norm().log_p().ok_or(Error::ZeroOperator)
}

/// Norm table for `k` in `0..=k_max` and every `m` in `ms` with `m < k`.
pub fn level_norm_suite(
    f: &ProductFamily,
    k_max: u32,
    ms: &[u32],
    ctx: &Context,
) -> Result<Vec<NormRow>> {
    if let Some(&m) = ms.iter().find(|&&m| m >= k_max) {
        return Err(Error::RangeError(format!(
            "no level k <= {k_max} exceeds m = {m}"
        )));
    }
    let depth = k_max + f.guard;
    let mut jobs: Vec<(u32, u32, bool)> = (0..=k_max).map(|k| (k, k, false)).collect();
    for &m in ms {
        jobs.extend((m + 1..=k_max).map(|k| (m, k, true)));
    }
    par::map(&jobs, |&(level, k, difference)| {
        let log_p_norm = if difference {
            difference_norm(f, k, level, depth, ctx)?
        } else {
            truncation_norm(f, k, ctx)?
        };
        Ok(NormRow {
            level,
            k,
            log_p_norm,
            difference,
        })
    })
    .into_iter()
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tate::TateSeries;

    fn ctx() -> Context {
        Context::new(5, 30, 16, 20).unwrap()
    }

    fn ints(rows: &[&[i64]], c: &Context) -> DiffOp {
        DiffOp::new(
            0,
            rows.iter().map(|r| TateSeries::from_ints(r, c)).collect(),
            c,
        )
    }

    #[test]
    fn product_profile_grows_with_the_level() {
        let c = ctx();
        let e = TowerElement::ProductFamily(ProductFamily::standard());
        assert_eq!(nbar_profile(&e, 6, &c).unwrap(), vec![0, 1, 2, 3, 4, 5, 6]);
    }

    #[test]
    fn finite_profiles() {
        let c = ctx();
        let e = TowerElement::FiniteOp(ints(&[&[1], &[-5]], &c));
        let prof = nbar_profile(&e, 4, &c).unwrap();
        assert_eq!(prof, vec![0, 1, 1, 1, 1]);
        assert_eq!(classify_profile(&prof, 3), OrderClass::Finite(1));
        let one = TowerElement::FiniteOp(DiffOp::one(0, &c));
        assert_eq!(nbar_profile(&one, 4, &c).unwrap(), vec![0; 5]);
    }

    #[test]
    fn reports() {
        let c = ctx();
        let prod = tower_report(
            &TowerElement::ProductFamily(ProductFamily::standard()),
            6,
            &c,
        )
        .unwrap();
        assert_eq!(prod.m, Multiplicity::Unbounded);
        assert!(!prod.member);
        assert_eq!(prod.k_m, None);
        assert!(prod.rows.iter().all(|r| r.m_k >= r.k as usize));

        let conn = TowerElement::FiniteOp(ints(&[&[1], &[0, -1, 1]], &c));
        let rep = tower_report(&conn, 6, &c).unwrap();
        assert_eq!(rep.m, Multiplicity::Finite(3));
        assert!(rep.member);
        let m_k: Vec<usize> = rep.rows.iter().map(|r| r.m_k).collect();
        let from = m_k.iter().position(|&x| x == 3).unwrap();
        assert!(m_k[from..].iter().all(|&x| x == 3));
        assert_eq!(rep.k_m, Some(from as u32));

        let one = tower_report(&TowerElement::FiniteOp(DiffOp::one(0, &c)), 6, &c).unwrap();
        assert_eq!(one.m, Multiplicity::Finite(0));
        assert!(one.rows.iter().all(|r| r.m_k == 0));
    }

    #[test]
    fn unit_detection() {
        let c = ctx();
        let f = |rows: &[&[i64]]| TowerElement::FiniteOp(ints(rows, &c));
        assert!(units_check(&f(&[&[2, 5]]), 6, &c));
        assert!(!units_check(&f(&[&[1], &[-5]]), 6, &c));
        assert!(!units_check(&f(&[&[0, 1]]), 6, &c));
    }

    #[test]
    fn truncation_norms() {
        let c = ctx();
        let f = ProductFamily::standard();
        for k in 0..=6 {
            assert_eq!(truncation_norm(&f, k, &c).unwrap(), (k * k - k) as i64 / 2);
        }
        assert_eq!(truncation_norm(&f, 2, &c).unwrap(), 1);
    }

    #[test]
    fn difference_norm_range() {
        let c = ctx();
        let f = ProductFamily::standard();
        assert!(matches!(
            difference_norm(&f, 2, 2, 9, &c),
            Err(Error::RangeError(_))
        ));
        assert!(matches!(
            difference_norm(&f, 4, 1, 5, &c),
            Err(Error::TruncationInsufficient { .. })
        ));
    }

    #[test]
    fn capped_depth_is_reported() {
        let c = ctx();
        let mut f = ProductFamily::standard();
        f.max_depth = Some(4);
        let e = TowerElement::ProductFamily(f);
        assert!(e.realize(1, &c).is_ok());
        assert_eq!(
            e.realize(3, &c),
            Err(Error::TruncationInsufficient { depth: 4, level: 3 })
        );
    }

    #[test]
    fn difference_norm_is_the_product_of_factor_norms() {
        let c = ctx();
        let f = ProductFamily::standard();
        for m in 1..=3u32 {
            for k in m + 1..=6 {
                let pk = f.partial(1, k, &c).unwrap().rescale_level(m, &c).unwrap();
                let q = f.partial(k + 1, 9, &c).unwrap();
                let q1 = q
                    .sub(&DiffOp::one(0, &c), &c)
                    .unwrap()
                    .rescale_level(m, &c)
                    .unwrap();
                let expect = pk.op_norm().log_p().unwrap() + q1.op_norm().log_p().unwrap();
                let got = difference_norm(&f, k, m, 9, &c).unwrap();
                assert_eq!(got, expect);
                assert_eq!(got, (m * (m + 1) / 2) as i64 - k as i64 - 1);
            }
        }
    }
}
