//! Characteristic cycles of cyclic modules `D/I` and their direct sums.

use serde::Serialize;

use crate::dop::DiffOp;
use crate::error::{Error, Result};
use crate::fpoly::{self, Poly};
use crate::ideals::{division_basis, IdealBasis};
use crate::par;
use crate::scalar::{Context, PadicScalar};
use crate::weierstrass::hensel_factor;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CycleKind {
    FullCotangent,
    ProperCycle,
    Empty,
}

/// The line `t = x` over a closed point, given by a monic irreducible factor over `F_p`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerticalComponent {
    pub point: String,
    pub degree: usize,
    pub mult: usize,
    #[serde(skip)]
    pub factor: Poly,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CharCycle {
    pub kind: CycleKind,
    #[serde(rename = "horizontal")]
    pub horizontal_mult: usize,
    pub vertical: Vec<VerticalComponent>,
}

impl CharCycle {
    pub fn full() -> Self {
        CharCycle {
            kind: CycleKind::FullCotangent,
            horizontal_mult: 0,
            vertical: vec![],
        }
    }

    pub fn empty() -> Self {
        CharCycle {
            kind: CycleKind::Empty,
            horizontal_mult: 0,
            vertical: vec![],
        }
    }

    /// Multiplicity of the vertical line over `factor`, zero when absent.
    pub fn vertical_mult(&self, factor: &[u64]) -> usize {
        self.vertical
            .iter()
            .find(|c| c.factor == factor)
            .map_or(0, |c| c.mult)
    }

    /// Sum of all multiplicities, `None` for the full cotangent space.
    pub fn total(&self) -> Option<usize> {
        match self.kind {
            CycleKind::FullCotangent => None,
            _ => Some(self.horizontal_mult + self.vertical.iter().map(|c| c.mult).sum::<usize>()),
        }
    }

    /// A proper cycle with no component at all would be supported on points.
    pub fn is_zero_dimensional(&self) -> bool {
        self.kind == CycleKind::ProperCycle && self.horizontal_mult == 0 && self.vertical.is_empty()
    }

    /// Component-wise sum.
    pub fn sum(&self, other: &CharCycle) -> CharCycle {
        use CycleKind::*;
        match (self.kind, other.kind) {
            (FullCotangent, _) | (_, FullCotangent) => return CharCycle::full(),
            (Empty, _) => return other.clone(),
            (_, Empty) => return self.clone(),
            _ => {}
        }
        let mut vertical = self.vertical.clone();
        for c in &other.vertical {
            match vertical.iter_mut().find(|v| v.factor == c.factor) {
                Some(v) => v.mult += c.mult,
                None => vertical.push(c.clone()),
            }
        }
        sort_components(&mut vertical);
        CharCycle {
            kind: ProperCycle,
            horizontal_mult: self.horizontal_mult + other.horizontal_mult,
            vertical,
        }
    }

    pub fn render(&self) -> String {
        match self.kind {
            CycleKind::FullCotangent => "full cotangent space".into(),
            CycleKind::Empty => "empty".into(),
            CycleKind::ProperCycle => {
                let mut parts = Vec::new();
                if self.horizontal_mult > 0 {
                    parts.push(format!("{}*[xi = 0]", self.horizontal_mult));
                }
                for c in &self.vertical {
                    let tag = if c.degree > 1 {
                        format!(" (degree {})", c.degree)
                    } else {
                        String::new()
                    };
                    parts.push(format!("{}*[{} = 0]{tag}", c.mult, c.point));
                }
                parts.join(" + ")
            }
        }
    }
}

fn sort_components(v: &mut [VerticalComponent]) {
    v.sort_by(|a, b| {
        (a.degree, a.factor.iter().rev().collect::<Vec<_>>())
            .cmp(&(b.degree, b.factor.iter().rev().collect()))
    });
}

/// The quotient of the level-`k` operators by the left ideal the generators span.
#[derive(Clone, Debug)]
pub struct CyclicQuotient {
    level: u32,
    gens: Vec<DiffOp>,
    basis: Option<Option<IdealBasis>>,
}

impl CyclicQuotient {
    pub fn new(level: u32, gens: Vec<DiffOp>) -> Result<Self> {
        for g in &gens {
            if g.level() != level {
                return Err(Error::LevelMismatch(level, g.level()));
            }
        }
        let gens = gens.into_iter().filter(|g| !g.is_zero()).collect();
        Ok(CyclicQuotient {
            level,
            gens,
            basis: None,
        })
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn gens(&self) -> &[DiffOp] {
        &self.gens
    }

    /// The cached division basis, `None` inside for the zero ideal.
    pub fn basis(&self) -> Result<Option<&IdealBasis>> {
        match &self.basis {
            None => Err(Error::BasisUnavailable),
            Some(b) => Ok(b.as_ref()),
        }
    }

    pub fn prepare(&mut self, ctx: &Context) -> Result<()> {
        if self.basis.is_none() {
            let b = if self.gens.is_empty() {
                None
            } else {
                Some(division_basis(&self.gens, ctx)?)
            };
            self.basis = Some(b);
        }
        Ok(())
    }

    pub fn is_zero_ideal(&self) -> bool {
        self.gens.is_empty()
    }

    pub fn char_cycle(&self, ctx: &Context) -> Result<CharCycle> {
        let at_origin = match self.basis()? {
            None => return Ok(CharCycle::full()),
            Some(b) => b,
        };
        let p = ctx.prime();
        let residues = self
            .gens
            .iter()
            .map(|g| g.dominant_residue(ctx).map(|r| fpoly::from_residues(&r, p)))
            .collect::<Result<Vec<_>>>()?;
        let mut vertical = Vec::new();
        let horizontal_mult;
        if let [g] = self.gens.as_slice() {
            horizontal_mult = g.nbar()?;
            for (factor, mult) in fpoly::factor(&residues[0], p) {
                vertical.push(component(factor, mult));
            }
        } else {
            let common = residues
                .iter()
                .fold(vec![0], |acc, r| fpoly::gcd(&acc, r, p));
            let origin = local_invariants(at_origin);
            let mut horizontal = origin.0;
            for (factor, _) in fpoly::factor(&common, p) {
                let mult = if factor == [0, 1] {
                    origin.1
                } else if factor.len() == 2 {
                    let (d, v) = self.invariants_at(p - factor[0], ctx)?;
                    horizontal = horizontal.min(d);
                    v
                } else {
                    residues
                        .iter()
                        .map(|r| multiplicity(r, &factor, p))
                        .min()
                        .unwrap_or(0)
                };
                if mult > 0 {
                    vertical.push(component(factor, mult));
                }
            }
            horizontal_mult = horizontal;
        }
        sort_components(&mut vertical);
        if horizontal_mult == 0 && vertical.is_empty() {
            return Ok(CharCycle::empty());
        }
        Ok(CharCycle {
            kind: CycleKind::ProperCycle,
            horizontal_mult,
            vertical,
        })
    }

    /// Local `(d(I), v(I))` after recentering at the rational point `x`.
    fn invariants_at(&self, x: u64, ctx: &Context) -> Result<(usize, usize)> {
        let c = PadicScalar::from_int(x as i64, ctx);
        let moved = self
            .gens
            .iter()
            .map(|g| g.translate(&c, ctx))
            .collect::<Result<Vec<_>>>()?;
        Ok(local_invariants(&division_basis(&moved, ctx)?))
    }
}

fn local_invariants(b: &IdealBasis) -> (usize, usize) {
    let s = b.staircase();
    (s.min_order().unwrap_or(0), s.min_valuation().unwrap_or(0))
}

fn component(factor: Poly, mult: usize) -> VerticalComponent {
    VerticalComponent {
        point: fpoly::render(&factor),
        degree: factor.len() - 1,
        mult,
        factor,
    }
}

fn multiplicity(f: &[u64], g: &[u64], p: u64) -> usize {
    let mut f = f.to_vec();
    let mut m = 0;
    while fpoly::degree(&f).is_some() {
        let (q, r) = fpoly::divrem(&f, g, p);
        if !r.is_empty() {
            break;
        }
        f = q;
        m += 1;
    }
    m
}

#[derive(Clone, Debug)]
pub enum ModuleDescriptor {
    CyclicQuotient(CyclicQuotient),
    DirectSum(Vec<CyclicQuotient>),
}

impl ModuleDescriptor {
    pub fn cyclic(level: u32, gens: Vec<DiffOp>) -> Result<Self> {
        Ok(ModuleDescriptor::CyclicQuotient(CyclicQuotient::new(
            level, gens,
        )?))
    }

    /// `D/(P)` with its basis already computed.
    pub fn principal(p: &DiffOp, ctx: &Context) -> Result<Self> {
        let mut m = ModuleDescriptor::cyclic(p.level(), vec![p.clone()])?;
        m.prepare(ctx)?;
        Ok(m)
    }

    pub fn summands(&self) -> &[CyclicQuotient] {
        match self {
            ModuleDescriptor::CyclicQuotient(c) => std::slice::from_ref(c),
            ModuleDescriptor::DirectSum(v) => v,
        }
    }

    fn summands_mut(&mut self) -> &mut [CyclicQuotient] {
        match self {
            ModuleDescriptor::CyclicQuotient(c) => std::slice::from_mut(c),
            ModuleDescriptor::DirectSum(v) => v,
        }
    }

    /// Computes the division basis of every summand.
    pub fn prepare(&mut self, ctx: &Context) -> Result<()> {
        let prepared = par::map(self.summands(), |s| {
            let mut s = s.clone();
            s.prepare(ctx).map(|_| s)
        });
        for (slot, s) in self.summands_mut().iter_mut().zip(prepared) {
            *slot = s?;
        }
        Ok(())
    }
}

pub fn char_cycle(m: &ModuleDescriptor, ctx: &Context) -> Result<CharCycle> {
    let cycles = par::map(m.summands(), |s| s.char_cycle(ctx));
    let mut acc = CharCycle::empty();
    for c in cycles {
        acc = acc.sum(&c?);
    }
    Ok(acc)
}

pub fn is_holonomic(m: &ModuleDescriptor) -> bool {
    m.summands().iter().all(|s| !s.is_zero_ideal())
}

/// Total multiplicity, an upper bound for the length; `None` when not holonomic.
pub fn length_bound(m: &ModuleDescriptor, ctx: &Context) -> Result<Option<usize>> {
    Ok(char_cycle(m, ctx)?.total())
}

#[derive(Clone, Debug, PartialEq)]
pub enum ConnectionRank {
    /// Free of the given rank, with one monic presentation per summand.
    Rank {
        rank: usize,
        presentations: Vec<DiffOp>,
    },
    NotAConnection,
}

pub fn connection_rank(m: &ModuleDescriptor, ctx: &Context) -> Result<ConnectionRank> {
    let mut rank = 0;
    let mut presentations = Vec::new();
    for s in m.summands() {
        let cycle = s.char_cycle(ctx)?;
        match cycle.kind {
            CycleKind::FullCotangent => return Ok(ConnectionRank::NotAConnection),
            CycleKind::Empty => continue,
            CycleKind::ProperCycle if !cycle.vertical.is_empty() => {
                return Ok(ConnectionRank::NotAConnection)
            }
            CycleKind::ProperCycle => {}
        }
        let lead = match s.basis()? {
            _ if s.gens.len() == 1 => &s.gens[0],
            Some(IdealBasis::Basis(b)) => b
                .ops
                .iter()
                .zip(&b.exponents)
                .min_by_key(|(_, e)| (e.d, e.v))
                .map(|(op, _)| op)
                .ok_or(Error::BasisUnavailable)?,
            _ => return Ok(ConnectionRank::NotAConnection),
        };
        let dominant = hensel_factor(lead, ctx)?.dominant;
        let residue = fpoly::from_residues(&dominant.dominant_residue(ctx)?, ctx.prime());
        if dominant.order() != Some(cycle.horizontal_mult) || fpoly::degree(&residue) != Some(0) {
            return Ok(ConnectionRank::NotAConnection);
        }
        rank += cycle.horizontal_mult;
        presentations.push(dominant);
    }
    Ok(ConnectionRank::Rank {
        rank,
        presentations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tate::TateSeries;

    fn ctx() -> Context {
        Context::new(5, 20, 24, 16).unwrap()
    }

    fn ints(level: u32, rows: &[&[i64]], c: &Context) -> DiffOp {
        DiffOp::new(
            level,
            rows.iter().map(|r| TateSeries::from_ints(r, c)).collect(),
            c,
        )
    }

    fn monomial(level: u32, alpha: usize, d: usize, c: &Context) -> DiffOp {
        let mut t = vec![0; alpha + 1];
        t[alpha] = 1;
        let mut rows: Vec<Vec<i64>> = vec![vec![]; d];
        rows.push(t);
        let rows: Vec<&[i64]> = rows.iter().map(|r| r.as_slice()).collect();
        ints(level, &rows, c)
    }

    fn cycle_of(p: &DiffOp, c: &Context) -> CharCycle {
        char_cycle(&ModuleDescriptor::principal(p, c).unwrap(), c).unwrap()
    }

    #[test]
    fn dirac_times_derivation_power() {
        let c = ctx();
        let cc = cycle_of(&monomial(1, 2, 3, &c), &c);
        assert_eq!(cc.kind, CycleKind::ProperCycle);
        assert_eq!(cc.horizontal_mult, 3);
        assert_eq!(cc.vertical_mult(&[0, 1]), 2);
        assert_eq!(cc.total(), Some(5));
    }

    #[test]
    fn dirac_is_one_vertical_line() {
        let c = ctx();
        let cc = cycle_of(&ints(1, &[&[0, 1]], &c), &c);
        assert_eq!(cc.horizontal_mult, 0);
        assert_eq!(cc.vertical.len(), 1);
        assert_eq!(
            (cc.vertical[0].point.as_str(), cc.vertical[0].mult),
            ("t", 1)
        );
    }

    #[test]
    fn two_rational_points() {
        let c = ctx();
        let cc = cycle_of(&ints(1, &[&[1], &[0, -1, 1]], &c), &c);
        assert_eq!(cc.horizontal_mult, 1);
        assert_eq!(cc.vertical_mult(&[0, 1]), 1);
        assert_eq!(cc.vertical_mult(&[4, 1]), 1);
        assert_eq!(cc.total(), Some(3));
    }

    #[test]
    fn non_rational_point_counts_once() {
        let c = ctx();
        let cc = cycle_of(&ints(1, &[&[1], &[2, 0, 1]], &c), &c);
        assert_eq!(cc.vertical.len(), 1);
        assert_eq!((cc.vertical[0].degree, cc.vertical[0].mult), (2, 1));
    }

    #[test]
    fn zero_and_unit_modules() {
        let c = ctx();
        let mut zero = ModuleDescriptor::cyclic(1, vec![]).unwrap();
        zero.prepare(&c).unwrap();
        assert!(!is_holonomic(&zero));
        assert_eq!(
            char_cycle(&zero, &c).unwrap().kind,
            CycleKind::FullCotangent
        );
        assert_eq!(length_bound(&zero, &c).unwrap(), None);
        let unit = ModuleDescriptor::principal(&DiffOp::one(1, &c), &c).unwrap();
        assert_eq!(char_cycle(&unit, &c).unwrap(), CharCycle::empty());
        assert_eq!(length_bound(&unit, &c).unwrap(), Some(0));
    }

    #[test]
    fn basis_must_be_prepared() {
        let c = ctx();
        let m = ModuleDescriptor::cyclic(1, vec![ints(1, &[&[0, 1]], &c)]).unwrap();
        assert_eq!(char_cycle(&m, &c), Err(Error::BasisUnavailable));
    }

    #[test]
    fn connection_ranks() {
        let c = ctx();
        let rank =
            |p: &DiffOp| connection_rank(&ModuleDescriptor::principal(p, &c).unwrap(), &c).unwrap();
        match rank(&ints(1, &[&[1], &[-1]], &c)) {
            ConnectionRank::Rank { rank, .. } => assert_eq!(rank, 1),
            r => panic!("{r:?}"),
        }
        assert_eq!(
            rank(&ints(1, &[&[], &[0, 1]], &c)),
            ConnectionRank::NotAConnection
        );
        match rank(&ints(1, &[&[2], &[0, 1], &[1]], &c)) {
            ConnectionRank::Rank {
                rank,
                presentations,
            } => {
                assert_eq!(rank, 2);
                assert_eq!(presentations[0].order(), Some(2));
            }
            r => panic!("{r:?}"),
        }
    }

    #[test]
    fn dirac_away_from_the_origin() {
        let c = ctx();
        let cc = cycle_of(&ints(1, &[&[-1, 1]], &c), &c);
        assert_eq!(cc.horizontal_mult, 0);
        assert_eq!(cc.vertical_mult(&[4, 1]), 1);
        let two = CyclicQuotient::new(
            1,
            vec![ints(1, &[&[-1, 1]], &c), ints(1, &[&[5], &[-1, 1]], &c)],
        )
        .unwrap();
        let mut m = ModuleDescriptor::CyclicQuotient(two);
        m.prepare(&c).unwrap();
        let cc = char_cycle(&m, &c).unwrap();
        assert_eq!((cc.horizontal_mult, cc.vertical_mult(&[4, 1])), (0, 1));
    }

    #[test]
    fn direct_sum_adds_cycles() {
        let c = ctx();
        let a = CyclicQuotient::new(1, vec![monomial(1, 1, 2, &c)]).unwrap();
        let b = CyclicQuotient::new(1, vec![ints(1, &[&[1], &[0, -1, 1]], &c)]).unwrap();
        let mut m = ModuleDescriptor::DirectSum(vec![a, b]);
        m.prepare(&c).unwrap();
        let cc = char_cycle(&m, &c).unwrap();
        assert_eq!(cc.horizontal_mult, 3);
        assert_eq!(cc.vertical_mult(&[0, 1]), 2);
        assert_eq!(length_bound(&m, &c).unwrap(), Some(6));
    }

    #[test]
    fn serializes_to_report_shape() {
        let c = ctx();
        let cc = cycle_of(&monomial(1, 2, 3, &c), &c);
        let v = serde_json::to_value(&cc).unwrap();
        assert_eq!(v["kind"], "ProperCycle");
        assert_eq!(v["horizontal"], 3);
        assert_eq!(v["vertical"][0]["point"], "t");
        assert_eq!(v["vertical"][0]["mult"], 2);
    }
}
