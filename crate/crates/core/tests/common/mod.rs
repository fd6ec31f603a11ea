#![allow(dead_code)]

use dcongr::{Context, DiffOp, PadicScalar, TateSeries};
use num_bigint::BigInt;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A p-adic integer with valuation drawn geometrically from `0..=max_val`.
pub fn scalar(rng: &mut ChaCha8Rng, ctx: &Context, max_val: i64) -> PadicScalar {
    let mut v = 0;
    while v < max_val && rng.gen_bool(0.5) {
        v += 1;
    }
    let p = ctx.prime();
    let mut u = BigInt::from(rng.gen_range(1..p));
    let mut scale = BigInt::from(p);
    for _ in 1..ctx.precision() {
        u += &scale * rng.gen_range(0..p);
        scale *= p;
    }
    PadicScalar::capped(v, u, ctx).unwrap()
}

/// A polynomial of degree at most `deg` whose coefficients vanish with probability `sparsity`.
pub fn series(
    rng: &mut ChaCha8Rng,
    ctx: &Context,
    deg: usize,
    sparsity: f64,
    max_val: i64,
) -> TateSeries {
    let coeffs = (0..=deg)
        .map(|_| {
            if rng.gen_bool(sparsity) {
                PadicScalar::zero()
            } else {
                scalar(rng, ctx, max_val)
            }
        })
        .collect();
    TateSeries::from_coeffs(coeffs, ctx)
}

/// A nonzero operator of order at most `order` with coefficients of degree at most `deg`.
pub fn op(rng: &mut ChaCha8Rng, ctx: &Context, level: u32, order: usize, deg: usize) -> DiffOp {
    loop {
        let d = rng.gen_range(0..=order);
        let coeffs = (0..=d).map(|_| series(rng, ctx, deg, 0.4, 3)).collect();
        let h = DiffOp::new(level, coeffs, ctx);
        if !h.is_zero() {
            return h;
        }
    }
}

/// An operator scaled to norm one.
pub fn normalized_op(
    rng: &mut ChaCha8Rng,
    ctx: &Context,
    level: u32,
    order: usize,
    deg: usize,
) -> DiffOp {
    let h = op(rng, ctx, level, order, deg);
    let e = h.op_norm().log_p().unwrap();
    h.scale(&PadicScalar::p_power(e), ctx).unwrap()
}

/// A norm-one operator with both indices zero and a unit constant coefficient.
pub fn invertible_op(
    rng: &mut ChaCha8Rng,
    ctx: &Context,
    level: u32,
    order: usize,
    deg: usize,
) -> DiffOp {
    loop {
        let mut coeffs = vec![series(rng, ctx, deg, 0.4, 3)];
        let c0 = scalar(rng, ctx, 0);
        let mut first = coeffs[0].coeffs().to_vec();
        if first.is_empty() {
            first.push(PadicScalar::zero());
        }
        first[0] = c0;
        coeffs[0] = TateSeries::from_coeffs(first, ctx);
        for _ in 0..rng.gen_range(0..=order) {
            let s = series(rng, ctx, deg, 0.4, 3).mul_p_power(1, ctx).unwrap();
            coeffs.push(s);
        }
        let h = DiffOp::new(level, coeffs, ctx);
        if h.indices() == Ok((0, 0)) {
            return h;
        }
    }
}
