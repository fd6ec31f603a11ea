use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use dcongr::par::{map_parallel, map_sequential};
use dcongr::tower::{ProductFamily, TowerElement};
use dcongr::weierstrass::hensel_factor;
use dcongr::{Context, DiffOp, PadicScalar, TateSeries};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn ctx() -> Context {
    Context::new(5, 24, 48, 48).unwrap()
}

fn random_op(r: &mut ChaCha8Rng, level: u32, c: &Context) -> DiffOp {
    let order = r.gen_range(1..=4);
    let coeffs = (0..=order)
        .map(|_| {
            let row: Vec<i64> = (0..=5).map(|_| r.gen_range(-60..=60)).collect();
            TateSeries::from_ints(&row, c)
        })
        .collect();
    let h = DiffOp::new(level, coeffs, c);
    let e = h.op_norm().log_p().unwrap_or(0);
    h.scale(&PadicScalar::p_power(e), c).unwrap()
}

fn batch(n: usize, level: u32, c: &Context) -> Vec<(DiffOp, DiffOp)> {
    let mut r = ChaCha8Rng::seed_from_u64(7);
    (0..n)
        .map(|_| (random_op(&mut r, level, c), random_op(&mut r, level, c)))
        .collect()
}

fn products(cr: &mut Criterion) {
    let c = ctx();
    let pairs = batch(64, 1, &c);
    let mut g = cr.benchmark_group("products");
    let work = |(a, b): &(DiffOp, DiffOp)| a.op_mul(b, &c).unwrap();
    g.bench_function(BenchmarkId::new("sequential", pairs.len()), |b| {
        b.iter(|| map_sequential(&pairs, work))
    });
    g.bench_function(BenchmarkId::new("parallel", pairs.len()), |b| {
        b.iter(|| map_parallel(&pairs, work))
    });
    g.finish();
}

fn factorizations(cr: &mut Criterion) {
    let c = ctx();
    let ops: Vec<DiffOp> = batch(16, 2, &c).into_iter().map(|(a, _)| a).collect();
    assert!(ops.iter().all(|h| hensel_factor(h, &c).is_ok()));
    let mut g = cr.benchmark_group("hensel");
    g.sample_size(10);
    let work = |h: &DiffOp| hensel_factor(h, &c).map(|r| r.iterations).ok();
    g.bench_function(BenchmarkId::new("sequential", ops.len()), |b| {
        b.iter(|| map_sequential(&ops, work))
    });
    g.bench_function(BenchmarkId::new("parallel", ops.len()), |b| {
        b.iter(|| map_parallel(&ops, work))
    });
    g.finish();
}

fn tower_levels(cr: &mut Criterion) {
    let c = Context::new(5, 40, 32, 32).unwrap();
    let e = TowerElement::ProductFamily(ProductFamily::standard());
    let levels: Vec<u32> = (0..=6).collect();
    let mut g = cr.benchmark_group("tower levels");
    g.sample_size(10);
    let work = |&k: &u32| e.realize(k, &c).and_then(|h| h.nbar()).ok();
    g.bench_function("sequential", |b| b.iter(|| map_sequential(&levels, work)));
    g.bench_function("parallel", |b| b.iter(|| map_parallel(&levels, work)));
    g.finish();
}

criterion_group!(benches, products, factorizations, tower_levels);
criterion_main!(benches);
