//! Dense polynomials over the prime field `F_p` and their factorization.

use num_bigint::BigUint;

/// Coefficients in increasing degree, trimmed of trailing zeros.
pub type Poly = Vec<u64>;

fn trim(mut f: Poly) -> Poly {
    while f.last() == Some(&0) {
        f.pop();
    }
    f
}

fn mulmod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn inv(a: u64, p: u64) -> u64 {
    let mut r = 1;
    let mut b = a % p;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod(r, b, p);
        }
        b = mulmod(b, b, p);
        e >>= 1;
    }
    r
}

pub fn degree(f: &[u64]) -> Option<usize> {
    f.iter().rposition(|&c| c != 0)
}

fn is_one(f: &[u64]) -> bool {
    f == [1]
}

pub fn from_residues(coeffs: &[u64], p: u64) -> Poly {
    trim(coeffs.iter().map(|c| c % p).collect())
}

pub fn sub(a: &[u64], b: &[u64], p: u64) -> Poly {
    let n = a.len().max(b.len());
    trim(
        (0..n)
            .map(|i| {
                let x = a.get(i).copied().unwrap_or(0);
                let y = b.get(i).copied().unwrap_or(0);
                (x + p - y) % p
            })
            .collect(),
    )
}

pub fn mul(a: &[u64], b: &[u64], p: u64) -> Poly {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + mulmod(x, y, p)) % p;
        }
    }
    trim(out)
}

/// Quotient and remainder; `b` must be nonzero.
pub fn divrem(a: &[u64], b: &[u64], p: u64) -> (Poly, Poly) {
    let db = degree(b).expect("division by the zero polynomial");
    let lead_inv = inv(b[db], p);
    let mut r = trim(a.to_vec());
    let mut q = vec![0; r.len().saturating_sub(db).max(1)];
    while let Some(dr) = degree(&r) {
        if dr < db {
            break;
        }
        let c = mulmod(r[dr], lead_inv, p);
        q[dr - db] = c;
        for (j, &y) in b.iter().enumerate() {
            r[dr - db + j] = (r[dr - db + j] + p - mulmod(c, y, p)) % p;
        }
        r = trim(r);
    }
    (trim(q), r)
}

pub fn monic(f: &[u64], p: u64) -> Poly {
    match degree(f) {
        None => vec![],
        Some(d) => {
            let c = inv(f[d], p);
            trim(f.iter().map(|&x| mulmod(x, c, p)).collect())
        }
    }
}

/// Monic greatest common divisor.
pub fn gcd(a: &[u64], b: &[u64], p: u64) -> Poly {
    let mut a = trim(a.to_vec());
    let mut b = trim(b.to_vec());
    while !b.is_empty() {
        let (_, r) = divrem(&a, &b, p);
        a = b;
        b = r;
    }
    monic(&a, p)
}

fn derivative(f: &[u64], p: u64) -> Poly {
    trim(
        f.iter()
            .enumerate()
            .skip(1)
            .map(|(i, &c)| mulmod(c, i as u64 % p, p))
            .collect(),
    )
}

fn pow_mod(base: &[u64], e: &BigUint, m: &[u64], p: u64) -> Poly {
    let mut result = vec![1];
    let base = divrem(base, m, p).1;
    for i in (0..e.bits()).rev() {
        result = divrem(&mul(&result, &result, p), m, p).1;
        if e.bit(i) {
            result = divrem(&mul(&result, &base, p), m, p).1;
        }
    }
    result
}

pub fn eval(f: &[u64], x: u64, p: u64) -> u64 {
    f.iter()
        .rev()
        .fold(0, |acc, &c| (mulmod(acc, x, p) + c) % p)
}

/// Squarefree decomposition of a monic polynomial as `(factor, multiplicity)` pairs.
fn squarefree(f: &[u64], p: u64) -> Vec<(Poly, usize)> {
    let mut out = Vec::new();
    let mut c = gcd(f, &derivative(f, p), p);
    let mut w = divrem(f, &c, p).0;
    let mut i = 1;
    while !is_one(&w) {
        let y = gcd(&w, &c, p);
        let z = divrem(&w, &y, p).0;
        if degree(&z).unwrap_or(0) > 0 {
            out.push((monic(&z, p), i));
        }
        i += 1;
        w = y;
        c = divrem(&c, &w, p).0;
    }
    if degree(&c).unwrap_or(0) > 0 {
        let root: Poly = c.iter().step_by(p as usize).copied().collect();
        for (g, m) in squarefree(&monic(&root, p), p) {
            out.push((g, m * p as usize));
        }
    }
    out
}

/// Splits a squarefree monic polynomial into products of irreducibles of equal degree.
fn distinct_degree(f: &[u64], p: u64) -> Vec<(Poly, usize)> {
    let mut out = Vec::new();
    let mut rest = f.to_vec();
    let x = vec![0, 1];
    let mut h = x.clone();
    let pb = BigUint::from(p);
    let mut i = 1;
    while degree(&rest).unwrap_or(0) >= 2 * i {
        h = pow_mod(&h, &pb, &rest, p);
        let g = gcd(&sub(&h, &x, p), &rest, p);
        if !is_one(&g) {
            out.push((g.clone(), i));
            rest = divrem(&rest, &g, p).0;
            h = divrem(&h, &rest, p).1;
        }
        i += 1;
    }
    if let Some(d) = degree(&rest).filter(|&d| d > 0) {
        out.push((monic(&rest, p), d));
    }
    out
}

/// Enumerates every nonconstant polynomial of degree below `n`, in a fixed order.
fn candidate(index: u64, p: u64) -> Poly {
    let mut v = Vec::new();
    let mut k = index;
    while k > 0 {
        v.push(k % p);
        k /= p;
    }
    trim(v)
}

/// Splits a product of distinct irreducibles of degree `d` into its factors.
fn equal_degree(f: &[u64], d: usize, p: u64) -> Vec<Poly> {
    let n = degree(f).unwrap_or(0);
    if n <= d {
        return vec![monic(f, p)];
    }
    let q = BigUint::from(p).pow(d as u32);
    let mut index = p;
    loop {
        let a = candidate(index, p);
        index += 1;
        if degree(&a).unwrap_or(0) >= n {
            continue;
        }
        let b = if p == 2 {
            let mut acc = a.clone();
            let mut cur = a.clone();
            for _ in 1..d {
                cur = divrem(&mul(&cur, &cur, p), f, p).1;
                acc = sub(&acc, &sub(&[], &cur, p), p);
            }
            acc
        } else {
            let e = (&q - 1u32) / 2u32;
            sub(&pow_mod(&a, &e, f, p), &[1], p)
        };
        let g = gcd(&b, f, p);
        let dg = degree(&g).unwrap_or(0);
        if dg > 0 && dg < n {
            let h = divrem(f, &g, p).0;
            let mut out = equal_degree(&g, d, p);
            out.extend(equal_degree(&monic(&h, p), d, p));
            return out;
        }
    }
}

/// Monic irreducible factors with multiplicities, ordered by degree then coefficients.
pub fn factor(f: &[u64], p: u64) -> Vec<(Poly, usize)> {
    let f = monic(f, p);
    if degree(&f).unwrap_or(0) == 0 {
        return vec![];
    }
    let mut out = Vec::new();
    for (s, m) in squarefree(&f, p) {
        for (g, d) in distinct_degree(&s, p) {
            for h in equal_degree(&g, d, p) {
                out.push((h, m));
            }
        }
    }
    out.sort_by(|a, b| {
        (a.0.len(), a.0.iter().rev().collect::<Vec<_>>())
            .cmp(&(b.0.len(), b.0.iter().rev().collect()))
    });
    out
}

/// Renders a polynomial in `t`, writing coefficients as residues in `0..p`.
pub fn render(f: &[u64]) -> String {
    if f.is_empty() {
        return "0".into();
    }
    let mut parts = Vec::new();
    for (i, &c) in f.iter().enumerate().rev() {
        if c == 0 {
            continue;
        }
        let mono = match i {
            0 => String::new(),
            1 => "t".into(),
            _ => format!("t^{i}"),
        };
        parts.push(match (c, i) {
            (_, 0) => c.to_string(),
            (1, _) => mono,
            _ => format!("{c}*{mono}"),
        });
    }
    parts.join(" + ")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn expand(fs: &[(Poly, usize)], p: u64) -> Poly {
        let mut acc = vec![1];
        for (g, m) in fs {
            for _ in 0..*m {
                acc = mul(&acc, g, p);
            }
        }
        acc
    }

    #[test]
    fn factors_t_squared_minus_t() {
        let f = factor(&[0, 4, 1], 5);
        assert_eq!(f, vec![(vec![0, 1], 1), (vec![4, 1], 1)]);
    }

    #[test]
    fn repeated_and_irreducible_factors() {
        let p = 5;
        let irr = vec![2, 0, 1];
        let f = mul(&mul(&[0, 1], &[0, 1], p), &mul(&irr, &irr, p), p);
        assert_eq!(factor(&f, p), vec![(vec![0, 1], 2), (irr, 2)]);
    }

    #[test]
    fn pth_powers_are_detected() {
        let p = 3;
        let f = vec![1, 0, 0, 1];
        assert_eq!(factor(&f, p), vec![(vec![1, 1], 3)]);
    }

    #[test]
    fn splits_products_of_quadratics_in_char_two() {
        let p = 2;
        let a = vec![1, 1, 1];
        let b = vec![1, 1, 0, 0, 1];
        let c = vec![1, 0, 0, 1, 1];
        let f = mul(&mul(&a, &b, p), &c, p);
        let fs = factor(&f, p);
        assert_eq!(expand(&fs, p), monic(&f, p));
        assert_eq!(fs.len(), 3);
    }

    #[test]
    fn factorization_multiplies_back() {
        for p in [2u64, 3, 5, 7] {
            for seed in 1..40u64 {
                let f: Poly = (0..9)
                    .map(|i| (seed * 7919 + i * i * 31 + i * seed) % p)
                    .chain([1])
                    .collect();
                let fs = factor(&f, p);
                assert_eq!(expand(&fs, p), monic(&f, p), "p={p} seed={seed}");
                for (g, _) in &fs {
                    let d = degree(g).unwrap();
                    let x = vec![0, 1];
                    for i in 1..=d / 2 {
                        let e = BigUint::from(p).pow(i as u32);
                        let h = pow_mod(&x, &e, g, p);
                        assert!(is_one(&gcd(&sub(&h, &x, p), g, p)), "{g:?} reducible");
                    }
                }
            }
        }
    }

    #[test]
    fn renders_residues() {
        assert_eq!(render(&[4, 1]), "t + 4");
        assert_eq!(render(&[2, 0, 3]), "3*t^2 + 2");
    }
}
