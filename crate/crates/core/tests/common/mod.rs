#![allow(dead_code)]

use manna::{Allocation, Instance, PriceVector, Rational, Scalar};
use proptest::prelude::*;

pub fn r(n: i64, d: i64) -> Rational {
    Rational::ratio(n, d)
}

pub fn ri(n: i64) -> Rational {
    Rational::from_int(n)
}

pub fn unit(rows: &[Vec<i64>]) -> Instance<Rational> {
    Instance::unit(rows.iter().map(|r| r.iter().map(|&v| ri(v)).collect()).collect()).unwrap()
}

pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out.sort();
    out
}

/// Convex combination of permutation matrices with integer weights.
pub fn mix(n: usize, weights: &[u32]) -> Allocation<Rational> {
    let perms = permutations(n);
    let mut weights: Vec<u32> = weights.iter().take(perms.len()).copied().collect();
    if weights.iter().all(|&w| w == 0) {
        weights[0] = 1;
    }
    let total: u32 = weights.iter().sum();
    let mut rows = vec![vec![ri(0); n]; n];
    for (p, &w) in perms.iter().zip(&weights) {
        for (i, &j) in p.iter().enumerate() {
            rows[i][j] += r(w as i64, total as i64);
        }
    }
    Allocation::from_rows(rows)
}

pub fn quarter_prices(ks: &[u32]) -> PriceVector<Rational> {
    PriceVector::new(ks.iter().map(|&k| r(k as i64, 4)).collect()).unwrap()
}

/// Square unit-demand instance with integer utilities in `[lo, hi]`.
pub fn arb_instance(lo: i64, hi: i64) -> impl Strategy<Value = Vec<Vec<i64>>> {
    (2usize..=3).prop_flat_map(move |n| prop::collection::vec(prop::collection::vec(lo..=hi, n), n))
}

/// Weights over the `n!` permutations, never all zero.
pub fn arb_weights() -> impl Strategy<Value = Vec<u32>> {
    prop::collection::vec(0u32..4, 6).prop_map(|mut w| {
        if w.iter().all(|&x| x == 0) {
            w[0] = 1;
        }
        w
    })
}

/// Solves the square system `a x = b` exactly; `None` if singular.
pub fn gauss(mut a: Vec<Vec<Rational>>, mut b: Vec<Rational>) -> Option<Vec<Rational>> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n).find(|&k| a[k][c] != ri(0))?;
        a.swap(c, p);
        b.swap(c, p);
        for k in 0..n {
            if k != c && a[k][c] != ri(0) {
                let f = a[k][c].clone() / a[c][c].clone();
                for j in c..n {
                    let v = a[c][j].clone() * f.clone();
                    a[k][j] -= v;
                }
                let v = b[c].clone() * f;
                b[k] -= v;
            }
        }
    }
    Some((0..n).map(|i| b[i].clone() / a[i][i].clone()).collect())
}

/// All `k`-subsets of `0..n`.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if n < k {
        return vec![];
    }
    let mut out = subsets(n - 1, k);
    for mut s in subsets(n - 1, k - 1) {
        s.push(n - 1);
        out.push(s);
    }
    out
}

/// Grid allocations of a square unit-demand instance with entries in
/// multiples of `1/steps`.
pub fn grid_allocations(n: usize, steps: i64) -> Vec<Allocation<Rational>> {
    let mut out = Vec::new();
    let mut cur = vec![0i64; n * n];
    fn rec(n: usize, steps: i64, pos: usize, cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if pos == n * n {
            if (0..n).all(|j| (0..n).map(|i| cur[i * n + j]).sum::<i64>() == steps) {
                out.push(cur.clone());
            }
            return;
        }
        let (i, j) = (pos / n, pos % n);
        let row: i64 = (0..j).map(|k| cur[i * n + k]).sum();
        let col: i64 = (0..i).map(|k| cur[k * n + j]).sum();
        let hi = (steps - row).min(steps - col);
        let range: Vec<i64> = if j == n - 1 { vec![steps - row] } else { (0..=hi).collect() };
        for v in range {
            if v > steps - col {
                continue;
            }
            cur[pos] = v;
            rec(n, steps, pos + 1, cur, out);
        }
        cur[pos] = 0;
    }
    let mut raw = Vec::new();
    rec(n, steps, 0, &mut cur, &mut raw);
    for c in raw {
        out.push(Allocation::from_flat(
            &c.iter().map(|&v| r(v, steps)).collect::<Vec<_>>(),
            n,
            n,
        ));
    }
    out
}
