//! The coefficient complex on `j` labels: level `q` has one basis vector per
//! `q`-subset of `0..j` (bit masks, colex order) and
//! `d e_I = sum_{s not in I} sign(I, s) e_{I + s}`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;

use super::SignRule;

pub(crate) struct LocalComplex {
    /// `d_{q+1} d_q = 0` on every basis vector.
    pub chain_ok: bool,
    /// `ranks[q] = rank d_q` for `q < j`; `None` if elimination overflowed.
    pub ranks: Option<Vec<u64>>,
}

type Cache = Mutex<HashMap<(usize, SignRule), Arc<LocalComplex>>>;
type NormCache = Mutex<HashMap<(usize, usize, SignRule), f64>>;

static COMPLEXES: OnceLock<Cache> = OnceLock::new();
static NORMS: OnceLock<NormCache> = OnceLock::new();

/// Memoized: the complex only depends on `j` and the sign rule.
pub(crate) fn local_complex(j: usize, rule: SignRule) -> Arc<LocalComplex> {
    let cache = COMPLEXES.get_or_init(Default::default);
    if let Some(c) = cache.lock().unwrap().get(&(j, rule)) {
        return c.clone();
    }
    let built = Arc::new(LocalComplex {
        chain_ok: check_square_zero(j, rule),
        ranks: (0..j)
            .into_par_iter()
            .map(|q| differential_rank(j, q, rule))
            .collect(),
    });
    cache
        .lock()
        .unwrap()
        .entry((j, rule))
        .or_insert(built)
        .clone()
}

fn sign(rule: SignRule, mask: u32, s: usize) -> i64 {
    rule.sign((mask & ((1u32 << s) - 1)).count_ones() as usize)
}

fn check_square_zero(j: usize, rule: SignRule) -> bool {
    let full = if j == 32 { u32::MAX } else { (1u32 << j) - 1 };
    (0..=full).into_par_iter().all(|mask| {
        (0..j).filter(|&s| mask & (1 << s) == 0).all(|s| {
            let with_s = mask | (1 << s);
            (s + 1..j).filter(|&t| mask & (1 << t) == 0).all(|t| {
                let with_t = mask | (1 << t);
                sign(rule, mask, s) * sign(rule, with_s, t)
                    + sign(rule, mask, t) * sign(rule, with_t, s)
                    == 0
            })
        })
    })
}

/// Table of `C(n, r)` for `n, r <= 32`.
fn binomials() -> &'static [[u64; 33]; 33] {
    static TABLE: OnceLock<[[u64; 33]; 33]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [[0u64; 33]; 33];
        for n in 0..33 {
            t[n][0] = 1;
            for r in 1..=n {
                t[n][r] = t[n - 1][r - 1] + t[n - 1][r];
            }
        }
        t
    })
}

/// Position of a mask among masks of the same popcount, in colex order.
fn colex_index(mask: u32) -> usize {
    let c = binomials();
    let mut idx = 0;
    let mut t = 0;
    let mut m = mask;
    while m != 0 {
        let bit = m.trailing_zeros() as usize;
        t += 1;
        idx += c[bit][t] as usize;
        m &= m - 1;
    }
    idx
}

/// Masks of popcount `q` in colex order.
fn level_masks(j: usize, q: usize) -> Vec<u32> {
    if q > j {
        return Vec::new();
    }
    let mut out = Vec::with_capacity(binomials()[j][q] as usize);
    if q == 0 {
        out.push(0);
        return out;
    }
    // Gosper's hack walks same-popcount masks in increasing order
    let mut m: u32 = (1u32 << q) - 1;
    let limit: u64 = 1u64 << j;
    while (m as u64) < limit {
        out.push(m);
        let c = m & m.wrapping_neg();
        let r = m.wrapping_add(c);
        if r == 0 {
            break;
        }
        m = (((r ^ m) >> 2) / c) | r;
    }
    out
}

/// `d_q` as sparse rows indexed by level `q + 1`.
fn differential_rows(j: usize, q: usize, rule: SignRule) -> Vec<Vec<(u32, i64)>> {
    level_masks(j, q + 1)
        .into_iter()
        .map(|target| {
            let mut row: Vec<(u32, i64)> = (0..j)
                .filter(|&s| target & (1 << s) != 0)
                .map(|s| {
                    let source = target & !(1 << s);
                    (colex_index(source) as u32, sign(rule, source, s))
                })
                .collect();
            row.sort_unstable_by_key(|e| e.0);
            row
        })
        .collect()
}

fn differential_rank(j: usize, q: usize, rule: SignRule) -> Option<u64> {
    let cols = binomials()[j][q] as usize;
    // Reverse colex feeds the rows containing the top label first; their
    // leading entries sit on distinct columns, so the remaining rows reduce
    // without fill-in among the columns that avoid the top label.
    let mut rows = differential_rows(j, q, rule);
    rows.reverse();
    integer_rank(cols, rows)
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.unsigned_abs(), b.unsigned_abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a as i64
}

/// `alpha * r - beta * p`, dropping zeros and dividing out the content.
fn combine(alpha: i64, r: &[(u32, i64)], beta: i64, p: &[(u32, i64)]) -> Option<Vec<(u32, i64)>> {
    let mut out = Vec::with_capacity(r.len() + p.len());
    let (mut a, mut b) = (0, 0);
    while a < r.len() || b < p.len() {
        let ca = r.get(a).map_or(u32::MAX, |e| e.0);
        let cb = p.get(b).map_or(u32::MAX, |e| e.0);
        let (col, v) = if ca < cb {
            a += 1;
            (ca, alpha.checked_mul(r[a - 1].1)?)
        } else if cb < ca {
            b += 1;
            (cb, beta.checked_mul(p[b - 1].1)?.checked_neg()?)
        } else {
            a += 1;
            b += 1;
            let x = alpha.checked_mul(r[a - 1].1)?;
            let y = beta.checked_mul(p[b - 1].1)?;
            (ca, x.checked_sub(y)?)
        };
        if v != 0 {
            out.push((col, v));
        }
    }
    let g = out.iter().fold(0, |g, e| gcd(g, e.1));
    if g > 1 {
        out.iter_mut().for_each(|e| e.1 /= g);
    }
    Some(out)
}

/// Rank over the rationals of an integer matrix given by sparse rows
/// (column-sorted), by fraction-free elimination to echelon form.
/// `None` if an intermediate entry overflows `i64`.
pub fn integer_rank(cols: usize, rows: Vec<Vec<(u32, i64)>>) -> Option<u64> {
    let mut pivots: Vec<Option<Vec<(u32, i64)>>> = vec![None; cols];
    let mut rank = 0;
    for mut r in rows {
        r.retain(|e| e.1 != 0);
        while let Some(&(lead, a)) = r.first() {
            let slot = pivots.get_mut(lead as usize)?;
            match slot {
                None => {
                    *slot = Some(r);
                    rank += 1;
                    break;
                }
                Some(p) => {
                    let pv = p[0].1;
                    let g = gcd(pv, a);
                    r = combine(pv / g, &r, a / g, p)?;
                }
            }
        }
    }
    Some(rank)
}

/// Largest singular value of `d_q` on `j` labels by power iteration on
/// `d^T d`.
pub(crate) fn differential_norm(j: usize, q: usize, rule: SignRule) -> f64 {
    let cache = NORMS.get_or_init(Default::default);
    if let Some(&v) = cache.lock().unwrap().get(&(j, q, rule)) {
        return v;
    }
    let rows = differential_rows(j, q, rule);
    let cols = binomials()[j][q] as usize;
    let mut x: Vec<f64> = (0..cols).map(|i| 1.0 + (i % 7) as f64 / 10.0).collect();
    let mut lambda = 0.0;
    for _ in 0..500 {
        let y: Vec<f64> = rows
            .iter()
            .map(|row| row.iter().map(|&(c, v)| v as f64 * x[c as usize]).sum())
            .collect();
        let mut z = vec![0.0; cols];
        for (row, yr) in rows.iter().zip(&y) {
            for &(c, v) in row {
                z[c as usize] += v as f64 * yr;
            }
        }
        let norm = z.iter().map(|v| v * v).sum::<f64>().sqrt();
        let xnorm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            lambda = 0.0;
            break;
        }
        let next = norm / xnorm;
        x = z.into_iter().map(|v| v / norm).collect();
        let done = (next - lambda).abs() <= 1e-14 * next;
        lambda = next;
        if done {
            break;
        }
    }
    let value = lambda.sqrt();
    cache.lock().unwrap().insert((j, q, rule), value);
    value
}
