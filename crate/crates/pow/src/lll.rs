//! Exact integral LLL reduction and Schnorr–Euchner enumeration.
//!
//! Puzzle lattices carry 10n-bit entries, far beyond what floating-point
//! Gram-Schmidt tolerates, so reduction runs entirely in integer arithmetic
//! (the λ/d representation: d[i+1] is the Gram determinant of the leading
//! i+1 rows and λ[i][j] = d[j+1]·μ_ij). For these determinant-p lattices the
//! intermediate integers stay near p², keeping the reduction fast.
//!
//! Enumeration runs on a float GSO of the already-reduced basis, whose
//! entries are small; every candidate is re-checked with exact integer
//! arithmetic before being reported.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub fn dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    let mut s = BigInt::zero();
    for (x, y) in a.iter().zip(b) {
        s += x * y;
    }
    s
}

pub fn norm_sq(v: &[BigInt]) -> BigUint {
    dot(v, v).to_biguint().expect("square norm is non-negative")
}

fn round_div(num: &BigInt, den: &BigInt) -> BigInt {
    // nearest integer to num/den for den > 0
    ((num << 1u32) + den).div_floor(&(den << 1u32))
}

/// In-place LLL reduction with δ = 99/100 over exact integers.
pub fn lll_reduce(rows: &mut [Vec<BigInt>]) {
    let n = rows.len();
    if n <= 1 {
        return;
    }
    let mut lam = vec![vec![BigInt::zero(); n]; n];
    let mut d = vec![BigInt::one(); n + 1];
    for i in 0..n {
        for j in 0..=i {
            let mut u = dot(&rows[i], &rows[j]);
            for k in 0..j {
                u = (&d[k + 1] * &u - &lam[i][k] * &lam[j][k]) / &d[k];
            }
            if j < i {
                lam[i][j] = u;
            } else {
                d[i + 1] = u;
            }
        }
    }

    let red = |rows: &mut [Vec<BigInt>], lam: &mut Vec<Vec<BigInt>>, d: &[BigInt], k: usize, l: usize| {
        if (&lam[k][l]).abs() << 1u32 <= d[l + 1] {
            return;
        }
        let q = round_div(&lam[k][l], &d[l + 1]);
        let (lo, hi) = rows.split_at_mut(k);
        for (x, y) in hi[0].iter_mut().zip(lo[l].iter()) {
            *x -= &q * y;
        }
        let qd = &q * &d[l + 1];
        lam[k][l] -= qd;
        for i in 0..l {
            let ql = &q * &lam[l][i];
            lam[k][i] -= ql;
        }
    };

    let mut k = 1usize;
    while k < n {
        red(rows, &mut lam, &d, k, k - 1);
        // Lovász with δ = 99/100: swap when
        // 100·(d[k+1]·d[k-1] + λ²) < 99·d[k]².
        let lhs: BigInt = (&d[k + 1] * &d[k - 1] + &lam[k][k - 1] * &lam[k][k - 1]) * 100;
        let rhs: BigInt = &d[k] * &d[k] * 99;
        if lhs < rhs {
            rows.swap(k, k - 1);
            for j in 0..k.saturating_sub(1) {
                let tmp = lam[k][j].clone();
                lam[k][j] = lam[k - 1][j].clone();
                lam[k - 1][j] = tmp;
            }
            let lambar = lam[k][k - 1].clone();
            let bq: BigInt = (&d[k - 1] * &d[k + 1] + &lambar * &lambar) / &d[k];
            for i in (k + 1)..n {
                let t = lam[i][k].clone();
                lam[i][k] = (&d[k + 1] * &lam[i][k - 1] - &lambar * &t) / &d[k];
                lam[i][k - 1] = (&bq * &t + &lambar * &lam[i][k]) / &d[k + 1];
            }
            d[k] = bq;
            k = k.max(2) - 1;
        } else {
            for l in (0..k.saturating_sub(1)).rev() {
                red(rows, &mut lam, &d, k, l);
            }
            k += 1;
        }
    }
}

/// Float Gram-Schmidt data of a (reduced, small-entry) basis.
pub struct Gso {
    pub mu: Vec<Vec<f64>>,
    pub bstar_sq: Vec<f64>,
}

pub fn gso(rows: &[Vec<BigInt>]) -> Gso {
    let n = rows.len();
    let mut gram = vec![vec![0f64; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let g = dot(&rows[i], &rows[j]).to_f64().unwrap_or(f64::MAX);
            gram[i][j] = g;
            gram[j][i] = g;
        }
    }
    let mut mu = vec![vec![0f64; n]; n];
    let mut bstar_sq = vec![0f64; n];
    for i in 0..n {
        for j in 0..i {
            let mut v = gram[i][j];
            for k in 0..j {
                v -= mu[i][k] * mu[j][k] * bstar_sq[k];
            }
            mu[i][j] = if bstar_sq[j] > 0.0 { v / bstar_sq[j] } else { 0.0 };
        }
        let mut v = gram[i][i];
        for k in 0..i {
            v -= mu[i][k] * mu[i][k] * bstar_sq[k];
        }
        bstar_sq[i] = v.max(0.0);
    }
    Gso { mu, bstar_sq }
}

/// Schnorr–Euchner search for the first lattice vector whose exact squared
/// norm is ≤ `target_sq`. Returns `Ok(None)` if the search space within the
/// float radius is exhausted, `Err(nodes)` if the node budget ran out.
pub fn enumerate_first_below(
    rows: &[Vec<BigInt>],
    target_sq: &BigUint,
    budget: u64,
) -> Result<Option<Vec<BigInt>>, u64> {
    let n = rows.len();
    if n == 0 {
        return Ok(None);
    }
    let g = gso(rows);
    // Small inflation so exact solutions on the boundary are not lost to
    // float rounding; candidates are filtered by the exact check anyway.
    let radius_sq = target_sq.to_f64().unwrap_or(f64::MAX) * (1.0 + 1e-9);

    let mut x = vec![0i64; n];
    let mut center = vec![0f64; n];
    let mut dist = vec![0f64; n + 1]; // dist[k] = partial norm of levels k..n-1
    let mut trial = vec![0u64; n];
    let mut rounded = vec![0i64; n];
    let mut dir = vec![1i64; n];

    let enter_level = |k: usize,
                       x: &mut [i64],
                       center: &mut [f64],
                       trial: &mut [u64],
                       rounded: &mut [i64],
                       dir: &mut [i64],
                       g: &Gso| {
        let mut c = 0f64;
        for j in k + 1..n {
            c -= x[j] as f64 * g.mu[j][k];
        }
        center[k] = c;
        let r = c.round();
        rounded[k] = r as i64;
        dir[k] = if c - r >= 0.0 { 1 } else { -1 };
        trial[k] = 0;
        x[k] = rounded[k];
    };

    let offset = |t: u64, dir: i64| -> i64 {
        // 0, +d, -d, +2d, -2d, ... around the rounded center
        let step = t.div_ceil(2) as i64;
        if t % 2 == 1 {
            step * dir
        } else {
            -step * dir
        }
    };

    let mut nodes = 0u64;
    let mut k = n - 1;
    enter_level(k, &mut x, &mut center, &mut trial, &mut rounded, &mut dir, &g);
    loop {
        nodes += 1;
        if nodes > budget {
            return Err(nodes);
        }
        let diff = x[k] as f64 - center[k];
        let new_dist = dist[k + 1] + diff * diff * g.bstar_sq[k];
        if new_dist <= radius_sq {
            if k == 0 {
                if x.iter().any(|&c| c != 0) {
                    let v = combine(rows, &x);
                    if norm_sq(&v) <= *target_sq {
                        return Ok(Some(v));
                    }
                }
                trial[0] += 1;
                x[0] = rounded[0] + offset(trial[0], dir[0]);
            } else {
                dist[k] = new_dist;
                k -= 1;
                enter_level(k, &mut x, &mut center, &mut trial, &mut rounded, &mut dir, &g);
            }
        } else {
            // Zigzag distances are monotone per level, so the level is done.
            k += 1;
            if k == n {
                return Ok(None);
            }
            trial[k] += 1;
            x[k] = rounded[k] + offset(trial[k], dir[k]);
        }
    }
}

fn combine(rows: &[Vec<BigInt>], coeffs: &[i64]) -> Vec<BigInt> {
    let width = rows[0].len();
    let mut v = vec![BigInt::zero(); width];
    for (c, row) in coeffs.iter().zip(rows) {
        if *c != 0 {
            let cb = BigInt::from(*c);
            for (acc, e) in v.iter_mut().zip(row) {
                *acc += &cb * e;
            }
        }
    }
    v
}
