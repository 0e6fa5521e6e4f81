//! Small prime-field arithmetic, Lagrange interpolation, and unique decoding
//! of corrupted evaluation sets (Berlekamp–Welch).

use crate::PirError;

/// Arithmetic mod a prime p < 2^32 (products fit u64).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrimeField {
    pub p: u64,
}

impl PrimeField {
    pub fn new(p: u64) -> Self {
        debug_assert!(p >= 2);
        PrimeField { p }
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        (a + b) % self.p
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        (a + self.p - b % self.p) % self.p
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        a * b % self.p
    }

    pub fn pow(&self, mut base: u64, mut e: u64) -> u64 {
        let mut acc = 1u64;
        base %= self.p;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Inverse by Fermat; p must be prime and a ≠ 0.
    pub fn inv(&self, a: u64) -> u64 {
        debug_assert!(a % self.p != 0);
        self.pow(a, self.p - 2)
    }

    /// Evaluate a coefficient-order polynomial at x.
    pub fn eval(&self, coeffs: &[u64], x: u64) -> u64 {
        let mut acc = 0u64;
        for c in coeffs.iter().rev() {
            acc = self.add(self.mul(acc, x), *c);
        }
        acc
    }

    /// Interpolate distinct points and evaluate at zero.
    pub fn lagrange_at_zero(&self, points: &[(u64, u64)]) -> u64 {
        let mut acc = 0u64;
        for (i, &(xi, yi)) in points.iter().enumerate() {
            let mut num = 1u64;
            let mut den = 1u64;
            for (j, &(xj, _)) in points.iter().enumerate() {
                if i != j {
                    num = self.mul(num, self.sub(0, xj));
                    den = self.mul(den, self.sub(xi, xj));
                }
            }
            acc = self.add(acc, self.mul(yi, self.mul(num, self.inv(den))));
        }
        acc
    }
}

/// Unique decoding of a degree-≤ t polynomial from k evaluations with at
/// most ν errors, ν ≤ ⌊(k−t−1)/2⌋. Returns the message polynomial and the
/// x-coordinates the error locator blames.
///
/// Solves R_i·E(x_i) = Q(x_i) for monic E of degree ν and Q of degree t+ν,
/// then requires the division Q/E to be exact.
pub fn berlekamp_welch(
    field: &PrimeField,
    points: &[(u64, u64)],
    t: usize,
    nu: usize,
) -> Result<(Vec<u64>, Vec<u64>), PirError> {
    let k = points.len();
    if nu == 0 {
        let poly = interpolate(field, points);
        return Ok((poly, Vec::new()));
    }
    let q_terms = t + nu + 1;
    let cols = q_terms + nu; // unknowns: q_0..q_{t+ν}, e_0..e_{ν−1}
    debug_assert!(k >= cols);

    // One row per point: Σ q_j x^j − y Σ_{j<ν} e_j x^j = y x^ν.
    let mut m = vec![vec![0u64; cols + 1]; k];
    for (row, &(x, y)) in points.iter().enumerate() {
        let mut xp = 1u64;
        for j in 0..q_terms {
            m[row][j] = xp;
            xp = field.mul(xp, x);
        }
        let mut xp = 1u64;
        for j in 0..nu {
            m[row][q_terms + j] = field.sub(0, field.mul(y, xp));
            xp = field.mul(xp, x);
        }
        m[row][cols] = field.mul(y, xp); // y·x^ν
    }

    let solution = solve_linear(field, &mut m, cols).ok_or(PirError::Robustness { suspected: vec![] })?;
    let q_poly = solution[..q_terms].to_vec();
    let mut e_poly = solution[q_terms..].to_vec();
    e_poly.push(1); // monic

    let (g, rem) = poly_divmod(field, &q_poly, &e_poly);
    if rem.iter().any(|&c| c != 0) || g.len() > t + 1 {
        return Err(PirError::Robustness { suspected: vec![] });
    }
    let suspects: Vec<u64> = points
        .iter()
        .map(|&(x, _)| x)
        .filter(|&x| field.eval(&e_poly, x) == 0)
        .collect();
    Ok((g, suspects))
}

fn interpolate(field: &PrimeField, points: &[(u64, u64)]) -> Vec<u64> {
    // Newton form would be cheaper; sizes here are ≤ 8 points.
    let mut acc = vec![0u64; points.len()];
    for (i, &(xi, yi)) in points.iter().enumerate() {
        let mut basis = vec![1u64];
        let mut den = 1u64;
        for (j, &(xj, _)) in points.iter().enumerate() {
            if i != j {
                basis = poly_mul(field, &basis, &[field.sub(0, xj), 1]);
                den = field.mul(den, field.sub(xi, xj));
            }
        }
        let scale = field.mul(yi, field.inv(den));
        for (a, b) in acc.iter_mut().zip(&basis) {
            *a = field.add(*a, field.mul(scale, *b));
        }
    }
    acc
}

fn poly_mul(field: &PrimeField, a: &[u64], b: &[u64]) -> Vec<u64> {
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        for (j, &bj) in b.iter().enumerate() {
            out[i + j] = field.add(out[i + j], field.mul(ai, bj));
        }
    }
    out
}

/// Divide a by b (b non-zero leading coefficient); returns (quotient, remainder).
fn poly_divmod(field: &PrimeField, a: &[u64], b: &[u64]) -> (Vec<u64>, Vec<u64>) {
    let blead = *b.last().expect("divisor non-empty");
    let binv = field.inv(blead);
    let mut rem = a.to_vec();
    let deg_b = b.len() - 1;
    if rem.len() <= deg_b {
        return (vec![0], rem);
    }
    let mut quot = vec![0u64; rem.len() - deg_b];
    for qi in (0..quot.len()).rev() {
        let lead = rem[qi + deg_b];
        if lead == 0 {
            continue;
        }
        let c = field.mul(lead, binv);
        quot[qi] = c;
        for (j, &bj) in b.iter().enumerate() {
            rem[qi + j] = field.sub(rem[qi + j], field.mul(c, bj));
        }
    }
    while rem.len() > 1 && *rem.last().unwrap() == 0 {
        rem.pop();
    }
    (quot, rem)
}

/// Gaussian elimination over F_p for an augmented system; any solution is
/// returned (free variables set to zero), or None if inconsistent.
fn solve_linear(field: &PrimeField, m: &mut [Vec<u64>], cols: usize) -> Option<Vec<u64>> {
    let rows = m.len();
    let mut pivot_of_col = vec![usize::MAX; cols];
    let mut row = 0usize;
    for col in 0..cols {
        if row >= rows {
            break;
        }
        let Some(p) = (row..rows).find(|&r| m[r][col] != 0) else { continue };
        m.swap(row, p);
        let inv = field.inv(m[row][col]);
        for v in m[row].iter_mut() {
            *v = field.mul(*v, inv);
        }
        for r in 0..rows {
            if r != row && m[r][col] != 0 {
                let factor = m[r][col];
                for c in 0..=cols {
                    let sub = field.mul(factor, m[row][c]);
                    m[r][c] = field.sub(m[r][c], sub);
                }
            }
        }
        pivot_of_col[col] = row;
        row += 1;
    }
    // Inconsistent if any zero row has a nonzero augment.
    for r in m.iter() {
        if r[..cols].iter().all(|&v| v == 0) && r[cols] != 0 {
            return None;
        }
    }
    let mut x = vec![0u64; cols];
    for (col, &pr) in pivot_of_col.iter().enumerate() {
        if pr != usize::MAX {
            x[col] = m[pr][cols];
        }
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    const F: PrimeField = PrimeField { p: 65537 };

    #[test]
    fn lagrange_recovers_constant_term() {
        // f(x) = 7 + 3x + 11x²
        let f = [7u64, 3, 11];
        let pts: Vec<(u64, u64)> = (1..=3).map(|x| (x, F.eval(&f, x))).collect();
        assert_eq!(F.lagrange_at_zero(&pts), 7);
    }

    #[test]
    fn bw_corrects_single_error() {
        let f = [42u64, 9]; // degree 1
        let mut pts: Vec<(u64, u64)> = (1..=5).map(|x| (x, F.eval(&f, x))).collect();
        pts[2].1 = F.add(pts[2].1, 12345); // corrupt x=3
        let (g, suspects) = berlekamp_welch(&F, &pts, 1, 1).unwrap();
        assert_eq!(F.eval(&g, 0), 42);
        assert_eq!(suspects, vec![3]);
    }

    #[test]
    fn bw_with_fewer_errors_than_radius() {
        let f = [100u64, 2, 3];
        let pts: Vec<(u64, u64)> = (1..=7).map(|x| (x, F.eval(&f, x))).collect();
        // ν budget 2, but zero actual errors
        let (g, suspects) = berlekamp_welch(&F, &pts, 2, 2).unwrap();
        assert_eq!(F.eval(&g, 0), 100);
        assert!(suspects.is_empty());
    }

    #[test]
    fn bw_fails_beyond_radius() {
        let f = [5u64, 1];
        let mut pts: Vec<(u64, u64)> = (1..=5).map(|x| (x, F.eval(&f, x))).collect();
        // 2 errors with t=1, k=5: radius is ⌊(5−1−1)/2⌋ = 1, so decoding at
        // ν=1 must not silently return the wrong polynomial.
        pts[0].1 ^= 1;
        pts[1].1 ^= 1;
        match berlekamp_welch(&F, &pts, 1, 1) {
            Err(PirError::Robustness { .. }) => {}
            Ok((g, _)) => assert_ne!(F.eval(&g, 0), 5, "must not decode to the original"),
            Err(e) => panic!("unexpected error {e:?}"),
        }
    }
}
