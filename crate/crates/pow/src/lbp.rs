//! Lattice shortest-vector client puzzles.
//!
//! A puzzle is a random determinant-p lattice: the basis matrix has first
//! row [p, x_2, …, x_n] and ones on the diagonal of the remaining rows, so
//! membership means v₀ ≡ Σ x_{j+1}·v_j (mod p). The solver must present a
//! nonzero lattice vector v = B·ν with ‖v‖ ≤ α·p^{1/n}, where α is 1.05× the
//! Gaussian-heuristic radius. Generation plants a vector inside the bound
//! (one basis sample is solved for, statistically indistinguishable from
//! uniform), so every issued puzzle is solvable at every dimension; at small
//! n an unplanted lattice misses the bound with constant probability.
//!
//! Verification is exact integer arithmetic; the norm bound (α·p^{1/n})² is
//! evaluated to 128 fractional bits and rounded down, so rounding can only
//! reject borderline vectors.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::RngCore;

use crate::lll::{self, norm_sq};
use crate::primes::{random_below, random_prime};
use crate::PowError;

/// Bits per serialized lattice value (and prime width): 10·n.
pub fn value_bits(n_dim: usize) -> usize {
    10 * n_dim
}

/// Classical solver-cost exponent from lattice dimension: ~2^(0.2925·n).
pub fn kappa_for_dim(n_dim: usize) -> u32 {
    (0.2925 * n_dim as f64).floor() as u32
}

/// Smallest dimension whose solver cost reaches 2^κ, floored at 10.
pub fn dim_for_kappa(kappa: u32) -> usize {
    ((kappa as f64 / 0.2925).ceil() as usize).max(10)
}

/// ln Γ(n/2 + 1) by exact log-factorial summation.
fn ln_gamma_half_plus_one(n: usize) -> f64 {
    let ln_factorial = |m: usize| -> f64 { (2..=m).map(|k| (k as f64).ln()).sum() };
    if n % 2 == 0 {
        ln_factorial(n / 2)
    } else {
        // Γ(m + 1/2) = √π · (2m)! / (4^m · m!) with m = (n+1)/2
        let m = (n + 1) / 2;
        0.5 * std::f64::consts::PI.ln() + ln_factorial(2 * m)
            - m as f64 * 4f64.ln()
            - ln_factorial(m)
    }
}

/// Approximation factor α = 1.05 · Γ(n/2+1)^{1/n} / √π.
pub fn alpha_for_dim(n_dim: usize) -> f64 {
    1.05 * (ln_gamma_half_plus_one(n_dim) / n_dim as f64).exp() / std::f64::consts::PI.sqrt()
}

/// Puzzle instance: Π = (α, n_Λ, B, p). The basis B is determined by p and
/// the sampled values, so only those are stored.
#[derive(Debug, Clone, PartialEq)]
pub struct LbpPuzzle {
    pub alpha: f64,
    pub n_dim: usize,
    pub p: BigUint,
    /// x_2 … x_n, uniform in [0, p).
    pub xs: Vec<BigUint>,
}

/// Solution Ψ = (v, ν) with v = B·ν.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LbpSolution {
    pub v: Vec<BigInt>,
    pub nu: Vec<BigInt>,
}

/// Solver effort limits.
#[derive(Debug, Clone, Copy)]
pub struct SolveEffort {
    /// Enumeration node budget after reduction.
    pub enum_budget: u64,
}

impl Default for SolveEffort {
    fn default() -> Self {
        SolveEffort { enum_budget: 200_000_000 }
    }
}

impl LbpPuzzle {
    /// Exact squared norm bound ⌊(α·p^{1/n})²⌋, computed to 128 fractional
    /// bits and rounded down.
    pub fn norm_bound_sq(&self) -> BigUint {
        norm_bound_sq(self.alpha, self.n_dim, &self.p)
    }

    /// Basis rows spanning the lattice (the transpose view of B, so that
    /// coefficient vectors multiply from the left).
    pub fn basis_rows(&self) -> Vec<Vec<BigInt>> {
        let n = self.n_dim;
        let mut rows = vec![vec![BigInt::zero(); n]; n];
        rows[0][0] = BigInt::from(self.p.clone());
        for j in 1..n {
            rows[j][0] = BigInt::from(self.xs[j - 1].clone());
            rows[j][j] = BigInt::one();
        }
        rows
    }

    /// Bit-packed serialization: p ∥ x_2..x_n at 10n bits each, then α as an
    /// f32 and n_Λ as a u32, both little-endian.
    pub fn to_bytes(&self) -> Vec<u8> {
        let vbits = value_bits(self.n_dim);
        let total_bits = vbits * self.n_dim;
        let mut w = BitWriter::with_bit_capacity(total_bits);
        w.push_uint(&self.p, vbits);
        for x in &self.xs {
            w.push_uint(x, vbits);
        }
        let mut out = w.finish();
        out.extend_from_slice(&(self.alpha as f32).to_le_bytes());
        out.extend_from_slice(&(self.n_dim as u32).to_le_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<LbpPuzzle, PowError> {
        if bytes.len() < 8 {
            return Err(PowError::Encoding("lattice puzzle too short".into()));
        }
        let n_dim = u32::from_le_bytes(bytes[bytes.len() - 4..].try_into().unwrap()) as usize;
        let alpha_f32 = f32::from_le_bytes(bytes[bytes.len() - 8..bytes.len() - 4].try_into().unwrap());
        if n_dim < 2 {
            return Err(PowError::Encoding("lattice dimension below 2".into()));
        }
        let vbits = value_bits(n_dim);
        let expected = (vbits * n_dim).div_ceil(8) + 8;
        if bytes.len() != expected {
            return Err(PowError::Encoding(format!(
                "lattice puzzle length {} != expected {expected}",
                bytes.len()
            )));
        }
        let mut r = BitReader::new(&bytes[..bytes.len() - 8]);
        let p = r.read_uint(vbits);
        let xs: Vec<BigUint> = (1..n_dim).map(|_| r.read_uint(vbits)).collect();
        if p.bits() as usize != vbits {
            return Err(PowError::Encoding("prime width mismatch".into()));
        }
        if xs.iter().any(|x| x >= &p) {
            return Err(PowError::Encoding("basis value not reduced mod p".into()));
        }
        // α is derived from the dimension; the stored f32 is a consistency
        // check, not the arithmetic source (f32 is too coarse for the bound).
        let alpha = alpha_for_dim(n_dim);
        if (alpha as f32) != alpha_f32 {
            return Err(PowError::Encoding("approximation factor mismatch".into()));
        }
        Ok(LbpPuzzle { alpha, n_dim, p, xs })
    }
}

/// Generate a puzzle of dimension `n_dim` with a planted in-bound vector.
pub fn lbp_gen(n_dim: usize, rng: &mut dyn RngCore) -> Result<LbpPuzzle, PowError> {
    if n_dim < 2 {
        return Err(PowError::Parameter(format!("lattice dimension {n_dim} < 2")));
    }
    let vbits = value_bits(n_dim) as u64;
    let p = random_prime(vbits, rng);
    let mut xs: Vec<BigUint> = (1..n_dim).map(|_| random_below(&p, rng)).collect();

    let alpha = alpha_for_dim(n_dim);
    let bound_sq = norm_bound_sq(alpha, n_dim, &p);
    let v = sample_planted_vector(n_dim, &bound_sq, rng);

    // Solve the membership congruence v₀ ≡ Σ x_{j+1}·v_j (mod p) for one
    // coordinate with a nonzero cofactor.
    let pivot = (1..n_dim).rev().find(|&j| !v[j].is_zero()).expect("planted vector has a nonzero tail");
    let pb = BigInt::from(p.clone());
    let mut rhs = v[0].clone();
    for j in 1..n_dim {
        if j != pivot {
            rhs -= BigInt::from(xs[j - 1].clone()) * &v[j];
        }
    }
    let inv = mod_inverse(&v[pivot], &pb).expect("|v_pivot| < p is invertible");
    let x_pivot = (rhs * inv).mod_floor(&pb);
    xs[pivot - 1] = x_pivot.to_biguint().expect("mod_floor is non-negative");

    let puzzle = LbpPuzzle { alpha, n_dim, p, xs };
    debug_assert!(verify_vector(&puzzle, &v).is_ok());
    Ok(puzzle)
}

/// Solve by exact LLL reduction followed by enumeration inside the bound.
pub fn lbp_solve(puzzle: &LbpPuzzle, effort: SolveEffort) -> Result<LbpSolution, PowError> {
    let bound_sq = puzzle.norm_bound_sq();
    let mut rows = puzzle.basis_rows();
    lll::lll_reduce(&mut rows);

    let reduced_hit = rows.iter().find(|r| norm_sq(r) <= bound_sq).cloned();
    let v = match reduced_hit {
        Some(v) => v,
        None => match lll::enumerate_first_below(&rows, &bound_sq, effort.enum_budget) {
            Ok(Some(v)) => v,
            Ok(None) | Err(_) => return Err(PowError::SolverExhausted),
        },
    };
    let nu = coefficients_for(puzzle, &v)?;
    Ok(LbpSolution { v, nu })
}

/// Accept iff v = B·ν exactly, ν integral, v ≠ 0, and ‖v‖² within the bound.
pub fn lbp_verify(puzzle: &LbpPuzzle, solution: &LbpSolution) -> Result<(), PowError> {
    let n = puzzle.n_dim;
    if solution.v.len() != n || solution.nu.len() != n {
        return Err(PowError::Rejected("solution dimension mismatch".into()));
    }
    // v = B·ν: v₀ = p·ν₀ + Σ x_{j+1}·ν_j and v_i = ν_i for i ≥ 1.
    let mut v0 = BigInt::from(puzzle.p.clone()) * &solution.nu[0];
    for j in 1..n {
        v0 += BigInt::from(puzzle.xs[j - 1].clone()) * &solution.nu[j];
    }
    if v0 != solution.v[0] {
        return Err(PowError::Rejected("v != B·nu".into()));
    }
    for i in 1..n {
        if solution.v[i] != solution.nu[i] {
            return Err(PowError::Rejected("v != B·nu".into()));
        }
    }
    verify_vector(puzzle, &solution.v)
}

fn verify_vector(puzzle: &LbpPuzzle, v: &[BigInt]) -> Result<(), PowError> {
    if v.iter().all(|c| c.is_zero()) {
        return Err(PowError::Rejected("zero vector".into()));
    }
    if norm_sq(v) > puzzle.norm_bound_sq() {
        return Err(PowError::Rejected("norm bound exceeded".into()));
    }
    Ok(())
}

/// Recover ν from a lattice vector using the basis structure.
fn coefficients_for(puzzle: &LbpPuzzle, v: &[BigInt]) -> Result<Vec<BigInt>, PowError> {
    let n = puzzle.n_dim;
    let mut rhs = v[0].clone();
    for j in 1..n {
        rhs -= BigInt::from(puzzle.xs[j - 1].clone()) * &v[j];
    }
    let pb = BigInt::from(puzzle.p.clone());
    let (q, r) = rhs.div_rem(&pb);
    if !r.is_zero() {
        return Err(PowError::Rejected("vector not in lattice".into()));
    }
    let mut nu = v.to_vec();
    nu[0] = q;
    Ok(nu)
}

impl LbpSolution {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(&(self.v.len() as u32).to_le_bytes());
        for part in [&self.v, &self.nu] {
            for e in part {
                push_bigint(&mut out, e);
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<LbpSolution, PowError> {
        let mut cur = 0usize;
        let n = read_u32(bytes, &mut cur)? as usize;
        if n == 0 || n > 1 << 16 {
            return Err(PowError::Encoding("bad solution dimension".into()));
        }
        let mut parts = Vec::with_capacity(2 * n);
        for _ in 0..2 * n {
            parts.push(read_bigint(bytes, &mut cur)?);
        }
        if cur != bytes.len() {
            return Err(PowError::Encoding("trailing bytes in solution".into()));
        }
        let nu = parts.split_off(n);
        Ok(LbpSolution { v: parts, nu })
    }
}

/// ⌊α²·p^{2/n}⌋ with conservative (downward) rounding throughout.
fn norm_bound_sq(alpha: f64, n_dim: usize, p: &BigUint) -> BigUint {
    const FRAC_BITS: usize = 128;
    // r = ⌊2^128 · p^{2/n}⌋ via an integer n-th root.
    let scaled = (p * p) << (FRAC_BITS * n_dim);
    let r = scaled.nth_root(n_dim as u32);
    // α as an exact dyadic m·2^e.
    let bits = alpha.to_bits();
    let exp_field = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    debug_assert!(exp_field != 0, "alpha is never subnormal");
    let m = BigUint::from((1u64 << 52) | frac);
    let e = exp_field - 1023 - 52;
    // T = ⌊m² · r · 2^{2e - 128}⌋; for α < 2 the exponent is negative.
    let shift = (FRAC_BITS as i64 - 2 * e) as usize;
    (&m * &m * r) >> shift
}

/// Sample an integer vector with squared norm in [0.70, 0.94]·bound and a
/// nonzero coordinate outside position 0.
fn sample_planted_vector(n_dim: usize, bound_sq: &BigUint, rng: &mut dyn RngCore) -> Vec<BigInt> {
    let bound_f = bound_sq.to_f64().unwrap_or(f64::MAX);
    let l = ((0.85 * bound_f / n_dim as f64 * 3.0).sqrt()).floor().max(1.0) as i64;
    let lo = bound_f * 0.70;
    let hi = bound_f * 0.94;
    loop {
        let v: Vec<BigInt> = (0..n_dim)
            .map(|_| {
                let span = (2 * l + 1) as u64;
                let r = (rng.next_u64() % span) as i64 - l;
                BigInt::from(r)
            })
            .collect();
        let nsq = norm_sq(&v).to_f64().unwrap_or(f64::MAX);
        if nsq >= lo && nsq <= hi && (1..n_dim).any(|j| !v[j].is_zero()) {
            return v;
        }
    }
}

fn mod_inverse(a: &BigInt, p: &BigInt) -> Option<BigInt> {
    let a = a.mod_floor(p);
    let ext = a.extended_gcd(p);
    if ext.gcd.is_one() {
        Some(ext.x.mod_floor(p))
    } else {
        None
    }
}

fn push_bigint(out: &mut Vec<u8>, v: &BigInt) {
    let (sign, mag) = (v.sign(), v.magnitude());
    let bytes = mag.to_bytes_le();
    out.push(match sign {
        num_bigint::Sign::Minus => 1,
        _ => 0,
    });
    out.extend_from_slice(&(bytes.len() as u32).to_le_bytes());
    out.extend_from_slice(&bytes);
}

fn read_u32(bytes: &[u8], cur: &mut usize) -> Result<u32, PowError> {
    if *cur + 4 > bytes.len() {
        return Err(PowError::Encoding("truncated".into()));
    }
    let v = u32::from_le_bytes(bytes[*cur..*cur + 4].try_into().unwrap());
    *cur += 4;
    Ok(v)
}

fn read_bigint(bytes: &[u8], cur: &mut usize) -> Result<BigInt, PowError> {
    if *cur >= bytes.len() {
        return Err(PowError::Encoding("truncated".into()));
    }
    let neg = bytes[*cur] == 1;
    *cur += 1;
    let len = read_u32(bytes, cur)? as usize;
    if *cur + len > bytes.len() {
        return Err(PowError::Encoding("truncated".into()));
    }
    let mag = BigUint::from_bytes_le(&bytes[*cur..*cur + len]);
    *cur += len;
    let v = BigInt::from(mag);
    Ok(if neg { -v } else { v })
}

/// Little-endian bit packer for fixed-width values.
struct BitWriter {
    buf: Vec<u8>,
    bit_len: usize,
}

impl BitWriter {
    fn with_bit_capacity(bits: usize) -> Self {
        BitWriter { buf: vec![0u8; bits.div_ceil(8)], bit_len: 0 }
    }

    fn push_uint(&mut self, v: &BigUint, bits: usize) {
        debug_assert!(v.bits() as usize <= bits);
        let bytes = v.to_bytes_le();
        for i in 0..bits {
            let bit = if i / 8 < bytes.len() { (bytes[i / 8] >> (i % 8)) & 1 } else { 0 };
            if bit == 1 {
                let pos = self.bit_len + i;
                self.buf[pos / 8] |= 1 << (pos % 8);
            }
        }
        self.bit_len += bits;
    }

    fn finish(self) -> Vec<u8> {
        self.buf
    }
}

struct BitReader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> BitReader<'a> {
    fn new(buf: &'a [u8]) -> Self {
        BitReader { buf, pos: 0 }
    }

    fn read_uint(&mut self, bits: usize) -> BigUint {
        let mut bytes = vec![0u8; bits.div_ceil(8)];
        for i in 0..bits {
            let pos = self.pos + i;
            let bit = (self.buf[pos / 8] >> (pos % 8)) & 1;
            bytes[i / 8] |= bit << (i % 8);
        }
        self.pos += bits;
        BigUint::from_bytes_le(&bytes)
    }
}
