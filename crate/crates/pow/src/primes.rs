//! Random prime generation: sieve-filtered candidates + Miller-Rabin.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::RngCore;

const SMALL_PRIME_LIMIT: u64 = 2048;
const MILLER_RABIN_ROUNDS: usize = 24;

fn small_primes() -> Vec<u64> {
    let mut sieve = vec![true; SMALL_PRIME_LIMIT as usize];
    let mut out = Vec::new();
    for i in 2..SMALL_PRIME_LIMIT as usize {
        if sieve[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j < SMALL_PRIME_LIMIT as usize {
                sieve[j] = false;
                j += i;
            }
        }
    }
    out
}

pub fn random_biguint_bits(bits: u64, rng: &mut dyn RngCore) -> BigUint {
    let nbytes = (bits as usize).div_ceil(8);
    let mut buf = vec![0u8; nbytes];
    rng.fill_bytes(&mut buf);
    let tail = bits % 8;
    if tail != 0 {
        buf[nbytes - 1] &= (1u8 << tail) - 1;
    }
    BigUint::from_bytes_le(&buf)
}

/// Uniform value in [0, bound). `bound` must be positive.
pub fn random_below(bound: &BigUint, rng: &mut dyn RngCore) -> BigUint {
    assert!(!bound.is_zero(), "random_below needs a positive bound");
    let bits = bound.bits();
    loop {
        let c = random_biguint_bits(bits, rng);
        if &c < bound {
            return c;
        }
    }
}

/// Random prime with exactly `bits` bits.
pub fn random_prime(bits: u64, rng: &mut dyn RngCore) -> BigUint {
    assert!(bits >= 8, "prime width too small");
    let primes = small_primes();
    loop {
        let mut c = random_biguint_bits(bits, rng);
        c.set_bit(bits - 1, true);
        c.set_bit(0, true);
        if primes.iter().all(|&sp| {
            let spb = BigUint::from(sp);
            c == spb || !(&c % spb).is_zero()
        }) && is_probable_prime(&c, MILLER_RABIN_ROUNDS, rng)
        {
            return c;
        }
    }
}

pub fn is_probable_prime(n: &BigUint, rounds: usize, rng: &mut dyn RngCore) -> bool {
    let one = BigUint::one();
    let two = &one + &one;
    if *n < two {
        return false;
    }
    if n.is_even() {
        return *n == two;
    }
    if *n == BigUint::from(3u32) {
        return true;
    }
    // n - 1 = d * 2^s
    let n_minus_1 = n - &one;
    let s = n_minus_1.trailing_zeros().unwrap_or(0);
    let d = &n_minus_1 >> s;

    'witness: for _ in 0..rounds {
        let a = &two + random_below(&(n - &two - &one), rng);
        let mut x = a.modpow(&d, n);
        if x == one || x == n_minus_1 {
            continue;
        }
        for _ in 0..s.saturating_sub(1) {
            x = x.modpow(&two, n);
            if x == n_minus_1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn known_primes_accepted_composites_rejected() {
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        for p in [2u32, 3, 5, 65537, 104729] {
            assert!(is_probable_prime(&BigUint::from(p), 16, &mut rng), "{p}");
        }
        for c in [1u32, 4, 561, 65536, 104730] {
            assert!(!is_probable_prime(&BigUint::from(c), 16, &mut rng), "{c}");
        }
    }

    #[test]
    fn generated_prime_has_requested_width() {
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        let p = random_prime(100, &mut rng);
        assert_eq!(p.bits(), 100);
    }
}
