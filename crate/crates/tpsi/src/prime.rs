//! Probabilistic prime generation for key material.

use num_bigint::{BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::One;
use rand::RngCore;

const SMALL_PRIMES: [u32; 54] = [
    3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97,
    101, 103, 107, 109, 113, 127, 131, 137, 139, 149, 151, 157, 163, 167, 173, 179, 181, 191, 193,
    197, 199, 211, 223, 227, 229, 233, 239, 241, 251, 257,
];

/// Miller-Rabin rounds; error probability at most `4^-ROUNDS` per candidate.
const ROUNDS: usize = 40;

pub fn is_probable_prime(n: &BigUint, rng: &mut dyn RngCore) -> bool {
    let two = BigUint::from(2u32);
    if *n < two {
        return false;
    }
    for &p in &SMALL_PRIMES {
        let p = BigUint::from(p);
        if *n == p {
            return true;
        }
        if (n % &p).bits() == 0 {
            return false;
        }
    }
    if n.is_even() {
        return *n == two;
    }
    let n_minus_1 = n - 1u32;
    let s = n_minus_1.trailing_zeros().unwrap_or(0);
    let d = &n_minus_1 >> s;
    'witness: for _ in 0..ROUNDS {
        let a = rng.gen_biguint_range(&two, &n_minus_1);
        let mut x = a.modpow(&d, n);
        if x.is_one() || x == n_minus_1 {
            continue;
        }
        for _ in 1..s {
            x = x.modpow(&two, n);
            if x == n_minus_1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Uniform-ish prime of exactly `bits` bits with the top two bits set, so
/// that a product of two such primes has exactly `2 * bits` bits.
pub fn random_prime(bits: u64, rng: &mut dyn RngCore) -> BigUint {
    assert!(bits >= 16);
    loop {
        let mut c = rng.gen_biguint(bits);
        c.set_bit(bits - 1, true);
        c.set_bit(bits - 2, true);
        c.set_bit(0, true);
        if is_probable_prime(&c, rng) {
            return c;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    /// Trial division up to the square root.
    fn naive(n: u64) -> bool {
        n >= 2
            && (2..)
                .take_while(|d| d * d <= n)
                .all(|d| !n.is_multiple_of(d))
    }

    #[test]
    fn agrees_with_trial_division() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        for n in 0..5000u64 {
            assert_eq!(
                is_probable_prime(&BigUint::from(n), &mut rng),
                naive(n),
                "{n}"
            );
        }
        // Carmichael numbers
        for n in [561u64, 1105, 1729, 2465, 2821, 6601, 8911, 41041, 825265] {
            assert!(!is_probable_prime(&BigUint::from(n), &mut rng));
        }
        assert!(is_probable_prime(
            &BigUint::from(4_294_967_291u64),
            &mut rng
        ));
        assert!(is_probable_prime(
            &((BigUint::from(1u32) << 127u32) - 1u32),
            &mut rng
        ));
    }

    #[test]
    fn generated_primes_have_exact_width() {
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let p = random_prime(256, &mut rng);
        assert_eq!(p.bits(), 256);
        assert!(is_probable_prime(&p, &mut rng));
    }
}
