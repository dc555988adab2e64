//! Paillier encryption with `g = 1 + N`, CRT decryption, and fixed-base
//! exponentiation tables for the sender's hot path.

use num_bigint::{BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::RngCore;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PaillierError {
    #[error("modulus of {0} bits is below the 1024-bit minimum")]
    KeyTooSmall(u64),
    #[error("malformed public key")]
    BadPublicKey,
    #[error("ciphertext is not a unit modulo N^2")]
    BadCiphertext,
}

pub const MIN_MODULUS_BITS: u64 = 1024;

/// Bit length of the short exponent used for re-randomization.
const RANDOMIZER_BITS: u64 = 256;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PublicKey {
    pub n: BigUint,
    pub n2: BigUint,
    /// `y^N mod N^2` for a secret unit `y`: `h^alpha` re-randomizes a
    /// ciphertext without a full-length exponentiation.
    pub h: BigUint,
}

#[derive(Debug, Clone)]
pub struct SecretKey {
    p: BigUint,
    q: BigUint,
    p2: BigUint,
    q2: BigUint,
    /// `(-q)^-1 mod p` and `(-p)^-1 mod q`.
    hp: BigUint,
    hq: BigUint,
    /// `p^-1 mod q`, for recombination.
    p_inv_q: BigUint,
}

impl PublicKey {
    /// Bytes of a serialized ciphertext.
    pub fn ciphertext_len(&self) -> usize {
        self.n2.bits().div_ceil(8) as usize
    }

    fn modulus_len(&self) -> usize {
        self.n.bits().div_ceil(8) as usize
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(&(self.modulus_len() as u16).to_le_bytes());
        out.extend_from_slice(&fixed_be(&self.n, self.modulus_len()));
        out.extend_from_slice(&fixed_be(&self.h, self.ciphertext_len()));
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, PaillierError> {
        let len = u16::from_le_bytes(
            bytes
                .get(..2)
                .ok_or(PaillierError::BadPublicKey)?
                .try_into()
                .unwrap(),
        ) as usize;
        let n_bytes = bytes.get(2..2 + len).ok_or(PaillierError::BadPublicKey)?;
        let n = BigUint::from_bytes_be(n_bytes);
        if n.bits() < MIN_MODULUS_BITS || n.is_even() {
            return Err(PaillierError::BadPublicKey);
        }
        let n2 = &n * &n;
        let pk = PublicKey {
            h: BigUint::zero(),
            n2,
            n,
        };
        let h_bytes = bytes.get(2 + len..).ok_or(PaillierError::BadPublicKey)?;
        if h_bytes.len() != pk.ciphertext_len() {
            return Err(PaillierError::BadPublicKey);
        }
        let h = BigUint::from_bytes_be(h_bytes);
        if h.is_zero() || h >= pk.n2 || !h.gcd(&pk.n).is_one() {
            return Err(PaillierError::BadPublicKey);
        }
        Ok(PublicKey { h, ..pk })
    }

    pub fn ciphertext_to_bytes(&self, c: &BigUint) -> Vec<u8> {
        fixed_be(c, self.ciphertext_len())
    }

    pub fn ciphertext_from_bytes(&self, bytes: &[u8]) -> Result<BigUint, PaillierError> {
        let c = BigUint::from_bytes_be(bytes);
        if bytes.len() != self.ciphertext_len() || c.is_zero() || c >= self.n2 {
            return Err(PaillierError::BadCiphertext);
        }
        Ok(c)
    }

    /// `g^m = 1 + m N mod N^2`.
    pub fn encode_plain(&self, m: &BigUint) -> BigUint {
        (BigUint::one() + (m % &self.n) * &self.n) % &self.n2
    }

    pub fn random_exponent(&self, rng: &mut dyn RngCore) -> BigUint {
        rng.gen_biguint(RANDOMIZER_BITS)
    }

    pub fn randomizer_table(&self) -> FixedBase {
        FixedBase::new(&self.h, RANDOMIZER_BITS, 8, &self.n2)
    }
}

fn fixed_be(v: &BigUint, len: usize) -> Vec<u8> {
    let raw = v.to_bytes_be();
    let mut out = vec![0u8; len.saturating_sub(raw.len())];
    out.extend_from_slice(&raw);
    out
}

impl SecretKey {
    /// Encrypts with a full-length random `r^N`, computed modulo `p^2` and
    /// `q^2` separately.
    pub fn encrypt(&self, pk: &PublicKey, m: &BigUint, rng: &mut dyn RngCore) -> BigUint {
        let r = loop {
            let r = rng.gen_biguint_below(&pk.n);
            if !r.is_zero() && r.gcd(&pk.n).is_one() {
                break r;
            }
        };
        let rp = r.modpow(&(&pk.n % (&self.p2 - &self.p)), &self.p2);
        let rq = r.modpow(&(&pk.n % (&self.q2 - &self.q)), &self.q2);
        let rn = crt_combine(&rp, &self.p2, &rq, &self.q2);
        (pk.encode_plain(m) * rn) % &pk.n2
    }

    pub fn decrypt(&self, c: &BigUint) -> BigUint {
        let mp = (l_func(&c.modpow(&(&self.p - 1u32), &self.p2), &self.p) * &self.hp) % &self.p;
        let mq = (l_func(&c.modpow(&(&self.q - 1u32), &self.q2), &self.q) * &self.hq) % &self.q;
        // m = mp + p * ((mq - mp) * p^-1 mod q)
        let diff = (&mq + &self.q - (&mp % &self.q)) % &self.q;
        mp + &self.p * ((diff * &self.p_inv_q) % &self.q)
    }
}

fn l_func(u: &BigUint, p: &BigUint) -> BigUint {
    (u - 1u32) / p
}

fn crt_combine(a: &BigUint, m: &BigUint, b: &BigUint, n: &BigUint) -> BigUint {
    let m_inv = mod_inverse(&(m % n), n).expect("coprime moduli");
    let diff = (b + n - (a % n)) % n;
    a + m * ((diff * m_inv) % n)
}

pub fn mod_inverse(a: &BigUint, m: &BigUint) -> Option<BigUint> {
    use num_bigint::BigInt;
    let (a, m) = (BigInt::from(a.clone()), BigInt::from(m.clone()));
    let e = a.extended_gcd(&m);
    if !e.gcd.is_one() {
        return None;
    }
    let x = ((e.x % &m) + &m) % &m;
    x.to_biguint()
}

/// Key pair with an `bits`-bit modulus.
pub fn generate(bits: u64, rng: &mut dyn RngCore) -> Result<(PublicKey, SecretKey), PaillierError> {
    if bits < MIN_MODULUS_BITS {
        return Err(PaillierError::KeyTooSmall(bits));
    }
    let (p, q) = loop {
        let p = crate::prime::random_prime(bits / 2, rng);
        let q = crate::prime::random_prime(bits - bits / 2, rng);
        if p != q && (&p * &q).bits() == bits {
            break (p, q);
        }
    };
    let n = &p * &q;
    let n2 = &n * &n;
    let (p2, q2) = (&p * &p, &q * &q);
    let hp = mod_inverse(&(&p - (&q % &p)), &p).expect("p prime");
    let hq = mod_inverse(&(&q - (&p % &q)), &q).expect("q prime");
    let p_inv_q = mod_inverse(&(&p % &q), &q).expect("q prime");
    let sk = SecretKey {
        p,
        q,
        p2,
        q2,
        hp,
        hq,
        p_inv_q,
    };
    let y = loop {
        let y = rng.gen_biguint_below(&n);
        if !y.is_zero() && y.gcd(&n).is_one() {
            break y;
        }
    };
    let h = y.modpow(&n, &n2);
    Ok((PublicKey { n, n2, h }, sk))
}

/// Windowed fixed-base table: `base^e` for exponents up to `max_bits` bits
/// costs `max_bits / window` modular multiplications.
pub struct FixedBase {
    window: u32,
    /// `table[i][d - 1] = base^(d * 2^(window * i))`.
    table: Vec<Vec<BigUint>>,
    modulus: BigUint,
}

impl FixedBase {
    pub fn new(base: &BigUint, max_bits: u64, window: u32, modulus: &BigUint) -> Self {
        let windows = max_bits.div_ceil(window as u64) as usize;
        let mut table = Vec::with_capacity(windows);
        let mut step = base % modulus;
        for _ in 0..windows {
            let mut row = Vec::with_capacity((1 << window) - 1);
            let mut acc = step.clone();
            row.push(acc.clone());
            for _ in 2..(1u32 << window) {
                acc = (&acc * &step) % modulus;
                row.push(acc.clone());
            }
            // base^(2^(window * (i + 1))) = last entry * step
            step = (&acc * &step) % modulus;
            table.push(row);
        }
        FixedBase {
            window,
            table,
            modulus: modulus.clone(),
        }
    }

    pub fn pow(&self, exp: &BigUint) -> BigUint {
        debug_assert!(exp.bits() <= self.table.len() as u64 * self.window as u64);
        let mut acc = BigUint::one();
        let digits = exp.to_radix_le(1 << self.window);
        for (i, &d) in digits.iter().enumerate() {
            if d != 0 {
                acc = (acc * &self.table[i][d as usize - 1]) % &self.modulus;
            }
        }
        acc
    }
}
