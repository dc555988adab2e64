//! Prime-field arithmetic shared by every layer of the protocols.
//!
//! The default ring is [`Fp`], the integers modulo `p = 2^128 - 159` (the
//! largest prime below `2^128`), so that any 128-bit set element below `p`
//! is a field element as-is. [`Fp64`] covers small prime fields used by
//! hand-checkable tests (`p = 11`, `p = 251`) and the 32-bit CRT residue
//! channels, and [`Crt4`] is the four-prime CRT ring used by the packed mode.
//!
//! Arithmetic is not constant time. The protocols are semi-honest and no
//! timing adversary is modelled.

use core::cmp::Ordering;
use core::fmt;
use core::hash::Hash;
use core::iter::Sum;
use core::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use rand_core::RngCore;
use sha2::{Digest, Sha512};

/// `2^128 - 159`.
pub const P128: u128 = u128::MAX - 158;
const P128_FOLD: u128 = 159;

/// The four largest primes below `2^32`.
pub const DEFAULT_CRT_PRIMES: [u32; 4] =
    [4_294_967_291, 4_294_967_279, 4_294_967_231, 4_294_967_197];

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum FieldError {
    #[error("zero (or a non-unit) has no multiplicative inverse")]
    ZeroInverse,
    #[error("value is not below the modulus")]
    OutOfRange,
    #[error("invalid CRT system: {0}")]
    InvalidCrtSystem(&'static str),
}

/// A commutative ring `Z/NZ` in which all small nonzero integers are units.
///
/// For a prime modulus this is a field. The CRT ring [`Crt4`] is a product of
/// four prime fields; its non-units are the elements that vanish modulo one
/// of the primes.
///
/// Arithmetic happens in one or more residue *channels*. A prime field has a
/// single channel; the CRT ring has four. Backends whose plaintext space is
/// smaller than the ring (the homomorphic OLE) work channel by channel.
pub trait Field:
    Copy
    + Clone
    + fmt::Debug
    + Default
    + Eq
    + Ord
    + Hash
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + Sum
{
    const ZERO: Self;
    const ONE: Self;
    const CHANNELS: usize;

    /// The ring order `N` (the prime itself for a field).
    fn modulus() -> u128;
    fn channel_modulus(channel: usize) -> u128;
    fn channel_value(&self, channel: usize) -> u128;
    fn from_channels(values: &[u128]) -> Result<Self, FieldError>;

    fn from_u64(value: u64) -> Self;
    /// Canonical integer representative in `[0, N)`.
    fn to_u128(&self) -> u128;
    /// Rejects values `>= N` instead of reducing them.
    fn from_u128(value: u128) -> Result<Self, FieldError>;
    fn inverse(&self) -> Result<Self, FieldError>;
    fn random<R: RngCore + ?Sized>(rng: &mut R) -> Self;
    /// Maps 64 uniform bytes to a ring element with negligible bias.
    fn from_uniform_bytes(bytes: &[u8; 64]) -> Self;

    fn is_zero(&self) -> bool {
        *self == Self::ZERO
    }

    /// 16 bytes, little endian, value below the modulus.
    fn to_bytes(&self) -> [u8; 16] {
        self.to_u128().to_le_bytes()
    }

    fn from_bytes(bytes: &[u8; 16]) -> Result<Self, FieldError> {
        Self::from_u128(u128::from_le_bytes(*bytes))
    }

    fn from_slice(bytes: &[u8]) -> Result<Self, FieldError> {
        let arr: [u8; 16] = bytes.try_into().map_err(|_| FieldError::OutOfRange)?;
        Self::from_bytes(&arr)
    }

    fn pow(&self, mut exp: u128) -> Self {
        let mut base = *self;
        let mut acc = Self::ONE;
        while exp > 0 {
            if exp & 1 == 1 {
                acc *= base;
            }
            base *= base;
            exp >>= 1;
        }
        acc
    }
}

/// Interprets 16 little-endian bytes as an element of [`Fp`].
///
/// Values `>= p` are rejected: reducing them would alias two distinct inputs.
pub fn reduce_element(bytes: &[u8; 16]) -> Result<Fp, FieldError> {
    Fp::from_bytes(bytes)
}

/// Maps an arbitrary byte string into a ring element through a
/// domain-separated SHA-512.
///
/// This changes the element universe: the protocol then intersects hashes,
/// and the output carries hashes rather than the original strings.
pub fn hash_to_field<F: Field>(data: &[u8]) -> F {
    let digest = Sha512::new()
        .chain_update(b"tpsi/element-prehash/v1")
        .chain_update((data.len() as u64).to_le_bytes())
        .chain_update(data)
        .finalize();
    let mut wide = [0u8; 64];
    wide.copy_from_slice(&digest);
    F::from_uniform_bytes(&wide)
}

// ---------------------------------------------------------------------------
// Fp: 2^128 - 159
// ---------------------------------------------------------------------------

/// An element of `F_p` with `p = 2^128 - 159`.
#[derive(Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Fp(u128);

pub type FieldElement = Fp;

#[inline]
fn mul_wide(a: u128, b: u128) -> (u128, u128) {
    let (a0, a1) = (a as u64 as u128, a >> 64);
    let (b0, b1) = (b as u64 as u128, b >> 64);
    let p00 = a0 * b0;
    let p01 = a0 * b1;
    let p10 = a1 * b0;
    let p11 = a1 * b1;
    let mid = (p00 >> 64) + (p01 as u64 as u128) + (p10 as u64 as u128);
    let lo = (p00 as u64 as u128) | (mid << 64);
    let hi = p11 + (p01 >> 64) + (p10 >> 64) + (mid >> 64);
    (hi, lo)
}

/// Reduces `hi * 2^128 + lo` modulo `P128` using `2^128 = 159 (mod p)`.
#[inline]
fn reduce_wide(hi: u128, lo: u128) -> u128 {
    let (fold_hi, fold_lo) = mul_wide(hi, P128_FOLD);
    let (sum, carry) = fold_lo.overflowing_add(lo);
    // fold_hi < 159, so this stays tiny.
    let top = (fold_hi + carry as u128) * P128_FOLD;
    let (mut v, carry) = sum.overflowing_add(top);
    if carry {
        v += P128_FOLD;
    }
    if v >= P128 {
        v -= P128;
    }
    v
}

impl Fp {
    pub const fn new_unchecked(value: u128) -> Self {
        Fp(value)
    }

    pub const fn value(&self) -> u128 {
        self.0
    }
}

impl fmt::Debug for Fp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Fp({:#034x})", self.0)
    }
}

impl Add for Fp {
    type Output = Fp;
    #[inline]
    fn add(self, rhs: Fp) -> Fp {
        let (mut s, carry) = self.0.overflowing_add(rhs.0);
        if carry {
            s += P128_FOLD;
        }
        if s >= P128 {
            s -= P128;
        }
        Fp(s)
    }
}

impl Sub for Fp {
    type Output = Fp;
    #[inline]
    fn sub(self, rhs: Fp) -> Fp {
        if self.0 >= rhs.0 {
            Fp(self.0 - rhs.0)
        } else {
            Fp(P128 - rhs.0 + self.0)
        }
    }
}

impl Mul for Fp {
    type Output = Fp;
    #[inline]
    fn mul(self, rhs: Fp) -> Fp {
        let (hi, lo) = mul_wide(self.0, rhs.0);
        Fp(reduce_wide(hi, lo))
    }
}

impl Neg for Fp {
    type Output = Fp;
    fn neg(self) -> Fp {
        if self.0 == 0 {
            self
        } else {
            Fp(P128 - self.0)
        }
    }
}

impl Field for Fp {
    const ZERO: Self = Fp(0);
    const ONE: Self = Fp(1);
    const CHANNELS: usize = 1;

    fn modulus() -> u128 {
        P128
    }

    fn channel_modulus(_channel: usize) -> u128 {
        P128
    }

    fn channel_value(&self, _channel: usize) -> u128 {
        self.0
    }

    fn from_channels(values: &[u128]) -> Result<Self, FieldError> {
        match values {
            [v] => Self::from_u128(*v),
            _ => Err(FieldError::OutOfRange),
        }
    }

    fn from_u64(value: u64) -> Self {
        Fp(value as u128)
    }

    fn to_u128(&self) -> u128 {
        self.0
    }

    fn from_u128(value: u128) -> Result<Self, FieldError> {
        if value < P128 {
            Ok(Fp(value))
        } else {
            Err(FieldError::OutOfRange)
        }
    }

    fn inverse(&self) -> Result<Self, FieldError> {
        if self.0 == 0 {
            return Err(FieldError::ZeroInverse);
        }
        Ok(self.pow(P128 - 2))
    }

    fn random<R: RngCore + ?Sized>(rng: &mut R) -> Self {
        loop {
            let mut buf = [0u8; 16];
            rng.fill_bytes(&mut buf);
            let v = u128::from_le_bytes(buf);
            if v < P128 {
                return Fp(v);
            }
        }
    }

    fn from_uniform_bytes(bytes: &[u8; 64]) -> Self {
        let lo = u128::from_le_bytes(bytes[..16].try_into().unwrap());
        let hi = u128::from_le_bytes(bytes[16..32].try_into().unwrap());
        Fp(reduce_wide(hi % P128, lo))
    }
}

// ---------------------------------------------------------------------------
// Fp64: small primes below 2^64
// ---------------------------------------------------------------------------

/// An element of `F_P` for a prime `P < 2^63`.
#[derive(Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Fp64<const P: u64>(u64);

impl<const P: u64> Fp64<P> {
    pub const fn value(&self) -> u64 {
        self.0
    }

    pub fn new(value: u64) -> Self {
        Fp64(value % P)
    }
}

impl<const P: u64> fmt::Debug for Fp64<P> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (mod {})", self.0, P)
    }
}

impl<const P: u64> Add for Fp64<P> {
    type Output = Self;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        let s = self.0 + rhs.0;
        Fp64(if s >= P { s - P } else { s })
    }
}

impl<const P: u64> Sub for Fp64<P> {
    type Output = Self;
    #[inline]
    fn sub(self, rhs: Self) -> Self {
        Fp64(if self.0 >= rhs.0 {
            self.0 - rhs.0
        } else {
            P - rhs.0 + self.0
        })
    }
}

impl<const P: u64> Mul for Fp64<P> {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        Fp64(((self.0 as u128 * rhs.0 as u128) % P as u128) as u64)
    }
}

impl<const P: u64> Neg for Fp64<P> {
    type Output = Self;
    fn neg(self) -> Self {
        if self.0 == 0 {
            self
        } else {
            Fp64(P - self.0)
        }
    }
}

impl<const P: u64> Field for Fp64<P> {
    const ZERO: Self = Fp64(0);
    const ONE: Self = Fp64(1);
    const CHANNELS: usize = 1;

    fn modulus() -> u128 {
        P as u128
    }

    fn channel_modulus(_channel: usize) -> u128 {
        P as u128
    }

    fn channel_value(&self, _channel: usize) -> u128 {
        self.0 as u128
    }

    fn from_channels(values: &[u128]) -> Result<Self, FieldError> {
        match values {
            [v] => Self::from_u128(*v),
            _ => Err(FieldError::OutOfRange),
        }
    }

    fn from_u64(value: u64) -> Self {
        Fp64(value % P)
    }

    fn to_u128(&self) -> u128 {
        self.0 as u128
    }

    fn from_u128(value: u128) -> Result<Self, FieldError> {
        if value < P as u128 {
            Ok(Fp64(value as u64))
        } else {
            Err(FieldError::OutOfRange)
        }
    }

    fn inverse(&self) -> Result<Self, FieldError> {
        if self.0 == 0 {
            return Err(FieldError::ZeroInverse);
        }
        Ok(self.pow((P - 2) as u128))
    }

    fn random<R: RngCore + ?Sized>(rng: &mut R) -> Self {
        let zone = u64::MAX - (u64::MAX % P);
        loop {
            let v = rng.next_u64();
            if v < zone {
                return Fp64(v % P);
            }
        }
    }

    fn from_uniform_bytes(bytes: &[u8; 64]) -> Self {
        let wide = u128::from_le_bytes(bytes[..16].try_into().unwrap());
        Fp64((wide % P as u128) as u64)
    }
}

// ---------------------------------------------------------------------------
// CRT
// ---------------------------------------------------------------------------

fn is_prime_u32(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let n = n as u64;
    let mut d = 3u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

fn inv_mod_u64(a: u64, m: u64) -> u64 {
    // m is prime, a != 0 mod m
    let mut acc = 1u128;
    let mut base = (a % m) as u128;
    let mut e = m - 2;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % m as u128;
        }
        base = base * base % m as u128;
        e >>= 1;
    }
    acc as u64
}

/// Four pairwise-coprime 32-bit primes whose product is at least `2^127`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CrtSystem {
    primes: [u32; 4],
    product: u128,
}

/// The built-in system; its validity is pinned by a unit test.
const DEFAULT_SYSTEM: CrtSystem = CrtSystem {
    primes: DEFAULT_CRT_PRIMES,
    product: DEFAULT_CRT_PRIMES[0] as u128
        * DEFAULT_CRT_PRIMES[1] as u128
        * DEFAULT_CRT_PRIMES[2] as u128
        * DEFAULT_CRT_PRIMES[3] as u128,
};

impl Default for CrtSystem {
    fn default() -> Self {
        DEFAULT_SYSTEM
    }
}

impl CrtSystem {
    pub fn new(primes: [u32; 4]) -> Result<Self, FieldError> {
        if !primes.iter().all(|&p| is_prime_u32(p)) {
            return Err(FieldError::InvalidCrtSystem("modulus is not prime"));
        }
        for i in 0..4 {
            for j in (i + 1)..4 {
                if primes[i] == primes[j] {
                    return Err(FieldError::InvalidCrtSystem(
                        "moduli are not pairwise coprime",
                    ));
                }
            }
        }
        let product = primes.iter().fold(1u128, |acc, &p| acc * p as u128);
        if product < (1u128 << 127) {
            return Err(FieldError::InvalidCrtSystem("product is below 2^127"));
        }
        Ok(CrtSystem { primes, product })
    }

    pub fn primes(&self) -> [u32; 4] {
        self.primes
    }

    pub fn product(&self) -> u128 {
        self.product
    }

    pub fn decompose(&self, value: u128) -> Result<[u32; 4], FieldError> {
        if value >= self.product {
            return Err(FieldError::OutOfRange);
        }
        Ok(self.primes.map(|p| (value % p as u128) as u32))
    }

    /// Garner's mixed-radix recombination; every intermediate fits in `u128`
    /// because the result is below the product.
    pub fn recombine(&self, residues: [u32; 4]) -> Result<u128, FieldError> {
        if residues.iter().zip(self.primes.iter()).any(|(r, p)| r >= p) {
            return Err(FieldError::OutOfRange);
        }
        let p = self.primes.map(|p| p as u64);
        let mut digits = [0u64; 4];
        for i in 0..4 {
            // digit_i = (r_i - value so far) / (p_0 ... p_{i-1})  mod p_i
            let mut acc = 0u64;
            let mut radix = 1u64;
            for j in 0..i {
                acc = ((acc as u128 + digits[j] as u128 * radix as u128) % p[i] as u128) as u64;
                radix = ((radix as u128 * p[j] as u128) % p[i] as u128) as u64;
            }
            let diff = (residues[i] as u64 + p[i] - acc) % p[i];
            digits[i] = ((diff as u128 * inv_mod_u64(radix, p[i]) as u128) % p[i] as u128) as u64;
        }
        let mut value = 0u128;
        for i in (0..4).rev() {
            value = value * p[i] as u128 + digits[i] as u128;
        }
        Ok(value)
    }

    pub fn to_bytes(&self) -> [u8; 16] {
        let mut out = [0u8; 16];
        for (chunk, p) in out.chunks_exact_mut(4).zip(self.primes.iter()) {
            chunk.copy_from_slice(&p.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8; 16]) -> Result<Self, FieldError> {
        let mut primes = [0u32; 4];
        for (p, chunk) in primes.iter_mut().zip(bytes.chunks_exact(4)) {
            *p = u32::from_le_bytes(chunk.try_into().unwrap());
        }
        CrtSystem::new(primes)
    }
}

const CRT: [u64; 4] = [
    DEFAULT_CRT_PRIMES[0] as u64,
    DEFAULT_CRT_PRIMES[1] as u64,
    DEFAULT_CRT_PRIMES[2] as u64,
    DEFAULT_CRT_PRIMES[3] as u64,
];

/// An element of `Z/NZ` for `N` the product of [`DEFAULT_CRT_PRIMES`], held
/// as four residues.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct Crt4([u64; 4]);

impl Crt4 {
    pub fn residues(&self) -> [u64; 4] {
        self.0
    }

    pub fn system() -> CrtSystem {
        CrtSystem::default()
    }
}

impl fmt::Debug for Crt4 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Crt4{:?}", self.0)
    }
}

impl PartialOrd for Crt4 {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Crt4 {
    fn cmp(&self, other: &Self) -> Ordering {
        self.to_u128().cmp(&other.to_u128())
    }
}

macro_rules! crt_lanes {
    ($a:expr, $b:expr, |$x:ident, $y:ident, $p:ident| $body:expr) => {{
        let mut out = [0u64; 4];
        for i in 0..4 {
            let ($x, $y, $p) = ($a[i], $b[i], CRT[i]);
            out[i] = $body;
        }
        Crt4(out)
    }};
}

impl Add for Crt4 {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        crt_lanes!(self.0, rhs.0, |x, y, p| {
            let s = x + y;
            if s >= p {
                s - p
            } else {
                s
            }
        })
    }
}

impl Sub for Crt4 {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        crt_lanes!(self.0, rhs.0, |x, y, p| if x >= y {
            x - y
        } else {
            p - y + x
        })
    }
}

impl Mul for Crt4 {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        crt_lanes!(
            self.0,
            rhs.0,
            |x, y, p| ((x as u128 * y as u128) % p as u128) as u64
        )
    }
}

impl Neg for Crt4 {
    type Output = Self;
    fn neg(self) -> Self {
        Crt4::ZERO - self
    }
}

impl Field for Crt4 {
    const ZERO: Self = Crt4([0; 4]);
    const ONE: Self = Crt4([1; 4]);
    const CHANNELS: usize = 4;

    fn modulus() -> u128 {
        CRT.iter().fold(1u128, |acc, &p| acc * p as u128)
    }

    fn channel_modulus(channel: usize) -> u128 {
        CRT[channel] as u128
    }

    fn channel_value(&self, channel: usize) -> u128 {
        self.0[channel] as u128
    }

    fn from_channels(values: &[u128]) -> Result<Self, FieldError> {
        if values.len() != 4 {
            return Err(FieldError::OutOfRange);
        }
        let mut out = [0u64; 4];
        for i in 0..4 {
            if values[i] >= CRT[i] as u128 {
                return Err(FieldError::OutOfRange);
            }
            out[i] = values[i] as u64;
        }
        Ok(Crt4(out))
    }

    fn from_u64(value: u64) -> Self {
        Crt4(CRT.map(|p| value % p))
    }

    fn to_u128(&self) -> u128 {
        let residues = self.0.map(|r| r as u32);
        CrtSystem::default()
            .recombine(residues)
            .expect("residues are canonical")
    }

    fn from_u128(value: u128) -> Result<Self, FieldError> {
        let residues = CrtSystem::default().decompose(value)?;
        Ok(Crt4(residues.map(|r| r as u64)))
    }

    fn inverse(&self) -> Result<Self, FieldError> {
        if self.0.contains(&0) {
            return Err(FieldError::ZeroInverse);
        }
        let mut out = [0u64; 4];
        for i in 0..4 {
            out[i] = inv_mod_u64(self.0[i], CRT[i]);
        }
        Ok(Crt4(out))
    }

    fn random<R: RngCore + ?Sized>(rng: &mut R) -> Self {
        let mut out = [0u64; 4];
        for i in 0..4 {
            let p = CRT[i];
            let zone = u64::MAX - (u64::MAX % p);
            out[i] = loop {
                let v = rng.next_u64();
                if v < zone {
                    break v % p;
                }
            };
        }
        Crt4(out)
    }

    fn from_uniform_bytes(bytes: &[u8; 64]) -> Self {
        let mut out = [0u64; 4];
        for i in 0..4 {
            let wide = u128::from_le_bytes(bytes[16 * i..16 * (i + 1)].try_into().unwrap());
            out[i] = (wide % CRT[i] as u128) as u64;
        }
        Crt4(out)
    }
}

macro_rules! impl_assign_and_sum {
    ($($ty:ty),*) => {$(
        impl AddAssign for $ty {
            #[inline]
            fn add_assign(&mut self, rhs: Self) {
                *self = *self + rhs;
            }
        }
        impl SubAssign for $ty {
            #[inline]
            fn sub_assign(&mut self, rhs: Self) {
                *self = *self - rhs;
            }
        }
        impl MulAssign for $ty {
            #[inline]
            fn mul_assign(&mut self, rhs: Self) {
                *self = *self * rhs;
            }
        }
        impl Sum for $ty {
            fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
                iter.fold(<$ty as Field>::ZERO, |acc, x| acc + x)
            }
        }
    )*};
}

impl_assign_and_sum!(Fp, Crt4);

impl<const P: u64> AddAssign for Fp64<P> {
    #[inline]
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl<const P: u64> SubAssign for Fp64<P> {
    #[inline]
    fn sub_assign(&mut self, rhs: Self) {
        *self = *self - rhs;
    }
}

impl<const P: u64> MulAssign for Fp64<P> {
    #[inline]
    fn mul_assign(&mut self, rhs: Self) {
        *self = *self * rhs;
    }
}

impl<const P: u64> Sum for Fp64<P> {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::ZERO, |acc, x| acc + x)
    }
}
