use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use tpsi_core::field::{CrtSystem, Field, FieldError, Fp, Fp64, P128};
use tpsi_core::Crt4;

fn big(v: u128) -> BigUint {
    BigUint::from(v)
}

fn back(v: &BigUint) -> u128 {
    let mut d = v.iter_u64_digits();
    let lo = d.next().unwrap_or(0) as u128;
    let hi = d.next().unwrap_or(0) as u128;
    lo | (hi << 64)
}

/// Inverse by the extended Euclidean algorithm on signed big integers.
fn euclid_inverse(a: u128, p: u128) -> u128 {
    let (mut r0, mut r1) = (BigInt::from(p), BigInt::from(a));
    let (mut s0, mut s1) = (BigInt::zero(), BigInt::one());
    while !r1.is_zero() {
        let q = &r0 / &r1;
        let r2 = &r0 - &q * &r1;
        r0 = std::mem::replace(&mut r1, r2);
        let s2 = &s0 - &q * &s1;
        s0 = std::mem::replace(&mut s1, s2);
    }
    assert!(r0.is_one());
    let p = BigInt::from(p);
    let inv = ((s0 % &p) + &p) % &p;
    assert!(!inv.is_negative());
    back(&inv.to_biguint().unwrap())
}

#[test]
fn fp_matches_bigint_arithmetic() {
    let p = big(P128);
    let mut rng = ChaCha20Rng::seed_from_u64(0xF1E1D);
    for i in 0..10_000 {
        // bias a fraction of the operands towards the top of the range
        let draw = |rng: &mut ChaCha20Rng| {
            if i % 5 == 0 {
                P128 - 1 - (rng.gen::<u16>() as u128)
            } else {
                rng.gen::<u128>() % P128
            }
        };
        let (a, b) = (draw(&mut rng), draw(&mut rng));
        let (x, y) = (Fp::from_u128(a).unwrap(), Fp::from_u128(b).unwrap());
        assert_eq!((x + y).value(), back(&((big(a) + big(b)) % &p)));
        assert_eq!((x - y).value(), back(&((big(a) + &p - big(b)) % &p)));
        assert_eq!((x * y).value(), back(&((big(a) * big(b)) % &p)));
        assert_eq!((-x).value(), back(&((&p - big(a)) % &p)));
    }
}

#[test]
fn fp_inverse_matches_extended_euclid() {
    let mut rng = ChaCha20Rng::seed_from_u64(44);
    for _ in 0..1000 {
        let a = 1 + rng.gen::<u128>() % (P128 - 1);
        let inv = Fp::from_u128(a).unwrap().inverse().unwrap();
        assert_eq!(inv.value(), euclid_inverse(a, P128));
        assert_eq!((big(a) * big(inv.value())) % big(P128), BigUint::one());
    }
    assert_eq!(Fp::ONE.inverse().unwrap(), Fp::ONE);
}

#[test]
fn small_field_vectors() {
    type F11 = Fp64<11>;
    let f = F11::from_u64;
    assert_eq!(f(3) + f(4), f(7));
    assert_eq!(F11::ZERO + f(9), f(9));
    assert_eq!(f(3).inverse().unwrap(), f(4));
    assert_eq!(f(1).inverse().unwrap(), f(1));
    assert_eq!(F11::ZERO.inverse(), Err(FieldError::ZeroInverse));
    for a in 1..11 {
        assert_eq!(
            f(a).inverse().unwrap().value() as u128,
            euclid_inverse(a as u128, 11)
        );
    }
}

#[test]
fn element_bytes_boundaries() {
    assert_eq!(Fp::from_bytes(&[0; 16]).unwrap(), Fp::ZERO);
    assert_eq!(
        Fp::from_bytes(&(P128 - 1).to_le_bytes()).unwrap().value(),
        P128 - 1
    );
    assert_eq!(
        Fp::from_bytes(&P128.to_le_bytes()),
        Err(FieldError::OutOfRange)
    );
}

#[test]
fn crt_round_trip_and_ring_arithmetic() {
    let sys = CrtSystem::default();
    let n = big(sys.product());
    assert_eq!(sys.decompose(0).unwrap(), [0; 4]);
    assert_eq!(sys.decompose(1).unwrap(), [1; 4]);
    let mut rng = ChaCha20Rng::seed_from_u64(5);
    for _ in 0..1000 {
        let a = rng.gen::<u128>() % sys.product();
        let residues = sys.decompose(a).unwrap();
        for (r, p) in residues.iter().zip(sys.primes()) {
            assert_eq!(*r as u128, a % p as u128);
        }
        assert_eq!(sys.recombine(residues).unwrap(), a);

        let b = rng.gen::<u128>() % sys.product();
        let (x, y) = (Crt4::from_u128(a).unwrap(), Crt4::from_u128(b).unwrap());
        assert_eq!((x * y).to_u128(), back(&((big(a) * big(b)) % &n)));
        assert_eq!((x + y).to_u128(), back(&((big(a) + big(b)) % &n)));
        assert_eq!((x - y).to_u128(), back(&((big(a) + &n - big(b)) % &n)));
        assert_eq!(x.cmp(&y), a.cmp(&b));
    }
}

fn fp() -> impl Strategy<Value = Fp> {
    (0..P128).prop_map(|v| Fp::from_u128(v).unwrap())
}

proptest! {
    #[test]
    fn fp_ring_laws(a in fp(), b in fp(), c in fp()) {
        prop_assert_eq!(a + b, b + a);
        prop_assert_eq!(a * b, b * a);
        prop_assert_eq!((a + b) + c, a + (b + c));
        prop_assert_eq!((a * b) * c, a * (b * c));
        prop_assert_eq!(a * (b + c), a * b + a * c);
        prop_assert_eq!(a - a, Fp::ZERO);
        prop_assert_eq!(a + (-a), Fp::ZERO);
        prop_assert!(a.value() < P128);
    }

    #[test]
    fn fp_inverse_multiplies_back(a in 1..P128) {
        let x = Fp::from_u128(a).unwrap();
        prop_assert_eq!(x * x.inverse().unwrap(), Fp::ONE);
    }

    #[test]
    fn crt_bytes_round_trip(a in 0..CrtSystem::default().product()) {
        let x = Crt4::from_u128(a).unwrap();
        prop_assert_eq!(Crt4::from_bytes(&x.to_bytes()).unwrap(), x);
        prop_assert_eq!(x.to_u128(), a);
    }
}
