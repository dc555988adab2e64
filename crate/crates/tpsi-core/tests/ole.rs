use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use tpsi_core::field::{Field, Fp, Fp64};
use tpsi_core::ole::{ole_batch, ole_eval, IdealOle, OleBatch, OleError, OleSenderInput};
use tpsi_core::Crt4;

type F11 = Fp64<11>;
type F251 = Fp64<251>;

#[test]
fn hand_vectors() {
    let mut rng = ChaCha20Rng::seed_from_u64(1);
    let f = F11::from_u64;
    assert_eq!(
        ole_eval(&IdealOle, OleSenderInput::new(f(3), f(4)), f(2), &mut rng).unwrap(),
        f(10)
    );
    for x in 0..11 {
        assert_eq!(
            ole_eval(&IdealOle, OleSenderInput::new(f(0), f(6)), f(x), &mut rng).unwrap(),
            f(6)
        );
    }
    let empty = OleBatch::<F11> {
        slopes: vec![],
        offsets: vec![],
        inputs: vec![],
    };
    assert_eq!(ole_batch(&IdealOle, &empty, &mut rng).unwrap(), vec![]);
    let bad = OleBatch {
        slopes: vec![f(1)],
        offsets: vec![],
        inputs: vec![f(1)],
    };
    assert_eq!(
        ole_batch(&IdealOle, &bad, &mut rng),
        Err(OleError::LengthMismatch)
    );
}

fn random_triples<F: Field>(rng: &mut ChaCha20Rng, k: usize) -> OleBatch<F> {
    OleBatch {
        slopes: (0..k).map(|_| F::random(rng)).collect(),
        offsets: (0..k).map(|_| F::random(rng)).collect(),
        inputs: (0..k).map(|_| F::random(rng)).collect(),
    }
}

fn check_triples<F: Field>(seed: u64) {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let batch = random_triples::<F>(&mut rng, 1000);
    let out = ole_batch(&IdealOle, &batch, &mut rng).unwrap();
    for (i, &y) in out.iter().enumerate() {
        assert_eq!(y, batch.slopes[i] * batch.inputs[i] + batch.offsets[i]);
    }
    let single = OleSenderInput::new(batch.slopes[0], batch.offsets[0]);
    assert_eq!(
        ole_eval(&IdealOle, single, batch.inputs[0], &mut rng).unwrap(),
        out[0]
    );
}

#[test]
fn thousand_random_triples() {
    check_triples::<Fp>(2);
    check_triples::<Crt4>(3);
    check_triples::<F251>(4);
}

/// The two legs a sender hands out for one refresh value recombine to it
/// exactly when the leader and the client evaluate at the same point.
fn leg_sum<F: Field>(r: F, a0: F, refresh: F, e0: F, ei: F, rng: &mut ChaCha20Rng) -> F {
    let to_leader = OleSenderInput::new(r, a0);
    let to_client = OleSenderInput::new(-r, refresh - a0);
    ole_eval(&IdealOle, to_leader, e0, rng).unwrap()
        + ole_eval(&IdealOle, to_client, ei, rng).unwrap()
}

#[test]
fn matching_legs_recombine_mod_11() {
    let mut rng = ChaCha20Rng::seed_from_u64(5);
    let f = F11::from_u64;
    // n = 3: senders P1 and P2 refresh the share of client 1 (x = 2)
    let refresh = [f(4), f(9)];
    let rs = [f(3), f(5)];
    let a0s = [f(7), f(2)];
    let e = f(7);
    let total: F11 = (0..2)
        .map(|j| leg_sum(rs[j], a0s[j], refresh[j], e, e, &mut rng))
        .sum();
    assert_eq!(total, refresh[0] + refresh[1]);
}

/// Exhaustive over `F_251`: for every `e0 != ei`, running `r` over the whole
/// field makes the error `z0 + z1 - refresh` equal `r (e0 - ei)` and hit
/// every field element exactly once.
#[test]
fn mismatched_legs_are_uniformly_masked_mod_251() {
    let mut rng = ChaCha20Rng::seed_from_u64(6);
    let all: Vec<F251> = (0..251).map(F251::from_u64).collect();
    for &e0 in &all {
        for &ei in &all {
            let a0 = F251::random(&mut rng);
            let refresh = F251::random(&mut rng);
            // one batch per leg covering every r
            let leader = OleBatch {
                slopes: all.clone(),
                offsets: vec![a0; 251],
                inputs: vec![e0; 251],
            };
            let client = OleBatch {
                slopes: all.iter().map(|&r| -r).collect(),
                offsets: vec![refresh - a0; 251],
                inputs: vec![ei; 251],
            };
            let z0 = ole_batch(&IdealOle, &leader, &mut rng).unwrap();
            let z1 = ole_batch(&IdealOle, &client, &mut rng).unwrap();
            let mut seen = [false; 251];
            for (k, &r) in all.iter().enumerate() {
                let err = z0[k] + z1[k] - refresh;
                assert_eq!(err, r * (e0 - ei));
                seen[err.value() as usize] = true;
            }
            if e0 == ei {
                assert!(seen.iter().enumerate().all(|(v, &s)| s == (v == 0)));
            } else {
                assert!(seen.iter().all(|&s| s), "e0={e0:?} ei={ei:?}");
            }
        }
    }
}
