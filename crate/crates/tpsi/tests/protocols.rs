mod common;

use common::{random_instance, reference, run, run_ideal, session};
use tpsi::tpsi_core::field::{Field, Fp};
use tpsi::tpsi_core::ole::IdealOle;
use tpsi::tpsi_core::opprf::OpprfKind;
use tpsi::tpsi_core::session::{Fault, IntersectionEntry, Mode, Protocol, SessionConfig};
use tpsi::tpsi_core::Crt4;

const BOTH: [Protocol; 2] = [Protocol::Et, Protocol::St];

fn fp(v: u64) -> Fp {
    Fp::from_u64(v)
}

fn entry(e: u64, holders: &[usize]) -> IntersectionEntry<Fp> {
    IntersectionEntry {
        element: fp(e),
        count: holders.len(),
        holders: holders.to_vec(),
    }
}

#[test]
fn worked_instance() {
    let sets = vec![vec![fp(1), fp(2), fp(3)], vec![fp(2), fp(3)], vec![fp(3)]];
    for p in BOTH {
        let out = run_ideal(&session(p, 3, 2, 3), &sets, 1);
        assert_eq!(
            out.leader.result.entries,
            vec![entry(2, &[0, 1]), entry(3, &[0, 1, 2])],
            "{p:?}"
        );
        assert_eq!(out.leader.ambiguous, 0);
    }
}

#[test]
fn unanimous_singleton() {
    let sets = vec![vec![fp(77)]; 3];
    for p in BOTH {
        let out = run_ideal(&session(p, 3, 3, 1), &sets, 2);
        assert_eq!(
            out.leader.result.entries,
            vec![entry(77, &[0, 1, 2])],
            "{p:?}"
        );
        assert_eq!(out.clients.len(), 2);
    }
}

#[test]
fn disjoint_sets_complete_with_nothing() {
    let sets: Vec<Vec<Fp>> = (0..4)
        .map(|i| (0..8).map(|k| fp(100 * i + k)).collect())
        .collect();
    for p in BOTH {
        let out = run_ideal(&session(p, 4, 2, 8), &sets, 3);
        assert!(out.leader.result.is_empty(), "{p:?}");
        assert!(out.clients.iter().all(|c| c.view.is_none()));
    }
}

#[test]
fn crt_mode_matches_the_reference() {
    for seed in 0..10 {
        let inst = random_instance::<Crt4>(500 + seed);
        let cfg = SessionConfig {
            mode: Mode::Crt,
            ..session(Protocol::St, inst.n, inst.t, inst.m)
        };
        let out = run_ideal(&cfg, &inst.sets, seed);
        assert_eq!(
            out.leader.result,
            reference(&inst.sets, inst.t),
            "seed {seed}"
        );
    }
}

#[test]
fn table_opprf_matches_the_reference() {
    for seed in 0..4 {
        let inst = random_instance::<Fp>(600 + seed);
        for p in BOTH {
            let cfg = SessionConfig {
                opprf: OpprfKind::Table,
                ..session(p, inst.n, inst.t, inst.m)
            };
            let out = run_ideal(&cfg, &inst.sets, seed);
            assert_eq!(
                out.leader.result,
                reference(&inst.sets, inst.t),
                "{p:?} seed {seed}"
            );
        }
    }
}

#[test]
fn simple_padding_does_not_affect_results() {
    for seed in 0..20 {
        let inst = random_instance::<Fp>(700 + seed);
        for p in BOTH {
            let padded = session(p, inst.n, inst.t, inst.m);
            let bare = SessionConfig {
                pad_simple: false,
                ..padded.clone()
            };
            let a = run_ideal(&padded, &inst.sets, seed).leader.result;
            let b = run_ideal(&bare, &inst.sets, seed).leader.result;
            assert_eq!(a, b, "{p:?} seed {seed}");
            assert_eq!(a, reference(&inst.sets, inst.t));
        }
    }
}

/// Shifting the programmed index makes the leader pick the wrong OLE slot,
/// so no client share reconstructs.
#[test]
fn wrong_index_breaks_reconstruction() {
    let sets = vec![vec![fp(1), fp(2), fp(3)], vec![fp(2), fp(3)], vec![fp(3)]];
    let honest = session(Protocol::St, 3, 2, 3);
    assert_eq!(run_ideal(&honest, &sets, 4).leader.result.len(), 2);
    for shift in [1, 2, 1000] {
        let faulty = SessionConfig {
            fault: Fault::IndexShift(shift),
            record_view: true,
            ..honest.clone()
        };
        let out = run(&faulty, &sets, &IdealOle, 4, false);
        assert!(out.leader.result.is_empty(), "shift {shift}");
        let view = out.leader.view.unwrap();
        // element 3 is held by both clients, yet neither collected value is
        // a valid refreshed share
        let k = sets[0].iter().position(|&e| e == fp(3)).unwrap();
        let b = view.bins[k];
        for i in 1..3 {
            let refresh: Fp = (1..3)
                .map(|j| out.clients[j - 1].view.as_ref().unwrap().zero_evals[b * 3 + i])
                .sum();
            assert_ne!(
                view.collected[k * 3 + i],
                view.shares[k * 3 + i] + refresh,
                "shift {shift}"
            );
        }
    }
}

/// For every leader element a client holds, the collected value is the
/// original share plus every client's refresh at that client's point; the
/// index OPPRF returns the element's slot in the client's Simple bin.
#[test]
fn match_algebra_on_views() {
    for seed in 0..10 {
        let inst = random_instance::<Fp>(800 + seed);
        for p in BOTH {
            let cfg = SessionConfig {
                record_view: true,
                ..session(p, inst.n, inst.t, inst.m)
            };
            let out = run(&cfg, &inst.sets, &IdealOle, seed, false);
            let view = out.leader.view.as_ref().unwrap();
            let n = inst.n;
            let beta = view.params.unwrap().beta;
            for (k, e) in inst.sets[0].iter().enumerate() {
                let b = view.bins[k];
                for i in 1..n {
                    if !inst.sets[i].contains(e) {
                        continue;
                    }
                    let refresh: Fp = (1..n)
                        .map(|j| out.clients[j - 1].view.as_ref().unwrap().zero_evals[b * n + i])
                        .sum();
                    assert_eq!(
                        view.collected[k * n + i],
                        view.shares[k * n + i] + refresh,
                        "{p:?} k={k} i={i}"
                    );
                    if p == Protocol::St {
                        let simple = &out.clients[i - 1].view.as_ref().unwrap().simple;
                        let v = simple[b * beta..(b + 1) * beta]
                            .iter()
                            .position(|x| x == e)
                            .unwrap();
                        assert_eq!(view.index_outputs[k * n + i], Fp::from_u64(v as u64));
                    }
                }
            }
        }
    }
}

/// Leader elements a client does not hold: the collected value is never a
/// valid refreshed share and the client is never named as a holder.
#[test]
fn mismatches_never_attribute() {
    let (n, t, m) = (3, 2, 64);
    let mut trials = 0;
    let mut seed = 0;
    while trials < 1000 {
        let inst = random_instance::<Fp>(900 + seed);
        let sets: Vec<Vec<Fp>> = inst
            .sets
            .iter()
            .take(n)
            .map(|s| s.iter().copied().take(m).collect())
            .collect();
        let cfg = SessionConfig {
            record_view: true,
            ..session(Protocol::St, n, t, m)
        };
        let out = run(&cfg, &sets, &IdealOle, seed, false);
        let view = out.leader.view.as_ref().unwrap();
        let expected = reference(&sets, t);
        assert_eq!(out.leader.result, expected);
        for (k, e) in sets[0].iter().enumerate() {
            let b = view.bins[k];
            for (i, set) in sets.iter().enumerate().skip(1) {
                if set.contains(e) {
                    continue;
                }
                trials += 1;
                let refresh: Fp = (1..n)
                    .map(|j| out.clients[j - 1].view.as_ref().unwrap().zero_evals[b * n + i])
                    .sum();
                assert_ne!(view.collected[k * n + i], view.shares[k * n + i] + refresh);
                assert!(out
                    .leader
                    .result
                    .entries
                    .iter()
                    .all(|r| r.element != *e || !r.holders.contains(&i)));
            }
        }
        seed += 1;
    }
}

/// Aliases are only ever Shamir constant terms: their bytes appear in no
/// frame.
#[test]
fn aliases_stay_off_the_wire() {
    let inst = random_instance::<Fp>(1000);
    let cfg = SessionConfig {
        record_view: true,
        ..session(Protocol::St, inst.n, inst.t, inst.m)
    };
    let out = run(&cfg, &inst.sets, &IdealOle, 5, true);
    let view = out.leader.view.as_ref().unwrap();
    assert_eq!(view.secrets.len(), inst.sets[0].len());
    let mut frames = 0;
    for tr in &out.transcripts {
        for r in &tr.records {
            frames += 1;
            for alias in &view.secrets {
                let bytes = alias.to_bytes();
                assert!(!r
                    .frame
                    .payload
                    .windows(bytes.len())
                    .any(|w| w == bytes.as_slice()));
            }
        }
    }
    assert!(frames > 0);
}
