//! The acceptance suite: one PASS/FAIL line per criterion. Exits non-zero if
//! any criterion fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use tpsi::bench::{log_log_slope, run_sweep, BenchRow, SweepSpec};
use tpsi::config::{BackendChoice, ProtocolChoice};
use tpsi::he_ole::PaillierOle;
use tpsi::tpsi_core::field::{Field, Fp, Fp64};
use tpsi::tpsi_core::ole::{ole_batch, IdealOle, Ole, OleBatch};
use tpsi::tpsi_core::opprf::{
    evaluate_local, IdealOpprf, Opprf, OpprfKind, ProgrammedPoints, SenderKey, TableOpprf,
};
use tpsi::tpsi_core::oprf::OprfContext;
use tpsi::tpsi_core::session::{IntersectionResult, Mode, Protocol, SessionConfig};
use tpsi::tpsi_core::shamir::{
    lagrange_at, share_secret, share_with_polynomial, zero_shares, Share, SharingPolynomial,
};
use tpsi::tpsi_core::Crt4;

use common::{et_prediction, random_instance, reference, run, session, st_prediction, Instance};

type F11 = Fp64<11>;
type F251 = Fp64<251>;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

// ---------------------------------------------------------------------------
// 1, 2: oracle equivalence

/// Runs `inst` and compares with the reference; also checks that planted
/// leader elements at exactly `t - 1` holders are absent and at exactly `t`
/// present.
fn equivalent<F: Field>(
    inst: &Instance<F>,
    cfg: &SessionConfig,
    ole: &dyn Ole<F>,
    seed: u64,
) -> Result<(), String> {
    let got = run(cfg, &inst.sets, ole, seed, false).leader.result;
    let want = reference(&inst.sets, inst.t);
    ensure(got == want, || {
        format!(
            "seed {seed} (n={}, t={}, m={}): {} entries vs {} expected",
            inst.n,
            inst.t,
            inst.m,
            got.len(),
            want.len()
        )
    })?;
    planted_respected(inst, &got).map_err(|e| format!("seed {seed}: {e}"))
}

fn planted_respected<F: Field>(
    inst: &Instance<F>,
    got: &IntersectionResult<F>,
) -> Result<(), String> {
    for (holders, e) in inst.plan.planted.iter().zip(&inst.planted) {
        if !holders.contains(&0) {
            continue;
        }
        let reported = got.entries.iter().find(|r| r.element == *e);
        if holders.len() + 1 == inst.t {
            ensure(reported.is_none(), || {
                format!("element held by t-1 = {} parties reported", inst.t - 1)
            })?;
        } else if holders.len() == inst.t {
            ensure(reported.map(|r| &r.holders) == Some(holders), || {
                "element held by exactly t parties missed".into()
            })?;
        }
    }
    Ok(())
}

fn equivalence_suite<F: Field>(
    protocol: Protocol,
    mode: Mode,
    seeds: std::ops::Range<u64>,
    opprf: OpprfKind,
) -> Result<usize, String> {
    let mut count = 0;
    for seed in seeds {
        let inst = random_instance::<F>(seed);
        let cfg = SessionConfig {
            mode,
            opprf,
            ..session(protocol, inst.n, inst.t, inst.m)
        };
        equivalent(&inst, &cfg, &IdealOle, seed)?;
        count += 1;
    }
    Ok(count)
}

fn criterion_1() -> Outcome {
    let t0 = Instant::now();
    let ideal = equivalence_suite::<Fp>(Protocol::Et, Mode::Single, 0..200, OpprfKind::Ideal)?;
    let table = equivalence_suite::<Fp>(Protocol::Et, Mode::Single, 0..20, OpprfKind::Table)?;
    Ok(format!("{ideal} ideal-backend and {table} table-OPPRF instances identical to the reference ({:.1?})", t0.elapsed()))
}

fn criterion_2() -> Outcome {
    let t0 = Instant::now();
    let single = equivalence_suite::<Fp>(Protocol::St, Mode::Single, 0..200, OpprfKind::Ideal)?;
    let crt = equivalence_suite::<Crt4>(Protocol::St, Mode::Crt, 0..200, OpprfKind::Ideal)?;
    let table = equivalence_suite::<Fp>(Protocol::St, Mode::Single, 0..20, OpprfKind::Table)?;
    let ideal_time = t0.elapsed();

    // homomorphic OLE: small instances, 1024-bit keys
    let t1 = Instant::now();
    let paillier = PaillierOle { modulus_bits: 1024 };
    let shapes = [
        (3, 2, 8),
        (3, 3, 8),
        (4, 2, 8),
        (4, 3, 8),
        (5, 3, 8),
        (5, 4, 8),
    ];
    for (idx, &(n, t, m)) in shapes.iter().enumerate() {
        let inst = planted_instance::<Fp>(n, t, m, 5000 + idx as u64);
        let cfg = session(Protocol::St, n, t, m);
        equivalent(&inst, &cfg, &paillier, idx as u64)?;
    }
    for (idx, &(n, t, m)) in shapes[..4].iter().enumerate() {
        let inst = planted_instance::<Crt4>(n, t, m, 6000 + idx as u64);
        let cfg = SessionConfig {
            mode: Mode::Crt,
            ..session(Protocol::St, n, t, m)
        };
        equivalent(&inst, &cfg, &paillier, idx as u64)?;
    }
    Ok(format!(
        "{single} single-modulus, {crt} CRT, {table} table-OPPRF instances ({ideal_time:.1?}); 6 + 4 with Paillier OLE ({:.1?})",
        t1.elapsed()
    ))
}

fn planted_instance<F: Field>(n: usize, t: usize, m: usize, seed: u64) -> Instance<F> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let plan = tpsi::tpsi_core::oracle::OverlapPlan::straddling(n, t, m, 2, &mut rng);
    let (inst, planted) =
        tpsi::tpsi_core::oracle::gen_instance_planted::<F>(n, t, m, &plan, seed).unwrap();
    Instance {
        n,
        t,
        m,
        sets: inst.sets,
        plan,
        planted,
    }
}

// ---------------------------------------------------------------------------
// 3: Shamir

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if n < k {
        return vec![];
    }
    let mut with: Vec<Vec<usize>> = subsets(n - 1, k - 1);
    with.iter_mut().for_each(|s| s.push(n - 1));
    let mut out = subsets(n - 1, k);
    out.extend(with);
    out
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha20Rng::seed_from_u64(3);
    let mut subsets_checked = 0;
    for n in 2..=8 {
        for t in 2..=n {
            let secret = Fp::random(&mut rng);
            let shares = share_secret(secret, t, n, &mut rng).map_err(|e| e.to_string())?;
            for s in subsets(n, t) {
                let pts: Vec<_> = s.iter().map(|&i| shares[i]).collect();
                ensure(lagrange_at(&pts, Fp::ZERO).unwrap() == secret, || {
                    format!("n={n} t={t} subset {s:?}")
                })?;
                subsets_checked += 1;
            }
        }
    }

    let (n, t) = (7, 4);
    let secret = Fp::random(&mut rng);
    let mut shares = share_secret(secret, t, n, &mut rng).unwrap();
    for round in 0..500 {
        let zero = zero_shares::<Fp, _>(t, n, &mut rng).unwrap();
        for (s, z) in shares.iter_mut().zip(&zero) {
            s.y += z.y;
        }
        let pick: Vec<_> = subsets(n, t)[round % 35]
            .iter()
            .map(|&i| shares[i])
            .collect();
        ensure(lagrange_at(&pick, Fp::ZERO).unwrap() == secret, || {
            format!("refresh {round} changed the secret")
        })?;
    }

    let f = F11::from_u64;
    let pts = |v: &[(u8, u64)]| {
        v.iter()
            .map(|&(x, y)| Share { x, y: f(y) })
            .collect::<Vec<_>>()
    };
    let shares =
        share_with_polynomial(&SharingPolynomial::from_coefficients(vec![f(5), f(3)]), 3).unwrap();
    ensure(shares == pts(&[(1, 8), (2, 0), (3, 3)]), || {
        "mod-11 shares".into()
    })?;
    let refresh =
        share_with_polynomial(&SharingPolynomial::from_coefficients(vec![f(0), f(2)]), 3).unwrap();
    let sum: Vec<_> = shares
        .iter()
        .zip(&refresh)
        .map(|(a, b)| Share {
            x: a.x,
            y: a.y + b.y,
        })
        .collect();
    ensure(sum == pts(&[(1, 10), (2, 4), (3, 9)]), || {
        "mod-11 refresh".into()
    })?;
    ensure(lagrange_at(&sum[..2], F11::ZERO).unwrap() == f(5), || {
        "mod-11 reconstruction".into()
    })?;
    ensure(lagrange_at(&pts(&[(1, 7)]), f(4)).unwrap() == f(7), || {
        "degree-0 interpolation".into()
    })?;
    Ok(format!(
        "{subsets_checked} t-subsets for n <= 8, 500 refreshes, mod-11 vectors"
    ))
}

// ---------------------------------------------------------------------------
// 4: OPPRF

fn criterion_4() -> Outcome {
    let mut rng = ChaCha20Rng::seed_from_u64(4);
    let backends: [(&str, &dyn Opprf<Fp>); 2] = [("ideal", &IdealOpprf), ("table", &TableOpprf)];
    for (name, backend) in backends {
        for bin in 0..1000u32 {
            let capacity = rng.gen_range(1..=10);
            let mut points = Vec::new();
            while points.len() < rng.gen_range(0..=capacity) {
                let x = Fp::random(&mut rng);
                if points.iter().all(|p: &(Fp, Fp)| p.0 != x) {
                    points.push((x, Fp::random(&mut rng)));
                }
            }
            let pp = ProgrammedPoints::from_points(points.clone(), capacity)
                .map_err(|e| e.to_string())?;
            let key = SenderKey::random(&mut rng);
            let ctx = OprfContext { instance: 4, bin };
            for (x, y) in &points {
                let got = evaluate_local(backend, &key, &ctx, &pp, *x, &mut rng)
                    .map_err(|e| e.to_string())?;
                ensure(got == *y, || {
                    format!("{name}: bin {bin} lost a programmed point")
                })?;
            }
        }
        for capacity in [1usize, 4, 16] {
            let mut sizes = std::collections::BTreeSet::new();
            for count in [0, capacity / 2, capacity] {
                let pts: Vec<(Fp, Fp)> = (0..count)
                    .map(|i| (Fp::from_u64(i as u64 + 1), Fp::random(&mut rng)))
                    .collect();
                let pp = ProgrammedPoints::from_points(pts, capacity).unwrap();
                let ctx = OprfContext {
                    instance: 1,
                    bin: 0,
                };
                let mut query = Vec::new();
                backend.receiver_query(&ctx, Fp::from_u64(1), &mut rng, &mut query);
                let mut resp = Vec::new();
                backend
                    .sender_respond(
                        &SenderKey::random(&mut rng),
                        &ctx,
                        &query,
                        &pp,
                        &mut rng,
                        &mut resp,
                    )
                    .unwrap();
                sizes.insert((query.len(), resp.len()));
            }
            ensure(sizes.len() == 1, || {
                format!("{name}: sizes vary with content at u={capacity}: {sizes:?}")
            })?;
        }
    }
    Ok("1000 bins per backend recovered exactly; query and hint sizes fixed per capacity".into())
}

// ---------------------------------------------------------------------------
// 5: OLE

fn triples<F: Field>(backend: &dyn Ole<F>, seed: u64) -> Result<(), String> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let k = 1000;
    let batch = OleBatch {
        slopes: (0..k).map(|_| F::random(&mut rng)).collect::<Vec<F>>(),
        offsets: (0..k).map(|_| F::random(&mut rng)).collect(),
        inputs: (0..k).map(|_| F::random(&mut rng)).collect(),
    };
    let out = ole_batch(backend, &batch, &mut rng).map_err(|e| e.to_string())?;
    for (i, &y) in out.iter().enumerate() {
        ensure(
            y == batch.slopes[i] * batch.inputs[i] + batch.offsets[i],
            || format!("triple {i}"),
        )?;
    }
    Ok(())
}

fn criterion_5() -> Outcome {
    triples::<Fp>(&IdealOle, 50)?;
    triples::<Crt4>(&IdealOle, 51)?;
    let paillier = PaillierOle { modulus_bits: 1024 };
    triples::<Fp>(&paillier, 52)?;
    triples::<Crt4>(&paillier, 53)?;

    // both legs of one refresh value, over every (e0, ei, r) in F_251
    let mut rng = ChaCha20Rng::seed_from_u64(54);
    let all: Vec<F251> = (0..251).map(F251::from_u64).collect();
    for &e0 in &all {
        for &ei in &all {
            let a0 = F251::random(&mut rng);
            let refresh = F251::random(&mut rng);
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
            let mut hit = [false; 251];
            for (k, &r) in all.iter().enumerate() {
                let err = z0[k] + z1[k] - refresh;
                ensure(err == r * (e0 - ei), || {
                    format!("e0={e0:?} ei={ei:?} r={r:?}")
                })?;
                hit[err.value() as usize] = true;
            }
            let distinct = hit.iter().filter(|&&h| h).count();
            ensure(
                if e0 == ei {
                    distinct == 1 && hit[0]
                } else {
                    distinct == 251
                },
                || format!("e0={e0:?} ei={ei:?}: {distinct} values"),
            )?;
        }
    }
    Ok("1000 triples each: ideal and Paillier, F_p and CRT; mismatch error uniform over all of F_251".into())
}

// ---------------------------------------------------------------------------
// 6: no false positives

fn criterion_6() -> Outcome {
    let (n, t, m) = (5, 3, 64);
    let mut total = [0usize; 2];
    let mut reported = [0usize; 2];
    for (pi, protocol) in [Protocol::Et, Protocol::St].into_iter().enumerate() {
        let mut seed = 0u64;
        while total[pi] < 10_000 {
            let mut rng = ChaCha20Rng::seed_from_u64(60_000 + seed);
            // every leader element is held by at most t - 1 parties
            let planted: Vec<Vec<usize>> = (0..m)
                .map(|_| {
                    let mut h = vec![0];
                    for _ in 0..rng.gen_range(0..t - 1) {
                        h.push(rng.gen_range(1..n));
                    }
                    h.sort_unstable();
                    h.dedup();
                    h
                })
                .collect();
            let plan = tpsi::tpsi_core::oracle::OverlapPlan { planted };
            let (inst, _) =
                tpsi::tpsi_core::oracle::gen_instance_planted::<Fp>(n, t, m, &plan, seed).unwrap();
            let out = run(
                &session(protocol, n, t, m),
                &inst.sets,
                &IdealOle,
                seed,
                false,
            );
            total[pi] += m;
            reported[pi] += out.leader.result.len();
            seed += 1;
        }
    }
    ensure(reported == [0, 0], || {
        format!("reported {reported:?} of {total:?} below-threshold elements")
    })?;
    Ok(format!(
        "ET {} and ST {} below-threshold leader elements, none reported",
        total[0], total[1]
    ))
}

// ---------------------------------------------------------------------------
// 7: collusion

fn criterion_7() -> Outcome {
    // ET: colluders P0, P1 (t - 1 = 2), honest P2..P4
    let (n, t, m) = (5, 3, 16);
    let (mut held, mut not_held) = (0, 0);
    for seed in 0..40u64 {
        let mut rng = ChaCha20Rng::seed_from_u64(70_000 + seed);
        let planted: Vec<Vec<usize>> = (0..m)
            .map(|_| {
                let mut h: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.5)).collect();
                h.insert(0, 0);
                h.dedup();
                h
            })
            .collect();
        let plan = tpsi::tpsi_core::oracle::OverlapPlan { planted };
        let (inst, _) =
            tpsi::tpsi_core::oracle::gen_instance_planted::<Fp>(n, t, m, &plan, seed).unwrap();
        let cfg = SessionConfig {
            record_view: true,
            ..session(Protocol::Et, n, t, m)
        };
        let out = run(&cfg, &inst.sets, &IdealOle, seed, true);
        for (k, e) in inst.sets[0].iter().enumerate() {
            for honest in t - 1..n {
                let (predicted, observed) = et_prediction(&out, n, t, k, honest);
                let holds = inst.sets[honest].contains(e);
                ensure((predicted == observed) == holds, || {
                    format!("ET seed {seed} element {k} party {honest}: prediction {} but holds = {holds}", predicted == observed)
                })?;
                if holds {
                    held += 1;
                } else {
                    not_held += 1;
                }
            }
        }
    }

    // ST over F_251: every party but P3 colludes; only the leader (and P3
    // half the time) holds the target element
    let (n, t, m) = (4, 3, 4);
    let runs = 500;
    let mut matches = 0;
    let mut honest_holds = 0;
    for seed in 0..runs as u64 {
        let mut rng = ChaCha20Rng::seed_from_u64(71_000 + seed);
        let p3 = rng.gen_bool(0.5);
        honest_holds += p3 as usize;
        let planted = vec![if p3 { vec![0, 3] } else { vec![0] }];
        let plan = tpsi::tpsi_core::oracle::OverlapPlan { planted };
        let (inst, target) =
            tpsi::tpsi_core::oracle::gen_instance_planted::<F251>(n, t, m, &plan, seed).unwrap();
        let cfg = SessionConfig {
            record_view: true,
            ..session(Protocol::St, n, t, m)
        };
        let out = run(&cfg, &inst.sets, &IdealOle, seed, true);
        let k = inst.sets[0].iter().position(|e| *e == target[0]).unwrap();
        let (predicted, collected) = st_prediction(&out, n, t, k, 3);
        matches += (predicted == collected) as usize;
    }
    let freq = matches as f64 / runs as f64;
    ensure(freq <= 0.02, || {
        format!("ST prediction matched in {matches} of {runs} runs")
    })?;
    Ok(format!(
        "ET: prediction equals the OPPRF output in all {held} held cases and none of {not_held} others; \
         ST at p = 251: {matches}/{runs} matches ({:.2}%, P3 held e in {honest_holds})",
        freq * 100.0
    ))
}

// ---------------------------------------------------------------------------
// 8: scaling

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

fn median_by(
    rows: &[BenchRow],
    keep: impl Fn(&BenchRow) -> bool,
    value: impl Fn(&BenchRow) -> f64,
) -> f64 {
    median(rows.iter().filter(|r| keep(r)).map(value).collect())
}

fn criterion_8() -> Outcome {
    let spec = SweepSpec {
        protocols: vec![ProtocolChoice::Et],
        ns: vec![5],
        ts: Some(vec![3]),
        ms: vec![1 << 12, 1 << 14],
        reps: 5,
        ..SweepSpec::default()
    };
    let rows = run_sweep(&spec, |_| {}).map_err(|e| e.to_string())?;
    let small = median_by(&rows, |r| r.m == 1 << 12, |r| r.leader_total_cpu_ms);
    let large = median_by(&rows, |r| r.m == 1 << 14, |r| r.leader_total_cpu_ms);
    let ratio = large / small;

    // t = max(2, n/2); ET's share phase is short, so it is timed at the larger
    // m where scheduler noise on the leader thread matters less
    let ns = [4, 6, 8, 10];
    let slope = |protocol: ProtocolChoice, m: usize, reps: usize| -> Result<f64, String> {
        let spec = SweepSpec {
            protocols: vec![protocol],
            ns: ns.to_vec(),
            ts: None,
            ms: vec![m],
            reps,
            opprf: BackendChoice::Ideal,
            ole: BackendChoice::Ideal,
            ..SweepSpec::default()
        };
        let rows = run_sweep(&spec, |_| {}).map_err(|e| e.to_string())?;
        let pts: Vec<(f64, f64)> = ns
            .iter()
            .map(|&n| {
                (
                    (n - 1) as f64,
                    median_by(&rows, |r| r.n == n, |r| r.leader_share_cpu_ms),
                )
            })
            .collect();
        Ok(log_log_slope(&pts))
    };
    let (et, st) = (
        slope(ProtocolChoice::Et, 1 << 14, 5)?,
        slope(ProtocolChoice::St, 1 << 12, 3)?,
    );
    let detail = format!("ET m=2^14/2^12 leader CPU ratio {ratio:.2}; share-phase slope vs n-1: ET {et:.2}, ST {st:.2}");
    ensure(
        (2.0..=5.0).contains(&ratio) && st >= 1.5 && et <= 1.3,
        || detail.clone(),
    )?;
    Ok(detail)
}

// ---------------------------------------------------------------------------
// 9: leakage shape

fn criterion_9() -> Outcome {
    let (n, t, m) = (4, 2, 32);
    let mut rng = ChaCha20Rng::seed_from_u64(9);
    let fresh = |rng: &mut ChaCha20Rng| Fp::random(rng);
    let leader: Vec<Fp> = (0..m).map(|_| fresh(&mut rng)).collect();
    let others: Vec<Vec<Fp>> = (0..2)
        .map(|_| (0..m).map(|_| fresh(&mut rng)).collect())
        .collect();
    // client 1 either shares half the leader's set or nothing at all
    let overlapping: Vec<Fp> = leader[..m / 2]
        .iter()
        .copied()
        .chain((0..m / 2).map(|_| fresh(&mut rng)))
        .collect();
    let disjoint: Vec<Fp> = (0..m).map(|_| fresh(&mut rng)).collect();
    let mut compared = 0;
    for protocol in [Protocol::Et, Protocol::St] {
        for opprf in [OpprfKind::Ideal, OpprfKind::Table] {
            let cfg = SessionConfig {
                opprf,
                ..session(protocol, n, t, m)
            };
            let profiles = |client1: &Vec<Fp>| {
                let sets = vec![
                    leader.clone(),
                    client1.clone(),
                    others[0].clone(),
                    others[1].clone(),
                ];
                let out = run(&cfg, &sets, &IdealOle, 99, true);
                out.transcripts
                    .iter()
                    .map(|tr| tr.profile())
                    .collect::<Vec<_>>()
            };
            let (a, b) = (profiles(&overlapping), profiles(&disjoint));
            ensure(a == b, || {
                format!("{protocol:?}/{opprf:?}: byte profiles differ")
            })?;
            compared += a.len();
        }
    }
    Ok(format!("{compared} per-party byte profiles identical across two client-1 inputs (ET, ST; ideal and table OPPRF)"))
}

fn main() -> ExitCode {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 9] = [
        ("oracle equivalence, ET", criterion_1),
        ("oracle equivalence, ST", criterion_2),
        ("Shamir suite", criterion_3),
        ("OPPRF", criterion_4),
        ("OLE", criterion_5),
        ("no false positives", criterion_6),
        ("collusion: ET attack, ST contrast", criterion_7),
        ("scaling shape", criterion_8),
        ("leakage shape", criterion_9),
    ];
    let only: Option<usize> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .and_then(|v| v.parse().ok());
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        if only.is_some_and(|k| k != i + 1) {
            continue;
        }
        let started = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = started.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS [{}] {name}: {detail} [{secs:.1} s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL [{}] {name}: {detail} [{secs:.1} s]", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
