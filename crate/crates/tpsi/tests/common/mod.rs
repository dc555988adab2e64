//! Helpers shared by the integration tests: instance generation, in-process
//! runs, and the collusion predictors computed from recorded views.
#![allow(dead_code)]

use std::time::Duration;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use tpsi::runner::{simulate_parties, SimOptions, SimOutcome};
use tpsi::tpsi_core::field::Field;
use tpsi::tpsi_core::frame::MessageKind;
use tpsi::tpsi_core::ole::{IdealOle, Ole};
use tpsi::tpsi_core::oracle::{
    gen_instance_planted, ideal_intersection, OverlapPlan, PlainInstance,
};
use tpsi::tpsi_core::session::{IntersectionResult, Protocol, SessionConfig};
use tpsi::transcript::Transcript;

pub fn session(protocol: Protocol, n: usize, t: usize, m: usize) -> SessionConfig {
    SessionConfig::new(protocol, n, t, m, 0)
}

pub fn run<F: Field>(
    cfg: &SessionConfig,
    sets: &[Vec<F>],
    ole: &dyn Ole<F>,
    seed: u64,
    record: bool,
) -> SimOutcome<F> {
    let opts = SimOptions {
        seed,
        timeout: Duration::from_secs(120),
        record,
    };
    simulate_parties(cfg, sets, ole, opts).unwrap_or_else(|e| panic!("session failed: {e}"))
}

pub fn run_ideal<F: Field>(cfg: &SessionConfig, sets: &[Vec<F>], seed: u64) -> SimOutcome<F> {
    run(cfg, sets, &IdealOle, seed, false)
}

pub fn reference<F: Field>(sets: &[Vec<F>], t: usize) -> IntersectionResult<F> {
    ideal_intersection(&PlainInstance {
        sets: sets.to_vec(),
        t,
    })
    .unwrap()
}

/// A random instance in the equivalence range: `n` in 3..=8, `t` in
/// 2..=n, `m` in 8..=64, overlaps planted around the threshold.
pub struct Instance<F> {
    pub n: usize,
    pub t: usize,
    pub m: usize,
    pub sets: Vec<Vec<F>>,
    pub plan: OverlapPlan,
    pub planted: Vec<F>,
}

pub fn random_instance<F: Field>(seed: u64) -> Instance<F> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let n = rng.gen_range(3..=8);
    let t = rng.gen_range(2..=n);
    let m = rng.gen_range(8..=64);
    let per_count = rng.gen_range(1..=(m / 4).max(1));
    let plan = OverlapPlan::straddling(n, t, m, per_count, &mut rng);
    let (inst, planted) = gen_instance_planted::<F>(n, t, m, &plan, seed).unwrap();
    Instance {
        n,
        t,
        m,
        sets: inst.sets,
        plan,
        planted,
    }
}

/// Lagrange evaluation at `x` through `(x_i, y_i)`, written out directly.
pub fn lagrange<F: Field>(points: &[(u64, F)], x: u64) -> F {
    let x = F::from_u64(x);
    let mut acc = F::ZERO;
    for (i, &(xi, yi)) in points.iter().enumerate() {
        let mut num = F::ONE;
        let mut den = F::ONE;
        for (j, &(xj, _)) in points.iter().enumerate() {
            if i != j {
                num *= x - F::from_u64(xj);
                den *= F::from_u64(xi) - F::from_u64(xj);
            }
        }
        acc += yi * num * den.inverse().unwrap();
    }
    acc
}

/// Field element at bin `b` of the update values `from` sent, as seen in
/// `transcript`.
pub fn update_value<F: Field>(transcript: &Transcript, from: u8, b: usize) -> F {
    let bytes: Vec<u8> = transcript
        .from_peer(from, MessageKind::UpdateValues)
        .flat_map(|f| f.payload.iter().copied())
        .collect();
    F::from_bytes(bytes[16 * b..16 * (b + 1)].try_into().unwrap()).unwrap()
}

/// ET with colluders `P_0 .. P_{t-2}`. In bin `b`, the refresh polynomial
/// `f_j` of an honest client is pinned by `f_j(0) = 0` and the `t - 1`
/// values it sent the colluders, read off their transcripts; a colluding
/// client's polynomial is known outright. Returns the predicted collected
/// value `s_i + sum_j f_j(i + 1)` for honest client `i` and leader element
/// `k`, next to the OPPRF output the leader actually received.
pub fn et_prediction<F: Field>(
    out: &SimOutcome<F>,
    n: usize,
    t: usize,
    k: usize,
    honest: usize,
) -> (F, F) {
    let view = out.leader.view.as_ref().expect("leader view");
    let b = view.bins[k];
    let colluders = 0..t - 1;
    let mut refresh = F::ZERO;
    for j in 1..n {
        refresh += if colluders.contains(&j) {
            out.clients[j - 1].view.as_ref().unwrap().zero_evals[b * n + honest]
        } else {
            let mut points = vec![(0u64, F::ZERO)];
            for c in colluders.clone() {
                points.push((c as u64 + 1, update_value(&out.transcripts[c], j as u8, b)));
            }
            lagrange(&points, honest as u64 + 1)
        };
    }
    (
        view.shares[k * n + honest] + refresh,
        view.opprf_outputs[k * n + honest],
    )
}

/// ST counterpart with every party but `honest` colluding. The honest
/// party's refresh polynomial is reconstructed from `f(0) = 0`, the value it
/// sent the leader, and the recombined OLE legs at every colluding client
/// (slot 0 of its Simple bin). Returns `(predicted, collected)`.
pub fn st_prediction<F: Field>(
    out: &SimOutcome<F>,
    n: usize,
    t: usize,
    k: usize,
    honest: usize,
) -> (F, F) {
    let view = out.leader.view.as_ref().expect("leader view");
    let beta = view.params.unwrap().beta;
    let b = view.bins[k];
    let mut points = vec![
        (0u64, F::ZERO),
        (1, update_value(&out.transcripts[0], honest as u8, b)),
    ];
    for c in (1..n).filter(|&c| c != honest).take(t - 2) {
        let leader_leg = view.ole_legs[honest][(b * (n - 1) + (c - 1)) * beta];
        let client_leg = out.clients[c - 1].view.as_ref().unwrap().ole_legs[honest][b * beta];
        points.push((c as u64 + 1, leader_leg + client_leg));
    }
    let mut refresh = lagrange(&points, honest as u64 + 1);
    for j in (1..n).filter(|&j| j != honest) {
        refresh += out.clients[j - 1].view.as_ref().unwrap().zero_evals[b * n + honest];
    }
    (
        view.shares[k * n + honest] + refresh,
        view.collected[k * n + honest],
    )
}
