//! The efficient protocol: conditional share distribution through OPPRF,
//! share refresh by zero-sharings sent directly between parties, and
//! conditional collection back at the leader.
//!
//! Tolerates up to `t - 2` colluding parties. With `t - 1` colluders
//! (including the leader) the refresh values can be interpolated away and
//! membership of an honest party becomes visible; the attack test in the
//! workspace demonstrates exactly that.

use alloc::vec;
use alloc::vec::Vec;

use rand_core::RngCore;

use crate::channel::{Link, Mailbox};
use crate::field::Field;
use crate::frame::{MessageKind, Phase};
use crate::session::{
    client_setup, decode_elements, distribute_shares, finish_client, finish_leader, instance_id,
    leader_setup, opprf_finish_bins, opprf_query_bins, opprf_serve_bins, receive_shares,
    reconstruct_all, with_abort, Backends, ClientView, IntersectionResult, LeaderView, Prepared,
    ProtocolError, Purpose, SessionConfig, ZeroPolys,
};

#[derive(Debug, Clone)]
pub struct LeaderOutput<F> {
    pub result: IntersectionResult<F>,
    pub ambiguous: usize,
    pub view: Option<LeaderView<F>>,
}

#[derive(Debug, Clone)]
pub struct ClientOutput<F> {
    pub view: Option<ClientView<F>>,
}

pub fn run_leader<F: Field, L: Link>(
    cfg: &SessionConfig,
    set: &[F],
    backends: Backends<'_, F>,
    link: L,
    rng: &mut dyn RngCore,
) -> Result<LeaderOutput<F>, ProtocolError> {
    let mut mb = Mailbox::new(link);
    with_abort(&mut mb, |mb| {
        let prep = leader_setup(cfg, set, mb, rng)?;
        let shares = phase1_distribute(cfg, &prep, set, backends, mb, rng)?;
        let delta = phase2_leader(cfg, &prep, mb)?;
        let (collected, outputs) =
            phase3_collect_leader(cfg, &prep, set, &shares, &delta, backends, mb, rng)?;
        let (result, ambiguous) = reconstruct_all(cfg, set, set, &collected)?;
        finish_leader(cfg.n, mb)?;
        let view = cfg.record_view.then(|| LeaderView {
            session: prep.session,
            params: Some(prep.params),
            secrets: set.to_vec(),
            bins: (0..set.len()).map(|k| prep.cuckoo.bin_of(k)).collect(),
            shares,
            collected,
            opprf_outputs: outputs,
            delta,
            ..Default::default()
        });
        Ok(LeaderOutput {
            result,
            ambiguous,
            view,
        })
    })
}

pub fn run_client<F: Field, L: Link>(
    cfg: &SessionConfig,
    set: &[F],
    backends: Backends<'_, F>,
    link: L,
    rng: &mut dyn RngCore,
) -> Result<ClientOutput<F>, ProtocolError> {
    let mut mb = Mailbox::new(link);
    with_abort(&mut mb, |mb| {
        let prep = client_setup(cfg, set, mb)?;
        mb.enter_phase(Phase::Share)?;
        let obtained = receive_shares(cfg, &prep, backends.opprf, mb, rng)?;
        let (polys, delta) = phase2_client(cfg, &prep, mb, rng)?;
        phase3_collect_client(cfg, &prep, &obtained, &delta, backends, mb, rng)?;
        finish_client(mb)?;
        let view = cfg.record_view.then(|| ClientView {
            obtained,
            cuckoo: prep.cuckoo.bins().iter().map(|e| e.value).collect(),
            simple: prep.simple.entries().iter().map(|e| e.value).collect(),
            zero_evals: (0..prep.params.bins)
                .flat_map(|b| (0..cfg.n).map(move |j| (b, j)))
                .map(|(b, j)| polys.at(b, j))
                .collect(),
            delta,
            ..Default::default()
        });
        Ok(ClientOutput { view })
    })
}

/// Shares every leader element and makes share `i` obtainable by client `i`
/// through the OPPRF over the leader's Simple bins. Returns the shares,
/// `[k * n + i]`.
pub fn phase1_distribute<F: Field, L: Link>(
    cfg: &SessionConfig,
    prep: &Prepared<F>,
    set: &[F],
    backends: Backends<'_, F>,
    mb: &mut Mailbox<L>,
    rng: &mut dyn RngCore,
) -> Result<Vec<F>, ProtocolError> {
    mb.enter_phase(Phase::Share)?;
    distribute_shares(cfg, prep, set, set, backends.opprf, mb, rng)
}

/// Leader: sum of `f_{j,b}(1)` over all clients, per bin.
pub fn phase2_leader<F: Field, L: Link>(
    cfg: &SessionConfig,
    prep: &Prepared<F>,
    mb: &mut Mailbox<L>,
) -> Result<Vec<F>, ProtocolError> {
    mb.enter_phase(Phase::Update)?;
    let bins = prep.params.bins;
    let mut delta = vec![F::ZERO; bins];
    for j in 1..cfg.n as u8 {
        let values =
            decode_elements::<F>(&mb.recv_items(j, MessageKind::UpdateValues, 16, bins)?)?;
        crate::session::add_assign_all(&mut delta, &values);
    }
    Ok(delta)
}

/// Client: sends `f_{i,b}(j + 1)` to every other party and accumulates the
/// `n - 1` contributions addressed to itself.
pub fn phase2_client<F: Field, L: Link>(
    cfg: &SessionConfig,
    prep: &Prepared<F>,
    mb: &mut Mailbox<L>,
    rng: &mut dyn RngCore,
) -> Result<(ZeroPolys<F>, Vec<F>), ProtocolError> {
    mb.enter_phase(Phase::Update)?;
    let me = cfg.party as usize;
    let bins = prep.params.bins;
    let polys = ZeroPolys::sample(bins, cfg.n, cfg.t, rng);
    for j in 0..cfg.n {
        if j != me {
            mb.send_items(j as u8, MessageKind::UpdateValues, 16, &polys.column(j))?;
        }
    }
    let mut delta: Vec<F> = (0..bins).map(|b| polys.at(b, me)).collect();
    for j in 1..cfg.n {
        if j != me {
            let values = decode_elements::<F>(&mb.recv_items(
                j as u8,
                MessageKind::UpdateValues,
                16,
                bins,
            )?)?;
            crate::session::add_assign_all(&mut delta, &values);
        }
    }
    Ok((polys, delta))
}

/// Leader queries every client with its Cuckoo bins; returns the refreshed
/// shares `[k * n + i]` (own share at `i = 0`) and the raw OPPRF outputs.
#[allow(clippy::too_many_arguments)]
pub fn phase3_collect_leader<F: Field, L: Link>(
    cfg: &SessionConfig,
    prep: &Prepared<F>,
    set: &[F],
    shares: &[F],
    delta: &[F],
    backends: Backends<'_, F>,
    mb: &mut Mailbox<L>,
    rng: &mut dyn RngCore,
) -> Result<(Vec<F>, Vec<F>), ProtocolError> {
    mb.enter_phase(Phase::Collect)?;
    let n = cfg.n;
    let mut states = Vec::with_capacity(n - 1);
    for i in 1..n as u8 {
        let instance = instance_id(&prep.session, Purpose::CollectValue, i, 0);
        states.push(opprf_query_bins(
            mb,
            backends.opprf,
            MessageKind::OpprfRequest,
            instance,
            i,
            &prep.cuckoo,
            rng,
        )?);
    }
    let mut collected = vec![F::ZERO; set.len() * n];
    for k in 0..set.len() {
        collected[k * n] = shares[k * n] + delta[prep.cuckoo.bin_of(k)];
    }
    for i in 1..n {
        let instance = instance_id(&prep.session, Purpose::CollectValue, i as u8, 0);
        let per_bin = opprf_finish_bins(
            mb,
            backends.opprf,
            MessageKind::OpprfResponse,
            instance,
            i as u8,
            prep.params.beta,
            &states[i - 1],
        )?;
        for k in 0..set.len() {
            collected[k * n + i] = per_bin[prep.cuckoo.bin_of(k)];
        }
    }
    let outputs = collected
        .iter()
        .enumerate()
        .map(|(x, v)| if x % n == 0 { F::ZERO } else { *v })
        .collect();
    Ok((collected, outputs))
}

/// Client programs `(e, obtained(e) + delta_b)` for every element of its
/// Simple bin `b`.
pub fn phase3_collect_client<F: Field, L: Link>(
    cfg: &SessionConfig,
    prep: &Prepared<F>,
    obtained: &[F],
    delta: &[F],
    backends: Backends<'_, F>,
    mb: &mut Mailbox<L>,
    rng: &mut dyn RngCore,
) -> Result<(), ProtocolError> {
    mb.enter_phase(Phase::Collect)?;
    let instance = instance_id(&prep.session, Purpose::CollectValue, cfg.party, 0);
    opprf_serve_bins(
        mb,
        backends.opprf,
        MessageKind::OpprfRequest,
        MessageKind::OpprfResponse,
        instance,
        0,
        &prep.params,
        rng,
        |b, pts, rng| {
            for e in prep.simple.bin(b) {
                match e.origin {
                    Some(k) => {
                        pts.push(e.value, obtained[prep.cuckoo.bin_of(k as usize)] + delta[b])?
                    }
                    None if cfg.pad_simple => pts.push(e.value, F::random(rng))?,
                    None => {}
                }
            }
            Ok(())
        },
    )
}
