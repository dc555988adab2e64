//! The security-enhanced protocol. Differences from [`crate::et`]:
//!
//! * the leader shares a random alias of each element rather than the
//!   element itself;
//! * a client's refresh value `f_{j,b}(i + 1)` for client `i` never travels
//!   in the clear. Client `j` splits it into two OLE legs,
//!   `r * e0 + a0` (to the leader, with the leader's Cuckoo element `e0`) and
//!   `-r * ei + a1` (to client `i`, with its Simple element `ei` at slot `v`),
//!   where `a0 + a1 = f_{j,b}(i + 1)`. The legs recombine to the refresh value
//!   only when `e0 = ei`; otherwise the sum is offset by a uniform
//!   `r * (e0 - ei)`;
//! * an index OPPRF tells the leader which slot `v` a matching client used.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_core::RngCore;
use sha2::{Digest, Sha256};

use crate::channel::{Link, Mailbox};
use crate::field::Field;
use crate::frame::{MessageKind, Phase};
use crate::ole::{OleReceiver, OleSender, OleSenderInput};
use crate::session::{
    add_assign_all, client_setup, decode_elements, distribute_shares, finish_client, finish_leader,
    instance_id, leader_setup, opprf_finish_bins, opprf_query_bins, opprf_serve_bins,
    receive_shares, reconstruct_all, with_abort, Backends, ClientView, Fault, LeaderView, Prepared,
    ProtocolError, Purpose, SessionConfig, ZeroPolys,
};

pub use crate::et::{ClientOutput, LeaderOutput};

/// Per-sender OLE randomness, regenerated bin by bin from a secret seed so
/// that no party has to hold `bins * n * beta` pairs at once.
struct LegMaterial {
    seed: [u8; 32],
    targets: usize,
    beta: usize,
}

impl LegMaterial {
    fn new(rng: &mut dyn RngCore, targets: usize, beta: usize) -> Self {
        let mut seed = [0u8; 32];
        rng.fill_bytes(&mut seed);
        LegMaterial {
            seed,
            targets,
            beta,
        }
    }

    /// `(r, a0)` for every `(target, slot)` of bin `b`, target-major.
    fn bin<F: Field>(&self, b: usize, out: &mut Vec<(F, F)>) {
        let key: [u8; 32] = Sha256::new()
            .chain_update(self.seed)
            .chain_update((b as u64).to_le_bytes())
            .finalize()
            .into();
        let mut rng = ChaCha20Rng::from_seed(key);
        out.clear();
        for _ in 0..self.targets * self.beta {
            let r = F::random(&mut rng);
            let a0 = F::random(&mut rng);
            out.push((r, a0));
        }
    }
}

/// The sender's two legs for one `(bin, target i, slot v)`.
fn legs<F: Field>(r: F, a0: F, refresh: F) -> (OleSenderInput<F>, OleSenderInput<F>) {
    (
        OleSenderInput::new(r, a0),
        OleSenderInput::new(-r, refresh - a0),
    )
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
        let n = cfg.n;
        let prep = leader_setup(cfg, set, mb, rng)?;
        let receiver = backends.ole.receiver_setup(rng)?;
        let hello = receiver.hello();
        for j in 1..n as u8 {
            mb.send(j, MessageKind::OleHello, 0, 0, hello.clone())?;
        }

        mb.enter_phase(Phase::Share)?;
        let aliases = sample_aliases(set, rng);
        let shares = distribute_shares(cfg, &prep, set, &aliases, backends.opprf, mb, rng)?;

        let (delta, z0, legs) = update_leader(cfg, &prep, receiver.as_ref(), mb, rng)?;

        mb.enter_phase(Phase::Collect)?;
        let beta = prep.params.beta;
        let mut value_states = Vec::with_capacity(n - 1);
        let mut index_states = Vec::with_capacity(n - 1);
        for i in 1..n as u8 {
            let vi = instance_id(&prep.session, Purpose::CollectValue, i, 0);
            let ii = instance_id(&prep.session, Purpose::CollectIndex, i, 0);
            value_states.push(opprf_query_bins(
                mb,
                backends.opprf,
                MessageKind::OpprfRequest,
                vi,
                i,
                &prep.cuckoo,
                rng,
            )?);
            index_states.push(opprf_query_bins(
                mb,
                backends.opprf,
                MessageKind::IndexOpprfRequest,
                ii,
                i,
                &prep.cuckoo,
                rng,
            )?);
        }
        let mut collected = vec![F::ZERO; set.len() * n];
        let mut outputs = vec![F::ZERO; set.len() * n];
        let mut indices = vec![F::ZERO; set.len() * n];
        for k in 0..set.len() {
            collected[k * n] = shares[k * n] + delta[prep.cuckoo.bin_of(k)];
        }
        for i in 1..n {
            let vi = instance_id(&prep.session, Purpose::CollectValue, i as u8, 0);
            let ii = instance_id(&prep.session, Purpose::CollectIndex, i as u8, 0);
            let values = opprf_finish_bins(
                mb,
                backends.opprf,
                MessageKind::OpprfResponse,
                vi,
                i as u8,
                beta,
                &value_states[i - 1],
            )?;
            let idx = opprf_finish_bins(
                mb,
                backends.opprf,
                MessageKind::IndexOpprfResponse,
                ii,
                i as u8,
                beta,
                &index_states[i - 1],
            )?;
            for k in 0..set.len() {
                let b = prep.cuckoo.bin_of(k);
                let v = idx[b].to_u128();
                let mut y = values[b];
                // an out-of-range index means "no match": the share stays random
                if v < beta as u128 {
                    y += z0[(b * (n - 1) + (i - 1)) * beta + v as usize];
                }
                collected[k * n + i] = y;
                outputs[k * n + i] = values[b];
                indices[k * n + i] = idx[b];
            }
        }
        let (result, ambiguous) = reconstruct_all(cfg, set, &aliases, &collected)?;
        finish_leader(n, mb)?;
        let view = cfg.record_view.then(|| LeaderView {
            session: prep.session,
            params: Some(prep.params),
            secrets: aliases,
            bins: (0..set.len()).map(|k| prep.cuckoo.bin_of(k)).collect(),
            shares,
            collected,
            opprf_outputs: outputs,
            index_outputs: indices,
            ole_legs: legs,
            delta,
        });
        Ok(LeaderOutput {
            result,
            ambiguous,
            view,
        })
    })
}

/// Distinct uniformly random aliases, one per element.
fn sample_aliases<F: Field>(set: &[F], rng: &mut dyn RngCore) -> Vec<F> {
    let mut seen = hashbrown::HashSet::with_capacity(set.len());
    set.iter()
        .map(|_| loop {
            let a = F::random(rng);
            if seen.insert(a) {
                break a;
            }
        })
        .collect()
}

/// Leader's update phase: collects `f_{j,b}(1)` from every client and runs
/// the leader-side OLE legs with each client as sender. Returns the summed
/// refresh per bin, `z0[(b * (n-1) + i - 1) * beta + v]`, and per-sender legs
/// when recording.
#[allow(clippy::type_complexity)]
fn update_leader<F: Field, L: Link>(
    cfg: &SessionConfig,
    prep: &Prepared<F>,
    receiver: &dyn OleReceiver<F>,
    mb: &mut Mailbox<L>,
    rng: &mut dyn RngCore,
) -> Result<(Vec<F>, Vec<F>, Vec<Vec<F>>), ProtocolError> {
    mb.enter_phase(Phase::Update)?;
    let (n, bins, beta) = (cfg.n, prep.params.bins, prep.params.beta);
    let inputs: Vec<F> = prep.cuckoo.bins().iter().map(|e| e.value).collect();
    let mut request = Vec::new();
    receiver.request(&inputs, rng, &mut request)?;
    for j in 1..n as u8 {
        send_blob(mb, j, MessageKind::OleRequest, inputs.len(), &request)?;
    }
    let mut delta = vec![F::ZERO; bins];
    for j in 1..n as u8 {
        let values =
            decode_elements::<F>(&mb.recv_items(j, MessageKind::UpdateValues, 16, bins)?)?;
        add_assign_all(&mut delta, &values);
    }
    let per_bin = (n - 1) * beta;
    let mut z0 = vec![F::ZERO; bins * per_bin];
    // indexed by sender; the leader never sends to itself
    let mut legs = if cfg.record_view {
        vec![Vec::new()]
    } else {
        Vec::new()
    };
    for j in 1..n as u8 {
        let outputs =
            receiver.finish(&recv_blob(mb, j, MessageKind::OleResponse)?, bins * per_bin)?;
        add_assign_all(&mut z0, &outputs);
        if cfg.record_view {
            legs.push(outputs);
        }
    }
    Ok((delta, z0, legs))
}

/// Backend-defined byte strings travel as a count header followed by
/// `count` items of `item_len` bytes.
fn send_blob<L: Link>(
    mb: &mut Mailbox<L>,
    to: u8,
    kind: MessageKind,
    items: usize,
    body: &[u8],
) -> Result<(), ProtocolError> {
    let item_len = if items == 0 || !body.len().is_multiple_of(items) {
        1
    } else {
        (body.len() / items).max(1)
    };
    let count = body.len() / item_len;
    let mut header = Vec::with_capacity(8);
    header.extend_from_slice(&(item_len as u32).to_le_bytes());
    header.extend_from_slice(&(count as u32).to_le_bytes());
    mb.send(to, kind, 0, 0, header)?;
    mb.send_items(to, kind, item_len, body)?;
    Ok(())
}

/// Upper bound on a single blob, far above any honest OLE message.
const MAX_BLOB: usize = 1 << 31;

fn recv_blob<L: Link>(
    mb: &mut Mailbox<L>,
    from: u8,
    kind: MessageKind,
) -> Result<Vec<u8>, ProtocolError> {
    let header = mb.recv(from, kind)?;
    if header.payload.len() != 8 {
        return Err(ProtocolError::Malformed("blob header"));
    }
    let item_len = u32::from_le_bytes(header.payload[..4].try_into().unwrap()) as usize;
    let count = u32::from_le_bytes(header.payload[4..].try_into().unwrap()) as usize;
    if item_len == 0 || item_len.saturating_mul(count) > MAX_BLOB {
        return Err(ProtocolError::Malformed("blob header"));
    }
    Ok(mb.recv_items(from, kind, item_len, count)?)
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
        let (n, me) = (cfg.n, cfg.party as usize);
        let prep = client_setup(cfg, set, mb)?;
        let (bins, beta) = (prep.params.bins, prep.params.beta);

        // key material: this client receives from every other client and
        // serves the leader and every other client
        let receiver = backends.ole.receiver_setup(rng)?;
        let hello = receiver.hello();
        for j in 1..n {
            if j != me {
                mb.send(j as u8, MessageKind::OleHello, 0, 0, hello.clone())?;
            }
        }
        let mut senders: Vec<Option<Box<dyn OleSender<F>>>> = (0..n).map(|_| None).collect();
        for (p, slot) in senders.iter_mut().enumerate() {
            if p != me {
                let h = mb.recv(p as u8, MessageKind::OleHello)?;
                *slot = Some(backends.ole.sender_session(&h.payload)?);
            }
        }

        mb.enter_phase(Phase::Share)?;
        let obtained = receive_shares(cfg, &prep, backends.opprf, mb, rng)?;

        // update
        mb.enter_phase(Phase::Update)?;
        let polys = ZeroPolys::sample(bins, n, cfg.t, rng);
        mb.send_items(0, MessageKind::UpdateValues, 16, &polys.column(0))?;
        let simple_inputs: Vec<F> = prep.simple.entries().iter().map(|e| e.value).collect();
        let mut request = Vec::new();
        receiver.request(&simple_inputs, rng, &mut request)?;
        for j in 1..n {
            if j != me {
                send_blob(
                    mb,
                    j as u8,
                    MessageKind::OleRequest,
                    simple_inputs.len(),
                    &request,
                )?;
            }
        }
        let material = LegMaterial::new(rng, n - 1, beta);
        serve_ole(cfg, &prep, &polys, &material, &senders, mb, rng)?;

        // own leg, computed locally
        let mut z1 = vec![F::ZERO; bins * beta];
        let mut pairs = Vec::new();
        let mut own = Vec::with_capacity(bins * beta);
        for b in 0..bins {
            material.bin::<F>(b, &mut pairs);
            let refresh = polys.at(b, me);
            for v in 0..beta {
                let (r, a0) = pairs[(me - 1) * beta + v];
                let (_, client_leg) = legs(r, a0, refresh);
                own.push(client_leg.apply(simple_inputs[b * beta + v]));
            }
        }
        add_assign_all(&mut z1, &own);
        let mut recorded = vec![Vec::new()];
        for j in 1..n {
            if j == me {
                if cfg.record_view {
                    recorded.push(own.clone());
                }
                continue;
            }
            let outputs = receiver.finish(
                &recv_blob(mb, j as u8, MessageKind::OleResponse)?,
                bins * beta,
            )?;
            add_assign_all(&mut z1, &outputs);
            if cfg.record_view {
                recorded.push(outputs);
            }
        }

        // collect
        mb.enter_phase(Phase::Collect)?;
        let shift = match cfg.fault {
            Fault::IndexShift(s) => s as u64,
            Fault::None => 0,
        };
        let vi = instance_id(&prep.session, Purpose::CollectValue, cfg.party, 0);
        let ii = instance_id(&prep.session, Purpose::CollectIndex, cfg.party, 0);
        opprf_serve_bins(
            mb,
            backends.opprf,
            MessageKind::OpprfRequest,
            MessageKind::OpprfResponse,
            vi,
            0,
            &prep.params,
            rng,
            |b, pts, rng| {
                for (v, e) in prep.simple.bin(b).iter().enumerate() {
                    match e.origin {
                        Some(k) => pts.push(
                            e.value,
                            obtained[prep.cuckoo.bin_of(k as usize)] + z1[b * beta + v],
                        )?,
                        None if cfg.pad_simple => pts.push(e.value, F::random(rng))?,
                        None => {}
                    }
                }
                Ok(())
            },
        )?;
        opprf_serve_bins(
            mb,
            backends.opprf,
            MessageKind::IndexOpprfRequest,
            MessageKind::IndexOpprfResponse,
            ii,
            0,
            &prep.params,
            rng,
            |b, pts, rng| {
                for (v, e) in prep.simple.bin(b).iter().enumerate() {
                    match e.origin {
                        Some(_) => pts.push(e.value, F::from_u64(v as u64 + shift))?,
                        None if cfg.pad_simple => pts.push(e.value, F::random(rng))?,
                        None => {}
                    }
                }
                Ok(())
            },
        )?;
        finish_client(mb)?;

        let view = cfg.record_view.then(|| ClientView {
            obtained,
            cuckoo: prep.cuckoo.bins().iter().map(|e| e.value).collect(),
            simple: simple_inputs,
            zero_evals: (0..bins)
                .flat_map(|b| (0..n).map(move |j| (b, j)))
                .map(|(b, j)| polys.at(b, j))
                .collect(),
            z1,
            ole_legs: recorded,
            ..Default::default()
        });
        Ok(ClientOutput { view })
    })
}

/// Sender role of client `j`: answers the leader (every target, every slot
/// per bin) and then every other client (its own target, one pair per slot).
fn serve_ole<F: Field, L: Link>(
    cfg: &SessionConfig,
    prep: &Prepared<F>,
    polys: &ZeroPolys<F>,
    material: &LegMaterial,
    senders: &[Option<Box<dyn OleSender<F>>>],
    mb: &mut Mailbox<L>,
    rng: &mut dyn RngCore,
) -> Result<(), ProtocolError> {
    let (n, me) = (cfg.n, cfg.party as usize);
    let (bins, beta) = (prep.params.bins, prep.params.beta);
    let mut pairs = Vec::new();
    for p in 0..n {
        if p == me {
            continue;
        }
        let sender = senders[p].as_ref().expect("session for every peer");
        let request = recv_blob(mb, p as u8, MessageKind::OleRequest)?;
        let mut inputs_pairs = Vec::with_capacity(if p == 0 {
            bins * (n - 1) * beta
        } else {
            bins * beta
        });
        for b in 0..bins {
            material.bin::<F>(b, &mut pairs);
            if p == 0 {
                for i in 1..n {
                    let refresh = polys.at(b, i);
                    for v in 0..beta {
                        let (r, a0) = pairs[(i - 1) * beta + v];
                        inputs_pairs.push(legs(r, a0, refresh).0);
                    }
                }
            } else {
                let refresh = polys.at(b, p);
                for v in 0..beta {
                    let (r, a0) = pairs[(p - 1) * beta + v];
                    inputs_pairs.push(legs(r, a0, refresh).1);
                }
            }
        }
        let per_input = if p == 0 { (n - 1) * beta } else { 1 };
        let mut body = Vec::new();
        sender.respond(&request, per_input, &inputs_pairs, rng, &mut body)?;
        send_blob(
            mb,
            p as u8,
            MessageKind::OleResponse,
            inputs_pairs.len(),
            &body,
        )?;
    }
    Ok(())
}
