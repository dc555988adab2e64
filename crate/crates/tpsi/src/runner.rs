//! Running sessions: all parties in-process over the simulated network, or
//! one party over TCP; plus the oracle comparison.

use std::collections::HashMap;
use std::thread;
use std::time::Duration;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;
use tpsi_core::channel::{ChannelError, Link, LinkError};
use tpsi_core::et::{ClientOutput, LeaderOutput};
use tpsi_core::field::{hash_to_field, Crt4, Field, Fp};
use tpsi_core::ole::{IdealOle, Ole};
use tpsi_core::oracle::{ideal_intersection, OracleError, PlainInstance};
use tpsi_core::session::{Backends, Mode, Protocol, ProtocolError, SessionConfig};
use tpsi_core::{et, st};

use crate::config::{BackendChoice, RunConfig, RunConfigError};
use crate::cputime::{PhaseTimes, TimedLink};
use crate::he_ole::PaillierOle;
use crate::output::{normalize, PlainEntry};
use crate::setfile::SetFileError;
use crate::sim::sim_mesh;
use crate::tcp::{connect_mesh, MeshError};
use crate::transcript::{RecordingLink, Transcript, TranscriptHandle};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] RunConfigError),
    #[error(transparent)]
    SetFile(#[from] SetFileError),
    #[error("party {party}: {source}")]
    Protocol { party: u8, source: ProtocolError },
    #[error("party {party}: element {element:#034x} is not below the field modulus")]
    ElementOutOfRange { party: u8, element: u128 },
    #[error("party {0}: two elements hash to the same ring value")]
    PrehashCollision(u8),
    #[error("expected {expected} input sets, got {got}")]
    SetCount { expected: usize, got: usize },
    #[error("oracle: {0}")]
    Oracle(#[from] OracleError),
    #[error("network: {0}")]
    Mesh(#[from] MeshError),
    #[error("no endpoints configured for a networked run")]
    NoEndpoints,
    #[error("party thread panicked")]
    Panicked,
}

/// Everything one in-process session produced.
pub struct SimOutcome<F> {
    pub leader: LeaderOutput<F>,
    /// Client `i` at index `i - 1`.
    pub clients: Vec<ClientOutput<F>>,
    /// Per party; empty unless recording was requested.
    pub transcripts: Vec<Transcript>,
    pub leader_times: Option<PhaseTimes>,
}

#[derive(Debug, Clone, Copy)]
pub struct SimOptions {
    /// Party `i` draws from ChaCha20 seeded with `seed`, stream `i`.
    pub seed: u64,
    pub timeout: Duration,
    pub record: bool,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            seed: 0,
            timeout: Duration::from_secs(60),
            record: false,
        }
    }
}

pub fn party_rng(seed: u64, party: u8) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(party as u64);
    rng
}

pub fn ole_backend<F: Field>(choice: BackendChoice, paillier_bits: u64) -> Box<dyn Ole<F>> {
    match choice {
        BackendChoice::Ideal => Box::new(IdealOle),
        BackendChoice::Real => Box::new(PaillierOle {
            modulus_bits: paillier_bits,
        }),
    }
}

enum PartyOutput<F> {
    Leader(LeaderOutput<F>, Option<PhaseTimes>),
    Client(ClientOutput<F>),
}

/// One party's protocol run over `link`.
fn run_party_on<F: Field, L: Link>(
    cfg: &SessionConfig,
    set: &[F],
    ole: &dyn Ole<F>,
    link: L,
    mut rng: ChaCha20Rng,
) -> Result<PartyOutput<F>, ProtocolError> {
    let backends = Backends::new(cfg.opprf.backend::<F>(), ole);
    if cfg.party == 0 {
        let mut timed = TimedLink::new(link);
        let out = match cfg.protocol {
            Protocol::Et => et::run_leader(cfg, set, backends, &mut timed, &mut rng)?,
            Protocol::St => st::run_leader(cfg, set, backends, &mut timed, &mut rng)?,
        };
        Ok(PartyOutput::Leader(out, timed.marks().times()))
    } else {
        let out = match cfg.protocol {
            Protocol::Et => et::run_client(cfg, set, backends, link, &mut rng)?,
            Protocol::St => st::run_client(cfg, set, backends, link, &mut rng)?,
        };
        Ok(PartyOutput::Client(out))
    }
}

/// Errors that merely echo another party's failure rank below the cause.
fn is_secondary(e: &ProtocolError) -> bool {
    matches!(
        e,
        ProtocolError::Channel(ChannelError::PeerAborted(_))
            | ProtocolError::Channel(ChannelError::Link(
                LinkError::Timeout | LinkError::PeerDisconnect(_)
            ))
    )
}

/// Runs all `n` parties of `cfg` concurrently over the simulated network.
/// `cfg.party` is ignored; `sets[i]` is party `i`'s input.
pub fn simulate_parties<F: Field>(
    cfg: &SessionConfig,
    sets: &[Vec<F>],
    ole: &dyn Ole<F>,
    opts: SimOptions,
) -> Result<SimOutcome<F>, RunError> {
    if sets.len() != cfg.n {
        return Err(RunError::SetCount {
            expected: cfg.n,
            got: sets.len(),
        });
    }
    let mut handles: Vec<TranscriptHandle> = Vec::new();
    let results: Vec<Result<PartyOutput<F>, ProtocolError>> = thread::scope(|s| {
        let mut joins = Vec::with_capacity(cfg.n);
        for (i, link) in sim_mesh(cfg.n, opts.timeout).into_iter().enumerate() {
            let pc = cfg.for_party(i as u8);
            let set = &sets[i];
            let link: Box<dyn Link> = if opts.record {
                let (rec, h) = RecordingLink::new(link);
                handles.push(h);
                Box::new(rec)
            } else {
                Box::new(link)
            };
            joins.push(
                s.spawn(move || run_party_on(&pc, set, ole, link, party_rng(opts.seed, i as u8))),
            );
        }
        joins
            .into_iter()
            .map(|j| {
                j.join()
                    .unwrap_or(Err(ProtocolError::Malformed("party thread panicked")))
            })
            .collect()
    });

    let mut primary = None;
    let mut secondary = None;
    for (i, r) in results.iter().enumerate() {
        if let Err(e) = r {
            let slot = if is_secondary(e) {
                &mut secondary
            } else {
                &mut primary
            };
            if slot.is_none() {
                *slot = Some(RunError::Protocol {
                    party: i as u8,
                    source: e.clone(),
                });
            }
        }
    }
    if let Some(e) = primary.or(secondary) {
        return Err(e);
    }
    let mut leader = None;
    let mut clients = Vec::with_capacity(cfg.n - 1);
    for r in results {
        match r {
            Ok(PartyOutput::Leader(out, times)) => leader = Some((out, times)),
            Ok(PartyOutput::Client(out)) => clients.push(out),
            Err(_) => unreachable!("errors handled above"),
        }
    }
    let (leader, leader_times) = leader.ok_or(RunError::Panicked)?;
    let transcripts = handles.iter().map(TranscriptHandle::snapshot).collect();
    Ok(SimOutcome {
        leader,
        clients,
        transcripts,
        leader_times,
    })
}

/// A session's result over the raw element domain.
pub struct PlainRun {
    pub entries: Vec<PlainEntry>,
    pub ambiguous: usize,
    pub transcripts: Vec<Transcript>,
    pub leader_times: Option<PhaseTimes>,
}

fn to_single(party: u8, set: &[u128]) -> Result<Vec<Fp>, RunError> {
    set.iter()
        .map(|&e| Fp::from_u128(e).map_err(|_| RunError::ElementOutOfRange { party, element: e }))
        .collect()
}

/// CRT mode: elements are hashed into the ring; the leader keeps the
/// preimages to report original elements.
fn to_crt(party: u8, set: &[u128]) -> Result<(Vec<Crt4>, HashMap<Crt4, u128>), RunError> {
    let mut back = HashMap::with_capacity(set.len());
    let mut out = Vec::with_capacity(set.len());
    for &e in set {
        let h = hash_to_field::<Crt4>(&e.to_le_bytes());
        if back.insert(h, e).is_some() {
            return Err(RunError::PrehashCollision(party));
        }
        out.push(h);
    }
    Ok((out, back))
}

fn plain_entries<F: Field>(out: &LeaderOutput<F>, back: impl Fn(&F) -> u128) -> Vec<PlainEntry> {
    normalize(
        out.result
            .entries
            .iter()
            .map(|e| PlainEntry {
                element: back(&e.element),
                count: e.count,
                holders: e.holders.clone(),
            })
            .collect(),
    )
}

/// Runs every party of `cfg` in-process on `sets`.
pub fn simulate(cfg: &RunConfig, sets: &[Vec<u128>], record: bool) -> Result<PlainRun, RunError> {
    cfg.validate()?;
    let session = cfg.session(0);
    let opts = SimOptions {
        seed: cfg.seed.unwrap_or_else(rand::random),
        timeout: cfg.timeout(),
        record,
    };
    match session.mode {
        Mode::Single => {
            let field_sets = sets
                .iter()
                .enumerate()
                .map(|(i, s)| to_single(i as u8, s))
                .collect::<Result<Vec<_>, _>>()?;
            let ole = ole_backend::<Fp>(cfg.ole, cfg.paillier_bits);
            let o = simulate_parties(&session, &field_sets, &*ole, opts)?;
            Ok(PlainRun {
                entries: plain_entries(&o.leader, Fp::value),
                ambiguous: o.leader.ambiguous,
                transcripts: o.transcripts,
                leader_times: o.leader_times,
            })
        }
        Mode::Crt => {
            let mut field_sets = Vec::with_capacity(sets.len());
            let mut leader_map = HashMap::new();
            for (i, s) in sets.iter().enumerate() {
                let (f, back) = to_crt(i as u8, s)?;
                if i == 0 {
                    leader_map = back;
                }
                field_sets.push(f);
            }
            let ole = ole_backend::<Crt4>(cfg.ole, cfg.paillier_bits);
            let o = simulate_parties(&session, &field_sets, &*ole, opts)?;
            Ok(PlainRun {
                entries: plain_entries(&o.leader, |e| leader_map[e]),
                ambiguous: o.leader.ambiguous,
                transcripts: o.transcripts,
                leader_times: o.leader_times,
            })
        }
    }
}

/// Reference answer for `sets` at threshold `t`.
pub fn oracle(sets: &[Vec<u128>], t: usize) -> Result<Vec<PlainEntry>, RunError> {
    let r = ideal_intersection(&PlainInstance {
        sets: sets.to_vec(),
        t,
    })?;
    Ok(normalize(
        r.entries
            .into_iter()
            .map(|e| PlainEntry {
                element: e.element,
                count: e.count,
                holders: e.holders,
            })
            .collect(),
    ))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyReport {
    pub protocol: Vec<PlainEntry>,
    pub oracle: Vec<PlainEntry>,
}

impl VerifyReport {
    pub fn matches(&self) -> bool {
        self.protocol == self.oracle
    }

    /// Human-readable differences, one line each.
    pub fn differences(&self) -> Vec<String> {
        let mut out = Vec::new();
        for e in &self.oracle {
            if !self.protocol.contains(e) {
                out.push(format!(
                    "missing {:#034x} count {} holders {:?}",
                    e.element, e.count, e.holders
                ));
            }
        }
        for e in &self.protocol {
            if !self.oracle.contains(e) {
                out.push(format!(
                    "spurious {:#034x} count {} holders {:?}",
                    e.element, e.count, e.holders
                ));
            }
        }
        out
    }
}

pub fn verify(cfg: &RunConfig, sets: &[Vec<u128>]) -> Result<VerifyReport, RunError> {
    let run = simulate(cfg, sets, false)?;
    Ok(VerifyReport {
        protocol: run.entries,
        oracle: oracle(sets, cfg.t)?,
    })
}

/// Executes party `party` over TCP. Returns the result at the leader.
pub fn run_networked(
    cfg: &RunConfig,
    party: u8,
    set: &[u128],
) -> Result<Option<Vec<PlainEntry>>, RunError> {
    cfg.validate()?;
    let session = cfg.session(party);
    session.validate().map_err(RunConfigError::from)?;
    if cfg.endpoints.is_empty() {
        return Err(RunError::NoEndpoints);
    }
    let link = connect_mesh(&cfg.endpoints, party, cfg.timeout())?;
    // a fixed seed is for reproducible experiments only
    let rng = match cfg.seed {
        Some(seed) => party_rng(seed, party),
        None => ChaCha20Rng::from_entropy(),
    };
    match session.mode {
        Mode::Single => {
            let set = to_single(party, set)?;
            let ole = ole_backend::<Fp>(cfg.ole, cfg.paillier_bits);
            match run_party_on(&session, &set, &*ole, link, rng)
                .map_err(|source| RunError::Protocol { party, source })?
            {
                PartyOutput::Leader(out, _) => Ok(Some(plain_entries(&out, Fp::value))),
                PartyOutput::Client(_) => Ok(None),
            }
        }
        Mode::Crt => {
            let (set, back) = to_crt(party, set)?;
            let ole = ole_backend::<Crt4>(cfg.ole, cfg.paillier_bits);
            match run_party_on(&session, &set, &*ole, link, rng)
                .map_err(|source| RunError::Protocol { party, source })?
            {
                PartyOutput::Leader(out, _) => Ok(Some(plain_entries(&out, |e| back[e]))),
                PartyOutput::Client(_) => Ok(None),
            }
        }
    }
}
