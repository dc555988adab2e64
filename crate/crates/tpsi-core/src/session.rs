//! Session configuration, the setup handshake, and the phases both protocols
//! share: hashing agreement, conditional share distribution, and the leader's
//! traced reconstruction.

use alloc::vec;
use alloc::vec::Vec;

use rand_core::RngCore;
use sha2::{Digest, Sha256};

use crate::channel::{ChannelError, Link, Mailbox};
use crate::field::Field;
use crate::frame::{MessageKind, Phase};
use crate::hashing::{
    BinParams, CuckooTable, DummyDomain, HashSeeds, HashingError, SimpleTable, MAX_HASH_ATTEMPTS,
};
use crate::ole::{Ole, OleError};
use crate::opprf::{Opprf, OpprfError, OpprfKind, ProgrammedPoints, ReceiverState, SenderKey};
use crate::oprf::OprfContext;
use crate::shamir::{ShamirError, SharingPolynomial, TracePlan};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Protocol {
    Et,
    St,
}

impl Protocol {
    pub fn tag(self) -> u8 {
        match self {
            Protocol::Et => 1,
            Protocol::St => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Protocol::Et => "et",
            Protocol::St => "st",
        }
    }
}

/// Single prime modulus, or the four-prime CRT ring.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Single,
    Crt,
}

impl Mode {
    pub fn tag(self) -> u8 {
        match self {
            Mode::Single => 1,
            Mode::Crt => 2,
        }
    }
}

/// Deliberate misbehaviour for negative tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Fault {
    #[default]
    None,
    /// A client programs `v + shift` into the index OPPRF instead of `v`.
    IndexShift(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum ConfigError {
    #[error("threshold must satisfy 1 < t <= n (got t = {t}, n = {n})")]
    BadThreshold { t: usize, n: usize },
    #[error("party count {0} is outside 3..=255")]
    BadPartyCount(usize),
    #[error("party index {party} is not below n = {n}")]
    BadPartyIndex { party: u8, n: usize },
    #[error("declared set size must be at least 1")]
    EmptyDomain,
    #[error("statistical parameter {0} is outside 1..=128")]
    BadLambda(u32),
    #[error("mode does not match the ring in use")]
    ModeMismatch,
    #[error("input set has {have} elements but the session declares at most {m}")]
    SetTooLarge { have: usize, m: usize },
    #[error("bin size bound {0} does not fit the index range of the field")]
    IndexRange(usize),
    #[error("invalid expansion factor")]
    BadExpansion,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SessionConfig {
    pub n: usize,
    pub t: usize,
    pub party: u8,
    /// Upper bound on every party's set size; bins are sized for it.
    pub m: usize,
    pub lambda: u32,
    pub protocol: Protocol,
    pub mode: Mode,
    pub expansion: (u32, u32),
    pub opprf: OpprfKind,
    pub ole_tag: u8,
    /// Pad Simple bins with dummies (leakage control; correctness holds
    /// without it).
    pub pad_simple: bool,
    /// Keep intermediate values for inspection in tests.
    pub record_view: bool,
    pub fault: Fault,
}

impl SessionConfig {
    pub fn new(protocol: Protocol, n: usize, t: usize, m: usize, party: u8) -> Self {
        SessionConfig {
            n,
            t,
            party,
            m,
            lambda: 40,
            protocol,
            mode: Mode::Single,
            expansion: crate::hashing::DEFAULT_EXPANSION,
            opprf: OpprfKind::Ideal,
            ole_tag: crate::ole::TAG_IDEAL,
            pad_simple: true,
            record_view: false,
            fault: Fault::None,
        }
    }

    pub fn for_party(&self, party: u8) -> Self {
        SessionConfig {
            party,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(3..=255).contains(&self.n) {
            return Err(ConfigError::BadPartyCount(self.n));
        }
        if self.t <= 1 || self.t > self.n {
            return Err(ConfigError::BadThreshold {
                t: self.t,
                n: self.n,
            });
        }
        if self.party as usize >= self.n {
            return Err(ConfigError::BadPartyIndex {
                party: self.party,
                n: self.n,
            });
        }
        if self.m == 0 {
            return Err(ConfigError::EmptyDomain);
        }
        if self.lambda == 0 || self.lambda > 128 {
            return Err(ConfigError::BadLambda(self.lambda));
        }
        if self.expansion.0 < self.expansion.1 || self.expansion.1 == 0 {
            return Err(ConfigError::BadExpansion);
        }
        Ok(())
    }

    pub fn params(&self) -> BinParams {
        BinParams::derive_with_expansion(self.m, self.lambda, self.expansion)
    }

    fn validate_for<F: Field>(&self) -> Result<(), ConfigError> {
        self.validate()?;
        let channels = match self.mode {
            Mode::Single => 1,
            Mode::Crt => 4,
        };
        if F::CHANNELS != channels {
            return Err(ConfigError::ModeMismatch);
        }
        if (self.n as u128 + 1) >= F::modulus() {
            return Err(ConfigError::BadPartyCount(self.n));
        }
        let beta = self.params().beta;
        if self.protocol == Protocol::St && beta as u128 >= F::modulus() {
            return Err(ConfigError::IndexRange(beta));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProtocolError {
    #[error("configuration: {0}")]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error("hashing failed in every attempt: {0}")]
    Hashing(#[from] HashingError),
    #[error("OPPRF: {0}")]
    Opprf(#[from] OpprfError),
    #[error("OLE: {0}")]
    Ole(#[from] OleError),
    #[error("secret sharing: {0}")]
    Shamir(#[from] ShamirError),
    #[error("session setup disagrees on {0}")]
    SetupMismatch(&'static str),
    #[error("malformed {0}")]
    Malformed(&'static str),
    #[error("input set contains a duplicate element")]
    DuplicateElement,
}

/// Backend selection for one party.
#[derive(Clone, Copy)]
pub struct Backends<'a, F: Field> {
    pub opprf: &'a dyn Opprf<F>,
    pub ole: &'a dyn Ole<F>,
}

impl<'a, F: Field> Backends<'a, F> {
    pub fn new(opprf: &'a dyn Opprf<F>, ole: &'a dyn Ole<F>) -> Self {
        Backends { opprf, ole }
    }
}

/// Everything fixed by the setup handshake.
#[derive(Debug, Clone)]
pub struct Prepared<F> {
    pub session: [u8; 16],
    pub params: BinParams,
    pub seed_base: [u8; 32],
    pub attempt: u8,
    pub cuckoo: CuckooTable<F>,
    pub simple: SimpleTable<F>,
}

const SETUP_VERSION: u8 = 1;
const SETUP_LEN: usize = 1 + 4 + 2 + 4 + 4 + 8 + 16 + 1 + 32;

fn encode_setup<F: Field>(cfg: &SessionConfig, seed_base: &[u8; 32]) -> Vec<u8> {
    let mut p = Vec::with_capacity(SETUP_LEN);
    p.push(SETUP_VERSION);
    p.extend_from_slice(&[
        cfg.protocol.tag(),
        cfg.mode.tag(),
        cfg.opprf.tag(),
        cfg.ole_tag,
    ]);
    p.extend_from_slice(&[cfg.n as u8, cfg.t as u8]);
    p.extend_from_slice(&(cfg.m as u32).to_le_bytes());
    p.extend_from_slice(&cfg.lambda.to_le_bytes());
    p.extend_from_slice(&cfg.expansion.0.to_le_bytes());
    p.extend_from_slice(&cfg.expansion.1.to_le_bytes());
    p.extend_from_slice(&F::modulus().to_le_bytes());
    p.push(cfg.pad_simple as u8);
    p.extend_from_slice(seed_base);
    p
}

fn check_setup<F: Field>(cfg: &SessionConfig, payload: &[u8]) -> Result<[u8; 32], ProtocolError> {
    if payload.len() != SETUP_LEN {
        return Err(ProtocolError::Malformed("session setup"));
    }
    let expected = encode_setup::<F>(cfg, &[0; 32]);
    let fields: [(&'static str, core::ops::Range<usize>); 10] = [
        ("version", 0..1),
        ("protocol", 1..2),
        ("mode", 2..3),
        ("OPPRF backend", 3..4),
        ("OLE backend", 4..5),
        ("party count and threshold", 5..7),
        ("set size", 7..11),
        ("statistical parameter", 11..15),
        ("bin expansion", 15..23),
        ("modulus and padding", 23..40),
    ];
    for (name, range) in fields {
        if payload[range.clone()] != expected[range] {
            return Err(ProtocolError::SetupMismatch(name));
        }
    }
    Ok(payload[40..72].try_into().unwrap())
}

fn build_tables<F: Field>(
    set: &[F],
    seeds: &HashSeeds,
    params: &BinParams,
    domain: &DummyDomain,
    pad: bool,
) -> Result<(CuckooTable<F>, SimpleTable<F>), HashingError> {
    let cuckoo = CuckooTable::build(set, seeds, params, domain)?;
    let simple = SimpleTable::build_with_padding(set, seeds, params, domain, pad)?;
    Ok((cuckoo, simple))
}

/// A hashing attempt number with the tables it produced.
type Attempt<F> = (u8, CuckooTable<F>, SimpleTable<F>);

/// First attempt `>= from` at which this party's tables build.
fn first_success<F: Field>(
    set: &[F],
    base: &[u8; 32],
    from: u8,
    params: &BinParams,
    domain: &DummyDomain,
    pad: bool,
) -> Result<Option<Attempt<F>>, ProtocolError> {
    for attempt in from..MAX_HASH_ATTEMPTS {
        match build_tables(set, &HashSeeds::derive(base, attempt), params, domain, pad) {
            Ok((c, s)) => return Ok(Some((attempt, c, s))),
            Err(HashingError::DuplicateElement) => return Err(ProtocolError::DuplicateElement),
            Err(HashingError::TooManyElements { .. }) => {
                return Err(ConfigError::SetTooLarge {
                    have: set.len(),
                    m: params.bins,
                }
                .into())
            }
            Err(_) => continue,
        }
    }
    Ok(None)
}

const NO_ATTEMPT: u8 = u8::MAX;

fn check_input<F: Field>(cfg: &SessionConfig, set: &[F]) -> Result<(), ProtocolError> {
    cfg.validate_for::<F>()?;
    if set.len() > cfg.m {
        return Err(ConfigError::SetTooLarge {
            have: set.len(),
            m: cfg.m,
        }
        .into());
    }
    Ok(())
}

/// Leader side of the handshake: announce parameters, then agree with every
/// client on the first hashing attempt that works for all of them.
pub fn leader_setup<F: Field, L: Link>(
    cfg: &SessionConfig,
    set: &[F],
    mb: &mut Mailbox<L>,
    rng: &mut dyn RngCore,
) -> Result<Prepared<F>, ProtocolError> {
    check_input(cfg, set)?;
    let mut session = [0u8; 16];
    rng.fill_bytes(&mut session);
    let mut seed_base = [0u8; 32];
    rng.fill_bytes(&mut seed_base);
    mb.set_session(session);
    mb.enter_phase(Phase::Setup)?;
    let setup = encode_setup::<F>(cfg, &seed_base);
    for c in 1..cfg.n as u8 {
        mb.send(c, MessageKind::SessionSetup, 0, 0, setup.clone())?;
    }
    let params = cfg.params();
    let domain = DummyDomain { session, party: 0 };
    let mut floor = 0u8;
    loop {
        let mine = first_success(set, &seed_base, floor, &params, &domain, cfg.pad_simple)?;
        let mut reported = vec![mine.as_ref().map_or(NO_ATTEMPT, |m| m.0)];
        for c in 1..cfg.n as u8 {
            let f = mb.recv(c, MessageKind::HashStatus)?;
            reported.push(
                *f.payload
                    .first()
                    .ok_or(ProtocolError::Malformed("hash status"))?,
            );
        }
        let proposal = *reported.iter().max().unwrap();
        let done = reported.iter().all(|&a| a == proposal);
        for c in 1..cfg.n as u8 {
            mb.send(c, MessageKind::HashChoice, 0, 0, vec![proposal, done as u8])?;
        }
        if proposal == NO_ATTEMPT {
            return Err(HashingError::InsertionFailure.into());
        }
        if done {
            let (attempt, cuckoo, simple) = mine.expect("agreed attempt is this party's own");
            return Ok(Prepared {
                session,
                params,
                seed_base,
                attempt,
                cuckoo,
                simple,
            });
        }
        floor = proposal;
    }
}

pub fn client_setup<F: Field, L: Link>(
    cfg: &SessionConfig,
    set: &[F],
    mb: &mut Mailbox<L>,
) -> Result<Prepared<F>, ProtocolError> {
    check_input(cfg, set)?;
    mb.enter_phase(Phase::Setup)?;
    let frame = mb.recv(0, MessageKind::SessionSetup)?;
    let session = frame.session;
    mb.set_session(session);
    let seed_base = match check_setup::<F>(cfg, &frame.payload) {
        Ok(base) => base,
        Err(e) => {
            mb.abort_all();
            return Err(e);
        }
    };
    let params = cfg.params();
    let domain = DummyDomain {
        session,
        party: cfg.party,
    };
    let mut floor = 0u8;
    loop {
        let mine = first_success(set, &seed_base, floor, &params, &domain, cfg.pad_simple)?;
        mb.send(
            0,
            MessageKind::HashStatus,
            0,
            0,
            vec![mine.as_ref().map_or(NO_ATTEMPT, |m| m.0)],
        )?;
        let choice = mb.recv(0, MessageKind::HashChoice)?;
        let [attempt, done] = choice.payload[..] else {
            return Err(ProtocolError::Malformed("hash choice"));
        };
        if attempt == NO_ATTEMPT {
            return Err(HashingError::InsertionFailure.into());
        }
        if done == 1 {
            return match mine {
                Some((a, cuckoo, simple)) if a == attempt => Ok(Prepared {
                    session,
                    params,
                    seed_base,
                    attempt,
                    cuckoo,
                    simple,
                }),
                _ => Err(ProtocolError::Malformed("hash choice")),
            };
        }
        floor = attempt;
    }
}

/// What an OPPRF instance is used for; bound into its instance id.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum Purpose {
    Share = 1,
    CollectValue = 2,
    CollectIndex = 3,
}

pub fn instance_id(session: &[u8; 16], purpose: Purpose, sender: u8, receiver: u8) -> u64 {
    let d = Sha256::new()
        .chain_update(b"tpsi/opprf-instance")
        .chain_update(session)
        .chain_update([purpose as u8, sender, receiver])
        .finalize();
    u64::from_le_bytes(d[..8].try_into().unwrap())
}

/// Receiver half: one query per Cuckoo bin, sent to `sender`.
pub fn opprf_query_bins<F: Field, L: Link>(
    mb: &mut Mailbox<L>,
    backend: &dyn Opprf<F>,
    kind: MessageKind,
    instance: u64,
    sender: u8,
    cuckoo: &CuckooTable<F>,
    rng: &mut dyn RngCore,
) -> Result<Vec<ReceiverState<F>>, ProtocolError> {
    let mut out = Vec::with_capacity(cuckoo.len() * backend.query_len());
    let states = cuckoo
        .bins()
        .iter()
        .enumerate()
        .map(|(b, e)| {
            backend.receiver_query(
                &OprfContext {
                    instance,
                    bin: b as u32,
                },
                e.value,
                rng,
                &mut out,
            )
        })
        .collect();
    mb.send_items(sender, kind, backend.query_len(), &out)?;
    Ok(states)
}

pub fn opprf_finish_bins<F: Field, L: Link>(
    mb: &mut Mailbox<L>,
    backend: &dyn Opprf<F>,
    kind: MessageKind,
    instance: u64,
    sender: u8,
    capacity: usize,
    states: &[ReceiverState<F>],
) -> Result<Vec<F>, ProtocolError> {
    let len = backend.response_len(capacity);
    let data = mb.recv_items(sender, kind, len, states.len())?;
    states
        .iter()
        .zip(data.chunks_exact(len))
        .enumerate()
        .map(|(b, (st, resp))| {
            Ok(backend.receiver_finish(
                &OprfContext {
                    instance,
                    bin: b as u32,
                },
                st,
                resp,
            )?)
        })
        .collect()
}

/// Sender half: receives one query per bin from `receiver` and programs each
/// bin with the points produced by `program(bin, points)`.
#[allow(clippy::too_many_arguments)]
pub fn opprf_serve_bins<F: Field, L: Link>(
    mb: &mut Mailbox<L>,
    backend: &dyn Opprf<F>,
    request_kind: MessageKind,
    response_kind: MessageKind,
    instance: u64,
    receiver: u8,
    params: &BinParams,
    rng: &mut dyn RngCore,
    mut program: impl FnMut(usize, &mut ProgrammedPoints<F>, &mut dyn RngCore) -> Result<(), OpprfError>,
) -> Result<(), ProtocolError> {
    let qlen = backend.query_len();
    let queries = mb.recv_items(receiver, request_kind, qlen, params.bins)?;
    let key = SenderKey::random(rng);
    let mut points = ProgrammedPoints::with_capacity(params.beta);
    let mut out = Vec::with_capacity(params.bins * backend.response_len(params.beta));
    for (b, q) in queries.chunks_exact(qlen).enumerate() {
        points.clear();
        program(b, &mut points, rng)?;
        backend.sender_respond(
            &key,
            &OprfContext {
                instance,
                bin: b as u32,
            },
            q,
            &points,
            rng,
            &mut out,
        )?;
    }
    mb.send_items(
        receiver,
        response_kind,
        backend.response_len(params.beta),
        &out,
    )?;
    Ok(())
}

/// Leader's conditional share distribution: every secret is Shamir-shared,
/// and client `i` can obtain share `i` of a secret only by querying with the
/// element it stands for.
pub fn distribute_shares<F: Field, L: Link>(
    cfg: &SessionConfig,
    prep: &Prepared<F>,
    set: &[F],
    secrets: &[F],
    opprf: &dyn Opprf<F>,
    mb: &mut Mailbox<L>,
    rng: &mut dyn RngCore,
) -> Result<Vec<F>, ProtocolError> {
    let n = cfg.n;
    let mut shares = Vec::with_capacity(set.len() * n);
    for &s in secrets {
        let poly = SharingPolynomial::random(s, cfg.t, rng);
        shares.extend((0..n).map(|i| poly.eval_party(i)));
    }
    for i in 1..n as u8 {
        let instance = instance_id(&prep.session, Purpose::Share, 0, i);
        opprf_serve_bins(
            mb,
            opprf,
            MessageKind::OpprfRequest,
            MessageKind::OpprfResponse,
            instance,
            i,
            &prep.params,
            rng,
            |b, pts, rng| {
                for e in prep.simple.bin(b) {
                    match e.origin {
                        Some(k) => pts.push(e.value, shares[k as usize * n + i as usize])?,
                        None if cfg.pad_simple => pts.push(e.value, F::random(rng))?,
                        None => {}
                    }
                }
                Ok(())
            },
        )?;
    }
    Ok(shares)
}

/// Client side of share distribution: the value obtained in each Cuckoo bin.
pub fn receive_shares<F: Field, L: Link>(
    cfg: &SessionConfig,
    prep: &Prepared<F>,
    opprf: &dyn Opprf<F>,
    mb: &mut Mailbox<L>,
    rng: &mut dyn RngCore,
) -> Result<Vec<F>, ProtocolError> {
    let instance = instance_id(&prep.session, Purpose::Share, 0, cfg.party);
    let states = opprf_query_bins(
        mb,
        opprf,
        MessageKind::OpprfRequest,
        instance,
        0,
        &prep.cuckoo,
        rng,
    )?;
    opprf_finish_bins(
        mb,
        opprf,
        MessageKind::OpprfResponse,
        instance,
        0,
        prep.params.beta,
        &states,
    )
}

/// Per-bin zero polynomials of one client, evaluated at every party.
pub struct ZeroPolys<F> {
    n: usize,
    evals: Vec<F>,
}

impl<F: Field> ZeroPolys<F> {
    pub fn sample(bins: usize, n: usize, t: usize, rng: &mut dyn RngCore) -> Self {
        let mut evals = Vec::with_capacity(bins * n);
        for _ in 0..bins {
            let poly = SharingPolynomial::<F>::zero(t, rng);
            evals.extend((0..n).map(|j| poly.eval_party(j)));
        }
        ZeroPolys { n, evals }
    }

    /// `f_b(party + 1)`.
    pub fn at(&self, bin: usize, party: usize) -> F {
        self.evals[bin * self.n + party]
    }

    pub fn column(&self, party: usize) -> Vec<u8> {
        let bins = self.evals.len() / self.n;
        let mut out = Vec::with_capacity(16 * bins);
        for b in 0..bins {
            out.extend_from_slice(&self.at(b, party).to_bytes());
        }
        out
    }
}

pub fn decode_elements<F: Field>(bytes: &[u8]) -> Result<Vec<F>, ProtocolError> {
    bytes
        .chunks_exact(16)
        .map(|c| F::from_slice(c).map_err(|_| ProtocolError::Malformed("field element")))
        .collect()
}

pub fn encode_elements<F: Field>(values: &[F]) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 * values.len());
    for v in values {
        out.extend_from_slice(&v.to_bytes());
    }
    out
}

pub fn add_assign_all<F: Field>(acc: &mut [F], values: &[F]) {
    for (a, v) in acc.iter_mut().zip(values) {
        *a += *v;
    }
}

/// One reported element.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct IntersectionEntry<F> {
    pub element: F,
    pub count: usize,
    /// Party indices, ascending; always contains 0.
    pub holders: Vec<usize>,
}

/// Entries sorted by element.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct IntersectionResult<F> {
    pub entries: Vec<IntersectionEntry<F>>,
}

impl<F: Ord> IntersectionResult<F> {
    pub fn from_entries(mut entries: Vec<IntersectionEntry<F>>) -> Self {
        for e in &mut entries {
            e.holders.sort_unstable();
        }
        entries.sort_by(|a, b| a.element.cmp(&b.element));
        IntersectionResult { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn map_elements<G: Ord>(&self, f: impl Fn(&F) -> G) -> IntersectionResult<G> {
        IntersectionResult::from_entries(
            self.entries
                .iter()
                .map(|e| IntersectionEntry {
                    element: f(&e.element),
                    count: e.count,
                    holders: e.holders.clone(),
                })
                .collect(),
        )
    }
}

/// Final step at the leader: for each element, trace the collected shares
/// against the secret it was shared under.
pub fn reconstruct_all<F: Field>(
    cfg: &SessionConfig,
    set: &[F],
    secrets: &[F],
    collected: &[F],
) -> Result<(IntersectionResult<F>, usize), ProtocolError> {
    let plan = TracePlan::<F>::new(cfg.n, cfg.t)?;
    let mut entries = Vec::new();
    let mut ambiguous = 0;
    for (k, &e) in set.iter().enumerate() {
        let r = plan.trace(&collected[k * cfg.n..(k + 1) * cfg.n], secrets[k]);
        if r.ambiguous {
            log::warn!("element {k}: a second, inconsistent subset also reconstructed the secret");
            ambiguous += 1;
        }
        if r.secret_matched {
            entries.push(IntersectionEntry {
                element: e,
                count: r.holders.len(),
                holders: r.holders,
            });
        }
    }
    log::debug!(
        "{} of {} leader elements reported",
        entries.len(),
        set.len()
    );
    Ok((IntersectionResult::from_entries(entries), ambiguous))
}

/// Closes the session: the leader tells every client it is done.
pub fn finish_leader<L: Link>(n: usize, mb: &mut Mailbox<L>) -> Result<(), ProtocolError> {
    mb.enter_phase(Phase::Done)?;
    for c in 1..n as u8 {
        mb.send(c, MessageKind::Finished, 0, 0, Vec::new())?;
    }
    Ok(())
}

pub fn finish_client<L: Link>(mb: &mut Mailbox<L>) -> Result<(), ProtocolError> {
    mb.enter_phase(Phase::Done)?;
    mb.recv(0, MessageKind::Finished)?;
    Ok(())
}

/// Runs `body`, and on failure tells the other parties before returning the
/// error.
pub fn with_abort<L: Link, T>(
    mb: &mut Mailbox<L>,
    body: impl FnOnce(&mut Mailbox<L>) -> Result<T, ProtocolError>,
) -> Result<T, ProtocolError> {
    let r = body(mb);
    if let Err(e) = &r {
        if !matches!(e, ProtocolError::Channel(ChannelError::PeerAborted(_))) {
            mb.abort_all();
        }
    }
    r
}

/// The leader's intermediate values, kept when `record_view` is set.
#[derive(Debug, Clone, Default)]
pub struct LeaderView<F> {
    pub session: [u8; 16],
    pub params: Option<BinParams>,
    /// The value each element was shared under (the element itself, or its
    /// alias).
    pub secrets: Vec<F>,
    /// Cuckoo bin of each element.
    pub bins: Vec<usize>,
    /// `shares[k * n + i]`: original share `i` of secret `k`.
    pub shares: Vec<F>,
    /// `collected[k * n + i]`: value finally attributed to party `i`.
    pub collected: Vec<F>,
    /// Raw value-OPPRF outputs, `[k * n + i]` (zero for `i = 0`).
    pub opprf_outputs: Vec<F>,
    /// Index-OPPRF outputs, `[k * n + i]` (ST only).
    pub index_outputs: Vec<F>,
    /// OLE outputs per sender: `ole_legs[j][(b * (n-1) + (i-1)) * beta + v]` (ST only).
    pub ole_legs: Vec<Vec<F>>,
    /// Summed update values received per bin (`f_b(1)` summed over clients).
    pub delta: Vec<F>,
}

#[derive(Debug, Clone, Default)]
pub struct ClientView<F> {
    /// Value obtained in each Cuckoo bin during share distribution.
    pub obtained: Vec<F>,
    /// Cuckoo bin contents (real or dummy).
    pub cuckoo: Vec<F>,
    /// Simple bin contents, `[b * beta + v]`.
    pub simple: Vec<F>,
    /// This client's zero polynomials, `[b * n + j]` = `f_b(j + 1)`.
    pub zero_evals: Vec<F>,
    /// ET: per-bin sum of received update values (own included).
    pub delta: Vec<F>,
    /// ST: `z1[b * beta + v]`.
    pub z1: Vec<F>,
    /// ST: OLE outputs per sender, `[j][b * beta + v]` (own leg at `j = party`).
    pub ole_legs: Vec<Vec<F>>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Crt4, Fp};

    #[test]
    fn config_validation() {
        let ok = SessionConfig::new(Protocol::Et, 3, 2, 8, 0);
        assert!(ok.validate().is_ok());
        assert_eq!(
            SessionConfig { t: 4, ..ok.clone() }.validate(),
            Err(ConfigError::BadThreshold { t: 4, n: 3 })
        );
        assert_eq!(
            SessionConfig { t: 1, ..ok.clone() }.validate(),
            Err(ConfigError::BadThreshold { t: 1, n: 3 })
        );
        assert_eq!(
            SessionConfig {
                n: 2,
                t: 2,
                ..ok.clone()
            }
            .validate(),
            Err(ConfigError::BadPartyCount(2))
        );
        assert_eq!(
            SessionConfig {
                party: 3,
                ..ok.clone()
            }
            .validate(),
            Err(ConfigError::BadPartyIndex { party: 3, n: 3 })
        );
        assert_eq!(ok.validate_for::<Crt4>(), Err(ConfigError::ModeMismatch));
        assert!(ok.validate_for::<Fp>().is_ok());
    }

    #[test]
    fn setup_mismatch_is_named() {
        let a = SessionConfig::new(Protocol::Et, 4, 2, 8, 0);
        let payload = encode_setup::<Fp>(&a, &[5; 32]);
        assert_eq!(
            check_setup::<Fp>(&a.for_party(1), &payload).unwrap(),
            [5; 32]
        );
        let b = SessionConfig { t: 3, ..a.clone() };
        assert_eq!(
            check_setup::<Fp>(&b, &payload),
            Err(ProtocolError::SetupMismatch("party count and threshold"))
        );
        let c = SessionConfig {
            protocol: Protocol::St,
            ..a
        };
        assert_eq!(
            check_setup::<Fp>(&c, &payload),
            Err(ProtocolError::SetupMismatch("protocol"))
        );
    }
}
