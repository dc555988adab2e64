//! Oblivious programmable PRF: the sender programs `(x, y)` pairs, the
//! receiver learns `y` when its query equals some programmed `x` and an
//! unrelated pseudorandom value otherwise.
//!
//! One instance answers exactly one receiver query. Two backends implement
//! [`Opprf`]:
//!
//! * [`TableOpprf`] — the hint is a table of `T` field elements. Each
//!   programmed `x` owns slot `h(F(k, x), nonce)` holding `y + mask(x)`; the
//!   receiver subtracts its own mask. Additions and subtractions are in the
//!   field, so outputs are always canonical.
//! * [`IdealOpprf`] — the query travels in the clear and the sender acts as
//!   the trusted evaluator. For tests and fast simulation only.

use alloc::vec::Vec;

use rand_core::RngCore;
use sha2::{Digest, Sha256, Sha512};

use crate::field::Field;
use crate::oprf::{self, OprfContext, OprfKey};

pub const TAG_IDEAL: u8 = 1;
pub const TAG_TABLE: u8 = 2;

/// Upper bound on table re-seeding when programmed slots collide.
const MAX_NONCE_TRIES: u64 = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum OpprfError {
    #[error("programmed points repeat an x value")]
    DuplicateX,
    #[error("{points} programmed points exceed capacity {capacity}")]
    CapacityExceeded { points: usize, capacity: usize },
    #[error("response belongs to a different OPPRF instance")]
    SessionMismatch,
    #[error("malformed OPPRF message")]
    Malformed,
    #[error("no collision-free table layout found")]
    TableExhausted,
}

/// Distinct-`x` point set with a fixed capacity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProgrammedPoints<F> {
    points: Vec<(F, F)>,
    capacity: usize,
}

impl<F: Field> ProgrammedPoints<F> {
    pub fn with_capacity(capacity: usize) -> Self {
        ProgrammedPoints {
            points: Vec::with_capacity(capacity),
            capacity,
        }
    }

    pub fn from_points(points: Vec<(F, F)>, capacity: usize) -> Result<Self, OpprfError> {
        let mut out = Self::with_capacity(capacity);
        for (x, y) in points {
            out.push(x, y)?;
        }
        Ok(out)
    }

    pub fn push(&mut self, x: F, y: F) -> Result<(), OpprfError> {
        if self.points.len() == self.capacity {
            return Err(OpprfError::CapacityExceeded {
                points: self.points.len() + 1,
                capacity: self.capacity,
            });
        }
        if self.points.iter().any(|(px, _)| *px == x) {
            return Err(OpprfError::DuplicateX);
        }
        self.points.push((x, y));
        Ok(())
    }

    pub fn clear(&mut self) {
        self.points.clear();
    }

    pub fn points(&self) -> &[(F, F)] {
        &self.points
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Sender-side secret, one per `(sender, receiver, purpose)` in a session.
#[derive(Clone)]
pub struct SenderKey {
    raw: [u8; 32],
    oprf: OprfKey,
}

impl SenderKey {
    pub fn random<R: RngCore + ?Sized>(rng: &mut R) -> Self {
        let mut raw = [0u8; 32];
        rng.fill_bytes(&mut raw);
        Self::from_seed(raw)
    }

    pub fn from_seed(raw: [u8; 32]) -> Self {
        SenderKey {
            raw,
            oprf: OprfKey::from_seed(&raw),
        }
    }
}

/// What the receiver keeps between its query and the sender's response.
#[derive(Clone)]
pub struct ReceiverState<F> {
    query: F,
    blind: Option<oprf::Blinded>,
}

/// Common contract of the OPPRF backends.
///
/// Message lengths depend only on the backend and the capacity, never on
/// the query or the programmed points.
pub trait Opprf<F: Field>: Send + Sync {
    fn tag(&self) -> u8;
    fn query_len(&self) -> usize;
    fn response_len(&self, capacity: usize) -> usize;

    fn receiver_query(
        &self,
        ctx: &OprfContext,
        query: F,
        rng: &mut dyn RngCore,
        out: &mut Vec<u8>,
    ) -> ReceiverState<F>;

    fn sender_respond(
        &self,
        key: &SenderKey,
        ctx: &OprfContext,
        query: &[u8],
        points: &ProgrammedPoints<F>,
        rng: &mut dyn RngCore,
        out: &mut Vec<u8>,
    ) -> Result<(), OpprfError>;

    fn receiver_finish(
        &self,
        ctx: &OprfContext,
        state: &ReceiverState<F>,
        response: &[u8],
    ) -> Result<F, OpprfError>;
}

/// Which backend to use, as carried in configuration and setup frames.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OpprfKind {
    Ideal,
    Table,
}

impl OpprfKind {
    pub fn tag(self) -> u8 {
        match self {
            OpprfKind::Ideal => TAG_IDEAL,
            OpprfKind::Table => TAG_TABLE,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            TAG_IDEAL => Some(OpprfKind::Ideal),
            TAG_TABLE => Some(OpprfKind::Table),
            _ => None,
        }
    }

    pub fn backend<F: Field>(self) -> &'static dyn Opprf<F> {
        match self {
            OpprfKind::Ideal => &IdealOpprf,
            OpprfKind::Table => &TableOpprf,
        }
    }
}

fn check_capacity<F: Field>(points: &ProgrammedPoints<F>) -> Result<(), OpprfError> {
    if points.len() > points.capacity {
        return Err(OpprfError::CapacityExceeded {
            points: points.len(),
            capacity: points.capacity,
        });
    }
    Ok(())
}

fn read_field<F: Field>(bytes: &[u8]) -> Result<F, OpprfError> {
    F::from_slice(bytes).map_err(|_| OpprfError::Malformed)
}

// ---------------------------------------------------------------------------

/// Trusted-evaluator backend: correct by construction, private by nothing.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdealOpprf;

impl IdealOpprf {
    fn prf<F: Field>(key: &SenderKey, ctx: &OprfContext, q: &F) -> F {
        let digest: [u8; 64] = Sha512::new()
            .chain_update(b"tpsi/ideal-opprf")
            .chain_update(key.raw)
            .chain_update(ctx.instance.to_le_bytes())
            .chain_update(ctx.bin.to_le_bytes())
            .chain_update(q.to_bytes())
            .finalize()
            .into();
        F::from_uniform_bytes(&digest)
    }
}

impl<F: Field> Opprf<F> for IdealOpprf {
    fn tag(&self) -> u8 {
        TAG_IDEAL
    }

    fn query_len(&self) -> usize {
        16
    }

    fn response_len(&self, _capacity: usize) -> usize {
        1 + 8 + 16
    }

    fn receiver_query(
        &self,
        _ctx: &OprfContext,
        query: F,
        _rng: &mut dyn RngCore,
        out: &mut Vec<u8>,
    ) -> ReceiverState<F> {
        out.extend_from_slice(&query.to_bytes());
        ReceiverState { query, blind: None }
    }

    fn sender_respond(
        &self,
        key: &SenderKey,
        ctx: &OprfContext,
        query: &[u8],
        points: &ProgrammedPoints<F>,
        _rng: &mut dyn RngCore,
        out: &mut Vec<u8>,
    ) -> Result<(), OpprfError> {
        check_capacity(points)?;
        if query.len() != 16 {
            return Err(OpprfError::Malformed);
        }
        let q: F = read_field(query)?;
        let y = points
            .points()
            .iter()
            .find(|(x, _)| *x == q)
            .map(|(_, y)| *y)
            .unwrap_or_else(|| Self::prf(key, ctx, &q));
        out.push(TAG_IDEAL);
        out.extend_from_slice(&ctx.instance.to_le_bytes());
        out.extend_from_slice(&y.to_bytes());
        Ok(())
    }

    fn receiver_finish(
        &self,
        ctx: &OprfContext,
        _state: &ReceiverState<F>,
        response: &[u8],
    ) -> Result<F, OpprfError> {
        if response.len() != 25 || response[0] != TAG_IDEAL {
            return Err(OpprfError::Malformed);
        }
        if response[1..9] != ctx.instance.to_le_bytes() {
            return Err(OpprfError::SessionMismatch);
        }
        read_field(&response[9..25])
    }
}

// ---------------------------------------------------------------------------

/// Table-based construction over the blind-evaluation OPRF.
#[derive(Debug, Clone, Copy, Default)]
pub struct TableOpprf;

const TABLE_HEADER: usize = 1 + 2 + 8 + 8 + 32;

/// Smallest power of two at least `max(u + 1, 2u)`.
pub fn table_size(capacity: usize) -> usize {
    (capacity + 1).max(2 * capacity).next_power_of_two()
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn slot_seed(out: &[u8; 64]) -> u64 {
    let digest = Sha256::new()
        .chain_update(b"tpsi/opprf-slot")
        .chain_update(out)
        .finalize();
    u64::from_le_bytes(digest[..8].try_into().unwrap())
}

fn slot(seed: u64, nonce: u64, size: usize) -> usize {
    (splitmix64(seed ^ splitmix64(nonce)) as usize) & (size - 1)
}

impl<F: Field> Opprf<F> for TableOpprf {
    fn tag(&self) -> u8 {
        TAG_TABLE
    }

    fn query_len(&self) -> usize {
        32
    }

    fn response_len(&self, capacity: usize) -> usize {
        TABLE_HEADER + 16 * table_size(capacity)
    }

    fn receiver_query(
        &self,
        ctx: &OprfContext,
        query: F,
        rng: &mut dyn RngCore,
        out: &mut Vec<u8>,
    ) -> ReceiverState<F> {
        let (blind, msg) = oprf::blind(ctx, &query.to_bytes(), rng);
        out.extend_from_slice(&msg);
        ReceiverState {
            query,
            blind: Some(blind),
        }
    }

    fn sender_respond(
        &self,
        key: &SenderKey,
        ctx: &OprfContext,
        query: &[u8],
        points: &ProgrammedPoints<F>,
        rng: &mut dyn RngCore,
        out: &mut Vec<u8>,
    ) -> Result<(), OpprfError> {
        check_capacity(points)?;
        let blinded: [u8; 32] = query.try_into().map_err(|_| OpprfError::Malformed)?;
        let evaluated = oprf::evaluate(&key.oprf, &blinded).map_err(|_| OpprfError::Malformed)?;
        let size = table_size(points.capacity());
        let programmed: Vec<(u64, F, F)> = points
            .points()
            .iter()
            .map(|(x, y)| {
                let o = oprf::eval_direct(&key.oprf, ctx, &x.to_bytes());
                (slot_seed(&o), F::from_uniform_bytes(&o), *y)
            })
            .collect();
        let mut used = alloc::vec![u64::MAX; size];
        let mut nonce = 0u64;
        'search: loop {
            if nonce == MAX_NONCE_TRIES {
                return Err(OpprfError::TableExhausted);
            }
            for (seed, _, _) in &programmed {
                let s = slot(*seed, nonce, size);
                if used[s] == nonce {
                    nonce += 1;
                    continue 'search;
                }
                used[s] = nonce;
            }
            break;
        }
        let mut table: Vec<F> = (0..size).map(|_| F::random(rng)).collect();
        for (seed, mask, y) in &programmed {
            table[slot(*seed, nonce, size)] = *y + *mask;
        }
        out.reserve(TABLE_HEADER + 16 * size);
        out.push(TAG_TABLE);
        out.extend_from_slice(&(size as u16).to_le_bytes());
        out.extend_from_slice(&ctx.instance.to_le_bytes());
        out.extend_from_slice(&nonce.to_le_bytes());
        out.extend_from_slice(&evaluated);
        for entry in &table {
            out.extend_from_slice(&entry.to_bytes());
        }
        Ok(())
    }

    fn receiver_finish(
        &self,
        ctx: &OprfContext,
        state: &ReceiverState<F>,
        response: &[u8],
    ) -> Result<F, OpprfError> {
        if response.len() < TABLE_HEADER || response[0] != TAG_TABLE {
            return Err(OpprfError::Malformed);
        }
        let size = u16::from_le_bytes([response[1], response[2]]) as usize;
        if !size.is_power_of_two() || response.len() != TABLE_HEADER + 16 * size {
            return Err(OpprfError::Malformed);
        }
        if response[3..11] != ctx.instance.to_le_bytes() {
            return Err(OpprfError::SessionMismatch);
        }
        let nonce = u64::from_le_bytes(response[11..19].try_into().unwrap());
        let evaluated: [u8; 32] = response[19..51].try_into().unwrap();
        let blind = state.blind.as_ref().ok_or(OpprfError::Malformed)?;
        let o = oprf::unblind(ctx, &state.query.to_bytes(), blind, &evaluated)
            .map_err(|_| OpprfError::Malformed)?;
        let s = slot(slot_seed(&o), nonce, size);
        let entry: F = read_field(&response[TABLE_HEADER + 16 * s..TABLE_HEADER + 16 * (s + 1)])?;
        Ok(entry - F::from_uniform_bytes(&o))
    }
}

/// Runs one complete OPPRF instance in-process and returns the receiver's
/// output.
pub fn evaluate_local<F: Field>(
    backend: &dyn Opprf<F>,
    key: &SenderKey,
    ctx: &OprfContext,
    points: &ProgrammedPoints<F>,
    query: F,
    rng: &mut dyn RngCore,
) -> Result<F, OpprfError> {
    let mut q = Vec::new();
    let state = backend.receiver_query(ctx, query, rng, &mut q);
    let mut resp = Vec::new();
    backend.sender_respond(key, ctx, &q, points, rng, &mut resp)?;
    backend.receiver_finish(ctx, &state, &resp)
}
