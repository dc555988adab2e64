//! Frame-level recording of one party's traffic, and replay of a recording
//! against a re-run of the same party.

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex, MutexGuard};
use std::time::{Duration, Instant};

use tpsi_core::channel::{Link, LinkError};
use tpsi_core::frame::{Frame, MessageKind, Phase};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Sent,
    Received,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Record {
    pub direction: Direction,
    /// Offset from the start of the recording.
    pub at: Duration,
    pub frame: Frame,
}

/// Append-only log of every frame one party sent or received.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Transcript {
    pub party: u8,
    pub records: Vec<Record>,
}

impl Transcript {
    pub fn frames(&self, direction: Direction) -> impl Iterator<Item = &Frame> {
        self.records
            .iter()
            .filter(move |r| r.direction == direction)
            .map(|r| &r.frame)
    }

    /// Frames of `kind` sent by `from`, in order.
    pub fn from_peer(&self, from: u8, kind: MessageKind) -> impl Iterator<Item = &Frame> {
        self.records
            .iter()
            .map(|r| &r.frame)
            .filter(move |f| f.sender == from && f.kind == kind)
    }

    /// Encoded bytes in one direction (headers included).
    pub fn bytes(&self, direction: Direction) -> usize {
        self.frames(direction).map(Frame::encoded_len).sum()
    }

    /// Encoded bytes per `(sent?, peer, phase, kind)`. Two parties whose
    /// traffic is input-independent have equal profiles.
    pub fn profile(&self) -> BTreeMap<(bool, u8, u8, u8), usize> {
        let mut acc = BTreeMap::new();
        for r in &self.records {
            let (sent, peer) = match r.direction {
                Direction::Sent => (true, r.frame.receiver),
                Direction::Received => (false, r.frame.sender),
            };
            *acc.entry((sent, peer, r.frame.phase as u8, r.frame.kind as u8))
                .or_insert(0) += r.frame.encoded_len();
        }
        acc
    }
}

/// Shared handle to a transcript being recorded.
#[derive(Debug, Clone, Default)]
pub struct TranscriptHandle(Arc<Mutex<Transcript>>);

impl TranscriptHandle {
    pub fn lock(&self) -> MutexGuard<'_, Transcript> {
        self.0.lock().unwrap_or_else(|e| e.into_inner())
    }

    pub fn snapshot(&self) -> Transcript {
        self.lock().clone()
    }
}

pub struct RecordingLink<L> {
    inner: L,
    log: TranscriptHandle,
    start: Instant,
}

impl<L: Link> RecordingLink<L> {
    pub fn new(inner: L) -> (Self, TranscriptHandle) {
        let log = TranscriptHandle::default();
        log.lock().party = inner.local();
        (
            RecordingLink {
                inner,
                log: log.clone(),
                start: Instant::now(),
            },
            log,
        )
    }

    fn push(&self, direction: Direction, frame: Frame) {
        self.log.lock().records.push(Record {
            direction,
            at: self.start.elapsed(),
            frame,
        });
    }
}

impl<L: Link> Link for RecordingLink<L> {
    fn local(&self) -> u8 {
        self.inner.local()
    }

    fn parties(&self) -> usize {
        self.inner.parties()
    }

    fn send(&mut self, frame: Frame) -> Result<(), LinkError> {
        self.push(Direction::Sent, frame.clone());
        self.inner.send(frame)
    }

    fn recv(&mut self) -> Result<Frame, LinkError> {
        let frame = self.inner.recv()?;
        self.push(Direction::Received, frame.clone());
        Ok(frame)
    }

    fn phase_started(&mut self, phase: Phase) {
        self.inner.phase_started(phase)
    }
}

/// Plays a recorded party's incoming frames back in order and checks that
/// every outgoing frame equals the recorded one. A party re-run with the
/// same randomness must reproduce its transcript exactly.
pub struct ReplayLink {
    party: u8,
    parties: usize,
    incoming: std::vec::IntoIter<Frame>,
    expected: std::vec::IntoIter<Frame>,
    sent: usize,
}

impl ReplayLink {
    pub fn new(transcript: &Transcript, parties: usize) -> Self {
        let incoming: Vec<Frame> = transcript.frames(Direction::Received).cloned().collect();
        let expected: Vec<Frame> = transcript.frames(Direction::Sent).cloned().collect();
        ReplayLink {
            party: transcript.party,
            parties,
            incoming: incoming.into_iter(),
            expected: expected.into_iter(),
            sent: 0,
        }
    }

    /// True once every recorded outgoing frame has been reproduced.
    pub fn exhausted(&self) -> bool {
        self.expected.len() == 0
    }

    pub fn reproduced(&self) -> usize {
        self.sent
    }
}

impl Link for ReplayLink {
    fn local(&self) -> u8 {
        self.party
    }

    fn parties(&self) -> usize {
        self.parties
    }

    fn send(&mut self, frame: Frame) -> Result<(), LinkError> {
        match self.expected.next() {
            Some(f) if f == frame => {
                self.sent += 1;
                Ok(())
            }
            _ => Err(LinkError::Io(format!(
                "replay diverged at outgoing frame {}",
                self.sent
            ))),
        }
    }

    fn recv(&mut self) -> Result<Frame, LinkError> {
        self.incoming.next().ok_or(LinkError::Timeout)
    }
}
