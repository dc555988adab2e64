//! Party-side message handling on top of an abstract [`Link`].
//!
//! A [`Mailbox`] demultiplexes incoming frames by `(sender, phase, kind)`,
//! buffers frames that arrive early, and refuses frames from a phase the
//! party has already left.

use alloc::collections::VecDeque;
use alloc::string::String;
use alloc::vec::Vec;

use crate::frame::{Frame, FrameError, MessageKind, Phase, MAX_PAYLOAD_LEN};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LinkError {
    #[error("timed out waiting for a frame")]
    Timeout,
    #[error("party {0} disconnected")]
    PeerDisconnect(u8),
    #[error("malformed frame: {0}")]
    MalformedFrame(#[from] FrameError),
    #[error("transport I/O error: {0}")]
    Io(String),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ChannelError {
    #[error(transparent)]
    Link(#[from] LinkError),
    #[error("party {0} aborted the session")]
    PeerAborted(u8),
    #[error(
        "frame from party {sender} belongs to phase {frame:?} but this party is in {current:?}"
    )]
    PhaseViolation {
        sender: u8,
        frame: Phase,
        current: Phase,
    },
    #[error("frame from party {0} carries a foreign session id")]
    SessionMismatch(u8),
    #[error("frame addressed to party {0}")]
    Misrouted(u8),
    #[error("unexpected layout of {0:?} frames")]
    BadLayout(MessageKind),
}

/// Reliable, per-pair FIFO delivery of frames between the parties of one
/// session. Implementations supply their own timeouts.
pub trait Link: Send {
    fn local(&self) -> u8;
    fn parties(&self) -> usize;
    fn send(&mut self, frame: Frame) -> Result<(), LinkError>;
    /// Next frame from any peer.
    fn recv(&mut self) -> Result<Frame, LinkError>;
    /// Called when the owning party enters `phase`.
    fn phase_started(&mut self, _phase: Phase) {}
}

impl<L: Link + ?Sized> Link for &mut L {
    fn local(&self) -> u8 {
        (**self).local()
    }
    fn parties(&self) -> usize {
        (**self).parties()
    }
    fn send(&mut self, frame: Frame) -> Result<(), LinkError> {
        (**self).send(frame)
    }
    fn recv(&mut self) -> Result<Frame, LinkError> {
        (**self).recv()
    }
    fn phase_started(&mut self, phase: Phase) {
        (**self).phase_started(phase)
    }
}

impl<L: Link + ?Sized> Link for alloc::boxed::Box<L> {
    fn local(&self) -> u8 {
        (**self).local()
    }
    fn parties(&self) -> usize {
        (**self).parties()
    }
    fn send(&mut self, frame: Frame) -> Result<(), LinkError> {
        (**self).send(frame)
    }
    fn recv(&mut self) -> Result<Frame, LinkError> {
        (**self).recv()
    }
    fn phase_started(&mut self, phase: Phase) {
        (**self).phase_started(phase)
    }
}

/// Payload budget per frame when a long item sequence is split.
const CHUNK_BUDGET: usize = 1 << 20;

pub struct Mailbox<L> {
    link: L,
    session: Option<[u8; 16]>,
    phase: Phase,
    pending: VecDeque<Frame>,
}

impl<L: Link> Mailbox<L> {
    pub fn new(link: L) -> Self {
        Mailbox {
            link,
            session: None,
            phase: Phase::Setup,
            pending: VecDeque::new(),
        }
    }

    pub fn local(&self) -> u8 {
        self.link.local()
    }

    pub fn parties(&self) -> usize {
        self.link.parties()
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn session(&self) -> Option<[u8; 16]> {
        self.session
    }

    pub fn set_session(&mut self, session: [u8; 16]) {
        self.session = Some(session);
    }

    pub fn into_link(self) -> L {
        self.link
    }

    /// Moves to `phase`. Fails if frames of an earlier phase are still
    /// buffered, since they could never be consumed.
    pub fn enter_phase(&mut self, phase: Phase) -> Result<(), ChannelError> {
        if let Some(stale) = self.pending.iter().find(|f| f.phase < phase) {
            return Err(ChannelError::PhaseViolation {
                sender: stale.sender,
                frame: stale.phase,
                current: phase,
            });
        }
        self.phase = phase;
        self.link.phase_started(phase);
        Ok(())
    }

    pub fn send(
        &mut self,
        to: u8,
        kind: MessageKind,
        bin: u32,
        slot: u32,
        payload: Vec<u8>,
    ) -> Result<(), ChannelError> {
        let frame = Frame {
            session: self.session.unwrap_or([0; 16]),
            sender: self.local(),
            receiver: to,
            phase: self.phase,
            kind,
            bin,
            slot,
            payload,
        };
        Ok(self.link.send(frame)?)
    }

    /// Best-effort notification of every other party; errors are ignored
    /// because the session is already failing.
    pub fn abort_all(&mut self) {
        let me = self.local();
        for to in 0..self.parties() as u8 {
            if to != me {
                let _ = self.send(to, MessageKind::Abort, 0, 0, Vec::new());
            }
        }
    }

    fn accept(&self, frame: &Frame) -> Result<(), ChannelError> {
        if frame.receiver != self.local() {
            return Err(ChannelError::Misrouted(frame.receiver));
        }
        if frame.kind == MessageKind::Abort {
            return Err(ChannelError::PeerAborted(frame.sender));
        }
        if let Some(s) = self.session {
            if frame.session != s {
                return Err(ChannelError::SessionMismatch(frame.sender));
            }
        }
        if frame.phase < self.phase {
            return Err(ChannelError::PhaseViolation {
                sender: frame.sender,
                frame: frame.phase,
                current: self.phase,
            });
        }
        Ok(())
    }

    /// Next frame of `kind` from `from` in the current phase; other frames
    /// are buffered in arrival order.
    pub fn recv(&mut self, from: u8, kind: MessageKind) -> Result<Frame, ChannelError> {
        let phase = self.phase;
        let wanted = |f: &Frame| f.sender == from && f.kind == kind && f.phase == phase;
        if let Some(pos) = self.pending.iter().position(wanted) {
            return Ok(self.pending.remove(pos).unwrap());
        }
        loop {
            let frame = self.link.recv()?;
            self.accept(&frame)?;
            if wanted(&frame) {
                return Ok(frame);
            }
            self.pending.push_back(frame);
        }
    }

    /// Sends `data` (a whole number of `item_len`-byte items) as one or more
    /// frames. Frame `bin` holds the first item index, `slot` the chunk
    /// number. The split depends only on the lengths.
    pub fn send_items(
        &mut self,
        to: u8,
        kind: MessageKind,
        item_len: usize,
        data: &[u8],
    ) -> Result<(), ChannelError> {
        debug_assert!(item_len > 0 && data.len().is_multiple_of(item_len));
        let per_frame = (CHUNK_BUDGET / item_len).max(1);
        let chunk_bytes = per_frame * item_len;
        if chunk_bytes > MAX_PAYLOAD_LEN {
            return Err(ChannelError::BadLayout(kind));
        }
        if data.is_empty() {
            return self.send(to, kind, 0, 0, Vec::new());
        }
        for (i, chunk) in data.chunks(chunk_bytes).enumerate() {
            self.send(to, kind, (i * per_frame) as u32, i as u32, chunk.to_vec())?;
        }
        Ok(())
    }

    pub fn recv_items(
        &mut self,
        from: u8,
        kind: MessageKind,
        item_len: usize,
        count: usize,
    ) -> Result<Vec<u8>, ChannelError> {
        let total = item_len * count;
        let per_frame = (CHUNK_BUDGET / item_len.max(1)).max(1);
        let mut out = Vec::with_capacity(total);
        let mut chunk = 0u32;
        loop {
            let frame = self.recv(from, kind)?;
            let first = (chunk as usize * per_frame) as u32;
            if frame.slot != chunk
                || frame.bin != first
                || frame.payload.len() % item_len.max(1) != 0
            {
                return Err(ChannelError::BadLayout(kind));
            }
            out.extend_from_slice(&frame.payload);
            chunk += 1;
            if out.len() >= total {
                break;
            }
        }
        if out.len() != total {
            return Err(ChannelError::BadLayout(kind));
        }
        Ok(out)
    }
}
