//! Wire frames: a fixed 32-byte little-endian header and a length-prefixed
//! payload. See `docs/wire.md` for the byte layout.

use alloc::vec::Vec;

pub const HEADER_LEN: usize = 32;
pub const MAX_FRAME_LEN: usize = 16 * 1024 * 1024;
pub const MAX_PAYLOAD_LEN: usize = MAX_FRAME_LEN - HEADER_LEN;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FrameError {
    #[error("frame shorter than its header")]
    Truncated,
    #[error("payload length {declared} does not match {actual} bytes present")]
    LengthMismatch { declared: usize, actual: usize },
    #[error("frame of {0} bytes exceeds the 16 MiB limit")]
    TooLarge(usize),
    #[error("unknown phase tag {0}")]
    UnknownPhase(u8),
    #[error("unknown message kind {0}")]
    UnknownKind(u8),
}

macro_rules! tagged_enum {
    ($(#[$m:meta])* $name:ident, $err:ident { $($variant:ident = $tag:expr),* $(,)? }) => {
        $(#[$m])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        #[repr(u8)]
        pub enum $name {
            $($variant = $tag),*
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),*];

            pub fn from_tag(tag: u8) -> Result<Self, FrameError> {
                match tag {
                    $($tag => Ok($name::$variant),)*
                    other => Err(FrameError::$err(other)),
                }
            }
        }
    };
}

tagged_enum!(
    /// Protocol phases, in the order a session walks through them.
    Phase, UnknownPhase {
        Setup = 0,
        Share = 1,
        Update = 2,
        Collect = 3,
        Done = 4,
    }
);

tagged_enum!(
    /// The closed set of message kinds.
    MessageKind, UnknownKind {
        SessionSetup = 1,
        HashStatus = 2,
        HashChoice = 3,
        OpprfRequest = 4,
        OpprfResponse = 5,
        IndexOpprfRequest = 6,
        IndexOpprfResponse = 7,
        UpdateValues = 8,
        OleHello = 9,
        OleRequest = 10,
        OleResponse = 11,
        Finished = 12,
        Abort = 13,
        Echo = 14,
    }
);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub session: [u8; 16],
    pub sender: u8,
    pub receiver: u8,
    pub phase: Phase,
    pub kind: MessageKind,
    pub bin: u32,
    pub slot: u32,
    pub payload: Vec<u8>,
}

impl Frame {
    pub fn new(
        session: [u8; 16],
        sender: u8,
        receiver: u8,
        phase: Phase,
        kind: MessageKind,
        payload: Vec<u8>,
    ) -> Self {
        Frame {
            session,
            sender,
            receiver,
            phase,
            kind,
            bin: 0,
            slot: 0,
            payload,
        }
    }

    pub fn encoded_len(&self) -> usize {
        HEADER_LEN + self.payload.len()
    }

    pub fn encode_header(&self) -> [u8; HEADER_LEN] {
        let mut h = [0u8; HEADER_LEN];
        h[..16].copy_from_slice(&self.session);
        h[16] = self.sender;
        h[17] = self.receiver;
        h[18] = self.phase as u8;
        h[19] = self.kind as u8;
        h[20..24].copy_from_slice(&self.bin.to_le_bytes());
        h[24..28].copy_from_slice(&self.slot.to_le_bytes());
        h[28..32].copy_from_slice(&(self.payload.len() as u32).to_le_bytes());
        h
    }

    pub fn encode(&self) -> Result<Vec<u8>, FrameError> {
        if self.encoded_len() > MAX_FRAME_LEN {
            return Err(FrameError::TooLarge(self.encoded_len()));
        }
        let mut out = Vec::with_capacity(self.encoded_len());
        out.extend_from_slice(&self.encode_header());
        out.extend_from_slice(&self.payload);
        Ok(out)
    }

    /// Parses a header, returning the frame with an empty payload and the
    /// payload length still to be read.
    pub fn decode_header(h: &[u8; HEADER_LEN]) -> Result<(Frame, usize), FrameError> {
        let len = u32::from_le_bytes(h[28..32].try_into().unwrap()) as usize;
        if len > MAX_PAYLOAD_LEN {
            return Err(FrameError::TooLarge(len + HEADER_LEN));
        }
        let frame = Frame {
            session: h[..16].try_into().unwrap(),
            sender: h[16],
            receiver: h[17],
            phase: Phase::from_tag(h[18])?,
            kind: MessageKind::from_tag(h[19])?,
            bin: u32::from_le_bytes(h[20..24].try_into().unwrap()),
            slot: u32::from_le_bytes(h[24..28].try_into().unwrap()),
            payload: Vec::new(),
        };
        Ok((frame, len))
    }

    pub fn decode(bytes: &[u8]) -> Result<Frame, FrameError> {
        let header: &[u8; HEADER_LEN] = bytes
            .get(..HEADER_LEN)
            .ok_or(FrameError::Truncated)?
            .try_into()
            .unwrap();
        let (mut frame, len) = Frame::decode_header(header)?;
        let actual = bytes.len() - HEADER_LEN;
        if actual != len {
            return Err(FrameError::LengthMismatch {
                declared: len,
                actual,
            });
        }
        frame.payload = bytes[HEADER_LEN..].to_vec();
        Ok(frame)
    }
}
