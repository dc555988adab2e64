//! In-process network: one lossless FIFO queue per party. Frames are
//! serialized on send and parsed on receive, so the wire format is exercised
//! exactly as over TCP.

use std::time::Duration;

use crossbeam_channel::{Receiver, RecvTimeoutError, Sender};
use tpsi_core::channel::{Link, LinkError};
use tpsi_core::frame::Frame;

pub struct SimLink {
    me: u8,
    peers: Vec<Sender<Vec<u8>>>,
    inbox: Receiver<Vec<u8>>,
    timeout: Duration,
}

/// Links for parties `0..n`, fully connected.
pub fn sim_mesh(n: usize, timeout: Duration) -> Vec<SimLink> {
    let (txs, rxs): (Vec<_>, Vec<_>) = (0..n).map(|_| crossbeam_channel::unbounded()).unzip();
    rxs.into_iter()
        .enumerate()
        .map(|(me, inbox)| SimLink {
            me: me as u8,
            peers: txs.clone(),
            inbox,
            timeout,
        })
        .collect()
}

impl Link for SimLink {
    fn local(&self) -> u8 {
        self.me
    }

    fn parties(&self) -> usize {
        self.peers.len()
    }

    fn send(&mut self, frame: Frame) -> Result<(), LinkError> {
        let to = frame.receiver;
        let peer = self
            .peers
            .get(to as usize)
            .ok_or(LinkError::PeerDisconnect(to))?;
        let bytes = frame.encode()?;
        peer.send(bytes).map_err(|_| LinkError::PeerDisconnect(to))
    }

    fn recv(&mut self) -> Result<Frame, LinkError> {
        match self.inbox.recv_timeout(self.timeout) {
            Ok(bytes) => Ok(Frame::decode(&bytes)?),
            Err(RecvTimeoutError::Timeout) => Err(LinkError::Timeout),
            Err(RecvTimeoutError::Disconnected) => Err(LinkError::PeerDisconnect(u8::MAX)),
        }
    }
}
