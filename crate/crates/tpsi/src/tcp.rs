//! TCP mesh: one connection per party pair, a reader thread per connection,
//! and length-prefixed frames exactly as on the wire.
//!
//! Party `i` dials every `j < i` and accepts every `j > i`. The dialer
//! introduces itself with a 4-byte greeting: `b"TP"`, its index, and the
//! party count.

use std::io::{self, BufReader, BufWriter, Read, Write};
use std::net::{TcpListener, TcpStream, ToSocketAddrs};
use std::thread;
use std::time::{Duration, Instant};

use crossbeam_channel::{Receiver, RecvTimeoutError, Sender};
use tpsi_core::channel::{Link, LinkError};
use tpsi_core::frame::{Frame, HEADER_LEN};

const GREETING: &[u8; 2] = b"TP";

#[derive(Debug, thiserror::Error)]
pub enum MeshError {
    #[error("endpoint {0}: {1}")]
    Io(String, io::Error),
    #[error("party {0} did not connect within the timeout")]
    Timeout(u8),
    #[error("unexpected greeting from {0}")]
    BadGreeting(String),
}

pub struct TcpLink {
    me: u8,
    writers: Vec<Option<BufWriter<TcpStream>>>,
    inbox: Receiver<Result<Frame, LinkError>>,
    timeout: Duration,
}

fn read_frame(r: &mut impl Read) -> Result<Option<Frame>, LinkError> {
    let mut header = [0u8; HEADER_LEN];
    match r.read_exact(&mut header) {
        Ok(()) => {}
        Err(e) if e.kind() == io::ErrorKind::UnexpectedEof => return Ok(None),
        Err(e) => return Err(LinkError::Io(e.to_string())),
    }
    let (mut frame, len) = Frame::decode_header(&header)?;
    frame.payload = vec![0; len];
    r.read_exact(&mut frame.payload)
        .map_err(|e| LinkError::Io(e.to_string()))?;
    Ok(Some(frame))
}

fn spawn_reader(peer: u8, stream: TcpStream, tx: Sender<Result<Frame, LinkError>>) {
    thread::spawn(move || {
        let mut r = BufReader::new(stream);
        loop {
            match read_frame(&mut r) {
                Ok(Some(frame)) => {
                    if tx.send(Ok(frame)).is_err() {
                        return;
                    }
                }
                Ok(None) => {
                    let _ = tx.send(Err(LinkError::PeerDisconnect(peer)));
                    return;
                }
                Err(e) => {
                    let _ = tx.send(Err(e));
                    return;
                }
            }
        }
    });
}

fn dial(addr: &str, deadline: Instant) -> Result<TcpStream, MeshError> {
    loop {
        let addrs = addr
            .to_socket_addrs()
            .map_err(|e| MeshError::Io(addr.to_string(), e))?;
        for a in addrs {
            if let Ok(s) = TcpStream::connect_timeout(&a, Duration::from_millis(500)) {
                return Ok(s);
            }
        }
        if Instant::now() >= deadline {
            return Err(MeshError::Io(
                addr.to_string(),
                io::ErrorKind::TimedOut.into(),
            ));
        }
        thread::sleep(Duration::from_millis(100));
    }
}

/// Connects party `me` to every endpoint; blocks until the mesh is complete
/// or `timeout` expires.
pub fn connect_mesh(endpoints: &[String], me: u8, timeout: Duration) -> Result<TcpLink, MeshError> {
    let n = endpoints.len();
    let deadline = Instant::now() + timeout;
    let own = &endpoints[me as usize];
    let listener = TcpListener::bind(own).map_err(|e| MeshError::Io(own.clone(), e))?;
    let mut streams: Vec<Option<TcpStream>> = (0..n).map(|_| None).collect();

    for (j, addr) in endpoints.iter().enumerate().take(me as usize) {
        let mut s = dial(addr, deadline)?;
        s.write_all(&[GREETING[0], GREETING[1], me, n as u8])
            .map_err(|e| MeshError::Io(addr.clone(), e))?;
        streams[j] = Some(s);
    }

    listener
        .set_nonblocking(true)
        .map_err(|e| MeshError::Io(own.clone(), e))?;
    let mut missing = n - 1 - me as usize;
    while missing > 0 {
        match listener.accept() {
            Ok((mut s, peer)) => {
                s.set_nonblocking(false)
                    .map_err(|e| MeshError::Io(peer.to_string(), e))?;
                s.set_read_timeout(Some(timeout))
                    .map_err(|e| MeshError::Io(peer.to_string(), e))?;
                let mut g = [0u8; 4];
                s.read_exact(&mut g)
                    .map_err(|e| MeshError::Io(peer.to_string(), e))?;
                let j = g[2] as usize;
                if &g[..2] != GREETING
                    || g[3] as usize != n
                    || j <= me as usize
                    || j >= n
                    || streams[j].is_some()
                {
                    return Err(MeshError::BadGreeting(peer.to_string()));
                }
                s.set_read_timeout(None)
                    .map_err(|e| MeshError::Io(peer.to_string(), e))?;
                streams[j] = Some(s);
                missing -= 1;
            }
            Err(e) if e.kind() == io::ErrorKind::WouldBlock => {
                if Instant::now() >= deadline {
                    let j = (me as usize + 1..n)
                        .find(|&j| streams[j].is_none())
                        .unwrap_or(0);
                    return Err(MeshError::Timeout(j as u8));
                }
                thread::sleep(Duration::from_millis(20));
            }
            Err(e) => return Err(MeshError::Io(own.clone(), e)),
        }
    }

    let (tx, inbox) = crossbeam_channel::unbounded();
    let mut writers = Vec::with_capacity(n);
    for (j, s) in streams.into_iter().enumerate() {
        match s {
            Some(s) => {
                s.set_nodelay(true)
                    .map_err(|e| MeshError::Io(endpoints[j].clone(), e))?;
                let r = s
                    .try_clone()
                    .map_err(|e| MeshError::Io(endpoints[j].clone(), e))?;
                spawn_reader(j as u8, r, tx.clone());
                writers.push(Some(BufWriter::new(s)));
            }
            None => writers.push(None),
        }
    }
    Ok(TcpLink {
        me,
        writers,
        inbox,
        timeout,
    })
}

impl Link for TcpLink {
    fn local(&self) -> u8 {
        self.me
    }

    fn parties(&self) -> usize {
        self.writers.len()
    }

    fn send(&mut self, frame: Frame) -> Result<(), LinkError> {
        let to = frame.receiver;
        let w = self
            .writers
            .get_mut(to as usize)
            .and_then(Option::as_mut)
            .ok_or(LinkError::PeerDisconnect(to))?;
        let bytes = frame.encode()?;
        w.write_all(&bytes)
            .and_then(|_| w.flush())
            .map_err(|_| LinkError::PeerDisconnect(to))
    }

    fn recv(&mut self) -> Result<Frame, LinkError> {
        match self.inbox.recv_timeout(self.timeout) {
            Ok(r) => r,
            Err(RecvTimeoutError::Timeout) => Err(LinkError::Timeout),
            Err(RecvTimeoutError::Disconnected) => Err(LinkError::PeerDisconnect(u8::MAX)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use tpsi_core::frame::{MessageKind, Phase};

    fn free_endpoints(n: usize) -> Vec<String> {
        let ls: Vec<_> = (0..n)
            .map(|_| TcpListener::bind("127.0.0.1:0").unwrap())
            .collect();
        ls.iter()
            .map(|l| l.local_addr().unwrap().to_string())
            .collect()
    }

    #[test]
    fn three_party_mesh_delivers_in_order() {
        let eps = free_endpoints(3);
        let handles: Vec<_> = (0..3u8)
            .map(|me| {
                let eps = eps.clone();
                thread::spawn(move || {
                    let mut link = connect_mesh(&eps, me, Duration::from_secs(10)).unwrap();
                    for to in 0..3u8 {
                        if to != me {
                            for k in 0..50u32 {
                                let mut f = Frame::new(
                                    [1; 16],
                                    me,
                                    to,
                                    Phase::Setup,
                                    MessageKind::Echo,
                                    k.to_le_bytes().to_vec(),
                                );
                                f.bin = k;
                                link.send(f).unwrap();
                            }
                        }
                    }
                    let mut next = [0u32; 3];
                    for _ in 0..100 {
                        let f = link.recv().unwrap();
                        assert_eq!(f.bin, next[f.sender as usize]);
                        assert_eq!(f.payload, f.bin.to_le_bytes());
                        next[f.sender as usize] += 1;
                    }
                })
            })
            .collect();
        for h in handles {
            h.join().unwrap();
        }
    }
}
