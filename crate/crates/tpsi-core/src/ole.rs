//! Oblivious linear evaluation: a receiver holding `x` learns `a * x + b`
//! from a sender holding `(a, b)`.
//!
//! Backends plug in through [`Ole`]. The receiver publishes a hello (key
//! material) once per sender, then sends one request carrying all its inputs;
//! the sender answers with `per_input` evaluations for each input. Reusing
//! one encrypted input across several sender pairs is what keeps a whole
//! bin's worth of evaluations in a single round trip.

use alloc::boxed::Box;
use alloc::vec::Vec;

use rand_core::RngCore;

use crate::field::Field;

pub const TAG_IDEAL: u8 = 1;
pub const TAG_PAILLIER: u8 = 2;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OleError {
    #[error("batch components have different lengths")]
    LengthMismatch,
    #[error("OLE backend failure: {0}")]
    BackendFailure(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OleSenderInput<F> {
    pub slope: F,
    pub offset: F,
}

impl<F: Field> OleSenderInput<F> {
    pub fn new(slope: F, offset: F) -> Self {
        OleSenderInput { slope, offset }
    }

    pub fn apply(&self, x: F) -> F {
        self.slope * x + self.offset
    }
}

/// Componentwise `slopes[i] * inputs[i] + offsets[i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OleBatch<F> {
    pub slopes: Vec<F>,
    pub offsets: Vec<F>,
    pub inputs: Vec<F>,
}

impl<F: Field> OleBatch<F> {
    pub fn validate(&self) -> Result<(), OleError> {
        if self.slopes.len() != self.offsets.len() || self.slopes.len() != self.inputs.len() {
            return Err(OleError::LengthMismatch);
        }
        Ok(())
    }
}

/// Receiver side of one sender relationship.
pub trait OleReceiver<F: Field>: Send {
    fn hello(&self) -> Vec<u8>;
    fn request(
        &self,
        inputs: &[F],
        rng: &mut dyn RngCore,
        out: &mut Vec<u8>,
    ) -> Result<(), OleError>;
    fn finish(&self, response: &[u8], outputs: usize) -> Result<Vec<F>, OleError>;
}

/// Sender side, bound to one receiver's hello.
pub trait OleSender<F: Field>: Send {
    /// `pairs[i * per_input + k]` is evaluated at the `i`-th requested input.
    fn respond(
        &self,
        request: &[u8],
        per_input: usize,
        pairs: &[OleSenderInput<F>],
        rng: &mut dyn RngCore,
        out: &mut Vec<u8>,
    ) -> Result<(), OleError>;
}

pub trait Ole<F: Field>: Send + Sync {
    fn tag(&self) -> u8;
    fn receiver_setup(&self, rng: &mut dyn RngCore) -> Result<Box<dyn OleReceiver<F>>, OleError>;
    fn sender_session(&self, hello: &[u8]) -> Result<Box<dyn OleSender<F>>, OleError>;
}

/// Runs a batch through `backend` in-process (receiver and sender local).
pub fn ole_batch<F: Field>(
    backend: &dyn Ole<F>,
    batch: &OleBatch<F>,
    rng: &mut dyn RngCore,
) -> Result<Vec<F>, OleError> {
    batch.validate()?;
    let receiver = backend.receiver_setup(rng)?;
    let sender = backend.sender_session(&receiver.hello())?;
    let mut request = Vec::new();
    receiver.request(&batch.inputs, rng, &mut request)?;
    let pairs: Vec<_> = batch
        .slopes
        .iter()
        .zip(&batch.offsets)
        .map(|(&a, &b)| OleSenderInput::new(a, b))
        .collect();
    let mut response = Vec::new();
    sender.respond(&request, 1, &pairs, rng, &mut response)?;
    receiver.finish(&response, pairs.len())
}

pub fn ole_eval<F: Field>(
    backend: &dyn Ole<F>,
    sender: OleSenderInput<F>,
    x: F,
    rng: &mut dyn RngCore,
) -> Result<F, OleError> {
    let batch = OleBatch {
        slopes: alloc::vec![sender.slope],
        offsets: alloc::vec![sender.offset],
        inputs: alloc::vec![x],
    };
    Ok(ole_batch(backend, &batch, rng)?[0])
}

// ---------------------------------------------------------------------------

/// Plaintext backend: the request carries `x`, the sender computes `a x + b`.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdealOle;

struct IdealReceiver;
struct IdealSender;

fn decode_all<F: Field>(bytes: &[u8], count: usize) -> Result<Vec<F>, OleError> {
    if bytes.len() != 16 * count {
        return Err(OleError::BackendFailure(
            "length does not match the element count",
        ));
    }
    bytes
        .chunks_exact(16)
        .map(|c| F::from_slice(c).map_err(|_| OleError::BackendFailure("non-canonical element")))
        .collect()
}

impl<F: Field> OleReceiver<F> for IdealReceiver {
    fn hello(&self) -> Vec<u8> {
        alloc::vec![TAG_IDEAL]
    }

    fn request(
        &self,
        inputs: &[F],
        _rng: &mut dyn RngCore,
        out: &mut Vec<u8>,
    ) -> Result<(), OleError> {
        out.reserve(16 * inputs.len());
        for x in inputs {
            out.extend_from_slice(&x.to_bytes());
        }
        Ok(())
    }

    fn finish(&self, response: &[u8], outputs: usize) -> Result<Vec<F>, OleError> {
        decode_all(response, outputs)
    }
}

impl<F: Field> OleSender<F> for IdealSender {
    fn respond(
        &self,
        request: &[u8],
        per_input: usize,
        pairs: &[OleSenderInput<F>],
        _rng: &mut dyn RngCore,
        out: &mut Vec<u8>,
    ) -> Result<(), OleError> {
        let inputs: Vec<F> = decode_all(request, request.len() / 16)?;
        if inputs.len() * per_input != pairs.len() {
            return Err(OleError::LengthMismatch);
        }
        out.reserve(16 * pairs.len());
        for (i, chunk) in pairs.chunks(per_input.max(1)).enumerate() {
            for pair in chunk {
                out.extend_from_slice(&pair.apply(inputs[i]).to_bytes());
            }
        }
        Ok(())
    }
}

impl<F: Field> Ole<F> for IdealOle {
    fn tag(&self) -> u8 {
        TAG_IDEAL
    }

    fn receiver_setup(&self, _rng: &mut dyn RngCore) -> Result<Box<dyn OleReceiver<F>>, OleError> {
        Ok(Box::new(IdealReceiver))
    }

    fn sender_session(&self, hello: &[u8]) -> Result<Box<dyn OleSender<F>>, OleError> {
        if hello != [TAG_IDEAL] {
            return Err(OleError::BackendFailure("hello from a different backend"));
        }
        Ok(Box::new(IdealSender))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Fp, Fp64};
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    type F11 = Fp64<11>;

    #[test]
    fn small_examples() {
        let mut rng = ChaCha20Rng::seed_from_u64(0);
        let f = F11::from_u64;
        assert_eq!(
            ole_eval(&IdealOle, OleSenderInput::new(f(3), f(4)), f(2), &mut rng).unwrap(),
            f(10)
        );
        for x in 0..11 {
            assert_eq!(
                ole_eval(&IdealOle, OleSenderInput::new(f(0), f(6)), f(x), &mut rng).unwrap(),
                f(6)
            );
        }
    }

    #[test]
    fn batch_shapes() {
        let mut rng = ChaCha20Rng::seed_from_u64(0);
        let empty = OleBatch::<Fp> {
            slopes: Vec::new(),
            offsets: Vec::new(),
            inputs: Vec::new(),
        };
        assert!(ole_batch(&IdealOle, &empty, &mut rng).unwrap().is_empty());
        let bad = OleBatch {
            slopes: alloc::vec![Fp::ONE],
            offsets: Vec::new(),
            inputs: alloc::vec![Fp::ONE],
        };
        assert_eq!(
            ole_batch(&IdealOle, &bad, &mut rng),
            Err(OleError::LengthMismatch)
        );
    }
}
