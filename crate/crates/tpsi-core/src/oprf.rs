//! Two-message blind-evaluation OPRF over ristretto255 (2HashDH):
//! `F(k, x) = H2(x, k * H1(x))`.
//!
//! The receiver sends `r * H1(x)`, the sender answers `k * r * H1(x)`, and
//! the receiver strips `r`. The sender never sees `x`; the receiver never
//! sees `k`.

use curve25519_dalek::ristretto::{CompressedRistretto, RistrettoPoint};
use curve25519_dalek::scalar::Scalar;
use rand_core::RngCore;
use sha2::{Digest, Sha512};

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum OprfError {
    #[error("group element does not decode")]
    InvalidPoint,
}

/// Context bound into both hashes so that outputs of distinct instances and
/// bins never coincide.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OprfContext {
    pub instance: u64,
    pub bin: u32,
}

#[derive(Clone)]
pub struct OprfKey(Scalar);

impl OprfKey {
    pub fn random<R: RngCore + ?Sized>(rng: &mut R) -> Self {
        OprfKey(random_scalar(rng))
    }

    pub fn from_seed(seed: &[u8; 32]) -> Self {
        let wide: [u8; 64] = Sha512::new()
            .chain_update(b"tpsi/oprf-key")
            .chain_update(seed)
            .finalize()
            .into();
        OprfKey(Scalar::from_bytes_mod_order_wide(&wide))
    }
}

fn random_scalar<R: RngCore + ?Sized>(rng: &mut R) -> Scalar {
    let mut wide = [0u8; 64];
    rng.fill_bytes(&mut wide);
    let s = Scalar::from_bytes_mod_order_wide(&wide);
    if s == Scalar::ZERO {
        Scalar::ONE
    } else {
        s
    }
}

fn hash_to_group(ctx: &OprfContext, input: &[u8]) -> RistrettoPoint {
    let mut buf = [0u8; 64];
    let prefix = b"tpsi/oprf-h1";
    let mut n = 0;
    for part in [
        &prefix[..],
        &ctx.instance.to_le_bytes(),
        &ctx.bin.to_le_bytes(),
    ] {
        buf[n..n + part.len()].copy_from_slice(part);
        n += part.len();
    }
    let mut hasher = Sha512::new();
    hasher.update(&buf[..n]);
    hasher.update(input);
    RistrettoPoint::from_hash(hasher)
}

fn finalize(ctx: &OprfContext, input: &[u8], point: &RistrettoPoint) -> [u8; 64] {
    Sha512::new()
        .chain_update(b"tpsi/oprf-h2")
        .chain_update(ctx.instance.to_le_bytes())
        .chain_update(ctx.bin.to_le_bytes())
        .chain_update((input.len() as u32).to_le_bytes())
        .chain_update(input)
        .chain_update(point.compress().as_bytes())
        .finalize()
        .into()
}

/// Receiver state between blinding and unblinding.
#[derive(Clone)]
pub struct Blinded {
    blind: Scalar,
}

pub fn blind<R: RngCore + ?Sized>(
    ctx: &OprfContext,
    input: &[u8],
    rng: &mut R,
) -> (Blinded, [u8; 32]) {
    let r = random_scalar(rng);
    let point = hash_to_group(ctx, input) * r;
    (Blinded { blind: r }, point.compress().to_bytes())
}

pub fn evaluate(key: &OprfKey, blinded: &[u8; 32]) -> Result<[u8; 32], OprfError> {
    let point = CompressedRistretto(*blinded)
        .decompress()
        .ok_or(OprfError::InvalidPoint)?;
    Ok((point * key.0).compress().to_bytes())
}

pub fn unblind(
    ctx: &OprfContext,
    input: &[u8],
    state: &Blinded,
    evaluated: &[u8; 32],
) -> Result<[u8; 64], OprfError> {
    let point = CompressedRistretto(*evaluated)
        .decompress()
        .ok_or(OprfError::InvalidPoint)?;
    Ok(finalize(ctx, input, &(point * state.blind.invert())))
}

/// Sender-side evaluation with the key in the clear.
pub fn eval_direct(key: &OprfKey, ctx: &OprfContext, input: &[u8]) -> [u8; 64] {
    finalize(ctx, input, &(hash_to_group(ctx, input) * key.0))
}
