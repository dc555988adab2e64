//! OLE from Paillier encryption.
//!
//! The receiver sends `Enc(x_c)` for every input and channel `c`; the sender
//! answers `Enc(x_c)^a_c * Enc(b_c + q_c * rho) * h^alpha`, where `rho` is
//! drawn from `[0, 2^40 q_c)` so the integer plaintext statistically hides
//! `a_c x_c` beyond its residue modulo `q_c`. Decrypting and reducing modulo
//! `q_c` yields `a_c x_c + b_c`. One encrypted input serves any number of
//! sender pairs.

use num_bigint::{BigUint, RandBigInt};
use rand::RngCore;
use tpsi_core::field::Field;
use tpsi_core::ole::{Ole, OleError, OleReceiver, OleSender, OleSenderInput, TAG_PAILLIER};

use crate::paillier::{self, FixedBase, PublicKey, SecretKey};

/// Statistical hiding of the sender's masked plaintext, in bits.
const MASK_BITS: u64 = 40;

/// Inputs with at least this many sender pairs get a fixed-base table.
const TABLE_THRESHOLD: usize = 4;

#[derive(Debug, Clone, Copy)]
pub struct PaillierOle {
    pub modulus_bits: u64,
}

impl Default for PaillierOle {
    fn default() -> Self {
        PaillierOle { modulus_bits: 2048 }
    }
}

struct Receiver {
    pk: PublicKey,
    sk: SecretKey,
}

struct Sender {
    pk: PublicKey,
    randomizer: FixedBase,
}

fn failure(e: paillier::PaillierError) -> OleError {
    match e {
        paillier::PaillierError::KeyTooSmall(_) => {
            OleError::BackendFailure("Paillier modulus below 1024 bits")
        }
        paillier::PaillierError::BadPublicKey => {
            OleError::BackendFailure("malformed Paillier public key")
        }
        paillier::PaillierError::BadCiphertext => {
            OleError::BackendFailure("malformed Paillier ciphertext")
        }
    }
}

fn channel_moduli<F: Field>() -> Vec<BigUint> {
    (0..F::CHANNELS)
        .map(|c| BigUint::from(F::channel_modulus(c)))
        .collect()
}

impl<F: Field> OleReceiver<F> for Receiver {
    fn hello(&self) -> Vec<u8> {
        let mut out = vec![TAG_PAILLIER];
        out.extend_from_slice(&self.pk.to_bytes());
        out
    }

    fn request(
        &self,
        inputs: &[F],
        rng: &mut dyn RngCore,
        out: &mut Vec<u8>,
    ) -> Result<(), OleError> {
        out.reserve(inputs.len() * F::CHANNELS * self.pk.ciphertext_len());
        for x in inputs {
            for c in 0..F::CHANNELS {
                let ct = self
                    .sk
                    .encrypt(&self.pk, &BigUint::from(x.channel_value(c)), rng);
                out.extend_from_slice(&self.pk.ciphertext_to_bytes(&ct));
            }
        }
        Ok(())
    }

    fn finish(&self, response: &[u8], outputs: usize) -> Result<Vec<F>, OleError> {
        let len = self.pk.ciphertext_len();
        if response.len() != outputs * F::CHANNELS * len {
            return Err(OleError::BackendFailure(
                "length does not match the output count",
            ));
        }
        let moduli = channel_moduli::<F>();
        let mut channels = vec![0u128; F::CHANNELS];
        response
            .chunks_exact(len * F::CHANNELS)
            .map(|output| {
                for (c, ct) in output.chunks_exact(len).enumerate() {
                    let ct = self.pk.ciphertext_from_bytes(ct).map_err(failure)?;
                    channels[c] = to_u128(&(self.sk.decrypt(&ct) % &moduli[c]));
                }
                F::from_channels(&channels)
                    .map_err(|_| OleError::BackendFailure("decrypted value out of range"))
            })
            .collect()
    }
}

fn to_u128(v: &BigUint) -> u128 {
    let mut digits = v.iter_u64_digits();
    let lo = digits.next().unwrap_or(0) as u128;
    let hi = digits.next().unwrap_or(0) as u128;
    lo | (hi << 64)
}

impl<F: Field> OleSender<F> for Sender {
    fn respond(
        &self,
        request: &[u8],
        per_input: usize,
        pairs: &[OleSenderInput<F>],
        rng: &mut dyn RngCore,
        out: &mut Vec<u8>,
    ) -> Result<(), OleError> {
        let len = self.pk.ciphertext_len();
        let stride = len * F::CHANNELS;
        if !request.len().is_multiple_of(stride)
            || (request.len() / stride) * per_input != pairs.len()
        {
            return Err(OleError::LengthMismatch);
        }
        let moduli = channel_moduli::<F>();
        let masks: Vec<BigUint> = moduli.iter().map(|q| q << MASK_BITS).collect();
        out.reserve(pairs.len() * stride);
        for (input, chunk) in request
            .chunks_exact(stride)
            .zip(pairs.chunks(per_input.max(1)))
        {
            let mut bases = Vec::with_capacity(F::CHANNELS);
            for c in 0..F::CHANNELS {
                let base = self
                    .pk
                    .ciphertext_from_bytes(&input[c * len..(c + 1) * len])
                    .map_err(failure)?;
                let table = (chunk.len() >= TABLE_THRESHOLD)
                    .then(|| FixedBase::new(&base, moduli[c].bits(), 4, &self.pk.n2));
                bases.push((base, table));
            }
            for pair in chunk {
                for (c, (base, table)) in bases.iter().enumerate() {
                    let a = BigUint::from(pair.slope.channel_value(c));
                    let b = BigUint::from(pair.offset.channel_value(c));
                    let scaled = match table {
                        Some(t) => t.pow(&a),
                        None => base.modpow(&a, &self.pk.n2),
                    };
                    let rho = rng.gen_biguint_below(&masks[c]);
                    let plain = self.pk.encode_plain(&(b + &moduli[c] * rho));
                    let noise = self.randomizer.pow(&self.pk.random_exponent(rng));
                    let ct = (scaled * plain % &self.pk.n2) * noise % &self.pk.n2;
                    out.extend_from_slice(&self.pk.ciphertext_to_bytes(&ct));
                }
            }
        }
        Ok(())
    }
}

impl<F: Field> Ole<F> for PaillierOle {
    fn tag(&self) -> u8 {
        TAG_PAILLIER
    }

    fn receiver_setup(&self, rng: &mut dyn RngCore) -> Result<Box<dyn OleReceiver<F>>, OleError> {
        let (pk, sk) = paillier::generate(self.modulus_bits, rng).map_err(failure)?;
        check_capacity::<F>(&pk)?;
        Ok(Box::new(Receiver { pk, sk }))
    }

    fn sender_session(&self, hello: &[u8]) -> Result<Box<dyn OleSender<F>>, OleError> {
        let Some((&TAG_PAILLIER, key)) = hello.split_first() else {
            return Err(OleError::BackendFailure("hello from a different backend"));
        };
        let pk = PublicKey::from_bytes(key).map_err(failure)?;
        check_capacity::<F>(&pk)?;
        let randomizer = pk.randomizer_table();
        Ok(Box::new(Sender { pk, randomizer }))
    }
}

/// `a x + b + q rho < q^2 + q + q^2 2^40` must stay below `N`.
fn check_capacity<F: Field>(pk: &PublicKey) -> Result<(), OleError> {
    let widest = channel_moduli::<F>()
        .iter()
        .map(BigUint::bits)
        .max()
        .unwrap_or(0);
    if pk.n.bits() <= 2 * widest + MASK_BITS + 2 {
        return Err(OleError::BackendFailure(
            "Paillier modulus too small for the field",
        ));
    }
    Ok(())
}
