//! Simple hashing (every candidate bin) and stashless Cuckoo hashing (one
//! bin, one element) over a shared family of keyed hash functions.
//!
//! Both tables are padded with dummies so that their shape depends only on
//! the public parameters.

use alloc::vec;
use alloc::vec::Vec;

use hashbrown::HashSet;
use sha2::{Digest, Sha256, Sha512};

use crate::field::Field;

/// Number of hash functions.
pub const HASH_COUNT: usize = 3;
/// Longest eviction chain before an insertion attempt is abandoned.
pub const MAX_EVICTIONS: usize = 500;
/// Attempts (each with fresh seeds) before a session gives up on hashing.
pub const MAX_HASH_ATTEMPTS: u8 = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum HashingError {
    #[error("cuckoo insertion exceeded {MAX_EVICTIONS} evictions")]
    InsertionFailure,
    #[error("simple-hash bin {bin} holds more than {beta} elements")]
    BinOverflow { bin: usize, beta: usize },
    #[error("{elements} elements do not fit {bins} bins")]
    TooManyElements { elements: usize, bins: usize },
    #[error("duplicate element in input set")]
    DuplicateElement,
}

/// Bin layout shared by every party of a session.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BinParams {
    pub bins: usize,
    pub beta: usize,
    pub lambda: u32,
}

/// Default Cuckoo expansion `m_b = ceil(1.27 m)`, as a ratio.
pub const DEFAULT_EXPANSION: (u32, u32) = (127, 100);

impl BinParams {
    pub fn derive(m: usize, lambda: u32) -> Self {
        Self::derive_with_expansion(m, lambda, DEFAULT_EXPANSION)
    }

    /// `bins = ceil(m * num / den)`; `beta` is the smallest bound whose
    /// union-bounded overflow probability over all bins is at most
    /// `2^-lambda`, for `HASH_COUNT * m` balls thrown uniformly.
    pub fn derive_with_expansion(m: usize, lambda: u32, (num, den): (u32, u32)) -> Self {
        let m = m.max(1);
        let bins = (m * num as usize).div_ceil(den as usize).max(1);
        let beta = simple_bin_bound(HASH_COUNT * m, bins, lambda);
        BinParams { bins, beta, lambda }
    }

    pub fn simple_slots(&self) -> usize {
        self.bins * self.beta
    }
}

/// Smallest `B` with `bins * P[Binomial(balls, 1/bins) > B] <= 2^-lambda`.
fn simple_bin_bound(balls: usize, bins: usize, lambda: u32) -> usize {
    if bins == 1 {
        return balls;
    }
    let q = 1.0 / bins as f64;
    let ratio = q / (1.0 - q);
    // pmf(0) by squaring to keep precision for large `balls`
    let mut pmf0 = 1.0f64;
    let mut base = 1.0 - q;
    let mut e = balls;
    while e > 0 {
        if e & 1 == 1 {
            pmf0 *= base;
        }
        base *= base;
        e >>= 1;
    }
    let mut pmf = Vec::with_capacity(64);
    let mut cur = pmf0;
    pmf.push(cur);
    let mean = balls as f64 * q;
    for k in 0..balls {
        cur *= (balls - k) as f64 / (k + 1) as f64 * ratio;
        pmf.push(cur);
        if (k + 1) as f64 > mean && cur < 1e-300 {
            break;
        }
    }
    let target = libm_exp2(-(lambda as f64)) / bins as f64;
    // tail[B] = sum_{k > B} pmf(k), accumulated from the top
    let mut tail = 0.0f64;
    let mut best = pmf.len() - 1;
    for b in (0..pmf.len()).rev() {
        if tail <= target {
            best = b;
        } else {
            break;
        }
        tail += pmf[b];
    }
    best.min(balls)
}

fn libm_exp2(x: f64) -> f64 {
    // x is a non-positive integer here
    let mut v = 1.0f64;
    for _ in 0..(-x) as u32 {
        v *= 0.5;
    }
    v
}

/// The `HASH_COUNT` keyed hash functions of one hashing attempt.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HashSeeds {
    seeds: [[u8; 32]; HASH_COUNT],
}

impl HashSeeds {
    pub fn derive(base: &[u8; 32], attempt: u8) -> Self {
        let seeds = core::array::from_fn(|j| {
            Sha256::new()
                .chain_update(b"tpsi/hash-seed")
                .chain_update(base)
                .chain_update([attempt, j as u8])
                .finalize()
                .into()
        });
        HashSeeds { seeds }
    }

    pub fn from_seeds(seeds: [[u8; 32]; HASH_COUNT]) -> Self {
        HashSeeds { seeds }
    }

    pub fn bin<F: Field>(&self, j: usize, element: &F, bins: usize) -> usize {
        let digest = Sha256::new()
            .chain_update(self.seeds[j])
            .chain_update(element.to_bytes())
            .finalize();
        let v = u64::from_le_bytes(digest[..8].try_into().unwrap());
        (v % bins as u64) as usize
    }

    /// Candidate bins of `element`, in hash-function order.
    pub fn bins<F: Field>(&self, element: &F, bins: usize) -> [usize; HASH_COUNT] {
        core::array::from_fn(|j| self.bin(j, element, bins))
    }
}

/// Domain for dummy derivation: which party, which table, which session.
#[derive(Debug, Clone, Copy)]
pub struct DummyDomain {
    pub session: [u8; 16],
    pub party: u8,
}

const CUCKOO_KIND: u8 = 0xC0;
const SIMPLE_KIND: u8 = 0x51;

fn dummy<F: Field>(domain: &DummyDomain, kind: u8, bin: usize, slot: usize, counter: u32) -> F {
    let digest = Sha512::new()
        .chain_update(b"tpsi/dummy")
        .chain_update(domain.session)
        .chain_update([domain.party, kind])
        .chain_update((bin as u64).to_le_bytes())
        .chain_update((slot as u64).to_le_bytes())
        .chain_update(counter.to_le_bytes())
        .finalize();
    F::from_uniform_bytes(&digest.into())
}

/// Picks the first derived dummy that is neither a real element of this
/// party nor already present in the bin.
fn fresh_dummy<F: Field>(
    domain: &DummyDomain,
    kind: u8,
    bin: usize,
    slot: usize,
    real: &HashSet<F>,
    bin_mates: &[Entry<F>],
) -> F {
    let mut counter = 0u32;
    loop {
        let d = dummy::<F>(domain, kind, bin, slot, counter);
        if !real.contains(&d) && !bin_mates.iter().any(|e| e.value == d) {
            return d;
        }
        counter += 1;
    }
}

/// A table cell: either a real element (with its index in the input set) or
/// a dummy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Entry<F> {
    pub value: F,
    pub origin: Option<u32>,
}

impl<F> Entry<F> {
    pub fn is_dummy(&self) -> bool {
        self.origin.is_none()
    }
}

fn distinct<F: Field>(elements: &[F]) -> Result<HashSet<F>, HashingError> {
    let mut set = HashSet::with_capacity(elements.len());
    for e in elements {
        if !set.insert(*e) {
            return Err(HashingError::DuplicateElement);
        }
    }
    Ok(set)
}

/// One element per bin; every bin filled.
#[derive(Debug, Clone)]
pub struct CuckooTable<F> {
    bins: Vec<Entry<F>>,
    /// `placement[k]` is the bin holding input element `k`.
    placement: Vec<u32>,
}

impl<F: Field> CuckooTable<F> {
    pub fn build(
        elements: &[F],
        seeds: &HashSeeds,
        params: &BinParams,
        domain: &DummyDomain,
    ) -> Result<Self, HashingError> {
        let real = distinct(elements)?;
        let nb = params.bins;
        if elements.len() > nb {
            return Err(HashingError::TooManyElements {
                elements: elements.len(),
                bins: nb,
            });
        }
        // (element index, which hash function placed it)
        let mut slots: Vec<Option<(u32, u8)>> = vec![None; nb];
        let candidates: Vec<[usize; HASH_COUNT]> =
            elements.iter().map(|e| seeds.bins(e, nb)).collect();
        for k in 0..elements.len() {
            let mut cur = (k as u32, 0u8);
            if let Some(j) = candidates[k].iter().position(|&b| slots[b].is_none()) {
                slots[candidates[k][j]] = Some((k as u32, j as u8));
                continue;
            }
            let mut placed = false;
            for _ in 0..MAX_EVICTIONS {
                let (idx, j) = cur;
                let bin = candidates[idx as usize][j as usize];
                match slots[bin].replace((idx, j)) {
                    None => {
                        placed = true;
                        break;
                    }
                    Some((evicted, ej)) => {
                        let cands = &candidates[evicted as usize];
                        // first empty alternative, else rotate to the next function
                        let next = (1..HASH_COUNT)
                            .map(|s| (ej as usize + s) % HASH_COUNT)
                            .find(|&nj| slots[cands[nj]].is_none())
                            .unwrap_or((ej as usize + 1) % HASH_COUNT);
                        cur = (evicted, next as u8);
                    }
                }
            }
            if !placed {
                return Err(HashingError::InsertionFailure);
            }
        }
        let mut placement = vec![0u32; elements.len()];
        let mut bins = Vec::with_capacity(nb);
        for (b, slot) in slots.iter().enumerate() {
            bins.push(match slot {
                Some((k, _)) => {
                    placement[*k as usize] = b as u32;
                    Entry {
                        value: elements[*k as usize],
                        origin: Some(*k),
                    }
                }
                None => Entry {
                    value: fresh_dummy(domain, CUCKOO_KIND, b, 0, &real, &[]),
                    origin: None,
                },
            });
        }
        Ok(CuckooTable { bins, placement })
    }

    pub fn bins(&self) -> &[Entry<F>] {
        &self.bins
    }

    pub fn entry(&self, bin: usize) -> &Entry<F> {
        &self.bins[bin]
    }

    pub fn bin_of(&self, element_index: usize) -> usize {
        self.placement[element_index] as usize
    }

    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }
}

/// `beta` entries per bin; each element in every one of its candidate bins.
#[derive(Debug, Clone)]
pub struct SimpleTable<F> {
    beta: usize,
    entries: Vec<Entry<F>>,
}

impl<F: Field> SimpleTable<F> {
    pub fn build(
        elements: &[F],
        seeds: &HashSeeds,
        params: &BinParams,
        domain: &DummyDomain,
    ) -> Result<Self, HashingError> {
        Self::build_with_padding(elements, seeds, params, domain, true)
    }

    /// Same layout without dummy padding; bins keep only real elements
    /// (used to check that padding is not needed for correctness).
    pub fn build_unpadded(
        elements: &[F],
        seeds: &HashSeeds,
        params: &BinParams,
        domain: &DummyDomain,
    ) -> Result<Vec<Vec<Entry<F>>>, HashingError> {
        let table = Self::build_with_padding(elements, seeds, params, domain, false)?;
        Ok((0..params.bins)
            .map(|b| {
                table
                    .bin(b)
                    .iter()
                    .copied()
                    .filter(|e| !e.is_dummy())
                    .collect()
            })
            .collect())
    }

    /// With `pad = false`, unfilled slots stay marked as dummies but hold zero
    /// and are never programmed.
    pub fn build_with_padding(
        elements: &[F],
        seeds: &HashSeeds,
        params: &BinParams,
        domain: &DummyDomain,
        pad: bool,
    ) -> Result<Self, HashingError> {
        let real = distinct(elements)?;
        let (nb, beta) = (params.bins, params.beta);
        let mut fill = vec![0usize; nb];
        let mut entries = vec![
            Entry {
                value: F::ZERO,
                origin: None
            };
            nb * beta
        ];
        for (k, e) in elements.iter().enumerate() {
            let mut cands = seeds.bins(e, nb);
            cands.sort_unstable();
            for (j, &b) in cands.iter().enumerate() {
                if j > 0 && cands[j - 1] == b {
                    continue;
                }
                if fill[b] == beta {
                    return Err(HashingError::BinOverflow { bin: b, beta });
                }
                entries[b * beta + fill[b]] = Entry {
                    value: *e,
                    origin: Some(k as u32),
                };
                fill[b] += 1;
            }
        }
        if pad {
            for b in 0..nb {
                for s in fill[b]..beta {
                    let (bin, rest) = entries[b * beta..(b + 1) * beta].split_at_mut(s);
                    rest[0].value = fresh_dummy(domain, SIMPLE_KIND, b, s, &real, bin);
                }
            }
        }
        Ok(SimpleTable { beta, entries })
    }

    pub fn beta(&self) -> usize {
        self.beta
    }

    pub fn bin_count(&self) -> usize {
        self.entries.len() / self.beta.max(1)
    }

    pub fn bin(&self, b: usize) -> &[Entry<F>] {
        &self.entries[b * self.beta..(b + 1) * self.beta]
    }

    pub fn entries(&self) -> &[Entry<F>] {
        &self.entries
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Fp;

    fn domain() -> DummyDomain {
        DummyDomain {
            session: [7; 16],
            party: 1,
        }
    }

    #[test]
    fn small_params() {
        let p = BinParams::derive(1, 40);
        assert_eq!((p.bins, p.beta), (2, 3));
        let p = BinParams::derive(2, 40);
        assert_eq!((p.bins, p.beta), (3, 6));
    }

    #[test]
    fn empty_tables_are_all_dummies() {
        let params = BinParams::derive(8, 40);
        let seeds = HashSeeds::derive(&[1; 32], 0);
        let c = CuckooTable::<Fp>::build(&[], &seeds, &params, &domain()).unwrap();
        assert!(c.bins().iter().all(Entry::is_dummy));
        assert_eq!(c.len(), params.bins);
        let s = SimpleTable::<Fp>::build(&[], &seeds, &params, &domain()).unwrap();
        assert!(s.entries().iter().all(Entry::is_dummy));
        assert_eq!(s.entries().len(), params.bins * params.beta);
    }

    #[test]
    fn single_element_goes_to_first_hash() {
        let params = BinParams::derive(8, 40);
        let seeds = HashSeeds::derive(&[2; 32], 0);
        let e = Fp::from_u64(12345);
        let c = CuckooTable::build(&[e], &seeds, &params, &domain()).unwrap();
        assert_eq!(c.bin_of(0), seeds.bin(0, &e, params.bins));
    }

    #[test]
    fn coinciding_indices_are_deduplicated() {
        let params = BinParams {
            bins: 1,
            beta: 3,
            lambda: 40,
        };
        let seeds = HashSeeds::derive(&[3; 32], 0);
        let e = Fp::from_u64(9);
        let s = SimpleTable::build(&[e], &seeds, &params, &domain()).unwrap();
        assert_eq!(s.bin(0).iter().filter(|x| x.value == e).count(), 1);
        assert_eq!(s.bin(0).iter().filter(|x| !x.is_dummy()).count(), 1);
    }

    #[test]
    fn duplicates_rejected() {
        let params = BinParams::derive(8, 40);
        let seeds = HashSeeds::derive(&[3; 32], 0);
        let e = Fp::from_u64(9);
        assert_eq!(
            CuckooTable::build(&[e, e], &seeds, &params, &domain()).unwrap_err(),
            HashingError::DuplicateElement
        );
    }
}
