//! Brute-force reference for the threshold intersection with tracing, and a
//! planted-overlap instance generator for equivalence tests.
//!
//! Counts include the leader: an element of `S_0` is reported iff at least
//! `t` parties, the leader among them, hold it.

use alloc::vec::Vec;

use core::hash::Hash;

use hashbrown::HashSet;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::field::Field;
use crate::session::{IntersectionEntry, IntersectionResult};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("threshold {t} outside 2..={n}")]
    BadThreshold { t: usize, n: usize },
    #[error("party {0} holds a duplicate element")]
    DuplicateElement(usize),
    #[error("overlap plan does not fit: {0}")]
    PlanDoesNotFit(&'static str),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlainInstance<F> {
    pub sets: Vec<Vec<F>>,
    pub t: usize,
}

impl<F: Copy + Eq + Hash> PlainInstance<F> {
    pub fn n(&self) -> usize {
        self.sets.len()
    }

    pub fn validate(&self) -> Result<(), OracleError> {
        let n = self.n();
        if self.t < 2 || self.t > n {
            return Err(OracleError::BadThreshold { t: self.t, n });
        }
        for (i, s) in self.sets.iter().enumerate() {
            let mut seen = HashSet::with_capacity(s.len());
            if !s.iter().all(|e| seen.insert(*e)) {
                return Err(OracleError::DuplicateElement(i));
            }
        }
        Ok(())
    }
}

pub fn ideal_intersection<F: Copy + Ord + Hash>(
    inst: &PlainInstance<F>,
) -> Result<IntersectionResult<F>, OracleError> {
    inst.validate()?;
    let others: Vec<HashSet<F>> = inst
        .sets
        .iter()
        .map(|s| s.iter().copied().collect())
        .collect();
    let mut entries = Vec::new();
    for &e in &inst.sets[0] {
        let holders: Vec<usize> = (0..inst.n()).filter(|&j| others[j].contains(&e)).collect();
        if holders.len() >= inst.t {
            entries.push(IntersectionEntry {
                element: e,
                count: holders.len(),
                holders,
            });
        }
    }
    Ok(IntersectionResult::from_entries(entries))
}

/// Planted elements, each given by the exact set of parties holding it.
/// Every other element of every set is unique to its party.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct OverlapPlan {
    pub planted: Vec<Vec<usize>>,
}

impl OverlapPlan {
    /// Up to `per_count` leader-held elements for each holder count
    /// `t - 1`, `t`, `t + 1` (clipped to `1..=n`), plus `per_count` elements
    /// that `t` clients share without the leader. Holder sets are drawn from
    /// `rng`; the number of planted elements per party stays within `m`.
    pub fn straddling(
        n: usize,
        t: usize,
        m: usize,
        per_count: usize,
        rng: &mut dyn RngCore,
    ) -> Self {
        let mut planted = Vec::new();
        let mut load = alloc::vec![0usize; n];
        let mut counts: Vec<(usize, bool)> = [t - 1, t, t + 1]
            .into_iter()
            .filter(|&c| (1..=n).contains(&c))
            .map(|c| (c, true))
            .collect();
        if t < n {
            counts.push((t, false));
        }
        for _ in 0..per_count {
            for &(count, with_leader) in &counts {
                let holders = random_holders(n, count, with_leader, rng);
                if holders.iter().all(|&j| load[j] < m) {
                    holders.iter().for_each(|&j| load[j] += 1);
                    planted.push(holders);
                }
            }
        }
        OverlapPlan { planted }
    }
}

fn random_holders(n: usize, count: usize, with_leader: bool, rng: &mut dyn RngCore) -> Vec<usize> {
    let mut pool: Vec<usize> = (1..n).collect();
    // partial Fisher-Yates
    let need = if with_leader { count - 1 } else { count };
    for i in 0..need {
        let j = i + (rng.next_u64() % (pool.len() - i) as u64) as usize;
        pool.swap(i, j);
    }
    let mut holders: Vec<usize> = pool[..need].to_vec();
    if with_leader {
        holders.push(0);
    }
    holders.sort_unstable();
    holders
}

/// Deterministic instance: planted elements first, then fresh unique
/// elements until every set has exactly `m` members; finally each set is
/// shuffled.
pub fn gen_instance<F: Field>(
    n: usize,
    t: usize,
    m: usize,
    plan: &OverlapPlan,
    seed: u64,
) -> Result<PlainInstance<F>, OracleError> {
    gen_instance_planted(n, t, m, plan, seed).map(|(inst, _)| inst)
}

/// [`gen_instance`], also returning the element planted for each entry of
/// `plan.planted`.
pub fn gen_instance_planted<F: Field>(
    n: usize,
    t: usize,
    m: usize,
    plan: &OverlapPlan,
    seed: u64,
) -> Result<(PlainInstance<F>, Vec<F>), OracleError> {
    if t < 2 || t > n {
        return Err(OracleError::BadThreshold { t, n });
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut used = HashSet::new();
    let mut fresh = |rng: &mut ChaCha20Rng| loop {
        let e = F::random(rng);
        if used.insert(e) {
            break e;
        }
    };
    let mut sets = alloc::vec![Vec::with_capacity(m); n];
    let mut planted = Vec::with_capacity(plan.planted.len());
    for holders in &plan.planted {
        let e = fresh(&mut rng);
        planted.push(e);
        for &j in holders {
            if j >= n {
                return Err(OracleError::PlanDoesNotFit("holder index out of range"));
            }
            sets[j].push(e);
        }
    }
    for set in &mut sets {
        if set.len() > m {
            return Err(OracleError::PlanDoesNotFit("more planted elements than m"));
        }
        while set.len() < m {
            set.push(fresh(&mut rng));
        }
        for i in (1..set.len()).rev() {
            let j = (rng.next_u64() % (i as u64 + 1)) as usize;
            set.swap(i, j);
        }
    }
    Ok((PlainInstance { sets, t }, planted))
}
