//! JSON form of an intersection result.

use serde::{Deserialize, Serialize};
use tpsi_core::session::Protocol;

use crate::setfile::format_element;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputEntry {
    /// `0x` followed by 32 hex digits.
    pub element: String,
    pub count: usize,
    pub holders: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResultDocument {
    pub protocol: String,
    pub n: usize,
    pub t: usize,
    pub intersection: Vec<OutputEntry>,
}

/// One reported element over the raw 128-bit element domain.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct PlainEntry {
    pub element: u128,
    pub count: usize,
    pub holders: Vec<usize>,
}

/// Sorted by element, holders ascending.
pub fn normalize(mut entries: Vec<PlainEntry>) -> Vec<PlainEntry> {
    for e in &mut entries {
        e.holders.sort_unstable();
    }
    entries.sort();
    entries
}

impl ResultDocument {
    pub fn new(protocol: Protocol, n: usize, t: usize, entries: &[PlainEntry]) -> Self {
        ResultDocument {
            protocol: protocol.name().to_string(),
            n,
            t,
            intersection: entries
                .iter()
                .map(|e| OutputEntry {
                    element: format_element(e.element),
                    count: e.count,
                    holders: e.holders.clone(),
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }
}
