//! Traceable over-threshold multi-party private set intersection.
//!
//! `n` parties hold sets of 128-bit elements. The leader `P0` learns every
//! element of its own set that at least `t` parties hold, together with the
//! exact holders; clients learn nothing. Two protocols are provided:
//!
//! * [`et`]: efficient; secure against up to `t - 2` colluding parties;
//! * [`st`]: adds OLE-masked share refresh and random aliases, secure against
//!   up to `n - 1` colluding parties.
//!
//! Everything here is `no_std` + `alloc`; transports, file formats and the
//! CLI live in the `tpsi` crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod channel;
pub mod et;
pub mod field;
pub mod frame;
pub mod hashing;
pub mod ole;
pub mod opprf;
pub mod oprf;
pub mod oracle;
pub mod session;
pub mod shamir;
pub mod st;

pub use field::{Crt4, Field, Fp, Fp64};
pub use session::{IntersectionEntry, IntersectionResult, Mode, Protocol, SessionConfig};
