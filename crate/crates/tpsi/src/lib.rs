//! Transports, file formats, the homomorphic OLE backend, the in-process
//! simulator and benchmarks around `tpsi-core`.

pub mod bench;
pub mod config;
pub mod cputime;
pub mod he_ole;
pub mod output;
pub mod paillier;
pub mod prime;
pub mod runner;
pub mod setfile;
pub mod sim;
pub mod tcp;
pub mod transcript;

pub use tpsi_core;
