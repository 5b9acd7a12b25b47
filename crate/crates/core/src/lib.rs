//! Register-level model of a unified SHA-3/SHAKE hardware engine with
//! parity-based fault detection.
//!
//! - [`keccak`]: the permutation, with the theta parities exposed.
//! - [`sponge`]: the byte-wise shift-register engine, cycle and throughput model.
//! - [`fault_detect`]: shadow parity registers and the output gate.
//! - [`fault_inject`]: fault patterns, injection and detection campaigns.

pub mod cli;
pub mod fault_detect;
pub mod fault_inject;
pub mod kat;
pub mod keccak;
pub mod sponge;
