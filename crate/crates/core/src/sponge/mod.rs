//! Unified SHA-3/SHAKE engine with a byte-wise in-place state update.

mod engine;
mod mode;
mod padding;
mod throughput;

use thiserror::Error;

pub use engine::{
    hash, hash_with, hash_with_hook, validate_output_len, CommitHook, CommitPoint, Engine,
    EngineOptions, EngineStats, HashOutput, NoHook, OutputByte, Phase, Unroll,
};
pub use mode::{mode_params, Domain, Mode, ModeConfig, SHIFT_RATE_BITS, SHIFT_RATE_BYTES};
pub use padding::{bits_to_bytes, pad, select_pad_byte, PadPosition};
pub use throughput::{
    compare_with_reported, throughput_mbps, Design, ThroughputRow, CYCLES_PER_BLOCK,
};

#[derive(Debug, Error, PartialEq)]
pub enum EngineError {
    #[error("unknown hash mode `{0}`")]
    UnknownMode(String),
    #[error("unroll factor {0} is not one of 1, 2, 4, 6, 8, 12, 24")]
    UnsupportedUnroll(usize),
    #[error("{mode} cannot produce {requested} output bytes")]
    OutputLength { mode: Mode, requested: usize },
    #[error("invalid padding request: {0}")]
    InvalidPadding(String),
    #[error("clock frequency must be positive, got {0}")]
    InvalidFrequency(f64),
    #[error("engine contract violated: {0}")]
    Contract(String),
}
