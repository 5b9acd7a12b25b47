#![allow(dead_code)]

pub mod oracle;

use keccak_fd::keccak::StateArray;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_state(rng: &mut impl Rng) -> StateArray {
    let mut lanes = [0u64; 25];
    rng.fill(&mut lanes[..]);
    StateArray::from_lanes(lanes)
}

pub fn random_bytes(rng: &mut impl Rng, len: usize) -> Vec<u8> {
    let mut v = vec![0u8; len];
    rng.fill(&mut v[..]);
    v
}

pub fn fixture(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}
