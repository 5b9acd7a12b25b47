use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::EngineError;
use crate::keccak::STATE_BITS;

/// Bits of the state wired as the byte shift register (the SHAKE128 rate).
pub const SHIFT_RATE_BITS: usize = 1344;
pub const SHIFT_RATE_BYTES: usize = SHIFT_RATE_BITS / 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Mode {
    #[serde(rename = "sha3-224")]
    Sha3_224,
    #[serde(rename = "sha3-256")]
    Sha3_256,
    #[serde(rename = "sha3-384")]
    Sha3_384,
    #[serde(rename = "sha3-512")]
    Sha3_512,
    #[serde(rename = "shake128")]
    Shake128,
    #[serde(rename = "shake256")]
    Shake256,
}

impl Mode {
    pub const ALL: [Mode; 6] = [
        Mode::Sha3_224,
        Mode::Sha3_256,
        Mode::Sha3_384,
        Mode::Sha3_512,
        Mode::Shake128,
        Mode::Shake256,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Mode::Sha3_224 => "sha3-224",
            Mode::Sha3_256 => "sha3-256",
            Mode::Sha3_384 => "sha3-384",
            Mode::Sha3_512 => "sha3-512",
            Mode::Shake128 => "shake128",
            Mode::Shake256 => "shake256",
        }
    }

    pub fn is_xof(self) -> bool {
        matches!(self, Mode::Shake128 | Mode::Shake256)
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = EngineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm: String = s
            .chars()
            .filter(|c| !matches!(c, '-' | '_' | ' '))
            .collect::<String>()
            .to_ascii_lowercase();
        match norm.as_str() {
            "sha3224" => Ok(Mode::Sha3_224),
            "sha3256" => Ok(Mode::Sha3_256),
            "sha3384" => Ok(Mode::Sha3_384),
            "sha3512" => Ok(Mode::Sha3_512),
            "shake128" => Ok(Mode::Shake128),
            "shake256" => Ok(Mode::Shake256),
            _ => Err(EngineError::UnknownMode(s.to_string())),
        }
    }
}

/// Domain-separation family of the padding rule.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Domain {
    Sha3,
    Shake,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ModeConfig {
    pub mode: Mode,
    pub rate_bits: usize,
    pub capacity_bits: usize,
    /// `None` for the XOFs.
    pub digest_bits: Option<usize>,
    pub domain: Domain,
}

impl ModeConfig {
    pub fn rate_bytes(&self) -> usize {
        self.rate_bits / 8
    }

    pub fn digest_bytes(&self) -> Option<usize> {
        self.digest_bits.map(|d| d / 8)
    }

    /// Shift-register positions beyond the mode rate that act as extra capacity.
    pub fn extension_bytes(&self) -> usize {
        SHIFT_RATE_BYTES - self.rate_bytes()
    }

    /// Output length used when the caller asks a SHAKE mode for its default.
    pub fn default_output_bytes(&self) -> usize {
        self.digest_bytes().unwrap_or(self.capacity_bits / 8)
    }
}

pub fn mode_params(mode: Mode) -> ModeConfig {
    // SHA3-d and SHAKE-s both use c = 2 * (security strength)
    let (capacity_bits, digest_bits, domain) = match mode {
        Mode::Sha3_224 => (448, Some(224), Domain::Sha3),
        Mode::Sha3_256 => (512, Some(256), Domain::Sha3),
        Mode::Sha3_384 => (768, Some(384), Domain::Sha3),
        Mode::Sha3_512 => (1024, Some(512), Domain::Sha3),
        Mode::Shake128 => (256, None, Domain::Shake),
        Mode::Shake256 => (512, None, Domain::Shake),
    };
    ModeConfig {
        mode,
        rate_bits: STATE_BITS - capacity_bits,
        capacity_bits,
        digest_bits,
        domain,
    }
}
