//! Known-answer response files.
//!
//! Accepts the `Len`/`Msg`/`MD` layout of the short- and long-message files
//! and the `Outputlen`/`Msg`/`Output` layout of the variable-output XOF files.

use std::path::Path;

use serde::Serialize;
use thiserror::Error;

use crate::sponge::{hash, EngineError, Mode};

#[derive(Debug, Error)]
pub enum KatError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("no test records found")]
    Empty,
    #[error("cannot infer the hash mode from `{0}`; pass it explicitly")]
    UnknownMode(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct KatRecord {
    pub msg_len_bits: usize,
    pub msg_hex: String,
    pub expected_digest_hex: String,
    pub mode: Mode,
    /// Output bytes (digest length, or the XOF output length).
    pub out_len: usize,
}

impl KatRecord {
    pub fn is_byte_aligned(&self) -> bool {
        self.msg_len_bits.is_multiple_of(8)
    }

    /// The message, truncated to `msg_len_bits` (length-0 records carry `00`).
    pub fn message(&self) -> Vec<u8> {
        let bytes = hex::decode(&self.msg_hex).unwrap_or_default();
        bytes[..(self.msg_len_bits / 8).min(bytes.len())].to_vec()
    }

    pub fn expected(&self) -> Vec<u8> {
        hex::decode(&self.expected_digest_hex).unwrap_or_default()
    }
}

/// Mode named in a file name such as `ShortMsgKAT_SHA3-256.txt` or `SHAKE128VariableOut.rsp`.
pub fn mode_from_name(name: &str) -> Option<Mode> {
    let norm: String = name
        .to_ascii_lowercase()
        .chars()
        .filter(|c| c.is_ascii_alphanumeric())
        .collect();
    [
        ("sha3224", Mode::Sha3_224),
        ("sha3256", Mode::Sha3_256),
        ("sha3384", Mode::Sha3_384),
        ("sha3512", Mode::Sha3_512),
        ("shake128", Mode::Shake128),
        ("shake256", Mode::Shake256),
    ]
    .into_iter()
    .find(|(key, _)| norm.contains(key))
    .map(|(_, mode)| mode)
}

#[derive(Default)]
struct Pending {
    start: usize,
    len_bits: Option<usize>,
    msg: Option<String>,
    out_bits: Option<usize>,
}

fn parse_hex(value: &str, line: usize) -> Result<String, KatError> {
    let v = value.trim().to_ascii_lowercase();
    if !v.len().is_multiple_of(2) || hex::decode(&v).is_err() {
        return Err(KatError::Parse {
            line,
            message: format!("invalid hex `{value}`"),
        });
    }
    Ok(v)
}

fn parse_number(value: &str, line: usize) -> Result<usize, KatError> {
    value.trim().parse().map_err(|_| KatError::Parse {
        line,
        message: format!("invalid number `{value}`"),
    })
}

/// Parses response-file text for `mode`.
pub fn parse(text: &str, mode: Mode) -> Result<Vec<KatRecord>, KatError> {
    let mut records = Vec::new();
    let mut pending = Pending::default();
    // Outputlen may also appear once in a bracketed header.
    let mut header_out_bits = None;

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let l = raw.trim();
        if l.is_empty() || l.starts_with('#') {
            continue;
        }
        if let Some(inner) = l.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            if let Some((k, v)) = inner.split_once('=') {
                if k.trim().eq_ignore_ascii_case("outputlen") {
                    header_out_bits = Some(parse_number(v, line)?);
                }
            }
            continue;
        }
        let Some((key, value)) = l.split_once('=') else {
            return Err(KatError::Parse {
                line,
                message: format!("expected `key = value`, got `{l}`"),
            });
        };
        match key.trim().to_ascii_lowercase().as_str() {
            "len" => {
                pending = Pending {
                    start: line,
                    len_bits: Some(parse_number(value, line)?),
                    ..Pending::default()
                }
            }
            "count" => {
                pending = Pending {
                    start: line,
                    ..Pending::default()
                }
            }
            "outputlen" => pending.out_bits = Some(parse_number(value, line)?),
            "msg" => pending.msg = Some(parse_hex(value, line)?),
            "md" | "output" => {
                let expected = parse_hex(value, line)?;
                let msg = pending.msg.take().ok_or(KatError::Parse {
                    line,
                    message: "digest without a preceding Msg".into(),
                })?;
                let msg_len_bits = pending.len_bits.unwrap_or(msg.len() * 4);
                if msg_len_bits > msg.len() * 4 {
                    return Err(KatError::Parse {
                        line: pending.start,
                        message: format!("Len = {msg_len_bits} exceeds the Msg field"),
                    });
                }
                let out_bits = pending.out_bits.or(header_out_bits);
                let out_len = match out_bits {
                    Some(bits) => bits / 8,
                    None => expected.len() / 2,
                };
                if out_len != expected.len() / 2 {
                    return Err(KatError::Parse {
                        line,
                        message: format!(
                            "declared output length {out_len} bytes, digest has {}",
                            expected.len() / 2
                        ),
                    });
                }
                records.push(KatRecord {
                    msg_len_bits,
                    msg_hex: msg,
                    expected_digest_hex: expected,
                    mode,
                    out_len,
                });
                pending.len_bits = None;
            }
            // other fields (e.g. "Squeezed" in some files) are not needed
            _ => {}
        }
    }
    if records.is_empty() {
        return Err(KatError::Empty);
    }
    Ok(records)
}

/// Reads and parses `path`, inferring the mode from the file name unless given.
pub fn load(path: &Path, mode: Option<Mode>) -> Result<Vec<KatRecord>, KatError> {
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let mode = match mode.or_else(|| mode_from_name(&name)) {
        Some(m) => m,
        None => return Err(KatError::UnknownMode(name)),
    };
    parse(&std::fs::read_to_string(path)?, mode)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct KatFailure {
    pub msg_len_bits: usize,
    pub expected: String,
    pub actual: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct KatSummary {
    pub passed: usize,
    pub failed: usize,
    /// Records whose message is not a whole number of bytes.
    pub skipped: usize,
    pub failures: Vec<KatFailure>,
}

impl KatSummary {
    pub fn all_passed(&self) -> bool {
        self.failed == 0 && self.passed > 0
    }
}

/// Hashes every byte-aligned record with `digest` and compares.
pub fn verify_with<F>(records: &[KatRecord], mut digest: F) -> Result<KatSummary, EngineError>
where
    F: FnMut(&KatRecord) -> Result<Vec<u8>, EngineError>,
{
    let mut summary = KatSummary::default();
    for r in records {
        if !r.is_byte_aligned() {
            summary.skipped += 1;
            continue;
        }
        let actual = digest(r)?;
        if actual == r.expected() {
            summary.passed += 1;
        } else {
            summary.failed += 1;
            summary.failures.push(KatFailure {
                msg_len_bits: r.msg_len_bits,
                expected: r.expected_digest_hex.clone(),
                actual: hex::encode(actual),
            });
        }
    }
    Ok(summary)
}

pub fn verify(records: &[KatRecord]) -> Result<KatSummary, EngineError> {
    verify_with(records, |r| hash(r.mode, &r.message(), r.out_len))
}
