use super::mode::Domain;
use super::EngineError;

const PAD_RATES: [usize; 5] = [576, 832, 1088, 1152, 1344];

/// Padding string appended to an `m_bits`-bit message for rate `r_bits`.
///
/// Bits are listed in absorption order: `P[0]` is the first bit after the
/// message. SHA-3 appends `01 || pad10*1`, SHAKE appends `1111 || pad10*1`.
pub fn pad(r_bits: usize, m_bits: usize, domain: Domain) -> Result<Vec<bool>, EngineError> {
    if !PAD_RATES.contains(&r_bits) {
        return Err(EngineError::InvalidPadding(format!(
            "rate {r_bits} is not a SHA-3/SHAKE rate"
        )));
    }
    if !m_bits.is_multiple_of(8) {
        return Err(EngineError::InvalidPadding(format!(
            "message length {m_bits} is not byte-aligned"
        )));
    }
    let (suffix, extra): (&[bool], usize) = match domain {
        Domain::Sha3 => (&[false, true], 4),
        Domain::Shake => (&[true, true, true, true], 6),
    };
    let r = r_bits as i64;
    let j = (-(m_bits as i64) - extra as i64).rem_euclid(r) as usize;
    let mut p = Vec::with_capacity(j + extra);
    p.extend_from_slice(suffix);
    p.push(true);
    p.extend(std::iter::repeat_n(false, j));
    p.push(true);
    Ok(p)
}

/// Packs a bit string (FIPS 202 order, bit `i` into bit `i mod 8` of byte
/// `i / 8`) into bytes. The length must be a multiple of eight.
pub fn bits_to_bytes(bits: &[bool]) -> Vec<u8> {
    assert!(
        bits.len().is_multiple_of(8),
        "bit string is not byte-aligned"
    );
    bits.chunks(8)
        .map(|c| {
            c.iter()
                .enumerate()
                .fold(0u8, |acc, (i, &b)| acc | (u8::from(b) << i))
        })
        .collect()
}

/// Where a padding byte sits inside the final block.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PadPosition {
    First,
    Middle,
    Last,
    /// Only one byte of the block is left for padding.
    FirstAndLast,
}

impl PadPosition {
    /// Position of pad byte `index` out of `count` pad bytes.
    pub fn of(index: usize, count: usize) -> PadPosition {
        debug_assert!(index < count);
        match (index == 0, index + 1 == count) {
            (true, true) => PadPosition::FirstAndLast,
            (true, false) => PadPosition::First,
            (false, true) => PadPosition::Last,
            (false, false) => PadPosition::Middle,
        }
    }
}

/// The padding multiplexer.
pub fn select_pad_byte(position: PadPosition, domain: Domain) -> u8 {
    let first = match domain {
        Domain::Sha3 => 0x06,
        Domain::Shake => 0x1f,
    };
    match position {
        PadPosition::First => first,
        PadPosition::Middle => 0x00,
        PadPosition::Last => 0x80,
        PadPosition::FirstAndLast => first | 0x80,
    }
}
