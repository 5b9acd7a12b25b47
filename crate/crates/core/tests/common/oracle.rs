//! Bit-level FIPS 202 reference, written independently of the crate.
//!
//! The state is a `[x][y][z]` array of bits; the sponge works on bit strings
//! and absorbs by XOR of whole rate blocks, with explicit bit padding.

#![allow(clippy::needless_range_loop)]

pub type Bits = [[[bool; 64]; 5]; 5];

const RHO: [[u32; 5]; 5] = [
    [0, 36, 3, 41, 18],
    [1, 44, 10, 45, 2],
    [62, 6, 43, 15, 61],
    [28, 55, 25, 21, 56],
    [27, 20, 39, 8, 14],
];

pub fn zero() -> Bits {
    [[[false; 64]; 5]; 5]
}

/// String-to-state: bit `i` goes to `x = (i/64) % 5`, `y = (i/64) / 5`, `z = i % 64`.
pub fn from_string(s: &[bool]) -> Bits {
    let mut a = zero();
    for (i, &b) in s.iter().enumerate() {
        a[(i / 64) % 5][(i / 64) / 5][i % 64] = b;
    }
    a
}

pub fn to_string(a: &Bits) -> Vec<bool> {
    (0..1600)
        .map(|i| a[(i / 64) % 5][(i / 64) / 5][i % 64])
        .collect()
}

pub fn from_lanes(lanes: &[u64; 25]) -> Bits {
    let mut a = zero();
    for x in 0..5 {
        for y in 0..5 {
            for z in 0..64 {
                a[x][y][z] = (lanes[5 * y + x] >> z) & 1 == 1;
            }
        }
    }
    a
}

pub fn to_lanes(a: &Bits) -> [u64; 25] {
    let mut lanes = [0u64; 25];
    for x in 0..5 {
        for y in 0..5 {
            for z in 0..64 {
                if a[x][y][z] {
                    lanes[5 * y + x] |= 1 << z;
                }
            }
        }
    }
    lanes
}

/// Column parities `C[x][z]`.
pub fn column_parity(a: &Bits) -> [[bool; 64]; 5] {
    let mut c = [[false; 64]; 5];
    for x in 0..5 {
        for z in 0..64 {
            c[x][z] = (0..5).fold(false, |p, y| p ^ a[x][y][z]);
        }
    }
    c
}

/// Lane parities `F[x][y]`.
pub fn lane_parity(a: &Bits) -> [[bool; 5]; 5] {
    let mut f = [[false; 5]; 5];
    for x in 0..5 {
        for y in 0..5 {
            f[x][y] = a[x][y].iter().fold(false, |p, &b| p ^ b);
        }
    }
    f
}

pub fn theta(a: &Bits) -> Bits {
    let c = column_parity(a);
    let mut out = *a;
    for x in 0..5 {
        for z in 0..64 {
            let d = c[(x + 4) % 5][z] ^ c[(x + 1) % 5][(z + 63) % 64];
            for y in 0..5 {
                out[x][y][z] ^= d;
            }
        }
    }
    out
}

pub fn rho(a: &Bits) -> Bits {
    let mut out = zero();
    for x in 0..5 {
        for y in 0..5 {
            let r = RHO[x][y] as usize;
            for z in 0..64 {
                out[x][y][(z + r) % 64] = a[x][y][z];
            }
        }
    }
    out
}

pub fn pi(a: &Bits) -> Bits {
    let mut out = zero();
    for x in 0..5 {
        for y in 0..5 {
            out[x][y] = a[(x + 3 * y) % 5][x];
        }
    }
    out
}

pub fn chi(a: &Bits) -> Bits {
    let mut out = zero();
    for x in 0..5 {
        for y in 0..5 {
            for z in 0..64 {
                out[x][y][z] = a[x][y][z] ^ (!a[(x + 1) % 5][y][z] & a[(x + 2) % 5][y][z]);
            }
        }
    }
    out
}

/// Output bit of the degree-8 LFSR after `t mod 255` steps.
fn rc(t: usize) -> bool {
    if t.is_multiple_of(255) {
        return true;
    }
    let mut r = [true, false, false, false, false, false, false, false];
    for _ in 1..=(t % 255) {
        let mut n = [false; 9];
        n[1..9].copy_from_slice(&r);
        n[0] ^= n[8];
        n[4] ^= n[8];
        n[5] ^= n[8];
        n[6] ^= n[8];
        r.copy_from_slice(&n[..8]);
    }
    r[0]
}

pub fn iota(a: &Bits, round: usize) -> Bits {
    let mut out = *a;
    for j in 0..=6 {
        if rc(j + 7 * round) {
            out[0][0][(1 << j) - 1] ^= true;
        }
    }
    out
}

pub fn round(a: &Bits, ir: usize) -> Bits {
    iota(&chi(&pi(&rho(&theta(a)))), ir)
}

pub fn keccak_f(a: &Bits) -> Bits {
    (0..24).fold(*a, |s, ir| round(&s, ir))
}

pub fn keccak_f_lanes(lanes: &[u64; 25]) -> [u64; 25] {
    to_lanes(&keccak_f(&from_lanes(lanes)))
}

pub fn bytes_to_bits(bytes: &[u8]) -> Vec<bool> {
    bytes
        .iter()
        .flat_map(|&b| (0..8).map(move |i| (b >> i) & 1 == 1))
        .collect()
}

pub fn bits_to_bytes(bits: &[bool]) -> Vec<u8> {
    bits.chunks(8)
        .map(|c| {
            c.iter()
                .enumerate()
                .fold(0u8, |acc, (i, &b)| acc | ((b as u8) << i))
        })
        .collect()
}

/// `pad10*1` for rate `r` and message length `m`.
pub fn pad101(r: usize, m: usize) -> Vec<bool> {
    let j = (2 * r - ((m + 2) % r)) % r;
    let mut p = vec![true];
    p.extend(std::iter::repeat_n(false, j));
    p.push(true);
    p
}

/// `SPONGE[Keccak-f, pad10*1, r](N, d)`.
pub fn sponge(r: usize, n: &[bool], d: usize) -> Vec<bool> {
    let mut p = n.to_vec();
    p.extend(pad101(r, n.len()));
    assert_eq!(p.len() % r, 0);
    let mut s = vec![false; 1600];
    for block in p.chunks(r) {
        for (i, &b) in block.iter().enumerate() {
            s[i] ^= b;
        }
        s = to_string(&keccak_f(&from_string(&s)));
    }
    let mut z = Vec::new();
    loop {
        z.extend_from_slice(&s[..r]);
        if z.len() >= d {
            z.truncate(d);
            return z;
        }
        s = to_string(&keccak_f(&from_string(&s)));
    }
}

/// (rate bits, domain suffix bits, default digest bits)
pub fn mode_parameters(name: &str) -> (usize, &'static [bool], Option<usize>) {
    const SHA3: &[bool] = &[false, true];
    const SHAKE: &[bool] = &[true, true, true, true];
    match name {
        "sha3-224" => (1152, SHA3, Some(224)),
        "sha3-256" => (1088, SHA3, Some(256)),
        "sha3-384" => (832, SHA3, Some(384)),
        "sha3-512" => (576, SHA3, Some(512)),
        "shake128" => (1344, SHAKE, None),
        "shake256" => (1088, SHAKE, None),
        _ => panic!("unknown mode {name}"),
    }
}

/// Digest of `msg` in the named mode, `out_len` bytes.
pub fn hash(name: &str, msg: &[u8], out_len: usize) -> Vec<u8> {
    let (r, suffix, _) = mode_parameters(name);
    let mut n = bytes_to_bits(msg);
    n.extend_from_slice(suffix);
    bits_to_bytes(&sponge(r, &n, 8 * out_len))
}

/// Sponge state after absorbing `msg` (padded), before any squeeze.
pub fn absorbed_state(name: &str, msg: &[u8]) -> [u64; 25] {
    let (r, suffix, _) = mode_parameters(name);
    let mut p = bytes_to_bits(msg);
    p.extend_from_slice(suffix);
    let m = p.len();
    p.extend(pad101(r, m));
    let mut s = vec![false; 1600];
    for block in p.chunks(r) {
        for (i, &b) in block.iter().enumerate() {
            s[i] ^= b;
        }
        s = to_string(&keccak_f(&from_string(&s)));
    }
    to_lanes(&from_string(&s))
}
