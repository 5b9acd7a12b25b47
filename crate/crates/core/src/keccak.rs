//! Keccak-f[1600] permutation with an instrumented theta layer.
//!
//! Besides the permuted state, every round exposes two parity taps taken from
//! the state the theta layer reads:
//!
//! * the column-sum plane (`CPlane`, 320 bits) that theta computes anyway, and
//! * the lane-sum slice (`FSlice`, 25 bits) that the fault-detection unit adds.
//!
//! The state is stored as 25 little-endian 64-bit lanes. Lane `(x, y)` lives at
//! index `5y + x` and bit `z` of that lane has linear index `64(5y + x) + z`,
//! which is also the FIPS 202 string-to-state bit order.

use std::fmt;
use std::sync::LazyLock;

pub const LANE_BITS: usize = 64;
pub const STATE_BITS: usize = 1600;
pub const STATE_BYTES: usize = 200;
pub const ROUNDS: usize = 24;

#[inline]
const fn lane_index(x: usize, y: usize) -> usize {
    5 * y + x
}

/// The 5x5x64 Keccak state.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct StateArray {
    lanes: [u64; 25],
}

impl StateArray {
    pub const fn zero() -> Self {
        StateArray { lanes: [0; 25] }
    }

    pub const fn ones() -> Self {
        StateArray {
            lanes: [u64::MAX; 25],
        }
    }

    pub const fn from_lanes(lanes: [u64; 25]) -> Self {
        StateArray { lanes }
    }

    pub fn lanes(&self) -> &[u64; 25] {
        &self.lanes
    }

    pub fn lanes_mut(&mut self) -> &mut [u64; 25] {
        &mut self.lanes
    }

    pub fn lane(&self, x: usize, y: usize) -> u64 {
        self.lanes[lane_index(x, y)]
    }

    pub fn set_lane(&mut self, x: usize, y: usize, value: u64) {
        self.lanes[lane_index(x, y)] = value;
    }

    /// Linear index of `S[x,y,z]`.
    ///
    /// Panics if a coordinate is out of range.
    pub fn linear_index(x: usize, y: usize, z: usize) -> usize {
        assert!(x < 5 && y < 5 && z < LANE_BITS, "coordinate out of range");
        LANE_BITS * lane_index(x, y) + z
    }

    /// Inverse of [`StateArray::linear_index`].
    pub fn coords(index: usize) -> (usize, usize, usize) {
        assert!(index < STATE_BITS, "bit index {index} out of range");
        let lane = index / LANE_BITS;
        (lane % 5, lane / 5, index % LANE_BITS)
    }

    pub fn bit(&self, x: usize, y: usize, z: usize) -> bool {
        self.bit_at(Self::linear_index(x, y, z))
    }

    pub fn set_bit(&mut self, x: usize, y: usize, z: usize, value: bool) {
        let i = Self::linear_index(x, y, z);
        let mask = 1u64 << (i % LANE_BITS);
        if value {
            self.lanes[i / LANE_BITS] |= mask;
        } else {
            self.lanes[i / LANE_BITS] &= !mask;
        }
    }

    pub fn bit_at(&self, index: usize) -> bool {
        assert!(index < STATE_BITS, "bit index {index} out of range");
        (self.lanes[index / LANE_BITS] >> (index % LANE_BITS)) & 1 == 1
    }

    pub fn flip_bit(&mut self, index: usize) {
        assert!(index < STATE_BITS, "bit index {index} out of range");
        self.lanes[index / LANE_BITS] ^= 1u64 << (index % LANE_BITS);
    }

    /// Byte `i` of the state string (bits `8i..8i+8`).
    pub fn byte(&self, i: usize) -> u8 {
        assert!(i < STATE_BYTES, "byte index {i} out of range");
        (self.lanes[i / 8] >> (8 * (i % 8))) as u8
    }

    pub fn from_bytes(bytes: &[u8; STATE_BYTES]) -> Self {
        let mut lanes = [0u64; 25];
        for (lane, chunk) in lanes.iter_mut().zip(bytes.chunks_exact(8)) {
            *lane = u64::from_le_bytes(chunk.try_into().expect("8-byte chunk"));
        }
        StateArray { lanes }
    }

    pub fn to_bytes(&self) -> [u8; STATE_BYTES] {
        let mut out = [0u8; STATE_BYTES];
        for (chunk, lane) in out.chunks_exact_mut(8).zip(self.lanes.iter()) {
            chunk.copy_from_slice(&lane.to_le_bytes());
        }
        out
    }

    pub fn popcount(&self) -> u32 {
        self.lanes.iter().map(|l| l.count_ones()).sum()
    }
}

impl fmt::Debug for StateArray {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("StateArray[")?;
        for (i, lane) in self.lanes.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{lane:016x}")?;
        }
        f.write_str("]")
    }
}

/// Column parities `C[x,z]`, one 64-bit word per sheet `x` (bit `z`).
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default, Debug)]
pub struct CPlane {
    columns: [u64; 5],
}

impl CPlane {
    pub const BITS: usize = 320;

    pub const fn from_columns(columns: [u64; 5]) -> Self {
        CPlane { columns }
    }

    pub fn columns(&self) -> &[u64; 5] {
        &self.columns
    }

    pub fn bit(&self, x: usize, z: usize) -> bool {
        (self.columns[x] >> z) & 1 == 1
    }

    /// Flat index `64x + z`, used for fault targets in the shadow register.
    pub fn flip_bit(&mut self, index: usize) {
        assert!(index < Self::BITS, "c-plane bit {index} out of range");
        self.columns[index / LANE_BITS] ^= 1u64 << (index % LANE_BITS);
    }

    pub fn is_zero(&self) -> bool {
        self.columns.iter().all(|&c| c == 0)
    }

    pub fn is_all_ones(&self) -> bool {
        self.columns.iter().all(|&c| c == u64::MAX)
    }

    pub fn popcount(&self) -> u32 {
        self.columns.iter().map(|c| c.count_ones()).sum()
    }

    pub fn xor(&self, other: &CPlane) -> CPlane {
        let mut columns = self.columns;
        for (c, o) in columns.iter_mut().zip(other.columns.iter()) {
            *c ^= o;
        }
        CPlane { columns }
    }
}

/// Lane parities `F[x,y]`, bit `5y + x`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default, Debug)]
pub struct FSlice(u32);

impl FSlice {
    pub const BITS: usize = 25;
    const MASK: u32 = (1 << 25) - 1;

    pub const fn from_bits(bits: u32) -> Self {
        FSlice(bits & Self::MASK)
    }

    pub fn bits(&self) -> u32 {
        self.0
    }

    pub fn bit(&self, x: usize, y: usize) -> bool {
        (self.0 >> lane_index(x, y)) & 1 == 1
    }

    /// Flat index `5y + x`.
    pub fn flip_bit(&mut self, index: usize) {
        assert!(index < Self::BITS, "f-slice bit {index} out of range");
        self.0 ^= 1 << index;
    }

    pub fn is_zero(&self) -> bool {
        self.0 == 0
    }

    /// XOR over `y` of `F[x,y]`, bit `x` of the result.
    pub fn column_sums(&self) -> u8 {
        let mut sums = 0u8;
        for x in 0..5 {
            let mut parity = 0u32;
            for y in 0..5 {
                parity ^= (self.0 >> lane_index(x, y)) & 1;
            }
            sums |= (parity as u8) << x;
        }
        sums
    }
}

/// A validated round number, `0 <= i < 24`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct RoundIndex(u8);

impl RoundIndex {
    pub fn new(round: usize) -> Option<Self> {
        (round < ROUNDS).then_some(RoundIndex(round as u8))
    }

    pub fn get(self) -> usize {
        self.0 as usize
    }

    pub fn all() -> impl Iterator<Item = RoundIndex> {
        (0..ROUNDS as u8).map(RoundIndex)
    }
}

/// Iota constants produced by the degree-8 LFSR `x^8 + x^6 + x^5 + x^4 + 1`.
pub struct RoundConstants {
    rc: [u64; ROUNDS],
}

impl RoundConstants {
    fn generate() -> Self {
        let mut rc = [0u64; ROUNDS];
        for (i, word) in rc.iter_mut().enumerate() {
            for j in 0..=6 {
                if lfsr_bit(j + 7 * i) {
                    *word |= 1u64 << ((1usize << j) - 1);
                }
            }
        }
        RoundConstants { rc }
    }

    pub fn get(&self, round: RoundIndex) -> u64 {
        self.rc[round.get()]
    }

    pub fn as_array(&self) -> &[u64; ROUNDS] {
        &self.rc
    }
}

fn lfsr_bit(t: usize) -> bool {
    let steps = t % 255;
    let mut r: u16 = 1;
    for _ in 0..steps {
        r <<= 1;
        if r & 0x100 != 0 {
            r ^= 0x100 | 0x71;
        }
    }
    r & 1 == 1
}

fn rotation_offsets() -> [u32; 25] {
    let mut offsets = [0u32; 25];
    let (mut x, mut y) = (1usize, 0usize);
    for t in 0..24u32 {
        offsets[lane_index(x, y)] = ((t + 1) * (t + 2) / 2) % 64;
        (x, y) = (y, (2 * x + 3 * y) % 5);
    }
    offsets
}

static ROUND_CONSTANTS: LazyLock<RoundConstants> = LazyLock::new(RoundConstants::generate);
static RHO_OFFSETS: LazyLock<[u32; 25]> = LazyLock::new(rotation_offsets);

pub fn round_constants() -> &'static RoundConstants {
    &ROUND_CONSTANTS
}

/// The rho rotation amount for lane `(x, y)`.
pub fn rho_offset(x: usize, y: usize) -> u32 {
    RHO_OFFSETS[lane_index(x, y)]
}

/// Column-sum plane of `state`.
pub fn column_sums(state: &StateArray) -> CPlane {
    let l = &state.lanes;
    let mut columns = [0u64; 5];
    for (x, c) in columns.iter_mut().enumerate() {
        *c = l[x] ^ l[x + 5] ^ l[x + 10] ^ l[x + 15] ^ l[x + 20];
    }
    CPlane { columns }
}

/// Lane-sum slice of `state`.
pub fn lane_sums(state: &StateArray) -> FSlice {
    let mut bits = 0u32;
    for (i, lane) in state.lanes.iter().enumerate() {
        bits |= (lane.count_ones() & 1) << i;
    }
    FSlice(bits)
}

/// Both parity taps of `state`, as seen by the theta layer.
#[inline]
pub fn theta_taps(state: &StateArray) -> (CPlane, FSlice) {
    (column_sums(state), lane_sums(state))
}

/// Theta plus its taps: returns `(theta_out, C, F)` where `C` and `F` are the
/// column and lane sums of the input.
pub fn theta_layer(state: &StateArray) -> (StateArray, CPlane, FSlice) {
    let (c, f) = theta_taps(state);
    // D[x,z] = C[x-1,z] ^ C[x+1,z-1]
    let mut d = [0u64; 5];
    for (x, dx) in d.iter_mut().enumerate() {
        *dx = c.columns[(x + 4) % 5] ^ c.columns[(x + 1) % 5].rotate_left(1);
    }
    let mut out = *state;
    for (i, lane) in out.lanes.iter_mut().enumerate() {
        *lane ^= d[i % 5];
    }
    (out, c, f)
}

/// Rho (per-lane rotation) followed by pi (`(x,y) -> (y, 2x+3y)`).
pub fn rho_pi(state: &StateArray) -> StateArray {
    let mut out = [0u64; 25];
    for y in 0..5 {
        for x in 0..5 {
            let rotated = state.lane(x, y).rotate_left(rho_offset(x, y));
            out[lane_index(y, (2 * x + 3 * y) % 5)] = rotated;
        }
    }
    StateArray { lanes: out }
}

pub fn chi(state: &StateArray) -> StateArray {
    let a = &state.lanes;
    let mut out = [0u64; 25];
    for y in 0..5 {
        for x in 0..5 {
            out[lane_index(x, y)] = a[lane_index(x, y)]
                ^ (!a[lane_index((x + 1) % 5, y)] & a[lane_index((x + 2) % 5, y)]);
        }
    }
    StateArray { lanes: out }
}

pub fn iota(state: &StateArray, round: RoundIndex) -> StateArray {
    let mut out = *state;
    out.lanes[0] ^= round_constants().get(round);
    out
}

/// Result of one instrumented round.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RoundOutput {
    pub next: StateArray,
    /// Column sums of the round's input state.
    pub c_plane: CPlane,
    /// Lane sums of the round's input state.
    pub f_slice: FSlice,
}

pub fn round(state: &StateArray, round: RoundIndex) -> RoundOutput {
    let (theta_out, c_plane, f_slice) = theta_layer(state);
    let next = iota(&chi(&rho_pi(&theta_out)), round);
    RoundOutput {
        next,
        c_plane,
        f_slice,
    }
}

/// Keccak-f[1600]: 24 rounds.
pub fn permute(state: &StateArray) -> StateArray {
    RoundIndex::all().fold(*state, |s, i| round(&s, i).next)
}
