//! Redundant parity unit protecting the Keccak state register.
//!
//! On every register commit the unit is primed with the parities of the value
//! being written (`C'`, and for the z-sheet scheme also `F'` and the column
//! sums `C'_F'` of `F'`). At the next commit the theta taps of the stored
//! register are compared against those shadows. Any mismatch sets a sticky
//! error flag, which the engine turns into masked output.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fault_inject::{FaultPattern, Register};
use crate::keccak::{self, CPlane, FSlice, StateArray};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FdError {
    #[error("parity check requested before the shadow registers were primed")]
    NotPrimed,
    #[error("the c-plane scheme has no f-slice shadow register")]
    NoFSlice,
    #[error("unknown fault-detection scheme `{0}`")]
    UnknownScheme(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Scheme {
    /// Column parities only.
    #[serde(rename = "c-plane")]
    CPlane,
    /// Column and lane parities per sheet, with `F'` protected by its own column sums.
    #[serde(rename = "z-sheet")]
    ZSheet,
}

impl Scheme {
    pub const ALL: [Scheme; 2] = [Scheme::CPlane, Scheme::ZSheet];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::CPlane => "c-plane",
            Scheme::ZSheet => "z-sheet",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = FdError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "c-plane" | "cplane" => Ok(Scheme::CPlane),
            "z-sheet" | "zsheet" => Ok(Scheme::ZSheet),
            _ => Err(FdError::UnknownScheme(s.to_string())),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FdConfig {
    pub scheme: Scheme,
    pub attached: bool,
}

impl FdConfig {
    pub fn attached(scheme: Scheme) -> Self {
        FdConfig {
            scheme,
            attached: true,
        }
    }

    pub fn detached() -> Self {
        FdConfig {
            scheme: Scheme::CPlane,
            attached: false,
        }
    }

    pub fn from_option(scheme: Option<Scheme>) -> Self {
        scheme.map_or_else(Self::detached, Self::attached)
    }

    pub fn scheme(&self) -> Option<Scheme> {
        self.attached.then_some(self.scheme)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
struct ZSheetShadow {
    f_prime: FSlice,
    /// bit x = XOR over y of `f_prime[x,y]`
    cf_prime: u8,
}

/// Shadow parity registers of one engine instance.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FdRegisters {
    c_prime: CPlane,
    z_sheet: Option<ZSheetShadow>,
    primed: bool,
    error: bool,
}

impl FdRegisters {
    pub fn new(scheme: Scheme) -> Self {
        FdRegisters {
            c_prime: CPlane::default(),
            z_sheet: (scheme == Scheme::ZSheet).then(ZSheetShadow::default),
            primed: false,
            error: false,
        }
    }

    pub fn scheme(&self) -> Scheme {
        if self.z_sheet.is_some() {
            Scheme::ZSheet
        } else {
            Scheme::CPlane
        }
    }

    pub fn c_prime(&self) -> &CPlane {
        &self.c_prime
    }

    pub fn f_prime(&self) -> Option<FSlice> {
        self.z_sheet.map(|z| z.f_prime)
    }

    pub fn cf_prime(&self) -> Option<u8> {
        self.z_sheet.map(|z| z.cf_prime)
    }

    pub fn is_primed(&self) -> bool {
        self.primed
    }

    pub fn error(&self) -> bool {
        self.error
    }

    /// Latch the parities of the value being committed to the state register.
    pub fn prime(&mut self, s_next: &StateArray) {
        self.c_prime = keccak::column_sums(s_next);
        if let Some(z) = self.z_sheet.as_mut() {
            z.f_prime = keccak::lane_sums(s_next);
            z.cf_prime = z.f_prime.column_sums();
        }
        self.primed = true;
    }

    /// Stop comparing until the next prime; the register is about to change
    /// without passing through the round function.
    pub fn suspend(&mut self) {
        self.primed = false;
    }

    /// Compare the theta taps of the stored register against the shadows.
    ///
    /// Returns whether this comparison failed; the sticky flag accumulates it.
    pub fn check(&mut self, c: &CPlane, f: &FSlice) -> Result<bool, FdError> {
        if !self.primed {
            return Err(FdError::NotPrimed);
        }
        let mut mismatch = *c != self.c_prime;
        if let Some(z) = &self.z_sheet {
            mismatch |= *f != z.f_prime;
            mismatch |= z.f_prime.column_sums() != z.cf_prime;
        }
        self.error |= mismatch;
        Ok(mismatch)
    }

    /// Self-check of the `F'` register against `C'_F'`.
    pub fn check_fprime(&self) -> Result<bool, FdError> {
        let z = self.z_sheet.as_ref().ok_or(FdError::NoFSlice)?;
        Ok(z.f_prime.column_sums() != z.cf_prime)
    }

    /// Clears the error flag only. Output masking already latched by the
    /// engine is not affected.
    pub fn reset(&mut self) {
        self.error = false;
    }

    pub fn flip_c_prime(&mut self, bit: usize) {
        self.c_prime.flip_bit(bit);
    }

    pub fn flip_f_prime(&mut self, bit: usize) -> Result<(), FdError> {
        let z = self.z_sheet.as_mut().ok_or(FdError::NoFSlice)?;
        z.f_prime.flip_bit(bit);
        Ok(())
    }

    pub fn flip_cf_prime(&mut self, bit: usize) -> Result<(), FdError> {
        assert!(bit < 5, "C'_F' bit {bit} out of range");
        let z = self.z_sheet.as_mut().ok_or(FdError::NoFSlice)?;
        z.cf_prime ^= 1 << bit;
        Ok(())
    }
}

/// Output suppression latch of the engine.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OutputGate {
    masked: bool,
}

impl OutputGate {
    pub fn is_masked(&self) -> bool {
        self.masked
    }

    /// Gate one output byte.
    pub fn apply(&self, byte: u8) -> u8 {
        if self.masked {
            0
        } else {
            byte
        }
    }
}

/// Latch the mask once the detector has seen an error. The latch is never
/// released for the lifetime of the engine.
pub fn mask_output(gate: &mut OutputGate, fd: &FdRegisters) {
    gate.masked |= fd.error();
}

/// Per-register parity syndromes a fault pattern produces at the next check.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Syndrome {
    /// `C XOR C'`
    pub columns: [u64; 5],
    /// `F XOR F'`
    pub lanes: u32,
    /// `C_F' XOR C'_F'`
    pub f_columns: u8,
}

impl Syndrome {
    pub fn of(pattern: &FaultPattern) -> Self {
        let mut s = Syndrome::default();
        let mut f_prime_flips = FSlice::default();
        for t in pattern.targets() {
            match t.register {
                Register::State => {
                    let (x, y, z) = StateArray::coords(t.bit);
                    s.columns[x] ^= 1 << z;
                    s.lanes ^= 1 << (5 * y + x);
                }
                Register::CPrime => s.columns[t.bit / 64] ^= 1 << (t.bit % 64),
                Register::FPrime => {
                    s.lanes ^= 1 << t.bit;
                    f_prime_flips.flip_bit(t.bit);
                }
                Register::CfPrime => s.f_columns ^= 1 << t.bit,
            }
        }
        s.f_columns ^= f_prime_flips.column_sums();
        s
    }

    pub fn raises_error(&self, scheme: Scheme) -> bool {
        let columns = self.columns.iter().any(|&c| c != 0);
        match scheme {
            Scheme::CPlane => columns,
            Scheme::ZSheet => columns || self.lanes != 0 || self.f_columns != 0,
        }
    }
}

/// Closed-form detection verdict for a pattern injected between a prime and
/// the following check.
///
/// For state-register faults under z-sheet this is "some column or some lane
/// has odd flip count"; under c-plane only the columns count. Flips in
/// shadow registers are folded into the same syndromes. Targets in registers
/// the scheme does not have (`F'`, `C'_F'` under c-plane) contribute nothing.
pub fn detectability_predicate(pattern: &FaultPattern, scheme: Scheme) -> bool {
    Syndrome::of(pattern).raises_error(scheme)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fault_inject::FaultTarget;

    fn random_state(seed: u64) -> StateArray {
        let mut lanes = [0u64; 25];
        let mut x = seed | 1;
        for l in lanes.iter_mut() {
            x ^= x << 13;
            x ^= x >> 7;
            x ^= x << 17;
            *l = x;
        }
        StateArray::from_lanes(lanes)
    }

    /// Prime from `s`, apply `flips` to the stored register, check its taps.
    fn simulate(scheme: Scheme, s: &StateArray, flips: &[usize]) -> bool {
        let mut fd = FdRegisters::new(scheme);
        fd.prime(s);
        let mut stored = *s;
        for &b in flips {
            stored.flip_bit(b);
        }
        let (c, f) = keccak::theta_taps(&stored);
        fd.check(&c, &f).unwrap()
    }

    #[test]
    fn prime_examples() {
        let mut fd = FdRegisters::new(Scheme::ZSheet);
        fd.prime(&StateArray::zero());
        assert!(fd.c_prime().is_zero());
        assert_eq!(fd.f_prime(), Some(FSlice::default()));
        assert_eq!(fd.cf_prime(), Some(0));

        let mut s = StateArray::zero();
        s.set_bit(1, 2, 9, true);
        fd.prime(&s);
        assert_eq!(fd.c_prime().popcount(), 1);
        assert!(fd.c_prime().bit(1, 9));
        assert_eq!(fd.f_prime().unwrap().bits(), 1 << (5 * 2 + 1));
        assert_eq!(fd.cf_prime(), Some(1 << 1));

        let once = fd;
        fd.prime(&s);
        assert_eq!(fd, once);
    }

    #[test]
    fn c_plane_has_no_f_registers() {
        let fd = FdRegisters::new(Scheme::CPlane);
        assert!(fd.f_prime().is_none());
        assert!(fd.cf_prime().is_none());
        assert_eq!(fd.check_fprime(), Err(FdError::NoFSlice));
    }

    #[test]
    fn check_before_prime_is_rejected() {
        let mut fd = FdRegisters::new(Scheme::ZSheet);
        assert_eq!(
            fd.check(&CPlane::default(), &FSlice::default()),
            Err(FdError::NotPrimed)
        );
    }

    #[test]
    fn clean_register_passes() {
        for scheme in Scheme::ALL {
            let s = random_state(7);
            assert!(!simulate(scheme, &s, &[]));
        }
    }

    #[test]
    fn every_single_flip_is_detected() {
        let s = random_state(11);
        for scheme in Scheme::ALL {
            for b in 0..1600 {
                assert!(simulate(scheme, &s, &[b]), "{scheme} missed bit {b}");
            }
        }
    }

    #[test]
    fn same_column_pairs() {
        let s = random_state(3);
        let mut pairs = 0;
        for x in 0..5 {
            for z in 0..64 {
                for y1 in 0..5 {
                    for y2 in y1 + 1..5 {
                        let a = StateArray::linear_index(x, y1, z);
                        let b = StateArray::linear_index(x, y2, z);
                        assert!(!simulate(Scheme::CPlane, &s, &[a, b]));
                        assert!(simulate(Scheme::ZSheet, &s, &[a, b]));
                        pairs += 1;
                    }
                }
            }
        }
        assert_eq!(pairs, 3200);
    }

    #[test]
    fn error_flag_is_sticky() {
        let s = random_state(5);
        let mut fd = FdRegisters::new(Scheme::CPlane);
        fd.prime(&s);
        let mut bad = s;
        bad.flip_bit(100);
        let (c, f) = keccak::theta_taps(&bad);
        assert!(fd.check(&c, &f).unwrap());
        let (c, f) = keccak::theta_taps(&s);
        assert!(!fd.check(&c, &f).unwrap());
        assert!(fd.error());
        fd.reset();
        assert!(!fd.error());
    }

    #[test]
    fn check_fprime_examples() {
        let mut fd = FdRegisters::new(Scheme::ZSheet);
        fd.prime(&random_state(9));
        assert_eq!(fd.check_fprime(), Ok(false));

        for bit in 0..25 {
            let mut one = fd;
            one.flip_f_prime(bit).unwrap();
            assert_eq!(one.check_fprime(), Ok(true));
        }

        // All 300 unordered pairs: only same-column pairs escape.
        let mut same_column = 0;
        let mut pairs = 0;
        for a in 0..25 {
            for b in a + 1..25 {
                let mut two = fd;
                two.flip_f_prime(a).unwrap();
                two.flip_f_prime(b).unwrap();
                let escaped = !two.check_fprime().unwrap();
                assert_eq!(escaped, a % 5 == b % 5);
                same_column += usize::from(escaped);
                pairs += 1;
            }
        }
        assert_eq!(pairs, 300);
        assert_eq!(same_column, 5 * 10);
    }

    #[test]
    fn mask_output_latches() {
        let mut gate = OutputGate::default();
        let mut fd = FdRegisters::new(Scheme::ZSheet);
        mask_output(&mut gate, &fd);
        assert!(!gate.is_masked());
        assert_eq!(gate.apply(0xab), 0xab);

        fd.prime(&StateArray::zero());
        let mut c = CPlane::default();
        c.flip_bit(3);
        fd.check(&c, &FSlice::default()).unwrap();
        mask_output(&mut gate, &fd);
        assert!(gate.is_masked());
        assert_eq!(gate.apply(0xab), 0);

        fd.reset();
        mask_output(&mut gate, &fd);
        assert!(gate.is_masked());
    }

    #[test]
    fn predicate_examples() {
        let rect = FaultPattern::state_bits([
            StateArray::linear_index(0, 0, 0),
            StateArray::linear_index(0, 1, 0),
            StateArray::linear_index(0, 0, 1),
            StateArray::linear_index(0, 1, 1),
        ])
        .unwrap();
        assert!(!detectability_predicate(&rect, Scheme::ZSheet));
        assert!(!detectability_predicate(&rect, Scheme::CPlane));
        let s = random_state(1);
        let flips: Vec<usize> = rect.targets().map(|t| t.bit).collect();
        assert!(!simulate(Scheme::ZSheet, &s, &flips));

        let odd = FaultPattern::state_bits([1, 700, 1599]).unwrap();
        assert!(detectability_predicate(&odd, Scheme::CPlane));
    }

    #[test]
    fn shadow_register_flips_raise_errors() {
        let s = random_state(21);
        let mut fd = FdRegisters::new(Scheme::ZSheet);
        fd.prime(&s);
        let (c, f) = keccak::theta_taps(&s);

        let mut a = fd;
        a.flip_cf_prime(2).unwrap();
        assert!(a.check(&c, &f).unwrap());

        let pattern =
            FaultPattern::new(vec![FaultTarget::new(Register::CfPrime, 2).unwrap()]).unwrap();
        assert!(detectability_predicate(&pattern, Scheme::ZSheet));

        // A state flip cancelled by the matching C' flip escapes c-plane only.
        let pattern = FaultPattern::new(vec![
            FaultTarget::new(Register::State, StateArray::linear_index(2, 1, 30)).unwrap(),
            FaultTarget::new(Register::CPrime, 64 * 2 + 30).unwrap(),
        ])
        .unwrap();
        assert!(!detectability_predicate(&pattern, Scheme::CPlane));
        assert!(detectability_predicate(&pattern, Scheme::ZSheet));
    }
}
