//! Byte-serial engine model.
//!
//! Only `S[1343:0]` is writable from the data path. It behaves as a 168-byte
//! shift register: every absorbed (or squeezed) byte is XORed with `S[7:0]`
//! and re-enters at the most significant byte while the register shifts down
//! by one byte. After 168 shifts every byte is back at its position, so
//! message byte `i` of a block ends up XORed into state byte `i`. Modes with a
//! smaller rate shift in zero bytes for the remaining positions.

use crate::fault_detect::{mask_output, FdConfig, FdRegisters, OutputGate, Scheme};
use crate::keccak::{self, RoundIndex, StateArray, ROUNDS};

use super::mode::{mode_params, Mode, ModeConfig, SHIFT_RATE_BYTES};
use super::padding::{select_pad_byte, PadPosition};
use super::EngineError;

/// Number of rounds computed between two state-register commits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Unroll(u8);

impl Unroll {
    pub const SUPPORTED: [usize; 7] = [1, 2, 4, 6, 8, 12, 24];
    pub const ROUND_BASED: Unroll = Unroll(1);

    pub fn new(rounds: usize) -> Result<Self, EngineError> {
        if Self::SUPPORTED.contains(&rounds) {
            Ok(Unroll(rounds as u8))
        } else {
            Err(EngineError::UnsupportedUnroll(rounds))
        }
    }

    pub fn get(self) -> usize {
        self.0 as usize
    }

    /// Register commits per permutation.
    pub fn commits(self) -> usize {
        ROUNDS / self.get()
    }

    pub fn all() -> impl Iterator<Item = Unroll> {
        Self::SUPPORTED.iter().map(|&u| Unroll(u as u8))
    }
}

impl Default for Unroll {
    fn default() -> Self {
        Unroll::ROUND_BASED
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Phase {
    Absorbing,
    Padding,
    Permuting,
    Squeezing,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EngineOptions {
    pub unroll: Unroll,
    pub fd: Option<Scheme>,
}

impl EngineOptions {
    pub fn with_fd(scheme: Scheme) -> Self {
        EngineOptions {
            fd: Some(scheme),
            ..Default::default()
        }
    }

    pub fn unroll(mut self, unroll: Unroll) -> Self {
        self.unroll = unroll;
        self
    }
}

/// Identifies one state-register commit inside a hash run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CommitPoint {
    /// Permutation counter since the engine was created.
    pub permutation: usize,
    /// Commit index within the permutation, `0..unroll.commits()`.
    pub commit: usize,
    pub rounds_done: usize,
}

/// Observer invoked right after each commit (and the FD prime that goes with
/// it), before the committed value is checked. It may alter the registers,
/// which is how fault injection enters the model.
pub trait CommitHook {
    fn after_commit(
        &mut self,
        point: CommitPoint,
        state: &mut StateArray,
        fd: Option<&mut FdRegisters>,
    );
}

#[derive(Clone, Copy, Debug, Default)]
pub struct NoHook;

impl CommitHook for NoHook {
    fn after_commit(&mut self, _: CommitPoint, _: &mut StateArray, _: Option<&mut FdRegisters>) {}
}

/// Event counters, mostly for schedule tests.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EngineStats {
    pub permutations: usize,
    pub commits: usize,
    pub primes: usize,
    pub checks: usize,
}

/// One output byte together with the masking status it was produced under.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OutputByte {
    pub value: u8,
    pub masked: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HashOutput {
    pub digest: Vec<u8>,
    /// The fault detector fired; `digest` is all zero.
    pub masked: bool,
    pub cycles: u64,
    pub stats: EngineStats,
}

pub struct Engine<H: CommitHook = NoHook> {
    config: ModeConfig,
    unroll: Unroll,
    state: StateArray,
    ratecount: usize,
    phase: Phase,
    round_idx: usize,
    cycles: u64,
    gate: OutputGate,
    fd: Option<FdRegisters>,
    stats: EngineStats,
    hook: H,
}

impl Engine<NoHook> {
    pub fn new(mode: Mode, options: EngineOptions) -> Self {
        Engine::with_hook(mode, options, NoHook)
    }
}

impl<H: CommitHook> Engine<H> {
    pub fn with_hook(mode: Mode, options: EngineOptions, hook: H) -> Self {
        Engine {
            config: mode_params(mode),
            unroll: options.unroll,
            state: StateArray::zero(),
            ratecount: 0,
            phase: Phase::Absorbing,
            round_idx: 0,
            cycles: 0,
            gate: OutputGate::default(),
            fd: options.fd.map(FdRegisters::new),
            stats: EngineStats::default(),
            hook,
        }
    }

    pub fn config(&self) -> &ModeConfig {
        &self.config
    }

    pub fn fd_config(&self) -> FdConfig {
        FdConfig::from_option(self.fd.as_ref().map(FdRegisters::scheme))
    }

    pub fn unroll(&self) -> Unroll {
        self.unroll
    }

    pub fn state(&self) -> &StateArray {
        &self.state
    }

    pub fn ratecount(&self) -> usize {
        self.ratecount
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn round_idx(&self) -> usize {
        self.round_idx
    }

    pub fn cycles(&self) -> u64 {
        self.cycles
    }

    pub fn masked(&self) -> bool {
        self.gate.is_masked()
    }

    pub fn fd(&self) -> Option<&FdRegisters> {
        self.fd.as_ref()
    }

    pub fn stats(&self) -> EngineStats {
        self.stats
    }

    pub fn hook(&self) -> &H {
        &self.hook
    }

    pub fn into_hook(self) -> H {
        self.hook
    }

    /// One cycle of the rate shift register:
    /// `S'[1343:0] = (input ^ S[7:0]) || (S[1343:0] >> 8)`. Returns `S[7:0]`.
    fn shift(&mut self, input: u8) -> u8 {
        const TOP: usize = SHIFT_RATE_BYTES / 8 - 1;
        let lanes = self.state.lanes_mut();
        let out = lanes[0] as u8;
        for i in 0..TOP {
            lanes[i] = (lanes[i] >> 8) | (lanes[i + 1] << 56);
        }
        lanes[TOP] = (lanes[TOP] >> 8) | (u64::from(input ^ out) << 56);
        self.ratecount += 1;
        self.cycles += 1;
        out
    }

    /// XOR `byte` into the rate through the shift register.
    pub fn absorb_byte(&mut self, byte: u8) -> Result<(), EngineError> {
        if !matches!(self.phase, Phase::Absorbing | Phase::Padding) {
            return Err(EngineError::Contract(format!(
                "absorb_byte in phase {:?}",
                self.phase
            )));
        }
        if self.ratecount >= self.config.rate_bytes() {
            return Err(EngineError::Contract(
                "mode block is full; zero-fill and permute first".into(),
            ));
        }
        self.shift(byte);
        Ok(())
    }

    /// Rotate the capacity-extension bytes through with zero input, bringing
    /// `ratecount` to 168.
    pub fn absorb_zero_fill(&mut self) -> Result<(), EngineError> {
        if self.ratecount != self.config.rate_bytes() {
            return Err(EngineError::Contract(format!(
                "zero fill at ratecount {} (mode block is {} bytes)",
                self.ratecount,
                self.config.rate_bytes()
            )));
        }
        while self.ratecount < SHIFT_RATE_BYTES {
            self.shift(0);
        }
        Ok(())
    }

    fn fd_check(&mut self, c: &keccak::CPlane, f: &keccak::FSlice) {
        if let Some(fd) = self.fd.as_mut().filter(|fd| fd.is_primed()) {
            fd.check(c, f).expect("checked only when primed");
            self.stats.checks += 1;
            mask_output(&mut self.gate, fd);
        }
    }

    /// Keccak-f over the register, committing every `unroll` rounds.
    ///
    /// The FD unit is primed by each commit and checked against the theta
    /// taps of the first round of the next step. The last commit is checked
    /// on the following cycle, before the register shifts again. Absorb and
    /// squeeze shifting bypass the FD unit, so it starts each permutation
    /// unprimed.
    pub fn run_permutation(&mut self) -> Result<(), EngineError> {
        if self.ratecount != SHIFT_RATE_BYTES {
            return Err(EngineError::Contract(format!(
                "permutation started at ratecount {}",
                self.ratecount
            )));
        }
        let resume = match self.phase {
            Phase::Padding | Phase::Squeezing => Phase::Squeezing,
            _ => Phase::Absorbing,
        };
        self.phase = Phase::Permuting;
        if let Some(fd) = self.fd.as_mut() {
            fd.suspend();
        }
        let permutation = self.stats.permutations;
        let per_commit = self.unroll.get();

        for commit in 0..self.unroll.commits() {
            let mut s = self.state;
            for r in 0..per_commit {
                self.round_idx = commit * per_commit + r;
                let round = RoundIndex::new(self.round_idx).expect("round < 24");
                let out = keccak::round(&s, round);
                if r == 0 {
                    self.fd_check(&out.c_plane, &out.f_slice);
                }
                s = out.next;
            }
            self.state = s;
            self.cycles += 1;
            self.stats.commits += 1;
            if let Some(fd) = self.fd.as_mut() {
                fd.prime(&s);
                self.stats.primes += 1;
            }
            let point = CommitPoint {
                permutation,
                commit,
                rounds_done: (commit + 1) * per_commit,
            };
            self.hook
                .after_commit(point, &mut self.state, self.fd.as_mut());
        }

        let (c, f) = keccak::theta_taps(&self.state);
        self.fd_check(&c, &f);
        if let Some(fd) = self.fd.as_mut() {
            fd.suspend();
        }

        self.stats.permutations += 1;
        self.ratecount = 0;
        self.round_idx = 0;
        self.phase = resume;
        Ok(())
    }

    /// Absorb message bytes, permuting after every full mode block.
    pub fn absorb(&mut self, data: &[u8]) -> Result<(), EngineError> {
        if self.phase != Phase::Absorbing {
            return Err(EngineError::Contract(format!(
                "absorb in phase {:?}",
                self.phase
            )));
        }
        for &b in data {
            self.absorb_byte(b)?;
            if self.ratecount == self.config.rate_bytes() {
                self.absorb_zero_fill()?;
                self.run_permutation()?;
            }
        }
        Ok(())
    }

    /// Pad the last block through the padding mux and switch to squeezing.
    pub fn finalize(&mut self) -> Result<(), EngineError> {
        if self.phase != Phase::Absorbing {
            return Err(EngineError::Contract(format!(
                "finalize in phase {:?}",
                self.phase
            )));
        }
        self.phase = Phase::Padding;
        let pad_len = self.config.rate_bytes() - self.ratecount;
        for i in 0..pad_len {
            let byte = select_pad_byte(PadPosition::of(i, pad_len), self.config.domain);
            self.absorb_byte(byte)?;
        }
        self.absorb_zero_fill()?;
        self.run_permutation()
    }

    /// Emit `S[7:0]` and shift a zero byte in. Refreshes the state with a
    /// permutation once a whole mode block has been emitted.
    pub fn squeeze_byte(&mut self) -> Result<OutputByte, EngineError> {
        if self.phase != Phase::Squeezing {
            return Err(EngineError::Contract(format!(
                "squeeze in phase {:?}",
                self.phase
            )));
        }
        if self.ratecount == self.config.rate_bytes() {
            self.absorb_zero_fill()?;
            self.run_permutation()?;
        }
        let raw = self.shift(0);
        Ok(OutputByte {
            value: self.gate.apply(raw),
            masked: self.gate.is_masked(),
        })
    }

    pub fn squeeze(&mut self, n: usize) -> Result<Vec<u8>, EngineError> {
        (0..n)
            .map(|_| self.squeeze_byte().map(|b| b.value))
            .collect()
    }
}

/// Checks `out_len` against the mode and returns it.
pub fn validate_output_len(mode: Mode, out_len: usize) -> Result<usize, EngineError> {
    let cfg = mode_params(mode);
    match cfg.digest_bytes() {
        Some(d) if d != out_len => Err(EngineError::OutputLength {
            mode,
            requested: out_len,
        }),
        None if out_len == 0 => Err(EngineError::OutputLength {
            mode,
            requested: out_len,
        }),
        _ => Ok(out_len),
    }
}

/// Full hash through an engine carrying `hook`; returns the output and the hook.
pub fn hash_with_hook<H: CommitHook>(
    mode: Mode,
    message: &[u8],
    out_len: usize,
    options: EngineOptions,
    hook: H,
) -> Result<(HashOutput, H), EngineError> {
    validate_output_len(mode, out_len)?;
    let mut engine = Engine::with_hook(mode, options, hook);
    engine.absorb(message)?;
    engine.finalize()?;
    let digest = engine.squeeze(out_len)?;
    let output = HashOutput {
        digest,
        masked: engine.masked(),
        cycles: engine.cycles(),
        stats: engine.stats(),
    };
    Ok((output, engine.into_hook()))
}

pub fn hash_with(
    mode: Mode,
    message: &[u8],
    out_len: usize,
    options: EngineOptions,
) -> Result<HashOutput, EngineError> {
    hash_with_hook(mode, message, out_len, options, NoHook).map(|(o, _)| o)
}

/// Plain SHA-3/SHAKE digest through the round-based engine without FD.
pub fn hash(mode: Mode, message: &[u8], out_len: usize) -> Result<Vec<u8>, EngineError> {
    hash_with(mode, message, out_len, EngineOptions::default()).map(|o| o.digest)
}
