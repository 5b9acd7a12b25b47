//! Register-level fault models and detection campaigns.
//!
//! The fault model is a transient bit flip in a storage element, applied
//! after a state-register commit (and the FD prime that accompanies it) and
//! before the committed value is checked.

mod campaign;
mod census;
mod sim;
mod stats;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fault_detect::FdError;
use crate::keccak::{CPlane, FSlice, STATE_BITS};
use crate::sponge::EngineError;

pub use campaign::{
    monte_carlo_rate, run_campaign, run_campaign_with_workers, worker_count, CampaignReport,
    CampaignSpec, MonteCarloEstimate, Scope, Strategy, DEFAULT_PATTERN_BUDGET, WORKERS_ENV,
};
pub use census::{sheet_undetected_counts, undetected_census, Census, CENSUS_MAX_K, MAX_WITNESSES};
pub use sim::{
    check_targets, inject_and_run, HashJob, InjectionRun, Injector, Outcome, RegisterHarness,
    Verdict,
};
pub use stats::{binomial, wilson_interval};

#[derive(Debug, Error)]
pub enum CampaignError {
    #[error("invalid campaign: {0}")]
    InvalidSpec(String),
    #[error("{patterns} patterns exceed the enumeration budget of {budget}")]
    BudgetExceeded { patterns: u128, budget: u128 },
    #[error("invalid fault target: {0}")]
    InvalidTarget(String),
    #[error("injection schedule {0:?} does not occur in this run")]
    ScheduleOutOfRange(InjectionSchedule),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Detector(#[from] FdError),
}

/// Storage elements that can be hit by a fault.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Register {
    State,
    CPrime,
    FPrime,
    CfPrime,
}

impl Register {
    pub fn width(self) -> usize {
        match self {
            Register::State => STATE_BITS,
            Register::CPrime => CPlane::BITS,
            Register::FPrime => FSlice::BITS,
            Register::CfPrime => 5,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Register::State => "state",
            Register::CPrime => "c-prime",
            Register::FPrime => "f-prime",
            Register::CfPrime => "cf-prime",
        }
    }
}

impl fmt::Display for Register {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One bit of one register. State bits use the linear `(x,y,z)` index,
/// `C'` bits are `64x + z`, `F'` bits are `5y + x`, `C'_F'` bits are `x`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FaultTarget {
    pub register: Register,
    pub bit: usize,
}

impl FaultTarget {
    pub fn new(register: Register, bit: usize) -> Result<Self, CampaignError> {
        if bit >= register.width() {
            return Err(CampaignError::InvalidTarget(format!(
                "bit {bit} outside the {}-bit {register} register",
                register.width()
            )));
        }
        Ok(FaultTarget { register, bit })
    }

    pub fn state(bit: usize) -> Result<Self, CampaignError> {
        Self::new(Register::State, bit)
    }
}

impl fmt::Display for FaultTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.register, self.bit)
    }
}

impl FromStr for FaultTarget {
    type Err = CampaignError;

    /// `state:17`, `c-prime:3`, ... or a bare number for a state bit.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || CampaignError::InvalidTarget(s.to_string());
        let (reg, bit) = match s.split_once(':') {
            Some((r, b)) => (r, b),
            None => ("state", s),
        };
        let register = match reg {
            "state" | "s" => Register::State,
            "c-prime" => Register::CPrime,
            "f-prime" => Register::FPrime,
            "cf-prime" => Register::CfPrime,
            _ => return Err(bad()),
        };
        FaultTarget::new(register, bit.trim().parse().map_err(|_| bad())?)
    }
}

/// A set of distinct bit flips, kept sorted.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FaultPattern {
    flips: Vec<FaultTarget>,
}

impl FaultPattern {
    /// Rejects empty and duplicate-containing target lists.
    pub fn new(mut flips: Vec<FaultTarget>) -> Result<Self, CampaignError> {
        if flips.is_empty() {
            return Err(CampaignError::InvalidTarget("empty fault pattern".into()));
        }
        flips.sort_unstable();
        if flips.windows(2).any(|w| w[0] == w[1]) {
            return Err(CampaignError::InvalidTarget(
                "fault pattern flips the same bit twice".into(),
            ));
        }
        Ok(FaultPattern { flips })
    }

    pub fn state_bits<I: IntoIterator<Item = usize>>(bits: I) -> Result<Self, CampaignError> {
        Self::new(
            bits.into_iter()
                .map(FaultTarget::state)
                .collect::<Result<_, _>>()?,
        )
    }

    /// The fault-free control pattern.
    pub fn empty() -> Self {
        FaultPattern { flips: Vec::new() }
    }

    pub fn k(&self) -> usize {
        self.flips.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flips.is_empty()
    }

    pub fn targets(&self) -> impl Iterator<Item = &FaultTarget> + '_ {
        self.flips.iter()
    }

    pub fn as_slice(&self) -> &[FaultTarget] {
        &self.flips
    }

    pub fn touches_state(&self) -> bool {
        self.flips.iter().any(|t| t.register == Register::State)
    }

    pub fn union(&self, other: &FaultPattern) -> Result<FaultPattern, CampaignError> {
        let mut flips = self.flips.clone();
        flips.extend_from_slice(&other.flips);
        FaultPattern::new(flips)
    }
}

/// Which register commit receives the flips.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct InjectionSchedule {
    /// Permutation counter within the hash run.
    pub permutation: usize,
    /// Commit within that permutation, `0..24/unroll`.
    pub commit: usize,
}
