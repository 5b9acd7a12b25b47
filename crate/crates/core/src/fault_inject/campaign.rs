use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::{seq::index, Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::census::{undetected_census, CENSUS_MAX_K, MAX_WITNESSES};
use super::sim::{HashJob, RegisterHarness, Verdict};
use super::stats::{binomial, wilson_interval};
use super::{CampaignError, FaultPattern, FaultTarget, Register};
use crate::fault_detect::Scheme;
use crate::keccak::{CPlane, FSlice, StateArray, STATE_BITS};
use crate::sponge::{Mode, Unroll};

/// Environment variable selecting the campaign worker count.
pub const WORKERS_ENV: &str = "KECCAK_FD_WORKERS";
pub const DEFAULT_PATTERN_BUDGET: u128 = 1_000_000_000;

const SHEET_BITS: usize = 320;
const RANDOM_BLOCK: u64 = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    /// Every k-subset of one sheet's 320 state bits.
    ExhaustiveSheet,
    /// Every k-subset of all eligible bits.
    ExhaustiveGlobal,
    /// Uniform k-subsets of the eligible bits.
    Random,
}

impl Strategy {
    pub fn name(self) -> &'static str {
        match self {
            Strategy::ExhaustiveSheet => "exhaustive-sheet",
            Strategy::ExhaustiveGlobal => "exhaustive-global",
            Strategy::Random => "random",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = CampaignError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exhaustive-sheet" => Ok(Strategy::ExhaustiveSheet),
            "exhaustive-global" => Ok(Strategy::ExhaustiveGlobal),
            "random" => Ok(Strategy::Random),
            _ => Err(CampaignError::InvalidSpec(format!(
                "unknown strategy `{s}`"
            ))),
        }
    }
}

/// Registers whose bits are fault-eligible.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scope {
    #[default]
    State,
    /// State plus every shadow register the scheme has.
    AllRegisters,
}

impl FromStr for Scope {
    type Err = CampaignError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "state" => Ok(Scope::State),
            "all" | "all-registers" => Ok(Scope::AllRegisters),
            _ => Err(CampaignError::InvalidSpec(format!("unknown scope `{s}`"))),
        }
    }
}

impl Scope {
    fn registers(self, scheme: Scheme) -> &'static [Register] {
        match (self, scheme) {
            (Scope::State, _) => &[Register::State],
            (Scope::AllRegisters, Scheme::CPlane) => &[Register::State, Register::CPrime],
            (Scope::AllRegisters, Scheme::ZSheet) => &[
                Register::State,
                Register::CPrime,
                Register::FPrime,
                Register::CfPrime,
            ],
        }
    }

    fn eligible_bits(self, scheme: Scheme) -> usize {
        self.registers(scheme).iter().map(|r| r.width()).sum()
    }
}

/// Flat index over the eligible registers, in declaration order.
fn eligible_target(index: usize) -> FaultTarget {
    const C_END: usize = STATE_BITS + CPlane::BITS;
    const F_END: usize = C_END + FSlice::BITS;
    let (register, bit) = match index {
        i if i < STATE_BITS => (Register::State, i),
        i if i < C_END => (Register::CPrime, i - STATE_BITS),
        i if i < F_END => (Register::FPrime, i - C_END),
        i => (Register::CfPrime, i - F_END),
    };
    FaultTarget { register, bit }
}

fn sheet_target(sheet: usize, index: usize) -> FaultTarget {
    FaultTarget {
        register: Register::State,
        bit: StateArray::linear_index(sheet, index / 64, index % 64),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CampaignSpec {
    pub scheme: Scheme,
    pub unroll: usize,
    pub k: usize,
    pub strategy: Strategy,
    /// Random strategy only.
    pub trials: u64,
    pub seed: u64,
    pub scope: Scope,
    /// Exhaustive-sheet strategy only.
    pub sheet: usize,
    /// Commit (index into the golden run's commits) hit by exhaustive
    /// strategies. Random campaigns draw a commit per trial.
    pub commit: usize,
    /// Permit global enumeration for k >= 3 (audit runs).
    pub allow_large_global: bool,
    pub budget: u128,
}

impl CampaignSpec {
    pub fn new(scheme: Scheme, k: usize, strategy: Strategy) -> Self {
        CampaignSpec {
            scheme,
            unroll: 1,
            k,
            strategy,
            trials: 10_000,
            seed: 0,
            scope: Scope::State,
            sheet: 0,
            commit: 0,
            allow_large_global: false,
            budget: DEFAULT_PATTERN_BUDGET,
        }
    }

    pub fn trials(mut self, trials: u64) -> Self {
        self.trials = trials;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn unroll(mut self, unroll: usize) -> Self {
        self.unroll = unroll;
        self
    }

    pub fn sheet(mut self, sheet: usize) -> Self {
        self.sheet = sheet;
        self
    }

    pub fn scope(mut self, scope: Scope) -> Self {
        self.scope = scope;
        self
    }

    pub fn commit(mut self, commit: usize) -> Self {
        self.commit = commit;
        self
    }

    /// Number of patterns the campaign will evaluate.
    pub fn pattern_count(&self) -> Result<u128, CampaignError> {
        self.validate()?;
        Ok(self.count_unchecked())
    }

    fn count_unchecked(&self) -> u128 {
        let k = self.k as u128;
        match self.strategy {
            Strategy::ExhaustiveSheet => binomial(SHEET_BITS as u128, k).unwrap_or(u128::MAX),
            Strategy::ExhaustiveGlobal => {
                binomial(self.scope.eligible_bits(self.scheme) as u128, k).unwrap_or(u128::MAX)
            }
            Strategy::Random => self.trials as u128,
        }
    }

    fn validate(&self) -> Result<Unroll, CampaignError> {
        let invalid = |m: String| Err(CampaignError::InvalidSpec(m));
        let unroll = Unroll::new(self.unroll)?;
        if self.k == 0 {
            return invalid("k must be at least 1".into());
        }
        let eligible = self.scope.eligible_bits(self.scheme);
        match self.strategy {
            Strategy::ExhaustiveSheet => {
                if self.scope != Scope::State {
                    return invalid("exhaustive-sheet enumerates state bits only".into());
                }
                if self.sheet >= 5 {
                    return invalid(format!("sheet {} out of range", self.sheet));
                }
                if self.k > SHEET_BITS {
                    return invalid(format!("k = {} exceeds the sheet size", self.k));
                }
            }
            Strategy::ExhaustiveGlobal => {
                if self.k > 2 && !self.allow_large_global {
                    return invalid(
                        "exhaustive-global is limited to k <= 2 unless explicitly enabled".into(),
                    );
                }
                if self.k > eligible {
                    return invalid(format!("k = {} exceeds {eligible} eligible bits", self.k));
                }
            }
            Strategy::Random => {
                if self.trials == 0 {
                    return invalid("random campaigns need at least one trial".into());
                }
                if self.k > eligible {
                    return invalid(format!("k = {} exceeds {eligible} eligible bits", self.k));
                }
            }
        }
        if self.strategy != Strategy::Random {
            let patterns = self.count_unchecked();
            if patterns > self.budget {
                return Err(CampaignError::BudgetExceeded {
                    patterns,
                    budget: self.budget,
                });
            }
        }
        Ok(unroll)
    }

    fn golden_job(&self, unroll: Unroll) -> HashJob {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let message: Vec<u8> = (0..64).map(|_| rng.random()).collect();
        HashJob::new(Mode::Sha3_256, message, 32).unroll(unroll)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CampaignReport {
    pub scheme: Scheme,
    pub unroll: usize,
    pub k: usize,
    pub strategy: Strategy,
    pub scope: Scope,
    pub total: u64,
    pub detected: u64,
    pub undetected: u64,
    pub spurious: u64,
    /// `detected / total`
    pub rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub seed: u64,
    pub witnesses: Vec<FaultPattern>,
    /// Exact undetected fraction over all `k`-flip state patterns, from the census.
    pub census_undetected_fraction: Option<f64>,
    #[serde(skip)]
    pub wall_time: Duration,
}

#[derive(Clone, Debug, Default)]
struct Tally {
    total: u64,
    detected: u64,
    undetected: u64,
    spurious: u64,
    witnesses: Vec<FaultPattern>,
}

impl Tally {
    fn record(&mut self, verdict: Verdict, targets: &[FaultTarget]) {
        self.total += 1;
        match verdict {
            Verdict::Detected => self.detected += 1,
            Verdict::Spurious => self.spurious += 1,
            Verdict::Undetected => {
                self.undetected += 1;
                if self.witnesses.len() < MAX_WITNESSES {
                    self.witnesses
                        .push(FaultPattern::new(targets.to_vec()).expect("distinct targets"));
                }
            }
        }
    }

    /// `self` precedes `later` in enumeration order.
    fn merge(mut self, later: Tally) -> Tally {
        self.total += later.total;
        self.detected += later.detected;
        self.undetected += later.undetected;
        self.spurious += later.spurious;
        let room = MAX_WITNESSES - self.witnesses.len();
        self.witnesses
            .extend(later.witnesses.into_iter().take(room));
        self
    }
}

/// Worker count from `KECCAK_FD_WORKERS`, else the available parallelism.
pub fn worker_count() -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .filter(|&n: &usize| n > 0)
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        })
}

pub fn run_campaign(spec: &CampaignSpec) -> Result<CampaignReport, CampaignError> {
    run_campaign_with_workers(spec, worker_count())
}

/// Like [`run_campaign`] with an explicit worker count. The report does not
/// depend on `workers`.
pub fn run_campaign_with_workers(
    spec: &CampaignSpec,
    workers: usize,
) -> Result<CampaignReport, CampaignError> {
    let unroll = spec.validate()?;
    let started = Instant::now();
    let harness = RegisterHarness::capture(&spec.golden_job(unroll), spec.scheme)?;
    if spec.strategy != Strategy::Random && spec.commit >= harness.commit_count() {
        return Err(CampaignError::InvalidSpec(format!(
            "commit {} outside the {} commits of the golden run",
            spec.commit,
            harness.commit_count()
        )));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| CampaignError::InvalidSpec(format!("worker pool: {e}")))?;

    let tally = pool.install(|| match spec.strategy {
        Strategy::ExhaustiveSheet => enumerate(
            SHEET_BITS,
            spec.k,
            |i| sheet_target(spec.sheet, i),
            |t| harness.evaluate(spec.commit, t),
        ),
        Strategy::ExhaustiveGlobal => enumerate(
            spec.scope.eligible_bits(spec.scheme),
            spec.k,
            eligible_target,
            |t| harness.evaluate(spec.commit, t),
        ),
        Strategy::Random => sample(spec, &harness),
    });

    let (ci_low, ci_high) = wilson_interval(tally.detected, tally.total);
    let census_undetected_fraction = (spec.scope == Scope::State && spec.k <= CENSUS_MAX_K)
        .then(|| undetected_census(spec.k, spec.scheme).map(|c| c.undetected_fraction))
        .transpose()?;
    Ok(CampaignReport {
        scheme: spec.scheme,
        unroll: spec.unroll,
        k: spec.k,
        strategy: spec.strategy,
        scope: spec.scope,
        total: tally.total,
        detected: tally.detected,
        undetected: tally.undetected,
        spurious: tally.spurious,
        rate: tally.detected as f64 / tally.total as f64,
        ci_low,
        ci_high,
        seed: spec.seed,
        witnesses: tally.witnesses,
        census_undetected_fraction,
        wall_time: started.elapsed(),
    })
}

/// All k-subsets of `0..n` in lexicographic order, split by first element.
fn enumerate<M, E>(n: usize, k: usize, map: M, eval: E) -> Tally
where
    M: Fn(usize) -> FaultTarget + Sync,
    E: Fn(&[FaultTarget]) -> Verdict + Sync,
{
    (0..=n - k)
        .into_par_iter()
        .map(|first| {
            let mut tally = Tally::default();
            let mut idx: Vec<usize> = (0..k).map(|j| first + j).collect();
            let mut targets: Vec<FaultTarget> = idx.iter().map(|&i| map(i)).collect();
            loop {
                tally.record(eval(&targets), &targets);
                // advance positions 1..k, leaving the first element fixed
                let mut pos = k;
                loop {
                    if pos <= 1 {
                        return tally;
                    }
                    pos -= 1;
                    if idx[pos] < n - (k - pos) {
                        break;
                    }
                }
                idx[pos] += 1;
                for j in pos + 1..k {
                    idx[j] = idx[j - 1] + 1;
                }
                for j in pos..k {
                    targets[j] = map(idx[j]);
                }
            }
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(Tally::default(), Tally::merge)
}

fn sample(spec: &CampaignSpec, harness: &RegisterHarness) -> Tally {
    let eligible = spec.scope.eligible_bits(spec.scheme);
    let commits = harness.commit_count();
    let blocks = spec.trials.div_ceil(RANDOM_BLOCK);
    (0..blocks)
        .into_par_iter()
        .map(|block| {
            // separate streams so the pattern sequence does not depend on the
            // number of commits (and therefore on the unroll factor)
            let mut patterns = ChaCha8Rng::seed_from_u64(spec.seed);
            patterns.set_stream(2 * block);
            let mut schedule = ChaCha8Rng::seed_from_u64(spec.seed);
            schedule.set_stream(2 * block + 1);
            let n = RANDOM_BLOCK.min(spec.trials - block * RANDOM_BLOCK);
            let mut tally = Tally::default();
            let mut targets = Vec::with_capacity(spec.k);
            for _ in 0..n {
                targets.clear();
                targets.extend(
                    index::sample(&mut patterns, eligible, spec.k)
                        .into_iter()
                        .map(eligible_target),
                );
                targets.sort_unstable();
                let commit = schedule.random_range(0..commits);
                tally.record(harness.evaluate(commit, &targets), &targets);
            }
            tally
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(Tally::default(), Tally::merge)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonteCarloEstimate {
    pub k: usize,
    pub scheme: Scheme,
    pub trials: u64,
    pub undetected: u64,
    pub rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub seed: u64,
    /// Exact value from the census, which sampling at this size cannot resolve.
    pub census_undetected_fraction: Option<f64>,
}

/// Detection rate of random `k`-flip state-register faults with a 95% Wilson interval.
pub fn monte_carlo_rate(
    k: usize,
    trials: u64,
    seed: u64,
    scheme: Scheme,
) -> Result<MonteCarloEstimate, CampaignError> {
    if trials < 10_000 {
        return Err(CampaignError::InvalidSpec(format!(
            "Monte Carlo estimates need at least 10^4 trials, got {trials}"
        )));
    }
    let spec = CampaignSpec::new(scheme, k, Strategy::Random)
        .trials(trials)
        .seed(seed);
    let r = run_campaign(&spec)?;
    Ok(MonteCarloEstimate {
        k,
        scheme,
        trials,
        undetected: r.undetected,
        rate: r.rate,
        ci_low: r.ci_low,
        ci_high: r.ci_high,
        seed,
        census_undetected_fraction: r.census_undetected_fraction,
    })
}
