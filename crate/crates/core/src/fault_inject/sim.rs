use serde::{Deserialize, Serialize};

use super::{CampaignError, FaultPattern, FaultTarget, InjectionSchedule, Register};
use crate::fault_detect::{FdRegisters, Scheme};
use crate::keccak::{self, StateArray};
use crate::sponge::{
    hash_with, hash_with_hook, CommitHook, CommitPoint, EngineOptions, Mode, Unroll,
};

/// A complete hash invocation used as the carrier of injected faults.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HashJob {
    pub mode: Mode,
    pub message: Vec<u8>,
    pub out_len: usize,
    pub unroll: Unroll,
}

impl HashJob {
    pub fn new(mode: Mode, message: impl Into<Vec<u8>>, out_len: usize) -> Self {
        HashJob {
            mode,
            message: message.into(),
            out_len,
            unroll: Unroll::default(),
        }
    }

    pub fn unroll(mut self, unroll: Unroll) -> Self {
        self.unroll = unroll;
        self
    }

    fn options(&self, fd: Option<Scheme>) -> EngineOptions {
        EngineOptions {
            unroll: self.unroll,
            fd,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    /// The error signal was raised and the digest would have been wrong.
    Detected,
    /// No error, wrong digest.
    SilentCorruption,
    /// No error, correct digest.
    Benign,
    /// The error signal was raised although the digest would have been correct.
    SpuriousError,
}

/// Applies a fault pattern at one scheduled commit.
#[derive(Clone, Debug)]
pub struct Injector {
    schedule: InjectionSchedule,
    pattern: FaultPattern,
    applied: bool,
}

impl Injector {
    pub fn new(schedule: InjectionSchedule, pattern: FaultPattern) -> Self {
        Injector {
            schedule,
            pattern,
            applied: false,
        }
    }

    pub fn applied(&self) -> bool {
        self.applied
    }
}

fn apply_flips(
    targets: &[FaultTarget],
    state: &mut StateArray,
    mut fd: Option<&mut FdRegisters>,
) -> Result<(), CampaignError> {
    for t in targets {
        match (t.register, fd.as_deref_mut()) {
            (Register::State, _) => state.flip_bit(t.bit),
            // without a detector the shadow registers do not exist
            (_, None) => {}
            (Register::CPrime, Some(fd)) => fd.flip_c_prime(t.bit),
            (Register::FPrime, Some(fd)) => fd.flip_f_prime(t.bit)?,
            (Register::CfPrime, Some(fd)) => fd.flip_cf_prime(t.bit)?,
        }
    }
    Ok(())
}

impl CommitHook for Injector {
    fn after_commit(
        &mut self,
        point: CommitPoint,
        state: &mut StateArray,
        fd: Option<&mut FdRegisters>,
    ) {
        if point.permutation == self.schedule.permutation && point.commit == self.schedule.commit {
            apply_flips(self.pattern.as_slice(), state, fd)
                .expect("pattern validated against the scheme before the run");
            self.applied = true;
        }
    }
}

/// Rejects targets whose register does not exist under `scheme`.
pub fn check_targets(pattern: &FaultPattern, scheme: Option<Scheme>) -> Result<(), CampaignError> {
    let shadow_f = pattern
        .targets()
        .any(|t| matches!(t.register, Register::FPrime | Register::CfPrime));
    if shadow_f && scheme != Some(Scheme::ZSheet) {
        return Err(CampaignError::InvalidTarget(
            "F' and C'_F' exist only in the z-sheet scheme".into(),
        ));
    }
    if scheme.is_none() && !pattern.is_empty() && !pattern.touches_state() {
        return Err(CampaignError::InvalidTarget(
            "shadow-register faults need a fault detector".into(),
        ));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InjectionRun {
    pub outcome: Outcome,
    pub error_raised: bool,
    /// What the engine emitted (zeros if masked).
    pub emitted: Vec<u8>,
    /// What the faulty computation would have produced without masking.
    pub faulty_digest: Vec<u8>,
    pub golden_digest: Vec<u8>,
}

/// Run `job` with `pattern` injected at `schedule` and classify the result.
pub fn inject_and_run(
    job: &HashJob,
    scheme: Option<Scheme>,
    pattern: &FaultPattern,
    schedule: InjectionSchedule,
) -> Result<InjectionRun, CampaignError> {
    check_targets(pattern, scheme)?;
    let golden = hash_with(job.mode, &job.message, job.out_len, job.options(None))?;

    let (protected, injector) = hash_with_hook(
        job.mode,
        &job.message,
        job.out_len,
        job.options(scheme),
        Injector::new(schedule, pattern.clone()),
    )?;
    if !injector.applied() {
        return Err(CampaignError::ScheduleOutOfRange(schedule));
    }
    // Same faults without masking, to learn what the digest would have been.
    let (unmasked, _) = hash_with_hook(
        job.mode,
        &job.message,
        job.out_len,
        job.options(None),
        Injector::new(schedule, pattern.clone()),
    )?;

    let error_raised = protected.masked;
    let corrupted = unmasked.digest != golden.digest;
    let outcome = match (error_raised, corrupted) {
        (true, true) => Outcome::Detected,
        (true, false) => Outcome::SpuriousError,
        (false, true) => Outcome::SilentCorruption,
        (false, false) => Outcome::Benign,
    };
    Ok(InjectionRun {
        outcome,
        error_raised,
        emitted: protected.digest,
        faulty_digest: unmasked.digest,
        golden_digest: golden.digest,
    })
}

/// Fast-path verdict of a single prime/inject/check window.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Verdict {
    Detected,
    Undetected,
    /// Error raised by a pattern that only hit shadow registers.
    Spurious,
}

#[derive(Default)]
struct CommitRecorder {
    states: Vec<(CommitPoint, StateArray)>,
}

impl CommitHook for CommitRecorder {
    fn after_commit(&mut self, p: CommitPoint, s: &mut StateArray, _: Option<&mut FdRegisters>) {
        self.states.push((p, *s));
    }
}

/// Replays the FD window of every commit of a golden run without re-running
/// the hash: prime from the committed value, flip, check the theta taps of
/// the (faulty) register.
#[derive(Clone, Debug)]
pub struct RegisterHarness {
    scheme: Scheme,
    commits: Vec<(CommitPoint, StateArray, FdRegisters)>,
}

impl RegisterHarness {
    pub fn capture(job: &HashJob, scheme: Scheme) -> Result<Self, CampaignError> {
        let (_, recorder) = hash_with_hook(
            job.mode,
            &job.message,
            job.out_len,
            job.options(Some(scheme)),
            CommitRecorder::default(),
        )?;
        let commits = recorder
            .states
            .into_iter()
            .map(|(p, s)| {
                let mut fd = FdRegisters::new(scheme);
                fd.prime(&s);
                (p, s, fd)
            })
            .collect();
        Ok(RegisterHarness { scheme, commits })
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn commit_count(&self) -> usize {
        self.commits.len()
    }

    pub fn schedule(&self, commit: usize) -> InjectionSchedule {
        let p = self.commits[commit].0;
        InjectionSchedule {
            permutation: p.permutation,
            commit: p.commit,
        }
    }

    pub fn committed_state(&self, commit: usize) -> &StateArray {
        &self.commits[commit].1
    }

    /// `targets` must be valid for the harness scheme.
    pub fn evaluate(&self, commit: usize, targets: &[FaultTarget]) -> Verdict {
        let (_, committed, primed) = &self.commits[commit];
        let mut state = *committed;
        let mut fd = *primed;
        apply_flips(targets, &mut state, Some(&mut fd)).expect("targets valid for scheme");
        let (c, f) = keccak::theta_taps(&state);
        let raised = fd.check(&c, &f).expect("primed");
        let hits_state = targets.iter().any(|t| t.register == Register::State);
        match (raised, hits_state) {
            (true, true) => Verdict::Detected,
            (true, false) => Verdict::Spurious,
            (false, _) => Verdict::Undetected,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fault_detect::detectability_predicate;

    fn job() -> HashJob {
        HashJob::new(Mode::Sha3_256, b"fault".to_vec(), 32)
    }

    fn at(commit: usize) -> InjectionSchedule {
        InjectionSchedule {
            permutation: 0,
            commit,
        }
    }

    #[test]
    fn empty_pattern_is_benign() {
        let run =
            inject_and_run(&job(), Some(Scheme::ZSheet), &FaultPattern::empty(), at(3)).unwrap();
        assert_eq!(run.outcome, Outcome::Benign);
        assert_eq!(run.emitted, run.golden_digest);
    }

    #[test]
    fn single_flip_is_detected_and_masked() {
        let p = FaultPattern::state_bits([777]).unwrap();
        let run = inject_and_run(&job(), Some(Scheme::ZSheet), &p, at(10)).unwrap();
        assert_eq!(run.outcome, Outcome::Detected);
        assert!(run.emitted.iter().all(|&b| b == 0));
        assert_ne!(run.faulty_digest, run.golden_digest);
    }

    #[test]
    fn rectangle_is_silent() {
        let rect = FaultPattern::state_bits([
            StateArray::linear_index(0, 0, 0),
            StateArray::linear_index(0, 1, 0),
            StateArray::linear_index(0, 0, 1),
            StateArray::linear_index(0, 1, 1),
        ])
        .unwrap();
        let run = inject_and_run(&job(), Some(Scheme::ZSheet), &rect, at(5)).unwrap();
        assert_eq!(run.outcome, Outcome::SilentCorruption);
        assert_eq!(run.emitted, run.faulty_digest);
    }

    #[test]
    fn shadow_only_flip_is_spurious() {
        let p = FaultPattern::new(vec![FaultTarget::new(Register::CPrime, 17).unwrap()]).unwrap();
        let run = inject_and_run(&job(), Some(Scheme::CPlane), &p, at(0)).unwrap();
        assert_eq!(run.outcome, Outcome::SpuriousError);
    }

    #[test]
    fn schedule_out_of_range() {
        let p = FaultPattern::state_bits([1]).unwrap();
        let err = inject_and_run(&job(), Some(Scheme::ZSheet), &p, at(24)).unwrap_err();
        assert!(matches!(err, CampaignError::ScheduleOutOfRange(_)));
        let late = InjectionSchedule {
            permutation: 1,
            commit: 0,
        };
        assert!(inject_and_run(&job(), Some(Scheme::ZSheet), &p, late).is_err());
    }

    #[test]
    fn f_prime_targets_need_z_sheet() {
        let p = FaultPattern::new(vec![FaultTarget::new(Register::FPrime, 0).unwrap()]).unwrap();
        assert!(inject_and_run(&job(), Some(Scheme::CPlane), &p, at(0)).is_err());
    }

    #[test]
    fn harness_agrees_with_full_run() {
        let harness = RegisterHarness::capture(&job(), Scheme::CPlane).unwrap();
        assert_eq!(harness.commit_count(), 24);
        let patterns = [
            FaultPattern::state_bits([5]).unwrap(),
            FaultPattern::state_bits([5, 5 + 64 * 5]).unwrap(),
            FaultPattern::state_bits([0, 1, 2, 3]).unwrap(),
        ];
        for p in &patterns {
            for commit in [0, 11, 23] {
                let verdict = harness.evaluate(commit, p.as_slice());
                let run = inject_and_run(&job(), Some(Scheme::CPlane), p, harness.schedule(commit))
                    .unwrap();
                assert_eq!(verdict == Verdict::Detected, run.error_raised);
                assert_eq!(run.error_raised, detectability_predicate(p, Scheme::CPlane));
            }
        }
    }
}
