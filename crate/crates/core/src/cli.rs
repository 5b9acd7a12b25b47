//! Command-line front end.
//!
//! Exit codes: 0 success, 1 KAT mismatch, 2 bad arguments or invalid
//! campaign, 3 output masked by the fault detector, 4 enumeration budget
//! exceeded.

use std::ffi::OsString;
use std::io::{Read, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::fault_detect::Scheme;
use crate::fault_inject::{
    check_targets, run_campaign, undetected_census, CampaignError, CampaignSpec, FaultPattern,
    FaultTarget, InjectionSchedule, Injector, Scope, Strategy, DEFAULT_PATTERN_BUDGET,
};
use crate::kat;
use crate::sponge::{
    compare_with_reported, hash_with_hook, mode_params, throughput_mbps, Design, EngineOptions,
    Mode, NoHook, Unroll,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_MISMATCH: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_MASKED: i32 = 3;
pub const EXIT_BUDGET: i32 = 4;

#[derive(Parser, Debug)]
#[command(
    name = "keccak-fd",
    version,
    about = "SHA-3/SHAKE shift-register engine with parity-based fault detection"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Hash a file or standard input and print the digest in hex.
    Hash(HashArgs),
    /// Check a known-answer response file.
    Kat(KatArgs),
    /// Run a fault-injection campaign.
    Campaign(CampaignArgs),
    /// Exact count of undetected k-flip state patterns.
    Census(CensusArgs),
    /// Modeled throughput, optionally against the published figures.
    Throughput(ThroughputArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FdArg {
    None,
    CPlane,
    ZSheet,
}

impl FdArg {
    fn scheme(self) -> Option<Scheme> {
        match self {
            FdArg::None => None,
            FdArg::CPlane => Some(Scheme::CPlane),
            FdArg::ZSheet => Some(Scheme::ZSheet),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    CPlane,
    ZSheet,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Scheme {
        match s {
            SchemeArg::CPlane => Scheme::CPlane,
            SchemeArg::ZSheet => Scheme::ZSheet,
        }
    }
}

fn parse_unroll(s: &str) -> Result<Unroll, String> {
    let n: usize = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    Unroll::new(n).map_err(|e| e.to_string())
}

fn parse_schedule(s: &str) -> Result<InjectionSchedule, String> {
    let (p, c) = s
        .split_once(':')
        .ok_or_else(|| format!("expected PERMUTATION:COMMIT, got `{s}`"))?;
    Ok(InjectionSchedule {
        permutation: p
            .trim()
            .parse()
            .map_err(|_| format!("bad permutation `{p}`"))?,
        commit: c.trim().parse().map_err(|_| format!("bad commit `{c}`"))?,
    })
}

#[derive(Args, Debug)]
pub struct HashArgs {
    #[arg(long, value_parser = clap::value_parser!(Mode))]
    pub mode: Mode,
    /// Input file; standard input when absent or `-`.
    #[arg(long = "in", value_name = "PATH")]
    pub input: Option<PathBuf>,
    /// Output bytes. Defaults to the digest length (32/64 bytes for SHAKE128/256).
    #[arg(long)]
    pub out_len: Option<usize>,
    #[arg(long, value_enum, default_value = "none")]
    pub fd: FdArg,
    #[arg(long, value_parser = parse_unroll, default_value = "1")]
    pub unroll: Unroll,
    /// Flip these bits (`state:N`, `c-prime:N`, `f-prime:N`, `cf-prime:N`, comma separated).
    #[arg(long, value_delimiter = ',', value_parser = clap::value_parser!(FaultTarget))]
    pub inject: Vec<FaultTarget>,
    /// Commit that receives the injected flips.
    #[arg(long, value_parser = parse_schedule, default_value = "0:0")]
    pub inject_at: InjectionSchedule,
}

#[derive(Args, Debug)]
pub struct KatArgs {
    /// Response file(s).
    #[arg(required = true)]
    pub files: Vec<PathBuf>,
    /// Hash mode; inferred from each file name when absent.
    #[arg(long, value_parser = clap::value_parser!(Mode))]
    pub mode: Option<Mode>,
    #[arg(long, value_enum, default_value = "none")]
    pub fd: FdArg,
    #[arg(long, value_parser = parse_unroll, default_value = "1")]
    pub unroll: Unroll,
}

#[derive(Args, Debug)]
pub struct CampaignArgs {
    #[arg(long, visible_alias = "fd", value_enum)]
    pub scheme: SchemeArg,
    #[arg(long)]
    pub k: usize,
    #[arg(long, value_parser = clap::value_parser!(Strategy))]
    pub strategy: Strategy,
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_parser = parse_unroll, default_value = "1")]
    pub unroll: Unroll,
    /// Sheet (x coordinate) for exhaustive-sheet.
    #[arg(long, default_value_t = 0)]
    pub sheet: usize,
    /// `state`, or `all` to include the shadow registers.
    #[arg(long, value_parser = clap::value_parser!(Scope), default_value = "state")]
    pub scope: Scope,
    /// Commit of the golden run hit by exhaustive strategies.
    #[arg(long, default_value_t = 0)]
    pub commit: usize,
    #[arg(long, default_value_t = DEFAULT_PATTERN_BUDGET)]
    pub budget: u128,
    /// Allow exhaustive-global with k >= 3.
    #[arg(long)]
    pub audit_global: bool,
    /// Write the JSON report here.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CensusArgs {
    #[arg(long, visible_alias = "fd", value_enum)]
    pub scheme: SchemeArg,
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ThroughputArgs {
    /// One mode; all six when absent.
    #[arg(long, value_parser = clap::value_parser!(Mode))]
    pub mode: Option<Mode>,
    /// Clock in MHz. Without it the published design clocks are used and compared.
    #[arg(long)]
    pub freq: Option<f64>,
    /// Restrict the comparison to one design (`none` = no fault detection).
    #[arg(long, visible_alias = "scheme", value_enum)]
    pub fd: Option<FdArg>,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

struct Io<'a> {
    stdin: &'a mut dyn Read,
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
}

/// Fails with a message and exit code.
struct Exit(i32, String);

impl Exit {
    fn usage(msg: impl std::fmt::Display) -> Exit {
        Exit(EXIT_USAGE, msg.to_string())
    }
}

impl From<CampaignError> for Exit {
    fn from(e: CampaignError) -> Exit {
        let code = match e {
            CampaignError::BudgetExceeded { .. } => EXIT_BUDGET,
            _ => EXIT_USAGE,
        };
        Exit(code, e.to_string())
    }
}

impl From<std::io::Error> for Exit {
    fn from(e: std::io::Error) -> Exit {
        Exit::usage(e)
    }
}

impl From<serde_json::Error> for Exit {
    fn from(e: serde_json::Error) -> Exit {
        Exit::usage(e)
    }
}

/// Entry point taking explicit arguments and streams; returns the exit code.
pub fn run<I, T>(args: I, stdin: &mut dyn Read, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let mut io = Io { stdin, out, err };
    let result = match cli.command {
        Command::Hash(a) => cmd_hash(a, &mut io),
        Command::Kat(a) => cmd_kat(a, &mut io),
        Command::Campaign(a) => cmd_campaign(a, &mut io),
        Command::Census(a) => cmd_census(a, &mut io),
        Command::Throughput(a) => cmd_throughput(a, &mut io),
    };
    match result {
        Ok(code) => code,
        Err(Exit(code, msg)) => {
            let _ = writeln!(io.err, "error: {msg}");
            code
        }
    }
}

fn write_report<T: serde::Serialize>(path: &Option<PathBuf>, value: &T) -> Result<(), Exit> {
    if let Some(path) = path {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        std::fs::write(path, text)?;
    }
    Ok(())
}

fn cmd_hash(a: HashArgs, io: &mut Io) -> Result<i32, Exit> {
    let mut message = Vec::new();
    match &a.input {
        Some(p) if p.as_os_str() != "-" => {
            message = std::fs::read(p).map_err(|e| Exit::usage(format!("{}: {e}", p.display())))?
        }
        _ => {
            io.stdin.read_to_end(&mut message)?;
        }
    }
    let out_len = a
        .out_len
        .unwrap_or_else(|| mode_params(a.mode).default_output_bytes());
    let options = EngineOptions {
        unroll: a.unroll,
        fd: a.fd.scheme(),
    };
    let output = if a.inject.is_empty() {
        hash_with_hook(a.mode, &message, out_len, options, NoHook).map(|(o, _)| o)
    } else {
        let pattern = FaultPattern::new(a.inject.clone()).map_err(Exit::usage)?;
        check_targets(&pattern, a.fd.scheme()).map_err(Exit::usage)?;
        let (o, injector) = hash_with_hook(
            a.mode,
            &message,
            out_len,
            options,
            Injector::new(a.inject_at, pattern),
        )
        .map_err(Exit::usage)?;
        if !injector.applied() {
            return Err(Exit::usage(format!(
                "commit {}:{} does not occur in this run",
                a.inject_at.permutation, a.inject_at.commit
            )));
        }
        Ok(o)
    }
    .map_err(Exit::usage)?;
    if output.masked {
        return Err(Exit(
            EXIT_MASKED,
            "fault detected; output masked".to_string(),
        ));
    }
    writeln!(io.out, "{}", hex::encode(&output.digest))?;
    Ok(EXIT_OK)
}

fn cmd_kat(a: KatArgs, io: &mut Io) -> Result<i32, Exit> {
    let options = EngineOptions {
        unroll: a.unroll,
        fd: a.fd.scheme(),
    };
    let mut code = EXIT_OK;
    for path in &a.files {
        let records =
            kat::load(path, a.mode).map_err(|e| Exit::usage(format!("{}: {e}", path.display())))?;
        let summary = kat::verify_with(&records, |r| {
            let (o, _) = hash_with_hook(r.mode, &r.message(), r.out_len, options, NoHook)?;
            Ok(o.digest)
        })
        .map_err(Exit::usage)?;
        writeln!(
            io.out,
            "{}: {} passed, {} failed, {} skipped (not byte-aligned)",
            path.display(),
            summary.passed,
            summary.failed,
            summary.skipped
        )?;
        for f in summary.failures.iter().take(10) {
            writeln!(
                io.out,
                "  FAIL Len = {}: expected {}, got {}",
                f.msg_len_bits, f.expected, f.actual
            )?;
        }
        if summary.passed == 0 && summary.failed == 0 {
            return Err(Exit::usage(format!(
                "{}: no byte-aligned records",
                path.display()
            )));
        }
        if summary.failed > 0 {
            code = EXIT_MISMATCH;
        }
    }
    Ok(code)
}

fn cmd_campaign(a: CampaignArgs, io: &mut Io) -> Result<i32, Exit> {
    let spec = CampaignSpec {
        scheme: a.scheme.into(),
        unroll: a.unroll.get(),
        k: a.k,
        strategy: a.strategy,
        trials: a.trials,
        seed: a.seed,
        scope: a.scope,
        sheet: a.sheet,
        commit: a.commit,
        allow_large_global: a.audit_global,
        budget: a.budget,
    };
    let r = run_campaign(&spec)?;
    write_report(&a.report, &r)?;
    writeln!(
        io.out,
        "{} k={} {}: {}/{} detected, {} undetected, {} spurious",
        r.scheme, r.k, r.strategy, r.detected, r.total, r.undetected, r.spurious
    )?;
    writeln!(
        io.out,
        "rate {:.7}  95% CI [{:.7}, {:.7}]",
        r.rate, r.ci_low, r.ci_high
    )?;
    if let Some(f) = r.census_undetected_fraction {
        writeln!(io.out, "exact undetected fraction (census) {f:.3e}")?;
    }
    writeln!(io.err, "wall time {:.2?}", r.wall_time)?;
    Ok(EXIT_OK)
}

fn cmd_census(a: CensusArgs, io: &mut Io) -> Result<i32, Exit> {
    let c = undetected_census(a.k, a.scheme.into())?;
    write_report(&a.report, &c)?;
    writeln!(
        io.out,
        "{} k={}: {} undetected of {} ({:.3e})",
        c.scheme, c.k, c.undetected, c.total, c.undetected_fraction
    )?;
    for w in c.witnesses.iter().take(4) {
        let bits: Vec<String> = w.targets().map(|t| t.bit.to_string()).collect();
        writeln!(io.out, "  e.g. state bits {}", bits.join(","))?;
    }
    Ok(EXIT_OK)
}

fn cmd_throughput(a: ThroughputArgs, io: &mut Io) -> Result<i32, Exit> {
    let modes: Vec<Mode> = a.mode.map_or_else(|| Mode::ALL.to_vec(), |m| vec![m]);
    if let Some(freq) = a.freq {
        let mut rows = Vec::new();
        writeln!(io.out, "{:<10} {:>9} {:>10}", "mode", "MHz", "Mbps")?;
        for &m in &modes {
            let t = throughput_mbps(m, freq).map_err(Exit::usage)?;
            writeln!(io.out, "{:<10} {:>9.2} {:>10.2}", m.name(), freq, t)?;
            rows.push(serde_json::json!({ "mode": m, "freq_mhz": freq, "modeled_mbps": t }));
        }
        write_report(&a.report, &rows)?;
        return Ok(EXIT_OK);
    }
    let designs: Vec<Design> = match a.fd {
        Some(fd) => vec![Design::for_scheme(fd.scheme())],
        None => Design::ALL.to_vec(),
    };
    let mut rows = Vec::new();
    writeln!(
        io.out,
        "{:<8} {:<10} {:>9} {:>10} {:>10} {:>9}",
        "design", "mode", "MHz", "modeled", "reported", "dev"
    )?;
    for &d in &designs {
        for &m in &modes {
            let r = compare_with_reported(d, m);
            writeln!(
                io.out,
                "{:<8} {:<10} {:>9.2} {:>10.2} {:>10.2} {:>8.3}%",
                d.name(),
                m.name(),
                r.freq_mhz,
                r.modeled_mbps,
                r.reported_mbps,
                100.0 * r.deviation
            )?;
            rows.push(r);
        }
    }
    write_report(&a.report, &rows)?;
    Ok(EXIT_OK)
}
