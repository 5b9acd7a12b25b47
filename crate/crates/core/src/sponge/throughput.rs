//! Steady-state throughput of the round-based engine.
//!
//! A long message costs, per mode block, 168 shift cycles (message bytes plus
//! zero fill) and 24 round cycles, independent of the mode. Throughput is then
//! `r_mode / 192` bits per cycle.

use std::fmt;

use serde::Serialize;

use super::mode::{mode_params, Mode, SHIFT_RATE_BYTES};
use super::EngineError;
use crate::fault_detect::Scheme;
use crate::keccak::ROUNDS;

pub const CYCLES_PER_BLOCK: u64 = (SHIFT_RATE_BYTES + ROUNDS) as u64;

/// Modeled throughput in Mbit/s for a clock of `freq_mhz` MHz.
pub fn throughput_mbps(mode: Mode, freq_mhz: f64) -> Result<f64, EngineError> {
    if !(freq_mhz.is_finite() && freq_mhz > 0.0) {
        return Err(EngineError::InvalidFrequency(freq_mhz));
    }
    Ok(mode_params(mode).rate_bits as f64 / CYCLES_PER_BLOCK as f64 * freq_mhz)
}

/// Synthesized engine variants with published clock and throughput figures.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Design {
    #[serde(rename = "basic")]
    Basic,
    #[serde(rename = "c-plane")]
    CPlane,
    #[serde(rename = "z-sheet")]
    ZSheet,
}

impl Design {
    pub const ALL: [Design; 3] = [Design::Basic, Design::CPlane, Design::ZSheet];

    pub fn for_scheme(scheme: Option<Scheme>) -> Design {
        match scheme {
            None => Design::Basic,
            Some(Scheme::CPlane) => Design::CPlane,
            Some(Scheme::ZSheet) => Design::ZSheet,
        }
    }

    /// Maximum clock of the synthesized design, MHz.
    pub fn frequency_mhz(self) -> f64 {
        match self {
            Design::Basic => 714.29,
            Design::CPlane => 666.67,
            Design::ZSheet => 588.24,
        }
    }

    /// Published throughput for `mode`, Mbit/s.
    pub fn reported_mbps(self, mode: Mode) -> f64 {
        use Mode::*;
        match (self, mode) {
            (Design::Basic, Sha3_224) => 4284.32,
            (Design::Basic, Sha3_256) => 4046.20,
            (Design::Basic, Sha3_384) => 3094.00,
            (Design::Basic, Sha3_512) => 2142.07,
            (Design::Basic, Shake128) => 4998.90,
            (Design::Basic, Shake256) => 4046.20,
            (Design::CPlane, Sha3_224) => 3998.67,
            (Design::CPlane, Sha3_256) => 3776.43,
            (Design::CPlane, Sha3_384) => 2887.72,
            (Design::CPlane, Sha3_512) => 1999.26,
            (Design::CPlane, Shake128) => 4665.61,
            (Design::CPlane, Shake256) => 3776.43,
            (Design::ZSheet, Sha3_224) => 3528.24,
            (Design::ZSheet, Sha3_256) => 3332.14,
            (Design::ZSheet, Sha3_384) => 2547.99,
            (Design::ZSheet, Sha3_512) => 1764.05,
            (Design::ZSheet, Shake128) => 4116.71,
            (Design::ZSheet, Shake256) => 3332.14,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Design::Basic => "basic",
            Design::CPlane => "c-plane",
            Design::ZSheet => "z-sheet",
        }
    }
}

impl fmt::Display for Design {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ThroughputRow {
    pub design: Design,
    pub mode: Mode,
    pub freq_mhz: f64,
    pub modeled_mbps: f64,
    pub reported_mbps: f64,
    /// `(modeled - reported) / reported`
    pub deviation: f64,
}

pub fn compare_with_reported(design: Design, mode: Mode) -> ThroughputRow {
    let freq_mhz = design.frequency_mhz();
    let modeled_mbps = throughput_mbps(mode, freq_mhz).expect("positive design clock");
    let reported_mbps = design.reported_mbps(mode);
    ThroughputRow {
        design,
        mode,
        freq_mhz,
        modeled_mbps,
        reported_mbps,
        deviation: (modeled_mbps - reported_mbps) / reported_mbps,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let t = throughput_mbps(Mode::Shake128, 714.29).unwrap();
        assert!((t - 5000.0).abs() < 0.1, "{t}");
        let t = throughput_mbps(Mode::Sha3_512, 714.29).unwrap();
        assert!((t - 2142.9).abs() < 0.05, "{t}");
        let t = throughput_mbps(Mode::Shake128, 588.24).unwrap();
        assert!((t - 4117.7).abs() < 0.05, "{t}");
    }

    #[test]
    fn rejects_non_positive_clock() {
        assert!(throughput_mbps(Mode::Sha3_256, 0.0).is_err());
        assert!(throughput_mbps(Mode::Sha3_256, -1.0).is_err());
        assert!(throughput_mbps(Mode::Sha3_256, f64::NAN).is_err());
    }

    #[test]
    fn ratios_follow_rates() {
        for a in Mode::ALL {
            for b in Mode::ALL {
                let ta = throughput_mbps(a, 123.0).unwrap();
                let tb = throughput_mbps(b, 123.0).unwrap();
                let ra = mode_params(a).rate_bits as f64;
                let rb = mode_params(b).rate_bits as f64;
                assert!((ta / tb - ra / rb).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn reported_values_within_one_percent() {
        for d in Design::ALL {
            for m in Mode::ALL {
                let row = compare_with_reported(d, m);
                assert!(row.deviation.abs() < 0.01, "{row:?}");
            }
        }
    }
}
