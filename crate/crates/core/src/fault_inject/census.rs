//! Exact count of undetected state-register fault patterns.
//!
//! A state-register pattern escapes the c-plane check iff every column has an
//! even number of flips, and escapes the z-sheet check iff additionally every
//! lane does. Both conditions decompose over sheets, so the count is obtained
//! per sheet (a transfer-matrix walk over the 64 columns of a sheet, tracking
//! the lane parities) and then convolved over the five sheets.

use serde::Serialize;

use super::stats::binomial;
use super::{CampaignError, FaultPattern};
use crate::fault_detect::Scheme;
use crate::keccak::{StateArray, STATE_BITS};

pub const CENSUS_MAX_K: usize = 16;
pub const MAX_WITNESSES: usize = 16;

const SHEETS: usize = 5;
const COLUMNS_PER_SHEET: usize = 64;

/// 5-bit column vectors (bit y) with even weight, nonzero ones first.
fn even_columns() -> impl Iterator<Item = u8> {
    (1u8..32)
        .filter(|v| v.count_ones() % 2 == 0)
        .chain(std::iter::once(0))
}

/// `counts[w]` = number of weight-`w` patterns inside one sheet that escape
/// `scheme`, for `w <= max_weight`.
pub fn sheet_undetected_counts(scheme: Scheme, max_weight: usize) -> Vec<u128> {
    undetected_counts_for_width(scheme, COLUMNS_PER_SHEET, max_weight)
}

fn undetected_counts_for_width(scheme: Scheme, width: usize, max_weight: usize) -> Vec<u128> {
    // dp[parity][w]
    let mut dp = vec![vec![0u128; max_weight + 1]; 32];
    dp[0][0] = 1;
    for _ in 0..width {
        let mut next = vec![vec![0u128; max_weight + 1]; 32];
        for (parity, row) in dp.iter().enumerate() {
            for (w, &count) in row.iter().enumerate() {
                if count == 0 {
                    continue;
                }
                for v in even_columns() {
                    let nw = w + v.count_ones() as usize;
                    if nw <= max_weight {
                        next[parity ^ v as usize][nw] += count;
                    }
                }
            }
        }
        dp = next;
    }
    match scheme {
        Scheme::ZSheet => dp[0].clone(),
        Scheme::CPlane => (0..=max_weight)
            .map(|w| dp.iter().map(|row| row[w]).sum())
            .collect(),
    }
}

fn convolve(a: &[u128], b: &[u128]) -> Vec<u128> {
    let mut out = vec![0u128; a.len()];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            if i + j < out.len() {
                out[i + j] += x * y;
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Census {
    pub scheme: Scheme,
    pub k: usize,
    /// Undetected `k`-flip state-register patterns.
    pub undetected: u128,
    /// `C(1600, k)`
    pub total: u128,
    pub undetected_fraction: f64,
    pub witnesses: Vec<FaultPattern>,
}

/// Count (and exhibit up to 16 of) the `k`-flip state patterns that escape `scheme`.
pub fn undetected_census(k: usize, scheme: Scheme) -> Result<Census, CampaignError> {
    if k == 0 || k > CENSUS_MAX_K {
        return Err(CampaignError::InvalidSpec(format!(
            "census supports 1 <= k <= {CENSUS_MAX_K}, got {k}"
        )));
    }
    let per_sheet = sheet_undetected_counts(scheme, k);
    let mut all = vec![0u128; k + 1];
    all[0] = 1;
    for _ in 0..SHEETS {
        all = convolve(&all, &per_sheet);
    }
    let undetected = all[k];
    let total = binomial(STATE_BITS as u128, k as u128).expect("k <= 16 fits in u128");
    Ok(Census {
        scheme,
        k,
        undetected,
        total,
        undetected_fraction: undetected as f64 / total as f64,
        witnesses: witnesses(k, scheme, MAX_WITNESSES),
    })
}

struct WitnessSearch {
    scheme: Scheme,
    k: usize,
    limit: usize,
    chosen: Vec<(usize, u8)>,
    found: Vec<FaultPattern>,
}

impl WitnessSearch {
    fn pattern(&self) -> FaultPattern {
        let bits = self.chosen.iter().flat_map(|&(col, v)| {
            let (x, z) = (col / COLUMNS_PER_SHEET, col % COLUMNS_PER_SHEET);
            (0..5)
                .filter(move |y| (v >> y) & 1 == 1)
                .map(move |y| StateArray::linear_index(x, y, z))
        });
        FaultPattern::state_bits(bits).expect("distinct bits")
    }

    /// Column `col` of the flattened `(x, z)` order; `parity` = lane parities
    /// of the current sheet.
    fn walk(&mut self, col: usize, weight: usize, parity: u8) {
        if self.found.len() >= self.limit {
            return;
        }
        let remaining = self.k - weight;
        let lanes_open = self.scheme == Scheme::ZSheet && parity != 0;
        if remaining == 0 {
            if !lanes_open {
                let p = self.pattern();
                self.found.push(p);
            }
            return;
        }
        if col == SHEETS * COLUMNS_PER_SHEET {
            return;
        }
        if lanes_open && parity.count_ones() as usize > remaining {
            return;
        }
        let sheet_ends = col % COLUMNS_PER_SHEET == COLUMNS_PER_SHEET - 1;
        for v in even_columns() {
            let w = v.count_ones() as usize;
            if w > remaining {
                continue;
            }
            let mut p = parity ^ v;
            if sheet_ends {
                if self.scheme == Scheme::ZSheet && p != 0 {
                    continue;
                }
                p = 0;
            }
            if v != 0 {
                self.chosen.push((col, v));
            }
            self.walk(col + 1, weight + w, p);
            if v != 0 {
                self.chosen.pop();
            }
            if self.found.len() >= self.limit {
                return;
            }
        }
    }
}

fn witnesses(k: usize, scheme: Scheme, limit: usize) -> Vec<FaultPattern> {
    if k % 2 == 1 {
        return Vec::new();
    }
    let mut search = WitnessSearch {
        scheme,
        k,
        limit,
        chosen: Vec::new(),
        found: Vec::new(),
    };
    search.walk(0, 0, 0);
    search.found
}
