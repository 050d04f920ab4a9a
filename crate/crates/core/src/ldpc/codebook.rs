//! The family of base codes and rate selection.
//!
//! Every base code has the same block length `nb = n + d`, where `n` is the
//! frame length and `d = round(n * delta / (1 - delta))` is the number of
//! columns split between puncturing and shortening. For a target rate the
//! split `(p, s)` with `p + s = d` solves
//!
//! ```text
//! R_target = (R0 * nb - s) / n
//! ```
//!
//! so one base code of rate `R0` covers the interval
//! `[(R0 - delta) / (1 - delta), R0 / (1 - delta)]`. With the default rates
//! and `delta = 0.05` the intervals tile `[0.632, 0.947]`, up to the
//! rounding of `d`.

use std::sync::OnceLock;

use super::{
    peg::PegConfig, DegreeDistribution, LdpcCode, LdpcError, PuncturePlan, RateAdaptConfig, DEFAULT_BFS_BUDGET,
};
use crate::security::binary_entropy;

pub const DEFAULT_BASE_RATES: [f64; 6] = [0.65, 0.70, 0.75, 0.80, 0.85, 0.90];

const SHIPPED: [(f64, &str); 6] = [
    (0.65, include_str!("../../data/distributions/rate_065.txt")),
    (0.70, include_str!("../../data/distributions/rate_070.txt")),
    (0.75, include_str!("../../data/distributions/rate_075.txt")),
    (0.80, include_str!("../../data/distributions/rate_080.txt")),
    (0.85, include_str!("../../data/distributions/rate_085.txt")),
    (0.90, include_str!("../../data/distributions/rate_090.txt")),
];

/// Shipped degree distribution for one of [`DEFAULT_BASE_RATES`].
pub fn shipped_distribution(rate: f64) -> Option<DegreeDistribution> {
    SHIPPED
        .iter()
        .find(|(r, _)| (r - rate).abs() < 1e-9)
        .map(|(_, text)| DegreeDistribution::parse(text).expect("shipped distribution parses"))
}

/// Largest QBER accepted by [`Codebook::select_rate`] regardless of codes.
pub const MAX_SUPPORTED_QBER: f64 = 0.11;

#[derive(Debug, Clone)]
pub struct CodebookConfig {
    /// Key bits per frame (`n`).
    pub frame_len: usize,
    /// Fraction of the base block that is punctured or shortened.
    pub delta: f64,
    /// Base codes as `(nominal rate, distribution)`, ascending in rate.
    pub codes: Vec<(f64, DegreeDistribution)>,
    pub seed: u64,
    /// Efficiency used to turn a QBER estimate into a target rate.
    pub f_model: f64,
    /// Efficiency used for the retry after a decoding failure.
    pub f_retry: f64,
    pub bfs_budget: usize,
    pub max_iters: usize,
}

impl CodebookConfig {
    /// Shipped distributions with `f_model` tuned for the frame length.
    pub fn new(frame_len: usize, seed: u64) -> Self {
        let f_model = if frame_len >= 100_000 { 1.17 } else { 1.22 };
        Self {
            frame_len,
            delta: 0.05,
            codes: DEFAULT_BASE_RATES
                .iter()
                .map(|&r| (r, shipped_distribution(r).expect("shipped rate")))
                .collect(),
            seed,
            f_model,
            f_retry: f_model + 0.12,
            bfs_budget: DEFAULT_BFS_BUDGET,
            max_iters: super::DEFAULT_MAX_ITERS,
        }
    }
}

/// A base code with its puncturing/shortening candidates.
#[derive(Debug)]
pub struct BaseCode {
    pub nominal_rate: f64,
    pub code: LdpcCode,
    pub plan: PuncturePlan,
}

/// Result of [`Codebook::select_rate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateSelection {
    pub code_index: usize,
    pub punctured: usize,
    pub shortened: usize,
    pub target_rate: f64,
    pub effective_rate: f64,
}

impl RateSelection {
    /// Syndrome bits minus punctured columns.
    pub fn leak_bits(&self, syndrome_len: usize) -> usize {
        syndrome_len - self.punctured
    }
}

/// Six lazily constructed base codes sharing one block length.
#[derive(Debug)]
pub struct Codebook {
    cfg: CodebookConfig,
    block_len: usize,
    extra: usize,
    codes: Vec<OnceLock<Result<BaseCode, LdpcError>>>,
}

impl Codebook {
    pub fn new(cfg: CodebookConfig) -> Result<Self, LdpcError> {
        if cfg.frame_len < 16 {
            return Err(LdpcError::InvalidParameter("frame length too small".into()));
        }
        if !(0.0..0.5).contains(&cfg.delta) {
            return Err(LdpcError::InvalidParameter(format!(
                "delta {} outside [0, 0.5)",
                cfg.delta
            )));
        }
        if cfg.codes.is_empty() || cfg.codes.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(LdpcError::InvalidParameter(
                "base rates must be ascending and non-empty".into(),
            ));
        }
        let extra = (cfg.frame_len as f64 * cfg.delta / (1.0 - cfg.delta)).round() as usize;
        let block_len = cfg.frame_len + extra;
        let codes = (0..cfg.codes.len()).map(|_| OnceLock::new()).collect();
        Ok(Self {
            cfg,
            block_len,
            extra,
            codes,
        })
    }

    pub fn config(&self) -> &CodebookConfig {
        &self.cfg
    }

    pub fn frame_len(&self) -> usize {
        self.cfg.frame_len
    }

    /// Base block length `nb`.
    pub fn block_len(&self) -> usize {
        self.block_len
    }

    /// Punctured plus shortened columns per frame (`d`).
    pub fn extra_columns(&self) -> usize {
        self.extra
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    pub fn nominal_rate(&self, index: usize) -> f64 {
        self.cfg.codes[index].0
    }

    /// Builds base code `index` on first use.
    pub fn code(&self, index: usize) -> Result<&BaseCode, LdpcError> {
        let slot = self
            .codes
            .get(index)
            .ok_or_else(|| LdpcError::InvalidParameter(format!("no base code {index}")))?;
        slot.get_or_init(|| self.build(index)).as_ref().map_err(Clone::clone)
    }

    fn build(&self, index: usize) -> Result<BaseCode, LdpcError> {
        let (nominal_rate, dist) = &self.cfg.codes[index];
        let seed = self.cfg.seed.wrapping_add(index as u64);
        let mut peg = PegConfig::new(self.block_len, dist.clone(), seed);
        peg.bfs_budget = self.cfg.bfs_budget;
        let code = peg.build()?;
        let plan = PuncturePlan::new(&code, self.extra, self.extra, seed ^ 0x9e37_79b9_7f4a_7c15);
        log::debug!(
            "built base code {index}: rate {:.4}, {} x {}, {} puncturable",
            code.rate(),
            code.syndrome_len(),
            code.block_len(),
            plan.max_punctured()
        );
        Ok(BaseCode {
            nominal_rate: *nominal_rate,
            code,
            plan,
        })
    }

    /// Rate range covered by base code `index` before construction, using
    /// the nominal rate.
    pub fn nominal_range(&self, index: usize) -> (f64, f64) {
        let r0 = self.nominal_rate(index);
        let n = self.cfg.frame_len as f64;
        let nb = self.block_len as f64;
        ((r0 * nb - self.extra as f64) / n, r0 * nb / n)
    }

    /// Target rate `1 - f H(q)` for a QBER estimate and efficiency.
    pub fn target_rate(qber: f64, f: f64) -> f64 {
        1.0 - f * binary_entropy(qber)
    }

    /// Chooses a base code and `(p, s)` split for a QBER estimate using the
    /// configured `f_model`.
    pub fn select_rate(&self, qber: f64) -> Result<RateSelection, LdpcError> {
        self.select_rate_with(qber, self.cfg.f_model)
    }

    /// Selection for the retry after a failed decode: a lower target rate.
    pub fn select_retry(&self, qber: f64) -> Result<RateSelection, LdpcError> {
        self.select_rate_with(qber, self.cfg.f_retry)
    }

    /// Chooses a base code and split for `R_target = 1 - f H(q)`.
    ///
    /// Targets above the family's maximum are clamped to it; targets below
    /// the minimum are rejected.
    pub fn select_rate_with(&self, qber: f64, f: f64) -> Result<RateSelection, LdpcError> {
        if !(0.0..=MAX_SUPPORTED_QBER).contains(&qber) {
            return Err(LdpcError::UnsupportedQber(qber));
        }
        let lowest = self.nominal_range(0).0;
        let highest = self.nominal_range(self.len() - 1).1;
        let target = Self::target_rate(qber, f).min(highest);
        if target < lowest - 1e-12 {
            return Err(LdpcError::UnsupportedQber(qber));
        }
        // Covering code whose nominal rate is closest to the target. Rounding
        // of `d` can leave gaps of order 1/n between ranges; a target inside
        // one falls to the code below.
        let index = (0..self.len())
            .filter(|&i| {
                let (lo, hi) = self.nominal_range(i);
                target >= lo - 1e-12 && target <= hi + 1e-12
            })
            .min_by(|&a, &b| {
                (self.nominal_rate(a) - target)
                    .abs()
                    .total_cmp(&(self.nominal_rate(b) - target).abs())
            })
            .or_else(|| (0..self.len()).rev().find(|&i| self.nominal_range(i).0 <= target))
            .ok_or(LdpcError::UnsupportedQber(qber))?;
        let base = self.code(index)?;
        let n = self.cfg.frame_len as f64;
        let nb = self.block_len;
        let syndrome = base.code.syndrome_len() as f64;
        // Actual rate of the constructed code: (nb - rows) / nb.
        // s = nb - rows - target * n, then clamp into [0, d].
        let s_exact = nb as f64 - syndrome - target * n;
        let mut s = s_exact.ceil().clamp(0.0, self.extra as f64) as usize;
        let mut p = self.extra - s;
        if p > base.plan.max_punctured() {
            p = base.plan.max_punctured();
            s = self.extra - p;
        }
        let selection = RateSelection {
            code_index: index,
            punctured: p,
            shortened: s,
            target_rate: target,
            effective_rate: super::effective_rate(base.code.rate(), nb, p, s),
        };
        debug_assert_eq!(nb - p - s, self.cfg.frame_len);
        Ok(selection)
    }

    /// Rebuilds a selection announced by the peer, checking that it fits
    /// the codebook.
    pub fn selection(&self, code_index: usize, punctured: usize, shortened: usize) -> Result<RateSelection, LdpcError> {
        let base = self.code(code_index)?;
        if punctured + shortened != self.extra || punctured > base.plan.max_punctured() {
            return Err(LdpcError::InvalidParameter(format!(
                "split ({punctured}, {shortened}) does not fit {} extra columns",
                self.extra
            )));
        }
        let effective_rate = super::effective_rate(base.code.rate(), self.block_len, punctured, shortened);
        Ok(RateSelection {
            code_index,
            punctured,
            shortened,
            target_rate: effective_rate,
            effective_rate,
        })
    }

    /// Concrete adaptation for a selection, with shortened values drawn
    /// from a public `filler_seed`.
    pub fn adaptation(&self, sel: &RateSelection, filler_seed: u64) -> Result<RateAdaptConfig, LdpcError> {
        let base = self.code(sel.code_index)?;
        RateAdaptConfig::from_plan(&base.code, &base.plan, sel.punctured, sel.shortened, filler_seed)
    }

    /// Syndrome bits that a selection discloses about the key.
    pub fn leak_bits(&self, sel: &RateSelection) -> Result<usize, LdpcError> {
        Ok(sel.leak_bits(self.code(sel.code_index)?.code.syndrome_len()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nominal_ranges_tile_up_to_rounding() {
        let cb = Codebook::new(CodebookConfig::new(2000, 1)).unwrap();
        for i in 1..cb.len() {
            assert!(cb.nominal_range(i).0 <= cb.nominal_range(i - 1).1 + 1.0 / 2000.0);
        }
    }

    #[test]
    fn shipped_distributions_have_their_rates() {
        for r in DEFAULT_BASE_RATES {
            let d = shipped_distribution(r).unwrap();
            assert!((d.design_rate() - r).abs() < 0.005, "rate {r}: {}", d.design_rate());
            assert!(d.max_variable_degree() <= 15);
        }
    }
}
