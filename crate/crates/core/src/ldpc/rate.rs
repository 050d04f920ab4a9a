//! Puncturing and shortening of a base code.
//!
//! A base code of length `nb` and rate `R` is adapted to a frame of
//! `n = nb - p - s` key bits: `p` punctured columns carry private random bits
//! of the sender (unknown to the receiver, zero LLR) and `s` shortened
//! columns carry publicly known values (infinite LLR). The effective rate is
//!
//! ```text
//! R_eff = (R * nb - s) / (nb - p - s)
//! ```
//!
//! Punctured columns are restricted to sets in which every member owns a
//! private row: a row of `H` that touches no other punctured column. The
//! punctured submatrix then contains a permutation matrix, so it has full
//! column rank `p`, and the syndrome discloses at most `rows - p` bits about
//! the key. That quantity is what [`RateAdaptConfig::leak_bits`] reports.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{LdpcCode, LdpcError};

/// Effective code rate for `p` punctured and `s` shortened columns.
pub fn effective_rate(base_rate: f64, block_len: usize, punctured: usize, shortened: usize) -> f64 {
    let nb = block_len as f64;
    (base_rate * nb - shortened as f64) / (nb - (punctured + shortened) as f64)
}

/// Ordered candidate positions for puncturing and shortening one base code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PuncturePlan {
    puncture_order: Vec<u32>,
    shorten_order: Vec<u32>,
}

impl PuncturePlan {
    /// Selects up to `max_punctured` private-row puncturing candidates and
    /// `max_shortened` shortening candidates, disjoint from each other.
    pub fn new(code: &LdpcCode, max_punctured: usize, max_shortened: usize, seed: u64) -> Self {
        let h = code.matrix();
        let n = h.num_cols();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut order: Vec<u32> = (0..n as u32).collect();
        order.shuffle(&mut rng);

        // members[r]: punctured columns touching row r (0, 1 or "many").
        let mut members = vec![0u32; h.num_rows()];
        let mut owner = vec![u32::MAX; h.num_rows()];
        // private[c]: number of private rows of punctured column c.
        let mut private = vec![0u32; n];
        let mut puncture_order = Vec::new();
        let mut chosen = vec![false; n];
        for &c in &order {
            if puncture_order.len() >= max_punctured {
                break;
            }
            let rows = h.col(c as usize);
            if !rows.iter().any(|&r| members[r as usize] == 0) {
                continue;
            }
            // Adding c takes one private row away from each sole owner of a
            // shared row; refuse if that would leave an owner with none.
            let mut loses: Vec<u32> = rows
                .iter()
                .filter(|&&r| members[r as usize] == 1)
                .map(|&r| owner[r as usize])
                .collect();
            loses.sort_unstable();
            let mut ok = true;
            for group in loses.chunk_by(|a, b| a == b) {
                if private[group[0] as usize] <= group.len() as u32 {
                    ok = false;
                    break;
                }
            }
            if !ok {
                continue;
            }
            for &u in &loses {
                private[u as usize] -= 1;
            }
            for &r in rows {
                let r = r as usize;
                members[r] += 1;
                if members[r] == 1 {
                    owner[r] = c;
                    private[c as usize] += 1;
                }
            }
            chosen[c as usize] = true;
            puncture_order.push(c);
        }
        let shorten_order: Vec<u32> = order
            .iter()
            .copied()
            .filter(|&c| !chosen[c as usize])
            .take(max_shortened)
            .collect();
        Self {
            puncture_order,
            shorten_order,
        }
    }

    pub fn max_punctured(&self) -> usize {
        self.puncture_order.len()
    }

    pub fn max_shortened(&self) -> usize {
        self.shorten_order.len()
    }

    pub fn punctured(&self, p: usize) -> &[u32] {
        &self.puncture_order[..p]
    }

    pub fn shortened(&self, s: usize) -> &[u32] {
        &self.shorten_order[..s]
    }
}

/// A concrete adaptation of a base code.
#[derive(Debug, Clone, PartialEq)]
pub struct RateAdaptConfig {
    block_len: usize,
    syndrome_len: usize,
    base_rate: f64,
    punctured: Vec<u32>,
    shortened: Vec<u32>,
    shortened_values: Vec<u8>,
    frame_cols: Vec<u32>,
}

impl RateAdaptConfig {
    pub fn new(
        code: &LdpcCode,
        punctured: Vec<u32>,
        shortened: Vec<u32>,
        shortened_values: Vec<u8>,
    ) -> Result<Self, LdpcError> {
        let nb = code.block_len();
        if shortened_values.len() != shortened.len() {
            return Err(LdpcError::InvalidParameter(
                "one value is required per shortened column".into(),
            ));
        }
        let mut role = vec![0u8; nb];
        for (&c, tag) in punctured
            .iter()
            .map(|c| (c, 1u8))
            .chain(shortened.iter().map(|c| (c, 2u8)))
        {
            let slot = role
                .get_mut(c as usize)
                .ok_or_else(|| LdpcError::InvalidParameter(format!("column {c} outside block of {nb}")))?;
            if *slot != 0 {
                return Err(LdpcError::InvalidParameter(format!(
                    "column {c} is both punctured and shortened, or listed twice"
                )));
            }
            *slot = tag;
        }
        if punctured.len() + shortened.len() >= nb {
            return Err(LdpcError::InvalidParameter("no frame columns left".into()));
        }
        let frame_cols = (0..nb as u32).filter(|&c| role[c as usize] == 0).collect();
        Ok(Self {
            block_len: nb,
            syndrome_len: code.matrix().num_rows(),
            base_rate: code.rate(),
            punctured,
            shortened,
            shortened_values: shortened_values.into_iter().map(|v| v & 1).collect(),
            frame_cols,
        })
    }

    /// The unmodified base code: every column carries frame bits.
    pub fn identity(code: &LdpcCode) -> Self {
        Self::new(code, Vec::new(), Vec::new(), Vec::new()).expect("identity adaptation")
    }

    /// Builds the adaptation with the first `p` / `s` positions of a plan,
    /// shortened values drawn from `filler_seed`.
    pub fn from_plan(
        code: &LdpcCode,
        plan: &PuncturePlan,
        p: usize,
        s: usize,
        filler_seed: u64,
    ) -> Result<Self, LdpcError> {
        if p > plan.max_punctured() || s > plan.max_shortened() {
            return Err(LdpcError::InvalidParameter(format!(
                "plan supports at most {} punctured / {} shortened columns",
                plan.max_punctured(),
                plan.max_shortened()
            )));
        }
        let values = filler_bits(filler_seed, s);
        Self::new(code, plan.punctured(p).to_vec(), plan.shortened(s).to_vec(), values)
    }

    pub fn block_len(&self) -> usize {
        self.block_len
    }

    pub fn frame_len(&self) -> usize {
        self.frame_cols.len()
    }

    pub fn num_punctured(&self) -> usize {
        self.punctured.len()
    }

    pub fn num_shortened(&self) -> usize {
        self.shortened.len()
    }

    pub fn punctured(&self) -> &[u32] {
        &self.punctured
    }

    pub fn shortened(&self) -> &[u32] {
        &self.shortened
    }

    pub fn syndrome_len(&self) -> usize {
        self.syndrome_len
    }

    pub fn base_rate(&self) -> f64 {
        self.base_rate
    }

    pub fn effective_rate(&self) -> f64 {
        effective_rate(
            self.base_rate,
            self.block_len,
            self.num_punctured(),
            self.num_shortened(),
        )
    }

    /// Bits of key information disclosed by one syndrome under this
    /// adaptation: `syndrome_len - punctured`.
    pub fn leak_bits(&self) -> usize {
        self.syndrome_len - self.punctured.len()
    }

    /// Places frame bits, punctured filler and shortened values into a full
    /// code word.
    pub fn assemble_word(&self, frame_bits: &[u8], punctured_fill: &[u8]) -> Result<Vec<u8>, LdpcError> {
        if frame_bits.len() != self.frame_len() {
            return Err(LdpcError::LengthMismatch {
                expected: self.frame_len(),
                actual: frame_bits.len(),
            });
        }
        if punctured_fill.len() != self.punctured.len() {
            return Err(LdpcError::LengthMismatch {
                expected: self.punctured.len(),
                actual: punctured_fill.len(),
            });
        }
        let mut word = vec![0u8; self.block_len];
        for (&c, &b) in self.frame_cols.iter().zip(frame_bits) {
            word[c as usize] = b & 1;
        }
        for (&c, &b) in self.punctured.iter().zip(punctured_fill) {
            word[c as usize] = b & 1;
        }
        for (&c, &b) in self.shortened.iter().zip(&self.shortened_values) {
            word[c as usize] = b;
        }
        Ok(word)
    }

    /// Receiver-side LLRs for the full word.
    pub fn channel_llrs(&self, frame_bits: &[u8], magnitude: f64) -> Vec<f64> {
        let mut llr = vec![0.0; self.block_len];
        for (&c, &b) in self.frame_cols.iter().zip(frame_bits) {
            llr[c as usize] = if b & 1 == 0 { magnitude } else { -magnitude };
        }
        for (&c, &b) in self.shortened.iter().zip(&self.shortened_values) {
            llr[c as usize] = if b == 0 { f64::INFINITY } else { f64::NEG_INFINITY };
        }
        llr
    }

    /// Frame bits of a full word, in frame order.
    pub fn extract_frame(&self, word: &[u8]) -> Vec<u8> {
        self.frame_cols.iter().map(|&c| word[c as usize]).collect()
    }
}

/// Public pseudo-random values for shortened columns.
pub fn filler_bits(seed: u64, len: usize) -> Vec<u8> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..len).map(|_| rng.random::<bool>() as u8).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ldpc::{peg_construct, DegreeDistribution};

    fn small_code() -> LdpcCode {
        peg_construct(400, &DegreeDistribution::regular(3, 6).unwrap(), 5).unwrap()
    }

    #[test]
    fn punctured_set_has_private_rows() {
        let code = small_code();
        let plan = PuncturePlan::new(&code, 60, 40, 9);
        let p = plan.max_punctured();
        assert!(p > 10, "only {p} puncturable columns");
        let h = code.matrix();
        let set: Vec<u32> = plan.punctured(p).to_vec();
        let mut count = vec![0; h.num_rows()];
        for &c in &set {
            for &r in h.col(c as usize) {
                count[r as usize] += 1;
            }
        }
        for &c in &set {
            assert!(h.col(c as usize).iter().any(|&r| count[r as usize] == 1));
        }
        assert!(plan.shortened(40).iter().all(|c| !set.contains(c)));
    }

    #[test]
    fn rate_identity_holds() {
        let code = small_code();
        let plan = PuncturePlan::new(&code, 20, 20, 1);
        let cfg = RateAdaptConfig::from_plan(&code, &plan, 12, 8, 3).unwrap();
        let nb = 400.0;
        let expected = (0.5 * nb - 8.0) / (nb - 20.0);
        assert!((cfg.effective_rate() - expected).abs() < 1e-12);
        assert_eq!(cfg.frame_len(), 380);
        assert_eq!(cfg.leak_bits(), 200 - 12);
        // The leak equals (1 - R_eff) * frame_len exactly.
        let implied = (1.0 - cfg.effective_rate()) * cfg.frame_len() as f64;
        assert!((implied - cfg.leak_bits() as f64).abs() < 1e-9);
    }

    #[test]
    fn overlapping_sets_rejected() {
        let code = small_code();
        assert!(RateAdaptConfig::new(&code, vec![1, 2], vec![2], vec![0]).is_err());
        assert!(RateAdaptConfig::new(&code, vec![400], vec![], vec![]).is_err());
        assert!(RateAdaptConfig::new(&code, vec![], vec![3], vec![]).is_err());
    }

    #[test]
    fn word_assembly_and_extraction_agree() {
        let code = small_code();
        let plan = PuncturePlan::new(&code, 10, 10, 2);
        let cfg = RateAdaptConfig::from_plan(&code, &plan, 5, 7, 4).unwrap();
        let frame: Vec<u8> = (0..cfg.frame_len()).map(|i| (i % 3 == 0) as u8).collect();
        let word = cfg.assemble_word(&frame, &[1, 0, 1, 1, 0]).unwrap();
        assert_eq!(cfg.extract_frame(&word), frame);
        for (&c, &v) in cfg.shortened().iter().zip(&filler_bits(4, 7)) {
            assert_eq!(word[c as usize], v);
        }
    }
}
