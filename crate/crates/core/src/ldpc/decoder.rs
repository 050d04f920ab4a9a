//! Flooding-schedule sum-product decoding against a target syndrome.

use super::{LdpcCode, LdpcError, RateAdaptConfig};

/// Default iteration cap.
pub const DEFAULT_MAX_ITERS: usize = 60;

/// Outcome of a decoding attempt.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodeOutcome {
    /// Corrected frame bits (length `rate_adapt.frame_len()`), present only
    /// if the decoder converged.
    pub corrected: Option<Vec<u8>>,
    pub converged: bool,
    pub iterations: usize,
}

// Variable-to-check messages are clipped so `tanh(x / 2)` stays below one.
const MSG_CLIP: f64 = 30.0;
const TANH_CLIP: f64 = 1.0 - 1e-15;

/// Edge-indexed working representation of a Tanner graph.
///
/// Edges are numbered in row-major order; `var_edges` lists, per column, the
/// edges that touch it.
#[derive(Debug, Clone)]
pub struct TannerGraph {
    row_start: Vec<usize>,
    edge_col: Vec<u32>,
    col_start: Vec<usize>,
    col_edges: Vec<u32>,
}

impl TannerGraph {
    pub fn new(code: &LdpcCode) -> Self {
        let h = code.matrix();
        let mut row_start = Vec::with_capacity(h.num_rows() + 1);
        let mut edge_col = Vec::with_capacity(h.num_edges());
        row_start.push(0);
        for r in 0..h.num_rows() {
            edge_col.extend_from_slice(h.row(r));
            row_start.push(edge_col.len());
        }
        let mut col_start = vec![0usize; h.num_cols() + 1];
        for &c in &edge_col {
            col_start[c as usize + 1] += 1;
        }
        for c in 0..h.num_cols() {
            col_start[c + 1] += col_start[c];
        }
        let mut fill = col_start.clone();
        let mut col_edges = vec![0u32; edge_col.len()];
        for (e, &c) in edge_col.iter().enumerate() {
            col_edges[fill[c as usize]] = e as u32;
            fill[c as usize] += 1;
        }
        Self {
            row_start,
            edge_col,
            col_start,
            col_edges,
        }
    }

    fn num_rows(&self) -> usize {
        self.row_start.len() - 1
    }

    fn num_cols(&self) -> usize {
        self.col_start.len() - 1
    }
}

/// Sum-product decoder state; reusable across frames of the same code.
#[derive(Debug, Clone)]
pub struct Decoder {
    graph: TannerGraph,
    v2c: Vec<f64>,
    c2v: Vec<f64>,
    scratch: Vec<f64>,
}

impl Decoder {
    pub fn new(code: &LdpcCode) -> Self {
        let graph = TannerGraph::new(code);
        let edges = graph.edge_col.len();
        Self {
            graph,
            v2c: vec![0.0; edges],
            c2v: vec![0.0; edges],
            scratch: Vec::new(),
        }
    }

    /// Decodes from per-column channel LLRs (positive favours bit 0).
    ///
    /// Returns the hard decision for every column on convergence.
    pub fn decode_llr(&mut self, llr: &[f64], syndrome: &[u8], max_iters: usize) -> (Option<Vec<u8>>, usize) {
        let g = &self.graph;
        assert_eq!(llr.len(), g.num_cols());
        assert_eq!(syndrome.len(), g.num_rows());
        let mut hard: Vec<u8> = llr.iter().map(|&l| u8::from(l < 0.0)).collect();
        if syndrome_matches(g, &hard, syndrome) {
            return (Some(hard), 0);
        }
        for c in 0..g.num_cols() {
            let l = llr[c].clamp(-MSG_CLIP, MSG_CLIP);
            for &e in &g.col_edges[g.col_start[c]..g.col_start[c + 1]] {
                self.v2c[e as usize] = l;
            }
        }
        for iter in 1..=max_iters {
            // Check-node update in the tanh domain, excluding each edge's own
            // contribution via prefix/suffix products.
            for r in 0..g.num_rows() {
                let (lo, hi) = (g.row_start[r], g.row_start[r + 1]);
                let t = &mut self.scratch;
                t.clear();
                t.extend(self.v2c[lo..hi].iter().map(|&m| (0.5 * m).tanh()));
                let sign = if syndrome[r] == 1 { -1.0 } else { 1.0 };
                let mut prefix = 1.0;
                for k in 0..t.len() {
                    self.c2v[lo + k] = prefix;
                    prefix *= t[k];
                }
                let mut suffix = sign;
                for k in (0..t.len()).rev() {
                    let p = (self.c2v[lo + k] * suffix).clamp(-TANH_CLIP, TANH_CLIP);
                    self.c2v[lo + k] = 2.0 * p.atanh();
                    suffix *= t[k];
                }
            }
            // Variable-node update and hard decision.
            for c in 0..g.num_cols() {
                let edges = &g.col_edges[g.col_start[c]..g.col_start[c + 1]];
                let total = llr[c] + edges.iter().map(|&e| self.c2v[e as usize]).sum::<f64>();
                hard[c] = u8::from(total < 0.0);
                for &e in edges {
                    let e = e as usize;
                    self.v2c[e] = (total - self.c2v[e]).clamp(-MSG_CLIP, MSG_CLIP);
                }
            }
            if syndrome_matches(g, &hard, syndrome) {
                return (Some(hard), iter);
            }
        }
        (None, max_iters)
    }

    /// Decodes a rate-adapted frame.
    ///
    /// `noisy_bits` are the receiver's frame bits; punctured columns start
    /// from a zero LLR and shortened columns are pinned to the values in
    /// `rate_adapt`.
    pub fn decode(
        &mut self,
        rate_adapt: &RateAdaptConfig,
        noisy_bits: &[u8],
        target_syndrome: &[u8],
        channel_qber: f64,
        max_iters: usize,
    ) -> Result<DecodeOutcome, LdpcError> {
        if !(channel_qber > 0.0 && channel_qber < 0.5) {
            return Err(LdpcError::InvalidParameter(format!(
                "channel QBER {channel_qber} outside (0, 0.5)"
            )));
        }
        if max_iters == 0 {
            return Err(LdpcError::InvalidParameter("max_iters must be at least 1".into()));
        }
        if rate_adapt.block_len() != self.graph.num_cols() {
            return Err(LdpcError::LengthMismatch {
                expected: self.graph.num_cols(),
                actual: rate_adapt.block_len(),
            });
        }
        if noisy_bits.len() != rate_adapt.frame_len() {
            return Err(LdpcError::LengthMismatch {
                expected: rate_adapt.frame_len(),
                actual: noisy_bits.len(),
            });
        }
        if target_syndrome.len() != self.graph.num_rows() {
            return Err(LdpcError::LengthMismatch {
                expected: self.graph.num_rows(),
                actual: target_syndrome.len(),
            });
        }
        let magnitude = ((1.0 - channel_qber) / channel_qber).ln();
        let llr = rate_adapt.channel_llrs(noisy_bits, magnitude);
        let (hard, iterations) = self.decode_llr(&llr, target_syndrome, max_iters);
        Ok(match hard {
            Some(word) => DecodeOutcome {
                corrected: Some(rate_adapt.extract_frame(&word)),
                converged: true,
                iterations,
            },
            None => DecodeOutcome {
                corrected: None,
                converged: false,
                iterations,
            },
        })
    }
}

fn syndrome_matches(g: &TannerGraph, bits: &[u8], syndrome: &[u8]) -> bool {
    (0..g.num_rows()).all(|r| {
        let parity = g.edge_col[g.row_start[r]..g.row_start[r + 1]]
            .iter()
            .fold(0u8, |acc, &c| acc ^ bits[c as usize]);
        parity == syndrome[r]
    })
}

/// One-shot convenience wrapper around [`Decoder::decode`].
pub fn decode(
    code: &LdpcCode,
    rate_adapt: &RateAdaptConfig,
    noisy_bits: &[u8],
    target_syndrome: &[u8],
    channel_qber: f64,
    max_iters: usize,
) -> Result<DecodeOutcome, LdpcError> {
    Decoder::new(code).decode(rate_adapt, noisy_bits, target_syndrome, channel_qber, max_iters)
}
