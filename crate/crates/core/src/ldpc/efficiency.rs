//! Reconciliation efficiency `f = leak_EC / (n H(q))`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Codebook, Decoder, LdpcError};
use crate::security::binary_entropy;

/// One reconciled (or failed) frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameRun {
    pub frame_len: usize,
    /// Realised error fraction between the two frames.
    pub qber: f64,
    /// Bits disclosed by the syndrome.
    pub leak_bits: usize,
    pub converged: bool,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EfficiencyReport {
    /// Efficiency over converged frames; `NaN` if none converged.
    pub f: f64,
    pub frames: usize,
    pub converged: usize,
    pub failed: usize,
    pub mean_iterations: f64,
}

impl EfficiencyReport {
    pub fn convergence(&self) -> f64 {
        if self.frames == 0 {
            0.0
        } else {
            self.converged as f64 / self.frames as f64
        }
    }
}

/// Aggregates `sum(leak) / sum(n H(q))` over the converged runs.
pub fn measure_efficiency(runs: &[FrameRun]) -> EfficiencyReport {
    let ok: Vec<&FrameRun> = runs.iter().filter(|r| r.converged).collect();
    let leak: f64 = ok.iter().map(|r| r.leak_bits as f64).sum();
    let bound: f64 = ok.iter().map(|r| r.frame_len as f64 * binary_entropy(r.qber)).sum();
    let iters: f64 = ok.iter().map(|r| r.iterations as f64).sum();
    EfficiencyReport {
        f: if ok.is_empty() { f64::NAN } else { leak / bound },
        frames: runs.len(),
        converged: ok.len(),
        failed: runs.len() - ok.len(),
        mean_iterations: if ok.is_empty() {
            f64::NAN
        } else {
            iters / ok.len() as f64
        },
    }
}

/// Reconciles `frames` random frames over a binary symmetric channel of
/// crossover `qber`, selecting the rate from `qber` itself. Frames that fail
/// are not retried.
pub fn simulate_frames(codebook: &Codebook, qber: f64, frames: usize, seed: u64) -> Result<Vec<FrameRun>, LdpcError> {
    let sel = codebook.select_rate(qber)?;
    let base = codebook.code(sel.code_index)?;
    let mut decoder = Decoder::new(&base.code);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = codebook.frame_len();
    let mut runs = Vec::with_capacity(frames);
    for frame in 0..frames {
        let rate = codebook.adaptation(&sel, seed.wrapping_add(frame as u64))?;
        let alice: Vec<u8> = (0..n).map(|_| rng.random::<u8>() & 1).collect();
        let fill: Vec<u8> = (0..rate.num_punctured()).map(|_| rng.random::<u8>() & 1).collect();
        let mut errors = 0usize;
        let bob: Vec<u8> = alice
            .iter()
            .map(|&b| {
                let flip = rng.random::<f64>() < qber;
                errors += usize::from(flip);
                b ^ u8::from(flip)
            })
            .collect();
        let word = rate.assemble_word(&alice, &fill)?;
        let syndrome = base.code.syndrome(&word)?;
        let out = decoder.decode(&rate, &bob, &syndrome, qber, codebook.config().max_iters)?;
        let converged = out.corrected.as_deref() == Some(&alice[..]);
        runs.push(FrameRun {
            frame_len: n,
            qber: errors as f64 / n as f64,
            leak_bits: rate.leak_bits(),
            converged,
            iterations: out.iterations,
        });
    }
    Ok(runs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn efficiency_ignores_failed_frames() {
        let h = binary_entropy(0.05);
        let runs = [
            FrameRun {
                frame_len: 1000,
                qber: 0.05,
                leak_bits: (1200.0 * h) as usize,
                converged: true,
                iterations: 10,
            },
            FrameRun {
                frame_len: 1000,
                qber: 0.05,
                leak_bits: 10,
                converged: false,
                iterations: 60,
            },
        ];
        let r = measure_efficiency(&runs);
        assert!((r.f - 1.2).abs() < 0.01);
        assert_eq!((r.converged, r.failed), (1, 1));
        assert!(measure_efficiency(&[]).f.is_nan());
    }
}
