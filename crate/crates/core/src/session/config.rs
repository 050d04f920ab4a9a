use std::fmt::Write as _;
use std::time::Duration;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use super::SessionError;
use crate::hashing::{AUTH_TAG_BITS, BOOTSTRAP_KEY_BITS};
use crate::ldpc::Codebook;
use crate::security::{gllp_factor, multi_photon_prob, SecurityBudget};
use crate::sim::SystemParams;

/// Parameters both peers must agree on before a session starts.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionConfig {
    /// Key bits per frame (`n`); the estimation sample is `floor(n / 10)`.
    pub frame_len: usize,
    /// Frames Bob runs before closing.
    pub frames: usize,
    pub budget: SecurityBudget,
    /// GLLP factor `A`.
    pub gllp_a: f64,
    /// The rate is chosen for `q_hat + margin * sigma(q_hat)`.
    pub rate_margin_sigma: f64,
    /// Simulated link time per sifting round, s.
    pub chunk_s: f64,
    pub read_timeout: Duration,
    /// Pre-shared secret, [`BOOTSTRAP_KEY_BITS`] bits.
    pub bootstrap_key: Vec<u8>,
}

impl SessionConfig {
    /// Default post-processing for a frame length, with `A` derived from
    /// the link parameters.
    pub fn new(
        frame_len: usize,
        frames: usize,
        params: &SystemParams,
        bootstrap_key: Vec<u8>,
    ) -> Result<Self, SessionError> {
        let budget = SecurityBudget::for_frame(frame_len)?;
        let p_m = multi_photon_prob(params.g2, params.eta_source_cband(), params.eta_encoder)?;
        Ok(Self {
            frame_len,
            frames,
            budget,
            gllp_a: gllp_factor(p_m, params.detector_efficiency)?,
            rate_margin_sigma: 1.0,
            chunk_s: 0.5,
            read_timeout: Duration::from_secs(120),
            bootstrap_key,
        })
    }

    /// Authentication key bits consumed per frame: one tag each way.
    pub fn nu_auth(&self) -> usize {
        2 * AUTH_TAG_BITS as usize
    }

    pub fn sample_len(&self) -> usize {
        crate::protocol::sample_count(self.frame_len)
    }

    pub fn validate(&self, codebook: &Codebook) -> Result<(), SessionError> {
        if self.frame_len != codebook.frame_len() {
            return Err(SessionError::Config(format!(
                "frame length {} but codebook built for {}",
                self.frame_len,
                codebook.frame_len()
            )));
        }
        if self.bootstrap_key.len() != BOOTSTRAP_KEY_BITS {
            return Err(SessionError::Config(format!(
                "bootstrap key has {} bits, expected {BOOTSTRAP_KEY_BITS}",
                self.bootstrap_key.len()
            )));
        }
        if !(self.chunk_s > 0.0) || self.sample_len() == 0 {
            return Err(SessionError::Config(
                "chunk length and sample size must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Digest of everything the peers must share, the secret key excluded.
    pub fn digest(&self, codebook: &Codebook, extra: &str) -> [u8; 32] {
        let mut s = String::new();
        let b = &self.budget;
        let _ = write!(
            s,
            "n={};frames={};eps={:e},{:e},{:e},{:e},{:e},{:e};ev={};tag={};a={:e};margin={:e};",
            self.frame_len,
            self.frames,
            b.eps_total,
            b.eps_pe,
            b.eps_cor,
            b.eps_pa,
            b.eps_bar,
            b.eps_auth,
            b.leak_ev,
            b.tag_auth_bits,
            self.gllp_a,
            self.rate_margin_sigma
        );
        let c = codebook.config();
        let _ = write!(
            s,
            "codes={:?};delta={:e};seed={};f={:e},{:e};iters={};bfs={};",
            c.codes
                .iter()
                .map(|(r, d)| (r, d.variable(), d.check()))
                .collect::<Vec<_>>(),
            c.delta,
            c.seed,
            c.f_model,
            c.f_retry,
            c.max_iters,
            c.bfs_budget
        );
        s.push_str(extra);
        Sha256::digest(s.as_bytes()).into()
    }
}

/// A bootstrap key expanded from a seed, standing in for a key that was
/// agreed out of band.
pub fn bootstrap_key_from_seed(seed: u64) -> Vec<u8> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..BOOTSTRAP_KEY_BITS).map(|_| rng.random::<u8>() & 1).collect()
}
