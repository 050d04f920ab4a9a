//! Secret key rate against channel loss.

use std::io::Write;

use super::{
    asymptotic_gllp_rate, finite_key_length, gllp_factor, multi_photon_prob, SecurityBudget, SecurityError,
    DEFAULT_SIFT_FACTOR,
};
use crate::protocol::{qber_upper_bound, sample_count};
use crate::sim::SystemParams;

/// Version line written before the CSV header of a curve.
pub const CURVE_CSV_VERSION: &str = "# qkd-rate-vs-loss v1";
pub const CURVE_CSV_HEADER: &str = "loss_db,click_rate_hz,qber,skr_finite_bps,skr_asymptotic_bps";

/// How detection rate and QBER depend on loss.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveModel {
    pub params: SystemParams,
    /// QBER of signal clicks; dark clicks add errors with probability 1/2.
    pub q_intrinsic: f64,
    /// Signal click rate pinned at one loss, `(loss_db, hz)`, instead of the
    /// chain product; it scales with the channel transmission.
    pub anchor: Option<(f64, f64)>,
    pub f: f64,
    pub sift_factor: f64,
    /// Block length of the finite-key curve.
    pub frame_len: usize,
    pub budget: SecurityBudget,
}

impl CurveModel {
    pub fn new(params: SystemParams, frame_len: usize) -> Result<Self, SecurityError> {
        Ok(Self {
            params,
            q_intrinsic: 0.0325,
            anchor: None,
            f: 1.17,
            sift_factor: DEFAULT_SIFT_FACTOR,
            frame_len,
            budget: SecurityBudget::for_frame(frame_len)?,
        })
    }

    pub fn gllp_a(&self) -> Result<f64, SecurityError> {
        let p = &self.params;
        gllp_factor(
            multi_photon_prob(p.g2, p.eta_source_cband(), p.eta_encoder)?,
            p.detector_efficiency,
        )
    }

    /// Signal clicks per second at `loss_db`.
    pub fn signal_rate(&self, loss_db: f64) -> f64 {
        match self.anchor {
            Some((ref_db, hz)) => hz * 10f64.powf(-(loss_db - ref_db) / 10.0),
            None => SystemParams {
                channel_loss_db: loss_db,
                ..self.params.clone()
            }
            .expected_signal_rate(),
        }
    }

    /// Dark clicks per second falling inside the acceptance gates.
    pub fn dark_rate(&self) -> f64 {
        self.params.dark_prob_per_pulse() * self.params.source_rate_hz
    }

    pub fn point(&self, loss_db: f64) -> Result<CurvePoint, SecurityError> {
        let sig = self.signal_rate(loss_db);
        let dark = self.dark_rate();
        let clicks = sig + dark;
        let qber = if clicks > 0.0 {
            (self.q_intrinsic * sig + 0.5 * dark) / clicks
        } else {
            0.5
        };
        let a = self.gllp_a()?;
        let asymptotic = asymptotic_gllp_rate(clicks, self.sift_factor, qber, self.f, a);
        let n = self.frame_len;
        let m = sample_count(n);
        let q_tilde = qber_upper_bound(qber, m, self.budget.eps_pe)
            .map_err(|e| SecurityError::InvalidParameter(e.to_string()))?;
        let leak_ec = (self.f * n as f64 * super::binary_entropy(qber)).ceil() as usize;
        let nu_auth = 2 * self.budget.tag_auth_bits;
        let r = finite_key_length(n, q_tilde, leak_ec, nu_auth, a, &self.budget)?;
        let finite = clicks * self.sift_factor * r.l_key as f64 / (n + m) as f64;
        Ok(CurvePoint {
            loss_db,
            click_rate_hz: clicks,
            qber,
            skr_finite_bps: finite,
            skr_asymptotic_bps: asymptotic,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub loss_db: f64,
    pub click_rate_hz: f64,
    pub qber: f64,
    pub skr_finite_bps: f64,
    pub skr_asymptotic_bps: f64,
}

/// Evaluates the model at each loss.
pub fn rate_vs_loss_curve(model: &CurveModel, losses: &[f64]) -> Result<Vec<CurvePoint>, SecurityError> {
    losses.iter().map(|&l| model.point(l)).collect()
}

/// `start, start + step, ...` up to and including `stop`.
pub fn loss_range(start: f64, stop: f64, step: f64) -> Result<Vec<f64>, SecurityError> {
    if !(step > 0.0) || stop < start {
        return Err(SecurityError::InvalidParameter(format!(
            "bad loss range {start}:{stop}:{step}"
        )));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| start + i as f64 * step).collect())
}

pub fn write_curve_csv(points: &[CurvePoint], mut w: impl Write) -> std::io::Result<()> {
    writeln!(w, "{CURVE_CSV_VERSION}")?;
    writeln!(w, "{CURVE_CSV_HEADER}")?;
    for p in points {
        writeln!(
            w,
            "{},{:.3},{:.6},{:.3},{:.3}",
            p.loss_db, p.click_rate_hz, p.qber, p.skr_finite_bps, p.skr_asymptotic_bps
        )?;
    }
    Ok(())
}

/// Parses a curve written by [`write_curve_csv`], checking version and
/// header.
pub fn read_curve_csv(text: &str) -> Result<Vec<CurvePoint>, SecurityError> {
    let bad = |why: String| SecurityError::InvalidParameter(format!("curve csv: {why}"));
    let mut lines = text.lines();
    if lines.next() != Some(CURVE_CSV_VERSION) {
        return Err(bad("missing version line".into()));
    }
    if lines.next() != Some(CURVE_CSV_HEADER) {
        return Err(bad("unexpected header".into()));
    }
    lines
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let v: Vec<f64> = l
                .split(',')
                .map(|x| x.parse::<f64>().map_err(|e| bad(format!("{l:?}: {e}"))))
                .collect::<Result<_, _>>()?;
            if v.len() != 5 {
                return Err(bad(format!("{l:?} has {} fields", v.len())));
            }
            Ok(CurvePoint {
                loss_db: v[0],
                click_rate_hz: v[1],
                qber: v[2],
                skr_finite_bps: v[3],
                skr_asymptotic_bps: v[4],
            })
        })
        .collect()
}
