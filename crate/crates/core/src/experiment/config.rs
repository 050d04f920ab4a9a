//! Flat `key = value` experiment files.
//!
//! Blank lines and everything after `#` are ignored. Every key may appear at
//! most once and unknown keys are errors. Relative paths are resolved
//! against the directory of the file. Keys that are not given keep the
//! defaults of [`ExperimentConfig::default`].

use std::collections::HashSet;
use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Duration;

use super::ExperimentError;
use crate::ldpc::{Codebook, CodebookConfig, DegreeDistribution, DEFAULT_MAX_ITERS};
use crate::security::{optimize_epsilons, CurveModel, SecurityBudget};
use crate::session::{bootstrap_key_from_seed, SessionConfig};
use crate::sim::{CompensatorConfig, DriftConfig, DriftModel, SystemParams};

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub params: SystemParams,
    pub drift: DriftConfig,
    pub compensator: CompensatorConfig,

    /// Key bits per frame `n`; the sample is `m = floor(n / 10)`.
    pub frame_len: usize,
    pub frames: usize,
    pub eps_total: f64,
    pub eps_pe: f64,
    pub eps_cor: f64,
    pub eps_auth: f64,
    pub rate_margin_sigma: f64,
    /// Code family overrides; `None` keeps the frame-length defaults.
    pub f_model: Option<f64>,
    pub f_retry: Option<f64>,
    pub max_iters: usize,
    pub code_seed: u64,
    /// Directory of degree distribution files replacing the shipped set.
    pub code_set: Option<PathBuf>,

    /// Seed of the link simulation and of Alice's state sequence.
    pub seed: u64,
    pub alice_seed: Option<u64>,
    pub bob_seed: Option<u64>,
    pub bootstrap_seed: u64,

    /// Simulated time for `simulate`.
    pub duration_s: f64,
    pub chunk_s: f64,
    pub timeout_s: f64,
    pub out_dir: PathBuf,
    pub endpoint: Option<String>,
    /// Recorded pulses replayed by Alice instead of the regenerated source.
    pub pulse_records: Option<PathBuf>,
    /// Recorded clicks replayed by Bob instead of the live simulator.
    pub click_records: Option<PathBuf>,

    pub q_intrinsic: f64,
    pub curve_f: f64,
    pub curve_frame_len: usize,
    pub anchor_loss_db: Option<f64>,
    pub anchor_rate_hz: Option<f64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            params: SystemParams::default(),
            drift: DriftConfig::none(),
            compensator: CompensatorConfig::default(),
            frame_len: 200_000,
            frames: 10,
            eps_total: SecurityBudget::EPS_TOTAL,
            eps_pe: SecurityBudget::EPS_PE,
            eps_cor: SecurityBudget::EPS_COR,
            eps_auth: SecurityBudget::EPS_AUTH,
            rate_margin_sigma: 1.0,
            f_model: None,
            f_retry: None,
            max_iters: DEFAULT_MAX_ITERS,
            code_seed: 7,
            code_set: None,
            seed: 1,
            alice_seed: None,
            bob_seed: None,
            bootstrap_seed: 99,
            duration_s: 1.0,
            chunk_s: 0.5,
            timeout_s: 120.0,
            out_dir: PathBuf::from("out"),
            endpoint: None,
            pulse_records: None,
            click_records: None,
            q_intrinsic: 0.0325,
            curve_f: 1.17,
            curve_frame_len: 200_000,
            anchor_loss_db: Some(9.6),
            anchor_rate_hz: Some(47_900.0),
        }
    }
}

/// Keys that only affect one station or the local run and are left out of
/// the digest the peers compare.
const LOCAL_KEYS: [&str; 9] = [
    "alice_seed",
    "bob_seed",
    "duration_s",
    "timeout_s",
    "out_dir",
    "endpoint",
    "pulse_records",
    "click_records",
    "code_set",
];

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T, String>
where
    T::Err: Display,
{
    value.parse::<T>().map_err(|e| format!("{key}: {value:?}: {e}"))
}

fn parse_bool(key: &str, value: &str) -> Result<bool, String> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(format!("{key}: {value:?} is not a boolean")),
    }
}

fn opt<T: Display>(v: &Option<T>) -> String {
    v.as_ref().map_or_else(|| "none".to_string(), |v| v.to_string())
}

fn parse_opt<T: FromStr>(key: &str, value: &str) -> Result<Option<T>, String>
where
    T::Err: Display,
{
    if value == "none" {
        Ok(None)
    } else {
        parse_num(key, value).map(Some)
    }
}

impl ExperimentConfig {
    /// Reads a config file; referenced files must exist.
    pub fn load(path: &Path) -> Result<Self, ExperimentError> {
        let text = fs::read_to_string(path).map_err(|e| ExperimentError::Io(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base)
    }

    /// Parses config text with relative paths resolved against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self, ExperimentError> {
        let mut cfg = Self::default();
        let mut seen = HashSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| ExperimentError::Config { line: i + 1, msg };
            let (key, value) = line
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| err(format!("expected key = value, got {line:?}")))?;
            if !seen.insert(key.to_string()) {
                return Err(err(format!("duplicate key {key}")));
            }
            cfg.set(key, value, base).map_err(err)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn set(&mut self, key: &str, v: &str, base: &Path) -> Result<(), String> {
        let p = &mut self.params;
        let path = |v: &str| -> Result<Option<PathBuf>, String> {
            if v == "none" {
                return Ok(None);
            }
            let p = base.join(v);
            if !p.exists() {
                return Err(format!("{key}: {} does not exist", p.display()));
            }
            Ok(Some(p))
        };
        match key {
            "source_rate_hz" => p.source_rate_hz = parse_num(key, v)?,
            "eta_qd" => p.eta_qd = parse_num(key, v)?,
            "eta_transport" => p.eta_transport = parse_num(key, v)?,
            "eta_fc" => p.eta_fc = parse_num(key, v)?,
            "g2" => p.g2 = parse_num(key, v)?,
            "eta_encoder" => p.eta_encoder = parse_num(key, v)?,
            "channel_loss_db" => p.channel_loss_db = parse_num(key, v)?,
            "eta_receiver" => p.eta_receiver = parse_num(key, v)?,
            "detector_efficiency" => p.detector_efficiency = parse_num(key, v)?,
            "dark_count_hz" => p.dark_count_hz = parse_num(key, v)?,
            "dead_time_s" => p.dead_time_s = parse_num(key, v)?,
            "temporal_window_s" => p.temporal_window_s = parse_num(key, v)?,
            "timing_jitter_s" => p.timing_jitter_s = parse_num(key, v)?,
            "burst_len" => p.burst_len = parse_num(key, v)?,
            "basis_ratio" => p.basis_ratio = parse_num(key, v)?,
            "misalignment_qber" => p.misalignment_qber = parse_num(key, v)?,
            "drift_step_sigma" => self.drift.step_sigma = parse_num(key, v)?,
            "drift_amplitude" => self.drift.amplitude = parse_num(key, v)?,
            "drift_tick_s" => self.drift.tick_s = parse_num(key, v)?,
            "compensator" => self.compensator.enabled = parse_bool(key, v)?,
            "compensator_trigger_qber" => self.compensator.trigger_qber = parse_num(key, v)?,
            "compensator_step" => self.compensator.step = parse_num(key, v)?,
            "compensator_min_step" => self.compensator.min_step = parse_num(key, v)?,
            "compensator_max_probes" => self.compensator.max_probes = parse_num(key, v)?,
            "frame_len" => self.frame_len = parse_num(key, v)?,
            "frames" => self.frames = parse_num(key, v)?,
            "eps_total" => self.eps_total = parse_num(key, v)?,
            "eps_pe" => self.eps_pe = parse_num(key, v)?,
            "eps_cor" => self.eps_cor = parse_num(key, v)?,
            "eps_auth" => self.eps_auth = parse_num(key, v)?,
            "rate_margin_sigma" => self.rate_margin_sigma = parse_num(key, v)?,
            "f_model" => self.f_model = parse_opt(key, v)?,
            "f_retry" => self.f_retry = parse_opt(key, v)?,
            "max_iters" => self.max_iters = parse_num(key, v)?,
            "code_seed" => self.code_seed = parse_num(key, v)?,
            "code_set" => self.code_set = path(v)?,
            "seed" => self.seed = parse_num(key, v)?,
            "alice_seed" => self.alice_seed = parse_opt(key, v)?,
            "bob_seed" => self.bob_seed = parse_opt(key, v)?,
            "bootstrap_seed" => self.bootstrap_seed = parse_num(key, v)?,
            "duration_s" => self.duration_s = parse_num(key, v)?,
            "chunk_s" => self.chunk_s = parse_num(key, v)?,
            "timeout_s" => self.timeout_s = parse_num(key, v)?,
            "out_dir" => self.out_dir = base.join(v),
            "endpoint" => self.endpoint = (v != "none").then(|| v.to_string()),
            "pulse_records" => self.pulse_records = path(v)?,
            "click_records" => self.click_records = path(v)?,
            "q_intrinsic" => self.q_intrinsic = parse_num(key, v)?,
            "curve_f" => self.curve_f = parse_num(key, v)?,
            "curve_frame_len" => self.curve_frame_len = parse_num(key, v)?,
            "anchor_loss_db" => self.anchor_loss_db = parse_opt(key, v)?,
            "anchor_rate_hz" => self.anchor_rate_hz = parse_opt(key, v)?,
            _ => return Err(format!("unknown key {key}")),
        }
        Ok(())
    }

    /// Every key with its current value, in file order.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let p = &self.params;
        let path = |p: &Option<PathBuf>| p.as_ref().map_or("none".to_string(), |p| p.display().to_string());
        vec![
            ("source_rate_hz", p.source_rate_hz.to_string()),
            ("eta_qd", p.eta_qd.to_string()),
            ("eta_transport", p.eta_transport.to_string()),
            ("eta_fc", p.eta_fc.to_string()),
            ("g2", p.g2.to_string()),
            ("eta_encoder", p.eta_encoder.to_string()),
            ("channel_loss_db", p.channel_loss_db.to_string()),
            ("eta_receiver", p.eta_receiver.to_string()),
            ("detector_efficiency", p.detector_efficiency.to_string()),
            ("dark_count_hz", p.dark_count_hz.to_string()),
            ("dead_time_s", p.dead_time_s.to_string()),
            ("temporal_window_s", p.temporal_window_s.to_string()),
            ("timing_jitter_s", p.timing_jitter_s.to_string()),
            ("burst_len", p.burst_len.to_string()),
            ("basis_ratio", p.basis_ratio.to_string()),
            ("misalignment_qber", p.misalignment_qber.to_string()),
            ("drift_step_sigma", self.drift.step_sigma.to_string()),
            ("drift_amplitude", self.drift.amplitude.to_string()),
            ("drift_tick_s", self.drift.tick_s.to_string()),
            ("compensator", self.compensator.enabled.to_string()),
            ("compensator_trigger_qber", self.compensator.trigger_qber.to_string()),
            ("compensator_step", self.compensator.step.to_string()),
            ("compensator_min_step", self.compensator.min_step.to_string()),
            ("compensator_max_probes", self.compensator.max_probes.to_string()),
            ("frame_len", self.frame_len.to_string()),
            ("frames", self.frames.to_string()),
            ("eps_total", self.eps_total.to_string()),
            ("eps_pe", self.eps_pe.to_string()),
            ("eps_cor", self.eps_cor.to_string()),
            ("eps_auth", self.eps_auth.to_string()),
            ("rate_margin_sigma", self.rate_margin_sigma.to_string()),
            ("f_model", opt(&self.f_model)),
            ("f_retry", opt(&self.f_retry)),
            ("max_iters", self.max_iters.to_string()),
            ("code_seed", self.code_seed.to_string()),
            ("code_set", path(&self.code_set)),
            ("seed", self.seed.to_string()),
            ("alice_seed", opt(&self.alice_seed)),
            ("bob_seed", opt(&self.bob_seed)),
            ("bootstrap_seed", self.bootstrap_seed.to_string()),
            ("duration_s", self.duration_s.to_string()),
            ("chunk_s", self.chunk_s.to_string()),
            ("timeout_s", self.timeout_s.to_string()),
            ("out_dir", self.out_dir.display().to_string()),
            ("endpoint", opt(&self.endpoint)),
            ("pulse_records", path(&self.pulse_records)),
            ("click_records", path(&self.click_records)),
            ("q_intrinsic", self.q_intrinsic.to_string()),
            ("curve_f", self.curve_f.to_string()),
            ("curve_frame_len", self.curve_frame_len.to_string()),
            ("anchor_loss_db", opt(&self.anchor_loss_db)),
            ("anchor_rate_hz", opt(&self.anchor_rate_hz)),
        ]
    }

    /// The config as a file that parses back to the same values.
    pub fn to_text(&self) -> String {
        self.entries()
            .into_iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }

    /// Canonical text of the keys both peers must agree on.
    pub fn shared_text(&self) -> String {
        self.entries()
            .into_iter()
            .filter(|(k, _)| !LOCAL_KEYS.contains(k))
            .map(|(k, v)| format!("{k}={v};"))
            .collect()
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        self.params.validate()?;
        self.drift.validate()?;
        let bad = |msg: &str| {
            Err(ExperimentError::Config {
                line: 0,
                msg: msg.to_string(),
            })
        };
        if self.frame_len < 10 || self.curve_frame_len < 10 {
            return bad("frame lengths must be at least 10");
        }
        if !(self.duration_s >= 0.0 && self.duration_s.is_finite()) {
            return bad("duration_s must be finite and non-negative");
        }
        if !(self.chunk_s > 0.0) || !(self.timeout_s > 0.0) {
            return bad("chunk_s and timeout_s must be positive");
        }
        if self.anchor_loss_db.is_some() != self.anchor_rate_hz.is_some() {
            return bad("anchor_loss_db and anchor_rate_hz go together");
        }
        if self.max_iters == 0 {
            return bad("max_iters must be positive");
        }
        Ok(())
    }

    pub fn alice_seed(&self) -> u64 {
        self.alice_seed.unwrap_or(self.seed.wrapping_mul(2).wrapping_add(1))
    }

    pub fn bob_seed(&self) -> u64 {
        self.bob_seed.unwrap_or(self.seed.wrapping_mul(2).wrapping_add(2))
    }

    pub fn drift_model(&self) -> Result<DriftModel, ExperimentError> {
        Ok(DriftModel::new(self.drift, self.compensator, self.seed)?)
    }

    /// Security budget for a block of `n` bits with the configured ε values.
    pub fn budget(&self, n: usize) -> Result<SecurityBudget, ExperimentError> {
        let split = optimize_epsilons(self.eps_total, self.eps_pe, self.eps_cor, self.eps_auth, n)?;
        let b = SecurityBudget {
            eps_total: self.eps_total,
            eps_pe: self.eps_pe,
            eps_cor: self.eps_cor,
            eps_pa: split.eps_pa,
            eps_bar: split.eps_bar,
            eps_auth: self.eps_auth,
            leak_ev: SecurityBudget::LEAK_EV,
            tag_auth_bits: SecurityBudget::TAG_AUTH_BITS,
        };
        b.validate()?;
        Ok(b)
    }

    pub fn codebook_config(&self) -> Result<CodebookConfig, ExperimentError> {
        let mut c = CodebookConfig::new(self.frame_len, self.code_seed);
        if let Some(f) = self.f_model {
            c.f_model = f;
            c.f_retry = f + 0.12;
        }
        if let Some(f) = self.f_retry {
            c.f_retry = f;
        }
        c.max_iters = self.max_iters;
        if let Some(dir) = &self.code_set {
            c.codes = load_code_set(dir)?;
        }
        Ok(c)
    }

    /// Builds the code family; this runs PEG for every base code.
    pub fn codebook(&self) -> Result<Codebook, ExperimentError> {
        Ok(Codebook::new(self.codebook_config()?)?)
    }

    pub fn session_config(&self) -> Result<SessionConfig, ExperimentError> {
        let mut s = SessionConfig::new(
            self.frame_len,
            self.frames,
            &self.params,
            bootstrap_key_from_seed(self.bootstrap_seed),
        )?;
        s.budget = self.budget(self.frame_len)?;
        s.rate_margin_sigma = self.rate_margin_sigma;
        s.chunk_s = self.chunk_s;
        s.read_timeout = Duration::from_secs_f64(self.timeout_s);
        Ok(s)
    }

    pub fn curve_model(&self) -> Result<CurveModel, ExperimentError> {
        let mut m = CurveModel::new(self.params.clone(), self.curve_frame_len)?;
        m.budget = self.budget(self.curve_frame_len)?;
        m.q_intrinsic = self.q_intrinsic;
        m.f = self.curve_f;
        m.anchor = self.anchor_loss_db.zip(self.anchor_rate_hz);
        Ok(m)
    }
}

/// Reads every `*.txt` degree distribution in `dir`. The nominal rate of a
/// code is its design rate rounded to two decimals.
pub fn load_code_set(dir: &Path) -> Result<Vec<(f64, DegreeDistribution)>, ExperimentError> {
    let io = |e: std::io::Error| ExperimentError::Io(format!("{}: {e}", dir.display()));
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(io)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "txt"))
        .collect();
    files.sort();
    let mut codes = Vec::new();
    for f in files {
        let text = fs::read_to_string(&f).map_err(io)?;
        let d = DegreeDistribution::parse(&text)?;
        codes.push(((d.design_rate() * 100.0).round() / 100.0, d));
    }
    if codes.is_empty() {
        return Err(ExperimentError::Io(format!("{}: no distribution files", dir.display())));
    }
    codes.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(codes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trips() {
        let mut c = ExperimentConfig::default();
        c.f_model = Some(1.2);
        c.anchor_loss_db = None;
        c.anchor_rate_hz = None;
        c.endpoint = Some("127.0.0.1:7000".into());
        let back = ExperimentConfig::parse(&c.to_text(), Path::new("")).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn rejects_unknown_duplicate_and_missing() {
        let base = Path::new(".");
        assert!(ExperimentConfig::parse("frames = 3\nframe = 3\n", base).is_err());
        assert!(ExperimentConfig::parse("frames = 3\nframes = 4\n", base).is_err());
        assert!(ExperimentConfig::parse("code_set = /no/such/dir\n", base).is_err());
        let c = ExperimentConfig::parse("# comment\nframes = 3 # trailing\n\n", base).unwrap();
        assert_eq!(c.frames, 3);
    }
}
