use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::net::{TcpListener, TcpStream};
use std::path::Path;
use std::thread;
use std::time::{Duration, Instant};

use super::{ExperimentConfig, ExperimentError};
use crate::bits::pack_bytes;
use crate::protocol::sift_with_source;
use crate::security::{rate_vs_loss_curve, write_curve_csv, CurvePoint, LeakageBreakdown};
use crate::session::{
    read_frame_log, run_alice, run_bob, FrameRecord, FrameStatus, RecordedClicks, RecordedPulses, Role, SessionReport,
};
use crate::sim::{read_click_records, read_pulse_records, write_click_records, write_pulse_records, AliceSource};
use crate::sim::{LinkSimulator, PulseRecord};

pub const CLICKS_FILE: &str = "clicks.qkdr";
pub const PULSES_FILE: &str = "pulses.qkdr";
pub const SUMMARY_FILE: &str = "simulate.txt";
pub const CURVE_FILE: &str = "rate_vs_loss.csv";

/// Detection statistics of one simulation run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulateSummary {
    pub duration_s: f64,
    pub pulses: u64,
    pub clicks: u64,
    pub dark_clicks: u64,
    pub two_photon_clicks: u64,
    pub dropped_window: u64,
    pub dropped_dead_time: u64,
    pub click_rate_hz: f64,
    /// `ν_S η_S η_E η_QC η_R` plus the accepted dark rate.
    pub expected_rate_hz: f64,
    pub sifted: u64,
    pub sifted_errors: u64,
}

impl SimulateSummary {
    pub fn sift_fraction(&self) -> f64 {
        self.sifted as f64 / self.clicks.max(1) as f64
    }

    pub fn qber(&self) -> f64 {
        self.sifted_errors as f64 / self.sifted.max(1) as f64
    }

    pub fn to_text(&self) -> String {
        format!(
            "duration_s = {}\npulses = {}\nclicks = {}\ndark_clicks = {}\ntwo_photon_clicks = {}\n\
             dropped_window = {}\ndropped_dead_time = {}\nclick_rate_hz = {:.1}\nexpected_rate_hz = {:.1}\n\
             sifted = {}\nsift_fraction = {:.5}\nqber = {:.5}\n",
            self.duration_s,
            self.pulses,
            self.clicks,
            self.dark_clicks,
            self.two_photon_clicks,
            self.dropped_window,
            self.dropped_dead_time,
            self.click_rate_hz,
            self.expected_rate_hz,
            self.sifted,
            self.sift_fraction(),
            self.qber()
        )
    }
}

/// Runs the link for `duration_s` and writes click records, Alice's pulse
/// records for every clicked slot, and a summary to `out_dir`.
pub fn cmd_simulate(cfg: &ExperimentConfig) -> Result<SimulateSummary, ExperimentError> {
    let p = &cfg.params;
    let mut sim = LinkSimulator::new(p.clone(), cfg.drift_model()?, cfg.seed)?;
    let clicks = sim.run_for(cfg.duration_s);
    let stats = sim.stats();
    let mut alice = sim.alice();

    let mut pulses: Vec<PulseRecord> = Vec::new();
    for c in &clicks {
        if pulses.last().is_some_and(|q| q.pulse_index == c.pulse_index) {
            let last = pulses.last_mut().expect("checked");
            last.photon_count = last.photon_count.max(u8::from(!c.is_dark));
            continue;
        }
        let (basis, bit) = alice.prepare(c.pulse_index);
        pulses.push(PulseRecord {
            pulse_index: c.pulse_index,
            basis,
            bit,
            photon_count: u8::from(!c.is_dark),
            timestamp_s: c.pulse_index as f64 * p.pulse_period(),
        });
    }
    let sifted = sift_with_source(&mut AliceSource::new(cfg.seed, p.basis_ratio), &clicks, cfg.seed)?;

    let duration = stats.duration_s(p);
    let summary = SimulateSummary {
        duration_s: duration,
        pulses: stats.pulses,
        clicks: stats.accepted,
        dark_clicks: stats.accepted_dark,
        two_photon_clicks: sim.two_photon_clicks(),
        dropped_window: stats.dropped_window,
        dropped_dead_time: stats.dropped_dead_time,
        click_rate_hz: if duration > 0.0 {
            stats.accepted as f64 / duration
        } else {
            0.0
        },
        expected_rate_hz: p.source_rate_hz * p.eta_pulse() * p.photon_transmission()
            + p.source_rate_hz * p.dark_prob_per_pulse(),
        sifted: sifted.len() as u64,
        sifted_errors: sifted.iter().filter(|s| s.alice_bit != s.bob_bit).count() as u64,
    };

    fs::create_dir_all(&cfg.out_dir)?;
    let mut w = BufWriter::new(File::create(cfg.out_dir.join(CLICKS_FILE))?);
    write_click_records(&mut w, &clicks)?;
    w.flush()?;
    let mut w = BufWriter::new(File::create(cfg.out_dir.join(PULSES_FILE))?);
    write_pulse_records(&mut w, &pulses)?;
    w.flush()?;
    fs::write(cfg.out_dir.join(SUMMARY_FILE), summary.to_text())?;
    log::info!(
        "simulated {duration} s: {} clicks, {} sifted",
        summary.clicks,
        summary.sifted
    );
    Ok(summary)
}

/// Writes the rate-vs-loss curve CSV to `out_dir`.
pub fn cmd_sweep(cfg: &ExperimentConfig, losses: &[f64]) -> Result<Vec<CurvePoint>, ExperimentError> {
    let points = rate_vs_loss_curve(&cfg.curve_model()?, losses)?;
    fs::create_dir_all(&cfg.out_dir)?;
    let mut w = BufWriter::new(File::create(cfg.out_dir.join(CURVE_FILE))?);
    write_curve_csv(&points, &mut w)?;
    w.flush()?;
    Ok(points)
}

/// How a station reaches its peer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Endpoint {
    Listen(String),
    Connect(String),
}

impl Endpoint {
    fn open(&self, timeout: Duration) -> Result<TcpStream, ExperimentError> {
        let stream = match self {
            Endpoint::Listen(addr) => {
                let listener = TcpListener::bind(addr)?;
                log::info!("listening on {}", listener.local_addr()?);
                listener.accept()?.0
            }
            Endpoint::Connect(addr) => {
                let deadline = Instant::now() + timeout;
                loop {
                    match TcpStream::connect(addr) {
                        Ok(s) => break s,
                        Err(e) if Instant::now() < deadline => {
                            log::debug!("connect {addr}: {e}, retrying");
                            thread::sleep(Duration::from_millis(200));
                        }
                        Err(e) => return Err(e.into()),
                    }
                }
            }
        };
        stream.set_nodelay(true)?;
        stream.set_read_timeout(Some(timeout))?;
        Ok(stream)
    }
}

fn write_session_outputs(cfg: &ExperimentConfig, report: &SessionReport) -> Result<(), ExperimentError> {
    let role = role_name(report.role);
    fs::create_dir_all(&cfg.out_dir)?;
    let log = BufWriter::new(File::create(cfg.out_dir.join(format!("{role}_frames.csv")))?);
    report.write_frame_log(log)?;
    fs::write(cfg.out_dir.join(format!("{role}_summary.txt")), report.summary())?;
    let key: Vec<u8> = report.keys.iter().flat_map(|k| pack_bytes(&k.bits)).collect();
    fs::write(cfg.out_dir.join(format!("{role}_key.bin")), key)?;
    Ok(())
}

fn read_records<T>(
    path: &Path,
    read: impl FnOnce(&mut BufReader<File>) -> Result<T, crate::sim::SimError>,
) -> Result<T, ExperimentError> {
    let mut r = BufReader::new(File::open(path).map_err(|e| ExperimentError::Io(format!("{}: {e}", path.display())))?);
    Ok(read(&mut r)?)
}

/// Runs Alice against a peer and writes her frame log, summary and key.
pub fn cmd_alice(cfg: &ExperimentConfig, endpoint: &Endpoint) -> Result<SessionReport, ExperimentError> {
    let session = cfg.session_config()?;
    let codebook = cfg.codebook()?;
    let stream = endpoint.open(session.read_timeout)?;
    let extra = cfg.shared_text();
    let report = match &cfg.pulse_records {
        Some(path) => {
            let mut src = RecordedPulses::new(read_records(path, read_pulse_records)?);
            run_alice(stream, &session, &codebook, &mut src, cfg.alice_seed(), &extra)
        }
        None => {
            let mut src = AliceSource::new(cfg.seed, cfg.params.basis_ratio);
            run_alice(stream, &session, &codebook, &mut src, cfg.alice_seed(), &extra)
        }
    };
    write_session_outputs(cfg, &report)?;
    Ok(report)
}

/// Runs Bob against a peer and writes his frame log, summary and key.
pub fn cmd_bob(cfg: &ExperimentConfig, endpoint: &Endpoint) -> Result<SessionReport, ExperimentError> {
    let session = cfg.session_config()?;
    let codebook = cfg.codebook()?;
    let stream = endpoint.open(session.read_timeout)?;
    let extra = cfg.shared_text();
    let report = match &cfg.click_records {
        Some(path) => {
            let mut src = RecordedClicks::new(read_records(path, read_click_records)?);
            run_bob(stream, &session, &codebook, &mut src, cfg.bob_seed(), &extra)
        }
        None => {
            let mut src = LinkSimulator::new(cfg.params.clone(), cfg.drift_model()?, cfg.seed)?;
            run_bob(stream, &session, &codebook, &mut src, cfg.bob_seed(), &extra)
        }
    };
    write_session_outputs(cfg, &report)?;
    Ok(report)
}

/// Per-frame and aggregate split of the sifted bits into key and leakage.
#[derive(Debug, Clone, PartialEq)]
pub struct LeakageReport {
    pub frames: Vec<FrameRecord>,
    /// Breakdowns of the frames that reached the key length bound.
    pub breakdowns: Vec<(u64, LeakageBreakdown)>,
    /// Category sums over `breakdowns`, labels as in
    /// [`LeakageBreakdown::entries`].
    pub totals: Vec<(&'static str, f64)>,
    pub total_n: usize,
    pub total_m: usize,
    pub total_key: usize,
    pub total_syndrome: usize,
    pub total_leak_ec: usize,
}

impl LeakageReport {
    /// `sum l_key / sum (n + m)` over the bounded frames.
    pub fn secret_fraction(&self) -> f64 {
        self.total_key as f64 / (self.total_n + self.total_m).max(1) as f64
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "frames {}", self.frames.len());
        for st in [
            FrameStatus::Ok,
            FrameStatus::NoKey,
            FrameStatus::DiscardScan,
            FrameStatus::DiscardQber,
            FrameStatus::DecodeFailed,
            FrameStatus::VerifyFailed,
        ] {
            let c = self.frames.iter().filter(|f| f.status == st).count();
            if c > 0 {
                let _ = writeln!(s, "  {:<20} {c}", st.as_str());
            }
        }
        let _ = writeln!(s, "aggregate {{");
        let _ = writeln!(s, "  frames_bounded       {}", self.breakdowns.len());
        let _ = writeln!(s, "  sifted_bits          {}", self.total_n);
        let _ = writeln!(s, "  sample_bits          {}", self.total_m);
        let _ = writeln!(s, "  syndrome_bits        {}", self.total_syndrome);
        let _ = writeln!(s, "  leak_ec              {}", self.total_leak_ec);
        let n = self.total_n.max(1) as f64;
        for (label, v) in &self.totals {
            let _ = writeln!(s, "  {label:<20} {v:>14.1}  {:>7.3}%", 100.0 * v / n);
        }
        let _ = writeln!(s, "  secret_fraction      {:.4}", self.secret_fraction());
        let _ = writeln!(s, "}}");
        for (id, b) in &self.breakdowns {
            let f = self
                .frames
                .iter()
                .find(|f| f.frame_id == *id)
                .expect("frame of breakdown");
            let _ = write!(
                s,
                "frame {id} {{ status {}, q_hat {:.5}, q_tilde {:.5}, syndrome_bits {}, leak_ec {}",
                f.status.as_str(),
                f.q_hat.unwrap_or(f64::NAN),
                f.q_tilde.unwrap_or(f64::NAN),
                f.syndrome_bits,
                f.leak_ec
            );
            for (label, v) in b.entries() {
                let _ = write!(s, ", {label} {v:.1}");
            }
            let _ = writeln!(s, " }}");
        }
        s
    }
}

/// Builds the report and checks that every frame's categories sum to `n`
/// within one bit and that no category is negative.
pub fn leakage_report(frames: &[FrameRecord]) -> Result<LeakageReport, ExperimentError> {
    let mut breakdowns = Vec::new();
    let mut totals: Vec<(&'static str, f64)> = Vec::new();
    let (mut total_n, mut total_m, mut total_key, mut total_syndrome, mut total_leak_ec) = (0, 0, 0, 0, 0);
    for f in frames {
        let Some(b) = f.breakdown() else { continue };
        if (b.total() - b.n as f64).abs() > 1.0 {
            return Err(ExperimentError::Report(format!(
                "frame {}: categories sum to {} for n = {}",
                f.frame_id,
                b.total(),
                b.n
            )));
        }
        // Float error in the entropy differences is far below a bit.
        if let Some((label, v)) = b.entries().into_iter().find(|(_, v)| *v < -1e-6) {
            return Err(ExperimentError::Report(format!(
                "frame {}: {label} is negative ({v})",
                f.frame_id
            )));
        }
        if totals.is_empty() {
            totals = b.entries().iter().map(|(l, _)| (*l, 0.0)).collect();
        }
        for (t, (_, v)) in totals.iter_mut().zip(b.entries()) {
            t.1 += v;
        }
        total_n += f.n;
        total_m += f.m;
        total_key += f.l_key;
        total_syndrome += f.syndrome_bits;
        total_leak_ec += f.leak_ec;
        breakdowns.push((f.frame_id, b));
    }
    Ok(LeakageReport {
        frames: frames.to_vec(),
        breakdowns,
        totals,
        total_n,
        total_m,
        total_key,
        total_syndrome,
        total_leak_ec,
    })
}

/// Reads a frame log written by a session and renders its breakdown.
pub fn cmd_report(log: &Path) -> Result<LeakageReport, ExperimentError> {
    let file = File::open(log).map_err(|e| ExperimentError::Io(format!("{}: {e}", log.display())))?;
    let frames = read_frame_log(BufReader::new(file))?;
    leakage_report(&frames)
}

fn role_name(r: Role) -> &'static str {
    match r {
        Role::Alice => "alice",
        Role::Bob => "bob",
    }
}
