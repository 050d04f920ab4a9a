use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Normal};

use super::{stream_rng, AliceSource, Basis, DriftModel, DriftState, PulseRecord, SimError, Stream, SystemParams};

/// Number of single-photon detectors: one per output of each basis.
pub const DETECTORS: usize = 4;

/// Marker for "no pulse"; not produced by the simulator, which attributes
/// every accepted click to the pulse slot whose gate it falls in.
pub const PULSE_NONE: u64 = u64::MAX;

/// One accepted detection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClickRecord {
    /// Pulse slot whose acceptance gate contains the click.
    pub pulse_index: u64,
    /// `basis * 2 + bit`.
    pub detector_id: u8,
    pub timestamp_s: f64,
    /// Simulation truth: the click came from a dark count.
    pub is_dark: bool,
    /// The compensator was scanning when the click happened.
    pub during_scan: bool,
}

impl ClickRecord {
    pub fn basis(&self) -> Basis {
        Basis::from_index(self.detector_id >> 1)
    }

    pub fn bit(&self) -> u8 {
        self.detector_id & 1
    }
}

/// Counters of a simulation run.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LinkStats {
    pub pulses: u64,
    pub signal_candidates: u64,
    pub dark_candidates: u64,
    pub dropped_window: u64,
    pub dropped_dead_time: u64,
    pub accepted: u64,
    pub accepted_dark: u64,
}

impl LinkStats {
    pub fn duration_s(&self, params: &SystemParams) -> f64 {
        self.pulses as f64 * params.pulse_period()
    }

    pub fn click_rate(&self, params: &SystemParams) -> f64 {
        self.accepted as f64 / self.duration_s(params)
    }
}

/// Gate and dead-time filtering shared by both simulation paths.
#[derive(Debug, Clone)]
struct DetectorBank {
    half_window: f64,
    dead_time: f64,
    last_click: [f64; DETECTORS],
    candidates: Vec<ClickRecord>,
}

impl DetectorBank {
    fn new(params: &SystemParams) -> Self {
        Self {
            half_window: params.temporal_window_s.min(params.pulse_period()) / 2.0,
            dead_time: params.dead_time_s,
            last_click: [f64::NEG_INFINITY; DETECTORS],
            candidates: Vec::new(),
        }
    }

    /// Stages an event if it falls inside the gate of slot `pulse_index`.
    fn offer(&mut self, click: ClickRecord, offset: f64, stats: &mut LinkStats) {
        if offset.abs() <= self.half_window {
            self.candidates.push(click);
        } else {
            stats.dropped_window += 1;
        }
    }

    /// Applies non-paralysable dead time in time order and appends the
    /// survivors to `out`.
    fn flush(&mut self, out: &mut Vec<ClickRecord>, stats: &mut LinkStats) {
        self.candidates.sort_by(|a, b| a.timestamp_s.total_cmp(&b.timestamp_s));
        for c in self.candidates.drain(..) {
            let d = c.detector_id as usize;
            if c.timestamp_s - self.last_click[d] < self.dead_time {
                stats.dropped_dead_time += 1;
                continue;
            }
            self.last_click[d] = c.timestamp_s;
            stats.accepted += 1;
            stats.accepted_dark += u64::from(c.is_dark);
            out.push(c);
        }
    }
}

/// Poisson dark-count processes, one per detector.
#[derive(Debug, Clone)]
struct DarkCounts {
    rngs: Vec<ChaCha8Rng>,
    next: [f64; DETECTORS],
    gap: Option<Exp<f64>>,
}

impl DarkCounts {
    fn new(params: &SystemParams, seed: u64) -> Self {
        let gap = (params.dark_count_hz > 0.0).then(|| Exp::new(params.dark_count_hz).expect("positive rate"));
        let mut rngs: Vec<ChaCha8Rng> = (0..DETECTORS as u64)
            .map(|d| stream_rng(seed, Stream::Dark, d))
            .collect();
        let mut next = [f64::INFINITY; DETECTORS];
        if let Some(g) = &gap {
            for d in 0..DETECTORS {
                next[d] = g.sample(&mut rngs[d]);
            }
        }
        Self { rngs, next, gap }
    }

    /// Offers every dark event whose nearest slot is below `slot_end`.
    fn emit(&mut self, slot_end: u64, period: f64, scanning: bool, bank: &mut DetectorBank, stats: &mut LinkStats) {
        let Some(gap) = self.gap else { return };
        for d in 0..DETECTORS {
            loop {
                let t = self.next[d];
                let slot = (t / period).round();
                if slot >= slot_end as f64 {
                    break;
                }
                stats.dark_candidates += 1;
                let click = ClickRecord {
                    pulse_index: slot as u64,
                    detector_id: d as u8,
                    timestamp_s: t,
                    is_dark: true,
                    during_scan: scanning,
                };
                bank.offer(click, t - slot * period, stats);
                self.next[d] = t + gap.sample(&mut self.rngs[d]);
            }
        }
    }
}

/// Failures before the first success, by inversion; exact for any `p`.
#[derive(Debug, Clone, Copy)]
struct Geometric {
    log_q: f64,
}

impl Geometric {
    fn new(p: f64) -> Self {
        Self { log_q: (-p).ln_1p() }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> u64 {
        if self.log_q == f64::NEG_INFINITY {
            return 0;
        }
        // 1 - U lies in (0, 1].
        let u = 1.0 - rng.random::<f64>();
        let g = (u.ln() / self.log_q).floor();
        if g >= 1e18 {
            1_000_000_000_000_000_000
        } else {
            g as u64
        }
    }
}

fn jitter_dist(params: &SystemParams) -> Option<Normal<f64>> {
    (params.timing_jitter_s > 0.0).then(|| Normal::new(0.0, params.timing_jitter_s).expect("finite jitter"))
}

/// Bob's measurement of one photon: passive basis choice, then the correct
/// detector unless an error occurs in the matched basis.
fn measure(basis: Basis, bit: u8, error_prob: f64, bob: &mut ChaCha8Rng) -> (u8, bool) {
    let bob_basis = if bob.random::<bool>() { Basis::X } else { Basis::Z };
    let flip = bob.random::<f64>() < error_prob;
    let out = if bob_basis == basis {
        bit ^ u8::from(flip)
    } else {
        bob.random::<u8>() & 1
    };
    (bob_basis.index() * 2 + out, bob_basis == basis && out != bit)
}

/// Sends every pulse through the channel and receiver under a fixed drift
/// state. Each photon of a pulse is detected independently, so two-photon
/// pulses can produce two clicks in one slot.
pub fn transmit_and_detect(
    pulses: impl IntoIterator<Item = PulseRecord>,
    params: &SystemParams,
    drift: &DriftState,
    rng_seed: u64,
) -> Result<(Vec<ClickRecord>, LinkStats), SimError> {
    params.validate()?;
    let t = params.photon_transmission();
    let error_prob = (params.misalignment_qber + drift.residual_qber()).min(1.0);
    let period = params.pulse_period();
    let mut signal = stream_rng(rng_seed, Stream::Signal, 16);
    let mut bob = stream_rng(rng_seed, Stream::Bob, 0);
    let mut jitter_rng = stream_rng(rng_seed, Stream::Jitter, 0);
    let jitter = jitter_dist(params);
    let mut dark = DarkCounts::new(params, rng_seed);
    let mut bank = DetectorBank::new(params);
    let mut stats = LinkStats::default();
    let mut out = Vec::new();
    let scanning = drift.scanning();
    let mut last_slot = None;
    for p in pulses {
        if last_slot.is_some_and(|l| p.pulse_index <= l) {
            return Err(SimError::param("pulses", "pulse indices must increase"));
        }
        last_slot = Some(p.pulse_index);
        stats.pulses += 1;
        for _ in 0..p.photon_count {
            if signal.random::<f64>() >= t {
                continue;
            }
            stats.signal_candidates += 1;
            let (detector_id, _) = measure(p.basis, p.bit, error_prob, &mut bob);
            let dt = jitter.map_or(0.0, |j| j.sample(&mut jitter_rng));
            let click = ClickRecord {
                pulse_index: p.pulse_index,
                detector_id,
                timestamp_s: p.pulse_index as f64 * period + dt,
                is_dark: false,
                during_scan: scanning,
            };
            bank.offer(click, dt, &mut stats);
        }
    }
    if let Some(l) = last_slot {
        dark.emit(l + 1, period, scanning, &mut bank, &mut stats);
    }
    bank.flush(&mut out, &mut stats);
    Ok((out, stats))
}

/// Event-driven link simulation: jumps from one detected pulse to the next
/// with geometric gaps, so the cost scales with clicks, not pulses.
///
/// The run is split into drift ticks; within a tick the residual
/// misalignment is constant, and at its end the compensator sees the QBER
/// observed during the tick. Output is independent of how the caller chunks
/// calls to [`Self::run_for`].
#[derive(Debug, Clone)]
pub struct LinkSimulator {
    params: SystemParams,
    alice: AliceSource,
    signal: ChaCha8Rng,
    bob: ChaCha8Rng,
    jitter_rng: ChaCha8Rng,
    jitter: Option<Normal<f64>>,
    gap: Option<Geometric>,
    p_two_given_click: f64,
    next_signal: u64,
    dark: DarkCounts,
    bank: DetectorBank,
    drift: DriftModel,
    slot_now: u64,
    tick_slots: u64,
    tick_matched: u64,
    tick_errors: u64,
    two_photon_clicks: u64,
    stats: LinkStats,
}

impl LinkSimulator {
    pub fn new(params: SystemParams, drift: DriftModel, seed: u64) -> Result<Self, SimError> {
        params.validate()?;
        let p_sig = params.signal_click_prob();
        let gap = (p_sig > 0.0).then(|| Geometric::new(p_sig));
        let t = params.photon_transmission();
        let p_two_given_click = if p_sig > 0.0 {
            params.two_photon_prob() * (1.0 - (1.0 - t) * (1.0 - t)) / p_sig
        } else {
            0.0
        };
        let mut signal = stream_rng(seed, Stream::Signal, 0);
        let next_signal = match &gap {
            Some(g) => g.sample(&mut signal),
            None => u64::MAX,
        };
        let tick_slots = ((drift.drift.tick_s * params.source_rate_hz).round() as u64).max(1);
        Ok(Self {
            alice: AliceSource::new(seed, params.basis_ratio),
            bob: stream_rng(seed, Stream::Bob, 0),
            jitter_rng: stream_rng(seed, Stream::Jitter, 0),
            jitter: jitter_dist(&params),
            gap,
            p_two_given_click,
            next_signal,
            dark: DarkCounts::new(&params, seed),
            bank: DetectorBank::new(&params),
            drift,
            slot_now: 0,
            tick_slots,
            tick_matched: 0,
            tick_errors: 0,
            two_photon_clicks: 0,
            stats: LinkStats::default(),
            signal,
            params,
        })
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    pub fn stats(&self) -> LinkStats {
        self.stats
    }

    pub fn drift(&self) -> &DriftModel {
        &self.drift
    }

    /// Simulated time so far, s.
    pub fn elapsed_s(&self) -> f64 {
        self.slot_now as f64 * self.params.pulse_period()
    }

    /// Signal clicks whose pulse carried two photons.
    pub fn two_photon_clicks(&self) -> u64 {
        self.two_photon_clicks
    }

    /// A copy of Alice's state generator.
    pub fn alice(&self) -> AliceSource {
        self.alice.clone()
    }

    /// Simulates the next `duration_s` seconds and returns accepted clicks
    /// in time order.
    pub fn run_for(&mut self, duration_s: f64) -> Vec<ClickRecord> {
        let target = self.slot_now + (duration_s.max(0.0) * self.params.source_rate_hz).round() as u64;
        self.run_until_slot(target)
    }

    /// Simulates up to (excluding) pulse slot `target`.
    pub fn run_until_slot(&mut self, target: u64) -> Vec<ClickRecord> {
        let mut out = Vec::new();
        while self.slot_now < target {
            let boundary = (self.slot_now / self.tick_slots + 1) * self.tick_slots;
            let end = boundary.min(target);
            self.segment(end, &mut out);
            if end == boundary {
                let q = (self.tick_matched >= 20).then(|| self.tick_errors as f64 / self.tick_matched as f64);
                self.drift.end_tick(q);
                self.tick_matched = 0;
                self.tick_errors = 0;
            }
        }
        out
    }

    fn segment(&mut self, end: u64, out: &mut Vec<ClickRecord>) {
        let period = self.params.pulse_period();
        let scanning = self.drift.state.scanning();
        let error_prob = (self.params.misalignment_qber + self.drift.state.residual_qber()).min(1.0);
        while self.next_signal < end {
            let k = self.next_signal;
            self.stats.signal_candidates += 1;
            if self.signal.random::<f64>() < self.p_two_given_click {
                self.two_photon_clicks += 1;
            }
            let (basis, bit) = self.alice.prepare(k);
            let (detector_id, _) = measure(basis, bit, error_prob, &mut self.bob);
            let dt = self.jitter.map_or(0.0, |j| j.sample(&mut self.jitter_rng));
            let click = ClickRecord {
                pulse_index: k,
                detector_id,
                timestamp_s: k as f64 * period + dt,
                is_dark: false,
                during_scan: scanning,
            };
            self.bank.offer(click, dt, &mut self.stats);
            let gap = self.gap.as_ref().expect("signal clicks imply a gap distribution");
            self.next_signal = k.saturating_add(1).saturating_add(gap.sample(&mut self.signal));
        }
        self.dark.emit(end, period, scanning, &mut self.bank, &mut self.stats);
        let first_new = out.len();
        self.bank.flush(out, &mut self.stats);
        // Errors seen by the compensator: matched-basis clicks on the wrong
        // detector.
        for c in &out[first_new..] {
            let (basis, bit) = self.alice.prepare(c.pulse_index);
            if c.basis() == basis {
                self.tick_matched += 1;
                self.tick_errors += u64::from(c.bit() != bit);
            }
        }
        self.stats.pulses += end - self.slot_now;
        self.slot_now = end;
    }
}
