//! What each station knows about the quantum exchange.

use crate::sim::{AliceSource, Basis, ClickRecord, LinkSimulator, PulseRecord};

/// Alice's record of what she prepared.
pub trait PulseSource {
    /// State of pulse `index`, or `None` if it is unknown.
    fn prepare(&mut self, index: u64) -> Option<(Basis, u8)>;
}

impl PulseSource for AliceSource {
    fn prepare(&mut self, index: u64) -> Option<(Basis, u8)> {
        Some(AliceSource::prepare(self, index))
    }
}

/// Pulse records sorted by index, e.g. read back from a record file.
#[derive(Debug, Clone)]
pub struct RecordedPulses {
    pulses: Vec<PulseRecord>,
}

impl RecordedPulses {
    pub fn new(mut pulses: Vec<PulseRecord>) -> Self {
        pulses.sort_by_key(|p| p.pulse_index);
        Self { pulses }
    }
}

impl PulseSource for RecordedPulses {
    fn prepare(&mut self, index: u64) -> Option<(Basis, u8)> {
        let i = self.pulses.binary_search_by_key(&index, |p| p.pulse_index).ok()?;
        Some((self.pulses[i].basis, self.pulses[i].bit))
    }
}

/// Bob's detections, delivered in time order.
pub trait ClickSource {
    /// Clicks of the next `duration_s` of link time, or `None` once the
    /// source is exhausted.
    fn next_chunk(&mut self, duration_s: f64) -> Option<Vec<ClickRecord>>;
    /// Link time delivered so far, s.
    fn elapsed_s(&self) -> f64;
}

impl ClickSource for LinkSimulator {
    fn next_chunk(&mut self, duration_s: f64) -> Option<Vec<ClickRecord>> {
        Some(self.run_for(duration_s))
    }

    fn elapsed_s(&self) -> f64 {
        LinkSimulator::elapsed_s(self)
    }
}

/// Replays recorded clicks.
#[derive(Debug, Clone)]
pub struct RecordedClicks {
    clicks: Vec<ClickRecord>,
    pos: usize,
    now_s: f64,
}

impl RecordedClicks {
    pub fn new(mut clicks: Vec<ClickRecord>) -> Self {
        clicks.sort_by(|a, b| a.timestamp_s.total_cmp(&b.timestamp_s));
        Self {
            clicks,
            pos: 0,
            now_s: 0.0,
        }
    }
}

impl ClickSource for RecordedClicks {
    fn next_chunk(&mut self, duration_s: f64) -> Option<Vec<ClickRecord>> {
        if self.pos == self.clicks.len() {
            return None;
        }
        self.now_s += duration_s;
        let start = self.pos;
        while self.pos < self.clicks.len() && self.clicks[self.pos].timestamp_s < self.now_s {
            self.pos += 1;
        }
        if self.pos == self.clicks.len() {
            self.now_s = self.now_s.min(self.clicks[self.pos - 1].timestamp_s);
        }
        Some(self.clicks[start..self.pos].to_vec())
    }

    fn elapsed_s(&self) -> f64 {
        self.now_s
    }
}
