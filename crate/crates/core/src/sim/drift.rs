//! Slow polarisation drift on the channel and a coordinate-descent
//! compensator.
//!
//! The channel rotation is described by two angles that perform independent
//! random walks reflected at `±amplitude`. The compensator applies its own
//! pair of angles; the residual misalignment adds
//! `(sin^2 dθ + sin^2 dφ) / 2` to the error probability.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{stream_rng, SimError, Stream};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftConfig {
    /// Random-walk standard deviation per angle after one second, rad.
    pub step_sigma: f64,
    /// Reflecting bound on each angle, rad.
    pub amplitude: f64,
    /// Interval between drift updates and compensator decisions, s.
    pub tick_s: f64,
}

impl DriftConfig {
    pub fn none() -> Self {
        Self {
            step_sigma: 0.0,
            amplitude: 0.0,
            tick_s: 0.1,
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.step_sigma >= 0.0 && self.step_sigma.is_finite()) {
            return Err(SimError::param("drift_step_sigma", "must be non-negative"));
        }
        if !(0.0..=std::f64::consts::FRAC_PI_2).contains(&self.amplitude) {
            return Err(SimError::param("drift_amplitude", "must lie in [0, π/2]"));
        }
        if !(self.tick_s > 0.0) {
            return Err(SimError::param("drift_tick_s", "must be positive"));
        }
        Ok(())
    }

    /// Long-run mean drift QBER without compensation: for an angle uniform
    /// on `[-A, A]`, `E[sin^2] = 1/2 - sin(2A) / (4A)`.
    pub fn stationary_qber(&self) -> f64 {
        let a = self.amplitude;
        if a == 0.0 {
            0.0
        } else {
            0.5 - (2.0 * a).sin() / (4.0 * a)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompensatorConfig {
    pub enabled: bool,
    /// A scan starts when the observed QBER exceeds this value.
    pub trigger_qber: f64,
    /// Initial probe step, rad.
    pub step: f64,
    /// The scan ends once the step has been halved below this, rad.
    pub min_step: f64,
    /// Hard cap on probes per scan.
    pub max_probes: usize,
}

impl Default for CompensatorConfig {
    fn default() -> Self {
        Self {
            enabled: false,
            trigger_qber: 0.045,
            step: 0.08,
            min_step: 0.01,
            max_probes: 40,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Phase {
    Plus,
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Scan {
    coord: usize,
    phase: Phase,
    base: f64,
    step: f64,
    improved_this_round: bool,
    probes: usize,
}

/// Channel rotation and compensator setting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftState {
    pub channel: [f64; 2],
    pub compensator: [f64; 2],
    scan: Option<Scan>,
}

impl Default for DriftState {
    fn default() -> Self {
        Self {
            channel: [0.0; 2],
            compensator: [0.0; 2],
            scan: None,
        }
    }
}

impl DriftState {
    /// Extra error probability from the residual rotation.
    pub fn residual_qber(&self) -> f64 {
        let s = |k: usize| (self.channel[k] - self.compensator[k]).sin().powi(2);
        (s(0) + s(1)) / 2.0
    }

    /// True while the compensator is probing settings.
    pub fn scanning(&self) -> bool {
        self.scan.is_some()
    }
}

fn reflect(mut x: f64, a: f64) -> f64 {
    if a == 0.0 {
        return 0.0;
    }
    // Fold onto [-a, a] with period 4a.
    let period = 4.0 * a;
    x = (x + a).rem_euclid(period);
    if x > 2.0 * a {
        x = period - x;
    }
    x - a
}

/// Advances the channel rotation by `dt_s` of reflected random walk.
pub fn step_drift(state: &DriftState, cfg: &DriftConfig, dt_s: f64, rng: &mut impl Rng) -> DriftState {
    let mut next = *state;
    let sigma = cfg.step_sigma * dt_s.max(0.0).sqrt();
    if sigma > 0.0 && cfg.amplitude > 0.0 {
        let normal = Normal::new(0.0, sigma).expect("finite sigma");
        for k in 0..2 {
            next.channel[k] = reflect(state.channel[k] + normal.sample(rng), cfg.amplitude);
        }
    } else if cfg.amplitude == 0.0 {
        next.channel = [0.0; 2];
    }
    next
}

/// One coordinate-descent decision. `history` holds recent QBER
/// observations taken at the current compensator setting; their mean is
/// the objective.
pub fn compensate(state: &DriftState, cfg: &CompensatorConfig, history: &[f64]) -> DriftState {
    let mut next = *state;
    if !cfg.enabled || history.is_empty() {
        return next;
    }
    let y = history.iter().sum::<f64>() / history.len() as f64;
    let Some(mut scan) = state.scan else {
        if y > cfg.trigger_qber {
            next.compensator[0] += cfg.step;
            next.scan = Some(Scan {
                coord: 0,
                phase: Phase::Plus,
                base: y,
                step: cfg.step,
                improved_this_round: false,
                probes: 1,
            });
        }
        return next;
    };
    let c = scan.coord;
    let better = y < scan.base;
    if better {
        scan.base = y;
        scan.improved_this_round = true;
    }
    match (scan.phase, better) {
        (Phase::Plus, true) => next.compensator[c] += scan.step,
        (Phase::Minus, true) => next.compensator[c] -= scan.step,
        (Phase::Plus, false) => {
            next.compensator[c] -= 2.0 * scan.step;
            scan.phase = Phase::Minus;
        }
        (Phase::Minus, false) => {
            next.compensator[c] += scan.step;
            // Coordinate exhausted; move on.
            if c == 1 {
                if !scan.improved_this_round {
                    scan.step /= 2.0;
                }
                scan.improved_this_round = false;
            }
            scan.coord = 1 - c;
            scan.phase = Phase::Plus;
            if scan.step < cfg.min_step {
                next.scan = None;
                return next;
            }
            next.compensator[scan.coord] += scan.step;
        }
    }
    scan.probes += 1;
    if scan.probes > cfg.max_probes {
        // Undo the pending probe and stop.
        match scan.phase {
            Phase::Plus => next.compensator[scan.coord] -= scan.step,
            Phase::Minus => next.compensator[scan.coord] += scan.step,
        }
        next.scan = None;
    } else {
        next.scan = Some(scan);
    }
    next
}

/// Drift process with its own generator, advanced in fixed ticks.
#[derive(Debug, Clone)]
pub struct DriftModel {
    pub drift: DriftConfig,
    pub compensator: CompensatorConfig,
    pub state: DriftState,
    rng: ChaCha8Rng,
}

impl DriftModel {
    pub fn new(drift: DriftConfig, compensator: CompensatorConfig, seed: u64) -> Result<Self, SimError> {
        drift.validate()?;
        Ok(Self {
            drift,
            compensator,
            state: DriftState::default(),
            rng: stream_rng(seed, Stream::Drift, 0),
        })
    }

    pub fn disabled(seed: u64) -> Self {
        Self::new(DriftConfig::none(), CompensatorConfig::default(), seed).expect("valid")
    }

    pub fn is_static(&self) -> bool {
        self.drift.amplitude == 0.0 && !self.state.scanning()
    }

    /// Ends one tick: the compensator sees the QBER observed during it,
    /// then the channel drifts for one tick.
    pub fn end_tick(&mut self, observed_qber: Option<f64>) {
        if let Some(q) = observed_qber {
            self.state = compensate(&self.state, &self.compensator, &[q]);
        }
        self.state = step_drift(&self.state, &self.drift, self.drift.tick_s, &mut self.rng);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn reflection_stays_in_bounds() {
        for x in [-10.0, -0.3, 0.0, 0.25, 0.31, 7.7] {
            let r = reflect(x, 0.3);
            assert!((-0.3..=0.3).contains(&r), "{x} -> {r}");
        }
        assert!((reflect(0.35, 0.3) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn zero_amplitude_never_drifts() {
        let cfg = DriftConfig {
            step_sigma: 1.0,
            amplitude: 0.0,
            tick_s: 0.1,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut s = DriftState::default();
        for _ in 0..100 {
            s = step_drift(&s, &cfg, 0.1, &mut rng);
            assert_eq!(s.residual_qber(), 0.0);
        }
    }

    #[test]
    fn compensator_walks_towards_the_channel() {
        let cfg = CompensatorConfig {
            enabled: true,
            ..CompensatorConfig::default()
        };
        let mut s = DriftState {
            channel: [0.4, -0.3],
            ..DriftState::default()
        };
        let start = s.residual_qber();
        for _ in 0..200 {
            let q = 0.03 + s.residual_qber();
            s = compensate(&s, &cfg, &[q]);
        }
        assert!(!s.scanning());
        assert!(s.residual_qber() < 0.01 && s.residual_qber() < start);
    }
}
