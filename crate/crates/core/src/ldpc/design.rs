//! Degree-distribution analysis and design for the binary symmetric channel.
//!
//! [`ga_threshold`] runs density evolution under a Gaussian approximation of
//! the check-to-variable messages (mean `mu`, variance `2 mu`), keeping the
//! exact two-point BSC channel LLR in the variable-node update. It is fast
//! enough to sit inside an optimiser. [`population_de`] is a Monte Carlo
//! density evolution with no distributional assumption and serves as the
//! slower cross-check.
//!
//! [`optimize`] searches variable-edge coefficients over a fixed degree set by
//! differential evolution, with a check distribution concentrated on two
//! consecutive degrees chosen to hit the target rate.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{DegreeDistribution, LdpcError};

const HERMITE_POINTS: usize = 32;

/// Gauss-Hermite nodes and weights for `∫ exp(-x²) f(x) dx`.
fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let pim4 = std::f64::consts::PI.powf(-0.25);
    let m = n.div_ceil(2);
    let mut z = 0.0;
    for i in 0..m {
        z = match i {
            0 => (2.0 * n as f64 + 1.0).sqrt() - 1.85575 * (2.0 * n as f64 + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * (n as f64).powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = pim4;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                p1 = z * (2.0 / (j as f64 + 1.0)).sqrt() * p2 - (j as f64 / (j as f64 + 1.0)).sqrt() * p3;
            }
            pp = (2.0 * n as f64).sqrt() * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-14 {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Precomputed quadrature plus a lookup table for inverting
/// `phi(mu) = E[1 - tanh(X / 2)]`, `X ~ N(mu, 2 mu)`.
pub struct GaussianDensityEvolution {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    table_mu: Vec<f64>,
    table_log_phi: Vec<f64>,
}

impl Default for GaussianDensityEvolution {
    fn default() -> Self {
        Self::new()
    }
}

/// `1 - tanh(x / 2)` without cancellation.
fn one_minus_tanh_half(x: f64) -> f64 {
    2.0 / (1.0 + x.exp())
}

impl GaussianDensityEvolution {
    pub fn new() -> Self {
        let (nodes, weights) = gauss_hermite(HERMITE_POINTS);
        let mut de = Self {
            nodes,
            weights,
            table_mu: Vec::new(),
            table_log_phi: Vec::new(),
        };
        // Log-spaced grid from 1e-6 to 2000.
        let steps = 4000;
        for k in 0..=steps {
            let mu = 10f64.powf(-6.0 + 9.301 * k as f64 / steps as f64);
            let phi = de.expect_one_minus_tanh(mu, 2.0 * mu);
            de.table_mu.push(mu);
            de.table_log_phi.push(phi.max(1e-300).ln());
        }
        de
    }

    /// `E[1 - tanh(X / 2)]` for `X ~ N(mean, var)`.
    fn expect_one_minus_tanh(&self, mean: f64, var: f64) -> f64 {
        if var <= 0.0 {
            return one_minus_tanh_half(mean);
        }
        let sd = (2.0 * var).sqrt();
        let s: f64 = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * one_minus_tanh_half(mean + sd * x))
            .sum();
        s / std::f64::consts::PI.sqrt()
    }

    /// Inverse of `phi` by interpolation in the log domain.
    fn phi_inverse(&self, target: f64) -> f64 {
        if target >= 1.0 {
            return 0.0;
        }
        let lt = target.max(1e-300).ln();
        let t = &self.table_log_phi;
        if lt >= t[0] {
            return self.table_mu[0] * (1.0 - target).max(0.0) / (1.0 - t[0].exp());
        }
        if lt <= *t.last().unwrap() {
            return *self.table_mu.last().unwrap();
        }
        // table_log_phi is decreasing.
        let (mut lo, mut hi) = (0usize, t.len() - 1);
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if t[mid] > lt {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let f = (lt - t[lo]) / (t[hi] - t[lo]);
        let (a, b) = (self.table_mu[lo].ln(), self.table_mu[hi].ln());
        (a + f * (b - a)).exp()
    }

    /// Runs density evolution at crossover `p`; true if the message error
    /// vanishes within `max_iters` iterations.
    pub fn converges(&self, lambda: &[(usize, f64)], rho: &[(usize, f64)], p: f64, max_iters: usize) -> bool {
        let l0 = ((1.0 - p) / p).ln();
        let mut mu = 0.0f64;
        for _ in 0..max_iters {
            // Variable-node side: q = E[1 - tanh(v / 2)] averaged over edges.
            let q: f64 = lambda
                .iter()
                .map(|&(d, frac)| {
                    let m = (d - 1) as f64 * mu;
                    let var = 2.0 * m;
                    frac * ((1.0 - p) * self.expect_one_minus_tanh(m + l0, var)
                        + p * self.expect_one_minus_tanh(m - l0, var))
                })
                .sum();
            if q < 1e-13 {
                return true;
            }
            // Check-node side: 1 - E[tanh(u / 2)].
            let one_minus_t: f64 = rho
                .iter()
                .map(|&(d, frac)| frac * -((d - 1) as f64 * (-q).ln_1p()).exp_m1())
                .sum();
            let next = self.phi_inverse(one_minus_t);
            if next > 1500.0 {
                return true;
            }
            if next <= mu * (1.0 + 1e-9) {
                return false;
            }
            mu = next;
        }
        false
    }

    /// Largest crossover probability in `(0, 0.5)` for which density
    /// evolution converges, located by bisection to `tol`.
    pub fn threshold(&self, lambda: &[(usize, f64)], rho: &[(usize, f64)], tol: f64) -> f64 {
        let (mut lo, mut hi) = (1e-6, 0.5 - 1e-9);
        if !self.converges(lambda, rho, lo, 5000) {
            return 0.0;
        }
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            if self.converges(lambda, rho, mid, 5000) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }
}

/// Gaussian-approximation BSC threshold of a distribution.
pub fn ga_threshold(dist: &DegreeDistribution) -> f64 {
    GaussianDensityEvolution::new().threshold(&dist.lambda(), &dist.rho(), 1e-5)
}

/// Monte Carlo density evolution on the BSC with `samples` messages per
/// population. Returns the bit error probability of the variable-node
/// decision after `iters` iterations.
pub fn population_de(dist: &DegreeDistribution, p: f64, samples: usize, iters: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lambda = cumulative(&dist.lambda());
    let rho = cumulative(&dist.rho());
    let l0 = ((1.0 - p) / p).ln();
    // All-zero codeword: channel LLR is +l0 unless flipped.
    let channel = |rng: &mut ChaCha8Rng| if rng.random::<f64>() < p { -l0 } else { l0 };
    let mut v2c: Vec<f64> = (0..samples).map(|_| channel(&mut rng)).collect();
    let mut c2v = vec![0.0; samples];
    let mut error = 1.0;
    for _ in 0..iters {
        for out in c2v.iter_mut() {
            let d = draw_degree(&rho, &mut rng);
            let mut prod = 1.0;
            for _ in 0..d - 1 {
                prod *= (0.5 * v2c[rng.random_range(0..samples)]).tanh();
            }
            *out = 2.0 * prod.clamp(-1.0 + 1e-15, 1.0 - 1e-15).atanh();
        }
        let mut errors = 0usize;
        for out in v2c.iter_mut() {
            let d = draw_degree(&lambda, &mut rng);
            let mut sum = channel(&mut rng);
            for _ in 0..d - 1 {
                sum += c2v[rng.random_range(0..samples)];
            }
            // Decision uses one more incoming message than the outgoing one.
            let decision = sum + c2v[rng.random_range(0..samples)];
            if decision < 0.0 || (decision == 0.0 && rng.random::<bool>()) {
                errors += 1;
            }
            *out = sum.clamp(-40.0, 40.0);
        }
        error = errors as f64 / samples as f64;
        if error == 0.0 {
            break;
        }
    }
    error
}

fn cumulative(edge: &[(usize, f64)]) -> Vec<(usize, f64)> {
    let mut acc = 0.0;
    edge.iter()
        .map(|&(d, f)| {
            acc += f;
            (d, acc)
        })
        .collect()
}

fn draw_degree(cum: &[(usize, f64)], rng: &mut ChaCha8Rng) -> usize {
    let u: f64 = rng.random();
    cum.iter()
        .find(|&&(_, c)| u < c)
        .map_or(cum.last().unwrap().0, |&(d, _)| d)
}

/// Check distribution concentrated on two consecutive degrees such that the
/// design rate equals `rate` for the given variable-edge coefficients.
pub fn concentrated_check(lambda: &[(usize, f64)], rate: f64) -> Option<Vec<(usize, f64)>> {
    let int_lambda: f64 = lambda.iter().map(|&(d, f)| f / d as f64).sum();
    let int_rho = (1.0 - rate) * int_lambda;
    // Mean check degree (edge-harmonic) is 1 / int_rho.
    let mean = 1.0 / int_rho;
    if !(2.0..1000.0).contains(&mean) {
        return None;
    }
    let j = mean.floor() as usize;
    // rho_j / j + (1 - rho_j) / (j + 1) = int_rho
    let a = 1.0 / j as f64;
    let b = 1.0 / (j + 1) as f64;
    let rho_j = (int_rho - b) / (a - b);
    Some(
        [(j, rho_j), (j + 1, 1.0 - rho_j)]
            .into_iter()
            .filter(|&(_, f)| f > 1e-12)
            .collect(),
    )
}

/// Settings for [`optimize`].
#[derive(Debug, Clone)]
pub struct DesignConfig {
    pub rate: f64,
    pub variable_degrees: Vec<usize>,
    pub population: usize,
    pub generations: usize,
    pub seed: u64,
    pub tolerance: f64,
}

impl DesignConfig {
    pub fn new(rate: f64) -> Self {
        Self {
            rate,
            variable_degrees: vec![2, 3, 4, 6, 8, 11, 15],
            population: 24,
            generations: 40,
            seed: 1,
            tolerance: 2e-4,
        }
    }
}

/// Searches for the variable distribution with the highest GA threshold.
/// Returns the best distribution and its threshold.
pub fn optimize(cfg: &DesignConfig) -> Result<(DegreeDistribution, f64), LdpcError> {
    let de = GaussianDensityEvolution::new();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let k = cfg.variable_degrees.len();
    let to_lambda = |raw: &[f64]| -> Vec<(usize, f64)> {
        let sum: f64 = raw.iter().map(|v| v.max(0.0)).sum();
        cfg.variable_degrees
            .iter()
            .zip(raw)
            .map(|(&d, &v)| (d, v.max(0.0) / sum))
            .filter(|&(_, f)| f > 0.0)
            .collect()
    };
    let score = |raw: &[f64]| -> f64 {
        let lambda = to_lambda(raw);
        if lambda.is_empty() {
            return 0.0;
        }
        match concentrated_check(&lambda, cfg.rate) {
            Some(rho) => de.threshold(&lambda, &rho, cfg.tolerance),
            None => 0.0,
        }
    };
    let mut pop: Vec<Vec<f64>> = (0..cfg.population)
        .map(|_| (0..k).map(|_| rng.random::<f64>()).collect())
        .collect();
    let mut fit: Vec<f64> = pop.iter().map(|x| score(x)).collect();
    for _ in 0..cfg.generations {
        for i in 0..cfg.population {
            let pick = |rng: &mut ChaCha8Rng| loop {
                let j = rng.random_range(0..cfg.population);
                if j != i {
                    break j;
                }
            };
            let (a, b, c) = (pick(&mut rng), pick(&mut rng), pick(&mut rng));
            let forced = rng.random_range(0..k);
            let trial: Vec<f64> = (0..k)
                .map(|d| {
                    if d == forced || rng.random::<f64>() < 0.9 {
                        (pop[a][d] + 0.6 * (pop[b][d] - pop[c][d])).max(0.0)
                    } else {
                        pop[i][d]
                    }
                })
                .collect();
            let s = score(&trial);
            if s >= fit[i] {
                pop[i] = trial;
                fit[i] = s;
            }
        }
    }
    let best = (0..cfg.population)
        .max_by(|&a, &b| fit[a].total_cmp(&fit[b]))
        .expect("non-empty population");
    let lambda = to_lambda(&pop[best]);
    let rho = concentrated_check(&lambda, cfg.rate)
        .ok_or_else(|| LdpcError::Distribution("optimiser produced an infeasible rate".into()))?;
    Ok((DegreeDistribution::from_edge_perspective(&lambda, &rho)?, fit[best]))
}
