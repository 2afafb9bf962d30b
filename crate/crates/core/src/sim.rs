//! Coherence of a spectrally diffusing, phonon-dephased two-level emitter.
//!
//! The emission energy fluctuates as σ·e(t), with e(t) a unit-variance
//! Gauss–Markov process of correlation rate λ; phonon dephasing enters as a
//! deterministic factor e^{−γt}. In the static limit (λ → 0) the ensemble
//! coherence is e^{−σ²t²/2}·e^{−γt}, whose Fourier transform is a Voigt line.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::consts::{FWHM_PER_SIGMA, HBAR};
use crate::error::check_domain;
use crate::fft::fft;
use crate::{Error, Result, Spectrum};

/// Trajectories per accumulation block. Blocks are the unit of parallel work
/// and are always merged in index order, so results do not depend on how
/// blocks are scheduled.
pub const BLOCK_SIZE: usize = 256;

/// Coherence magnitude an analytic trace must reach by `t_max`.
pub const DECAY_THRESHOLD: f64 = 1e-6;

/// Default dt·max(σ, γ, λ) used by [`SimulationConfig::from_linewidths`].
pub const DEFAULT_STEP_FRACTION: f64 = 0.025;

/// Zero-padding factor applied to the even-extended trace.
pub const PADDING: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationConfig {
    /// Gaussian dephasing scale (1/ps).
    pub sigma: f64,
    /// Lorentzian dephasing rate (1/ps).
    pub gamma: f64,
    /// Field correlation rate (1/ps).
    pub lambda: f64,
    pub t_max: f64,
    pub dt: f64,
    pub n_traj: usize,
    pub seed: u64,
}

impl SimulationConfig {
    /// Config reproducing target Gaussian and Lorentzian FWHMs (meV) in the
    /// static limit. The step is a quarter of the admissible maximum: the
    /// trapezoid rule on the e^{−γ|t|} kink periodizes the line, and at the
    /// maximum step that distortion fits as ~8% extra Gaussian width when
    /// f_L ≫ f_G. The window is long enough to reach [`DECAY_THRESHOLD`].
    pub fn from_linewidths(f_g: f64, f_l: f64, lambda: f64, n_traj: usize, seed: u64) -> Result<Self> {
        check_domain("f_G", f_g, f_g >= 0.0 && f_g.is_finite())?;
        check_domain("f_L", f_l, f_l >= 0.0 && f_l.is_finite())?;
        let sigma = f_g / (FWHM_PER_SIGMA * HBAR);
        let gamma = f_l / (2.0 * HBAR);
        let fastest = sigma.max(gamma).max(lambda);
        if !(fastest > 0.0) {
            return Err(Error::InvalidConfig("at least one of sigma, gamma, lambda must be positive"));
        }
        let dt = DEFAULT_STEP_FRACTION / fastest;
        // Solve σ²t²/2 + γt = L with margin on the log-threshold.
        let target = 1.25 * -libm::log(DECAY_THRESHOLD);
        let t_decay = if sigma > 0.0 {
            (libm::sqrt(gamma * gamma + 2.0 * sigma * sigma * target) - gamma) / (sigma * sigma)
        } else {
            target / gamma
        };
        let t_min = 20.0 / (sigma + gamma).max(f64::MIN_POSITIVE);
        let n_steps = libm::ceil(t_decay.max(t_min) / dt);
        let config = Self { sigma, gamma, lambda, t_max: n_steps * dt, dt, n_traj, seed };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("sigma", self.sigma), ("gamma", self.gamma), ("lambda", self.lambda)] {
            check_domain(name, v, v >= 0.0 && v.is_finite())?;
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidConfig("dt must be positive"));
        }
        let fastest = self.sigma.max(self.gamma).max(self.lambda);
        if self.dt * fastest > 0.1 * (1.0 + 1e-12) {
            return Err(Error::InvalidConfig("dt exceeds 0.1/max(sigma, gamma, lambda)"));
        }
        if !(self.t_max.is_finite() && self.t_max * (self.sigma + self.gamma) >= 20.0 * (1.0 - 1e-12)) {
            return Err(Error::InvalidConfig("t_max below 20/(sigma + gamma)"));
        }
        if self.n_traj == 0 {
            return Err(Error::InvalidConfig("n_traj must be at least 1"));
        }
        Ok(())
    }

    /// Number of steps after t = 0.
    pub fn n_steps(&self) -> usize {
        libm::ceil(self.t_max / self.dt * (1.0 - 1e-12)) as usize
    }

    /// Uniform grid 0, dt, …, n_steps·dt.
    pub fn time_grid(&self) -> Vec<f64> {
        (0..=self.n_steps()).map(|k| k as f64 * self.dt).collect()
    }

    pub fn n_blocks(&self) -> usize {
        self.n_traj.div_ceil(BLOCK_SIZE)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceTrace {
    pub t: Vec<f64>,
    pub g: Vec<Complex64>,
    /// Per-point Monte-Carlo standard error; `None` for analytic traces.
    pub stderr: Option<Vec<f64>>,
}

impl CoherenceTrace {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }
}

fn check_grid(t: &[f64]) -> Result<()> {
    if t.len() < 2 {
        return Err(Error::InsufficientData { got: t.len(), need: 2 });
    }
    if t[0] != 0.0 {
        return Err(Error::InvalidConfig("time grid must start at 0"));
    }
    if !t.windows(2).all(|w| w[1] > w[0]) || !t[t.len() - 1].is_finite() {
        return Err(Error::InvalidConfig("time grid must be strictly increasing"));
    }
    Ok(())
}

/// Static-limit coherence e^{−σ²t²/2}·e^{−γt}.
pub fn analytic_coherence(sigma: f64, gamma: f64, t: &[f64]) -> Result<CoherenceTrace> {
    check_domain("sigma", sigma, sigma >= 0.0 && sigma.is_finite())?;
    check_domain("gamma", gamma, gamma >= 0.0 && gamma.is_finite())?;
    check_grid(t)?;
    let g = t
        .iter()
        .map(|&t| Complex64::new(libm::exp(-0.5 * sigma * sigma * t * t - gamma * t), 0.0))
        .collect();
    Ok(CoherenceTrace { t: t.to_vec(), g, stderr: None })
}

/// Second-order cumulant coherence for finite λ:
/// exp(−σ²/λ²·(λt − 1 + e^{−λt}))·e^{−γt}. Reduces to the static form as λ → 0
/// and to exponential decay at rate σ²/λ when λ ≫ σ.
pub fn cumulant_coherence(sigma: f64, gamma: f64, lambda: f64, t: &[f64]) -> Result<CoherenceTrace> {
    check_domain("lambda", lambda, lambda >= 0.0 && lambda.is_finite())?;
    if lambda == 0.0 {
        return analytic_coherence(sigma, gamma, t);
    }
    check_domain("sigma", sigma, sigma >= 0.0 && sigma.is_finite())?;
    check_domain("gamma", gamma, gamma >= 0.0 && gamma.is_finite())?;
    check_grid(t)?;
    let g = t
        .iter()
        .map(|&t| {
            let x = lambda * t;
            // λt − 1 + e^{−λt} loses all digits for small λt; use its series there.
            let shape = if x < 1e-3 {
                x * x * (0.5 - x / 6.0 + x * x / 24.0)
            } else {
                x + libm::expm1(-x)
            };
            Complex64::new(libm::exp(-sigma * sigma / (lambda * lambda) * shape - gamma * t), 0.0)
        })
        .collect();
    Ok(CoherenceTrace { t: t.to_vec(), g, stderr: None })
}

/// Per-time-point sums of e^{iφ} over a set of trajectories.
#[derive(Debug, Clone, PartialEq)]
pub struct McAccumulator {
    pub n: usize,
    pub sum: Vec<Complex64>,
}

impl McAccumulator {
    pub fn new(n_points: usize) -> Self {
        Self { n: 0, sum: vec![Complex64::new(0.0, 0.0); n_points] }
    }

    /// Adds `other` into `self`. Merge blocks in index order for bit-identical totals.
    pub fn merge(&mut self, other: &McAccumulator) {
        self.n += other.n;
        for (a, b) in self.sum.iter_mut().zip(&other.sum) {
            *a += b;
        }
    }

    /// Mean coherence times e^{−γt}, with standard error √((1−|m|²)/(n−1)).
    pub fn finish(&self, config: &SimulationConfig) -> CoherenceTrace {
        let t = config.time_grid();
        let n = self.n as f64;
        let (g, stderr) = self
            .sum
            .iter()
            .zip(&t)
            .map(|(s, &t)| {
                let m = s / n;
                let damp = libm::exp(-config.gamma * t);
                let var = (1.0 - m.norm_sqr()).max(0.0);
                let se = libm::sqrt(var / (n - 1.0).max(1.0));
                (m * damp, se * damp)
            })
            .unzip();
        CoherenceTrace { t, g, stderr: Some(stderr) }
    }
}

/// Trajectory generator for index `index` of the run seeded by `seed`.
pub fn trajectory_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Simulates block `block` (trajectories `block·BLOCK_SIZE ..`) of a run.
pub fn simulate_block(config: &SimulationConfig, block: usize) -> McAccumulator {
    let n_points = config.n_steps() + 1;
    let mut acc = McAccumulator::new(n_points);
    let start = block * BLOCK_SIZE;
    let end = (start + BLOCK_SIZE).min(config.n_traj);
    let rho = libm::exp(-config.lambda * config.dt);
    let kick = libm::sqrt((1.0 - rho * rho).max(0.0));
    let half_step = 0.5 * config.sigma * config.dt;

    for index in start..end {
        let mut rng = trajectory_rng(config.seed, index as u64);
        let mut e: f64 = rng.sample(StandardNormal);
        let mut phase = 0.0;
        acc.sum[0] += Complex64::new(1.0, 0.0);
        for slot in acc.sum.iter_mut().skip(1) {
            let xi: f64 = rng.sample(StandardNormal);
            let next = rho * e + kick * xi;
            phase += half_step * (e + next);
            e = next;
            let (s, c) = libm::sincos(phase);
            *slot += Complex64::new(c, s);
        }
        acc.n += 1;
    }
    acc
}

/// Monte-Carlo coherence, computed block by block on the calling thread.
pub fn mc_coherence(config: &SimulationConfig) -> Result<CoherenceTrace> {
    config.validate()?;
    let mut total = McAccumulator::new(config.n_steps() + 1);
    for block in 0..config.n_blocks() {
        total.merge(&simulate_block(config, block));
    }
    Ok(total.finish(config))
}

/// Spectral density of a coherence trace on an energy grid centred at `center` (meV).
///
/// The trace is extended to negative times as g(−t) = g(t)*, zero-padded to
/// at least [`PADDING`] times its extended length, transformed, clipped at
/// zero and normalized to unit area. Fails with `InsufficientDecay` if
/// |g(t_max)| exceeds [`DECAY_THRESHOLD`] (or three standard errors, for
/// Monte-Carlo traces).
pub fn spectrum_from_coherence(trace: &CoherenceTrace, center: f64) -> Result<Spectrum> {
    check_domain("center", center, center.is_finite())?;
    check_grid(&trace.t)?;
    if trace.g.len() != trace.t.len() {
        return Err(Error::InvalidSpectrum("coherence and time grid lengths differ"));
    }
    let n = trace.len();
    let dt = trace.t[1] - trace.t[0];
    if trace.t.windows(2).any(|w| libm::fabs(w[1] - w[0] - dt) > 1e-9 * dt) {
        return Err(Error::InvalidConfig("time grid must be uniform"));
    }

    let last = trace.g[n - 1].norm();
    let noise = trace.stderr.as_ref().map_or(0.0, |s| 3.0 * s[n - 1]);
    if !(last < DECAY_THRESHOLD.max(noise)) {
        return Err(Error::InsufficientDecay(last));
    }

    let m = (PADDING * 2 * n).next_power_of_two();
    let mut a = vec![Complex64::new(0.0, 0.0); m];
    a[0] = trace.g[0];
    for k in 1..n {
        a[k] = trace.g[k];
        a[m - k] = trace.g[k].conj();
    }
    fft(&mut a);

    let step = HBAR * 2.0 * core::f64::consts::PI / (m as f64 * dt);
    let half = m / 2;
    let mut energy = Vec::with_capacity(m);
    let mut intensity = Vec::with_capacity(m);
    for j in 0..m {
        // Reorder from FFT layout to ascending energy: bins −m/2 .. m/2−1.
        let bin = (j + half) % m;
        let offset = j as f64 - half as f64;
        energy.push(center + offset * step);
        intensity.push((a[bin].re * dt).max(0.0));
    }
    let area: f64 = intensity.windows(2).map(|w| 0.5 * step * (w[0] + w[1])).sum();
    if !(area > 0.0) {
        return Err(Error::InvalidSpectrum("coherence transforms to zero spectrum"));
    }
    intensity.iter_mut().for_each(|v| *v /= area);
    Spectrum::new(energy, intensity, 0.0, "simulated")
}

/// Monte-Carlo coherence followed by its spectrum.
pub fn simulate_spectrum(config: &SimulationConfig, center: f64) -> Result<Spectrum> {
    spectrum_from_coherence(&mc_coherence(config)?, center)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config() -> SimulationConfig {
        SimulationConfig { sigma: 1.0, gamma: 0.2, lambda: 0.05, t_max: 20.0, dt: 0.05, n_traj: 300, seed: 7 }
    }

    #[test]
    fn validation() {
        assert!(config().validate().is_ok());
        assert!(SimulationConfig { dt: 0.2, ..config() }.validate().is_err());
        assert!(SimulationConfig { t_max: 10.0, ..config() }.validate().is_err());
        assert!(SimulationConfig { n_traj: 0, ..config() }.validate().is_err());
        assert!(SimulationConfig { sigma: -1.0, ..config() }.validate().is_err());
    }

    #[test]
    fn block_merging_equals_single_pass() {
        let c = config();
        let seq = mc_coherence(&c).unwrap();
        let mut rev = McAccumulator::new(c.n_steps() + 1);
        let blocks: Vec<_> = (0..c.n_blocks()).map(|b| simulate_block(&c, b)).collect();
        for b in &blocks {
            rev.merge(b);
        }
        assert_eq!(rev.finish(&c), seq);
        assert_eq!(seq.g[0], Complex64::new(1.0, 0.0));
    }

    #[test]
    fn cumulant_small_lambda_matches_static() {
        let t: Vec<f64> = (0..50).map(|k| 0.1 * k as f64).collect();
        let a = analytic_coherence(1.0, 0.1, &t).unwrap();
        let c = cumulant_coherence(1.0, 0.1, 1e-9, &t).unwrap();
        for (x, y) in a.g.iter().zip(&c.g) {
            assert!((x - y).norm() < 1e-8);
        }
    }

    #[test]
    fn undecayed_trace_is_rejected() {
        let t: Vec<f64> = (0..100).map(|k| 0.01 * k as f64).collect();
        let trace = analytic_coherence(0.0, 1.0, &t).unwrap();
        assert!(matches!(spectrum_from_coherence(&trace, 0.0), Err(Error::InsufficientDecay(_))));
    }
}
