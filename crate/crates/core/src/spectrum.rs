use alloc::string::String;
use alloc::vec::Vec;

use crate::lineshape::numeric_fwhm;
use crate::{Error, Result};

/// Minimum number of bins in a [`Spectrum`].
pub const MIN_POINTS: usize = 20;

/// One emission spectrum: a strictly increasing energy grid (meV), the
/// intensity in each bin, and the temperature it was recorded at.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    energy: Vec<f64>,
    intensity: Vec<f64>,
    temperature: f64,
    emitter_id: String,
}

impl Spectrum {
    pub fn new(energy: Vec<f64>, intensity: Vec<f64>, temperature: f64, emitter_id: impl Into<String>) -> Result<Self> {
        if energy.len() != intensity.len() {
            return Err(Error::InvalidSpectrum("energy and intensity lengths differ"));
        }
        if energy.len() < MIN_POINTS {
            return Err(Error::InvalidSpectrum("fewer than 20 points"));
        }
        if energy.iter().any(|e| !e.is_finite()) {
            return Err(Error::InvalidSpectrum("non-finite energy"));
        }
        if !energy.windows(2).all(|w| w[1] > w[0]) {
            return Err(Error::InvalidSpectrum("energy grid is not strictly increasing"));
        }
        if intensity.iter().any(|i| !i.is_finite()) {
            return Err(Error::InvalidSpectrum("non-finite intensity"));
        }
        if intensity.iter().any(|&i| i < 0.0) {
            return Err(Error::InvalidSpectrum("negative intensity"));
        }
        if !(temperature >= 0.0 && temperature.is_finite()) {
            return Err(Error::InvalidSpectrum("temperature must be finite and non-negative"));
        }
        Ok(Self {
            energy,
            intensity,
            temperature,
            emitter_id: emitter_id.into(),
        })
    }

    pub fn energy(&self) -> &[f64] {
        &self.energy
    }

    pub fn intensity(&self) -> &[f64] {
        &self.intensity
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    pub fn emitter_id(&self) -> &str {
        &self.emitter_id
    }

    pub fn len(&self) -> usize {
        self.energy.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energy.is_empty()
    }

    pub fn with_temperature(mut self, temperature: f64) -> Self {
        self.temperature = temperature;
        self
    }

    pub fn with_emitter_id(mut self, id: impl Into<String>) -> Self {
        self.emitter_id = id.into();
        self
    }

    /// Same spectrum on a grid shifted by `offset` meV.
    pub fn translated(&self, offset: f64) -> Self {
        Self {
            energy: self.energy.iter().map(|e| e + offset).collect(),
            ..self.clone()
        }
    }

    /// Same spectrum with every intensity multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            intensity: self.intensity.iter().map(|i| i * factor).collect(),
            ..self.clone()
        }
    }

    /// Trapezoid area under the intensity.
    pub fn area(&self) -> f64 {
        self.energy
            .windows(2)
            .zip(self.intensity.windows(2))
            .map(|(e, i)| 0.5 * (e[1] - e[0]) * (i[0] + i[1]))
            .sum()
    }

    /// Index of the maximum intensity.
    pub fn argmax(&self) -> usize {
        self.intensity
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc })
            .0
    }

    /// Linear interpolation of the intensity; zero outside the grid.
    pub fn interpolate(&self, energy: f64) -> f64 {
        let e = &self.energy;
        if energy < e[0] || energy > e[e.len() - 1] {
            return 0.0;
        }
        let idx = e.partition_point(|&x| x <= energy);
        if idx == 0 {
            return self.intensity[0];
        }
        if idx >= e.len() {
            return self.intensity[e.len() - 1];
        }
        let (x0, x1) = (e[idx - 1], e[idx]);
        let t = (energy - x0) / (x1 - x0);
        self.intensity[idx - 1] * (1.0 - t) + self.intensity[idx] * t
    }

    /// FWHM of the sampled line, measured on the linear interpolant.
    pub fn fwhm(&self) -> Result<f64> {
        let peak = self.energy[self.argmax()];
        let step = self.energy[1] - self.energy[0];
        numeric_fwhm(|x| self.interpolate(x), peak, step)
    }
}
