//! Synthetic temperature series with Poisson counting noise.

use std::path::Path;

use dephase_core::lineshape::VoigtParams;
use dephase_core::physics::{Coupling, DephasingModel, DEFAULT_DEBYE_TEMPERATURE};
use dephase_core::Spectrum;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{Error, Result};
use crate::formats::{format_sig, save_manifest, save_spectrum, ManifestEntry, ManifestMetadata, SeriesManifest};

pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl GridSpec {
    /// Points start, start + step, … up to and including `stop` (within step/1000).
    pub fn points(&self) -> Vec<f64> {
        let n = ((self.stop - self.start) / self.step + 1e-3).floor() as usize;
        (0..=n).map(|i| self.start + i as f64 * self.step).collect()
    }

    fn validate(&self, what: &str) -> Result<()> {
        if !(self.step > 0.0 && self.stop >= self.start && self.start.is_finite() && self.stop.is_finite()) {
            return Err(Error::Config(format!("{what} grid needs start <= stop and step > 0")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub emitter_id: String,
    pub model: DephasingModel,
    pub temperatures: GridSpec,
    pub energy: GridSpec,
    /// Line centre at the first and last temperature; linear in between.
    pub center_start: f64,
    pub center_end: f64,
    /// Peak height above baseline is snr² counts. `None` writes the exact
    /// profile without noise.
    pub peak_snr: Option<f64>,
    /// Background counts per bin.
    pub baseline: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            emitter_id: "E4".into(),
            model: DephasingModel {
                coupling: Coupling::AcousticDebye { amplitude: 6.82, theta_d: DEFAULT_DEBYE_TEMPERATURE },
                gaussian_floor: 0.72,
            },
            temperatures: GridSpec { start: 10.0, stop: 270.0, step: 20.0 },
            energy: GridSpec { start: 1780.0, stop: 1860.0, step: 0.1 },
            center_start: 1820.2,
            center_end: 1813.5,
            peak_snr: Some(30.0),
            baseline: 10.0,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        self.model.validate().map_err(|e| Error::core("synthetic model", e))?;
        self.temperatures.validate("temperature")?;
        self.energy.validate("energy")?;
        if self.temperatures.start <= 0.0 {
            return Err(Error::Config("temperatures must be positive".into()));
        }
        if let Some(snr) = self.peak_snr {
            if !(snr > 0.0 && snr.is_finite()) {
                return Err(Error::Config(format!("peak SNR must be positive, got {snr}")));
            }
        }
        if !(self.baseline >= 0.0 && self.baseline.is_finite()) {
            return Err(Error::Config("baseline must be non-negative".into()));
        }
        Ok(())
    }

    /// Generator parameters of the line at `temperature`.
    pub fn line(&self, temperature: f64) -> Result<VoigtParams> {
        let (t0, t1) = (self.temperatures.start, self.temperatures.stop);
        let frac = if t1 > t0 { (temperature - t0) / (t1 - t0) } else { 0.0 };
        let f_l = self.model.lorentzian_fwhm(temperature).map_err(|e| Error::core("synthetic model", e))?;
        let mut line = VoigtParams {
            center: self.center_start + frac * (self.center_end - self.center_start),
            f_g: self.model.gaussian_floor,
            f_l,
            amplitude: 1.0,
            baseline: self.baseline,
        };
        let height = self.peak_snr.map_or(1000.0, |s| s * s);
        line.amplitude = height / line.peak_height();
        Ok(line)
    }
}

/// In-memory spectra, one per temperature. Bin noise for the i-th temperature
/// comes from stream i of a ChaCha8 generator seeded with `seed`.
pub fn synthesize(config: &SynthConfig) -> Result<Vec<Spectrum>> {
    config.validate()?;
    let energy = config.energy.points();
    config
        .temperatures
        .points()
        .into_iter()
        .enumerate()
        .map(|(index, t)| {
            let line = config.line(t)?;
            let mut intensity: Vec<f64> = energy.iter().map(|&e| line.eval(e)).collect();
            if config.peak_snr.is_some() {
                let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
                rng.set_stream(index as u64);
                for v in intensity.iter_mut() {
                    *v = if *v > 0.0 {
                        Poisson::new(*v).map_err(|e| Error::Config(e.to_string()))?.sample(&mut rng)
                    } else {
                        0.0
                    };
                }
            }
            Spectrum::new(energy.clone(), intensity, t, config.emitter_id.clone())
                .map_err(|e| Error::core(format!("synthetic spectrum at {t} K"), e))
        })
        .collect()
}

pub fn file_name(emitter_id: &str, temperature: f64) -> String {
    if temperature.fract() == 0.0 && temperature < 1000.0 {
        format!("{emitter_id}_{:03}K.csv", temperature as u32)
    } else {
        format!("{emitter_id}_{}K.csv", format_sig(temperature, 12))
    }
}

/// Writes one spectrum file per temperature plus `manifest.json` into `dir`.
pub fn generate_synthetic_series(config: &SynthConfig, dir: &Path) -> Result<SeriesManifest> {
    let spectra = synthesize(config)?;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut entries = Vec::with_capacity(spectra.len());
    for s in &spectra {
        let name = file_name(&config.emitter_id, s.temperature());
        save_spectrum(&dir.join(&name), s)?;
        entries.push(ManifestEntry { temperature: s.temperature(), path: name });
    }
    let metadata = match config.model.coupling {
        Coupling::AcousticDebye { theta_d, .. } => Some(ManifestMetadata { theta_d: Some(theta_d), phonon_energy: None }),
        Coupling::OpticalMode { phonon_energy, .. } => {
            Some(ManifestMetadata { theta_d: None, phonon_energy: Some(phonon_energy) })
        }
        Coupling::CubicLaw { .. } => None,
    };
    let manifest = SeriesManifest { emitter_id: config.emitter_id.clone(), entries, metadata };
    save_manifest(&dir.join(MANIFEST_NAME), &manifest)?;
    Ok(manifest)
}
