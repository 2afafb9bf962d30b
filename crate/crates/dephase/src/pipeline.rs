//! Parallel drivers over the core crate. Work is split across rayon threads
//! but results are always assembled in input order, so output does not
//! depend on scheduling.

use dephase_core::fitting::{
    analyze_series, classify_lineshape_with, fit_voigt_with, Classification, FitOptions, SeriesDataset,
    SeriesFitResult, SeriesSettings, VoigtFit,
};
use dephase_core::sim::{simulate_block, spectrum_from_coherence, CoherenceTrace, McAccumulator, SimulationConfig};
use dephase_core::Spectrum;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Voigt fits of every spectrum, in input order.
pub fn fit_all(spectra: &[Spectrum], options: &FitOptions) -> Result<Vec<VoigtFit>> {
    spectra
        .par_iter()
        .map(|s| fit_voigt_with(s, None, options).map_err(|e| Error::core(format!("fit at {} K", s.temperature()), e)))
        .collect()
}

/// Lineshape class of every spectrum; `None` where no peak was found.
pub fn classify_all(spectra: &[Spectrum], options: &FitOptions) -> Vec<Option<Classification>> {
    spectra.par_iter().map(|s| classify_lineshape_with(s, options).ok()).collect()
}

pub fn run_series(dataset: &SeriesDataset, settings: &SeriesSettings) -> Result<SeriesFitResult> {
    let fits = fit_all(dataset.spectra(), &settings.fit)?;
    analyze_series(dataset, fits, settings).map_err(|e| Error::core(format!("series {}", dataset.emitter_id()), e))
}

/// Monte-Carlo coherence with blocks simulated in parallel. Bit-identical to
/// [`dephase_core::sim::mc_coherence`].
pub fn mc_coherence(config: &SimulationConfig) -> Result<CoherenceTrace> {
    config.validate().map_err(|e| Error::core("simulation config", e))?;
    let blocks: Vec<McAccumulator> = (0..config.n_blocks()).into_par_iter().map(|b| simulate_block(config, b)).collect();
    let mut total = McAccumulator::new(config.n_steps() + 1);
    for block in &blocks {
        total.merge(block);
    }
    Ok(total.finish(config))
}

/// Coherence trace and its spectrum centred at `center` (meV).
pub fn simulate(config: &SimulationConfig, center: f64) -> Result<(CoherenceTrace, Spectrum)> {
    let trace = mc_coherence(config)?;
    let spectrum = spectrum_from_coherence(&trace, center).map_err(|e| Error::core("simulated spectrum", e))?;
    Ok((trace, spectrum))
}

/// 1 K grid from 0 to the highest temperature (rounded up).
pub fn dense_temperatures(points: &[(f64, f64)]) -> Vec<f64> {
    let t_max = points.iter().map(|p| p.0).fold(0.0, f64::max).ceil() as usize;
    (0..=t_max).map(|t| t as f64).collect()
}
