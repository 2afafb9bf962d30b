//! Least-squares fitting of spectra and linewidth series.

mod series;
mod voigt;

pub use series::{
    aic, analyze_series, compare_models, extract_components, fit_series, ComponentMode, ComponentPoint,
    Components, LinewidthQuantity, ModelSpec, RankedModel, SeriesDataset, SeriesFitResult, SeriesModelFit,
    SeriesSettings,
};
pub use voigt::{
    classify_lineshape, classify_lineshape_with, fit_peak, fit_voigt, fit_voigt_with, initial_guess,
    Classification, FitOptions, LineshapeClass, VoigtFit, Weighting, WidthMode, CLASSIFY_RATIO_GATE,
};

/// Problem types exposed for Jacobian verification.
pub mod problems {
    pub use super::series::{SeriesProblem, SharedGaussianProblem};
    pub use super::voigt::PeakProblem;
}
