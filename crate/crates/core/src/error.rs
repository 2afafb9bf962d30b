use thiserror::Error;

/// Errors raised by the computational core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{name} is outside its domain: {value}")]
    Domain { name: &'static str, value: f64 },

    #[error("quadrature did not reach tolerance: estimate {value:e}, error {abs_error:e}")]
    QuadratureNotConverged { value: f64, abs_error: f64 },

    #[error("no Lorentzian width reproduces f_V = {f_v} with f_G = {f_g}")]
    NoSolution { f_v: f64, f_g: f64 },

    #[error("profile is not unimodal")]
    NotUnimodal,

    #[error("grid step {step} is coarser than the feature width {width}")]
    GridTooCoarse { step: f64, width: f64 },

    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(&'static str),

    #[error("no discernible peak above the baseline")]
    NoPeak,

    #[error("fit did not converge within {iterations} iterations")]
    NotConverged { iterations: usize },

    #[error("normal equations are singular")]
    IllConditioned,

    #[error("insufficient data: {got} points, at least {need} required")]
    InsufficientData { got: usize, need: usize },

    #[error("coherence has not decayed by t_max: |g| = {0:e}")]
    InsufficientDecay(f64),

    #[error("invalid simulation config: {0}")]
    InvalidConfig(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn check_domain(name: &'static str, value: f64, ok: bool) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Domain { name, value })
    }
}
