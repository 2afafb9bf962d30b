//! Lineshape analysis and forward simulation for phonon-dephased quantum emitters.
//!
//! The crate is `no_std` (with `alloc`) and purely computational:
//!
//! - [`physics`]: Bose–Einstein statistics, the finite-Debye dephasing integral
//!   and the three linewidth-vs-temperature models.
//! - [`lineshape`]: Gaussian, Lorentzian and Voigt profiles, FWHM algebra.
//! - [`fitting`]: a Levenberg–Marquardt engine, per-spectrum Voigt fits,
//!   lineshape classification and temperature-series model comparison.
//! - [`sim`]: analytic and Monte-Carlo coherence of a spectrally diffusing,
//!   phonon-dephased two-level emitter, and the FFT spectrum it produces.
//!
//! Units are fixed everywhere: energies and linewidths in meV, temperatures
//! in K, times in ps and rates in 1/ps.

#![no_std]
// Coefficient tables keep their published digits; negated comparisons reject NaN.
#![allow(clippy::excessive_precision, clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod consts;
mod error;
pub mod faddeeva;
pub mod fft;
pub mod fitting;
pub mod lineshape;
pub mod lm;
pub mod physics;
pub mod quadrature;
pub mod sim;
pub mod spectrum;

pub use error::{Error, Result};
pub use spectrum::Spectrum;
