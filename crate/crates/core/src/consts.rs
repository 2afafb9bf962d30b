//! Physical constants in the crate's unit system (meV, K, ps).

/// Boltzmann constant in meV/K (CODATA 2018).
pub const BOLTZMANN: f64 = 8.617333262e-2;

/// Reduced Planck constant in meV·ps (CODATA 2018).
pub const HBAR: f64 = 6.582119569e-1;

/// Ratio between a Gaussian FWHM and its standard deviation, 2√(2 ln 2).
pub const FWHM_PER_SIGMA: f64 = 2.354_820_045_030_949_4;

/// π²/3, the value of ∫₀^∞ x²eˣ/(eˣ−1)² dx.
pub const PI_SQUARED_OVER_3: f64 = core::f64::consts::PI * core::f64::consts::PI / 3.0;

/// Converts an angular frequency in 1/ps to an energy in meV.
#[inline]
pub fn energy_from_rate(rate: f64) -> f64 {
    HBAR * rate
}

/// Converts an energy in meV to an angular frequency in 1/ps.
#[inline]
pub fn rate_from_energy(energy: f64) -> f64 {
    energy / HBAR
}
