//! Gaussian, Lorentzian and Voigt profiles and FWHM algebra.
//!
//! All profiles are unit-area densities in 1/meV. A Voigt profile is
//! described either by (σ, γ) — Gaussian standard deviation and Lorentzian
//! half width — or by the FWHMs f_G = 2σ√(2 ln 2) and f_L = 2γ.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::consts::FWHM_PER_SIGMA;
use crate::error::check_domain;
use crate::faddeeva::faddeeva_with_derivative;
use crate::{Error, Result};

const SQRT_2: f64 = core::f64::consts::SQRT_2;
const SQRT_2PI: f64 = 2.506_628_274_631_000_7;
const FRAC_1_PI: f64 = core::f64::consts::FRAC_1_PI;

/// Lorentzian coefficient of the Voigt FWHM approximation.
pub const FWHM_LORENTZ_LINEAR: f64 = 0.5346;
/// Coefficient of f_L² under the square root of the Voigt FWHM approximation.
pub const FWHM_LORENTZ_QUADRATIC: f64 = 0.2166;

/// Parameters of a single Voigt peak on a constant baseline.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct VoigtParams {
    /// Peak position (meV).
    pub center: f64,
    /// Gaussian FWHM f_G (meV).
    pub f_g: f64,
    /// Lorentzian FWHM f_L (meV).
    pub f_l: f64,
    /// Area under the peak (counts·meV).
    pub amplitude: f64,
    /// Constant offset (counts).
    pub baseline: f64,
}

impl VoigtParams {
    pub fn sigma(&self) -> f64 {
        self.f_g / FWHM_PER_SIGMA
    }

    pub fn gamma(&self) -> f64 {
        0.5 * self.f_l
    }

    /// Total FWHM from the two components.
    pub fn total_fwhm(&self) -> f64 {
        fwhm_formula(self.f_g, self.f_l)
    }

    /// Model intensity at `energy`.
    pub fn eval(&self, energy: f64) -> f64 {
        self.amplitude * voigt_density(energy - self.center, self.sigma(), self.gamma()) + self.baseline
    }

    /// Peak height above baseline.
    pub fn peak_height(&self) -> f64 {
        self.amplitude * voigt_density(0.0, self.sigma(), self.gamma())
    }
}

/// Unit-area Gaussian density with standard deviation `sigma`.
pub fn eval_gaussian(x: f64, sigma: f64) -> Result<f64> {
    check_domain("sigma", sigma, sigma > 0.0 && sigma.is_finite())?;
    Ok(gaussian_density(x, sigma))
}

/// Unit-area Lorentzian density with half width `gamma`.
pub fn eval_lorentzian(x: f64, gamma: f64) -> Result<f64> {
    check_domain("gamma", gamma, gamma > 0.0 && gamma.is_finite())?;
    Ok(lorentzian_density(x, gamma))
}

/// Unit-area Voigt density: Re w(z)/(σ√(2π)) with z = (x + iγ)/(σ√2).
pub fn eval_voigt(x: f64, sigma: f64, gamma: f64) -> Result<f64> {
    check_domain("sigma", sigma, sigma >= 0.0 && sigma.is_finite())?;
    check_domain("gamma", gamma, gamma >= 0.0 && gamma.is_finite())?;
    check_domain("sigma + gamma", sigma + gamma, sigma + gamma > 0.0)?;
    Ok(voigt_density(x, sigma, gamma))
}

#[inline]
pub(crate) fn gaussian_density(x: f64, sigma: f64) -> f64 {
    let u = x / sigma;
    libm::exp(-0.5 * u * u) / (sigma * SQRT_2PI)
}

#[inline]
pub(crate) fn lorentzian_density(x: f64, gamma: f64) -> f64 {
    FRAC_1_PI * gamma / (x * x + gamma * gamma)
}

pub(crate) fn voigt_density(x: f64, sigma: f64, gamma: f64) -> f64 {
    if gamma == 0.0 {
        gaussian_density(x, sigma)
    } else if sigma == 0.0 {
        lorentzian_density(x, gamma)
    } else {
        let z = Complex64::new(x, gamma) / (sigma * SQRT_2);
        crate::faddeeva::faddeeva(z).re / (sigma * SQRT_2PI)
    }
}

/// Voigt density and its partial derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VoigtGradient {
    pub value: f64,
    pub d_x: f64,
    pub d_sigma: f64,
    pub d_gamma: f64,
}

/// Evaluates the Voigt density together with ∂/∂x, ∂/∂σ and ∂/∂γ.
///
/// At σ = 0 the derivative with respect to σ is zero (the profile is even in σ).
pub(crate) fn voigt_gradient(x: f64, sigma: f64, gamma: f64) -> VoigtGradient {
    if sigma == 0.0 {
        let d = x * x + gamma * gamma;
        return VoigtGradient {
            value: FRAC_1_PI * gamma / d,
            d_x: -2.0 * FRAC_1_PI * gamma * x / (d * d),
            d_sigma: 0.0,
            d_gamma: FRAC_1_PI * (x * x - gamma * gamma) / (d * d),
        };
    }
    let scale = sigma * SQRT_2;
    let z = Complex64::new(x, gamma) / scale;
    let (w, dw) = faddeeva_with_derivative(z);
    let norm = 1.0 / (sigma * SQRT_2PI);
    let value = if gamma == 0.0 { gaussian_density(x, sigma) } else { norm * w.re };
    VoigtGradient {
        value,
        d_x: norm * dw.re / scale,
        d_sigma: -norm * (dw * z).re / sigma - value / sigma,
        d_gamma: -norm * dw.im / scale,
    }
}

/// Brute-force Voigt profile: the defining convolution ∫G(x′;σ)L(x−x′;γ)dx′
/// evaluated by a fixed-step trapezoid rule.
///
/// The step is min(σ, γ)/50 and the integration runs over the Gaussian's
/// support ±12σ (inside ±40·max(σ, γ)), where the Gaussian weights are
/// renormalized to unit discrete area.
pub fn convolution_oracle(x_grid: &[f64], sigma: f64, gamma: f64) -> Result<Vec<f64>> {
    check_domain("sigma", sigma, sigma > 0.0 && sigma.is_finite())?;
    check_domain("gamma", gamma, gamma > 0.0 && gamma.is_finite())?;
    let width = sigma.max(gamma);
    for pair in x_grid.windows(2) {
        let step = pair[1] - pair[0];
        if !(step > 0.0) {
            return Err(Error::InvalidSpectrum("oracle grid must be strictly increasing"));
        }
        if step > width {
            return Err(Error::GridTooCoarse { step, width });
        }
    }

    let support = (12.0 * sigma).min(40.0 * width);
    let target_step = sigma.min(gamma) / 50.0;
    let half_panels = libm::ceil(support / target_step) as usize;
    let h = support / half_panels as f64;

    let nodes: Vec<f64> = (0..=2 * half_panels)
        .map(|k| -support + k as f64 * h)
        .collect();
    let mut weights: Vec<f64> = nodes
        .iter()
        .enumerate()
        .map(|(k, &xp)| {
            let end = if k == 0 || k == 2 * half_panels { 0.5 } else { 1.0 };
            end * gaussian_density(xp, sigma)
        })
        .collect();
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);

    Ok(x_grid
        .iter()
        .map(|&x| {
            nodes
                .iter()
                .zip(&weights)
                .map(|(&xp, &w)| w * lorentzian_density(x - xp, gamma))
                .sum()
        })
        .collect())
}

/// Voigt FWHM from its Gaussian and Lorentzian components:
/// f_V = 0.5346·f_L + √(0.2166·f_L² + f_G²).
pub fn voigt_fwhm(f_g: f64, f_l: f64) -> Result<f64> {
    check_domain("f_G", f_g, f_g >= 0.0 && f_g.is_finite())?;
    check_domain("f_L", f_l, f_l >= 0.0 && f_l.is_finite())?;
    Ok(fwhm_formula(f_g, f_l))
}

#[inline]
pub(crate) fn fwhm_formula(f_g: f64, f_l: f64) -> f64 {
    FWHM_LORENTZ_LINEAR * f_l + libm::sqrt(FWHM_LORENTZ_QUADRATIC * f_l * f_l + f_g * f_g)
}

/// Lorentzian component reproducing a total width `f_v` given `f_g`.
///
/// The physical root of (a² − b)f_L² − 2a·f_V·f_L + f_V² − f_G² = 0, written
/// in the cancellation-free form (f_V² − f_G²)/(a·f_V + √disc).
pub fn invert_fwhm(f_v: f64, f_g: f64) -> Result<f64> {
    check_domain("f_G", f_g, f_g >= 0.0 && f_g.is_finite())?;
    check_domain("f_V", f_v, f_v.is_finite())?;
    if f_v < f_g {
        return Err(Error::NoSolution { f_v, f_g });
    }
    let a = FWHM_LORENTZ_LINEAR;
    let c = a * a - FWHM_LORENTZ_QUADRATIC;
    let disc = a * a * f_v * f_v - c * (f_v - f_g) * (f_v + f_g);
    let numer = (f_v - f_g) * (f_v + f_g);
    if numer == 0.0 {
        return Ok(0.0);
    }
    Ok(numer / (a * f_v + libm::sqrt(disc)))
}

/// Measures the FWHM of a unimodal profile by bisecting both half-maximum
/// crossings to 1e-10 meV.
///
/// `peak` is the location of the maximum and `scale` a rough width used to
/// bracket the crossings.
pub fn numeric_fwhm<F: Fn(f64) -> f64>(profile: F, peak: f64, scale: f64) -> Result<f64> {
    check_domain("scale", scale, scale > 0.0 && scale.is_finite())?;
    let top = profile(peak);
    if !(top > 0.0) || !top.is_finite() {
        return Err(Error::NotUnimodal);
    }
    let half = 0.5 * top;
    let left = half_crossing(&profile, peak, -scale, half, top)?;
    let right = half_crossing(&profile, peak, scale, half, top)?;
    Ok(right - left)
}

fn half_crossing<F: Fn(f64) -> f64>(profile: &F, peak: f64, step: f64, half: f64, top: f64) -> Result<f64> {
    // Walk outward checking monotone descent until below half maximum.
    let probes = 16;
    let mut inner = peak;
    let mut last = top;
    let mut reach = step;
    for _ in 0..60 {
        let outer = peak + reach;
        let mut crossed = None;
        for k in 1..=probes {
            let x = inner + (outer - inner) * k as f64 / probes as f64;
            let v = profile(x);
            if v > last * (1.0 + 1e-12) || v > top {
                return Err(Error::NotUnimodal);
            }
            if v < half {
                crossed = Some(x);
                break;
            }
            last = v;
            inner = x;
        }
        if let Some(outer) = crossed {
            let (mut lo, mut hi) = (inner, outer);
            while libm::fabs(hi - lo) > 1e-10 {
                let mid = 0.5 * (lo + hi);
                if mid == lo || mid == hi {
                    break;
                }
                if profile(mid) >= half {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return Ok(0.5 * (lo + hi));
        }
        reach *= 2.0;
    }
    Err(Error::NotUnimodal)
}
