//! Bose–Einstein statistics, the finite-Debye dephasing integral, and the
//! linewidth-vs-temperature models built on them.

use alloc::vec;
use alloc::vec::Vec;

use crate::consts::{BOLTZMANN, HBAR, PI_SQUARED_OVER_3};
use crate::error::check_domain;
use crate::lineshape::voigt_fwhm;
use crate::quadrature::{integrate_with_breakpoints, QuadEstimate, Tolerance};
use crate::Result;

/// Temperature at which the acoustic model's amplitude equals f_L.
pub const REFERENCE_TEMPERATURE: f64 = 270.0;

/// Default Debye temperature (K).
pub const DEFAULT_DEBYE_TEMPERATURE: f64 = 600.0;

/// Default energy of the low-lying optical phonon (meV).
pub const DEFAULT_PHONON_ENERGY: f64 = 18.0;

// Beyond this the integrand is below the smallest subnormal.
const REDUCED_CUTOFF: f64 = 750.0;
/// Above this x_D the integral is taken as the limit minus its tail.
const TAIL_SWITCH: f64 = 8.0;

/// Mean occupation of a bosonic mode of `energy` (meV) at `temperature` (K).
pub fn bose_einstein(energy: f64, temperature: f64) -> Result<f64> {
    check_domain("energy", energy, energy > 0.0 && energy.is_finite())?;
    check_domain("temperature", temperature, temperature >= 0.0 && temperature.is_finite())?;
    if temperature == 0.0 {
        return Ok(0.0);
    }
    Ok(1.0 / libm::expm1(energy / (BOLTZMANN * temperature)))
}

/// x²eˣ/(eˣ−1)², the dimensionless integrand of the Debye dephasing integral.
///
/// Evaluated as x²e⁻ˣ/(1−e⁻ˣ)², which neither overflows nor cancels. Tends
/// to 1 as x → 0.
pub fn reduced_integrand(x: f64) -> f64 {
    if x == 0.0 {
        return 1.0;
    }
    let d = -libm::expm1(-x);
    x * x * libm::exp(-x) / (d * d)
}

/// Ĵ(x_D) = ∫₀^{x_D} x²eˣ/(eˣ−1)² dx with its error estimate.
///
/// Past the bump the value is formed as π²/3 minus the (non-negative) tail
/// ∫_{x_D}^∞, so it never exceeds the limit through rounding.
pub fn reduced_debye_integral(x_debye: f64, tol: Tolerance) -> Result<QuadEstimate> {
    check_domain("x_debye", x_debye, x_debye >= 0.0)?;
    if x_debye >= TAIL_SWITCH {
        if x_debye >= REDUCED_CUTOFF {
            return Ok(QuadEstimate { value: PI_SQUARED_OVER_3, abs_error: 0.0 });
        }
        let tail = integrate_with_breakpoints(reduced_integrand, &breakpoints(x_debye, REDUCED_CUTOFF), tol)?;
        return Ok(QuadEstimate { value: PI_SQUARED_OVER_3 - tail.value, abs_error: tail.abs_error });
    }
    integrate_with_breakpoints(reduced_integrand, &breakpoints(0.0, x_debye), tol)
}

/// Fixed breakpoints keep the bump near x ≈ 2 and the decay resolved.
fn breakpoints(lo: f64, hi: f64) -> Vec<f64> {
    let mut points = vec![lo];
    points.extend([1.0, 4.0, 16.0, 64.0, 256.0].into_iter().filter(|&bp| bp > lo && bp < hi));
    points.push(hi);
    points
}

/// J(T, θ_D) = ∫₀^{ω_D} ω² n(ω)(n(ω)+1) dω in (1/ps)³, with ω_D = k_B θ_D/ħ.
pub fn debye_integral(temperature: f64, theta_d: f64) -> Result<f64> {
    debye_integral_estimate(temperature, theta_d, Tolerance::default()).map(|e| e.value)
}

/// [`debye_integral`] with an explicit tolerance, returning the error estimate.
pub fn debye_integral_estimate(temperature: f64, theta_d: f64, tol: Tolerance) -> Result<QuadEstimate> {
    check_domain("temperature", temperature, temperature >= 0.0 && temperature.is_finite())?;
    check_domain("theta_D", theta_d, theta_d > 0.0 && theta_d.is_finite())?;
    if temperature == 0.0 {
        return Ok(QuadEstimate { value: 0.0, abs_error: 0.0 });
    }
    let scale = thermal_rate_cubed(temperature);
    let reduced = reduced_debye_integral(theta_d / temperature, tol)?;
    Ok(QuadEstimate {
        value: scale * reduced.value,
        abs_error: scale * reduced.abs_error,
    })
}

/// Infinite-Debye limit of [`debye_integral`]: (k_B T/ħ)³·π²/3.
pub fn cubic_law_asymptote(temperature: f64) -> Result<f64> {
    check_domain("temperature", temperature, temperature >= 0.0 && temperature.is_finite())?;
    Ok(thermal_rate_cubed(temperature) * PI_SQUARED_OVER_3)
}

fn thermal_rate_cubed(temperature: f64) -> f64 {
    let rate = BOLTZMANN * temperature / HBAR;
    rate * rate * rate
}

/// Phonon coupling mechanism producing the temperature-dependent Lorentzian width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Coupling {
    /// Acoustic phonons with a finite Debye cutoff. `amplitude` is f_L (meV)
    /// at [`REFERENCE_TEMPERATURE`].
    AcousticDebye { amplitude: f64, theta_d: f64 },
    /// f_L = amplitude·T³, amplitude in meV/K³.
    CubicLaw { amplitude: f64 },
    /// Single optical mode: f_L = amplitude·n(n+1), amplitude in meV.
    OpticalMode { amplitude: f64, phonon_energy: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModelKind {
    AcousticDebye,
    CubicLaw,
    OpticalMode,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [ModelKind::AcousticDebye, ModelKind::CubicLaw, ModelKind::OpticalMode];

    pub fn label(self) -> &'static str {
        match self {
            ModelKind::AcousticDebye => "acoustic_debye",
            ModelKind::CubicLaw => "cubic_law",
            ModelKind::OpticalMode => "optical_mode",
        }
    }

    pub fn from_label(label: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.label() == label)
    }
}

impl core::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.label())
    }
}

/// A linewidth-vs-temperature model: a phonon coupling plus a constant
/// Gaussian (spectral-diffusion) FWHM floor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DephasingModel {
    pub coupling: Coupling,
    /// Temperature-independent Gaussian FWHM f_G (meV).
    pub gaussian_floor: f64,
}

impl DephasingModel {
    pub fn new(coupling: Coupling, gaussian_floor: f64) -> Result<Self> {
        let model = Self { coupling, gaussian_floor };
        model.validate()?;
        Ok(model)
    }

    pub fn kind(&self) -> ModelKind {
        match self.coupling {
            Coupling::AcousticDebye { .. } => ModelKind::AcousticDebye,
            Coupling::CubicLaw { .. } => ModelKind::CubicLaw,
            Coupling::OpticalMode { .. } => ModelKind::OpticalMode,
        }
    }

    pub fn amplitude(&self) -> f64 {
        match self.coupling {
            Coupling::AcousticDebye { amplitude, .. }
            | Coupling::CubicLaw { amplitude }
            | Coupling::OpticalMode { amplitude, .. } => amplitude,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_domain("gaussian_floor", self.gaussian_floor, self.gaussian_floor >= 0.0 && self.gaussian_floor.is_finite())?;
        let amplitude = self.amplitude();
        check_domain("amplitude", amplitude, amplitude >= 0.0 && amplitude.is_finite())?;
        match self.coupling {
            Coupling::AcousticDebye { theta_d, .. } => {
                check_domain("theta_D", theta_d, theta_d > 0.0 && theta_d.is_finite())
            }
            Coupling::CubicLaw { .. } => Ok(()),
            Coupling::OpticalMode { phonon_energy, .. } => check_domain(
                "phonon_energy",
                phonon_energy,
                phonon_energy > 0.0 && phonon_energy.is_finite(),
            ),
        }
    }

    /// Lorentzian FWHM f_L (meV) at `temperature`.
    pub fn lorentzian_fwhm(&self, temperature: f64) -> Result<f64> {
        self.validate()?;
        check_domain("temperature", temperature, temperature >= 0.0 && temperature.is_finite())?;
        Ok(self.amplitude() * coupling_shape(self.kind(), temperature, self.shape_parameter())?)
    }

    /// Total Voigt FWHM f_V (meV) at `temperature`.
    pub fn total_fwhm(&self, temperature: f64) -> Result<f64> {
        voigt_fwhm(self.gaussian_floor, self.lorentzian_fwhm(temperature)?)
    }

    /// θ_D for the acoustic model, phonon energy for the optical model.
    pub(crate) fn shape_parameter(&self) -> f64 {
        match self.coupling {
            Coupling::AcousticDebye { theta_d, .. } => theta_d,
            Coupling::CubicLaw { .. } => 0.0,
            Coupling::OpticalMode { phonon_energy, .. } => phonon_energy,
        }
    }
}

/// f_L per unit amplitude for a model kind; `shape_parameter` is θ_D or the
/// phonon energy (ignored for the cubic law).
pub(crate) fn coupling_shape(kind: ModelKind, temperature: f64, shape_parameter: f64) -> Result<f64> {
    match kind {
        ModelKind::AcousticDebye => {
            if temperature == 0.0 {
                return Ok(0.0);
            }
            let reference = debye_integral(REFERENCE_TEMPERATURE, shape_parameter)?;
            Ok(debye_integral(temperature, shape_parameter)? / reference)
        }
        ModelKind::CubicLaw => Ok(temperature * temperature * temperature),
        ModelKind::OpticalMode => {
            let n = bose_einstein(shape_parameter, temperature)?;
            Ok(n * (n + 1.0))
        }
    }
}
