//! Single-peak Voigt fits and Gaussian/Lorentzian classification.

use alloc::vec;
use alloc::vec::Vec;

use crate::consts::FWHM_PER_SIGMA;
use crate::lineshape::{fwhm_formula, voigt_density, voigt_gradient, VoigtParams};
use crate::lm::{covariance, halve_sign_changes, minimize, LeastSquaresProblem, LmConfig};
use crate::{Error, Result, Spectrum};

/// RSS ratio above which one pure lineshape is declared the better fit.
pub const CLASSIFY_RATIO_GATE: f64 = 1.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Weighting {
    /// wᵢ = 1/max(Iᵢ, 1), for counting statistics.
    #[default]
    Poisson,
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FitOptions {
    pub weighting: Weighting,
    pub lm: LmConfig,
}

/// Which widths are free in a peak fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WidthMode {
    Voigt,
    /// f_L ≡ 0.
    GaussianOnly,
    /// f_G ≡ 0.
    LorentzianOnly,
}

/// Result of a converged Voigt fit.
#[derive(Debug, Clone, PartialEq)]
pub struct VoigtFit {
    pub params: VoigtParams,
    /// One-sigma uncertainties from the linearized covariance, same units as `params`.
    pub uncertainties: VoigtParams,
    /// Weighted residual sum of squares.
    pub rss: f64,
    pub n_points: usize,
    pub converged: bool,
    pub n_iterations: usize,
}

impl VoigtFit {
    pub fn total_fwhm(&self) -> f64 {
        self.params.total_fwhm()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LineshapeClass {
    Gaussian,
    Lorentzian,
    Ambiguous,
}

impl LineshapeClass {
    pub fn label(self) -> &'static str {
        match self {
            LineshapeClass::Gaussian => "Gaussian",
            LineshapeClass::Lorentzian => "Lorentzian",
            LineshapeClass::Ambiguous => "Ambiguous",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Classification {
    pub class: LineshapeClass,
    pub rss_gaussian: f64,
    pub rss_lorentzian: f64,
    /// Larger RSS over smaller RSS (≥ 1).
    pub ratio: f64,
}

/// Index map from the internal parameter vector to physical quantities.
/// Widths are stored as square roots so that they stay non-negative.
#[derive(Debug, Clone, Copy)]
struct Layout {
    gauss: Option<usize>,
    lorentz: Option<usize>,
    amplitude: usize,
    baseline: usize,
}

impl Layout {
    fn new(mode: WidthMode) -> Self {
        match mode {
            WidthMode::Voigt => Self { gauss: Some(1), lorentz: Some(2), amplitude: 3, baseline: 4 },
            WidthMode::GaussianOnly => Self { gauss: Some(1), lorentz: None, amplitude: 2, baseline: 3 },
            WidthMode::LorentzianOnly => Self { gauss: None, lorentz: Some(1), amplitude: 2, baseline: 3 },
        }
    }

    fn len(&self) -> usize {
        self.baseline + 1
    }

    /// (center offset, f_G, f_L, amplitude, baseline)
    fn unpack(&self, p: &[f64]) -> (f64, f64, f64, f64, f64) {
        let sq = |i: Option<usize>| i.map_or(0.0, |i| p[i] * p[i]);
        (p[0], sq(self.gauss), sq(self.lorentz), p[self.amplitude], p[self.baseline])
    }

    fn pack(&self, offset: f64, f_g: f64, f_l: f64, amplitude: f64, baseline: f64) -> Vec<f64> {
        let mut p = vec![0.0; self.len()];
        p[0] = offset;
        if let Some(i) = self.gauss {
            p[i] = libm::sqrt(f_g);
        }
        if let Some(i) = self.lorentz {
            p[i] = libm::sqrt(f_l);
        }
        p[self.amplitude] = amplitude;
        p[self.baseline] = baseline;
        p
    }
}

/// Model value and physical gradient [∂/∂center, ∂/∂f_G, ∂/∂f_L, ∂/∂amplitude, ∂/∂baseline].
#[inline]
pub(crate) fn peak_model_gradient(x: f64, offset: f64, f_g: f64, f_l: f64, amplitude: f64, baseline: f64) -> (f64, [f64; 5]) {
    let g = voigt_gradient(x - offset, f_g / FWHM_PER_SIGMA, 0.5 * f_l);
    (
        amplitude * g.value + baseline,
        [
            -amplitude * g.d_x,
            amplitude * g.d_sigma / FWHM_PER_SIGMA,
            0.5 * amplitude * g.d_gamma,
            g.value,
            1.0,
        ],
    )
}

pub(crate) fn weights(intensity: &[f64], weighting: Weighting) -> Vec<f64> {
    match weighting {
        Weighting::Poisson => intensity.iter().map(|&i| 1.0 / libm::sqrt(i.max(1.0))).collect(),
        Weighting::Uniform => vec![1.0; intensity.len()],
    }
}

/// Weighted residuals of a single-peak model. Widths enter as square roots.
pub struct PeakProblem<'a> {
    x: Vec<f64>,
    y: &'a [f64],
    sqrt_w: Vec<f64>,
    layout: Layout,
    origin: f64,
}

impl<'a> PeakProblem<'a> {
    /// Problem on `spectrum` with energies measured from its maximum bin.
    pub fn new(spectrum: &'a Spectrum, mode: WidthMode, weighting: Weighting) -> Self {
        let origin = spectrum.energy()[spectrum.argmax()];
        Self {
            x: spectrum.energy().iter().map(|e| e - origin).collect(),
            y: spectrum.intensity(),
            sqrt_w: weights(spectrum.intensity(), weighting),
            layout: Layout::new(mode),
            origin,
        }
    }

    /// Internal parameter vector for `params`.
    pub fn pack(&self, params: &VoigtParams) -> Vec<f64> {
        self.layout.pack(params.center - self.origin, params.f_g, params.f_l, params.amplitude, params.baseline)
    }

    /// Physical parameters for an internal vector.
    pub fn unpack(&self, p: &[f64]) -> VoigtParams {
        let (c, f_g, f_l, amplitude, baseline) = self.layout.unpack(p);
        VoigtParams { center: self.origin + c, f_g, f_l, amplitude, baseline }
    }
}

impl LeastSquaresProblem for PeakProblem<'_> {
    fn n_residuals(&self) -> usize {
        self.x.len()
    }

    fn n_params(&self) -> usize {
        self.layout.len()
    }

    fn residuals(&self, p: &[f64], out: &mut [f64]) {
        let (c, f_g, f_l, a, b) = self.layout.unpack(p);
        let (sigma, gamma) = (f_g / FWHM_PER_SIGMA, 0.5 * f_l);
        for (i, r) in out.iter_mut().enumerate() {
            let model = a * voigt_density(self.x[i] - c, sigma, gamma) + b;
            *r = self.sqrt_w[i] * (model - self.y[i]);
        }
    }

    fn jacobian(&self, p: &[f64], out: &mut [f64]) {
        let (c, f_g, f_l, a, b) = self.layout.unpack(p);
        let n = self.layout.len();
        for i in 0..self.x.len() {
            let (_, grad) = peak_model_gradient(self.x[i], c, f_g, f_l, a, b);
            let w = self.sqrt_w[i];
            let row = &mut out[i * n..(i + 1) * n];
            row[0] = w * grad[0];
            if let Some(j) = self.layout.gauss {
                row[j] = w * grad[1] * 2.0 * p[j];
            }
            if let Some(j) = self.layout.lorentz {
                row[j] = w * grad[2] * 2.0 * p[j];
            }
            row[self.layout.amplitude] = w * grad[3];
            row[self.layout.baseline] = w * grad[4];
        }
    }

    fn constrain(&self, current: &[f64], trial: &mut [f64]) {
        halve_sign_changes(self.layout.gauss.into_iter().chain(self.layout.lorentz), current, trial);
    }
}

impl PeakProblem<'_> {
    /// Jacobian with respect to the physical (unsquared) parameters.
    fn physical_jacobian(&self, p: &[f64]) -> Vec<f64> {
        let (c, f_g, f_l, a, b) = self.layout.unpack(p);
        let n = self.layout.len();
        let mut out = vec![0.0; self.x.len() * n];
        for i in 0..self.x.len() {
            let (_, grad) = peak_model_gradient(self.x[i], c, f_g, f_l, a, b);
            let w = self.sqrt_w[i];
            let row = &mut out[i * n..(i + 1) * n];
            row[0] = w * grad[0];
            if let Some(j) = self.layout.gauss {
                row[j] = w * grad[1];
            }
            if let Some(j) = self.layout.lorentz {
                row[j] = w * grad[2];
            }
            row[self.layout.amplitude] = w * grad[3];
            row[self.layout.baseline] = w * grad[4];
        }
        out
    }
}

/// Baseline (median) and noise (standard deviation) of the outer 10% of bins.
pub(crate) fn baseline_and_noise(intensity: &[f64]) -> (f64, f64) {
    let n = intensity.len();
    let k = (n / 20).max(1);
    let mut outer: Vec<f64> = intensity[..k].iter().chain(&intensity[n - k..]).copied().collect();
    outer.sort_by(f64::total_cmp);
    let m = outer.len();
    let median = if m % 2 == 1 { outer[m / 2] } else { 0.5 * (outer[m / 2 - 1] + outer[m / 2]) };
    let mean = outer.iter().sum::<f64>() / m as f64;
    let var = outer.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / m as f64;
    (median, libm::sqrt(var))
}

/// Moment-based starting point for a peak fit. Fails with [`Error::NoPeak`]
/// when the maximum does not clear the baseline by five noise levels.
pub fn initial_guess(spectrum: &Spectrum) -> Result<VoigtParams> {
    let e = spectrum.energy();
    let y = spectrum.intensity();
    let (baseline, noise) = baseline_and_noise(y);
    let k_max = spectrum.argmax();
    let height = y[k_max] - baseline;
    if !(height > 5.0 * noise) || !(height > 0.0) {
        return Err(Error::NoPeak);
    }

    // Contiguous region around the maximum above 10% of the peak height.
    let cut = 0.1 * height;
    let mut lo = k_max;
    while lo > 0 && y[lo - 1] - baseline > cut {
        lo -= 1;
    }
    let mut hi = k_max;
    while hi + 1 < y.len() && y[hi + 1] - baseline > cut {
        hi += 1;
    }
    let (mut s0, mut s1) = (0.0, 0.0);
    for k in lo..=hi {
        let w = y[k] - baseline;
        s0 += w;
        s1 += w * e[k];
    }
    let centroid = s1 / s0;
    let var = (lo..=hi).map(|k| (y[k] - baseline) * (e[k] - centroid) * (e[k] - centroid)).sum::<f64>() / s0;

    let step = (e[e.len() - 1] - e[0]) / (e.len() - 1) as f64;
    let width = (FWHM_PER_SIGMA * libm::sqrt(var)).max(2.0 * step);
    let split = width / fwhm_formula(1.0, 1.0);
    let peak_density = voigt_density(0.0, split / FWHM_PER_SIGMA, 0.5 * split);
    Ok(VoigtParams {
        center: centroid,
        f_g: split,
        f_l: split,
        amplitude: height / peak_density,
        baseline,
    })
}

/// Fits a single Voigt peak on a constant baseline with default options.
pub fn fit_voigt(spectrum: &Spectrum, init: Option<VoigtParams>) -> Result<VoigtFit> {
    fit_voigt_with(spectrum, init, &FitOptions::default())
}

pub fn fit_voigt_with(spectrum: &Spectrum, init: Option<VoigtParams>, options: &FitOptions) -> Result<VoigtFit> {
    fit_peak(spectrum, init, options, WidthMode::Voigt)
}

/// Fits a peak with the given width mode.
pub fn fit_peak(spectrum: &Spectrum, init: Option<VoigtParams>, options: &FitOptions, mode: WidthMode) -> Result<VoigtFit> {
    let guess = initial_guess(spectrum)?;
    let start = init.unwrap_or(guess);
    let total = fwhm_formula(start.f_g, start.f_l).max(fwhm_formula(guess.f_g, guess.f_l));
    // A zero width has zero gradient in the square-root parameterization.
    let floor = 1e-4 * total;
    let (mut f_g, mut f_l) = (start.f_g.max(floor), start.f_l.max(floor));
    match mode {
        WidthMode::Voigt => {}
        WidthMode::GaussianOnly => {
            f_g = fwhm_formula(f_g, f_l);
            f_l = 0.0;
        }
        WidthMode::LorentzianOnly => {
            f_l = fwhm_formula(f_g, f_l);
            f_g = 0.0;
        }
    }
    let amplitude = if init.is_some() {
        start.amplitude
    } else {
        let height = guess.peak_height();
        height / voigt_density(0.0, f_g / FWHM_PER_SIGMA, 0.5 * f_l)
    };

    let problem = PeakProblem::new(spectrum, mode, options.weighting);
    let layout = problem.layout;
    let p0 = problem.pack(&VoigtParams { f_g, f_l, amplitude, ..start });
    let outcome = minimize(&problem, &p0, &options.lm)?;
    let jac = problem.physical_jacobian(&outcome.params);
    let cov = covariance(&jac, problem.x.len(), layout.len(), outcome.rss)?;
    let n = layout.len();
    let sd = |i: usize| libm::sqrt(cov[i * n + i].max(0.0));
    let uncertainties = VoigtParams {
        center: sd(0),
        f_g: layout.gauss.map_or(0.0, sd),
        f_l: layout.lorentz.map_or(0.0, sd),
        amplitude: sd(layout.amplitude),
        baseline: sd(layout.baseline),
    };

    Ok(VoigtFit {
        params: problem.unpack(&outcome.params),
        uncertainties,
        rss: outcome.rss,
        n_points: spectrum.len(),
        converged: true,
        n_iterations: outcome.iterations,
    })
}

/// Compares pure-Gaussian and pure-Lorentzian fits of a spectrum.
pub fn classify_lineshape(spectrum: &Spectrum) -> Result<Classification> {
    classify_lineshape_with(spectrum, &FitOptions::default())
}

pub fn classify_lineshape_with(spectrum: &Spectrum, options: &FitOptions) -> Result<Classification> {
    let gauss = fit_peak(spectrum, None, options, WidthMode::GaussianOnly)?;
    let lorentz = fit_peak(spectrum, None, options, WidthMode::LorentzianOnly)?;
    let (rg, rl) = (gauss.rss, lorentz.rss);
    let (lo, hi) = if rg <= rl { (rg, rl) } else { (rl, rg) };
    let ratio = if lo > 0.0 { hi / lo } else if hi > 0.0 { f64::INFINITY } else { 1.0 };
    let class = if ratio > CLASSIFY_RATIO_GATE {
        if rg < rl {
            LineshapeClass::Gaussian
        } else {
            LineshapeClass::Lorentzian
        }
    } else {
        LineshapeClass::Ambiguous
    };
    Ok(Classification { class, rss_gaussian: rg, rss_lorentzian: rl, ratio })
}
