//! Temperature series: shared-floor component extraction, dephasing-model
//! fits and AIC-based model comparison.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::voigt::{fit_voigt_with, peak_model_gradient, weights, FitOptions, VoigtFit, Weighting};
use crate::consts::{BOLTZMANN, FWHM_PER_SIGMA};
use crate::lineshape::{fwhm_formula, invert_fwhm, voigt_density, FWHM_LORENTZ_LINEAR, FWHM_LORENTZ_QUADRATIC};
use crate::lm::{covariance, halve_sign_changes, minimize, LeastSquaresProblem, LmConfig};
use crate::physics::{
    coupling_shape, Coupling, DephasingModel, ModelKind, DEFAULT_DEBYE_TEMPERATURE,
    DEFAULT_PHONON_ENERGY, REFERENCE_TEMPERATURE,
};
use crate::{Error, Result, Spectrum};

/// Minimum number of temperatures for any series operation.
pub const MIN_SERIES_POINTS: usize = 3;

/// Spectra of one emitter ordered by strictly increasing temperature.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesDataset {
    emitter_id: String,
    spectra: Vec<Spectrum>,
}

impl SeriesDataset {
    /// Sorts `spectra` by temperature; duplicate temperatures are rejected.
    pub fn new(emitter_id: impl Into<String>, mut spectra: Vec<Spectrum>) -> Result<Self> {
        spectra.sort_by(|a, b| a.temperature().total_cmp(&b.temperature()));
        if spectra.windows(2).any(|w| w[0].temperature() == w[1].temperature()) {
            return Err(Error::InvalidSpectrum("duplicate temperature in series"));
        }
        Ok(Self { emitter_id: emitter_id.into(), spectra })
    }

    pub fn emitter_id(&self) -> &str {
        &self.emitter_id
    }

    pub fn spectra(&self) -> &[Spectrum] {
        &self.spectra
    }

    pub fn temperatures(&self) -> Vec<f64> {
        self.spectra.iter().map(Spectrum::temperature).collect()
    }

    /// Fits every spectrum independently, in temperature order.
    pub fn fit_all(&self, options: &FitOptions) -> Result<Vec<VoigtFit>> {
        self.spectra.iter().map(|s| fit_voigt_with(s, None, options)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ComponentMode {
    /// Per-temperature components straight from independent fits.
    Free,
    /// Global refit with one f_G shared by all temperatures.
    #[default]
    SharedGaussian,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComponentPoint {
    pub temperature: f64,
    pub f_l: f64,
    pub f_l_uncertainty: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Components {
    /// Gaussian floor f_G (meV): the shared value, or the mean of free fits.
    pub gaussian_floor: f64,
    pub gaussian_floor_uncertainty: f64,
    pub lorentzian: Vec<ComponentPoint>,
}

impl Components {
    /// (T, f_V) with f_V combining the floor and each f_L.
    pub fn total_linewidths(&self) -> Vec<(f64, f64)> {
        self.lorentzian
            .iter()
            .map(|p| (p.temperature, fwhm_formula(self.gaussian_floor, p.f_l)))
            .collect()
    }

    pub fn lorentzian_linewidths(&self) -> Vec<(f64, f64)> {
        self.lorentzian.iter().map(|p| (p.temperature, p.f_l)).collect()
    }
}

struct Block<'a> {
    x: Vec<f64>,
    y: &'a [f64],
    sqrt_w: Vec<f64>,
    origin: f64,
    row_offset: usize,
}

/// Global fit of several spectra sharing one Gaussian FWHM.
///
/// Parameters: [√f_G, then per spectrum (center offset, √f_L, amplitude, baseline)].
pub struct SharedGaussianProblem<'a> {
    blocks: Vec<Block<'a>>,
    n_rows: usize,
}

impl<'a> SharedGaussianProblem<'a> {
    pub fn new(spectra: &'a [Spectrum], weighting: Weighting) -> Self {
        let mut row_offset = 0;
        let blocks = spectra
            .iter()
            .map(|s| {
                let origin = s.energy()[s.argmax()];
                let block = Block {
                    x: s.energy().iter().map(|e| e - origin).collect(),
                    y: s.intensity(),
                    sqrt_w: weights(s.intensity(), weighting),
                    origin,
                    row_offset,
                };
                row_offset += s.len();
                block
            })
            .collect();
        Self { blocks, n_rows: row_offset }
    }

    /// Internal parameter vector from a shared f_G and per-spectrum fits.
    pub fn pack(&self, f_g: f64, fits: &[VoigtFit]) -> Vec<f64> {
        let mut p = vec![libm::sqrt(f_g)];
        for (block, fit) in self.blocks.iter().zip(fits) {
            let f = &fit.params;
            p.extend([f.center - block.origin, libm::sqrt(f.f_l), f.amplitude, f.baseline]);
        }
        p
    }

    fn for_each_row(&self, p: &[f64], mut visit: impl FnMut(usize, usize, f64, f64, [f64; 5])) {
        let f_g = p[0] * p[0];
        for (s, block) in self.blocks.iter().enumerate() {
            let base = 1 + 4 * s;
            let (c, ql, a, b) = (p[base], p[base + 1], p[base + 2], p[base + 3]);
            for i in 0..block.x.len() {
                let (model, grad) = peak_model_gradient(block.x[i], c, f_g, ql * ql, a, b);
                visit(s, block.row_offset + i, block.sqrt_w[i], model - block.y[i], grad);
            }
        }
    }

    fn fill_jacobian(&self, p: &[f64], out: &mut [f64], internal: bool) {
        let n = self.n_params();
        out.iter_mut().for_each(|v| *v = 0.0);
        self.for_each_row(p, |s, row, w, _, grad| {
            let base = 1 + 4 * s;
            let ql = p[base + 1];
            let r = &mut out[row * n..(row + 1) * n];
            let (dg, dl) = if internal { (2.0 * p[0], 2.0 * ql) } else { (1.0, 1.0) };
            r[0] = w * grad[1] * dg;
            r[base] = w * grad[0];
            r[base + 1] = w * grad[2] * dl;
            r[base + 2] = w * grad[3];
            r[base + 3] = w * grad[4];
        });
    }
}

impl LeastSquaresProblem for SharedGaussianProblem<'_> {
    fn n_residuals(&self) -> usize {
        self.n_rows
    }

    fn n_params(&self) -> usize {
        1 + 4 * self.blocks.len()
    }

    fn residuals(&self, p: &[f64], out: &mut [f64]) {
        let sigma = p[0] * p[0] / FWHM_PER_SIGMA;
        for (s, block) in self.blocks.iter().enumerate() {
            let base = 1 + 4 * s;
            let (c, ql, a, b) = (p[base], p[base + 1], p[base + 2], p[base + 3]);
            let gamma = 0.5 * ql * ql;
            for i in 0..block.x.len() {
                let model = a * voigt_density(block.x[i] - c, sigma, gamma) + b;
                out[block.row_offset + i] = block.sqrt_w[i] * (model - block.y[i]);
            }
        }
    }

    fn jacobian(&self, p: &[f64], out: &mut [f64]) {
        self.fill_jacobian(p, out, true);
    }

    fn constrain(&self, current: &[f64], trial: &mut [f64]) {
        let widths = (0..self.blocks.len()).map(|s| 2 + 4 * s);
        halve_sign_changes(core::iter::once(0).chain(widths), current, trial);
    }
}

/// Splits per-temperature fits into a Gaussian floor and f_L(T).
pub fn extract_components(
    spectra: &[Spectrum],
    fits: &[VoigtFit],
    mode: ComponentMode,
    options: &FitOptions,
) -> Result<Components> {
    if fits.len() < MIN_SERIES_POINTS || spectra.len() != fits.len() {
        return Err(Error::InsufficientData { got: fits.len().min(spectra.len()), need: MIN_SERIES_POINTS });
    }
    let n = fits.len() as f64;
    let mean_fg = fits.iter().map(|f| f.params.f_g).sum::<f64>() / n;

    match mode {
        ComponentMode::Free => {
            let var = fits.iter().map(|f| (f.params.f_g - mean_fg) * (f.params.f_g - mean_fg)).sum::<f64>() / (n - 1.0);
            Ok(Components {
                gaussian_floor: mean_fg,
                gaussian_floor_uncertainty: libm::sqrt(var / n),
                lorentzian: spectra
                    .iter()
                    .zip(fits)
                    .map(|(s, f)| ComponentPoint {
                        temperature: s.temperature(),
                        f_l: f.params.f_l,
                        f_l_uncertainty: f.uncertainties.f_l,
                    })
                    .collect(),
            })
        }
        ComponentMode::SharedGaussian => {
            let problem = SharedGaussianProblem::new(spectra, options.weighting);
            // Keep square-root parameters away from their zero-gradient point.
            let floor = 1e-4 * fits.iter().map(|f| f.total_fwhm()).fold(0.0, f64::max);
            let starts: Vec<VoigtFit> = fits
                .iter()
                .map(|f| {
                    let mut f = f.clone();
                    f.params.f_l = f.params.f_l.max(floor);
                    f
                })
                .collect();
            let p0 = problem.pack(mean_fg.max(floor), &starts);
            let outcome = minimize(&problem, &p0, &options.lm)?;

            let n_params = problem.n_params();
            let mut jac = vec![0.0; problem.n_residuals() * n_params];
            problem.fill_jacobian(&outcome.params, &mut jac, false);
            let cov = covariance(&jac, problem.n_residuals(), n_params, outcome.rss)?;
            let sd = |i: usize| libm::sqrt(cov[i * n_params + i].max(0.0));

            let p = &outcome.params;
            Ok(Components {
                gaussian_floor: p[0] * p[0],
                gaussian_floor_uncertainty: sd(0),
                lorentzian: spectra
                    .iter()
                    .enumerate()
                    .map(|(s, spec)| {
                        let ql = p[2 + 4 * s];
                        ComponentPoint {
                            temperature: spec.temperature(),
                            f_l: ql * ql,
                            f_l_uncertainty: sd(2 + 4 * s),
                        }
                    })
                    .collect(),
            })
        }
    }
}

/// Which linewidth a series of (T, value) pairs holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LinewidthQuantity {
    /// Total Voigt FWHM f_V; the model adds its Gaussian floor.
    #[default]
    Total,
    /// Bare Lorentzian component f_L.
    Lorentzian,
}

/// A candidate model for a series fit. θ_D is always held fixed; `None` in
/// `phonon_energy` or `gaussian_floor` makes that parameter free.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub theta_d: f64,
    pub phonon_energy: Option<f64>,
    pub gaussian_floor: Option<f64>,
}

impl ModelSpec {
    pub fn new(kind: ModelKind) -> Self {
        Self {
            kind,
            theta_d: DEFAULT_DEBYE_TEMPERATURE,
            phonon_energy: Some(DEFAULT_PHONON_ENERGY),
            gaussian_floor: None,
        }
    }

    pub fn with_theta_d(mut self, theta_d: f64) -> Self {
        self.theta_d = theta_d;
        self
    }

    pub fn with_phonon_energy(mut self, energy: Option<f64>) -> Self {
        self.phonon_energy = energy;
        self
    }

    pub fn with_gaussian_floor(mut self, floor: Option<f64>) -> Self {
        self.gaussian_floor = floor;
        self
    }

    fn free_floor(&self, quantity: LinewidthQuantity) -> bool {
        quantity == LinewidthQuantity::Total && self.gaussian_floor.is_none()
    }

    fn free_phonon_energy(&self) -> bool {
        self.kind == ModelKind::OpticalMode && self.phonon_energy.is_none()
    }

    pub fn n_free(&self, quantity: LinewidthQuantity) -> usize {
        1 + usize::from(self.free_floor(quantity)) + usize::from(self.free_phonon_energy())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesModelFit {
    pub model: DephasingModel,
    pub quantity: LinewidthQuantity,
    pub rss: f64,
    pub aic: f64,
    pub n_points: usize,
    /// Number of free parameters entering the AIC.
    pub n_params: usize,
    pub amplitude_uncertainty: f64,
    pub gaussian_floor_uncertainty: Option<f64>,
    pub phonon_energy_uncertainty: Option<f64>,
}

/// Akaike information criterion n·ln(rss/n) + 2k. A zero RSS is clamped to
/// the smallest positive normal float so the value stays finite.
pub fn aic(rss: f64, n_points: usize, n_params: usize) -> f64 {
    let n = n_points as f64;
    n * libm::log(rss.max(f64::MIN_POSITIVE) / n) + 2.0 * n_params as f64
}

/// Residuals f(Tᵢ) − yᵢ of a dephasing model over a linewidth series.
///
/// Parameters: [√a, √f_G if free, √E₀ if free]. The amplitude `a` is f_L at
/// the reference temperature for the acoustic and cubic models, and the
/// optical-mode prefactor otherwise.
pub struct SeriesProblem<'a> {
    data: &'a [(f64, f64)],
    spec: ModelSpec,
    quantity: LinewidthQuantity,
    // f_L per unit amplitude when it does not depend on free parameters.
    fixed_shape: Option<Vec<f64>>,
}

impl<'a> SeriesProblem<'a> {
    pub fn new(data: &'a [(f64, f64)], quantity: LinewidthQuantity, spec: ModelSpec) -> Result<Self> {
        let fixed_shape = if spec.free_phonon_energy() {
            None
        } else {
            let param = match spec.kind {
                ModelKind::AcousticDebye => spec.theta_d,
                ModelKind::CubicLaw => 0.0,
                ModelKind::OpticalMode => spec.phonon_energy.unwrap_or(DEFAULT_PHONON_ENERGY),
            };
            Some(
                data.iter()
                    .map(|&(t, _)| normalized_shape(spec.kind, t, param))
                    .collect::<Result<Vec<_>>>()?,
            )
        };
        Ok(Self { data, spec, quantity, fixed_shape })
    }

    fn floor_index(&self) -> Option<usize> {
        self.spec.free_floor(self.quantity).then_some(1)
    }

    fn energy_index(&self) -> Option<usize> {
        self.spec
            .free_phonon_energy()
            .then(|| 1 + usize::from(self.spec.free_floor(self.quantity)))
    }

    fn floor(&self, p: &[f64]) -> f64 {
        match self.floor_index() {
            Some(i) => p[i] * p[i],
            None => self.spec.gaussian_floor.unwrap_or(0.0),
        }
    }

    /// Shape value and its derivative with respect to the phonon energy.
    fn shape(&self, i: usize, p: &[f64]) -> (f64, f64) {
        if let Some(shapes) = &self.fixed_shape {
            return (shapes[i], 0.0);
        }
        let energy = self.energy_index().map_or(DEFAULT_PHONON_ENERGY, |j| p[j] * p[j]);
        let t = self.data[i].0;
        if t == 0.0 {
            return (0.0, 0.0);
        }
        let n = 1.0 / libm::expm1(energy / (BOLTZMANN * t));
        let nn = n * (n + 1.0);
        (nn, -(2.0 * n + 1.0) * nn / (BOLTZMANN * t))
    }

    /// Model value and gradients with respect to (a, f_G, E₀).
    fn eval(&self, i: usize, p: &[f64]) -> (f64, [f64; 3]) {
        let a = p[0] * p[0];
        let (shape, d_shape) = self.shape(i, p);
        let f_l = a * shape;
        match self.quantity {
            LinewidthQuantity::Lorentzian => (f_l, [shape, 0.0, a * d_shape]),
            LinewidthQuantity::Total => {
                let f_g = self.floor(p);
                let root = libm::sqrt(FWHM_LORENTZ_QUADRATIC * f_l * f_l + f_g * f_g);
                let (d_fl, d_fg) = if root > 0.0 {
                    (FWHM_LORENTZ_LINEAR + FWHM_LORENTZ_QUADRATIC * f_l / root, f_g / root)
                } else {
                    (FWHM_LORENTZ_LINEAR + libm::sqrt(FWHM_LORENTZ_QUADRATIC), 1.0)
                };
                (FWHM_LORENTZ_LINEAR * f_l + root, [d_fl * shape, d_fg, d_fl * a * d_shape])
            }
        }
    }

    fn fill_jacobian(&self, p: &[f64], out: &mut [f64], internal: bool) {
        let n = self.n_params();
        for i in 0..self.data.len() {
            let (_, g) = self.eval(i, p);
            let chain = |j: usize| if internal { 2.0 * p[j] } else { 1.0 };
            let row = &mut out[i * n..(i + 1) * n];
            row[0] = g[0] * chain(0);
            if let Some(j) = self.floor_index() {
                row[j] = g[1] * chain(j);
            }
            if let Some(j) = self.energy_index() {
                row[j] = g[2] * chain(j);
            }
        }
    }

    /// Internal parameter vector from physical values.
    pub fn pack(&self, amplitude: f64, floor: f64, phonon_energy: f64) -> Vec<f64> {
        let mut p = vec![libm::sqrt(amplitude)];
        if self.floor_index().is_some() {
            p.push(libm::sqrt(floor));
        }
        if self.energy_index().is_some() {
            p.push(libm::sqrt(phonon_energy));
        }
        p
    }
}

impl LeastSquaresProblem for SeriesProblem<'_> {
    fn n_residuals(&self) -> usize {
        self.data.len()
    }

    fn n_params(&self) -> usize {
        self.spec.n_free(self.quantity)
    }

    fn residuals(&self, p: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.eval(i, p).0 - self.data[i].1;
        }
    }

    fn jacobian(&self, p: &[f64], out: &mut [f64]) {
        self.fill_jacobian(p, out, true);
    }

    fn constrain(&self, current: &[f64], trial: &mut [f64]) {
        halve_sign_changes(0..trial.len(), current, trial);
    }
}

/// f_L per unit fit amplitude. The cubic law is expressed as (T/T_ref)³ so
/// that its amplitude is also f_L at the reference temperature.
fn normalized_shape(kind: ModelKind, temperature: f64, param: f64) -> Result<f64> {
    match kind {
        ModelKind::CubicLaw => {
            let r = temperature / REFERENCE_TEMPERATURE;
            Ok(r * r * r)
        }
        _ => coupling_shape(kind, temperature, param),
    }
}

/// Fits one dephasing model to a (T, linewidth) series.
pub fn fit_series(
    data: &[(f64, f64)],
    quantity: LinewidthQuantity,
    spec: &ModelSpec,
    lm: &LmConfig,
) -> Result<SeriesModelFit> {
    let k = spec.n_free(quantity);
    let need = MIN_SERIES_POINTS.max(k);
    if data.len() < need {
        return Err(Error::InsufficientData { got: data.len(), need });
    }
    for &(t, y) in data {
        crate::error::check_domain("temperature", t, t >= 0.0 && t.is_finite())?;
        crate::error::check_domain("linewidth", y, y.is_finite())?;
    }
    if spec.kind == ModelKind::AcousticDebye {
        crate::error::check_domain("theta_D", spec.theta_d, spec.theta_d > 0.0 && spec.theta_d.is_finite())?;
    }

    let problem = SeriesProblem::new(data, quantity, *spec)?;

    // Start: floor from the narrowest line, amplitude by linear least squares on f_L.
    let min_y = data.iter().map(|d| d.1).fold(f64::INFINITY, f64::min).max(0.0);
    let floor0 = match quantity {
        LinewidthQuantity::Total => spec.gaussian_floor.unwrap_or(0.95 * min_y),
        LinewidthQuantity::Lorentzian => 0.0,
    };
    let energy0 = spec.phonon_energy.unwrap_or(DEFAULT_PHONON_ENERGY);
    let probe = problem.pack(1.0, floor0.max(1e-12), energy0);
    let (mut num, mut den) = (0.0, 0.0);
    for (i, &(_, y)) in data.iter().enumerate() {
        let f_l = match quantity {
            LinewidthQuantity::Total => invert_fwhm(y.max(floor0), floor0).unwrap_or(0.0),
            LinewidthQuantity::Lorentzian => y,
        };
        let (s, _) = problem.shape(i, &probe);
        num += f_l * s;
        den += s * s;
    }
    let mut amp0 = if den > 0.0 { num / den } else { 1.0 };
    if !(amp0 > 0.0) || !amp0.is_finite() {
        amp0 = 1e-3 * data.iter().map(|d| d.1.abs()).fold(0.0, f64::max).max(1e-9);
    }
    let floor_start = if floor0 > 0.0 { floor0 } else { 1e-3 * amp0 };
    let p0 = problem.pack(amp0, floor_start, energy0);
    let outcome = minimize(&problem, &p0, lm)?;
    let p = &outcome.params;

    let n = problem.n_params();
    let mut jac = vec![0.0; data.len() * n];
    problem.fill_jacobian(p, &mut jac, false);
    let cov = covariance(&jac, data.len(), n, outcome.rss).ok();
    let sd = |i: usize| cov.as_ref().map_or(f64::NAN, |c| libm::sqrt(c[i * n + i].max(0.0)));

    let amplitude = p[0] * p[0];
    let floor = problem.floor(p);
    let energy = problem.energy_index().map_or(energy0, |j| p[j] * p[j]);
    let (coupling, amp_scale) = match spec.kind {
        ModelKind::AcousticDebye => (Coupling::AcousticDebye { amplitude, theta_d: spec.theta_d }, 1.0),
        ModelKind::CubicLaw => {
            let s = 1.0 / (REFERENCE_TEMPERATURE * REFERENCE_TEMPERATURE * REFERENCE_TEMPERATURE);
            (Coupling::CubicLaw { amplitude: amplitude * s }, s)
        }
        ModelKind::OpticalMode => (Coupling::OpticalMode { amplitude, phonon_energy: energy }, 1.0),
    };

    Ok(SeriesModelFit {
        model: DephasingModel { coupling, gaussian_floor: floor },
        quantity,
        rss: outcome.rss,
        aic: aic(outcome.rss, data.len(), k),
        n_points: data.len(),
        n_params: k,
        amplitude_uncertainty: sd(0) * amp_scale,
        gaussian_floor_uncertainty: problem.floor_index().map(sd),
        phonon_energy_uncertainty: problem.energy_index().map(sd),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankedModel {
    pub fit: SeriesModelFit,
    /// AIC minus the best AIC in the table.
    pub delta_aic: f64,
}

/// Fits every candidate on the same data and ranks them by AIC (ascending);
/// ties go to fewer parameters, then to declaration order.
pub fn compare_models(
    data: &[(f64, f64)],
    quantity: LinewidthQuantity,
    candidates: &[ModelSpec],
    lm: &LmConfig,
) -> Result<Vec<RankedModel>> {
    if candidates.is_empty() {
        return Err(Error::InsufficientData { got: 0, need: 1 });
    }
    let mut fits = candidates
        .iter()
        .map(|spec| fit_series(data, quantity, spec, lm))
        .collect::<Result<Vec<_>>>()?;
    // Stable sort keeps declaration order among exact ties.
    fits.sort_by(|a, b| a.aic.total_cmp(&b.aic).then(a.n_params.cmp(&b.n_params)));
    let best = fits[0].aic;
    Ok(fits
        .into_iter()
        .map(|fit| RankedModel { fit, delta_aic: fit.aic - best })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesSettings {
    pub fit: FitOptions,
    pub mode: ComponentMode,
    pub quantity: LinewidthQuantity,
    pub candidates: Vec<ModelSpec>,
}

impl Default for SeriesSettings {
    fn default() -> Self {
        Self {
            fit: FitOptions::default(),
            mode: ComponentMode::SharedGaussian,
            quantity: LinewidthQuantity::Total,
            candidates: ModelKind::ALL.iter().map(|&k| ModelSpec::new(k)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesFitResult {
    pub per_temperature: Vec<(f64, VoigtFit)>,
    pub components: Components,
    /// The (T, linewidth) series the models were fitted to.
    pub linewidths: Vec<(f64, f64)>,
    pub quantity: LinewidthQuantity,
    pub model_fits: Vec<RankedModel>,
    pub best_model: ModelKind,
    pub gaussian_floor_estimate: f64,
}

/// Component extraction and model comparison on already-fitted spectra.
pub fn analyze_series(dataset: &SeriesDataset, fits: Vec<VoigtFit>, settings: &SeriesSettings) -> Result<SeriesFitResult> {
    let components = extract_components(dataset.spectra(), &fits, settings.mode, &settings.fit)?;
    let linewidths = match (settings.quantity, settings.mode) {
        (LinewidthQuantity::Lorentzian, _) => components.lorentzian_linewidths(),
        (LinewidthQuantity::Total, ComponentMode::SharedGaussian) => components.total_linewidths(),
        (LinewidthQuantity::Total, ComponentMode::Free) => dataset
            .temperatures()
            .into_iter()
            .zip(&fits)
            .map(|(t, f)| (t, f.total_fwhm()))
            .collect(),
    };
    let model_fits = compare_models(&linewidths, settings.quantity, &settings.candidates, &settings.fit.lm)?;
    Ok(SeriesFitResult {
        per_temperature: dataset.temperatures().into_iter().zip(fits).collect(),
        gaussian_floor_estimate: components.gaussian_floor,
        components,
        linewidths,
        quantity: settings.quantity,
        best_model: model_fits[0].fit.model.kind(),
        model_fits,
    })
}
