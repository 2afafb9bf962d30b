//! Text formats: spectrum files, series manifests, result records and
//! plot-ready tables.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use dephase_core::fitting::{SeriesDataset, SeriesFitResult, SeriesModelFit, VoigtFit};
use dephase_core::fitting::{Classification, ComponentMode, LinewidthQuantity};
use dephase_core::physics::{Coupling, DephasingModel};
use dephase_core::sim::CoherenceTrace;
use dephase_core::Spectrum;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const SPECTRUM_HEADER: &str = "# energy_meV,intensity";
pub const LINEWIDTH_HEADER: &str = "# temperature_K,linewidth_meV";
pub const SCHEMA_VERSION: u32 = 1;

/// Significant digits in spectrum intensities.
pub const INTENSITY_DIGITS: usize = 6;
/// Significant digits in JSON numbers and derived tables.
pub const RECORD_DIGITS: usize = 12;

/// `%g`-style formatting with `digits` significant digits: trailing zeros are
/// dropped and the exponent form is used below 1e-5 or at 10^digits and above.
pub fn format_sig(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= digits as i32 {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Rounds to `digits` significant digits.
pub fn round_sig(x: f64, digits: usize) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", digits.max(1) - 1, x).parse().unwrap_or(x)
}

/// Writes via a temporary file in the target directory and an atomic rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(path, e))?;
    tmp.write_all(contents).map_err(|e| Error::io(path, e))?;
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        tmp.as_file()
            .set_permissions(fs::Permissions::from_mode(0o644))
            .map_err(|e| Error::io(path, e))?;
    }
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Lowercase hex SHA-256 of a file's bytes.
pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

// ---------------------------------------------------------------- spectra

fn split_row(line: &str) -> Vec<&str> {
    if line.contains(',') {
        line.split(',').map(str::trim).collect()
    } else {
        line.split_whitespace().collect()
    }
}

fn parse_number(path: &Path, line: usize, field: &str, column: &str) -> Result<f64> {
    field.parse::<f64>().map_err(|_| Error::Parse {
        path: path.to_path_buf(),
        line,
        message: format!("invalid number '{field}' in {column} column"),
    })
}

/// Parses spectrum text. `path` is only used in diagnostics.
pub fn parse_spectrum(text: &str, path: &Path) -> Result<Spectrum> {
    let mut energy = Vec::new();
    let mut intensity = Vec::new();
    let mut temperature = 0.0;
    let mut emitter_id = String::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some((key, value)) = comment.split_once(':') {
                match key.trim() {
                    "temperature_K" => temperature = parse_number(path, line_no, value.trim(), "temperature")?,
                    "emitter_id" => emitter_id = value.trim().to_string(),
                    _ => {}
                }
            }
            continue;
        }
        let fields = split_row(line);
        if fields.len() != 2 {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: line_no,
                message: format!("expected 2 columns, found {}", fields.len()),
            });
        }
        let e = parse_number(path, line_no, fields[0], "energy")?;
        let i = parse_number(path, line_no, fields[1], "intensity")?;
        if energy.last().is_some_and(|&prev| e <= prev) {
            return Err(Error::NonMonotonicGrid { path: path.to_path_buf(), line: line_no });
        }
        energy.push(e);
        intensity.push(i);
    }
    if energy.is_empty() {
        return Err(Error::EmptyFile { path: path.to_path_buf() });
    }
    Spectrum::new(energy, intensity, temperature, emitter_id)
        .map_err(|source| Error::InvalidSpectrum { path: path.to_path_buf(), source })
}

pub fn load_spectrum(path: &Path) -> Result<Spectrum> {
    parse_spectrum(&read_text(path)?, path)
}

/// Canonical text: header, metadata comments, then `energy,intensity` rows
/// with energies at 6 decimals and intensities at 6 significant digits.
pub fn format_spectrum(spectrum: &Spectrum) -> String {
    let mut out = String::with_capacity(24 * spectrum.len() + 64);
    out.push_str(SPECTRUM_HEADER);
    out.push('\n');
    out.push_str(&format!("# temperature_K: {}\n", format_sig(spectrum.temperature(), RECORD_DIGITS)));
    if !spectrum.emitter_id().is_empty() {
        out.push_str(&format!("# emitter_id: {}\n", spectrum.emitter_id()));
    }
    for (e, i) in spectrum.energy().iter().zip(spectrum.intensity()) {
        out.push_str(&format!("{e:.6},{}\n", format_sig(*i, INTENSITY_DIGITS)));
    }
    out
}

pub fn save_spectrum(path: &Path, spectrum: &Spectrum) -> Result<()> {
    write_atomic(path, format_spectrum(spectrum).as_bytes())
}

// ---------------------------------------------------------------- manifests

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    #[serde(rename = "temperature_K")]
    pub temperature: f64,
    /// Relative paths resolve against the manifest's directory.
    pub path: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ManifestMetadata {
    #[serde(rename = "theta_D_K", default, skip_serializing_if = "Option::is_none")]
    pub theta_d: Option<f64>,
    #[serde(rename = "phonon_energy_meV", default, skip_serializing_if = "Option::is_none")]
    pub phonon_energy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesManifest {
    pub emitter_id: String,
    pub entries: Vec<ManifestEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<ManifestMetadata>,
}

impl SeriesManifest {
    pub fn validate(&self, path: &Path) -> Result<()> {
        let bad = |message: String| Error::Manifest { path: path.to_path_buf(), message };
        if self.entries.is_empty() {
            return Err(bad("no entries".into()));
        }
        for e in &self.entries {
            if !(e.temperature > 0.0 && e.temperature.is_finite()) {
                return Err(bad(format!("temperature {} K is not positive", e.temperature)));
            }
        }
        let mut temps: Vec<f64> = self.entries.iter().map(|e| e.temperature).collect();
        temps.sort_by(f64::total_cmp);
        if let Some(w) = temps.windows(2).find(|w| w[0] == w[1]) {
            return Err(bad(format!("duplicate temperature {} K", w[0])));
        }
        Ok(())
    }

    pub fn resolve(&self, manifest_path: &Path, entry: &ManifestEntry) -> PathBuf {
        let p = Path::new(&entry.path);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            manifest_path.parent().unwrap_or(Path::new("")).join(p)
        }
    }
}

pub fn format_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

pub fn save_manifest(path: &Path, manifest: &SeriesManifest) -> Result<()> {
    write_atomic(path, format_json(manifest).as_bytes())
}

pub fn load_manifest(path: &Path) -> Result<SeriesManifest> {
    let manifest: SeriesManifest =
        serde_json::from_str(&read_text(path)?).map_err(|source| Error::Json { path: path.to_path_buf(), source })?;
    manifest.validate(path)?;
    for entry in &manifest.entries {
        let p = manifest.resolve(path, entry);
        if !p.is_file() {
            return Err(Error::io(
                &p,
                std::io::Error::new(std::io::ErrorKind::NotFound, "listed in manifest but not found"),
            ));
        }
    }
    Ok(manifest)
}

/// A loaded series: spectra carry the manifest temperatures, and `hashes`
/// maps each manifest path to the SHA-256 of its file.
pub struct LoadedSeries {
    pub manifest: SeriesManifest,
    pub dataset: SeriesDataset,
    pub hashes: BTreeMap<String, String>,
}

pub fn load_series(manifest_path: &Path) -> Result<LoadedSeries> {
    let manifest = load_manifest(manifest_path)?;
    let mut spectra = Vec::with_capacity(manifest.entries.len());
    let mut hashes = BTreeMap::new();
    for entry in &manifest.entries {
        let path = manifest.resolve(manifest_path, entry);
        let spectrum = load_spectrum(&path)?
            .with_temperature(entry.temperature)
            .with_emitter_id(manifest.emitter_id.clone());
        spectra.push(spectrum);
        hashes.insert(entry.path.clone(), sha256_file(&path)?);
    }
    let dataset = SeriesDataset::new(manifest.emitter_id.clone(), spectra).map_err(|source| Error::Manifest {
        path: manifest_path.to_path_buf(),
        message: source.to_string(),
    })?;
    Ok(LoadedSeries { manifest, dataset, hashes })
}

// ---------------------------------------------------------------- records

/// A JSON number rounded to [`RECORD_DIGITS`] significant digits; non-finite
/// values are written as `null` and read back as NaN.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Num(pub f64);

impl From<f64> for Num {
    fn from(x: f64) -> Self {
        Num(x)
    }
}

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            s.serialize_f64(round_sig(self.0, RECORD_DIGITS))
        } else {
            s.serialize_none()
        }
    }
}

impl<'de> Deserialize<'de> for Num {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Ok(Num(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct ParamsRecord {
    pub center_meV: Num,
    pub f_g_meV: Num,
    pub f_l_meV: Num,
    pub amplitude: Num,
    pub baseline: Num,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationRecord {
    pub class: String,
    pub rss_gaussian: Num,
    pub rss_lorentzian: Num,
    pub ratio: Num,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct FitRecord {
    pub temperature_K: Num,
    pub params: ParamsRecord,
    pub uncertainties: ParamsRecord,
    pub f_v_meV: Num,
    pub rss: Num,
    pub n_points: usize,
    pub converged: bool,
    pub n_iterations: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classification: Option<ClassificationRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct ComponentRecord {
    pub temperature_K: Num,
    pub f_l_meV: Num,
    pub f_l_uncertainty_meV: Num,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct ComponentsRecord {
    pub mode: String,
    pub gaussian_floor_meV: Num,
    pub gaussian_floor_uncertainty_meV: Num,
    pub lorentzian: Vec<ComponentRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct LinewidthRecord {
    pub temperature_K: Num,
    pub linewidth_meV: Num,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelRecord {
    pub kind: String,
    pub params: BTreeMap<String, Num>,
    pub uncertainties: BTreeMap<String, Num>,
    pub rss: Num,
    pub aic: Num,
    pub delta_aic: Num,
    pub n_params: usize,
    pub n_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    /// SHA-256 of each input file, keyed by the path as given.
    pub inputs: BTreeMap<String, String>,
    pub seed: Option<u64>,
    pub tool_version: String,
}

impl Provenance {
    pub fn new(inputs: BTreeMap<String, String>, seed: Option<u64>) -> Self {
        Self { inputs, seed, tool_version: env!("CARGO_PKG_VERSION").to_string() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub schema_version: u32,
    pub emitter_id: String,
    pub per_temperature: Vec<FitRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub components: Option<ComponentsRecord>,
    /// `total` or `lorentzian`: which linewidth the model table was fitted to.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quantity: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub linewidths: Vec<LinewidthRecord>,
    #[serde(default)]
    pub models: Vec<ModelRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub best_model: Option<String>,
    pub provenance: Provenance,
}

pub fn quantity_label(q: LinewidthQuantity) -> &'static str {
    match q {
        LinewidthQuantity::Total => "total",
        LinewidthQuantity::Lorentzian => "lorentzian",
    }
}

pub fn quantity_from_label(label: &str) -> Option<LinewidthQuantity> {
    match label {
        "total" => Some(LinewidthQuantity::Total),
        "lorentzian" => Some(LinewidthQuantity::Lorentzian),
        _ => None,
    }
}

fn params_record(p: &dephase_core::lineshape::VoigtParams) -> ParamsRecord {
    ParamsRecord {
        center_meV: p.center.into(),
        f_g_meV: p.f_g.into(),
        f_l_meV: p.f_l.into(),
        amplitude: p.amplitude.into(),
        baseline: p.baseline.into(),
    }
}

pub fn fit_record(temperature: f64, fit: &VoigtFit, class: Option<&Classification>) -> FitRecord {
    FitRecord {
        temperature_K: temperature.into(),
        params: params_record(&fit.params),
        uncertainties: params_record(&fit.uncertainties),
        f_v_meV: fit.total_fwhm().into(),
        rss: fit.rss.into(),
        n_points: fit.n_points,
        converged: fit.converged,
        n_iterations: fit.n_iterations,
        classification: class.map(|c| ClassificationRecord {
            class: c.class.label().to_string(),
            rss_gaussian: c.rss_gaussian.into(),
            rss_lorentzian: c.rss_lorentzian.into(),
            ratio: c.ratio.into(),
        }),
    }
}

/// Named physical parameters of a fitted model.
pub fn model_params(model: &DephasingModel) -> BTreeMap<String, Num> {
    let mut m = BTreeMap::new();
    match model.coupling {
        Coupling::AcousticDebye { amplitude, theta_d } => {
            m.insert("amplitude_meV".into(), amplitude.into());
            m.insert("theta_D_K".into(), theta_d.into());
        }
        Coupling::CubicLaw { amplitude } => {
            m.insert("coefficient_meV_per_K3".into(), amplitude.into());
        }
        Coupling::OpticalMode { amplitude, phonon_energy } => {
            m.insert("amplitude_meV".into(), amplitude.into());
            m.insert("phonon_energy_meV".into(), phonon_energy.into());
        }
    }
    m.insert("gaussian_floor_meV".into(), model.gaussian_floor.into());
    m
}

pub fn model_record(fit: &SeriesModelFit, delta_aic: f64) -> ModelRecord {
    let mut unc = BTreeMap::new();
    let amp_key = match fit.model.coupling {
        Coupling::CubicLaw { .. } => "coefficient_meV_per_K3",
        _ => "amplitude_meV",
    };
    unc.insert(amp_key.to_string(), fit.amplitude_uncertainty.into());
    if let Some(u) = fit.gaussian_floor_uncertainty {
        unc.insert("gaussian_floor_meV".into(), u.into());
    }
    if let Some(u) = fit.phonon_energy_uncertainty {
        unc.insert("phonon_energy_meV".into(), u.into());
    }
    ModelRecord {
        kind: fit.model.kind().label().to_string(),
        params: model_params(&fit.model),
        uncertainties: unc,
        rss: fit.rss.into(),
        aic: fit.aic.into(),
        delta_aic: delta_aic.into(),
        n_params: fit.n_params,
        n_points: fit.n_points,
    }
}

pub fn series_record(
    emitter_id: &str,
    result: &SeriesFitResult,
    mode: ComponentMode,
    classes: &[Option<Classification>],
    provenance: Provenance,
) -> ResultRecord {
    let c = &result.components;
    ResultRecord {
        schema_version: SCHEMA_VERSION,
        emitter_id: emitter_id.to_string(),
        per_temperature: result
            .per_temperature
            .iter()
            .enumerate()
            .map(|(i, (t, fit))| fit_record(*t, fit, classes.get(i).and_then(Option::as_ref)))
            .collect(),
        components: Some(ComponentsRecord {
            mode: match mode {
                ComponentMode::Free => "free",
                ComponentMode::SharedGaussian => "shared_gaussian",
            }
            .to_string(),
            gaussian_floor_meV: c.gaussian_floor.into(),
            gaussian_floor_uncertainty_meV: c.gaussian_floor_uncertainty.into(),
            lorentzian: c
                .lorentzian
                .iter()
                .map(|p| ComponentRecord {
                    temperature_K: p.temperature.into(),
                    f_l_meV: p.f_l.into(),
                    f_l_uncertainty_meV: p.f_l_uncertainty.into(),
                })
                .collect(),
        }),
        quantity: Some(quantity_label(result.quantity).to_string()),
        linewidths: linewidth_records(&result.linewidths),
        models: result.model_fits.iter().map(|r| model_record(&r.fit, r.delta_aic)).collect(),
        best_model: Some(result.best_model.label().to_string()),
        provenance,
    }
}

pub fn linewidth_records(points: &[(f64, f64)]) -> Vec<LinewidthRecord> {
    points
        .iter()
        .map(|&(t, w)| LinewidthRecord { temperature_K: t.into(), linewidth_meV: w.into() })
        .collect()
}

pub fn save_record(path: &Path, record: &ResultRecord) -> Result<()> {
    write_atomic(path, format_json(record).as_bytes())
}

pub fn load_record(path: &Path) -> Result<ResultRecord> {
    let record: ResultRecord =
        serde_json::from_str(&read_text(path)?).map_err(|source| Error::Json { path: path.to_path_buf(), source })?;
    if record.schema_version != SCHEMA_VERSION {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 0,
            message: format!("unsupported schema_version {}", record.schema_version),
        });
    }
    Ok(record)
}

// ---------------------------------------------------------------- tables

/// Two-column (T, linewidth) table.
pub fn format_linewidths(points: &[(f64, f64)]) -> String {
    let mut out = String::from(LINEWIDTH_HEADER);
    out.push('\n');
    for &(t, w) in points {
        out.push_str(&format!("{},{}\n", format_sig(t, RECORD_DIGITS), format_sig(w, RECORD_DIGITS)));
    }
    out
}

pub fn parse_linewidths(text: &str, path: &Path) -> Result<Vec<(f64, f64)>> {
    let mut points = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields = split_row(line);
        if fields.len() != 2 {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: idx + 1,
                message: format!("expected 2 columns, found {}", fields.len()),
            });
        }
        points.push((
            parse_number(path, idx + 1, fields[0], "temperature")?,
            parse_number(path, idx + 1, fields[1], "linewidth")?,
        ));
    }
    if points.is_empty() {
        return Err(Error::EmptyFile { path: path.to_path_buf() });
    }
    Ok(points)
}

/// Linewidth series from either a result record (JSON) or a bare table, with
/// the quantity the record declares (bare tables are taken as total FWHM).
pub fn load_linewidths(path: &Path) -> Result<(Vec<(f64, f64)>, LinewidthQuantity)> {
    let text = read_text(path)?;
    if text.trim_start().starts_with('{') {
        let record = load_record(path)?;
        let quantity = record.quantity.as_deref().and_then(quantity_from_label).unwrap_or_default();
        let points: Vec<(f64, f64)> = if record.linewidths.is_empty() {
            record.per_temperature.iter().map(|f| (f.temperature_K.0, f.f_v_meV.0)).collect()
        } else {
            record.linewidths.iter().map(|l| (l.temperature_K.0, l.linewidth_meV.0)).collect()
        };
        if points.is_empty() {
            return Err(Error::EmptyFile { path: path.to_path_buf() });
        }
        Ok((points, quantity))
    } else {
        Ok((parse_linewidths(&text, path)?, LinewidthQuantity::Total))
    }
}

/// Model curves f_V(T) and f_L(T) sampled at `temperatures`.
pub fn format_curve(model: &DephasingModel, temperatures: &[f64]) -> dephase_core::Result<String> {
    let mut out = String::from("# temperature_K,f_v_meV,f_l_meV\n");
    for &t in temperatures {
        let f_l = model.lorentzian_fwhm(t)?;
        let f_v = model.total_fwhm(t)?;
        out.push_str(&format!(
            "{},{},{}\n",
            format_sig(t, RECORD_DIGITS),
            format_sig(f_v, RECORD_DIGITS),
            format_sig(f_l, RECORD_DIGITS)
        ));
    }
    Ok(out)
}

/// Coherence trace with metadata comments.
pub fn format_coherence(trace: &CoherenceTrace, meta: &[(&str, String)]) -> String {
    let mut out = String::from(if trace.stderr.is_some() { "# t_ps,re_g,im_g,stderr\n" } else { "# t_ps,re_g,im_g\n" });
    for (k, v) in meta {
        out.push_str(&format!("# {k}: {v}\n"));
    }
    for (i, (t, g)) in trace.t.iter().zip(&trace.g).enumerate() {
        out.push_str(&format!(
            "{},{},{}",
            format_sig(*t, RECORD_DIGITS),
            format_sig(g.re, RECORD_DIGITS),
            format_sig(g.im, RECORD_DIGITS)
        ));
        if let Some(se) = &trace.stderr {
            out.push_str(&format!(",{}", format_sig(se[i], RECORD_DIGITS)));
        }
        out.push('\n');
    }
    out
}
