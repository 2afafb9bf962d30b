use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use dephase::error::{Error, Result};
use dephase::formats::{self, ManifestMetadata, Provenance, ResultRecord};
use dephase::pipeline;
use dephase::synth::{self, GridSpec, SynthConfig};
use dephase_core::fitting::{
    classify_lineshape_with, compare_models, fit_voigt_with, ComponentMode, FitOptions, LinewidthQuantity,
    ModelSpec, RankedModel, SeriesSettings, Weighting,
};
use dephase_core::consts::{FWHM_PER_SIGMA, HBAR};
use dephase_core::physics::{
    bose_einstein, Coupling, DephasingModel, ModelKind, DEFAULT_DEBYE_TEMPERATURE, DEFAULT_PHONON_ENERGY,
    REFERENCE_TEMPERATURE,
};
use dephase_core::sim::SimulationConfig;

/// Lineshape fitting, dephasing-model comparison and Monte-Carlo simulation
/// for phonon-dephased quantum emitters. Energies in meV, temperatures in K,
/// times in ps.
#[derive(Debug, Parser)]
#[command(name = "dephase", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Debye temperature of the acoustic-phonon model (K) [default: manifest value, else 600]
    #[arg(long, global = true, value_name = "K", allow_negative_numbers = true)]
    theta_d: Option<f64>,

    /// Optical phonon energy E0 (meV), held fixed unless --free-phonon-energy
    /// [default: manifest value, else 18]
    #[arg(long, global = true, value_name = "meV", allow_negative_numbers = true)]
    phonon_energy: Option<f64>,

    /// Fit the optical phonon energy, starting from --phonon-energy
    #[arg(long, global = true)]
    free_phonon_energy: bool,

    /// Hold the Gaussian floor f_G at this value in model fits (default: fitted)
    #[arg(long, global = true, value_name = "meV", allow_negative_numbers = true)]
    fix_fg: Option<f64>,

    /// Seed for synthetic noise and Monte-Carlo trajectories
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Print nothing on success
    #[arg(short, long, global = true)]
    quiet: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum WeightingArg {
    /// 1/max(counts, 1)
    Poisson,
    Uniform,
}

impl From<WeightingArg> for Weighting {
    fn from(w: WeightingArg) -> Self {
        match w {
            WeightingArg::Poisson => Weighting::Poisson,
            WeightingArg::Uniform => Weighting::Uniform,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    /// One f_G shared by all temperatures (global refit)
    Shared,
    /// Independent per-temperature components
    Free,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum QuantityArg {
    /// Total Voigt FWHM f_V
    Total,
    /// Lorentzian component f_L
    Lorentzian,
}

impl From<QuantityArg> for LinewidthQuantity {
    fn from(q: QuantityArg) -> Self {
        match q {
            QuantityArg::Total => LinewidthQuantity::Total,
            QuantityArg::Lorentzian => LinewidthQuantity::Lorentzian,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
enum ModelArg {
    AcousticDebye,
    CubicLaw,
    OpticalMode,
}

impl From<ModelArg> for ModelKind {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::AcousticDebye => ModelKind::AcousticDebye,
            ModelArg::CubicLaw => ModelKind::CubicLaw,
            ModelArg::OpticalMode => ModelKind::OpticalMode,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit one spectrum with a Voigt profile and classify its lineshape
    Fit {
        /// Spectrum file (energy_meV,intensity)
        input: PathBuf,
        /// Result record to write
        #[arg(short, long, default_value = "fit_result.json")]
        output: PathBuf,
        /// Residual weights: poisson uses 1/max(I, 1), uniform weights every bin equally
        #[arg(long, value_enum, default_value_t = WeightingArg::Poisson)]
        weighting: WeightingArg,
    },
    /// Fit a temperature series, extract components and compare dephasing models
    Series {
        /// Series manifest (JSON)
        manifest: PathBuf,
        /// Output directory for result.json, linewidths.csv and curves_<model>.csv
        #[arg(short, long, default_value = "series_out")]
        output: PathBuf,
        /// Gaussian-floor extraction
        #[arg(long, value_enum, default_value_t = ModeArg::Shared)]
        mode: ModeArg,
        /// Linewidth the models are fitted to
        #[arg(long, value_enum, default_value_t = QuantityArg::Total)]
        quantity: QuantityArg,
        /// Residual weights: poisson uses 1/max(I, 1), uniform weights every bin equally
        #[arg(long, value_enum, default_value_t = WeightingArg::Poisson)]
        weighting: WeightingArg,
    },
    /// Rank dephasing models on a result record or a (T, linewidth) table
    Compare {
        /// result.json from `series`, or a two-column temperature_K,linewidth_meV table
        input: PathBuf,
        /// Models to fit, comma separated (default: all three)
        #[arg(long, value_enum, value_delimiter = ',')]
        models: Vec<ModelArg>,
        /// Linewidth in the input (default: as recorded; total for bare tables)
        #[arg(long, value_enum)]
        quantity: Option<QuantityArg>,
        /// Also write the comparison as a result record
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Monte-Carlo coherence of a diffusing, dephased emitter and its spectrum
    Simulate {
        /// Target Gaussian FWHM f_G (meV); sets sigma unless --sigma is given
        #[arg(long, value_name = "meV", default_value_t = 0.72)]
        f_g: f64,
        /// Target Lorentzian FWHM f_L (meV); sets gamma unless --gamma is given
        #[arg(long, value_name = "meV", default_value_t = 6.82)]
        f_l: f64,
        /// Gaussian dephasing scale (1/ps)
        #[arg(long, value_name = "1/ps")]
        sigma: Option<f64>,
        /// Lorentzian dephasing rate (1/ps)
        #[arg(long, value_name = "1/ps")]
        gamma: Option<f64>,
        /// Field correlation rate (1/ps); 1e-6 is a microsecond correlation time
        #[arg(long, value_name = "1/ps", default_value_t = 1e-6)]
        lambda: f64,
        /// Time step (ps) [default: 0.025/max(sigma, gamma, lambda)]
        #[arg(long, value_name = "ps")]
        dt: Option<f64>,
        /// Trace length (ps) [default: long enough for |g| < 1e-6]
        #[arg(long, value_name = "ps")]
        t_max: Option<f64>,
        /// Number of trajectories
        #[arg(long, default_value_t = 10_000)]
        n_traj: usize,
        /// Line centre (meV)
        #[arg(long, value_name = "meV", default_value_t = 1820.2)]
        center: f64,
        /// Output directory for spectrum.csv and coherence.csv
        #[arg(short, long, default_value = "simulate_out")]
        output: PathBuf,
    },
    /// Write a seeded synthetic temperature series and its manifest
    Synth {
        /// Output directory
        #[arg(short, long, default_value = "synth_out")]
        output: PathBuf,
        #[arg(long, value_enum, default_value_t = ModelArg::AcousticDebye)]
        model: ModelArg,
        /// Lorentzian FWHM f_L at 270 K (meV), for every model
        #[arg(long, value_name = "meV", default_value_t = 6.82)]
        amplitude: f64,
        /// Gaussian floor f_G (meV)
        #[arg(long, value_name = "meV", default_value_t = 0.72)]
        f_g: f64,
        /// Peak height above baseline is snr^2 counts
        #[arg(long, default_value_t = 30.0)]
        snr: f64,
        /// Write exact profiles without Poisson noise
        #[arg(long)]
        no_noise: bool,
        /// Background counts per bin
        #[arg(long, default_value_t = 10.0)]
        baseline: f64,
        #[arg(long, value_name = "K", default_value_t = 10.0)]
        t_start: f64,
        #[arg(long, value_name = "K", default_value_t = 270.0)]
        t_stop: f64,
        #[arg(long, value_name = "K", default_value_t = 20.0)]
        t_step: f64,
        #[arg(long, value_name = "meV", default_value_t = 1780.0)]
        e_start: f64,
        #[arg(long, value_name = "meV", default_value_t = 1860.0)]
        e_stop: f64,
        #[arg(long, value_name = "meV", default_value_t = 0.1)]
        e_step: f64,
        /// Line centre at the lowest temperature (meV)
        #[arg(long, value_name = "meV", default_value_t = 1820.2)]
        center_start: f64,
        /// Line centre at the highest temperature (meV)
        #[arg(long, value_name = "meV", default_value_t = 1813.5)]
        center_end: f64,
        #[arg(long, default_value = "E4")]
        emitter_id: String,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("invalid arguments");
            eprintln!("error[parse]: {}", first.trim_start_matches("error: "));
            return ExitCode::from(1);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let class = e.class();
            eprintln!("error[{}]: {}", class.label(), e.to_string().replace('\n', " "));
            ExitCode::from(class.exit_code() as u8)
        }
    }
}

fn config_error(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(config_error(format!("{name} must be positive and finite, got {v}")))
    }
}

fn check_non_negative(name: &str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(config_error(format!("{name} must be non-negative and finite, got {v}")))
    }
}

impl Cli {
    fn validate(&self) -> Result<()> {
        if let Some(t) = self.theta_d {
            check_positive("--theta-d", t)?;
        }
        if let Some(e) = self.phonon_energy {
            check_positive("--phonon-energy", e)?;
        }
        if let Some(fg) = self.fix_fg {
            check_non_negative("--fix-fg", fg)?;
        }
        Ok(())
    }

    fn theta_d(&self, meta: &ManifestMetadata) -> f64 {
        self.theta_d.or(meta.theta_d).unwrap_or(DEFAULT_DEBYE_TEMPERATURE)
    }

    fn phonon_energy(&self, meta: &ManifestMetadata) -> f64 {
        self.phonon_energy.or(meta.phonon_energy).unwrap_or(DEFAULT_PHONON_ENERGY)
    }

    /// Flags override manifest metadata, which overrides built-in defaults.
    fn spec(&self, kind: ModelKind, meta: &ManifestMetadata) -> ModelSpec {
        let mut spec = ModelSpec::new(kind)
            .with_theta_d(self.theta_d(meta))
            .with_phonon_energy(Some(self.phonon_energy(meta)))
            .with_gaussian_floor(self.fix_fg);
        if self.free_phonon_energy {
            spec = spec.with_phonon_energy(None);
        }
        spec
    }

    fn say(&self, text: impl AsRef<str>) {
        if !self.quiet {
            println!("{}", text.as_ref());
        }
    }
}

fn run(cli: &Cli) -> Result<()> {
    cli.validate()?;
    match &cli.command {
        Command::Fit { input, output, weighting } => cmd_fit(cli, input, output, *weighting),
        Command::Series { manifest, output, mode, quantity, weighting } => {
            cmd_series(cli, manifest, output, *mode, *quantity, *weighting)
        }
        Command::Compare { input, models, quantity, output } => {
            cmd_compare(cli, input, models, *quantity, output.as_deref())
        }
        Command::Simulate { f_g, f_l, sigma, gamma, lambda, dt, t_max, n_traj, center, output } => {
            let mut config = SimulationConfig::from_linewidths(*f_g, *f_l, *lambda, *n_traj, cli.seed)
                .map_err(|e| Error::core("simulate", e))?;
            if sigma.is_some() || gamma.is_some() {
                // Rebuild the default grid for the overridden rates.
                let s = sigma.unwrap_or(config.sigma);
                let g = gamma.unwrap_or(config.gamma);
                let f_g = s * FWHM_PER_SIGMA * HBAR;
                let f_l = 2.0 * g * HBAR;
                config = SimulationConfig::from_linewidths(f_g, f_l, *lambda, *n_traj, cli.seed)
                    .map_err(|e| Error::core("simulate", e))?;
                config.sigma = s;
                config.gamma = g;
            }
            config.dt = dt.unwrap_or(config.dt);
            config.t_max = t_max.unwrap_or(config.t_max);
            if !center.is_finite() {
                return Err(config_error("--center must be finite"));
            }
            cmd_simulate(cli, &config, *center, output)
        }
        Command::Synth {
            output,
            model,
            amplitude,
            f_g,
            snr,
            no_noise,
            baseline,
            t_start,
            t_stop,
            t_step,
            e_start,
            e_stop,
            e_step,
            center_start,
            center_end,
            emitter_id,
        } => {
            check_non_negative("--amplitude", *amplitude)?;
            check_non_negative("--f-g", *f_g)?;
            let coupling = match model {
                ModelArg::AcousticDebye => {
                    Coupling::AcousticDebye { amplitude: *amplitude, theta_d: cli.theta_d(&ManifestMetadata::default()) }
                }
                ModelArg::CubicLaw => Coupling::CubicLaw { amplitude: amplitude / REFERENCE_TEMPERATURE.powi(3) },
                ModelArg::OpticalMode => {
                    let phonon_energy = cli.phonon_energy(&ManifestMetadata::default());
                    let n = bose_einstein(phonon_energy, REFERENCE_TEMPERATURE)
                        .map_err(|e| Error::core("--phonon-energy", e))?;
                    Coupling::OpticalMode { amplitude: amplitude / (n * (n + 1.0)), phonon_energy }
                }
            };
            if emitter_id.is_empty() || emitter_id.contains(['/', '\\', '\n']) {
                return Err(config_error("--emitter-id must be a non-empty file-name-safe string"));
            }
            let config = SynthConfig {
                emitter_id: emitter_id.clone(),
                model: DephasingModel { coupling, gaussian_floor: *f_g },
                temperatures: GridSpec { start: *t_start, stop: *t_stop, step: *t_step },
                energy: GridSpec { start: *e_start, stop: *e_stop, step: *e_step },
                center_start: *center_start,
                center_end: *center_end,
                peak_snr: (!no_noise).then_some(*snr),
                baseline: *baseline,
                seed: cli.seed,
            };
            cmd_synth(cli, &config, output)
        }
    }
}

fn input_hashes(paths: &[&Path]) -> Result<BTreeMap<String, String>> {
    paths
        .iter()
        .map(|p| Ok((p.display().to_string(), formats::sha256_file(p)?)))
        .collect()
}

fn cmd_fit(cli: &Cli, input: &Path, output: &Path, weighting: WeightingArg) -> Result<()> {
    let spectrum = formats::load_spectrum(input)?;
    let options = FitOptions { weighting: weighting.into(), ..FitOptions::default() };
    let context = || format!("fit {}", input.display());
    let fit = fit_voigt_with(&spectrum, None, &options).map_err(|e| Error::core(context(), e))?;
    let class = classify_lineshape_with(&spectrum, &options).map_err(|e| Error::core(context(), e))?;

    let record = ResultRecord {
        schema_version: formats::SCHEMA_VERSION,
        emitter_id: spectrum.emitter_id().to_string(),
        per_temperature: vec![formats::fit_record(spectrum.temperature(), &fit, Some(&class))],
        components: None,
        quantity: None,
        linewidths: Vec::new(),
        models: Vec::new(),
        best_model: None,
        provenance: Provenance::new(input_hashes(&[input])?, None),
    };
    formats::save_record(output, &record)?;

    let (p, u) = (&fit.params, &fit.uncertainties);
    cli.say(format!("center  {:.4} ± {:.4} meV", p.center, u.center));
    cli.say(format!("f_G     {:.4} ± {:.4} meV", p.f_g, u.f_g));
    cli.say(format!("f_L     {:.4} ± {:.4} meV", p.f_l, u.f_l));
    cli.say(format!("f_V     {:.4} meV", fit.total_fwhm()));
    cli.say(format!("class   {} (RSS ratio {:.3})", class.class.label(), class.ratio));
    cli.say(format!("wrote {}", output.display()));
    Ok(())
}

fn print_table(cli: &Cli, ranked: &[RankedModel]) {
    cli.say(format!("{:<16} {:>3} {:>14} {:>12} {:>9}", "model", "k", "rss", "aic", "delta_aic"));
    for r in ranked {
        let tie = if r.delta_aic > 0.0 && r.delta_aic < 2.0 { "  indistinguishable from best" } else { "" };
        cli.say(format!(
            "{:<16} {:>3} {:>14.6e} {:>12.4} {:>9.3}{tie}",
            r.fit.model.kind().label(),
            r.fit.n_params,
            r.fit.rss,
            r.fit.aic,
            r.delta_aic
        ));
    }
}

fn write_curves(dir: &Path, ranked: &[RankedModel], points: &[(f64, f64)]) -> Result<()> {
    let grid = pipeline::dense_temperatures(points);
    for r in ranked {
        let text = formats::format_curve(&r.fit.model, &grid).map_err(|e| Error::core("model curve", e))?;
        formats::write_atomic(&dir.join(format!("curves_{}.csv", r.fit.model.kind().label())), text.as_bytes())?;
    }
    Ok(())
}

fn cmd_series(
    cli: &Cli,
    manifest_path: &Path,
    out_dir: &Path,
    mode: ModeArg,
    quantity: QuantityArg,
    weighting: WeightingArg,
) -> Result<()> {
    let loaded = formats::load_series(manifest_path)?;
    let meta = loaded.manifest.metadata.unwrap_or_default();
    let mode = match mode {
        ModeArg::Shared => ComponentMode::SharedGaussian,
        ModeArg::Free => ComponentMode::Free,
    };
    let settings = SeriesSettings {
        fit: FitOptions { weighting: weighting.into(), ..FitOptions::default() },
        mode,
        quantity: quantity.into(),
        candidates: ModelKind::ALL.iter().map(|&k| cli.spec(k, &meta)).collect(),
    };

    let result = pipeline::run_series(&loaded.dataset, &settings)?;
    let classes = pipeline::classify_all(loaded.dataset.spectra(), &settings.fit);

    let mut inputs = loaded.hashes.clone();
    inputs.insert(manifest_path.display().to_string(), formats::sha256_file(manifest_path)?);
    let record = formats::series_record(
        loaded.dataset.emitter_id(),
        &result,
        mode,
        &classes,
        Provenance::new(inputs, None),
    );

    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    formats::save_record(&out_dir.join("result.json"), &record)?;
    formats::write_atomic(&out_dir.join("linewidths.csv"), formats::format_linewidths(&result.linewidths).as_bytes())?;
    write_curves(out_dir, &result.model_fits, &result.linewidths)?;

    cli.say(format!(
        "f_G = {:.4} ± {:.4} meV over {} temperatures",
        result.components.gaussian_floor,
        result.components.gaussian_floor_uncertainty,
        result.per_temperature.len()
    ));
    print_table(cli, &result.model_fits);
    cli.say(format!("best model: {}", result.best_model));
    cli.say(format!("wrote {}", out_dir.display()));
    Ok(())
}

fn cmd_compare(
    cli: &Cli,
    input: &Path,
    models: &[ModelArg],
    quantity: Option<QuantityArg>,
    output: Option<&Path>,
) -> Result<()> {
    let (points, recorded) = formats::load_linewidths(input)?;
    let quantity = quantity.map_or(recorded, LinewidthQuantity::from);
    let kinds: Vec<ModelKind> = if models.is_empty() {
        ModelKind::ALL.to_vec()
    } else {
        let mut seen = Vec::new();
        for &m in models {
            if !seen.contains(&m) {
                seen.push(m);
            }
        }
        seen.into_iter().map(ModelKind::from).collect()
    };
    let meta = ManifestMetadata::default();
    let candidates: Vec<ModelSpec> = kinds.iter().map(|&k| cli.spec(k, &meta)).collect();
    let ranked = compare_models(&points, quantity, &candidates, &FitOptions::default().lm)
        .map_err(|e| Error::core(format!("compare {}", input.display()), e))?;
    print_table(cli, &ranked);

    if let Some(out) = output {
        let record = ResultRecord {
            schema_version: formats::SCHEMA_VERSION,
            emitter_id: String::new(),
            per_temperature: Vec::new(),
            components: None,
            quantity: Some(formats::quantity_label(quantity).to_string()),
            linewidths: formats::linewidth_records(&points),
            models: ranked.iter().map(|r| formats::model_record(&r.fit, r.delta_aic)).collect(),
            best_model: Some(ranked[0].fit.model.kind().label().to_string()),
            provenance: Provenance::new(input_hashes(&[input])?, None),
        };
        formats::save_record(out, &record)?;
        cli.say(format!("wrote {}", out.display()));
    }
    Ok(())
}

fn cmd_simulate(cli: &Cli, config: &SimulationConfig, center: f64, out_dir: &Path) -> Result<()> {
    config.validate().map_err(|e| Error::core("simulate", e))?;
    let (trace, spectrum) = pipeline::simulate(config, center)?;
    let spectrum = spectrum.with_emitter_id(format!("simulated_seed_{}", config.seed));
    let meta = [
        ("seed", config.seed.to_string()),
        ("sigma_per_ps", formats::format_sig(config.sigma, formats::RECORD_DIGITS)),
        ("gamma_per_ps", formats::format_sig(config.gamma, formats::RECORD_DIGITS)),
        ("lambda_per_ps", formats::format_sig(config.lambda, formats::RECORD_DIGITS)),
        ("dt_ps", formats::format_sig(config.dt, formats::RECORD_DIGITS)),
        ("t_max_ps", formats::format_sig(config.t_max, formats::RECORD_DIGITS)),
        ("n_traj", config.n_traj.to_string()),
        ("center_meV", formats::format_sig(center, formats::RECORD_DIGITS)),
        ("tool_version", env!("CARGO_PKG_VERSION").to_string()),
    ];
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    formats::write_atomic(&out_dir.join("coherence.csv"), formats::format_coherence(&trace, &meta).as_bytes())?;
    formats::save_spectrum(&out_dir.join("spectrum.csv"), &spectrum)?;
    // Sampling noise can ripple the flanks; the width is informational only.
    let width = match spectrum.fwhm() {
        Ok(w) => format!("{w:.4} meV"),
        Err(_) => "not measurable (profile not unimodal)".to_string(),
    };
    cli.say(format!(
        "seed {}: {} trajectories, {} time points, spectrum FWHM {width}",
        config.seed,
        config.n_traj,
        trace.len(),
    ));
    cli.say(format!("wrote {}", out_dir.display()));
    Ok(())
}

fn cmd_synth(cli: &Cli, config: &SynthConfig, out_dir: &Path) -> Result<()> {
    let manifest = synth::generate_synthetic_series(config, out_dir)?;
    cli.say(format!(
        "seed {}: wrote {} spectra and {} to {}",
        config.seed,
        manifest.entries.len(),
        synth::MANIFEST_NAME,
        out_dir.display()
    ));
    Ok(())
}
