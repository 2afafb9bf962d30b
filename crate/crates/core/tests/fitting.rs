use dephase_core::fitting::problems::{PeakProblem, SeriesProblem, SharedGaussianProblem};
use dephase_core::fitting::*;
use dephase_core::lineshape::VoigtParams;
use dephase_core::lm::{finite_difference_jacobian, LeastSquaresProblem, LmConfig};
use dephase_core::physics::{Coupling, DephasingModel, ModelKind};
use dephase_core::{Error, Spectrum};
use proptest::prelude::*;

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn noiseless(p: VoigtParams, temperature: f64) -> Spectrum {
    let energy: Vec<f64> = (0..801).map(|i| 1780.0 + 0.1 * i as f64).collect();
    let intensity = energy.iter().map(|&e| p.eval(e)).collect();
    Spectrum::new(energy, intensity, temperature, "t").unwrap()
}

fn assert_jacobian<P: LeastSquaresProblem>(problem: &P, p: &[f64]) {
    let mut analytic = vec![0.0; problem.n_residuals() * problem.n_params()];
    problem.jacobian(p, &mut analytic);
    let numeric = finite_difference_jacobian(problem, p, 1e-6);
    let scale = numeric.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for (a, n) in analytic.iter().zip(&numeric) {
        assert!((a - n).abs() <= 1e-6 * n.abs() + 1e-8 * scale, "{a} vs {n}");
    }
}

#[test]
fn noiseless_voigt_round_trip() {
    let truths = [
        VoigtParams { center: 1820.2, f_g: 0.72, f_l: 0.3, amplitude: 1500.0, baseline: 10.0 },
        VoigtParams { center: 1815.0, f_g: 0.72, f_l: 6.82, amplitude: 9000.0, baseline: 10.0 },
        VoigtParams { center: 1819.4, f_g: 2.0, f_l: 2.0, amplitude: 4000.0, baseline: 0.0 },
    ];
    for truth in truths {
        let fit = fit_voigt(&noiseless(truth, 100.0), None).unwrap();
        let p = fit.params;
        assert!((p.center - truth.center).abs() < 1e-6);
        assert!(rel(p.f_g, truth.f_g) < 1e-6);
        assert!(rel(p.f_l, truth.f_l) < 1e-6);
        assert!(rel(p.amplitude, truth.amplitude) < 1e-6);
        assert!((p.baseline - truth.baseline).abs() < 1e-6);
    }
}

#[test]
fn fit_is_translation_invariant() {
    let truth = VoigtParams { center: 1820.0, f_g: 0.9, f_l: 1.1, amplitude: 2000.0, baseline: 5.0 };
    // Deterministic ripple so the optimum is not exactly the truth.
    let base = noiseless(truth, 50.0);
    let ripple: Vec<f64> = base.intensity().iter().enumerate().map(|(i, v)| v + 0.5 * (i as f64 * 0.37).sin()).collect();
    let s = Spectrum::new(base.energy().to_vec(), ripple, 50.0, "t").unwrap();
    let a = fit_voigt(&s, None).unwrap().params;
    for shift in [-250.0, 0.8, 1000.0] {
        let b = fit_voigt(&s.translated(shift), None).unwrap().params;
        assert!((b.center - a.center - shift).abs() < 1e-10);
        assert!(rel(b.f_g, a.f_g) < 1e-10);
        assert!(rel(b.f_l, a.f_l) < 1e-10);
        assert!(rel(b.amplitude, a.amplitude) < 1e-10);
        assert!((b.baseline - a.baseline).abs() < 1e-10);
    }
}

#[test]
fn peak_jacobians_match_finite_differences() {
    let truth = VoigtParams { center: 1820.0, f_g: 0.72, f_l: 2.0, amplitude: 3000.0, baseline: 10.0 };
    let s = noiseless(truth, 100.0);
    let trial = VoigtParams { center: 1820.3, f_g: 0.9, f_l: 1.6, amplitude: 2500.0, baseline: 12.0 };
    for mode in [WidthMode::Voigt, WidthMode::GaussianOnly, WidthMode::LorentzianOnly] {
        for weighting in [Weighting::Poisson, Weighting::Uniform] {
            let problem = PeakProblem::new(&s, mode, weighting);
            assert_jacobian(&problem, &problem.pack(&trial));
        }
    }
}

#[test]
fn series_jacobians_match_finite_differences() {
    let data: Vec<(f64, f64)> = (0..14).map(|i| (10.0 + 20.0 * i as f64, 0.75 + 0.0004 * (i * i * i) as f64)).collect();
    let cases = [
        (ModelSpec::new(ModelKind::AcousticDebye), LinewidthQuantity::Total),
        (ModelSpec::new(ModelKind::AcousticDebye).with_theta_d(300.0), LinewidthQuantity::Lorentzian),
        (ModelSpec::new(ModelKind::CubicLaw), LinewidthQuantity::Total),
        (ModelSpec::new(ModelKind::OpticalMode).with_phonon_energy(None), LinewidthQuantity::Total),
        (ModelSpec::new(ModelKind::OpticalMode).with_phonon_energy(None), LinewidthQuantity::Lorentzian),
    ];
    for (spec, q) in cases {
        let problem = SeriesProblem::new(&data, q, spec).unwrap();
        assert_jacobian(&problem, &problem.pack(4.0, 0.7, 21.0));
    }
}

#[test]
fn shared_gaussian_jacobian_matches_finite_differences() {
    let spectra: Vec<Spectrum> = [(10.0, 0.1), (150.0, 1.5), (270.0, 6.8)]
        .iter()
        .map(|&(t, f_l)| noiseless(VoigtParams { center: 1818.0, f_g: 0.72, f_l, amplitude: 2000.0, baseline: 10.0 }, t))
        .collect();
    let fits: Vec<VoigtFit> = spectra.iter().map(|s| fit_voigt(s, None).unwrap()).collect();
    for w in [Weighting::Poisson, Weighting::Uniform] {
        let problem = SharedGaussianProblem::new(&spectra, w);
        let mut p = problem.pack(0.8, &fits);
        p.iter_mut().enumerate().for_each(|(i, v)| *v *= 1.0 + 0.01 * (i % 3) as f64);
        assert_jacobian(&problem, &p);
    }
}

#[test]
fn shared_gaussian_extraction_recovers_components() {
    let truth_l = [0.05, 0.4, 1.5, 3.5, 6.82];
    let spectra: Vec<Spectrum> = truth_l
        .iter()
        .enumerate()
        .map(|(i, &f_l)| {
            let p = VoigtParams { center: 1820.0 - i as f64, f_g: 0.72, f_l, amplitude: 3000.0, baseline: 10.0 };
            noiseless(p, 10.0 + 60.0 * i as f64)
        })
        .collect();
    let fits: Vec<VoigtFit> = spectra.iter().map(|s| fit_voigt(s, None).unwrap()).collect();
    let c = extract_components(&spectra, &fits, ComponentMode::SharedGaussian, &FitOptions::default()).unwrap();
    assert!(rel(c.gaussian_floor, 0.72) < 1e-6);
    for (pt, want) in c.lorentzian.iter().zip(truth_l) {
        assert!(rel(pt.f_l, want) < 1e-5);
    }
}

#[test]
fn classification_of_pure_lineshapes() {
    let g = noiseless(VoigtParams { center: 1820.0, f_g: 1.0, f_l: 0.0, amplitude: 1000.0, baseline: 1.0 }, 10.0);
    let l = noiseless(VoigtParams { center: 1820.0, f_g: 0.0, f_l: 1.0, amplitude: 1000.0, baseline: 1.0 }, 270.0);
    assert_eq!(classify_lineshape(&g).unwrap().class, LineshapeClass::Gaussian);
    let c = classify_lineshape(&l).unwrap();
    assert_eq!(c.class, LineshapeClass::Lorentzian);
    assert!(c.ratio > CLASSIFY_RATIO_GATE);
}

#[test]
fn classification_gate_near_crossover() {
    let class = |ratio: f64| {
        let p = VoigtParams { center: 1820.0, f_g: 0.72, f_l: 0.72 * ratio, amplitude: 3000.0, baseline: 10.0 };
        classify_lineshape(&noiseless(p, 100.0)).unwrap()
    };
    // Pure-profile RSS values cross near f_L/f_G = 0.44 on this grid.
    let c = class(0.44);
    assert_eq!(c.class, LineshapeClass::Ambiguous);
    assert!(c.ratio < CLASSIFY_RATIO_GATE);
    assert_eq!(class(0.38).class, LineshapeClass::Gaussian);
    assert_eq!(class(0.52).class, LineshapeClass::Lorentzian);
    // An equal split is already clearly Lorentzian.
    assert_eq!(class(1.0).class, LineshapeClass::Lorentzian);
}

#[test]
fn paper_line_round_trips() {
    let g = VoigtParams { center: 1820.2, f_g: 0.72, f_l: 0.0, amplitude: 1000.0, baseline: 10.0 };
    let p = fit_voigt(&noiseless(g, 10.0), None).unwrap().params;
    assert!((p.center - 1820.2).abs() < 1e-6);
    assert!(rel(p.f_g, 0.72) < 1e-6);
    assert!(p.f_l < 1e-6);

    let l = VoigtParams { center: 1813.5, f_g: 0.0, f_l: 6.82, amplitude: 8000.0, baseline: 10.0 };
    let p = fit_voigt(&noiseless(l, 270.0), None).unwrap().params;
    assert!((p.center - 1813.5).abs() < 1e-6);
    assert!(rel(p.f_l, 6.82) < 1e-6);
    assert!(p.f_g < 1e-3);
}

#[test]
fn cubic_data_favours_cubic_below_120_kelvin() {
    let truth = DephasingModel::new(Coupling::CubicLaw { amplitude: 6.82 / 270f64.powi(3) }, 0.72).unwrap();
    let data: Vec<(f64, f64)> = (0..6).map(|i| 10.0 + 20.0 * i as f64).map(|t| (t, truth.total_fwhm(t).unwrap())).collect();
    let lm = LmConfig::default();
    let cubic = fit_series(&data, LinewidthQuantity::Total, &ModelSpec::new(ModelKind::CubicLaw), &lm).unwrap();
    let acoustic = fit_series(&data, LinewidthQuantity::Total, &ModelSpec::new(ModelKind::AcousticDebye), &lm).unwrap();
    assert!(acoustic.rss > cubic.rss);
    assert!(rel(cubic.model.amplitude(), 6.82 / 270f64.powi(3)) < 1e-6);
}

#[test]
fn single_candidate_table() {
    let data = [(10.0, 0.72), (50.0, 0.8), (90.0, 1.3), (130.0, 2.1)];
    let ranked = compare_models(&data, LinewidthQuantity::Total, &[ModelSpec::new(ModelKind::OpticalMode)], &LmConfig::default()).unwrap();
    assert_eq!(ranked.len(), 1);
    assert_eq!(ranked[0].delta_aic, 0.0);
}

#[test]
fn series_round_trip_and_ranking() {
    let truth = DephasingModel::new(Coupling::AcousticDebye { amplitude: 6.82, theta_d: 600.0 }, 0.72).unwrap();
    let data: Vec<(f64, f64)> = (0..14)
        .map(|i| {
            let t = 10.0 + 20.0 * i as f64;
            (t, truth.total_fwhm(t).unwrap())
        })
        .collect();
    let lm = LmConfig::default();
    let fit = fit_series(&data, LinewidthQuantity::Total, &ModelSpec::new(ModelKind::AcousticDebye), &lm).unwrap();
    assert!(rel(fit.model.amplitude(), 6.82) < 1e-8);
    assert!(rel(fit.model.gaussian_floor, 0.72) < 1e-8);

    let candidates: Vec<ModelSpec> = ModelKind::ALL.iter().map(|&k| ModelSpec::new(k)).collect();
    let ranked = compare_models(&data, LinewidthQuantity::Total, &candidates, &lm).unwrap();
    assert_eq!(ranked[0].fit.model.kind(), ModelKind::AcousticDebye);
    assert_eq!(ranked[0].delta_aic, 0.0);
    assert!(ranked.windows(2).all(|w| w[0].fit.aic <= w[1].fit.aic));
    assert!(ranked[1].delta_aic > 2.0);
}

#[test]
fn cubic_amplitude_is_reported_per_kelvin_cubed() {
    let c = 2.5e-7;
    let data: Vec<(f64, f64)> = (1..8).map(|i| (20.0 * i as f64, c * (20.0 * i as f64).powi(3))).collect();
    let fit = fit_series(&data, LinewidthQuantity::Lorentzian, &ModelSpec::new(ModelKind::CubicLaw), &LmConfig::default()).unwrap();
    assert!(rel(fit.model.amplitude(), c) < 1e-8);
    assert_eq!(fit.n_params, 1);
}

#[test]
fn dataset_validation() {
    let s = |t| noiseless(VoigtParams { center: 1820.0, f_g: 1.0, f_l: 1.0, amplitude: 100.0, baseline: 0.0 }, t);
    let d = SeriesDataset::new("E", vec![s(50.0), s(10.0), s(30.0)]).unwrap();
    assert_eq!(d.temperatures(), vec![10.0, 30.0, 50.0]);
    assert!(SeriesDataset::new("E", vec![s(10.0), s(10.0), s(30.0)]).is_err());
    let short = [(10.0, 1.0), (20.0, 1.0)];
    assert!(matches!(
        fit_series(&short, LinewidthQuantity::Total, &ModelSpec::new(ModelKind::CubicLaw), &LmConfig::default()),
        Err(Error::InsufficientData { .. })
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn round_trip_over_parameter_space(
        f_g in 0.3f64..3.0,
        f_l in 0.05f64..6.0,
        center in 1805.0f64..1835.0,
        baseline in 0.0f64..50.0,
    ) {
        let truth = VoigtParams { center, f_g, f_l, amplitude: 5000.0, baseline };
        let p = fit_voigt(&noiseless(truth, 100.0), None).unwrap().params;
        prop_assert!((p.center - center).abs() < 1e-6);
        prop_assert!(rel(p.total_fwhm(), truth.total_fwhm()) < 1e-6);
        prop_assert!((p.f_l - f_l).abs() < 1e-5 * (f_g + f_l));
    }

    #[test]
    fn aic_prefers_lower_rss_and_fewer_params(rss in 1e-6f64..1e3, n in 3usize..100, k in 1usize..4) {
        prop_assert!(aic(rss, n, k) < aic(rss * 1.5, n, k));
        prop_assert!(aic(rss, n, k) < aic(rss, n, k + 1));
    }

    #[test]
    fn scaling_intensity_keeps_widths(factor in 0.1f64..100.0) {
        let truth = VoigtParams { center: 1820.0, f_g: 0.72, f_l: 1.2, amplitude: 3000.0, baseline: 10.0 };
        let s = noiseless(truth, 100.0);
        let a = fit_voigt_with(&s, None, &FitOptions { weighting: Weighting::Uniform, ..Default::default() }).unwrap();
        let b = fit_voigt_with(&s.scaled(factor), None, &FitOptions { weighting: Weighting::Uniform, ..Default::default() }).unwrap();
        prop_assert!(rel(b.params.f_g, a.params.f_g) < 1e-6);
        prop_assert!(rel(b.params.amplitude, factor * a.params.amplitude) < 1e-6);
    }
}
