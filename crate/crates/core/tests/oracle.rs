//! Renderer-backed properties of the measurement pipeline.

use ptosis_core::classify::{fit_threshold, LabeledSample, Objective};
use ptosis_core::clinical::{detect_clr, measure_eye_with, ClrParams, MeasureConfig};
use ptosis_core::synth::{
    generate_suite, render_eye, suite_spec, EyeSceneSpec, Parabola, RatioMethod, SceneParams, SuiteConfig,
};
use ptosis_core::{GrayImage, Label, Point2};
use proptest::prelude::*;

fn scene(lid_height_mm: f64) -> EyeSceneSpec {
    EyeSceneSpec::from_params(&SceneParams {
        lid_height_mm,
        clr_offset: Point2::new(1.5, -2.0),
        ..SceneParams::default()
    })
    .unwrap()
}

fn measure(img: &GrayImage, spec: &EyeSceneSpec) -> ptosis_core::ClinicalMeasurements {
    let (_, truth) = render_eye(spec).unwrap();
    measure_eye_with(img, &truth.landmarks, &MeasureConfig::default()).unwrap()
}

#[test]
fn known_four_millimetre_eye() {
    let spec = scene(4.0 + 2.0 * 11.7 / 120.0);
    let (img, truth) = render_eye(&spec).unwrap();
    assert!((truth.mrd1_mm - 4.0).abs() < 0.05, "{}", truth.mrd1_mm);
    let m = measure(&img, &spec);
    assert!((m.mrd1_mm - truth.mrd1_mm).abs() <= 0.2);
    assert!(m.clr_found);
}

#[test]
fn droop_sweep_is_monotone() {
    let mut last_ir = f64::INFINITY;
    let mut last_truth = f64::INFINITY;
    let mut last_measured = f64::INFINITY;
    for step in 0..=30 {
        let spec = scene(6.0 - 0.25 * step as f64);
        let (img, truth) = render_eye(&spec).unwrap();
        let m = measure_eye_with(&img, &truth.landmarks, &MeasureConfig::default()).unwrap();
        assert!(truth.iris_ratio_pct <= last_ir + 1e-9);
        assert!(truth.clr_mrd1_mm < last_truth);
        if truth.clr_visible {
            assert!(m.mrd1_mm < last_measured, "step {step}");
            last_measured = m.mrd1_mm;
        }
        last_ir = truth.iris_ratio_pct;
        last_truth = truth.clr_mrd1_mm;
    }
}

#[test]
fn covered_reflex_falls_back_to_the_iris_centre() {
    let spec = scene(-1.0);
    let (img, truth) = render_eye(&spec).unwrap();
    assert!(!truth.clr_visible);
    let m = measure_eye_with(&img, &truth.landmarks, &MeasureConfig::default()).unwrap();
    assert!(!m.clr_found);
    assert_eq!(m.clr, truth.landmarks.iris_circle().unwrap().center);
    assert!(m.mrd1_mm < 0.0);
    assert!((m.mrd1_mm - truth.mrd1_mm).abs() <= 0.2);
}

#[test]
fn glint_stands_in_for_a_covered_reflex_only() {
    let glint = Point2::new(0.0, 0.65 * 60.0);
    let covered = EyeSceneSpec {
        glint_offset: Some(glint),
        ..scene(-1.0)
    };
    let (img, truth) = render_eye(&covered).unwrap();
    let iris = truth.landmarks.iris_circle().unwrap();
    let det = detect_clr(&img, &iris, &ClrParams::default()).unwrap();
    assert!(det.found);
    assert!(det.point.distance(covered.iris_center + glint) < 1.0);
    let m = measure_eye_with(&img, &truth.landmarks, &MeasureConfig::default()).unwrap();
    assert!(m.mrd1_mm > truth.mrd1_mm + 2.0);

    let open = EyeSceneSpec {
        glint_offset: Some(glint),
        ..scene(4.0)
    };
    let (img, truth) = render_eye(&open).unwrap();
    let det = detect_clr(&img, &truth.landmarks.iris_circle().unwrap(), &ClrParams::default()).unwrap();
    assert!(det.point.distance(truth.clr) < 1.0);

    let outside = EyeSceneSpec {
        glint_offset: Some(Point2::new(0.0, 61.0)),
        ..scene(4.0)
    };
    assert!(outside.validate().is_err());
}

#[test]
fn glint_rate_zero_leaves_suites_unchanged() {
    let base = SuiteConfig {
        n: 20,
        seed: 5,
        ..SuiteConfig::default()
    };
    let with = SuiteConfig {
        glint_rate: 1.0,
        ..base.clone()
    };
    for i in 0..base.n {
        let a = suite_spec(&base, i).unwrap();
        let b = suite_spec(&with, i).unwrap();
        assert!(a.glint_offset.is_none());
        assert!(b.glint_offset.is_some());
        assert_eq!(EyeSceneSpec { glint_offset: None, ..b }, a);
    }
}

#[test]
fn suites_are_deterministic_and_cover_both_classes() {
    let config = SuiteConfig {
        n: 60,
        seed: 17,
        ..SuiteConfig::default()
    };
    let a = generate_suite(&config).unwrap();
    let b = generate_suite(&config).unwrap();
    assert_eq!(a, b);
    assert!(a.iter().any(|(_, t)| t.ptosis_label == Label::Ptosis));
    assert!(a.iter().any(|(_, t)| t.ptosis_label == Label::NotPtosis));
    for (img, _) in &a {
        assert_eq!(img.data().len(), img.width() * img.height());
    }
    assert!(generate_suite(&SuiteConfig { n: 0, ..config }).is_err());
}

#[test]
fn measurements_track_ground_truth_at_moderate_noise() {
    let config = SuiteConfig {
        n: 150,
        seed: 99,
        noise_sigma: (0.0, 5.0),
        ..SuiteConfig::default()
    };
    for i in 0..config.n {
        let (img, truth) = render_eye(&suite_spec(&config, i).unwrap()).unwrap();
        let m = measure_eye_with(&img, &truth.landmarks, &MeasureConfig::default()).unwrap();
        assert!((m.mrd1_mm - truth.mrd1_mm).abs() <= 0.2, "item {i}: {} vs {}", m.mrd1_mm, truth.mrd1_mm);
        assert!((m.iris_ratio_pct - truth.iris_ratio_pct).abs() <= 1.0, "item {i}");
    }
}

/// Flat upper lid at signed height `d` above the iris centre, lower lid
/// reshaped to meet it at the canthi.
fn flat_lid_scene(d: f64) -> EyeSceneSpec {
    let mut spec = EyeSceneSpec::from_params(&SceneParams {
        lid_height_mm: 6.5,
        lower_depth_frac: 1.4,
        ..SceneParams::default()
    })
    .unwrap();
    let hw = spec.half_width();
    let apex_y = spec.iris_center.y - d;
    spec.upper_lid = Parabola {
        apex_y,
        curvature: 0.0,
    };
    spec.lower_lid.curvature = (apex_y - spec.lower_lid.apex_y) / (hw * hw);
    spec
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn monte_carlo_agrees_with_the_segment_formula(frac in -0.8f64..0.8, seed in any::<u64>()) {
        let spec = flat_lid_scene(frac * 60.0);
        let analytic = spec.visible_iris_fraction_analytic();
        prop_assume!(analytic.is_some());
        let (_, truth) = render_eye(&spec).unwrap();
        prop_assert_eq!(truth.ratio_method, RatioMethod::Analytic);
        let (mc, _) = spec.visible_iris_fraction_monte_carlo(1_000_000, seed);
        prop_assert!((100.0 * (mc - analytic.unwrap())).abs() <= 0.2);
        prop_assert!((spec.visible_iris_fraction_quadrature() - analytic.unwrap()).abs() < 1e-6);
    }

    #[test]
    fn translation_leaves_measurements_unchanged(index in 0usize..40, dx in 0usize..25, dy in 0usize..25) {
        let config = SuiteConfig { n: 40, seed: 3, noise_sigma: (0.0, 5.0), ..SuiteConfig::default() };
        let (img, truth) = render_eye(&suite_spec(&config, index).unwrap()).unwrap();
        let shifted = GrayImage::from_fn(img.width() + dx, img.height() + dy, |c, r| {
            if c < dx || r < dy { 160 } else { img.get(c - dx, r - dy) }
        });
        let offset = Point2::new(dx as f64, dy as f64);
        let lm = truth.landmarks.map(|p| p + offset);
        let cfg = MeasureConfig::default();
        let a = measure_eye_with(&img, &truth.landmarks, &cfg).unwrap();
        let b = measure_eye_with(&shifted, &lm, &cfg).unwrap();
        prop_assert!((a.mrd1_px - b.mrd1_px).abs() < 1e-9);
        prop_assert!((a.iris_ratio_pct - b.iris_ratio_pct).abs() < 1e-9);
        prop_assert_eq!(a.clr_found, b.clr_found);
        prop_assert!((a.clr + offset).distance(b.clr) < 1e-9);
    }

    #[test]
    fn scaling_multiplies_pixels_and_keeps_millimetres(index in 0usize..40, factor in 2usize..4) {
        let config = SuiteConfig { n: 40, seed: 4, noise_sigma: (0.0, 5.0), ..SuiteConfig::default() };
        let (img, truth) = render_eye(&suite_spec(&config, index).unwrap()).unwrap();
        let s = factor as f64;
        let cfg = MeasureConfig::default();
        let a = measure_eye_with(&img, &truth.landmarks, &cfg).unwrap();
        let b = measure_eye_with(&img.upscale_nearest(factor), &truth.landmarks.map(|p| Point2::new(s * p.x, s * p.y)), &cfg).unwrap();
        prop_assert!((b.mrd1_px - s * a.mrd1_px).abs() <= 1e-6 * (s * a.mrd1_px).abs().max(1.0));
        prop_assert!((b.mrd1_mm - a.mrd1_mm).abs() <= 1e-6 * a.mrd1_mm.abs().max(1e-3));
    }

    #[test]
    fn monotone_rescaling_keeps_threshold_predictions(
        data in proptest::collection::vec((-20i32..20, any::<bool>()), 2..50),
    ) {
        prop_assume!(data.iter().any(|d| d.1) && data.iter().any(|d| !d.1));
        let samples: Vec<LabeledSample> =
            data.iter().map(|(x, l)| LabeledSample::new(vec![*x as f64], Label::from_bool(*l))).collect();
        let warped: Vec<LabeledSample> = data
            .iter()
            .map(|(x, l)| LabeledSample::new(vec![(*x as f64 / 7.0).exp() * 3.0 - 1.0], Label::from_bool(*l)))
            .collect();
        for objective in [Objective::Accuracy, Objective::BalancedAccuracy] {
            let a = fit_threshold(&samples, 0, objective).unwrap();
            let b = fit_threshold(&warped, 0, objective).unwrap();
            for (s, w) in samples.iter().zip(&warped) {
                prop_assert_eq!(a.predict(s.features[0]), b.predict(w.features[0]));
            }
        }
    }
}
