//! Acceptance suite: one test per release criterion, each printing a
//! PASS/FAIL line (visible with `--nocapture`).
//!
//! Run with:
//!   cargo test -p sscm-cli --test acceptance -- --nocapture --test-threads=1
//!
//! Criterion 2 (statistical round trip) asserts the full set of stated
//! tolerances. Two of its clauses are out of reach for this instrument
//! class and fail honestly; the head comment of `criterion_02` carries the
//! measurements, and the calibration example reproduces them.

use std::process::Command;
use std::time::Instant;

use ndarray::Array1;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::{rand_core::SeedableRng, ChaCha8Rng};

use sscm_core::channel::{
    to_angle_domain, to_frequency_domain, to_port_domain, to_time_domain, CarrierConfig,
    ChannelDims, ChannelSample, PowerProfile,
};
use sscm_core::extract::{
    circular_spread_weighted, extract_stats_batch, rms_spread, ExtractConfig,
};
use sscm_core::feedback::{
    compute_csi_targets, evaluate, sgcs, train_linear_codec, Codec, CsiTarget,
};
use sscm_core::fit::{
    baseline, build_sscm, fit_poisson, FitOptions, SubScenario, SubScenarioCatalog,
};
use sscm_core::gbsm::{draw_cluster_count, generate_dataset, GenConfig, LspSet};
use sscm_core::io::{decode_report, encode_report, REPORT_RANGES};
use sscm_core::rng::{sample_stream, TAG_CHANNEL_GEN};

fn table1(mu_ds: f64, s_ds: f64, mu_asd: f64, s_asd: f64, mu_kf: f64, s_kf: f64) -> LspSet {
    LspSet {
        mu_lg_ds: mu_ds,
        sigma_lg_ds: s_ds,
        mu_lg_asd: mu_asd,
        sigma_lg_asd: s_asd,
        mu_lg_asa: mu_asd,
        sigma_lg_asa: s_asd,
        mu_kf_db: mu_kf,
        sigma_kf_db: s_kf,
        lambda_clusters: None,
        los: true,
    }
}

fn set_a() -> LspSet {
    table1(-7.6, 0.7, 1.26, 0.3, 10.0, 4.0)
}

fn set_b() -> LspSet {
    table1(-6.8, 0.675, 0.7, 0.25, 8.0, 3.0)
}

fn set_c() -> LspSet {
    table1(-6.0, 0.65, 1.6, 0.28, 7.0, 4.0)
}

fn set_d() -> LspSet {
    table1(-6.6, 0.66, 0.75, 0.24, 8.3, 2.8)
}

fn clause(name: &str, pass: bool, detail: String) -> bool {
    println!("    {} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    pass
}

/// Criterion 1: the Table-1 catalog built from sets A, B, C ranks B first
/// for query D under default weights and scales, in under a second.
#[test]
fn criterion_01_table1_catalog_match() {
    let start = Instant::now();
    let catalog = SubScenarioCatalog::from_entries(vec![
        SubScenario { id: "a".into(), params: set_a(), grid_index: None },
        SubScenario { id: "b".into(), params: set_b(), grid_index: None },
        SubScenario { id: "c".into(), params: set_c(), grid_index: None },
    ])
    .unwrap();
    let ranked = catalog.match_query(&set_d(), 3).unwrap();
    let elapsed = start.elapsed();
    let ok = ranked[0].id == "b" && elapsed.as_secs_f64() < 1.0;
    println!(
        "criterion 1 (Table-1 matching): {} — top-1 = {} (distance {:.5}), {:?}",
        if ok { "PASS" } else { "FAIL" },
        ranked[0].id,
        ranked[0].distance,
        elapsed
    );
    assert_eq!(ranked[0].id, "b");
    assert!(elapsed.as_secs_f64() < 1.0);
}

/// Criterion 2: generate 2000 samples from set B (ASA = ASD, λ = 10),
/// extract and rebuild the parameter set, and compare against the truth.
///
/// Measurement configuration (calibrated, see the calibration example):
/// 208 subcarriers at 250 kHz spacing, delay threshold 28 dB, angle
/// threshold 12 dB. Two clauses cannot be met by this instrument class and
/// fail here by design rather than being loosened:
///
/// * mu_KF: the peak-tap estimator reads the first cluster's diffuse power
///   inside the specular tap; measured bias ≈ +2.5 dB across every
///   spacing/threshold combination swept (minimum +1.9 dB), against a
///   ±1.5 dB tolerance.
/// * lambda: gap-grouped counting needs window/tap ratios well beyond the
///   208 available bins once sidelobe bridging and window aliasing are
///   accounted; the sweep plateaus near 5–7 of 10.
#[test]
fn criterion_02_statistical_round_trip() {
    let start = Instant::now();
    let params = set_b().with_lambda(10.0);
    let dims = ChannelDims::new(4, 8, 208).unwrap();
    let carrier = CarrierConfig::new(2.6e9, 250e3).unwrap();
    let config = GenConfig::new(dims, carrier);
    let samples = generate_dataset(&params, &config, 2000, 7).unwrap();
    let cfg = ExtractConfig {
        pdp_threshold_db: 28.0,
        cluster_gap_taps: 2,
        angle_threshold_db: Some(12.0),
    };
    let stats = extract_stats_batch(&samples, &cfg).unwrap();
    let build = build_sscm(&stats, &baseline("uma-los").unwrap(), &FitOptions::default()).unwrap();
    let p = build.params;
    let elapsed = start.elapsed();

    println!("criterion 2 (statistical round trip): {elapsed:?}");
    let mut all = true;
    all &= clause(
        "mu_lgDS ±0.15",
        (p.mu_lg_ds + 6.8).abs() <= 0.15,
        format!("{:.3} vs -6.8", p.mu_lg_ds),
    );
    all &= clause(
        "sigma_lgDS ±30%",
        (p.sigma_lg_ds - 0.675).abs() / 0.675 <= 0.30,
        format!("{:.3} vs 0.675", p.sigma_lg_ds),
    );
    all &= clause(
        "mu_KF ±1.5 dB",
        (p.mu_kf_db - 8.0).abs() <= 1.5,
        format!("{:.2} vs 8", p.mu_kf_db),
    );
    all &= clause(
        "mu_lgASD ±0.2",
        (p.mu_lg_asd - 0.7).abs() <= 0.2,
        format!("{:.3} vs 0.7", p.mu_lg_asd),
    );
    let lambda = p.lambda_clusters.unwrap();
    all &= clause(
        "lambda ±10%",
        (lambda - 10.0).abs() / 10.0 <= 0.10,
        format!("{lambda:.2} vs 10"),
    );
    let runtime_ok = elapsed.as_secs_f64() < 60.0;
    all &= clause("runtime < 1 min parallel", runtime_ok, format!("{elapsed:?}"));
    println!(
        "criterion 2 (statistical round trip): {}",
        if all { "PASS" } else { "FAIL" }
    );
    assert!(all, "statistical round trip clauses failed (see lines above)");
}

/// Criterion 3: 56-bit codecs trained on A, B, C, D (2000 train / 640 test
/// each) and evaluated on D's test set must rank B over A and C, with the
/// D-trained codec at most 0.02 better than B-trained.
#[test]
fn criterion_03_cross_dataset_transfer() {
    let start = Instant::now();
    let dims = ChannelDims::new(4, 8, 208).unwrap();
    let carrier = CarrierConfig::new(2.6e9, 15e3).unwrap();
    let config = GenConfig::new(dims, carrier);
    let sets = [set_a(), set_b(), set_c(), set_d()];
    let names = ["a", "b", "c", "d"];
    let mut scores = [0.0f64; 4];
    let mut d_test: Vec<ChannelSample> = Vec::new();
    let mut models = Vec::new();
    for (i, set) in sets.iter().enumerate() {
        let params = set.with_lambda(10.0);
        let all = generate_dataset(&params, &config, 2640, 300 + i as u64).unwrap();
        let (train, test) = all.split_at(2000);
        let targets: Vec<CsiTarget> = train
            .iter()
            .map(|s| compute_csi_targets(s, 16).unwrap())
            .collect();
        let model = train_linear_codec(&targets, 7, 4).unwrap();
        assert_eq!(model.feedback_bits(), 56);
        models.push(model);
        if names[i] == "d" {
            d_test = test.to_vec();
        }
    }
    for (i, model) in models.iter().enumerate() {
        let report = evaluate(
            &Codec::Linear(model.clone()),
            &d_test,
            16,
            names[i],
            "d-test",
        )
        .unwrap();
        scores[i] = report.mean_sgcs;
        println!("    train {} -> test d: mean SGCS {:.6}", names[i], report.mean_sgcs);
    }
    let elapsed = start.elapsed();
    let (a, b, c, d) = (scores[0], scores[1], scores[2], scores[3]);
    let ok = b >= a && b >= c && (d - b) <= 0.02 && elapsed.as_secs_f64() < 600.0;
    println!(
        "criterion 3 (cross-dataset transfer): {} — B {:.4} vs A {:.4} / C {:.4}, D−B = {:+.4}, {:?}",
        if ok { "PASS" } else { "FAIL" },
        b,
        a,
        c,
        d - b,
        elapsed
    );
    assert!(b >= a, "B-trained {b} must match A-trained {a} on D");
    assert!(b >= c, "B-trained {b} must match C-trained {c} on D");
    assert!(d - b <= 0.02, "degradation D−B = {} exceeds 0.02", d - b);
    assert!(elapsed.as_secs_f64() < 600.0);
}

/// Criterion 4: on set-B data, mean SGCS over the 16/32/56/128-bit codec
/// configurations is non-decreasing within 0.005 slack.
#[test]
fn criterion_04_feedback_bit_monotonicity() {
    let dims = ChannelDims::new(4, 8, 208).unwrap();
    let carrier = CarrierConfig::new(2.6e9, 15e3).unwrap();
    let config = GenConfig::new(dims, carrier);
    let params = set_b().with_lambda(10.0);
    let all = generate_dataset(&params, &config, 2640, 400).unwrap();
    let (train, test) = all.split_at(2000);
    let targets: Vec<CsiTarget> = train
        .iter()
        .map(|s| compute_csi_targets(s, 16).unwrap())
        .collect();
    let test: Vec<ChannelSample> = test.to_vec();

    let ladder = [(4usize, 2usize, 16), (8, 2, 32), (7, 4, 56), (8, 8, 128)];
    let mut means = Vec::new();
    for (n_coeff, bits, budget) in ladder {
        let model = train_linear_codec(&targets, n_coeff, bits).unwrap();
        assert_eq!(model.feedback_bits(), budget);
        let report = evaluate(&Codec::Linear(model), &test, 16, "b", "b-test").unwrap();
        println!("    {budget:>3} bits: mean SGCS {:.6}", report.mean_sgcs);
        means.push(report.mean_sgcs);
    }
    let ok = means.windows(2).all(|w| w[1] >= w[0] - 0.005);
    println!(
        "criterion 4 (feedback-bit monotonicity): {}",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok, "SGCS ladder not monotone: {means:?}");
}

/// Criterion 5: SGCS range and invariances to 1e−12 on 1000 random pairs.
#[test]
fn criterion_05_sgcs_metric_properties() {
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    fn random_vec(n: usize, rng: &mut ChaCha8Rng) -> Array1<Complex64> {
        Array1::from_shape_fn(n, |_| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        })
    }
    for _ in 0..1000 {
        let w = random_vec(8, &mut rng);
        let v = random_vec(8, &mut rng);
        let s = sgcs(w.view(), v.view()).unwrap();
        assert!((0.0..=1.0 + 1e-12).contains(&s), "sgcs {s} out of range");

        let self_s = sgcs(w.view(), w.view()).unwrap();
        assert!((self_s - 1.0).abs() <= 1e-12);

        let phase = rng.gen_range(0.0..std::f64::consts::TAU);
        let gain = rng.gen_range(0.01..100.0);
        let rotated = w.mapv(|z| z * Complex64::from_polar(gain, phase));
        let rot_s = sgcs(w.view(), rotated.view()).unwrap();
        assert!((rot_s - 1.0).abs() <= 1e-12);

        let both = sgcs(rotated.view(), v.view()).unwrap();
        assert!((both - s).abs() <= 1e-12);
    }
    println!("criterion 5 (SGCS metric properties): PASS — 1000 random pairs");
}

/// Criterion 6: frequency↔time and port↔angle round trips on 100 random
/// tensors, relative error and energy drift both below 1e−9.
#[test]
fn criterion_06_transform_round_trips() {
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    for trial in 0..100 {
        let n_rx = 1 + trial % 5;
        let n_tx = 1 + (trial / 2) % 6;
        let n_sc = 2 + trial % 37;
        let dims = ChannelDims::new(n_rx, n_tx, n_sc).unwrap();
        let h = ndarray::Array3::from_shape_fn((n_rx, n_tx, n_sc), |_| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let sample =
            ChannelSample::new(dims, CarrierConfig::new(2.6e9, 15e3).unwrap(), h).unwrap();
        let energy = sample.energy();

        let t = to_time_domain(&sample).unwrap();
        assert!((t.energy() - energy).abs() / energy <= 1e-9);
        let back = to_frequency_domain(&t).unwrap();
        let err: f64 = sample
            .h_f()
            .iter()
            .zip(back.h_f().iter())
            .map(|(x, y)| (x - y).norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!(err / energy.sqrt() <= 1e-9, "trial {trial}: freq-time {err}");

        let ang = to_angle_domain(&sample).unwrap();
        assert!((ang.energy() - energy).abs() / energy <= 1e-9);
        let back = to_port_domain(&ang).unwrap();
        let err: f64 = sample
            .h_f()
            .iter()
            .zip(back.h_f().iter())
            .map(|(x, y)| (x - y).norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!(err / energy.sqrt() <= 1e-9, "trial {trial}: port-angle {err}");
    }
    println!("criterion 6 (transform round trips): PASS — 100 random tensors");
}

/// Criterion 7: closed-form spread and K-factor oracles.
#[test]
fn criterion_07_analytic_spread_oracles() {
    let two_tap = PowerProfile::new(vec![0.0, 100e-9], vec![0.5, 0.5]).unwrap();
    let ds = rms_spread(&two_tap).unwrap();
    assert!((ds - 50e-9).abs() <= 1e-12 * 50e-9 + 1e-21, "two-tap {ds}");

    let symmetric = circular_spread_weighted(&[-30.0, 30.0], &[0.5, 0.5]).unwrap();
    assert!((symmetric - 30.0).abs() <= 1e-9, "±30° case {symmetric}");

    let seam = circular_spread_weighted(&[179.0, -179.0], &[0.5, 0.5]).unwrap();
    assert!((seam - 1.0).abs() <= 1e-6, "wrap case {seam}");

    let kf_db = 10.0 * (0.9f64 / 0.1).log10();
    assert!((kf_db - 9.54).abs() <= 0.01, "K-factor case {kf_db}");
    // the extractor reproduces the ratio on a hand-built profile
    let est = {
        let dims = ChannelDims::new(1, 1, 64).unwrap();
        let carrier = CarrierConfig::new(2.6e9, 15e3).unwrap();
        let h = ndarray::Array3::from_shape_fn((1, 1, 64), |(_, _, k)| {
            let strong = Complex64::from_polar(0.9f64.sqrt(), 0.0);
            let weak = Complex64::from_polar(
                0.1f64.sqrt(),
                -2.0 * std::f64::consts::PI * (k * 9) as f64 / 64.0,
            );
            strong + weak
        });
        let sample = ChannelSample::new(dims, carrier, h).unwrap();
        sscm_core::extract::extract_k_factor(&sample, &ExtractConfig::default()).unwrap()
    };
    assert!(!est.capped);
    assert!((est.kf_db - 9.54).abs() <= 0.01, "extracted K-factor {}", est.kf_db);
    println!("criterion 7 (analytic spread oracles): PASS");
}

/// Criterion 8: the clamped Poisson cluster count against a truncated-series
/// oracle, and λ recovery through the Poisson fit.
#[test]
fn criterion_08_poisson_pipeline() {
    let lambda: f64 = 10.0;
    // E[max(Poisson(λ), 1)] by truncated series
    let oracle_mean = {
        let mut p = (-lambda).exp();
        let mut mean = 0.0;
        let mut k = 0usize;
        loop {
            mean += (k.max(1)) as f64 * p;
            k += 1;
            p *= lambda / k as f64;
            if p < 1e-16 && k as f64 > lambda + 12.0 * lambda.sqrt() {
                break;
            }
        }
        mean
    };
    let mut rng = sample_stream(808, 0, TAG_CHANNEL_GEN);
    let counts: Vec<usize> = (0..100_000)
        .map(|_| draw_cluster_count(lambda, 1, &mut rng).unwrap())
        .collect();
    let mean = counts.iter().sum::<usize>() as f64 / counts.len() as f64;
    let fitted = fit_poisson(&counts).unwrap();
    let ok = (mean - oracle_mean).abs() <= 0.1 && (fitted - lambda).abs() <= 0.05;
    println!(
        "criterion 8 (Poisson pipeline): {} — mean {:.4} vs oracle {:.4}, fitted λ {:.4}",
        if ok { "PASS" } else { "FAIL" },
        mean,
        oracle_mean,
        fitted
    );
    assert!((mean - oracle_mean).abs() <= 0.1);
    assert!((fitted - lambda).abs() <= 0.05);
}

/// Criterion 9: the 8-byte report of set B matches the frozen fixture and
/// decodes within half a quantization step per field.
#[test]
fn criterion_09_report_codec_golden() {
    let params = set_b().with_lambda(10.0);
    let enc = encode_report(&params);
    const GOLDEN: [u8; 8] = [1, 140, 115, 124, 43, 153, 77, 51];
    assert_eq!(enc.bytes, GOLDEN, "frozen report fixture");
    assert_eq!(enc.bytes[1], 140, "mu_lgDS byte");
    assert!(enc.clamped.is_empty());

    let dec = decode_report(&enc.bytes).unwrap();
    let truth = [-6.8, 0.675, 0.7, 0.25, 8.0, 3.0, 10.0];
    let decoded = [
        dec.mu_lg_ds,
        dec.sigma_lg_ds,
        dec.mu_lg_asd,
        dec.sigma_lg_asd,
        dec.mu_kf_db,
        dec.sigma_kf_db,
        dec.lambda_clusters,
    ];
    for i in 0..7 {
        let (lo, hi) = REPORT_RANGES[i];
        assert!(
            (decoded[i] - truth[i]).abs() <= (hi - lo) / 510.0 + 1e-12,
            "field {i}: {} vs {}",
            decoded[i],
            truth[i]
        );
    }
    println!("criterion 9 (report codec golden vector): PASS — bytes {GOLDEN:?}");
}

/// Criterion 10: `generate` produces byte-identical datasets across runs
/// and across worker thread counts.
#[test]
fn criterion_10_generate_determinism() {
    let dir = tempfile::TempDir::new().unwrap();
    let params_path = dir.path().join("b.params");
    std::fs::write(
        &params_path,
        "mu_lgDS=-6.8\nsigma_lgDS=0.675\nmu_lgASD=0.7\nsigma_lgASD=0.25\n\
         mu_lgASA=0.7\nsigma_lgASA=0.25\nmu_KF=8\nsigma_KF=3\nlambda_clusters=10\nlos=true\n",
    )
    .unwrap();

    let mut outputs = Vec::new();
    for (name, threads) in [("t1a.csds", "1"), ("t1b.csds", "1"), ("t4.csds", "4"), ("t8.csds", "8")]
    {
        let out_path = dir.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_sscm"))
            .env("RAYON_NUM_THREADS", threads)
            .args([
                "generate",
                "--params",
                params_path.to_str().unwrap(),
                "--count",
                "64",
                "--seed",
                "1234",
                "--out",
                out_path.to_str().unwrap(),
            ])
            .status()
            .unwrap();
        assert!(status.success());
        outputs.push(std::fs::read(&out_path).unwrap());
    }
    assert_eq!(outputs[0], outputs[1], "same thread count, two runs");
    assert_eq!(outputs[0], outputs[2], "1 thread vs 4 threads");
    assert_eq!(outputs[0], outputs[3], "1 thread vs 8 threads");
    println!(
        "criterion 10 (generation determinism): PASS — {} identical bytes across runs and thread counts",
        outputs[0].len()
    );
}
