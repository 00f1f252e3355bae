//! Extraction-bias calibration sweep.
//!
//! Generates batches from a known parameter set across measurement
//! bandwidths and threshold depths, then reports how well the fitted
//! parameters recover the truth. The numbers back the tolerances and the
//! round-trip test configuration.
//!
//! Run with: cargo run --release -p sscm-core --example calibration

use sscm_core::channel::{CarrierConfig, ChannelDims};
use sscm_core::extract::{extract_stats_batch, ExtractConfig};
use sscm_core::fit::{baseline, build_sscm, FitOptions};
use sscm_core::gbsm::{generate_dataset, GenConfig, LspSet};

fn set_b() -> LspSet {
    LspSet {
        mu_lg_ds: -6.8,
        sigma_lg_ds: 0.675,
        mu_lg_asd: 0.7,
        sigma_lg_asd: 0.25,
        mu_lg_asa: 0.7,
        sigma_lg_asa: 0.25,
        mu_kf_db: 8.0,
        sigma_kf_db: 3.0,
        lambda_clusters: Some(10.0),
        los: true,
    }
}

fn sweep(params: &LspSet, label: &str, count: usize, seed: u64, thresholds: &[f64]) {
    let dims = ChannelDims::new(4, 8, 208).unwrap();
    println!("--- {label} ({count} samples, seed {seed}) ---");
    println!(
        "{:>9} {:>5} {:>5} | {:>8} {:>9} {:>8} {:>9} {:>8} {:>7} {:>7}",
        "scs", "pdp", "ang", "mu_lgDS", "sig_lgDS", "mu_lgASD", "sig_lgASD", "mu_KF", "lambda", "capped"
    );
    for scs in [250e3] {
        let carrier = CarrierConfig::new(2.6e9, scs).unwrap();
        let config = GenConfig::new(dims, carrier);
        let samples = generate_dataset(params, &config, count, seed).unwrap();
        for &pdp in thresholds {
            let cfg = ExtractConfig {
                pdp_threshold_db: pdp,
                cluster_gap_taps: 2,
                angle_threshold_db: Some(12.0),
            };
            let stats = extract_stats_batch(&samples, &cfg).unwrap();
            match build_sscm(&stats, &baseline("uma-los").unwrap(), &FitOptions::default()) {
                Ok(build) => {
                    let p = build.params;
                    println!(
                        "{:>9.0} {:>5.0} {:>5.0} | {:>8.3} {:>9.3} {:>8.3} {:>9.3} {:>8.2} {:>7.2} {:>7}",
                        scs,
                        pdp,
                        12.0,
                        p.mu_lg_ds,
                        p.sigma_lg_ds,
                        p.mu_lg_asd,
                        p.sigma_lg_asd,
                        p.mu_kf_db,
                        p.lambda_clusters.unwrap(),
                        build.n_kf_excluded
                    );
                }
                Err(e) => {
                    // fits can fail wholesale at hopeless resolutions
                    println!("{scs:>9.0} {pdp:>5.0} | fit failed: {e}");
                }
            }
        }
    }
}

fn main() {
    println!("truth: mu_lgDS=-6.8 sigma_lgDS=0.675 mu_lgASD=0.7 mu_KF=8 lambda=10");
    sweep(&set_b(), "set B", 2000, 7, &[22.0, 25.0, 28.0, 30.0, 32.0]);

    let mut frozen = set_b();
    frozen.sigma_kf_db = 0.0;
    sweep(&frozen, "set B with sigma_KF = 0", 2000, 7, &[25.0, 30.0]);

    let mut degenerate = set_b();
    degenerate.sigma_lg_ds = 0.0;
    degenerate.sigma_lg_asd = 0.0;
    degenerate.sigma_lg_asa = 0.0;
    degenerate.sigma_kf_db = 0.0;
    sweep(&degenerate, "set B with all sigmas = 0", 2000, 7, &[25.0, 30.0]);
}
