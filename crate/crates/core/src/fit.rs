//! Distribution fitting, scene-specific parameter building, and the
//! sub-scenario catalog.
//!
//! `build_sscm` is the update step of the whole pipeline: it takes a batch of
//! extracted per-sample statistics and replaces the statistical fields of a
//! baseline parameter set with fitted values, leaving the baseline's flags
//! and generation constants untouched.

use crate::error::{Error, Result};
use crate::extract::{ChannelStats, KF_CAP_DB};
use crate::gbsm::LspSet;

/// Fit a base-10 log-normal: mean and sample standard deviation (n−1) of
/// log10(values).
pub fn fit_lognormal(values: &[f64]) -> Result<(f64, f64)> {
    if values.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: values.len(),
            what: "positive values for a log-normal fit",
        });
    }
    if let Some(bad) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
        return Err(Error::InvalidParameter(format!(
            "log-normal fit requires positive values, got {bad}"
        )));
    }
    let logs: Vec<f64> = values.iter().map(|v| v.log10()).collect();
    Ok(mean_and_sample_std(&logs))
}

fn mean_and_sample_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.max(0.0).sqrt())
}

/// Result of a normal fit over dB values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalDbFit {
    pub mu_db: f64,
    pub sigma_db: f64,
    /// Values at or above [`KF_CAP_DB`] (capped sentinels) or non-finite,
    /// excluded from the fit.
    pub n_excluded: usize,
}

/// Fit a normal distribution over dB values, excluding capped sentinels.
pub fn fit_normal_db(values_db: &[f64]) -> Result<NormalDbFit> {
    let usable: Vec<f64> = values_db
        .iter()
        .cloned()
        .filter(|v| v.is_finite() && *v < KF_CAP_DB)
        .collect();
    let n_excluded = values_db.len() - usable.len();
    if usable.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: usable.len(),
            what: "usable dB values for a normal fit",
        });
    }
    let (mu_db, sigma_db) = mean_and_sample_std(&usable);
    Ok(NormalDbFit {
        mu_db,
        sigma_db,
        n_excluded,
    })
}

/// Poisson maximum-likelihood estimate: the sample mean.
pub fn fit_poisson(counts: &[usize]) -> Result<f64> {
    if counts.is_empty() {
        return Err(Error::EmptyInput("cluster counts"));
    }
    Ok(counts.iter().sum::<usize>() as f64 / counts.len() as f64)
}

/// Options for [`build_sscm`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    /// Below this many records the build still succeeds but is flagged.
    pub min_records: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { min_records: 30 }
    }
}

/// A fitted scene-specific parameter set plus fit diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct SscmBuild {
    pub params: LspSet,
    pub n_records: usize,
    /// Capped K-factor sentinels excluded from the KF fit.
    pub n_kf_excluded: usize,
    /// Non-positive or non-finite spread values dropped before log fitting.
    pub n_dropped: usize,
    /// Set when fewer than `min_records` statistics were supplied.
    pub below_floor: bool,
}

fn positive_values(values: impl Iterator<Item = f64>) -> (Vec<f64>, usize) {
    let mut kept = Vec::new();
    let mut dropped = 0;
    for v in values {
        if v.is_finite() && v > 0.0 {
            kept.push(v);
        } else {
            dropped += 1;
        }
    }
    (kept, dropped)
}

/// Replace the statistical fields of `baseline` with values fitted from a
/// batch of extracted statistics. The LOS flag is retained from the baseline.
pub fn build_sscm(
    stats: &[ChannelStats],
    baseline: &LspSet,
    opts: &FitOptions,
) -> Result<SscmBuild> {
    if stats.is_empty() {
        return Err(Error::EmptyInput("channel statistics batch"));
    }
    let (ds, drop_ds) = positive_values(stats.iter().map(|s| s.ds_s));
    let (asd, drop_asd) = positive_values(stats.iter().map(|s| s.asd_deg));
    let (asa, drop_asa) = positive_values(stats.iter().map(|s| s.asa_deg));
    let n_dropped = drop_ds + drop_asd + drop_asa;

    let (mu_lg_ds, sigma_lg_ds) = fit_lognormal(&ds)?;
    let (mu_lg_asd, sigma_lg_asd) = fit_lognormal(&asd)?;
    let (mu_lg_asa, sigma_lg_asa) = fit_lognormal(&asa)?;
    let kf_values: Vec<f64> = stats.iter().map(|s| s.kf_db).collect();
    let kf = fit_normal_db(&kf_values)?;
    let counts: Vec<usize> = stats.iter().map(|s| s.n_clusters).collect();
    let lambda = fit_poisson(&counts)?;

    let params = LspSet {
        mu_lg_ds,
        sigma_lg_ds,
        mu_lg_asd,
        sigma_lg_asd,
        mu_lg_asa,
        sigma_lg_asa,
        mu_kf_db: kf.mu_db,
        sigma_kf_db: kf.sigma_db,
        lambda_clusters: Some(lambda),
        los: baseline.los,
    };
    params.validate()?;
    Ok(SscmBuild {
        params,
        n_records: stats.len(),
        n_kf_excluded: kf.n_excluded,
        n_dropped,
        below_floor: stats.len() < opts.min_records,
    })
}

/// Names of the built-in baseline parameter sets.
pub const BASELINE_NAMES: [&str; 6] = [
    "uma-los", "uma-nlos", "umi-los", "umi-nlos", "inh-los", "inh-nlos",
];

/// Representative baseline constants per deployment scenario, evaluated at a
/// 2.6 GHz carrier. NLOS entries carry a zero K-factor placeholder; the
/// K-factor fields are unused when generating without a specular component.
pub fn baseline(name: &str) -> Option<LspSet> {
    let set = |mu_ds, s_ds, mu_asd, s_asd, mu_asa, s_asa, mu_kf, s_kf, lambda, los| LspSet {
        mu_lg_ds: mu_ds,
        sigma_lg_ds: s_ds,
        mu_lg_asd: mu_asd,
        sigma_lg_asd: s_asd,
        mu_lg_asa: mu_asa,
        sigma_lg_asa: s_asa,
        mu_kf_db: mu_kf,
        sigma_kf_db: s_kf,
        lambda_clusters: Some(lambda),
        los,
    };
    match name {
        "uma-los" => Some(set(-7.00, 0.66, 1.11, 0.28, 1.81, 0.20, 9.0, 3.5, 12.0, true)),
        "uma-nlos" => Some(set(-6.37, 0.39, 1.45, 0.28, 1.97, 0.11, 0.0, 0.0, 20.0, false)),
        "umi-los" => Some(set(-7.27, 0.38, 1.18, 0.41, 1.68, 0.30, 9.0, 5.0, 12.0, true)),
        "umi-nlos" => Some(set(-6.96, 0.28, 1.40, 0.33, 1.77, 0.29, 0.0, 0.0, 19.0, false)),
        "inh-los" => Some(set(-7.70, 0.18, 1.60, 0.18, 1.67, 0.12, 7.0, 4.0, 15.0, true)),
        "inh-nlos" => Some(set(-7.33, 0.10, 1.62, 0.25, 1.77, 0.16, 0.0, 0.0, 19.0, false)),
        _ => None,
    }
}

/// Number of dimensions of the matching metric.
pub const MATCH_DIMS: usize = 7;

/// Reference spans used to normalize each matching dimension:
/// (mu_lgDS, sigma_lgDS, mu_lgASD, sigma_lgASD, mu_KF, sigma_KF, lambda).
pub const DEFAULT_SCALES: [f64; MATCH_DIMS] = [4.0, 1.5, 3.5, 1.5, 30.0, 10.0, 20.0];

pub const DEFAULT_WEIGHTS: [f64; MATCH_DIMS] = [1.0; MATCH_DIMS];

/// One named entry of a sub-scenario catalog.
#[derive(Debug, Clone, PartialEq)]
pub struct SubScenario {
    pub id: String,
    pub params: LspSet,
    /// (kf, as, cluster) grid position for grid-built catalogs.
    pub grid_index: Option<(usize, usize, usize)>,
}

/// A catalog of sub-scenario parameter sets with a matching metric.
#[derive(Debug, Clone, PartialEq)]
pub struct SubScenarioCatalog {
    pub entries: Vec<SubScenario>,
    /// (m, n, q) when built from a grid.
    pub grid: Option<(usize, usize, usize)>,
    pub weights: [f64; MATCH_DIMS],
    pub scales: [f64; MATCH_DIMS],
}

/// One ranked match.
#[derive(Debug, Clone, PartialEq)]
pub struct CatalogMatch {
    pub rank: usize,
    pub id: String,
    pub distance: f64,
}

/// Weighted normalized squared distance between two parameter sets.
///
/// The lambda dimension only contributes when both sides carry a cluster
/// count.
pub fn param_distance(
    a: &LspSet,
    b: &LspSet,
    weights: &[f64; MATCH_DIMS],
    scales: &[f64; MATCH_DIMS],
) -> f64 {
    let pairs = [
        (a.mu_lg_ds, b.mu_lg_ds),
        (a.sigma_lg_ds, b.sigma_lg_ds),
        (a.mu_lg_asd, b.mu_lg_asd),
        (a.sigma_lg_asd, b.sigma_lg_asd),
        (a.mu_kf_db, b.mu_kf_db),
        (a.sigma_kf_db, b.sigma_kf_db),
    ];
    let mut d = 0.0;
    for (i, (va, vb)) in pairs.iter().enumerate() {
        let t = (va - vb) / scales[i];
        d += weights[i] * t * t;
    }
    if let (Some(la), Some(lb)) = (a.lambda_clusters, b.lambda_clusters) {
        let t = (la - lb) / scales[6];
        d += weights[6] * t * t;
    }
    d
}

impl SubScenarioCatalog {
    pub fn from_entries(entries: Vec<SubScenario>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptyInput("catalog entries"));
        }
        let mut seen = std::collections::HashSet::new();
        for e in &entries {
            if !seen.insert(e.id.clone()) {
                return Err(Error::InvalidParameter(format!(
                    "duplicate catalog entry id \"{}\"",
                    e.id
                )));
            }
        }
        Ok(Self {
            entries,
            grid: None,
            weights: DEFAULT_WEIGHTS,
            scales: DEFAULT_SCALES,
        })
    }

    /// Rank all entries by distance to `query` and return the best `top_k`.
    /// Ties break lexicographically on the entry id.
    pub fn match_query(&self, query: &LspSet, top_k: usize) -> Result<Vec<CatalogMatch>> {
        if self.entries.is_empty() {
            return Err(Error::EmptyInput("catalog entries"));
        }
        if top_k == 0 {
            return Err(Error::InvalidParameter("top_k must be at least 1".into()));
        }
        let mut ranked: Vec<(f64, &SubScenario)> = self
            .entries
            .iter()
            .map(|e| (param_distance(&e.params, query, &self.weights, &self.scales), e))
            .collect();
        ranked.sort_by(|a, b| {
            a.0.partial_cmp(&b.0)
                .unwrap()
                .then_with(|| a.1.id.cmp(&b.1.id))
        });
        Ok(ranked
            .into_iter()
            .take(top_k.min(self.entries.len()))
            .enumerate()
            .map(|(i, (distance, e))| CatalogMatch {
                rank: i + 1,
                id: e.id.clone(),
                distance,
            })
            .collect())
    }
}

/// Build an m·n·q catalog over a (K-factor, angle-spread, cluster-count)
/// grid around a baseline. Grid values land verbatim in the entry params;
/// ids follow `{label}-kf{i}-as{j}-nc{k}`.
pub fn build_catalog(
    kf_grid: &[f64],
    as_grid: &[f64],
    cluster_grid: &[f64],
    baseline: &LspSet,
    label: &str,
) -> Result<SubScenarioCatalog> {
    if kf_grid.is_empty() || as_grid.is_empty() || cluster_grid.is_empty() {
        return Err(Error::EmptyInput("catalog grid"));
    }
    let mut entries = Vec::with_capacity(kf_grid.len() * as_grid.len() * cluster_grid.len());
    for (i, &kf) in kf_grid.iter().enumerate() {
        for (j, &as_mu) in as_grid.iter().enumerate() {
            for (k, &nc) in cluster_grid.iter().enumerate() {
                let mut params = *baseline;
                params.mu_kf_db = kf;
                params.mu_lg_asd = as_mu;
                params.lambda_clusters = Some(nc);
                params.validate()?;
                entries.push(SubScenario {
                    id: format!("{label}-kf{i}-as{j}-nc{k}"),
                    params,
                    grid_index: Some((i, j, k)),
                });
            }
        }
    }
    let grid = Some((kf_grid.len(), as_grid.len(), cluster_grid.len()));
    let mut catalog = SubScenarioCatalog::from_entries(entries)?;
    catalog.grid = grid;
    Ok(catalog)
}
