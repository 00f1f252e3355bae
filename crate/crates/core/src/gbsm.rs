//! Clustered stochastic channel synthesis.
//!
//! A channel snapshot is a sum of clusters, each a bundle of equal-power rays
//! sharing one delay. Per sample the generator draws large-scale parameters
//! (delay spread, angle spreads, K-factor) from the log-normal / normal
//! distributions of an [`LspSet`], draws a Poisson cluster count, then lays
//! out cluster delays, powers and angles:
//!
//! * delays: τ'_n = −r_τ·DS·ln u_n, sorted, minimum subtracted;
//! * powers: exponential decay over delay times per-cluster log-normal
//!   shadowing, normalized to sum 1; under LOS a specular component of
//!   fraction K/(K+1) rides on the first cluster;
//! * angles: Gaussian cluster positions rescaled so the power-weighted
//!   circular spread hits the drawn target exactly, plus Laplacian ray
//!   offsets inside each cluster.
//!
//! Everything is a pure function of `(LspSet, GenConfig, seed, index)`, so
//! samples can be generated in parallel and regenerated individually.

use ndarray::{Array2, Array3};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use rayon::prelude::*;
use std::f64::consts::PI;

use crate::channel::{steering_vector_unchecked, CarrierConfig, ChannelDims, ChannelSample};
use crate::error::{Error, Result};
use crate::extract::{circular_spread_weighted, wrap_deg};
use crate::rng::{sample_stream, TAG_CHANNEL_GEN};

/// Angle spreads above this are clipped when drawn (standard cap).
pub const AS_CAP_DEG: f64 = 104.0;

/// Large-scale parameter set: distribution parameters of one scene.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LspSet {
    /// Mean of log10(delay spread / s).
    pub mu_lg_ds: f64,
    pub sigma_lg_ds: f64,
    /// Mean of log10(departure angle spread / deg).
    pub mu_lg_asd: f64,
    pub sigma_lg_asd: f64,
    /// Mean of log10(arrival angle spread / deg).
    pub mu_lg_asa: f64,
    pub sigma_lg_asa: f64,
    /// K-factor mean in dB.
    pub mu_kf_db: f64,
    pub sigma_kf_db: f64,
    /// Mean cluster count; `None` for parameter sets that do not carry one
    /// (generation requires it, catalog matching skips the dimension).
    pub lambda_clusters: Option<f64>,
    pub los: bool,
}

impl LspSet {
    pub fn validate(&self) -> Result<()> {
        let checks: [(&str, f64, f64, f64); 8] = [
            ("mu_lgDS", self.mu_lg_ds, -9.0, -5.0),
            ("sigma_lgDS", self.sigma_lg_ds, 0.0, f64::INFINITY),
            ("mu_lgASD", self.mu_lg_asd, -1.0, 2.5),
            ("sigma_lgASD", self.sigma_lg_asd, 0.0, f64::INFINITY),
            ("mu_lgASA", self.mu_lg_asa, -1.0, 2.5),
            ("sigma_lgASA", self.sigma_lg_asa, 0.0, f64::INFINITY),
            ("mu_KF", self.mu_kf_db, -10.0, 20.0),
            ("sigma_KF", self.sigma_kf_db, 0.0, 10.0),
        ];
        for (key, value, lo, hi) in checks {
            if !value.is_finite() || value < lo || value > hi {
                return Err(Error::RangeViolation {
                    key: key.to_string(),
                    value,
                    lo,
                    hi,
                });
            }
        }
        if let Some(l) = self.lambda_clusters {
            if !l.is_finite() || l <= 0.0 {
                return Err(Error::RangeViolation {
                    key: "lambda_clusters".to_string(),
                    value: l,
                    lo: f64::MIN_POSITIVE,
                    hi: f64::INFINITY,
                });
            }
        }
        Ok(())
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda_clusters = Some(lambda);
        self
    }
}

/// Generation constants; the defaults are the usual macro-cell values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenConfig {
    pub dims: ChannelDims,
    pub carrier: CarrierConfig,
    pub rays_per_cluster: usize,
    pub delay_scaling_r_tau: f64,
    pub per_cluster_shadowing_std_db: f64,
    pub intra_cluster_as_deg: f64,
    pub min_clusters: usize,
}

impl GenConfig {
    pub fn new(dims: ChannelDims, carrier: CarrierConfig) -> Self {
        Self {
            dims,
            carrier,
            rays_per_cluster: 20,
            delay_scaling_r_tau: 2.5,
            per_cluster_shadowing_std_db: 3.0,
            intra_cluster_as_deg: 5.0,
            min_clusters: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.rays_per_cluster < 1 {
            return Err(Error::InvalidParameter("rays_per_cluster must be >= 1".into()));
        }
        if !(self.delay_scaling_r_tau.is_finite() && self.delay_scaling_r_tau > 1.0) {
            return Err(Error::InvalidParameter(format!(
                "delay_scaling_r_tau must exceed 1, got {}",
                self.delay_scaling_r_tau
            )));
        }
        if self.min_clusters < 1 {
            return Err(Error::InvalidParameter("min_clusters must be >= 1".into()));
        }
        if !(self.per_cluster_shadowing_std_db.is_finite()
            && self.per_cluster_shadowing_std_db >= 0.0)
        {
            return Err(Error::InvalidParameter(
                "per_cluster_shadowing_std_db must be >= 0".into(),
            ));
        }
        if !(self.intra_cluster_as_deg.is_finite() && self.intra_cluster_as_deg >= 0.0) {
            return Err(Error::InvalidParameter(
                "intra_cluster_as_deg must be >= 0".into(),
            ));
        }
        Ok(())
    }
}

/// One drawn cluster: delay, total power fraction, central angles, rays.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterRealization {
    pub delay_s: f64,
    /// Fraction of total snapshot power, specular share included.
    pub power: f64,
    pub aod_deg: f64,
    pub aoa_deg: f64,
    pub ray_aods_deg: Vec<f64>,
    pub ray_aoas_deg: Vec<f64>,
    pub ray_phases_rad: Vec<f64>,
}

/// Per-sample large-scale draw.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LspDraw {
    pub ds_s: f64,
    pub asd_deg: f64,
    pub asa_deg: f64,
    pub kf_db: f64,
    pub kf_linear: f64,
}

/// Full description of one snapshot before rendering to a tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub draw: LspDraw,
    pub los: bool,
    pub clusters: Vec<ClusterRealization>,
    /// Phase of the specular component (LOS only); it rides on the first
    /// cluster's delay and central angles.
    pub specular_phase_rad: Option<f64>,
    pub rays_per_cluster: usize,
}

/// Draw per-sample large-scale parameters from their distributions.
///
/// Delay and angle spreads are log10-normal, the K-factor is normal in dB;
/// angle spreads are clipped at [`AS_CAP_DEG`].
pub fn draw_lsp(params: &LspSet, rng: &mut ChaCha8Rng) -> LspDraw {
    let z_ds: f64 = StandardNormal.sample(rng);
    let z_asd: f64 = StandardNormal.sample(rng);
    let z_asa: f64 = StandardNormal.sample(rng);
    let z_kf: f64 = StandardNormal.sample(rng);
    let ds_s = 10f64.powf(params.mu_lg_ds + params.sigma_lg_ds * z_ds);
    let asd_deg = 10f64.powf(params.mu_lg_asd + params.sigma_lg_asd * z_asd).min(AS_CAP_DEG);
    let asa_deg = 10f64.powf(params.mu_lg_asa + params.sigma_lg_asa * z_asa).min(AS_CAP_DEG);
    let kf_db = params.mu_kf_db + params.sigma_kf_db * z_kf;
    LspDraw {
        ds_s,
        asd_deg,
        asa_deg,
        kf_db,
        kf_linear: 10f64.powf(kf_db / 10.0),
    }
}

/// Poisson cluster count, clamped below at `min_clusters`.
pub fn draw_cluster_count(lambda: f64, min_clusters: usize, rng: &mut ChaCha8Rng) -> Result<usize> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "cluster-count lambda must be positive, got {lambda}"
        )));
    }
    let pois = Poisson::new(lambda)
        .map_err(|e| Error::InvalidParameter(format!("poisson({lambda}): {e}")))?;
    let n = pois.sample(rng) as usize;
    Ok(n.max(min_clusters))
}

/// Cluster delays: scaled exponentials, sorted ascending, minimum at zero.
pub fn gen_delays(n_clusters: usize, ds_s: f64, r_tau: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut delays: Vec<f64> = (0..n_clusters)
        .map(|_| {
            let u: f64 = rng.gen::<f64>();
            -r_tau * ds_s * (1.0 - u).ln()
        })
        .collect();
    delays.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let min = delays[0];
    for d in delays.iter_mut() {
        *d -= min;
    }
    delays[0] = 0.0;
    delays
}

/// Cluster power fractions for the given delays.
///
/// Exponential decay over delay with log-normal per-cluster shadowing,
/// normalized to sum 1. Under LOS the diffuse power is scaled by 1/(K+1) and
/// a specular fraction K/(K+1) is folded into the first cluster.
pub fn gen_powers(
    delays: &[f64],
    ds_s: f64,
    r_tau: f64,
    shadow_std_db: f64,
    kf_linear: f64,
    los: bool,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<f64>> {
    if delays.is_empty() {
        return Err(Error::EmptyInput("cluster delays"));
    }
    if !(ds_s.is_finite() && ds_s > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "delay spread must be positive, got {ds_s}"
        )));
    }
    if los && !(kf_linear.is_finite() && kf_linear > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "LOS generation needs a positive linear K-factor, got {kf_linear}"
        )));
    }
    let mut powers: Vec<f64> = delays
        .iter()
        .map(|&tau| {
            let z: f64 = StandardNormal.sample(rng);
            (-tau * (r_tau - 1.0) / (r_tau * ds_s)).exp()
                * 10f64.powf(-shadow_std_db * z / 10.0)
        })
        .collect();
    let total: f64 = powers.iter().sum();
    for p in powers.iter_mut() {
        *p /= total;
    }
    if los {
        let specular = kf_linear / (kf_linear + 1.0);
        for p in powers.iter_mut() {
            *p /= kf_linear + 1.0;
        }
        powers[0] += specular;
    }
    Ok(powers)
}

/// Rescale raw angles about their power-weighted mean so the circular spread
/// equals `target_deg`. Exact whenever the rescaled set stays inside
/// (−180°, 180°]; for targets near the geometric maximum a bisection on the
/// scale gets as close as the wrap allows.
fn rescale_to_spread(raw: &[f64], powers: &[f64], target_deg: f64) -> Vec<f64> {
    let total: f64 = powers.iter().sum();
    let mean: f64 = raw
        .iter()
        .zip(powers.iter())
        .map(|(a, p)| a * p)
        .sum::<f64>()
        / total;
    let devs: Vec<f64> = raw.iter().map(|a| a - mean).collect();
    let s0 = (devs
        .iter()
        .zip(powers.iter())
        .map(|(d, p)| p * d * d)
        .sum::<f64>()
        / total)
        .sqrt();
    if s0 < 1e-12 {
        return raw.iter().map(|a| wrap_deg(*a)).collect();
    }

    let apply = |scale: f64| -> Vec<f64> {
        devs.iter().map(|d| wrap_deg(mean + scale * d)).collect()
    };
    let direct = target_deg / s0;
    let max_abs = devs
        .iter()
        .map(|d| (mean + direct * d).abs())
        .fold(0.0, f64::max);
    if max_abs <= 180.0 {
        return apply(direct);
    }

    // wrap regime: bisect the scale against the measured circular spread
    let spread_of = |scale: f64| -> f64 {
        circular_spread_weighted(&apply(scale), powers).unwrap_or(0.0)
    };
    let mut hi = direct;
    let mut grow = 0;
    while spread_of(hi) < target_deg && grow < 24 {
        hi *= 2.0;
        grow += 1;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if spread_of(mid) < target_deg {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    apply(hi)
}

fn laplace_sample(scale: f64, rng: &mut ChaCha8Rng) -> f64 {
    let u: f64 = rng.gen::<f64>() - 0.5;
    -scale * u.signum() * (1.0 - 2.0 * u.abs()).max(f64::MIN_POSITIVE).ln()
}

/// Cluster central angles plus per-ray angles for one side of the link.
///
/// Central angles are Gaussian draws rescaled so the power-weighted circular
/// spread of the cluster set equals `as_deg` exactly; a single cluster keeps
/// its raw draw and the spread is carried by the intra-cluster rays alone.
/// Ray angles add Laplacian offsets with rms `intra_as_deg`. Everything is
/// wrapped to (−180°, 180°].
pub fn gen_angles(
    powers: &[f64],
    as_deg: f64,
    intra_as_deg: f64,
    rays_per_cluster: usize,
    rng: &mut ChaCha8Rng,
) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    if powers.is_empty() {
        return Err(Error::EmptyInput("cluster powers"));
    }
    if !(as_deg.is_finite() && as_deg > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "angle spread must be positive, got {as_deg}"
        )));
    }
    let n = powers.len();
    let raw: Vec<f64> = (0..n)
        .map(|_| {
            let z: f64 = StandardNormal.sample(rng);
            as_deg * z
        })
        .collect();
    let cluster_angles = if n >= 2 {
        rescale_to_spread(&raw, powers, as_deg)
    } else {
        raw.iter().map(|a| wrap_deg(*a)).collect()
    };
    // Laplace with rms = intra_as_deg has scale intra/√2
    let b = intra_as_deg / 2f64.sqrt();
    let ray_angles = cluster_angles
        .iter()
        .map(|&c| {
            (0..rays_per_cluster)
                .map(|_| wrap_deg(c + laplace_sample(b, rng)))
                .collect()
        })
        .collect();
    Ok((cluster_angles, ray_angles))
}

/// LOS delay compensation factor.
///
/// The specular component concentrates power at zero delay, which would
/// shrink the measured delay spread below its target; stretching the cluster
/// delays by 1/C_τ(K) compensates. Cluster powers are computed from the
/// unstretched delays.
fn los_delay_compensation(kf_db: f64) -> f64 {
    let k = kf_db;
    let c_tau = 0.7705 - 0.0433 * k + 0.0002 * k * k + 0.000017 * k * k * k;
    c_tau.clamp(0.05, 1.5)
}

/// Draw the full cluster-level description of sample `index`.
pub fn realize_channel(
    params: &LspSet,
    config: &GenConfig,
    seed: u64,
    index: u64,
) -> Result<ChannelRealization> {
    params.validate()?;
    config.validate()?;
    let lambda = params.lambda_clusters.ok_or_else(|| {
        Error::InvalidParameter("generation requires lambda_clusters to be set".into())
    })?;

    let mut rng = sample_stream(seed, index, TAG_CHANNEL_GEN);
    let draw = draw_lsp(params, &mut rng);
    let n = draw_cluster_count(lambda, config.min_clusters, &mut rng)?;
    let delays = gen_delays(n, draw.ds_s, config.delay_scaling_r_tau, &mut rng);
    let powers = gen_powers(
        &delays,
        draw.ds_s,
        config.delay_scaling_r_tau,
        config.per_cluster_shadowing_std_db,
        draw.kf_linear,
        params.los,
        &mut rng,
    )?;
    let (aods, ray_aods) = gen_angles(
        &powers,
        draw.asd_deg,
        config.intra_cluster_as_deg,
        config.rays_per_cluster,
        &mut rng,
    )?;
    let (aoas, ray_aoas) = gen_angles(
        &powers,
        draw.asa_deg,
        config.intra_cluster_as_deg,
        config.rays_per_cluster,
        &mut rng,
    )?;
    let phases: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            (0..config.rays_per_cluster)
                .map(|_| rng.gen::<f64>() * 2.0 * PI)
                .collect()
        })
        .collect();
    let specular_phase_rad = if params.los {
        Some(rng.gen::<f64>() * 2.0 * PI)
    } else {
        None
    };

    let delay_stretch = if params.los {
        1.0 / los_delay_compensation(draw.kf_db)
    } else {
        1.0
    };

    let clusters = (0..n)
        .map(|i| ClusterRealization {
            delay_s: delays[i] * delay_stretch,
            power: powers[i],
            aod_deg: aods[i],
            aoa_deg: aoas[i],
            ray_aods_deg: ray_aods[i].clone(),
            ray_aoas_deg: ray_aoas[i].clone(),
            ray_phases_rad: phases[i].clone(),
        })
        .collect();

    Ok(ChannelRealization {
        draw,
        los: params.los,
        clusters,
        specular_phase_rad,
        rays_per_cluster: config.rays_per_cluster,
    })
}

/// Render a cluster realization to a frequency-domain tensor.
///
/// `H[u][s][k] = Σ_n Σ_m √(P_n/M) · a_rx(aoa)[u] · a_tx(aod)[s]^* · e^{jΦ}
/// · e^{−j2π k Δf τ_n}`, plus the specular component under LOS. Expected
/// per-entry power is 1, so the expected tensor energy is
/// `n_rx · n_tx · n_sc`.
pub fn render_channel(
    realization: &ChannelRealization,
    dims: ChannelDims,
    carrier: CarrierConfig,
) -> Result<ChannelSample> {
    let m = realization.rays_per_cluster as f64;
    let specular_fraction = if realization.los {
        realization.draw.kf_linear / (realization.draw.kf_linear + 1.0)
    } else {
        0.0
    };

    let mut h_f = Array3::<Complex64>::zeros((dims.n_rx, dims.n_tx, dims.n_sc));
    for (ci, cluster) in realization.clusters.iter().enumerate() {
        // per-cluster port matrix, then delay phase per subcarrier
        let mut port = Array2::<Complex64>::zeros((dims.n_rx, dims.n_tx));
        let diffuse = if ci == 0 {
            (cluster.power - specular_fraction).max(0.0)
        } else {
            cluster.power
        };
        let amp = (diffuse / m).sqrt();
        for ray in 0..realization.rays_per_cluster {
            let a_rx = steering_vector_unchecked(dims.n_rx, cluster.ray_aoas_deg[ray]);
            let a_tx = steering_vector_unchecked(dims.n_tx, cluster.ray_aods_deg[ray]);
            let gain = Complex64::from_polar(amp, cluster.ray_phases_rad[ray]);
            for u in 0..dims.n_rx {
                for s_ in 0..dims.n_tx {
                    port[[u, s_]] += gain * a_rx[u] * a_tx[s_].conj();
                }
            }
        }
        if ci == 0 {
            if let Some(phase) = realization.specular_phase_rad {
                let a_rx = steering_vector_unchecked(dims.n_rx, cluster.aoa_deg);
                let a_tx = steering_vector_unchecked(dims.n_tx, cluster.aod_deg);
                let gain = Complex64::from_polar(specular_fraction.sqrt(), phase);
                for u in 0..dims.n_rx {
                    for s_ in 0..dims.n_tx {
                        port[[u, s_]] += gain * a_rx[u] * a_tx[s_].conj();
                    }
                }
            }
        }
        for k in 0..dims.n_sc {
            let delay_phase = Complex64::from_polar(
                1.0,
                -2.0 * PI * k as f64 * carrier.subcarrier_spacing_hz * cluster.delay_s,
            );
            for u in 0..dims.n_rx {
                for s_ in 0..dims.n_tx {
                    h_f[[u, s_, k]] += port[[u, s_]] * delay_phase;
                }
            }
        }
    }
    ChannelSample::new(dims, carrier, h_f)
}

/// Synthesize sample `index` of the stream `seed`.
pub fn synthesize_channel(
    params: &LspSet,
    config: &GenConfig,
    seed: u64,
    index: u64,
) -> Result<ChannelSample> {
    let realization = realize_channel(params, config, seed, index)?;
    render_channel(&realization, config.dims, config.carrier)
}

/// Generate `count` samples; sample i is `synthesize_channel(.., seed, i)`.
pub fn generate_dataset(
    params: &LspSet,
    config: &GenConfig,
    count: usize,
    seed: u64,
) -> Result<Vec<ChannelSample>> {
    if count == 0 {
        return Err(Error::EmptyInput("dataset sample count"));
    }
    (0..count)
        .into_par_iter()
        .map(|i| synthesize_channel(params, config, seed, i as u64))
        .collect()
}
