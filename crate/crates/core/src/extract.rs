//! Per-sample channel statistics: delay spread, angle spreads, Ricean
//! K-factor, and cluster count.
//!
//! All estimators share the same preprocessing: transform, form a power
//! profile, zero everything more than `pdp_threshold_db` below the strongest
//! entry, then reduce. The threshold keeps sidelobe tails and numerical dust
//! out of the second moments.

use rayon::prelude::*;

use crate::channel::{
    power_angle_spectrum, power_delay_profile, to_angle_domain, to_time_domain, ArraySide,
    ChannelSample, PowerProfile,
};
use crate::error::{Error, Result};

/// K-factor reported when only one delay tap survives thresholding.
pub const KF_CAP_DB: f64 = 40.0;

/// Extraction tuning knobs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtractConfig {
    /// Entries more than this many dB below the profile peak are zeroed.
    pub pdp_threshold_db: f64,
    /// Surviving taps further apart than this start a new cluster group.
    pub cluster_gap_taps: usize,
    /// Separate threshold for the angle spectra; `None` shares
    /// `pdp_threshold_db`. Delay profiles want a deep cut to keep weak
    /// multipath, while angle spectra want a shallow one that rejects beam
    /// sidelobes (first sidelobe of a uniform array sits near −13 dB), so
    /// the two jobs can need different depths.
    pub angle_threshold_db: Option<f64>,
}

impl Default for ExtractConfig {
    fn default() -> Self {
        Self {
            pdp_threshold_db: 25.0,
            cluster_gap_taps: 2,
            angle_threshold_db: None,
        }
    }
}

impl ExtractConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.pdp_threshold_db.is_finite() && self.pdp_threshold_db > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "pdp_threshold_db must be positive, got {}",
                self.pdp_threshold_db
            )));
        }
        if let Some(t) = self.angle_threshold_db {
            if !(t.is_finite() && t > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "angle_threshold_db must be positive, got {t}"
                )));
            }
        }
        if self.cluster_gap_taps < 1 {
            return Err(Error::InvalidParameter(
                "cluster_gap_taps must be at least 1".into(),
            ));
        }
        Ok(())
    }

    fn effective_angle_threshold_db(&self) -> f64 {
        self.angle_threshold_db.unwrap_or(self.pdp_threshold_db)
    }
}

/// Statistics of one channel snapshot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelStats {
    /// rms delay spread, seconds.
    pub ds_s: f64,
    /// Departure-side circular angle spread, degrees.
    pub asd_deg: f64,
    /// Arrival-side circular angle spread, degrees.
    pub asa_deg: f64,
    /// Ricean K-factor in dB; exactly [`KF_CAP_DB`] when capped.
    pub kf_db: f64,
    pub n_clusters: usize,
}

/// K-factor estimate plus a flag for the single-tap cap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KFactorEstimate {
    pub kf_db: f64,
    pub capped: bool,
}

/// Power-weighted rms spread of a profile, in the abscissa's units.
pub fn rms_spread(profile: &PowerProfile) -> Result<f64> {
    let total = profile.total_power();
    if profile.is_all_zero() || total <= 0.0 {
        return Err(Error::AllZeroProfile);
    }
    let mut m1 = 0.0;
    let mut m2 = 0.0;
    for (x, p) in profile.abscissa.iter().zip(profile.power.iter()) {
        m1 += p * x;
        m2 += p * x * x;
    }
    m1 /= total;
    m2 /= total;
    Ok((m2 - m1 * m1).max(0.0).sqrt())
}

/// Wrap an angle in degrees to (−180°, 180°].
pub fn wrap_deg(x: f64) -> f64 {
    let y = (x + 180.0).rem_euclid(360.0);
    if y == 0.0 {
        180.0
    } else {
        y - 180.0
    }
}

fn spread_at_rotation(points: &[(f64, f64)], total: f64, delta: f64) -> f64 {
    let mut mean = 0.0;
    for &(theta, p) in points {
        mean += p * wrap_deg(theta + delta);
    }
    mean /= total;
    let mut var = 0.0;
    for &(theta, p) in points {
        let dev = wrap_deg(wrap_deg(theta + delta) - mean);
        var += p * dev * dev;
    }
    (var / total).sqrt()
}

/// Wrap-aware circular spread of a set of weighted angles in degrees.
///
/// Minimizes the power-weighted wrapped second moment over a reference
/// rotation Δ, searched on a 1° grid and then refined locally, so antipodal
/// mass near ±180° is measured as narrow rather than wide.
pub fn circular_spread_weighted(angles_deg: &[f64], powers: &[f64]) -> Result<f64> {
    if angles_deg.len() != powers.len() {
        return Err(Error::InvalidDims(format!(
            "angle ({}) and power ({}) lengths differ",
            angles_deg.len(),
            powers.len()
        )));
    }
    let points: Vec<(f64, f64)> = angles_deg
        .iter()
        .zip(powers.iter())
        .filter(|(_, p)| **p > 0.0)
        .map(|(a, p)| (*a, *p))
        .collect();
    let total: f64 = points.iter().map(|(_, p)| p).sum();
    if points.is_empty() || total <= 0.0 {
        return Err(Error::AllZeroProfile);
    }

    let mut best = f64::INFINITY;
    let mut best_delta = 0.0;
    for step in 0..360 {
        let delta = step as f64;
        let s = spread_at_rotation(&points, total, delta);
        if s < best {
            best = s;
            best_delta = delta;
        }
    }
    // two local refinement passes around the best grid point
    let mut span: f64 = 1.0;
    let mut step: f64 = 0.01;
    for _ in 0..2 {
        let center = best_delta;
        let n_steps = (2.0 * span / step).round() as usize;
        for i in 0..=n_steps {
            let delta = center - span + i as f64 * step;
            let s = spread_at_rotation(&points, total, delta);
            if s < best {
                best = s;
                best_delta = delta;
            }
        }
        span = step;
        step /= 100.0;
    }
    Ok(best)
}

/// Circular spread of a [`PowerProfile`] whose abscissa is in degrees.
pub fn circular_spread(profile: &PowerProfile) -> Result<f64> {
    circular_spread_weighted(&profile.abscissa, &profile.power)
}

/// Zero out every entry more than `threshold_db` below the peak.
pub fn threshold_powers(power: &[f64], threshold_db: f64) -> Vec<f64> {
    let peak = power.iter().cloned().fold(0.0, f64::max);
    if peak <= 0.0 {
        return vec![0.0; power.len()];
    }
    let cut = peak * 10f64.powf(-threshold_db / 10.0);
    power
        .iter()
        .map(|&p| if p >= cut { p } else { 0.0 })
        .collect()
}

/// Group surviving (positive) entries by index gap and count the groups.
pub fn count_tap_groups(power: &[f64], gap_taps: usize) -> usize {
    let mut groups = 0;
    let mut prev: Option<usize> = None;
    for (idx, &p) in power.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        match prev {
            Some(last) if idx - last <= gap_taps => {}
            _ => groups += 1,
        }
        prev = Some(idx);
    }
    groups
}

fn thresholded_pdp(sample: &ChannelSample, cfg: &ExtractConfig) -> Result<PowerProfile> {
    cfg.validate()?;
    let pdp = power_delay_profile(&to_time_domain(sample)?);
    if pdp.is_all_zero() {
        return Err(Error::AllZeroChannel);
    }
    Ok(PowerProfile {
        power: threshold_powers(&pdp.power, cfg.pdp_threshold_db),
        abscissa: pdp.abscissa,
    })
}

/// rms delay spread of the thresholded power delay profile, seconds.
pub fn extract_delay_spread(sample: &ChannelSample, cfg: &ExtractConfig) -> Result<f64> {
    rms_spread(&thresholded_pdp(sample, cfg)?)
}

/// Circular angle spread of the thresholded power angle spectrum, degrees.
pub fn extract_angle_spread(
    sample: &ChannelSample,
    side: ArraySide,
    cfg: &ExtractConfig,
) -> Result<f64> {
    cfg.validate()?;
    let pas = power_angle_spectrum(&to_angle_domain(sample)?, side);
    if pas.is_all_zero() {
        return Err(Error::AllZeroChannel);
    }
    circular_spread(&PowerProfile {
        power: threshold_powers(&pas.power, cfg.effective_angle_threshold_db()),
        abscissa: pas.abscissa,
    })
}

fn k_factor_of_pdp(power: &[f64]) -> KFactorEstimate {
    let surviving: Vec<f64> = power.iter().cloned().filter(|p| *p > 0.0).collect();
    if surviving.len() < 2 {
        return KFactorEstimate {
            kf_db: KF_CAP_DB,
            capped: true,
        };
    }
    let peak = surviving.iter().cloned().fold(0.0, f64::max);
    let rest: f64 = surviving.iter().sum::<f64>() - peak;
    let kf_db = 10.0 * (peak / rest).log10();
    if kf_db >= KF_CAP_DB {
        KFactorEstimate {
            kf_db: KF_CAP_DB,
            capped: true,
        }
    } else {
        KFactorEstimate { kf_db, capped: false }
    }
}

/// Ricean K-factor: strongest surviving tap over the sum of the others.
///
/// A single surviving tap (or a vanishing residual) reports the capped value
/// [`KF_CAP_DB`] with `capped` set.
pub fn extract_k_factor(sample: &ChannelSample, cfg: &ExtractConfig) -> Result<KFactorEstimate> {
    let pdp = thresholded_pdp(sample, cfg)?;
    Ok(k_factor_of_pdp(&pdp.power))
}

/// Number of tap groups in the thresholded power delay profile.
pub fn count_clusters(sample: &ChannelSample, cfg: &ExtractConfig) -> Result<usize> {
    let pdp = thresholded_pdp(sample, cfg)?;
    Ok(count_tap_groups(&pdp.power, cfg.cluster_gap_taps))
}

/// Extract all statistics of one sample in a single pass over the profiles.
pub fn extract_stats(sample: &ChannelSample, cfg: &ExtractConfig) -> Result<ChannelStats> {
    let pdp = thresholded_pdp(sample, cfg)?;
    let ds_s = rms_spread(&pdp)?;
    let kf = k_factor_of_pdp(&pdp.power);
    let n_clusters = count_tap_groups(&pdp.power, cfg.cluster_gap_taps);

    let ang = to_angle_domain(sample)?;
    let pas_tx = power_angle_spectrum(&ang, ArraySide::Tx);
    let pas_rx = power_angle_spectrum(&ang, ArraySide::Rx);
    if pas_tx.is_all_zero() || pas_rx.is_all_zero() {
        return Err(Error::AllZeroChannel);
    }
    let angle_threshold = cfg.effective_angle_threshold_db();
    let asd_deg = circular_spread(&PowerProfile {
        power: threshold_powers(&pas_tx.power, angle_threshold),
        abscissa: pas_tx.abscissa,
    })?;
    let asa_deg = circular_spread(&PowerProfile {
        power: threshold_powers(&pas_rx.power, angle_threshold),
        abscissa: pas_rx.abscissa,
    })?;

    Ok(ChannelStats {
        ds_s,
        asd_deg,
        asa_deg,
        kf_db: kf.kf_db,
        n_clusters,
    })
}

/// Extract statistics for a whole batch, in parallel over samples.
pub fn extract_stats_batch(
    samples: &[ChannelSample],
    cfg: &ExtractConfig,
) -> Result<Vec<ChannelStats>> {
    samples
        .par_iter()
        .map(|s| extract_stats(s, cfg))
        .collect()
}
