//! Channel tensor types and domain transforms.
//!
//! A channel snapshot lives in the port-frequency domain as a complex tensor
//! indexed `[rx][tx][subcarrier]`. Two unitary transforms move it into the
//! domains the statistics extraction works in:
//!
//! * delay domain — IDFT across the subcarrier axis per antenna pair,
//! * beam/angle domain — 2-D DFT across the antenna ports of a uniform
//!   linear array with half-wavelength spacing.
//!
//! Both transforms use 1/√N scaling, so energy is preserved exactly and power
//! bookkeeping downstream stays trivial.

use ndarray::{s, Array2, Array3, Axis};
use num_complex::Complex64;
use rustfft::FftPlanner;
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Antenna and subcarrier counts of a channel tensor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChannelDims {
    pub n_rx: usize,
    pub n_tx: usize,
    pub n_sc: usize,
}

impl ChannelDims {
    pub fn new(n_rx: usize, n_tx: usize, n_sc: usize) -> Result<Self> {
        if n_rx == 0 || n_tx == 0 || n_sc == 0 {
            return Err(Error::InvalidDims(format!(
                "all dimensions must be at least 1, got {n_rx}x{n_tx}x{n_sc}"
            )));
        }
        Ok(Self { n_rx, n_tx, n_sc })
    }

    /// Number of complex entries in one tensor of these dimensions.
    pub fn entries(&self) -> usize {
        self.n_rx * self.n_tx * self.n_sc
    }
}

/// Carrier frequency and subcarrier spacing, both in Hz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CarrierConfig {
    pub carrier_freq_hz: f64,
    pub subcarrier_spacing_hz: f64,
}

impl CarrierConfig {
    pub fn new(carrier_freq_hz: f64, subcarrier_spacing_hz: f64) -> Result<Self> {
        if !(carrier_freq_hz.is_finite() && carrier_freq_hz > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "carrier frequency must be positive, got {carrier_freq_hz}"
            )));
        }
        if !(subcarrier_spacing_hz.is_finite() && subcarrier_spacing_hz > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "subcarrier spacing must be positive, got {subcarrier_spacing_hz}"
            )));
        }
        Ok(Self {
            carrier_freq_hz,
            subcarrier_spacing_hz,
        })
    }
}

/// One frequency-domain MIMO channel snapshot.
///
/// Construction validates shape and finiteness; afterwards the tensor is
/// immutable, so every operation on it is safe to call from multiple threads.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSample {
    dims: ChannelDims,
    carrier: CarrierConfig,
    h_f: Array3<Complex64>,
}

impl ChannelSample {
    pub fn new(dims: ChannelDims, carrier: CarrierConfig, h_f: Array3<Complex64>) -> Result<Self> {
        if h_f.dim() != (dims.n_rx, dims.n_tx, dims.n_sc) {
            return Err(Error::InvalidDims(format!(
                "tensor shape {:?} does not match dims {}x{}x{}",
                h_f.dim(),
                dims.n_rx,
                dims.n_tx,
                dims.n_sc
            )));
        }
        if !h_f.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::NonFinite("frequency-domain channel tensor"));
        }
        Ok(Self { dims, carrier, h_f })
    }

    pub fn dims(&self) -> ChannelDims {
        self.dims
    }

    pub fn carrier(&self) -> CarrierConfig {
        self.carrier
    }

    pub fn h_f(&self) -> &Array3<Complex64> {
        &self.h_f
    }

    /// Total tensor energy Σ|h|².
    pub fn energy(&self) -> f64 {
        self.h_f.iter().map(|z| z.norm_sqr()).sum()
    }
}

/// Delay-domain counterpart of a [`ChannelSample`].
#[derive(Debug, Clone, PartialEq)]
pub struct TimeDomainChannel {
    pub dims: ChannelDims,
    pub carrier: CarrierConfig,
    /// Complex taps indexed `[rx][tx][delay tap]`.
    pub h_t: Array3<Complex64>,
    /// Tap spacing 1/(n_sc · Δf) in seconds.
    pub tap_spacing_s: f64,
}

impl TimeDomainChannel {
    pub fn energy(&self) -> f64 {
        self.h_t.iter().map(|z| z.norm_sqr()).sum()
    }
}

/// Beam-domain counterpart of a [`ChannelSample`].
#[derive(Debug, Clone, PartialEq)]
pub struct AngleDomainChannel {
    pub dims: ChannelDims,
    pub carrier: CarrierConfig,
    /// Complex gains indexed `[rx angle bin][tx angle bin][subcarrier]`.
    pub h_ang: Array3<Complex64>,
    /// Bin center angles in degrees, ascending, one per rx port.
    pub bin_angles_rx: Vec<f64>,
    /// Bin center angles in degrees, ascending, one per tx port.
    pub bin_angles_tx: Vec<f64>,
}

impl AngleDomainChannel {
    pub fn energy(&self) -> f64 {
        self.h_ang.iter().map(|z| z.norm_sqr()).sum()
    }
}

/// A one-dimensional power profile over delay taps or angle bins.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerProfile {
    /// Seconds for delay profiles, degrees for angle spectra.
    pub abscissa: Vec<f64>,
    pub power: Vec<f64>,
}

impl PowerProfile {
    pub fn new(abscissa: Vec<f64>, power: Vec<f64>) -> Result<Self> {
        if abscissa.len() != power.len() {
            return Err(Error::InvalidDims(format!(
                "profile abscissa ({}) and power ({}) lengths differ",
                abscissa.len(),
                power.len()
            )));
        }
        if power.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::NonFinite("power profile"));
        }
        Ok(Self { abscissa, power })
    }

    pub fn total_power(&self) -> f64 {
        self.power.iter().sum()
    }

    pub fn is_all_zero(&self) -> bool {
        !self.power.iter().any(|p| *p > 0.0)
    }
}

/// Which end of the link an angle-domain quantity refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArraySide {
    Tx,
    Rx,
}

/// Signed DFT bin indices in (−n/2, n/2], ordered by ascending angle.
fn signed_bins(n: usize) -> Vec<i64> {
    let half = n as i64 / 2;
    let lo = if n % 2 == 0 { -(half - 1) } else { -half };
    (lo..=half).collect()
}

/// Angle bin centers in degrees for an n-element half-wavelength ULA.
///
/// Bin i maps to arcsin(2·s_i/n) where s_i is the signed DFT index; with
/// half-wavelength spacing every spatial frequency is visible and the angles
/// fall in (−90°, 90°].
pub fn angle_bin_degrees(n: usize) -> Vec<f64> {
    signed_bins(n)
        .into_iter()
        .map(|s_| (2.0 * s_ as f64 / n as f64).asin().to_degrees())
        .collect()
}

/// Array response of an n-element half-wavelength ULA towards `angle_deg`.
///
/// Element u gets phase 2π·0.5·u·sin(angle); element 0 has phase 0 and every
/// entry has unit magnitude.
pub fn steering_vector(n_elems: usize, angle_deg: f64) -> Result<Vec<Complex64>> {
    if n_elems == 0 {
        return Err(Error::InvalidDims("steering vector needs n_elems >= 1".into()));
    }
    if !angle_deg.is_finite() || angle_deg.abs() > 90.0 {
        return Err(Error::InvalidParameter(format!(
            "steering angle {angle_deg} outside [-90, 90] degrees"
        )));
    }
    Ok(steering_vector_unchecked(n_elems, angle_deg))
}

/// Steering vector without the ±90° domain check.
///
/// Angles beyond ±90° alias through sin(θ), which is exactly what a physical
/// ULA does; the synthesis path uses this for wrapped ray angles.
pub(crate) fn steering_vector_unchecked(n_elems: usize, angle_deg: f64) -> Vec<Complex64> {
    let spatial = PI * angle_deg.to_radians().sin();
    (0..n_elems)
        .map(|u| Complex64::from_polar(1.0, spatial * u as f64))
        .collect()
}

/// Unitary beamforming grid for an n-element ULA.
///
/// Column i is the unit-norm steering vector of the i-th angle bin; the
/// matrix is an (index-permuted) unitary DFT matrix, so `G^H G = I` holds to
/// machine precision.
pub fn steering_grid(n: usize) -> Array2<Complex64> {
    let bins = signed_bins(n);
    let norm = 1.0 / (n as f64).sqrt();
    Array2::from_shape_fn((n, n), |(u, i)| {
        Complex64::from_polar(norm, 2.0 * PI * u as f64 * bins[i] as f64 / n as f64)
    })
}

fn adjoint(a: &Array2<Complex64>) -> Array2<Complex64> {
    a.t().mapv(|z| z.conj())
}

/// Unitary DFT/IDFT along the subcarrier axis of every antenna pair.
fn unitary_sc_transform(h: &Array3<Complex64>, inverse: bool) -> Array3<Complex64> {
    let n_sc = h.len_of(Axis(2));
    let mut planner = FftPlanner::new();
    let fft = if inverse {
        planner.plan_fft_inverse(n_sc)
    } else {
        planner.plan_fft_forward(n_sc)
    };
    let scale = 1.0 / (n_sc as f64).sqrt();
    let mut out = h.clone();
    for mut lane in out.lanes_mut(Axis(2)) {
        let buf = lane.as_slice_mut().expect("subcarrier axis is contiguous");
        fft.process(buf);
        for z in buf.iter_mut() {
            *z *= scale;
        }
    }
    out
}

/// Frequency → delay domain via a unitary IDFT along the subcarrier axis.
pub fn to_time_domain(sample: &ChannelSample) -> Result<TimeDomainChannel> {
    let d = sample.dims();
    if d.n_sc < 2 {
        return Err(Error::InvalidDims(
            "delay transform needs at least 2 subcarriers".into(),
        ));
    }
    let h_t = unitary_sc_transform(sample.h_f(), true);
    let tap_spacing_s = 1.0 / (d.n_sc as f64 * sample.carrier().subcarrier_spacing_hz);
    Ok(TimeDomainChannel {
        dims: d,
        carrier: sample.carrier(),
        h_t,
        tap_spacing_s,
    })
}

/// Delay → frequency domain, the exact inverse of [`to_time_domain`].
pub fn to_frequency_domain(t: &TimeDomainChannel) -> Result<ChannelSample> {
    let h_f = unitary_sc_transform(&t.h_t, false);
    ChannelSample::new(t.dims, t.carrier, h_f)
}

/// Port → beam domain: per subcarrier, `H_ang = G_rx^H · H · G_tx`.
pub fn to_angle_domain(sample: &ChannelSample) -> Result<AngleDomainChannel> {
    let d = sample.dims();
    let g_rx_h = adjoint(&steering_grid(d.n_rx));
    let g_tx = steering_grid(d.n_tx);
    let mut h_ang = Array3::zeros((d.n_rx, d.n_tx, d.n_sc));
    for k in 0..d.n_sc {
        let hk = sample.h_f().slice(s![.., .., k]);
        let m = g_rx_h.dot(&hk).dot(&g_tx);
        h_ang.slice_mut(s![.., .., k]).assign(&m);
    }
    Ok(AngleDomainChannel {
        dims: d,
        carrier: sample.carrier(),
        h_ang,
        bin_angles_rx: angle_bin_degrees(d.n_rx),
        bin_angles_tx: angle_bin_degrees(d.n_tx),
    })
}

/// Beam → port domain, the exact inverse of [`to_angle_domain`].
pub fn to_port_domain(a: &AngleDomainChannel) -> Result<ChannelSample> {
    let d = a.dims;
    let g_rx = steering_grid(d.n_rx);
    let g_tx_h = adjoint(&steering_grid(d.n_tx));
    let mut h_f = Array3::zeros((d.n_rx, d.n_tx, d.n_sc));
    for k in 0..d.n_sc {
        let ak = a.h_ang.slice(s![.., .., k]);
        let m = g_rx.dot(&ak).dot(&g_tx_h);
        h_f.slice_mut(s![.., .., k]).assign(&m);
    }
    ChannelSample::new(d, a.carrier, h_f)
}

/// Power delay profile: per tap, |h|² averaged over all antenna pairs.
pub fn power_delay_profile(t: &TimeDomainChannel) -> PowerProfile {
    let (n_rx, n_tx, n_sc) = t.h_t.dim();
    let mut power = vec![0.0; n_sc];
    for u in 0..n_rx {
        for v in 0..n_tx {
            for l in 0..n_sc {
                power[l] += t.h_t[[u, v, l]].norm_sqr();
            }
        }
    }
    let inv_pairs = 1.0 / (n_rx * n_tx) as f64;
    for p in power.iter_mut() {
        *p *= inv_pairs;
    }
    let abscissa = (0..n_sc).map(|l| l as f64 * t.tap_spacing_s).collect();
    PowerProfile { abscissa, power }
}

/// Power angle spectrum of one side: per bin, |h|² summed over the other
/// side's bins and all subcarriers.
pub fn power_angle_spectrum(a: &AngleDomainChannel, side: ArraySide) -> PowerProfile {
    let (n_rx, n_tx, n_sc) = a.h_ang.dim();
    match side {
        ArraySide::Tx => {
            let mut power = vec![0.0; n_tx];
            for i in 0..n_rx {
                for j in 0..n_tx {
                    for k in 0..n_sc {
                        power[j] += a.h_ang[[i, j, k]].norm_sqr();
                    }
                }
            }
            PowerProfile {
                abscissa: a.bin_angles_tx.clone(),
                power,
            }
        }
        ArraySide::Rx => {
            let mut power = vec![0.0; n_rx];
            for i in 0..n_rx {
                for j in 0..n_tx {
                    for k in 0..n_sc {
                        power[i] += a.h_ang[[i, j, k]].norm_sqr();
                    }
                }
            }
            PowerProfile {
                abscissa: a.bin_angles_rx.clone(),
                power,
            }
        }
    }
}
