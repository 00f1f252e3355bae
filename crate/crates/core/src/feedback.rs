//! CSI feedback targets, compression codecs, and SGCS scoring.
//!
//! The feedback target is the rank-1 precoder: per subband, the dominant
//! eigenvector of the accumulated transmit covariance. Two codecs compress
//! it under a bit budget:
//!
//! * a linear eigenbasis codec — project onto the top eigenvectors of the
//!   training covariance and uniformly quantize the coefficients;
//! * a DFT-beam codebook — pick the strongest beams of the array's DFT grid
//!   and quantize per-beam amplitude and phase.
//!
//! Reconstruction quality is the squared generalized cosine similarity
//! |w†ŵ|² / (‖w‖²‖ŵ‖²), averaged over subbands and samples.

use ndarray::{Array1, Array2, ArrayView1};
use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use std::f64::consts::PI;

use crate::channel::{steering_grid, ChannelSample};
use crate::error::{Error, Result};
use crate::rng::{sample_stream, TAG_NOISE_INJECT};

/// Per-subband unit-norm feedback targets of one sample.
#[derive(Debug, Clone, PartialEq)]
pub struct CsiTarget {
    /// Row b is the dominant eigenvector of subband b, `[n_subbands][n_tx]`.
    pub vectors: Array2<Complex64>,
    pub subband_size: usize,
}

impl CsiTarget {
    pub fn n_subbands(&self) -> usize {
        self.vectors.nrows()
    }
}

/// Trained linear compression model.
#[derive(Debug, Clone, PartialEq)]
pub struct CodecModel {
    /// Orthonormal columns, `[n_tx][n_coeff]`.
    pub basis: Array2<Complex64>,
    pub n_coeff: usize,
    pub bits_per_component: usize,
}

impl CodecModel {
    /// Total feedback budget: two quantized reals per retained coefficient.
    pub fn feedback_bits(&self) -> usize {
        2 * self.n_coeff * self.bits_per_component
    }
}

/// DFT-beam codebook configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DftCodebook {
    pub n_beams: usize,
    pub amp_bits: usize,
    pub phase_bits: usize,
}

impl DftCodebook {
    pub fn feedback_bits(&self, n_tx: usize) -> usize {
        let idx_bits = (usize::BITS - (n_tx - 1).leading_zeros()) as usize;
        self.n_beams * (idx_bits + self.amp_bits + self.phase_bits)
    }
}

/// Either codec behind one evaluation interface.
#[derive(Debug, Clone, PartialEq)]
pub enum Codec {
    Linear(CodecModel),
    DftBeam(DftCodebook),
}

/// Evaluation summary over one test dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub mean_sgcs: f64,
    /// Mean SGCS per sample (averaged over its subbands).
    pub per_sample_sgcs: Vec<f64>,
    pub feedback_bits: usize,
    pub train_dataset_id: String,
    pub test_dataset_id: String,
    pub subband_size: usize,
}

/// A plain sequence of bits; `len()` is the exact feedback cost.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitString(Vec<bool>);

impl BitString {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }
}

struct BitWriter(Vec<bool>);

impl BitWriter {
    fn new() -> Self {
        Self(Vec::new())
    }

    fn push_uint(&mut self, value: u64, bits: usize) {
        for i in (0..bits).rev() {
            self.0.push((value >> i) & 1 == 1);
        }
    }

    fn finish(self) -> BitString {
        BitString(self.0)
    }
}

struct BitReader<'a> {
    bits: &'a [bool],
    pos: usize,
}

impl<'a> BitReader<'a> {
    fn new(bits: &'a BitString) -> Self {
        Self { bits: &bits.0, pos: 0 }
    }

    fn read_uint(&mut self, bits: usize) -> u64 {
        let mut v = 0u64;
        for _ in 0..bits {
            v = (v << 1) | self.bits[self.pos] as u64;
            self.pos += 1;
        }
        v
    }
}

fn inner(a: ArrayView1<Complex64>, b: ArrayView1<Complex64>) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

fn norm(v: ArrayView1<Complex64>) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Squared generalized cosine similarity of two nonzero vectors.
pub fn sgcs(w_true: ArrayView1<Complex64>, w_hat: ArrayView1<Complex64>) -> Result<f64> {
    if w_true.len() != w_hat.len() {
        return Err(Error::InvalidDims(format!(
            "vector lengths differ: {} vs {}",
            w_true.len(),
            w_hat.len()
        )));
    }
    let nt = norm(w_true);
    let nh = norm(w_hat);
    if nt == 0.0 || nh == 0.0 {
        return Err(Error::InvalidParameter("sgcs of a zero vector".into()));
    }
    Ok((inner(w_true, w_hat).norm() / (nt * nh)).powi(2))
}

/// Rotate so the first non-negligible entry is real and positive.
fn canonicalize_phase(v: &mut Array1<Complex64>) {
    if let Some(lead) = v.iter().find(|z| z.norm() > 1e-12).copied() {
        let rot = lead.conj() / lead.norm();
        for z in v.iter_mut() {
            *z *= rot;
        }
    }
}

/// Dominant eigenvector of a Hermitian PSD matrix by power iteration.
///
/// Deterministic all-ones start, convergence on the eigenvalue ratio at
/// 1e-9, at most 500 iterations.
pub fn dominant_eigenvector(r: &Array2<Complex64>) -> (f64, Array1<Complex64>) {
    let n = r.nrows();
    let mut v = Array1::from_elem(n, Complex64::new(1.0 / (n as f64).sqrt(), 0.0));
    let mut lambda_prev = 0.0;
    let mut lambda = 0.0;
    for it in 0..500 {
        let w = r.dot(&v);
        let wn = norm(w.view());
        if wn <= 0.0 {
            break;
        }
        // Rayleigh quotient: real for Hermitian PSD input
        lambda = inner(v.view(), w.view()).re;
        v = w.mapv(|z| z / wn);
        if it > 0 && (lambda - lambda_prev).abs() <= 1e-9 * lambda.abs().max(f64::MIN_POSITIVE) {
            break;
        }
        lambda_prev = lambda;
    }
    (lambda, v)
}

/// Per-subband rank-1 feedback targets of one channel snapshot.
///
/// For each subband the transmit covariance `R = Σ_k H_k† H_k` is
/// accumulated and its dominant eigenvector extracted, unit-normalized and
/// phase-canonicalized.
pub fn compute_csi_targets(sample: &ChannelSample, subband_size: usize) -> Result<CsiTarget> {
    let d = sample.dims();
    if subband_size == 0 || d.n_sc % subband_size != 0 {
        return Err(Error::InvalidParameter(format!(
            "subband size {subband_size} does not divide {} subcarriers",
            d.n_sc
        )));
    }
    let n_subbands = d.n_sc / subband_size;
    let h = sample.h_f();
    let mut vectors = Array2::zeros((n_subbands, d.n_tx));
    for b in 0..n_subbands {
        let mut r = Array2::<Complex64>::zeros((d.n_tx, d.n_tx));
        for k in b * subband_size..(b + 1) * subband_size {
            for i in 0..d.n_tx {
                for j in 0..d.n_tx {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for u in 0..d.n_rx {
                        acc += h[[u, i, k]].conj() * h[[u, j, k]];
                    }
                    r[[i, j]] += acc;
                }
            }
        }
        let trace: f64 = (0..d.n_tx).map(|i| r[[i, i]].re).sum();
        if trace <= 0.0 {
            return Err(Error::ZeroSubband { subband: b });
        }
        let (_, mut v) = dominant_eigenvector(&r);
        canonicalize_phase(&mut v);
        let nv = norm(v.view());
        v.mapv_inplace(|z| z / nv);
        vectors.row_mut(b).assign(&v);
    }
    Ok(CsiTarget {
        vectors,
        subband_size,
    })
}

/// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi
/// rotations. Returns eigenvalues descending with matching unit columns.
pub fn hermitian_eigen(matrix: &Array2<Complex64>) -> (Vec<f64>, Array2<Complex64>) {
    let n = matrix.nrows();
    let mut a = matrix.clone();
    let mut v = Array2::<Complex64>::eye(n);
    let fro: f64 = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let tol = 1e-14 * fro.max(1e-300);

    for _sweep in 0..64 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[[p, q]].norm_sqr();
            }
        }
        if off.sqrt() <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[[p, q]];
                if apq.norm() <= tol / (n as f64) {
                    continue;
                }
                let app = a[[p, p]].re;
                let aqq = a[[q, q]].re;
                let phi = apq.arg();
                let theta = 0.5 * (2.0 * apq.norm()).atan2(app - aqq);
                let c = theta.cos();
                let s = theta.sin();
                let e_pos = Complex64::from_polar(1.0, phi);
                let e_neg = e_pos.conj();

                // columns: A <- A·U with U = [[c, -s·e^{jφ}], [s·e^{-jφ}, c]]
                for i in 0..n {
                    let aip = a[[i, p]];
                    let aiq = a[[i, q]];
                    a[[i, p]] = aip * c + aiq * (s * e_neg);
                    a[[i, q]] = aip * (-s * e_pos) + aiq * c;
                }
                // rows: A <- U^H·A
                for j in 0..n {
                    let apj = a[[p, j]];
                    let aqj = a[[q, j]];
                    a[[p, j]] = apj * c + aqj * (s * e_pos);
                    a[[q, j]] = apj * (-s * e_neg) + aqj * c;
                }
                for i in 0..n {
                    let vip = v[[i, p]];
                    let viq = v[[i, q]];
                    v[[i, p]] = vip * c + viq * (s * e_neg);
                    v[[i, q]] = vip * (-s * e_pos) + viq * c;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| a[[i, i]].re).collect();
    order.sort_by(|&i, &j| diag[j].partial_cmp(&diag[i]).unwrap());
    let values = order.iter().map(|&i| diag[i]).collect();
    let mut vectors = Array2::zeros((n, n));
    for (dst, &src) in order.iter().enumerate() {
        let mut col = v.column(src).to_owned();
        canonicalize_phase(&mut col);
        vectors.column_mut(dst).assign(&col);
    }
    (values, vectors)
}

/// Train the linear codec: the basis is the top-`n_coeff` eigenvectors of
/// the training rows' sample covariance.
pub fn train_linear_codec(
    train_targets: &[CsiTarget],
    n_coeff: usize,
    bits_per_component: usize,
) -> Result<CodecModel> {
    if train_targets.is_empty() {
        return Err(Error::EmptyInput("training targets"));
    }
    let n_tx = train_targets[0].vectors.ncols();
    if n_coeff == 0 || n_coeff > n_tx {
        return Err(Error::InvalidParameter(format!(
            "n_coeff {n_coeff} outside 1..={n_tx}"
        )));
    }
    if bits_per_component == 0 || bits_per_component > 32 {
        return Err(Error::InvalidParameter(format!(
            "bits_per_component {bits_per_component} outside 1..=32"
        )));
    }
    let n_rows: usize = train_targets.iter().map(|t| t.n_subbands()).sum();
    if n_rows < n_tx {
        return Err(Error::InsufficientData {
            needed: n_tx,
            got: n_rows,
            what: "training vectors",
        });
    }
    let mut cov = Array2::<Complex64>::zeros((n_tx, n_tx));
    for target in train_targets {
        if target.vectors.ncols() != n_tx {
            return Err(Error::InvalidDims(
                "training targets have inconsistent port counts".into(),
            ));
        }
        for row in target.vectors.rows() {
            for i in 0..n_tx {
                for j in 0..n_tx {
                    cov[[i, j]] += row[i] * row[j].conj();
                }
            }
        }
    }
    let (_, vectors) = hermitian_eigen(&cov);
    let basis = vectors.slice(ndarray::s![.., ..n_coeff]).to_owned();
    Ok(CodecModel {
        basis,
        n_coeff,
        bits_per_component,
    })
}

fn quantize_unit_interval(x: f64, bits: usize) -> u64 {
    let levels = (1u64 << bits) - 1;
    let u = x.clamp(0.0, 1.0);
    (u * levels as f64).round() as u64
}

fn dequantize_unit_interval(q: u64, bits: usize) -> f64 {
    let levels = (1u64 << bits) - 1;
    q as f64 / levels as f64
}

/// Mid-tread level count for signed components: zero is always a level, so
/// near-zero coefficients quantize to exactly zero. Even level budgets
/// sacrifice one code point for this; one bit keeps its two levels ±1.
fn signed_levels(bits: usize) -> u64 {
    ((1u64 << bits) - 1).max(2)
}

fn quantize_signed_unit(x: f64, bits: usize) -> u64 {
    let steps = signed_levels(bits) - 1;
    let u = ((x + 1.0) / 2.0).clamp(0.0, 1.0);
    (u * steps as f64).round() as u64
}

fn dequantize_signed_unit(q: u64, bits: usize) -> f64 {
    let steps = signed_levels(bits) - 1;
    2.0 * q as f64 / steps as f64 - 1.0
}

/// Compress one unit-norm vector to exactly `feedback_bits()` bits.
///
/// Coefficients `c = B†w` have magnitude at most 1; real and imaginary parts
/// are uniformly quantized over [−1, 1] with clamping, on a mid-tread grid
/// so that zero is representable.
pub fn encode(model: &CodecModel, w: ArrayView1<Complex64>) -> Result<BitString> {
    if w.len() != model.basis.nrows() {
        return Err(Error::InvalidDims(format!(
            "vector length {} does not match basis ports {}",
            w.len(),
            model.basis.nrows()
        )));
    }
    let mut writer = BitWriter::new();
    for col in model.basis.columns() {
        let c = inner(col, w);
        for x in [c.re, c.im] {
            let q = quantize_signed_unit(x, model.bits_per_component);
            writer.push_uint(q, model.bits_per_component);
        }
    }
    Ok(writer.finish())
}

/// Reconstruct a unit-norm vector from an encoded bitstring.
///
/// A codeword whose coefficients all quantized to zero reconstructs the
/// leading basis column, the training set's dominant direction.
pub fn decode(model: &CodecModel, bits: &BitString) -> Result<Array1<Complex64>> {
    let expected = model.feedback_bits();
    if bits.len() != expected {
        return Err(Error::BitLengthMismatch {
            expected,
            got: bits.len(),
        });
    }
    let mut reader = BitReader::new(bits);
    let mut coeffs = Array1::zeros(model.n_coeff);
    for c in coeffs.iter_mut() {
        let re = dequantize_signed_unit(
            reader.read_uint(model.bits_per_component),
            model.bits_per_component,
        );
        let im = dequantize_signed_unit(
            reader.read_uint(model.bits_per_component),
            model.bits_per_component,
        );
        *c = Complex64::new(re, im);
    }
    let mut w = model.basis.dot(&coeffs);
    let n = norm(w.view());
    if n > 0.0 {
        w.mapv_inplace(|z| z / n);
    } else {
        w = model.basis.column(0).to_owned();
    }
    Ok(w)
}

/// Compress with the DFT-beam codebook: strongest beams of the array's DFT
/// grid, each with quantized amplitude and phase.
pub fn dft_codebook_encode(
    codebook: &DftCodebook,
    w: ArrayView1<Complex64>,
) -> Result<BitString> {
    let n_tx = w.len();
    if codebook.n_beams == 0 || codebook.n_beams > n_tx {
        return Err(Error::InvalidParameter(format!(
            "n_beams {} outside 1..={n_tx}",
            codebook.n_beams
        )));
    }
    if codebook.amp_bits == 0 || codebook.phase_bits == 0 {
        return Err(Error::InvalidParameter(
            "amp_bits and phase_bits must be at least 1".into(),
        ));
    }
    let grid = steering_grid(n_tx);
    let mut scored: Vec<(usize, Complex64)> = grid
        .columns()
        .into_iter()
        .enumerate()
        .map(|(i, g)| (i, inner(g, w)))
        .collect();
    scored.sort_by(|a, b| {
        b.1.norm()
            .partial_cmp(&a.1.norm())
            .unwrap()
            .then_with(|| a.0.cmp(&b.0))
    });
    let idx_bits = (usize::BITS - (n_tx - 1).leading_zeros()) as usize;
    let mut writer = BitWriter::new();
    for &(beam, c) in scored.iter().take(codebook.n_beams) {
        writer.push_uint(beam as u64, idx_bits);
        writer.push_uint(quantize_unit_interval(c.norm(), codebook.amp_bits), codebook.amp_bits);
        let phase_u = (c.arg() + PI) / (2.0 * PI);
        writer.push_uint(
            quantize_unit_interval(phase_u, codebook.phase_bits),
            codebook.phase_bits,
        );
    }
    Ok(writer.finish())
}

/// Reconstruct from a DFT-beam bitstring.
pub fn dft_codebook_decode(
    codebook: &DftCodebook,
    n_tx: usize,
    bits: &BitString,
) -> Result<Array1<Complex64>> {
    let expected = codebook.feedback_bits(n_tx);
    if bits.len() != expected {
        return Err(Error::BitLengthMismatch {
            expected,
            got: bits.len(),
        });
    }
    let grid = steering_grid(n_tx);
    let idx_bits = (usize::BITS - (n_tx - 1).leading_zeros()) as usize;
    let mut reader = BitReader::new(bits);
    let mut w = Array1::<Complex64>::zeros(n_tx);
    let mut first_beam: Option<usize> = None;
    for _ in 0..codebook.n_beams {
        let beam = reader.read_uint(idx_bits) as usize;
        if beam >= n_tx {
            return Err(Error::InvalidParameter(format!(
                "beam index {beam} outside 0..{n_tx}"
            )));
        }
        let amp = dequantize_unit_interval(reader.read_uint(codebook.amp_bits), codebook.amp_bits);
        let phase =
            dequantize_unit_interval(reader.read_uint(codebook.phase_bits), codebook.phase_bits)
                * 2.0
                * PI
                - PI;
        let gain = Complex64::from_polar(amp, phase);
        for (wi, gi) in w.iter_mut().zip(grid.column(beam).iter()) {
            *wi += gain * gi;
        }
        if first_beam.is_none() {
            first_beam = Some(beam);
        }
    }
    let n = norm(w.view());
    if n > 0.0 {
        w.mapv_inplace(|z| z / n);
    } else {
        // all amplitudes quantized to zero: fall back to the strongest beam
        w.assign(&grid.column(first_beam.unwrap_or(0)));
    }
    Ok(w)
}

/// Additive circular complex Gaussian augmentation at a fixed per-sample SNR.
///
/// Sample i gets noise with expected total energy `energy(x_i) / 10^(snr/10)`
/// from its own `(seed, i)` stream.
pub fn noise_inject(
    samples: &[ChannelSample],
    snr_db: f64,
    seed: u64,
) -> Result<Vec<ChannelSample>> {
    if !snr_db.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "snr_db must be finite, got {snr_db}"
        )));
    }
    samples
        .par_iter()
        .enumerate()
        .map(|(i, sample)| {
            let mut rng = sample_stream(seed, i as u64, TAG_NOISE_INJECT);
            let dims = sample.dims();
            let per_entry_var =
                sample.energy() / 10f64.powf(snr_db / 10.0) / dims.entries() as f64;
            let sigma = (per_entry_var / 2.0).sqrt();
            let mut h = sample.h_f().clone();
            for z in h.iter_mut() {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                *z += Complex64::new(sigma * re, sigma * im);
            }
            ChannelSample::new(dims, sample.carrier(), h)
        })
        .collect()
}

fn codec_roundtrip(codec: &Codec, w: ArrayView1<Complex64>) -> Result<Array1<Complex64>> {
    match codec {
        Codec::Linear(model) => decode(model, &encode(model, w)?),
        Codec::DftBeam(cb) => dft_codebook_decode(cb, w.len(), &dft_codebook_encode(cb, w)?),
    }
}

/// Evaluate one codec over a test dataset: encode/decode every subband
/// target and average the SGCS.
pub fn evaluate(
    codec: &Codec,
    test_dataset: &[ChannelSample],
    subband_size: usize,
    train_dataset_id: &str,
    test_dataset_id: &str,
) -> Result<EvalReport> {
    if test_dataset.is_empty() {
        return Err(Error::EmptyInput("test dataset"));
    }
    let n_tx = test_dataset[0].dims().n_tx;
    if let Codec::Linear(model) = codec {
        if model.basis.nrows() != n_tx {
            return Err(Error::InvalidDims(format!(
                "codec trained for {} ports, dataset has {n_tx}",
                model.basis.nrows()
            )));
        }
    }
    let per_sample_sgcs: Vec<f64> = test_dataset
        .par_iter()
        .map(|sample| -> Result<f64> {
            if sample.dims().n_tx != n_tx {
                return Err(Error::InvalidDims(
                    "test dataset has inconsistent port counts".into(),
                ));
            }
            let target = compute_csi_targets(sample, subband_size)?;
            let mut acc = 0.0;
            for row in target.vectors.rows() {
                let w_hat = codec_roundtrip(codec, row)?;
                acc += sgcs(row, w_hat.view())?;
            }
            Ok(acc / target.n_subbands() as f64)
        })
        .collect::<Result<Vec<f64>>>()?;
    let mean_sgcs = per_sample_sgcs.iter().sum::<f64>() / per_sample_sgcs.len() as f64;
    let feedback_bits = match codec {
        Codec::Linear(model) => model.feedback_bits(),
        Codec::DftBeam(cb) => cb.feedback_bits(n_tx),
    };
    Ok(EvalReport {
        mean_sgcs,
        per_sample_sgcs,
        feedback_bits,
        train_dataset_id: train_dataset_id.to_string(),
        test_dataset_id: test_dataset_id.to_string(),
        subband_size,
    })
}
