//! Persistence formats: binary dataset files, key=value parameter files,
//! the 8-byte quantized statistics report, and the statistics CSV.
//!
//! All binary layouts are little endian by construction (`to_le_bytes` /
//! `from_le_bytes`), never by assumption about the host.

use std::fs;
use std::path::Path;

use ndarray::Array3;
use num_complex::Complex64;

use crate::channel::{CarrierConfig, ChannelDims, ChannelSample};
use crate::error::{Error, Result};
use crate::extract::ChannelStats;
use crate::feedback::EvalReport;
use crate::gbsm::LspSet;

/// Dataset file magic.
pub const DATASET_MAGIC: [u8; 4] = *b"CSDS";
pub const DATASET_VERSION: u16 = 1;

/// Header layout: magic(4) version(2) count(4) n_rx(4) n_tx(4) n_sc(4)
/// carrier_freq(8) subcarrier_spacing(8).
pub const DATASET_HEADER_BYTES: usize = 38;

/// Bytes per complex payload entry: (re, im) as f32 pairs.
const ENTRY_BYTES: u64 = 8;

/// Serialize a homogeneous batch of samples.
///
/// Payload entries are f32 (re, im) pairs, subcarrier index fastest, then
/// tx, then rx. The round trip is byte-exact on the f32-truncated values.
pub fn write_dataset(path: &Path, samples: &[ChannelSample]) -> Result<()> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("dataset samples"));
    }
    let dims = samples[0].dims();
    let carrier = samples[0].carrier();
    for s in samples.iter().skip(1) {
        if s.dims() != dims {
            return Err(Error::InvalidDims(
                "dataset samples have inconsistent dimensions".into(),
            ));
        }
        if s.carrier() != carrier {
            return Err(Error::InvalidDims(
                "dataset samples have inconsistent carrier configs".into(),
            ));
        }
    }
    let payload = samples.len() as u64 * dims.entries() as u64 * ENTRY_BYTES;
    let mut buf = Vec::with_capacity(DATASET_HEADER_BYTES + payload as usize);
    buf.extend_from_slice(&DATASET_MAGIC);
    buf.extend_from_slice(&DATASET_VERSION.to_le_bytes());
    buf.extend_from_slice(&(samples.len() as u32).to_le_bytes());
    buf.extend_from_slice(&(dims.n_rx as u32).to_le_bytes());
    buf.extend_from_slice(&(dims.n_tx as u32).to_le_bytes());
    buf.extend_from_slice(&(dims.n_sc as u32).to_le_bytes());
    buf.extend_from_slice(&carrier.carrier_freq_hz.to_le_bytes());
    buf.extend_from_slice(&carrier.subcarrier_spacing_hz.to_le_bytes());
    for s in samples {
        for z in s.h_f().iter() {
            buf.extend_from_slice(&(z.re as f32).to_le_bytes());
            buf.extend_from_slice(&(z.im as f32).to_le_bytes());
        }
    }
    fs::write(path, buf)?;
    Ok(())
}

/// Read a dataset file, validating header fields and the exact byte count.
pub fn read_dataset(path: &Path) -> Result<Vec<ChannelSample>> {
    let bytes = fs::read(path)?;
    if bytes.len() < DATASET_HEADER_BYTES {
        return Err(Error::SizeMismatch {
            expected_bytes: DATASET_HEADER_BYTES as u64,
            actual_bytes: bytes.len() as u64,
        });
    }
    let magic: [u8; 4] = bytes[0..4].try_into().unwrap();
    if magic != DATASET_MAGIC {
        return Err(Error::BadMagic {
            found: magic,
            expected: DATASET_MAGIC,
        });
    }
    let version = u16::from_le_bytes(bytes[4..6].try_into().unwrap());
    if version != DATASET_VERSION {
        return Err(Error::BadVersion {
            found: version,
            expected: DATASET_VERSION,
        });
    }
    let read_u32 =
        |off: usize| u32::from_le_bytes(bytes[off..off + 4].try_into().unwrap()) as usize;
    let count = read_u32(6);
    let n_rx = read_u32(10);
    let n_tx = read_u32(14);
    let n_sc = read_u32(18);
    let carrier_freq = f64::from_le_bytes(bytes[22..30].try_into().unwrap());
    let scs = f64::from_le_bytes(bytes[30..38].try_into().unwrap());

    let dims = ChannelDims::new(n_rx, n_tx, n_sc)?;
    let carrier = CarrierConfig::new(carrier_freq, scs)?;
    if count == 0 {
        return Err(Error::EmptyInput("dataset sample count"));
    }
    let expected_bytes =
        DATASET_HEADER_BYTES as u64 + count as u64 * dims.entries() as u64 * ENTRY_BYTES;
    if bytes.len() as u64 != expected_bytes {
        return Err(Error::SizeMismatch {
            expected_bytes,
            actual_bytes: bytes.len() as u64,
        });
    }

    let mut samples = Vec::with_capacity(count);
    let mut off = DATASET_HEADER_BYTES;
    for _ in 0..count {
        let mut h = Array3::zeros((n_rx, n_tx, n_sc));
        for z in h.iter_mut() {
            let re = f32::from_le_bytes(bytes[off..off + 4].try_into().unwrap());
            let im = f32::from_le_bytes(bytes[off + 4..off + 8].try_into().unwrap());
            *z = Complex64::new(re as f64, im as f64);
            off += 8;
        }
        samples.push(ChannelSample::new(dims, carrier, h)?);
    }
    Ok(samples)
}

const PARAM_KEYS: [&str; 10] = [
    "mu_lgDS",
    "sigma_lgDS",
    "mu_lgASD",
    "sigma_lgASD",
    "mu_lgASA",
    "sigma_lgASA",
    "mu_KF",
    "sigma_KF",
    "lambda_clusters",
    "los",
];

/// Render a parameter set as key=value text. Values use the shortest
/// representation that parses back to the identical f64.
pub fn params_to_string(params: &LspSet) -> String {
    let mut out = String::new();
    out.push_str(&format!("mu_lgDS={}\n", params.mu_lg_ds));
    out.push_str(&format!("sigma_lgDS={}\n", params.sigma_lg_ds));
    out.push_str(&format!("mu_lgASD={}\n", params.mu_lg_asd));
    out.push_str(&format!("sigma_lgASD={}\n", params.sigma_lg_asd));
    out.push_str(&format!("mu_lgASA={}\n", params.mu_lg_asa));
    out.push_str(&format!("sigma_lgASA={}\n", params.sigma_lg_asa));
    out.push_str(&format!("mu_KF={}\n", params.mu_kf_db));
    out.push_str(&format!("sigma_KF={}\n", params.sigma_kf_db));
    if let Some(l) = params.lambda_clusters {
        out.push_str(&format!("lambda_clusters={l}\n"));
    }
    out.push_str(&format!("los={}\n", params.los));
    out
}

/// Parse key=value parameter text. `#` starts a comment; keys are
/// case-sensitive; unknown or duplicate keys are rejected;
/// `lambda_clusters` is the only optional key.
pub fn params_from_str(text: &str) -> Result<LspSet> {
    let mut values: std::collections::HashMap<&str, (f64, bool)> = std::collections::HashMap::new();
    let mut los: Option<bool> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::MalformedLine {
            line: line_no,
            content: raw.to_string(),
        })?;
        let key = key.trim();
        let value = value.trim();
        if !PARAM_KEYS.contains(&key) {
            return Err(Error::UnknownKey {
                key: key.to_string(),
                line: line_no,
            });
        }
        if key == "los" {
            if los.is_some() {
                return Err(Error::DuplicateKey {
                    key: key.to_string(),
                    line: line_no,
                });
            }
            los = Some(match value {
                "true" => true,
                "false" => false,
                _ => {
                    return Err(Error::MalformedLine {
                        line: line_no,
                        content: raw.to_string(),
                    })
                }
            });
            continue;
        }
        let parsed: f64 = value.parse().map_err(|_| Error::MalformedLine {
            line: line_no,
            content: raw.to_string(),
        })?;
        if values.insert(key, (parsed, true)).is_some() {
            return Err(Error::DuplicateKey {
                key: key.to_string(),
                line: line_no,
            });
        }
    }

    let get = |key: &'static str| -> Result<f64> {
        values
            .get(key)
            .map(|(v, _)| *v)
            .ok_or(Error::MissingKey { key })
    };
    let params = LspSet {
        mu_lg_ds: get("mu_lgDS")?,
        sigma_lg_ds: get("sigma_lgDS")?,
        mu_lg_asd: get("mu_lgASD")?,
        sigma_lg_asd: get("sigma_lgASD")?,
        mu_lg_asa: get("mu_lgASA")?,
        sigma_lg_asa: get("sigma_lgASA")?,
        mu_kf_db: get("mu_KF")?,
        sigma_kf_db: get("sigma_KF")?,
        lambda_clusters: values.get("lambda_clusters").map(|(v, _)| *v),
        los: los.ok_or(Error::MissingKey { key: "los" })?,
    };
    params.validate()?;
    Ok(params)
}

pub fn write_params(path: &Path, params: &LspSet) -> Result<()> {
    params.validate()?;
    fs::write(path, params_to_string(params))?;
    Ok(())
}

pub fn read_params(path: &Path) -> Result<LspSet> {
    params_from_str(&fs::read_to_string(path)?)
}

pub const REPORT_VERSION: u8 = 1;
pub const REPORT_LEN: usize = 8;

/// Quantization ranges of the report fields, in field order:
/// mu_lgDS, sigma_lgDS, mu_lgASD, sigma_lgASD, mu_KF, sigma_KF, lambda.
pub const REPORT_RANGES: [(f64, f64); 7] = [
    (-9.0, -5.0),
    (0.0, 1.5),
    (-1.0, 2.5),
    (0.0, 1.5),
    (-10.0, 20.0),
    (0.0, 10.0),
    (0.0, 50.0),
];

const REPORT_FIELD_NAMES: [&str; 7] = [
    "mu_lgDS",
    "sigma_lgDS",
    "mu_lgASD",
    "sigma_lgASD",
    "mu_KF",
    "sigma_KF",
    "lambda_clusters",
];

/// The statistics carried by the 8-byte report (no ASA, no LOS flag).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReportStats {
    pub mu_lg_ds: f64,
    pub sigma_lg_ds: f64,
    pub mu_lg_asd: f64,
    pub sigma_lg_asd: f64,
    pub mu_kf_db: f64,
    pub sigma_kf_db: f64,
    pub lambda_clusters: f64,
}

/// Result of encoding a report: the 8 bytes plus the names of any fields
/// that were clamped into their quantization range.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportEncoding {
    pub bytes: [u8; REPORT_LEN],
    pub clamped: Vec<&'static str>,
}

fn quantize_field(x: f64, lo: f64, hi: f64) -> (u8, bool) {
    let q = ((x - lo) / (hi - lo) * 255.0).round();
    let clamped = !(0.0..=255.0).contains(&q) || x < lo || x > hi;
    (q.clamp(0.0, 255.0) as u8, clamped)
}

/// Quantize a parameter set into the fixed 8-byte report.
///
/// Byte 0 is the version; bytes 1..8 are the seven fields quantized as
/// `round((x − lo)/(hi − lo)·255)` clamped to 0..=255. A missing cluster
/// count encodes as 0 and is flagged as clamped.
pub fn encode_report(params: &LspSet) -> ReportEncoding {
    let lambda_missing = params.lambda_clusters.is_none();
    let fields = [
        params.mu_lg_ds,
        params.sigma_lg_ds,
        params.mu_lg_asd,
        params.sigma_lg_asd,
        params.mu_kf_db,
        params.sigma_kf_db,
        params.lambda_clusters.unwrap_or(0.0),
    ];
    let mut bytes = [0u8; REPORT_LEN];
    bytes[0] = REPORT_VERSION;
    let mut clamp_list = Vec::new();
    for (i, (&x, &(lo, hi))) in fields.iter().zip(REPORT_RANGES.iter()).enumerate() {
        let (q, clamped) = quantize_field(x, lo, hi);
        bytes[i + 1] = q;
        if clamped || (i == 6 && lambda_missing) {
            clamp_list.push(REPORT_FIELD_NAMES[i]);
        }
    }
    ReportEncoding {
        bytes,
        clamped: clamp_list,
    }
}

/// Decode an 8-byte report to grid-point reconstructed field values
/// `lo + q/255·(hi − lo)`; the error per field is at most half a step.
pub fn decode_report(bytes: &[u8]) -> Result<ReportStats> {
    if bytes.len() != REPORT_LEN {
        return Err(Error::SizeMismatch {
            expected_bytes: REPORT_LEN as u64,
            actual_bytes: bytes.len() as u64,
        });
    }
    if bytes[0] != REPORT_VERSION {
        return Err(Error::BadVersion {
            found: bytes[0] as u16,
            expected: REPORT_VERSION as u16,
        });
    }
    let field = |i: usize| -> f64 {
        let (lo, hi) = REPORT_RANGES[i];
        lo + bytes[i + 1] as f64 / 255.0 * (hi - lo)
    };
    Ok(ReportStats {
        mu_lg_ds: field(0),
        sigma_lg_ds: field(1),
        mu_lg_asd: field(2),
        sigma_lg_asd: field(3),
        mu_kf_db: field(4),
        sigma_kf_db: field(5),
        lambda_clusters: field(6),
    })
}

/// Render decoded report fields as parameter-file style text.
pub fn report_stats_to_string(stats: &ReportStats) -> String {
    format!(
        "mu_lgDS={}\nsigma_lgDS={}\nmu_lgASD={}\nsigma_lgASD={}\nmu_KF={}\nsigma_KF={}\nlambda_clusters={}\n",
        stats.mu_lg_ds,
        stats.sigma_lg_ds,
        stats.mu_lg_asd,
        stats.sigma_lg_asd,
        stats.mu_kf_db,
        stats.sigma_kf_db,
        stats.lambda_clusters
    )
}

pub const STATS_CSV_HEADER: &str = "ds_s,asd_deg,asa_deg,kf_db,n_clusters";

pub fn stats_to_csv(stats: &[ChannelStats]) -> String {
    let mut out = String::from(STATS_CSV_HEADER);
    out.push('\n');
    for s in stats {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            s.ds_s, s.asd_deg, s.asa_deg, s.kf_db, s.n_clusters
        ));
    }
    out
}

pub fn stats_from_csv(text: &str) -> Result<Vec<ChannelStats>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == STATS_CSV_HEADER => {}
        Some((_, header)) => {
            return Err(Error::MalformedLine {
                line: 1,
                content: format!("expected header \"{STATS_CSV_HEADER}\", got \"{header}\""),
            })
        }
        None => return Err(Error::EmptyInput("stats csv")),
    }
    let mut stats = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(Error::MalformedLine {
                line: line_no,
                content: line.to_string(),
            });
        }
        let parse = |s: &str| -> Result<f64> {
            s.trim().parse().map_err(|_| Error::MalformedLine {
                line: line_no,
                content: line.to_string(),
            })
        };
        stats.push(ChannelStats {
            ds_s: parse(fields[0])?,
            asd_deg: parse(fields[1])?,
            asa_deg: parse(fields[2])?,
            kf_db: parse(fields[3])?,
            n_clusters: fields[4].trim().parse().map_err(|_| Error::MalformedLine {
                line: line_no,
                content: line.to_string(),
            })?,
        });
    }
    Ok(stats)
}

pub fn write_stats_csv(path: &Path, stats: &[ChannelStats]) -> Result<()> {
    fs::write(path, stats_to_csv(stats))?;
    Ok(())
}

pub fn read_stats_csv(path: &Path) -> Result<Vec<ChannelStats>> {
    stats_from_csv(&fs::read_to_string(path)?)
}

/// Render an evaluation report as a flat key=value block.
pub fn eval_report_to_string(report: &EvalReport, codec_name: &str) -> String {
    format!(
        "codec={}\ntrain_dataset={}\ntest_dataset={}\nsubband_size={}\nn_samples={}\nfeedback_bits={}\nmean_sgcs={}\n",
        codec_name,
        report.train_dataset_id,
        report.test_dataset_id,
        report.subband_size,
        report.per_sample_sgcs.len(),
        report.feedback_bits,
        report.mean_sgcs
    )
}

/// Per-sample SGCS rows for external analysis.
pub fn eval_per_sample_csv(report: &EvalReport) -> String {
    let mut out = String::from("sample,sgcs\n");
    for (i, s) in report.per_sample_sgcs.iter().enumerate() {
        out.push_str(&format!("{i},{s}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gbsm::{generate_dataset, GenConfig};
    use approx::assert_relative_eq;
    use tempfile::TempDir;

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

    #[test]
    fn dataset_round_trip_after_f32_truncation() {
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("x.csds");
        let dims = ChannelDims::new(2, 3, 16).unwrap();
        let carrier = CarrierConfig::new(2.6e9, 15e3).unwrap();
        let config = GenConfig::new(dims, carrier);
        let samples = generate_dataset(&set_b(), &config, 3, 5).unwrap();
        write_dataset(&path, &samples).unwrap();
        let back = read_dataset(&path).unwrap();
        assert_eq!(back.len(), 3);
        for (a, b) in samples.iter().zip(back.iter()) {
            assert_eq!(a.dims(), b.dims());
            for (x, y) in a.h_f().iter().zip(b.h_f().iter()) {
                assert_eq!(x.re as f32, y.re as f32);
                assert_eq!(x.im as f32, y.im as f32);
                assert_eq!(y.re, (x.re as f32) as f64);
            }
        }
        // second write is byte-identical
        let bytes1 = std::fs::read(&path).unwrap();
        write_dataset(&path, &back).unwrap();
        let bytes2 = std::fs::read(&path).unwrap();
        assert_eq!(bytes1, bytes2);
    }

    #[test]
    fn dataset_file_size_formula() {
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("x.csds");
        let dims = ChannelDims::new(4, 8, 208).unwrap();
        let carrier = CarrierConfig::new(2.6e9, 15e3).unwrap();
        let config = GenConfig::new(dims, carrier);
        let samples = generate_dataset(&set_b(), &config, 1, 5).unwrap();
        write_dataset(&path, &samples).unwrap();
        let len = std::fs::metadata(&path).unwrap().len();
        assert_eq!(len, DATASET_HEADER_BYTES as u64 + 4 * 8 * 208 * 8);
    }

    #[test]
    fn dataset_read_rejects_corruption() {
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("x.csds");
        let dims = ChannelDims::new(2, 2, 8).unwrap();
        let carrier = CarrierConfig::new(2.6e9, 15e3).unwrap();
        let config = GenConfig::new(dims, carrier);
        let samples = generate_dataset(&set_b(), &config, 2, 5).unwrap();
        write_dataset(&path, &samples).unwrap();
        let good = std::fs::read(&path).unwrap();

        // truncated payload
        std::fs::write(&path, &good[..good.len() - 5]).unwrap();
        match read_dataset(&path) {
            Err(Error::SizeMismatch {
                expected_bytes,
                actual_bytes,
            }) => {
                assert_eq!(expected_bytes, good.len() as u64);
                assert_eq!(actual_bytes, good.len() as u64 - 5);
            }
            other => panic!("expected size mismatch, got {other:?}"),
        }

        // bad magic
        let mut bad = good.clone();
        bad[0] = b'X';
        std::fs::write(&path, &bad).unwrap();
        assert!(matches!(read_dataset(&path), Err(Error::BadMagic { .. })));

        // bad version
        let mut bad = good.clone();
        bad[4] = 9;
        std::fs::write(&path, &bad).unwrap();
        assert!(matches!(read_dataset(&path), Err(Error::BadVersion { .. })));
    }

    #[test]
    fn params_round_trip_and_validation() {
        let params = set_b();
        let text = params_to_string(&params);
        let back = params_from_str(&text).unwrap();
        assert_eq!(params, back);

        // λ is optional
        let mut no_lambda = params;
        no_lambda.lambda_clusters = None;
        let back = params_from_str(&params_to_string(&no_lambda)).unwrap();
        assert_eq!(back.lambda_clusters, None);

        // comments and blank lines are fine
        let commented = format!("# scene B\n\n{text}");
        assert_eq!(params_from_str(&commented).unwrap(), params);
    }

    #[test]
    fn params_reject_unknown_duplicate_and_out_of_range() {
        let text = params_to_string(&set_b());
        let wrong_case = text.replace("mu_lgDS", "mu_lgds");
        match params_from_str(&wrong_case) {
            Err(Error::UnknownKey { key, .. }) => assert_eq!(key, "mu_lgds"),
            other => panic!("expected unknown key, got {other:?}"),
        }

        let dup = format!("{text}mu_KF=9\n");
        assert!(matches!(
            params_from_str(&dup),
            Err(Error::DuplicateKey { .. })
        ));

        let out_of_range = text.replace("mu_lgDS=-6.8", "mu_lgDS=-4.2");
        match params_from_str(&out_of_range) {
            Err(Error::RangeViolation { key, .. }) => assert_eq!(key, "mu_lgDS"),
            other => panic!("expected range violation, got {other:?}"),
        }

        assert!(matches!(
            params_from_str("mu_lgDS=-6.8\n"),
            Err(Error::MissingKey { .. })
        ));
        assert!(matches!(
            params_from_str("mu_lgDS\n"),
            Err(Error::MalformedLine { .. })
        ));
    }

    #[test]
    fn params_file_io() {
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("b.params");
        write_params(&path, &set_b()).unwrap();
        let back = read_params(&path).unwrap();
        assert_relative_eq!(back.mu_lg_ds, -6.8, epsilon = 1e-15);
    }

    #[test]
    fn report_quantizer_formula() {
        let enc = encode_report(&set_b());
        assert!(enc.clamped.is_empty());
        // mu_lgDS: round((−6.8+9)/4·255) = round(140.25) = 140
        assert_eq!(enc.bytes[1], 140);
        let dec = decode_report(&enc.bytes).unwrap();
        assert_relative_eq!(dec.mu_lg_ds, -9.0 + 140.0 / 255.0 * 4.0, epsilon = 1e-12);
        assert!((dec.mu_lg_ds + 6.8039).abs() < 1e-4);

        // per-field error stays within half a quantization step
        for (i, &(lo, hi)) in REPORT_RANGES.iter().enumerate() {
            let truth = [
                set_b().mu_lg_ds,
                set_b().sigma_lg_ds,
                set_b().mu_lg_asd,
                set_b().sigma_lg_asd,
                set_b().mu_kf_db,
                set_b().sigma_kf_db,
                set_b().lambda_clusters.unwrap(),
            ][i];
            let decoded = [
                dec.mu_lg_ds,
                dec.sigma_lg_ds,
                dec.mu_lg_asd,
                dec.sigma_lg_asd,
                dec.mu_kf_db,
                dec.sigma_kf_db,
                dec.lambda_clusters,
            ][i];
            assert!(
                (decoded - truth).abs() <= (hi - lo) / 510.0 + 1e-12,
                "field {i}: {decoded} vs {truth}"
            );
        }
    }

    #[test]
    fn report_rejects_bad_length_and_version() {
        let enc = encode_report(&set_b());
        assert!(decode_report(&enc.bytes[..7]).is_err());
        let mut bad = enc.bytes;
        bad[0] = 2;
        assert!(matches!(
            decode_report(&bad),
            Err(Error::BadVersion { .. })
        ));
    }

    #[test]
    fn report_clamps_out_of_range_fields() {
        let mut params = set_b();
        params.lambda_clusters = Some(90.0); // above the 50 ceiling
        let enc = encode_report(&params);
        assert_eq!(enc.bytes[7], 255);
        assert_eq!(enc.clamped, vec!["lambda_clusters"]);

        params.lambda_clusters = None;
        let enc = encode_report(&params);
        assert_eq!(enc.bytes[7], 0);
        assert_eq!(enc.clamped, vec!["lambda_clusters"]);
    }

    #[test]
    fn stats_csv_round_trip() {
        let stats = vec![
            ChannelStats {
                ds_s: 1.58e-7,
                asd_deg: 5.1,
                asa_deg: 12.0,
                kf_db: 7.9,
                n_clusters: 9,
            },
            ChannelStats {
                ds_s: 2.1e-7,
                asd_deg: 4.4,
                asa_deg: 9.8,
                kf_db: 40.0,
                n_clusters: 1,
            },
        ];
        let text = stats_to_csv(&stats);
        assert!(text.starts_with(STATS_CSV_HEADER));
        let back = stats_from_csv(&text).unwrap();
        assert_eq!(stats, back);

        assert!(stats_from_csv("nope\n1,2,3,4,5\n").is_err());
        assert!(stats_from_csv(&format!("{STATS_CSV_HEADER}\n1,2,3\n")).is_err());
    }
}
