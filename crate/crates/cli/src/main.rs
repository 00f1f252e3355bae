//! Command-line pipeline around the SSCM toolkit.
//!
//! Subcommands mirror the dataset loop: `generate` synthesizes a channel
//! dataset from a parameter file, `extract` pulls per-sample statistics,
//! `fit` updates a baseline into a scene-specific parameter set, `match`
//! ranks a sub-scenario catalog against a query, `eval` scores CSI feedback
//! compression, and `report` packs statistics into the 8-byte air-interface
//! message.
//!
//! Exit codes: 0 on success, 1 for usage errors, 2 for data or validation
//! errors. Diagnostics go to stderr.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use sscm_core::channel::{CarrierConfig, ChannelDims};
use sscm_core::extract::{extract_stats_batch, ExtractConfig};
use sscm_core::feedback::{
    compute_csi_targets, evaluate, train_linear_codec, Codec, CsiTarget, DftCodebook,
};
use sscm_core::fit::{
    baseline, build_sscm, FitOptions, SubScenario, SubScenarioCatalog, BASELINE_NAMES,
};
use sscm_core::gbsm::{generate_dataset, GenConfig};
use sscm_core::io;

#[derive(Parser)]
#[command(
    name = "sscm",
    version,
    about = "Scene-specific channel model toolkit",
    arg_required_else_help = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic channel dataset from a parameter file.
    Generate(GenerateArgs),
    /// Extract per-sample statistics from a dataset into a CSV.
    Extract(ExtractArgs),
    /// Fit a scene-specific parameter set from extracted statistics.
    Fit(FitArgs),
    /// Rank the entries of a catalog directory against a query.
    #[command(name = "match")]
    Match(MatchArgs),
    /// Train a feedback codec on one dataset and score it on another.
    Eval(EvalArgs),
    /// Encode or decode the 8-byte statistics report.
    Report(ReportArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Parameter file driving the generation.
    #[arg(long)]
    params: PathBuf,
    /// Number of samples.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    count: u32,
    /// Generation seed; sample i derives its stream from (seed, i).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Receive antennas.
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u32).range(1..))]
    nrx: u32,
    /// Transmit antennas.
    #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u32).range(1..))]
    ntx: u32,
    /// Subcarriers.
    #[arg(long, default_value_t = 208, value_parser = clap::value_parser!(u32).range(2..))]
    nsc: u32,
    /// Subcarrier spacing in Hz.
    #[arg(long, default_value_t = 15e3)]
    scs: f64,
    /// Carrier frequency in Hz.
    #[arg(long, default_value_t = 2.6e9)]
    fc: f64,
    /// Output dataset path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ExtractArgs {
    /// Input dataset.
    #[arg(long = "in")]
    input: PathBuf,
    /// Output statistics CSV.
    #[arg(long)]
    out: PathBuf,
    /// Power threshold below the profile peak, dB.
    #[arg(long = "threshold-db", default_value_t = 25.0)]
    threshold_db: f64,
    /// Separate threshold for the angle spectra, dB (defaults to --threshold-db).
    #[arg(long = "angle-threshold-db")]
    angle_threshold_db: Option<f64>,
    /// Tap gap that separates cluster groups.
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u32).range(1..))]
    gap: u32,
}

#[derive(Args)]
struct FitArgs {
    /// Statistics CSV produced by `extract`.
    #[arg(long)]
    stats: PathBuf,
    /// Baseline parameter set to update.
    #[arg(long)]
    baseline: String,
    /// Output parameter file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct MatchArgs {
    /// Directory of parameter files, one catalog entry per file.
    #[arg(long)]
    catalog: PathBuf,
    /// Query parameter file.
    #[arg(long)]
    query: PathBuf,
    /// Number of ranked entries to print.
    #[arg(long = "top-k", default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    top_k: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CodecKind {
    Linear,
    Dft,
}

#[derive(Args)]
struct EvalArgs {
    /// Training dataset.
    #[arg(long)]
    train: PathBuf,
    /// Test dataset.
    #[arg(long)]
    test: PathBuf,
    /// Retained coefficients (linear) or beams (dft).
    #[arg(long, default_value_t = 7, value_parser = clap::value_parser!(u32).range(1..))]
    coeffs: u32,
    /// Bits per quantized component (linear: per re/im part; dft: per
    /// amplitude and per phase).
    #[arg(long = "bits-per-comp", default_value_t = 4, value_parser = clap::value_parser!(u32).range(1..=32))]
    bits_per_comp: u32,
    /// Subcarriers per feedback subband.
    #[arg(long, default_value_t = 16, value_parser = clap::value_parser!(u32).range(1..))]
    subband: u32,
    #[arg(long, value_enum, default_value_t = CodecKind::Linear)]
    codec: CodecKind,
    /// Optional per-sample SGCS CSV.
    #[arg(long = "per-sample")]
    per_sample: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    #[command(subcommand)]
    action: ReportAction,
}

#[derive(Subcommand)]
enum ReportAction {
    /// Pack a parameter file into the 8-byte report (hex on stdout).
    Encode {
        #[arg(long)]
        params: PathBuf,
    },
    /// Unpack an 8-byte hex report into parameter text.
    Decode {
        #[arg(long)]
        hex: String,
    },
}

enum RunError {
    Usage(String),
    Data(anyhow::Error),
}

impl<E: Into<anyhow::Error>> From<E> for RunError {
    fn from(e: E) -> Self {
        RunError::Data(e.into())
    }
}

type RunResult = Result<(), RunError>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };
    let result = match cli.command {
        Command::Generate(args) => run_generate(args),
        Command::Extract(args) => run_extract(args),
        Command::Fit(args) => run_fit(args),
        Command::Match(args) => run_match(args),
        Command::Eval(args) => run_eval(args),
        Command::Report(args) => run_report(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(RunError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(RunError::Data(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run_generate(args: GenerateArgs) -> RunResult {
    let params = io::read_params(&args.params)?;
    let dims = ChannelDims::new(args.nrx as usize, args.ntx as usize, args.nsc as usize)?;
    let carrier = CarrierConfig::new(args.fc, args.scs)?;
    let config = GenConfig::new(dims, carrier);
    let samples = generate_dataset(&params, &config, args.count as usize, args.seed)?;
    io::write_dataset(&args.out, &samples)?;
    eprintln!(
        "wrote {} samples ({}x{}x{}) to {}",
        samples.len(),
        dims.n_rx,
        dims.n_tx,
        dims.n_sc,
        args.out.display()
    );
    Ok(())
}

fn run_extract(args: ExtractArgs) -> RunResult {
    let cfg = ExtractConfig {
        pdp_threshold_db: args.threshold_db,
        cluster_gap_taps: args.gap as usize,
        angle_threshold_db: args.angle_threshold_db,
    };
    cfg.validate()?;
    let samples = io::read_dataset(&args.input)?;
    let stats = extract_stats_batch(&samples, &cfg)?;
    io::write_stats_csv(&args.out, &stats)?;
    eprintln!("wrote {} statistics rows to {}", stats.len(), args.out.display());
    Ok(())
}

fn run_fit(args: FitArgs) -> RunResult {
    let base = baseline(&args.baseline).ok_or_else(|| {
        RunError::Usage(format!(
            "unknown baseline \"{}\"; available: {}",
            args.baseline,
            BASELINE_NAMES.join(", ")
        ))
    })?;
    let stats = io::read_stats_csv(&args.stats).map_err(RunError::from)?;
    let build = build_sscm(&stats, &base, &FitOptions::default()).map_err(RunError::from)?;
    if build.below_floor {
        eprintln!(
            "warning: only {} statistics records; fitted parameters carry wide confidence intervals",
            build.n_records
        );
    }
    if build.n_kf_excluded > 0 {
        eprintln!(
            "warning: {} capped K-factor values excluded from the fit",
            build.n_kf_excluded
        );
    }
    if build.n_dropped > 0 {
        eprintln!(
            "warning: {} non-positive spread values dropped before log fitting",
            build.n_dropped
        );
    }
    io::write_params(&args.out, &build.params).map_err(RunError::from)?;
    eprintln!("wrote fitted parameters to {}", args.out.display());
    Ok(())
}

fn load_catalog_dir(dir: &Path) -> Result<SubScenarioCatalog, RunError> {
    let mut entries = Vec::new();
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| RunError::Data(anyhow::anyhow!("cannot read catalog {}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file())
        .collect();
    paths.sort();
    for path in paths {
        let id = path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or_default()
            .to_string();
        if id.is_empty() {
            continue;
        }
        let params = io::read_params(&path).map_err(|e| {
            RunError::Data(anyhow::anyhow!("catalog entry {}: {e}", path.display()))
        })?;
        entries.push(SubScenario {
            id,
            params,
            grid_index: None,
        });
    }
    SubScenarioCatalog::from_entries(entries).map_err(RunError::from)
}

fn run_match(args: MatchArgs) -> RunResult {
    let catalog = load_catalog_dir(&args.catalog)?;
    let query = io::read_params(&args.query)?;
    let ranked = catalog.match_query(&query, args.top_k as usize)?;
    for m in ranked {
        println!("{},{},{}", m.rank, m.id, m.distance);
    }
    Ok(())
}

fn run_eval(args: EvalArgs) -> RunResult {
    let train = io::read_dataset(&args.train)?;
    let test = io::read_dataset(&args.test)?;
    let subband = args.subband as usize;
    let codec = match args.codec {
        CodecKind::Linear => {
            let targets: Vec<CsiTarget> = train
                .iter()
                .map(|s| compute_csi_targets(s, subband))
                .collect::<Result<_, _>>()?;
            Codec::Linear(train_linear_codec(
                &targets,
                args.coeffs as usize,
                args.bits_per_comp as usize,
            )?)
        }
        CodecKind::Dft => Codec::DftBeam(DftCodebook {
            n_beams: args.coeffs as usize,
            amp_bits: args.bits_per_comp as usize,
            phase_bits: args.bits_per_comp as usize,
        }),
    };
    let dataset_id = |p: &Path| {
        p.file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("dataset")
            .to_string()
    };
    let report = evaluate(
        &codec,
        &test,
        subband,
        &dataset_id(&args.train),
        &dataset_id(&args.test),
    )?;
    let codec_name = match args.codec {
        CodecKind::Linear => "linear",
        CodecKind::Dft => "dft",
    };
    print!("{}", io::eval_report_to_string(&report, codec_name));
    if let Some(path) = args.per_sample {
        std::fs::write(&path, io::eval_per_sample_csv(&report))
            .map_err(|e| RunError::Data(e.into()))?;
        eprintln!("wrote per-sample SGCS to {}", path.display());
    }
    Ok(())
}

fn run_report(args: ReportArgs) -> RunResult {
    match args.action {
        ReportAction::Encode { params } => {
            let set = io::read_params(&params)?;
            let enc = io::encode_report(&set);
            for field in &enc.clamped {
                eprintln!("warning: {field} clamped into its report range");
            }
            let hex: String = enc.bytes.iter().map(|b| format!("{b:02x}")).collect();
            println!("{hex}");
            Ok(())
        }
        ReportAction::Decode { hex } => {
            let hex = hex.trim();
            if hex.len() % 2 != 0 {
                return Err(RunError::Data(anyhow::anyhow!(
                    "hex string must have an even number of digits"
                )));
            }
            let bytes: Result<Vec<u8>, _> = (0..hex.len() / 2)
                .map(|i| u8::from_str_radix(&hex[2 * i..2 * i + 2], 16))
                .collect();
            let bytes =
                bytes.map_err(|e| RunError::Data(anyhow::anyhow!("invalid hex: {e}")))?;
            let stats = io::decode_report(&bytes)?;
            print!("{}", io::report_stats_to_string(&stats));
            Ok(())
        }
    }
}
