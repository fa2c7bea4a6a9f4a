use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

mod commands;
mod config;
mod errors;
mod manifest;
mod pipeline;
mod synthetic;

use config::RunConfig;
use errors::{CliError, Result};

/// Cascaded brain tumor segmentation: contextual slice detection followed by
/// patch segmentation with an atrous encoder-decoder, over VVL1 volumes.
#[derive(Parser)]
#[command(name = "tumorseg", version, about)]
struct Cli {
    /// Plain-text key=value run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the seed from the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Accepted for interface stability; every run is deterministic already.
    #[arg(long, global = true)]
    deterministic: bool,
    /// Worker threads for per-scan commands.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum TrainTarget {
    Seg,
    Detector,
}

#[derive(Subcommand)]
enum Cmd {
    /// Package a raw little-endian voxel blob as a VVL1 volume.
    Convert {
        /// key=value file with input, output, dims, dtype, spacing.
        #[arg(long)]
        spec: PathBuf,
    },
    /// Generate contextual windows and labeled proposals per scan.
    Windows {
        #[arg(long)]
        manifest: PathBuf,
        /// Proposal source name: oracle or detector.
        #[arg(long, default_value = "oracle")]
        source: String,
        /// Detector checkpoint, required when --source detector.
        #[arg(long)]
        det_ckpt: Option<PathBuf>,
    },
    /// Train the slice detector or the patch segmenter.
    Train {
        #[arg(value_enum)]
        target: TrainTarget,
        #[arg(long)]
        manifest: PathBuf,
        /// Held-out scans scored after segmenter training.
        #[arg(long)]
        val_manifest: Option<PathBuf>,
    },
    /// Run the full cascade and write one predicted label volume per scan.
    Infer {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        seg_ckpt: PathBuf,
        /// Detection source name: oracle or detector.
        #[arg(long, default_value = "detector")]
        detection: String,
        #[arg(long)]
        det_ckpt: Option<PathBuf>,
    },
    /// Score predictions against truth labels, per scan and aggregated.
    Evaluate {
        #[arg(long)]
        pred_manifest: PathBuf,
        #[arg(long)]
        truth_manifest: PathBuf,
        /// Hausdorff percentile in (0, 100]; the maximum when omitted.
        #[arg(long)]
        percentile: Option<f64>,
    },
    /// Generate a seeded synthetic sphere-tumor dataset with manifests.
    MakeSynthetic {
        #[arg(long, default_value_t = 8)]
        train: usize,
        #[arg(long, default_value_t = 4)]
        test: usize,
        /// Cubic volume side length.
        #[arg(long, default_value_t = 64)]
        dims: usize,
        /// Whole-tumor radius as a fraction of the side length.
        #[arg(long, default_value_t = 0.22)]
        radius_frac: f64,
        /// Intensity lift of highlighted regions over background.
        #[arg(long, default_value_t = 0.6)]
        contrast: f64,
        /// Standard deviation of the additive voxel noise.
        #[arg(long, default_value_t = 0.05)]
        noise: f64,
    },
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn dispatch(cli: Cli) -> Result<()> {
    let cfg = load_config(&cli)?;
    match &cli.cmd {
        Cmd::Convert { spec } => commands::convert::run(spec),
        Cmd::Windows {
            manifest,
            source,
            det_ckpt,
        } => commands::windows::run(manifest, source, det_ckpt.as_deref(), &cfg, &cli.out),
        Cmd::Train {
            target,
            manifest,
            val_manifest,
        } => match target {
            TrainTarget::Seg => {
                commands::train::run_seg(manifest, val_manifest.as_deref(), &cfg, &cli.out)
            }
            TrainTarget::Detector => commands::train::run_detector(manifest, &cfg, &cli.out),
        },
        Cmd::Infer {
            manifest,
            seg_ckpt,
            detection,
            det_ckpt,
        } => commands::infer::run(
            manifest,
            seg_ckpt,
            detection,
            det_ckpt.as_deref(),
            &cfg,
            &cli.out,
            cli.jobs,
        )
        .map(|_| ()),
        Cmd::Evaluate {
            pred_manifest,
            truth_manifest,
            percentile,
        } => {
            if let Some(p) = percentile {
                if !(p.is_finite() && *p > 0.0 && *p <= 100.0) {
                    return Err(CliError::Usage(
                        "percentile must lie in (0, 100]".into(),
                    ));
                }
            }
            commands::evaluate::run(
                pred_manifest,
                truth_manifest,
                *percentile,
                &cli.out,
                cli.jobs,
            )
        }
        Cmd::MakeSynthetic {
            train,
            test,
            dims,
            radius_frac,
            contrast,
            noise,
        } => {
            let spec = synthetic::SyntheticSpec {
                train: *train,
                test: *test,
                dims: *dims,
                radius_frac: *radius_frac,
                contrast: *contrast,
                noise: *noise,
                seed: cfg.seed,
            };
            let summary = synthetic::generate_dataset(&cli.out, &spec)?;
            println!(
                "generated {} scans: {} {} {} {}",
                summary.scans,
                summary.train_manifest.display(),
                summary.test_manifest.display(),
                summary.truth_train.display(),
                summary.truth_test.display()
            );
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    autonet::flush_subnormals();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    return ExitCode::SUCCESS;
                }
                _ => 1,
            };
            eprint!("{e}");
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            err.exit_code()
        }
    }
}
