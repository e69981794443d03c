//! `henon`: grid experiments with chaos indicators on the 4d modulated
//! Hénon map.
//!
//! Exit codes: 0 success, 2 configuration error, 3 ground-truth failure,
//! 4 I/O error.

use clap::{Parser, Subcommand};
use henon_harness::config::{ConfigError, ExperimentConfig};
use henon_harness::indicator::IndicatorId;
use henon_harness::pipeline::{Pipeline, PipelineError};
use henon_harness::report::ReportError;
use henon_harness::store::StoreError;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "henon", version, about = "Chaos-indicator experiments on the 4d modulated Hénon map")]
struct Cli {
    /// Scale preset: quick, desk or paper (default: desk).
    #[arg(long, global = true)]
    preset: Option<String>,

    /// Configuration file overlaid on the preset (TOML, may be partial).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Output directory (default: ./out).
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Comma-separated indicator subset (le,fli,fli_wb,megno,gali4,rem,fma,bf).
    #[arg(long, global = true, value_delimiter = ',')]
    indicators: Option<Vec<String>>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Track the grid and write the survival table.
    Survival,
    /// Compute indicator series for all surviving orbits.
    Indicators,
    /// Build the ground truth from the LE store at the horizon.
    GroundTruth,
    /// Score every indicator against the ground truth and write reports.
    Classify,
    /// Export per-checkpoint histograms of the log-indicator values.
    Histograms {
        /// Comma-separated checkpoint list (default: all ladder points).
        #[arg(long, value_delimiter = ',')]
        at: Option<Vec<u64>>,
    },
    /// Run the full pipeline: survival, indicators, ground truth,
    /// classification and histograms.
    Report,
}

fn exit_code_for(err: &PipelineError) -> u8 {
    match err {
        PipelineError::Report(ReportError::Gt(_))
        | PipelineError::Report(ReportError::NoGtSamples(_)) => 3,
        PipelineError::Store(StoreError::Io { .. }) | PipelineError::Io(_, _) => 4,
        PipelineError::Store(_) => 4,
        PipelineError::Report(ReportError::IncompleteSeries(_)) => 4,
        PipelineError::NotConfigured(_) => 2,
    }
}

fn run(cli: Cli) -> Result<(), u8> {
    let mut cfg: ExperimentConfig =
        ExperimentConfig::resolve(cli.preset.as_deref(), cli.config.as_deref()).map_err(|e| {
            eprintln!("henon: configuration error: {e}");
            2u8
        })?;
    if let Some(list) = &cli.indicators {
        let mut ids = Vec::new();
        for name in list {
            ids.push(name.parse::<IndicatorId>().map_err(|e| {
                eprintln!("henon: configuration error: {e}");
                2u8
            })?);
        }
        cfg.run.indicators = ids;
        cfg.validate().map_err(|e: ConfigError| {
            eprintln!("henon: configuration error: {e}");
            2u8
        })?;
    }

    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| {
                eprintln!("henon: configuration error: cannot build thread pool: {e}");
                2u8
            })?;
    }

    let pipeline = Pipeline::new(cfg, cli.out);
    let outcome = match cli.command {
        Command::Survival => pipeline.ensure_survival().map(|rows| {
            let survivors = rows.iter().filter(|r| r.survived).count();
            println!(
                "survival: {survivors}/{} orbits stable to n = {}",
                rows.len(),
                pipeline.ladder.gt_horizon()
            );
        }),
        Command::Indicators => pipeline.run_indicator_stage().map(|()| {
            println!(
                "indicators: wrote {} series into {}",
                pipeline.cfg.run.indicators.len(),
                pipeline.out.display()
            );
        }),
        Command::GroundTruth => pipeline.ensure_ground_truth().and_then(|gt| {
            pipeline.write_gt_json(&gt)?;
            let chaotic = gt
                .rows
                .iter()
                .filter(|r| r.label == henon_core::classify::Label::Chaotic)
                .count();
            println!(
                "ground-truth: {} orbits labeled ({chaotic} chaotic), threshold {:?}",
                gt.rows.len(),
                gt.threshold.threshold
            );
            Ok(())
        }),
        Command::Classify => pipeline.run_classification().map(|()| {
            println!(
                "classify: wrote reports and {}",
                pipeline.summary_path().display()
            );
        }),
        Command::Histograms { at } => {
            let ids = pipeline.cfg.run.indicators.clone();
            pipeline.run_histograms(&ids, at.as_deref()).map(|()| {
                println!("histograms: wrote {} files", ids.len());
            })
        }
        Command::Report => pipeline.run_report().map(|()| {
            println!(
                "report: full pipeline artifacts in {}",
                pipeline.out.display()
            );
        }),
    };
    outcome.map_err(|e| {
        let code = exit_code_for(&e);
        eprintln!("henon: {e}");
        code
    })
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(code) => ExitCode::from(code),
    }
}
