use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use sparsenorm::analysis::AnalysisConfig;
use sparsenorm::bootstrap::BootstrapConfig;
use sparsenorm::cohort::{FilterConfig, QualityGroup};
use sparsenorm::indicator::{Method, WorldMode, ZeroPolicy, Z_95};
use sparsenorm::ingest::MentionSource;
use sparsenorm::report::{
    run_compute, run_simulate, run_validate, ComputeRequest, GroupSpec, RunReport,
};
use sparsenorm::synth::{calibration, SynthConfig};
use sparsenorm::{Error, Result};

/// Field- and time-normalized indicators for sparse mention data.
#[derive(Parser)]
#[command(name = "sparsenorm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute indicators with closed-form confidence intervals.
    Compute(ComputeArgs),
    /// Compute indicators with percentile bootstrap intervals.
    Bootstrap {
        #[command(flatten)]
        common: ComputeArgs,
        #[arg(long, default_value_t = 1000)]
        replicates: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also resample the world papers outside the group.
        #[arg(long)]
        resample_world: bool,
        #[arg(long, default_value_t = 0.95)]
        ci_level: f64,
    },
    /// Generate a synthetic dataset with a manifest.
    Simulate {
        /// Generator configuration (JSON). Without it the calibrated preset is used.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 100_000)]
        world_per_year: u64,
        #[arg(long, default_value_t = 1)]
        categories: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Parse and join a dataset and print a consistency summary.
    Validate {
        #[arg(long)]
        manifest: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum IndicatorArg {
    Emnpc,
    Mnpc,
    Mhq,
    All,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct ComputeArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Quality groups, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "q0,q1,q2")]
    group: Vec<QualityGroup>,
    /// Files with one publication id per line, each evaluated as a group.
    #[arg(long)]
    group_ids: Vec<PathBuf>,
    /// Mention sources; defaults to every source in the manifest.
    #[arg(long, value_delimiter = ',')]
    source: Vec<MentionSource>,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "all")]
    indicator: Vec<IndicatorArg>,
    #[arg(long, default_value = "continuity")]
    zero_policy: ZeroPolicy,
    #[arg(long, default_value_t = 10)]
    min_stratum_papers: u64,
    #[arg(long, default_value_t = 1)]
    min_group_stratum_papers: u64,
    #[arg(long, default_value = "inclusive")]
    world: WorldMode,
    #[arg(long, default_value_t = Z_95)]
    z: f64,
    /// Keep strata where all or none of the world papers are mentioned.
    #[arg(long)]
    allow_unmixed: bool,
    /// Keep categories without any recommended paper.
    #[arg(long)]
    all_categories: bool,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Directory for report.csv, filter_log.csv and report.json.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl ComputeArgs {
    fn request(&self, bootstrap: Option<BootstrapConfig>) -> Result<ComputeRequest> {
        let mut groups: Vec<GroupSpec> =
            self.group.iter().map(|&q| GroupSpec::Quality(q)).collect();
        for path in &self.group_ids {
            groups.push(GroupSpec::from_id_file(path)?);
        }
        let mut indicators = Vec::new();
        for i in &self.indicator {
            match i {
                IndicatorArg::Emnpc => indicators.push(Method::Emnpc),
                IndicatorArg::Mnpc => indicators.push(Method::Mnpc),
                IndicatorArg::Mhq => indicators.push(Method::Mhq),
                IndicatorArg::All => indicators.extend([Method::Emnpc, Method::Mnpc, Method::Mhq]),
            }
        }
        Ok(ComputeRequest {
            manifest: self.manifest.clone(),
            groups,
            sources: (!self.source.is_empty()).then(|| self.source.clone()),
            indicators,
            analysis: AnalysisConfig {
                filter: FilterConfig {
                    min_stratum_papers: self.min_stratum_papers,
                    require_mixed_outcomes: !self.allow_unmixed,
                    min_group_stratum_papers: self.min_group_stratum_papers,
                    restrict_to_recommended_categories: !self.all_categories,
                },
                zero_policy: self.zero_policy,
                world: self.world,
                z: self.z,
            },
            bootstrap,
        })
    }

    fn emit(&self, report: &RunReport) -> Result<()> {
        if let Some(dir) = &self.out {
            report.write(dir)?;
        }
        let body = match self.format {
            Format::Csv => report.estimates_csv(),
            Format::Json => report.to_json(),
        };
        print_stdout(&body)
    }
}

fn print_stdout(body: &str) -> Result<()> {
    std::io::stdout()
        .lock()
        .write_all(body.as_bytes())
        .map_err(|e| Error::Io {
            path: "<stdout>".into(),
            source: e,
        })
}

fn load_synth_config(path: &Path) -> Result<SynthConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    serde_json::from_str(&text).map_err(|e| Error::Json {
        path: path.to_path_buf(),
        source: e,
    })
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Compute(args) => {
            let report = run_compute(&args.request(None)?)?;
            args.emit(&report)
        }
        Command::Bootstrap {
            common,
            replicates,
            seed,
            resample_world,
            ci_level,
        } => {
            let cfg = BootstrapConfig {
                replicates,
                seed,
                resample_world,
                ci_level,
            };
            let report = run_compute(&common.request(Some(cfg))?)?;
            common.emit(&report)
        }
        Command::Simulate {
            config,
            world_per_year,
            categories,
            seed,
            out,
        } => {
            let cfg = match config {
                Some(path) => load_synth_config(&path)?,
                None => calibration::calibrated_config(world_per_year, categories, seed)?,
            };
            run_simulate(&cfg, &out)?;
            print_stdout(&format!("{}\n", out.join("manifest.json").display()))
        }
        Command::Validate { manifest } => {
            let report = run_validate(&manifest)?;
            let mut body = serde_json::to_string_pretty(&report).expect("report serializes");
            body.push('\n');
            print_stdout(&body)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_input_error() { 2 } else { 3 })
        }
    }
}
