//! `collabnet`: build temporal co-starring networks from cast CSVs and
//! measure how strongly a regional boundary suppresses collaboration, via a
//! degree-preserving randomization index and via ERGMs with homophily terms.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use collabnet::{Error, Result};

use config::{RunConfig, FOUR_YEAR_PERIODS, YEARLY_WINDOWS};

#[derive(Debug, Parser)]
#[command(name = "collabnet", version, about, long_about = None)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Per-period network summaries: size, degree, clustering, region mix.
    Describe(DescribeArgs),
    /// Cross-region cooperation index: observed over degree-preserving null.
    Index(IndexArgs),
    /// Per-period ERGM fits with regional homophily terms.
    Ergm(ModelArgs),
    /// Cross-region cooperation means by fame and debut generation.
    Subgroups(ModelArgs),
}

#[derive(Debug, Args)]
struct Shared {
    /// Star table CSV: id, name, region, birth_year, first_work_year.
    #[arg(long, value_name = "FILE")]
    stars: PathBuf,

    /// Work table CSV: id, title, year, kind.
    #[arg(long, value_name = "FILE")]
    works: PathBuf,

    /// Cast table CSV: work_id, star_id.
    #[arg(long, value_name = "FILE")]
    cast: PathBuf,

    /// Comma-separated regions to include, e.g. Mainland,HongKong.
    #[arg(long, default_value = "Mainland,HongKong")]
    regions: String,

    /// First year of the analysis range.
    #[arg(long)]
    from: Option<i32>,

    /// Last year of the analysis range (inclusive).
    #[arg(long)]
    to: Option<i32>,

    /// Period length in years; the final period is truncated at --to.
    #[arg(long)]
    window: Option<i32>,

    /// JSON file with an explicit period list instead of --from/--to/--window.
    #[arg(long, value_name = "FILE", conflicts_with_all = ["from", "to", "window"])]
    periods: Option<PathBuf>,

    /// Master random seed; all randomness derives from it deterministically.
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Output directory, created if missing.
    #[arg(long, value_name = "DIR")]
    out: PathBuf,

    /// Worker threads for the parallel stages (default: all cores).
    /// Results do not depend on this.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Debug, Args)]
struct DescribeArgs {
    #[command(flatten)]
    shared: Shared,
}

#[derive(Debug, Args)]
struct IndexArgs {
    #[command(flatten)]
    shared: Shared,

    /// Randomized replicates behind the expectation and the null band.
    #[arg(long, default_value_t = 100)]
    replicates: usize,

    /// Attempted edge swaps per replicate, as a multiple of the edge count.
    #[arg(long, default_value_t = 2.0)]
    swap_mult: f64,
}

#[derive(Debug, Args)]
struct ModelArgs {
    #[command(flatten)]
    shared: Shared,

    /// JSON term list overriding the default model (ergm only).
    #[arg(long, value_name = "FILE")]
    terms: Option<PathBuf>,

    /// Within-region quantile of lagged cooperation that makes a star
    /// "famous" (subgroups only).
    #[arg(long, default_value_t = 0.75)]
    fame_quantile: f64,

    /// Debut before this year makes a star "older generation" (subgroups only).
    #[arg(long, default_value_t = 1990)]
    generation_cutoff: i32,
}

impl Shared {
    fn into_config(
        self,
        command: &str,
        defaults: &config::ScheduleDefaults,
    ) -> Result<RunConfig> {
        let regions = config::parse_regions(&self.regions)?;
        let schedule = config::resolve_schedule(
            self.periods.as_deref(),
            self.from,
            self.to,
            self.window,
            defaults,
        )?;
        Ok(RunConfig {
            command: command.to_string(),
            stars: self.stars,
            works: self.works,
            cast: self.cast,
            regions,
            schedule,
            seed: self.seed,
            out: self.out,
            workers: self.workers,
            replicates: None,
            swap_multiplier: None,
            terms_file: None,
            fame_quantile: None,
            generation_cutoff: None,
        })
    }
}

fn build_config(command: Command) -> Result<RunConfig> {
    match command {
        Command::Describe(args) => args.shared.into_config("describe", &FOUR_YEAR_PERIODS),
        Command::Index(args) => {
            if args.replicates == 0 {
                return Err(Error::InvalidInput("--replicates must be positive".into()));
            }
            if args.swap_mult.is_nan() || args.swap_mult <= 0.0 {
                return Err(Error::InvalidInput(format!(
                    "--swap-mult must be positive, got {}",
                    args.swap_mult
                )));
            }
            let mut cfg = args.shared.into_config("index", &YEARLY_WINDOWS)?;
            cfg.replicates = Some(args.replicates);
            cfg.swap_multiplier = Some(args.swap_mult);
            Ok(cfg)
        }
        Command::Ergm(args) => {
            let mut cfg = args.shared.into_config("ergm", &FOUR_YEAR_PERIODS)?;
            cfg.terms_file = args.terms;
            cfg.fame_quantile = Some(args.fame_quantile);
            cfg.generation_cutoff = Some(args.generation_cutoff);
            Ok(cfg)
        }
        Command::Subgroups(args) => {
            if !(args.fame_quantile > 0.0 && args.fame_quantile < 1.0) {
                return Err(Error::InvalidInput(format!(
                    "--fame-quantile must lie strictly between 0 and 1, got {}",
                    args.fame_quantile
                )));
            }
            let mut cfg = args.shared.into_config("subgroups", &FOUR_YEAR_PERIODS)?;
            cfg.terms_file = args.terms;
            cfg.fame_quantile = Some(args.fame_quantile);
            cfg.generation_cutoff = Some(args.generation_cutoff);
            Ok(cfg)
        }
    }
}

fn run(cfg: &RunConfig) -> Result<()> {
    if let Some(workers) = cfg.workers {
        if workers == 0 {
            return Err(Error::InvalidInput("--workers must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
            .map_err(|e| Error::InvalidInput(format!("worker pool setup failed: {e}")))?;
    }
    match cfg.command.as_str() {
        "describe" => commands::cmd_describe(cfg),
        "index" => commands::cmd_index(cfg),
        "ergm" => commands::cmd_ergm(cfg),
        "subgroups" => commands::cmd_subgroups(cfg),
        other => Err(Error::InvalidInput(format!("unknown command {other:?}"))),
    }
}

/// 0 ok; 2 configuration error; 3 data error; 4 numeric failure.
fn exit_code_for(err: &Error) -> u8 {
    if err.is_data_error() {
        3
    } else if err.is_numeric_error() {
        4
    } else {
        2
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = build_config(cli.command).and_then(|cfg| run(&cfg));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
