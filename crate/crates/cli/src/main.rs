//! `eurocast` command line.
//!
//! Exit codes: 0 success, 2 configuration or schema problem, 3 fit failure,
//! 4 file could not be read or written.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "eurocast", version, about = "ZIGP match model and Monte Carlo tournament forecasts")]
struct Cli {
    /// Config file (TOML). Defaults to $EUROCAST_CONFIG_DIR/eurocast.toml when
    /// that exists, else built-in defaults.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// More log output; repeat for debug level.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Replay Elo ratings through a match history and annotate every match
    /// with both sides' ratings before kickoff.
    ReplayElo(ReplayEloArgs),
    /// Fit attack, defense and nested regressions for each team.
    Fit(FitArgs),
    /// Exact-score probabilities for one match.
    Forecast(ForecastArgs),
    /// Monte Carlo simulation of a tournament.
    Simulate(SimulateArgs),
    /// Score stage forecasts against realized results (MLD, Brier, RPS).
    Validate(ValidateArgs),
    /// Chi-square goodness of fit of a model file on a match history.
    Gof(GofArgs),
}

#[derive(Debug, Args)]
pub struct ReplayEloArgs {
    /// Match history CSV.
    #[arg(long, value_name = "PATH")]
    pub matches: PathBuf,
    /// Starting ratings CSV (team,elo,as_of); every team in the history needs one.
    #[arg(long, value_name = "PATH")]
    pub seeds: PathBuf,
    /// Annotated match CSV to write.
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
    /// Also write the ratings after the last match.
    #[arg(long, value_name = "PATH")]
    pub ratings_out: Option<PathBuf>,
}

/// Date window and weighting overrides shared by `fit` and `gof`.
#[derive(Debug, Args)]
pub struct WindowArgs {
    /// First match date used (inclusive). Overrides fit.window_start.
    #[arg(long, value_name = "DATE")]
    pub window_start: Option<NaiveDate>,
    /// Last match date used (inclusive). Overrides fit.window_end.
    #[arg(long, value_name = "DATE")]
    pub window_end: Option<NaiveDate>,
    /// Date the time-decay weights are measured from. Defaults to
    /// weights.reference_date, then the window end.
    #[arg(long, value_name = "DATE")]
    pub reference_date: Option<NaiveDate>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Elo-annotated match CSV (output of replay-elo).
    #[arg(long, value_name = "PATH")]
    pub matches: PathBuf,
    /// Comma-separated teams to fit.
    #[arg(long, value_delimiter = ',', required_unless_present = "fixtures", conflicts_with = "fixtures")]
    pub teams: Vec<String>,
    /// Fit every team named in the group fixtures of this file.
    #[arg(long, value_name = "PATH")]
    pub fixtures: Option<PathBuf>,
    /// Model file to write (JSON).
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
    /// Goodness-of-fit report to write. Defaults to `<out>` with a `.gof.csv` suffix.
    #[arg(long, value_name = "PATH")]
    pub gof_out: Option<PathBuf>,
    #[command(flatten)]
    pub window: WindowArgs,
    /// Seed for the jittered optimizer starts. Overrides fit.seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct ForecastArgs {
    /// Model file from `fit`.
    #[arg(long, value_name = "PATH")]
    pub models: PathBuf,
    /// Team listed first; grid rows are its goals.
    #[arg(long)]
    pub team_a: String,
    /// Team listed second; grid columns are its goals.
    #[arg(long)]
    pub team_b: String,
    /// Country the match is played in. Omit for a neutral venue.
    #[arg(long, conflicts_with = "neutral")]
    pub venue: Option<String>,
    /// Neutral venue (the default when --venue is absent).
    #[arg(long)]
    pub neutral: bool,
    /// Ratings CSV to take both teams' Elo from.
    #[arg(long, value_name = "PATH", required_unless_present_all = ["elo_a", "elo_b"])]
    pub ratings: Option<PathBuf>,
    /// Elo of team A; overrides the ratings file.
    #[arg(long, allow_negative_numbers = true)]
    pub elo_a: Option<f64>,
    /// Elo of team B; overrides the ratings file.
    #[arg(long, allow_negative_numbers = true)]
    pub elo_b: Option<f64>,
    /// Largest goal count per side in the grid. Overrides simulation.grid_cap.
    #[arg(long)]
    pub cap: Option<u32>,
    /// Directory for grid.csv, grid.json and (with --svg) grid.svg.
    #[arg(long, value_name = "DIR")]
    pub out_dir: PathBuf,
    /// Also write an SVG heatmap of scores up to 5 goals.
    #[arg(long)]
    pub svg: bool,
}

/// Inputs of a tournament simulation.
#[derive(Debug, Args)]
pub struct SimInputArgs {
    /// Model file from `fit`.
    #[arg(long, value_name = "PATH")]
    pub models: Option<PathBuf>,
    /// Ratings CSV with every participant's Elo before the tournament.
    #[arg(long, value_name = "PATH")]
    pub ratings: Option<PathBuf>,
    /// Fixture CSV.
    #[arg(long, value_name = "PATH")]
    pub fixtures: Option<PathBuf>,
    /// Best-third allocation CSV.
    #[arg(long, value_name = "PATH")]
    pub allocation: Option<PathBuf>,
    /// Number of simulated tournaments. Overrides simulation.n_runs (100000).
    #[arg(long)]
    pub n_runs: Option<u64>,
    /// Master seed. Overrides simulation.seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads. Results do not depend on this.
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub input: SimInputArgs,
    /// Directory for the group, stage and distribution tables.
    #[arg(long, value_name = "DIR")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Realized results CSV (team,rank).
    #[arg(long, value_name = "PATH")]
    pub realized: PathBuf,
    /// Score these distributions (team,p1..p6) instead of simulating.
    #[arg(long, value_name = "PATH", conflicts_with_all = ["models", "ratings", "fixtures", "allocation", "n_runs", "seed", "workers"])]
    pub distributions: Option<PathBuf>,
    #[command(flatten)]
    pub input: SimInputArgs,
    /// Directory for metrics.csv and metrics.json.
    #[arg(long, value_name = "DIR")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct GofArgs {
    /// Model file from `fit`.
    #[arg(long, value_name = "PATH")]
    pub models: PathBuf,
    /// Elo-annotated match CSV.
    #[arg(long, value_name = "PATH")]
    pub matches: PathBuf,
    /// Comma-separated teams; defaults to every team in the model file.
    #[arg(long, value_delimiter = ',')]
    pub teams: Vec<String>,
    #[command(flatten)]
    pub window: WindowArgs,
    /// Report to write.
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).parse_default_env().init();

    let result = eurocast::data_io::load_config(cli.config.as_deref())
        .map_err(eurocast::Error::from)
        .and_then(|cfg| {
            let ctx = commands::Context { cfg, config_path: cli.config.clone() };
            match cli.command {
                Command::ReplayElo(a) => commands::replay_elo(&ctx, a),
                Command::Fit(a) => commands::fit(&ctx, a),
                Command::Forecast(a) => commands::forecast(&ctx, a),
                Command::Simulate(a) => commands::simulate(&ctx, a),
                Command::Validate(a) => commands::validate(&ctx, a),
                Command::Gof(a) => commands::gof(&ctx, a),
            }
        });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
