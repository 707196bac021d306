use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use log::info;

use eurocast::data_io::{self as io, DateWindow, GofRow, ModelFile, RunManifest, Venue};
use eurocast::elo::replay_history;
use eurocast::forecast::{score_grid, MatchContext};
use eurocast::metrics::{self, OutcomeDistribution};
use eurocast::regression::{fit_team_models, team_gof, ModelSource, RegressionError, RegressionKind, TeamModel};
use eurocast::tournament::{monte_carlo, MonteCarloOptions, SimulationAggregate, Slot, Stage, Tournament, ZigpSampler};
use eurocast::weights::WeightConfig;
use eurocast::Error;

use crate::{FitArgs, ForecastArgs, GofArgs, ReplayEloArgs, SimInputArgs, SimulateArgs, ValidateArgs, WindowArgs};

type Result<T> = std::result::Result<T, Error>;

pub struct Context {
    pub cfg: io::Config,
    pub config_path: Option<PathBuf>,
}

impl Context {
    fn manifest(&self, subcommand: &str) -> RunManifest {
        let mut m = RunManifest::new(subcommand);
        if let Some(p) = &self.config_path {
            m.inputs.insert("config".into(), p.display().to_string());
        }
        m
    }

    /// Fit window and weighting after command-line overrides.
    fn window(&self, w: &WindowArgs, m: &mut RunManifest) -> Result<(DateWindow, WeightConfig)> {
        let mut window = self.cfg.fit.window();
        if let Some(d) = w.window_start {
            window.start = d;
            m.overrides.insert("fit.window_start".into(), d.to_string());
        }
        if let Some(d) = w.window_end {
            window.end = d;
            m.overrides.insert("fit.window_end".into(), d.to_string());
        }
        if window.start > window.end {
            return Err(Error::Config(format!("window start {} is after window end {}", window.start, window.end)));
        }
        let mut weights = self.cfg.weight_config();
        weights.reference_date = w.reference_date.or(self.cfg.weights.reference_date).unwrap_or(window.end);
        weights.validate()?;
        m.reference_date = Some(weights.reference_date);
        Ok((window, weights))
    }
}

fn path_str(p: &Path) -> String {
    p.display().to_string()
}

/// Reads and parses a model file, recording its hash in the manifest.
fn read_models(path: &Path, m: &mut RunManifest) -> Result<BTreeMap<String, TeamModel>> {
    let text = io::read_text(path)?;
    let (_, models) = io::parse_models(&path_str(path), &text)?;
    m.inputs.insert("models".into(), path_str(path));
    m.model_sha256 = Some(io::sha256_hex(text.as_bytes()));
    Ok(models)
}

fn ratings_map(path: &Path) -> Result<BTreeMap<String, f64>> {
    Ok(io::load_ratings(path)?.into_iter().map(|r| (r.team, r.elo)).collect())
}

pub fn replay_elo(ctx: &Context, a: ReplayEloArgs) -> Result<()> {
    let matches = io::load_matches(&a.matches, None)?;
    let seeds = io::load_ratings(&a.seeds)?;
    let replay = replay_history(&seeds, &matches, &ctx.cfg.k_factor)?;

    let mut m = ctx.manifest("replay-elo");
    m.inputs.insert("matches".into(), path_str(&a.matches));
    m.inputs.insert("seeds".into(), path_str(&a.seeds));
    io::write_file(&a.out, &(m.csv_header() + &io::write_matches(&replay.matches)))?;

    if let Some(path) = &a.ratings_out {
        let as_of = replay.matches.last().map(|r| r.date).or_else(|| seeds.iter().map(|s| s.as_of).max());
        let as_of = as_of.unwrap_or(NaiveDate::MIN);
        let ratings: Vec<_> = replay
            .ratings
            .iter()
            .map(|(team, &elo)| eurocast::elo::EloRating { team: team.clone(), elo, as_of })
            .collect();
        io::write_file(path, &(m.csv_header() + &io::write_ratings(&ratings)))?;
    }
    println!("annotated {} matches, {} rated teams -> {}", replay.matches.len(), replay.ratings.len(), a.out.display());
    Ok(())
}

/// Teams named directly in group fixtures, in first-appearance order.
fn fixture_teams(path: &Path) -> Result<Vec<String>> {
    let mut out: Vec<String> = Vec::new();
    for f in io::load_fixtures(path)? {
        if f.stage != Stage::Group {
            continue;
        }
        for slot in [f.slot_a, f.slot_b] {
            if let Slot::Team(t) = slot {
                if !out.contains(&t) {
                    out.push(t);
                }
            }
        }
    }
    Ok(out)
}

fn gof_rows(models: &BTreeMap<String, TeamModel>) -> Vec<GofRow> {
    models
        .values()
        .map(|model| GofRow {
            team: model.team.clone(),
            results: RegressionKind::ALL.map(|k| model.regression(k).diagnostics.as_ref().map(|d| d.gof)),
            nested_source: model.nested.source,
        })
        .collect()
}

pub fn fit(ctx: &Context, a: FitArgs) -> Result<()> {
    let mut m = ctx.manifest("fit");
    m.inputs.insert("matches".into(), path_str(&a.matches));
    let (window, weights) = ctx.window(&a.window, &mut m)?;
    let mut fit = ctx.cfg.fit.clone();
    if let Some(seed) = a.seed {
        fit.seed = seed;
        m.overrides.insert("fit.seed".into(), seed.to_string());
    }
    m.seed = Some(fit.seed);
    let teams = match &a.fixtures {
        Some(p) => {
            m.inputs.insert("fixtures".into(), path_str(p));
            fixture_teams(p)?
        }
        None => a.teams.clone(),
    };
    if teams.is_empty() {
        return Err(Error::Config("no teams to fit".into()));
    }
    m.output_dir = a.out.parent().map(path_str);

    let matches = io::load_matches(&a.matches, Some(window))?;
    info!("{} matches between {} and {}", matches.len(), window.start, window.end);
    let summary = fit_team_models(&matches, &teams, &weights, &fit.options())?;

    let mut file = ModelFile::from_models(summary.models.values(), Some(weights.reference_date));
    file.manifest = Some(m.clone());
    io::write_file(&a.out, &io::render_model_file(&file))?;
    let gof_path = a.gof_out.clone().unwrap_or_else(|| a.out.with_extension("gof.csv"));
    io::write_file(&gof_path, &io::gof_table_csv(&gof_rows(&summary.models), &m))?;

    println!(
        "fitted {} of {} teams ({} nested fallbacks) -> {}",
        summary.models.len(),
        teams.len(),
        summary.nested_fallbacks.len(),
        a.out.display()
    );
    if !summary.failures.is_empty() {
        for (team, reason) in &summary.failures {
            eprintln!("{team}: {reason}");
        }
        return Err(Error::TeamsWithoutModel(summary.failures.into_keys().collect()));
    }
    Ok(())
}

pub fn forecast(ctx: &Context, a: ForecastArgs) -> Result<()> {
    let mut m = ctx.manifest("forecast");
    let models = read_models(&a.models, &mut m)?;
    let ratings = match &a.ratings {
        Some(p) => {
            m.inputs.insert("ratings".into(), path_str(p));
            ratings_map(p)?
        }
        None => BTreeMap::new(),
    };
    let elo = |team: &str, given: Option<f64>| {
        given
            .or_else(|| ratings.get(team).copied())
            .ok_or_else(|| Error::Config(format!("no Elo rating for `{team}`; pass --ratings or --elo-a/--elo-b")))
    };
    let venue = match &a.venue {
        Some(c) if !a.neutral => Venue::parse(c),
        _ => Venue::Neutral,
    };
    let match_ctx = MatchContext {
        team_a: a.team_a.clone(),
        team_b: a.team_b.clone(),
        elo_a: elo(&a.team_a, a.elo_a)?,
        elo_b: elo(&a.team_b, a.elo_b)?,
        venue: venue.clone(),
    };
    let cap = a.cap.unwrap_or(ctx.cfg.simulation.grid_cap);
    if let Some(c) = a.cap {
        m.overrides.insert("simulation.grid_cap".into(), c.to_string());
    }
    for (k, v) in [
        ("arg.team_a", match_ctx.team_a.clone()),
        ("arg.team_b", match_ctx.team_b.clone()),
        ("arg.elo_a", match_ctx.elo_a.to_string()),
        ("arg.elo_b", match_ctx.elo_b.to_string()),
        ("arg.venue", venue.to_string()),
    ] {
        m.overrides.insert(k.into(), v);
    }
    m.output_dir = Some(path_str(&a.out_dir));

    let grid = score_grid(&models, &match_ctx, cap)?;
    io::write_file(&a.out_dir.join("grid.csv"), &io::grid_to_csv(&grid, &m))?;
    io::write_file(&a.out_dir.join("grid.json"), &io::grid_to_json(&grid, &m))?;
    if a.svg {
        io::write_file(&a.out_dir.join("grid.svg"), &io::grid_to_svg(&grid, 5))?;
    }
    let o = grid.outcome();
    let (ga, gb, p) = grid.mode();
    println!(
        "{} v {} ({venue}): win {:.4}  draw {:.4}  loss {:.4}  most likely {ga}:{gb} ({p:.4})",
        grid.team_a, grid.team_b, o.win_a, o.draw, o.win_b
    );
    Ok(())
}

fn required<'a>(p: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path> {
    p.as_deref().ok_or_else(|| Error::Config(format!("--{flag} is required to simulate")))
}

fn run_simulation(ctx: &Context, a: &SimInputArgs, m: &mut RunManifest) -> Result<(Tournament, SimulationAggregate)> {
    let models = read_models(required(&a.models, "models")?, m)?;
    let (ratings_p, fixtures_p, alloc_p) =
        (required(&a.ratings, "ratings")?, required(&a.fixtures, "fixtures")?, required(&a.allocation, "allocation")?);
    for (k, p) in [("ratings", ratings_p), ("fixtures", fixtures_p), ("allocation", alloc_p)] {
        m.inputs.insert(k.into(), path_str(p));
    }
    let tournament = Tournament::new(&io::load_fixtures(fixtures_p)?, io::load_allocation(alloc_p)?)?;
    let base_elo = tournament.base_elo(&ratings_map(ratings_p)?)?;
    let sampler = ZigpSampler::new(&tournament, &models)?;

    let sim = &ctx.cfg.simulation;
    let opts = MonteCarloOptions { n_runs: a.n_runs.unwrap_or(sim.n_runs), seed: a.seed.unwrap_or(sim.seed), workers: a.workers };
    m.seed = Some(opts.seed);
    m.n_runs = Some(opts.n_runs);
    info!("simulating {} tournaments (seed {})", opts.n_runs, opts.seed);
    let agg = monte_carlo(&tournament, &sampler, &base_elo, &sim.settings(), &opts)?;
    agg.check_invariants(tournament.n_best_thirds as u64)
        .map_err(|e| Error::Config(format!("simulation counters are inconsistent: {e}")))?;
    Ok((tournament, agg))
}

pub fn simulate(ctx: &Context, a: SimulateArgs) -> Result<()> {
    let mut m = ctx.manifest("simulate");
    m.output_dir = Some(path_str(&a.out_dir));
    let (_, agg) = run_simulation(ctx, &a.input, &mut m)?;
    let dir = &a.out_dir;
    io::write_file(&dir.join("group_probabilities.csv"), &io::group_table_csv(&agg, &m))?;
    io::write_file(&dir.join("group_probabilities.json"), &io::group_table_json(&agg, &m))?;
    io::write_file(&dir.join("stage_probabilities.csv"), &io::stage_table_csv(&agg, &m))?;
    io::write_file(&dir.join("stage_probabilities.json"), &io::stage_table_json(&agg, &m))?;
    io::write_file(&dir.join("distributions.csv"), &io::distributions_csv(&agg.outcome_distributions(), &m))?;

    println!("{:<16} {:>9} {:>9} {:>9}", "team", "champion", "final", "semi");
    for r in agg.stage_probabilities().iter().take(8) {
        println!("{:<16} {:>9.4} {:>9.4} {:>9.4}", r.team, r.champion.p, r.final_.p, r.semifinal.p);
    }
    println!("{} runs -> {}", agg.n_runs, dir.display());
    Ok(())
}

pub fn validate(ctx: &Context, a: ValidateArgs) -> Result<()> {
    let mut m = ctx.manifest("validate");
    m.output_dir = Some(path_str(&a.out_dir));
    m.inputs.insert("realized".into(), path_str(&a.realized));
    let realized = io::load_realized(&a.realized)?;
    let dists: Vec<OutcomeDistribution<f64>> = match &a.distributions {
        Some(p) => {
            m.inputs.insert("distributions".into(), path_str(p));
            io::load_distributions(p)?
        }
        None => run_simulation(ctx, &a.input, &mut m)?.1.outcome_distributions(),
    };
    let report = metrics::score(&dists, &realized)?;
    io::write_file(&a.out_dir.join("metrics.csv"), &io::metrics_report_csv(&report, &m))?;
    io::write_file(&a.out_dir.join("metrics.json"), &io::metrics_report_json(&report, &m))?;
    println!("teams {}  MLD {}  Brier {:.6}  RPS {:.6}", report.teams.len(), report.mld, report.brier, report.rps);
    Ok(())
}

pub fn gof(ctx: &Context, a: GofArgs) -> Result<()> {
    let mut m = ctx.manifest("gof");
    let models = read_models(&a.models, &mut m)?;
    m.inputs.insert("matches".into(), path_str(&a.matches));
    let (window, weights) = ctx.window(&a.window, &mut m)?;
    let matches = io::load_matches(&a.matches, Some(window))?;
    let teams: Vec<String> = if a.teams.is_empty() { models.keys().cloned().collect() } else { a.teams.clone() };

    let mut rows = Vec::with_capacity(teams.len());
    for team in &teams {
        let model = models.get(team).ok_or_else(|| Error::TeamsWithoutModel(vec![team.clone()]))?;
        let mut results = [None; 3];
        for (slot, kind) in results.iter_mut().zip(RegressionKind::ALL) {
            *slot = match team_gof(team, kind, &matches, &weights, model) {
                Ok(g) if g.n > 0 => Some(g),
                Ok(_) | Err(RegressionError::NoMatches(_)) => None,
                Err(e) => return Err(e.into()),
            };
        }
        rows.push(GofRow { team: team.clone(), results, nested_source: model.nested.source });
    }
    io::write_file(&a.out, &io::gof_table_csv(&rows, &m))?;
    let low = rows
        .iter()
        .filter(|r| r.results.iter().flatten().any(|g| g.p_value < 0.05))
        .count();
    let given = rows.iter().filter(|r| r.nested_source == ModelSource::Given).count();
    println!("{} teams, {low} with a regression at p < 0.05 ({given} given models) -> {}", rows.len(), a.out.display());
    Ok(())
}
