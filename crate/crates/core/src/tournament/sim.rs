//! One simulated tournament and the Monte Carlo driver.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::aggregate::SimulationAggregate;
use super::group::{rank_group, select_best_thirds, GroupMatch, GroupState};
use super::{ResolvedSlot, Stage, Tournament, TournamentError};
use crate::data_io::Venue;
use crate::elo::{expected_score, update_pair};
use crate::forecast::{ForecastError, MatchContext, ModelLookup, NestedMatch};
use crate::regression::TeamModel;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimSettings {
    /// Elo K-factor for simulated matches.
    pub k: f64,
    /// Multiplier on both goal intensities during extra time.
    pub extra_time_scale: f64,
}

impl Default for SimSettings {
    fn default() -> Self {
        Self { k: 50.0, extra_time_scale: 1.0 / 3.0 }
    }
}

/// One score draw request, in the listed orientation.
#[derive(Debug, Clone, Copy)]
pub struct SampleRequest<'a> {
    pub a: usize,
    pub b: usize,
    pub elo_a: f64,
    pub elo_b: f64,
    pub venue: &'a Venue,
    pub intensity_scale: f64,
}

/// Source of simulated scores.
pub trait ScoreSampler: Sync {
    fn sample<R: Rng + ?Sized>(&self, req: &SampleRequest<'_>, rng: &mut R) -> Result<(u32, u32), ForecastError>;
}

/// Every match ends with the same score.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FixedSampler(pub u32, pub u32);

impl ScoreSampler for FixedSampler {
    fn sample<R: Rng + ?Sized>(&self, _: &SampleRequest<'_>, _: &mut R) -> Result<(u32, u32), ForecastError> {
        Ok((self.0, self.1))
    }
}

/// Samples scores from fitted team models with the nested ZIGP model.
#[derive(Debug, Clone)]
pub struct ZigpSampler {
    teams: Vec<String>,
    models: Vec<TeamModel>,
}

impl ZigpSampler {
    /// Fails if any team in the tournament has no model or an invalid one.
    pub fn new(tournament: &Tournament, models: &(impl ModelLookup + ?Sized)) -> Result<Self, TournamentError> {
        let missing: Vec<String> = tournament.teams.iter().filter(|t| models.model(t).is_none()).cloned().collect();
        if !missing.is_empty() {
            return Err(TournamentError::MissingModels(missing));
        }
        let models: Vec<TeamModel> = tournament.teams.iter().map(|t| models.model(t).expect("checked").clone()).collect();
        for m in &models {
            m.validate().map_err(TournamentError::Config)?;
        }
        Ok(Self { teams: tournament.teams.clone(), models })
    }
}

impl ScoreSampler for ZigpSampler {
    fn sample<R: Rng + ?Sized>(&self, req: &SampleRequest<'_>, rng: &mut R) -> Result<(u32, u32), ForecastError> {
        let ctx = MatchContext {
            team_a: self.teams[req.a].clone(),
            team_b: self.teams[req.b].clone(),
            elo_a: req.elo_a,
            elo_b: req.elo_b,
            venue: req.venue.clone(),
        };
        NestedMatch::from_models(&self.models[req.a], &self.models[req.b], &ctx).sample_scaled(rng, req.intensity_scale)
    }
}

/// Plays the group's fixtures in order, updating `elo` after each match.
pub fn simulate_group<S: ScoreSampler, R: Rng + ?Sized>(
    tournament: &Tournament,
    group: usize,
    sampler: &S,
    elo: &mut [f64],
    settings: &SimSettings,
    rng: &mut R,
) -> Result<GroupState, ForecastError> {
    let g = &tournament.groups[group];
    let mut state = GroupState::new(g.teams.clone());
    for f in &g.fixtures {
        let req = SampleRequest { a: f.a, b: f.b, elo_a: elo[f.a], elo_b: elo[f.b], venue: &f.venue, intensity_scale: 1.0 };
        let (ga, gb) = sampler.sample(&req, rng)?;
        let (ea, eb) = update_pair(elo[f.a], elo[f.b], settings.k, ga, gb);
        elo[f.a] = ea;
        elo[f.b] = eb;
        state.record(GroupMatch { a: f.a, b: f.b, goals_a: ga, goals_b: gb });
    }
    Ok(state)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KnockoutResult {
    pub a: usize,
    pub b: usize,
    /// Goals after regulation and, if played, extra time.
    pub goals_a: u32,
    pub goals_b: u32,
    pub extra_time: bool,
    /// `Some(true)` if `a` won a penalty shootout.
    pub shootout_a_won: Option<bool>,
    pub winner: usize,
    pub loser: usize,
}

/// Plays a knockout match: 90 minutes, then extra time with scaled
/// intensities if level, then a shootout that `a` wins with probability
/// `We(elo_a - elo_b)`. Elo is updated on the score after extra time.
pub fn simulate_knockout_match<S: ScoreSampler, R: Rng + ?Sized>(
    a: usize,
    b: usize,
    venue: &Venue,
    sampler: &S,
    elo: &mut [f64],
    settings: &SimSettings,
    rng: &mut R,
) -> Result<KnockoutResult, ForecastError> {
    let mut req = SampleRequest { a, b, elo_a: elo[a], elo_b: elo[b], venue, intensity_scale: 1.0 };
    let (mut ga, mut gb) = sampler.sample(&req, rng)?;
    let mut extra_time = false;
    let mut shootout_a_won = None;
    if ga == gb {
        extra_time = true;
        req.intensity_scale = settings.extra_time_scale;
        let (ea, eb) = sampler.sample(&req, rng)?;
        ga += ea;
        gb += eb;
        if ga == gb {
            let p_a = expected_score(elo[a], elo[b]);
            shootout_a_won = Some(rng.random::<f64>() < p_a);
        }
    }
    let a_won = match shootout_a_won {
        Some(w) => w,
        None => ga > gb,
    };
    let (ea, eb) = update_pair(elo[a], elo[b], settings.k, ga, gb);
    elo[a] = ea;
    elo[b] = eb;
    let (winner, loser) = if a_won { (a, b) } else { (b, a) };
    Ok(KnockoutResult { a, b, goals_a: ga, goals_b: gb, extra_time, shootout_a_won, winner, loser })
}

/// Final standing of every team after one simulated tournament.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOutcome {
    /// Group position `1..=group size`, per team index.
    pub group_position: Vec<u8>,
    pub third_qualified: Vec<bool>,
    /// Last knockout stage reached, `None` for a group-stage exit.
    pub reached: Vec<Option<Stage>>,
    pub champion: usize,
}

impl RunOutcome {
    /// 1 champion, 2 beaten finalist, 3 semi-final, 4 quarter-final,
    /// 5 round of 16, 6 group stage.
    pub fn result_rank(&self, team: usize) -> u8 {
        if team == self.champion {
            return 1;
        }
        self.reached[team].map(Stage::elimination_rank).unwrap_or(Stage::Group.elimination_rank())
    }
}

impl Tournament {
    /// Base ratings in team-index order.
    pub fn base_elo(&self, ratings: &BTreeMap<String, f64>) -> Result<Vec<f64>, TournamentError> {
        let missing: Vec<String> = self.teams.iter().filter(|t| !ratings.contains_key(*t)).cloned().collect();
        if !missing.is_empty() {
            return Err(TournamentError::MissingRatings(missing));
        }
        Ok(self.teams.iter().map(|t| ratings[t]).collect())
    }
}

/// Simulates one complete tournament starting from `base_elo`.
pub fn run_tournament<S: ScoreSampler, R: Rng + ?Sized>(
    tournament: &Tournament,
    sampler: &S,
    base_elo: &[f64],
    settings: &SimSettings,
    rng: &mut R,
) -> Result<RunOutcome, TournamentError> {
    let n = tournament.teams.len();
    let mut elo = base_elo.to_vec();
    let mut group_position = vec![0u8; n];
    let mut third_qualified = vec![false; n];
    let mut reached: Vec<Option<Stage>> = vec![None; n];

    let mut standings = Vec::with_capacity(tournament.groups.len());
    let mut states = Vec::with_capacity(tournament.groups.len());
    for gi in 0..tournament.groups.len() {
        states.push(simulate_group(tournament, gi, sampler, &mut elo, settings, rng)?);
    }
    for state in &states {
        let order = rank_group(state, &elo, rng);
        for (pos, &t) in order.iter().enumerate() {
            group_position[t] = pos as u8 + 1;
        }
        standings.push(order);
    }

    let mut third_groups = Vec::new();
    if tournament.n_best_thirds > 0 {
        let thirds: Vec<_> = standings.iter().zip(&states).map(|(o, s)| s.record_of(o[2])).collect();
        let ranked = select_best_thirds(&thirds, &elo, rng);
        for &t in ranked.iter().take(tournament.n_best_thirds) {
            third_qualified[t] = true;
            third_groups.push(tournament.groups[tournament.team_group[t]].name);
        }
    }
    let third_assignment: Vec<usize> = if tournament.n_best_thirds > 0 {
        tournament
            .allocation
            .assign(&third_groups)?
            .iter()
            .map(|g| {
                let gi = tournament.groups.iter().position(|x| x.name == *g).expect("validated group");
                standings[gi][2]
            })
            .collect()
    } else {
        Vec::new()
    };

    let mut winners = Vec::with_capacity(tournament.knockout.len());
    let resolve = |slot: &ResolvedSlot, winners: &[usize]| match *slot {
        ResolvedSlot::Team(t) => t,
        ResolvedSlot::GroupRank { group, rank } => standings[group][rank - 1],
        ResolvedSlot::BestThird { slot } => third_assignment[slot],
        ResolvedSlot::Winner(j) => winners[j],
    };
    for k in &tournament.knockout {
        let a = resolve(&k.a, &winners);
        let b = resolve(&k.b, &winners);
        reached[a] = Some(k.stage);
        reached[b] = Some(k.stage);
        let r = simulate_knockout_match(a, b, &k.venue, sampler, &mut elo, settings, rng)?;
        winners.push(r.winner);
    }
    let champion = *winners.last().expect("validated bracket has a final");
    Ok(RunOutcome { group_position, third_qualified, reached, champion })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonteCarloOptions {
    pub n_runs: u64,
    pub seed: u64,
    /// Worker threads; `None` uses the global pool.
    pub workers: Option<usize>,
}

const CHUNK: u64 = 256;

/// RNG for run `i`: the master seed's ChaCha8 generator on stream `i`.
pub fn run_rng(seed: u64, run: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(run);
    rng
}

/// Runs `n_runs` independent tournaments and counts outcomes. The result
/// depends only on the inputs and seed, not on the number of workers.
pub fn monte_carlo<S: ScoreSampler>(
    tournament: &Tournament,
    sampler: &S,
    base_elo: &[f64],
    settings: &SimSettings,
    opts: &MonteCarloOptions,
) -> Result<SimulationAggregate, TournamentError> {
    if opts.n_runs == 0 {
        return Err(TournamentError::NoRuns);
    }
    if base_elo.len() != tournament.teams.len() {
        return Err(TournamentError::Config(format!(
            "{} base ratings for {} teams",
            base_elo.len(),
            tournament.teams.len()
        )));
    }
    let n_chunks = opts.n_runs.div_ceil(CHUNK);
    let work = || {
        (0..n_chunks)
            .into_par_iter()
            .map(|c| {
                let mut agg = SimulationAggregate::empty(tournament);
                for i in c * CHUNK..((c + 1) * CHUNK).min(opts.n_runs) {
                    let mut rng = run_rng(opts.seed, i);
                    agg.record(&run_tournament(tournament, sampler, base_elo, settings, &mut rng)?);
                }
                Ok(agg)
            })
            .try_reduce(|| SimulationAggregate::empty(tournament), |a, b| Ok(a.merge(b)))
    };
    match opts.workers {
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w.max(1))
                .build()
                .map_err(|e| TournamentError::Config(format!("cannot start worker pool: {e}")))?;
            pool.install(work)
        }
        None => work(),
    }
}
