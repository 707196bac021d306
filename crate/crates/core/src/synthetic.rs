//! Synthetic team models and match histories for tests, demos and smoke runs.
//!
//! Nothing here is fitted to real results.

use chrono::{Days, NaiveDate};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::data_io::{MatchRecord, Venue};
use crate::forecast::{MatchContext, NestedMatch};
use crate::regression::{beta_for_phi, gamma_for_omega, FitObservation, FittedRegression, RegressionCoefficients, TeamModel};
use crate::zigp::ZigpParams;
use crate::weights::match_type;

/// Elo sensitivity of the log goal intensity.
pub const ELO_SLOPE: f64 = 0.0025;
/// Goals per side between equally rated teams on neutral ground.
pub const BASE_GOALS: f64 = 1.3;
pub const HOME_EFFECT: f64 = 0.2;
/// Effect of each goal by the stronger side on the weaker side's intensity.
pub const NESTED_GOAL_EFFECT: f64 = -0.05;
pub const PHI: f64 = 1.1;
pub const OMEGA: f64 = 0.05;

/// Model whose strength follows `elo`: a 100-point edge scales goal
/// intensities by `exp(0.25)` in either direction.
pub fn strength_model(team: &str, elo: f64) -> TeamModel {
    let base = BASE_GOALS.ln();
    let coef = |alpha: Vec<f64>| {
        FittedRegression::given(RegressionCoefficients { alpha, beta: beta_for_phi(PHI), gamma_log: gamma_for_omega(OMEGA) })
    };
    TeamModel {
        team: team.to_string(),
        attack: coef(vec![base + ELO_SLOPE * elo, -ELO_SLOPE, HOME_EFFECT]),
        defense: coef(vec![base - ELO_SLOPE * elo, ELO_SLOPE, -HOME_EFFECT]),
        nested: coef(vec![base + ELO_SLOPE * elo - NESTED_GOAL_EFFECT * BASE_GOALS, -ELO_SLOPE, HOME_EFFECT, NESTED_GOAL_EFFECT]),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HistoryConfig {
    /// Team name and true strength on the Elo scale.
    pub teams: Vec<(String, f64)>,
    pub start: NaiveDate,
    pub end: NaiveDate,
    pub n_matches: usize,
    /// Probability a match is played in `team_a`'s country rather than on
    /// neutral ground.
    pub home_share: f64,
    pub seed: u64,
}

/// Random pairings on random dates, scored by [`strength_model`] with the
/// true strengths. Elo columns are left empty. Sorted by date; at most one
/// match per pair and day.
pub fn generate_history(cfg: &HistoryConfig) -> Vec<MatchRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let models: Vec<TeamModel> = cfg.teams.iter().map(|(t, e)| strength_model(t, *e)).collect();
    let span = (cfg.end - cfg.start).num_days().max(0) as u64;
    let types = [
        (match_type::FRIENDLY, 0.35),
        (match_type::QUALIFIER, 0.3),
        (match_type::NATIONS_LEAGUE, 0.15),
        (match_type::CONTINENTAL, 0.1),
        (match_type::WORLD_CUP, 0.07),
        (match_type::OTHER_TOURNAMENT, 0.03),
    ];
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::with_capacity(cfg.n_matches);
    let n = cfg.teams.len();
    while out.len() < cfg.n_matches && n >= 2 {
        let i = rng.random_range(0..n);
        let mut j = rng.random_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        let date = cfg.start + Days::new(rng.random_range(0..=span));
        if !seen.insert((date, i.min(j), i.max(j))) {
            continue;
        }
        let venue = if rng.random::<f64>() < cfg.home_share { Venue::Country(cfg.teams[i].0.clone()) } else { Venue::Neutral };
        let code = types.choose_weighted(&mut rng, |t| t.1).expect("non-empty weights").0;
        let ctx = MatchContext {
            team_a: cfg.teams[i].0.clone(),
            team_b: cfg.teams[j].0.clone(),
            elo_a: cfg.teams[i].1,
            elo_b: cfg.teams[j].1,
            venue: venue.clone(),
        };
        let (ga, gb) = NestedMatch::from_models(&models[i], &models[j], &ctx).sample(&mut rng).expect("synthetic models are valid");
        out.push(MatchRecord {
            date,
            team_a: ctx.team_a,
            team_b: ctx.team_b,
            goals_a: ga,
            goals_b: gb,
            match_type: code.to_string(),
            venue,
            elo_a_before: None,
            elo_b_before: None,
        });
    }
    out.sort_by_key(|m| m.date);
    out
}

/// `n` unit-weight observations drawn from a ZIGP regression with
/// covariates `(1, x, loc)`, `x` uniform on `[-2, 2]` and `loc` uniform on
/// `{-1, 0, 1}`. `alpha` must have three entries.
pub fn regression_sample(alpha: &[f64; 3], phi: f64, omega: f64, n: usize, seed: u64) -> Vec<FitObservation> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let x: f64 = rng.random_range(-2.0..=2.0);
            let loc = rng.random_range(-1i32..=1) as f64;
            let covariates = vec![1.0, x, loc];
            let mu = covariates.iter().zip(alpha).map(|(c, a)| c * a).sum::<f64>().exp();
            let response = ZigpParams::new(mu, phi, omega).expect("valid generator parameters").sample(&mut rng);
            FitObservation { response, covariates, weight: 1.0 }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_teams_score_base_goals() {
        let a = strength_model("A", 1800.0);
        let b = strength_model("B", 1800.0);
        let ctx = MatchContext { team_a: "A".into(), team_b: "B".into(), elo_a: 1800.0, elo_b: 1800.0, venue: Venue::Neutral };
        let m = NestedMatch::from_models(&a, &b, &ctx);
        assert!((m.stronger_params().unwrap().mu() - BASE_GOALS).abs() < 1e-12);
        assert!((m.weaker_params_given(0).unwrap().mu() - BASE_GOALS * (-NESTED_GOAL_EFFECT * BASE_GOALS).exp()).abs() < 1e-12);
    }

    #[test]
    fn history_is_sorted_and_reproducible() {
        let cfg = HistoryConfig {
            teams: vec![("A".into(), 1900.0), ("B".into(), 1800.0), ("C".into(), 1700.0)],
            start: NaiveDate::from_ymd_opt(2018, 1, 1).unwrap(),
            end: NaiveDate::from_ymd_opt(2020, 1, 1).unwrap(),
            n_matches: 200,
            home_share: 0.5,
            seed: 3,
        };
        let h = generate_history(&cfg);
        assert_eq!(h.len(), 200);
        assert!(h.windows(2).all(|w| w[0].date <= w[1].date));
        assert_eq!(h, generate_history(&cfg));
        let goals = |t: &str| -> u32 {
            h.iter().map(|m| if m.team_a == t { m.goals_a } else if m.team_b == t { m.goals_b } else { 0 }).sum()
        };
        assert!(goals("A") > goals("C"));
    }
}
