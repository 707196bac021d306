//! Football Elo ratings.
//!
//! `Elo_after = Elo_before + K * G * (W - We)` with `We = 1 / (10^(-D/400) + 1)`.
//! No home-advantage offset is applied inside `We`; venue enters the match
//! model as a regression covariate instead.

use std::collections::{BTreeMap, HashMap};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data_io::MatchRecord;
use crate::scalar::Scalar;
use crate::weights::match_type;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EloError {
    #[error("goal difference must be non-negative, got {0}")]
    NegativeGoalDifference(i64),
    #[error("match {index} ({date} {team_a} v {team_b}): no seed rating for team `{team}`")]
    UnknownTeam {
        index: usize,
        date: NaiveDate,
        team_a: String,
        team_b: String,
        team: String,
    },
    #[error("matches are not in chronological order: match {index} on {date} follows {previous}")]
    Unsorted {
        index: usize,
        date: NaiveDate,
        previous: NaiveDate,
    },
    #[error("no K factor configured for match type `{code}` (known: {known})")]
    UnknownMatchType { code: String, known: String },
    #[error("duplicate seed rating for team `{0}`")]
    DuplicateSeed(String),
}

/// Rating of one team at a point in time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EloRating {
    pub team: String,
    pub elo: f64,
    pub as_of: NaiveDate,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EloUpdateInputs<T> {
    pub elo_before: T,
    pub elo_opponent: T,
    pub k_weight: T,
    pub goals_for: u32,
    pub goals_against: u32,
}

/// Win expectancy `We` of a side rated `elo_a` against `elo_b`.
pub fn expected_score<T: Scalar>(elo_a: T, elo_b: T) -> T {
    let d = elo_a - elo_b;
    T::one() / (T::lit(10.0).powf(-d / T::lit(400.0)) + T::one())
}

/// Goal-difference multiplier `G`.
pub fn goal_multiplier<T: Scalar>(goal_diff: i64) -> Result<T, EloError> {
    match goal_diff {
        n if n < 0 => Err(EloError::NegativeGoalDifference(n)),
        0 | 1 => Ok(T::one()),
        2 => Ok(T::lit(1.5)),
        n => Ok(T::lit((11 + n) as f64 / 8.0)),
    }
}

/// Match result `W`: 1 win, 0.5 draw, 0 loss.
pub fn match_outcome<T: Scalar>(goals_for: u32, goals_against: u32) -> T {
    use std::cmp::Ordering::*;
    match goals_for.cmp(&goals_against) {
        Greater => T::one(),
        Equal => T::lit(0.5),
        Less => T::zero(),
    }
}

/// Post-match rating.
pub fn update<T: Scalar>(inputs: EloUpdateInputs<T>) -> T {
    let diff = (inputs.goals_for as i64 - inputs.goals_against as i64).abs();
    let g: T = goal_multiplier(diff).expect("absolute difference is non-negative");
    let w = match_outcome::<T>(inputs.goals_for, inputs.goals_against);
    let we = expected_score(inputs.elo_before, inputs.elo_opponent);
    inputs.elo_before + inputs.k_weight * g * (w - we)
}

/// Rating change for both sides of one match: `(new_a, new_b)`.
pub fn update_pair<T: Scalar>(elo_a: T, elo_b: T, k: T, goals_a: u32, goals_b: u32) -> (T, T) {
    let new_a = update(EloUpdateInputs {
        elo_before: elo_a,
        elo_opponent: elo_b,
        k_weight: k,
        goals_for: goals_a,
        goals_against: goals_b,
    });
    let new_b = update(EloUpdateInputs {
        elo_before: elo_b,
        elo_opponent: elo_a,
        k_weight: k,
        goals_for: goals_b,
        goals_against: goals_a,
    });
    (new_a, new_b)
}

/// Tournament weight `K` per match-type code.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct KFactorTable(pub BTreeMap<String, f64>);

impl Default for KFactorTable {
    fn default() -> Self {
        let entries = [
            (match_type::WORLD_CUP, 60.0),
            (match_type::CONTINENTAL, 50.0),
            (match_type::QUALIFIER, 40.0),
            (match_type::NATIONS_LEAGUE, 40.0),
            (match_type::OTHER_TOURNAMENT, 30.0),
            (match_type::FRIENDLY, 20.0),
        ];
        Self(entries.iter().map(|(c, k)| (c.to_string(), *k)).collect())
    }
}

impl KFactorTable {
    pub fn k_for(&self, code: &str) -> Result<f64, EloError> {
        self.0.get(code).copied().ok_or_else(|| EloError::UnknownMatchType {
            code: code.to_string(),
            known: self.0.keys().cloned().collect::<Vec<_>>().join(", "),
        })
    }
}

/// Result of replaying a match history.
#[derive(Debug, Clone, PartialEq)]
pub struct Replay {
    /// Input matches with `elo_a_before` / `elo_b_before` filled in.
    pub matches: Vec<MatchRecord>,
    /// Ratings after the last match.
    pub ratings: BTreeMap<String, f64>,
}

/// Threads ratings through `matches` in order, recording each side's rating
/// immediately before every match.
pub fn replay_history(
    seeds: &[EloRating],
    matches: &[MatchRecord],
    k_table: &KFactorTable,
) -> Result<Replay, EloError> {
    let mut ratings: HashMap<&str, f64> = HashMap::with_capacity(seeds.len());
    for seed in seeds {
        if ratings.insert(seed.team.as_str(), seed.elo).is_some() {
            return Err(EloError::DuplicateSeed(seed.team.clone()));
        }
    }

    let mut annotated = Vec::with_capacity(matches.len());
    let mut previous: Option<NaiveDate> = None;
    for (index, m) in matches.iter().enumerate() {
        if let Some(prev) = previous {
            if m.date < prev {
                return Err(EloError::Unsorted { index, date: m.date, previous: prev });
            }
        }
        previous = Some(m.date);

        let lookup = |team: &str| {
            ratings.get(team).copied().ok_or_else(|| EloError::UnknownTeam {
                index,
                date: m.date,
                team_a: m.team_a.clone(),
                team_b: m.team_b.clone(),
                team: team.to_string(),
            })
        };
        let elo_a = lookup(&m.team_a)?;
        let elo_b = lookup(&m.team_b)?;
        let k = k_table.k_for(&m.match_type)?;

        let (new_a, new_b) = update_pair(elo_a, elo_b, k, m.goals_a, m.goals_b);
        ratings.insert(m.team_a.as_str(), new_a);
        ratings.insert(m.team_b.as_str(), new_b);

        let mut rec = m.clone();
        rec.elo_a_before = Some(elo_a);
        rec.elo_b_before = Some(elo_b);
        annotated.push(rec);
    }

    Ok(Replay {
        matches: annotated,
        ratings: ratings.into_iter().map(|(t, e)| (t.to_string(), e)).collect(),
    })
}
