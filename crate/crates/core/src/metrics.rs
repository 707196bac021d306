//! Scores for tournament-outcome forecasts.
//!
//! A team's result rank is 1 (champion), 2 (lost the final), 3 (lost a
//! semi-final), 4 (lost a quarter-final), 5 (lost in the round of 16) or
//! 6 (out after the group stage). A forecast assigns a probability to each.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

pub const N_RANKS: usize = 6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("result rank must be in 1..=6, got {0}")]
    Rank(u8),
    #[error("probabilities for `{team}` must be non-negative and sum to 1 (sum = {sum})")]
    Distribution { team: String, sum: f64 },
    #[error("forecast and results cover different teams; only forecast: [{only_forecast}], only realized: [{only_realized}]")]
    TeamMismatch { only_forecast: String, only_realized: String },
    #[error("duplicate team `{0}`")]
    Duplicate(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeDistribution<T> {
    pub team: String,
    /// `p[i]` is the probability of result rank `i + 1`.
    pub p: [T; N_RANKS],
}

impl<T: Scalar> OutcomeDistribution<T> {
    pub fn new(team: impl Into<String>, p: [T; N_RANKS]) -> Result<Self, MetricsError> {
        let d = Self { team: team.into(), p };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<(), MetricsError> {
        let sum = self.p.iter().fold(T::zero(), |a, &b| a + b);
        let ok = self.p.iter().all(|&x| x >= T::zero() && x.is_finite())
            && (sum - T::one()).abs() <= T::lit(1e-9).max(T::epsilon() * T::lit(16.0));
        if ok {
            Ok(())
        } else {
            Err(MetricsError::Distribution { team: self.team.clone(), sum: sum.as_f64() })
        }
    }

    /// Rank with the highest probability; ties go to the smaller rank.
    pub fn most_likely_rank(&self) -> u8 {
        let mut best = 0;
        for i in 1..N_RANKS {
            if self.p[i] > self.p[best] {
                best = i;
            }
        }
        best as u8 + 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RealizedRank(u8);

impl RealizedRank {
    pub fn new(rank: u8) -> Result<Self, MetricsError> {
        if (1..=N_RANKS as u8).contains(&rank) {
            Ok(Self(rank))
        } else {
            Err(MetricsError::Rank(rank))
        }
    }

    pub fn get(self) -> u8 {
        self.0
    }

    fn indicator<T: Scalar>(self, index: usize) -> T {
        if index + 1 == self.0 as usize {
            T::one()
        } else {
            T::zero()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealizedResult {
    pub team: String,
    pub rank: RealizedRank,
}

/// `|realized - argmax_j p_j|` for one team.
pub fn mld_error<T: Scalar>(d: &OutcomeDistribution<T>, r: RealizedRank) -> T {
    T::lit((r.get() as f64 - d.most_likely_rank() as f64).abs())
}

/// `sum_j (p_j - 1[realized = j])^2` for one team.
pub fn brier_error<T: Scalar>(d: &OutcomeDistribution<T>, r: RealizedRank) -> T {
    d.p.iter()
        .enumerate()
        .map(|(j, &p)| {
            let e = p - r.indicator::<T>(j);
            e * e
        })
        .fold(T::zero(), |a, b| a + b)
}

/// `(1/5) sum_{i=1}^{5} (sum_{j<=i} (p_j - 1[realized = j]))^2` for one team.
pub fn rps_error<T: Scalar>(d: &OutcomeDistribution<T>, r: RealizedRank) -> T {
    let mut cum = T::zero();
    let mut total = T::zero();
    for i in 0..N_RANKS - 1 {
        cum = cum + d.p[i] - r.indicator::<T>(i);
        total = total + cum * cum;
    }
    total / T::lit((N_RANKS - 1) as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TeamScore<T> {
    pub team: String,
    pub realized: u8,
    pub predicted: u8,
    pub mld: T,
    pub brier: T,
    pub rps: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport<T> {
    /// Sorted by team name.
    pub teams: Vec<TeamScore<T>>,
    pub mld: T,
    pub brier: T,
    pub rps: T,
}

fn pair_up<'a, T: Scalar>(
    forecasts: &'a [OutcomeDistribution<T>],
    realized: &'a [RealizedResult],
) -> Result<Vec<(&'a OutcomeDistribution<T>, RealizedRank)>, MetricsError> {
    let mut by_team: BTreeMap<&str, &OutcomeDistribution<T>> = BTreeMap::new();
    for d in forecasts {
        d.validate()?;
        if by_team.insert(&d.team, d).is_some() {
            return Err(MetricsError::Duplicate(d.team.clone()));
        }
    }
    let mut outcomes: BTreeMap<&str, RealizedRank> = BTreeMap::new();
    for r in realized {
        if outcomes.insert(&r.team, r.rank).is_some() {
            return Err(MetricsError::Duplicate(r.team.clone()));
        }
    }
    let f: BTreeSet<&str> = by_team.keys().copied().collect();
    let o: BTreeSet<&str> = outcomes.keys().copied().collect();
    if f != o {
        return Err(MetricsError::TeamMismatch {
            only_forecast: f.difference(&o).copied().collect::<Vec<_>>().join(", "),
            only_realized: o.difference(&f).copied().collect::<Vec<_>>().join(", "),
        });
    }
    Ok(by_team.into_iter().map(|(t, d)| (d, outcomes[t])).collect())
}

/// Per-team and total MLD, Brier and RPS.
pub fn score<T: Scalar>(
    forecasts: &[OutcomeDistribution<T>],
    realized: &[RealizedResult],
) -> Result<MetricsReport<T>, MetricsError> {
    let pairs = pair_up(forecasts, realized)?;
    let teams: Vec<TeamScore<T>> = pairs
        .into_iter()
        .map(|(d, r)| TeamScore {
            team: d.team.clone(),
            realized: r.get(),
            predicted: d.most_likely_rank(),
            mld: mld_error(d, r),
            brier: brier_error(d, r),
            rps: rps_error(d, r),
        })
        .collect();
    let sum = |f: fn(&TeamScore<T>) -> T| teams.iter().map(f).fold(T::zero(), |a, b| a + b);
    Ok(MetricsReport { mld: sum(|t| t.mld), brier: sum(|t| t.brier), rps: sum(|t| t.rps), teams })
}

pub fn mld<T: Scalar>(f: &[OutcomeDistribution<T>], r: &[RealizedResult]) -> Result<T, MetricsError> {
    Ok(score(f, r)?.mld)
}

pub fn brier<T: Scalar>(f: &[OutcomeDistribution<T>], r: &[RealizedResult]) -> Result<T, MetricsError> {
    Ok(score(f, r)?.brier)
}

pub fn rps<T: Scalar>(f: &[OutcomeDistribution<T>], r: &[RealizedResult]) -> Result<T, MetricsError> {
    Ok(score(f, r)?.rps)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rank(r: u8) -> RealizedRank {
        RealizedRank::new(r).unwrap()
    }

    fn certain(team: &str, r: u8) -> OutcomeDistribution<f64> {
        let mut p = [0.0; 6];
        p[r as usize - 1] = 1.0;
        OutcomeDistribution::new(team, p).unwrap()
    }

    fn realized(team: &str, r: u8) -> RealizedResult {
        RealizedResult { team: team.into(), rank: rank(r) }
    }

    #[test]
    fn perfect_forecasts_score_zero() {
        let f = [certain("Portugal", 1), certain("Germany", 2), certain("Austria", 6)];
        let r = [realized("Portugal", 1), realized("Germany", 2), realized("Austria", 6)];
        let rep = score(&f, &r).unwrap();
        assert_eq!((rep.mld, rep.brier, rep.rps), (0.0, 0.0, 0.0));
    }

    #[test]
    fn uniform_brier() {
        let d = OutcomeDistribution::<f64>::new("X", [1.0 / 6.0; 6]).unwrap();
        for r in 1..=6 {
            assert!((brier_error(&d, rank(r)) - 25.0 / 30.0).abs() < 1e-15);
        }
    }

    #[test]
    fn two_category_rps() {
        let d = OutcomeDistribution::<f64>::new("X", [0.8, 0.2, 0.0, 0.0, 0.0, 0.0]).unwrap();
        assert!((rps_error(&d, rank(2)) - 0.128).abs() < 1e-15);
    }

    #[test]
    fn mld_far_miss_and_ties() {
        assert_eq!(mld_error(&certain("X", 1), rank(6)), 5.0);
        let tie = OutcomeDistribution::new("X", [0.0, 0.5, 0.5, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(tie.most_likely_rank(), 2);
    }

    #[test]
    fn team_mismatch_lists_difference() {
        let f = [certain("A", 1), certain("B", 2)];
        let r = [realized("A", 1), realized("C", 2)];
        match score(&f, &r) {
            Err(MetricsError::TeamMismatch { only_forecast, only_realized }) => {
                assert_eq!(only_forecast, "B");
                assert_eq!(only_realized, "C");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn invalid_inputs() {
        assert_eq!(RealizedRank::new(0), Err(MetricsError::Rank(0)));
        assert_eq!(RealizedRank::new(7), Err(MetricsError::Rank(7)));
        assert!(OutcomeDistribution::new("X", [0.5, 0.6, 0.0, 0.0, 0.0, 0.0]).is_err());
        assert!(OutcomeDistribution::new("X", [1.5, -0.5, 0.0, 0.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn single_precision() {
        let d = OutcomeDistribution::<f32>::new("X", [1.0 / 6.0; 6]).unwrap();
        assert!((brier_error(&d, rank(3)) - 25.0 / 30.0).abs() < 1e-6);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn dist() -> impl Strategy<Value = [f64; 6]> {
            proptest::array::uniform6(0.0f64..1.0).prop_filter_map("non-degenerate", |w| {
                let s: f64 = w.iter().sum();
                (s > 1e-6).then(|| w.map(|x| x / s))
            })
        }

        proptest! {
            #[test]
            fn bounds(p in dist(), r in 1u8..=6) {
                let d = OutcomeDistribution { team: "X".to_string(), p };
                let b = brier_error(&d, rank(r));
                let s = rps_error(&d, rank(r));
                prop_assert!((0.0..=2.0 + 1e-12).contains(&b));
                prop_assert!((0.0..=1.0 + 1e-12).contains(&s));
                prop_assert!(mld_error(&d, rank(r)) >= 0.0);
            }

            #[test]
            fn order_invariant(ps in proptest::collection::vec(dist(), 2..8), seed in any::<u64>()) {
                let f: Vec<_> = ps.iter().enumerate()
                    .map(|(i, p)| OutcomeDistribution { team: format!("T{i}"), p: *p }).collect();
                let r: Vec<_> = (0..f.len())
                    .map(|i| realized(&format!("T{i}"), (i % 6) as u8 + 1)).collect();
                let a = score(&f, &r).unwrap();
                let mut f2 = f.clone();
                let k = (seed as usize) % f2.len();
                f2.rotate_left(k);
                let mut r2 = r.clone();
                r2.reverse();
                let b = score(&f2, &r2).unwrap();
                prop_assert_eq!(a, b);
            }
        }
    }
}
