//! Regression weights of historical matches: recency decay times importance.

use std::collections::BTreeMap;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data_io::MatchRecord;

/// Match-type codes understood by the default K and importance tables.
pub mod match_type {
    /// World Cup finals.
    pub const WORLD_CUP: &str = "WC";
    /// Continental championship finals or Confederations Cup.
    pub const CONTINENTAL: &str = "CONT";
    /// World Cup or continental qualifier.
    pub const QUALIFIER: &str = "QUAL";
    pub const NATIONS_LEAGUE: &str = "NL";
    /// Any other competitive tournament.
    pub const OTHER_TOURNAMENT: &str = "OTHER";
    pub const FRIENDLY: &str = "FRIENDLY";
}

pub const DEFAULT_HALF_PERIOD_DAYS: u32 = 1095;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WeightError {
    #[error("match dated {date} lies after the reference date {reference}")]
    FutureMatch { date: NaiveDate, reference: NaiveDate },
    #[error("no importance weight configured for match type `{code}` (valid codes: {valid})")]
    UnknownMatchType { code: String, valid: String },
    #[error("invalid weight configuration: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ImportanceTable(pub BTreeMap<String, f64>);

impl Default for ImportanceTable {
    fn default() -> Self {
        use match_type::*;
        let entries = [
            (WORLD_CUP, 4.0),
            (CONTINENTAL, 3.0),
            (QUALIFIER, 2.5),
            (NATIONS_LEAGUE, 2.5),
            (OTHER_TOURNAMENT, 1.0),
            (FRIENDLY, 1.0),
        ];
        Self(entries.iter().map(|(c, w)| (c.to_string(), *w)).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightConfig {
    pub half_period_days: u32,
    pub reference_date: NaiveDate,
    pub importance: ImportanceTable,
}

impl WeightConfig {
    pub fn new(reference_date: NaiveDate) -> Self {
        Self {
            half_period_days: DEFAULT_HALF_PERIOD_DAYS,
            reference_date,
            importance: ImportanceTable::default(),
        }
    }

    pub fn validate(&self) -> Result<(), WeightError> {
        if self.half_period_days == 0 {
            return Err(WeightError::Invalid("half_period_days must be positive".into()));
        }
        if let Some((code, w)) = self.importance.0.iter().find(|(_, w)| !(**w > 0.0 && w.is_finite())) {
            return Err(WeightError::Invalid(format!("importance for `{code}` must be positive, got {w}")));
        }
        Ok(())
    }
}

/// `(1/2)^(D/H)` where `D` is the day count from `match_date` to the reference date.
pub fn date_weight(match_date: NaiveDate, cfg: &WeightConfig) -> Result<f64, WeightError> {
    let days = (cfg.reference_date - match_date).num_days();
    if days < 0 {
        return Err(WeightError::FutureMatch { date: match_date, reference: cfg.reference_date });
    }
    Ok(0.5f64.powf(days as f64 / cfg.half_period_days as f64))
}

pub fn importance_weight(code: &str, cfg: &WeightConfig) -> Result<f64, WeightError> {
    cfg.importance.0.get(code).copied().ok_or_else(|| WeightError::UnknownMatchType {
        code: code.to_string(),
        valid: cfg.importance.0.keys().cloned().collect::<Vec<_>>().join(", "),
    })
}

pub fn match_weight(m: &MatchRecord, cfg: &WeightConfig) -> Result<f64, WeightError> {
    Ok(date_weight(m.date, cfg)? * importance_weight(&m.match_type, cfg)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data_io::Venue;
    use chrono::Days;

    fn cfg() -> WeightConfig {
        WeightConfig::new("2021-06-07".parse().unwrap())
    }

    fn days_ago(n: u64) -> NaiveDate {
        cfg().reference_date.checked_sub_days(Days::new(n)).unwrap()
    }

    fn game(date: NaiveDate, kind: &str) -> MatchRecord {
        MatchRecord {
            date,
            team_a: "A".into(),
            team_b: "B".into(),
            goals_a: 0,
            goals_b: 0,
            match_type: kind.into(),
            venue: Venue::Neutral,
            elo_a_before: None,
            elo_b_before: None,
        }
    }

    #[test]
    fn decay() {
        let c = cfg();
        assert_eq!(date_weight(days_ago(0), &c).unwrap(), 1.0);
        assert_eq!(date_weight(days_ago(1095), &c).unwrap(), 0.5);
        assert_eq!(date_weight(days_ago(2190), &c).unwrap(), 0.25);
        let tomorrow = c.reference_date.succ_opt().unwrap();
        assert!(matches!(date_weight(tomorrow, &c), Err(WeightError::FutureMatch { .. })));
    }

    #[test]
    fn importance() {
        let c = cfg();
        assert_eq!(importance_weight(match_type::WORLD_CUP, &c).unwrap(), 4.0);
        assert_eq!(importance_weight(match_type::CONTINENTAL, &c).unwrap(), 3.0);
        assert_eq!(importance_weight(match_type::QUALIFIER, &c).unwrap(), 2.5);
        assert_eq!(importance_weight(match_type::NATIONS_LEAGUE, &c).unwrap(), 2.5);
        assert_eq!(importance_weight(match_type::FRIENDLY, &c).unwrap(), 1.0);
        match importance_weight("BOGUS", &c) {
            Err(WeightError::UnknownMatchType { valid, .. }) => assert!(valid.contains("WC")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn combined() {
        let c = cfg();
        assert_eq!(match_weight(&game(days_ago(0), match_type::FRIENDLY), &c).unwrap(), 1.0);
        assert_eq!(match_weight(&game(days_ago(1095), match_type::WORLD_CUP), &c).unwrap(), 2.0);
        assert_eq!(match_weight(&game(days_ago(2190), match_type::CONTINENTAL), &c).unwrap(), 0.75);
    }

    #[test]
    fn rejects_bad_config() {
        let mut c = cfg();
        c.half_period_days = 0;
        assert!(c.validate().is_err());
        let mut c = cfg();
        c.importance.0.insert("X".into(), 0.0);
        assert!(c.validate().is_err());
        assert!(cfg().validate().is_ok());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn decay_in_unit_interval_and_decreasing(d in 0u64..20_000) {
                let c = cfg();
                let w0 = date_weight(days_ago(d), &c).unwrap();
                let w1 = date_weight(days_ago(d + 1), &c).unwrap();
                prop_assert!(w0 > 0.0 && w0 <= 1.0);
                prop_assert!(w1 < w0);
            }

            #[test]
            fn importance_scaling_is_proportional(d in 0u64..5000, scale in 0.1f64..10.0) {
                let c = cfg();
                let mut scaled = c.clone();
                for w in scaled.importance.0.values_mut() {
                    *w *= scale;
                }
                for kind in [match_type::WORLD_CUP, match_type::QUALIFIER, match_type::FRIENDLY] {
                    let m = game(days_ago(d), kind);
                    let a = match_weight(&m, &c).unwrap();
                    let b = match_weight(&m, &scaled).unwrap();
                    prop_assert!((b - scale * a).abs() <= 1e-12 * b.abs().max(1.0));
                }
            }
        }
    }
}
