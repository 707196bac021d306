use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use chrono::NaiveDate;
use log::warn;
use serde::{Deserialize, Serialize};

use super::{parse_date, parse_field, read_text, CsvTable, DataError, MatchRecord, Venue};

/// Inclusive date range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DateWindow {
    pub start: NaiveDate,
    pub end: NaiveDate,
}

impl DateWindow {
    pub fn contains(&self, d: NaiveDate) -> bool {
        self.start <= d && d <= self.end
    }
}

const HEADER: &str = "date,team_a,team_b,goals_a,goals_b,match_type,venue_country,neutral,elo_a_before,elo_b_before";

pub fn load_matches(path: &Path, window: Option<DateWindow>) -> Result<Vec<MatchRecord>, DataError> {
    let text = read_text(path)?;
    parse_matches(&path.display().to_string(), &text, window)
}

/// Parses a match CSV, keeps rows inside `window` and sorts them by date
/// (stable, so same-day matches keep file order).
pub fn parse_matches(origin: &str, text: &str, window: Option<DateWindow>) -> Result<Vec<MatchRecord>, DataError> {
    let table = CsvTable::parse(origin, text)?;
    if table.is_empty_file() {
        return Ok(Vec::new());
    }
    let c_date = table.require("date")?;
    let c_a = table.require("team_a")?;
    let c_b = table.require("team_b")?;
    let c_ga = table.require("goals_a")?;
    let c_gb = table.require("goals_b")?;
    let c_type = table.require("match_type")?;
    let c_venue = table.require("venue_country")?;
    let c_neutral = table.column("neutral");
    let c_elo_a = table.column("elo_a_before");
    let c_elo_b = table.column("elo_b_before");

    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(table.rows.len());
    for (line, row) in &table.rows {
        let line = *line;
        let date = parse_date(origin, line, "date", &row[c_date])?;
        let team_a = row[c_a].to_string();
        let team_b = row[c_b].to_string();
        if team_a.is_empty() || team_b.is_empty() {
            return Err(DataError::row(origin, line, "team names must be non-empty"));
        }
        if team_a == team_b {
            return Err(DataError::row(origin, line, format!("team `{team_a}` listed against itself")));
        }
        let goals_a: u32 = parse_field(origin, line, "goals_a", &row[c_ga])?;
        let goals_b: u32 = parse_field(origin, line, "goals_b", &row[c_gb])?;
        let match_type = row[c_type].to_string();
        if match_type.is_empty() {
            return Err(DataError::row(origin, line, "empty match_type"));
        }
        let neutral = match c_neutral.map(|c| &row[c]) {
            None | Some("") => false,
            Some(v) => parse_bool(v).ok_or_else(|| {
                DataError::row(origin, line, format!("column `neutral`: expected true/false, got `{v}`"))
            })?,
        };
        let venue = if neutral { Venue::Neutral } else { Venue::parse(&row[c_venue]) };
        let elo = |col: Option<usize>, name: &str| -> Result<Option<f64>, DataError> {
            match col.map(|c| &row[c]) {
                None | Some("") => Ok(None),
                Some(v) => {
                    let x: f64 = parse_field(origin, line, name, v)?;
                    if !x.is_finite() {
                        return Err(DataError::row(origin, line, format!("column `{name}` must be finite")));
                    }
                    Ok(Some(x))
                }
            }
        };
        let elo_a_before = elo(c_elo_a, "elo_a_before")?;
        let elo_b_before = elo(c_elo_b, "elo_b_before")?;
        if elo_a_before.is_some() != elo_b_before.is_some() {
            return Err(DataError::row(origin, line, "elo_a_before and elo_b_before must both be set or both empty"));
        }

        if !seen.insert((date, team_a.clone(), team_b.clone())) {
            return Err(DataError::row(
                origin,
                line,
                format!("duplicate match {date} {team_a} v {team_b}"),
            ));
        }
        if window.is_some_and(|w| !w.contains(date)) {
            continue;
        }
        out.push(MatchRecord {
            date,
            team_a,
            team_b,
            goals_a,
            goals_b,
            match_type,
            venue,
            elo_a_before,
            elo_b_before,
        });
    }
    if out.is_empty() && !table.rows.is_empty() {
        warn!("{origin}: no matches inside the requested date window");
    }
    out.sort_by_key(|m| m.date);
    Ok(out)
}

fn parse_bool(v: &str) -> Option<bool> {
    match v.to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" => Some(true),
        "false" | "0" | "no" => Some(false),
        _ => None,
    }
}

pub fn write_matches(matches: &[MatchRecord]) -> String {
    let mut s = String::with_capacity(64 * (matches.len() + 1));
    s.push_str(HEADER);
    s.push('\n');
    for m in matches {
        let (country, neutral) = match &m.venue {
            Venue::Neutral => ("", "true"),
            Venue::Country(c) => (c.as_str(), "false"),
        };
        let elo = |e: Option<f64>| e.map(|x| format!("{x}")).unwrap_or_default();
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{}",
            m.date,
            csv_field(&m.team_a),
            csv_field(&m.team_b),
            m.goals_a,
            m.goals_b,
            m.match_type,
            csv_field(country),
            neutral,
            elo(m.elo_a_before),
            elo(m.elo_b_before)
        );
    }
    s
}

pub(crate) fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
