use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use super::matches::csv_field;
use super::{parse_date, parse_field, read_text, CsvTable, DataError};
use crate::elo::EloRating;

pub fn load_ratings(path: &Path) -> Result<Vec<EloRating>, DataError> {
    let text = read_text(path)?;
    parse_ratings(&path.display().to_string(), &text)
}

/// Parses `team,elo,as_of`; one rating per team.
pub fn parse_ratings(origin: &str, text: &str) -> Result<Vec<EloRating>, DataError> {
    let table = CsvTable::parse(origin, text)?;
    if table.is_empty_file() {
        return Ok(Vec::new());
    }
    let c_team = table.require("team")?;
    let c_elo = table.require("elo")?;
    let c_date = table.require("as_of")?;
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(table.rows.len());
    for (line, row) in &table.rows {
        let team = row[c_team].to_string();
        if team.is_empty() {
            return Err(DataError::row(origin, *line, "empty team name"));
        }
        let elo: f64 = parse_field(origin, *line, "elo", &row[c_elo])?;
        if !elo.is_finite() {
            return Err(DataError::row(origin, *line, "elo must be finite"));
        }
        let as_of = parse_date(origin, *line, "as_of", &row[c_date])?;
        if !seen.insert(team.clone()) {
            return Err(DataError::row(origin, *line, format!("second rating for team `{team}`")));
        }
        out.push(EloRating { team, elo, as_of });
    }
    Ok(out)
}

pub fn write_ratings(ratings: &[EloRating]) -> String {
    let mut s = String::from("team,elo,as_of\n");
    for r in ratings {
        let _ = writeln!(s, "{},{},{}", csv_field(&r.team), r.elo, r.as_of);
    }
    s
}
