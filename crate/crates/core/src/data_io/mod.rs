//! File ingestion and export.
//!
//! Every reader reports problems with the file path and the 1-based line
//! number of the offending row. Formats are documented in `docs/FORMATS.md`.

mod config;
mod export;
mod matches;
mod model_file;
mod ratings;
mod tournament_files;

use std::fmt;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use config::{load_config, Config, FitSection, SimulationSection, WeightsSection, CONFIG_DIR_ENV, CONFIG_FILE_NAME};
pub use export::{
    distributions_csv, gof_table_csv, grid_to_csv, grid_to_json, grid_to_svg, group_table_csv, group_table_json, metrics_report_csv,
    metrics_report_json, sha256_hex, stage_table_csv, stage_table_json, write_file, GofRow, RunManifest,
};
pub use matches::{load_matches, parse_matches, write_matches, DateWindow};
pub use model_file::{
    load_models, parse_models, render_model_file, render_models, save_models, ModelFile, ModelRecord,
    MODEL_FORMAT_VERSION,
};
pub use ratings::{load_ratings, parse_ratings, write_ratings};
pub use tournament_files::{
    load_allocation, load_distributions, load_fixtures, load_realized, parse_allocation,
    parse_distributions, parse_fixtures, parse_realized,
};

/// Token used in venue columns for a neutral ground.
pub const NEUTRAL: &str = "NEUTRAL";

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Venue {
    Neutral,
    Country(String),
}

impl Venue {
    pub fn parse(s: &str) -> Self {
        let s = s.trim();
        if s.is_empty() || s.eq_ignore_ascii_case(NEUTRAL) {
            Venue::Neutral
        } else {
            Venue::Country(s.to_string())
        }
    }

    pub fn country(&self) -> Option<&str> {
        match self {
            Venue::Neutral => None,
            Venue::Country(c) => Some(c),
        }
    }
}

impl fmt::Display for Venue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Venue::Neutral => f.write_str(NEUTRAL),
            Venue::Country(c) => f.write_str(c),
        }
    }
}

/// One historical international match, stored once as listed by the source.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchRecord {
    pub date: NaiveDate,
    pub team_a: String,
    pub team_b: String,
    pub goals_a: u32,
    pub goals_b: u32,
    pub match_type: String,
    pub venue: Venue,
    pub elo_a_before: Option<f64>,
    pub elo_b_before: Option<f64>,
}

impl MatchRecord {
    pub fn involves(&self, team: &str) -> bool {
        self.team_a == team || self.team_b == team
    }

    pub fn has_elo(&self) -> bool {
        self.elo_a_before.is_some() && self.elo_b_before.is_some()
    }
}

#[derive(Debug, Error)]
pub enum DataError {
    #[error("{path}:{line}: {message}")]
    Row { path: String, line: u64, message: String },
    #[error("{path}: {message}")]
    Schema { path: String, message: String },
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl DataError {
    pub(crate) fn row(path: &str, line: u64, message: impl Into<String>) -> Self {
        DataError::Row { path: path.to_string(), line, message: message.into() }
    }

    pub(crate) fn schema(path: &str, message: impl Into<String>) -> Self {
        DataError::Schema { path: path.to_string(), message: message.into() }
    }

    pub fn is_io(&self) -> bool {
        matches!(self, DataError::Read { .. } | DataError::Write { .. })
    }
}

/// Reads a whole file as UTF-8.
pub fn read_text(path: &Path) -> Result<String, DataError> {
    std::fs::read_to_string(path).map_err(|source| DataError::Read { path: path.to_path_buf(), source })
}

/// Header-indexed CSV reader shared by the loaders.
pub(crate) struct CsvTable {
    pub origin: String,
    pub headers: Vec<String>,
    pub rows: Vec<(u64, csv::StringRecord)>,
}

impl CsvTable {
    pub fn parse(origin: &str, text: &str) -> Result<Self, DataError> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .flexible(false)
            .from_reader(text.as_bytes());
        let headers = match reader.headers() {
            Ok(h) => h.iter().map(str::to_string).collect::<Vec<_>>(),
            Err(e) => return Err(DataError::schema(origin, format!("unreadable header: {e}"))),
        };
        if headers.iter().all(String::is_empty) {
            return Ok(Self { origin: origin.to_string(), headers: Vec::new(), rows: Vec::new() });
        }
        let mut rows = Vec::new();
        for rec in reader.records() {
            match rec {
                Ok(r) => {
                    let line = r.position().map(|p| p.line()).unwrap_or(0);
                    rows.push((line, r));
                }
                Err(e) => {
                    let line = e.position().map(|p| p.line()).unwrap_or(0);
                    return Err(DataError::row(origin, line, format!("malformed row: {e}")));
                }
            }
        }
        Ok(Self { origin: origin.to_string(), headers, rows })
    }

    pub fn is_empty_file(&self) -> bool {
        self.headers.is_empty()
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.headers.iter().position(|h| h == name)
    }

    pub fn require(&self, name: &str) -> Result<usize, DataError> {
        self.column(name).ok_or_else(|| {
            DataError::schema(&self.origin, format!("missing column `{name}` (found: {})", self.headers.join(",")))
        })
    }
}

pub(crate) fn parse_field<T: std::str::FromStr>(
    origin: &str,
    line: u64,
    column: &str,
    raw: &str,
) -> Result<T, DataError>
where
    T::Err: fmt::Display,
{
    raw.parse::<T>()
        .map_err(|e| DataError::row(origin, line, format!("column `{column}`: cannot parse `{raw}`: {e}")))
}

pub(crate) fn parse_date(origin: &str, line: u64, column: &str, raw: &str) -> Result<NaiveDate, DataError> {
    NaiveDate::parse_from_str(raw, "%Y-%m-%d").map_err(|e| {
        DataError::row(origin, line, format!("column `{column}`: `{raw}` is not an ISO-8601 date: {e}"))
    })
}
