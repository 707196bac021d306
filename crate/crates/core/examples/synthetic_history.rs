//! Writes a synthetic match history and seed ratings for the EURO 2020 field.
//!
//! Usage: `synthetic_history [RATINGS_CSV] [OUT_DIR]`, defaulting to
//! `data/euro2020/ratings.csv` and `data/synthetic`. Goals follow
//! `eurocast::synthetic::strength_model` with the listed ratings as true
//! strengths. Seeds are those strengths as of the day before the first match.

use std::path::PathBuf;

use chrono::{Days, NaiveDate};
use eurocast::data_io::{load_ratings, write_file, write_matches, write_ratings};
use eurocast::elo::EloRating;
use eurocast::synthetic::{generate_history, HistoryConfig};

fn main() -> Result<(), eurocast::Error> {
    let mut args = std::env::args().skip(1);
    let ratings_path = PathBuf::from(args.next().unwrap_or_else(|| "data/euro2020/ratings.csv".into()));
    let out = PathBuf::from(args.next().unwrap_or_else(|| "data/synthetic".into()));

    let ratings = load_ratings(&ratings_path)?;
    let start = NaiveDate::from_ymd_opt(2014, 1, 1).expect("valid date");
    let cfg = HistoryConfig {
        teams: ratings.iter().map(|r| (r.team.clone(), r.elo)).collect(),
        start,
        end: NaiveDate::from_ymd_opt(2021, 6, 7).expect("valid date"),
        n_matches: 3000,
        home_share: 0.6,
        seed: 2021,
    };
    let history = generate_history(&cfg);
    let seeds: Vec<EloRating> = ratings
        .into_iter()
        .map(|r| EloRating { as_of: start - Days::new(1), ..r })
        .collect();
    write_file(&out.join("matches.csv"), &write_matches(&history))?;
    write_file(&out.join("seeds.csv"), &write_ratings(&seeds))?;
    println!("{} matches -> {}", history.len(), out.display());
    Ok(())
}
