use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use super::{parse_date, parse_field, read_text, CsvTable, DataError, Venue};
use crate::metrics::{OutcomeDistribution, RealizedRank, RealizedResult, N_RANKS};
use crate::tournament::{AllocationTable, Fixture, Slot, Stage};

fn origin(path: &Path) -> String {
    path.display().to_string()
}

pub fn load_fixtures(path: &Path) -> Result<Vec<Fixture>, DataError> {
    parse_fixtures(&origin(path), &read_text(path)?)
}

/// Parses `match_id,stage,group,slot_a,slot_b,venue_country,date`, keeping file order.
pub fn parse_fixtures(origin: &str, text: &str) -> Result<Vec<Fixture>, DataError> {
    let t = CsvTable::parse(origin, text)?;
    if t.is_empty_file() {
        return Err(DataError::schema(origin, "fixture file is empty"));
    }
    let cols = ["match_id", "stage", "group", "slot_a", "slot_b", "venue_country", "date"]
        .map(|c| t.require(c))
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    let mut out = Vec::with_capacity(t.rows.len());
    for (line, row) in &t.rows {
        let line = *line;
        let id = row[cols[0]].to_string();
        if id.is_empty() {
            return Err(DataError::row(origin, line, "empty match_id"));
        }
        let stage: Stage = row[cols[1]].parse().map_err(|e: String| DataError::row(origin, line, e))?;
        let group_raw = &row[cols[2]];
        let group = match (stage, group_raw.len()) {
            (Stage::Group, 1) if group_raw.as_bytes()[0].is_ascii_uppercase() => Some(group_raw.as_bytes()[0] as char),
            (Stage::Group, _) => {
                return Err(DataError::row(origin, line, format!("group fixture needs a group letter, found `{group_raw}`")))
            }
            (_, 0) => None,
            _ => return Err(DataError::row(origin, line, "knockout fixtures must leave `group` empty")),
        };
        let slot = |c: usize, name: &str| {
            Slot::parse(&row[c]).map_err(|e| DataError::row(origin, line, format!("column `{name}`: {e}")))
        };
        out.push(Fixture {
            match_id: id,
            stage,
            group,
            slot_a: slot(cols[3], "slot_a")?,
            slot_b: slot(cols[4], "slot_b")?,
            venue: Venue::parse(&row[cols[5]]),
            date: parse_date(origin, line, "date", &row[cols[6]])?,
        });
    }
    Ok(out)
}

pub fn load_allocation(path: &Path) -> Result<AllocationTable, DataError> {
    parse_allocation(&origin(path), &read_text(path)?)
}

/// Parses a `groups` column followed by one column per best-third slot,
/// headed by the slot label (`3rd-A/D/E/F`). Each cell names the group whose
/// third fills that slot. Completeness is checked when the tournament is built.
pub fn parse_allocation(origin: &str, text: &str) -> Result<AllocationTable, DataError> {
    let t = CsvTable::parse(origin, text)?;
    if t.is_empty_file() {
        return Err(DataError::schema(origin, "allocation file is empty"));
    }
    let c_groups = t.require("groups")?;
    let mut slots = Vec::new();
    let mut slot_cols = Vec::new();
    for (i, h) in t.headers.iter().enumerate() {
        if i == c_groups {
            continue;
        }
        match Slot::parse(h) {
            Ok(Slot::BestThird { groups }) => {
                slots.push(groups);
                slot_cols.push(i);
            }
            _ => return Err(DataError::schema(origin, format!("column `{h}` is not a best-third slot like 3rd-A/B/C"))),
        }
    }
    let mut rows = BTreeMap::new();
    for (line, row) in &t.rows {
        let raw = &row[c_groups];
        if raw.is_empty() || !raw.chars().all(|c| c.is_ascii_uppercase()) {
            return Err(DataError::row(origin, *line, format!("`groups` must be group letters, found `{raw}`")));
        }
        let key = AllocationTable::key(&raw.chars().collect::<Vec<_>>());
        let mut assigned = Vec::with_capacity(slot_cols.len());
        for &c in &slot_cols {
            let cell = &row[c];
            let mut chars = cell.chars();
            match (chars.next(), chars.next()) {
                (Some(g), None) if g.is_ascii_uppercase() => assigned.push(g),
                _ => {
                    return Err(DataError::row(
                        origin,
                        *line,
                        format!("column `{}`: expected a group letter, found `{cell}`", t.headers[c]),
                    ))
                }
            }
        }
        if rows.insert(key.clone(), assigned).is_some() {
            return Err(DataError::row(origin, *line, format!("second row for combination {key}")));
        }
    }
    Ok(AllocationTable { slots, rows })
}

pub fn load_realized(path: &Path) -> Result<Vec<RealizedResult>, DataError> {
    parse_realized(&origin(path), &read_text(path)?)
}

/// Parses `team,rank` with rank 1 (champion) to 6 (group-stage exit).
pub fn parse_realized(origin: &str, text: &str) -> Result<Vec<RealizedResult>, DataError> {
    let t = CsvTable::parse(origin, text)?;
    if t.is_empty_file() {
        return Ok(Vec::new());
    }
    let (c_team, c_rank) = (t.require("team")?, t.require("rank")?);
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (line, row) in &t.rows {
        let team = row[c_team].to_string();
        if !seen.insert(team.clone()) {
            return Err(DataError::row(origin, *line, format!("second result for `{team}`")));
        }
        let rank: u8 = parse_field(origin, *line, "rank", &row[c_rank])?;
        let rank = RealizedRank::new(rank).map_err(|e| DataError::row(origin, *line, e.to_string()))?;
        out.push(RealizedResult { team, rank });
    }
    Ok(out)
}

pub fn load_distributions(path: &Path) -> Result<Vec<OutcomeDistribution<f64>>, DataError> {
    parse_distributions(&origin(path), &read_text(path)?)
}

/// Parses `team,p1,...,p6`.
pub fn parse_distributions(origin: &str, text: &str) -> Result<Vec<OutcomeDistribution<f64>>, DataError> {
    let t = CsvTable::parse(origin, text)?;
    if t.is_empty_file() {
        return Ok(Vec::new());
    }
    let c_team = t.require("team")?;
    let names: Vec<String> = (1..=N_RANKS).map(|i| format!("p{i}")).collect();
    let cols = names.iter().map(|n| t.require(n)).collect::<Result<Vec<_>, _>>()?;
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (line, row) in &t.rows {
        let team = row[c_team].to_string();
        if !seen.insert(team.clone()) {
            return Err(DataError::row(origin, *line, format!("second distribution for `{team}`")));
        }
        let mut p = [0.0; N_RANKS];
        for (j, &c) in cols.iter().enumerate() {
            p[j] = parse_field(origin, *line, &names[j], &row[c])?;
        }
        let d = OutcomeDistribution::new(team, p).map_err(|e| DataError::row(origin, *line, e.to_string()))?;
        out.push(d);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixture_rows() {
        let text = "match_id,stage,group,slot_a,slot_b,venue_country,date\n\
                    1,GROUP,A,Turkey,Italy,Italy,2021-06-11\n\
                    39,R16,,1C,3rd-D/E/F,Hungary,2021-06-27\n\
                    51,FINAL,,winner-of-match-49,winner-of-match-50,England,2021-07-11\n";
        let f = parse_fixtures("f.csv", text).unwrap();
        assert_eq!(f.len(), 3);
        assert_eq!(f[0].group, Some('A'));
        assert_eq!(f[0].venue, Venue::Country("Italy".into()));
        assert_eq!(f[1].slot_b, Slot::BestThird { groups: vec!['D', 'E', 'F'] });
        assert_eq!(f[2].slot_a, Slot::Winner("49".into()));
    }

    #[test]
    fn fixture_errors_are_located() {
        let text = "match_id,stage,group,slot_a,slot_b,venue_country,date\n1,GROUP,,Turkey,Italy,Italy,2021-06-11\n";
        let e = parse_fixtures("f.csv", text).unwrap_err();
        assert!(e.to_string().starts_with("f.csv:2:"), "{e}");
        let text = "match_id,stage,group,slot_a,slot_b,venue_country,date\n1,GROUP,A,Turkey,Italy,Italy,11/06/2021\n";
        assert!(parse_fixtures("f.csv", text).unwrap_err().to_string().contains("f.csv:2:"));
    }

    #[test]
    fn allocation_rows() {
        let text = "groups,3rd-A/D/E/F,3rd-D/E/F,3rd-A/B/C/D,3rd-A/B/C\nABCD,A,D,B,C\n";
        let a = parse_allocation("a.csv", text).unwrap();
        assert_eq!(a.slots.len(), 4);
        assert_eq!(a.rows["ABCD"], vec!['A', 'D', 'B', 'C']);
        assert!(parse_allocation("a.csv", "groups,1A\nABCD,A\n").is_err());
        assert!(parse_allocation("a.csv", "groups,3rd-A/B\nAB,A\nBA,B\n").is_err());
    }

    #[test]
    fn realized_and_distributions() {
        let r = parse_realized("r.csv", "team,rank\nPortugal,1\nAustria,6\n").unwrap();
        assert_eq!(r[1].rank.get(), 6);
        assert!(parse_realized("r.csv", "team,rank\nPortugal,7\n").is_err());
        let d = parse_distributions("d.csv", "team,p1,p2,p3,p4,p5,p6\nX,0.5,0.5,0,0,0,0\n").unwrap();
        assert_eq!(d[0].most_likely_rank(), 1);
        assert!(parse_distributions("d.csv", "team,p1,p2,p3,p4,p5,p6\nX,0.5,0.6,0,0,0,0\n").is_err());
    }
}
