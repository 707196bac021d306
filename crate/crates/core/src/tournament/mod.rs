//! Group stage, best-third qualification and knockout bracket of a 24-team
//! EURO, simulated many times with live Elo ratings.

mod aggregate;
mod group;
mod sim;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data_io::Venue;
use crate::forecast::ForecastError;

pub use aggregate::{Estimate, GroupProbabilities, SimulationAggregate, StageProbabilities, TeamCounters};
pub use group::{rank_group, select_best_thirds, GroupMatch, GroupState, TeamRecord};
pub use sim::{
    monte_carlo, run_rng, run_tournament, simulate_group, simulate_knockout_match, FixedSampler, KnockoutResult,
    MonteCarloOptions, RunOutcome, SampleRequest, ScoreSampler, SimSettings, ZigpSampler,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TournamentError {
    #[error("invalid tournament: {0}")]
    Config(String),
    #[error("no third-place allocation row for qualified groups {0}")]
    MissingAllocation(String),
    #[error("no fitted model for: {}", .0.join(", "))]
    MissingModels(Vec<String>),
    #[error("no base rating for: {}", .0.join(", "))]
    MissingRatings(Vec<String>),
    #[error("number of runs must be at least 1")]
    NoRuns,
    #[error(transparent)]
    Forecast(#[from] ForecastError),
}

fn config_err(msg: impl Into<String>) -> TournamentError {
    TournamentError::Config(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Stage {
    Group,
    R16,
    QF,
    SF,
    Final,
}

impl Stage {
    pub const KNOCKOUT: [Stage; 4] = [Stage::R16, Stage::QF, Stage::SF, Stage::Final];

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Group => "GROUP",
            Stage::R16 => "R16",
            Stage::QF => "QF",
            Stage::SF => "SF",
            Stage::Final => "FINAL",
        }
    }

    /// Result rank of a team knocked out in this stage.
    pub fn elimination_rank(self) -> u8 {
        match self {
            Stage::Group => 6,
            Stage::R16 => 5,
            Stage::QF => 4,
            Stage::SF => 3,
            Stage::Final => 2,
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Stage {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "GROUP" => Ok(Stage::Group),
            "R16" => Ok(Stage::R16),
            "QF" => Ok(Stage::QF),
            "SF" => Ok(Stage::SF),
            "FINAL" => Ok(Stage::Final),
            _ => Err(format!("unknown stage `{s}` (expected GROUP, R16, QF, SF or FINAL)")),
        }
    }
}

const WINNER_PREFIX: &str = "winner-of-match-";
const THIRD_PREFIX: &str = "3rd-";

/// Who plays in one side of a fixture.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Slot {
    Team(String),
    /// `1A`: the team finishing `rank` in `group`.
    GroupRank { group: char, rank: u8 },
    /// `3rd-A/D/E/F`: a qualified third from one of `groups`, chosen by the
    /// allocation table.
    BestThird { groups: Vec<char> },
    /// `winner-of-match-40`.
    Winner(String),
}

impl Slot {
    pub fn parse(raw: &str) -> Result<Slot, String> {
        let s = raw.trim();
        if s.is_empty() {
            return Err("empty slot".into());
        }
        if let Some(id) = s.strip_prefix(WINNER_PREFIX) {
            if id.is_empty() {
                return Err(format!("slot `{s}` names no match"));
            }
            return Ok(Slot::Winner(id.to_string()));
        }
        if let Some(rest) = s.strip_prefix(THIRD_PREFIX) {
            let mut groups = Vec::new();
            for part in rest.split('/') {
                let mut chars = part.chars();
                match (chars.next(), chars.next()) {
                    (Some(g), None) if g.is_ascii_uppercase() => groups.push(g),
                    _ => return Err(format!("slot `{s}`: expected groups like 3rd-A/B/C")),
                }
            }
            let mut sorted = groups.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != groups.len() {
                return Err(format!("slot `{s}` repeats a group"));
            }
            return Ok(Slot::BestThird { groups: sorted });
        }
        let b = s.as_bytes();
        if b.len() == 2 && (b'1'..=b'9').contains(&b[0]) && b[1].is_ascii_uppercase() {
            return Ok(Slot::GroupRank { group: b[1] as char, rank: b[0] - b'0' });
        }
        Ok(Slot::Team(s.to_string()))
    }

    /// Label used for best-third slots in the allocation table.
    pub fn third_label(groups: &[char]) -> String {
        let parts: Vec<String> = groups.iter().map(|g| g.to_string()).collect();
        format!("{THIRD_PREFIX}{}", parts.join("/"))
    }
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Slot::Team(t) => f.write_str(t),
            Slot::GroupRank { group, rank } => write!(f, "{rank}{group}"),
            Slot::BestThird { groups } => f.write_str(&Slot::third_label(groups)),
            Slot::Winner(id) => write!(f, "{WINNER_PREFIX}{id}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fixture {
    pub match_id: String,
    pub stage: Stage,
    pub group: Option<char>,
    pub slot_a: Slot,
    pub slot_b: Slot,
    pub venue: Venue,
    pub date: NaiveDate,
}

/// Maps each combination of qualified third-place groups to the group whose
/// third fills each best-third slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllocationTable {
    /// Best-third slots in column order.
    pub slots: Vec<Vec<char>>,
    /// Key: qualified groups in alphabetical order, e.g. `ABCD`. Value: one
    /// group per slot, in column order.
    pub rows: BTreeMap<String, Vec<char>>,
}

impl AllocationTable {
    pub fn key(groups: &[char]) -> String {
        let mut g = groups.to_vec();
        g.sort_unstable();
        g.into_iter().collect()
    }

    /// Group supplying each best-third slot when `qualified` groups' thirds advance.
    pub fn assign(&self, qualified: &[char]) -> Result<&[char], TournamentError> {
        let key = Self::key(qualified);
        self.rows.get(&key).map(Vec::as_slice).ok_or(TournamentError::MissingAllocation(key))
    }

    /// Checks every row against the slot constraints and that all
    /// `C(n_groups, n_slots)` combinations are present.
    pub fn validate(&self, groups: &[char]) -> Result<(), TournamentError> {
        let n = self.slots.len();
        for (key, row) in &self.rows {
            if row.len() != n {
                return Err(config_err(format!("allocation row {key}: expected {n} entries, found {}", row.len())));
            }
            let combo: BTreeSet<char> = key.chars().collect();
            let assigned: BTreeSet<char> = row.iter().copied().collect();
            if combo.len() != n || combo != assigned {
                return Err(config_err(format!(
                    "allocation row {key}: entries {} are not a permutation of the qualified groups",
                    row.iter().collect::<String>()
                )));
            }
            for (slot, g) in self.slots.iter().zip(row) {
                if !slot.contains(g) {
                    return Err(config_err(format!(
                        "allocation row {key}: group {g} cannot fill slot {}",
                        Slot::third_label(slot)
                    )));
                }
            }
            if let Some(g) = combo.iter().find(|g| !groups.contains(g)) {
                return Err(config_err(format!("allocation row {key}: unknown group {g}")));
            }
        }
        let expected = combinations(groups, n);
        let missing: Vec<String> = expected.iter().filter(|k| !self.rows.contains_key(*k)).cloned().collect();
        if !missing.is_empty() {
            return Err(config_err(format!(
                "allocation table has {} of {} combinations; missing {}",
                self.rows.len(),
                expected.len(),
                missing.join(", ")
            )));
        }
        Ok(())
    }
}

/// All `k`-subsets of `items`, each as a sorted string.
pub fn combinations(items: &[char], k: usize) -> Vec<String> {
    let mut sorted = items.to_vec();
    sorted.sort_unstable();
    let mut out = Vec::new();
    let mut pick = Vec::with_capacity(k);
    fn rec(items: &[char], k: usize, start: usize, pick: &mut Vec<char>, out: &mut Vec<String>) {
        if pick.len() == k {
            out.push(pick.iter().collect());
            return;
        }
        for i in start..items.len() {
            pick.push(items[i]);
            rec(items, k, i + 1, pick, out);
            pick.pop();
        }
    }
    if k <= sorted.len() {
        rec(&sorted, k, 0, &mut pick, &mut out);
    }
    out
}

/// A group-stage fixture with team indices resolved.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupFixture {
    pub match_id: String,
    pub a: usize,
    pub b: usize,
    pub venue: Venue,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Group {
    pub name: char,
    /// Team indices in first-appearance order.
    pub teams: Vec<usize>,
    pub fixtures: Vec<GroupFixture>,
}

/// Knockout side with references resolved to indices.
#[derive(Debug, Clone, PartialEq)]
pub(crate) enum ResolvedSlot {
    Team(usize),
    GroupRank { group: usize, rank: usize },
    BestThird { slot: usize },
    Winner(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct KnockoutFixture {
    pub match_id: String,
    pub stage: Stage,
    pub a: ResolvedSlot,
    pub b: ResolvedSlot,
    pub venue: Venue,
}

/// Fixtures and allocation table, cross-checked and indexed.
#[derive(Debug, Clone, PartialEq)]
pub struct Tournament {
    /// All teams in alphabetical order; indices refer to this list.
    pub teams: Vec<String>,
    pub groups: Vec<Group>,
    /// Number of third-placed teams that advance.
    pub n_best_thirds: usize,
    pub allocation: AllocationTable,
    pub(crate) knockout: Vec<KnockoutFixture>,
    /// Group index of each team.
    pub(crate) team_group: Vec<usize>,
}

impl Tournament {
    /// Builds a tournament from fixtures in play order. Knockout fixtures may
    /// only reference winners of fixtures listed before them.
    pub fn new(fixtures: &[Fixture], allocation: AllocationTable) -> Result<Self, TournamentError> {
        let (group_fx, ko_fx): (Vec<&Fixture>, Vec<&Fixture>) = fixtures.iter().partition(|f| f.stage == Stage::Group);
        let mut ids = BTreeSet::new();
        for f in fixtures {
            if !ids.insert(f.match_id.as_str()) {
                return Err(config_err(format!("duplicate match id {}", f.match_id)));
            }
        }

        // groups
        let mut by_group: BTreeMap<char, Vec<&Fixture>> = BTreeMap::new();
        for f in &group_fx {
            let g = f.group.ok_or_else(|| config_err(format!("group fixture {} has no group", f.match_id)))?;
            by_group.entry(g).or_default().push(f);
        }
        if by_group.is_empty() {
            return Err(config_err("no group fixtures"));
        }
        let mut team_set = BTreeSet::new();
        let mut group_members: Vec<(char, Vec<String>)> = Vec::new();
        for (&g, fx) in &by_group {
            let mut members: Vec<String> = Vec::new();
            for f in fx {
                for slot in [&f.slot_a, &f.slot_b] {
                    match slot {
                        Slot::Team(t) => {
                            if !members.contains(t) {
                                members.push(t.clone());
                            }
                        }
                        other => {
                            return Err(config_err(format!(
                                "group fixture {} must name teams, found slot `{other}`",
                                f.match_id
                            )))
                        }
                    }
                }
            }
            for t in &members {
                if !team_set.insert(t.clone()) {
                    return Err(config_err(format!("team `{t}` appears in more than one group")));
                }
            }
            group_members.push((g, members));
        }
        let teams: Vec<String> = team_set.into_iter().collect();
        let index = |t: &str| teams.binary_search_by(|x| x.as_str().cmp(t)).expect("team collected above");

        let group_size = group_members[0].1.len();
        let mut groups = Vec::new();
        let mut team_group = vec![0; teams.len()];
        for (gi, (g, members)) in group_members.iter().enumerate() {
            if members.len() != group_size || group_size < 2 {
                return Err(config_err(format!(
                    "group {g} has {} teams; all groups must have the same size of at least 2",
                    members.len()
                )));
            }
            let mut pairs = BTreeSet::new();
            let mut fixtures = Vec::new();
            for f in &by_group[g] {
                let (Slot::Team(a), Slot::Team(b)) = (&f.slot_a, &f.slot_b) else { unreachable!() };
                if a == b {
                    return Err(config_err(format!("fixture {}: team `{a}` plays itself", f.match_id)));
                }
                let key = if a < b { (a.clone(), b.clone()) } else { (b.clone(), a.clone()) };
                if !pairs.insert(key) {
                    return Err(config_err(format!("group {g}: {a} and {b} meet more than once")));
                }
                fixtures.push(GroupFixture { match_id: f.match_id.clone(), a: index(a), b: index(b), venue: f.venue.clone() });
            }
            let need = group_size * (group_size - 1) / 2;
            if fixtures.len() != need {
                return Err(config_err(format!(
                    "group {g} has {} fixtures; a single round robin of {group_size} teams needs {need}",
                    fixtures.len()
                )));
            }
            let team_idx: Vec<usize> = members.iter().map(|t| index(t)).collect();
            for &t in &team_idx {
                team_group[t] = gi;
            }
            groups.push(Group { name: *g, teams: team_idx, fixtures });
        }
        let group_names: Vec<char> = groups.iter().map(|g| g.name).collect();
        let group_pos = |c: char| group_names.iter().position(|&g| g == c);

        // knockout
        allocation.validate(&group_names)?;
        let n_best_thirds = allocation.slots.len();
        let mut ko = Vec::new();
        let mut winner_uses: BTreeMap<String, usize> = BTreeMap::new();
        let mut entries = BTreeSet::new();
        let mut third_slots_used = BTreeSet::new();
        for f in &ko_fx {
            let mut sides = Vec::with_capacity(2);
            for slot in [&f.slot_a, &f.slot_b] {
                let resolved = match slot {
                    Slot::Team(t) => {
                        let i = teams
                            .binary_search(t)
                            .map_err(|_| config_err(format!("fixture {}: unknown team `{t}`", f.match_id)))?;
                        ResolvedSlot::Team(i)
                    }
                    Slot::GroupRank { group, rank } => {
                        let gi = group_pos(*group)
                            .ok_or_else(|| config_err(format!("fixture {}: unknown group {group}", f.match_id)))?;
                        if *rank == 0 || *rank as usize > group_size {
                            return Err(config_err(format!("fixture {}: no rank {rank} in group {group}", f.match_id)));
                        }
                        ResolvedSlot::GroupRank { group: gi, rank: *rank as usize }
                    }
                    Slot::BestThird { groups: g } => {
                        let s = allocation.slots.iter().position(|x| x == g).ok_or_else(|| {
                            config_err(format!(
                                "fixture {}: slot {} is not a column of the allocation table",
                                f.match_id,
                                Slot::third_label(g)
                            ))
                        })?;
                        if !third_slots_used.insert(s) {
                            return Err(config_err(format!("slot {} used twice", Slot::third_label(g))));
                        }
                        ResolvedSlot::BestThird { slot: s }
                    }
                    Slot::Winner(id) => {
                        let j = ko.iter().position(|k: &KnockoutFixture| &k.match_id == id).ok_or_else(|| {
                            config_err(format!(
                                "fixture {}: winner of match {id} is not decided by an earlier knockout fixture",
                                f.match_id
                            ))
                        })?;
                        if ko[j].stage >= f.stage {
                            return Err(config_err(format!(
                                "fixture {} ({}) depends on match {id} of the same or a later stage",
                                f.match_id, f.stage
                            )));
                        }
                        *winner_uses.entry(id.clone()).or_default() += 1;
                        ResolvedSlot::Winner(j)
                    }
                };
                if !matches!(slot, Slot::Winner(_)) && !entries.insert(slot.to_string()) {
                    return Err(config_err(format!("slot `{slot}` used twice")));
                }
                sides.push(resolved);
            }
            let b = sides.pop().expect("two sides");
            let a = sides.pop().expect("two sides");
            ko.push(KnockoutFixture { match_id: f.match_id.clone(), stage: f.stage, a, b, venue: f.venue.clone() });
        }
        if ko.is_empty() {
            return Err(config_err("no knockout fixtures"));
        }
        if let Some((id, n)) = winner_uses.iter().find(|(_, &n)| n > 1) {
            return Err(config_err(format!("winner of match {id} is used {n} times")));
        }
        let unused: Vec<&KnockoutFixture> = ko.iter().filter(|k| !winner_uses.contains_key(&k.match_id)).collect();
        if unused.len() != 1 || unused[0].stage != Stage::Final || ko.last().map(|k| k.stage) != Some(Stage::Final) {
            return Err(config_err(
                "knockout fixtures must form a single bracket ending in the last-listed FINAL fixture",
            ));
        }
        if third_slots_used.len() != n_best_thirds {
            return Err(config_err(format!(
                "allocation table has {n_best_thirds} best-third slots but fixtures use {}",
                third_slots_used.len()
            )));
        }
        let entrants = entries.len();
        let first_round = ko.iter().filter(|k| !matches!(k.a, ResolvedSlot::Winner(_)) || !matches!(k.b, ResolvedSlot::Winner(_))).count();
        if entrants != 2 * first_round || !entrants.is_power_of_two() {
            return Err(config_err(format!(
                "knockout entry slots ({entrants}) must fill complete first-round pairings and be a power of two"
            )));
        }
        let direct = entrants - n_best_thirds;
        if !direct.is_multiple_of(groups.len()) {
            return Err(config_err("direct qualifiers must be the same number per group"));
        }
        let per_group = direct / groups.len();
        for k in &ko {
            for s in [&k.a, &k.b] {
                if let ResolvedSlot::GroupRank { group, rank } = s {
                    if *rank > per_group {
                        return Err(config_err(format!(
                            "fixture {}: rank {rank} of group {} does not qualify directly",
                            k.match_id, groups[*group].name
                        )));
                    }
                }
            }
        }
        if n_best_thirds > 0 && per_group + 1 > group_size {
            return Err(config_err("groups too small for best-third qualification"));
        }

        Ok(Self { teams, groups, n_best_thirds, allocation, knockout: ko, team_group })
    }

    /// Extra checks for the 24-team EURO format: 6 groups of 4, 36 group
    /// fixtures, 8 + 4 + 2 + 1 knockout fixtures and 4 best thirds.
    pub fn check_euro24(&self) -> Result<(), TournamentError> {
        let n_groups = self.groups.len();
        let size = self.groups[0].teams.len();
        let group_fx: usize = self.groups.iter().map(|g| g.fixtures.len()).sum();
        let count = |s: Stage| self.knockout.iter().filter(|k| k.stage == s).count();
        let shape = (n_groups, size, group_fx, count(Stage::R16), count(Stage::QF), count(Stage::SF), count(Stage::Final));
        if shape != (6, 4, 36, 8, 4, 2, 1) || self.n_best_thirds != 4 || self.teams.len() != 24 {
            return Err(config_err(format!(
                "not a 24-team EURO layout: {n_groups} groups of {size}, {group_fx} group fixtures, knockout {}+{}+{}+{}, {} best thirds",
                shape.3, shape.4, shape.5, shape.6, self.n_best_thirds
            )));
        }
        Ok(())
    }

    pub fn team_index(&self, team: &str) -> Option<usize> {
        self.teams.binary_search_by(|t| t.as_str().cmp(team)).ok()
    }

    pub fn group_of(&self, team: usize) -> &Group {
        &self.groups[self.team_group[team]]
    }

    /// Number of knockout rounds, e.g. 4 for a 16-team bracket.
    pub fn knockout_stages(&self) -> Vec<Stage> {
        let mut s: Vec<Stage> = self.knockout.iter().map(|k| k.stage).collect();
        s.dedup();
        s
    }
}

#[cfg(test)]
pub(crate) mod testdata {
    use super::*;

    pub const GROUPS: [(char, [&str; 4]); 6] = [
        ('A', ["Italy", "Switzerland", "Turkey", "Wales"]),
        ('B', ["Belgium", "Denmark", "Finland", "Russia"]),
        ('C', ["Austria", "Netherlands", "North Macedonia", "Ukraine"]),
        ('D', ["Croatia", "Czechia", "England", "Scotland"]),
        ('E', ["Poland", "Slovakia", "Spain", "Sweden"]),
        ('F', ["France", "Germany", "Hungary", "Portugal"]),
    ];

    pub const ALLOCATION: [(&str, &str); 15] = [
        ("ABCD", "ADBC"),
        ("ABCE", "AEBC"),
        ("ABCF", "AFBC"),
        ("ABDE", "DEAB"),
        ("ABDF", "DFAB"),
        ("ABEF", "EFBA"),
        ("ACDE", "EDCA"),
        ("ACDF", "FDCA"),
        ("ACEF", "EFCA"),
        ("ADEF", "EFDA"),
        ("BCDE", "EDBC"),
        ("BCDF", "FDCB"),
        ("BCEF", "FECB"),
        ("BDEF", "FEDB"),
        ("CDEF", "FEDC"),
    ];

    pub fn allocation() -> AllocationTable {
        AllocationTable {
            slots: vec![vec!['A', 'D', 'E', 'F'], vec!['D', 'E', 'F'], vec!['A', 'B', 'C', 'D'], vec!['A', 'B', 'C']],
            rows: ALLOCATION.iter().map(|(k, v)| (k.to_string(), v.chars().collect())).collect(),
        }
    }

    fn fx(id: usize, stage: Stage, group: Option<char>, a: &str, b: &str) -> Fixture {
        Fixture {
            match_id: id.to_string(),
            stage,
            group,
            slot_a: Slot::parse(a).unwrap(),
            slot_b: Slot::parse(b).unwrap(),
            venue: Venue::Neutral,
            date: NaiveDate::from_ymd_opt(2021, 6, 11).unwrap(),
        }
    }

    pub fn fixtures() -> Vec<Fixture> {
        let mut out = Vec::new();
        let mut id = 1;
        for (g, t) in GROUPS {
            for (i, j) in [(0, 1), (2, 3), (0, 2), (1, 3), (3, 0), (1, 2)] {
                out.push(fx(id, Stage::Group, Some(g), t[i], t[j]));
                id += 1;
            }
        }
        let ko = [
            (Stage::R16, "2A", "2B"),
            (Stage::R16, "1A", "2C"),
            (Stage::R16, "1C", "3rd-D/E/F"),
            (Stage::R16, "1B", "3rd-A/D/E/F"),
            (Stage::R16, "2D", "2E"),
            (Stage::R16, "1F", "3rd-A/B/C"),
            (Stage::R16, "1D", "2F"),
            (Stage::R16, "1E", "3rd-A/B/C/D"),
            (Stage::QF, "winner-of-match-41", "winner-of-match-42"),
            (Stage::QF, "winner-of-match-39", "winner-of-match-37"),
            (Stage::QF, "winner-of-match-40", "winner-of-match-38"),
            (Stage::QF, "winner-of-match-43", "winner-of-match-44"),
            (Stage::SF, "winner-of-match-47", "winner-of-match-45"),
            (Stage::SF, "winner-of-match-48", "winner-of-match-46"),
            (Stage::Final, "winner-of-match-49", "winner-of-match-50"),
        ];
        for (stage, a, b) in ko {
            out.push(fx(id, stage, None, a, b));
            id += 1;
        }
        out
    }

    pub fn tournament() -> Tournament {
        Tournament::new(&fixtures(), allocation()).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::testdata::*;
    use super::*;

    #[test]
    fn slot_parsing_round_trips() {
        for raw in ["1A", "2F", "3rd-A/D/E/F", "winner-of-match-40", "North Macedonia"] {
            assert_eq!(Slot::parse(raw).unwrap().to_string(), raw);
        }
        assert_eq!(Slot::parse("3rd-F/E/D").unwrap(), Slot::BestThird { groups: vec!['D', 'E', 'F'] });
        assert!(Slot::parse("3rd-AB").is_err());
        assert!(Slot::parse("winner-of-match-").is_err());
    }

    #[test]
    fn euro_layout_validates() {
        let t = tournament();
        t.check_euro24().unwrap();
        assert_eq!(t.teams.len(), 24);
        assert_eq!(t.groups[0].name, 'A');
        let a: Vec<&str> = t.groups[0].teams.iter().map(|&i| t.teams[i].as_str()).collect();
        assert_eq!(a, ["Italy", "Switzerland", "Turkey", "Wales"]);
    }

    #[test]
    fn combination_count() {
        assert_eq!(combinations(&['A', 'B', 'C', 'D', 'E', 'F'], 4).len(), 15);
    }

    #[test]
    fn short_allocation_rejected() {
        let mut alloc = allocation();
        alloc.rows.remove("CDEF");
        let err = Tournament::new(&fixtures(), alloc).unwrap_err();
        assert!(err.to_string().contains("14 of 15"), "{err}");
    }

    #[test]
    fn allocation_constraint_violation_rejected() {
        let mut alloc = allocation();
        // C cannot fill 3rd-A/D/E/F
        alloc.rows.insert("ABCD".into(), vec!['C', 'D', 'B', 'A']);
        assert!(Tournament::new(&fixtures(), alloc).is_err());
    }

    #[test]
    fn dangling_winner_rejected() {
        let mut f = fixtures();
        let last = f.len() - 1;
        f[last].slot_b = Slot::Winner("99".into());
        assert!(Tournament::new(&f, allocation()).is_err());
    }

    #[test]
    fn repeated_group_pairing_rejected() {
        let mut f = fixtures();
        f[1].slot_a = f[0].slot_a.clone();
        f[1].slot_b = f[0].slot_b.clone();
        assert!(Tournament::new(&f, allocation()).is_err());
    }

    #[test]
    fn team_in_two_groups_rejected() {
        let mut f = fixtures();
        f[6].slot_a = Slot::Team("Italy".into());
        assert!(Tournament::new(&f, allocation()).is_err());
    }

    #[test]
    fn every_combination_assigns_a_bijection() {
        let t = tournament();
        for key in combinations(&['A', 'B', 'C', 'D', 'E', 'F'], 4) {
            let groups: Vec<char> = key.chars().collect();
            let row = t.allocation.assign(&groups).unwrap();
            let mut sorted = row.to_vec();
            sorted.sort_unstable();
            assert_eq!(sorted, groups);
        }
    }
}
