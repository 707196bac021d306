//! Group tables and tiebreakers.

use std::cmp::Ordering;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupMatch {
    pub a: usize,
    pub b: usize,
    pub goals_a: u32,
    pub goals_b: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TeamRecord {
    pub team: usize,
    pub played: u32,
    pub won: u32,
    pub drawn: u32,
    pub lost: u32,
    pub goals_for: u32,
    pub goals_against: u32,
}

impl TeamRecord {
    pub fn points(&self) -> u32 {
        3 * self.won + self.drawn
    }

    pub fn goal_difference(&self) -> i64 {
        self.goals_for as i64 - self.goals_against as i64
    }

    fn add(&mut self, scored: u32, conceded: u32) {
        self.played += 1;
        self.goals_for += scored;
        self.goals_against += conceded;
        match scored.cmp(&conceded) {
            Ordering::Greater => self.won += 1,
            Ordering::Equal => self.drawn += 1,
            Ordering::Less => self.lost += 1,
        }
    }

    /// Points, goal difference, goals scored.
    fn key(&self) -> (u32, i64, u32) {
        (self.points(), self.goal_difference(), self.goals_for)
    }
}

/// Teams of one group and the results played so far.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupState {
    pub teams: Vec<usize>,
    pub matches: Vec<GroupMatch>,
}

impl GroupState {
    pub fn new(teams: Vec<usize>) -> Self {
        Self { teams, matches: Vec::new() }
    }

    pub fn record(&mut self, m: GroupMatch) {
        self.matches.push(m);
    }

    /// Table restricted to matches played among `subset`.
    pub fn table_among(&self, subset: &[usize]) -> Vec<TeamRecord> {
        let mut recs: Vec<TeamRecord> = subset.iter().map(|&team| TeamRecord { team, ..Default::default() }).collect();
        for m in &self.matches {
            let ia = subset.iter().position(|&t| t == m.a);
            let ib = subset.iter().position(|&t| t == m.b);
            if let (Some(ia), Some(ib)) = (ia, ib) {
                recs[ia].add(m.goals_a, m.goals_b);
                recs[ib].add(m.goals_b, m.goals_a);
            }
        }
        recs
    }

    pub fn table(&self) -> Vec<TeamRecord> {
        self.table_among(&self.teams)
    }

    pub fn record_of(&self, team: usize) -> TeamRecord {
        self.table_among(&self.teams).into_iter().find(|r| r.team == team).unwrap_or_default()
    }
}

/// Splits `items`, already sorted by `key` descending, into runs of equal key.
fn blocks<K: PartialEq>(items: &[usize], key: impl Fn(usize) -> K) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = Vec::new();
    for &t in items {
        match out.last_mut() {
            Some(b) if key(b[0]) == key(t) => b.push(t),
            _ => out.push(vec![t]),
        }
    }
    out
}

fn sort_desc_by_key<K: PartialOrd>(items: &mut [usize], key: impl Fn(usize) -> K) {
    items.sort_by(|&x, &y| key(y).partial_cmp(&key(x)).unwrap_or(Ordering::Equal));
}

/// Orders a block of teams level on points.
fn resolve_tie<R: Rng + ?Sized>(state: &GroupState, block: &[usize], elo: &[f64], rng: &mut R) -> Vec<usize> {
    if block.len() == 1 {
        return block.to_vec();
    }
    let h2h = state.table_among(block);
    let h2h_key = |t: usize| h2h.iter().find(|r| r.team == t).map(|r| r.key()).unwrap_or_default();
    let mut sorted = block.to_vec();
    sort_desc_by_key(&mut sorted, h2h_key);
    let split = blocks(&sorted, h2h_key);
    if split.len() > 1 {
        // head-to-head separated some teams; reapply it within each smaller block
        return split.into_iter().flat_map(|b| resolve_tie(state, &b, elo, rng)).collect();
    }
    let overall = state.table();
    let overall_key = |t: usize| {
        let r = overall.iter().find(|r| r.team == t).copied().unwrap_or_default();
        (r.goal_difference(), r.goals_for, elo[t])
    };
    sort_desc_by_key(&mut sorted, overall_key);
    blocks(&sorted, overall_key)
        .into_iter()
        .flat_map(|mut b| {
            b.shuffle(rng);
            b
        })
        .collect()
}

/// Final order of a completed group: points, then head-to-head points, goal
/// difference and goals among the tied teams (reapplied to any smaller tied
/// subset), then overall goal difference, overall goals, live Elo and a lot
/// drawn from `rng`.
pub fn rank_group<R: Rng + ?Sized>(state: &GroupState, elo: &[f64], rng: &mut R) -> Vec<usize> {
    let table = state.table();
    let pts = |t: usize| table.iter().find(|r| r.team == t).map(|r| r.points()).unwrap_or(0);
    let mut order = state.teams.clone();
    sort_desc_by_key(&mut order, pts);
    blocks(&order, pts).into_iter().flat_map(|b| resolve_tie(state, &b, elo, rng)).collect()
}

/// Ranks third-placed teams by points, goal difference, goals, live Elo and
/// lot. Returns the full ranking; the first `n_qualify` advance.
pub fn select_best_thirds<R: Rng + ?Sized>(thirds: &[TeamRecord], elo: &[f64], rng: &mut R) -> Vec<usize> {
    let key = |t: usize| {
        let r = thirds.iter().find(|r| r.team == t).expect("team listed");
        (r.points(), r.goal_difference(), r.goals_for, elo[t])
    };
    let mut order: Vec<usize> = thirds.iter().map(|r| r.team).collect();
    sort_desc_by_key(&mut order, key);
    blocks(&order, key)
        .into_iter()
        .flat_map(|mut b| {
            b.shuffle(rng);
            b
        })
        .collect()
}
