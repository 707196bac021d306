//! Outcome counters summed over simulated tournaments.

use serde::{Deserialize, Serialize};

use super::sim::RunOutcome;
use super::{Stage, Tournament};
use crate::metrics::OutcomeDistribution;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TeamCounters {
    pub group_first: u64,
    pub group_second: u64,
    pub third_qualified: u64,
    /// Out after the group stage.
    pub group_exit: u64,
    pub last16: u64,
    pub quarterfinal: u64,
    pub semifinal: u64,
    pub final_: u64,
    pub champion: u64,
}

impl TeamCounters {
    fn add(&mut self, o: &TeamCounters) {
        self.group_first += o.group_first;
        self.group_second += o.group_second;
        self.third_qualified += o.third_qualified;
        self.group_exit += o.group_exit;
        self.last16 += o.last16;
        self.quarterfinal += o.quarterfinal;
        self.semifinal += o.semifinal;
        self.final_ += o.final_;
        self.champion += o.champion;
    }

    /// Counts of result ranks 1 to 6.
    pub fn rank_counts(&self) -> [u64; 6] {
        [
            self.champion,
            self.final_ - self.champion,
            self.semifinal - self.final_,
            self.quarterfinal - self.semifinal,
            self.last16 - self.quarterfinal,
            self.group_exit,
        ]
    }
}

/// Probability with its Monte Carlo standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub p: f64,
    pub se: f64,
}

impl Estimate {
    fn from_count(count: u64, n: u64) -> Self {
        let p = count as f64 / n as f64;
        Self { p, se: (p * (1.0 - p) / n as f64).sqrt() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupProbabilities {
    pub group: char,
    pub team: String,
    pub group_first: Estimate,
    pub group_second: Estimate,
    pub third_qualified: Estimate,
    pub group_exit: Estimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageProbabilities {
    pub team: String,
    pub champion: Estimate,
    pub final_: Estimate,
    pub semifinal: Estimate,
    pub quarterfinal: Estimate,
    pub last16: Estimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationAggregate {
    pub teams: Vec<String>,
    /// Group name and member indices in listed order.
    pub groups: Vec<(char, Vec<usize>)>,
    pub counters: Vec<TeamCounters>,
    pub n_runs: u64,
}

impl SimulationAggregate {
    pub fn empty(t: &Tournament) -> Self {
        Self {
            teams: t.teams.clone(),
            groups: t.groups.iter().map(|g| (g.name, g.teams.clone())).collect(),
            counters: vec![TeamCounters::default(); t.teams.len()],
            n_runs: 0,
        }
    }

    pub fn record(&mut self, run: &RunOutcome) {
        self.n_runs += 1;
        for (i, c) in self.counters.iter_mut().enumerate() {
            match run.group_position[i] {
                1 => c.group_first += 1,
                2 => c.group_second += 1,
                3 if run.third_qualified[i] => c.third_qualified += 1,
                _ => c.group_exit += 1,
            }
            if let Some(s) = run.reached[i] {
                c.last16 += 1;
                if s >= Stage::QF {
                    c.quarterfinal += 1;
                }
                if s >= Stage::SF {
                    c.semifinal += 1;
                }
                if s >= Stage::Final {
                    c.final_ += 1;
                }
            }
            if run.champion == i {
                c.champion += 1;
            }
        }
    }

    /// Sums two aggregates over the same tournament.
    pub fn merge(mut self, other: SimulationAggregate) -> SimulationAggregate {
        debug_assert_eq!(self.teams, other.teams);
        self.n_runs += other.n_runs;
        for (a, b) in self.counters.iter_mut().zip(&other.counters) {
            a.add(b);
        }
        self
    }

    pub fn group_probabilities(&self) -> Vec<GroupProbabilities> {
        let n = self.n_runs;
        let mut out = Vec::new();
        for (g, members) in &self.groups {
            for &i in members {
                let c = &self.counters[i];
                out.push(GroupProbabilities {
                    group: *g,
                    team: self.teams[i].clone(),
                    group_first: Estimate::from_count(c.group_first, n),
                    group_second: Estimate::from_count(c.group_second, n),
                    third_qualified: Estimate::from_count(c.third_qualified, n),
                    group_exit: Estimate::from_count(c.group_exit, n),
                });
            }
        }
        out
    }

    /// Stage probabilities, most likely champion first (ties by name).
    pub fn stage_probabilities(&self) -> Vec<StageProbabilities> {
        let n = self.n_runs;
        let mut idx: Vec<usize> = (0..self.teams.len()).collect();
        idx.sort_by(|&a, &b| {
            let (ca, cb) = (&self.counters[a], &self.counters[b]);
            (cb.champion, cb.final_, cb.semifinal, cb.quarterfinal, cb.last16)
                .cmp(&(ca.champion, ca.final_, ca.semifinal, ca.quarterfinal, ca.last16))
                .then_with(|| self.teams[a].cmp(&self.teams[b]))
        });
        idx.into_iter()
            .map(|i| {
                let c = &self.counters[i];
                StageProbabilities {
                    team: self.teams[i].clone(),
                    champion: Estimate::from_count(c.champion, n),
                    final_: Estimate::from_count(c.final_, n),
                    semifinal: Estimate::from_count(c.semifinal, n),
                    quarterfinal: Estimate::from_count(c.quarterfinal, n),
                    last16: Estimate::from_count(c.last16, n),
                }
            })
            .collect()
    }

    /// Result-rank distribution of every team, in team order.
    pub fn outcome_distributions(&self) -> Vec<OutcomeDistribution<f64>> {
        let n = self.n_runs as f64;
        self.teams
            .iter()
            .zip(&self.counters)
            .map(|(t, c)| OutcomeDistribution { team: t.clone(), p: c.rank_counts().map(|k| k as f64 / n) })
            .collect()
    }

    /// Checks the exact counting identities every aggregate must satisfy.
    pub fn check_invariants(&self, n_best_thirds: u64) -> Result<(), String> {
        let n = self.n_runs;
        let n_groups = self.groups.len() as u64;
        for (t, c) in self.teams.iter().zip(&self.counters) {
            if c.group_first + c.group_second + c.third_qualified + c.group_exit != n {
                return Err(format!("{t}: group outcomes do not partition the runs"));
            }
            if c.last16 != c.group_first + c.group_second + c.third_qualified {
                return Err(format!("{t}: last-16 count differs from group qualifiers"));
            }
            if !(c.champion <= c.final_ && c.final_ <= c.semifinal && c.semifinal <= c.quarterfinal && c.quarterfinal <= c.last16) {
                return Err(format!("{t}: stage counts are not monotone"));
            }
        }
        let sum = |f: fn(&TeamCounters) -> u64| self.counters.iter().map(f).sum::<u64>();
        let expect = [
            ("group_first", sum(|c| c.group_first), n_groups * n),
            ("group_second", sum(|c| c.group_second), n_groups * n),
            ("third_qualified", sum(|c| c.third_qualified), n_best_thirds * n),
            ("last16", sum(|c| c.last16), 16 * n),
            ("quarterfinal", sum(|c| c.quarterfinal), 8 * n),
            ("semifinal", sum(|c| c.semifinal), 4 * n),
            ("final", sum(|c| c.final_), 2 * n),
            ("champion", sum(|c| c.champion), n),
        ];
        for (name, got, want) in expect {
            if got != want {
                return Err(format!("column {name} sums to {got}, expected {want}"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::super::sim::{monte_carlo, FixedSampler, MonteCarloOptions, SimSettings};
    use super::super::testdata;

    #[test]
    fn single_run_counters_are_binary() {
        let t = testdata::tournament();
        let elo: Vec<f64> = (0..24).map(|i| 1600.0 + 15.0 * i as f64).collect();
        let opts = MonteCarloOptions { n_runs: 1, seed: 4, workers: Some(1) };
        let agg = monte_carlo(&t, &FixedSampler(0, 0), &elo, &SimSettings::default(), &opts).unwrap();
        agg.check_invariants(4).unwrap();
        for c in &agg.counters {
            for v in [c.group_first, c.group_second, c.third_qualified, c.group_exit, c.last16, c.champion] {
                assert!(v <= 1);
            }
        }
    }

    #[test]
    fn worker_count_does_not_change_result() {
        let t = testdata::tournament();
        let elo: Vec<f64> = (0..24).map(|i| 1600.0 + 15.0 * i as f64).collect();
        let run = |w| {
            let opts = MonteCarloOptions { n_runs: 700, seed: 99, workers: Some(w) };
            monte_carlo(&t, &FixedSampler(1, 1), &elo, &SimSettings::default(), &opts).unwrap()
        };
        let one = run(1);
        one.check_invariants(4).unwrap();
        assert_eq!(one, run(4));
    }

    #[test]
    fn distributions_sum_to_one() {
        let t = testdata::tournament();
        let elo = vec![1800.0; 24];
        let opts = MonteCarloOptions { n_runs: 300, seed: 5, workers: None };
        let agg = monte_carlo(&t, &FixedSampler(0, 0), &elo, &SimSettings::default(), &opts).unwrap();
        for d in agg.outcome_distributions() {
            d.validate().unwrap();
        }
        let rows = agg.group_probabilities();
        assert_eq!(rows.len(), 24);
        for r in rows {
            let s = r.group_first.p + r.group_second.p + r.third_qualified.p + r.group_exit.p;
            assert!((s - 1.0).abs() < 1e-12);
        }
    }
}
