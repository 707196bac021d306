use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use serde_json::json;
use sha2::{Digest, Sha256};

use super::matches::csv_field;
use super::DataError;
use crate::forecast::ScoreGrid;
use crate::metrics::{MetricsReport, OutcomeDistribution};
use crate::regression::{GofResult, ModelSource};
use crate::tournament::{Estimate, SimulationAggregate};

/// Everything needed to rerun the command that produced an output file.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub subcommand: String,
    /// Input role to path, e.g. `fixtures -> data/euro2020/fixtures.csv`.
    pub inputs: BTreeMap<String, String>,
    pub seed: Option<u64>,
    pub n_runs: Option<u64>,
    pub reference_date: Option<NaiveDate>,
    pub output_dir: Option<String>,
    pub overrides: BTreeMap<String, String>,
    /// SHA-256 of the model file the output was computed from.
    pub model_sha256: Option<String>,
}

impl RunManifest {
    pub fn new(subcommand: &str) -> Self {
        Self { tool_version: crate::VERSION.to_string(), subcommand: subcommand.to_string(), ..Default::default() }
    }

    /// `# key=value` lines in a fixed order.
    pub fn csv_header(&self) -> String {
        let mut s = String::new();
        let mut line = |k: &str, v: &dyn std::fmt::Display| {
            let _ = writeln!(s, "# {k}={v}");
        };
        line("tool_version", &self.tool_version);
        line("subcommand", &self.subcommand);
        for (k, v) in &self.inputs {
            line(&format!("input.{k}"), v);
        }
        if let Some(seed) = self.seed {
            line("seed", &seed);
        }
        if let Some(n) = self.n_runs {
            line("n_runs", &n);
        }
        if let Some(d) = self.reference_date {
            line("reference_date", &d);
        }
        if let Some(o) = &self.output_dir {
            line("output_dir", o);
        }
        if let Some(h) = &self.model_sha256 {
            line("model_sha256", h);
        }
        for (k, v) in &self.overrides {
            line(&format!("override.{k}"), v);
        }
        s
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// Rounds to 6 decimal places for presentation.
fn r6(x: f64) -> f64 {
    (x * 1e6).round() / 1e6
}

fn json_doc(manifest: &RunManifest, body: serde_json::Value) -> String {
    let mut v = json!({ "metadata": manifest });
    if let (Some(o), serde_json::Value::Object(b)) = (v.as_object_mut(), body) {
        o.extend(b);
    }
    let mut s = serde_json::to_string_pretty(&v).expect("json value serializes");
    s.push('\n');
    s
}

fn est_json(e: &Estimate) -> serde_json::Value {
    json!({ "p": r6(e.p), "se": r6(e.se) })
}

pub fn group_table_csv(agg: &SimulationAggregate, manifest: &RunManifest) -> String {
    let mut s = manifest.csv_header();
    s.push_str("group,team,group_first,group_second,third_qualified,group_exit,se_group_first,se_group_second,se_third_qualified,se_group_exit\n");
    for r in agg.group_probabilities() {
        let e = [r.group_first, r.group_second, r.third_qualified, r.group_exit];
        let _ = writeln!(
            s,
            "{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}",
            r.group,
            csv_field(&r.team),
            e[0].p,
            e[1].p,
            e[2].p,
            e[3].p,
            e[0].se,
            e[1].se,
            e[2].se,
            e[3].se
        );
    }
    s
}

pub fn group_table_json(agg: &SimulationAggregate, manifest: &RunManifest) -> String {
    let rows: Vec<_> = agg
        .group_probabilities()
        .iter()
        .map(|r| {
            json!({
                "group": r.group.to_string(),
                "team": r.team,
                "group_first": est_json(&r.group_first),
                "group_second": est_json(&r.group_second),
                "third_qualified": est_json(&r.third_qualified),
                "group_exit": est_json(&r.group_exit),
            })
        })
        .collect();
    json_doc(manifest, json!({ "n_runs": agg.n_runs, "groups": rows }))
}

pub fn stage_table_csv(agg: &SimulationAggregate, manifest: &RunManifest) -> String {
    let mut s = manifest.csv_header();
    s.push_str("team,champion,final,semifinal,quarterfinal,last16,se_champion,se_final,se_semifinal,se_quarterfinal,se_last16\n");
    for r in agg.stage_probabilities() {
        let e = [r.champion, r.final_, r.semifinal, r.quarterfinal, r.last16];
        let _ = write!(s, "{}", csv_field(&r.team));
        for x in &e {
            let _ = write!(s, ",{:.6}", x.p);
        }
        for x in &e {
            let _ = write!(s, ",{:.6}", x.se);
        }
        s.push('\n');
    }
    s
}

pub fn stage_table_json(agg: &SimulationAggregate, manifest: &RunManifest) -> String {
    let rows: Vec<_> = agg
        .stage_probabilities()
        .iter()
        .map(|r| {
            json!({
                "team": r.team,
                "champion": est_json(&r.champion),
                "final": est_json(&r.final_),
                "semifinal": est_json(&r.semifinal),
                "quarterfinal": est_json(&r.quarterfinal),
                "last16": est_json(&r.last16),
            })
        })
        .collect();
    json_doc(manifest, json!({ "n_runs": agg.n_runs, "stages": rows }))
}

/// Matrix layout: one row per `goals_a`, one column per `goals_b`.
pub fn grid_to_csv(grid: &ScoreGrid, manifest: &RunManifest) -> String {
    let mut s = manifest.csv_header();
    let _ = writeln!(s, "# team_a={}", grid.team_a);
    let _ = writeln!(s, "# team_b={}", grid.team_b);
    s.push_str("goals_a");
    for j in 0..grid.size() {
        let _ = write!(s, ",{j}");
    }
    s.push('\n');
    for (i, row) in grid.rows().enumerate() {
        let _ = write!(s, "{i}");
        for p in row {
            let _ = write!(s, ",{p:.6}");
        }
        s.push('\n');
    }
    s
}

pub fn grid_to_json(grid: &ScoreGrid, manifest: &RunManifest) -> String {
    let rows: Vec<Vec<f64>> = grid.rows().map(|r| r.iter().map(|&p| r6(p)).collect()).collect();
    let o = grid.outcome();
    let (ma, mb, mp) = grid.mode();
    json_doc(
        manifest,
        json!({
            "team_a": grid.team_a,
            "team_b": grid.team_b,
            "cap": grid.cap,
            "raw_mass": grid.raw_mass,
            "probabilities": rows,
            "outcome": { "win_a": r6(o.win_a), "draw": r6(o.draw), "win_b": r6(o.win_b) },
            "most_likely_score": { "goals_a": ma, "goals_b": mb, "p": r6(mp) },
        }),
    )
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Heatmap of the first `shown + 1` goals per side, percentages in each cell.
pub fn grid_to_svg(grid: &ScoreGrid, shown: u32) -> String {
    let n = shown.min(grid.cap) as usize + 1;
    let cell = 48;
    let margin = 70;
    let size = margin + n * cell + 10;
    let max = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| grid.get(i as u32, j as u32)).fold(0.0, f64::max);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<text x="{}" y="16" text-anchor="middle">goals {}</text>"#, margin + n * cell / 2, xml_escape(&grid.team_b));
    let _ = writeln!(
        s,
        r#"<text x="14" y="{y}" text-anchor="middle" transform="rotate(-90 14 {y})">goals {}</text>"#,
        xml_escape(&grid.team_a),
        y = margin + n * cell / 2
    );
    for k in 0..n {
        let c = margin + k * cell + cell / 2;
        let _ = writeln!(s, r#"<text x="{c}" y="{}" text-anchor="middle">{k}</text>"#, margin - 8);
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{k}</text>"#, margin - 8, c + 4);
    }
    for i in 0..n {
        for j in 0..n {
            let p = grid.get(i as u32, j as u32);
            let shade = if max > 0.0 { p / max } else { 0.0 };
            let level = (255.0 - 200.0 * shade).round() as u8;
            let (x, y) = (margin + j * cell, margin + i * cell);
            let _ = writeln!(
                s,
                r#"<rect x="{x}" y="{y}" width="{cell}" height="{cell}" fill="rgb({level},{level},255)" stroke="white"/>"#
            );
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}" text-anchor="middle">{:.1}</text>"#,
                x + cell / 2,
                y + cell / 2 + 4,
                100.0 * p
            );
        }
    }
    s.push_str("</svg>\n");
    s
}

pub fn metrics_report_csv(report: &MetricsReport<f64>, manifest: &RunManifest) -> String {
    let mut s = manifest.csv_header();
    s.push_str("team,realized,predicted,mld,brier,rps\n");
    for t in &report.teams {
        let _ = writeln!(s, "{},{},{},{:.6},{:.6},{:.6}", csv_field(&t.team), t.realized, t.predicted, t.mld, t.brier, t.rps);
    }
    let _ = writeln!(s, "TOTAL,,,{:.6},{:.6},{:.6}", report.mld, report.brier, report.rps);
    s
}

pub fn metrics_report_json(report: &MetricsReport<f64>, manifest: &RunManifest) -> String {
    let teams: Vec<_> = report
        .teams
        .iter()
        .map(|t| {
            json!({
                "team": t.team, "realized": t.realized, "predicted": t.predicted,
                "mld": r6(t.mld), "brier": r6(t.brier), "rps": r6(t.rps),
            })
        })
        .collect();
    json_doc(
        manifest,
        json!({ "teams": teams, "total": { "mld": r6(report.mld), "brier": r6(report.brier), "rps": r6(report.rps) } }),
    )
}

/// `team,p1,...,p6` with full precision, readable by the distributions loader.
pub fn distributions_csv(dists: &[OutcomeDistribution<f64>], manifest: &RunManifest) -> String {
    let mut s = manifest.csv_header();
    s.push_str("team,p1,p2,p3,p4,p5,p6\n");
    for d in dists {
        let _ = write!(s, "{}", csv_field(&d.team));
        for p in &d.p {
            let _ = write!(s, ",{p}");
        }
        s.push('\n');
    }
    s
}

/// Goodness of fit of one team's three regressions.
#[derive(Debug, Clone, PartialEq)]
pub struct GofRow {
    pub team: String,
    /// Attack, defense and nested; `None` when there were no observations.
    pub results: [Option<GofResult>; 3],
    pub nested_source: ModelSource,
}

/// One row per team: statistic, degrees of freedom and p-value per regression.
pub fn gof_table_csv(rows: &[GofRow], manifest: &RunManifest) -> String {
    let mut s = manifest.csv_header();
    s.push_str("team");
    for k in ["attack", "defense", "nested"] {
        let _ = write!(s, ",{k}_n,{k}_statistic,{k}_df,{k}_p_value");
    }
    s.push_str(",nested_source\n");
    for r in rows {
        let _ = write!(s, "{}", csv_field(&r.team));
        for g in &r.results {
            match g {
                Some(g) => {
                    let _ = write!(s, ",{},{:.6},{},{:.6}", g.n, g.statistic, g.df, g.p_value);
                }
                None => s.push_str(",0,,,"),
            }
        }
        let _ = writeln!(s, ",{}", r.nested_source);
    }
    s
}

/// Writes `content`, creating parent directories.
pub fn write_file(path: &Path, content: &str) -> Result<(), DataError> {
    let wrap = |source| DataError::Write { path: path.to_path_buf(), source };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(wrap)?;
    }
    std::fs::write(path, content).map_err(wrap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data_io::CsvTable;
    use crate::metrics::{score, OutcomeDistribution, RealizedRank, RealizedResult};

    fn grid() -> ScoreGrid {
        let n = 11;
        let mut probs = vec![0.0; n * n];
        probs[0] = 0.25;
        probs[1] = 0.5;
        probs[n] = 0.25;
        ScoreGrid { team_a: "France".into(), team_b: "Germany".into(), cap: 10, probs, raw_mass: 1.0 }
    }

    #[test]
    fn sha256_known_value() {
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }

    #[test]
    fn manifest_header_is_comment_block() {
        let mut m = RunManifest::new("simulate");
        m.seed = Some(7);
        m.inputs.insert("fixtures".into(), "f.csv".into());
        let h = m.csv_header();
        assert!(h.lines().all(|l| l.starts_with("# ")));
        assert!(h.contains("# seed=7\n"));
        assert!(h.contains("# input.fixtures=f.csv\n"));
    }

    #[test]
    fn grid_csv_shape() {
        let text = grid_to_csv(&grid(), &RunManifest::new("forecast"));
        let t = CsvTable::parse("g.csv", &text).unwrap();
        assert_eq!(t.headers.len(), 12);
        assert_eq!(t.rows.len(), 11);
        assert_eq!(&t.rows[0].1[2], "0.500000");
        let v: serde_json::Value = serde_json::from_str(&grid_to_json(&grid(), &RunManifest::new("forecast"))).unwrap();
        assert_eq!(v["most_likely_score"]["goals_b"], 1);
        assert!(grid_to_svg(&grid(), 6).starts_with("<svg"));
    }

    #[test]
    fn metrics_csv_total_row() {
        let f = [OutcomeDistribution::new("A", [1.0 / 6.0; 6]).unwrap()];
        let r = [RealizedResult { team: "A".into(), rank: RealizedRank::new(3).unwrap() }];
        let rep = score(&f, &r).unwrap();
        let text = metrics_report_csv(&rep, &RunManifest::new("validate"));
        // argmax tie resolves to rank 1; RPS = (1 + 4 + 9 + 4 + 1) / 36 / 5
        assert!(text.ends_with("TOTAL,,,2.000000,0.833333,0.105556\n"), "{text}");
        let v: serde_json::Value = serde_json::from_str(&metrics_report_json(&rep, &RunManifest::new("validate"))).unwrap();
        assert_eq!(v["total"]["brier"], 0.833333);
    }

    #[test]
    fn write_file_creates_directories() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a/b/c.txt");
        write_file(&p, "x").unwrap();
        assert_eq!(std::fs::read_to_string(p).unwrap(), "x");
    }
}
