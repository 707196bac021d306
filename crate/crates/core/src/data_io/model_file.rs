use std::collections::BTreeMap;
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::{read_text, write_file, DataError, RunManifest};
use crate::regression::{FitDiagnostics, FittedRegression, ModelSource, RegressionCoefficients, RegressionKind, TeamModel};

pub const MODEL_FORMAT_VERSION: u32 = 1;

/// One regression of one team.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelRecord {
    pub team: String,
    pub regression: RegressionKind,
    pub alpha: Vec<f64>,
    pub beta: f64,
    pub gamma_log: f64,
    pub source: ModelSource,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<FitDiagnostics>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub format_version: u32,
    pub tool_version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_date: Option<NaiveDate>,
    /// Run that produced the file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manifest: Option<RunManifest>,
    pub records: Vec<ModelRecord>,
}

impl ModelFile {
    /// Records ordered by team, then attack, defense, nested.
    pub fn from_models<'a>(models: impl IntoIterator<Item = &'a TeamModel>, reference_date: Option<NaiveDate>) -> Self {
        let mut sorted: Vec<&TeamModel> = models.into_iter().collect();
        sorted.sort_by(|a, b| a.team.cmp(&b.team));
        let records = sorted
            .into_iter()
            .flat_map(|m| {
                RegressionKind::ALL.into_iter().map(move |kind| {
                    let r = m.regression(kind);
                    ModelRecord {
                        team: m.team.clone(),
                        regression: kind,
                        alpha: r.coefficients.alpha.clone(),
                        beta: r.coefficients.beta,
                        gamma_log: r.coefficients.gamma_log,
                        source: r.source,
                        diagnostics: r.diagnostics.clone(),
                    }
                })
            })
            .collect();
        Self { format_version: MODEL_FORMAT_VERSION, tool_version: crate::VERSION.to_string(), reference_date, manifest: None, records }
    }

    /// Groups records into validated team models.
    pub fn to_models(&self, origin: &str) -> Result<BTreeMap<String, TeamModel>, DataError> {
        let mut parts: BTreeMap<&str, [Option<FittedRegression>; 3]> = BTreeMap::new();
        for (i, r) in self.records.iter().enumerate() {
            let slot = match r.regression {
                RegressionKind::Attack => 0,
                RegressionKind::Defense => 1,
                RegressionKind::Nested => 2,
            };
            let entry = parts.entry(r.team.as_str()).or_default();
            if entry[slot].is_some() {
                return Err(DataError::schema(origin, format!("record {i}: second {} regression for `{}`", r.regression, r.team)));
            }
            entry[slot] = Some(FittedRegression {
                coefficients: RegressionCoefficients { alpha: r.alpha.clone(), beta: r.beta, gamma_log: r.gamma_log },
                source: r.source,
                diagnostics: r.diagnostics.clone(),
            });
        }
        let mut out = BTreeMap::new();
        for (team, [a, d, n]) in parts {
            let missing: Vec<&str> = [(&a, "attack"), (&d, "defense"), (&n, "nested")]
                .iter()
                .filter(|(r, _)| r.is_none())
                .map(|(_, k)| *k)
                .collect();
            if !missing.is_empty() {
                return Err(DataError::schema(origin, format!("team `{team}` lacks {} regression(s)", missing.join(", "))));
            }
            let model = TeamModel {
                team: team.to_string(),
                attack: a.expect("checked"),
                defense: d.expect("checked"),
                nested: n.expect("checked"),
            };
            model.validate().map_err(|m| DataError::schema(origin, m))?;
            out.insert(team.to_string(), model);
        }
        Ok(out)
    }
}

pub fn render_models<'a>(models: impl IntoIterator<Item = &'a TeamModel>, reference_date: Option<NaiveDate>) -> String {
    render_model_file(&ModelFile::from_models(models, reference_date))
}

pub fn render_model_file(file: &ModelFile) -> String {
    let mut s = serde_json::to_string_pretty(file).expect("model file serializes");
    s.push('\n');
    s
}

pub fn parse_models(origin: &str, text: &str) -> Result<(ModelFile, BTreeMap<String, TeamModel>), DataError> {
    let file: ModelFile = serde_json::from_str(text).map_err(|e| DataError::schema(origin, format!("invalid model file: {e}")))?;
    if file.format_version != MODEL_FORMAT_VERSION {
        return Err(DataError::schema(
            origin,
            format!("model file format {} is not supported (expected {MODEL_FORMAT_VERSION})", file.format_version),
        ));
    }
    let models = file.to_models(origin)?;
    Ok((file, models))
}

pub fn load_models(path: &Path) -> Result<(ModelFile, BTreeMap<String, TeamModel>), DataError> {
    parse_models(&path.display().to_string(), &read_text(path)?)
}

pub fn save_models<'a>(
    path: &Path,
    models: impl IntoIterator<Item = &'a TeamModel>,
    reference_date: Option<NaiveDate>,
) -> Result<(), DataError> {
    write_file(path, &render_models(models, reference_date))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regression::GofResult;

    fn model(team: &str) -> TeamModel {
        let fitted = |alpha: Vec<f64>| FittedRegression {
            coefficients: RegressionCoefficients { alpha, beta: -1.234567890123456, gamma_log: 0.1 + 0.2 },
            source: ModelSource::Fitted,
            diagnostics: Some(FitDiagnostics {
                n_obs: 40,
                total_weight: 17.25,
                log_likelihood: -51.000000000000014,
                gradient_norm: Some(3.3e-9),
                gof: GofResult { statistic: 41.2, df: 37, p_value: 0.2912, n: 40 },
                warnings: vec![],
            }),
        };
        TeamModel {
            team: team.into(),
            attack: fitted(vec![1.895766, -0.0007002232, 0.236178]),
            defense: fitted(vec![-3.886702, 0.002203437, -0.02433679]),
            nested: FittedRegression::given(RegressionCoefficients {
                alpha: vec![3.3403, -0.0014539752, 0.21633103, -0.089635003],
                beta: -30.0,
                gamma_log: -5.519051,
            }),
        }
    }

    #[test]
    fn round_trip_is_exact() {
        let models = [model("Germany"), model("France")];
        let text = render_models(&models, NaiveDate::from_ymd_opt(2021, 6, 7));
        let (file, back) = parse_models("m.json", &text).unwrap();
        assert_eq!(file.records.len(), 6);
        assert_eq!(file.records[0].team, "France");
        assert_eq!(back["France"], models[1]);
        assert_eq!(back["Germany"], models[0]);
        assert_eq!(render_models(back.values(), file.reference_date), text);
    }

    #[test]
    fn incomplete_team_rejected() {
        let mut file = ModelFile::from_models(&[model("Wales")], None);
        file.records.pop();
        let text = serde_json::to_string(&file).unwrap();
        let err = parse_models("m.json", &text).unwrap_err();
        assert!(err.to_string().contains("nested"), "{err}");
    }

    #[test]
    fn wrong_version_and_arity_rejected() {
        let mut file = ModelFile::from_models(&[model("Wales")], None);
        file.format_version = 99;
        assert!(parse_models("m.json", &serde_json::to_string(&file).unwrap()).is_err());
        let mut file = ModelFile::from_models(&[model("Wales")], None);
        file.records[0].alpha.pop();
        assert!(parse_models("m.json", &serde_json::to_string(&file).unwrap()).is_err());
    }
}
