use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::{read_text, DataError, DateWindow};
use crate::elo::KFactorTable;
use crate::regression::FitOptions;
use crate::tournament::SimSettings;
use crate::weights::{ImportanceTable, WeightConfig, DEFAULT_HALF_PERIOD_DAYS};

/// Environment variable naming the directory searched for `eurocast.toml`
/// when no config path is given.
pub const CONFIG_DIR_ENV: &str = "EUROCAST_CONFIG_DIR";
pub const CONFIG_FILE_NAME: &str = "eurocast.toml";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WeightsSection {
    pub half_period_days: u32,
    /// Day the weights are measured from; defaults to the end of the fit window.
    pub reference_date: Option<NaiveDate>,
}

impl Default for WeightsSection {
    fn default() -> Self {
        Self { half_period_days: DEFAULT_HALF_PERIOD_DAYS, reference_date: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitSection {
    pub window_start: NaiveDate,
    pub window_end: NaiveDate,
    pub starts: usize,
    pub seed: u64,
    pub max_iterations: usize,
    pub min_observations: usize,
    pub stationarity_tol: f64,
}

impl Default for FitSection {
    fn default() -> Self {
        let o = FitOptions::default();
        Self {
            window_start: NaiveDate::from_ymd_opt(2014, 1, 1).expect("valid date"),
            window_end: NaiveDate::from_ymd_opt(2021, 6, 7).expect("valid date"),
            starts: o.starts,
            seed: o.seed,
            max_iterations: o.max_iterations,
            min_observations: o.min_observations,
            stationarity_tol: o.stationarity_tol,
        }
    }
}

impl FitSection {
    pub fn options(&self) -> FitOptions {
        FitOptions {
            starts: self.starts,
            seed: self.seed,
            max_iterations: self.max_iterations,
            min_observations: self.min_observations,
            stationarity_tol: self.stationarity_tol,
            ..FitOptions::default()
        }
    }

    pub fn window(&self) -> DateWindow {
        DateWindow { start: self.window_start, end: self.window_end }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationSection {
    pub n_runs: u64,
    pub seed: u64,
    pub tournament_k: f64,
    pub extra_time_scale: f64,
    pub grid_cap: u32,
}

impl Default for SimulationSection {
    fn default() -> Self {
        let s = SimSettings::default();
        Self {
            n_runs: 100_000,
            seed: 2021,
            tournament_k: s.k,
            extra_time_scale: s.extra_time_scale,
            grid_cap: crate::forecast::DEFAULT_GRID_CAP,
        }
    }
}

impl SimulationSection {
    pub fn settings(&self) -> SimSettings {
        SimSettings { k: self.tournament_k, extra_time_scale: self.extra_time_scale }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub weights: WeightsSection,
    pub k_factor: KFactorTable,
    pub importance: ImportanceTable,
    pub fit: FitSection,
    pub simulation: SimulationSection,
}

impl Config {
    pub fn parse(origin: &str, text: &str) -> Result<Self, DataError> {
        let cfg: Config = toml::from_str(text).map_err(|e| DataError::schema(origin, e.to_string()))?;
        cfg.validate(origin)?;
        Ok(cfg)
    }

    fn validate(&self, origin: &str) -> Result<(), DataError> {
        let err = |m: String| Err(DataError::schema(origin, m));
        if self.fit.window_start > self.fit.window_end {
            return err("fit.window_start is after fit.window_end".into());
        }
        if self.fit.starts == 0 {
            return err("fit.starts must be at least 1".into());
        }
        if !(self.simulation.tournament_k > 0.0 && self.simulation.tournament_k.is_finite()) {
            return err("simulation.tournament_k must be positive".into());
        }
        if !(self.simulation.extra_time_scale > 0.0 && self.simulation.extra_time_scale <= 1.0) {
            return err("simulation.extra_time_scale must lie in (0, 1]".into());
        }
        if self.simulation.grid_cap < 10 {
            return err("simulation.grid_cap must be at least 10".into());
        }
        if let Some((code, k)) = self.k_factor.0.iter().find(|(_, k)| !(**k > 0.0 && k.is_finite())) {
            return err(format!("k_factor.{code} must be positive, got {k}"));
        }
        self.weight_config().validate().map_err(|e| DataError::schema(origin, e.to_string()))
    }

    pub fn weight_config(&self) -> WeightConfig {
        WeightConfig {
            half_period_days: self.weights.half_period_days,
            reference_date: self.weights.reference_date.unwrap_or(self.fit.window_end),
            importance: self.importance.clone(),
        }
    }
}

/// Reads `path`, or `$EUROCAST_CONFIG_DIR/eurocast.toml` if no path is given
/// and that file exists, or falls back to built-in defaults.
pub fn load_config(path: Option<&Path>) -> Result<Config, DataError> {
    let candidate: Option<PathBuf> = match path {
        Some(p) => Some(p.to_path_buf()),
        None => std::env::var_os(CONFIG_DIR_ENV)
            .map(|d| PathBuf::from(d).join(CONFIG_FILE_NAME))
            .filter(|p| p.exists()),
    };
    match candidate {
        Some(p) => Config::parse(&p.display().to_string(), &read_text(&p)?),
        None => Ok(Config::default()),
    }
}
