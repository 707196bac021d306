//! Per-team ZIGP regressions fitted by weighted maximum likelihood.
//!
//! Three regressions are fitted for every team:
//!
//! * attack: goals scored, covariates `(1, opponent Elo, location)`;
//! * defense: goals conceded, covariates `(1, opponent Elo, location)`;
//! * nested: goals scored in matches where the team was the Elo underdog,
//!   covariates `(1, opponent Elo, location, opponent goals)`.
//!
//! Coefficients are reported on the raw covariate scale. Internally the
//! optimizer works on centred and scaled covariates and maps the result back.

mod gof;
mod likelihood;
mod optimizer;

use std::collections::BTreeMap;
use std::fmt;

use log::{debug, warn};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data_io::MatchRecord;
use crate::forecast::location_indicator;
use crate::weights::{match_weight, WeightConfig, WeightError};
use crate::zigp::{ZigpError, ZigpParams};

pub use gof::{chi_square_gof, chi_square_p_value, pearson_statistic, GofResult, MEAN_FLOOR};
pub use likelihood::{point_terms, PointTerms, WeightedLikelihood};
pub use optimizer::{minimize, BfgsOptions, BfgsOutcome};

use likelihood::logistic;

/// Linear predictor clamp applied when turning coefficients into distribution
/// parameters.
const ETA_RANGE: (f64, f64) = (-40.0, 8.0);
/// Upper bound on the zero-inflation used for distribution parameters.
const OMEGA_MAX: f64 = 1.0 - 1e-12;

/// `log mu = x . alpha`, `phi = 1 + e^beta`, `omega = e^gamma / (1 + e^gamma)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionCoefficients {
    pub alpha: Vec<f64>,
    pub beta: f64,
    pub gamma_log: f64,
}

impl RegressionCoefficients {
    pub fn phi(&self) -> f64 {
        1.0 + self.beta.exp()
    }

    pub fn omega(&self) -> f64 {
        logistic(self.gamma_log)
    }

    pub fn linear_predictor(&self, covariates: &[f64]) -> f64 {
        debug_assert_eq!(covariates.len(), self.alpha.len());
        self.alpha.iter().zip(covariates).map(|(a, x)| a * x).sum()
    }

    /// `mu(x)` without zero-inflation.
    pub fn intensity(&self, covariates: &[f64]) -> f64 {
        self.linear_predictor(covariates).exp()
    }

    pub fn params(&self, covariates: &[f64]) -> Result<ZigpParams<f64>, ZigpError> {
        let eta = self.linear_predictor(covariates).clamp(ETA_RANGE.0, ETA_RANGE.1);
        ZigpParams::new(eta.exp(), self.phi(), self.omega().min(OMEGA_MAX))
    }

    pub fn is_finite(&self) -> bool {
        self.alpha.iter().all(|a| a.is_finite()) && self.beta.is_finite() && self.gamma_log.is_finite()
    }

    pub fn to_theta(&self) -> Vec<f64> {
        let mut t = self.alpha.clone();
        t.push(self.beta);
        t.push(self.gamma_log);
        t
    }

    pub fn from_theta(theta: &[f64]) -> Self {
        let p = theta.len() - 2;
        Self { alpha: theta[..p].to_vec(), beta: theta[p], gamma_log: theta[p + 1] }
    }
}

/// One response with its covariates and regression weight.
#[derive(Debug, Clone, PartialEq)]
pub struct FitObservation {
    pub response: u32,
    pub covariates: Vec<f64>,
    pub weight: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegressionKind {
    Attack,
    Defense,
    Nested,
}

impl RegressionKind {
    pub const ALL: [RegressionKind; 3] = [RegressionKind::Attack, RegressionKind::Defense, RegressionKind::Nested];

    pub fn n_alpha(self) -> usize {
        match self {
            RegressionKind::Attack | RegressionKind::Defense => 3,
            RegressionKind::Nested => 4,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            RegressionKind::Attack => "attack",
            RegressionKind::Defense => "defense",
            RegressionKind::Nested => "nested",
        }
    }
}

impl fmt::Display for RegressionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for RegressionKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "attack" => Ok(RegressionKind::Attack),
            "defense" => Ok(RegressionKind::Defense),
            "nested" => Ok(RegressionKind::Nested),
            other => Err(format!("unknown regression kind `{other}` (expected attack, defense or nested)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelSource {
    Fitted,
    /// Nested model copied from the attack fit with the opponent-goals
    /// coefficient fixed at zero.
    AttackFallback,
    /// Supplied externally rather than estimated.
    Given,
}

impl fmt::Display for ModelSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelSource::Fitted => "fitted",
            ModelSource::AttackFallback => "attack_fallback",
            ModelSource::Given => "given",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    pub n_obs: usize,
    pub total_weight: f64,
    pub log_likelihood: f64,
    /// Absent for coefficients that were not optimized on these observations.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gradient_norm: Option<f64>,
    pub gof: GofResult,
    #[serde(default)]
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedRegression {
    pub coefficients: RegressionCoefficients,
    pub source: ModelSource,
    pub diagnostics: Option<FitDiagnostics>,
}

impl FittedRegression {
    pub fn given(coefficients: RegressionCoefficients) -> Self {
        Self { coefficients, source: ModelSource::Given, diagnostics: None }
    }
}

/// The three fitted regressions of one team.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TeamModel {
    pub team: String,
    pub attack: FittedRegression,
    pub defense: FittedRegression,
    pub nested: FittedRegression,
}

impl TeamModel {
    pub fn regression(&self, kind: RegressionKind) -> &FittedRegression {
        match kind {
            RegressionKind::Attack => &self.attack,
            RegressionKind::Defense => &self.defense,
            RegressionKind::Nested => &self.nested,
        }
    }

    /// Checks coefficient counts and finiteness.
    pub fn validate(&self) -> Result<(), String> {
        for kind in RegressionKind::ALL {
            let c = &self.regression(kind).coefficients;
            if c.alpha.len() != kind.n_alpha() {
                return Err(format!(
                    "team `{}`: {kind} regression needs {} alpha coefficients, found {}",
                    self.team,
                    kind.n_alpha(),
                    c.alpha.len()
                ));
            }
            if !c.is_finite() {
                return Err(format!("team `{}`: {kind} regression has non-finite coefficients", self.team));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitOptions {
    pub starts: usize,
    pub seed: u64,
    pub max_iterations: usize,
    /// Optimizer target on the gradient of the mean weighted log-likelihood.
    pub grad_tol: f64,
    /// A fit is accepted as stationary below this gradient norm.
    pub stationarity_tol: f64,
    pub min_observations: usize,
    /// Half-width of the uniform perturbation applied to jittered starts.
    pub jitter: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            starts: 5,
            seed: 2021,
            max_iterations: 500,
            grad_tol: 1e-9,
            stationarity_tol: 1e-5,
            min_observations: 10,
            jitter: 0.5,
        }
    }
}

impl FitOptions {
    pub fn required_observations(&self, n_alpha: usize) -> usize {
        self.min_observations.max(2 * n_alpha)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    pub coefficients: RegressionCoefficients,
    /// Weighted log-likelihood `L` on the raw scale.
    pub log_likelihood: f64,
    /// Gradient infinity-norm of `L / sum(w)` in standardized coordinates.
    pub gradient_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    pub n_obs: usize,
    pub total_weight: f64,
    /// Objective `L / sum(w)` after each accepted step of the winning start.
    pub trace: Vec<f64>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FitError {
    #[error("need at least {need} observations, have {have}")]
    InsufficientData { have: usize, need: usize },
    #[error("invalid observation {index}: {reason}")]
    InvalidObservation { index: usize, reason: String },
    #[error("no stationary point after {starts} starts (best gradient norm {:.3e})", .best.gradient_norm)]
    NonConvergence { starts: usize, best: Box<FitReport> },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RegressionError {
    #[error("team `{0}` has no matches in the data")]
    NoMatches(String),
    #[error("match on {date} ({team_a} v {team_b}) lacks Elo-before annotations; run the Elo replay first")]
    MissingElo { date: chrono::NaiveDate, team_a: String, team_b: String },
    #[error(transparent)]
    Weight(#[from] WeightError),
    #[error("team `{team}`, {kind} regression: {source}")]
    Fit {
        team: String,
        kind: RegressionKind,
        #[source]
        source: FitError,
    },
}

/// One match seen from one team's side.
struct Perspective {
    own_goals: u32,
    opp_goals: u32,
    own_elo: f64,
    opp_elo: f64,
    loc: f64,
}

fn perspective(team: &str, m: &MatchRecord) -> Result<Option<Perspective>, RegressionError> {
    let missing = || RegressionError::MissingElo {
        date: m.date,
        team_a: m.team_a.clone(),
        team_b: m.team_b.clone(),
    };
    let (ea, eb) = (m.elo_a_before.ok_or_else(missing)?, m.elo_b_before.ok_or_else(missing)?);
    let p = if m.team_a == team {
        Perspective {
            own_goals: m.goals_a,
            opp_goals: m.goals_b,
            own_elo: ea,
            opp_elo: eb,
            loc: location_indicator(&m.team_a, &m.team_b, &m.venue) as f64,
        }
    } else if m.team_b == team {
        Perspective {
            own_goals: m.goals_b,
            opp_goals: m.goals_a,
            own_elo: eb,
            opp_elo: ea,
            loc: location_indicator(&m.team_b, &m.team_a, &m.venue) as f64,
        }
    } else {
        return Ok(None);
    };
    Ok(Some(p))
}

fn build_observations(
    team: &str,
    matches: &[MatchRecord],
    cfg: &WeightConfig,
    mut select: impl FnMut(&Perspective) -> Option<FitObservation>,
) -> Result<Vec<FitObservation>, RegressionError> {
    let mut out = Vec::new();
    for m in matches {
        if let Some(p) = perspective(team, m)? {
            if let Some(mut o) = select(&p) {
                o.weight = match_weight(m, cfg)?;
                out.push(o);
            }
        }
    }
    Ok(out)
}

/// Goals scored by `team`; covariates `(1, opponent Elo, location)`.
pub fn build_attack_observations(
    team: &str,
    matches: &[MatchRecord],
    cfg: &WeightConfig,
) -> Result<Vec<FitObservation>, RegressionError> {
    let obs = build_observations(team, matches, cfg, |p| {
        Some(FitObservation { response: p.own_goals, covariates: vec![1.0, p.opp_elo, p.loc], weight: 0.0 })
    })?;
    if obs.is_empty() {
        return Err(RegressionError::NoMatches(team.to_string()));
    }
    Ok(obs)
}

/// Goals conceded by `team`; covariates `(1, opponent Elo, location)`.
pub fn build_defense_observations(
    team: &str,
    matches: &[MatchRecord],
    cfg: &WeightConfig,
) -> Result<Vec<FitObservation>, RegressionError> {
    let obs = build_observations(team, matches, cfg, |p| {
        Some(FitObservation { response: p.opp_goals, covariates: vec![1.0, p.opp_elo, p.loc], weight: 0.0 })
    })?;
    if obs.is_empty() {
        return Err(RegressionError::NoMatches(team.to_string()));
    }
    Ok(obs)
}

/// Goals scored by `team` in matches where its Elo-before was strictly lower
/// than the opponent's; covariates `(1, opponent Elo, location, opponent goals)`.
/// May be empty.
pub fn build_nested_observations(
    team: &str,
    matches: &[MatchRecord],
    cfg: &WeightConfig,
) -> Result<Vec<FitObservation>, RegressionError> {
    build_observations(team, matches, cfg, |p| {
        (p.own_elo < p.opp_elo).then(|| FitObservation {
            response: p.own_goals,
            covariates: vec![1.0, p.opp_elo, p.loc, p.opp_goals as f64],
            weight: 0.0,
        })
    })
}

/// Affine covariate map used by the optimizer: kept columns are centred and
/// scaled when an intercept is present; constant non-intercept columns are
/// dropped (their coefficient is fixed at zero).
#[derive(Debug, Clone)]
pub(crate) struct Standardizer {
    dim: usize,
    has_intercept: bool,
    kept: Vec<usize>,
    mean: Vec<f64>,
    scale: Vec<f64>,
}

impl Standardizer {
    pub(crate) fn new(obs: &[FitObservation]) -> (Self, Vec<String>) {
        let dim = obs[0].covariates.len();
        let n = obs.len() as f64;
        let has_intercept = obs.iter().all(|o| o.covariates[0] == 1.0);
        let mut kept = Vec::with_capacity(dim);
        let mut mean = vec![0.0; dim];
        let mut scale = vec![1.0; dim];
        let mut warnings = Vec::new();
        for j in 0..dim {
            if has_intercept && j == 0 {
                kept.push(0);
                continue;
            }
            let m = obs.iter().map(|o| o.covariates[j]).sum::<f64>() / n;
            let var = obs.iter().map(|o| (o.covariates[j] - m).powi(2)).sum::<f64>() / n;
            let sd = var.sqrt();
            if sd <= 1e-12 * m.abs().max(1.0) {
                if has_intercept {
                    warnings.push(format!("covariate column {j} is constant; coefficient fixed at 0"));
                    continue;
                }
                kept.push(j);
                continue;
            }
            kept.push(j);
            scale[j] = sd;
            if has_intercept {
                mean[j] = m;
            }
        }
        (Self { dim, has_intercept, kept, mean, scale }, warnings)
    }

    fn transform(&self, obs: &[FitObservation]) -> Vec<FitObservation> {
        obs.iter()
            .map(|o| FitObservation {
                response: o.response,
                covariates: self.kept.iter().map(|&j| (o.covariates[j] - self.mean[j]) / self.scale[j]).collect(),
                weight: o.weight,
            })
            .collect()
    }

    /// Raw coefficients to optimizer coordinates.
    fn theta_from_raw(&self, raw: &RegressionCoefficients) -> Vec<f64> {
        let mut theta: Vec<f64> = self
            .kept
            .iter()
            .map(|&j| {
                if self.has_intercept && j == 0 {
                    raw.alpha[0] + (1..self.dim).map(|i| raw.alpha[i] * self.mean[i]).sum::<f64>()
                } else {
                    raw.alpha[j] * self.scale[j]
                }
            })
            .collect();
        theta.push(raw.beta);
        theta.push(raw.gamma_log);
        theta
    }

    fn raw_from_theta(&self, theta: &[f64]) -> RegressionCoefficients {
        let mut alpha = vec![0.0; self.dim];
        for (t, &j) in theta.iter().zip(&self.kept) {
            alpha[j] = t / self.scale[j];
        }
        if self.has_intercept {
            alpha[0] = theta[0] - (1..self.dim).map(|j| alpha[j] * self.mean[j]).sum::<f64>();
        }
        let p = self.kept.len();
        RegressionCoefficients { alpha, beta: theta[p], gamma_log: theta[p + 1] }
    }
}

fn check_observations(obs: &[FitObservation]) -> Result<(), FitError> {
    let dim = obs.first().map_or(0, |o| o.covariates.len());
    for (index, o) in obs.iter().enumerate() {
        let reason = if o.covariates.len() != dim || dim == 0 {
            Some(format!("expected {dim} covariates, found {}", o.covariates.len()))
        } else if !(o.weight > 0.0 && o.weight.is_finite()) {
            Some(format!("weight must be positive and finite, got {}", o.weight))
        } else if o.covariates.iter().any(|x| !x.is_finite()) {
            Some("non-finite covariate".to_string())
        } else {
            None
        };
        if let Some(reason) = reason {
            return Err(FitError::InvalidObservation { index, reason });
        }
    }
    Ok(())
}

/// Weighted least squares of `log(x + 0.5)` on the design.
fn warm_start(obs: &[FitObservation]) -> Vec<f64> {
    let p = obs[0].covariates.len();
    let mut xtwx = DMatrix::<f64>::zeros(p, p);
    let mut xtwy = DVector::<f64>::zeros(p);
    for o in obs {
        let x = DVector::from_column_slice(&o.covariates);
        let y = (o.response as f64 + 0.5).ln();
        xtwx += &x * x.transpose() * o.weight;
        xtwy += &x * (o.weight * y);
    }
    let alpha = xtwx
        .cholesky()
        .map(|c| c.solve(&xtwy))
        .filter(|a| a.iter().all(|v| v.is_finite()))
        .map(|a| a.as_slice().to_vec())
        .unwrap_or_else(|| {
            let tw: f64 = obs.iter().map(|o| o.weight).sum();
            let mean = obs.iter().map(|o| o.weight * o.response as f64).sum::<f64>() / tw;
            let mut a = vec![0.0; p];
            a[0] = (mean + 0.5).ln();
            a
        });
    let mut theta = alpha;
    theta.push(-1.5);
    theta.push(-2.5);
    theta
}

/// Gradient infinity-norm of `L / sum(w)` in the optimizer's standardized
/// coordinates, by central differences with `h = 1e-5 (1 + |theta|)`.
pub fn stationarity(obs: &[FitObservation], coef: &RegressionCoefficients) -> f64 {
    let (std, _) = Standardizer::new(obs);
    let scaled = std.transform(obs);
    let lik = WeightedLikelihood::new(&scaled);
    let tw = lik.total_weight();
    let theta = std.theta_from_raw(coef);
    let mut worst: f64 = 0.0;
    let mut probe = theta.clone();
    for i in 0..theta.len() {
        let h = 1e-5 * (1.0 + theta[i].abs());
        probe[i] = theta[i] + h;
        let up = lik.value(&probe);
        probe[i] = theta[i] - h;
        let down = lik.value(&probe);
        probe[i] = theta[i];
        worst = worst.max(((up - down) / (2.0 * h) / tw).abs());
    }
    worst
}

/// Maximizes the weighted ZIGP log-likelihood of `obs`.
///
/// Runs `opts.starts` BFGS starts: a least-squares warm start (or `init`)
/// followed by seeded perturbations of it, and keeps the best.
pub fn fit_zigp(
    obs: &[FitObservation],
    init: Option<&RegressionCoefficients>,
    opts: &FitOptions,
) -> Result<FitReport, FitError> {
    check_observations(obs)?;
    let dim = obs.first().map_or(0, |o| o.covariates.len());
    let need = opts.required_observations(dim);
    if obs.len() < need {
        return Err(FitError::InsufficientData { have: obs.len(), need });
    }
    if let Some(c) = init {
        if c.alpha.len() != dim {
            return Err(FitError::InvalidObservation {
                index: 0,
                reason: format!("initial coefficients have {} alphas, design has {dim}", c.alpha.len()),
            });
        }
    }

    let (std, mut warnings) = Standardizer::new(obs);
    for w in &warnings {
        warn!("design matrix: {w}");
    }
    let scaled = std.transform(obs);
    let lik = WeightedLikelihood::new(&scaled);
    let total_weight = lik.total_weight();
    let objective = |theta: &[f64], grad: &mut [f64]| {
        let v = lik.value_and_gradient(theta, grad);
        for g in grad.iter_mut() {
            *g = -*g / total_weight;
        }
        -v / total_weight
    };

    let base = match init {
        Some(c) => std.theta_from_raw(c),
        None => warm_start(&scaled),
    };
    let bfgs = BfgsOptions { max_iterations: opts.max_iterations, grad_tol: opts.grad_tol, ..Default::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let n_alpha = base.len() - 2;

    let mut best: Option<BfgsOutcome> = None;
    for start in 0..opts.starts.max(1) {
        let x0: Vec<f64> = if start == 0 {
            base.clone()
        } else {
            base.iter()
                .enumerate()
                .map(|(i, v)| {
                    let spread = if i < n_alpha { opts.jitter } else { 4.0 * opts.jitter };
                    v + rng.random_range(-spread..=spread)
                })
                .collect()
        };
        let out = minimize(objective, &x0, &bfgs);
        debug!(
            "start {start}: objective {:.10} grad {:.2e} iters {}",
            out.value, out.grad_norm, out.iterations
        );
        let better = match &best {
            None => out.value.is_finite(),
            Some(b) => out.value.is_finite() && out.value < b.value,
        };
        if better {
            best = Some(out);
        }
    }

    let Some(best) = best else {
        let coefficients = std.raw_from_theta(&base);
        let report = FitReport {
            coefficients,
            log_likelihood: f64::NAN,
            gradient_norm: f64::INFINITY,
            iterations: 0,
            converged: false,
            n_obs: obs.len(),
            total_weight,
            trace: Vec::new(),
            warnings,
        };
        return Err(FitError::NonConvergence { starts: opts.starts, best: Box::new(report) });
    };

    let coefficients = std.raw_from_theta(&best.x);
    if best.grad_norm >= opts.grad_tol {
        warnings.push(format!("optimizer stopped at gradient norm {:.2e}", best.grad_norm));
    }
    let report = FitReport {
        log_likelihood: WeightedLikelihood::new(obs).value(&coefficients.to_theta()),
        coefficients,
        gradient_norm: best.grad_norm,
        iterations: best.iterations,
        converged: best.grad_norm < opts.stationarity_tol,
        n_obs: obs.len(),
        total_weight,
        trace: best.trace.iter().map(|v| -v).collect(),
        warnings,
    };
    if report.converged {
        Ok(report)
    } else {
        Err(FitError::NonConvergence { starts: opts.starts, best: Box::new(report) })
    }
}

fn fitted(report: FitReport, obs: &[FitObservation]) -> FittedRegression {
    let gof = chi_square_gof(obs, &report.coefficients);
    FittedRegression {
        diagnostics: Some(FitDiagnostics {
            n_obs: report.n_obs,
            total_weight: report.total_weight,
            log_likelihood: report.log_likelihood,
            gradient_norm: Some(report.gradient_norm),
            gof,
            warnings: report.warnings,
        }),
        coefficients: report.coefficients,
        source: ModelSource::Fitted,
    }
}

/// Nested model derived from an attack fit: same coefficients, opponent-goals
/// coefficient zero.
pub fn nested_fallback(attack: &RegressionCoefficients) -> RegressionCoefficients {
    let mut alpha = attack.alpha.clone();
    alpha.push(0.0);
    RegressionCoefficients { alpha, beta: attack.beta, gamma_log: attack.gamma_log }
}

/// Stable per-team seed so a team's fit does not depend on which other teams
/// are fitted alongside it.
fn team_seed(seed: u64, team: &str, kind: RegressionKind) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in team.bytes().chain(kind.as_str().bytes()) {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    seed ^ h
}

#[derive(Debug, Clone, Default)]
pub struct TeamFitSummary {
    pub models: BTreeMap<String, TeamModel>,
    /// Teams without a usable model, with the reason.
    pub failures: BTreeMap<String, String>,
    /// Teams whose nested model fell back to the attack regression.
    pub nested_fallbacks: BTreeMap<String, String>,
}

/// Fits attack, defense and nested regressions for one team.
pub fn fit_team_model(
    team: &str,
    matches: &[MatchRecord],
    cfg: &WeightConfig,
    opts: &FitOptions,
) -> Result<(TeamModel, Option<String>), RegressionError> {
    let with_seed = |kind| FitOptions { seed: team_seed(opts.seed, team, kind), ..opts.clone() };
    let fit_err = |kind, source| RegressionError::Fit { team: team.to_string(), kind, source };

    let attack_obs = build_attack_observations(team, matches, cfg)?;
    let attack_report =
        fit_zigp(&attack_obs, None, &with_seed(RegressionKind::Attack)).map_err(|e| fit_err(RegressionKind::Attack, e))?;
    let defense_obs = build_defense_observations(team, matches, cfg)?;
    let defense_report = fit_zigp(&defense_obs, None, &with_seed(RegressionKind::Defense))
        .map_err(|e| fit_err(RegressionKind::Defense, e))?;

    let nested_obs = build_nested_observations(team, matches, cfg)?;
    let nested_opts = with_seed(RegressionKind::Nested);
    let (nested, fallback_reason) = match fit_zigp(&nested_obs, None, &nested_opts) {
        Ok(r) => (fitted(r, &nested_obs), None),
        Err(e) => {
            let reason = format!("nested fit unavailable ({e}); using attack regression");
            warn!("team `{team}`: {reason}");
            let coefficients = nested_fallback(&attack_report.coefficients);
            let diagnostics = (!nested_obs.is_empty()).then(|| {
                let ll = WeightedLikelihood::new(&nested_obs).value(&coefficients.to_theta());
                FitDiagnostics {
                    n_obs: nested_obs.len(),
                    total_weight: nested_obs.iter().map(|o| o.weight).sum(),
                    log_likelihood: ll,
                    gradient_norm: None,
                    gof: chi_square_gof(&nested_obs, &coefficients),
                    warnings: vec![reason.clone()],
                }
            });
            (FittedRegression { coefficients, source: ModelSource::AttackFallback, diagnostics }, Some(reason))
        }
    };

    let model = TeamModel {
        team: team.to_string(),
        attack: fitted(attack_report, &attack_obs),
        defense: fitted(defense_report, &defense_obs),
        nested,
    };
    Ok((model, fallback_reason))
}

/// Fits every team in `teams` independently (in parallel). Per-team failures
/// are collected rather than aborting the batch; only data problems affecting
/// all teams (e.g. a match dated after the reference date) return `Err`.
pub fn fit_team_models(
    matches: &[MatchRecord],
    teams: &[String],
    cfg: &WeightConfig,
    opts: &FitOptions,
) -> Result<TeamFitSummary, RegressionError> {
    for m in matches {
        match_weight(m, cfg)?;
    }
    let results: Vec<(String, Result<(TeamModel, Option<String>), RegressionError>)> = teams
        .par_iter()
        .map(|team| (team.clone(), fit_team_model(team, matches, cfg, opts)))
        .collect();

    let mut summary = TeamFitSummary::default();
    for (team, res) in results {
        match res {
            Ok((model, fallback)) => {
                if let Some(reason) = fallback {
                    summary.nested_fallbacks.insert(team.clone(), reason);
                }
                summary.models.insert(team, model);
            }
            Err(e @ RegressionError::MissingElo { .. }) | Err(e @ RegressionError::Weight(_)) => return Err(e),
            Err(e) => {
                summary.failures.insert(team, e.to_string());
            }
        }
    }
    Ok(summary)
}

/// Goodness of fit of one regression of `model` on `team`'s matches.
pub fn team_gof(
    team: &str,
    kind: RegressionKind,
    matches: &[MatchRecord],
    cfg: &WeightConfig,
    model: &TeamModel,
) -> Result<GofResult, RegressionError> {
    let obs = match kind {
        RegressionKind::Attack => build_attack_observations(team, matches, cfg)?,
        RegressionKind::Defense => build_defense_observations(team, matches, cfg)?,
        RegressionKind::Nested => build_nested_observations(team, matches, cfg)?,
    };
    Ok(chi_square_gof(&obs, &model.regression(kind).coefficients))
}

/// Logistic inverse of `omega`, i.e. `gamma_log` for a target zero-inflation.
pub fn gamma_for_omega(omega: f64) -> f64 {
    (omega / (1.0 - omega)).ln()
}

/// `beta` for a target dispersion `phi > 1`.
pub fn beta_for_phi(phi: f64) -> f64 {
    (phi - 1.0).ln()
}
