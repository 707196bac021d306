//! Exact-score forecasts for a single match from the nested two-stage model.
//!
//! The higher-rated side `A` scores `G_A ~ ZIGP(mu_A|B, phi_A|B, omega_A|B)`,
//! where each parameter averages `A`'s attack regression and `B`'s defense
//! regression. `B` then scores `G_B ~ ZIGP` from `B`'s nested regression, which
//! takes the realized `G_A` as a covariate.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data_io::Venue;
use crate::regression::TeamModel;
use crate::zigp::{ZigpError, ZigpParams};

pub const DEFAULT_GRID_CAP: u32 = 15;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ForecastError {
    #[error("no fitted model for team `{0}`")]
    MissingModel(String),
    #[error("score grid cap must be at least 10, got {0}")]
    GridCap(u32),
    #[error("model produced invalid distribution parameters: {0}")]
    Params(#[from] ZigpError),
}

/// `+1` if the match is in `team`'s country, `-1` if in `opponent`'s, else `0`.
pub fn location_indicator(team: &str, opponent: &str, venue: &Venue) -> i8 {
    match venue.country() {
        Some(c) if c == team => 1,
        Some(c) if c == opponent => -1,
        _ => 0,
    }
}

/// A match as listed, with the ratings each side carries into it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchContext {
    pub team_a: String,
    pub team_b: String,
    pub elo_a: f64,
    pub elo_b: f64,
    pub venue: Venue,
}

impl MatchContext {
    /// Whether `team_a` is the stronger side: higher Elo, ties to the
    /// lexicographically smaller team name.
    pub fn a_is_stronger(&self) -> bool {
        stronger_first(&self.team_a, self.elo_a, &self.team_b, self.elo_b)
    }

    /// Context with the stronger side listed first, plus whether a swap happened.
    pub fn ordered(&self) -> (MatchContext, bool) {
        if self.a_is_stronger() {
            (self.clone(), false)
        } else {
            (
                MatchContext {
                    team_a: self.team_b.clone(),
                    team_b: self.team_a.clone(),
                    elo_a: self.elo_b,
                    elo_b: self.elo_a,
                    venue: self.venue.clone(),
                },
                true,
            )
        }
    }
}

pub(crate) fn stronger_first(a: &str, elo_a: f64, b: &str, elo_b: f64) -> bool {
    elo_a > elo_b || (elo_a == elo_b && a <= b)
}

/// Parameters of the stronger side's goals. `ctx` must already be ordered.
pub fn stronger_params(
    stronger: &TeamModel,
    weaker: &TeamModel,
    ctx: &MatchContext,
) -> Result<ZigpParams<f64>, ForecastError> {
    stronger_params_scaled(stronger, weaker, ctx, 1.0)
}

fn stronger_params_scaled(
    stronger: &TeamModel,
    weaker: &TeamModel,
    ctx: &MatchContext,
    intensity_scale: f64,
) -> Result<ZigpParams<f64>, ForecastError> {
    let loc_a = location_indicator(&ctx.team_a, &ctx.team_b, &ctx.venue) as f64;
    let loc_b = location_indicator(&ctx.team_b, &ctx.team_a, &ctx.venue) as f64;
    let attack = stronger.attack.coefficients.params(&[1.0, ctx.elo_b, loc_a])?;
    let defense = weaker.defense.coefficients.params(&[1.0, ctx.elo_a, loc_b])?;
    let mu = 0.5 * (attack.mu() + defense.mu()) * intensity_scale;
    let phi = 0.5 * (attack.phi() + defense.phi());
    let omega = 0.5 * (attack.omega() + defense.omega());
    Ok(ZigpParams::new(mu, phi, omega)?)
}

/// Parameters of the weaker side's goals given the stronger side scored
/// `goals_a`. `ctx` must already be ordered.
pub fn weaker_params_given(
    weaker: &TeamModel,
    ctx: &MatchContext,
    goals_a: u32,
) -> Result<ZigpParams<f64>, ForecastError> {
    weaker_params_scaled(weaker, ctx, goals_a, 1.0)
}

fn weaker_params_scaled(
    weaker: &TeamModel,
    ctx: &MatchContext,
    goals_a: u32,
    intensity_scale: f64,
) -> Result<ZigpParams<f64>, ForecastError> {
    let loc_b = location_indicator(&ctx.team_b, &ctx.team_a, &ctx.venue) as f64;
    let p = weaker.nested.coefficients.params(&[1.0, ctx.elo_a, loc_b, goals_a as f64])?;
    if intensity_scale == 1.0 {
        Ok(p)
    } else {
        Ok(p.scale_intensity(intensity_scale)?)
    }
}

/// Source of fitted team models.
pub trait ModelLookup {
    fn model(&self, team: &str) -> Option<&TeamModel>;

    fn require(&self, team: &str) -> Result<&TeamModel, ForecastError> {
        self.model(team).ok_or_else(|| ForecastError::MissingModel(team.to_string()))
    }
}

impl ModelLookup for BTreeMap<String, TeamModel> {
    fn model(&self, team: &str) -> Option<&TeamModel> {
        self.get(team)
    }
}

impl ModelLookup for [TeamModel] {
    fn model(&self, team: &str) -> Option<&TeamModel> {
        self.iter().find(|m| m.team == team)
    }
}

/// Both team models for one match, already oriented stronger-first.
#[derive(Debug, Clone)]
pub struct NestedMatch<'a> {
    stronger: &'a TeamModel,
    weaker: &'a TeamModel,
    ordered: MatchContext,
    swapped: bool,
}

impl<'a> NestedMatch<'a> {
    pub fn new(models: &'a (impl ModelLookup + ?Sized), ctx: &MatchContext) -> Result<Self, ForecastError> {
        let a = models.require(&ctx.team_a)?;
        let b = models.require(&ctx.team_b)?;
        Ok(Self::from_models(a, b, ctx))
    }

    /// `model_a` and `model_b` belong to `ctx.team_a` and `ctx.team_b`.
    pub fn from_models(model_a: &'a TeamModel, model_b: &'a TeamModel, ctx: &MatchContext) -> Self {
        let (ordered, swapped) = ctx.ordered();
        let (stronger, weaker) = if swapped { (model_b, model_a) } else { (model_a, model_b) };
        Self { stronger, weaker, ordered, swapped }
    }

    /// Whether the listed `team_b` is the stronger side.
    pub fn swapped(&self) -> bool {
        self.swapped
    }

    pub fn ordered_context(&self) -> &MatchContext {
        &self.ordered
    }

    pub fn stronger_params(&self) -> Result<ZigpParams<f64>, ForecastError> {
        stronger_params(self.stronger, self.weaker, &self.ordered)
    }

    pub fn weaker_params_given(&self, goals_stronger: u32) -> Result<ZigpParams<f64>, ForecastError> {
        weaker_params_given(self.weaker, &self.ordered, goals_stronger)
    }

    /// Draws stronger-side goals, then weaker-side goals conditional on them,
    /// with both intensities multiplied by `intensity_scale`. Returned in the
    /// listed `(team_a, team_b)` orientation.
    pub fn sample_scaled<R: Rng + ?Sized>(&self, rng: &mut R, intensity_scale: f64) -> Result<(u32, u32), ForecastError> {
        let first = stronger_params_scaled(self.stronger, self.weaker, &self.ordered, intensity_scale)?;
        let g_strong = first.sample(rng);
        let second = weaker_params_scaled(self.weaker, &self.ordered, g_strong, intensity_scale)?;
        let g_weak = second.sample(rng);
        Ok(if self.swapped { (g_weak, g_strong) } else { (g_strong, g_weak) })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<(u32, u32), ForecastError> {
        self.sample_scaled(rng, 1.0)
    }

    /// Joint score probabilities up to `cap` goals per side, renormalized.
    pub fn grid(&self, cap: u32) -> Result<ScoreGrid, ForecastError> {
        if cap < 10 {
            return Err(ForecastError::GridCap(cap));
        }
        let n = cap as usize + 1;
        let first = self.stronger_params()?;
        let mut probs = vec![0.0; n * n];
        for i in 0..n {
            let p_i = first.pmf(i as u32);
            let second = self.weaker_params_given(i as u32)?;
            for j in 0..n {
                probs[i * n + j] = p_i * second.pmf(j as u32);
            }
        }
        let raw_mass: f64 = probs.iter().sum();
        for p in &mut probs {
            *p /= raw_mass;
        }
        let mut grid = ScoreGrid {
            team_a: self.ordered.team_a.clone(),
            team_b: self.ordered.team_b.clone(),
            cap,
            probs,
            raw_mass,
        };
        if self.swapped {
            grid = grid.transposed();
        }
        Ok(grid)
    }
}

/// Probability of every score `goals_a : goals_b` with both at most `cap`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreGrid {
    pub team_a: String,
    pub team_b: String,
    pub cap: u32,
    /// Row-major: `probs[i * (cap + 1) + j] = P[G_a = i, G_b = j]`.
    pub probs: Vec<f64>,
    /// Mass inside the grid before renormalization.
    pub raw_mass: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutcomeProbabilities {
    pub win_a: f64,
    pub draw: f64,
    pub win_b: f64,
}

impl ScoreGrid {
    pub fn size(&self) -> usize {
        self.cap as usize + 1
    }

    pub fn get(&self, goals_a: u32, goals_b: u32) -> f64 {
        let n = self.size();
        self.probs[goals_a as usize * n + goals_b as usize]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.probs.chunks(self.size())
    }

    pub fn transposed(&self) -> ScoreGrid {
        let n = self.size();
        let mut probs = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                probs[j * n + i] = self.probs[i * n + j];
            }
        }
        ScoreGrid {
            team_a: self.team_b.clone(),
            team_b: self.team_a.clone(),
            cap: self.cap,
            probs,
            raw_mass: self.raw_mass,
        }
    }

    pub fn marginal_a(&self) -> Vec<f64> {
        self.rows().map(|r| r.iter().sum()).collect()
    }

    pub fn marginal_b(&self) -> Vec<f64> {
        let n = self.size();
        (0..n).map(|j| (0..n).map(|i| self.probs[i * n + j]).sum()).collect()
    }

    pub fn outcome(&self) -> OutcomeProbabilities {
        let n = self.size();
        let mut o = OutcomeProbabilities { win_a: 0.0, draw: 0.0, win_b: 0.0 };
        for i in 0..n {
            for j in 0..n {
                let p = self.probs[i * n + j];
                match i.cmp(&j) {
                    std::cmp::Ordering::Greater => o.win_a += p,
                    std::cmp::Ordering::Equal => o.draw += p,
                    std::cmp::Ordering::Less => o.win_b += p,
                }
            }
        }
        o
    }

    /// `P[G_a + G_b > line]`.
    pub fn over(&self, line: f64) -> f64 {
        let n = self.size();
        let mut total = 0.0;
        for i in 0..n {
            for j in 0..n {
                if (i + j) as f64 > line {
                    total += self.probs[i * n + j];
                }
            }
        }
        total
    }

    /// The most likely score `(goals_a, goals_b, probability)`.
    pub fn mode(&self) -> (u32, u32, f64) {
        let n = self.size();
        let (idx, p) = self
            .probs
            .iter()
            .enumerate()
            .fold((0, f64::MIN), |best, (k, &p)| if p > best.1 { (k, p) } else { best });
        ((idx / n) as u32, (idx % n) as u32, p)
    }
}

/// Score grid in the listed orientation of `ctx`.
pub fn score_grid(
    models: &(impl ModelLookup + ?Sized),
    ctx: &MatchContext,
    cap: u32,
) -> Result<ScoreGrid, ForecastError> {
    NestedMatch::new(models, ctx)?.grid(cap)
}

/// One score draw in the listed orientation of `ctx`.
pub fn sample_match<R: Rng + ?Sized>(
    models: &(impl ModelLookup + ?Sized),
    ctx: &MatchContext,
    rng: &mut R,
) -> Result<(u32, u32), ForecastError> {
    NestedMatch::new(models, ctx)?.sample(rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regression::{FittedRegression, RegressionCoefficients};

    fn coef(alpha: &[f64], beta: f64, gamma_log: f64) -> RegressionCoefficients {
        RegressionCoefficients { alpha: alpha.to_vec(), beta, gamma_log }
    }

    fn model(team: &str, attack: RegressionCoefficients, defense: RegressionCoefficients, nested: RegressionCoefficients) -> TeamModel {
        TeamModel {
            team: team.into(),
            attack: FittedRegression::given(attack),
            defense: FittedRegression::given(defense),
            nested: FittedRegression::given(nested),
        }
    }

    fn generic(team: &str, strength: f64) -> TeamModel {
        model(
            team,
            coef(&[2.0 + strength, -0.0011, 0.2], -2.0, -3.0),
            coef(&[-2.5 - strength, 0.0013, -0.15], -1.8, -4.0),
            coef(&[1.6 + strength, -0.001, 0.2, -0.05], -2.2, -3.5),
        )
    }

    fn ctx(a: &str, b: &str, ea: f64, eb: f64, venue: Venue) -> MatchContext {
        MatchContext { team_a: a.into(), team_b: b.into(), elo_a: ea, elo_b: eb, venue }
    }

    #[test]
    fn location() {
        let rome = Venue::Country("Italy".into());
        assert_eq!(location_indicator("Italy", "Turkey", &rome), 1);
        assert_eq!(location_indicator("Turkey", "Italy", &rome), -1);
        let munich = Venue::Country("Germany".into());
        assert_eq!(location_indicator("France", "Germany", &munich), -1);
        assert_eq!(location_indicator("France", "Germany", &Venue::Neutral), 0);
        assert_eq!(location_indicator("Germany", "France", &Venue::Neutral), 0);
        assert_eq!(location_indicator("France", "Germany", &Venue::Country("Spain".into())), 0);
    }

    #[test]
    fn ordering_ties_break_by_name() {
        let c = ctx("Wales", "Austria", 1800.0, 1800.0, Venue::Neutral);
        let (o, swapped) = c.ordered();
        assert!(swapped);
        assert_eq!(o.team_a, "Austria");
        assert!(ctx("A", "B", 1700.0, 1800.0, Venue::Neutral).ordered().1);
        assert!(!ctx("A", "B", 1900.0, 1800.0, Venue::Neutral).ordered().1);
    }

    #[test]
    fn degenerate_nested_ignores_goals() {
        let m = model("B", coef(&[0.1, 0.0, 0.0], -2.0, -3.0), coef(&[0.1, 0.0, 0.0], -2.0, -3.0), coef(&[0.3, -0.0005, 0.1, 0.0], -2.0, -3.0));
        let c = ctx("A", "B", 1900.0, 1800.0, Venue::Neutral);
        let p0 = weaker_params_given(&m, &c, 0).unwrap();
        let p5 = weaker_params_given(&m, &c, 5).unwrap();
        assert_eq!(p0, p5);
    }

    #[test]
    fn nested_goal_effect_ratio() {
        let m = model(
            "Germany",
            coef(&[0.0, 0.0, 0.0], -2.0, -3.0),
            coef(&[0.0, 0.0, 0.0], -2.0, -3.0),
            coef(&[3.340300, -0.0014539752, 0.21633103, -0.089635003], -2.0, -3.0),
        );
        let c = ctx("France", "Germany", 2087.0, 1936.0, Venue::Country("Germany".into()));
        let r = weaker_params_given(&m, &c, 5).unwrap().mu() / weaker_params_given(&m, &c, 0).unwrap().mu();
        assert!((r - (-0.089635003f64 * 5.0).exp()).abs() < 1e-12);
    }

    #[test]
    fn grid_is_normalized_and_factorizes() {
        let models = vec![generic("A", 0.2), generic("B", 0.0)];
        let c = ctx("A", "B", 1950.0, 1800.0, Venue::Country("B".into()));
        let nm = NestedMatch::new(models.as_slice(), &c).unwrap();
        let g = nm.grid(15).unwrap();
        assert!((g.probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!((g.raw_mass - 1.0).abs() < 1e-6, "raw mass {}", g.raw_mass);
        let first = nm.stronger_params().unwrap();
        for (i, m) in g.marginal_a().iter().enumerate() {
            assert!((m * g.raw_mass - first.pmf(i as u32)).abs() < 1e-9);
        }
        let o = g.outcome();
        assert!((o.win_a + o.draw + o.win_b - 1.0).abs() < 1e-12);
        assert!(g.probs.iter().all(|p| (0.0..=1.0).contains(p)));
    }

    #[test]
    fn swapped_arguments_transpose_exactly() {
        let models = vec![generic("Italy", 0.2), generic("Turkey", 0.0)];
        let rome = Venue::Country("Italy".into());
        let g1 = score_grid(models.as_slice(), &ctx("Turkey", "Italy", 1800.0, 2013.0, rome.clone()), 15).unwrap();
        let g2 = score_grid(models.as_slice(), &ctx("Italy", "Turkey", 2013.0, 1800.0, rome), 15).unwrap();
        assert_eq!(g1.transposed(), g2);
        assert_eq!(g1.team_a, "Turkey");
    }

    #[test]
    fn small_cap_rejected() {
        let models = vec![generic("A", 0.0), generic("B", 0.0)];
        assert_eq!(
            score_grid(models.as_slice(), &ctx("A", "B", 1.0, 0.0, Venue::Neutral), 9).unwrap_err(),
            ForecastError::GridCap(9)
        );
        assert_eq!(
            score_grid(models.as_slice(), &ctx("A", "Z", 1.0, 0.0, Venue::Neutral), 15).unwrap_err(),
            ForecastError::MissingModel("Z".into())
        );
    }
}
