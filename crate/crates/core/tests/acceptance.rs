//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
//!
//! Built with `harness = false` so the lines show up in plain `cargo test`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use chrono::{Days, NaiveDate};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use eurocast::data_io::{load_allocation, load_fixtures, load_ratings, Venue};
use eurocast::elo::{expected_score, goal_multiplier, update_pair};
use eurocast::forecast::{location_indicator, sample_match, score_grid, stronger_params, weaker_params_given, MatchContext};
use eurocast::metrics::{brier_error, mld_error, rps_error, score, RealizedRank, RealizedResult};
use eurocast::regression::{
    beta_for_phi, fit_zigp, gamma_for_omega, stationarity, FitOptions, FittedRegression, RegressionCoefficients, TeamModel,
    WeightedLikelihood,
};
use eurocast::synthetic::{regression_sample, strength_model};
use eurocast::tournament::{monte_carlo, MonteCarloOptions, SimSettings, TeamCounters, Tournament, ZigpSampler};
use eurocast::weights::{date_weight, importance_weight, WeightConfig};
use eurocast::{OutcomeDistribution, Zigp};

type Outcome = Result<String, String>;

fn check(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within_budget(start: Instant, budget: Duration) -> Result<String, String> {
    let took = start.elapsed();
    check(took < budget, format!("took {took:.1?}, budget {budget:?}"))?;
    Ok(format!("{took:.1?}"))
}

fn data(file: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/euro2020").join(file)
}

fn given(alpha: &[f64], gamma_log: f64) -> FittedRegression {
    // phi is not printed for the worked example; it does not enter the intensities
    FittedRegression::given(RegressionCoefficients { alpha: alpha.to_vec(), beta: beta_for_phi(1.1), gamma_log })
}

fn worked_example_models() -> (TeamModel, TeamModel) {
    let france = TeamModel {
        team: "France".into(),
        attack: given(&[1.895766, -0.0007002232, 0.2361780], -3.057658),
        defense: given(&[-1.0, 0.0007, -0.1], -4.0),
        nested: given(&[0.5, -0.0005, 0.1, -0.05], -4.0),
    };
    let germany = TeamModel {
        team: "Germany".into(),
        attack: given(&[1.0, -0.0004, 0.2], -4.0),
        defense: given(&[-3.886702, 0.002203437, -0.02433679], -5.519051),
        nested: given(&[3.340300, -0.0014539752, 0.21633103, -0.089635003], -4.0),
    };
    (france, germany)
}

fn worked_example() -> Outcome {
    let (france, germany) = worked_example_models();
    let ctx = MatchContext {
        team_a: "France".into(),
        team_b: "Germany".into(),
        elo_a: 2087.0,
        elo_b: 1936.0,
        venue: Venue::parse("Germany"),
    };
    check(ctx.a_is_stronger(), "France should be the stronger side")?;
    let loc_fr = location_indicator("France", "Germany", &ctx.venue) as f64;
    let loc_de = location_indicator("Germany", "France", &ctx.venue) as f64;
    let att = france.attack.coefficients.params(&[1.0, 1936.0, loc_fr]).map_err(|e| e.to_string())?;
    let def = germany.defense.coefficients.params(&[1.0, 2087.0, loc_de]).map_err(|e| e.to_string())?;
    let combined = stronger_params(&france, &germany, &ctx).map_err(|e| e.to_string())?;
    let nested = weaker_params_given(&germany, &ctx, 1).map_err(|e| e.to_string())?;

    let rows = [
        ("mu_France", att.mu(), 1.35521, 1e-4),
        ("omega_France", att.omega(), 0.044888, 1e-5),
        ("nu_Germany", def.mu(), 1.988806, 1e-4),
        ("delta_Germany", def.omega(), 0.003993638, 1e-6),
        ("mu_Germany|G_A=1", nested.mu(), 1.54118, 1e-4),
    ];
    for (name, got, want, tol) in rows {
        check((got - want).abs() <= tol, format!("{name} = {got}, expected {want} +- {tol}"))?;
    }
    let mean = combined.mean();
    let rel = (mean / 1.627268 - 1.0).abs();
    check(rel <= 0.005, format!("combined mean {mean} is {:.3}% from 1.627268", rel * 100.0))?;
    Ok(format!(
        "mu {:.6}, omega {:.6}, nu {:.6}, delta {:.9}, nested mu {:.6}, combined mean {mean:.6} ({:.2}% off)",
        att.mu(),
        att.omega(),
        def.mu(),
        def.omega(),
        nested.mu(),
        rel * 100.0
    ))
}

fn poisson_pmf(mu: f64, k: u32) -> f64 {
    (1..=k).fold((-mu).exp(), |p, i| p * mu / i as f64)
}

fn zigp_correctness() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for i in 1..=100 {
        let mu = i as f64 / 10.0;
        let d = Zigp::poisson(mu).map_err(|e| e.to_string())?;
        for k in 0..=20 {
            worst = worst.max((d.pmf(k) - poisson_pmf(mu, k)).abs());
        }
    }
    check(worst < 1e-12, format!("Poisson reduction error {worst:e}"))?;

    for mu in [0.1, 1.0, 2.5, 5.0, 10.0] {
        for phi in [1.0, 1.5, 2.0, 3.0] {
            for omega in [0.0, 0.2, 0.6] {
                let d = Zigp::new(mu, phi, omega).map_err(|e| e.to_string())?;
                let total: f64 = (0..=200).map(|k| d.pmf(k)).sum();
                check(
                    total < 1.0 + 1e-12 && total > 1.0 - 1e-6,
                    format!("mass up to 200 is {total} at ({mu}, {phi}, {omega})"),
                )?;
            }
        }
    }

    const N: usize = 1_000_000;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for (mu, phi, omega) in [(1.0, 1.0, 0.0), (1.5, 1.3, 0.1), (0.8, 2.0, 0.3)] {
        let d = Zigp::new(mu, phi, omega).map_err(|e| e.to_string())?;
        let xs: Vec<f64> = (0..N).map(|_| d.sample(&mut rng) as f64).collect();
        let n = N as f64;
        let m = xs.iter().sum::<f64>() / n;
        let s2 = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
        let m4 = xs.iter().map(|x| (x - m).powi(4)).sum::<f64>() / n;
        let se_mean = (s2 / n).sqrt();
        let se_var = ((m4 - s2 * s2) / n).sqrt();
        check(
            (m - d.mean()).abs() <= 3.0 * se_mean,
            format!("({mu}, {phi}, {omega}): sample mean {m} vs {} (se {se_mean:e})", d.mean()),
        )?;
        check(
            (s2 - d.variance()).abs() <= 3.0 * se_var,
            format!("({mu}, {phi}, {omega}): sample variance {s2} vs {} (se {se_var:e})", d.variance()),
        )?;
    }
    let took = within_budget(start, Duration::from_secs(60))?;
    Ok(format!("max Poisson error {worst:.1e}; moments within 3 se at 3 parameter sets; {took}"))
}

fn fitter_recovery() -> Outcome {
    let start = Instant::now();
    let alpha = [0.8, -0.3, 0.25];
    let (phi, omega) = (1.2, 0.3);
    let mut worst = [0.0f64; 3];
    for seed in 0..5 {
        let obs = regression_sample(&alpha, phi, omega, 2000, seed);
        let c = fit_zigp(&obs, None, &FitOptions::default()).map_err(|e| format!("seed {seed}: {e}"))?.coefficients;
        let da = c.alpha.iter().zip(alpha).map(|(g, w)| (g - w).abs()).fold(0.0, f64::max);
        let dp = (c.phi() / phi - 1.0).abs();
        let dw = (c.omega() / omega - 1.0).abs();
        check(da < 0.1, format!("seed {seed}: alpha {:?}", c.alpha))?;
        check(dp < 0.15, format!("seed {seed}: phi {}", c.phi()))?;
        check(dw < 0.15, format!("seed {seed}: omega {}", c.omega()))?;
        let g = stationarity(&obs, &c);
        check(g < 1e-5, format!("seed {seed}: gradient norm {g:e}"))?;
        worst = [worst[0].max(da), worst[1].max(dp), worst[2].max(dw)];
    }

    let obs = regression_sample(&alpha, phi, omega, 300, 7);
    let lik = WeightedLikelihood::new(&obs);
    let centre = [alpha[0], alpha[1], alpha[2], beta_for_phi(phi), gamma_for_omega(omega)];
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst_rel = 0.0f64;
    for _ in 0..10 {
        let theta: Vec<f64> = centre.iter().map(|v| v + rand::Rng::random_range(&mut rng, -1.0..1.0)).collect();
        let mut grad = vec![0.0; theta.len()];
        lik.value_and_gradient(&theta, &mut grad);
        let mut probe = theta.clone();
        let mut fd = vec![0.0; theta.len()];
        for i in 0..theta.len() {
            let h = 1e-5 * (1.0 + theta[i].abs());
            probe[i] = theta[i] + h;
            let up = lik.value(&probe);
            probe[i] = theta[i] - h;
            let down = lik.value(&probe);
            probe[i] = theta[i];
            fd[i] = (up - down) / (2.0 * h);
        }
        let scale = fd.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let rel = grad.iter().zip(&fd).map(|(a, f)| (a - f).abs()).fold(0.0, f64::max) / scale;
        worst_rel = worst_rel.max(rel);
    }
    check(worst_rel <= 1e-4, format!("gradient vs central differences: relative error {worst_rel:e}"))?;
    let took = within_budget(start, Duration::from_secs(120))?;
    Ok(format!(
        "worst |alpha err| {:.3}, phi {:.1}%, omega {:.1}%; gradient rel err {worst_rel:.1e}; {took}",
        worst[0],
        worst[1] * 100.0,
        worst[2] * 100.0
    ))
}

fn elo_identities() -> Outcome {
    check(expected_score(1500.0f64, 1500.0) == 0.5, "We(0) != 0.5")?;
    for d in [1.0, 50.0, 151.0, 400.0, 800.0, 1234.5] {
        let s = expected_score(1500.0 + d, 1500.0f64) + expected_score(1500.0, 1500.0 + d);
        check((s - 1.0).abs() <= 1e-15, format!("We({d}) + We(-{d}) = {s}"))?;
    }
    for k in [20.0, 50.0, 60.0] {
        for g in 0..4 {
            let (a, b) = update_pair(1834.0f64, 1834.0, k, g, g);
            check(a == 1834.0 && b == 1834.0, format!("draw {g}:{g} between equals moved ratings to {a}, {b}"))?;
        }
    }
    for (n, want) in [(0, 1.0), (1, 1.0), (2, 1.5), (3, 1.75)] {
        let g: f64 = goal_multiplier(n).map_err(|e| e.to_string())?;
        check(g == want, format!("G({n}) = {g}, expected {want}"))?;
    }
    Ok("We(0) = 0.5, symmetry, draws between equals, G table".into())
}

fn weight_checks() -> Outcome {
    let reference = NaiveDate::from_ymd_opt(2021, 6, 10).unwrap();
    let cfg = WeightConfig::new(reference);
    let w = date_weight(reference.checked_sub_days(Days::new(1095)).unwrap(), &cfg).map_err(|e| e.to_string())?;
    check(w == 0.5, format!("date weight one half-period back is {w}"))?;
    for (code, want) in [("WC", 4.0), ("CONT", 3.0), ("QUAL", 2.5), ("NL", 2.5), ("OTHER", 1.0), ("FRIENDLY", 1.0)] {
        let got = importance_weight(code, &cfg).map_err(|e| e.to_string())?;
        check(got == want, format!("importance {code} = {got}, expected {want}"))?;
    }
    Ok("date weight 0.5 at 1095 days; importance table".into())
}

fn euro_setup() -> Result<(Tournament, BTreeMap<String, TeamModel>, Vec<f64>), String> {
    let fixtures = load_fixtures(&data("fixtures.csv")).map_err(|e| e.to_string())?;
    let allocation = load_allocation(&data("allocation.csv")).map_err(|e| e.to_string())?;
    let tournament = Tournament::new(&fixtures, allocation).map_err(|e| e.to_string())?;
    let ratings: BTreeMap<String, f64> =
        load_ratings(&data("ratings.csv")).map_err(|e| e.to_string())?.into_iter().map(|r| (r.team, r.elo)).collect();
    let models = ratings.iter().map(|(t, e)| (t.clone(), strength_model(t, *e))).collect();
    let base = tournament.base_elo(&ratings).map_err(|e| e.to_string())?;
    Ok((tournament, models, base))
}

fn tournament_structure() -> Outcome {
    let start = Instant::now();
    let (tournament, models, base) = euro_setup()?;
    tournament.check_euro24().map_err(|e| e.to_string())?;
    let sampler = ZigpSampler::new(&tournament, &models).map_err(|e| e.to_string())?;
    let settings = SimSettings::default();
    let run = |workers| {
        monte_carlo(&tournament, &sampler, &base, &settings, &MonteCarloOptions { n_runs: 2000, seed: 2021, workers: Some(workers) })
            .map_err(|e| e.to_string())
    };
    let one = run(1)?;
    let many = run(4)?;
    one.check_invariants(tournament.n_best_thirds as u64)?;
    let n = one.n_runs;
    for (t, c) in one.teams.iter().zip(&one.counters) {
        check(c.group_first + c.group_second + c.third_qualified + c.group_exit == n, format!("{t}: group row"))?;
    }
    let col = |f: fn(&TeamCounters) -> u64| one.counters.iter().map(f).sum::<u64>();
    for (name, got, want) in [
        ("champion", col(|c| c.champion), n),
        ("final", col(|c| c.final_), 2 * n),
        ("semi-final", col(|c| c.semifinal), 4 * n),
        ("quarter-final", col(|c| c.quarterfinal), 8 * n),
        ("round of 16", col(|c| c.last16), 16 * n),
    ] {
        check(got == want, format!("{name} column sums to {got}, expected {want}"))?;
    }
    check(one == many, "1-worker and 4-worker aggregates differ")?;
    let took = within_budget(start, Duration::from_secs(120))?;
    Ok(format!("n = 2000, partitions exact, monotone counters, 1 vs 4 workers identical; {took} for both runs"))
}

fn sampler_grid_agreement() -> Outcome {
    let start = Instant::now();
    let (france, germany) = worked_example_models();
    let mut models: BTreeMap<String, TeamModel> = BTreeMap::new();
    models.insert("France".into(), france);
    models.insert("Germany".into(), germany);
    for (t, e) in [("Belgium", 2100.0), ("Finland", 1720.0), ("Hungary", 1755.0), ("Portugal", 2037.0)] {
        models.insert(t.into(), strength_model(t, e));
    }
    let matchups = [
        ("France", "Germany", 2087.0, 1936.0, "Germany"),
        ("Finland", "Belgium", 1720.0, 2100.0, "NEUTRAL"),
        ("Hungary", "Portugal", 1755.0, 2037.0, "Hungary"),
    ];
    const N: u64 = 1_000_000;
    let cap = 15u32;
    let mut cells = 0;
    let mut worst = 0.0f64;
    for (i, (a, b, ea, eb, venue)) in matchups.iter().enumerate() {
        let ctx =
            MatchContext { team_a: a.to_string(), team_b: b.to_string(), elo_a: *ea, elo_b: *eb, venue: Venue::parse(venue) };
        let grid = score_grid(&models, &ctx, cap).map_err(|e| e.to_string())?;
        let size = (cap + 1) as usize;
        let mut counts = vec![0u64; size * size];
        let mut rng = ChaCha8Rng::seed_from_u64(70 + i as u64);
        for _ in 0..N {
            let (x, y) = sample_match(&models, &ctx, &mut rng).map_err(|e| e.to_string())?;
            if x <= cap && y <= cap {
                counts[x as usize * size + y as usize] += 1;
            }
        }
        for x in 0..=cap {
            for y in 0..=cap {
                let p = grid.get(x, y);
                if p < 1e-4 {
                    continue;
                }
                let freq = counts[x as usize * size + y as usize] as f64 / N as f64;
                let z = (freq - p).abs() / (p * (1.0 - p) / N as f64).sqrt();
                check(z <= 4.0, format!("{a}-{b} {x}:{y}: frequency {freq} vs grid {p} ({z:.2} sigma)"))?;
                worst = worst.max(z);
                cells += 1;
            }
        }
    }
    let took = within_budget(start, Duration::from_secs(120))?;
    Ok(format!("{cells} cells over 3 matchups, largest deviation {worst:.2} sigma; {took}"))
}

fn metrics_oracles() -> Outcome {
    let rank = |r| RealizedRank::new(r).unwrap();
    let uniform = OutcomeDistribution::new("X", [1.0 / 6.0; 6]).map_err(|e| e.to_string())?;
    for r in 1..=6 {
        let b = brier_error(&uniform, rank(r));
        check((b - 25.0 / 30.0).abs() <= 1e-15, format!("uniform Brier at rank {r} = {b}"))?;
    }
    let toy = OutcomeDistribution::new("X", [0.8, 0.2, 0.0, 0.0, 0.0, 0.0]).map_err(|e| e.to_string())?;
    let rps = rps_error(&toy, rank(2));
    check((rps - 0.128).abs() <= 1e-15, format!("two-category RPS = {rps}"))?;

    let mut forecasts = Vec::new();
    let mut realized = Vec::new();
    for (i, r) in (1..=6).enumerate() {
        let team = format!("T{i}");
        let mut p = [0.0; 6];
        p[r as usize - 1] = 1.0;
        forecasts.push(OutcomeDistribution::new(&team, p).map_err(|e| e.to_string())?);
        check(mld_error(&forecasts[i], rank(r)) == 0.0, "perfect MLD")?;
        realized.push(RealizedResult { team, rank: rank(r) });
    }
    let rep = score(&forecasts, &realized).map_err(|e| e.to_string())?;
    check(
        rep.mld == 0.0 && rep.brier == 0.0 && rep.rps == 0.0,
        format!("perfect forecasts scored {}, {}, {}", rep.mld, rep.brier, rep.rps),
    )?;
    Ok("uniform Brier 25/30, RPS toy 0.128, perfect forecasts 0/0/0".into())
}

fn context_statement() -> Outcome {
    Ok("published backtest tables (MLD 22, Brier 17.52441, RPS 5.280199) depend on private data and \
        unpublished coefficients; context only, not a target"
        .into())
}

fn main() -> ExitCode {
    let criteria: [(u8, &str, fn() -> Outcome); 9] = [
        (1, "worked example", worked_example),
        (2, "ZIGP correctness", zigp_correctness),
        (3, "fitter recovery", fitter_recovery),
        (4, "Elo identities", elo_identities),
        (5, "weight checks", weight_checks),
        (6, "tournament structure", tournament_structure),
        (7, "sampler-grid agreement", sampler_grid_agreement),
        (8, "metrics oracles", metrics_oracles),
        (9, "backtest reproducibility", context_statement),
    ];
    let mut failed = 0;
    for (id, name, run) in criteria {
        match run() {
            Ok(detail) => println!("PASS {id} {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {id} {name}: {why}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} acceptance criteria failed");
        ExitCode::FAILURE
    }
}
