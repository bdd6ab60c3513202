//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! `ACCEPTANCE_ONLY=3,7` restricts the run to the listed criteria.

use std::process::Command;
use std::time::Instant;

use hetnet_core::coverage::{mu_cochannel, mu_cochannel_integral, mu_orthogonal};
use hetnet_core::load::mean_load;
use hetnet_core::montecarlo::{estimate_activity, estimate_coverage, CellAreaSource};
use hetnet_core::special::{h1, h1_quadrature, h2, h2_quadrature};
use hetnet_core::{
    activity_linear, coverage_fu, coverage_mu, critical_density_case1, critical_density_numerical,
    db_to_linear, default_threshold_grid_db, effective_cluster_mean, solve_activity, ActivityModel,
    Crossover, McsTable, QuadratureSpec, Scenario, SharingMode, SimulationOptions,
    SimulationWindow, SolverOptions, Tier, CRITICAL_RANGE,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn quad() -> QuadratureSpec {
    QuadratureSpec::default()
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn criterion_1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let tight = QuadratureSpec::new(1e-13, 1e-300, 4000).map_err(|e| e.to_string())?;
    let mut worst_h1: f64 = 0.0;
    let mut worst_h2: f64 = 0.0;
    for _ in 0..100 {
        let w = 10f64.powf(rng.random_range(-2.0..6.0));
        let r = rng.random_range(1.0..200.0);
        let a = h1(w, r, 0.5, &quad()).map_err(|e| e.to_string())?;
        let b = h1_quadrature(w, r, 0.5, &tight).map_err(|e| e.to_string())?;
        worst_h1 = worst_h1.max(rel(b, a));
        let v = 10f64.powf(rng.random_range(-4.0..4.0));
        let a = h2(v, 0.5, &quad()).map_err(|e| e.to_string())?;
        let b = h2_quadrature(v, 0.5, &tight).map_err(|e| e.to_string())?;
        worst_h2 = worst_h2.max(rel(b, a));
    }
    let s = Scenario::default();
    let mut worst_mu: f64 = 0.0;
    for i in 0..10 {
        let beta = db_to_linear(-10.0 + 3.5 * i as f64);
        let closed = mu_cochannel(&s, 0.0, beta, 0.7, s.traffic.n_channels, &quad())
            .map_err(|e| e.to_string())?;
        let integral = mu_cochannel_integral(&s, 0.0, beta, 0.7, s.traffic.n_channels, &quad())
            .map_err(|e| e.to_string())?;
        worst_mu = worst_mu.max(rel(integral, closed));
    }
    check(
        worst_h1 <= 1e-10 && worst_h2 <= 1e-10 && worst_mu <= 1e-6,
        format!("max rel err h1 {worst_h1:.1e}, h2 {worst_h2:.1e} (tol 1e-10); MU integral vs closed form {worst_mu:.1e} (tol 1e-6)"),
    )
}

fn criterion_2() -> Outcome {
    let s = Scenario::default().with_mode(SharingMode::Orthogonal);
    let analytic = mu_orthogonal(1.0, 1.0, 0.5, &quad()).map_err(|e| e.to_string())?;
    let window = SimulationWindow::for_scenario(&s, 2, 100_000);
    let curve = estimate_coverage(
        &s,
        SharingMode::Orthogonal,
        Tier::Mu,
        1.0,
        &[0.0],
        &window,
        &SimulationOptions::default(),
    )
    .map_err(|e| e.to_string())?;
    let mc = curve.points[0].probability;
    let target = 1.0 / (1.0 + std::f64::consts::PI / 4.0);
    check(
        (analytic - target).abs() < 1e-12 && (mc - analytic).abs() <= 0.01,
        format!("analytic {analytic:.5} (1/(1+pi/4) = {target:.5}), MC {mc:.5} at 1e5 trials, gap {:.4} (tol 0.01)", (mc - analytic).abs()),
    )
}

fn criterion_3() -> Outcome {
    let thresholds = [-5.0, 0.0, 5.0, 10.0, 15.0];
    let trials = 20_000;
    let mut worst = [0.0f64; 2];
    let mut jensen_ok = true;
    let mut lines = Vec::new();
    for r_m in [0.0, 60.0] {
        for zeta in [0.5, 1.0] {
            let mut s = Scenario::default();
            s.network.lambda_f = 1e-4;
            s.spectrum.r_m = r_m;
            let window = SimulationWindow::for_scenario(&s, 3, trials);
            for (k, tier) in [Tier::Mu, Tier::Fu].into_iter().enumerate() {
                let mc = estimate_coverage(
                    &s,
                    SharingMode::CoChannel,
                    tier,
                    zeta,
                    &thresholds,
                    &window,
                    &SimulationOptions::default(),
                )
                .map_err(|e| e.to_string())?;
                for p in &mc.points {
                    let beta = db_to_linear(p.threshold_db);
                    let a = match tier {
                        Tier::Mu => {
                            coverage_mu(&s, SharingMode::CoChannel, r_m, beta, zeta, &quad())
                        }
                        Tier::Fu => {
                            coverage_fu(&s, SharingMode::CoChannel, r_m, beta, zeta, &quad())
                        }
                    }
                    .map_err(|e| e.to_string())?;
                    let gap = (a - p.probability).abs();
                    worst[k] = worst[k].max(gap);
                    let sigma = p.std_error.unwrap_or(0.0);
                    if tier == Tier::Fu && a < p.probability - 3.0 * sigma {
                        jensen_ok = false;
                        lines.push(format!(
                            "FU below MC-3sigma at r_m={r_m}, zeta={zeta}, beta={} dB: {a:.4} vs {:.4}",
                            p.threshold_db, p.probability
                        ));
                    }
                }
            }
        }
    }
    let detail = format!(
        "max |analytic - MC| MU {:.4} (tol 0.03), FU {:.4} (tol 0.05); FU analytic >= MC - 3 sigma: {jensen_ok}; {} trials per point{}",
        worst[0],
        worst[1],
        trials,
        if lines.is_empty() { String::new() } else { format!("; {}", lines.join("; ")) }
    );
    check(worst[0] <= 0.03 && worst[1] <= 0.05 && jensen_ok, detail)
}

fn activity_scenario(lambda_f: f64, lambda_m: f64) -> Scenario {
    let mut s = Scenario::default();
    s.network.lambda_f = lambda_f;
    s.traffic.lambda_m_arrivals = lambda_m;
    s
}

fn criterion_4() -> Outcome {
    let sweep = [0.0, 4e-4, 8e-4, 1.2e-3, 1.6e-3, 2e-3];
    let opts = SolverOptions::default();
    let mut worst: f64 = 0.0;
    let mut monotone = true;
    let mut curves = Vec::new();
    for lambda_f in [0.0, 1e-4] {
        let mut prev = -1.0;
        let mut curve = Vec::new();
        for &lm in &sweep {
            let s = activity_scenario(lambda_f, lm);
            let sol = solve_activity(SharingMode::CoChannel, &s, &opts, &quad())
                .map_err(|e| e.to_string())?;
            let est = estimate_activity(
                &s,
                SharingMode::CoChannel,
                sol.n_bar,
                4_000,
                4,
                CellAreaSource::Voronoi,
            )
            .map_err(|e| e.to_string())?;
            worst = worst.max((sol.zeta - est.zeta).abs());
            monotone &= sol.zeta >= prev - 1e-9;
            prev = sol.zeta;
            curve.push(format!("{:.3}", sol.zeta));
        }
        curves.push(format!("lambda_F={lambda_f}: [{}]", curve.join(", ")));
    }
    let low = solve_activity(
        SharingMode::CoChannel,
        &activity_scenario(1e-4, 1e-7),
        &opts,
        &quad(),
    )
    .map_err(|e| e.to_string())?
    .zeta;
    let high = solve_activity(
        SharingMode::CoChannel,
        &activity_scenario(1e-4, 5e-2),
        &opts,
        &quad(),
    )
    .map_err(|e| e.to_string())?
    .zeta;
    check(
        worst <= 0.05 && monotone && low < 1e-3 && high > 0.95,
        format!(
            "max |fixed point - simulated| {worst:.4} (tol 0.05); nondecreasing: {monotone}; zeta(1e-7) = {low:.2e}, zeta(5e-2) = {high:.4}; {}",
            curves.join("; ")
        ),
    )
}

fn criterion_5() -> Outcome {
    let opts = SolverOptions::default();
    let mut worst_low: f64 = 0.0;
    let mut beyond = Vec::new();
    for i in 0..=20 {
        let lm = 2e-4 * i as f64;
        let s = activity_scenario(1e-4, lm);
        let sol = solve_activity(SharingMode::CoChannel, &s, &opts, &quad())
            .map_err(|e| e.to_string())?;
        let load = mean_load(SharingMode::CoChannel, &s, sol.n_bar).map_err(|e| e.to_string())?;
        let gap = (activity_linear(load) - sol.zeta).abs();
        if sol.zeta <= 0.6 {
            worst_low = worst_low.max(gap);
        }
        if sol.zeta > 0.8 {
            beyond.push(gap);
        }
    }
    let max_beyond = beyond.iter().cloned().fold(0.0, f64::max);
    check(
        worst_low <= 0.05 && !beyond.is_empty() && max_beyond > 0.05,
        format!(
            "max |linear - fixed point| where zeta <= 0.6: {worst_low:.4} (tol 0.05); max gap where zeta > 0.8: {max_beyond:.4} over {} points (must exceed 0.05)",
            beyond.len()
        ),
    )
}

fn ln_choose(n: u32, k: u32) -> f64 {
    (1..=k).map(|i| ((n - k + i) as f64 / i as f64).ln()).sum()
}

/// `c E[1/(K+1)]` with `K ~ Binomial(N - 1, p)`, summed term by term.
fn cluster_mean_by_sum(p: f64, n: u32, c: f64) -> f64 {
    (0..n)
        .map(|k| {
            let lp = ln_choose(n - 1, k) + k as f64 * p.ln() + (n - 1 - k) as f64 * (1.0 - p).ln();
            lp.exp() / (k + 1) as f64
        })
        .sum::<f64>()
        * c
}

fn criterion_6() -> Outcome {
    let c = 7.85;
    let mut worst_high: f64 = 0.0;
    for i in 0..=50 {
        let p = 0.5 + 0.01 * i as f64;
        let m = effective_cluster_mean(p, 20, c).map_err(|e| e.to_string())?;
        worst_high = worst_high.max(m.relative_gap.abs());
    }
    let mut never_exceeds = true;
    let mut worst_sum: f64 = 0.0;
    for n in 1..=40 {
        for i in 1..100 {
            let p = i as f64 / 100.0;
            let m = effective_cluster_mean(p, n, c).map_err(|e| e.to_string())?;
            never_exceeds &= m.exact <= m.approx * (1.0 + 1e-15);
            if p < 1.0 {
                worst_sum = worst_sum.max(rel(cluster_mean_by_sum(p, n, c), m.exact));
            }
        }
    }
    check(
        worst_high <= 1e-3 && never_exceeds && worst_sum < 1e-10,
        format!(
            "max rel gap at N=20, p>=0.5: {worst_high:.2e} (tol 1e-3); exact <= approx on p in (0,1), N in 1..=40: {never_exceeds}; exact vs binomial sum {worst_sum:.1e}"
        ),
    )
}

/// Inputs under which the closed-form critical density is exact: no
/// cognition, one MCS level at the target so `N̄ = 1`, linear activity.
fn case1_scenario() -> Scenario {
    let mut s = Scenario::default();
    s.spectrum.r_m = 0.0;
    s.traffic.mcs = McsTable::from_db(&[0.0]).expect("valid table");
    s.traffic.rth_over_b = 1.0;
    s.spectrum.beta_m = 1.0;
    s
}

fn criterion_7() -> Outcome {
    let opts = SolverOptions {
        model: ActivityModel::Linear,
        ..SolverOptions::default()
    };
    let s = case1_scenario();
    let closed = critical_density_case1(&s, &quad()).map_err(|e| e.to_string())?;
    let found = |s: &Scenario, range: (f64, f64)| -> Result<f64, String> {
        match critical_density_numerical(s, range, &opts, &quad()).map_err(|e| e.to_string())? {
            Crossover::Found(r) => Ok(r.lambda_f_c),
            Crossover::NoCrossover { dominant, .. } => {
                Err(format!("no crossover; {dominant} dominates"))
            }
        }
    };
    let numerical = found(&s, CRITICAL_RANGE)?;
    let err = rel(numerical, closed.lambda_f_c);

    let mut roots = Vec::new();
    // Sensing pushes the root up quickly, so search a wider range here.
    for r_m in [0.0, 20.0, 40.0, 60.0] {
        let mut t = s.clone();
        t.spectrum.r_m = r_m;
        roots.push(found(&t, (1e-6, 10.0))?);
    }
    let nondecreasing = roots.windows(2).all(|w| w[1] >= w[0] * (1.0 - 2e-3));

    // Coverage ordering on either side of the root.
    let cov = |lambda_fc: f64, mode: SharingMode| -> Result<f64, String> {
        let mut t = s.with_mode(mode);
        t.network.lambda_f = lambda_fc / t.network.cluster_size;
        let z = solve_activity(mode, &t, &opts, &quad())
            .map_err(|e| e.to_string())?
            .zeta;
        coverage_mu(&t, mode, 0.0, t.spectrum.beta_m, z, &quad()).map_err(|e| e.to_string())
    };
    let below = cov(0.5 * numerical, SharingMode::CoChannel)?
        - cov(0.5 * numerical, SharingMode::Orthogonal)?;
    let above = cov(2.0 * numerical, SharingMode::CoChannel)?
        - cov(2.0 * numerical, SharingMode::Orthogonal)?;
    let flips = below > 0.0 && above < 0.0;
    check(
        err <= 0.05 && closed.valid && nondecreasing && flips,
        format!(
            "closed form {:.4e}, numerical {numerical:.4e}, rel err {err:.2e} (tol 5%); roots over r_m 0/20/40/60: [{}] nondecreasing: {nondecreasing}; M_C - M_O at 0.5x root {below:+.4}, at 2x root {above:+.4}",
            closed.lambda_f_c,
            roots.iter().map(|r| format!("{r:.4e}")).collect::<Vec<_>>().join(", ")
        ),
    )
}

fn criterion_8() -> Outcome {
    let zeta = 0.5;
    let grid = default_threshold_grid_db();
    let mut mu_ok = true;
    let mut fu_ok = true;
    let mut min_mu_gap = f64::INFINITY;
    let mut min_fu_gap = f64::INFINITY;
    for n_f in [5, 10, 15] {
        let mut s = Scenario::default();
        s.spectrum.n_f = n_f;
        for &db in &grid {
            let beta = db_to_linear(db);
            let r_m = s.spectrum.r_m;
            let part = coverage_mu(&s, SharingMode::Partial, r_m, beta, zeta, &quad())
                .map_err(|e| e.to_string())?;
            let co = coverage_mu(&s, SharingMode::CoChannel, r_m, beta, zeta, &quad())
                .map_err(|e| e.to_string())?;
            min_mu_gap = min_mu_gap.min(part - co);
            mu_ok &= part >= co - 1e-12;
            let co_f = coverage_fu(&s, SharingMode::CoChannel, r_m, beta, zeta, &quad())
                .map_err(|e| e.to_string())?;
            let part_f = coverage_fu(&s, SharingMode::Partial, r_m, beta, zeta, &quad())
                .map_err(|e| e.to_string())?;
            min_fu_gap = min_fu_gap.min(co_f - part_f);
            fu_ok &= co_f >= part_f - 1e-12;
        }
    }
    check(
        mu_ok && fu_ok,
        format!(
            "N_F in {{5,10,15}}, {} thresholds, zeta = {zeta}: min(MU partial - co-channel) {min_mu_gap:+.2e}, min(FU co-channel - partial) {min_fu_gap:+.2e}",
            grid.len()
        ),
    )
}

fn nonincreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] <= w[0] + 1e-9)
}

fn criterion_9() -> Outcome {
    let zeta = 0.5;
    let s = Scenario::default();
    let beta = 1.0;
    let mut failures = Vec::new();
    let r_grid: Vec<f64> = (0..=15).map(|i| 10.0 * i as f64).collect();
    for mode in SharingMode::ALL {
        let sm = s.with_mode(mode);
        let mu = r_grid
            .iter()
            .map(|&r| coverage_mu(&sm, mode, r, beta, zeta, &quad()))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| e.to_string())?;
        let fu = r_grid
            .iter()
            .map(|&r| coverage_fu(&sm, mode, r, beta, zeta, &quad()))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| e.to_string())?;
        let mu_rev: Vec<f64> = mu.iter().rev().cloned().collect();
        if !nonincreasing(&mu_rev) {
            failures.push(format!("MU vs r_m ({mode})"));
        }
        if !nonincreasing(&fu) {
            failures.push(format!("FU vs r_m ({mode})"));
        }
        let lf = (1..=20)
            .map(|i| {
                let mut t = sm.clone();
                t.network.lambda_f = 5e-5 * i as f64;
                coverage_mu(&t, mode, t.spectrum.r_m, beta, zeta, &quad())
            })
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| e.to_string())?;
        if !nonincreasing(&lf) {
            failures.push(format!("MU vs lambda_F ({mode})"));
        }
        for tier in [Tier::Mu, Tier::Fu] {
            let curve = default_threshold_grid_db()
                .iter()
                .map(|&db| match tier {
                    Tier::Mu => {
                        coverage_mu(&sm, mode, sm.spectrum.r_m, db_to_linear(db), zeta, &quad())
                    }
                    Tier::Fu => {
                        coverage_fu(&sm, mode, sm.spectrum.r_m, db_to_linear(db), zeta, &quad())
                    }
                })
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| e.to_string())?;
            if !nonincreasing(&curve) {
                failures.push(format!("{tier} vs threshold ({mode})"));
            }
        }
    }
    check(
        failures.is_empty(),
        if failures.is_empty() {
            "MU up / FU down in r_m (0..150), MU down in lambda_F (5e-5..1e-3), all tiers and modes down in threshold".into()
        } else {
            format!("violations: {}", failures.join(", "))
        },
    )
}

fn run_cli(args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_hetnet"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!(
            "exit {:?}: {}",
            out.status.code(),
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    Ok(out.stdout)
}

fn strip_comments(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes)
        .lines()
        .filter(|l| !l.starts_with('#'))
        .collect::<Vec<_>>()
        .join("\n")
}

fn criterion_10() -> Outcome {
    let base = [
        "compare", "--seed", "7", "--trials", "3000", "--range", "-5:15:5",
    ];
    let a = run_cli(&base)?;
    let b = run_cli(&base)?;
    let one = run_cli(&[&base[..], &["--threads", "1"]].concat())?;
    let eight = run_cli(&[&base[..], &["--threads", "8"]].concat())?;
    let rows = strip_comments(&a).lines().count().saturating_sub(1);
    let same_runs = a == b;
    let same_threads = strip_comments(&one) == strip_comments(&eight);
    check(
        same_runs && same_threads && rows > 0,
        format!("{rows} rows; repeat run byte-identical: {same_runs}; --threads 1 vs 8 identical: {same_threads}"),
    )
}

type Criterion = (u32, &'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        (1, "closed-form specializations", criterion_1),
        (2, "orthogonal MU anchor", criterion_2),
        (3, "coverage vs exact-rule simulation", criterion_3),
        (4, "activity fixed point vs simulation", criterion_4),
        (5, "linear activity regime", criterion_5),
        (6, "effective cluster mean", criterion_6),
        (7, "critical density", criterion_7),
        (8, "mode ordering", criterion_8),
        (9, "monotonicity", criterion_9),
        (10, "determinism", criterion_10),
    ];
    let only: Option<Vec<u32>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|v| v.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let mut failed = 0;
    for (id, name, f) in criteria {
        if only.as_ref().is_some_and(|o| !o.contains(&id)) {
            continue;
        }
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {id:>2} PASS [{name}] {detail} ({secs:.1}s)"),
            Err(detail) => {
                failed += 1;
                println!("criterion {id:>2} FAIL [{name}] {detail} ({secs:.1}s)");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
