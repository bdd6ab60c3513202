//! Job execution and CSV output.

use std::io::Write;

use hetnet_core::coverage::{CoverageCurve, Source};
use hetnet_core::design::{
    critical_density_case1, critical_density_numerical, Crossover, CRITICAL_RANGE,
};
use hetnet_core::load::{activity_linear, mean_load};
use hetnet_core::montecarlo::{estimate_activity, estimate_coverage, CellAreaSource};
use hetnet_core::{
    avg_rate, coverage_curve, coverage_fu, coverage_mu, linear_to_db, solve_activity,
    QuadratureSpec, Scenario, SharingMode, SimulationOptions, SimulationWindow, SolverOptions,
    Tier,
};

use crate::error::CliError;
use crate::job::{Axis, Command, JobSpec, Metric};

pub const HEADER: [&str; 14] = [
    "scenario_id",
    "mode",
    "tier",
    "axis",
    "axis_value",
    "threshold_db",
    "value",
    "ci_low",
    "ci_high",
    "zeta",
    "n_bar",
    "source",
    "seed",
    "trials",
];

/// One CSV record. Analytic rows leave the CI, seed and trial fields empty.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub scenario_id: String,
    pub mode: SharingMode,
    pub tier: Tier,
    pub axis: Axis,
    pub axis_value: f64,
    pub threshold_db: Option<f64>,
    pub value: Option<f64>,
    pub ci: Option<(f64, f64)>,
    pub zeta: Option<f64>,
    pub n_bar: Option<f64>,
    pub source: Source,
    pub seed: Option<u64>,
    pub trials: Option<usize>,
}

impl Row {
    fn record(&self) -> [String; 14] {
        fn opt<T: ToString>(v: Option<T>) -> String {
            v.map(|v| v.to_string()).unwrap_or_default()
        }
        [
            self.scenario_id.clone(),
            self.mode.as_str().to_string(),
            self.tier.as_str().to_string(),
            self.axis.as_str().to_string(),
            self.axis_value.to_string(),
            opt(self.threshold_db),
            opt(self.value),
            opt(self.ci.map(|c| c.0)),
            opt(self.ci.map(|c| c.1)),
            opt(self.zeta),
            opt(self.n_bar),
            self.source.as_str().to_string(),
            opt(self.seed),
            opt(self.trials),
        ]
    }
}

/// `#`-prefixed description of the job: command, preset, notes and the full
/// resolved scenario. Independent of the thread count.
pub fn comment_block(job: &JobSpec) -> String {
    let mut out = format!("# hetnet {}\n", job.command.as_str());
    if let Some(p) = &job.preset {
        out.push_str(&format!("# preset = {p}\n"));
    }
    for note in &job.notes {
        out.push_str(&format!("# note: {note}\n"));
    }
    if let Some(z) = job.fixed_zeta {
        out.push_str(&format!("# fixed_zeta = {z}\n"));
    }
    out.push_str(&format!("# scenario_id = {}\n", job.scenario.id()));
    for (k, v) in job.scenario.to_kv() {
        out.push_str(&format!("# {k} = {v}\n"));
    }
    out
}

/// Writes the comment block, header and rows as RFC 4180 CSV.
pub fn write_csv<W: Write>(job: &JobSpec, rows: &[Row], mut out: W) -> Result<(), CliError> {
    out.write_all(comment_block(job).as_bytes())
        .map_err(|e| CliError::Csv(e.into()))?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER)?;
    for row in rows {
        w.write_record(row.record())?;
    }
    w.flush().map_err(|e| CliError::Csv(e.into()))?;
    Ok(())
}

struct Ctx<'a> {
    job: &'a JobSpec,
    quad: QuadratureSpec,
    solver: SolverOptions,
}

impl Ctx<'_> {
    /// MBS activity and MU channel demand for a mode, unless fixed by the job.
    fn activity(
        &self,
        scenario: &Scenario,
        mode: SharingMode,
    ) -> Result<(f64, Option<f64>), CliError> {
        if let Some(z) = self.job.fixed_zeta {
            return Ok((z, None));
        }
        let sol = solve_activity(mode, scenario, &self.solver, &self.quad)?.require_converged()?;
        log::debug!("{mode}: zeta = {}, n_bar = {}", sol.zeta, sol.n_bar);
        Ok((sol.zeta, Some(sol.n_bar)))
    }
}

fn tier_threshold(scenario: &Scenario, tier: Tier) -> f64 {
    match tier {
        Tier::Mu => scenario.spectrum.beta_m,
        Tier::Fu => scenario.spectrum.beta_f,
    }
}

fn curve_rows(
    curve: &CoverageCurve,
    n_bar: Option<f64>,
    seed: Option<u64>,
    trials: Option<usize>,
) -> Vec<Row> {
    curve
        .points
        .iter()
        .map(|p| Row {
            scenario_id: curve.scenario_id.clone(),
            mode: curve.mode,
            tier: curve.tier,
            axis: Axis::Beta,
            axis_value: p.threshold_db,
            threshold_db: Some(p.threshold_db),
            value: Some(p.probability),
            ci: p.ci,
            zeta: Some(curve.zeta),
            n_bar,
            source: curve.source,
            seed,
            trials,
        })
        .collect()
}

/// Runs a job and returns its rows.
pub fn run(job: &JobSpec) -> Result<Vec<Row>, CliError> {
    job.scenario.check()?;
    if job.modes.is_empty() || job.tiers.is_empty() {
        return Err(CliError::invalid(
            "at least one mode and one tier are required",
        ));
    }
    if let Some(z) = job.fixed_zeta {
        if !(0.0..=1.0).contains(&z) {
            return Err(CliError::invalid(format!(
                "fixed activity must lie in [0, 1], got {z}"
            )));
        }
    }
    let needs_trials = matches!(job.command, Command::Simulate | Command::Compare);
    if needs_trials && job.trials == 0 {
        return Err(CliError::invalid(
            "--trials must be positive for Monte Carlo commands",
        ));
    }
    let (axis, values) = job.sweep()?;
    let ctx = Ctx {
        job,
        quad: QuadratureSpec::default(),
        solver: SolverOptions::default(),
    };
    // Validate every point before spending time on any of them.
    let scenarios = values
        .iter()
        .map(|&v| {
            let s = axis.apply(&job.scenario, v)?;
            for &mode in &job.modes {
                s.with_mode(mode).check()?;
            }
            Ok(s)
        })
        .collect::<Result<Vec<_>, CliError>>()?;

    match job.command {
        Command::Analytic | Command::Simulate | Command::Compare => threshold_rows(&ctx, &values),
        Command::Sweep => sweep_rows(&ctx, axis, &values, &scenarios),
        Command::Activity => activity_rows(&ctx, axis, &values, &scenarios),
        Command::CriticalPoint => critical_rows(&ctx, axis, &values, &scenarios),
    }
}

fn threshold_rows(ctx: &Ctx<'_>, thresholds_db: &[f64]) -> Result<Vec<Row>, CliError> {
    let job = ctx.job;
    let mut rows = Vec::new();
    if thresholds_db.is_empty() {
        return Ok(rows);
    }
    let analytic = matches!(job.command, Command::Analytic | Command::Compare);
    let simulate = matches!(job.command, Command::Simulate | Command::Compare);
    for &mode in &job.modes {
        let scenario = job.scenario.with_mode(mode);
        let (zeta, n_bar) = ctx.activity(&scenario, mode)?;
        let window = SimulationWindow::for_scenario(&scenario, job.seed, job.trials);
        for &tier in &job.tiers {
            let a = if analytic {
                let curve = coverage_curve(&scenario, tier, mode, zeta, thresholds_db, &ctx.quad)?;
                curve_rows(&curve, n_bar, None, None)
            } else {
                Vec::new()
            };
            let m = if simulate {
                let curve = estimate_coverage(
                    &scenario,
                    mode,
                    tier,
                    zeta,
                    thresholds_db,
                    &window,
                    &SimulationOptions::default(),
                )?;
                curve_rows(&curve, n_bar, Some(job.seed), Some(job.trials))
            } else {
                Vec::new()
            };
            // Pair analytic and simulated rows at each threshold.
            match (a.is_empty(), m.is_empty()) {
                (false, false) => {
                    for (x, y) in a.into_iter().zip(m) {
                        rows.push(x);
                        rows.push(y);
                    }
                }
                _ => rows.extend(a.into_iter().chain(m)),
            }
        }
    }
    Ok(rows)
}

fn sweep_rows(
    ctx: &Ctx<'_>,
    axis: Axis,
    values: &[f64],
    scenarios: &[Scenario],
) -> Result<Vec<Row>, CliError> {
    let job = ctx.job;
    let mut rows = Vec::new();
    for (&v, base) in values.iter().zip(scenarios) {
        for &mode in &job.modes {
            let scenario = base.with_mode(mode);
            let (zeta, n_bar) = ctx.activity(&scenario, mode)?;
            let r_m = scenario.spectrum.r_m;
            for &tier in &job.tiers {
                let (threshold_db, value) = match job.metric {
                    Metric::Coverage => {
                        let beta = tier_threshold(&scenario, tier);
                        let p = match tier {
                            Tier::Mu => coverage_mu(&scenario, mode, r_m, beta, zeta, &ctx.quad)?,
                            Tier::Fu => coverage_fu(&scenario, mode, r_m, beta, zeta, &ctx.quad)?,
                        };
                        (Some(linear_to_db(beta)), p)
                    }
                    Metric::Rate => (None, avg_rate(tier, mode, r_m, zeta, &scenario, &ctx.quad)?),
                };
                rows.push(Row {
                    scenario_id: base.id(),
                    mode,
                    tier,
                    axis,
                    axis_value: v,
                    threshold_db: threshold_db.map(round12),
                    value: Some(value),
                    ci: None,
                    zeta: Some(zeta),
                    n_bar,
                    source: Source::Analytic,
                    seed: None,
                    trials: None,
                });
            }
        }
    }
    Ok(rows)
}

fn round12(x: f64) -> f64 {
    (x * 1e12).round() / 1e12
}

/// Per axis value and mode: the fixed-point activity (`analytic`), the
/// linear model at the same demand (`linear`) and, with `--trials > 0`, the
/// simulated cell activity (`montecarlo`).
fn activity_rows(
    ctx: &Ctx<'_>,
    axis: Axis,
    values: &[f64],
    scenarios: &[Scenario],
) -> Result<Vec<Row>, CliError> {
    let job = ctx.job;
    let mut rows = Vec::new();
    for (&v, base) in values.iter().zip(scenarios) {
        for &mode in &job.modes {
            let scenario = base.with_mode(mode);
            let sol =
                solve_activity(mode, &scenario, &ctx.solver, &ctx.quad)?.require_converged()?;
            let row = |value: f64, ci, source, seed, trials| Row {
                scenario_id: base.id(),
                mode,
                tier: Tier::Mu,
                axis,
                axis_value: v,
                threshold_db: None,
                value: Some(value),
                ci,
                zeta: Some(sol.zeta),
                n_bar: Some(sol.n_bar),
                source,
                seed,
                trials,
            };
            rows.push(row(sol.zeta, None, Source::Analytic, None, None));
            let linear = activity_linear(mean_load(mode, &scenario, sol.n_bar)?);
            rows.push(row(linear, None, Source::Linear, None, None));
            if job.trials > 0 && sol.n_bar > 0.0 {
                let est = estimate_activity(
                    &scenario,
                    mode,
                    sol.n_bar,
                    job.trials,
                    job.seed,
                    CellAreaSource::Gamma,
                )?;
                rows.push(row(
                    est.zeta,
                    Some(est.ci),
                    Source::MonteCarlo,
                    Some(job.seed),
                    Some(job.trials),
                ));
            }
        }
    }
    Ok(rows)
}

/// Per axis value: the closed-form critical density (`linear`, valid under
/// its stated assumptions) and the numerical co-channel/orthogonal MU
/// crossover (`analytic`). A search without a crossover leaves `value` empty.
fn critical_rows(
    ctx: &Ctx<'_>,
    axis: Axis,
    values: &[f64],
    scenarios: &[Scenario],
) -> Result<Vec<Row>, CliError> {
    let mut rows = Vec::new();
    for (&v, scenario) in values.iter().zip(scenarios) {
        let row = |value: Option<f64>, source| Row {
            scenario_id: scenario.id(),
            mode: SharingMode::CoChannel,
            tier: Tier::Mu,
            axis,
            axis_value: v,
            threshold_db: Some(round12(linear_to_db(scenario.spectrum.beta_m))),
            value,
            ci: None,
            zeta: None,
            n_bar: None,
            source,
            seed: None,
            trials: None,
        };
        let closed = critical_density_case1(scenario, &ctx.quad)?;
        if !closed.valid {
            log::warn!("closed-form critical density outside its validity range at {axis} = {v}");
        }
        rows.push(row(Some(closed.lambda_f_c), Source::Linear));
        let value =
            match critical_density_numerical(scenario, CRITICAL_RANGE, &ctx.solver, &ctx.quad)? {
                Crossover::Found(r) => Some(r.lambda_f_c),
                Crossover::NoCrossover { dominant, .. } => {
                    log::warn!("no crossover at {axis} = {v}; {dominant} dominates");
                    None
                }
            };
        rows.push(row(value, Source::Analytic));
    }
    Ok(rows)
}
