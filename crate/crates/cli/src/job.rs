//! Job descriptions, sweep axes and figure presets.

use std::fmt;
use std::str::FromStr;

use hetnet_core::scenario::db_to_linear;
use hetnet_core::{Scenario, SharingMode, Tier};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Analytic,
    Simulate,
    Compare,
    Sweep,
    Activity,
    CriticalPoint,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Analytic => "analytic",
            Command::Simulate => "simulate",
            Command::Compare => "compare",
            Command::Sweep => "sweep",
            Command::Activity => "activity",
            Command::CriticalPoint => "critical-point",
        }
    }
}

impl FromStr for Command {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "analytic" => Command::Analytic,
            "simulate" => Command::Simulate,
            "compare" => Command::Compare,
            "sweep" => Command::Sweep,
            "activity" => Command::Activity,
            "critical-point" => Command::CriticalPoint,
            other => return Err(CliError::invalid(format!("unknown command '{other}'"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    /// SIR threshold in dB.
    Beta,
    RM,
    LambdaM,
    LambdaF,
    NF,
}

impl Axis {
    pub fn as_str(self) -> &'static str {
        match self {
            Axis::Beta => "beta",
            Axis::RM => "r_m",
            Axis::LambdaM => "lambda_M",
            Axis::LambdaF => "lambda_F",
            Axis::NF => "N_F",
        }
    }

    /// Copy of `scenario` with the axis set to `value`. A `beta` value (dB)
    /// sets both tiers' targets.
    pub fn apply(self, scenario: &Scenario, value: f64) -> Result<Scenario, CliError> {
        let mut s = scenario.clone();
        match self {
            Axis::Beta => {
                s.spectrum.beta_m = db_to_linear(value);
                s.spectrum.beta_f = db_to_linear(value);
            }
            Axis::RM => s.spectrum.r_m = value,
            Axis::LambdaM => s.traffic.lambda_m_arrivals = value,
            Axis::LambdaF => s.network.lambda_f = value,
            Axis::NF => {
                if value < 0.0 || value.fract() != 0.0 {
                    return Err(CliError::invalid(format!(
                        "N_F must be a whole number, got {value}"
                    )));
                }
                s.spectrum.n_f = value as u32;
            }
        }
        Ok(s)
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Axis {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "beta" => Axis::Beta,
            "r_m" | "rm" => Axis::RM,
            "lambda_m" => Axis::LambdaM,
            "lambda_f" => Axis::LambdaF,
            "n_f" | "nf" => Axis::NF,
            other => {
                return Err(CliError::invalid(format!(
                    "unknown axis '{other}' (expected r_m, lambda_M, lambda_F, N_F or beta)"
                )))
            }
        })
    }
}

/// Inclusive `LO:HI:STEP` range. `LO > HI` is a valid, empty range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl Range {
    pub fn new(lo: f64, hi: f64, step: f64) -> Result<Self, CliError> {
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(CliError::invalid("range bounds must be finite"));
        }
        if !(step > 0.0 && step.is_finite()) {
            return Err(CliError::invalid(format!(
                "range step must be positive, got {step}"
            )));
        }
        Ok(Self { lo, hi, step })
    }

    pub fn values(&self) -> Vec<f64> {
        if self.lo > self.hi {
            return Vec::new();
        }
        let count = ((self.hi - self.lo) / self.step + 1e-9).floor() as usize + 1;
        (0..count)
            .map(|i| {
                let v = self.lo + i as f64 * self.step;
                // Snap accumulated rounding so 0.1-style steps print cleanly.
                let snapped = (v / self.step).round() * self.step;
                if (snapped - v).abs() <= 1e-9 * self.step.max(v.abs()) {
                    clean(snapped)
                } else {
                    v
                }
            })
            .collect()
    }
}

fn clean(v: f64) -> f64 {
    let s = format!("{v:.12e}");
    s.parse().unwrap_or(v)
}

impl FromStr for Range {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(CliError::invalid(format!("range '{s}' is not LO:HI:STEP")));
        }
        let num = |p: &str| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| CliError::invalid(format!("range '{s}': '{p}' is not a number")))
        };
        Range::new(num(parts[0])?, num(parts[1])?, num(parts[2])?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Coverage,
    /// Average spectral efficiency, bit/s/Hz.
    Rate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JobSpec {
    pub command: Command,
    pub scenario: Scenario,
    pub modes: Vec<SharingMode>,
    pub tiers: Vec<Tier>,
    pub axis: Option<Axis>,
    pub range: Option<Range>,
    pub seed: u64,
    pub trials: usize,
    pub threads: Option<usize>,
    pub metric: Metric,
    /// Use this MBS activity instead of solving for it.
    pub fixed_zeta: Option<f64>,
    pub preset: Option<String>,
    /// Free-text caveats written into the CSV comment block.
    pub notes: Vec<String>,
}

pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_TRIALS: usize = 10_000;

impl JobSpec {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            scenario: Scenario::default(),
            modes: vec![SharingMode::CoChannel],
            tiers: vec![Tier::Mu, Tier::Fu],
            axis: None,
            range: None,
            seed: DEFAULT_SEED,
            trials: DEFAULT_TRIALS,
            threads: None,
            metric: Metric::Coverage,
            fixed_zeta: None,
            preset: None,
            notes: Vec::new(),
        }
    }

    /// Axis and values to iterate. Threshold commands default to a 1 dB grid;
    /// `critical-point` without an axis runs once at the scenario's `r_m`.
    pub fn sweep(&self) -> Result<(Axis, Vec<f64>), CliError> {
        let threshold_command = matches!(
            self.command,
            Command::Analytic | Command::Simulate | Command::Compare
        );
        let axis = match (self.axis, self.command) {
            (Some(a), _) => a,
            (None, Command::Activity) => Axis::LambdaM,
            (None, Command::Sweep) => Axis::RM,
            (None, Command::CriticalPoint) => Axis::RM,
            (None, _) => Axis::Beta,
        };
        if threshold_command && axis != Axis::Beta {
            return Err(CliError::invalid(format!(
                "{} sweeps the threshold; use the sweep command for axis {axis}",
                self.command.as_str()
            )));
        }
        if let Some(r) = self.range {
            return Ok((axis, r.values()));
        }
        let values = match (axis, self.command) {
            (Axis::Beta, _) => Range::new(-10.0, 25.0, 1.0)?.values(),
            (Axis::RM, Command::CriticalPoint) => vec![self.scenario.spectrum.r_m],
            (Axis::RM, _) => Range::new(0.0, 120.0, 10.0)?.values(),
            (Axis::LambdaM, _) => Range::new(0.0, 2e-3, 2e-4)?.values(),
            (a, _) => {
                return Err(CliError::invalid(format!(
                    "--axis {a} needs --range LO:HI:STEP"
                )))
            }
        };
        Ok((axis, values))
    }
}

/// Parses `--mode`: one mode or `all`.
pub fn parse_modes(s: &str) -> Result<Vec<SharingMode>, CliError> {
    if s.eq_ignore_ascii_case("all") {
        return Ok(SharingMode::ALL.to_vec());
    }
    s.split(',')
        .map(|m| m.parse::<SharingMode>().map_err(CliError::invalid))
        .collect()
}

const POWER_NOTE: &str =
    "transmit powers and wall loss are not fixed by the source figures; defaults P_B = 46 dBm, P_F = 20 dBm, chi = 10 dB are used";

/// Job reproducing one of the evaluation figures.
pub fn preset(name: &str) -> Result<JobSpec, CliError> {
    let range = |lo, hi, step| Range::new(lo, hi, step).expect("preset ranges are valid");
    let mut job = match name {
        "fig3" => {
            let mut j = JobSpec::new(Command::Activity);
            j.axis = Some(Axis::LambdaM);
            j.range = Some(range(0.0, 4e-3, 2e-4));
            j.trials = 0;
            j
        }
        "fig4" => {
            let mut j = JobSpec::new(Command::Compare);
            j.axis = Some(Axis::Beta);
            j.range = Some(range(-10.0, 20.0, 1.0));
            j.trials = 20_000;
            j
        }
        "fig5" => {
            let mut j = JobSpec::new(Command::Activity);
            j.axis = Some(Axis::LambdaM);
            j.range = Some(range(0.0, 2e-3, 2e-4));
            j
        }
        "fig6a" | "fig6b" => {
            let mut j = JobSpec::new(Command::Sweep);
            j.axis = Some(Axis::RM);
            j.range = Some(range(0.0, 120.0, 10.0));
            j
        }
        "fig6c" => {
            let mut j = JobSpec::new(Command::Sweep);
            j.axis = Some(Axis::LambdaM);
            j.range = Some(range(2e-5, 1e-3, 2e-5));
            j
        }
        "fig7" => {
            let mut j = JobSpec::new(Command::Sweep);
            j.axis = Some(Axis::RM);
            j.range = Some(range(0.0, 120.0, 10.0));
            j.metric = Metric::Rate;
            j.fixed_zeta = Some(1.0);
            j.scenario.network.lambda_b = 1e-5;
            j.notes.push("best-effort rate with MBS activity fixed at one".into());
            j
        }
        "fig8" => {
            let mut j = JobSpec::new(Command::Sweep);
            j.axis = Some(Axis::NF);
            j.range = Some(range(1.0, 19.0, 1.0));
            j.modes = SharingMode::ALL.to_vec();
            j.scenario.spectrum.r_m = 70.0;
            j
        }
        "fig9" => {
            let mut j = JobSpec::new(Command::Sweep);
            j.axis = Some(Axis::RM);
            j.range = Some(range(0.0, 150.0, 10.0));
            j.modes = SharingMode::ALL.to_vec();
            j
        }
        "fig10" => {
            let mut j = JobSpec::new(Command::Sweep);
            j.axis = Some(Axis::LambdaF);
            j.range = Some(range(1e-5, 1e-3, 1e-5));
            j.modes = SharingMode::ALL.to_vec();
            j.tiers = vec![Tier::Mu];
            j
        }
        other => {
            return Err(CliError::invalid(format!(
                "unknown preset '{other}' (expected fig3, fig4, fig5, fig6a, fig6b, fig6c, fig7, fig8, fig9 or fig10)"
            )))
        }
    };
    job.scenario.network.lambda_f = 1e-4;
    job.preset = Some(name.to_string());
    job.notes.push(POWER_NOTE.into());
    Ok(job)
}
