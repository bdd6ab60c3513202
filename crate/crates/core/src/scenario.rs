//! Network, traffic and spectrum parameters, validation, and the plain-text
//! scenario format.
//!
//! Everything inside the crate is in linear units (W, ratios, metres,
//! events per second per m²). Decibel values are converted only in
//! [`Scenario::parse`] and in the `*_db` helpers.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::error::{Error, Result};

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    db_to_linear(dbm - 30.0)
}

pub fn watts_to_dbm(w: f64) -> f64 {
    linear_to_db(w) + 30.0
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkParams {
    /// MBS density λ_B (m⁻²).
    pub lambda_b: f64,
    /// Cluster-parent density λ_F (m⁻²).
    pub lambda_f: f64,
    /// Mean FAPs per cluster c.
    pub cluster_size: f64,
    /// Cluster radius R (m).
    pub cluster_radius: f64,
    /// FU to serving-FAP distance r0 (m).
    pub link_distance: f64,
    /// MBS transmit power P_B (W).
    pub p_b: f64,
    /// FAP transmit power P_F (W).
    pub p_f: f64,
    /// Wall penetration loss χ, linear in (0, 1].
    pub wall_loss: f64,
    /// Path-loss exponent α > 2.
    pub alpha: f64,
}

impl Default for NetworkParams {
    fn default() -> Self {
        Self {
            lambda_b: 2e-5,
            lambda_f: 1e-4,
            cluster_size: 7.85,
            cluster_radius: 50.0,
            link_distance: 15.0,
            p_b: dbm_to_watts(46.0),
            p_f: dbm_to_watts(20.0),
            wall_loss: db_to_linear(-10.0),
            alpha: 4.0,
        }
    }
}

impl NetworkParams {
    /// δ = 2/α.
    pub fn delta(&self) -> f64 {
        2.0 / self.alpha
    }
}

/// Strictly increasing SIR thresholds Γ₁ < … < Γ_T (linear).
#[derive(Debug, Clone, PartialEq)]
pub struct McsTable {
    thresholds: Vec<f64>,
}

impl McsTable {
    pub fn new(thresholds: Vec<f64>) -> Result<Self, ValidationErrors> {
        let mut errs = ValidationErrors::default();
        check_mcs(&thresholds, &mut errs);
        errs.into_result(Self { thresholds })
    }

    pub fn from_db(thresholds_db: &[f64]) -> Result<Self, ValidationErrors> {
        Self::new(thresholds_db.iter().map(|&d| db_to_linear(d)).collect())
    }

    /// Levels `0, 3, …, 21` dB.
    pub fn standard() -> Self {
        let db: Vec<f64> = (0..8).map(|i| 3.0 * i as f64).collect();
        Self::from_db(&db).expect("standard table is valid")
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    pub fn thresholds_db(&self) -> Vec<f64> {
        self.thresholds.iter().map(|&x| linear_to_db(x)).collect()
    }

    pub fn len(&self) -> usize {
        self.thresholds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.thresholds.is_empty()
    }
}

impl Default for McsTable {
    fn default() -> Self {
        Self::standard()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrafficParams {
    /// Aggregate MU arrival density λ_M (arrivals s⁻¹ m⁻²).
    pub lambda_m_arrivals: f64,
    /// Service rate μ (s⁻¹).
    pub mu: f64,
    /// Total channels N.
    pub n_channels: u32,
    /// Rate requirement over channel bandwidth R_th/B (bit/s/Hz).
    pub rth_over_b: f64,
    pub mcs: McsTable,
}

impl Default for TrafficParams {
    fn default() -> Self {
        Self {
            lambda_m_arrivals: 2e-4,
            mu: 1.0,
            n_channels: 20,
            rth_over_b: 0.5,
            mcs: McsTable::standard(),
        }
    }
}

impl TrafficParams {
    /// Per-channel arrival density λ_m = λ_M / N.
    pub fn lambda_m(&self) -> f64 {
        self.lambda_m_arrivals / self.n_channels as f64
    }
}

/// Per-channel density of active MUs, `λ_m / μ = λ_M / (N μ)`.
pub fn per_channel_mu_density(traffic: &TrafficParams) -> f64 {
    traffic.lambda_m() / traffic.mu
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SharingMode {
    CoChannel,
    Orthogonal,
    Partial,
}

impl SharingMode {
    pub const ALL: [SharingMode; 3] = [
        SharingMode::CoChannel,
        SharingMode::Orthogonal,
        SharingMode::Partial,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SharingMode::CoChannel => "co-channel",
            SharingMode::Orthogonal => "orthogonal",
            SharingMode::Partial => "partial",
        }
    }
}

impl fmt::Display for SharingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SharingMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "co-channel" | "cochannel" | "co_channel" => Ok(SharingMode::CoChannel),
            "orthogonal" => Ok(SharingMode::Orthogonal),
            "partial" => Ok(SharingMode::Partial),
            other => Err(format!(
                "unknown sharing mode '{other}' (expected co-channel, orthogonal or partial)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumConfig {
    pub mode: SharingMode,
    /// Femto-tier channels N_F (orthogonal and partial modes).
    pub n_f: u32,
    /// Cognitive sensing radius r_m (m).
    pub r_m: f64,
    /// MU SIR target β_M (linear).
    pub beta_m: f64,
    /// FU SIR target β_F (linear).
    pub beta_f: f64,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        Self {
            mode: SharingMode::CoChannel,
            n_f: 10,
            r_m: 60.0,
            beta_m: 1.0,
            beta_f: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub field: &'static str,
    pub value: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}: {}", self.field, self.value, self.message)
    }
}

/// Every violated constraint of a scenario, not just the first.
#[derive(Debug, Clone, Default, PartialEq, Error)]
pub struct ValidationErrors {
    pub violations: Vec<Violation>,
}

impl fmt::Display for ValidationErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid scenario")?;
        for v in &self.violations {
            write!(f, "; {v}")?;
        }
        Ok(())
    }
}

impl ValidationErrors {
    fn push(&mut self, field: &'static str, value: impl fmt::Display, message: impl Into<String>) {
        self.violations.push(Violation {
            field,
            value: value.to_string(),
            message: message.into(),
        });
    }

    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn fields(&self) -> Vec<&'static str> {
        self.violations.iter().map(|v| v.field).collect()
    }

    fn into_result<T>(self, value: T) -> Result<T, ValidationErrors> {
        if self.is_empty() {
            Ok(value)
        } else {
            Err(self)
        }
    }
}

fn check_mcs(thresholds: &[f64], errs: &mut ValidationErrors) {
    if thresholds.is_empty() {
        errs.push("mcs", "[]", "at least one threshold required");
        return;
    }
    for (i, &g) in thresholds.iter().enumerate() {
        if !(g > 0.0 && g.is_finite()) {
            errs.push(
                "mcs",
                g,
                format!("threshold {} must be positive and finite", i + 1),
            );
        }
    }
    if thresholds.windows(2).any(|w| !(w[1] > w[0])) {
        errs.push(
            "mcs",
            format!("{thresholds:?}"),
            "thresholds must be strictly increasing",
        );
    }
}

fn nonneg(errs: &mut ValidationErrors, field: &'static str, v: f64) {
    if !(v >= 0.0 && v.is_finite()) {
        errs.push(field, v, "must be finite and nonnegative");
    }
}

fn positive(errs: &mut ValidationErrors, field: &'static str, v: f64) {
    if !(v > 0.0 && v.is_finite()) {
        errs.push(field, v, "must be finite and positive");
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Scenario {
    pub network: NetworkParams,
    pub traffic: TrafficParams,
    pub spectrum: SpectrumConfig,
}

/// Checks every constraint and returns the assembled scenario or all violations.
pub fn validate(
    network: NetworkParams,
    traffic: TrafficParams,
    spectrum: SpectrumConfig,
) -> Result<Scenario, ValidationErrors> {
    Scenario {
        network,
        traffic,
        spectrum,
    }
    .validated()
}

impl Scenario {
    pub fn validated(self) -> Result<Self, ValidationErrors> {
        let errs = self.violations();
        errs.into_result(self)
    }

    pub fn check(&self) -> Result<()> {
        let errs = self.violations();
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(errs))
        }
    }

    pub fn violations(&self) -> ValidationErrors {
        let mut errs = ValidationErrors::default();
        let n = &self.network;
        nonneg(&mut errs, "lambda_b", n.lambda_b);
        nonneg(&mut errs, "lambda_f", n.lambda_f);
        nonneg(&mut errs, "c", n.cluster_size);
        positive(&mut errs, "r_cluster", n.cluster_radius);
        positive(&mut errs, "r0", n.link_distance);
        positive(&mut errs, "p_b", n.p_b);
        positive(&mut errs, "p_f", n.p_f);
        if !(n.wall_loss > 0.0 && n.wall_loss <= 1.0) {
            errs.push("chi", n.wall_loss, "wall loss must lie in (0, 1] (linear)");
        }
        if !(n.alpha > 2.0 && n.alpha.is_finite()) {
            errs.push("alpha", n.alpha, "path-loss exponent must exceed 2");
        }
        if n.link_distance >= n.cluster_radius {
            errs.push(
                "r0",
                n.link_distance,
                "must be smaller than the cluster radius",
            );
        }

        let t = &self.traffic;
        nonneg(&mut errs, "lambda_m_arrivals", t.lambda_m_arrivals);
        positive(&mut errs, "mu", t.mu);
        positive(&mut errs, "rth_over_b", t.rth_over_b);
        if t.n_channels < 2 {
            errs.push("n_channels", t.n_channels, "at least 2 channels required");
        }
        check_mcs(t.mcs.thresholds(), &mut errs);

        let s = &self.spectrum;
        nonneg(&mut errs, "r_m", s.r_m);
        positive(&mut errs, "beta_m", s.beta_m);
        positive(&mut errs, "beta_f", s.beta_f);
        if s.mode != SharingMode::CoChannel {
            if s.n_f == 0 {
                errs.push("n_f", s.n_f, "femto tier needs at least one channel");
            } else if s.n_f >= t.n_channels {
                errs.push(
                    "n_f",
                    s.n_f,
                    "macro tier needs at least one channel (N_F must be below N)",
                );
            }
        }
        errs
    }

    pub fn delta(&self) -> f64 {
        self.network.delta()
    }

    /// Copy with a different sharing mode.
    pub fn with_mode(&self, mode: SharingMode) -> Self {
        let mut s = self.clone();
        s.spectrum.mode = mode;
        s
    }

    /// Parses the `key = value` scenario format. Missing keys keep their
    /// defaults, unknown keys are rejected. The result is validated.
    pub fn parse(text: &str) -> Result<Self> {
        let mut sc = Scenario::default();
        let mut lines_of: Vec<(&'static str, usize)> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("expected 'key = value', found '{line}'"),
                });
            };
            let key = key.trim();
            let value = value.trim();
            let field = sc.set(key, value).map_err(|message| Error::Parse {
                line: line_no,
                message,
            })?;
            lines_of.push((field, line_no));
        }
        let errs = sc.violations();
        if let Some(first) = errs.violations.first() {
            let line = lines_of
                .iter()
                .rev()
                .find(|(f, _)| *f == first.field)
                .map(|&(_, l)| l)
                .unwrap_or(0);
            let message = errs
                .violations
                .iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join("; ");
            return Err(Error::Parse { line, message });
        }
        Ok(sc)
    }

    /// Sets one field from its textual form; returns the canonical field name.
    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<&'static str, String> {
        let num = || -> std::result::Result<f64, String> {
            value
                .parse::<f64>()
                .map_err(|_| format!("{key}: '{value}' is not a number"))
        };
        let count = || -> std::result::Result<u32, String> {
            value
                .parse::<u32>()
                .map_err(|_| format!("{key}: '{value}' is not a nonnegative integer"))
        };
        let field = match key {
            "lambda_b" => {
                self.network.lambda_b = num()?;
                "lambda_b"
            }
            "lambda_f" => {
                self.network.lambda_f = num()?;
                "lambda_f"
            }
            "c" => {
                self.network.cluster_size = num()?;
                "c"
            }
            "r_cluster" => {
                self.network.cluster_radius = num()?;
                "r_cluster"
            }
            "r0" => {
                self.network.link_distance = num()?;
                "r0"
            }
            "p_b_dbm" => {
                self.network.p_b = dbm_to_watts(num()?);
                "p_b"
            }
            "p_f_dbm" => {
                self.network.p_f = dbm_to_watts(num()?);
                "p_f"
            }
            "chi_db" => {
                // Loss given as a positive attenuation in dB.
                self.network.wall_loss = db_to_linear(-num()?);
                "chi"
            }
            "alpha" => {
                self.network.alpha = num()?;
                "alpha"
            }
            "lambda_m_arrivals" => {
                self.traffic.lambda_m_arrivals = num()?;
                "lambda_m_arrivals"
            }
            "mu" => {
                self.traffic.mu = num()?;
                "mu"
            }
            "n_channels" => {
                self.traffic.n_channels = count()?;
                "n_channels"
            }
            "rth_over_b" => {
                self.traffic.rth_over_b = num()?;
                "rth_over_b"
            }
            "mcs_db" => {
                let db = value
                    .split(',')
                    .map(|s| {
                        s.trim()
                            .parse::<f64>()
                            .map_err(|_| format!("mcs_db: '{}' is not a number", s.trim()))
                    })
                    .collect::<std::result::Result<Vec<_>, _>>()?;
                self.traffic.mcs = McsTable {
                    thresholds: db.iter().map(|&d| db_to_linear(d)).collect(),
                };
                "mcs"
            }
            "mode" => {
                self.spectrum.mode = value.parse()?;
                "mode"
            }
            "n_f" => {
                self.spectrum.n_f = count()?;
                "n_f"
            }
            "r_m" => {
                self.spectrum.r_m = num()?;
                "r_m"
            }
            "beta_m_db" => {
                self.spectrum.beta_m = db_to_linear(num()?);
                "beta_m"
            }
            "beta_f_db" => {
                self.spectrum.beta_f = db_to_linear(num()?);
                "beta_f"
            }
            other => return Err(format!("unknown key '{other}'")),
        };
        Ok(field)
    }

    /// Short stable identifier (FNV-1a of the text form).
    pub fn id(&self) -> String {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for (k, v) in self.to_kv() {
            for b in k.bytes().chain(*b"=").chain(v.bytes()).chain(*b"\n") {
                h ^= b as u64;
                h = h.wrapping_mul(0x0100_0000_01b3);
            }
        }
        format!("{:08x}", (h >> 32) as u32 ^ h as u32)
    }

    /// Serializes to the `key = value` format read by [`Scenario::parse`].
    pub fn to_kv(&self) -> Vec<(&'static str, String)> {
        let n = &self.network;
        let t = &self.traffic;
        let s = &self.spectrum;
        let mcs = t
            .mcs
            .thresholds_db()
            .iter()
            .map(|d| format!("{}", round_db(*d)))
            .collect::<Vec<_>>()
            .join(",");
        vec![
            ("lambda_b", format!("{}", n.lambda_b)),
            ("lambda_f", format!("{}", n.lambda_f)),
            ("c", format!("{}", n.cluster_size)),
            ("r_cluster", format!("{}", n.cluster_radius)),
            ("r0", format!("{}", n.link_distance)),
            ("p_b_dbm", format!("{}", round_db(watts_to_dbm(n.p_b)))),
            ("p_f_dbm", format!("{}", round_db(watts_to_dbm(n.p_f)))),
            (
                "chi_db",
                format!("{}", round_db(-linear_to_db(n.wall_loss))),
            ),
            ("alpha", format!("{}", n.alpha)),
            ("lambda_m_arrivals", format!("{}", t.lambda_m_arrivals)),
            ("mu", format!("{}", t.mu)),
            ("n_channels", format!("{}", t.n_channels)),
            ("rth_over_b", format!("{}", t.rth_over_b)),
            ("mcs_db", mcs),
            ("mode", s.mode.to_string()),
            ("n_f", format!("{}", s.n_f)),
            ("r_m", format!("{}", s.r_m)),
            ("beta_m_db", format!("{}", round_db(linear_to_db(s.beta_m)))),
            ("beta_f_db", format!("{}", round_db(linear_to_db(s.beta_f)))),
        ]
    }
}

// dB round trips pick up ~1e-15 noise; twelve decimals is far below any
// meaningful resolution and keeps the text form stable.
fn round_db(x: f64) -> f64 {
    let r = (x * 1e12).round() / 1e12;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}
