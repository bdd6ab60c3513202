//! Coverage probabilities, MCS demand and average rate for both tiers.

use std::f64::consts::{LN_2, PI};
use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::laplace::{lt_inter_cluster, lt_intra_cluster, lt_macro_to_fu, HoleClusterKernel};
use crate::quadrature::{integrate, integrate_to_infinity, QuadratureSpec};
use crate::scenario::{db_to_linear, Scenario, SharingMode};
use crate::special::{csc_pi, h2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Tier {
    /// Outdoor macro user served by the nearest MBS.
    Mu,
    /// Indoor femto user served by a FAP at distance r0.
    Fu,
}

impl Tier {
    pub fn as_str(self) -> &'static str {
        match self {
            Tier::Mu => "mu",
            Tier::Fu => "fu",
        }
    }
}

impl fmt::Display for Tier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Source {
    Analytic,
    MonteCarlo,
    Linear,
}

impl Source {
    pub fn as_str(self) -> &'static str {
        match self {
            Source::Analytic => "analytic",
            Source::MonteCarlo => "montecarlo",
            Source::Linear => "linear",
        }
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CoverageQuery<'a> {
    pub scenario: &'a Scenario,
    pub tier: Tier,
    pub mode: SharingMode,
    /// SIR threshold, linear.
    pub threshold: f64,
    pub zeta: f64,
    pub quad: QuadratureSpec,
}

impl<'a> CoverageQuery<'a> {
    pub fn new(
        scenario: &'a Scenario,
        tier: Tier,
        mode: SharingMode,
        threshold: f64,
        zeta: f64,
    ) -> Self {
        Self {
            scenario,
            tier,
            mode,
            threshold,
            zeta,
            quad: QuadratureSpec::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub threshold_db: f64,
    pub probability: f64,
    /// 95% interval, Monte Carlo only.
    pub ci: Option<(f64, f64)>,
    pub std_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageCurve {
    pub scenario_id: String,
    pub tier: Tier,
    pub mode: SharingMode,
    pub source: Source,
    pub zeta: f64,
    pub points: Vec<CurvePoint>,
}

/// Threshold grid `-10, -9.5, …, 25` dB.
pub fn default_threshold_grid_db() -> Vec<f64> {
    (0..=70).map(|i| -10.0 + 0.5 * i as f64).collect()
}

/// Channels the femto tier spreads over in a mode.
pub fn femto_split(mode: SharingMode, scenario: &Scenario) -> u32 {
    match mode {
        SharingMode::CoChannel => scenario.traffic.n_channels,
        SharingMode::Orthogonal | SharingMode::Partial => scenario.spectrum.n_f,
    }
}

/// Probability that an MU's channel is also a femto channel under partial sharing.
pub fn shared_fraction(scenario: &Scenario) -> f64 {
    scenario.spectrum.n_f as f64 / scenario.traffic.n_channels as f64
}

fn check_inputs(threshold: f64, zeta: f64, r_m: f64) -> Result<()> {
    if !(threshold >= 0.0) || threshold.is_nan() {
        return Err(Error::domain(format!(
            "SIR threshold must be nonnegative, got {threshold}"
        )));
    }
    if !(0.0..=1.0).contains(&zeta) {
        return Err(Error::domain(format!(
            "activity must lie in [0, 1], got {zeta}"
        )));
    }
    if !(r_m >= 0.0 && r_m.is_finite()) {
        return Err(Error::domain(format!("r_m must be nonnegative, got {r_m}")));
    }
    Ok(())
}

pub fn coverage(q: &CoverageQuery<'_>) -> Result<f64> {
    let r_m = q.scenario.spectrum.r_m;
    match q.tier {
        Tier::Fu => coverage_fu(q.scenario, q.mode, r_m, q.threshold, q.zeta, &q.quad),
        Tier::Mu => coverage_mu(q.scenario, q.mode, r_m, q.threshold, q.zeta, &q.quad),
    }
}

/// FU coverage: product of the intra-cluster, inter-cluster and (unless
/// orthogonal) macro transforms at `s = β r0^α / P_F`.
pub fn coverage_fu(
    scenario: &Scenario,
    mode: SharingMode,
    r_m: f64,
    threshold: f64,
    zeta: f64,
    quad: &QuadratureSpec,
) -> Result<f64> {
    scenario.check()?;
    check_inputs(threshold, zeta, r_m)?;
    if threshold == 0.0 {
        return Ok(1.0);
    }
    let net = &scenario.network;
    let split = femto_split(mode, scenario);
    let s = threshold * net.link_distance.powf(net.alpha) / net.p_f;
    let (r_m, macro_term) = match mode {
        SharingMode::Orthogonal => (0.0, 1.0),
        _ => (r_m, lt_macro_to_fu(s, zeta, net)?),
    };
    let intra = lt_intra_cluster(s, r_m, split, net, &scenario.traffic, quad)?;
    let inter = lt_inter_cluster(s, split, net)?;
    Ok(intra * inter * macro_term)
}

/// MU coverage under the given sharing mode.
pub fn coverage_mu(
    scenario: &Scenario,
    mode: SharingMode,
    r_m: f64,
    threshold: f64,
    zeta: f64,
    quad: &QuadratureSpec,
) -> Result<f64> {
    scenario.check()?;
    check_inputs(threshold, zeta, r_m)?;
    if !(scenario.network.lambda_b > 0.0) {
        return Err(Error::domain("MU coverage needs a positive MBS density"));
    }
    if threshold == 0.0 {
        return Ok(1.0);
    }
    match mode {
        SharingMode::CoChannel => mu_cochannel(
            scenario,
            r_m,
            threshold,
            zeta,
            scenario.traffic.n_channels,
            quad,
        ),
        SharingMode::Orthogonal => mu_orthogonal(threshold, zeta, scenario.delta(), quad),
        SharingMode::Partial => {
            let p_c = shared_fraction(scenario);
            let orth = mu_orthogonal(threshold, zeta, scenario.delta(), quad)?;
            if p_c == 0.0 {
                return Ok(orth);
            }
            let shared = mu_cochannel(scenario, r_m, threshold, zeta, scenario.spectrum.n_f, quad)?;
            Ok(p_c * shared + (1.0 - p_c) * orth)
        }
    }
}

/// MU coverage on a channel free of femto interference:
/// `1 / (1 + ζ β^δ h2(β, δ))`.
pub fn mu_orthogonal(threshold: f64, zeta: f64, delta: f64, quad: &QuadratureSpec) -> Result<f64> {
    if threshold == 0.0 || zeta == 0.0 {
        return Ok(1.0);
    }
    Ok(1.0 / (1.0 + zeta * threshold.powf(delta) * h2(threshold, delta, quad)?))
}

fn macro_rate(threshold: f64, zeta: f64, delta: f64, quad: &QuadratureSpec) -> Result<f64> {
    if zeta == 0.0 {
        return Ok(1.0);
    }
    Ok(1.0 + zeta * threshold.powf(delta) * h2(threshold, delta, quad)?)
}

/// MU coverage on a channel shared with a femto tier spread over `split`
/// channels. Uses the closed form when `r_m = 0`.
pub fn mu_cochannel(
    scenario: &Scenario,
    r_m: f64,
    threshold: f64,
    zeta: f64,
    split: u32,
    quad: &QuadratureSpec,
) -> Result<f64> {
    if r_m == 0.0 {
        return mu_cochannel_closed(scenario, threshold, zeta, split, quad);
    }
    mu_cochannel_integral(scenario, r_m, threshold, zeta, split, quad)
}

fn mu_cochannel_closed(
    scenario: &Scenario,
    threshold: f64,
    zeta: f64,
    split: u32,
    quad: &QuadratureSpec,
) -> Result<f64> {
    let net = &scenario.network;
    let d = net.delta();
    let a = macro_rate(threshold, zeta, d, quad)?;
    let femto = PI * d * net.lambda_f * net.cluster_size / (net.lambda_b * split as f64)
        * (threshold * net.wall_loss * net.p_f / net.p_b).powf(d)
        * csc_pi(d)?;
    Ok(1.0 / (a + femto))
}

/// The serving-distance integral, evaluated by quadrature for any `r_m`.
///
/// With `u = π λ_B r²` the integrand is `e^{-a u} L_F(w(u))`, where `a`
/// collects the serving-distance density and the macro interference and
/// `L_F` is the femto transform at `w = β χ P_F r^α / P_B`.
pub fn mu_cochannel_integral(
    scenario: &Scenario,
    r_m: f64,
    threshold: f64,
    zeta: f64,
    split: u32,
    quad: &QuadratureSpec,
) -> Result<f64> {
    let net = &scenario.network;
    if split == 0 {
        return Err(Error::domain("channel split must be positive"));
    }
    let d = net.delta();
    let a = macro_rate(threshold, zeta, d, quad)?;
    let density = net.lambda_f * net.cluster_size / split as f64;
    let kernel = HoleClusterKernel::new(net.cluster_radius, r_m, net.alpha);
    let w_scale = threshold * net.wall_loss * net.p_f / net.p_b;
    let half_alpha = 0.5 * net.alpha;
    let u_to_r2 = 1.0 / (PI * net.lambda_b);
    let u_max = 1e12f64.ln() / a;
    let inner = quad.with_rel_tol(quad.rel_tol.max(1e-9));

    let mut failure = None;
    let est = integrate(
        |u| {
            if failure.is_some() {
                return 0.0;
            }
            let w = w_scale * (u * u_to_r2).powf(half_alpha);
            let femto = if density == 0.0 {
                0.0
            } else {
                match kernel.exponent(w, &inner) {
                    Ok(e) => density * e,
                    Err(e) => {
                        failure = Some(e);
                        0.0
                    }
                }
            };
            (-a * u - femto).exp()
        },
        0.0,
        u_max,
        quad,
    )
    .map_err(Error::quad("MU coverage integral"))?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(est.value)
}

/// Coverage over a threshold grid (dB), evaluated in parallel.
pub fn coverage_curve(
    scenario: &Scenario,
    tier: Tier,
    mode: SharingMode,
    zeta: f64,
    thresholds_db: &[f64],
    quad: &QuadratureSpec,
) -> Result<CoverageCurve> {
    let r_m = scenario.spectrum.r_m;
    let points = thresholds_db
        .par_iter()
        .map(|&db| {
            let beta = db_to_linear(db);
            let p = match tier {
                Tier::Fu => coverage_fu(scenario, mode, r_m, beta, zeta, quad)?,
                Tier::Mu => coverage_mu(scenario, mode, r_m, beta, zeta, quad)?,
            };
            Ok(CurvePoint {
                threshold_db: db,
                probability: p,
                ci: None,
                std_error: None,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CoverageCurve {
        scenario_id: scenario.id(),
        tier,
        mode,
        source: Source::Analytic,
        zeta,
        points,
    })
}

/// Probability that an MU is served at each MCS level,
/// `[M(Γᵢ) − M(Γᵢ₊₁)] / M(Γ₁)` with `M(Γ_{T+1}) = 0`.
pub fn mcs_probabilities(
    mode: SharingMode,
    r_m: f64,
    zeta: f64,
    scenario: &Scenario,
    quad: &QuadratureSpec,
) -> Result<Vec<f64>> {
    let thresholds = scenario.traffic.mcs.thresholds();
    let mut m = thresholds
        .iter()
        .map(|&g| coverage_mu(scenario, mode, r_m, g, zeta, quad))
        .collect::<Result<Vec<_>>>()?;
    let first = m[0];
    if !(first > 1e-300) {
        return Err(Error::TotalOutage);
    }
    m.push(0.0);
    Ok(m.windows(2)
        .map(|w| (w[0] - w[1]).max(0.0) / first)
        .collect())
}

/// Mean channels an admitted MU needs to meet its rate target,
/// `N̄ = Σ Prob(Γᵢ) · R_th / (B log₂(1 + Γᵢ))`.
pub fn mean_channels(
    mode: SharingMode,
    r_m: f64,
    zeta: f64,
    scenario: &Scenario,
    quad: &QuadratureSpec,
) -> Result<f64> {
    let probs = mcs_probabilities(mode, r_m, zeta, scenario, quad)?;
    let rth = scenario.traffic.rth_over_b;
    Ok(probs
        .iter()
        .zip(scenario.traffic.mcs.thresholds())
        .map(|(p, &g)| p * rth / (1.0 + g).log2())
        .sum())
}

fn has_interference(tier: Tier, mode: SharingMode, zeta: f64, scenario: &Scenario) -> bool {
    let net = &scenario.network;
    let macro_ = zeta > 0.0 && net.lambda_b > 0.0;
    let femto = net.cluster_size > 0.0;
    match (tier, mode) {
        (Tier::Mu, SharingMode::CoChannel) => macro_ || (femto && net.lambda_f > 0.0),
        (Tier::Mu, _) => macro_,
        (Tier::Fu, SharingMode::Orthogonal) => femto,
        (Tier::Fu, _) => macro_ || femto,
    }
}

/// Average spectral efficiency `E[log₂(1 + SIR)] = (1/ln 2) ∫₀^∞ P(SIR > eᵗ − 1) dt`.
pub fn avg_rate(
    tier: Tier,
    mode: SharingMode,
    r_m: f64,
    zeta: f64,
    scenario: &Scenario,
    quad: &QuadratureSpec,
) -> Result<f64> {
    scenario.check()?;
    check_inputs(0.0, zeta, r_m)?;
    if !has_interference(tier, mode, zeta, scenario) {
        return Err(Error::UnboundedRate);
    }
    if tier == Tier::Mu && !(scenario.network.lambda_b > 0.0) {
        return Err(Error::domain("MU coverage needs a positive MBS density"));
    }
    let outer = quad.with_rel_tol(quad.rel_tol.max(1e-8));
    let mut failure = None;
    let est = integrate_to_infinity(
        |t| {
            if failure.is_some() || t > 700.0 {
                return 0.0;
            }
            let beta = t.exp_m1();
            let p = match tier {
                Tier::Fu => coverage_fu(scenario, mode, r_m, beta, zeta, quad),
                Tier::Mu => coverage_mu(scenario, mode, r_m, beta, zeta, quad),
            };
            p.unwrap_or_else(|e| {
                failure = Some(e);
                0.0
            })
        },
        0.0,
        &outer,
    )
    .map_err(Error::quad("average rate"))?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(est.value / LN_2)
}
