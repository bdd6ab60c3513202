//! Spectrum-sharing design: where co-channel sharing stops beating orthogonal
//! allocation for macro users, and the per-mode effective densities.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::coverage::{coverage_mu, femto_split, shared_fraction};
use crate::error::{Error, Result};
use crate::laplace::cluster_cochannel_mean;
use crate::load::{solve_activity, SolverOptions};
use crate::quadrature::QuadratureSpec;
use crate::scenario::{Scenario, SharingMode};
use crate::special::{csc_pi, h2};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CriticalMethod {
    /// Closed form for `r_m = 0` and linear, unsaturated macro activity.
    ClosedForm,
    /// Root of `M_C − M_O` with each side's activity from the fixed point.
    Numerical,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriticalPointResult {
    /// Critical FAP density `λ_F c` (m⁻²).
    pub lambda_f_c: f64,
    pub method: CriticalMethod,
    /// Whether the assumptions behind the method hold for the scenario.
    pub valid: bool,
    pub assumptions: String,
    /// Final bracket on `λ_F c` (numerical method only).
    pub bracket: Option<(f64, f64)>,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Crossover {
    Found(CriticalPointResult),
    /// `M_C − M_O` keeps one sign over the searched range.
    NoCrossover {
        /// Mode with the higher MU coverage across the whole range.
        dominant: SharingMode,
        range: (f64, f64),
    },
}

/// `λ_F c* = (λ_M/μ) (N_F/(N − N_F)) (P_B/(χ P_F))^δ h2(β_M, δ) / (π δ csc(π δ))`.
///
/// Exact when `r_m = 0` and both modes run the linear activity model below
/// saturation; `valid` reports the saturation condition
/// `λ_M / (λ_B μ) ≤ N − N_F`.
pub fn critical_density_case1(
    scenario: &Scenario,
    quad: &QuadratureSpec,
) -> Result<CriticalPointResult> {
    scenario.check()?;
    let net = &scenario.network;
    let t = &scenario.traffic;
    let n = t.n_channels as f64;
    let n_f = scenario.spectrum.n_f as f64;
    if !(n_f >= 1.0 && n_f < n) {
        return Err(Error::domain(format!(
            "critical density needs 1 <= N_F < N, got N_F = {n_f}, N = {n}"
        )));
    }
    let d = net.delta();
    let beta = scenario.spectrum.beta_m;
    let h = h2(beta, d, quad)?;
    let value = t.lambda_m_arrivals / t.mu
        * (n_f / (n - n_f))
        * (net.p_b / (net.wall_loss * net.p_f)).powf(d)
        * h
        / (PI * d * csc_pi(d)?);
    let valid = net.lambda_b > 0.0 && t.lambda_m_arrivals / (net.lambda_b * t.mu) <= n - n_f;
    Ok(CriticalPointResult {
        lambda_f_c: value,
        method: CriticalMethod::ClosedForm,
        valid,
        assumptions: "r_m = 0; linear macro activity below saturation in both modes".into(),
        bracket: None,
        iterations: 0,
    })
}

/// Default search range for `λ_F c`.
pub const CRITICAL_RANGE: (f64, f64) = (1e-6, 1e-1);

const PRESCAN_POINTS: usize = 16;
const RELATIVE_BRACKET: f64 = 1e-3;

/// Finds `λ_F c` where co-channel and orthogonal MU coverage at `β_M` are
/// equal, using the scenario's `r_m` and the activity model in `opts`.
pub fn critical_density_numerical(
    scenario: &Scenario,
    range: (f64, f64),
    opts: &SolverOptions,
    quad: &QuadratureSpec,
) -> Result<Crossover> {
    scenario.check()?;
    let (lo, hi) = range;
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(Error::domain(format!("invalid search range [{lo}, {hi}]")));
    }
    if !(scenario.network.cluster_size > 0.0) {
        return Err(Error::domain(
            "critical density needs a positive mean cluster size",
        ));
    }
    let n = scenario.traffic.n_channels;
    let n_f = scenario.spectrum.n_f;
    if !(n_f >= 1 && n_f < n) {
        return Err(Error::domain(format!(
            "critical density needs 1 <= N_F < N, got N_F = {n_f}, N = {n}"
        )));
    }
    let beta = scenario.spectrum.beta_m;
    let r_m = scenario.spectrum.r_m;

    let orth = scenario.with_mode(SharingMode::Orthogonal);
    let zeta_o = solve_activity(SharingMode::Orthogonal, &orth, opts, quad)?.require_converged()?;
    let m_o = coverage_mu(&orth, SharingMode::Orthogonal, r_m, beta, zeta_o.zeta, quad)?;

    let gap = |x: f64| -> Result<f64> {
        let mut co = scenario.with_mode(SharingMode::CoChannel);
        co.network.lambda_f = x / co.network.cluster_size;
        let sol = solve_activity(SharingMode::CoChannel, &co, opts, quad)?.require_converged()?;
        Ok(coverage_mu(&co, SharingMode::CoChannel, r_m, beta, sol.zeta, quad)? - m_o)
    };

    let ratio = (hi / lo).powf(1.0 / (PRESCAN_POINTS - 1) as f64);
    let grid: Vec<f64> = (0..PRESCAN_POINTS)
        .map(|i| lo * ratio.powi(i as i32))
        .collect();
    let values = grid
        .par_iter()
        .map(|&x| gap(x))
        .collect::<Result<Vec<_>>>()?;

    let Some(i) = (0..PRESCAN_POINTS - 1).find(|&i| values[i] > 0.0 && values[i + 1] <= 0.0) else {
        let dominant = if values.iter().all(|&v| v > 0.0) {
            SharingMode::CoChannel
        } else {
            SharingMode::Orthogonal
        };
        return Ok(Crossover::NoCrossover { dominant, range });
    };

    let (mut a, mut b) = (grid[i], grid[i + 1]);
    let mut iterations = 0;
    while b / a > 1.0 + RELATIVE_BRACKET {
        let mid = (a * b).sqrt();
        if gap(mid)? > 0.0 {
            a = mid;
        } else {
            b = mid;
        }
        iterations += 1;
    }
    Ok(Crossover::Found(CriticalPointResult {
        lambda_f_c: (a * b).sqrt(),
        method: CriticalMethod::Numerical,
        valid: true,
        assumptions: format!("r_m = {r_m}; activity model {:?}", opts.model),
        bracket: Some((a, b)),
        iterations,
    }))
}

/// Interference densities seen by each tier in a sharing mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveDensities {
    pub mode: SharingMode,
    /// Active MBS density interfering with an MU, `ζ λ_B`.
    pub mbs_to_mu: f64,
    /// Co-channel FAP density on an MU's channel (outside the sensing hole).
    pub fap_to_mu: f64,
    /// Active MBS density interfering with an FU.
    pub mbs_to_fu: f64,
    /// Co-channel FAP density from other clusters at an FU.
    pub fap_to_fu: f64,
    /// Mean co-channel FAPs in the FU's own cluster.
    pub intra_cluster_mean: f64,
    /// Fraction of MU channels shared with the femto tier.
    pub shared_fraction: f64,
}

pub fn effective_densities(
    mode: SharingMode,
    scenario: &Scenario,
    zeta: f64,
) -> Result<EffectiveDensities> {
    scenario.check()?;
    if !(0.0..=1.0).contains(&zeta) {
        return Err(Error::domain(format!(
            "activity must lie in [0, 1], got {zeta}"
        )));
    }
    let net = &scenario.network;
    let split = femto_split(mode, scenario);
    let fap = net.lambda_f * net.cluster_size / split as f64;
    let mbs = zeta * net.lambda_b;
    let r_m = match mode {
        SharingMode::Orthogonal => 0.0,
        _ => scenario.spectrum.r_m,
    };
    let intra = cluster_cochannel_mean(r_m, split, net, &scenario.traffic)?;
    let (fap_to_mu, mbs_to_fu, shared) = match mode {
        SharingMode::CoChannel => (fap, mbs, 1.0),
        SharingMode::Orthogonal => (0.0, 0.0, 0.0),
        SharingMode::Partial => (fap, mbs, shared_fraction(scenario)),
    };
    Ok(EffectiveDensities {
        mode,
        mbs_to_mu: mbs,
        fap_to_mu,
        mbs_to_fu,
        fap_to_fu: fap,
        intra_cluster_mean: intra,
        shared_fraction: shared,
    })
}
