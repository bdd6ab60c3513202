//! Cognitive channel access, cell load and the MBS activity fixed point.

use std::f64::consts::PI;

use statrs::function::factorial::ln_binomial;
use statrs::function::gamma::ln_gamma;

use crate::coverage::mean_channels;
use crate::error::{Error, Result};
use crate::quadrature::QuadratureSpec;
use crate::scenario::{per_channel_mu_density, Scenario, SharingMode, TrafficParams};
use crate::special::regularized_gammas;

/// Probability that a cluster can use a given cognitive channel, i.e. that no
/// MU on it lies within `r_m`: `exp(−(λ_m/μ) π r_m²)`.
pub fn access_probability(r_m: f64, traffic: &TrafficParams) -> f64 {
    (-per_channel_mu_density(traffic) * PI * r_m * r_m).exp()
}

fn check_probability(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "probability must lie in [0, 1], got {p}"
        )))
    }
}

/// Binomial pmf of the number of accessible channels out of `trials`.
pub fn accessible_channels_pmf(p: f64, trials: u32) -> Result<Vec<f64>> {
    check_probability(p)?;
    let n = trials as usize;
    let mut pmf = vec![0.0; n + 1];
    if p == 0.0 {
        pmf[0] = 1.0;
        return Ok(pmf);
    }
    if p == 1.0 {
        pmf[n] = 1.0;
        return Ok(pmf);
    }
    let (lp, lq) = (p.ln(), (-p).ln_1p());
    for (k, slot) in pmf.iter_mut().enumerate() {
        let ln = ln_binomial(trials as u64, k as u64) + k as f64 * lp + (n - k) as f64 * lq;
        *slot = ln.exp();
    }
    Ok(pmf)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveClusterMean {
    /// `c E[1 / (1 + Bin(N−1, p))] = (c / (N p)) (1 − (1 − p)^N)`.
    pub exact: f64,
    /// `c / (N p)`.
    pub approx: f64,
    /// `(approx − exact) / exact`.
    pub relative_gap: f64,
}

/// Mean number of same-cluster FAPs sharing the tagged FAP's channel.
pub fn effective_cluster_mean(p: f64, n_channels: u32, c: f64) -> Result<EffectiveClusterMean> {
    check_probability(p)?;
    if p == 0.0 {
        return Err(Error::domain(
            "access probability is zero; effective cluster mean diverges",
        ));
    }
    if n_channels == 0 {
        return Err(Error::domain("need at least one channel"));
    }
    let n = n_channels as f64;
    let approx = c / (n * p);
    let exact = approx * -((-p).ln_1p() * n).exp_m1();
    let relative_gap = if exact > 0.0 {
        (approx - exact) / exact
    } else {
        0.0
    };
    Ok(EffectiveClusterMean {
        exact,
        approx,
        relative_gap,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErlangOccupancy {
    /// Truncated-Poisson pmf of busy channels over `0..=n_e`.
    pub pmf: Vec<f64>,
    /// `E[n] / n_e` under the truncated pmf.
    pub zeta_exact: f64,
    /// `min(a λ_M / (μ n_e), 1)`.
    pub zeta_linear: f64,
}

/// Occupancy of an `n_e`-server loss system fed by a cell of area `area`.
pub fn erlang_occupancy(area: f64, traffic: &TrafficParams, n_e: u32) -> Result<ErlangOccupancy> {
    if !(area >= 0.0 && area.is_finite()) {
        return Err(Error::domain(format!(
            "cell area must be nonnegative, got {area}"
        )));
    }
    if n_e == 0 {
        return Err(Error::domain("need at least one effective channel"));
    }
    let load = area * traffic.lambda_m_arrivals / traffic.mu;
    let pmf = truncated_poisson(load, n_e);
    let mean: f64 = pmf.iter().enumerate().map(|(k, &q)| k as f64 * q).sum();
    Ok(ErlangOccupancy {
        pmf,
        zeta_exact: mean / n_e as f64,
        zeta_linear: (load / n_e as f64).min(1.0),
    })
}

pub(crate) fn truncated_poisson(load: f64, n_e: u32) -> Vec<f64> {
    let n = n_e as usize;
    if load <= 0.0 {
        let mut pmf = vec![0.0; n + 1];
        pmf[0] = 1.0;
        return pmf;
    }
    let ll = load.ln();
    let logs: Vec<f64> = (0..=n)
        .map(|k| k as f64 * ll - ln_gamma(k as f64 + 1.0))
        .collect();
    let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut pmf: Vec<f64> = logs.iter().map(|l| (l - top).exp()).collect();
    let total: f64 = pmf.iter().sum();
    pmf.iter_mut().for_each(|q| *q /= total);
    pmf
}

/// Voronoi cell-area density approximation: Gamma with shape 3.5 and rate 3.5 λ_B.
pub fn cell_area_pdf(area: f64, lambda_b: f64) -> Result<f64> {
    if !(lambda_b > 0.0) {
        return Err(Error::domain(
            "cell-area density needs a positive MBS density",
        ));
    }
    if area <= 0.0 {
        return Ok(0.0);
    }
    let rate = 3.5 * lambda_b;
    let ln = 3.5 * rate.ln() - ln_gamma(3.5) + 2.5 * area.ln() - rate * area;
    Ok(ln.exp())
}

/// Mean fraction of busy channels over Gamma-distributed cells when each
/// cell is linearly loaded and capped at one, as a function of the mean
/// load `1/φ`:
/// `1/φ · P(4.5, 3.5φ) + Q(3.5, 3.5φ)`.
///
/// `P(4.5, z)/(z/3.5) = γ(4.5, z)/(z Γ(3.5))` because `Γ(4.5) = 3.5 Γ(3.5)`.
pub fn activity_closed_form(inv_phi: f64) -> f64 {
    if !(inv_phi > 0.0) {
        return 0.0;
    }
    if inv_phi.is_infinite() {
        return 1.0;
    }
    let z = 3.5 / inv_phi;
    let (p45, _) = regularized_gammas(4.5, z).expect("positive shape and argument");
    let (_, q35) = regularized_gammas(3.5, z).expect("positive shape and argument");
    (inv_phi * p45 + q35).clamp(0.0, 1.0)
}

/// Linear activity `min(1/φ, 1)`.
pub fn activity_linear(inv_phi: f64) -> f64 {
    inv_phi.clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum ActivityModel {
    /// Gamma cell areas with capped linear load.
    #[default]
    ClosedForm,
    /// Mean-cell linear load, capped at one.
    Linear,
}

impl ActivityModel {
    pub fn evaluate(self, inv_phi: f64) -> f64 {
        match self {
            ActivityModel::ClosedForm => activity_closed_form(inv_phi),
            ActivityModel::Linear => activity_linear(inv_phi),
        }
    }
}

/// Channels available to the macro tier in a sharing mode.
pub fn macro_channels(mode: SharingMode, scenario: &Scenario) -> u32 {
    match mode {
        SharingMode::CoChannel | SharingMode::Partial => scenario.traffic.n_channels,
        SharingMode::Orthogonal => scenario.traffic.n_channels - scenario.spectrum.n_f,
    }
}

/// Mean load `1/φ = λ_M N̄ / (λ_B μ N_mode)`.
pub fn mean_load(mode: SharingMode, scenario: &Scenario, n_bar: f64) -> Result<f64> {
    let lambda_b = scenario.network.lambda_b;
    if !(lambda_b > 0.0) {
        return Err(Error::domain("MBS activity needs a positive MBS density"));
    }
    let t = &scenario.traffic;
    Ok(t.lambda_m_arrivals * n_bar / (lambda_b * t.mu * macro_channels(mode, scenario) as f64))
}

/// Effective number of simultaneously servable MUs per cell, `max(1, ⌊N_mode / N̄⌋)`.
pub fn effective_servers(mode: SharingMode, scenario: &Scenario, n_bar: f64) -> u32 {
    let n = macro_channels(mode, scenario) as f64;
    ((n / n_bar).floor() as u32).max(1)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub tolerance: f64,
    pub max_iter: usize,
    pub model: ActivityModel,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-6,
            max_iter: 200,
            model: ActivityModel::ClosedForm,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverFlag {
    Converged,
    /// `g(0)` and `g(1)` share a sign; the endpoint closer to a root is returned.
    NoSignChange,
    /// Iteration cap hit; the bracket midpoint is returned.
    MaxIterations,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActivitySolution {
    pub zeta: f64,
    pub n_bar: f64,
    pub iterations: usize,
    pub residual: f64,
    pub mode: SharingMode,
    pub model: ActivityModel,
    pub flag: SolverFlag,
}

impl ActivitySolution {
    pub fn converged(&self) -> bool {
        self.flag == SolverFlag::Converged
    }

    /// Turns a flagged solution into an error.
    pub fn require_converged(self) -> Result<Self> {
        match self.flag {
            SolverFlag::Converged => Ok(self),
            _ => Err(Error::SolverNotConverged {
                iterations: self.iterations,
                lo: 0.0,
                hi: 1.0,
                residual: self.residual,
            }),
        }
    }
}

/// Solves `ζ = F(ζ)` with `F(ζ) = model(λ_M N̄(ζ) / (λ_B μ N_mode))` by
/// bisection on `[0, 1]`. `N̄(ζ)` is the MU mean channel demand under the
/// scenario's cognitive radius.
pub fn solve_activity(
    mode: SharingMode,
    scenario: &Scenario,
    opts: &SolverOptions,
    quad: &QuadratureSpec,
) -> Result<ActivitySolution> {
    scenario.check()?;
    if !(opts.tolerance > 0.0) || opts.max_iter == 0 {
        return Err(Error::domain(
            "solver tolerance and iteration cap must be positive",
        ));
    }
    let r_m = scenario.spectrum.r_m;
    let map = |zeta: f64| -> Result<(f64, f64)> {
        let n_bar = mean_channels(mode, r_m, zeta, scenario, quad)?;
        let load = mean_load(mode, scenario, n_bar)?;
        Ok((opts.model.evaluate(load), n_bar))
    };

    let done = |zeta: f64, n_bar: f64, iterations, residual: f64, flag| ActivitySolution {
        zeta,
        n_bar,
        iterations,
        residual,
        mode,
        model: opts.model,
        flag,
    };

    let (f0, n0) = map(0.0)?;
    let g0 = f0;
    if g0 <= opts.tolerance {
        return Ok(done(0.0, n0, 0, g0, SolverFlag::Converged));
    }
    let (f1, n1) = map(1.0)?;
    let g1 = f1 - 1.0;
    if g1.abs() <= opts.tolerance {
        return Ok(done(1.0, n1, 1, g1, SolverFlag::Converged));
    }
    if g1 > 0.0 {
        // Unreachable for a map into [0, 1]; kept so a modelling change cannot loop silently.
        let (z, n, g) = if g0.abs() < g1.abs() {
            (0.0, n0, g0)
        } else {
            (1.0, n1, g1)
        };
        log::warn!("activity fixed point: no sign change on [0, 1]");
        return Ok(done(z, n, 1, g, SolverFlag::NoSignChange));
    }

    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut last = (0.5, n0, g0);
    for iter in 1..=opts.max_iter {
        let mid = 0.5 * (lo + hi);
        let (f, n_bar) = map(mid)?;
        let g = f - mid;
        last = (mid, n_bar, g);
        if g > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= opts.tolerance || g == 0.0 {
            return Ok(done(mid, n_bar, iter, g, SolverFlag::Converged));
        }
    }
    log::warn!(
        "activity fixed point: iteration cap {} reached",
        opts.max_iter
    );
    Ok(done(
        last.0,
        last.1,
        opts.max_iter,
        last.2,
        SolverFlag::MaxIterations,
    ))
}
