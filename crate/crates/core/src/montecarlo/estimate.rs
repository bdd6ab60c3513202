use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma};
use rayon::prelude::*;

use super::access::{apply_channel_access, ChannelAccess, TaggedChannel};
use super::sampling::{ppp_disk, sample_realization, NetworkRealization, Point, Serving};
use super::{trial_rng, SimulationOptions, SimulationWindow};
use crate::coverage::{CoverageCurve, CurvePoint, Source, Tier};
use crate::error::{Error, Result};
use crate::load::{effective_servers, truncated_poisson};
use crate::scenario::{db_to_linear, Scenario, SharingMode};

const Z95: f64 = 1.959_963_984_540_054;

/// Wilson score 95% interval for `successes` out of `n`; `None` when `n = 0`.
pub fn wilson_interval(successes: usize, n: usize) -> Option<(f64, f64)> {
    if n == 0 {
        return None;
    }
    let nf = n as f64;
    let p = successes as f64 / nf;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / nf;
    let center = (p + z2 / (2.0 * nf)) / denom;
    let half = Z95 * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    Some(((center - half).max(0.0), (center + half).min(1.0)))
}

fn dist(p: Point) -> f64 {
    p[0].hypot(p[1])
}

fn fading<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    Exp1.sample(rng)
}

/// Mean interference from a PPP of density `density` and power `power`
/// beyond radius `from`: `2π density power from^{2−α} / (α − 2)`.
fn tail_mean(density: f64, power: f64, from: f64, alpha: f64) -> f64 {
    2.0 * PI * density * power * from.powf(2.0 - alpha) / (alpha - 2.0)
}

fn femto_split_of(real: &NetworkRealization) -> f64 {
    real.plan.femto_channels as f64
}

fn macro_tail(real: &NetworkRealization, scenario: &Scenario, zeta: f64) -> f64 {
    let net = &scenario.network;
    let gain = match real.tier {
        Tier::Mu => 1.0,
        Tier::Fu if real.mode == SharingMode::Orthogonal => return 0.0,
        Tier::Fu => net.wall_loss,
    };
    tail_mean(zeta * net.lambda_b, gain * net.p_b, real.radius, net.alpha)
}

fn femto_tail(real: &NetworkRealization, scenario: &Scenario, access: &ChannelAccess) -> f64 {
    if !matches!(access.channel, TaggedChannel::Femto(_)) {
        return 0.0;
    }
    let net = &scenario.network;
    let density = net.lambda_f * net.cluster_size / femto_split_of(real);
    tail_mean(
        density,
        net.wall_loss * net.p_f,
        real.radius + net.cluster_radius,
        net.alpha,
    )
}

struct Components {
    signal: f64,
    macro_: f64,
    intra: f64,
    inter: f64,
}

fn components<R: Rng + ?Sized>(
    real: &NetworkRealization,
    access: &ChannelAccess,
    scenario: &Scenario,
    rng: &mut R,
) -> Components {
    let net = &scenario.network;
    let alpha = net.alpha;
    let loss = |p: Point| dist(p).powf(-alpha);
    let (signal, serving_mbs, mbs_gain) = match real.serving {
        Serving::Mbs { index, distance } => (
            fading(rng) * net.p_b * distance.powf(-alpha),
            Some(index),
            1.0,
        ),
        Serving::Fap { position } => (fading(rng) * net.p_f * loss(position), None, net.wall_loss),
        Serving::None => (0.0, None, 1.0),
    };
    let mut macro_ = 0.0;
    for (i, (&p, &on)) in real.mbs.iter().zip(&access.mbs_active).enumerate() {
        if on && Some(i) != serving_mbs {
            macro_ += fading(rng) * mbs_gain * net.p_b * loss(p);
        }
    }
    let (mut intra, mut inter) = (0.0, 0.0);
    let own_cluster = real.tier == Tier::Fu;
    for &(k, p) in &access.cochannel {
        let v = fading(rng) * net.wall_loss * net.p_f * loss(p);
        if own_cluster && k == 0 {
            intra += v;
        } else {
            inter += v;
        }
    }
    Components {
        signal,
        macro_,
        intra,
        inter,
    }
}

/// One SIR sample for the tagged user of `tier`.
///
/// Interference beyond the window enters as its deterministic mean.
pub fn sample_sir<R: Rng + ?Sized>(
    scenario: &Scenario,
    mode: SharingMode,
    tier: Tier,
    zeta: f64,
    window: &SimulationWindow,
    options: &SimulationOptions,
    rng: &mut R,
) -> Result<f64> {
    let real = sample_realization(scenario, mode, tier, window, options, rng)?;
    let access = apply_channel_access(&real, scenario, zeta, rng)?;
    if access.channel == TaggedChannel::Unserved {
        return Ok(0.0);
    }
    let c = components(&real, &access, scenario, rng);
    let tail = macro_tail(&real, scenario, zeta) + femto_tail(&real, scenario, &access);
    let interference = c.macro_ + c.intra + c.inter + tail;
    Ok(if interference > 0.0 {
        c.signal / interference
    } else {
        f64::INFINITY
    })
}

/// Empirical `P(SIR > β)` on a threshold grid (dB) with Wilson intervals.
/// All thresholds are read off the same SIR draws.
pub fn estimate_coverage(
    scenario: &Scenario,
    mode: SharingMode,
    tier: Tier,
    zeta: f64,
    thresholds_db: &[f64],
    window: &SimulationWindow,
    options: &SimulationOptions,
) -> Result<CoverageCurve> {
    scenario.check()?;
    window.validate(scenario)?;
    let sirs = (0..window.trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(window.seed, t);
            sample_sir(scenario, mode, tier, zeta, window, options, &mut rng)
        })
        .collect::<Result<Vec<f64>>>()?;
    let n = sirs.len();
    let points = thresholds_db
        .iter()
        .map(|&db| {
            let beta = db_to_linear(db);
            let hits = sirs.iter().filter(|&&s| s > beta).count();
            let p = hits as f64 / n as f64;
            CurvePoint {
                threshold_db: db,
                probability: p,
                ci: wilson_interval(hits, n),
                std_error: Some((p * (1.0 - p) / n as f64).sqrt()),
            }
        })
        .collect();
    Ok(CoverageCurve {
        scenario_id: scenario.id(),
        tier,
        mode,
        source: Source::MonteCarlo,
        zeta,
        points,
    })
}

/// Interference component whose Laplace transform is estimated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Interference {
    /// Active MBSs at the indoor FU.
    MacroToFu { zeta: f64 },
    /// Co-channel FAPs of the FU's own cluster.
    IntraCluster,
    /// Co-channel FAPs of other clusters at the FU.
    InterCluster,
    /// Co-channel FAPs at the MU, with the exact sensing rule.
    FapToMu,
    /// Active MBSs beyond serving distance `r` at the MU.
    MbsToMu { r: f64, zeta: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LtEstimate {
    pub value: f64,
    pub std_error: f64,
    pub trials: usize,
}

fn mean_and_se(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, (var / n).sqrt())
}

/// Empirical `E[exp(−s I)]` for one interference component.
pub fn estimate_laplace(
    scenario: &Scenario,
    mode: SharingMode,
    kind: Interference,
    s: f64,
    window: &SimulationWindow,
    options: &SimulationOptions,
) -> Result<LtEstimate> {
    scenario.check()?;
    window.validate(scenario)?;
    if !(s >= 0.0 && s.is_finite()) {
        return Err(Error::domain(format!(
            "transform variable must be nonnegative, got {s}"
        )));
    }
    let net = &scenario.network;
    let samples = (0..window.trials as u64)
        .into_par_iter()
        .map(|t| -> Result<f64> {
            let mut rng = trial_rng(window.seed, t);
            let interference = match kind {
                Interference::MbsToMu { r, zeta } => {
                    if !(0.0..=1.0).contains(&zeta) {
                        return Err(Error::domain("activity must lie in [0, 1]"));
                    }
                    let mut total = 0.0;
                    for p in ppp_disk(&mut rng, net.lambda_b, window.radius) {
                        let d = dist(p);
                        if d > r && rng.random_bool(zeta) {
                            total += fading(&mut rng) * net.p_b * d.powf(-net.alpha);
                        }
                    }
                    total + tail_mean(zeta * net.lambda_b, net.p_b, window.radius, net.alpha)
                }
                _ => {
                    let (tier, zeta) = match kind {
                        Interference::MacroToFu { zeta } => (Tier::Fu, zeta),
                        Interference::FapToMu => (Tier::Mu, 0.0),
                        _ => (Tier::Fu, 0.0),
                    };
                    let real = sample_realization(scenario, mode, tier, window, options, &mut rng)?;
                    let access = apply_channel_access(&real, scenario, zeta, &mut rng)?;
                    let c = components(&real, &access, scenario, &mut rng);
                    match kind {
                        Interference::MacroToFu { zeta } => {
                            c.macro_ + macro_tail(&real, scenario, zeta)
                        }
                        Interference::IntraCluster => c.intra,
                        Interference::InterCluster | Interference::FapToMu => {
                            c.inter + femto_tail(&real, scenario, &access)
                        }
                        Interference::MbsToMu { .. } => unreachable!(),
                    }
                }
            };
            Ok((-s * interference).exp())
        })
        .collect::<Result<Vec<f64>>>()?;
    let (value, std_error) = mean_and_se(&samples);
    Ok(LtEstimate {
        value,
        std_error,
        trials: samples.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CellAreaSource {
    /// Gamma(3.5, 3.5 λ_B) areas.
    #[default]
    Gamma,
    /// Area of the origin's cell in a freshly drawn Voronoi tessellation.
    Voronoi,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActivityEstimate {
    pub zeta: f64,
    pub std_error: f64,
    pub ci: (f64, f64),
    pub cells: usize,
}

/// Area of the Voronoi cell of a nucleus at the origin among MBSs of
/// density `lambda_b`, by half-plane clipping.
pub fn voronoi_cell_area<R: Rng + ?Sized>(lambda_b: f64, rng: &mut R) -> Result<f64> {
    if !(lambda_b > 0.0) {
        return Err(Error::domain("Voronoi cells need a positive MBS density"));
    }
    let reach = 12.0 / (PI * lambda_b).sqrt();
    let mut others = ppp_disk(rng, lambda_b, reach);
    others.sort_by(|a, b| dist(*a).total_cmp(&dist(*b)));
    let mut poly: Vec<Point> = vec![
        [-reach, -reach],
        [reach, -reach],
        [reach, reach],
        [-reach, reach],
    ];
    for q in others {
        let far = poly.iter().map(|&v| dist(v)).fold(0.0, f64::max);
        if dist(q) > 2.0 * far {
            break;
        }
        poly = clip(&poly, q);
        if poly.is_empty() {
            break;
        }
    }
    let n = poly.len();
    let area: f64 = (0..n)
        .map(|i| {
            let (a, b) = (poly[i], poly[(i + 1) % n]);
            a[0] * b[1] - b[0] * a[1]
        })
        .sum();
    Ok(0.5 * area.abs())
}

// Keeps the side of the bisector of (0, q) that contains the origin.
fn clip(poly: &[Point], q: Point) -> Vec<Point> {
    let c = 0.5 * (q[0] * q[0] + q[1] * q[1]);
    let side = |p: Point| p[0] * q[0] + p[1] * q[1] - c;
    let mut out = Vec::with_capacity(poly.len() + 1);
    for i in 0..poly.len() {
        let (a, b) = (poly[i], poly[(i + 1) % poly.len()]);
        let (sa, sb) = (side(a), side(b));
        if sa <= 0.0 {
            out.push(a);
        }
        if (sa < 0.0 && sb > 0.0) || (sa > 0.0 && sb < 0.0) {
            let t = sa / (sa - sb);
            out.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
        }
    }
    out
}

/// Empirical MBS activity: per sampled cell, an Erlang-loss occupancy with
/// `N_e = max(1, ⌊N_mode / N̄⌋)` servers, averaged as `occupancy / N_e`.
pub fn estimate_activity(
    scenario: &Scenario,
    mode: SharingMode,
    n_bar: f64,
    cells: usize,
    seed: u64,
    source: CellAreaSource,
) -> Result<ActivityEstimate> {
    scenario.check()?;
    if cells == 0 {
        return Err(Error::domain("at least one cell required"));
    }
    if !(n_bar > 0.0 && n_bar.is_finite()) {
        return Err(Error::domain(format!(
            "mean channel demand must be positive, got {n_bar}"
        )));
    }
    let lambda_b = scenario.network.lambda_b;
    if !(lambda_b > 0.0) {
        return Err(Error::domain("MBS activity needs a positive MBS density"));
    }
    let n_e = effective_servers(mode, scenario, n_bar);
    let per_area = scenario.traffic.lambda_m_arrivals / scenario.traffic.mu;
    let gamma =
        Gamma::new(3.5, 1.0 / (3.5 * lambda_b)).map_err(|e| Error::domain(e.to_string()))?;
    let samples = (0..cells as u64)
        .into_par_iter()
        .map(|t| -> Result<f64> {
            let mut rng = trial_rng(seed, t);
            let area = match source {
                CellAreaSource::Gamma => gamma.sample(&mut rng),
                CellAreaSource::Voronoi => voronoi_cell_area(lambda_b, &mut rng)?,
            };
            let pmf = truncated_poisson(area * per_area, n_e);
            let u: f64 = rng.random();
            let mut acc = 0.0;
            let mut busy = pmf.len() - 1;
            for (k, q) in pmf.iter().enumerate() {
                acc += q;
                if u < acc {
                    busy = k;
                    break;
                }
            }
            Ok(busy as f64 / n_e as f64)
        })
        .collect::<Result<Vec<f64>>>()?;
    let (zeta, std_error) = mean_and_se(&samples);
    Ok(ActivityEstimate {
        zeta,
        std_error,
        ci: (
            (zeta - Z95 * std_error).max(0.0),
            (zeta + Z95 * std_error).min(1.0),
        ),
        cells,
    })
}
