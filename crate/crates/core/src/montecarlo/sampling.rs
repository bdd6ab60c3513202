use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use super::access::ChannelPlan;
use super::{SimulationOptions, SimulationWindow};
use crate::coverage::Tier;
use crate::error::{Error, Result};
use crate::scenario::{per_channel_mu_density, Scenario, SharingMode};

pub type Point = [f64; 2];

#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    pub center: Point,
    /// Absolute FAP positions, excluding the tagged FU's serving FAP.
    pub members: Vec<Point>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Serving {
    /// Nearest MBS, always active.
    Mbs { index: usize, distance: f64 },
    /// FAP of the tagged cluster at distance r0.
    Fap { position: Point },
    /// No MBS inside the window.
    None,
}

/// One draw of the network around a tagged user at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkRealization {
    pub tier: Tier,
    pub mode: SharingMode,
    pub plan: ChannelPlan,
    pub mbs: Vec<Point>,
    /// For the FU tier, `clusters[0]` is the tagged cluster centred at the origin.
    pub clusters: Vec<Cluster>,
    /// Active MUs per femto channel; empty for channels without sensing.
    /// For the MU tier the tagged MU is included on channel 0.
    pub mus: Vec<Vec<Point>>,
    pub serving: Serving,
    pub radius: f64,
}

pub(crate) fn poisson_count<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> usize {
    match counter(mean) {
        Some(d) => d.sample(rng) as usize,
        None => 0,
    }
}

fn counter(mean: f64) -> Option<Poisson<f64>> {
    (mean > 0.0).then(|| Poisson::new(mean).expect("positive finite mean"))
}

pub(crate) fn uniform_in_disk<R: Rng + ?Sized>(rng: &mut R, radius: f64) -> Point {
    loop {
        let x = 2.0 * rng.random::<f64>() - 1.0;
        let y = 2.0 * rng.random::<f64>() - 1.0;
        if x * x + y * y < 1.0 {
            return [radius * x, radius * y];
        }
    }
}

pub(crate) fn ppp_disk<R: Rng + ?Sized>(rng: &mut R, density: f64, radius: f64) -> Vec<Point> {
    let n = poisson_count(rng, density * PI * radius * radius);
    (0..n).map(|_| uniform_in_disk(rng, radius)).collect()
}

fn add(a: Point, b: Point) -> Point {
    [a[0] + b[0], a[1] + b[1]]
}

/// Draws MBSs, Matérn femto clusters and per-channel MUs for one trial.
///
/// MBSs fill the window disk; cluster parents and MUs extend past it by the
/// cluster radius and by the guard, so clusters near the edge see their
/// whole sensing neighbourhood. The femto tier is left out for an MU under
/// orthogonal sharing, where it cannot interfere.
pub fn sample_realization<R: Rng + ?Sized>(
    scenario: &Scenario,
    mode: SharingMode,
    tier: Tier,
    window: &SimulationWindow,
    options: &SimulationOptions,
    rng: &mut R,
) -> Result<NetworkRealization> {
    scenario.check()?;
    window.validate(scenario)?;
    let net = &scenario.network;
    if tier == Tier::Mu && !(net.lambda_b > 0.0) {
        return Err(Error::domain("MU tier needs a positive MBS density"));
    }
    let plan = ChannelPlan::new(mode, scenario, options);
    let radius = window.radius;
    let big_r = net.cluster_radius;

    let mbs = ppp_disk(rng, net.lambda_b, radius);
    // An orthogonal MU never shares a channel with the femto tier.
    let femto_visible = !(tier == Tier::Mu && mode == SharingMode::Orthogonal);
    let members_of = counter(net.cluster_size);
    let cluster_count = |rng: &mut R| members_of.as_ref().map_or(0, |d| d.sample(rng) as usize);

    let mut clusters = Vec::new();
    let mut serving = Serving::None;
    if tier == Tier::Fu {
        let theta = 2.0 * PI * rng.random::<f64>();
        let r0 = net.link_distance;
        serving = Serving::Fap {
            position: [r0 * theta.cos(), r0 * theta.sin()],
        };
        let k = cluster_count(rng);
        let members = (0..k).map(|_| uniform_in_disk(rng, big_r)).collect();
        clusters.push(Cluster {
            center: [0.0, 0.0],
            members,
        });
    }
    let parents = if femto_visible {
        ppp_disk(rng, net.lambda_f, radius + big_r)
    } else {
        Vec::new()
    };
    for center in parents {
        let k = cluster_count(rng);
        let members = (0..k)
            .map(|_| add(center, uniform_in_disk(rng, big_r)))
            .collect();
        clusters.push(Cluster { center, members });
    }

    let mu_density = per_channel_mu_density(&scenario.traffic);
    let mu_radius = radius + big_r + window.guard;
    let mut mus: Vec<Vec<Point>> = (0..plan.femto_channels)
        .map(|j| {
            if femto_visible && plan.is_sensed(j) {
                ppp_disk(rng, mu_density, mu_radius)
            } else {
                Vec::new()
            }
        })
        .collect();

    if tier == Tier::Mu {
        if let Some(first) = mus.first_mut() {
            if plan.is_sensed(0) {
                first.push([0.0, 0.0]);
            }
        }
        serving = mbs
            .iter()
            .enumerate()
            .map(|(i, p)| (i, p[0].hypot(p[1])))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(index, distance)| Serving::Mbs { index, distance })
            .unwrap_or(Serving::None);
    }

    Ok(NetworkRealization {
        tier,
        mode,
        plan,
        mbs,
        clusters,
        mus,
        serving,
        radius,
    })
}
