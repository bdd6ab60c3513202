use rand::Rng;

use super::sampling::{NetworkRealization, Point, Serving};
use super::SimulationOptions;
use crate::coverage::{femto_split, shared_fraction, Tier};
use crate::error::{Error, Result};
use crate::scenario::{Scenario, SharingMode};

/// Femto channel layout for one sharing mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChannelPlan {
    pub femto_channels: usize,
    /// Channel every cluster may use regardless of nearby MUs.
    pub dedicated: Option<usize>,
    /// Whether non-dedicated channels are subject to MU sensing.
    pub sensing: bool,
}

impl ChannelPlan {
    pub fn new(mode: SharingMode, scenario: &Scenario, options: &SimulationOptions) -> Self {
        let femto_channels = femto_split(mode, scenario) as usize;
        Self {
            femto_channels,
            dedicated: options.dedicated_channel.then(|| femto_channels - 1),
            sensing: mode != SharingMode::Orthogonal && scenario.spectrum.r_m > 0.0,
        }
    }

    pub fn is_sensed(&self, channel: usize) -> bool {
        self.sensing && Some(channel) != self.dedicated
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TaggedChannel {
    /// A femto channel, by index.
    Femto(usize),
    /// A channel with no femto transmissions.
    MacroOnly,
    /// The tagged user has no channel (FU whose cluster is fully blocked).
    Unserved,
}

/// Who transmits on the tagged user's channel in one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelAccess {
    pub channel: TaggedChannel,
    /// Accessible femto channels per cluster.
    pub accessible: Vec<u32>,
    /// MBS activity; the serving MBS of an MU is always active.
    pub mbs_active: Vec<bool>,
    /// Interfering FAPs on the tagged channel as `(cluster, position)`.
    pub cochannel: Vec<(usize, Point)>,
}

/// Uniform bucket grid over a square, for fixed-radius neighbour queries.
struct Grid {
    lo: f64,
    cell: f64,
    n: usize,
    start: Vec<u32>,
    items: Vec<u32>,
}

impl Grid {
    fn new(points: &[Point], half_width: f64, cell: f64) -> Self {
        let cell = cell.max(2.0 * half_width / 512.0);
        let n = ((2.0 * half_width / cell).ceil() as usize).max(1);
        let lo = -half_width;
        let index = |p: &Point| -> usize {
            let ix = (((p[0] - lo) / cell).floor().max(0.0) as usize).min(n - 1);
            let iy = (((p[1] - lo) / cell).floor().max(0.0) as usize).min(n - 1);
            iy * n + ix
        };
        let mut start = vec![0u32; n * n + 1];
        for p in points {
            start[index(p) + 1] += 1;
        }
        for i in 0..n * n {
            start[i + 1] += start[i];
        }
        let mut fill = start.clone();
        let mut items = vec![0u32; points.len()];
        for (k, p) in points.iter().enumerate() {
            let c = index(p);
            items[fill[c] as usize] = k as u32;
            fill[c] += 1;
        }
        Self {
            lo,
            cell,
            n,
            start,
            items,
        }
    }

    fn cell_range(&self, x: f64, r: f64) -> Option<(usize, usize)> {
        let a = ((x - r - self.lo) / self.cell).floor();
        let b = ((x + r - self.lo) / self.cell).floor();
        if b < 0.0 || a > (self.n - 1) as f64 {
            return None;
        }
        Some((a.max(0.0) as usize, (b as usize).min(self.n - 1)))
    }

    fn for_each_near(&self, p: Point, r: f64, points: &[Point], mut f: impl FnMut(usize)) {
        let (Some((x0, x1)), Some((y0, y1))) = (self.cell_range(p[0], r), self.cell_range(p[1], r))
        else {
            return;
        };
        let r2 = r * r;
        for iy in y0..=y1 {
            let row = iy * self.n;
            let (s, e) = (
                self.start[row + x0] as usize,
                self.start[row + x1 + 1] as usize,
            );
            for &k in &self.items[s..e] {
                let q = points[k as usize];
                let (dx, dy) = (q[0] - p[0], q[1] - p[1]);
                if dx * dx + dy * dy < r2 {
                    f(k as usize);
                }
            }
        }
    }
}

/// Marks `blocked[k * F + j]` when an MU on sensed channel `j` lies within
/// `r_m` of cluster `k`'s centre.
fn blocked_matrix(real: &NetworkRealization, r_m: f64, extent: f64) -> Vec<bool> {
    let f = real.plan.femto_channels;
    let mut blocked = vec![false; real.clusters.len() * f];
    if !real.plan.sensing || real.clusters.is_empty() {
        return blocked;
    }
    let centers: Vec<Point> = real.clusters.iter().map(|c| c.center).collect();
    let grid = Grid::new(&centers, extent, r_m);
    for (j, mus) in real.mus.iter().enumerate() {
        if !real.plan.is_sensed(j) {
            continue;
        }
        for &mu in mus {
            grid.for_each_near(mu, r_m, &centers, |k| blocked[k * f + j] = true);
        }
    }
    blocked
}

/// Applies the cognitive access rule, MBS activity and round-robin channel
/// assignment inside each cluster, returning the transmitters that share
/// the tagged user's channel.
///
/// A cluster may use a sensed channel only if no MU on it lies within `r_m`
/// of the cluster centre. Its FAPs are spread over its accessible channels
/// in round-robin order starting from a random slot.
pub fn apply_channel_access<R: Rng + ?Sized>(
    real: &NetworkRealization,
    scenario: &Scenario,
    zeta: f64,
    rng: &mut R,
) -> Result<ChannelAccess> {
    if !(0.0..=1.0).contains(&zeta) {
        return Err(Error::domain(format!(
            "activity must lie in [0, 1], got {zeta}"
        )));
    }
    let plan = real.plan;
    let f = plan.femto_channels;
    let r_m = scenario.spectrum.r_m;
    let extent = real.radius + scenario.network.cluster_radius;
    let blocked = blocked_matrix(real, r_m, extent);
    let open = |k: usize, j: usize| !plan.is_sensed(j) || !blocked[k * f + j];
    let accessible: Vec<u32> = (0..real.clusters.len())
        .map(|k| (0..f).filter(|&j| open(k, j)).count() as u32)
        .collect();

    let mut channel = match (real.tier, real.mode) {
        (Tier::Mu, SharingMode::CoChannel) => TaggedChannel::Femto(0),
        (Tier::Mu, SharingMode::Orthogonal) => TaggedChannel::MacroOnly,
        (Tier::Mu, SharingMode::Partial) => {
            if rng.random_bool(shared_fraction(scenario)) {
                TaggedChannel::Femto(0)
            } else {
                TaggedChannel::MacroOnly
            }
        }
        (Tier::Fu, _) => {
            let n0 = accessible.first().copied().unwrap_or(0);
            if n0 == 0 {
                TaggedChannel::Unserved
            } else {
                let pick = rng.random_range(0..n0 as usize);
                let j = (0..f)
                    .filter(|&j| open(0, j))
                    .nth(pick)
                    .expect("pick < accessible count");
                TaggedChannel::Femto(j)
            }
        }
    };
    if real.tier == Tier::Mu && real.serving == Serving::None {
        channel = TaggedChannel::Unserved;
    }

    let serving_mbs = match real.serving {
        Serving::Mbs { index, .. } => Some(index),
        _ => None,
    };
    let macro_visible = !(real.tier == Tier::Fu && real.mode == SharingMode::Orthogonal);
    let mbs_active = (0..real.mbs.len())
        .map(|i| {
            if Some(i) == serving_mbs {
                true
            } else {
                macro_visible && rng.random_bool(zeta)
            }
        })
        .collect();

    let mut cochannel = Vec::new();
    if let TaggedChannel::Femto(ch) = channel {
        for (k, cluster) in real.clusters.iter().enumerate() {
            if !open(k, ch) || cluster.members.is_empty() {
                continue;
            }
            let n_acc = accessible[k] as usize;
            let pos = (0..ch).filter(|&j| open(k, j)).count();
            let offset = rng.random_range(0..n_acc);
            for (m, &p) in cluster.members.iter().enumerate() {
                if (m + offset) % n_acc == pos {
                    cochannel.push((k, p));
                }
            }
        }
    }

    Ok(ChannelAccess {
        channel,
        accessible,
        mbs_active,
        cochannel,
    })
}
