//! Spatial Monte Carlo validation of the analytic model.
//!
//! Each trial draws a fresh network around a tagged user at the origin,
//! applies the cognitive access rule, and records one SIR sample. Trial `t`
//! uses a ChaCha8 generator seeded from the run seed with stream `t`, and all
//! reductions are order-independent, so results do not depend on the number
//! of worker threads.

mod access;
mod estimate;
mod sampling;

pub use access::{apply_channel_access, ChannelAccess, ChannelPlan, TaggedChannel};
pub use estimate::{
    estimate_activity, estimate_coverage, estimate_laplace, sample_sir, voronoi_cell_area,
    wilson_interval, ActivityEstimate, CellAreaSource, Interference, LtEstimate,
};
pub use sampling::{sample_realization, Cluster, NetworkRealization, Point, Serving};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scenario::Scenario;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationWindow {
    /// Radius of the disk in which MBSs are drawn (m).
    pub radius: f64,
    /// Extra margin for cluster parents and MUs so edge clusters see their
    /// full neighbourhood (m).
    pub guard: f64,
    pub seed: u64,
    pub trials: usize,
}

impl SimulationWindow {
    /// Window of radius `max(10/√(π λ), r_m + 5R)`, with `λ` the MBS density,
    /// or the parent density when there are no MBSs.
    pub fn for_scenario(scenario: &Scenario, seed: u64, trials: usize) -> Self {
        let net = &scenario.network;
        let r_m = scenario.spectrum.r_m;
        let floor = r_m + 5.0 * net.cluster_radius;
        let lambda = if net.lambda_b > 0.0 {
            net.lambda_b
        } else {
            net.lambda_f
        };
        let radius = if lambda > 0.0 {
            (10.0 / (std::f64::consts::PI * lambda).sqrt()).max(floor)
        } else {
            floor
        };
        Self {
            radius,
            guard: net.cluster_radius + r_m,
            seed,
            trials,
        }
    }

    pub fn validate(&self, scenario: &Scenario) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::domain("at least one trial required"));
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::domain("window radius must be positive"));
        }
        if !(self.guard >= 0.0 && self.guard.is_finite()) {
            return Err(Error::domain("window guard must be nonnegative"));
        }
        let lb = scenario.network.lambda_b;
        if lb > 0.0 && self.radius < 10.0 / (std::f64::consts::PI * lb).sqrt() * (1.0 - 1e-12) {
            return Err(Error::domain(format!(
                "window radius {} is below ten mean MBS spacings",
                self.radius
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimulationOptions {
    /// Reserve one femto channel that clusters use regardless of nearby MUs.
    pub dedicated_channel: bool,
}

impl Default for SimulationOptions {
    fn default() -> Self {
        Self {
            dedicated_channel: true,
        }
    }
}

/// Generator for trial `trial` of a run seeded with `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}
