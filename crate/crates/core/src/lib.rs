//! Coverage analysis of a two-tier cellular network with a Poisson macro
//! tier and a clustered, cognitive femto tier.
//!
//! Macro base stations (MBSs) form a PPP; femto access points (FAPs) form a
//! Matérn cluster process and avoid channels used by macro users (MUs)
//! within a sensing radius `r_m`. The crate computes SIR coverage for macro
//! and femto users (FUs) under co-channel, orthogonal and partial spectrum
//! sharing, couples coverage to MBS load through an activity fixed point,
//! locates the density where co-channel sharing stops paying off, and checks
//! all of it against a spatial Monte Carlo simulator.
//!
//! ```
//! use hetnet_core::{coverage_fu, QuadratureSpec, Scenario, SharingMode};
//!
//! let s = Scenario::default();
//! let p = coverage_fu(&s, SharingMode::CoChannel, 60.0, 1.0, 0.5, &QuadratureSpec::default()).unwrap();
//! assert!((p - 0.902).abs() < 1e-3);
//! ```

// `!(x > 0.0)` deliberately rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod coverage;
pub mod design;
pub mod error;
pub mod laplace;
pub mod load;
pub mod montecarlo;
pub mod quadrature;
pub mod scenario;
pub mod special;

pub use coverage::{
    avg_rate, coverage, coverage_curve, coverage_fu, coverage_mu, default_threshold_grid_db,
    mcs_probabilities, mean_channels, CoverageCurve, CoverageQuery, CurvePoint, Source, Tier,
};
pub use design::{
    critical_density_case1, critical_density_numerical, effective_densities, CriticalMethod,
    CriticalPointResult, Crossover, EffectiveDensities, CRITICAL_RANGE,
};
pub use error::{Error, Result};
pub use load::{
    access_probability, accessible_channels_pmf, activity_closed_form, activity_linear,
    effective_cluster_mean, erlang_occupancy, solve_activity, ActivityModel, ActivitySolution,
    SolverFlag, SolverOptions,
};
pub use montecarlo::{SimulationOptions, SimulationWindow};
pub use quadrature::{QuadratureError, QuadratureSpec};
pub use scenario::{
    db_to_linear, dbm_to_watts, linear_to_db, validate, McsTable, NetworkParams, Scenario,
    SharingMode, SpectrumConfig, TrafficParams, ValidationErrors,
};
