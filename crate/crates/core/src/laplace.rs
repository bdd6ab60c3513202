//! Laplace transforms of the aggregate interference seen by a tagged user.
//!
//! All transforms assume Rayleigh fading and path loss `d^{-α}`; `s` is the
//! transform variable in W⁻¹. Powers reaching a user through a wall carry
//! the loss `χ`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quadrature::{integrate_with_breaks, QuadratureSpec};
use crate::scenario::{per_channel_mu_density, NetworkParams, TrafficParams};
use crate::special::{csc_pi, h1, h2};

/// Arguments shared by the transforms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LtInputs {
    pub s: f64,
    /// MBS activity ζ.
    pub zeta: f64,
    /// Cognitive radius r_m.
    pub r_m: f64,
    /// Tagged MU to serving MBS distance.
    pub r: f64,
}

impl LtInputs {
    pub fn validate(&self) -> Result<()> {
        check_s(self.s)?;
        check_zeta(self.zeta)?;
        if !(self.r_m >= 0.0 && self.r_m.is_finite()) {
            return Err(Error::domain(format!(
                "r_m must be nonnegative, got {}",
                self.r_m
            )));
        }
        if !(self.r >= 0.0 && self.r.is_finite()) {
            return Err(Error::domain(format!(
                "serving distance must be nonnegative, got {}",
                self.r
            )));
        }
        Ok(())
    }
}

fn check_s(s: f64) -> Result<()> {
    if s >= 0.0 && s.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "transform variable must be nonnegative, got {s}"
        )))
    }
}

fn check_zeta(zeta: f64) -> Result<()> {
    if (0.0..=1.0).contains(&zeta) {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "activity must lie in [0, 1], got {zeta}"
        )))
    }
}

fn check_split(split: u32) -> Result<f64> {
    if split == 0 {
        Err(Error::domain("channel split must be positive"))
    } else {
        Ok(split as f64)
    }
}

/// Mean co-channel FAPs in the tagged cluster, `c / (N p)` with
/// `1/p = exp(π λ_m r_m² / μ)`.
pub fn cluster_cochannel_mean(
    r_m: f64,
    split: u32,
    net: &NetworkParams,
    traffic: &TrafficParams,
) -> Result<f64> {
    let n = check_split(split)?;
    Ok(net.cluster_size / n * (PI * per_channel_mu_density(traffic) * r_m * r_m).exp())
}

/// Active MBSs (density `ζ λ_B`) seen indoors by the FU.
pub fn lt_macro_to_fu(s: f64, zeta: f64, net: &NetworkParams) -> Result<f64> {
    check_s(s)?;
    check_zeta(zeta)?;
    let d = net.delta();
    let expo =
        PI * PI * d * net.lambda_b * zeta * (s * net.wall_loss * net.p_b).powf(d) * csc_pi(d)?;
    Ok((-expo).exp())
}

/// Co-channel FAPs of the FU's own cluster.
pub fn lt_intra_cluster(
    s: f64,
    r_m: f64,
    split: u32,
    net: &NetworkParams,
    traffic: &TrafficParams,
    quad: &QuadratureSpec,
) -> Result<f64> {
    check_s(s)?;
    if s == 0.0 {
        return Ok(1.0);
    }
    let c_tilde = cluster_cochannel_mean(r_m, split, net, traffic)?;
    if c_tilde == 0.0 {
        return Ok(1.0);
    }
    let d = net.delta();
    let w = s * net.wall_loss * net.p_f;
    let radius = net.cluster_radius;
    let expo = c_tilde / (radius * radius) * w.powf(d) * h1(w, radius, d, quad)?;
    Ok((-expo).exp())
}

/// Co-channel FAPs of all other clusters.
pub fn lt_inter_cluster(s: f64, split: u32, net: &NetworkParams) -> Result<f64> {
    check_s(s)?;
    let n = check_split(split)?;
    let d = net.delta();
    let expo = PI * PI * d * net.lambda_f * net.cluster_size / n
        * (s * net.wall_loss * net.p_f).powf(d)
        * csc_pi(d)?;
    Ok((-expo).exp())
}

/// Intersection area of the disks `B(0, a)` and `B(t, b)`.
pub fn lens_area(t: f64, a: f64, b: f64) -> f64 {
    if t >= a + b {
        return 0.0;
    }
    if t <= (a - b).abs() {
        let m = a.min(b);
        return PI * m * m;
    }
    // Sum of two circular segments, each from its half-angle at the centre.
    // atan2 and the series keep tiny overlaps accurate.
    let root = ((-t + a + b) * (t + a - b) * (t - a + b) * (t + a + b))
        .max(0.0)
        .sqrt();
    let theta_a = root.atan2(t * t + a * a - b * b);
    let theta_b = root.atan2(t * t + b * b - a * a);
    segment(a, theta_a) + segment(b, theta_b)
}

/// Area of the circular segment of radius `r` cut by a chord subtending `2θ`.
fn segment(r: f64, theta: f64) -> f64 {
    let x = 2.0 * theta;
    let x_minus_sin = if x < 1e-2 {
        let x3 = x * x * x;
        x3 / 6.0 - x3 * x * x / 120.0 + x3 * x3 * x / 5040.0
    } else {
        x - x.sin()
    };
    0.5 * r * r * x_minus_sin
}

/// Interference from a Matérn cluster process with no parents inside
/// `B(0, r_m)`.
///
/// For unit parent density and one point per cluster, the Laplace exponent
/// is `∫∫_{|y|>r_m} f(x − y) k_w(x) dx dy` with `f` uniform on `B(0, R)` and
/// `k_w(x) = 1 / (1 + |x|^α / w)`. It equals the unrestricted value
/// `π² δ w^δ csc(π δ)` minus the contribution of the excluded parents,
/// `D(w) = (2/R²) ∫ A(t) t k_w(t) dt` with `A` the lens area of `B(0, R)`
/// and `B(t, r_m)`. `D` is a bounded integral over `[0, R + r_m]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HoleClusterKernel {
    pub cluster_radius: f64,
    pub r_m: f64,
    pub alpha: f64,
}

impl HoleClusterKernel {
    pub fn new(cluster_radius: f64, r_m: f64, alpha: f64) -> Self {
        Self {
            cluster_radius,
            r_m,
            alpha,
        }
    }

    /// Excluded-parent correction `D(w)`.
    pub fn excluded(&self, w: f64, quad: &QuadratureSpec) -> Result<f64> {
        if self.r_m == 0.0 || w == 0.0 {
            return Ok(0.0);
        }
        let (big_r, r_m, alpha) = (self.cluster_radius, self.r_m, self.alpha);
        let inv_w = 1.0 / w;
        let kink = (big_r - r_m).abs();
        let end = big_r + r_m;
        let integrand = |t: f64| lens_area(t, big_r, r_m) * t / (1.0 + t.powf(alpha) * inv_w);
        let est = integrate_with_breaks(integrand, &[0.0, kink, end], quad)
            .map_err(Error::quad("excluded cluster parents"))?;
        Ok(2.0 / (big_r * big_r) * est.value)
    }

    /// Full exponent per unit cluster-point density.
    pub fn exponent(&self, w: f64, quad: &QuadratureSpec) -> Result<f64> {
        let d = 2.0 / self.alpha;
        let full = PI * PI * d * w.powf(d) * csc_pi(d)?;
        Ok((full - self.excluded(w, quad)?).max(0.0))
    }
}

/// Co-channel FAPs seen outdoors by an MU with a sensing hole of radius `r_m`.
pub fn lt_fap_to_mu(
    s: f64,
    r_m: f64,
    split: u32,
    net: &NetworkParams,
    quad: &QuadratureSpec,
) -> Result<f64> {
    check_s(s)?;
    let n = check_split(split)?;
    let density = net.lambda_f * net.cluster_size / n;
    if density == 0.0 || s == 0.0 {
        return Ok(1.0);
    }
    let w = s * net.wall_loss * net.p_f;
    let kernel = HoleClusterKernel::new(net.cluster_radius, r_m, net.alpha);
    Ok((-density * kernel.exponent(w, quad)?).exp())
}

/// Active MBSs beyond the serving distance `r`.
pub fn lt_mbs_to_mu(
    s: f64,
    r: f64,
    zeta: f64,
    net: &NetworkParams,
    quad: &QuadratureSpec,
) -> Result<f64> {
    check_s(s)?;
    check_zeta(zeta)?;
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::domain(format!(
            "serving distance must be positive, got {r}"
        )));
    }
    if s == 0.0 || zeta == 0.0 || net.lambda_b == 0.0 {
        return Ok(1.0);
    }
    let d = net.delta();
    let sp = s * net.p_b;
    let v = sp / r.powf(2.0 / d);
    let expo = PI * net.lambda_b * zeta * sp.powf(d) * h2(v, d, quad)?;
    Ok((-expo).exp())
}

/// First and second moments of the intra-cluster interference at an FU at
/// distance `y` from its cluster centre, ignoring FAPs closer than `epsilon`.
///
/// Mean `(c̃ / (π R²)) ∫ P_F d^{-α} dx` over the cluster disk; second moment
/// `2 (c̃ / (π R²)) ∫ P_F² d^{-2α} dx + mean²` (Rayleigh `E[h²] = 2`).
pub fn intra_cluster_moments(
    y: f64,
    epsilon: f64,
    r_m: f64,
    split: u32,
    net: &NetworkParams,
    traffic: &TrafficParams,
    quad: &QuadratureSpec,
) -> Result<(f64, f64)> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::domain(
            "guard distance must be positive; the moments diverge at zero",
        ));
    }
    let big_r = net.cluster_radius;
    if !(0.0..=big_r).contains(&y) {
        return Err(Error::domain(format!(
            "offset {y} lies outside the cluster disk"
        )));
    }
    let c_tilde = cluster_cochannel_mean(r_m, split, net, traffic)?;
    let scale = c_tilde / (PI * big_r * big_r);
    let end = big_r + y;
    if epsilon >= end {
        return Ok((0.0, 0.0));
    }
    let inner = (big_r - y).max(epsilon);
    let arc = |d: f64| -> f64 {
        if d <= big_r - y {
            2.0 * PI * d
        } else if d >= end || y == 0.0 {
            0.0
        } else {
            let c = ((d * d + y * y - big_r * big_r) / (2.0 * d * y)).clamp(-1.0, 1.0);
            2.0 * d * c.acos()
        }
    };
    let alpha = net.alpha;
    let pts = [epsilon, inner, end];
    let m1 = integrate_with_breaks(|d| d.powf(-alpha) * arc(d), &pts, quad)
        .map_err(Error::quad("intra-cluster mean"))?
        .value;
    let m2 = integrate_with_breaks(|d| d.powf(-2.0 * alpha) * arc(d), &pts, quad)
        .map_err(Error::quad("intra-cluster second moment"))?
        .value;
    let mean = scale * net.p_f * m1;
    let second = 2.0 * scale * net.p_f * net.p_f * m2 + mean * mean;
    Ok((mean, second))
}

/// `max / min` of the intra-cluster mean over FU offsets in `[0, R/2]`.
pub fn moment_location_spread(
    epsilon: f64,
    r_m: f64,
    split: u32,
    net: &NetworkParams,
    traffic: &TrafficParams,
    quad: &QuadratureSpec,
) -> Result<f64> {
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for i in 0..=20 {
        let y = net.cluster_radius * 0.5 * i as f64 / 20.0;
        let (m, _) = intra_cluster_moments(y, epsilon, r_m, split, net, traffic, quad)?;
        lo = lo.min(m);
        hi = hi.max(m);
    }
    Ok(hi / lo)
}
