//! Interference kernels and incomplete gamma functions.
//!
//! Both kernels are pieces of `J(x, d) = ∫₀ˣ dt / (1 + t^{1/d})`, whose full
//! value is `π d / sin(π d)`. Any piece over `[1, ∞)` is folded onto `[0, 1]`
//! by `t → t^{-d/(1-d)}`, so quadrature only ever sees a bounded interval
//! with a bounded integrand.

use std::f64::consts::PI;

use statrs::function::gamma::{checked_gamma_lr, checked_gamma_ur, gamma};

use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadratureSpec};

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "delta must lie in (0, 1), got {delta}"
        )))
    }
}

/// `csc(π δ)` for `δ ∈ (0, 1)`.
pub fn csc_pi(delta: f64) -> Result<f64> {
    check_delta(delta)?;
    Ok(1.0 / (PI * delta).sin())
}

/// `∫₀^∞ dt / (1 + t^{1/δ}) = π δ csc(π δ)`.
pub fn kernel_total(delta: f64) -> Result<f64> {
    Ok(PI * delta * csc_pi(delta)?)
}

/// `∫₀ˣ dt / (1 + t^{1/δ})`.
pub fn kernel_head(x: f64, delta: f64, spec: &QuadratureSpec) -> Result<f64> {
    check_delta(delta)?;
    if x.is_nan() {
        return Err(Error::domain("kernel limit is NaN"));
    }
    if x <= 0.0 {
        return Ok(0.0);
    }
    if x <= 1.0 {
        return head_unit(x, delta, spec);
    }
    Ok(kernel_total(delta)? - kernel_tail(x, delta, spec)?)
}

/// `∫ₓ^∞ dt / (1 + t^{1/δ})`.
pub fn kernel_tail(x: f64, delta: f64, spec: &QuadratureSpec) -> Result<f64> {
    check_delta(delta)?;
    if x.is_nan() {
        return Err(Error::domain("kernel limit is NaN"));
    }
    if x < 1.0 {
        return Ok(kernel_total(delta)? - head_unit(x.max(0.0), delta, spec)?);
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    let dual = 1.0 - delta;
    let folded = x.powf(-dual / delta);
    Ok(delta / dual * head_unit(folded, dual, spec)?)
}

fn head_unit(x: f64, delta: f64, spec: &QuadratureSpec) -> Result<f64> {
    debug_assert!((0.0..=1.0).contains(&x));
    if x == 0.0 {
        return Ok(0.0);
    }
    let p = 1.0 / delta;
    integrate(|t| 1.0 / (1.0 + t.powf(p)), 0.0, x, spec)
        .map(|e| e.value)
        .map_err(Error::quad("interference kernel"))
}

fn check_h1_args(w: f64, radius: f64) -> Result<()> {
    if !(w > 0.0 && w.is_finite()) {
        return Err(Error::domain(format!(
            "h1 argument w must be positive, got {w}"
        )));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::domain(format!(
            "h1 radius must be positive, got {radius}"
        )));
    }
    Ok(())
}

/// Intra-cluster kernel `h1(w, R, δ) = ∫₀^{R²/w^δ} dt / (1 + t^{1/δ})`.
///
/// Closed form `arctan(R² / √w)` at `δ = 1/2`, quadrature otherwise.
pub fn h1(w: f64, radius: f64, delta: f64, spec: &QuadratureSpec) -> Result<f64> {
    check_h1_args(w, radius)?;
    if delta == 0.5 {
        return Ok((radius * radius / w.sqrt()).atan());
    }
    h1_quadrature(w, radius, delta, spec)
}

/// `h1` without the `δ = 1/2` shortcut.
pub fn h1_quadrature(w: f64, radius: f64, delta: f64, spec: &QuadratureSpec) -> Result<f64> {
    check_h1_args(w, radius)?;
    kernel_head(radius * radius / w.powf(delta), delta, spec)
}

/// Macro-tier kernel `h2(v, δ) = ∫_{v^{-δ}}^∞ dt / (1 + t^{1/δ})`.
///
/// Closed form `π/2 − arctan(1/√v)` at `δ = 1/2`, quadrature otherwise.
pub fn h2(v: f64, delta: f64, spec: &QuadratureSpec) -> Result<f64> {
    check_h2_args(v)?;
    if delta == 0.5 {
        return Ok(0.5 * PI - (1.0 / v.sqrt()).atan());
    }
    h2_quadrature(v, delta, spec)
}

/// `h2` without the `δ = 1/2` shortcut.
pub fn h2_quadrature(v: f64, delta: f64, spec: &QuadratureSpec) -> Result<f64> {
    check_h2_args(v)?;
    kernel_tail(v.powf(-delta), delta, spec)
}

fn check_h2_args(v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "h2 argument must be positive, got {v}"
        )))
    }
}

fn check_gamma_args(a: f64, x: f64) -> Result<()> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::domain(format!(
            "gamma shape must be positive, got {a}"
        )));
    }
    if !(x >= 0.0) {
        return Err(Error::domain(format!(
            "gamma argument must be nonnegative, got {x}"
        )));
    }
    Ok(())
}

/// Regularized incomplete gammas `(P(a, x), Q(a, x))`.
pub fn regularized_gammas(a: f64, x: f64) -> Result<(f64, f64)> {
    check_gamma_args(a, x)?;
    if x == 0.0 {
        return Ok((0.0, 1.0));
    }
    if x.is_infinite() {
        return Ok((1.0, 0.0));
    }
    let lower = checked_gamma_lr(a, x).map_err(|e| Error::domain(e.to_string()))?;
    let upper = checked_gamma_ur(a, x).map_err(|e| Error::domain(e.to_string()))?;
    Ok((lower, upper))
}

/// Unregularized lower and upper incomplete gammas `(γ(a, x), Γ(a, x))`.
pub fn incomplete_gammas(a: f64, x: f64) -> Result<(f64, f64)> {
    let (p, q) = regularized_gammas(a, x)?;
    let g = gamma(a);
    Ok((p * g, q * g))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn h1_reference_value() {
        let v = h1(5062.5, 50.0, 0.5, &spec()).unwrap();
        assert!((v - 1.542_343_508_455_668).abs() < 1e-12, "{v}");
        let q = h1_quadrature(5062.5, 50.0, 0.5, &spec()).unwrap();
        assert!((q - v).abs() < 1e-9, "{q} vs {v}");
    }

    #[test]
    fn h2_closed_form_matches_quadrature() {
        for v in [1e-4, 0.3, 1.0, 2.5, 1e3] {
            let a = h2(v, 0.5, &spec()).unwrap();
            let b = h2_quadrature(v, 0.5, &spec()).unwrap();
            assert!((a - b).abs() < 1e-9, "v={v}: {a} vs {b}");
        }
        assert!((h2(1.0, 0.5, &spec()).unwrap() - PI / 4.0).abs() < 1e-15);
    }

    #[test]
    fn head_plus_tail_is_total() {
        for delta in [0.3, 0.5, 0.8] {
            for x in [0.01, 0.7, 1.0, 3.0, 400.0] {
                let s = kernel_head(x, delta, &spec()).unwrap()
                    + kernel_tail(x, delta, &spec()).unwrap();
                assert!(
                    (s - kernel_total(delta).unwrap()).abs() < 1e-9,
                    "delta={delta} x={x} s={s} total={}",
                    kernel_total(delta).unwrap()
                );
            }
        }
    }

    #[test]
    fn h1_saturates_to_total() {
        for delta in [0.4, 0.5, 0.7] {
            let total = kernel_total(delta).unwrap();
            let v = h1_quadrature(1e-12, 1e3, delta, &spec()).unwrap();
            assert!((v - total).abs() / total < 1e-6, "delta={delta}");
        }
    }

    #[test]
    fn gamma_reference_values() {
        let (lower, upper) = incomplete_gammas(4.5, 7.0).unwrap();
        assert!((upper - 1.422_853_8).abs() < 1e-6, "{upper}");
        assert!((lower - 10.208_875).abs() < 1e-5, "{lower}");
        let (_, upper) = incomplete_gammas(3.5, 7.0).unwrap();
        assert!((upper - 0.170_093_6).abs() < 1e-6, "{upper}");
    }

    #[test]
    fn gamma_edges() {
        assert_eq!(regularized_gammas(2.0, 0.0).unwrap(), (0.0, 1.0));
        assert_eq!(regularized_gammas(2.0, f64::INFINITY).unwrap(), (1.0, 0.0));
        assert!(regularized_gammas(0.0, 1.0).is_err());
        assert!(regularized_gammas(1.0, -1.0).is_err());
    }

    #[test]
    fn delta_domain() {
        assert!(csc_pi(1.0).is_err());
        assert!(h1(1.0, 1.0, 0.0, &spec()).is_err());
        assert!(h2(0.0, 0.5, &spec()).is_err());
    }
}
