use std::f64::consts::PI;

use hetnet_core::quadrature::{integrate, integrate_to_infinity, integrate_with_breaks};
use hetnet_core::special::{
    h1, h1_quadrature, h2, h2_quadrature, incomplete_gammas, kernel_head, kernel_tail,
    kernel_total, regularized_gammas,
};
use hetnet_core::QuadratureSpec;
use proptest::prelude::*;

fn spec() -> QuadratureSpec {
    QuadratureSpec::default()
}

/// Composite Simpson on `[a, b]`, refined until two levels agree.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let mut n = 64;
    let mut prev = f64::NAN;
    loop {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        let cur = s * h / 3.0;
        if (cur - prev).abs() <= 1e-12 * cur.abs() || n >= 1 << 22 {
            return cur;
        }
        prev = cur;
        n *= 2;
    }
}

#[test]
fn kernel_head_matches_simpson() {
    for delta in [0.25, 0.4, 0.5, 2.0 / 3.0, 0.8] {
        for x in [0.05, 0.5, 1.0, 2.0, 10.0] {
            let p = 1.0 / delta;
            let oracle = simpson(|t| 1.0 / (1.0 + t.powf(p)), 0.0, x);
            let v = kernel_head(x, delta, &spec()).unwrap();
            assert!(
                (v - oracle).abs() <= 1e-9 * oracle,
                "delta={delta} x={x}: {v} vs {oracle}"
            );
        }
    }
}

#[test]
fn kernel_total_matches_reflection_formula() {
    // ∫₀^∞ dt/(1+t^{1/δ}) = δ Γ(δ) Γ(1-δ); Γ(1/2)² = π.
    assert!((kernel_total(0.5).unwrap() - PI / 2.0).abs() < 1e-15);
    for delta in [0.3, 0.5, 0.7] {
        let p = 1.0 / delta;
        let direct = integrate_to_infinity(|t| 1.0 / (1.0 + t.powf(p)), 0.0, &spec())
            .unwrap()
            .value;
        let total = kernel_total(delta).unwrap();
        let exact = PI * delta / (PI * delta).sin();
        assert!(
            (exact - total).abs() < 1e-13 * total,
            "delta={delta}: {exact} vs {total}"
        );
        // The t^{-1/δ} tail decays slowly, so the brute-force integral is looser.
        assert!(
            (direct - total).abs() < 1e-6 * total,
            "delta={delta}: {direct} vs {total}"
        );
    }
}

#[test]
fn h1_and_h2_at_quarter_exponent() {
    // α = 8 gives δ = 1/4; compare against direct Simpson on the defining limits.
    let delta = 0.25;
    let (w, r): (f64, f64) = (300.0, 20.0);
    let limit = r * r / w.powf(delta);
    let oracle = simpson(|t| 1.0 / (1.0 + t.powi(4)), 0.0, limit);
    let v = h1(w, r, delta, &spec()).unwrap();
    assert!((v - oracle).abs() < 1e-9, "{v} vs {oracle}");

    let v2: f64 = 0.7;
    let lower = v2.powf(-delta);
    let tail = integrate_to_infinity(|t| 1.0 / (1.0 + t.powi(4)), lower, &spec())
        .unwrap()
        .value;
    assert!((h2(v2, delta, &spec()).unwrap() - tail).abs() < 1e-9);
}

#[test]
fn kernel_edges() {
    assert_eq!(kernel_head(0.0, 0.5, &spec()).unwrap(), 0.0);
    assert_eq!(kernel_tail(f64::INFINITY, 0.5, &spec()).unwrap(), 0.0);
    assert!(kernel_head(f64::NAN, 0.5, &spec()).is_err());
    assert!(h1(-1.0, 1.0, 0.5, &spec()).is_err());
    assert!(h1(1.0, 0.0, 0.5, &spec()).is_err());
    assert!(h2(f64::INFINITY, 0.5, &spec()).is_err());
}

#[test]
fn gamma_recurrence() {
    // Γ(a+1, x) = a Γ(a, x) + x^a e^{-x}; γ(a+1, x) = a γ(a, x) − x^a e^{-x}.
    for a in [0.5, 1.5, 3.5, 7.0] {
        for x in [0.1, 1.0, 3.5, 7.0, 20.0] {
            let (lo, up) = incomplete_gammas(a, x).unwrap();
            let (lo1, up1) = incomplete_gammas(a + 1.0, x).unwrap();
            let term = x.powf(a) * (-x).exp();
            assert!((up1 - (a * up + term)).abs() <= 1e-10 * up1.max(1e-300) + 1e-14);
            assert!((lo1 - (a * lo - term)).abs() <= 1e-10 * lo1.max(1e-300) + 1e-14);
        }
    }
}

#[test]
fn gamma_matches_direct_integral() {
    for (a, x) in [(3.5, 7.0), (4.5, 7.0), (4.5, 0.3), (3.5, 30.0)] {
        let lower = integrate(|t| t.powf(a - 1.0) * (-t).exp(), 0.0, x, &spec())
            .unwrap()
            .value;
        let (lo, _) = incomplete_gammas(a, x).unwrap();
        assert!((lo - lower).abs() < 1e-9 * lower, "a={a} x={x}");
    }
}

#[test]
fn exponential_special_case() {
    // Q(1, x) = e^{-x}.
    for x in [0.01, 1.0, 5.0, 40.0] {
        let (p, q) = regularized_gammas(1.0, x).unwrap();
        assert!((q - (-x).exp()).abs() < 1e-14);
        assert!((p + q - 1.0).abs() < 1e-14);
    }
}

#[test]
fn breakpoints_do_not_change_value() {
    let f = |t: f64| (t - 1.0).abs().sqrt();
    let plain = integrate(f, 0.0, 3.0, &spec()).unwrap().value;
    let split = integrate_with_breaks(f, &[0.0, 1.0, 3.0], &spec())
        .unwrap()
        .value;
    let exact = 2.0 / 3.0 * (1.0 + 2f64.powf(1.5));
    assert!((split - exact).abs() < 1e-12);
    assert!((plain - exact).abs() < 1e-9);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn h1_arctan_form(lw in -3.0f64..7.0, r in 0.5f64..300.0) {
        let w = 10f64.powf(lw);
        let closed = h1(w, r, 0.5, &spec()).unwrap();
        let quad = h1_quadrature(w, r, 0.5, &spec()).unwrap();
        prop_assert!((closed - quad).abs() <= 1e-9 * closed.max(1e-12));
        prop_assert!(closed > 0.0 && closed < PI / 2.0 + 1e-15);
    }

    #[test]
    fn h2_arctan_form(lv in -5.0f64..5.0) {
        let v = 10f64.powf(lv);
        let closed = h2(v, 0.5, &spec()).unwrap();
        let quad = h2_quadrature(v, 0.5, &spec()).unwrap();
        prop_assert!((closed - quad).abs() <= 1e-9 * closed);
    }

    #[test]
    fn h2_increasing_in_argument(lv in -3.0f64..3.0, delta in 0.3f64..0.8) {
        let v = 10f64.powf(lv);
        let a = h2(v, delta, &spec()).unwrap();
        let b = h2(v * 1.5, delta, &spec()).unwrap();
        prop_assert!(b > a);
        prop_assert!(b < kernel_total(delta).unwrap());
    }

    #[test]
    fn regularized_gammas_complement(a in 0.2f64..20.0, x in 0.0f64..60.0) {
        let (p, q) = regularized_gammas(a, x).unwrap();
        prop_assert!((p + q - 1.0).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&p));
    }
}
