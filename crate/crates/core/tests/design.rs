use hetnet_core::{
    critical_density_case1, critical_density_numerical, effective_densities, ActivityModel,
    CriticalMethod, Crossover, McsTable, QuadratureSpec, Scenario, SharingMode, SolverOptions,
    CRITICAL_RANGE,
};

fn q() -> QuadratureSpec {
    QuadratureSpec::default()
}

#[test]
fn closed_form_reference() {
    let s = Scenario::default();
    let r = critical_density_case1(&s, &q()).unwrap();
    assert!(
        (r.lambda_f_c - 6.309_573e-3).abs() < 1e-8,
        "{}",
        r.lambda_f_c
    );
    assert_eq!(r.method, CriticalMethod::ClosedForm);
    assert!(r.valid);
}

#[test]
fn closed_form_validity_flag() {
    let mut s = Scenario::default();
    s.traffic.lambda_m_arrivals = 1e-2;
    assert!(!critical_density_case1(&s, &q()).unwrap().valid);
}

#[test]
fn closed_form_scales_with_split() {
    let mut s = Scenario::default();
    let base = critical_density_case1(&s, &q()).unwrap().lambda_f_c;
    s.spectrum.n_f = 5;
    let fewer = critical_density_case1(&s, &q()).unwrap().lambda_f_c;
    // N_F/(N−N_F): 10/10 → 5/15.
    assert!((fewer / base - 1.0 / 3.0).abs() < 1e-12);
}

#[test]
fn numerical_crossover_agrees_under_linear_assumptions() {
    let mut s = Scenario::default();
    s.spectrum.r_m = 0.0;
    s.traffic.mcs = McsTable::from_db(&[0.0]).unwrap();
    s.traffic.rth_over_b = 1.0;
    let opts = SolverOptions {
        model: ActivityModel::Linear,
        ..SolverOptions::default()
    };
    let closed = critical_density_case1(&s, &q()).unwrap().lambda_f_c;
    match critical_density_numerical(&s, CRITICAL_RANGE, &opts, &q()).unwrap() {
        Crossover::Found(r) => {
            assert!(
                (r.lambda_f_c / closed - 1.0).abs() < 2e-3,
                "{} vs {closed}",
                r.lambda_f_c
            );
            let (a, b) = r.bracket.unwrap();
            assert!(a <= r.lambda_f_c && r.lambda_f_c <= b);
        }
        other => panic!("expected a crossover, got {other:?}"),
    }
}

#[test]
fn narrow_range_reports_dominant_mode() {
    let mut s = Scenario::default();
    s.spectrum.r_m = 0.0;
    s.traffic.mcs = McsTable::from_db(&[0.0]).unwrap();
    s.traffic.rth_over_b = 1.0;
    let opts = SolverOptions {
        model: ActivityModel::Linear,
        ..SolverOptions::default()
    };
    match critical_density_numerical(&s, (1e-6, 1e-4), &opts, &q()).unwrap() {
        Crossover::NoCrossover { dominant, .. } => assert_eq!(dominant, SharingMode::CoChannel),
        other => panic!("{other:?}"),
    }
    assert!(critical_density_numerical(&s, (1e-3, 1e-4), &opts, &q()).is_err());
}

#[test]
fn effective_density_table() {
    let s = Scenario::default();
    let zeta = 0.4;
    let co = effective_densities(SharingMode::CoChannel, &s, zeta).unwrap();
    let orth = effective_densities(SharingMode::Orthogonal, &s, zeta).unwrap();
    assert!((co.mbs_to_mu - zeta * s.network.lambda_b).abs() < 1e-18);
    assert_eq!(orth.fap_to_mu, 0.0);
    assert_eq!(orth.mbs_to_fu, 0.0);
    assert!(co.fap_to_mu > 0.0);

    // Sensing thins clusters and crowds their channels by the same factor,
    // so the co-channel FAP density seen by an MU does not depend on r_m.
    let mut t = s.clone();
    t.spectrum.r_m = 0.0;
    let at0 = effective_densities(SharingMode::CoChannel, &t, zeta).unwrap();
    assert_eq!(at0.fap_to_mu, co.fap_to_mu);
    assert!((at0.fap_to_mu - s.network.lambda_f * s.network.cluster_size / 20.0).abs() < 1e-18);
    assert!((at0.intra_cluster_mean - s.network.cluster_size / 20.0).abs() < 1e-12);
    assert!(co.intra_cluster_mean > at0.intra_cluster_mean);
}
