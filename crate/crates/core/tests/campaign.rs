use epsoliton::analysis::{convergence_campaign, halving_ladder, run_case};
use epsoliton::io::report_to_json;
use epsoliton::{ModelParams, SolverConfig};

#[test]
fn cold_ladder_converges_at_second_order() {
    let ladder = halving_ladder(0.1, 4);
    let report = convergence_campaign(0.0, 1.0, &ladder, &SolverConfig::default(), None).unwrap();
    assert!(report.is_complete());
    for order in report.fitted_order.fields() {
        assert!((1.8..=2.2).contains(&order), "{:?}", report.fitted_order);
    }
    let first = report.derivative_orders[0];
    assert!((1.7..=2.3).contains(&first.n_r), "{first:?}");
    assert!(!report.alpha_flag, "spread {}", report.weighted_constant_spread);
    for rate in &report.tail_rates {
        assert!(rate.relative_error < 0.03, "{rate:?}");
    }
    let scaled: Vec<f64> = report.peak_checks.iter().map(|p| p.scaled_errors().n).collect();
    for w in scaled.windows(2) {
        let r = w[1] / w[0];
        assert!((0.5..=2.0).contains(&r), "{scaled:?}");
    }
}

#[test]
fn hot_ladder_report_is_complete() {
    let ladder = halving_ladder(0.1, 4);
    let report = convergence_campaign(2.0, 1.0, &ladder, &SolverConfig::default(), None).unwrap();
    assert_eq!(report.peak_checks.len(), 4);
    assert!((1.8..=2.2).contains(&report.fitted_order.phi_r));
    let json: serde_json::Value = serde_json::from_str(&report_to_json(&report).unwrap()).unwrap();
    for key in ["params", "epsilons", "sup_norms", "fitted_order", "tail_rates", "peak_checks", "failures"] {
        assert!(json.get(key).is_some(), "missing {key}");
    }
    assert_eq!(json["schema_version"], 1);
    assert_eq!(json["peak_checks"].as_array().unwrap().len(), 4);
    assert!(json["fitted_order"]["n_R"].as_f64().is_some());
    assert_eq!(json["sup_norms"]["derivatives"][1]["order"], 2);
}

#[test]
fn profile_approaches_the_soliton() {
    let cfg = SolverConfig::default();
    let large = run_case(&ModelParams::new(0.0, 1.0, 0.1), &cfg, None).unwrap();
    let small = run_case(&ModelParams::new(0.0, 1.0, 0.01), &cfg, None).unwrap();
    assert!(large.summary.kdv_deviation >= 5.0 * small.summary.kdv_deviation);
}
