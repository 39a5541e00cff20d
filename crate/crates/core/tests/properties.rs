use epsoliton::analysis::fit_loglog_slope;
use epsoliton::io::format_float;
use epsoliton::kdv::{kdv_residual, uniform_grid, DerivativeMode};
use epsoliton::model::zeta_residual;
use epsoliton::{
    check_admissible, compute_remainders, solve_critical_densities, solve_profile, solve_zeta,
    KdvReference, ModelParams, SolverConfig,
};
use proptest::prelude::*;

/// Picks `ε` inside the admissible window of `(σ, γ)`.
fn admissible(sigma: f64, gamma: f64, frac: f64) -> ModelParams {
    let zeta = solve_zeta(sigma).unwrap();
    let v = (1.0 + sigma).sqrt();
    let j_max = if sigma > 0.0 { zeta * sigma.sqrt() } else { zeta };
    ModelParams::new(sigma, gamma, frac * (j_max - v) / gamma)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn critical_densities_are_ordered(sigma in 0.0f64..6.0, gamma in 0.3f64..3.0, frac in 0.05f64..0.9) {
        let p = admissible(sigma, gamma, frac);
        prop_assert!(check_admissible(&p).admissible);
        let c = solve_critical_densities(&p).unwrap();
        prop_assert!(1.0 < c.n_c && c.n_c < c.n_ce && c.n_ce < c.n_star);
        if let Some(n_s) = c.n_s {
            prop_assert!(c.n_star < n_s);
        }
        let g1 = p.first_integral_potential(1.0).unwrap();
        let gs = p.first_integral_potential(c.n_star).unwrap();
        prop_assert!((gs - g1).abs() <= 1e-12 * g1);
    }

    #[test]
    fn potential_slope_identity(sigma in 0.0f64..6.0, gamma in 0.3f64..3.0, frac in 0.05f64..0.9, n in 0.2f64..3.0) {
        // g'(n) = -h(n) (n - exp H(n))
        let p = admissible(sigma, gamma, frac);
        let lhs = p.g_derivative(n, 1).unwrap();
        let rhs = -p.potential_slope(n).unwrap() * p.charge_density(n).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + rhs.abs()));
    }

    #[test]
    fn zeta_is_a_sign_change(sigma in 0.0f64..8.0) {
        let z = solve_zeta(sigma).unwrap();
        prop_assert!(zeta_residual(sigma, z * (1.0 - 1e-9)) > 0.0);
        prop_assert!(zeta_residual(sigma, z * (1.0 + 1e-9)) < 0.0);
    }

    #[test]
    fn soliton_is_even_and_exact(gamma in 0.2f64..4.0, v in 0.5f64..3.0, xi in -30.0f64..30.0) {
        let r = KdvReference::new(gamma, v);
        prop_assert_eq!(r.value(xi), r.value(-xi));
        prop_assert!(r.value(xi) <= r.amplitude);
        let res = kdv_residual(&r, &[xi], DerivativeMode::Analytic);
        prop_assert!(res <= 1e-12 * (1.0 + r.amplitude * r.width_rate.powi(3)));
    }

    #[test]
    fn seventeen_digits_round_trip(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
        prop_assert_eq!(format_float(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn power_laws_are_recovered(c in 0.01f64..100.0, p in 0.5f64..4.0) {
        let x = [0.1, 0.05, 0.025, 0.0125];
        let y: Vec<f64> = x.iter().map(|e: &f64| c * e.powf(p)).collect();
        prop_assert!((fit_loglog_slope(&x, &y).unwrap().slope - p).abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn solved_waves_keep_their_shape(sigma in 0.0f64..4.0, gamma in 0.5f64..2.0, frac in 0.1f64..0.6) {
        let p = admissible(sigma, gamma, frac);
        let cfg = SolverConfig { dxi: 2e-3, xi_max: 30.0, ..SolverConfig::default() };
        let prof = solve_profile(&p, &cfg).unwrap();
        let report = prof.structure();
        prop_assert!(report.all(), "{:?}", report);
        let field = compute_remainders(&prof, 0.0).unwrap();
        let c = prof.peak_index();
        for k in 1..=c {
            prop_assert_eq!(field.n_r[c - k], field.n_r[c + k]);
            prop_assert_eq!(field.phi_r[c - k], field.phi_r[c + k]);
        }
    }
}

#[test]
fn finite_difference_residual_scales_with_the_step() {
    let r = KdvReference::new(1.0, 1.0);
    let coarse = kdv_residual(&r, &uniform_grid(-10.0, 10.0, 1e-2), DerivativeMode::FiniteDifference);
    let fine = kdv_residual(&r, &uniform_grid(-10.0, 10.0, 5e-3), DerivativeMode::FiniteDifference);
    let ratio = coarse / fine;
    assert!((3.5..4.5).contains(&ratio), "{ratio}");
}
