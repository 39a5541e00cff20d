//! Cross-ε verification: peak asymptotics, remainder convergence orders,
//! tail rates and the sound-speed necessity probe.

use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{saddle_eigenvalue, solve_profile, SolverConfig, StructureReport, Termination, WaveProfile};
use crate::error::{Error, Result};
use crate::kdv::{compute_remainders, default_alpha, weighted_sup_of, FieldNorms, RemainderField};
use crate::model::{check_admissible, solve_critical_densities, ModelParams};

/// Resolution required by [`derivative_remainder_check`] for `k ≥ 1`.
pub const MAX_DERIVATIVE_DXI: f64 = 1e-3;

/// Highest remainder derivative that is checked.
pub const MAX_DERIVATIVE_ORDER: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeakTriple {
    pub n: f64,
    pub u: f64,
    pub phi: f64,
}

impl PeakTriple {
    pub fn as_array(&self) -> [f64; 3] {
        [self.n, self.u, self.phi]
    }
}

/// Peak values against the small-amplitude predictions
/// `(1 + 3γε/V, 3γε, 3γε/V)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeakCheck {
    pub epsilon: f64,
    pub n_star: f64,
    pub u_star: f64,
    pub phi_star: f64,
    pub predicted: PeakTriple,
    pub abs_errors: PeakTriple,
}

impl PeakCheck {
    /// `abs_errors / ε²`.
    pub fn scaled_errors(&self) -> PeakTriple {
        let e2 = self.epsilon * self.epsilon;
        PeakTriple {
            n: self.abs_errors.n / e2,
            u: self.abs_errors.u / e2,
            phi: self.abs_errors.phi / e2,
        }
    }
}

pub fn peak_check(params: &ModelParams) -> Result<PeakCheck> {
    let crit = solve_critical_densities(params)?;
    let n_star = crit.n_star;
    let u_star = params.speed() * (1.0 - 1.0 / n_star);
    let phi_star = params.potential_unchecked(n_star);
    let lead = 3.0 * params.gamma * params.epsilon;
    let predicted = PeakTriple {
        n: 1.0 + lead / params.sound_speed,
        u: lead,
        phi: lead / params.sound_speed,
    };
    Ok(PeakCheck {
        epsilon: params.epsilon,
        n_star,
        u_star,
        phi_star,
        predicted,
        abs_errors: PeakTriple {
            // n* - 1 is compared directly to avoid cancellation against 1
            n: ((n_star - 1.0) - lead / params.sound_speed).abs(),
            u: (u_star - predicted.u).abs(),
            phi: (phi_star - predicted.phi).abs(),
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NecessityOutcome {
    /// `n* - 1` stays away from zero along the family.
    Confirmed,
    /// `n* - 1` tends to zero.
    NotConfirmed,
    /// Some member of the family is inadmissible.
    Vacuous,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NecessityReport {
    pub sound_speed: f64,
    pub epsilons: Vec<f64>,
    pub amplitudes: Vec<f64>,
    /// `min(last n* - 1, linear extrapolation of n* - 1 to ε = 0)`.
    pub limit_gap: f64,
    pub outcome: NecessityOutcome,
}

/// Follows `n* - 1` along `J = V + γε` with a prescribed sound speed `V` and
/// decides whether it converges to zero. Non-convergence is declared when
/// the estimated limit gap is at least ten times the smallest `ε`.
pub fn necessity_probe(
    sigma: f64,
    gamma: f64,
    epsilons: &[f64],
    sound_speed: f64,
) -> Result<NecessityReport> {
    if epsilons.len() < 2 {
        return Err(Error::InvalidConfig("the probe needs at least 2 epsilons".into()));
    }
    let family: Vec<ModelParams> = epsilons
        .iter()
        .map(|&eps| ModelParams::with_sound_speed(sigma, gamma, eps, sound_speed))
        .collect();
    let vacuous = NecessityReport {
        sound_speed,
        epsilons: epsilons.to_vec(),
        amplitudes: Vec::new(),
        limit_gap: f64::NAN,
        outcome: NecessityOutcome::Vacuous,
    };
    if family.iter().any(|p| !check_admissible(p).admissible) {
        return Ok(vacuous);
    }
    let amplitudes = family
        .iter()
        .map(|p| solve_critical_densities(p).map(|c| c.n_star - 1.0))
        .collect::<Result<Vec<_>>>()?;

    let k = amplitudes.len();
    let (e0, e1) = (epsilons[k - 2], epsilons[k - 1]);
    let (a0, a1) = (amplitudes[k - 2], amplitudes[k - 1]);
    let intercept = a1 - e1 * (a0 - a1) / (e0 - e1);
    let limit_gap = a1.min(intercept);
    let smallest = epsilons.iter().cloned().fold(f64::INFINITY, f64::min);
    let outcome = if limit_gap >= 10.0 * smallest {
        NecessityOutcome::Confirmed
    } else {
        NecessityOutcome::NotConfirmed
    };
    Ok(NecessityReport {
        sound_speed,
        epsilons: epsilons.to_vec(),
        amplitudes,
        limit_gap,
        outcome,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual.
    pub rms_residual: f64,
    pub points: usize,
}

/// Ordinary least squares `y = slope x + intercept`.
pub fn fit_line(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(a, b)| a.is_finite() && b.is_finite())
        .map(|(&a, &b)| (a, b))
        .collect();
    let m = pts.len();
    if m < 2 {
        return Err(Error::DegenerateFit { needed: 2, found: m });
    }
    let mf = m as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / mf;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / mf;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if !(sxx > 0.0) {
        return Err(Error::DegenerateFit { needed: 2, found: 1 });
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = pts
        .iter()
        .map(|p| (p.1 - slope * p.0 - intercept).powi(2))
        .sum();
    Ok(LinearFit {
        slope,
        intercept,
        rms_residual: (rss / mf).sqrt(),
        points: m,
    })
}

/// Slope of `ln y` against `ln x`. Non-positive entries are skipped.
pub fn fit_loglog_slope(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    let (lx, ly): (Vec<f64>, Vec<f64>) = x
        .iter()
        .zip(y)
        .filter(|(a, b)| **a > 0.0 && **b > 0.0)
        .map(|(a, b)| (a.ln(), b.ln()))
        .unzip();
    fit_line(&lx, &ly)
}

/// Exponential decay rate of `n - 1` over the final decade of the retained
/// tail (`ξ ≥ 0` only).
pub fn fit_tail_rate(profile: &WaveProfile) -> Result<f64> {
    profile.check_lengths()?;
    let start = profile.peak_index();
    let xi = &profile.xi[start..];
    let excess: Vec<f64> = profile.n[start..].iter().map(|n| n - 1.0).collect();
    let last = *excess.last().expect("non-empty profile");
    let window: Vec<usize> = (0..excess.len())
        .filter(|&i| excess[i] > 0.0 && excess[i] <= 10.0 * last)
        .collect();
    if window.len() < 3 {
        return Err(Error::DegenerateFit {
            needed: 3,
            found: window.len(),
        });
    }
    let x: Vec<f64> = window.iter().map(|&i| xi[i]).collect();
    let y: Vec<f64> = window.iter().map(|&i| excess[i].ln()).collect();
    Ok(-fit_line(&x, &y)?.slope)
}

/// Norms of the `k`-th derivative of the remainders.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivativeNorms {
    pub order: usize,
    pub sup: FieldNorms,
    pub weighted: FieldNorms,
    /// Largest absolute value at `ξ = 0`. Vanishes for odd orders.
    pub at_origin: f64,
}

fn centered_difference(v: &[f64], h: f64, order: usize) -> Vec<f64> {
    match order {
        0 => v.to_vec(),
        1 => v.windows(3).map(|w| (w[2] - w[0]) / (2.0 * h)).collect(),
        _ => v
            .windows(3)
            .map(|w| (w[2] - 2.0 * w[1] + w[0]) / (h * h))
            .collect(),
    }
}

/// Centered second-order differences of the remainders up to `max_order`.
/// Derivatives are taken on the interior nodes.
pub fn derivative_remainder_check(
    field: &RemainderField,
    dxi: f64,
    max_order: usize,
) -> Result<Vec<DerivativeNorms>> {
    if max_order > MAX_DERIVATIVE_ORDER {
        return Err(Error::InvalidConfig(format!(
            "derivative order {max_order} exceeds {MAX_DERIVATIVE_ORDER}"
        )));
    }
    if max_order >= 1 && dxi > MAX_DERIVATIVE_DXI {
        return Err(Error::InsufficientResolution { dxi, order: max_order });
    }
    if field.xi.len() < 3 {
        return Err(Error::GridMismatch(format!("{} samples", field.xi.len())));
    }
    let origin = field.xi.iter().position(|&x| x == 0.0);
    (0..=max_order)
        .map(|k| {
            let xi = if k == 0 {
                &field.xi[..]
            } else {
                &field.xi[1..field.xi.len() - 1]
            };
            let n = centered_difference(&field.n_r, dxi, k);
            let u = centered_difference(&field.u_r, dxi, k);
            let phi = centered_difference(&field.phi_r, dxi, k);
            let sup = |v: &[f64]| v.iter().fold(0.0, |m: f64, x| m.max(x.abs()));
            let at_origin = origin
                .and_then(|i| if k == 0 { Some(i) } else { i.checked_sub(1) })
                .filter(|&i| i < n.len())
                .map(|i| n[i].abs().max(u[i].abs()).max(phi[i].abs()))
                .unwrap_or(f64::NAN);
            Ok(DerivativeNorms {
                order: k,
                sup: FieldNorms {
                    n_r: sup(&n),
                    u_r: sup(&u),
                    phi_r: sup(&phi),
                },
                weighted: FieldNorms {
                    n_r: weighted_sup_of(xi, &n, field.alpha),
                    u_r: weighted_sup_of(xi, &u, field.alpha),
                    phi_r: weighted_sup_of(xi, &phi, field.alpha),
                },
                at_origin,
            })
        })
        .collect()
}

/// Everything measured on one solve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaseSummary {
    pub epsilon: f64,
    pub samples: usize,
    pub termination: Termination,
    pub tail_floor: f64,
    pub sup_norms: FieldNorms,
    pub weighted_norms: FieldNorms,
    pub weighted_sup: f64,
    /// Orders `1..=2`; empty when the grid is too coarse.
    pub derivative_norms: Vec<DerivativeNorms>,
    pub tail_rate: f64,
    pub eigenvalue: f64,
    pub first_integral_drift: f64,
    /// Drift divided by `g(1)`.
    pub relative_drift: f64,
    /// `max |(n - 1)/ε - n_KdV|`.
    pub kdv_deviation: f64,
    pub peak: PeakCheck,
    pub structure: StructureReport,
}

impl CaseSummary {
    pub fn tail_rate_error(&self) -> f64 {
        (self.tail_rate - self.eigenvalue).abs() / self.eigenvalue
    }
}

#[derive(Debug, Clone)]
pub struct CaseResult {
    pub profile: WaveProfile,
    pub remainders: RemainderField,
    pub summary: CaseSummary,
}

/// Solves, mirrors and measures one parameter set. `alpha` defaults to
/// [`default_alpha`].
pub fn run_case(params: &ModelParams, config: &SolverConfig, alpha: Option<f64>) -> Result<CaseResult> {
    let profile = solve_profile(params, config)?;
    let alpha = alpha.unwrap_or_else(|| default_alpha(params));
    let remainders = compute_remainders(&profile, alpha)?;
    let derivative_norms = match derivative_remainder_check(&remainders, profile.dxi, MAX_DERIVATIVE_ORDER) {
        Ok(mut norms) => {
            norms.remove(0);
            norms
        }
        Err(Error::InsufficientResolution { .. }) => Vec::new(),
        Err(err) => return Err(err),
    };
    let sup_norms = remainders.sup_norms();
    let g1 = params.g_unchecked(1.0);
    let summary = CaseSummary {
        epsilon: params.epsilon,
        samples: profile.len(),
        termination: profile.termination,
        tail_floor: profile.tail_floor,
        sup_norms,
        weighted_norms: remainders.weighted_norms(),
        weighted_sup: remainders.weighted_sup,
        derivative_norms,
        tail_rate: fit_tail_rate(&profile)?,
        eigenvalue: saddle_eigenvalue(params),
        first_integral_drift: profile.first_integral_drift,
        relative_drift: profile.first_integral_drift / g1,
        kdv_deviation: sup_norms.n_r / params.epsilon,
        peak: peak_check(params)?,
        structure: profile.structure(),
    };
    Ok(CaseResult {
        profile,
        remainders,
        summary,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaseFailure {
    pub epsilon: f64,
    pub error: String,
}

/// Fitted slopes of `ln(norm)` against `ln ε`, `NaN` when fewer than three
/// cases succeeded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrderFit {
    #[serde(rename = "n_R")]
    pub n_r: f64,
    #[serde(rename = "u_R")]
    pub u_r: f64,
    #[serde(rename = "phi_R")]
    pub phi_r: f64,
    pub weighted: f64,
}

impl OrderFit {
    pub fn fields(&self) -> [f64; 3] {
        [self.n_r, self.u_r, self.phi_r]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailRate {
    pub epsilon: f64,
    pub fitted: f64,
    pub eigenvalue: f64,
    pub relative_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub sigma: f64,
    pub gamma: f64,
    pub sound_speed: f64,
    pub alpha: f64,
    pub config: SolverConfig,
    pub epsilons: Vec<f64>,
    /// Aligned with `epsilons`; `None` where the solve failed.
    pub cases: Vec<Option<CaseSummary>>,
    pub fitted_order: OrderFit,
    /// Index `k - 1` holds the fit for the `k`-th derivative.
    pub derivative_orders: Vec<OrderFit>,
    pub tail_rates: Vec<TailRate>,
    pub peak_checks: Vec<PeakCheck>,
    /// `weighted_sup / ε²` per successful case.
    pub weighted_constants: Vec<f64>,
    /// Largest over smallest weighted constant.
    pub weighted_constant_spread: f64,
    /// Set when the weighted constant drifts by more than a factor 2, which
    /// suggests the weight rate is too large.
    pub alpha_flag: bool,
    pub failures: Vec<CaseFailure>,
}

impl ConvergenceReport {
    pub fn succeeded(&self) -> impl Iterator<Item = &CaseSummary> {
        self.cases.iter().flatten()
    }

    pub fn is_complete(&self) -> bool {
        self.failures.is_empty()
    }
}

pub fn validate_ladder(epsilons: &[f64]) -> Result<()> {
    if epsilons.len() < 3 {
        return Err(Error::InvalidConfig(format!(
            "need ≥ 3 epsilons, got {}",
            epsilons.len()
        )));
    }
    if epsilons.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
        return Err(Error::InvalidConfig("epsilons must be finite and > 0".into()));
    }
    if epsilons.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidConfig("epsilons must be strictly decreasing".into()));
    }
    Ok(())
}

fn fit_orders(epsilons: &[f64], norms: &[Option<(FieldNorms, f64)>]) -> OrderFit {
    let column = |pick: &dyn Fn(&(FieldNorms, f64)) -> f64| -> f64 {
        let (x, y): (Vec<f64>, Vec<f64>) = epsilons
            .iter()
            .zip(norms)
            .filter_map(|(&e, n)| n.as_ref().map(|n| (e, pick(n))))
            .unzip();
        if x.len() < 3 {
            return f64::NAN;
        }
        fit_loglog_slope(&x, &y).map(|f| f.slope).unwrap_or(f64::NAN)
    };
    OrderFit {
        n_r: column(&|n| n.0.n_r),
        u_r: column(&|n| n.0.u_r),
        phi_r: column(&|n| n.0.phi_r),
        weighted: column(&|n| n.1),
    }
}

/// Runs every `ε` of the ladder in parallel and fits the scaling laws.
///
/// Inadmissible members and malformed ladders are errors; numerical failures
/// of individual solves are recorded in `failures`.
pub fn convergence_campaign(
    sigma: f64,
    gamma: f64,
    epsilons: &[f64],
    config: &SolverConfig,
    alpha: Option<f64>,
) -> Result<ConvergenceReport> {
    validate_ladder(epsilons)?;
    config.validate()?;
    let base = ModelParams::new(sigma, gamma, epsilons[0]);
    for &eps in epsilons {
        let verdict = check_admissible(&base.at_epsilon(eps));
        if !verdict.admissible {
            return Err(Error::Inadmissible(verdict));
        }
    }
    let alpha = alpha.unwrap_or_else(|| default_alpha(&base));
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidConfig(format!("alpha must be >= 0, got {alpha}")));
    }

    let outcomes: Vec<Result<CaseSummary>> = epsilons
        .par_iter()
        .map(|&eps| run_case(&base.at_epsilon(eps), config, Some(alpha)).map(|r| r.summary))
        .collect();

    let mut cases = Vec::with_capacity(outcomes.len());
    let mut failures = Vec::new();
    for (&eps, outcome) in epsilons.iter().zip(outcomes) {
        match outcome {
            Ok(summary) => cases.push(Some(summary)),
            Err(err) => {
                failures.push(CaseFailure {
                    epsilon: eps,
                    error: err.to_string(),
                });
                cases.push(None);
            }
        }
    }

    let k0: Vec<Option<(FieldNorms, f64)>> = cases
        .iter()
        .map(|c| c.as_ref().map(|c| (c.sup_norms, c.weighted_sup)))
        .collect();
    let fitted_order = fit_orders(epsilons, &k0);
    let derivative_orders = (1..=MAX_DERIVATIVE_ORDER)
        .map(|k| {
            let norms: Vec<Option<(FieldNorms, f64)>> = cases
                .iter()
                .map(|c| {
                    c.as_ref()
                        .and_then(|c| c.derivative_norms.iter().find(|d| d.order == k))
                        .map(|d| (d.sup, d.weighted.max()))
                })
                .collect();
            fit_orders(epsilons, &norms)
        })
        .collect();

    let succeeded: Vec<&CaseSummary> = cases.iter().flatten().collect();
    let tail_rates = succeeded
        .iter()
        .map(|c| TailRate {
            epsilon: c.epsilon,
            fitted: c.tail_rate,
            eigenvalue: c.eigenvalue,
            relative_error: c.tail_rate_error(),
        })
        .collect();
    let peak_checks = succeeded.iter().map(|c| c.peak).collect();
    let weighted_constants: Vec<f64> = succeeded
        .iter()
        .map(|c| c.weighted_sup / (c.epsilon * c.epsilon))
        .collect();
    let spread = if weighted_constants.is_empty() {
        f64::NAN
    } else {
        let hi = weighted_constants.iter().cloned().fold(f64::MIN, f64::max);
        let lo = weighted_constants.iter().cloned().fold(f64::MAX, f64::min);
        hi / lo
    };

    Ok(ConvergenceReport {
        sigma,
        gamma,
        sound_speed: base.sound_speed,
        alpha,
        config: *config,
        epsilons: epsilons.to_vec(),
        cases,
        fitted_order,
        derivative_orders,
        tail_rates,
        peak_checks,
        weighted_constants,
        weighted_constant_spread: spread,
        alpha_flag: !(spread <= 2.0),
        failures,
    })
}

/// `ε₀, ε₀/2, …` with `count` members.
pub fn halving_ladder(first: f64, count: usize) -> Vec<f64> {
    (0..count).map(|i| first / 2f64.powi(i as i32)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn peak_check_cold() {
        let pc = peak_check(&ModelParams::new(0.0, 1.0, 0.1)).unwrap();
        assert_relative_eq!(pc.n_star, 1.363_266_820_154_048_7, max_relative = 1e-12);
        assert_relative_eq!(pc.predicted.n, 1.3, max_relative = 1e-15);
        assert_relative_eq!(pc.u_star, 0.293_114_668_575_517_5, max_relative = 1e-13);
        assert_relative_eq!(pc.phi_star, 0.279_468_030_966_001_5, max_relative = 1e-13);
        let scaled = pc.scaled_errors();
        assert!(scaled.n > 1.0 && scaled.n < 10.0, "{scaled:?}");
    }

    #[test]
    fn peak_prediction_hot() {
        let pc = peak_check(&ModelParams::new(2.0, 1.0, 0.05)).unwrap();
        assert_relative_eq!(pc.predicted.n - 1.0, 0.15 / 3f64.sqrt(), max_relative = 1e-13);
        assert_relative_eq!(pc.n_star, 1.095_054_005_538_529_9, max_relative = 1e-12);
    }

    #[test]
    fn peak_check_rejects_inadmissible() {
        assert!(peak_check(&ModelParams::new(0.0, 1.0, 0.9)).is_err());
    }

    #[test]
    fn probe_outcomes() {
        let ladder = [0.1, 0.05, 0.025];
        let wrong = necessity_probe(0.0, 1.0, &ladder, 1.2).unwrap();
        assert_eq!(wrong.outcome, NecessityOutcome::Confirmed);
        assert!(wrong.amplitudes.iter().all(|&a| a > 0.05));
        let right = necessity_probe(0.0, 1.0, &ladder, 1.0).unwrap();
        assert_eq!(right.outcome, NecessityOutcome::NotConfirmed);
        let vacuous = necessity_probe(0.0, 1.0, &ladder, 1.6).unwrap();
        assert_eq!(vacuous.outcome, NecessityOutcome::Vacuous);
    }

    #[test]
    fn line_fits() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y = [3.0, 5.0, 7.0, 9.0];
        let fit = fit_line(&x, &y).unwrap();
        assert_relative_eq!(fit.slope, 2.0, max_relative = 1e-14);
        assert_relative_eq!(fit.intercept, 1.0, max_relative = 1e-14);
        let eps = [0.1, 0.05, 0.025];
        let sq: Vec<f64> = eps.iter().map(|e| 7.0 * e * e).collect();
        assert_relative_eq!(fit_loglog_slope(&eps, &sq).unwrap().slope, 2.0, max_relative = 1e-12);
        assert!(matches!(fit_line(&[1.0], &[1.0]), Err(Error::DegenerateFit { .. })));
        assert!(fit_line(&[1.0, 1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn ladder_validation() {
        assert!(validate_ladder(&[0.1, 0.05, 0.025]).is_ok());
        let short = validate_ladder(&[0.1, 0.05]).unwrap_err();
        assert!(short.to_string().contains("need ≥ 3 epsilons"));
        assert!(validate_ladder(&[0.1, 0.1, 0.05]).is_err());
        assert!(validate_ladder(&[0.1, 0.05, -0.01]).is_err());
        assert_eq!(halving_ladder(0.1, 4), vec![0.1, 0.05, 0.025, 0.0125]);
    }

    #[test]
    fn tail_rate_tracks_eigenvalue() {
        let p = ModelParams::new(0.0, 1.0, 0.1);
        let prof = solve_profile(&p, &SolverConfig::default()).unwrap();
        let rate = fit_tail_rate(&prof).unwrap();
        assert!((rate / saddle_eigenvalue(&p) - 1.0).abs() < 0.03, "{rate}");
    }

    #[test]
    fn derivative_check_basics() {
        let p = ModelParams::new(0.0, 1.0, 0.05);
        let case = run_case(&p, &SolverConfig::default(), None).unwrap();
        let norms = derivative_remainder_check(&case.remainders, case.profile.dxi, 2).unwrap();
        assert_eq!(norms.len(), 3);
        assert_eq!(norms[0].weighted.max(), case.remainders.weighted_sup);
        assert!(norms[1].at_origin < 1e-12, "{}", norms[1].at_origin);
        assert!(norms[2].sup.max() > 0.0);
        let coarse = derivative_remainder_check(&case.remainders, 2e-3, 1).unwrap_err();
        assert!(matches!(coarse, Error::InsufficientResolution { order: 1, .. }));
        assert!(derivative_remainder_check(&case.remainders, 2e-3, 0).is_ok());
        assert!(derivative_remainder_check(&case.remainders, 1e-3, 3).is_err());
    }

    #[test]
    fn case_summary_is_consistent() {
        let p = ModelParams::new(2.0, 1.0, 0.1);
        let case = run_case(&p, &SolverConfig::default(), None).unwrap();
        let s = &case.summary;
        assert!(s.structure.all());
        assert_eq!(s.samples, case.profile.len());
        assert_eq!(s.derivative_norms.len(), 2);
        assert_relative_eq!(s.eigenvalue, 1.620_986_961_104_920_1, max_relative = 1e-13);
        assert!(s.relative_drift <= 1e-8);
        assert_eq!(s.kdv_deviation, s.sup_norms.n_r / 0.1);
    }

    #[test]
    fn campaign_rejects_bad_ladders() {
        let cfg = SolverConfig::default();
        assert!(convergence_campaign(0.0, 1.0, &[0.1, 0.05], &cfg, None)
            .unwrap_err()
            .is_invalid_input());
        let err = convergence_campaign(0.0, 1.0, &[0.9, 0.5, 0.1], &cfg, None).unwrap_err();
        assert!(matches!(err, Error::Inadmissible(_)));
    }

    #[test]
    fn campaign_records_numerical_failures() {
        let cfg = SolverConfig::default().with_dxi(0.5);
        let report = convergence_campaign(0.0, 1.0, &[0.1, 0.05, 0.025], &cfg, None).unwrap();
        assert_eq!(report.failures.len(), 3);
        assert!(report.cases.iter().all(Option::is_none));
        assert!(report.fitted_order.n_r.is_nan());
    }
}
