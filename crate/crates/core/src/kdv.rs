//! KdV soliton reference and the remainder fields.
//!
//! `n_KdV(ξ) = (3γ/V) sech²(sqrt(Vγ/2) ξ)` is the traveling solution of
//! `-γ n' + V n n' + n'''/(2V) = 0`. The remainders of a computed wave are
//!
//! ```text
//! n_R = n - 1 - ε n_KdV,   u_R = u - ε V n_KdV,   φ_R = φ - ε n_KdV
//! ```

use serde::Serialize;

use crate::dynamics::WaveProfile;
use crate::error::{Error, Result};
use crate::model::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KdvReference {
    pub gamma: f64,
    pub sound_speed: f64,
    pub amplitude: f64,
    pub width_rate: f64,
}

impl KdvReference {
    pub fn new(gamma: f64, sound_speed: f64) -> Self {
        Self {
            gamma,
            sound_speed,
            amplitude: 3.0 * gamma / sound_speed,
            width_rate: (0.5 * sound_speed * gamma).sqrt(),
        }
    }

    pub fn for_params(params: &ModelParams) -> Self {
        Self::new(params.gamma, params.sound_speed)
    }

    /// `(sech², tanh)` of `width_rate · ξ`.
    fn sech2_tanh(&self, xi: f64) -> (f64, f64) {
        let x = self.width_rate * xi;
        let sech = 1.0 / x.cosh();
        (sech * sech, x.tanh())
    }

    pub fn value(&self, xi: f64) -> f64 {
        self.sech2_tanh(xi).0 * self.amplitude
    }

    /// `[n, n', n'', n''']` from the closed-form derivatives of `sech²`.
    pub fn derivatives(&self, xi: f64) -> [f64; 4] {
        let (s, t) = self.sech2_tanh(xi);
        let a = self.amplitude;
        let k = self.width_rate;
        [
            a * s,
            -2.0 * a * k * s * t,
            2.0 * a * k * k * s * (2.0 - 3.0 * s),
            -8.0 * a * k.powi(3) * s * t * (1.0 - 3.0 * s),
        ]
    }

    fn residual_from(&self, n: f64, d1: f64, d3: f64) -> f64 {
        -self.gamma * d1 + self.sound_speed * n * d1 + d3 / (2.0 * self.sound_speed)
    }
}

/// Evaluates `n_KdV` at `ξ`.
pub fn n_kdv(reference: &KdvReference, xi: f64) -> f64 {
    reference.value(xi)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DerivativeMode {
    Analytic,
    /// Centered second-order differences with the given step.
    FiniteDifference,
}

/// Largest absolute residual of the traveling KdV equation over `xi_grid`.
///
/// In finite-difference mode the step is the grid spacing (taken from the
/// first two nodes).
pub fn kdv_residual(reference: &KdvReference, xi_grid: &[f64], mode: DerivativeMode) -> f64 {
    match mode {
        DerivativeMode::Analytic => xi_grid
            .iter()
            .map(|&xi| {
                let [n, d1, _, d3] = reference.derivatives(xi);
                reference.residual_from(n, d1, d3).abs()
            })
            .fold(0.0, f64::max),
        DerivativeMode::FiniteDifference => {
            let h = match xi_grid {
                [a, b, ..] => (b - a).abs(),
                _ => return 0.0,
            };
            let f = |x: f64| reference.value(x);
            xi_grid
                .iter()
                .map(|&x| {
                    let d1 = (f(x + h) - f(x - h)) / (2.0 * h);
                    let d3 = (f(x + 2.0 * h) - 2.0 * f(x + h) + 2.0 * f(x - h) - f(x - 2.0 * h))
                        / (2.0 * h * h * h);
                    reference.residual_from(f(x), d1, d3).abs()
                })
                .fold(0.0, f64::max)
        }
    }
}

/// Uniform grid on `[lo, hi]` with spacing close to `step`.
pub fn uniform_grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let cells = ((hi - lo) / step).round().max(1.0) as usize;
    (0..=cells)
        .map(|i| lo + (hi - lo) * i as f64 / cells as f64)
        .collect()
}

/// Default weight rate `sqrt(2Vγ)/2`, half the common tail rate of the wave
/// and the soliton.
pub fn default_alpha(params: &ModelParams) -> f64 {
    0.5 * (2.0 * params.sound_speed * params.gamma).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RemainderField {
    pub xi: Vec<f64>,
    pub n_r: Vec<f64>,
    pub u_r: Vec<f64>,
    pub phi_r: Vec<f64>,
    /// The soliton sampled on the same grid.
    pub n_kdv: Vec<f64>,
    pub alpha: f64,
    /// `sup e^{α|ξ|/2} max(|n_R|, |u_R|, |φ_R|)`.
    pub weighted_sup: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FieldNorms {
    #[serde(rename = "n_R")]
    pub n_r: f64,
    #[serde(rename = "u_R")]
    pub u_r: f64,
    #[serde(rename = "phi_R")]
    pub phi_r: f64,
}

impl FieldNorms {
    pub fn as_array(&self) -> [f64; 3] {
        [self.n_r, self.u_r, self.phi_r]
    }

    pub fn max(&self) -> f64 {
        self.n_r.max(self.u_r).max(self.phi_r)
    }
}

pub(crate) fn weighted_sup_of(xi: &[f64], values: &[f64], alpha: f64) -> f64 {
    xi.iter()
        .zip(values)
        .map(|(&x, &v)| (0.5 * alpha * x.abs()).exp() * v.abs())
        .fold(0.0, f64::max)
}

impl RemainderField {
    pub fn sup_norms(&self) -> FieldNorms {
        let sup = |v: &[f64]| v.iter().fold(0.0, |m: f64, &x| m.max(x.abs()));
        FieldNorms {
            n_r: sup(&self.n_r),
            u_r: sup(&self.u_r),
            phi_r: sup(&self.phi_r),
        }
    }

    pub fn weighted_norms(&self) -> FieldNorms {
        FieldNorms {
            n_r: weighted_sup_of(&self.xi, &self.n_r, self.alpha),
            u_r: weighted_sup_of(&self.xi, &self.u_r, self.alpha),
            phi_r: weighted_sup_of(&self.xi, &self.phi_r, self.alpha),
        }
    }

    /// `sup |u_R - V n_R|`.
    pub fn mass_defect(&self, sound_speed: f64) -> f64 {
        self.u_r
            .iter()
            .zip(&self.n_r)
            .map(|(u, n)| (u - sound_speed * n).abs())
            .fold(0.0, f64::max)
    }
}

pub fn compute_remainders(profile: &WaveProfile, alpha: f64) -> Result<RemainderField> {
    profile.check_lengths()?;
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidConfig(format!("alpha must be >= 0, got {alpha}")));
    }
    let p = &profile.params;
    let reference = KdvReference::for_params(p);
    let eps = p.epsilon;
    let v = p.sound_speed;
    let n_kdv: Vec<f64> = profile.xi.iter().map(|&x| reference.value(x)).collect();
    let n_r: Vec<f64> = profile
        .n
        .iter()
        .zip(&n_kdv)
        .map(|(n, k)| n - 1.0 - eps * k)
        .collect();
    let u_r: Vec<f64> = profile
        .u
        .iter()
        .zip(&n_kdv)
        .map(|(u, k)| u - eps * v * k)
        .collect();
    let phi_r: Vec<f64> = profile
        .phi
        .iter()
        .zip(&n_kdv)
        .map(|(phi, k)| phi - eps * k)
        .collect();
    let weighted_sup = profile
        .xi
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let m = n_r[i].abs().max(u_r[i].abs()).max(phi_r[i].abs());
            (0.5 * alpha * x.abs()).exp() * m
        })
        .fold(0.0, f64::max);
    Ok(RemainderField {
        xi: profile.xi.clone(),
        n_r,
        u_r,
        phi_r,
        n_kdv,
        alpha,
        weighted_sup,
    })
}

/// The coefficient `F_ε = 2Vγ - 2V² n_KdV - V² φ_R/ε` of the remainder
/// equation for `φ_R`, sampled on the remainder grid.
pub fn remainder_coefficient(field: &RemainderField, params: &ModelParams) -> Vec<f64> {
    let v = params.sound_speed;
    let v2 = v * v;
    field
        .n_kdv
        .iter()
        .zip(&field.phi_r)
        .map(|(k, phi_r)| 2.0 * v * params.gamma - 2.0 * v2 * k - v2 * phi_r / params.epsilon)
        .collect()
}

/// Smallest `ξ ≥ 0` on the grid beyond which `F_ε > Vγ` holds at every
/// remaining sample. Diagnostic only.
pub fn coefficient_threshold(field: &RemainderField, params: &ModelParams) -> Option<f64> {
    let f = remainder_coefficient(field, params);
    let bound = params.sound_speed * params.gamma;
    let mut threshold = None;
    for (i, &x) in field.xi.iter().enumerate().rev() {
        if x < 0.0 {
            break;
        }
        if f[i] > bound {
            threshold = Some(x);
        } else {
            break;
        }
    }
    threshold
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{solve_profile, SolverConfig};
    use approx::assert_relative_eq;

    #[test]
    fn soliton_values() {
        let r = KdvReference::new(1.0, 1.0);
        assert_eq!(n_kdv(&r, 0.0), 3.0);
        // 3 sech²(1/√2), 40-digit reference
        assert_relative_eq!(n_kdv(&r, 1.0), 1.887_870_820_904_561, max_relative = 1e-15);
        assert!(n_kdv(&r, 800.0) == 0.0 && n_kdv(&r, -800.0) == 0.0);
        assert_eq!(n_kdv(&r, 2.5), n_kdv(&r, -2.5));
    }

    #[test]
    fn reference_invariants() {
        let r = KdvReference::new(2.0, 3f64.sqrt());
        assert_relative_eq!(r.amplitude, 6.0 / 3f64.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(r.width_rate.powi(2), 3f64.sqrt(), max_relative = 1e-15);
    }

    #[test]
    fn analytic_derivatives_match_differences() {
        let r = KdvReference::new(1.3, 1.2);
        let h = 1e-4;
        for &x in &[-2.0, -0.3, 0.0, 0.7, 3.1] {
            let [_, d1, d2, d3] = r.derivatives(x);
            let fd1 = (r.value(x + h) - r.value(x - h)) / (2.0 * h);
            let [_, e1, _, _] = r.derivatives(x + h);
            let [_, e0, _, _] = r.derivatives(x - h);
            let fd2 = (e1 - e0) / (2.0 * h);
            let [_, _, g1, _] = r.derivatives(x + h);
            let [_, _, g0, _] = r.derivatives(x - h);
            let fd3 = (g1 - g0) / (2.0 * h);
            assert!((d1 - fd1).abs() < 1e-7);
            assert!((d2 - fd2).abs() < 1e-7);
            assert!((d3 - fd3).abs() < 1e-6);
        }
    }

    #[test]
    fn analytic_residual_vanishes() {
        let grid = uniform_grid(-10.0, 10.0, 1e-3);
        for (gamma, v) in [(1.0, 1.0), (2.0, 3f64.sqrt()), (1.0, 3f64.sqrt()), (2.0, 1.0)] {
            let r = KdvReference::new(gamma, v);
            let res = kdv_residual(&r, &grid, DerivativeMode::Analytic);
            assert!(res <= 1e-12, "gamma={gamma} V={v}: {res:e}");
        }
    }

    #[test]
    fn finite_difference_residual_is_small() {
        let grid = uniform_grid(-10.0, 10.0, 1e-3);
        let r = KdvReference::new(1.0, 1.0);
        let res = kdv_residual(&r, &grid, DerivativeMode::FiniteDifference);
        assert!(res <= 1e-5, "{res:e}");
    }

    #[test]
    fn remainders_of_a_solved_wave() {
        let p = ModelParams::new(0.0, 1.0, 0.1);
        let prof = solve_profile(&p, &SolverConfig::default()).unwrap();
        let field = compute_remainders(&prof, 0.0).unwrap();
        let sup = field.sup_norms();
        assert!(sup.n_r <= 0.05 * 2.0, "{sup:?}");
        assert!(sup.max() <= 0.1);
        let c = prof.peak_index();
        assert_eq!(field.n_r[c], prof.n[c] - 1.0 - 0.1 * 3.0);
        assert_eq!(field.weighted_sup, sup.max());
        for k in 1..=c {
            assert_eq!(field.n_r[c - k], field.n_r[c + k]);
            assert_eq!(field.u_r[c - k], field.u_r[c + k]);
            assert_eq!(field.phi_r[c - k], field.phi_r[c + k]);
        }
        let tail = field.n_r.last().unwrap().abs();
        assert!(tail < 1e-3);
        assert!(field.mass_defect(p.sound_speed) <= 10.0 * 0.01);
    }

    #[test]
    fn grid_mismatch_is_reported() {
        let p = ModelParams::new(0.0, 1.0, 0.1);
        let mut prof = solve_profile(&p, &SolverConfig::default()).unwrap();
        prof.u.pop();
        assert!(matches!(compute_remainders(&prof, 0.5), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn coefficient_turns_positive_in_the_tail() {
        let p = ModelParams::new(0.0, 1.0, 0.05);
        let prof = solve_profile(&p, &SolverConfig::default()).unwrap();
        let field = compute_remainders(&prof, default_alpha(&p)).unwrap();
        let f = remainder_coefficient(&field, &p);
        let c = prof.peak_index();
        assert!(f[c] < 0.0);
        let xi1 = coefficient_threshold(&field, &p).unwrap();
        assert!(xi1 > 0.0 && xi1 < 5.0, "{xi1}");
    }
}
