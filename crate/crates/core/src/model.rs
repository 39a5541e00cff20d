//! Parameters, scalar functions of the density, admissibility and the
//! critical constants that organize the phase plane.
//!
//! With `J = V + γε` the frame speed, the traveling-wave reduction expresses
//! velocity and potential through the density alone:
//!
//! ```text
//! H(n) = J²/2 (1 - 1/n²) - σ ln n        potential, φ = H(n)
//! h(n) = H'(n) = J²/n³ - σ/n
//! g(n) = J²/n + σ n + exp(H(n))          first-integral potential
//! l(n) = ln n - H(n)                     zero at stationary densities
//! ```

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::roots::{bisect, expand_until};

/// The tuple `(σ, γ, ε)` together with the ion-sound speed `V`.
///
/// [`ModelParams::new`] fixes `V = sqrt(1 + σ)`. [`ModelParams::with_sound_speed`]
/// allows any other `V`; only the necessity probe needs that.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelParams {
    pub sigma: f64,
    pub gamma: f64,
    pub epsilon: f64,
    pub sound_speed: f64,
}

impl ModelParams {
    pub fn new(sigma: f64, gamma: f64, epsilon: f64) -> Self {
        Self {
            sigma,
            gamma,
            epsilon,
            sound_speed: (1.0 + sigma).sqrt(),
        }
    }

    pub fn with_sound_speed(sigma: f64, gamma: f64, epsilon: f64, sound_speed: f64) -> Self {
        Self {
            sigma,
            gamma,
            epsilon,
            sound_speed,
        }
    }

    /// Frame speed `J = V + γε`.
    pub fn speed(&self) -> f64 {
        self.sound_speed + self.gamma * self.epsilon
    }

    /// Same `(σ, γ, V)` at a different amplitude parameter.
    pub fn at_epsilon(&self, epsilon: f64) -> Self {
        Self { epsilon, ..*self }
    }

    /// `J² - 1 - σ`, computed without cancellation as `γε(2V + γε) + (V² - 1 - σ)`.
    pub fn supersonic_excess(&self) -> f64 {
        let v = self.sound_speed;
        let ge = self.gamma * self.epsilon;
        ge * (2.0 * v + ge) + (v * v - 1.0 - self.sigma)
    }

    pub fn bernoulli_potential(&self, n: f64) -> Result<f64> {
        check_density("H", n)?;
        Ok(self.potential_unchecked(n))
    }

    pub fn potential_slope(&self, n: f64) -> Result<f64> {
        check_density("h", n)?;
        Ok(self.slope_unchecked(n))
    }

    pub fn first_integral_potential(&self, n: f64) -> Result<f64> {
        check_density("g", n)?;
        Ok(self.g_unchecked(n))
    }

    pub fn stationarity_defect(&self, n: f64) -> Result<f64> {
        check_density("l", n)?;
        Ok(self.defect_unchecked(n))
    }

    /// Ion minus electron density, `q(n) = n - exp(H(n))`.
    pub fn charge_density(&self, n: f64) -> Result<f64> {
        check_density("q", n)?;
        Ok(self.charge_unchecked(n))
    }

    /// `k`-th derivative of `g` at `n`, for `k` in `1..=4`.
    pub fn g_derivative(&self, n: f64, k: usize) -> Result<f64> {
        check_density("g derivative", n)?;
        let j2 = self.speed().powi(2);
        let e = self.potential_unchecked(n).exp();
        let [h, h1, h2, h3] = self.slope_derivatives(n);
        let value = match k {
            1 => -j2 / (n * n) + self.sigma + e * h,
            2 => 2.0 * j2 / n.powi(3) + e * (h * h + h1),
            3 => -6.0 * j2 / n.powi(4) + e * (h.powi(3) + 3.0 * h * h1 + h2),
            4 => {
                24.0 * j2 / n.powi(5)
                    + e * (h.powi(4) + 6.0 * h * h * h1 + 3.0 * h1 * h1 + 4.0 * h * h2 + h3)
            }
            _ => {
                return Err(Error::InvalidConfig(format!(
                    "g derivative order must be 1..=4, got {k}"
                )))
            }
        };
        Ok(value)
    }

    pub(crate) fn potential_unchecked(&self, n: f64) -> f64 {
        let j2 = self.speed().powi(2);
        0.5 * j2 * (1.0 - 1.0 / (n * n)) - self.sigma * n.ln()
    }

    pub(crate) fn slope_unchecked(&self, n: f64) -> f64 {
        let j2 = self.speed().powi(2);
        j2 / n.powi(3) - self.sigma / n
    }

    pub(crate) fn g_unchecked(&self, n: f64) -> f64 {
        let j2 = self.speed().powi(2);
        j2 / n + self.sigma * n + self.potential_unchecked(n).exp()
    }

    pub(crate) fn defect_unchecked(&self, n: f64) -> f64 {
        n.ln() - self.potential_unchecked(n)
    }

    pub(crate) fn charge_unchecked(&self, n: f64) -> f64 {
        n - self.potential_unchecked(n).exp()
    }

    /// `[h, h', h'', h''']` at `n`.
    pub(crate) fn slope_derivatives(&self, n: f64) -> [f64; 4] {
        let j2 = self.speed().powi(2);
        let s = self.sigma;
        [
            j2 / n.powi(3) - s / n,
            -3.0 * j2 / n.powi(4) + s / (n * n),
            12.0 * j2 / n.powi(5) - 2.0 * s / n.powi(3),
            -60.0 * j2 / n.powi(6) + 6.0 * s / n.powi(4),
        ]
    }
}

fn check_density(function: &'static str, n: f64) -> Result<()> {
    if n > 0.0 && n.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain { function, value: n })
    }
}

/// Residual of the equation that defines `ζ_σ`.
///
/// For `σ > 0` this is the logarithmic form
/// `f(z) = σ ln z + ln σ + ln((z-1)² + 1/σ) - σ(z²-1)/2`, positive on
/// `(1, ζ_σ)`. For `σ = 0` it is `z² + 1 - exp(z²/2)`, positive on `(0, ζ_0)`.
pub fn zeta_residual(sigma: f64, z: f64) -> f64 {
    if sigma > 0.0 {
        sigma * z.ln() + sigma.ln() + ((z - 1.0).powi(2) + 1.0 / sigma).ln()
            - 0.5 * sigma * (z * z - 1.0)
    } else {
        z * z + 1.0 - (0.5 * z * z).exp()
    }
}

/// The upper admissibility constant `ζ_σ` (or `ζ_0` when `σ = 0`).
pub fn solve_zeta(sigma: f64) -> Result<f64> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "sigma must be finite and >= 0, got {sigma}"
        )));
    }
    let lo = if sigma > 0.0 {
        ((1.0 + sigma) / sigma).sqrt() * (1.0 + 1e-9)
    } else {
        1.0
    };
    let f = |z: f64| zeta_residual(sigma, z);
    if f(lo) <= 0.0 {
        return Err(Error::BracketFailure { what: "zeta" });
    }
    let hi = expand_until(lo, |z| f(z) < 0.0, "zeta")?;
    bisect(f, lo, hi, "zeta")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Admissibility {
    Ok,
    SpeedTooLow,
    SpeedTooHigh,
    ParameterDomainViolation,
}

impl Admissibility {
    pub fn label(self) -> &'static str {
        match self {
            Admissibility::Ok => "ok",
            Admissibility::SpeedTooLow => "speed-too-low",
            Admissibility::SpeedTooHigh => "speed-too-high",
            Admissibility::ParameterDomainViolation => "parameter-domain-violation",
        }
    }
}

/// Outcome of the speed condition. `speed` is the quantity tested against
/// the open interval `(lower, upper)`: `J/sqrt(σ)` when `σ > 0`, `J` when
/// `σ = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AdmissibilityVerdict {
    pub admissible: bool,
    pub sigma: f64,
    pub reason: Admissibility,
    pub speed: f64,
    pub lower: f64,
    pub upper: f64,
}

impl fmt::Display for AdmissibilityVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let quantity = if self.sigma > 0.0 { "J/sqrt(sigma)" } else { "J" };
        match self.reason {
            Admissibility::Ok => write!(
                f,
                "ok: {} < {quantity} = {} < {}",
                self.lower, self.speed, self.upper
            ),
            Admissibility::SpeedTooLow => write!(
                f,
                "speed-too-low: {quantity} = {} must exceed {}",
                self.speed, self.lower
            ),
            Admissibility::SpeedTooHigh => write!(
                f,
                "speed-too-high: {quantity} = {} must be below zeta = {}",
                self.speed, self.upper
            ),
            Admissibility::ParameterDomainViolation => write!(
                f,
                "parameter-domain-violation: need sigma >= 0, gamma > 0, epsilon >= 0, V > 0"
            ),
        }
    }
}

pub fn check_admissible(params: &ModelParams) -> AdmissibilityVerdict {
    let ModelParams {
        sigma,
        gamma,
        epsilon,
        sound_speed,
    } = *params;
    let in_domain = sigma.is_finite()
        && gamma.is_finite()
        && epsilon.is_finite()
        && sound_speed.is_finite()
        && sigma >= 0.0
        && gamma > 0.0
        && epsilon >= 0.0
        && sound_speed > 0.0;
    let violation = AdmissibilityVerdict {
        admissible: false,
        sigma,
        reason: Admissibility::ParameterDomainViolation,
        speed: f64::NAN,
        lower: f64::NAN,
        upper: f64::NAN,
    };
    if !in_domain {
        return violation;
    }
    let Ok(zeta) = solve_zeta(sigma) else {
        return violation;
    };
    let j = params.speed();
    let (speed, lower) = if sigma > 0.0 {
        (j / sigma.sqrt(), ((1.0 + sigma) / sigma).sqrt())
    } else {
        (j, 1.0)
    };
    let reason = if speed <= lower {
        Admissibility::SpeedTooLow
    } else if speed >= zeta {
        Admissibility::SpeedTooHigh
    } else {
        Admissibility::Ok
    };
    AdmissibilityVerdict {
        admissible: reason == Admissibility::Ok,
        sigma,
        reason,
        speed,
        lower,
        upper: zeta,
    }
}

fn require_admissible(params: &ModelParams) -> Result<AdmissibilityVerdict> {
    let verdict = check_admissible(params);
    if verdict.admissible {
        Ok(verdict)
    } else {
        Err(Error::Inadmissible(verdict))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalDensities {
    pub zeta: f64,
    /// Sonic density `J/sqrt(σ)`; only defined for `σ > 0`.
    pub n_s: Option<f64>,
    pub n_c: f64,
    pub n_ce: f64,
    pub n_star: f64,
}

pub fn solve_critical_densities(params: &ModelParams) -> Result<CriticalDensities> {
    let verdict = require_admissible(params)?;
    let p = *params;
    let j = p.speed();
    let n_c = j / (1.0 + p.sigma).sqrt();

    // l decreases on (0, n_c) from l(1) = 0 and grows without bound after.
    let defect = |n: f64| p.defect_unchecked(n);
    let upper_ce = expand_until(n_c, |n| defect(n) > 0.0, "n_ce")?;
    let n_ce = bisect(defect, n_c, upper_ce, "n_ce")?;

    let g1 = p.g_unchecked(1.0);
    let excess = |n: f64| p.g_unchecked(n) - g1;
    let (n_s, upper_star) = if p.sigma > 0.0 {
        let n_s = j / p.sigma.sqrt();
        if n_ce >= n_s || excess(n_s) >= 0.0 {
            return Err(Error::BracketFailure { what: "n_star" });
        }
        (Some(n_s), n_s)
    } else {
        (None, expand_until(n_ce, |n| excess(n) < 0.0, "n_star")?)
    };
    let n_star = bisect(excess, n_ce, upper_star, "n_star")?;

    Ok(CriticalDensities {
        zeta: verdict.upper,
        n_s,
        n_c,
        n_ce,
        n_star,
    })
}

/// `g''(1)` and `g'''(1)`, the leading Taylor coefficients of the
/// first-integral potential at the far-field state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TaylorCoefficients {
    pub second: f64,
    pub third: f64,
}

pub fn g_derivatives_at_1(params: &ModelParams) -> TaylorCoefficients {
    let j2 = params.speed().powi(2);
    let s = params.sigma;
    let h1 = j2 - s;
    TaylorCoefficients {
        second: h1 * params.supersonic_excess(),
        third: 6.0 * j2 - 2.0 * s + h1.powi(3) + 3.0 * h1 * (-3.0 * j2 + s),
    }
}
