//! Phase-plane engine for the `(n, E)` system
//!
//! ```text
//! n' = -E / h(n)
//! E' = (n - exp(H(n))) / ε
//! ```
//!
//! with `E = -φ'`. The solitary wave is the homoclinic orbit of the saddle
//! `(1, 0)`. It is traced from its peak `(n*, 0)` with fixed-step classical
//! RK4 and mirrored onto the full line.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{
    check_admissible, g_derivatives_at_1, solve_critical_densities, CriticalDensities, ModelParams,
};

/// `|h(n)|` below this is treated as the sonic point.
pub const SONIC_GUARD: f64 = 1e-14;

/// Samples this many times closer to the saddle than the orbit can be
/// resolved are discarded from the tail.
pub const FLOOR_MARGIN: f64 = 30.0;

const MIN_AMPLITUDE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseState {
    pub n: f64,
    pub e: f64,
}

impl PhaseState {
    pub fn new(n: f64, e: f64) -> Self {
        Self { n, e }
    }

    fn axpy(self, h: f64, d: PhaseState) -> Self {
        Self {
            n: self.n + h * d.n,
            e: self.e + h * d.e,
        }
    }
}

pub fn ode_rhs(params: &ModelParams, s: PhaseState) -> Result<PhaseState> {
    if !(s.n > 0.0) {
        return Err(Error::Domain {
            function: "ode_rhs",
            value: s.n,
        });
    }
    let h = params.slope_unchecked(s.n);
    if h.abs() < SONIC_GUARD {
        return Err(Error::SonicSingularity { n: s.n });
    }
    Ok(PhaseState {
        n: -s.e / h,
        e: params.charge_unchecked(s.n) / params.epsilon,
    })
}

/// 2x2 matrix, row major.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Jacobian(pub [[f64; 2]; 2]);

impl Jacobian {
    pub fn det(&self) -> f64 {
        let [[a, b], [c, d]] = self.0;
        a * d - b * c
    }

    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1]
    }
}

pub fn jacobian_at(params: &ModelParams, s: PhaseState) -> Result<Jacobian> {
    if !(s.n > 0.0) {
        return Err(Error::Domain {
            function: "jacobian_at",
            value: s.n,
        });
    }
    let [h, dh, _, _] = params.slope_derivatives(s.n);
    if h.abs() < SONIC_GUARD {
        return Err(Error::SonicSingularity { n: s.n });
    }
    let eh = params.potential_unchecked(s.n).exp();
    Ok(Jacobian([
        [s.e * dh / (h * h), -1.0 / h],
        [(1.0 - h * eh) / params.epsilon, 0.0],
    ]))
}

/// Positive eigenvalue of the linearization at `(1, 0)`, in the stretched
/// variable: `λ² = (J² - 1 - σ) / (ε (J² - σ))`.
///
/// With `V² = 1 + σ` this is `(2Vγ + γ²ε) / (1 + 2Vγε + (γε)²)`, which stays
/// `O(1)` as `ε → 0`.
pub fn saddle_eigenvalue(params: &ModelParams) -> f64 {
    let excess = params.supersonic_excess();
    let slope_at_one = params.speed().powi(2) - params.sigma;
    if params.epsilon > 0.0 {
        (excess / (params.epsilon * slope_at_one)).sqrt()
    } else {
        // ε → 0 limit of the ε-uniform form
        (2.0 * params.sound_speed * params.gamma).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StationaryKind {
    Saddle,
    Center,
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StationaryPointReport {
    pub location: PhaseState,
    pub kind: StationaryKind,
    pub jacobian_det: f64,
}

impl StationaryPointReport {
    fn at(params: &ModelParams, n: f64) -> Result<Self> {
        let location = PhaseState::new(n, 0.0);
        let jac = jacobian_at(params, location)?;
        let det = jac.det();
        let kind = if det < 0.0 {
            StationaryKind::Saddle
        } else if det > 0.0 && jac.trace() == 0.0 {
            StationaryKind::Center
        } else {
            StationaryKind::Degenerate
        };
        Ok(Self {
            location,
            kind,
            jacobian_det: det,
        })
    }

    pub fn jacobian_det_sign(&self) -> f64 {
        self.jacobian_det.signum()
    }
}

/// The two stationary points `(1, 0)` and `(n_ce, 0)`.
pub fn classify_stationary_points(params: &ModelParams) -> Result<Vec<StationaryPointReport>> {
    let crit = solve_critical_densities(params)?;
    Ok(vec![
        StationaryPointReport::at(params, 1.0)?,
        StationaryPointReport::at(params, crit.n_ce)?,
    ])
}

/// Knobs of the fixed-step profile integrator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverConfig {
    pub dxi: f64,
    pub xi_max: f64,
    pub tail_cut: f64,
    /// Allowed first-integral drift, relative to `g(1)`.
    pub drift_tolerance: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            dxi: 1e-3,
            xi_max: 60.0,
            tail_cut: 1e-12,
            drift_tolerance: 1e-8,
        }
    }
}

impl SolverConfig {
    pub fn with_dxi(self, dxi: f64) -> Self {
        Self { dxi, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |x: f64| x > 0.0 && !x.is_nan();
        if !(positive(self.dxi) && self.dxi.is_finite()) {
            return Err(Error::InvalidConfig(format!("dxi must be > 0, got {}", self.dxi)));
        }
        if !(positive(self.xi_max) && self.xi_max.is_finite()) || self.xi_max <= self.dxi {
            return Err(Error::InvalidConfig(format!(
                "xi_max must be finite and exceed dxi, got {}",
                self.xi_max
            )));
        }
        if !positive(self.tail_cut) {
            return Err(Error::InvalidConfig(format!(
                "tail_cut must be > 0, got {}",
                self.tail_cut
            )));
        }
        if !positive(self.drift_tolerance) {
            return Err(Error::InvalidConfig(format!(
                "drift tolerance must be > 0, got {}",
                self.drift_tolerance
            )));
        }
        Ok(())
    }
}

/// Why the half-line integration stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    /// `n - 1` dropped below the configured tail cut.
    TailCut,
    /// The horizon `xi_max` was reached.
    Horizon,
    /// The tail was trimmed where round-off and truncation error make the
    /// orbit indistinguishable from its neighbours near the saddle.
    PrecisionFloor,
}

/// A sampled solitary wave on a uniform `ξ` grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WaveProfile {
    pub params: ModelParams,
    pub dxi: f64,
    pub xi: Vec<f64>,
    pub n: Vec<f64>,
    pub u: Vec<f64>,
    pub phi: Vec<f64>,
    pub e: Vec<f64>,
    /// `max |ε/2 E² - (g(n) - g(1))|` over the samples.
    pub first_integral_drift: f64,
    /// Smallest `n - 1` retained in the tail.
    pub tail_floor: f64,
    pub termination: Termination,
    pub full_line: bool,
}

impl WaveProfile {
    pub fn len(&self) -> usize {
        self.xi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xi.is_empty()
    }

    /// Index of `ξ = 0`.
    pub fn peak_index(&self) -> usize {
        if self.full_line {
            self.len() / 2
        } else {
            0
        }
    }

    pub fn check_lengths(&self) -> Result<()> {
        let len = self.xi.len();
        let ok = len > 0
            && self.n.len() == len
            && self.u.len() == len
            && self.phi.len() == len
            && self.e.len() == len
            && (!self.full_line || len % 2 == 1);
        if ok {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "xi={}, n={}, u={}, phi={}, E={}, full_line={}",
                len,
                self.n.len(),
                self.u.len(),
                self.phi.len(),
                self.e.len(),
                self.full_line
            )))
        }
    }

    /// Structural properties of a solitary wave, as measured on the samples.
    pub fn structure(&self) -> StructureReport {
        let peak = self.peak_index();
        let right = peak..self.len();
        let decreasing = |v: &[f64]| v[right.clone()].windows(2).all(|w| w[1] < w[0]);
        let interior = peak + 1..self.len();
        let positive = self.n[interior.clone()].iter().all(|&n| n > 1.0)
            && self.u[interior.clone()].iter().all(|&u| u > 0.0)
            && self.phi[interior].iter().all(|&p| p > 0.0);
        let even = if self.full_line {
            (1..=peak).all(|k| {
                let (l, r) = (peak - k, peak + k);
                self.xi[l] == -self.xi[r]
                    && self.n[l] == self.n[r]
                    && self.u[l] == self.u[r]
                    && self.phi[l] == self.phi[r]
                    && self.e[l] == -self.e[r]
            })
        } else {
            true
        };
        StructureReport {
            monotone: decreasing(&self.n) && decreasing(&self.u) && decreasing(&self.phi),
            positive,
            even,
            zero_field_at_peak: self.e[peak] == 0.0 && self.xi[peak] == 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct StructureReport {
    pub monotone: bool,
    pub positive: bool,
    pub even: bool,
    pub zero_field_at_peak: bool,
}

impl StructureReport {
    pub fn all(&self) -> bool {
        self.monotone && self.positive && self.even && self.zero_field_at_peak
    }
}

fn rk4_step(params: &ModelParams, s: PhaseState, h: f64) -> Result<PhaseState> {
    let k1 = ode_rhs(params, s)?;
    let k2 = ode_rhs(params, s.axpy(0.5 * h, k1))?;
    let k3 = ode_rhs(params, s.axpy(0.5 * h, k2))?;
    let k4 = ode_rhs(params, s.axpy(h, k3))?;
    Ok(PhaseState {
        n: s.n + h / 6.0 * (k1.n + 2.0 * k2.n + 2.0 * k3.n + k4.n),
        e: s.e + h / 6.0 * (k1.e + 2.0 * k2.e + 2.0 * k3.e + k4.e),
    })
}

/// Traces the half wave `ξ ≥ 0` from the peak `(n*, 0)`.
///
/// The orbit approaches a saddle, so any error off the level set
/// `ε/2 E² = g(n) - g(1)` eventually grows along the unstable direction and
/// the trajectory turns away at `n - 1 ≈ sqrt(2 c / g''(1))`, `c` being that
/// error. The measured drift (or a few ulps of `g(1)`, whichever is larger)
/// fixes `c`; samples closer to the saddle than [`FLOOR_MARGIN`] times the
/// turning point are dropped. A turn above that floor is an error.
pub fn integrate_half_profile(params: &ModelParams, config: &SolverConfig) -> Result<WaveProfile> {
    config.validate()?;
    let verdict = check_admissible(params);
    if !verdict.admissible {
        return Err(Error::Inadmissible(verdict));
    }
    let crit = match solve_critical_densities(params) {
        Ok(crit) => crit,
        // the level set g(n) = g(1) is lost in round-off for vanishing amplitudes
        Err(Error::BracketFailure { .. })
            if 3.0 * params.gamma * params.epsilon / params.sound_speed < MIN_AMPLITUDE =>
        {
            return Err(Error::TooSmallAmplitude {
                amplitude: 3.0 * params.gamma * params.epsilon / params.sound_speed,
            })
        }
        Err(err) => return Err(err),
    };
    integrate_from_peak(params, &crit, config)
}

fn integrate_from_peak(
    params: &ModelParams,
    crit: &CriticalDensities,
    config: &SolverConfig,
) -> Result<WaveProfile> {
    let amplitude = crit.n_star - 1.0;
    let g1 = params.g_unchecked(1.0);
    let curvature = g_derivatives_at_1(params).second;
    let roundoff_floor = FLOOR_MARGIN * (8.0 * f64::EPSILON * g1 / curvature).sqrt();
    if amplitude < MIN_AMPLITUDE || !(amplitude > roundoff_floor) {
        return Err(Error::TooSmallAmplitude { amplitude });
    }
    let dxi = config.dxi;
    let max_steps = (config.xi_max / dxi).floor() as usize;

    let mut states = vec![PhaseState::new(crit.n_star, 0.0)];
    let mut departure: Option<(f64, f64)> = None;
    let mut termination = Termination::Horizon;
    let mut s = states[0];
    for step in 1..=max_steps {
        let next = rk4_step(params, s, dxi)?;
        if let Some(n_s) = crit.n_s {
            if next.n >= n_s {
                return Err(Error::SonicSingularity { n: next.n });
            }
        }
        let leaves_orbit =
            !(next.n < s.n) || !(next.e > 0.0) || !(next.n > 1.0) || !next.e.is_finite();
        if leaves_orbit {
            departure = Some((step as f64 * dxi, s.n - 1.0));
            break;
        }
        states.push(next);
        s = next;
        if next.n - 1.0 < config.tail_cut {
            termination = Termination::TailCut;
            break;
        }
    }

    let drift = states
        .iter()
        .map(|st| (0.5 * params.epsilon * st.e * st.e - (params.g_unchecked(st.n) - g1)).abs())
        .fold(0.0, f64::max);
    let tolerance = config.drift_tolerance * g1;
    if !(drift <= tolerance) {
        return Err(Error::Drift { drift, tolerance });
    }

    let level_error = drift.max(4.0 * f64::EPSILON * g1);
    let floor = FLOOR_MARGIN * (2.0 * level_error / curvature).sqrt();
    if let Some((xi, excess)) = departure {
        if excess > floor {
            return Err(Error::NonMonotone { xi, excess, floor });
        }
    }
    let cut = config.tail_cut.max(floor);
    let keep = states
        .iter()
        .position(|st| st.n - 1.0 < cut)
        .unwrap_or(states.len());
    let trimmed = keep < states.len() && floor > config.tail_cut;
    if trimmed || (keep == states.len() && departure.is_some()) {
        termination = Termination::PrecisionFloor;
    }
    if keep < 3 {
        return Err(Error::PrecisionFloor { floor, amplitude });
    }
    states.truncate(keep);

    let j = params.speed();
    let xi = (0..states.len()).map(|i| i as f64 * dxi).collect();
    let n: Vec<f64> = states.iter().map(|st| st.n).collect();
    let u = n.iter().map(|&n| j * (1.0 - 1.0 / n)).collect();
    let phi = n.iter().map(|&n| params.potential_unchecked(n)).collect();
    let e = states.iter().map(|st| st.e).collect();
    let tail_floor = states.last().map(|st| st.n - 1.0).unwrap_or(amplitude);
    Ok(WaveProfile {
        params: *params,
        dxi,
        xi,
        n,
        u,
        phi,
        e,
        first_integral_drift: drift,
        tail_floor,
        termination,
        full_line: false,
    })
}

/// Even reflection of `n, u, φ` and odd reflection of `E` about `ξ = 0`.
pub fn mirror_to_full_line(half: &WaveProfile) -> WaveProfile {
    if half.full_line {
        return half.clone();
    }
    fn reflect(v: &[f64], sign: f64) -> Vec<f64> {
        let mut out = Vec::with_capacity(2 * v.len() - 1);
        out.extend(v[1..].iter().rev().map(|&x| sign * x));
        out.extend_from_slice(v);
        out
    }
    WaveProfile {
        xi: reflect(&half.xi, -1.0),
        n: reflect(&half.n, 1.0),
        u: reflect(&half.u, 1.0),
        phi: reflect(&half.phi, 1.0),
        e: reflect(&half.e, -1.0),
        full_line: true,
        ..half.clone()
    }
}

/// Integrates and mirrors in one call.
pub fn solve_profile(params: &ModelParams, config: &SolverConfig) -> Result<WaveProfile> {
    integrate_half_profile(params, config).map(|half| mirror_to_full_line(&half))
}
