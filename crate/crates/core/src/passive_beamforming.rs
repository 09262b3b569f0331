//! RIS phase optimisation for a fixed precoder: projected gradient ascent on
//! the unit-modulus set with backtracking, and b-bit phase quantisation.
//!
//! The objective is written homogeneously in `theta`: the noise enters each
//! user's denominator as `theta^H (noise / N) I theta`, which equals the noise
//! power for any unit-modulus vector. This keeps the objective identical to
//! [`crate::ese_metrics::ese_approx`] on the feasible set and invariant to a
//! common phase rotation everywhere.

use std::f64::consts::{LN_2, TAU};

use crate::error::{domain, numeric, Result};
use crate::ese_metrics::{build_surrogate_context, ActiveBeam, PassiveBeam, SurrogateContext};
use crate::channel_model::UserCorrelation;
use crate::{CMatrix, CVector, C64};

/// Per-user quadratic forms `(a_k, b_k)` at an arbitrary complex vector.
fn quadratic_terms(theta: &CVector, ctx: &SurrogateContext) -> Vec<(f64, f64)> {
    let noise = ctx.noise_var * theta.norm_squared() / theta.len().max(1) as f64;
    ctx.r_mats
        .iter()
        .enumerate()
        .map(|(k, row)| {
            let mut a = 0.0;
            let mut interf = 0.0;
            for (j, r) in row.iter().enumerate() {
                let v = theta.dotc(&(r * theta)).re;
                if j == k {
                    a = v;
                } else {
                    interf += v;
                }
            }
            (a, interf + noise)
        })
        .collect()
}

/// Surrogate sum rate (bits/s/Hz) at any nonzero complex vector, using the
/// homogeneous noise term. Equal to [`surrogate_objective_theta`] on the
/// unit-modulus set.
pub fn homogeneous_objective(theta: &CVector, ctx: &SurrogateContext) -> f64 {
    quadratic_terms(theta, ctx).iter().map(|(a, b)| (1.0 + a / b).log2()).sum()
}

/// Surrogate sum rate of `theta` under the precoder baked into `ctx`.
pub fn surrogate_objective_theta(theta: &PassiveBeam, ctx: &SurrogateContext) -> f64 {
    homogeneous_objective(theta.theta(), ctx)
}

/// Wirtinger gradient with respect to `conj(theta)` of the surrogate sum
/// rate. For user `k` with `a = theta^H R_kk theta` and `b = theta^H B_k theta`
/// the contribution is `((R_kk + B_k) theta / (a + b) - B_k theta / b) / ln 2`.
pub fn gradient_theta(theta: &CVector, ctx: &SurrogateContext) -> CVector {
    let n = theta.len();
    let noise_per = ctx.noise_var / n.max(1) as f64;
    let mut grad = CVector::zeros(n);
    for (k, row) in ctx.r_mats.iter().enumerate() {
        let signal = &row[k] * theta;
        let mut interf = theta * C64::from(noise_per);
        for (j, r) in row.iter().enumerate() {
            if j != k {
                interf += r * theta;
            }
        }
        let a = theta.dotc(&signal).re;
        let b = theta.dotc(&interf).re;
        let total = &signal + &interf;
        grad += total * C64::from(1.0 / ((a + b) * LN_2)) - interf * C64::from(1.0 / (b * LN_2));
    }
    grad
}

/// Entrywise `exp(j arg(.))`; an exactly-zero entry keeps the phase of
/// `previous`.
pub fn project_unit_modulus(theta_raw: &CVector, previous: &PassiveBeam) -> PassiveBeam {
    let phases: Vec<f64> = theta_raw
        .iter()
        .zip(previous.phases())
        .map(|(z, &p)| if *z == C64::from(0.0) { p } else { z.arg() })
        .collect();
    let theta = CVector::from_iterator(
        theta_raw.len(),
        theta_raw.iter().zip(&phases).map(|(z, &p)| {
            if *z == C64::from(0.0) {
                C64::from_polar(1.0, p)
            } else {
                z / z.norm()
            }
        }),
    );
    PassiveBeam::from_unit(theta).unwrap_or_else(|_| PassiveBeam::from_phases(&phases))
}

/// Line-search and stopping controls for [`gd_passive`].
///
/// The gradient is measured in bits per unit phase perturbation and shrinks
/// with the SNR, so a unit initial step is far below the useful step size at
/// realistic link budgets; the default starts at `1e4` and lets backtracking
/// find the accepted step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GdParams {
    pub mu0: f64,
    pub shrink: f64,
    pub armijo_c: f64,
    /// Stop once the relative objective increase drops below this.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for GdParams {
    fn default() -> Self {
        Self { mu0: 1e4, shrink: 0.5, armijo_c: 1e-4, tol: 1e-5, max_iter: 500 }
    }
}

/// Steps below this are treated as a failed line search.
pub const MIN_STEP: f64 = 1e-12;
/// Gradients whose first-order effect is below this many bits count as zero.
pub const ZERO_GRADIENT: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct GdState {
    pub theta: PassiveBeam,
    /// Step size of the last accepted (or last tried) step.
    pub step: f64,
    /// Objective at the initial point and after every accepted step.
    pub objective_trace: Vec<f64>,
    pub iterations: usize,
    /// Set when the line search could not make progress.
    pub converged: bool,
}

impl GdState {
    pub fn new(theta: PassiveBeam, ctx: &SurrogateContext) -> Self {
        let f = surrogate_objective_theta(&theta, ctx);
        Self { theta, step: 0.0, objective_trace: vec![f], iterations: 0, converged: false }
    }

    pub fn objective(&self) -> f64 {
        *self.objective_trace.last().expect("trace starts non-empty")
    }
}

/// One projected ascent step with Armijo backtracking starting from
/// `params.mu0`.
pub fn gd_step(mut state: GdState, ctx: &SurrogateContext, params: &GdParams) -> Result<GdState> {
    let theta = state.theta.theta().clone();
    let g = gradient_theta(&theta, ctx);
    if g.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return numeric("non-finite passive gradient");
    }
    state.iterations += 1;
    let g2 = g.norm_squared();
    // first-order change over any feasible move is at most 2 |g| |theta|
    if g2.sqrt() * theta.norm() <= ZERO_GRADIENT {
        state.converged = true;
        return Ok(state);
    }
    let f0 = state.objective();
    let mut mu = params.mu0;
    while mu >= MIN_STEP {
        let cand = project_unit_modulus(&(&theta + &g * C64::from(mu)), &state.theta);
        let f = surrogate_objective_theta(&cand, ctx);
        if f >= f0 + params.armijo_c * mu * g2 {
            state.theta = cand;
            state.step = mu;
            state.objective_trace.push(f);
            return Ok(state);
        }
        mu *= params.shrink;
    }
    state.step = mu;
    state.converged = true;
    Ok(state)
}

/// Projected gradient ascent from `theta0` with the precoder `w` held fixed.
pub fn gd_passive(
    w: &ActiveBeam,
    theta0: &PassiveBeam,
    h: &CMatrix,
    users: &[UserCorrelation],
    noise_var: f64,
    params: &GdParams,
) -> Result<GdState> {
    let ctx = build_surrogate_context(w, theta0, h, users, noise_var)?;
    gd_passive_with(&ctx, theta0, params)
}

/// [`gd_passive`] on a prebuilt context.
pub fn gd_passive_with(ctx: &SurrogateContext, theta0: &PassiveBeam, params: &GdParams) -> Result<GdState> {
    if !(params.shrink > 0.0 && params.shrink < 1.0) || !(params.mu0 > 0.0) {
        return domain("step controls need mu0 > 0 and 0 < shrink < 1");
    }
    let mut state = GdState::new(theta0.clone(), ctx);
    if !state.objective().is_finite() {
        return numeric("non-finite initial passive objective");
    }
    while state.iterations < params.max_iter {
        let before = state.objective();
        state = gd_step(state, ctx, params)?;
        if state.converged {
            break;
        }
        let after = state.objective();
        if after - before < params.tol * after.abs().max(f64::MIN_POSITIVE) {
            break;
        }
    }
    Ok(state)
}

/// Rounds every phase to the nearest point of `{2 pi i / 2^b}` in circular
/// distance; an exact tie goes to the lower codebook index.
pub fn quantize_phases(theta: &PassiveBeam, b: u32) -> Result<PassiveBeam> {
    if b < 1 {
        return domain("quantizer needs at least one bit");
    }
    if b > 52 {
        return domain("quantizer resolution beyond double precision");
    }
    let levels = 1u64 << b;
    let step = TAU / levels as f64;
    let phases: Vec<f64> = theta
        .phases()
        .iter()
        .map(|&p| {
            let x = p / step;
            let lo = x.floor();
            let frac = x - lo;
            let lo = lo as u64 % levels;
            let idx = if frac > 0.5 {
                (lo + 1) % levels
            } else if frac == 0.5 {
                lo.min((lo + 1) % levels)
            } else {
                lo
            };
            idx as f64 * step
        })
        .collect();
    Ok(PassiveBeam::from_phases(&phases))
}
