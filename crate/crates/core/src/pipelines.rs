//! Joint beamforming pipelines (SVD-GD and FP-GD), scenario synthesis from
//! a physical setup, and evaluation of quantised RIS deployments.

use std::sync::Arc;
use std::time::Instant;

use crate::active_beamforming::{fp_active, svd_beamformer, FpParams};
use crate::channel_model::{
    draw_path_clusters, generate_ap_ris_channel, one_ring_angles, path_loss, spatial_correlation,
    spectral_decompose, ApGeometry, OneRingParams, RisGeometry, UserCorrelation,
};
use crate::error::{domain, Result};
use crate::ese_metrics::{
    build_surrogate_context, ese_approx, ese_monte_carlo, ActiveBeam, McEstimate, PassiveBeam,
};
use crate::passive_beamforming::{gd_passive_with, quantize_phases, GdParams};
use crate::rng::{SeedStreams, Stream};
use crate::CMatrix;

/// Ground position of a one-ring user relative to the point below the RIS.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UserPlacement {
    pub azimuth: f64,
    pub ring_radius: f64,
    /// Horizontal distance (m).
    pub distance: f64,
}

/// Physical description of a deployment, in linear units.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemSetup {
    pub ap_position: [f64; 3],
    pub ris_position: [f64; 3],
    pub ris: RisGeometry,
    pub ap: ApGeometry,
    pub users: Vec<UserPlacement>,
    pub alpha_h: f64,
    pub alpha_r: f64,
    /// Path-loss gain at the reference distance.
    pub c0: f64,
    pub d0: f64,
    pub noise_var: f64,
    pub clusters: usize,
    pub cluster_variance: f64,
    /// Relative eigenvalue cut used when factoring correlation matrices.
    pub rank_tol: f64,
}

impl SystemSetup {
    fn ris_height(&self) -> f64 {
        self.ris_position[2]
    }

    /// Large-scale gain of the AP-RIS link.
    pub fn beta_h(&self) -> Result<f64> {
        let d: f64 = self
            .ap_position
            .iter()
            .zip(&self.ris_position)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        path_loss(d, self.alpha_h, self.c0, self.d0)
    }

    /// Large-scale gain of the RIS link to user `u`.
    pub fn beta_user(&self, u: &UserPlacement) -> Result<f64> {
        let d = u.distance.hypot(self.ris_height());
        path_loss(d, self.alpha_r, self.c0, self.d0)
    }

    /// One-ring correlation matrices of every user. They depend only on the
    /// geometry, so sweeps compute them once.
    pub fn user_correlations(&self) -> Result<Vec<UserCorrelation>> {
        if self.users.is_empty() {
            return domain("at least one user is required");
        }
        self.users
            .iter()
            .map(|u| {
                let ang = one_ring_angles(&OneRingParams {
                    d: u.distance,
                    r: u.ring_radius,
                    phi_az: u.azimuth,
                    h: self.ris_height(),
                })?;
                let beta = self.beta_user(u)?;
                let r = spatial_correlation(&self.ris, u.azimuth, ang.delta_phi_az, ang.phi_el, ang.delta_phi_el, beta)?;
                spectral_decompose(&r, self.rank_tol)
            })
            .collect()
    }

    /// AP-RIS channel of one seed: cluster angles and gains come from their
    /// own streams.
    pub fn ap_ris_channel(&self, seed: u64) -> Result<CMatrix> {
        let streams = SeedStreams::new(seed);
        let clusters = draw_path_clusters(self.clusters, self.cluster_variance, &mut streams.rng(Stream::ApRisAngles, 0));
        generate_ap_ris_channel(&clusters, self.beta_h()?, &self.ap, &self.ris, &mut streams.rng(Stream::PathGains, 0))
    }

    /// Full scenario for one seed and transmit power (W).
    pub fn scenario(&self, users: Arc<Vec<UserCorrelation>>, power: f64, seed: u64) -> Result<Scenario> {
        Scenario::new(self.ap_ris_channel(seed)?, users, self.noise_var, power, seed)
    }
}

/// Everything an optimiser needs for one operating point.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub h: CMatrix,
    pub users: Arc<Vec<UserCorrelation>>,
    pub noise_var: f64,
    pub power: f64,
    pub seed: u64,
}

impl Scenario {
    pub fn new(h: CMatrix, users: Arc<Vec<UserCorrelation>>, noise_var: f64, power: f64, seed: u64) -> Result<Self> {
        if users.is_empty() {
            return domain("at least one user is required");
        }
        if let Some(u) = users.iter().find(|u| u.n() != h.ncols()) {
            return domain(format!("user correlation of size {} for {} RIS elements", u.n(), h.ncols()));
        }
        if !(noise_var > 0.0 && noise_var.is_finite()) {
            return domain("noise variance must be positive");
        }
        if !(power >= 0.0 && power.is_finite()) {
            return domain("transmit power must be finite and non-negative");
        }
        Ok(Self { h, users, noise_var, power, seed })
    }

    pub fn streams(&self) -> SeedStreams {
        SeedStreams::new(self.seed)
    }
}

/// Starting RIS phases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ThetaInit {
    /// Uniform phases from the theta-init stream of the scenario seed.
    #[default]
    Random,
    /// All phases zero.
    Zeros,
}

/// Algorithm controls shared by both pipelines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyper {
    pub gd: GdParams,
    pub fp: FpParams,
    /// Stop FP-GD once the fractional surrogate increase drops below this.
    pub outer_tol: f64,
    pub outer_max: usize,
    /// Monte Carlo trials for the final evaluation; below two skips it.
    pub mc_trials: usize,
    pub theta_init: ThetaInit,
}

impl Default for Hyper {
    fn default() -> Self {
        Self {
            gd: GdParams::default(),
            fp: FpParams::default(),
            outer_tol: 1e-4,
            outer_max: 30,
            mc_trials: 500,
            theta_init: ThetaInit::Random,
        }
    }
}

/// Objective histories of the inner solvers.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StageTraces {
    /// One trace per passive stage.
    pub gd: Vec<Vec<f64>>,
    /// One trace per active stage.
    pub fp: Vec<Vec<f64>>,
    /// Surrogate after initialisation and after every outer iteration.
    pub outer: Vec<f64>,
    /// `||W||_F^2` after every precoder update.
    pub power: Vec<f64>,
    /// Power multiplier after every precoder update.
    pub dual: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JointResult {
    pub w: ActiveBeam,
    pub theta: PassiveBeam,
    pub sum_ese_surrogate: f64,
    pub mc: Option<McEstimate>,
    pub outer_iterations: usize,
    pub traces: StageTraces,
    pub wall_time: f64,
}

fn initial_theta(sc: &Scenario, init: ThetaInit) -> PassiveBeam {
    let n = sc.h.ncols();
    match init {
        ThetaInit::Random => PassiveBeam::random(n, &mut sc.streams().rng(Stream::ThetaInit, 0)),
        ThetaInit::Zeros => PassiveBeam::identity(n),
    }
}

/// Monte Carlo sum ESE with the user-channel stream of the scenario seed, so
/// every power level and algorithm of one seed sees the same fading draws.
pub fn monte_carlo(sc: &Scenario, w: &ActiveBeam, theta: &PassiveBeam, trials: usize) -> Result<Option<McEstimate>> {
    if trials < 2 {
        return Ok(None);
    }
    let mut rng = sc.streams().rng(Stream::UserChannels, 0);
    ese_monte_carlo(w, theta, &sc.h, &sc.users, sc.noise_var, trials, &mut rng).map(Some)
}

fn finish(sc: &Scenario, hyper: &Hyper, w: ActiveBeam, theta: PassiveBeam, outer_iterations: usize, traces: StageTraces, start: Instant) -> Result<JointResult> {
    let sum_ese_surrogate = ese_approx(&w, &theta, &sc.h, &sc.users, sc.noise_var)?.sum;
    let mc = monte_carlo(sc, &w, &theta, hyper.mc_trials)?;
    Ok(JointResult { w, theta, sum_ese_surrogate, mc, outer_iterations, traces, wall_time: start.elapsed().as_secs_f64() })
}

/// SVD precoder followed by one passive optimisation at that precoder.
pub fn run_svd_gd(sc: &Scenario, hyper: &Hyper) -> Result<JointResult> {
    let start = Instant::now();
    let w = svd_beamformer(&sc.h, sc.power, sc.users.len())?;
    let theta0 = initial_theta(sc, hyper.theta_init);
    let ctx = build_surrogate_context(&w, &theta0, &sc.h, &sc.users, sc.noise_var)?;
    let gd = gd_passive_with(&ctx, &theta0, &hyper.gd)?;
    let traces = StageTraces {
        outer: vec![gd.objective_trace[0], gd.objective()],
        gd: vec![gd.objective_trace],
        ..StageTraces::default()
    };
    finish(sc, hyper, w, gd.theta, 1, traces, start)
}

/// Alternates passive and active optimisation from the SVD precoder until
/// the fractional surrogate increase falls below `hyper.outer_tol`.
pub fn run_fp_gd(sc: &Scenario, hyper: &Hyper) -> Result<JointResult> {
    let start = Instant::now();
    let mut w = svd_beamformer(&sc.h, sc.power, sc.users.len())?;
    let mut theta = initial_theta(sc, hyper.theta_init);
    let mut traces = StageTraces::default();
    let mut current = ese_approx(&w, &theta, &sc.h, &sc.users, sc.noise_var)?.sum;
    traces.outer.push(current);
    let mut outer = 0;
    while outer < hyper.outer_max {
        outer += 1;
        let ctx = build_surrogate_context(&w, &theta, &sc.h, &sc.users, sc.noise_var)?;
        let gd = gd_passive_with(&ctx, &theta, &hyper.gd)?;
        theta = gd.theta;
        traces.gd.push(gd.objective_trace);

        let fp = fp_active(&theta, &sc.h, &sc.users, sc.noise_var, &w, hyper.fp)?;
        w = fp.w;
        traces.power.extend(fp.power_trace);
        traces.dual.extend(fp.dual_trace);
        let next = *fp.objective_trace.last().expect("trace starts non-empty");
        traces.fp.push(fp.objective_trace);
        traces.outer.push(next);
        let gain = next - current;
        current = next;
        if gain < hyper.outer_tol * current.abs().max(f64::MIN_POSITIVE) {
            break;
        }
    }
    finish(sc, hyper, w, theta, outer, traces, start)
}

/// Phase resolution of a deployed RIS.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Bits {
    Finite(u32),
    Continuous,
}

impl std::fmt::Display for Bits {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Bits::Finite(b) => write!(f, "{b}"),
            Bits::Continuous => f.write_str("inf"),
        }
    }
}

impl std::str::FromStr for Bits {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "∞" | "continuous" => Ok(Bits::Continuous),
            t => match t.parse::<u32>() {
                Ok(b) if b >= 1 => Ok(Bits::Finite(b)),
                _ => domain(format!("invalid bit count '{t}'")),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedPoint {
    pub bits: Bits,
    pub theta: PassiveBeam,
    pub sum_ese_surrogate: f64,
    pub mc: Option<McEstimate>,
}

/// Re-evaluates `result` with its phases rounded to each resolution; the
/// precoder is left untouched.
pub fn evaluate_quantized(sc: &Scenario, result: &JointResult, bits: &[Bits], mc_trials: usize) -> Result<Vec<QuantizedPoint>> {
    bits.iter()
        .map(|&b| {
            let theta = match b {
                Bits::Finite(n) => quantize_phases(&result.theta, n)?,
                Bits::Continuous => result.theta.clone(),
            };
            let sum_ese_surrogate = ese_approx(&result.w, &theta, &sc.h, &sc.users, sc.noise_var)?.sum;
            let mc = monte_carlo(sc, &result.w, &theta, mc_trials)?;
            Ok(QuantizedPoint { bits: b, theta, sum_ese_surrogate, mc })
        })
        .collect()
}
