//! Spectral-efficiency evaluation: instantaneous SINR, Monte Carlo ergodic
//! spectral efficiency, the deterministic surrogate, and the quadratic-form
//! matrices shared by the active and passive optimisers.
//!
//! The RIS reflection matrix is `diag(theta)`: element `n` multiplies the
//! impinging signal by `theta[n]`. With this convention the cascaded gain of
//! stream `j` at the RIS is `v_j = theta .* (H^H w_j)`, and the same expected
//! power can be written either as `w_j^H A_k w_j` or `theta^H R_k^j theta`.

use std::f64::consts::TAU;

use rand::Rng;

use crate::channel_model::UserCorrelation;
use crate::error::{domain, Result};
use crate::rng::complex_gaussian;
use crate::{CMatrix, CVector, C64};

/// Relative slack on the transmit-power constraint.
pub const POWER_SLACK: f64 = 1e-9;

/// AP precoder `W` (M x K) together with its power budget.
#[derive(Debug, Clone, PartialEq)]
pub struct ActiveBeam {
    w: CMatrix,
    power_budget: f64,
}

impl ActiveBeam {
    pub fn new(w: CMatrix, power_budget: f64) -> Result<Self> {
        if !(power_budget >= 0.0) || !power_budget.is_finite() {
            return domain("power budget must be finite and non-negative");
        }
        let power = w.norm_squared();
        if !power.is_finite() {
            return domain("beamformer has non-finite entries");
        }
        if power > power_budget * (1.0 + POWER_SLACK) {
            return domain(format!("beamformer power {power:e} exceeds budget {power_budget:e}"));
        }
        Ok(Self { w, power_budget })
    }

    pub fn zeros(m: usize, k: usize, power_budget: f64) -> Result<Self> {
        Self::new(CMatrix::zeros(m, k), power_budget)
    }

    pub fn w(&self) -> &CMatrix {
        &self.w
    }

    pub fn into_inner(self) -> CMatrix {
        self.w
    }

    pub fn power_budget(&self) -> f64 {
        self.power_budget
    }

    /// `||W||_F^2`.
    pub fn power(&self) -> f64 {
        self.w.norm_squared()
    }

    pub fn antennas(&self) -> usize {
        self.w.nrows()
    }

    pub fn users(&self) -> usize {
        self.w.ncols()
    }
}

/// Unit-modulus RIS phase vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PassiveBeam {
    theta: CVector,
    phases: Vec<f64>,
}

fn wrap_phase(p: f64) -> f64 {
    let w = p.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU
    if w >= TAU {
        0.0
    } else {
        w
    }
}

impl PassiveBeam {
    pub fn from_phases(phases: &[f64]) -> Self {
        let phases: Vec<f64> = phases.iter().map(|&p| wrap_phase(p)).collect();
        let theta = CVector::from_iterator(phases.len(), phases.iter().map(|&p| C64::from_polar(1.0, p)));
        Self { theta, phases }
    }

    /// Wraps an already unit-modulus vector; rejects entries off the unit
    /// circle by more than `1e-12`.
    pub fn from_unit(theta: CVector) -> Result<Self> {
        if let Some(z) = theta.iter().find(|z| ((z.norm() - 1.0).abs() > 1e-12) || !z.norm().is_finite()) {
            return domain(format!("entry {z} is not unit modulus"));
        }
        let phases = theta.iter().map(|z| wrap_phase(z.arg())).collect();
        Ok(Self { theta, phases })
    }

    /// All phases zero (`theta = 1`).
    pub fn identity(n: usize) -> Self {
        Self::from_phases(&vec![0.0; n])
    }

    /// Independent uniform phases.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let phases: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..TAU)).collect();
        Self::from_phases(&phases)
    }

    pub fn theta(&self) -> &CVector {
        &self.theta
    }

    /// Phases in `[0, 2 pi)`.
    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    /// Reflection matrix `diag(theta)`.
    pub fn reflection_matrix(&self) -> CMatrix {
        CMatrix::from_diagonal(&self.theta)
    }

    /// `exp(j alpha) * theta`.
    pub fn rotated(&self, alpha: f64) -> Self {
        let phases: Vec<f64> = self.phases.iter().map(|p| p + alpha).collect();
        Self::from_phases(&phases)
    }
}

fn check_dims(ab: &ActiveBeam, pb: &PassiveBeam, h: &CMatrix, users: usize, noise_var: f64) -> Result<()> {
    if h.nrows() != ab.antennas() {
        return domain(format!("H has {} rows but W has {} antennas", h.nrows(), ab.antennas()));
    }
    if h.ncols() != pb.len() {
        return domain(format!("H has {} columns but theta has {} entries", h.ncols(), pb.len()));
    }
    if users != ab.users() {
        return domain(format!("{} user channels for {} beamforming columns", users, ab.users()));
    }
    if !(noise_var > 0.0) || !noise_var.is_finite() {
        return domain("noise variance must be positive");
    }
    Ok(())
}

/// Cascaded vectors `v_j = theta .* (H^H w_j)` as the columns of an N x K
/// matrix.
pub fn cascaded_gains(ab: &ActiveBeam, pb: &PassiveBeam, h: &CMatrix) -> CMatrix {
    let mut g = h.adjoint() * ab.w();
    for (mut row, t) in g.row_iter_mut().zip(pb.theta().iter()) {
        row *= *t;
    }
    g
}

/// SINR of user `k` for one channel realisation, interference treated as
/// noise.
pub fn instantaneous_sinr(
    k: usize,
    ab: &ActiveBeam,
    pb: &PassiveBeam,
    h: &CMatrix,
    h_users: &[CVector],
    noise_var: f64,
) -> Result<f64> {
    check_dims(ab, pb, h, h_users.len(), noise_var)?;
    if k >= h_users.len() {
        return domain(format!("user index {k} out of range"));
    }
    if h_users[k].len() != pb.len() {
        return domain("user channel length differs from RIS size");
    }
    let v = cascaded_gains(ab, pb, h);
    let gains: Vec<f64> = v.column_iter().map(|vj| h_users[k].dotc(&vj).norm_sqr()).collect();
    Ok(sinr_from_gains(k, &gains, noise_var))
}

fn sinr_from_gains(k: usize, gains: &[f64], noise_var: f64) -> f64 {
    let interference: f64 = gains.iter().enumerate().filter(|(j, _)| *j != k).map(|(_, g)| g).sum();
    gains[k] / (interference + noise_var)
}

/// Monte Carlo estimate of the ergodic spectral efficiency.
#[derive(Debug, Clone, PartialEq)]
pub struct McEstimate {
    pub per_user_mean: Vec<f64>,
    pub per_user_stderr: Vec<f64>,
    pub sum_mean: f64,
    pub sum_stderr: f64,
    pub trials: usize,
}

fn mean_and_stderr(samples: impl Iterator<Item = f64> + Clone, n: usize) -> (f64, f64) {
    let mean = samples.clone().sum::<f64>() / n as f64;
    let var = samples.map(|x| (x - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
    (mean, (var / n as f64).sqrt())
}

/// Sample mean of `log2(1 + SINR_k)` over `trials` independent draws of the
/// RIS-user channels, with per-user and sum standard errors.
///
/// Each trial draws every user's channel in user order, consuming `rng`
/// exactly as [`crate::channel_model::sample_user_channel`] would, so that
/// results are reproducible from the generator state alone. The draw is
/// carried out in each user's eigenbasis: `h_k^H v_j` reduces to a
/// `rank`-term inner product with the precomputed `D_k^H v_j`.
pub fn ese_monte_carlo<R: Rng + ?Sized>(
    ab: &ActiveBeam,
    pb: &PassiveBeam,
    h: &CMatrix,
    users: &[UserCorrelation],
    noise_var: f64,
    trials: usize,
    rng: &mut R,
) -> Result<McEstimate> {
    check_dims(ab, pb, h, users.len(), noise_var)?;
    if trials < 2 {
        return domain("Monte Carlo needs at least two trials");
    }
    let k_count = users.len();
    let v = cascaded_gains(ab, pb, h);
    // projected[k] is rank_k x K: sqrt(lambda) .* (D_k^H v)
    let projected: Vec<CMatrix> = users
        .iter()
        .map(|uc| {
            let mut p = uc.d.adjoint() * &v;
            for (mut row, &l) in p.row_iter_mut().zip(&uc.lambda) {
                row *= C64::from(l.sqrt());
            }
            p
        })
        .collect();
    let mut rates = vec![0.0; trials * k_count];
    let mut gains = vec![0.0; k_count];
    for t in 0..trials {
        for (k, p) in projected.iter().enumerate() {
            let z: Vec<C64> = (0..p.nrows()).map(|_| complex_gaussian(rng, 1.0)).collect();
            for (j, g) in gains.iter_mut().enumerate() {
                // h_k^H v_j = z^H (sqrt(lambda) .* D^H v_j)
                let s: C64 = z.iter().zip(p.column(j).iter()).map(|(a, b)| a.conj() * b).sum();
                *g = s.norm_sqr();
            }
            rates[t * k_count + k] = (1.0 + sinr_from_gains(k, &gains, noise_var)).log2();
        }
    }
    let mut per_user_mean = Vec::with_capacity(k_count);
    let mut per_user_stderr = Vec::with_capacity(k_count);
    for k in 0..k_count {
        let (m, s) = mean_and_stderr((0..trials).map(|t| rates[t * k_count + k]), trials);
        per_user_mean.push(m);
        per_user_stderr.push(s);
    }
    let (sum_mean, sum_stderr) = mean_and_stderr(
        (0..trials).map(|t| rates[t * k_count..(t + 1) * k_count].iter().sum::<f64>()),
        trials,
    );
    Ok(McEstimate { per_user_mean, per_user_stderr, sum_mean, sum_stderr, trials })
}

/// Surrogate spectral efficiency per user and summed (bits/s/Hz).
#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateEse {
    pub per_user: Vec<f64>,
    pub sum: f64,
}

/// Matrix of expected received powers: entry `(k, j)` is
/// `w_j^H A_k w_j = theta^H R_k^j theta`, the power of stream `j` at user `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerForms(pub Vec<Vec<f64>>);

impl PowerForms {
    pub fn users(&self) -> usize {
        self.0.len()
    }

    pub fn signal(&self, k: usize) -> f64 {
        self.0[k][k]
    }

    pub fn interference(&self, k: usize) -> f64 {
        self.0[k].iter().enumerate().filter(|(j, _)| *j != k).map(|(_, p)| p).sum()
    }

    /// `signal / (interference + noise)` for user `k`.
    pub fn sinr(&self, k: usize, noise_var: f64) -> f64 {
        self.signal(k) / (self.interference(k) + noise_var)
    }

    pub fn surrogate(&self, noise_var: f64) -> SurrogateEse {
        let per_user: Vec<f64> = (0..self.users()).map(|k| (1.0 + self.sinr(k, noise_var)).log2()).collect();
        let sum = per_user.iter().sum();
        SurrogateEse { per_user, sum }
    }
}

/// Expected powers computed from the cascaded vectors and the full
/// correlation matrices.
pub fn power_forms(ab: &ActiveBeam, pb: &PassiveBeam, h: &CMatrix, users: &[UserCorrelation]) -> PowerForms {
    let v = cascaded_gains(ab, pb, h);
    PowerForms(
        users
            .iter()
            .map(|uc| {
                let rv = &uc.r * &v;
                v.column_iter().zip(rv.column_iter()).map(|(a, b)| a.dotc(&b).re.max(0.0)).collect()
            })
            .collect(),
    )
}

/// Deterministic surrogate
/// `C_k ~= log2(1 + w_k^H A_k w_k / (sum_{j != k} w_j^H A_k w_j + noise))`.
pub fn ese_approx(
    ab: &ActiveBeam,
    pb: &PassiveBeam,
    h: &CMatrix,
    users: &[UserCorrelation],
    noise_var: f64,
) -> Result<SurrogateEse> {
    check_dims(ab, pb, h, users.len(), noise_var)?;
    Ok(power_forms(ab, pb, h, users).surrogate(noise_var))
}

/// Quadratic-form matrices of the surrogate for one `(W, theta)` pair.
#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateContext {
    /// `A_k = H diag(theta)^H R_k diag(theta) H^H`, one M x M matrix per user.
    pub a_mats: Vec<CMatrix>,
    /// `r_mats[k][j] = diag(H^H w_j)^H R_k diag(H^H w_j)`, N x N.
    pub r_mats: Vec<Vec<CMatrix>>,
    pub noise_var: f64,
}

fn hermitian_part(x: CMatrix) -> CMatrix {
    (&x + x.adjoint()) * C64::from(0.5)
}

/// Builds all `K` A-matrices and `K^2` R-matrices, each symmetrised.
pub fn build_surrogate_context(
    ab: &ActiveBeam,
    pb: &PassiveBeam,
    h: &CMatrix,
    users: &[UserCorrelation],
    noise_var: f64,
) -> Result<SurrogateContext> {
    check_dims(ab, pb, h, users.len(), noise_var)?;
    // H diag(theta)^H
    let mut cascade = h.clone();
    for (mut col, t) in cascade.column_iter_mut().zip(pb.theta().iter()) {
        col *= t.conj();
    }
    let g = h.adjoint() * ab.w();
    let a_mats = users
        .iter()
        .map(|uc| hermitian_part(&cascade * &uc.r * cascade.adjoint()))
        .collect();
    let r_mats = users
        .iter()
        .map(|uc| {
            g.column_iter()
                .map(|gj| {
                    let m = CMatrix::from_fn(uc.r.nrows(), uc.r.ncols(), |a, b| gj[a].conj() * uc.r[(a, b)] * gj[b]);
                    hermitian_part(m)
                })
                .collect()
        })
        .collect();
    Ok(SurrogateContext { a_mats, r_mats, noise_var })
}

impl SurrogateContext {
    pub fn users(&self) -> usize {
        self.a_mats.len()
    }

    /// Powers from the A-matrices: `w_j^H A_k w_j`.
    pub fn forms_from_active(&self, w: &CMatrix) -> PowerForms {
        PowerForms(
            self.a_mats
                .iter()
                .map(|a| w.column_iter().map(|wj| wj.dotc(&(a * wj)).re.max(0.0)).collect())
                .collect(),
        )
    }

    /// Powers from the R-matrices: `theta^H R_k^j theta`.
    pub fn forms_from_passive(&self, theta: &CVector) -> PowerForms {
        PowerForms(
            self.r_mats
                .iter()
                .map(|row| row.iter().map(|r| theta.dotc(&(r * theta)).re.max(0.0)).collect())
                .collect(),
        )
    }
}

/// Converts a power in dBm to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// Converts a ratio in dB to linear scale.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;
    use crate::channel_model::spectral_decompose;
    use crate::rng::{SeedStreams, Stream};

    fn rand_mat<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
        CMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng, 1.0))
    }

    fn rand_psd<R: Rng>(n: usize, rank: usize, rng: &mut R) -> CMatrix {
        let f = rand_mat(n, rank, rng);
        &f * f.adjoint() / C64::from(rank as f64)
    }

    struct Instance {
        ab: ActiveBeam,
        pb: PassiveBeam,
        h: CMatrix,
        users: Vec<UserCorrelation>,
    }

    fn instance(m: usize, n: usize, k: usize, seed: u64) -> Instance {
        let mut rng = SeedStreams::new(seed).rng(Stream::PathGains, 0);
        let w = rand_mat(m, k, &mut rng);
        let p = w.norm_squared();
        let ab = ActiveBeam::new(w, p).unwrap();
        let pb = PassiveBeam::random(n, &mut rng);
        let h = rand_mat(m, n, &mut rng);
        let users = (0..k).map(|_| spectral_decompose(&rand_psd(n, 2, &mut rng), 0.0).unwrap()).collect();
        Instance { ab, pb, h, users }
    }

    #[test]
    fn active_beam_enforces_budget() {
        let w = CMatrix::from_element(2, 2, C64::new(1.0, 0.0));
        assert!(ActiveBeam::new(w.clone(), 4.0).is_ok());
        assert!(ActiveBeam::new(w.clone(), 4.0 * (1.0 + 1e-10)).is_ok());
        assert!(ActiveBeam::new(w, 3.9).is_err());
    }

    #[test]
    fn passive_beam_wraps_and_validates() {
        let pb = PassiveBeam::from_phases(&[-0.5, 7.0, TAU]);
        assert!(pb.phases().iter().all(|p| (0.0..TAU).contains(p)));
        assert!(pb.theta().iter().all(|z| (z.norm() - 1.0).abs() < 1e-12));
        assert!((pb.phases()[0] - (TAU - 0.5)).abs() < 1e-12);
        assert!(PassiveBeam::from_unit(CVector::from_vec(vec![C64::new(0.5, 0.0)])).is_err());
    }

    #[test]
    fn sinr_single_user_has_no_interference() {
        let inst = instance(3, 4, 1, 1);
        let mut rng = SeedStreams::new(2).rng(Stream::UserChannels, 0);
        let hk = vec![CVector::from_fn(4, |_, _| complex_gaussian(&mut rng, 1.0))];
        let s = instantaneous_sinr(0, &inst.ab, &inst.pb, &inst.h, &hk, 0.3).unwrap();
        let phi = inst.pb.reflection_matrix();
        let sig = (hk[0].adjoint() * &phi * inst.h.adjoint() * inst.ab.w().column(0))[0].norm_sqr();
        assert!((s - sig / 0.3).abs() < 1e-12 * s);
        assert!(instantaneous_sinr(0, &inst.ab, &inst.pb, &inst.h, &hk, 0.0).is_err());
    }

    #[test]
    fn sinr_zero_beam_is_zero() {
        let inst = instance(3, 4, 2, 3);
        let ab = ActiveBeam::zeros(3, 2, 1.0).unwrap();
        let hk: Vec<CVector> = (0..2).map(|_| CVector::from_element(4, C64::new(1.0, 1.0))).collect();
        assert_eq!(instantaneous_sinr(0, &ab, &inst.pb, &inst.h, &hk, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn sinr_matches_loop_oracle() {
        let inst = instance(2, 2, 2, 4);
        let mut rng = SeedStreams::new(5).rng(Stream::UserChannels, 0);
        let hk: Vec<CVector> = (0..2).map(|_| CVector::from_fn(2, |_, _| complex_gaussian(&mut rng, 1.0))).collect();
        let noise = 0.7;
        for k in 0..2 {
            // explicit sum_n conj(h_k[n]) theta[n] sum_m conj(H[m, n]) w_j[m]
            let gain = |j: usize| {
                let mut acc = C64::new(0.0, 0.0);
                for n in 0..2 {
                    let mut inner = C64::new(0.0, 0.0);
                    for m in 0..2 {
                        inner += inst.h[(m, n)].conj() * inst.ab.w()[(m, j)];
                    }
                    acc += hk[k][n].conj() * inst.pb.theta()[n] * inner;
                }
                acc.norm_sqr()
            };
            let expect = gain(k) / (gain(1 - k) + noise);
            let got = instantaneous_sinr(k, &inst.ab, &inst.pb, &inst.h, &hk, noise).unwrap();
            assert!((got - expect).abs() < 1e-12 * expect);
        }
    }

    #[test]
    fn cross_identity_and_two_routes() {
        for seed in 0..5 {
            let inst = instance(4, 6, 3, 10 + seed);
            let ctx = build_surrogate_context(&inst.ab, &inst.pb, &inst.h, &inst.users, 0.5).unwrap();
            let fa = ctx.forms_from_active(inst.ab.w());
            let fr = ctx.forms_from_passive(inst.pb.theta());
            let fd = power_forms(&inst.ab, &inst.pb, &inst.h, &inst.users);
            for k in 0..3 {
                for j in 0..3 {
                    let a = fa.0[k][j];
                    assert!((a - fr.0[k][j]).abs() <= 1e-9 * a, "{k} {j}");
                    assert!((a - fd.0[k][j]).abs() <= 1e-9 * a);
                }
            }
            let s1 = fa.surrogate(0.5).sum;
            let s2 = ese_approx(&inst.ab, &inst.pb, &inst.h, &inst.users, 0.5).unwrap().sum;
            assert!((s1 - s2).abs() < 1e-9 * s2);
        }
    }

    #[test]
    fn context_degenerate_cases() {
        let inst = instance(3, 4, 2, 6);
        let zero_users: Vec<UserCorrelation> =
            (0..2).map(|_| spectral_decompose(&CMatrix::zeros(4, 4), 0.0).unwrap()).collect();
        let ctx = build_surrogate_context(&inst.ab, &inst.pb, &inst.h, &zero_users, 1.0).unwrap();
        assert!(ctx.a_mats.iter().all(|a| a.iter().all(|z| z.norm() == 0.0)));
        assert!(ctx.r_mats.iter().flatten().all(|r| r.iter().all(|z| z.norm() == 0.0)));

        let flat = PassiveBeam::identity(4);
        let ctx = build_surrogate_context(&inst.ab, &flat, &inst.h, &inst.users, 1.0).unwrap();
        for (a, uc) in ctx.a_mats.iter().zip(&inst.users) {
            let expect = &inst.h * &uc.r * inst.h.adjoint();
            assert!((a - &expect).iter().all(|z| z.norm() < 1e-12 * expect.norm()));
        }
    }

    #[test]
    fn approx_zero_beam_and_two_by_two_expansion() {
        let inst = instance(2, 2, 1, 7);
        let ab0 = ActiveBeam::zeros(2, 1, 1.0).unwrap();
        assert!(ese_approx(&ab0, &inst.pb, &inst.h, &inst.users, 1.0).unwrap().per_user.iter().all(|&c| c == 0.0));

        // K=1, N=2: theta^H diag(g)^H R diag(g) theta expanded by hand
        let g = inst.h.adjoint() * inst.ab.w().column(0);
        let t = inst.pb.theta();
        let r = &inst.users[0].r;
        let x0 = g[0] * t[0];
        let x1 = g[1] * t[1];
        let q = x0.conj() * r[(0, 0)] * x0
            + x0.conj() * r[(0, 1)] * x1
            + x1.conj() * r[(1, 0)] * x0
            + x1.conj() * r[(1, 1)] * x1;
        let noise = 0.25;
        let expect = (1.0 + q.re / noise).log2();
        let got = ese_approx(&inst.ab, &inst.pb, &inst.h, &inst.users, noise).unwrap();
        assert!((got.sum - expect).abs() < 1e-12 * expect);
    }

    #[test]
    fn approx_invariances() {
        let inst = instance(4, 8, 3, 8);
        let base = ese_approx(&inst.ab, &inst.pb, &inst.h, &inst.users, 0.3).unwrap().sum;
        for alpha in [PI / 7.0, 1.0] {
            let rot = inst.pb.rotated(alpha);
            let v = ese_approx(&inst.ab, &rot, &inst.h, &inst.users, 0.3).unwrap().sum;
            assert!((v - base).abs() < 1e-10 * base);
        }
        let mut w = inst.ab.w().clone();
        for (k, mut col) in w.column_iter_mut().enumerate() {
            col *= C64::from_polar(1.0, 0.9 * k as f64 + 0.2);
        }
        let ab = ActiveBeam::new(w, inst.ab.power_budget()).unwrap();
        let v = ese_approx(&ab, &inst.pb, &inst.h, &inst.users, 0.3).unwrap().sum;
        assert!((v - base).abs() < 1e-10 * base);
    }

    #[test]
    fn monte_carlo_zero_power_is_exactly_zero() {
        let inst = instance(3, 4, 2, 9);
        let ab = ActiveBeam::zeros(3, 2, 0.0).unwrap();
        let mut rng = SeedStreams::new(1).rng(Stream::UserChannels, 0);
        let mc = ese_monte_carlo(&ab, &inst.pb, &inst.h, &inst.users, 1.0, 50, &mut rng).unwrap();
        assert!(mc.per_user_mean.iter().all(|&c| c == 0.0));
        assert_eq!(mc.sum_mean, 0.0);
        assert!(ese_monte_carlo(&ab, &inst.pb, &inst.h, &inst.users, 1.0, 1, &mut rng).is_err());
    }

    #[test]
    fn monte_carlo_matches_direct_sampling() {
        use crate::channel_model::sample_user_channel;
        let inst = instance(3, 5, 2, 12);
        let noise = 0.4;
        let s = SeedStreams::new(77);
        let mc = ese_monte_carlo(&inst.ab, &inst.pb, &inst.h, &inst.users, noise, 20, &mut s.rng(Stream::UserChannels, 0)).unwrap();
        let mut rng = s.rng(Stream::UserChannels, 0);
        let mut acc = [0.0; 2];
        for _ in 0..20 {
            let hk: Vec<CVector> = inst.users.iter().map(|uc| sample_user_channel(uc, &mut rng)).collect();
            for (k, a) in acc.iter_mut().enumerate() {
                *a += (1.0 + instantaneous_sinr(k, &inst.ab, &inst.pb, &inst.h, &hk, noise).unwrap()).log2();
            }
        }
        for k in 0..2 {
            assert!((acc[k] / 20.0 - mc.per_user_mean[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn monte_carlo_stderr_scales_with_trials() {
        let inst = instance(3, 6, 2, 13);
        let s = SeedStreams::new(21);
        let a = ese_monte_carlo(&inst.ab, &inst.pb, &inst.h, &inst.users, 0.5, 1000, &mut s.rng(Stream::UserChannels, 0)).unwrap();
        let b = ese_monte_carlo(&inst.ab, &inst.pb, &inst.h, &inst.users, 0.5, 4000, &mut s.rng(Stream::UserChannels, 1)).unwrap();
        let ratio = a.sum_stderr / b.sum_stderr;
        assert!((ratio - 2.0).abs() < 0.4, "{ratio}");
    }

    #[test]
    fn monte_carlo_nonincreasing_in_noise() {
        let inst = instance(3, 6, 2, 14);
        let s = SeedStreams::new(3);
        let vals: Vec<f64> = [0.1, 1.0, 10.0]
            .iter()
            .map(|&nv| {
                ese_monte_carlo(&inst.ab, &inst.pb, &inst.h, &inst.users, nv, 500, &mut s.rng(Stream::UserChannels, 0))
                    .unwrap()
                    .sum_mean
            })
            .collect();
        assert!(vals[0] >= vals[1] && vals[1] >= vals[2] && vals[2] >= 0.0);
    }

    #[test]
    fn unit_conversions() {
        assert!((dbm_to_watts(-93.0) - 5.011_872_336_272_715e-13).abs() < 1e-24);
        assert!((dbm_to_watts(30.0) - 1.0).abs() < 1e-15);
        assert!((db_to_linear(-30.0) - 1e-3).abs() < 1e-18);
    }
}
