//! AP precoder design for a fixed RIS phase vector: the SVD beamformer and
//! the fractional-programming (Lagrangian dual plus quadratic transform)
//! iteration.

use nalgebra::SymmetricEigen;

use crate::channel_model::UserCorrelation;
use crate::error::{domain, numeric, Result};
use crate::ese_metrics::{build_surrogate_context, ActiveBeam, PassiveBeam, SurrogateContext};
use crate::{CMatrix, C64};

/// Columns are the `k` dominant left singular vectors of `h`, each scaled to
/// power `p / k`, so `W^H W = (p / k) I`.
pub fn svd_beamformer(h: &CMatrix, p: f64, k: usize) -> Result<ActiveBeam> {
    let m = h.nrows();
    if k == 0 || k > m {
        return domain(format!("cannot form {k} beams from {m} antennas"));
    }
    if k > h.ncols() {
        return domain(format!("channel has only {} independent directions", h.ncols()));
    }
    if !(p >= 0.0) {
        return domain("power budget must be non-negative");
    }
    let svd = h.clone().svd(true, false);
    let u = svd.u.as_ref().expect("left singular vectors requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let scale = C64::from((p / k as f64).sqrt());
    let w = CMatrix::from_fn(m, k, |row, col| u[(row, order[col])] * scale);
    ActiveBeam::new(w, p)
}

/// Per-user eigen-directions lifted through the cascade:
/// `dirs[k]` column `y` is `H diag(theta)^H [D_k]_y`, so that
/// `A_k = sum_y eig[k][y] * d_ky d_ky^H`. Every user is padded with zero
/// eigenvalues (and zero directions) to the common rank.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveDirections {
    pub dirs: Vec<CMatrix>,
    pub eig: Vec<Vec<f64>>,
}

impl EffectiveDirections {
    pub fn new(h: &CMatrix, pb: &PassiveBeam, users: &[UserCorrelation]) -> Self {
        let common = users.iter().map(|u| u.rank).max().unwrap_or(0);
        let mut cascade = h.clone();
        for (mut col, t) in cascade.column_iter_mut().zip(pb.theta().iter()) {
            col *= t.conj();
        }
        let mut dirs = Vec::with_capacity(users.len());
        let mut eig = Vec::with_capacity(users.len());
        for uc in users {
            let lifted = &cascade * &uc.d;
            let mut padded = CMatrix::zeros(h.nrows(), common);
            padded.columns_mut(0, uc.rank).copy_from(&lifted);
            dirs.push(padded);
            let mut l = uc.lambda.clone();
            l.resize(common, 0.0);
            eig.push(l);
        }
        Self { dirs, eig }
    }

    /// Common rank `Y`.
    pub fn rank(&self) -> usize {
        self.eig.first().map_or(0, Vec::len)
    }
}

/// Stationary point of the Lagrangian dual transform in each auxiliary
/// variable: the surrogate SINR of every user.
pub fn optimal_gamma(w: &ActiveBeam, ctx: &SurrogateContext) -> Vec<f64> {
    let forms = ctx.forms_from_active(w.w());
    (0..forms.users()).map(|k| forms.sinr(k, ctx.noise_var)).collect()
}

/// Quadratic-transform auxiliaries
/// `q_ky = sqrt(lambda_ky (1 + gamma_k)) w_k^H d_ky / (sum_j w_j^H A_k w_j + noise)`.
pub fn update_q(w: &ActiveBeam, gamma: &[f64], dirs: &EffectiveDirections, ctx: &SurrogateContext) -> CMatrix {
    let forms = ctx.forms_from_active(w.w());
    let y = dirs.rank();
    CMatrix::from_fn(gamma.len(), y, |k, yy| {
        let total = forms.0[k].iter().sum::<f64>() + ctx.noise_var;
        let coef = (dirs.eig[k][yy] * (1.0 + gamma[k])).sqrt();
        w.w().column(k).dotc(&dirs.dirs[k].column(yy)) * (coef / total)
    })
}

/// Result of one precoder update.
#[derive(Debug, Clone, PartialEq)]
pub struct WUpdate {
    pub beam: ActiveBeam,
    /// Multiplier of the power constraint; zero when it is inactive.
    pub dual: f64,
}

const NULL_EIGEN_RATIO: f64 = 1e-12;
const BISECTION_STEPS: usize = 200;

/// Closed-form precoder update
/// `w_k = sqrt(1 + gamma_k) (mu I + sum_k sum_y |q_ky|^2 A_k)^{-1} sum_y conj(q_ky) sqrt(lambda_ky) d_ky`
/// with the multiplier `mu >= 0` found by bisection so that `||W||_F^2 <= p`,
/// with equality whenever the unconstrained solution is infeasible.
///
/// The regularised inverse is applied through an eigendecomposition of the
/// weighted sum, which makes the power an explicit decreasing function of
/// `mu`. Eigen-directions with eigenvalue below `1e-12` of the largest carry
/// only rounding noise of the right-hand sides and are discarded.
pub fn update_w(
    q: &CMatrix,
    gamma: &[f64],
    dirs: &EffectiveDirections,
    ctx: &SurrogateContext,
    p: f64,
) -> Result<WUpdate> {
    let k_count = gamma.len();
    let m = ctx.a_mats.first().map_or(0, |a| a.nrows());
    if q.nrows() != k_count || ctx.users() != k_count {
        return domain("auxiliary variables disagree on the user count");
    }
    let mut weighted = CMatrix::zeros(m, m);
    for (k, a) in ctx.a_mats.iter().enumerate() {
        let wsum: f64 = q.row(k).iter().map(|z| z.norm_sqr()).sum();
        weighted += a * C64::from(wsum);
    }
    let mut rhs = CMatrix::zeros(m, k_count);
    for k in 0..k_count {
        let mut col = rhs.column_mut(k);
        for yy in 0..q.ncols() {
            let c = q[(k, yy)].conj() * dirs.eig[k][yy].sqrt() * (1.0 + gamma[k]).sqrt();
            col.axpy(c, &dirs.dirs[k].column(yy), C64::from(1.0));
        }
    }
    if rhs.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return numeric("non-finite precoder right-hand side");
    }
    let eig = SymmetricEigen::new((&weighted + weighted.adjoint()) * C64::from(0.5));
    let mu_max = eig.eigenvalues.iter().fold(0.0f64, |a, &b| a.max(b));
    let mut coeffs = eig.eigenvectors.adjoint() * &rhs;
    let keep: Vec<bool> = eig.eigenvalues.iter().map(|&e| mu_max > 0.0 && e > NULL_EIGEN_RATIO * mu_max).collect();
    for (i, mut row) in coeffs.row_iter_mut().enumerate() {
        if !keep[i] {
            row.fill(C64::from(0.0));
        }
    }
    let energies: Vec<f64> = coeffs.row_iter().map(|r| r.iter().map(|z| z.norm_sqr()).sum()).collect();
    let power = |dual: f64| -> f64 {
        energies
            .iter()
            .zip(eig.eigenvalues.iter())
            .zip(&keep)
            .filter(|(_, &k)| k)
            .map(|((e, mu), _)| e / (mu + dual).powi(2))
            .sum()
    };
    let total_energy: f64 = energies.iter().sum();
    let dual = if power(0.0) <= p {
        0.0
    } else {
        if !(p > 0.0) {
            return numeric("cannot meet a zero power budget with a nonzero precoder");
        }
        // power(mu) <= total_energy / mu^2, so this bracket is feasible
        let (mut lo, mut hi) = (0.0, (total_energy / p).sqrt());
        if !hi.is_finite() || power(hi) > p {
            return numeric("failed to bracket the power multiplier");
        }
        for _ in 0..BISECTION_STEPS {
            let mid = 0.5 * (lo + hi);
            if power(mid) > p {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-15 * hi {
                break;
            }
        }
        if (power(hi) - p).abs() > 1e-6 * p {
            return numeric("power multiplier bisection did not reach the budget");
        }
        hi
    };
    for (i, mut row) in coeffs.row_iter_mut().enumerate() {
        if keep[i] {
            row /= C64::from(eig.eigenvalues[i] + dual);
        }
    }
    let w = &eig.eigenvectors * coeffs;
    let beam = ActiveBeam::new(w, p).map_err(|e| crate::Error::Numeric(e.to_string()))?;
    Ok(WUpdate { beam, dual })
}

/// Iteration controls for [`fp_active`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FpParams {
    pub max_iter: usize,
    /// Stop once the relative objective increase drops below this.
    pub tol: f64,
}

impl Default for FpParams {
    fn default() -> Self {
        Self { max_iter: 100, tol: 1e-4 }
    }
}

/// Final state and history of the fractional-programming iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct FpState {
    pub gamma: Vec<f64>,
    pub q: CMatrix,
    pub w: ActiveBeam,
    /// Surrogate sum rate (bits/s/Hz) of the initial precoder and after
    /// every iteration.
    pub objective_trace: Vec<f64>,
    /// `||W||_F^2` after every precoder update.
    pub power_trace: Vec<f64>,
    /// Power multiplier chosen by every precoder update.
    pub dual_trace: Vec<f64>,
    pub iterations: usize,
}

/// Alternates the auxiliary updates (`gamma`, then `q`) with the closed-form
/// precoder update, starting from `w0`, for a fixed RIS phase vector.
pub fn fp_active(
    pb: &PassiveBeam,
    h: &CMatrix,
    users: &[UserCorrelation],
    noise_var: f64,
    w0: &ActiveBeam,
    params: FpParams,
) -> Result<FpState> {
    let p = w0.power_budget();
    let ctx = build_surrogate_context(w0, pb, h, users, noise_var)?;
    let dirs = EffectiveDirections::new(h, pb, users);
    let objective = |w: &ActiveBeam| ctx.forms_from_active(w.w()).surrogate(noise_var).sum;

    let mut w = w0.clone();
    let mut current = objective(&w);
    if !current.is_finite() {
        return numeric("non-finite initial objective");
    }
    let mut state = FpState {
        gamma: vec![0.0; users.len()],
        q: CMatrix::zeros(users.len(), dirs.rank()),
        w: w.clone(),
        objective_trace: vec![current],
        power_trace: Vec::new(),
        dual_trace: Vec::new(),
        iterations: 0,
    };
    for _ in 0..params.max_iter {
        let gamma = optimal_gamma(&w, &ctx);
        let q = update_q(&w, &gamma, &dirs, &ctx);
        let upd = update_w(&q, &gamma, &dirs, &ctx, p)?;
        let next = objective(&upd.beam);
        if !next.is_finite() {
            return numeric("non-finite objective in FP iteration");
        }
        state.iterations += 1;
        state.power_trace.push(upd.beam.power());
        state.dual_trace.push(upd.dual);
        state.objective_trace.push(next);
        state.gamma = gamma;
        state.q = q;
        w = upd.beam;
        let gain = next - current;
        current = next;
        if gain < params.tol * current.abs().max(f64::MIN_POSITIVE) {
            break;
        }
    }
    state.w = w;
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel_model::spectral_decompose;
    use crate::rng::{complex_gaussian, SeedStreams, Stream};
    use crate::CVector;
    use rand::Rng;

    fn rand_mat<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
        CMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng, 1.0))
    }

    fn users<R: Rng>(n: usize, k: usize, rank: usize, rng: &mut R) -> Vec<UserCorrelation> {
        (0..k)
            .map(|_| {
                let f = rand_mat(n, rank, rng);
                spectral_decompose(&(&f * f.adjoint()), 1e-12).unwrap()
            })
            .collect()
    }

    #[test]
    fn svd_single_user_is_principal_direction() {
        let mut rng = SeedStreams::new(1).rng(Stream::PathGains, 0);
        let h = rand_mat(4, 6, &mut rng);
        let ab = svd_beamformer(&h, 2.0, 1).unwrap();
        let hh = &h * h.adjoint();
        let eig = SymmetricEigen::new(hh);
        let imax = (0..4).max_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b])).unwrap();
        let u1 = eig.eigenvectors.column(imax);
        let w = ab.w().column(0);
        assert!((w.norm_squared() - 2.0).abs() < 1e-12);
        assert!((u1.dotc(&w).norm() - 2f64.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn svd_columns_orthogonal_with_even_power() {
        let mut rng = SeedStreams::new(2).rng(Stream::PathGains, 0);
        let h = rand_mat(5, 7, &mut rng);
        let ab = svd_beamformer(&h, 3.0, 3).unwrap();
        let gram = ab.w().adjoint() * ab.w();
        let expect = CMatrix::identity(3, 3) * C64::from(1.0);
        assert!((gram - expect).iter().all(|z| z.norm() < 1e-12));
        assert!((ab.power() - 3.0).abs() < 1e-12);
        assert!(svd_beamformer(&h, 1.0, 6).is_err());
    }

    #[test]
    fn svd_rank_one_channel() {
        let u = CVector::from_vec(vec![C64::new(1.0, 1.0), C64::new(0.0, -2.0), C64::new(0.5, 0.0)]);
        let v = CVector::from_vec(vec![C64::new(0.3, 0.1), C64::new(-1.0, 0.0)]);
        let h = &u * v.adjoint() * C64::from(4.0);
        let ab = svd_beamformer(&h, 1.0, 1).unwrap();
        let un = u.normalize();
        assert!((un.dotc(&ab.w().column(0)).norm() - 1.0).abs() < 1e-10);
    }

    struct Fixture {
        pb: PassiveBeam,
        h: CMatrix,
        users: Vec<UserCorrelation>,
        noise: f64,
    }

    fn fixture(m: usize, n: usize, k: usize, rank: usize, seed: u64) -> Fixture {
        let s = SeedStreams::new(seed);
        let mut rng = s.rng(Stream::PathGains, 0);
        let h = rand_mat(m, n, &mut rng);
        let users = users(n, k, rank, &mut rng);
        let pb = PassiveBeam::random(n, &mut s.rng(Stream::ThetaInit, 0));
        Fixture { pb, h, users, noise: 1.0 }
    }

    #[test]
    fn gamma_cases() {
        let f = fixture(3, 4, 2, 2, 3);
        let zero = ActiveBeam::zeros(3, 2, 1.0).unwrap();
        let ctx = build_surrogate_context(&zero, &f.pb, &f.h, &f.users, f.noise).unwrap();
        assert_eq!(optimal_gamma(&zero, &ctx), vec![0.0, 0.0]);

        // single user: gamma = w^H A w / noise and f(W, gamma*) = ln(1 + gamma*)
        let f1 = fixture(3, 4, 1, 2, 4);
        let w = svd_beamformer(&f1.h, 2.0, 1).unwrap();
        let ctx = build_surrogate_context(&w, &f1.pb, &f1.h, &f1.users, f1.noise).unwrap();
        let g = optimal_gamma(&w, &ctx)[0];
        let s = ctx.forms_from_active(w.w()).signal(0);
        assert!((g - s / f1.noise).abs() < 1e-12 * g);
        let dual = (1.0 + g) * s / (s + f1.noise) + (1.0 + g).ln() - g;
        assert!((dual - (1.0 + g).ln()).abs() < 1e-12 * (1.0 + g).ln());
    }

    #[test]
    fn gamma_is_local_maximum_of_dual_function() {
        let f = fixture(4, 6, 3, 2, 5);
        let w = svd_beamformer(&f.h, 1.0, 3).unwrap();
        let ctx = build_surrogate_context(&w, &f.pb, &f.h, &f.users, f.noise).unwrap();
        let forms = ctx.forms_from_active(w.w());
        let gamma = optimal_gamma(&w, &ctx);
        for k in 0..3 {
            let s = forms.signal(k);
            let b = forms.0[k].iter().sum::<f64>() + f.noise;
            let fk = |g: f64| (1.0 + g) * s / b + (1.0 + g).ln() - g;
            assert!(fk(gamma[k]) >= fk(gamma[k] + 0.01));
            assert!(fk(gamma[k]) >= fk((gamma[k] - 0.01).max(0.0)));
        }
    }

    #[test]
    fn q_cases() {
        let f = fixture(3, 4, 2, 2, 6);
        let zero = ActiveBeam::zeros(3, 2, 1.0).unwrap();
        let ctx = build_surrogate_context(&zero, &f.pb, &f.h, &f.users, f.noise).unwrap();
        let dirs = EffectiveDirections::new(&f.h, &f.pb, &f.users);
        let q = update_q(&zero, &[0.0, 0.0], &dirs, &ctx);
        assert!(q.iter().all(|z| z.norm() == 0.0));

        // scalar oracle, Y = 1, K = 1
        let f1 = fixture(3, 4, 1, 1, 7);
        let w = svd_beamformer(&f1.h, 1.5, 1).unwrap();
        let ctx = build_surrogate_context(&w, &f1.pb, &f1.h, &f1.users, f1.noise).unwrap();
        let dirs = EffectiveDirections::new(&f1.h, &f1.pb, &f1.users);
        let gamma = optimal_gamma(&w, &ctx);
        let q = update_q(&w, &gamma, &dirs, &ctx);
        let lam = f1.users[0].lambda[0];
        let dk = f1.users[0].d.column(0);
        let mut dt = CVector::zeros(3);
        for m in 0..3 {
            for n in 0..4 {
                dt[m] += f1.h[(m, n)] * f1.pb.theta()[n].conj() * dk[n];
            }
        }
        let wk = w.w().column(0);
        let inner = wk.dotc(&dt);
        let signal = lam * inner.norm_sqr();
        let expect = inner * ((lam * (1.0 + gamma[0])).sqrt() / (signal + f1.noise));
        assert!((q[(0, 0)] - expect).norm() < 1e-12 * expect.norm());
    }

    #[test]
    fn directions_reconstruct_a_matrices() {
        let f = fixture(4, 6, 3, 3, 8);
        let w = svd_beamformer(&f.h, 1.0, 3).unwrap();
        let ctx = build_surrogate_context(&w, &f.pb, &f.h, &f.users, f.noise).unwrap();
        let dirs = EffectiveDirections::new(&f.h, &f.pb, &f.users);
        for k in 0..3 {
            let mut a = CMatrix::zeros(4, 4);
            for y in 0..dirs.rank() {
                let d = dirs.dirs[k].column(y);
                a += d * d.adjoint() * C64::from(dirs.eig[k][y]);
            }
            let err = (&a - &ctx.a_mats[k]).norm() / ctx.a_mats[k].norm();
            assert!(err < 1e-9, "{err}");
        }
    }

    #[test]
    fn update_w_with_zero_q_is_zero() {
        let f = fixture(3, 4, 2, 2, 9);
        let w = svd_beamformer(&f.h, 1.0, 2).unwrap();
        let ctx = build_surrogate_context(&w, &f.pb, &f.h, &f.users, f.noise).unwrap();
        let dirs = EffectiveDirections::new(&f.h, &f.pb, &f.users);
        let upd = update_w(&CMatrix::zeros(2, dirs.rank()), &[0.3, 0.4], &dirs, &ctx, 1.0).unwrap();
        assert_eq!(upd.dual, 0.0);
        assert!(upd.beam.w().iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn update_w_inactive_constraint_matches_plain_solve() {
        // full-rank weighted sum so the unregularised inverse exists
        let f = fixture(3, 8, 2, 4, 10);
        let w = svd_beamformer(&f.h, 1.0, 2).unwrap();
        let ctx = build_surrogate_context(&w, &f.pb, &f.h, &f.users, f.noise).unwrap();
        let dirs = EffectiveDirections::new(&f.h, &f.pb, &f.users);
        let gamma = optimal_gamma(&w, &ctx);
        let q = update_q(&w, &gamma, &dirs, &ctx);
        let upd = update_w(&q, &gamma, &dirs, &ctx, 1e12).unwrap();
        assert_eq!(upd.dual, 0.0);
        let mut weighted = CMatrix::zeros(3, 3);
        for k in 0..2 {
            let s: f64 = q.row(k).iter().map(|z| z.norm_sqr()).sum();
            weighted += &ctx.a_mats[k] * C64::from(s);
        }
        let inv = weighted.try_inverse().unwrap();
        for k in 0..2 {
            let mut b = CVector::zeros(3);
            for y in 0..dirs.rank() {
                b += dirs.dirs[k].column(y) * (q[(k, y)].conj() * dirs.eig[k][y].sqrt());
            }
            let expect = &inv * b * C64::from((1.0 + gamma[k]).sqrt());
            let err = (upd.beam.w().column(k) - &expect).norm() / expect.norm();
            assert!(err < 1e-8, "{err}");
        }
    }

    #[test]
    fn update_w_active_constraint_meets_budget() {
        let f = fixture(8, 16, 3, 2, 11);
        let w = svd_beamformer(&f.h, 0.1, 3).unwrap();
        let ctx = build_surrogate_context(&w, &f.pb, &f.h, &f.users, f.noise).unwrap();
        let dirs = EffectiveDirections::new(&f.h, &f.pb, &f.users);
        let gamma = optimal_gamma(&w, &ctx);
        let q = update_q(&w, &gamma, &dirs, &ctx);
        let upd = update_w(&q, &gamma, &dirs, &ctx, 0.1).unwrap();
        assert!(upd.dual > 0.0);
        let pw = upd.beam.power();
        assert!((0.1 * (1.0 - 1e-6)..=0.1 * (1.0 + 1e-9)).contains(&pw), "{pw}");
    }

    #[test]
    fn fp_is_monotone_and_beats_svd() {
        for seed in 0..5 {
            let f = fixture(8, 16, 2, 2, 20 + seed);
            let w0 = svd_beamformer(&f.h, 10.0, 2).unwrap();
            let st = fp_active(&f.pb, &f.h, &f.users, f.noise, &w0, FpParams::default()).unwrap();
            for pair in st.objective_trace.windows(2) {
                assert!(pair[1] >= pair[0] - 1e-9, "{pair:?}");
            }
            assert!(st.objective_trace.last().unwrap() >= &st.objective_trace[0]);
            assert!(st.power_trace.iter().all(|&p| p <= 10.0 * (1.0 + 1e-9)));
            assert!(st.gamma.iter().all(|&g| g >= 0.0));
        }
    }

    #[test]
    fn fp_stops_at_stationary_matched_filter() {
        // K = 1, rank-one correlation: the matched filter is already optimal
        let mut rng = SeedStreams::new(30).rng(Stream::PathGains, 0);
        let h = rand_mat(4, 5, &mut rng);
        let v = CVector::from_fn(5, |_, _| complex_gaussian(&mut rng, 1.0));
        let users = vec![spectral_decompose(&(&v * v.adjoint()), 1e-12).unwrap()];
        let pb = PassiveBeam::identity(5);
        let a = &h * &v;
        let w0 = ActiveBeam::new(CMatrix::from_column_slice(4, 1, (a.normalize() * C64::from(2f64.sqrt())).as_slice()), 2.0).unwrap();
        let st = fp_active(&pb, &h, &users, 0.5, &w0, FpParams::default()).unwrap();
        assert!(st.iterations <= 2);
        let t = &st.objective_trace;
        assert!((t[t.len() - 1] - t[0]).abs() < 1e-4 * t[0]);
    }

    #[test]
    fn gamma_invariant_to_common_scaling() {
        let f = fixture(4, 6, 3, 2, 40);
        let w = svd_beamformer(&f.h, 1.0, 3).unwrap();
        let ctx = build_surrogate_context(&w, &f.pb, &f.h, &f.users, f.noise).unwrap();
        let g0 = optimal_gamma(&w, &ctx);
        for c in [0.1, 10.0] {
            let scaled: Vec<UserCorrelation> = f
                .users
                .iter()
                .map(|u| spectral_decompose(&(&u.r * C64::from(c)), 1e-12).unwrap())
                .collect();
            let ctx = build_surrogate_context(&w, &f.pb, &f.h, &scaled, f.noise * c).unwrap();
            let g = optimal_gamma(&w, &ctx);
            for (a, b) in g0.iter().zip(&g) {
                assert!((a - b).abs() < 1e-10 * a);
            }
            let forms = ctx.forms_from_active(w.w());
            for (k, gk) in g.iter().enumerate() {
                assert!((gk - forms.sinr(k, f.noise * c)).abs() <= 1e-10 * gk);
            }
        }
    }
}
