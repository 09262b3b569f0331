//! Random draws: AP-RIS channel realizations, correlated RIS-user channels and
//! sample correlation estimates.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::Rng;

use super::{ap_response, ris_response, ApGeometry, PathCluster, RisGeometry, UserCorrelation};
use crate::error::{domain, Result};
use crate::rng::complex_gaussian;
use crate::{CMatrix, CVector, C64};

/// `count` clusters with equal gain variance and angles drawn uniformly:
/// AP arrival over `[0, pi]`, RIS departure azimuth and elevation over
/// `[-pi/2, pi/2]`.
pub fn draw_path_clusters<R: Rng + ?Sized>(
    count: usize,
    gain_variance: f64,
    rng: &mut R,
) -> Vec<PathCluster> {
    (0..count)
        .map(|_| PathCluster {
            gain_variance,
            aoa_ap: rng.random_range(0.0..=PI),
            aod_azimuth: rng.random_range(-FRAC_PI_2..=FRAC_PI_2),
            aod_elevation: rng.random_range(-FRAC_PI_2..=FRAC_PI_2),
        })
        .collect()
}

/// Geometric AP-RIS channel
/// `H = sqrt(beta_h M N / rho) * sum_l g_l e_ap(gamma_l) e_ris(az_l, el_l)^H`
/// with `g_l ~ CN(0, sigma_l^2)` and `rho = sum_l sigma_l^2`, so that
/// `E ||H||_F^2 = beta_h M N`. The path count is already carried by `rho`;
/// dividing by `L` as well would leave the average entry power at `beta_h / L`.
pub fn generate_ap_ris_channel<R: Rng + ?Sized>(
    clusters: &[PathCluster],
    beta_h: f64,
    ap: &ApGeometry,
    ris: &RisGeometry,
    rng: &mut R,
) -> Result<CMatrix> {
    if clusters.is_empty() {
        return domain("AP-RIS channel needs at least one path");
    }
    for c in clusters {
        c.validate()?;
    }
    if !(beta_h >= 0.0) {
        return domain("AP-RIS path loss must be non-negative");
    }
    let rho: f64 = clusters.iter().map(|c| c.gain_variance).sum();
    let (m, n) = (ap.m, ris.n());
    let scale = (beta_h * (m * n) as f64 / rho).sqrt();
    let mut h = CMatrix::zeros(m, n);
    for c in clusters {
        let gain = complex_gaussian(rng, c.gain_variance) * scale;
        let a = ap_response(c.aoa_ap, ap);
        let e = ris_response(c.aod_azimuth, c.aod_elevation, ris);
        h += (a * e.adjoint()) * gain;
    }
    Ok(h)
}

/// One draw of `h = sum_y sqrt(lambda_y) z_y d_y` with `z ~ CN(0, I)`.
pub fn sample_user_channel<R: Rng + ?Sized>(uc: &UserCorrelation, rng: &mut R) -> CVector {
    let coeffs = CVector::from_iterator(
        uc.rank,
        uc.lambda.iter().map(|&l| complex_gaussian(rng, 1.0) * l.sqrt()),
    );
    if uc.rank == 0 {
        return CVector::zeros(uc.n());
    }
    &uc.d * coeffs
}

/// `(1/S) sum_i h_i h_i^H`.
pub fn sample_correlation(samples: &[CVector]) -> Result<CMatrix> {
    let first = match samples.first() {
        Some(s) => s,
        None => return domain("sample correlation needs at least one sample"),
    };
    let n = first.len();
    if samples.iter().any(|s| s.len() != n) {
        return domain("samples have inconsistent lengths");
    }
    let mut acc = CMatrix::zeros(n, n);
    for s in samples {
        acc.gerc(C64::from(1.0), s, s, C64::from(1.0));
    }
    // exact Hermitian symmetry regardless of summation rounding
    for i in 0..n {
        acc[(i, i)].im = 0.0;
        for j in 0..i {
            acc[(i, j)] = acc[(j, i)].conj();
        }
    }
    Ok(acc / C64::from(samples.len() as f64))
}
