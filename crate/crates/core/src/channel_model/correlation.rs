//! One-ring spatial correlation under truncated Laplacian angular spectra
//! and its spectral decomposition.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::SymmetricEigen;

use super::{RisGeometry, UserCorrelation};
use crate::error::{domain, numeric, Result};
use crate::{CMatrix, C64};

/// Absolute per-entry error target of the correlation quadrature, in units
/// of the large-scale coefficient.
pub const QUADRATURE_TOLERANCE: f64 = 1e-8;

const GAUSS_POINTS: usize = 10;
const MIN_REFINE: usize = 1;
const MAX_REFINE: usize = 256;

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Legendre recurrence for P_n(x) and its derivative
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Quadrature rule integrating against a Laplacian density truncated to
/// `[-pi/2, pi/2]`. Weights sum to one.
struct AngularRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl AngularRule {
    /// Composite Gauss-Legendre rule on each side of the mean. Panel edges sit
    /// at `mean +- scale * {0, 1/2, 1, 2, 4, ...}` so every panel sees a smooth
    /// integrand, and each graded panel is split into `refine` equal pieces.
    fn laplacian(mean: f64, spread: f64, refine: usize, gl: &(Vec<f64>, Vec<f64>)) -> Self {
        let scale = spread / std::f64::consts::SQRT_2;
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        let centre = mean.clamp(-FRAC_PI_2, FRAC_PI_2);
        // (direction, nearest and farthest distance from the mean)
        let sides = [(-1.0, mean - centre, mean + FRAC_PI_2), (1.0, centre - mean, FRAC_PI_2 - mean)];
        for (towards, near, far) in sides {
            if far <= near {
                continue;
            }
            let mut edges = vec![near];
            let mut t = scale * 0.5;
            while near + t < far {
                edges.push(near + t);
                t *= 2.0;
            }
            edges.push(far);
            for pair in edges.windows(2) {
                let width = (pair[1] - pair[0]) / refine as f64;
                for piece in 0..refine {
                    let a = pair[0] + piece as f64 * width;
                    for (node, w) in gl.0.iter().zip(&gl.1) {
                        let dist = a + 0.5 * width * (1.0 + node);
                        nodes.push(mean + towards * dist);
                        weights.push(0.5 * width * w * (-dist / scale).exp());
                    }
                }
            }
        }
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        Self { nodes, weights }
    }
}

/// Normalised (unit large-scale coefficient) correlation as a function of the
/// grid offset, for every horizontal offset `0..n_h` and vertical offset
/// `-(n_v-1)..n_v`. Row-major in `(dh, dv + n_v - 1)`.
fn offset_table(geom: &RisGeometry, az: &AngularRule, el: &AngularRule) -> Vec<C64> {
    let k = 2.0 * PI / geom.wavelength;
    let nv_span = 2 * geom.n_v - 1;
    let sin_az: Vec<f64> = az.nodes.iter().map(|a| a.sin()).collect();
    let mut table = vec![C64::new(0.0, 0.0); geom.n_h * nv_span];
    for (&e, &we) in el.nodes.iter().zip(&el.weights) {
        let (se, ce) = e.sin_cos();
        // azimuthal characteristic function at this elevation for every dh
        let inner: Vec<C64> = (0..geom.n_h)
            .map(|dh| {
                let c = k * ce * dh as f64 * geom.d_h;
                sin_az
                    .iter()
                    .zip(&az.weights)
                    .map(|(s, w)| C64::from_polar(*w, c * s))
                    .sum()
            })
            .collect();
        for dv in 0..nv_span {
            let offset = dv as f64 - (geom.n_v - 1) as f64;
            let g = C64::from_polar(we, k * se * offset * geom.d_v);
            for dh in 0..geom.n_h {
                table[dh * nv_span + dv] += g * inner[dh];
            }
        }
    }
    table
}

fn assemble(geom: &RisGeometry, table: &[C64], beta: f64) -> CMatrix {
    let n = geom.n();
    let nv_span = 2 * geom.n_v - 1;
    let lookup = |dh: isize, dv: isize| -> C64 {
        // R(-offset) = conj(R(offset))
        if dh >= 0 {
            table[dh as usize * nv_span + (dv + geom.n_v as isize - 1) as usize]
        } else {
            table[(-dh) as usize * nv_span + (-dv + geom.n_v as isize - 1) as usize].conj()
        }
    };
    CMatrix::from_fn(n, n, |m, p| {
        let dh = (m % geom.n_h) as isize - (p % geom.n_h) as isize;
        let dv = (m / geom.n_h) as isize - (p / geom.n_h) as isize;
        lookup(dh, dv) * beta
    })
}

/// Spatial correlation matrix of a RIS-user channel whose angular spectrum is
/// a product of truncated Laplacian densities in azimuth and elevation.
///
/// Entry `(m, n)` is `beta * E[exp(j k(az, el)^T (u_m - u_n))]`. The scale of
/// each Laplacian is `spread / sqrt(2)`. The double integral is evaluated by
/// composite Gauss-Legendre quadrature whose panel count is doubled until
/// successive estimates agree within [`QUADRATURE_TOLERANCE`]; tiny negative
/// eigenvalues left by the quadrature are then clipped and the trace restored
/// to `N * beta`.
pub fn spatial_correlation(
    geom: &RisGeometry,
    mean_az: f64,
    spread_az: f64,
    mean_el: f64,
    spread_el: f64,
    beta: f64,
) -> Result<CMatrix> {
    geom.validate()?;
    if !(spread_az > 0.0 && spread_el > 0.0) {
        return domain("angular spreads must be positive");
    }
    if !(beta >= 0.0) || !beta.is_finite() {
        return domain("large-scale coefficient must be finite and non-negative");
    }
    if !(mean_az.is_finite() && mean_el.is_finite()) {
        return domain("mean angles must be finite");
    }
    let gl = gauss_legendre(GAUSS_POINTS);
    let build = |refine: usize| {
        let az = AngularRule::laplacian(mean_az, spread_az, refine, &gl);
        let el = AngularRule::laplacian(mean_el, spread_el, refine, &gl);
        offset_table(geom, &az, &el)
    };
    let mut refine = MIN_REFINE;
    let mut table = build(refine);
    loop {
        if refine >= MAX_REFINE {
            return numeric("correlation quadrature did not converge");
        }
        refine *= 2;
        let finer = build(refine);
        let change = table
            .iter()
            .zip(&finer)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        table = finer;
        if change <= QUADRATURE_TOLERANCE {
            break;
        }
    }
    let r = assemble(geom, &table, beta);
    repair_psd(r, beta)
}

fn hermitian_part(r: &CMatrix) -> CMatrix {
    (r + r.adjoint()) * C64::from(0.5)
}

fn repair_psd(r: CMatrix, beta: f64) -> Result<CMatrix> {
    let n = r.nrows();
    let target_trace = n as f64 * beta;
    if target_trace == 0.0 {
        return Ok(CMatrix::zeros(n, n));
    }
    let eig = SymmetricEigen::new(hermitian_part(&r));
    let floor = -1e-10 * target_trace;
    if eig.eigenvalues.iter().any(|&l| l < floor) {
        return numeric("correlation quadrature produced a significantly indefinite matrix");
    }
    let clipped = eig.eigenvalues.map(|l| l.max(0.0));
    let mut scaled = eig.eigenvectors.clone();
    for (mut col, &l) in scaled.column_iter_mut().zip(clipped.iter()) {
        col *= C64::from(l);
    }
    let rebuilt = hermitian_part(&(&scaled * eig.eigenvectors.adjoint()));
    let trace = rebuilt.trace().re;
    Ok(rebuilt * C64::from(target_trace / trace))
}

/// Eigen-factorisation of a Hermitian PSD matrix. Eigenvalues at or below
/// `rank_tol * largest` (and all non-positive ones) are dropped; the rest are
/// returned in descending order with their eigenvectors.
pub fn spectral_decompose(r: &CMatrix, rank_tol: f64) -> Result<UserCorrelation> {
    if !r.is_square() {
        return domain("correlation matrix must be square");
    }
    let n = r.nrows();
    let scale = r.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if !scale.is_finite() {
        return domain("correlation matrix has non-finite entries");
    }
    let asym = (r - r.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if asym > 1e-10 * scale.max(f64::MIN_POSITIVE) {
        return domain(format!("matrix is not Hermitian (asymmetry {asym:e})"));
    }
    let beta = r.trace().re / n.max(1) as f64;
    if scale == 0.0 || n == 0 {
        return Ok(UserCorrelation {
            r: r.clone(),
            d: CMatrix::zeros(n, 0),
            lambda: Vec::new(),
            rank: 0,
            beta,
        });
    }
    let eig = SymmetricEigen::new(hermitian_part(r));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let largest = eig.eigenvalues[order[0]];
    let keep: Vec<usize> = order
        .into_iter()
        .filter(|&i| eig.eigenvalues[i] > 0.0 && eig.eigenvalues[i] > rank_tol * largest)
        .collect();
    let d = CMatrix::from_fn(n, keep.len(), |row, col| eig.eigenvectors[(row, keep[col])]);
    let lambda: Vec<f64> = keep.iter().map(|&i| eig.eigenvalues[i]).collect();
    Ok(UserCorrelation { r: r.clone(), d, rank: lambda.len(), lambda, beta })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel_model::ris_response;

    fn frob(m: &CMatrix) -> f64 {
        m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(GAUSS_POINTS);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        // exact up to degree 19
        let int: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(18)).sum();
        assert!((int - 2.0 / 19.0).abs() < 1e-14);
    }

    #[test]
    fn laplacian_rule_matches_closed_form_moments() {
        let gl = gauss_legendre(GAUSS_POINTS);
        // wide truncation: the mean of a symmetric Laplacian stays at the centre
        let rule = AngularRule::laplacian(0.0, 0.2, 4, &gl);
        assert!((rule.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let mean: f64 = rule.nodes.iter().zip(&rule.weights).map(|(x, w)| x * w).sum();
        assert!(mean.abs() < 1e-12);
        let var: f64 = rule.nodes.iter().zip(&rule.weights).map(|(x, w)| x * x * w).sum();
        // untruncated variance 2 b^2 = spread^2; truncation at pi/2 is ~1e-5 away
        assert!((var - 0.04).abs() < 1e-4, "{var}");
    }

    #[test]
    fn diagonal_equals_beta_and_is_hermitian() {
        let g = RisGeometry::new(4, 3, 0.0125, 0.0125, 0.1).unwrap();
        let r = spatial_correlation(&g, 0.5, 0.3, 0.2, 0.1, 2.5e-9).unwrap();
        for i in 0..12 {
            assert!((r[(i, i)].re - 2.5e-9).abs() < 1e-10 * 2.5e-9);
            assert!(r[(i, i)].im.abs() < 1e-25);
        }
        assert!(frob(&(&r - r.adjoint())) < 1e-12 * frob(&r));
        let uc = spectral_decompose(&r, 0.0).unwrap();
        assert!((uc.beta - 2.5e-9).abs() < 1e-10 * 2.5e-9);
    }

    #[test]
    fn vanishing_spread_collapses_to_rank_one() {
        let g = RisGeometry::new(3, 3, 0.0125, 0.0125, 0.1).unwrap();
        let (az, el) = (0.4, 0.2);
        let r = spatial_correlation(&g, az, 1e-7, el, 1e-7, 1.0).unwrap();
        let e = ris_response(az, el, &g);
        let expect = (&e * e.adjoint()) * C64::from(9.0);
        assert!(frob(&(&r - &expect)) < 1e-6, "{}", frob(&(&r - &expect)));
        let uc = spectral_decompose(&r, 1e-6).unwrap();
        assert_eq!(uc.rank, 1);
    }

    #[test]
    fn spectral_decompose_cases() {
        let id = CMatrix::identity(5, 5);
        let uc = spectral_decompose(&id, 1e-9).unwrap();
        assert_eq!(uc.rank, 5);
        assert!(uc.lambda.iter().all(|l| (l - 1.0).abs() < 1e-14));

        let v = crate::CVector::from_fn(4, |i, _| C64::new(i as f64 + 1.0, 0.5 - i as f64));
        let r1 = &v * v.adjoint();
        let uc1 = spectral_decompose(&r1, 1e-10).unwrap();
        assert_eq!(uc1.rank, 1);
        assert!(frob(&(uc1.reconstruct() - &r1)) < 1e-12 * frob(&r1));

        let zero = CMatrix::zeros(3, 3);
        assert_eq!(spectral_decompose(&zero, 0.0).unwrap().rank, 0);

        let mut bad = CMatrix::identity(3, 3);
        bad[(0, 1)] = C64::new(0.3, 0.0);
        assert!(matches!(spectral_decompose(&bad, 0.0), Err(crate::Error::Domain(_))));
    }

    #[test]
    fn non_positive_spread_is_rejected() {
        let g = RisGeometry::new(2, 2, 0.0125, 0.0125, 0.1).unwrap();
        assert!(spatial_correlation(&g, 0.0, 0.0, 0.0, 0.1, 1.0).is_err());
        assert!(spatial_correlation(&g, 0.0, 0.1, 0.0, -0.1, 1.0).is_err());
    }
}
