//! Channel synthesis: array geometry and steering vectors, the geometric
//! AP-RIS channel, one-ring spatial correlation of the RIS-user links,
//! sampling, path loss and pilot-overhead accounting.
//!
//! Angles are radians, distances meters, gains linear.

mod correlation;
mod sampling;

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{domain, Result};
use crate::{CMatrix, CVector, C64};

pub use correlation::{spatial_correlation, spectral_decompose, QUADRATURE_TOLERANCE};
pub use sampling::{
    draw_path_clusters, generate_ap_ris_channel, sample_correlation, sample_user_channel,
};

/// Uniform planar RIS with `n_h` elements per row and `n_v` per column,
/// indexed row by row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RisGeometry {
    pub n_h: usize,
    pub n_v: usize,
    /// Horizontal element spacing (m).
    pub d_h: f64,
    /// Vertical element spacing (m).
    pub d_v: f64,
    /// Carrier wavelength (m).
    pub wavelength: f64,
}

impl RisGeometry {
    pub fn new(n_h: usize, n_v: usize, d_h: f64, d_v: f64, wavelength: f64) -> Result<Self> {
        let g = Self { n_h, n_v, d_h, d_v, wavelength };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_h == 0 || self.n_v == 0 {
            return domain("RIS must have at least one element per row and column");
        }
        if !(self.d_h > 0.0 && self.d_v > 0.0 && self.wavelength > 0.0) {
            return domain("RIS spacings and wavelength must be positive");
        }
        Ok(())
    }

    /// Total element count `N = n_h * n_v`.
    pub fn n(&self) -> usize {
        self.n_h * self.n_v
    }

    /// Zero-based (column, row) grid index of the 1-based element `n`.
    fn grid_index(&self, n: usize) -> (usize, usize) {
        ((n - 1) % self.n_h, (n - 1) / self.n_h)
    }
}

/// Uniform linear array at the AP.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApGeometry {
    pub m: usize,
    pub spacing_over_wavelength: f64,
}

impl ApGeometry {
    /// Half-wavelength ULA with `m` antennas.
    pub fn new(m: usize) -> Result<Self> {
        Self::with_spacing(m, 0.5)
    }

    pub fn with_spacing(m: usize, spacing_over_wavelength: f64) -> Result<Self> {
        if m == 0 {
            return domain("AP needs at least one antenna");
        }
        if !(spacing_over_wavelength > 0.0) {
            return domain("AP antenna spacing must be positive");
        }
        Ok(Self { m, spacing_over_wavelength })
    }
}

/// One dominant propagation path of the AP-RIS channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathCluster {
    /// Variance of the complex path gain.
    pub gain_variance: f64,
    /// Angle of arrival at the AP, in `[0, pi]`.
    pub aoa_ap: f64,
    /// Azimuth angle of departure at the RIS, in `[-pi/2, pi/2]`.
    pub aod_azimuth: f64,
    /// Elevation angle of departure at the RIS, in `[-pi/2, pi/2]`.
    pub aod_elevation: f64,
}

impl PathCluster {
    pub fn validate(&self) -> Result<()> {
        if !(self.gain_variance > 0.0) {
            return domain("path gain variance must be positive");
        }
        if !(0.0..=PI).contains(&self.aoa_ap) {
            return domain("AP angle of arrival must lie in [0, pi]");
        }
        if !(-FRAC_PI_2..=FRAC_PI_2).contains(&self.aod_azimuth)
            || !(-FRAC_PI_2..=FRAC_PI_2).contains(&self.aod_elevation)
        {
            return domain("RIS departure angles must lie in [-pi/2, pi/2]");
        }
        Ok(())
    }
}

/// Spatial correlation of one RIS-user channel together with its truncated
/// spectral factors `r ~= d * diag(lambda) * d^H`.
#[derive(Debug, Clone, PartialEq)]
pub struct UserCorrelation {
    pub r: CMatrix,
    /// `N x rank` matrix of orthonormal eigenvectors.
    pub d: CMatrix,
    /// Retained eigenvalues, descending.
    pub lambda: Vec<f64>,
    pub rank: usize,
    /// Large-scale fading coefficient, `trace(r) / N`.
    pub beta: f64,
}

impl UserCorrelation {
    pub fn n(&self) -> usize {
        self.r.nrows()
    }

    /// `d * diag(lambda) * d^H`.
    pub fn reconstruct(&self) -> CMatrix {
        let mut scaled = self.d.clone();
        for (mut col, &l) in scaled.column_iter_mut().zip(&self.lambda) {
            col *= C64::from(l);
        }
        &scaled * self.d.adjoint()
    }
}

/// One-ring scattering geometry of a user in the horizontal plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OneRingParams {
    /// Horizontal distance from the origin to the user (m).
    pub d: f64,
    /// Radius of the scattering ring (m).
    pub r: f64,
    /// Azimuth angle of the user.
    pub phi_az: f64,
    /// RIS height (m).
    pub h: f64,
}

/// Angular parameters of a one-ring user as seen from the RIS.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OneRingAngles {
    pub delta_phi_az: f64,
    pub phi_el: f64,
    pub delta_phi_el: f64,
}

/// Location of the 1-based element `n`: `[0, i_h * d_h, i_v * d_v]`.
pub fn ris_element_position(n: usize, geom: &RisGeometry) -> Result<[f64; 3]> {
    if n == 0 || n > geom.n() {
        return domain(format!("element index {n} outside 1..={}", geom.n()));
    }
    let (ih, iv) = geom.grid_index(n);
    Ok([0.0, ih as f64 * geom.d_h, iv as f64 * geom.d_v])
}

/// Wave vector for azimuth `phi_az` and elevation `phi_el`.
///
/// The component order is `[cos(az) sin(el), cos(el) sin(az), sin(el)]`,
/// which is not the textbook spherical parameterisation; the element grid
/// lies in the y-z plane so only the last two components influence the
/// response.
pub fn wave_vector(phi_az: f64, phi_el: f64, wavelength: f64) -> [f64; 3] {
    let k = 2.0 * PI / wavelength;
    [
        k * phi_az.cos() * phi_el.sin(),
        k * phi_el.cos() * phi_az.sin(),
        k * phi_el.sin(),
    ]
}

/// Unit-norm RIS response vector.
pub fn ris_response(phi_az: f64, phi_el: f64, geom: &RisGeometry) -> CVector {
    let k = wave_vector(phi_az, phi_el, geom.wavelength);
    let n = geom.n();
    let scale = 1.0 / (n as f64).sqrt();
    CVector::from_fn(n, |i, _| {
        let (ih, iv) = geom.grid_index(i + 1);
        let phase = k[1] * ih as f64 * geom.d_h + k[2] * iv as f64 * geom.d_v;
        C64::from_polar(scale, phase)
    })
}

/// Unit-norm ULA response for angle `gamma` in `[0, pi]`.
pub fn ap_response(gamma: f64, geom: &ApGeometry) -> CVector {
    let scale = 1.0 / (geom.m as f64).sqrt();
    let step = 2.0 * PI * geom.spacing_over_wavelength * gamma.cos();
    CVector::from_fn(geom.m, |m, _| C64::from_polar(scale, step * m as f64))
}

/// Azimuth spread, mean elevation and elevation spread of a one-ring user.
pub fn one_ring_angles(p: &OneRingParams) -> Result<OneRingAngles> {
    if !(p.r > 0.0 && p.h > 0.0) {
        return domain("ring radius and RIS height must be positive");
    }
    if !(p.d > p.r) {
        return domain(format!(
            "user distance {} must exceed ring radius {}",
            p.d, p.r
        ));
    }
    let near = (p.h / (p.d - p.r)).atan();
    let far = (p.h / (p.d + p.r)).atan();
    Ok(OneRingAngles {
        delta_phi_az: (p.r / p.d).atan(),
        phi_el: 0.5 * (near + far),
        delta_phi_el: 0.5 * (near - far),
    })
}

/// Log-distance path loss `c0 * (dist / d0)^(-alpha)`.
pub fn path_loss(dist: f64, alpha: f64, c0: f64, d0: f64) -> Result<f64> {
    if !(dist > 0.0) || !(d0 > 0.0) {
        return domain("path-loss distances must be positive");
    }
    Ok(c0 * (dist / d0).powf(-alpha))
}

/// Constant term of the AP-RIS pilot cost.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PilotConstant {
    /// `2(N + 1)`.
    #[default]
    NPlusOne,
    /// `2(N - 1)`.
    NMinusOne,
}

/// Pilot cost split into its AP-RIS and correlation-estimation parts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PilotOverhead {
    pub tau1: u64,
    pub tau2: u64,
}

impl PilotOverhead {
    pub fn total(&self) -> u64 {
        self.tau1 + self.tau2
    }
}

/// Pilot overhead for `n` RIS elements, `k` users, `s` observation blocks
/// and `tau_b` pilots per channel realization.
pub fn pilot_overhead(
    n: u64,
    k: u64,
    s: u64,
    tau_b: u64,
    constant: PilotConstant,
) -> Result<PilotOverhead> {
    if n == 0 || k == 0 || s == 0 || tau_b == 0 {
        return domain("pilot accounting needs positive counts");
    }
    let tau1 = match constant {
        PilotConstant::NPlusOne => 2 * (n + 1),
        PilotConstant::NMinusOne => 2 * (n - 1),
    };
    Ok(PilotOverhead { tau1, tau2: k * s * tau_b })
}
