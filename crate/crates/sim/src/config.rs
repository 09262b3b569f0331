//! Scenario configuration: the TOML schema, the two user-layout presets and
//! the conversion to the linear-unit types of the core crate.
//!
//! Every key is optional; missing keys take the desk-scale `table1` preset values.
//! Powers are given in dBm and the reference path loss in dB; conversion to
//! watts and linear gain happens here and nowhere else.

// Negated comparisons double as NaN rejection.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::f64::consts::PI;
use std::path::Path;

use risbf_core::active_beamforming::FpParams;
use risbf_core::channel_model::{ApGeometry, PilotConstant, RisGeometry};
use risbf_core::ese_metrics::{db_to_linear, dbm_to_watts};
use risbf_core::passive_beamforming::GdParams;
use risbf_core::pipelines::{Hyper, SystemSetup, ThetaInit, UserPlacement};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("cannot parse config: {0}")]
    Parse(String),
    #[error("invalid `{field}`: {msg}")]
    Invalid { field: String, msg: String },
    #[error("unknown preset '{0}' (expected table1 or table2)")]
    UnknownPreset(String),
}

fn invalid<T>(field: &str, msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError::Invalid { field: field.to_string(), msg: msg.into() })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RisSection {
    pub n_h: usize,
    pub n_v: usize,
    /// Element spacing (m).
    pub spacing_h: f64,
    pub spacing_v: f64,
    pub wavelength: f64,
}

impl Default for RisSection {
    fn default() -> Self {
        Self { n_h: 8, n_v: 8, spacing_h: 0.05, spacing_v: 0.05, wavelength: 0.1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ApSection {
    pub antennas: usize,
    pub spacing_over_wavelength: f64,
}

impl Default for ApSection {
    fn default() -> Self {
        Self { antennas: 8, spacing_over_wavelength: 0.5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UserSection {
    /// Radians.
    pub azimuth: f64,
    /// Scattering ring radius (m).
    pub ring_radius: f64,
    /// Horizontal distance from the point below the RIS (m).
    pub distance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ThetaInitName {
    #[default]
    Random,
    Zeros,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PilotConstantName {
    #[default]
    NPlusOne,
    NMinusOne,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AlgorithmSection {
    pub gd_mu0: f64,
    pub gd_shrink: f64,
    pub gd_armijo_c: f64,
    pub gd_tol: f64,
    pub gd_max_iter: usize,
    pub fp_tol: f64,
    pub fp_max_iter: usize,
    pub outer_tol: f64,
    pub outer_max: usize,
    pub theta_init: ThetaInitName,
}

impl Default for AlgorithmSection {
    fn default() -> Self {
        let gd = GdParams::default();
        let fp = FpParams::default();
        let hyper = Hyper::default();
        Self {
            gd_mu0: gd.mu0,
            gd_shrink: gd.shrink,
            gd_armijo_c: gd.armijo_c,
            gd_tol: gd.tol,
            gd_max_iter: gd.max_iter,
            fp_tol: fp.tol,
            fp_max_iter: fp.max_iter,
            outer_tol: hyper.outer_tol,
            outer_max: hyper.outer_max,
            theta_init: ThetaInitName::Random,
        }
    }
}

/// Complete scenario description as it appears in a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    /// Label carried into CSV output.
    pub name: String,
    pub master_seed: u64,
    /// Number of seeds; run `i` uses `master_seed + i`.
    pub seeds: usize,
    pub mc_trials: usize,
    pub power_dbm: Vec<f64>,
    pub noise_dbm: f64,
    /// Path loss at the reference distance (dB).
    pub c0_db: f64,
    pub d0: f64,
    pub alpha_h: f64,
    pub alpha_r: f64,
    pub ap_position: [f64; 3],
    pub ris_position: [f64; 3],
    pub paths: usize,
    pub path_variance: f64,
    pub rank_tol: f64,
    pub pilot_constant: PilotConstantName,
    pub ris: RisSection,
    pub ap: ApSection,
    pub algorithm: AlgorithmSection,
    pub users: Vec<UserSection>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            name: "table1".into(),
            master_seed: 1,
            seeds: 20,
            mc_trials: 500,
            power_dbm: vec![0.0, 10.0, 20.0, 30.0],
            noise_dbm: -93.0,
            c0_db: -30.0,
            d0: 1.0,
            alpha_h: 2.2,
            alpha_r: 3.0,
            ap_position: [0.0, -15.0, 15.0],
            ris_position: [0.0, 0.0, 15.0],
            paths: 4,
            path_variance: 1.0,
            rank_tol: 1e-9,
            pilot_constant: PilotConstantName::NPlusOne,
            ris: RisSection::default(),
            ap: ApSection::default(),
            algorithm: AlgorithmSection::default(),
            users: table1_users(),
        }
    }
}

fn table1_users() -> Vec<UserSection> {
    vec![
        UserSection { azimuth: PI / 3.0, ring_radius: 30.0, distance: 80.0 },
        UserSection { azimuth: PI / 4.0, ring_radius: 40.0, distance: 90.0 },
        UserSection { azimuth: PI / 6.0, ring_radius: 50.0, distance: 100.0 },
    ]
}

fn table2_users() -> Vec<UserSection> {
    [PI / 3.0, PI / 4.0, PI / 6.0]
        .into_iter()
        .map(|azimuth| UserSection { azimuth, ring_radius: 50.0, distance: 100.0 })
        .collect()
}

/// Desk-scale preset by name: `table1` (unsymmetric users) or `table2`
/// (symmetric users).
pub fn preset(name: &str) -> Result<ScenarioConfig, ConfigError> {
    match name {
        "table1" => Ok(ScenarioConfig::default()),
        "table2" => Ok(ScenarioConfig { name: "table2".into(), users: table2_users(), ..ScenarioConfig::default() }),
        other => Err(ConfigError::UnknownPreset(other.to_string())),
    }
}

impl ScenarioConfig {
    /// Full-size setup: 16 antennas, a 20 x 20 RIS and 1000 fading draws.
    pub fn paper_scale(mut self) -> Self {
        self.ap.antennas = 16;
        self.ris.n_h = 20;
        self.ris.n_v = 20;
        self.mc_trials = 1000;
        self
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text).map_err(|e| ConfigError::Parse(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises to TOML")
    }

    /// SHA-256 of the canonical JSON form; independent of key order and
    /// formatting in the source text.
    pub fn digest(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("config serialises to JSON");
        hex::encode(Sha256::digest(&canonical))
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.users.is_empty() {
            return invalid("users", "at least one user is required");
        }
        for (i, u) in self.users.iter().enumerate() {
            let field = format!("users[{i}]");
            if !(u.ring_radius > 0.0) {
                return invalid(&field, "ring_radius must be positive");
            }
            if !(u.distance > u.ring_radius) {
                return invalid(&field, format!("distance {} must exceed ring_radius {}", u.distance, u.ring_radius));
            }
            if !u.azimuth.is_finite() {
                return invalid(&field, "azimuth must be finite");
            }
        }
        if self.power_dbm.is_empty() {
            return invalid("power_dbm", "power grid is empty");
        }
        if self.power_dbm.iter().any(|p| !p.is_finite()) {
            return invalid("power_dbm", "powers must be finite");
        }
        if self.power_dbm.windows(2).any(|w| w[1] <= w[0]) {
            return invalid("power_dbm", "power grid must be strictly increasing");
        }
        if !self.noise_dbm.is_finite() {
            return invalid("noise_dbm", "must be finite");
        }
        if !self.c0_db.is_finite() {
            return invalid("c0_db", "must be finite");
        }
        for (field, v) in [("d0", self.d0), ("path_variance", self.path_variance)] {
            if !(v > 0.0 && v.is_finite()) {
                return invalid(field, "must be positive");
            }
        }
        for (field, v) in [("alpha_h", self.alpha_h), ("alpha_r", self.alpha_r), ("rank_tol", self.rank_tol)] {
            if !(v >= 0.0 && v.is_finite()) {
                return invalid(field, "must be finite and non-negative");
            }
        }
        if self.paths == 0 {
            return invalid("paths", "at least one path is required");
        }
        if self.ap_position.iter().chain(&self.ris_position).any(|x| !x.is_finite()) {
            return invalid("ap_position", "positions must be finite");
        }
        if self.ap_position == self.ris_position {
            return invalid("ap_position", "AP and RIS must not coincide");
        }
        if !(self.ris_position[2] > 0.0) {
            return invalid("ris_position", "RIS height must be positive");
        }
        self.ris_geometry().map_err(|e| ConfigError::Invalid { field: "ris".into(), msg: e.to_string() })?;
        self.ap_geometry().map_err(|e| ConfigError::Invalid { field: "ap".into(), msg: e.to_string() })?;
        if self.users.len() > self.ap.antennas {
            return invalid("users", format!("{} users exceed {} AP antennas", self.users.len(), self.ap.antennas));
        }
        let a = &self.algorithm;
        if !(a.gd_mu0 > 0.0 && a.gd_mu0.is_finite()) {
            return invalid("algorithm.gd_mu0", "must be positive");
        }
        if !(a.gd_shrink > 0.0 && a.gd_shrink < 1.0) {
            return invalid("algorithm.gd_shrink", "must lie in (0, 1)");
        }
        for (field, v) in [
            ("algorithm.gd_armijo_c", a.gd_armijo_c),
            ("algorithm.gd_tol", a.gd_tol),
            ("algorithm.fp_tol", a.fp_tol),
            ("algorithm.outer_tol", a.outer_tol),
        ] {
            if !(v >= 0.0) || v.is_nan() {
                return invalid(field, "must be non-negative");
            }
        }
        Ok(())
    }

    pub fn ris_geometry(&self) -> risbf_core::Result<RisGeometry> {
        RisGeometry::new(self.ris.n_h, self.ris.n_v, self.ris.spacing_h, self.ris.spacing_v, self.ris.wavelength)
    }

    pub fn ap_geometry(&self) -> risbf_core::Result<ApGeometry> {
        ApGeometry::with_spacing(self.ap.antennas, self.ap.spacing_over_wavelength)
    }

    pub fn noise_watts(&self) -> f64 {
        dbm_to_watts(self.noise_dbm)
    }

    pub fn power_watts(&self) -> Vec<f64> {
        self.power_dbm.iter().map(|&p| dbm_to_watts(p)).collect()
    }

    pub fn pilot(&self) -> PilotConstant {
        match self.pilot_constant {
            PilotConstantName::NPlusOne => PilotConstant::NPlusOne,
            PilotConstantName::NMinusOne => PilotConstant::NMinusOne,
        }
    }

    /// Physical setup in linear units.
    pub fn system_setup(&self) -> Result<SystemSetup, ConfigError> {
        self.validate()?;
        Ok(SystemSetup {
            ap_position: self.ap_position,
            ris_position: self.ris_position,
            ris: self.ris_geometry().expect("validated"),
            ap: self.ap_geometry().expect("validated"),
            users: self
                .users
                .iter()
                .map(|u| UserPlacement { azimuth: u.azimuth, ring_radius: u.ring_radius, distance: u.distance })
                .collect(),
            alpha_h: self.alpha_h,
            alpha_r: self.alpha_r,
            c0: db_to_linear(self.c0_db),
            d0: self.d0,
            noise_var: self.noise_watts(),
            clusters: self.paths,
            cluster_variance: self.path_variance,
            rank_tol: self.rank_tol,
        })
    }

    pub fn hyper(&self) -> Hyper {
        let a = &self.algorithm;
        Hyper {
            gd: GdParams { mu0: a.gd_mu0, shrink: a.gd_shrink, armijo_c: a.gd_armijo_c, tol: a.gd_tol, max_iter: a.gd_max_iter },
            fp: FpParams { max_iter: a.fp_max_iter, tol: a.fp_tol },
            outer_tol: a.outer_tol,
            outer_max: a.outer_max,
            mc_trials: self.mc_trials,
            theta_init: match a.theta_init {
                ThetaInitName::Random => ThetaInit::Random,
                ThetaInitName::Zeros => ThetaInit::Zeros,
            },
        }
    }

    /// Per-run seeds `master_seed + i`.
    pub fn seed_list(&self) -> Vec<u64> {
        (0..self.seeds as u64).map(|i| self.master_seed.wrapping_add(i)).collect()
    }
}

pub fn load_config(path: &Path) -> Result<ScenarioConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| ConfigError::Read { path: path.display().to_string(), source })?;
    ScenarioConfig::from_toml(&text)
}

pub fn write_config(cfg: &ScenarioConfig, path: &Path) -> std::io::Result<()> {
    std::fs::write(path, cfg.to_toml())
}
