//! Experiment sweeps. Operating points `(power, seed)` run in parallel and
//! are gathered in grid order, so output is independent of scheduling.

use std::sync::Arc;

use rayon::prelude::*;
use risbf_core::channel_model::{pilot_overhead, UserCorrelation};
use risbf_core::pipelines::{evaluate_quantized, run_fp_gd, run_svd_gd, Bits, Hyper, JointResult, Scenario, SystemSetup};

use crate::config::{ConfigError, ScenarioConfig};
use crate::table::{fmt_f64, Table};
use crate::SimError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Algorithm {
    #[value(name = "svd-gd")]
    SvdGd,
    #[value(name = "fp-gd")]
    FpGd,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::SvdGd => "svd-gd",
            Algorithm::FpGd => "fp-gd",
        }
    }

    pub fn run(self, sc: &Scenario, hyper: &Hyper) -> risbf_core::Result<JointResult> {
        match self {
            Algorithm::SvdGd => run_svd_gd(sc, hyper),
            Algorithm::FpGd => run_fp_gd(sc, hyper),
        }
    }
}

/// A validated config with its precomputed user correlations.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: ScenarioConfig,
    pub setup: SystemSetup,
    pub users: Arc<Vec<UserCorrelation>>,
    pub hyper: Hyper,
    pub digest: String,
}

impl Experiment {
    pub fn new(config: ScenarioConfig) -> Result<Self, SimError> {
        let setup = config.system_setup()?;
        let users = Arc::new(setup.user_correlations()?);
        let hyper = config.hyper();
        let digest = config.digest();
        Ok(Self { config, setup, users, hyper, digest })
    }

    pub fn seeds(&self) -> Result<Vec<u64>, SimError> {
        let seeds = self.config.seed_list();
        if seeds.is_empty() {
            return Err(ConfigError::Invalid { field: "seeds".into(), msg: "seed list is empty".into() }.into());
        }
        Ok(seeds)
    }

    pub fn scenario(&self, power_dbm: f64, seed: u64) -> risbf_core::Result<Scenario> {
        self.setup.scenario(self.users.clone(), risbf_core::ese_metrics::dbm_to_watts(power_dbm), seed)
    }

    /// Runs `f` on every `(power, seed)` point of the grid, power-major.
    fn grid<T, F>(&self, seeds: &[u64], f: F) -> Result<Vec<(f64, u64, T)>, SimError>
    where
        T: Send,
        F: Fn(&Scenario) -> risbf_core::Result<T> + Sync,
    {
        let points: Vec<(f64, u64)> =
            self.config.power_dbm.iter().flat_map(|&p| seeds.iter().map(move |&s| (p, s))).collect();
        points
            .into_par_iter()
            .map(|(p, s)| {
                let sc = self.scenario(p, s)?;
                Ok((p, s, f(&sc)?))
            })
            .collect::<risbf_core::Result<Vec<_>>>()
            .map_err(SimError::from)
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn stderr(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt()
}

/// One `(power, seed)` result of a power sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerPoint {
    pub power_dbm: f64,
    pub seed: u64,
    pub sum_ese_surrogate: f64,
    pub sum_ese_mc: f64,
    pub mc_stderr: f64,
    pub outer_iters: usize,
    pub wall_time: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerSweep {
    pub algorithm: Algorithm,
    pub points: Vec<PowerPoint>,
    pub digest: String,
}

fn mc_parts(r: &JointResult) -> (f64, f64) {
    r.mc.as_ref().map_or((f64::NAN, f64::NAN), |m| (m.sum_mean, m.sum_stderr))
}

pub fn run_power_sweep(exp: &Experiment, algorithm: Algorithm, seeds: &[u64]) -> Result<PowerSweep, SimError> {
    if seeds.is_empty() {
        return Err(ConfigError::Invalid { field: "seeds".into(), msg: "seed list is empty".into() }.into());
    }
    let results = exp.grid(seeds, |sc| algorithm.run(sc, &exp.hyper))?;
    let points = results
        .into_iter()
        .map(|(power_dbm, seed, r)| {
            let (sum_ese_mc, mc_stderr) = mc_parts(&r);
            PowerPoint {
                power_dbm,
                seed,
                sum_ese_surrogate: r.sum_ese_surrogate,
                sum_ese_mc,
                mc_stderr,
                outer_iters: r.outer_iterations,
                wall_time: r.wall_time,
            }
        })
        .collect();
    Ok(PowerSweep { algorithm, points, digest: exp.digest.clone() })
}

impl PowerSweep {
    /// Mean over seeds of the Monte Carlo sum ESE at each power.
    pub fn mean_by_power(&self) -> Vec<(f64, f64)> {
        group(&self.points, |p| p.power_dbm).into_iter().map(|(p, pts)| (p, mean(&pts.iter().map(|x| x.sum_ese_mc).collect::<Vec<_>>()))).collect()
    }

    /// Per-seed rows followed by one `mean` row per power. Wall time is
    /// kept out of this table so reruns produce identical bytes.
    pub fn table(&self) -> Table {
        let mut t = Table::new(&[
            "algorithm", "power_dbm", "seed", "sum_ese_surrogate", "sum_ese_mc", "mc_stderr", "outer_iters", "config_digest",
        ]);
        for p in &self.points {
            t.push(vec![
                self.algorithm.name().into(),
                fmt_f64(p.power_dbm),
                p.seed.to_string(),
                fmt_f64(p.sum_ese_surrogate),
                fmt_f64(p.sum_ese_mc),
                fmt_f64(p.mc_stderr),
                p.outer_iters.to_string(),
                self.digest.clone(),
            ]);
        }
        for (power, pts) in group(&self.points, |p| p.power_dbm) {
            let mc: Vec<f64> = pts.iter().map(|p| p.sum_ese_mc).collect();
            let sur: Vec<f64> = pts.iter().map(|p| p.sum_ese_surrogate).collect();
            let iters: Vec<f64> = pts.iter().map(|p| p.outer_iters as f64).collect();
            t.push(vec![
                self.algorithm.name().into(),
                fmt_f64(power),
                "mean".into(),
                fmt_f64(mean(&sur)),
                fmt_f64(mean(&mc)),
                fmt_f64(stderr(&mc)),
                fmt_f64(mean(&iters)),
                self.digest.clone(),
            ]);
        }
        t
    }

    pub fn timing_table(&self) -> Table {
        let mut t = Table::new(&["algorithm", "power_dbm", "seed", "wall_time_s"]);
        for p in &self.points {
            t.push(vec![self.algorithm.name().into(), fmt_f64(p.power_dbm), p.seed.to_string(), fmt_f64(p.wall_time)]);
        }
        t
    }
}

/// Groups consecutive-or-not items by an `f64` key, keeping first-seen order.
fn group<T, F: Fn(&T) -> f64>(items: &[T], key: F) -> Vec<(f64, Vec<&T>)> {
    let mut out: Vec<(f64, Vec<&T>)> = Vec::new();
    for it in items {
        let k = key(it);
        match out.iter_mut().find(|(g, _)| *g == k) {
            Some((_, v)) => v.push(it),
            None => out.push((k, vec![it])),
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantPoint {
    pub power_dbm: f64,
    pub seed: u64,
    pub bits: Bits,
    pub sum_ese_surrogate: f64,
    pub sum_ese_mc: f64,
    pub mc_stderr: f64,
    /// Monte Carlo ESE relative to the continuous-phase result of the same run.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantSweep {
    pub algorithm: Algorithm,
    pub points: Vec<QuantPoint>,
    pub digest: String,
}

/// Optimises once per `(power, seed)` and re-evaluates the result at every
/// resolution in `bits`; the continuous case is always included.
pub fn run_quant_sweep(exp: &Experiment, algorithm: Algorithm, bits: &[Bits], seeds: &[u64]) -> Result<QuantSweep, SimError> {
    if seeds.is_empty() {
        return Err(ConfigError::Invalid { field: "seeds".into(), msg: "seed list is empty".into() }.into());
    }
    let mut levels: Vec<Bits> = bits.to_vec();
    levels.push(Bits::Continuous);
    levels.sort();
    levels.dedup();
    let results = exp.grid(seeds, |sc| {
        let r = algorithm.run(sc, &exp.hyper)?;
        evaluate_quantized(sc, &r, &levels, exp.hyper.mc_trials)
    })?;
    let mut points = Vec::new();
    for (power_dbm, seed, pts) in results {
        let reference = pts.iter().find(|q| q.bits == Bits::Continuous).and_then(|q| q.mc.as_ref()).map(|m| m.sum_mean);
        for q in pts {
            let (mc, se) = q.mc.as_ref().map_or((f64::NAN, f64::NAN), |m| (m.sum_mean, m.sum_stderr));
            points.push(QuantPoint {
                power_dbm,
                seed,
                bits: q.bits,
                sum_ese_surrogate: q.sum_ese_surrogate,
                sum_ese_mc: mc,
                mc_stderr: se,
                ratio: reference.map_or(f64::NAN, |r| mc / r),
            });
        }
    }
    Ok(QuantSweep { algorithm, points, digest: exp.digest.clone() })
}

impl QuantSweep {
    /// Mean Monte Carlo sum ESE per `(power, bits)`.
    pub fn means(&self) -> Vec<(f64, Bits, f64)> {
        let mut out = Vec::new();
        for (power, pts) in group(&self.points, |p| p.power_dbm) {
            let mut levels: Vec<Bits> = pts.iter().map(|p| p.bits).collect();
            levels.sort();
            levels.dedup();
            for b in levels {
                let vals: Vec<f64> = pts.iter().filter(|p| p.bits == b).map(|p| p.sum_ese_mc).collect();
                out.push((power, b, mean(&vals)));
            }
        }
        out
    }

    pub fn table(&self) -> Table {
        let mut t = Table::new(&[
            "algorithm", "power_dbm", "seed", "bits", "sum_ese_surrogate", "sum_ese_mc", "mc_stderr", "ratio_to_continuous", "config_digest",
        ]);
        for p in &self.points {
            t.push(vec![
                self.algorithm.name().into(),
                fmt_f64(p.power_dbm),
                p.seed.to_string(),
                p.bits.to_string(),
                fmt_f64(p.sum_ese_surrogate),
                fmt_f64(p.sum_ese_mc),
                fmt_f64(p.mc_stderr),
                fmt_f64(p.ratio),
                self.digest.clone(),
            ]);
        }
        let means = self.means();
        for &(power, b, m) in &means {
            let cont = means.iter().find(|(p, bb, _)| *p == power && *bb == Bits::Continuous).map(|x| x.2);
            let sur: Vec<f64> =
                self.points.iter().filter(|p| p.power_dbm == power && p.bits == b).map(|p| p.sum_ese_surrogate).collect();
            let mc: Vec<f64> = self.points.iter().filter(|p| p.power_dbm == power && p.bits == b).map(|p| p.sum_ese_mc).collect();
            t.push(vec![
                self.algorithm.name().into(),
                fmt_f64(power),
                "mean".into(),
                b.to_string(),
                fmt_f64(mean(&sur)),
                fmt_f64(m),
                fmt_f64(stderr(&mc)),
                fmt_f64(cont.map_or(f64::NAN, |c| m / c)),
                self.digest.clone(),
            ]);
        }
        t
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparePoint {
    pub setup: String,
    pub power_dbm: f64,
    pub seed: u64,
    pub svd_mc: f64,
    pub fp_mc: f64,
    pub svd_surrogate: f64,
    pub fp_surrogate: f64,
    pub digest: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SetupCompare {
    pub points: Vec<ComparePoint>,
}

/// Runs both algorithms on both setups over one shared seed list.
pub fn run_setup_compare(a: &Experiment, b: &Experiment, seeds: &[u64]) -> Result<SetupCompare, SimError> {
    if seeds.is_empty() {
        return Err(ConfigError::Invalid { field: "seeds".into(), msg: "seed list is empty".into() }.into());
    }
    let mut points = Vec::new();
    for (slot, exp) in [("a", a), ("b", b)] {
        let label = format!("{}:{}", slot, exp.config.name);
        let res = exp.grid(seeds, |sc| Ok((run_svd_gd(sc, &exp.hyper)?, run_fp_gd(sc, &exp.hyper)?)))?;
        for (power_dbm, seed, (svd, fp)) in res {
            points.push(ComparePoint {
                setup: label.clone(),
                power_dbm,
                seed,
                svd_mc: mc_parts(&svd).0,
                fp_mc: mc_parts(&fp).0,
                svd_surrogate: svd.sum_ese_surrogate,
                fp_surrogate: fp.sum_ese_surrogate,
                digest: exp.digest.clone(),
            });
        }
    }
    Ok(SetupCompare { points })
}

/// Mean over seeds of one setup at one power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompareSummary {
    pub svd_mc: f64,
    pub fp_mc: f64,
    pub gap_mc: f64,
    pub gap_surrogate: f64,
}

impl SetupCompare {
    pub fn summary(&self, setup: &str, power_dbm: f64) -> Option<CompareSummary> {
        let pts: Vec<&ComparePoint> = self.points.iter().filter(|p| p.setup == setup && p.power_dbm == power_dbm).collect();
        if pts.is_empty() {
            return None;
        }
        let col = |f: &dyn Fn(&ComparePoint) -> f64| mean(&pts.iter().map(|p| f(p)).collect::<Vec<_>>());
        Some(CompareSummary {
            svd_mc: col(&|p| p.svd_mc),
            fp_mc: col(&|p| p.fp_mc),
            gap_mc: col(&|p| p.fp_mc - p.svd_mc),
            gap_surrogate: col(&|p| p.fp_surrogate - p.svd_surrogate),
        })
    }

    pub fn setups(&self) -> Vec<String> {
        let mut s: Vec<String> = Vec::new();
        for p in &self.points {
            if !s.contains(&p.setup) {
                s.push(p.setup.clone());
            }
        }
        s
    }

    pub fn table(&self) -> Table {
        let mut t = Table::new(&[
            "setup", "power_dbm", "seed", "svd_gd_mc", "fp_gd_mc", "gap_mc", "svd_gd_surrogate", "fp_gd_surrogate", "gap_surrogate", "config_digest",
        ]);
        for p in &self.points {
            t.push(vec![
                p.setup.clone(),
                fmt_f64(p.power_dbm),
                p.seed.to_string(),
                fmt_f64(p.svd_mc),
                fmt_f64(p.fp_mc),
                fmt_f64(p.fp_mc - p.svd_mc),
                fmt_f64(p.svd_surrogate),
                fmt_f64(p.fp_surrogate),
                fmt_f64(p.fp_surrogate - p.svd_surrogate),
                p.digest.clone(),
            ]);
        }
        for setup in self.setups() {
            let digest = self.points.iter().find(|p| p.setup == setup).map(|p| p.digest.clone()).unwrap_or_default();
            for (power, _) in group(&self.points.iter().filter(|p| p.setup == setup).collect::<Vec<_>>(), |p| p.power_dbm) {
                let s = self.summary(&setup, power).expect("group is non-empty");
                t.push(vec![
                    setup.clone(),
                    fmt_f64(power),
                    "mean".into(),
                    fmt_f64(s.svd_mc),
                    fmt_f64(s.fp_mc),
                    fmt_f64(s.gap_mc),
                    String::new(),
                    String::new(),
                    fmt_f64(s.gap_surrogate),
                    digest.clone(),
                ]);
            }
        }
        t
    }
}

/// Pilot and signalling overhead for the configured array and users.
pub fn report_overhead(cfg: &ScenarioConfig, s_blocks: u64, tau_b: u64) -> Result<Table, SimError> {
    let n = (cfg.ris.n_h * cfg.ris.n_v) as u64;
    let k = cfg.users.len() as u64;
    let o = pilot_overhead(n, k, s_blocks, tau_b, cfg.pilot())?;
    let mut t = Table::new(&["n", "k", "s", "tau_b", "tau1", "tau2", "total", "config_digest"]);
    t.push(vec![
        n.to_string(),
        k.to_string(),
        s_blocks.to_string(),
        tau_b.to_string(),
        o.tau1.to_string(),
        o.tau2.to_string(),
        o.total().to_string(),
        cfg.digest(),
    ]);
    Ok(t)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApproxPoint {
    pub power_dbm: f64,
    pub seed: u64,
    pub surrogate: f64,
    pub mc: f64,
    pub mc_stderr: f64,
}

impl ApproxPoint {
    /// `max(3 stderr, 5 % of the Monte Carlo mean)`.
    pub fn tolerance(&self) -> f64 {
        (3.0 * self.mc_stderr).max(0.05 * self.mc)
    }

    pub fn passes(&self) -> bool {
        (self.surrogate - self.mc).abs() <= self.tolerance()
    }
}

/// Surrogate versus Monte Carlo sum ESE at the optimised beams.
pub fn run_validate_approx(exp: &Experiment, algorithm: Algorithm, seeds: &[u64]) -> Result<Vec<ApproxPoint>, SimError> {
    let sweep = run_power_sweep(exp, algorithm, seeds)?;
    Ok(sweep
        .points
        .into_iter()
        .map(|p| ApproxPoint { power_dbm: p.power_dbm, seed: p.seed, surrogate: p.sum_ese_surrogate, mc: p.sum_ese_mc, mc_stderr: p.mc_stderr })
        .collect())
}

pub fn approx_table(points: &[ApproxPoint], digest: &str) -> Table {
    let mut t = Table::new(&["power_dbm", "seed", "sum_ese_surrogate", "sum_ese_mc", "mc_stderr", "abs_diff", "tolerance", "pass", "config_digest"]);
    for p in points {
        t.push(vec![
            fmt_f64(p.power_dbm),
            p.seed.to_string(),
            fmt_f64(p.surrogate),
            fmt_f64(p.mc),
            fmt_f64(p.mc_stderr),
            fmt_f64((p.surrogate - p.mc).abs()),
            fmt_f64(p.tolerance()),
            p.passes().to_string(),
            digest.to_string(),
        ]);
    }
    t
}
