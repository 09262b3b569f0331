use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use risbf_core::pipelines::Bits;
use risbf_sim::manifest::RunManifest;
use risbf_sim::sweep::{
    approx_table, report_overhead, run_power_sweep, run_quant_sweep, run_setup_compare, run_validate_approx, Algorithm,
    Experiment,
};
use risbf_sim::table::Table;
use risbf_sim::{load_config, preset, ConfigError, ScenarioConfig, SimError};

/// Statistical-CSI joint beamforming experiments for RIS-aided downlink.
#[derive(Parser, Debug)]
#[command(name = "risbf", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Scenario file (TOML). Give it twice for setup-compare.
    #[arg(long, value_name = "PATH")]
    config: Vec<PathBuf>,
    /// Built-in user layout used when no config file is given.
    #[arg(long, value_parser = ["table1", "table2"])]
    preset: Option<String>,
    #[arg(long, value_enum, default_value = "fp-gd")]
    algorithm: Algorithm,
    /// Number of seeds (overrides the config).
    #[arg(long, value_name = "N")]
    seeds: Option<usize>,
    /// Monte Carlo fading draws per point (overrides the config).
    #[arg(long, value_name = "N")]
    mc_trials: Option<usize>,
    /// Comma-separated phase resolutions, e.g. `1,2,3,inf`.
    #[arg(long, value_name = "LIST", value_delimiter = ',', default_value = "1,2,3,inf")]
    bits: Vec<Bits>,
    /// 16 antennas, 20 x 20 RIS, 1000 fading draws.
    #[arg(long)]
    paper_scale: bool,
    /// Output directory.
    #[arg(long, value_name = "DIR", default_value = "results")]
    out: PathBuf,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sum ESE against transmit power.
    PowerSweep(Common),
    /// Sum ESE against transmit power for several phase resolutions.
    QuantSweep(Common),
    /// FP-GD versus SVD-GD on two user layouts (default table1 vs table2).
    SetupCompare(Common),
    /// Pilot and signalling overhead.
    Overhead {
        #[command(flatten)]
        common: Common,
        /// Observation blocks S.
        #[arg(long, default_value_t = 10)]
        blocks: u64,
        /// Pilots per channel realisation; defaults to N.
        #[arg(long)]
        tau_b: Option<u64>,
        /// Use the 2(N - 1) constant.
        #[arg(long)]
        alt_constant: bool,
    },
    /// Surrogate against Monte Carlo sum ESE at the optimised beams.
    ValidateApprox(Common),
}

fn apply_overrides(mut cfg: ScenarioConfig, c: &Common) -> Result<ScenarioConfig, ConfigError> {
    if c.paper_scale {
        cfg = cfg.paper_scale();
    }
    if let Some(s) = c.seeds {
        cfg.seeds = s;
    }
    if let Some(t) = c.mc_trials {
        cfg.mc_trials = t;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn configs(c: &Common, want: usize) -> Result<Vec<ScenarioConfig>, ConfigError> {
    let base: Vec<ScenarioConfig> = if c.config.is_empty() {
        match (&c.preset, want) {
            (Some(p), 1) => vec![preset(p)?],
            (None, 1) => vec![preset("table1")?],
            (_, _) => vec![preset("table1")?, preset("table2")?],
        }
    } else {
        c.config.iter().map(|p| load_config(p)).collect::<Result<_, _>>()?
    };
    if base.len() != want {
        return Err(ConfigError::Invalid { field: "--config".into(), msg: format!("expected {want} config file(s), got {}", base.len()) });
    }
    base.into_iter().map(|cfg| apply_overrides(cfg, c)).collect()
}

fn write(dir: &Path, name: &str, table: &Table, manifest: &mut RunManifest) -> Result<(), SimError> {
    let path = dir.join(name);
    std::fs::write(&path, table.to_csv()).map_err(|source| SimError::Write { path: path.display().to_string(), source })?;
    manifest.outputs.push(path);
    Ok(())
}

fn finish(dir: &Path, stem: &str, manifest: &mut RunManifest) -> Result<(), SimError> {
    let path = dir.join(format!("{stem}.manifest"));
    manifest.write(&path).map_err(|source| SimError::Write { path: path.display().to_string(), source })?;
    println!("wrote {}", path.display());
    Ok(())
}

fn prepare_out(dir: &Path) -> Result<(), SimError> {
    std::fs::create_dir_all(dir).map_err(|source| SimError::Write { path: dir.display().to_string(), source })
}

fn run(cli: Cli) -> Result<(), SimError> {
    match cli.command {
        Command::PowerSweep(c) => {
            let exp = Experiment::new(configs(&c, 1)?.remove(0))?;
            let seeds = exp.seeds()?;
            prepare_out(&c.out)?;
            let mut m = RunManifest::new("power-sweep", &exp.config.name, &exp.digest, &seeds);
            let sweep = run_power_sweep(&exp, c.algorithm, &seeds)?;
            for (p, v) in sweep.mean_by_power() {
                println!("{} {p} dBm: mean sum ESE {v:.4}", c.algorithm.name());
            }
            let stem = format!("power_sweep_{}", c.algorithm.name());
            write(&c.out, &format!("{stem}.csv"), &sweep.table(), &mut m)?;
            write(&c.out, &format!("{stem}_timing.csv"), &sweep.timing_table(), &mut m)?;
            finish(&c.out, &stem, &mut m)
        }
        Command::QuantSweep(c) => {
            let exp = Experiment::new(configs(&c, 1)?.remove(0))?;
            let seeds = exp.seeds()?;
            prepare_out(&c.out)?;
            let mut m = RunManifest::new("quant-sweep", &exp.config.name, &exp.digest, &seeds);
            let sweep = run_quant_sweep(&exp, c.algorithm, &c.bits, &seeds)?;
            for (p, b, v) in sweep.means() {
                println!("{p} dBm, b={b}: mean sum ESE {v:.4}");
            }
            let stem = format!("quant_sweep_{}", c.algorithm.name());
            write(&c.out, &format!("{stem}.csv"), &sweep.table(), &mut m)?;
            finish(&c.out, &stem, &mut m)
        }
        Command::SetupCompare(c) => {
            let mut cfgs = configs(&c, 2)?;
            let b = Experiment::new(cfgs.remove(1))?;
            let a = Experiment::new(cfgs.remove(0))?;
            let seeds = a.seeds()?;
            prepare_out(&c.out)?;
            let digest = format!("{}+{}", a.digest, b.digest);
            let mut m = RunManifest::new("setup-compare", &format!("{}+{}", a.config.name, b.config.name), &digest, &seeds);
            let cmp = run_setup_compare(&a, &b, &seeds)?;
            for setup in cmp.setups() {
                for &p in &a.config.power_dbm {
                    if let Some(s) = cmp.summary(&setup, p) {
                        println!("{setup} {p} dBm: svd-gd {:.4} fp-gd {:.4} gap {:.4}", s.svd_mc, s.fp_mc, s.gap_mc);
                    }
                }
            }
            write(&c.out, "setup_compare.csv", &cmp.table(), &mut m)?;
            finish(&c.out, "setup_compare", &mut m)
        }
        Command::Overhead { common, blocks, tau_b, alt_constant } => {
            let mut cfg = configs(&common, 1)?.remove(0);
            if alt_constant {
                cfg.pilot_constant = risbf_sim::config::PilotConstantName::NMinusOne;
            }
            let tau_b = tau_b.unwrap_or((cfg.ris.n_h * cfg.ris.n_v) as u64);
            let table = report_overhead(&cfg, blocks, tau_b)?;
            print!("{}", table.to_csv());
            prepare_out(&common.out)?;
            let mut m = RunManifest::new("overhead", &cfg.name, &cfg.digest(), &[]);
            write(&common.out, "overhead.csv", &table, &mut m)?;
            finish(&common.out, "overhead", &mut m)
        }
        Command::ValidateApprox(c) => {
            let exp = Experiment::new(configs(&c, 1)?.remove(0))?;
            let seeds = exp.seeds()?;
            prepare_out(&c.out)?;
            let mut m = RunManifest::new("validate-approx", &exp.config.name, &exp.digest, &seeds);
            let pts = run_validate_approx(&exp, c.algorithm, &seeds)?;
            let failing = pts.iter().filter(|p| !p.passes()).count();
            println!("{} of {} points within max(3 stderr, 5%)", pts.len() - failing, pts.len());
            write(&c.out, "validate_approx.csv", &approx_table(&pts, &exp.digest), &mut m)?;
            finish(&c.out, "validate_approx", &mut m)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
