use risbf_core::pipelines::Bits;
use risbf_sim::sweep::{report_overhead, run_power_sweep, run_quant_sweep, run_setup_compare, Algorithm, Experiment};
use risbf_sim::{load_config, preset, write_config, ScenarioConfig, SimError};

fn small(name: &str) -> ScenarioConfig {
    let mut cfg = preset(name).unwrap();
    cfg.ris.n_h = 4;
    cfg.ris.n_v = 4;
    cfg.ap.antennas = 4;
    cfg.seeds = 3;
    cfg.mc_trials = 100;
    cfg
}

#[test]
fn empty_seed_list_is_rejected() {
    let exp = Experiment::new(small("table1")).unwrap();
    assert!(matches!(run_power_sweep(&exp, Algorithm::FpGd, &[]), Err(SimError::Config(_))));
    let zero = ScenarioConfig { seeds: 0, ..small("table1") };
    assert!(Experiment::new(zero).unwrap().seeds().is_err());
}

#[test]
fn same_seed_sees_same_channels_at_every_power() {
    let exp = Experiment::new(small("table1")).unwrap();
    let a = exp.scenario(0.0, 7).unwrap();
    let b = exp.scenario(30.0, 7).unwrap();
    assert_eq!(a.h, b.h);
    assert_eq!(a.users, b.users);
    assert_ne!(a.h, exp.scenario(0.0, 8).unwrap().h);
}

#[test]
fn power_sweep_is_reproducible_and_increasing() {
    let exp = Experiment::new(small("table1")).unwrap();
    let seeds = exp.seeds().unwrap();
    let a = run_power_sweep(&exp, Algorithm::FpGd, &seeds).unwrap();
    let b = run_power_sweep(&exp, Algorithm::FpGd, &seeds).unwrap();
    assert_eq!(a.table().to_csv(), b.table().to_csv());
    let means = a.mean_by_power();
    assert_eq!(means.len(), 4);
    for w in means.windows(2) {
        assert!(w[1].1 > w[0].1, "{means:?}");
    }
    let t = a.table();
    let (seed_col, digest_col) = (t.column("seed").unwrap(), t.column("config_digest").unwrap());
    assert!(t.rows.iter().all(|r| !r[seed_col].is_empty() && r[digest_col] == exp.digest));
    assert_eq!(t.rows.len(), 4 * 3 + 4);
}

#[test]
fn continuous_quant_rows_match_power_sweep() {
    let exp = Experiment::new(small("table1")).unwrap();
    let seeds = exp.seeds().unwrap();
    let ps = run_power_sweep(&exp, Algorithm::FpGd, &seeds).unwrap();
    let qs = run_quant_sweep(&exp, Algorithm::FpGd, &[Bits::Finite(1), Bits::Finite(2), Bits::Finite(3)], &seeds).unwrap();
    for p in &ps.points {
        let q = qs.points.iter().find(|q| q.seed == p.seed && q.power_dbm == p.power_dbm && q.bits == Bits::Continuous).unwrap();
        assert!((q.sum_ese_mc - p.sum_ese_mc).abs() <= 1e-12 * p.sum_ese_mc.abs());
        assert!((q.sum_ese_surrogate - p.sum_ese_surrogate).abs() <= 1e-12 * p.sum_ese_surrogate.abs());
        assert_eq!(q.ratio, 1.0);
    }
    let t = qs.table();
    assert!(t.column("ratio_to_continuous").is_some());
    let bits_col = t.column("bits").unwrap();
    for b in ["1", "2", "3", "inf"] {
        assert!(t.rows.iter().any(|r| r[bits_col] == b));
    }
}

#[test]
fn identical_setups_compare_identically() {
    let a = Experiment::new(small("table1")).unwrap();
    let b = Experiment::new(small("table1")).unwrap();
    let seeds = a.seeds().unwrap();
    let cmp = run_setup_compare(&a, &b, &seeds).unwrap();
    for p in [0.0, 10.0, 20.0, 30.0] {
        assert_eq!(cmp.summary("a:table1", p), cmp.summary("b:table1", p));
    }
    let t = cmp.table();
    let seed_col = t.column("seed").unwrap();
    let per_seed = t.rows.iter().filter(|r| r[seed_col] != "mean").count();
    assert_eq!(per_seed, 2 * 4 * seeds.len());
}

fn overhead_row(cfg: &ScenarioConfig, s: u64, tau_b: u64) -> (String, String, String) {
    let t = report_overhead(cfg, s, tau_b).unwrap();
    let r = &t.rows[0];
    let c = |n: &str| r[t.column(n).unwrap()].clone();
    (c("tau1"), c("tau2"), c("total"))
}

#[test]
fn overhead_report() {
    let cfg = preset("table1").unwrap().paper_scale();
    assert_eq!(overhead_row(&cfg, 10, 400), ("802".into(), "12000".into(), "12802".into()));
    let alt = ScenarioConfig { pilot_constant: risbf_sim::config::PilotConstantName::NMinusOne, ..cfg.clone() };
    assert_eq!(overhead_row(&alt, 10, 400).0, "798");
    let mut one = cfg;
    one.users.truncate(1);
    assert_eq!(overhead_row(&one, 1, 7), ("802".into(), "7".into(), "809".into()));
}

#[test]
fn config_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("scenario.toml");
    for cfg in [preset("table1").unwrap(), preset("table2").unwrap().paper_scale(), small("table2")] {
        write_config(&cfg, &path).unwrap();
        assert_eq!(load_config(&path).unwrap(), cfg);
    }
}

#[test]
fn exit_code_mapping() {
    let cfg_err: SimError = risbf_sim::ConfigError::UnknownPreset("x".into()).into();
    assert_eq!(cfg_err.exit_code(), 1);
    assert_eq!(SimError::from(risbf_core::Error::Domain("d".into())).exit_code(), 1);
    assert_eq!(SimError::from(risbf_core::Error::Numeric("n".into())).exit_code(), 2);
}
