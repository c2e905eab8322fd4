use std::f64::consts::PI;
use std::process::Command;

use rdfilter::{ShiftOrder, SweepRow};
use rdfilter_cli::{parse_config, read_csv, write_csv, ConfigError, ProblemKind, RunConfig, StepSize, KEYS};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rdfilter"))
}

fn row(seed: f64) -> SweepRow {
    SweepRow {
        n: 64,
        dt: PI / 3.0 * seed,
        ratio: 1.0 / 3.0 + seed,
        shift_order: 3,
        kappa: 2.0_f64.sqrt() * seed,
        n_subdomains: 4,
        overlap: 8,
        err_l2: 1e-300 * seed,
        err_linf: f64::NAN,
        stable: true,
        steps: 623,
        wall_ms: 0.0,
        saturated: false,
    }
}

#[test]
fn ratio_defines_dt() {
    let c = parse_config("problem=heat1d N=64 ratio=2 shift_order=3").unwrap();
    assert_eq!(c.problem, ProblemKind::Heat1d);
    assert_eq!(c.shift_order, ShiftOrder::Third);
    assert_eq!(c.step, StepSize::Ratio(2.0));
    let h = PI / 64.0;
    let (steps, dt) = c.steps_1d(h);
    let nominal = 2.0 * h * h / 3.0;
    assert!(dt <= nominal && dt > nominal * (1.0 - 1.0 / steps as f64));
}

#[test]
fn heat2d_rejects_third_order_shift() {
    assert_eq!(parse_config("problem=heat2d shift_order=3").unwrap_err(), ConfigError::ShiftOrder2d);
    assert!(parse_config("problem=heat2d shift_order=1").is_ok());
}

#[test]
fn ratio_and_dt_exclude_each_other() {
    assert_eq!(parse_config("ratio=2 dt=0.01").unwrap_err(), ConfigError::RatioAndDt);
}

#[test]
fn every_key_has_a_default() {
    let c = RunConfig::default();
    assert_eq!(c, parse_config("").unwrap());
    for &(key, default, _) in KEYS {
        assert!(!default.is_empty(), "{key}");
    }
}

#[test]
fn empty_table_is_header_only() {
    let mut buf = Vec::new();
    write_csv(&[], &mut buf).unwrap();
    assert_eq!(
        String::from_utf8(buf).unwrap(),
        "N,dt,ratio,shift_order,kappa,n_subdomains,overlap,err_l2,err_linf,stable,steps,wall_ms\n"
    );
}

#[test]
fn one_row_is_two_lines_and_round_trips() {
    let rows = vec![row(0.123_456_789_012_345_68)];
    let mut buf = Vec::new();
    write_csv(&rows, &mut buf).unwrap();
    let text = String::from_utf8(buf.clone()).unwrap();
    assert_eq!(text.lines().count(), 2);
    assert!(text.ends_with('\n'));
    let back = read_csv(buf.as_slice()).unwrap();
    let (a, b) = (&rows[0], &back[0]);
    assert_eq!(a.dt.to_bits(), b.dt.to_bits());
    assert_eq!(a.ratio.to_bits(), b.ratio.to_bits());
    assert_eq!(a.kappa.to_bits(), b.kappa.to_bits());
    assert_eq!(a.err_l2.to_bits(), b.err_l2.to_bits());
    assert!(b.err_linf.is_nan());
    assert_eq!((a.n, a.shift_order, a.n_subdomains, a.overlap, a.stable, a.steps), (b.n, b.shift_order, b.n_subdomains, b.overlap, b.stable, b.steps));
}

#[test]
fn seventeen_digits_round_trip_many_values() {
    let rows: Vec<SweepRow> = (1..200).map(|k| row((k as f64).sqrt() / 7.0)).collect();
    let mut buf = Vec::new();
    write_csv(&rows, &mut buf).unwrap();
    for (a, b) in rows.iter().zip(read_csv(buf.as_slice()).unwrap()) {
        assert_eq!(a.dt.to_bits(), b.dt.to_bits());
        assert_eq!(a.kappa.to_bits(), b.kappa.to_bits());
    }
}

#[test]
fn help_lists_every_key() {
    for sub in ["run", "sweep", "dd"] {
        let out = bin().args([sub, "--help"]).output().unwrap();
        assert!(out.status.success());
        let help = String::from_utf8(out.stdout).unwrap();
        for &(key, default, _) in KEYS {
            assert!(help.contains(&format!("--{key} ")), "{sub}: {key}");
            assert!(help.contains(&format!("[default: {default}]")), "{sub}: {key}");
        }
    }
}

#[test]
fn exit_codes() {
    let ok = bin().args(["run", "N=32", "T=0.05"]).output().unwrap();
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(String::from_utf8(ok.stdout).unwrap().lines().count(), 2);

    let config = bin().args(["run", "problem=heat2d", "shift_order=3"]).output().unwrap();
    assert_eq!(config.status.code(), Some(1));
    assert!(String::from_utf8(config.stderr).unwrap().contains("shift_order"));

    let unknown = bin().args(["run", "--bogus", "1"]).output().unwrap();
    assert_eq!(unknown.status.code(), Some(1));

    let blowup = bin().args(["run", "filter=off", "ratio=3", "T=0.5"]).output().unwrap();
    assert_eq!(blowup.status.code(), Some(2));
    let text = String::from_utf8(blowup.stdout).unwrap();
    assert!(text.lines().nth(1).unwrap().contains(",false,"));
}

#[test]
fn sweeps_record_unstable_rows_and_succeed() {
    let out = bin()
        .args(["sweep", "filter=off", "sweep_N=16", "sweep_ratios=0.5,3", "sweep_shifts=1", "T=5"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let rows = read_csv(out.stdout.as_slice()).unwrap();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].stable && !rows[1].stable);
}

#[test]
fn same_config_same_bytes() {
    let dir = std::env::temp_dir().join(format!("rdfilter-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("study.cfg");
    std::fs::write(&cfg, "# small sweep\nsweep_N=16,32\nsweep_ratios=0.5,2,4\nT=0.1\n").unwrap();
    let mut outputs = Vec::new();
    for i in 0..2 {
        let path = dir.join(format!("out{i}.csv"));
        let status = bin()
            .args(["sweep", "--config", cfg.to_str().unwrap(), "--output", path.to_str().unwrap()])
            .status()
            .unwrap();
        assert!(status.success());
        outputs.push(std::fs::read(&path).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(read_csv(outputs[0].as_slice()).unwrap().len(), 12);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn flags_override_file() {
    let dir = std::env::temp_dir().join(format!("rdfilter-cli-flags-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("run.cfg");
    std::fs::write(&cfg, "N=16 ratio=4 T=0.05\n").unwrap();
    let out = bin()
        .args(["run", "-c", cfg.to_str().unwrap(), "--N", "32", "--dt", "0.001"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let rows = read_csv(out.stdout.as_slice()).unwrap();
    assert_eq!(rows[0].n, 32);
    assert!((rows[0].dt - 0.001).abs() < 1e-15);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn dd_study_rows_follow_overlaps() {
    let out = bin()
        .args(["dd", "N=64", "n_subdomains=2", "overlaps=4,8", "dd_steps=50", "dd_resolution=1", "dd_max_ratio=8"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = read_csv(out.stdout.as_slice()).unwrap();
    assert_eq!(rows.iter().map(|r| r.overlap).collect::<Vec<_>>(), vec![4, 8]);
    assert!(rows.iter().all(|r| r.n_subdomains == 2 && r.ratio >= 1.0));
}

#[test]
fn selftest_passes() {
    let out = bin().arg("selftest").output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    assert!(!String::from_utf8(out.stdout).unwrap().contains("FAIL"));
}
