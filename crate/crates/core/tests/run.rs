use mhdl::config::{parse_config, RunConfig};
use mhdl::io::{read_series, read_snapshot};
use mhdl::run::{run, ExitCode};
use mhdl::studies::{study, StudyKind};
use mhdl::Error;

/// An 8³ configuration; keys in `extra` replace the base ones.
fn small(extra: &str) -> RunConfig {
    let key = |l: &str| l.split('=').next().unwrap().trim().to_string();
    let overridden: Vec<String> = extra.lines().map(key).collect();
    let base: Vec<&str> = ["n1 = 8", "n2 = 8", "n3 = 8", "dt = 0.01", "t_final = 0.1"]
        .into_iter()
        .filter(|l| !overridden.contains(&key(l)))
        .collect();
    parse_config(&format!("{}\n{extra}", base.join("\n"))).unwrap()
}

#[test]
fn trivial_run_keeps_every_monitor_at_zero() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small("preset = trivial\ntrack_b = true");
    cfg.series = Some(dir.path().join("s.csv"));
    let out = run(&cfg).unwrap();
    assert_eq!(out.steps, 10);
    assert_eq!(out.lambda, 0.0);
    let rows = read_series(cfg.series.as_ref().unwrap()).unwrap();
    assert_eq!(rows.len(), 11);
    assert_eq!(rows, out.rows);
    for r in &rows {
        let i = r.invariants;
        for x in [i.j_dev, i.a_dev, i.piola, i.div_v, i.frozen_mismatch, i.taylor_min, i.divb0, i.j_kappa_dev, i.a_kappa_dev] {
            assert_eq!(x, 0.0);
        }
        assert_eq!(r.energy.total, rows[0].energy.total);
    }
    assert!((rows[10].t - 0.1).abs() < 1e-15);
    assert_eq!(out.energy_growth(), 1.0);
}

#[test]
fn series_output_is_bit_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let text: Vec<String> = (0..2)
        .map(|k| {
            let mut cfg = small("preset = demo\nt_final = 0.05");
            let p = dir.path().join(format!("s{k}.csv"));
            cfg.series = Some(p.clone());
            run(&cfg).unwrap();
            std::fs::read_to_string(p).unwrap()
        })
        .collect();
    assert_eq!(text[0], text[1]);
    assert_eq!(text[0].lines().count(), 7);
}

#[test]
fn rerunning_replaces_the_series_file() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small("preset = trivial\nt_final = 0.03");
    cfg.series = Some(dir.path().join("s.csv"));
    run(&cfg).unwrap();
    run(&cfg).unwrap();
    assert_eq!(read_series(cfg.series.as_ref().unwrap()).unwrap().len(), 4);
}

#[test]
fn negative_taylor_floor_stops_at_time_zero() {
    let err = run(&small("preset = taylor-violating\namp = 0.1")).unwrap_err();
    assert_eq!(err.exit_code(), ExitCode::Taylor);
    assert_eq!(err.t, 0.0);
    assert!(matches!(err.error, Error::TaylorViolation { .. }));
    // With the monitor off the same data runs.
    assert!(run(&small("preset = taylor-violating\namp = 0.1\ntaylor_monitor = false\nt_final = 0.02")).is_ok());
}

#[test]
fn snapshots_follow_the_step_cadence() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small("preset = demo\nt_final = 0.04\nsnapshot_every = 2");
    cfg.snapshot = Some(dir.path().join("snap"));
    let out = run(&cfg).unwrap();
    let mut names: Vec<String> =
        std::fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    names.sort();
    assert_eq!(names, ["snap_000000.mhdl", "snap_000002.mhdl", "snap_000004.mhdl"]);
    assert_eq!(read_snapshot(&dir.path().join("snap_000004.mhdl")).unwrap(), out.final_state);
}

#[test]
fn exit_codes_are_stable() {
    assert_eq!(ExitCode::of(&Error::InvalidGrid("x".into())) as i32, 1);
    assert_eq!(ExitCode::of(&Error::Format("x".into())) as i32, 1);
    assert_eq!(ExitCode::of(&Error::TaylorViolation { t: 0.0, min: -1.0, floor: 0.0 }) as i32, 2);
    assert_eq!(ExitCode::of(&Error::NoContraction { n: 3, ratios: vec![] }) as i32, 3);
    assert_eq!(ExitCode::of(&Error::NonFinite("v")) as i32, 3);
}

#[test]
fn invalid_configurations_fail_before_stepping() {
    let mut cfg = small("preset = demo");
    cfg.dt = 0.03;
    assert_eq!(run(&cfg).unwrap_err().exit_code(), ExitCode::Config);
}

#[test]
fn constructive_mode_records_every_sample() {
    let cfg = small("preset = demo\nmode = constructive\ndt = 0.005\nt_final = 0.01");
    let out = run(&cfg).unwrap();
    assert_eq!(out.rows.len(), 3);
    assert_eq!(out.horizons, vec![0.01]);
    assert!(out.rows.iter().all(|r| r.solver_iterations >= 2));
}

#[test]
fn contraction_study_reports_both_horizons() {
    let cfg = small("preset = demo\ndt = 0.005\nt_final = 0.01");
    let rep = study(StudyKind::Contraction, &cfg).unwrap();
    let csv = rep.to_csv();
    assert!(csv.starts_with(&rep.header));
    assert!(rep.lines.len() >= 4, "{csv}");
    for kind in ["dt-convergence", "kappa-sweep", "eps-sweep", "contraction"] {
        assert_eq!(kind.parse::<StudyKind>().unwrap().name(), kind);
    }
    assert!("bogus".parse::<StudyKind>().is_err());
}
