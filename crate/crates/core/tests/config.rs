use std::path::PathBuf;

use mhdl::config::{parse_config, Mode, RunConfig};
use mhdl::diagnostics::LemmaId;
use mhdl::dynamics::Scheme;
use mhdl::grid::FdOrder;
use mhdl::presets::Preset;
use mhdl::Error;
use proptest::prelude::*;

fn location(text: &str) -> (usize, usize) {
    match parse_config(text) {
        Err(Error::Config { line, column, .. }) => (line, column),
        other => panic!("expected a config error, got {other:?}"),
    }
}

#[test]
fn empty_text_gives_defaults() {
    assert_eq!(parse_config("").unwrap(), RunConfig::default());
    assert_eq!(parse_config("# only a comment\n\n   \n").unwrap(), RunConfig::default());
}

#[test]
fn every_key_is_read() {
    let text = "\
n1 = 8
n2 = 10
n3 = 12   # intervals
fd_order = 4
preset = random
amp = 0.25
b0_amp = 0
seed = 42
kappa = 0.1
epsilon = 0.01
dt = 0.01
t_final = 0.2
scheme = euler
mode = constructive
taylor_monitor = false
enforce_bands = true
dealias = true
track_b = true
wall_clock = true
solver_tol = 1e-12
solver_max_iter = 50
n_max = 9
iter_tol = 1e-15
patience = 2
max_halvings = 1
series = \"out/series.csv\"
snapshot = out/snap
snapshot_every = 5
report = r.csv
lemma = hodd
samples = 12
levels = 3
";
    let c = parse_config(text).unwrap();
    assert_eq!((c.n1, c.n2, c.n3, c.fd_order), (8, 10, 12, FdOrder::Fourth));
    assert_eq!(c.preset, Preset::Random);
    assert_eq!((c.amp, c.b0_amp, c.seed), (0.25, 0.0, 42));
    assert_eq!((c.kappa, c.epsilon, c.dt, c.t_final), (0.1, 0.01, 0.01, 0.2));
    assert_eq!((c.scheme, c.mode), (Scheme::Euler, Mode::Constructive));
    assert!(!c.taylor_monitor && c.enforce_bands && c.dealias && c.track_b && c.wall_clock);
    assert_eq!((c.solver_tol, c.solver_max_iter), (1e-12, 50));
    assert_eq!((c.n_max, c.iter_tol, c.patience, c.max_halvings), (9, 1e-15, 2, 1));
    assert_eq!(c.series, Some(PathBuf::from("out/series.csv")));
    assert_eq!(c.snapshot, Some(PathBuf::from("out/snap")));
    assert_eq!(c.report, Some(PathBuf::from("r.csv")));
    assert_eq!((c.snapshot_every, c.samples, c.levels), (5, 12, 3));
    assert_eq!(c.lemma, Some(LemmaId::Hodd));
    assert_eq!(c.steps().unwrap(), 20);
}

#[test]
fn errors_carry_one_based_line_and_column() {
    assert_eq!(location("n1 = 16\nbogus = 1\n"), (2, 1));
    assert_eq!(location("  kappa = -1"), (1, 11));
    assert_eq!(location("dt = fast"), (1, 6));
    assert_eq!(location("n1 16"), (1, 1));
    assert_eq!(location("\n\n   = 3"), (3, 4));
    // A missing value is reported just past the `=`.
    assert_eq!(location("dt ="), (1, 5));
    assert_eq!(location("seed = 1\nseed = 2"), (2, 1));
    assert_eq!(location("preset = vortex"), (1, 10));
    assert_eq!(location("taylor_monitor = yes"), (1, 18));
    assert_eq!(location("scheme = rk2"), (1, 10));
    assert_eq!(location("fd_order = 3"), (1, 12));
    // Columns count characters, not bytes.
    assert_eq!(location("# é\namp = é"), (2, 7));
    assert_eq!(location("amp = NaN"), (1, 7));
}

#[test]
fn cross_field_errors_point_at_the_last_involved_key() {
    assert_eq!(location("n1 = 16\nn2 = 7\nkappa = 0.1"), (2, 1));
    assert_eq!(location("dt = 0.03\nt_final = 0.1\n"), (2, 1));
    assert_eq!(location("t_final = 0.1\n  dt = 0.03\n"), (2, 3));
}

#[test]
fn crlf_and_trailing_comments_are_accepted() {
    let c = parse_config("n1 = 12\r\nkappa = 0 # off\r\n").unwrap();
    assert_eq!((c.n1, c.kappa), (12, 0.0));
}

proptest! {
    #[test]
    fn arbitrary_text_never_panics(text in "\\PC{0,200}") {
        let _ = parse_config(&text);
    }

    #[test]
    fn unknown_keys_are_located(pad in 0usize..6, key in "[a-z]{12}") {
        let text = format!("n1 = 16\n{}{key} = 1\n", " ".repeat(pad));
        prop_assert_eq!(location(&text), (2, pad + 1));
    }

    #[test]
    fn dt_values_round_trip(k in 1u32..1000) {
        let dt = 1.0 / f64::from(k);
        let c = parse_config(&format!("dt = {dt:e}\nt_final = 1")).unwrap();
        prop_assert_eq!(c.dt, dt);
        prop_assert_eq!(c.steps().unwrap(), k as usize);
    }
}
