mod common;

use mhdl::diagnostics::{energy, invariants};
use mhdl::dynamics::FlowState;
use mhdl::geometry::{FlowMap, MagneticParam};
use mhdl::grid::{FdOrder, GridSpec, ScalarField, VectorField};
use mhdl::io::*;
use mhdl::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_state(g: GridSpec, seed: u64) -> FlowState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut field = || ScalarField::from_vec(g, (0..g.len()).map(|_| rng.gen_range(-1e3..1e3)).collect());
    let d = VectorField::new([field(), field(), field()]);
    let v = VectorField::new([field(), field(), field()]);
    let q = field();
    // Random per level, constant across each plane: divergence-free, tangential.
    let levels: Vec<[f64; 2]> = (0..g.levels()).map(|_| [rng.gen_range(-1e3..1e3), rng.gen_range(-1e3..1e3)]).collect();
    let b = VectorField::from_fn(g, |_, _, z| {
        let l = levels[(z * g.n3() as f64).round() as usize];
        [l[0], l[1], 0.0]
    });
    FlowState {
        t: rng.gen(),
        eta: FlowMap::from_displacement(d),
        v,
        q,
        b0: MagneticParam::new(b, 1e-6).unwrap(),
        kappa: rng.gen(),
        epsilon: rng.gen(),
    }
}

fn row(t: f64, g: GridSpec) -> SeriesRow {
    let s = FlowState::initial(VectorField::zeros(g), MagneticParam::zero(g), 0.0, 0.0).unwrap();
    SeriesRow { t, energy: energy(&s).unwrap(), invariants: invariants(&s, None).unwrap(), solver_iterations: 7, wall_ms: 0.0 }
}

#[test]
fn rest_state_round_trips_through_a_file() {
    let g = common::grid(8);
    let s = FlowState::initial(VectorField::zeros(g), MagneticParam::zero(g), 0.05, 1e-3).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("s.mhdl");
    write_snapshot(&s, &p).unwrap();
    assert_eq!(read_snapshot(&p).unwrap(), s);
    let bytes = std::fs::read(&p).unwrap();
    assert_eq!(&bytes[..4], &SNAPSHOT_MAGIC);
    // Header, then 12 table entries with 49 name bytes, then the payload.
    assert_eq!(bytes.len(), 36 + 12 * 12 + 49 + 8 * (10 * g.len() + 2));
}

#[test]
fn every_truncation_is_a_format_error() {
    let bytes = encode_snapshot(&random_state(common::grid(8), 1));
    for cut in (0..bytes.len()).step_by(97).chain([bytes.len() - 1]) {
        assert!(matches!(decode_snapshot(&bytes[..cut]), Err(Error::Format(_))), "cut at {cut}");
    }
    let mut long = bytes.clone();
    long.push(0);
    assert!(matches!(decode_snapshot(&long), Err(Error::Format(_))));
}

#[test]
fn corrupted_headers_are_rejected() {
    let bytes = encode_snapshot(&random_state(common::grid(8), 2));
    let mut bad = bytes.clone();
    bad[0] = b'X';
    assert!(matches!(decode_snapshot(&bad), Err(Error::Format(_))));
    let mut bad = bytes.clone();
    bad[4] = 9; // version
    assert!(matches!(decode_snapshot(&bad), Err(Error::Format(_))));
    let mut bad = bytes.clone();
    bad[20] = 3; // fd_order
    assert!(matches!(decode_snapshot(&bad), Err(Error::Format(_))));
    let mut bad = bytes;
    bad[8] = 7; // odd n1
    assert!(matches!(decode_snapshot(&bad), Err(Error::Format(_))));
}

#[test]
fn fourth_order_grids_keep_their_order() {
    let g = GridSpec::with_order(8, 10, 9, FdOrder::Fourth).unwrap();
    let s = random_state(g, 3);
    let back = decode_snapshot(&encode_snapshot(&s)).unwrap();
    assert_eq!(back.grid(), g);
    assert_eq!(back, s);
}

#[test]
fn series_append_writes_one_header_and_rejects_time_regression() {
    let g = common::grid(8);
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("series.csv");
    for t in [0.0, 0.1, 0.2] {
        append_series(&row(t, g), &p).unwrap();
    }
    let text = std::fs::read_to_string(&p).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    assert_eq!(lines[0], SERIES_COLUMNS.join(","));
    assert!(text.ends_with('\n') && !text.contains('\r'));

    assert!(matches!(append_series(&row(0.2, g), &p), Err(Error::Series(_))));
    assert!(matches!(append_series(&row(0.05, g), &p), Err(Error::Series(_))));
    assert_eq!(std::fs::read_to_string(&p).unwrap(), text);

    let rows = read_series(&p).unwrap();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[1], row(0.1, g));
    assert_eq!(rows[2].energy.kappa_trace, None);
}

#[test]
fn series_rows_with_bad_columns_are_rejected() {
    assert!(matches!(SeriesRow::from_csv("1,2,3"), Err(Error::Series(_))));
    let line = row(0.5, common::grid(8)).to_csv().replacen("0.", "x.", 1);
    assert!(matches!(SeriesRow::from_csv(&line), Err(Error::Series(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn random_snapshots_round_trip_bit_exactly(seed in any::<u64>(), n1 in 4usize..6, n2 in 4usize..6, n3 in 8usize..11) {
        let g = GridSpec::new(2 * n1, 2 * n2, n3).unwrap();
        let s = random_state(g, seed);
        let bytes = encode_snapshot(&s);
        let back = decode_snapshot(&bytes).unwrap();
        prop_assert_eq!(encode_snapshot(&back), bytes);
        prop_assert_eq!(back, s);
    }

    #[test]
    fn series_rows_round_trip(t in 0.0f64..1e3, iters in any::<u32>()) {
        let mut r = row(t, common::grid(8));
        r.solver_iterations = iters as u64;
        prop_assert_eq!(SeriesRow::from_csv(&r.to_csv()).unwrap(), r);
    }

    #[test]
    fn decoding_arbitrary_bytes_never_panics(bytes in proptest::collection::vec(any::<u8>(), 0..256)) {
        let _ = decode_snapshot(&bytes);
    }
}
