use fhartree::io::{emit_tables, execute, parse_config, read_checkpoint, write_checkpoint, Checkpoint, Table};
use fhartree::many_body::{random_symmetric_state, reduce_density_1};
use fhartree::studies::{run_study, StudyKind, SweepSpec};
use fhartree::{Error, Field, Grid, HartreeParams, Sign};

fn params() -> HartreeParams {
    HartreeParams::new(1.0, 1.0, Sign::Defocusing, 1.0).with_alpha(0.5)
}

#[test]
fn field_checkpoint_round_trips_through_disk() {
    let grid = Grid::new(2, 16, 4.0).unwrap();
    let mut phi = Field::gaussian(&grid, 1.3);
    phi.normalize();
    let ck = Checkpoint::from_field(&phi, vec![0.25, 1.0]);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("phi.fhrt");
    write_checkpoint(&ck, &path).unwrap();
    let back = read_checkpoint(&path).unwrap();
    assert_eq!(back, ck);
    assert_eq!(back.to_field().unwrap().values(), phi.values());
}

#[test]
fn rank_three_state_round_trips() {
    let grid = Grid::new(1, 16, 5.0).unwrap();
    let psi = random_symmetric_state(&grid, 3, &params(), 5).unwrap();
    let ck = Checkpoint::from_state(&psi, vec![]);
    assert_eq!(ck.rank(), 3);
    let back = Checkpoint::from_bytes(&ck.to_bytes()).unwrap().to_state(params()).unwrap();
    assert_eq!(back.particles(), 3);
    assert_eq!(back.amplitudes(), psi.amplitudes());
}

#[test]
fn density_checkpoint_keeps_matrix() {
    let grid = Grid::new(1, 8, 4.0).unwrap();
    let rho = reduce_density_1(&random_symmetric_state(&grid, 2, &params(), 1).unwrap());
    let ck = Checkpoint::from_density(&rho, vec![1.0]);
    assert_eq!(ck.rank(), 2);
    assert_eq!(Checkpoint::from_bytes(&ck.to_bytes()).unwrap(), ck);
}

#[test]
fn truncated_checkpoint_reports_offset() {
    let grid = Grid::new(1, 16, 4.0).unwrap();
    let bytes = Checkpoint::from_field(&Field::gaussian(&grid, 1.0), vec![]).to_bytes();
    let cut = bytes.len() - 20;
    match Checkpoint::from_bytes(&bytes[..cut]) {
        Err(Error::Checkpoint { offset, .. }) => assert!(offset <= cut),
        other => panic!("expected a checkpoint error, got {other:?}"),
    }
}

#[test]
fn corrupted_payload_fails_checksum() {
    let grid = Grid::new(1, 16, 4.0).unwrap();
    let mut bytes = Checkpoint::from_field(&Field::gaussian(&grid, 1.0), vec![]).to_bytes();
    let mid = bytes.len() / 2;
    bytes[mid] ^= 0x40;
    let e = Checkpoint::from_bytes(&bytes).unwrap_err();
    assert!(e.to_string().contains("checksum"), "{e}");
}

#[test]
fn bad_magic_is_rejected() {
    let e = Checkpoint::from_bytes(b"NOPE and then some").unwrap_err();
    assert!(matches!(e, Error::Checkpoint { offset: 0, .. }));
}

#[test]
fn empty_table_writes_header_only() {
    let t = Table::new(["a", "b"]);
    assert_eq!(t.to_csv().unwrap().trim_end(), "a,b");
}

#[test]
fn study_tables_land_on_disk() {
    let grid = Grid::new(1, 32, 8.0).unwrap();
    let p = HartreeParams::new(0.6, 0.5, Sign::Defocusing, 1.0).with_dt(0.01);
    let spec = SweepSpec::new(StudyKind::AlphaSweep, p, vec![0.1, 0.2, 0.4], 0.1, &grid);
    let r = run_study(&spec).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let files = emit_tables(&r, dir.path()).unwrap();
    assert!(files.iter().any(|f| f.ends_with("alpha_sweep.csv")));
    let csv = std::fs::read_to_string(dir.path().join("alpha_sweep.csv")).unwrap();
    assert!(csv.starts_with("alpha,l2_distance,hdot_distance"));
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn execute_refuses_non_empty_output() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("stale"), "x").unwrap();
    let cfg = parse_config(r#"{"command":"evolve","dim":1,"points":16,"horizon":0.01,"dt":0.01}"#).unwrap();
    let e = execute(&cfg, dir.path()).unwrap_err();
    assert_eq!(e.exit_code(), 2);
}

#[test]
fn evolve_command_writes_diagnostics_and_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let cfg = parse_config(
        r#"{"command":"evolve","dim":1,"gamma":0.6,"points":32,"half_width":8,"horizon":0.1,"dt":0.01,"sample_every":2}"#,
    )
    .unwrap();
    let report = execute(&cfg, &out).unwrap();
    assert!(report.passed());
    let csv = std::fs::read_to_string(out.join("diagnostics.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 6);
    let phi = read_checkpoint(out.join("final.fhrt")).unwrap().to_field().unwrap();
    assert!((phi.mass() - 1.0).abs() < 1e-10);
}

#[test]
fn config_errors_name_the_key() {
    for (text, key) in [
        (r#"{"command":"evolve","points":7}"#, "points"),
        (r#"{"command":"evolve","dt":-1}"#, "dt"),
        (r#"{"command":"meanfield","sigma":1}"#, "alpha"),
        (r#"{"command":"dichotomy","gamma":1,"sigma":0.7}"#, "sigma"),
        (r#"{"command":"evolve","thetas":[1.5]}"#, "thetas"),
    ] {
        let e = parse_config(text).unwrap_err();
        assert!(e.to_string().contains(key), "{text}: {e}");
        assert_eq!(e.exit_code(), 2);
    }
}
