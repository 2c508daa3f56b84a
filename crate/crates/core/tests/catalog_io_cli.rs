use std::path::Path;
use std::process::{Command, Output};

use genflow::catalog::{self, load_spec, read_spec, save_spec, AlgebraSpec};
use genflow::flow::{integrate, FlowOptions};
use genflow::io::{emit_trajectory_csv, read_trajectory_csv, write_trajectory_csv, CSV_HEADER};
use genflow::liealg::{scalar_curvature, structure_report};
use genflow::sample;
use genflow::soliton::verify_soliton;
use genflow::Error;
use proptest::prelude::*;
use tempfile::tempdir;

fn genflow() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_genflow"));
    for var in ["GENFLOW_TOL", "GENFLOW_JSON", "GENFLOW_T_MAX", "GENFLOW_SEARCH_TOL"] {
        c.env_remove(var);
    }
    c
}

fn status(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

#[test]
fn spec_errors_are_typed() {
    let dir = tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ \"name\": \"x\", \"dim\": ").unwrap();
    assert!(matches!(read_spec(&bad), Err(Error::Parse { .. })));
    assert!(matches!(read_spec(&dir.path().join("missing.json")), Err(Error::Io(_))));

    let cases = [
        (AlgebraSpec::new("zero-dim", 0), "index"),
        (AlgebraSpec::new("out", 3).mu(1, 4, 3, 1.0), "index"),
        (AlgebraSpec::new("order", 3).mu(2, 1, 3, 1.0), "index"),
        (AlgebraSpec::new("h-order", 3).h(1, 3, 2, 1.0), "index"),
        (AlgebraSpec::new("dup", 3).mu(1, 2, 3, 1.0).mu(1, 2, 3, 2.0), "duplicate"),
        (AlgebraSpec::new("h-dup", 3).h(1, 2, 3, 1.0).h(1, 2, 3, 1.0), "duplicate"),
        (AlgebraSpec::new("jacobi", 3).mu(1, 2, 3, 1.0).mu(2, 3, 2, 1.0), "jacobi"),
        // on aff(1) + R the 3-form e^{123} is not closed
        (AlgebraSpec::new("open", 4).mu(1, 2, 2, 1.0).h(2, 3, 4, 1.0), "closed"),
    ];
    for (spec, kind) in cases {
        let err = spec.to_dorfman().unwrap_err();
        let ok = match kind {
            "index" => matches!(err, Error::Index(_)),
            "duplicate" => matches!(err, Error::Duplicate(_)),
            "jacobi" => matches!(&err, Error::Jacobi { offending, .. } if offending.contains("(1,2,3)")),
            _ => matches!(err, Error::NotClosed { .. }),
        };
        assert!(ok, "{}: {err}", spec.name);
    }
    // every 3-form on a nilpotent 4-dimensional algebra is closed
    let n4 = AlgebraSpec::new("n4-h", 4)
        .mu(1, 2, 3, 1.0)
        .mu(1, 3, 4, 1.0)
        .h(1, 2, 4, 1.0);
    assert!(n4.to_dorfman().is_ok());
}

#[test]
fn catalog_entries_carry_their_certificates() {
    for e in catalog::catalog() {
        let d = e.spec.to_dorfman().unwrap();
        if let Some(exp) = &e.expected {
            let cert = verify_soliton(&d, 1e-8).unwrap().certificate;
            assert!((cert.lambda - exp.lambda).abs() < 1e-9, "{}", e.spec.name);
        }
    }
    let h = catalog::entry("heis3xRk:k=2").unwrap().spec.to_dorfman().unwrap();
    assert_eq!(h.dim(), 5);
    assert!(structure_report(h.mu(), 1e-9).is_nilpotent);
    let so3 = catalog::entry("so3").unwrap().spec.to_dorfman().unwrap();
    assert!((scalar_curvature(so3.mu()) - 1.5).abs() < 1e-15);
    assert!(matches!(catalog::entry("nope"), Err(Error::UnknownEntry(_))));
    assert!(catalog::entry("n3:a=x").is_err());
}

#[test]
fn empty_trajectory_writes_only_the_header() {
    let mut buf = Vec::new();
    write_trajectory_csv(&[], &mut buf).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap().trim_end(), CSV_HEADER.join(","));
}

#[test]
fn soliton_trajectory_csv_follows_the_closed_form() {
    let dir = tempdir().unwrap();
    let path = dir.path().join("n3.csv");
    // |mud|^2 = 12 and lambda = -2 at t = 0
    let d = catalog::entry("n3-soliton").unwrap().spec.to_dorfman().unwrap();
    assert!((d.norm2() - 12.0).abs() < 1e-12);
    let out = integrate(
        &d,
        &FlowOptions {
            t_max: 1.0,
            ..Default::default()
        },
    )
    .unwrap();
    let picks = [0, out.trajectory.len() / 2, out.trajectory.len() - 1];
    let rows: Vec<_> = picks.iter().map(|&i| out.trajectory[i].clone()).collect();
    emit_trajectory_csv(&rows, &path).unwrap();
    let (header, parsed) = read_trajectory_csv(&path).unwrap();
    assert_eq!(header, CSV_HEADER);
    assert_eq!(parsed.len(), 3);
    for (row, s) in parsed.iter().zip(&rows) {
        assert_eq!(row.t(), s.t);
        assert_eq!(row.norm2_mud(), s.norm2_mud);
        assert_eq!(row.values[8], s.step_size);
        assert!(row.ell.is_none());
        let exact = 12.0 / (1.0 + 4.0 * row.t());
        assert!((row.norm2_mud() - exact).abs() <= 1e-7 * exact);
    }
}

#[test]
fn normalized_csv_has_the_scaling_column() {
    let dir = tempdir().unwrap();
    let path = dir.path().join("norm.csv");
    let mut r = sample::rng(2);
    let d = sample::random_nilpotent_dorfman(&mut r, 4, true);
    let out = integrate(
        &d,
        &FlowOptions {
            t_max: 1.0,
            normalized: true,
            ..Default::default()
        },
    )
    .unwrap();
    emit_trajectory_csv(&out.trajectory, &path).unwrap();
    let (_, rows) = read_trajectory_csv(&path).unwrap();
    assert_eq!(rows.len(), out.trajectory.len());
    for (row, s) in rows.iter().zip(&out.trajectory) {
        assert_eq!(row.ell, s.ell);
        assert!(row.ell.is_some());
        assert_eq!(row.values[2], s.gen_scalar);
    }
}

fn check_roundtrip(dir: &Path, spec: &AlgebraSpec) {
    let path = dir.join(format!("{}.json", spec.name));
    save_spec(&path, spec).unwrap();
    let back = read_spec(&path).unwrap();
    assert_eq!(&back, spec);
    for (a, b) in back.mu_entries.iter().chain(&back.h_entries).zip(spec.mu_entries.iter().chain(&spec.h_entries)) {
        assert_eq!(a.v.to_bits(), b.v.to_bits());
    }
    let d = load_spec(&path).unwrap();
    assert_eq!(d, spec.to_dorfman().unwrap());
}

#[test]
fn catalog_round_trips_through_json() {
    let dir = tempdir().unwrap();
    for e in catalog::catalog() {
        check_roundtrip(dir.path(), &e.spec);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn random_specs_round_trip_bit_exactly(seed in any::<u64>(), n in 3usize..=6) {
        let mut r = sample::rng(seed);
        let d = sample::random_nilpotent_dorfman(&mut r, n, seed % 2 == 0);
        let spec = AlgebraSpec::from_dorfman("random", &d).tag("seed", seed);
        let dir = tempdir().unwrap();
        check_roundtrip(dir.path(), &spec);
        prop_assert_eq!(spec.to_dorfman().unwrap(), d);
    }
}

#[test]
fn cli_exit_codes() {
    let ok = genflow().args(["verify", "n3-soliton"]).output().unwrap();
    assert_eq!(status(&ok), 0, "{}", String::from_utf8_lossy(&ok.stderr));
    let not = genflow().args(["verify", "n3-control"]).output().unwrap();
    assert_eq!(status(&not), 1);
    let missing = genflow().args(["verify", "no-such-entry"]).output().unwrap();
    assert_eq!(status(&missing), 2);
    assert!(String::from_utf8_lossy(&missing.stderr).contains("no-such-entry"));

    let dir = tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "not json").unwrap();
    let out = genflow().arg("verify").arg(&bad).output().unwrap();
    assert_eq!(status(&out), 2);
    let jac = dir.path().join("jac.json");
    save_spec(&jac, &AlgebraSpec::new("jac", 3).mu(1, 2, 3, 1.0).mu(2, 3, 2, 1.0)).unwrap();
    let out = genflow().arg("curvature").arg(&jac).output().unwrap();
    assert_eq!(status(&out), 2);

    let report = genflow().arg("reproduce-classification").output().unwrap();
    assert_eq!(status(&report), 0);
}

#[test]
fn cli_tolerance_flag_beats_environment() {
    let strict = genflow()
        .args(["verify", "n4-soliton-1"])
        .env("GENFLOW_TOL", "1e-30")
        .output()
        .unwrap();
    assert_eq!(status(&strict), 1);
    let flag = genflow()
        .args(["verify", "n4-soliton-1", "--tol", "1e-8"])
        .env("GENFLOW_TOL", "1e-30")
        .output()
        .unwrap();
    assert_eq!(status(&flag), 0);
}

#[test]
fn cli_json_flow_and_export() {
    let out = genflow().args(["--json", "verify", "n3-soliton"]).output().unwrap();
    assert_eq!(status(&out), 0);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["check"]["certificate"]["lambda"].as_f64().unwrap() + 2.0).abs() < 1e-12);

    let dir = tempdir().unwrap();
    let csv = dir.path().join("traj.csv");
    let out = genflow()
        .args(["flow", "n3-soliton", "--t-max", "1", "--out"])
        .arg(&csv)
        .output()
        .unwrap();
    assert_eq!(status(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = read_trajectory_csv(&csv).unwrap();
    assert_eq!(header, CSV_HEADER);
    let last = rows.last().unwrap();
    assert!((last.t() - 1.0).abs() < 1e-12);
    assert!((last.norm2_mud() - 12.0 / 5.0).abs() < 1e-7);

    let spec = dir.path().join("n4.json");
    let out = genflow()
        .args(["catalog", "export", "n4-soliton-2", "--out"])
        .arg(&spec)
        .output()
        .unwrap();
    assert_eq!(status(&out), 0);
    assert_eq!(read_spec(&spec).unwrap(), catalog::entry("n4-soliton-2").unwrap().spec);
    let out = genflow().arg("verify").arg(&spec).output().unwrap();
    assert_eq!(status(&out), 0);

    let list = genflow().args(["catalog", "list"]).output().unwrap();
    assert_eq!(status(&list), 0);
    assert!(String::from_utf8_lossy(&list.stdout).contains("n3r-circle"));
}
