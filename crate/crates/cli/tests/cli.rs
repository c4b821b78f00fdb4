use std::fs;
use std::path::PathBuf;
use std::process::Command;

fn tbk() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tbk"))
}

fn shipped(id: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(format!("../core/scenarios/{id}.json"))
}

#[test]
fn p1_fs_run_reports_unit_volume() {
    let dir = tempfile::tempdir().unwrap();
    let status = tbk().arg("run").arg(shipped("p1_fs")).arg("--out").arg(dir.path()).status().unwrap();
    assert_eq!(status.code(), Some(0));
    let report = fs::read_to_string(dir.path().join("report.txt")).unwrap();
    assert!(report.lines().any(|l| l == "vol_from_dims=1"));
    for name in ["kernel.csv", "envelope.csv", "ma.csv", "volume_report.csv"] {
        let body = fs::read_to_string(dir.path().join(name)).unwrap();
        assert!(body.ends_with('\n') && !body.contains('\r'));
    }
}

#[test]
fn diag_bump_agrees_three_ways() {
    let dir = tempfile::tempdir().unwrap();
    let status = tbk().arg("run").arg(shipped("diag_bump")).arg("--out").arg(dir.path()).status().unwrap();
    assert_eq!(status.code(), Some(0));
    let report = fs::read_to_string(dir.path().join("report.txt")).unwrap();
    assert!(report.contains("three_way_agreement=true"));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let status = tbk().arg("run").arg(shipped("p1_bump")).arg("--out").arg(d.path()).status().unwrap();
        assert!(status.success());
    }
    for name in ["kernel.csv", "envelope.csv", "ma.csv", "volume_report.csv", "report.txt"] {
        assert_eq!(fs::read(a.path().join(name)).unwrap(), fs::read(b.path().join(name)).unwrap(), "{name}");
    }
}

#[test]
fn unwritable_out_dir_exits_with_io_code() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let out = tbk().arg("run").arg(shipped("p1_fs")).arg("--out").arg(blocker.join("sub")).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err.lines().count(), 1);
    assert!(err.starts_with("error=IO_OUT_DIR"));
}

#[test]
fn invalid_documents_exit_with_validation_code() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("zero.json", r#"{"id": "z", "polytope": {"kind": "interval", "a": 1}, "m_list": [0]}"#, "VALIDATION"),
        ("extra.json", r#"{"id": "z", "foo": 1, "polytope": {"kind": "interval", "a": 1}, "m_list": [8]}"#, "PARSE"),
        (
            "coarse.json",
            r#"{"id": "z", "polytope": {"kind": "interval", "a": 1}, "grid": {"n_per_axis": 9}, "m_list": [8]}"#,
            "GRID_TOO_COARSE",
        ),
    ];
    for (name, body, code) in cases {
        let path = dir.path().join(name);
        fs::write(&path, body).unwrap();
        let out = tbk().arg("run").arg(&path).arg("--out").arg(dir.path().join("out")).output().unwrap();
        assert_eq!(out.status.code(), Some(3), "{name}");
        assert!(String::from_utf8(out.stderr).unwrap().starts_with(&format!("error={code}")), "{name}");
    }
}
