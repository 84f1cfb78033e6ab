use std::fs;
use std::path::Path;
use std::process::Command;

fn sbchain(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_sbchain")).args(args).env("RUST_LOG", "error").output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn csvs(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    v.sort();
    v
}

const EMIT: &str = "scenario = emit\nrun_id = tiny\n[model]\nsites = 6\nn_max = 2\ng = 0.3\n[numerics]\nt_final = 2\ndt = 0.1\nchi_max = 8\nprofile_every = 5\n";

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().to_string_lossy().into_owned();
    let ok = write(tmp.path(), "ok.cfg", EMIT);
    let r = sbchain(&["emit", "--config", &ok, "--out", &out]);
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));

    let bad = write(tmp.path(), "bad.cfg", "scenario = emit\n[model]\nsites = 4x\n");
    assert_eq!(sbchain(&["emit", "--config", &bad]).status.code(), Some(2));
    let unknown = write(tmp.path(), "unknown.cfg", "scenario = emit\ncolour = blue\n");
    assert_eq!(sbchain(&["emit", "--config", &unknown]).status.code(), Some(2));
    assert_eq!(sbchain(&["ground", "--config", &ok]).status.code(), Some(2));
    assert_eq!(sbchain(&["emit", "--config", "/nonexistent.cfg"]).status.code(), Some(2));
    assert_eq!(sbchain(&["emit", "--config", &ok, "--dt", "-1"]).status.code(), Some(2));

    // a charge basis too small for the junctions
    let unconverged = write(
        tmp.path(),
        "circuit.cfg",
        "scenario = circuit\n[circuit]\nej = 400\nn_cutoff = 5\nalpha_grid = 0.7\n",
    );
    let r = sbchain(&["circuit", "--config", &unconverged, "--out", &out]);
    assert_eq!(r.status.code(), Some(3), "{}", String::from_utf8_lossy(&r.stderr));
}

#[test]
fn run_directory_contents_and_overrides() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("runs");
    let cfg = write(tmp.path(), "e.cfg", EMIT);
    let r = sbchain(&["emit", "--config", &cfg, "--out", out.to_str().unwrap(), "--chi", "4", "--dt", "0.05", "--threads", "2"]);
    assert!(r.status.success());
    let dir = out.join("tiny");
    assert_eq!(String::from_utf8(r.stdout).unwrap().trim(), dir.to_str().unwrap());
    let echoed = sbchain::experiment::parse_config(&fs::read_to_string(dir.join("config.txt")).unwrap()).unwrap();
    assert_eq!(echoed.numerics.chi_max, 4);
    assert_eq!(echoed.numerics.dt, 0.05);
    assert_eq!(echoed.threads, 2);
    let series = fs::read_to_string(dir.join("series.csv")).unwrap();
    assert_eq!(series.lines().count(), 1 + 41);
    assert!(series.starts_with("t,pz,px,energy,norm_loss,max_chi,truncation_error\n"));
    let json: serde_json::Value = serde_json::from_slice(&fs::read(dir.join("record.json")).unwrap()).unwrap();
    assert_eq!(json["config"]["scenario"], "emit");
    assert!(json["wall_time_s"].as_f64().unwrap() >= 0.0);
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "e.cfg", EMIT);
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    for d in [&a, &b] {
        assert!(sbchain(&["emit", "--config", &cfg, "--out", d.to_str().unwrap()]).status.success());
    }
    let (ca, cb) = (csvs(&a.join("tiny")), csvs(&b.join("tiny")));
    assert_eq!(ca.len(), 4);
    assert_eq!(ca, cb);
}
