use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn symred(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_symred")).current_dir(dir).args(args).output().unwrap()
}

fn report(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("heat.json"), r#"{"A": "1", "B": "0", "C": "0"}"#).unwrap();
    fs::write(d.join("boost.json"), r#"{"phi": "0", "xi": "2*t", "M": "-x"}"#).unwrap();
    fs::write(d.join("dilation.json"), r#"{"phi": "t", "xi": "0", "M": "0"}"#).unwrap();
    fs::write(d.join("broken.json"), r#"{"A": "1 +", "B": "0", "C": "0"}"#).unwrap();

    let ok = symred(d, &["check", "heat.json", "--gen", "boost.json"]);
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(report(&ok)["status"], "PASS");

    let fail = symred(d, &["check", "heat.json", "--gen", "dilation.json"]);
    assert_eq!(fail.status.code(), Some(1));
    let r = report(&fail);
    assert_eq!(r["checks"][0]["status"], "FAIL");
    assert!(r["checks"][0]["witness"]["x"].is_number());

    for args in [
        &["check", "broken.json", "--gen", "boost.json"][..],
        &["check", "missing.json", "--gen", "boost.json"],
        &["check", "heat.json"],
        &["synth", "heat.json"],
        &["check", "heat.json", "--solution", "exp(x"],
    ] {
        let out = symred(d, args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(out.stdout.is_empty());
    }
}

#[test]
fn synth_writes_round_trippable_files() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("osc.json"), r#"{"family": "oscillator", "P": "x", "R": "x", "q": 1, "v": 1, "k": 2}"#).unwrap();
    let out = symred(d, &["synth", "osc.json", "--out", "o"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["pde.json", "gen.json", "solution.txt", "ansatz.json", "report.json"] {
        assert!(d.join("o").join(f).exists(), "{f}");
    }
    let pde: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("o/pde.json")).unwrap()).unwrap();
    assert_eq!((pde["A"].as_str(), pde["B"].as_str(), pde["C"].as_str()), (Some("0"), Some("-1"), Some("1")));

    let chk = symred(d, &["check", "o/pde.json", "--gen", "o/gen.json", "--solution-file", "o/solution.txt"]);
    assert_eq!(chk.status.code(), Some(0));
    let r = report(&chk);
    assert_eq!(r["checks"].as_array().unwrap().len(), 4);
    assert_eq!(r["inputs"].as_array().unwrap().len(), 3);
    assert_eq!(r["inputs"][0]["sha256"].as_str().unwrap().len(), 64);

    let red = symred(d, &["reduce", "o/pde.json", "o/ansatz.json"]);
    assert_eq!(report(&red)["payload"]["classification"], "IDENTITY");
}

#[test]
fn csv_tables() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("profile.json"), r#"{"H": 300, "N": "0.0002"}"#).unwrap();
    let out = symred(d, &["modes", "profile.json", "--modes", "2", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "m,C_m,k_m");
    let c1: f64 = lines[1].split(',').nth(1).unwrap().parse().unwrap();
    assert!((c1 - 0.06 / std::f64::consts::PI).abs() < 1e-6 * c1);
    assert_eq!(lines[1].split(',').nth(1).unwrap().split('e').next().unwrap().replace(['.', '-'], "").len(), 17);

    fs::write(d.join("zero.json"), r#"{"A": "0", "B": "0", "C": "0"}"#).unwrap();
    let out = symred(d, &["solve", "zero.json", "--ic", "sin(3*x) + x^2", "--nx", "5", "--nt", "3", "--out", "s", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let grid = fs::read_to_string(d.join("s/solution.csv")).unwrap();
    assert_eq!(grid.lines().count(), 1 + 5 * 4);
    assert!(grid.lines().skip(1).all(|l| l.ends_with(",0.0000000000000000e0")));

    fs::write(d.join("heat.json"), r#"{"A": "1", "B": "0", "C": "0"}"#).unwrap();
    let unstable = symred(d, &["solve", "heat.json", "--ic", "x", "--nt", "3"]);
    assert_eq!(unstable.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&unstable.stderr).contains("explicit scheme needs dt <="));
}

#[test]
fn timing_is_opt_in() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("heat.json"), r#"{"A": "1", "B": "0", "C": "0"}"#).unwrap();
    fs::write(d.join("zero.json"), r#"{"phi": "0", "xi": "0", "M": "0"}"#).unwrap();
    let plain = report(&symred(d, &["check", "heat.json", "--gen", "zero.json"]));
    assert!(plain.get("wall_time_s").is_none());
    let timed = report(&symred(d, &["--timing", "check", "heat.json", "--gen", "zero.json"]));
    assert!(timed["wall_time_s"].is_number());
}
