use std::process::{Command, Output};

use serde_json::Value;

fn bc1(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bc1")).args(args).output().unwrap()
}

fn json(args: &[&str]) -> (Value, i32) {
    let out = bc1(args);
    let v = serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}{}", String::from_utf8_lossy(&out.stdout), String::from_utf8_lossy(&out.stderr))
    });
    (v, out.status.code().unwrap())
}

fn pair(v: &Value) -> (f64, f64) {
    (v[0].as_f64().unwrap(), v[1].as_f64().unwrap())
}

#[test]
fn top_level_schema() {
    let (v, code) = json(&["roots", "--g2", "4", "--g3", "0"]);
    assert_eq!(code, 0);
    let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
    assert_eq!(keys, ["checks", "config", "discrepancies", "results", "version"]);
    assert_eq!(v["version"]["schema"], 1);
    assert_eq!(v["config"]["command"], "roots");
}

#[test]
fn spectrum_n1_polynomials() {
    let (v, code) = json(&["spectrum", "first:mu=0.25,n=1", "--g2", "3", "--g3", "0.5"]);
    assert_eq!(code, 0);
    let rows = v["results"]["eigenpairs"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    let mut consts: Vec<f64> = rows.iter().map(|r| pair(&r["poly"][0]).0).collect();
    consts.sort_by(f64::total_cmp);
    assert!((consts[0] + 0.5).abs() < 1e-12 && (consts[1] - 0.5).abs() < 1e-12, "{consts:?}");
    for r in rows {
        assert!(r["oracle"]["max"].as_f64().unwrap() < 1e-8);
    }
}

#[test]
fn spectrum_ground_and_jordan() {
    let (v, _) = json(&["spectrum", "first:mu=0,n=0", "--g2", "1", "--g3", "0"]);
    let rows = v["results"]["eigenpairs"].as_array().unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(pair(&rows[0]["energy"]), (0.0, 0.0));
    assert_eq!(pair(&rows[0]["poly"][0]), (1.0, 0.0));

    let (v, code) = json(&["spectrum", "first:mu=0.25,n=1", "--g2", "0", "--g3", "1"]);
    assert_eq!(code, 0);
    let rows = v["results"]["eigenpairs"].as_array().unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0]["jordan"], true);
    assert_eq!(rows[0]["eigenspace"].as_array().unwrap().len(), 1);
    let tau = &rows[0]["eigenspace"][0];
    assert_eq!((pair(&tau[0]), pair(&tau[1])), ((0.0, 0.0), (1.0, 0.0)));
    // no rectangular lattice for these invariants
    assert_eq!(v["checks"][1]["status"], "skipped");
}

#[test]
fn verify_default_and_negative_controls() {
    let (v, code) = json(&["verify", "first:mu=0.25,n=2", "--tau-im", "1"]);
    assert_eq!(code, 0);
    assert!(v["checks"].as_array().unwrap().iter().all(|c| c["status"] == "pass"));

    let (v, code) = json(&["verify", "first:mu=0.25,n=2", "--tau-im", "1", "--kappa3", "5"]);
    assert_eq!(code, 1);
    let failed: Vec<&str> = v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["status"] == "fail")
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert!(!failed.is_empty() && failed.iter().all(|n| n.starts_with("oracle-residual")), "{failed:?}");

    let (v, code) = json(&["verify", "second:mu=0.3,n=1,k=2", "--tau-im", "1.2", "--as-printed"]);
    assert_eq!(code, 1);
    let variants = v["discrepancies"][0]["variants"].as_array().unwrap();
    let verdicts: Vec<(&str, bool)> = variants
        .iter()
        .map(|x| (x["label"].as_str().unwrap(), x["pass"].as_bool().unwrap()))
        .collect();
    assert_eq!(verdicts, [("validated", true), ("printed-general", false), ("printed-tilde-relation", false)]);
}

#[test]
fn refusals_and_exit_codes() {
    let out = bc1(&["spectrum", "first:mu=0.25,n=2.5", "--tau-im", "1"]);
    assert_eq!(out.status.code(), Some(3));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("2.5") && msg.contains("quasi-exact") && msg.contains("any n"), "{msg}");
    assert_eq!(bc1(&["sweep", "first:mu=0.25,n=0.5", "--g3", "0", "--path", "circle:center=0,radius=1"]).status.code(), Some(3));
    assert_eq!(bc1(&["roots", "--g2", "1"]).status.code(), Some(2));
    assert_eq!(bc1(&["spectrum", "second:mu=0.3,n=1,k=4", "--tau-im", "1"]).status.code(), Some(2));
    assert_eq!(bc1(&["roots", "--g2", "3", "--g3", "1", "--tau-im", "1"]).status.code(), Some(2));
}

#[test]
fn tolerance_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_bc1"))
        .args(["verify", "first:mu=0.25,n=1", "--tau-im", "1"])
        .env("BC1_TOLERANCE", "1e-20")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["config"]["tolerance"], 1e-20);
}

#[test]
fn sweep_monodromy() {
    let (v, _) = json(&["sweep", "first:mu=0.25,n=1", "--g3", "0.5", "--path", "circle:center=0,radius=1"]);
    assert_eq!(v["results"]["summary"]["cycles"], "(1 2)");
    let (v, _) = json(&["sweep", "first:mu=0.25,n=0", "--g3", "0.5", "--path", "circle:center=1+1i,radius=3"]);
    assert_eq!(v["results"]["summary"]["cycles"], "()");

    let (v, _) = json(&["sweep", "first:mu=0.4,n=1", "--g3", "0", "--path", "segment:from=1,to=4", "--steps", "30"]);
    let mut prev = f64::NEG_INFINITY;
    for p in v["results"]["points"].as_array().unwrap() {
        let e: Vec<(f64, f64)> = p["energies"].as_array().unwrap().iter().map(pair).collect();
        assert!(e.iter().all(|z| z.1 == 0.0));
        assert!((e[0].0 + e[1].0).abs() < 1e-12);
        let top = e[0].0.max(e[1].0);
        assert!(top > prev);
        prev = top;
    }
}

#[test]
fn deterministic_output() {
    for args in [
        &["verify", "third:nu=0.7,n=2,k=1", "--tau-im", "1.3"][..],
        &["sweep", "second:mu=0.3,n=2,k=1", "--g3", "0.2", "--path", "circle:center=0,radius=2", "--format", "csv"][..],
    ] {
        assert_eq!(bc1(args).stdout, bc1(args).stdout);
    }
}

#[test]
fn csv_and_json_agree() {
    let base = ["spectrum", "second:mu=0.3,n=2,k=1", "--tau-im", "1.1"];
    let (v, _) = json(&base);
    let out = bc1(&[&base[..], &["--format", "csv"]].concat());
    let mut rdr = csv::Reader::from_reader(&out.stdout[..]);
    let header = rdr.headers().unwrap().clone();
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    let eig = v["results"]["eigenpairs"].as_array().unwrap();
    assert_eq!(rows.len(), eig.len());
    let col = |r: &csv::StringRecord, name: &str| -> f64 {
        r[header.iter().position(|h| h == name).unwrap()].parse().unwrap()
    };
    for (r, e) in rows.iter().zip(eig) {
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-15 * a.abs().max(1.0);
        assert!(close(col(r, "lambda_re"), pair(&e["lambda"]).0));
        assert!(close(col(r, "energy_im"), pair(&e["energy"]).1));
        assert!(close(col(r, "oracle_residual"), e["oracle"]["max"].as_f64().unwrap()));
        for j in 0..3 {
            assert!(close(col(r, &format!("p{j}_re")), pair(&e["poly"][j]).0));
            assert!(close(col(r, &format!("p{j}_im")), pair(&e["poly"][j]).1));
        }
    }
}

#[test]
fn discrepancy_report_matches_golden_file() {
    let golden = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/golden/discrepancies.json")).unwrap();
    let out = bc1(&["discrepancies"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stdout).unwrap(), golden);
}
