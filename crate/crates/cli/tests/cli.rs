use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use mtsharp_core::profile::{profile_from_csv, profile_to_csv, sobolev_energy};
use mtsharp_core::MtParams;
use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_mtsharp"));
    c.env_remove("MTSHARP_THREADS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn mtsharp")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("mtsharp-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn stdout_json(o: &Output) -> Value {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn green_writes_json_and_csv() {
    let dir = scratch("green");
    let prefix = dir.join("g");
    let o = run(&["green", "--N", "2", "--rmin", "1e-6", "--rmax", "50", "--out", prefix.to_str().unwrap()]);
    assert!(o.status.success());
    let v = json(&prefix.with_extension("json"));
    assert_eq!(v["tool_version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(v["config"]["args"]["rmax"], 50.0);
    let a0 = v["results"]["a0"].as_f64().unwrap();
    assert!((a0 - 0.018_451_073_777).abs() < 1e-9);
    let csv = std::fs::read_to_string(prefix.with_extension("csv")).unwrap();
    assert_eq!(csv.lines().nth(1), Some("r,G,G_prime"));
    assert!(csv.lines().count() > 1000);
}

#[test]
fn limits_for_the_plane() {
    let v = stdout_json(&run(&["limits", "--N", "2", "--beta", "0", "--spec", "phi-critical"]));
    let l = &v["results"]["limits"];
    assert!((l["d_nvl"].as_f64().unwrap() - 4.0 * std::f64::consts::PI).abs() < 1e-12);
    assert!((l["d_ncl"].as_f64().unwrap() - 10.768_152_306_5).abs() < 1e-8);
}

#[test]
fn subcritical_limits_are_zero_with_weight() {
    let v = stdout_json(&run(&["limits", "--beta", "0.5", "--spec", "polynomial", "--c-of-f", "1", "--coeffs", "2"]));
    assert_eq!(v["results"]["limits"]["d_nvl"], 0.0);
    assert_eq!(v["results"]["limits"]["d_ncl"], 0.0);
}

#[test]
fn spec_file_is_read() {
    let dir = scratch("specfile");
    let path = dir.join("f.kv");
    std::fs::write(&path, "kind=phi-minus-power\nN=2\nbeta=0\nlambda=1\n").unwrap();
    let v = stdout_json(&run(&["limits", "--spec-file", path.to_str().unwrap()]));
    let c = v["results"]["limits"]["c_of_f"].as_f64().unwrap();
    assert!((c - (4.0 * std::f64::consts::PI - 1.0)).abs() < 1e-12);
}

#[test]
fn usage_errors_are_structured() {
    let o = run(&["limits", "--spec", "phi-minus-power"]);
    assert_eq!(o.status.code(), Some(2));
    let e: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(e["error"]["kind"], "usage");
    assert!(e["error"]["message"].as_str().unwrap().contains("--lambda"));

    let o = run(&["verify", "no-such-check"]);
    assert_eq!(o.status.code(), Some(2));

    let o = bin().env("MTSHARP_THREADS", "zero").args(["limits"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn computation_errors_exit_one() {
    let o = run(&["limits", "--N", "1"]);
    assert_eq!(o.status.code(), Some(1));
    let e: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(e["error"]["kind"], "computation");
}

#[test]
fn thread_count_is_recorded() {
    let o = bin().env("MTSHARP_THREADS", "2").args(["limits"]).output().unwrap();
    assert_eq!(stdout_json(&o)["config"]["threads"], 2);
}

#[test]
fn aux1d_reports_closed_form_and_brute() {
    let v = stdout_json(&run(&["aux1d", "--N", "2", "--a", "10", "--b", "1", "--seed", "4"]));
    let r = &v["results"];
    assert!((r["sup_value"].as_f64().unwrap() - 10.2333).abs() < 1e-3);
    assert!(r["brute_relative_gap"].as_f64().unwrap().abs() < 5e-3);
    assert_eq!(v["config"]["args"]["seed"], 4);
}

#[test]
fn rearrange_output_roundtrips() {
    let dir = scratch("rearrange");
    let input = dir.join("in.csv");
    let radii: Vec<f64> = (0..200).map(|i| 1e-3 * 10f64.powf(4.0 * i as f64 / 199.0)).collect();
    let mut text = String::from("# N=3 beta=0\nr,u\n");
    for (i, r) in radii.iter().enumerate() {
        let u = if i == radii.len() - 1 { 0.0 } else { (-(r - 1.5).powi(2)).exp() + 0.3 * (-r * r).exp() };
        text.push_str(&format!("{r},{u}\n"));
    }
    std::fs::write(&input, text).unwrap();
    let prefix = dir.join("out");
    let o = run(&["rearrange", "--input", input.to_str().unwrap(), "--out", prefix.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&prefix.with_extension("json"));
    let r = &v["results"];
    assert!(r["grad_after"].as_f64().unwrap() <= r["grad_before"].as_f64().unwrap());
    for row in r["lp_norms"].as_array().unwrap() {
        let (a, b) = (row[1].as_f64().unwrap(), row[2].as_f64().unwrap());
        assert!((a - b).abs() < 5e-3 * a, "{row}");
    }
    let (p, u) = profile_from_csv(&std::fs::read_to_string(prefix.with_extension("csv")).unwrap()).unwrap();
    let params = MtParams::new(3, 0.0).unwrap();
    assert_eq!(p, Some(params));
    let (_, again) = profile_from_csv(&profile_to_csv(&u, &params)).unwrap();
    let (e1, e2) = (sobolev_energy(&u, &params).unwrap(), sobolev_energy(&again, &params).unwrap());
    assert!((e1.grad - e2.grad).abs() <= 1e-10 * e1.grad && (e1.lp - e2.lp).abs() <= 1e-10 * e1.lp);
}

#[test]
fn optimize_is_reproducible() {
    let dir = scratch("optimize");
    let mut outputs = Vec::new();
    for k in 0..2 {
        let prefix = dir.join(format!("run{k}"));
        let o = run(&[
            "optimize", "--spec", "polynomial", "--c-of-f", "1", "--coeffs", "10", "--nodes", "120", "--max-iter", "200",
            "--seed", "5", "--out", prefix.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        outputs.push((
            std::fs::read_to_string(prefix.with_extension("json")).unwrap().replace(&format!("run{k}"), "run"),
            std::fs::read_to_string(prefix.with_extension("csv")).unwrap(),
        ));
    }
    assert_eq!(outputs[0], outputs[1]);
    let v: Value = serde_json::from_str(&outputs[0].0).unwrap();
    assert_eq!(v["config"]["options"]["seed"], 5);
    // C_2 = 10 exceeds C(F)/B_2, so the maximizer beats the vanishing level C(F) = 1
    assert!(v["results"]["best_value"].as_f64().unwrap() > 1.0);
}

#[test]
fn verify_named_checks() {
    let o = run(&["verify", "green-a0", "concentration-limit"]);
    let v = stdout_json(&o);
    let rows = v["results"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r["passed"] == true));
    assert!(String::from_utf8_lossy(&o.stderr).contains("PASS"));
}
