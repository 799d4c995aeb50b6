use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn ldpcc(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ldpcc"))
        .args(args)
        .current_dir(dir)
        .env_remove("LDPCC_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(code(&ldpcc(d, &["--help"])), 0);
    assert_eq!(code(&ldpcc(d, &["construct", "--J", "3", "--M", "4", "--L", "5"])), 0);
    assert_eq!(code(&ldpcc(d, &["construct", "--bogus"])), 1);
    assert_eq!(code(&ldpcc(d, &["construct", "--J", "2", "--M", "4", "--L", "5"])), 1);

    let tiny_grid =
        ["de", "--J", "3", "--L", "5", "--channel", "awgn", "--sigma", "3.0", "--delta", "0.5", "--rmax", "1"];
    assert_eq!(code(&ldpcc(d, &tiny_grid)), 2);

    let above = ["de", "--J", "3", "--L", "20", "--channel", "bec", "--epsilon", "0.6", "--out", "above.json"];
    assert_eq!(code(&ldpcc(d, &above)), 0);
    let strict: Vec<&str> = std::iter::once("--strict").chain(above).collect();
    assert_eq!(code(&ldpcc(d, &strict)), 3);
    let below =
        ["--strict", "de", "--J", "3", "--L", "20", "--channel", "bec", "--epsilon", "0.4", "--out", "below.json"];
    assert_eq!(code(&ldpcc(d, &below)), 0);
    assert_eq!(json(&d.join("below.json"))["trace"]["verdict"]["verdict"], "certified");
}

#[test]
fn manifest_replays_to_identical_output() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let args = [
        "window",
        "--J",
        "3",
        "--L",
        "30",
        "--W",
        "6",
        "--channel",
        "bec",
        "--epsilon",
        "0.45",
        "--sample-levels",
        "5,8",
        "--out",
        "w.json",
    ];
    assert_eq!(code(&ldpcc(d, &args)), 0);
    let first = std::fs::read(d.join("w.json")).unwrap();
    let manifest = json(&d.join("w.json.manifest.json"));
    assert_eq!(manifest["schema"], "ldpcc.run_manifest/1");
    assert_eq!(manifest["subcommand"], "window");
    let digest = manifest["outputs"][0]["sha256"].as_str().unwrap().to_string();
    assert_eq!(digest, ldpcc::cli::sha256_hex(&first));

    let argv: Vec<String> =
        manifest["argv"].as_array().unwrap().iter().map(|v| v.as_str().unwrap().to_string()).collect();
    std::fs::remove_file(d.join("w.json")).unwrap();
    let argv_ref: Vec<&str> = argv.iter().map(String::as_str).collect();
    assert_eq!(code(&ldpcc(d, &argv_ref)), 0);
    assert_eq!(std::fs::read(d.join("w.json")).unwrap(), first);
}

#[test]
fn config_file_supplies_missing_flags() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(
        d.join("run.conf"),
        "# erasure run\nJ = 3\nL = 20\nchannel = bec\nepsilon = 0.45\nno-mirror = false\n",
    )
    .unwrap();
    let out = ldpcc(d, &["--config", "run.conf", "de", "--epsilon", "0.40", "--out", "t.json"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let t = json(&d.join("t.json"));
    assert_eq!(t["channel"]["epsilon"], 0.40);
    assert_eq!(t["j"], 3);
    let manifest = json(&d.join("t.json.manifest.json"));
    let argv: Vec<&str> = manifest["argv"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    assert!(argv.contains(&"--L=20"), "{argv:?}");
}

#[test]
fn default_outputs_land_in_the_output_directory() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    std::fs::create_dir(&out_dir).unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_ldpcc"))
        .args(["construct", "--J", "3", "--M", "8", "--L", "4"])
        .current_dir(dir.path())
        .env("LDPCC_OUT_DIR", &out_dir)
        .output()
        .unwrap();
    assert_eq!(code(&status), 0);
    let text = std::fs::read_to_string(out_dir.join("code.alist")).unwrap();
    assert_eq!(text.lines().next(), Some("112 72"));
    assert!(out_dir.join("code.alist.manifest.json").exists());
    assert!(!dir.path().join("code.alist").exists());
}

#[test]
fn erasure_threshold_to_tolerance() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let args = [
        "threshold",
        "--channel",
        "bec",
        "--J",
        "3",
        "--L",
        "100",
        "--lo",
        "0.45",
        "--hi",
        "0.52",
        "--tol",
        "1e-4",
        "--out",
        "thr.json",
    ];
    assert_eq!(code(&ldpcc(d, &args)), 0);
    let r = &json(&d.join("thr.json"))["result"];
    let lo = r["bracket"][0].as_f64().unwrap();
    let hi = r["bracket"][1].as_f64().unwrap();
    let est = r["threshold"].as_f64().unwrap();
    assert!(hi - lo <= 1e-4 && lo <= est && est <= hi);
    assert!((est - 0.4881).abs() < 1e-3, "{est}");

    assert_eq!(code(&ldpcc(d, &["export", "--input", "thr.json", "--to", "csv", "--out", "probes.csv"])), 0);
    let csv = std::fs::read_to_string(d.join("probes.csv")).unwrap();
    assert!(csv.lines().count() > 3);
}

#[test]
fn graph_exports_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(
        code(&ldpcc(d, &["construct", "--J", "3", "--M", "6", "--L", "5", "--seed", "4", "--out", "a.alist"])),
        0
    );
    assert_eq!(code(&ldpcc(d, &["export", "--input", "a.alist", "--to", "json", "--out", "g.json"])), 0);
    assert_eq!(json(&d.join("g.json"))["schema"], "ldpcc.tanner_graph/1");
    assert_eq!(code(&ldpcc(d, &["export", "--input", "g.json", "--to", "alist", "--out", "b.alist"])), 0);
    assert_eq!(std::fs::read(d.join("a.alist")).unwrap(), std::fs::read(d.join("b.alist")).unwrap());
}

#[test]
fn simulation_table_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let args = [
        "simulate",
        "--J",
        "3",
        "--M",
        "32",
        "--L",
        "8",
        "--channel",
        "bec",
        "--param",
        "0.3,0.5",
        "--trials",
        "20",
        "--seed",
        "3",
        "--out",
        "a.csv",
    ];
    assert_eq!(code(&ldpcc(d, &args)), 0);
    let again: Vec<&str> = args.iter().map(|&a| if a == "a.csv" { "b.csv" } else { a }).collect();
    assert_eq!(code(&ldpcc(d, &["--jobs", "1"].iter().copied().chain(again).collect::<Vec<_>>())), 0);
    let a = std::fs::read_to_string(d.join("a.csv")).unwrap();
    assert_eq!(a, std::fs::read_to_string(d.join("b.csv")).unwrap());
    assert_eq!(a.lines().count(), 4, "{a}");
    assert!(a.lines().nth(2).unwrap().starts_with("0.3,20,"), "{a}");
}
