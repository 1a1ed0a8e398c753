use std::path::PathBuf;
use std::process::{Command, Output};

use proptest::prelude::*;
use serde_json::Value;

fn lagfib(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lagfib"))
        .args(args)
        .env_remove("LAGFIB_THREADS")
        .output()
        .expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("lagfib-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn error_class(out: &Output) -> String {
    let v: Value = serde_json::from_slice(&out.stderr).expect("error JSON on stderr");
    assert_eq!(v["schema"], "lagfib.v1");
    v["error"]["class"].as_str().unwrap().to_string()
}

#[test]
fn alpha_two_dimensional_example() {
    let v = json_of(&lagfib(&["alpha", "--family", "hl", "--n", "2", "--b", "1,0"]));
    assert_eq!(v["schema"], "lagfib.v1");
    assert_eq!(v["seed"], 42);
    let r = &v["result"];
    assert!((r["value"].as_f64().unwrap() + 0.881374).abs() < 1e-6);
    assert_eq!(r["oracles_agree"], true);
    assert!(r["bound"].as_f64().unwrap() < r["value"].as_f64().unwrap());
}

#[test]
fn ff22_monodromy_has_integer_entries() {
    let v = json_of(&lagfib(&["monodromy", "--family", "ff22", "--radius", "0.5"]));
    let m = &v["result"]["matrix"];
    let rows: Vec<Vec<i64>> = m
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r.as_array().unwrap().iter().map(|x| x.as_i64().expect("integer entry")).collect())
        .collect();
    assert_eq!(rows, vec![vec![1, 0, 0], vec![1, 1, 0], vec![0, 0, 1]]);
    assert!(m.to_string().find('.').is_none());
}

#[test]
fn hl_monodromy_reports_all_loops() {
    let v = json_of(&lagfib(&["monodromy", "--k", "48"]));
    let loops = v["result"]["loops"].as_array().unwrap();
    let ids: Vec<&str> = loops.iter().map(|l| l["identified_as"].as_str().unwrap()).collect();
    assert_eq!(ids, ["M3^-1", "M1", "M2", "M3"]);
    assert_eq!(v["result"]["vertex_is_product"], true);
}

#[test]
fn classify_linear_difference() {
    let v = json_of(&lagfib(&["classify", "--H", "0", "--Hp", "b1"]));
    assert_eq!(v["result"]["status"], "not_equivalent");
    assert_eq!(v["result"]["difference"], "-b1");
}

#[test]
fn sweep_grid_csv_shape() {
    let out = lagfib(&["sweep", "--x-range=-1:1:11", "--y-range=-1:1:11", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 122);
    assert_eq!(lines[0], "index,b1,b2,b3,alpha,error");
    for l in &lines[1..] {
        let cols: Vec<&str> = l.split(',').collect();
        assert_eq!(cols.len(), 6);
        cols[4].parse::<f64>().unwrap();
    }
}

#[test]
fn discriminant_grid_marks_the_origin() {
    let out = lagfib(&["discriminant", "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 11 * 11 * 11 + 1);
    assert!(text.lines().any(|l| l.starts_with("0.0,0.0,0.0,") && l.contains(",true,")));
}

#[test]
fn flow_trajectory_stays_on_the_fibre() {
    let v = json_of(&lagfib(&[
        "flow", "--family", "ff22", "--z", "0.3,0.2,-0.1,0.4,0.5,0.1", "--component", "2", "--t", "3",
    ]));
    assert_eq!(v["result"]["method"], "closed");
    assert!(v["result"]["max_fibre_drift"].as_f64().unwrap() < 1e-12);
    assert_eq!(v["result"]["trajectory"].as_array().unwrap().len(), 21);
}

#[test]
fn periods_table_along_a_segment() {
    let out = lagfib(&["periods", "--from", "0.5,0.2,0.3", "--to", "0.8,0.4,0.6", "--samples", "4", "--format", "csv"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 5);
}

#[test]
fn reruns_are_byte_identical() {
    let args = ["sweep", "--random", "40", "--seed", "7", "--quantity", "bound"];
    let a = scratch("a.json");
    let b = scratch("b.json");
    let run = |path: &PathBuf, threads: &str| {
        let status = Command::new(env!("CARGO_BIN_EXE_lagfib"))
            .args(args)
            .arg("--out")
            .arg(path)
            .env("LAGFIB_THREADS", threads)
            .status()
            .unwrap();
        assert!(status.success());
    };
    run(&a, "1");
    run(&b, "3");
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let other = lagfib(&["sweep", "--random", "40", "--seed", "8", "--quantity", "bound"]);
    assert_ne!(other.stdout, std::fs::read(&a).unwrap());
}

#[test]
fn config_file_with_flag_precedence() {
    let cfg = scratch("run.conf");
    std::fs::write(&cfg, "# shared\nfamily = ff22\nradius = 0.8\nk = 32\nb = 9,9\n").unwrap();
    let path = cfg.to_str().unwrap();
    let v = json_of(&lagfib(&["monodromy", "--config", path, "--radius", "0.5"]));
    assert_eq!(v["config"]["family"], "ff22");
    assert_eq!(v["config"]["args"]["radius"], "0.5");
    assert_eq!(v["config"]["args"]["k"], "32");
    assert_eq!(v["result"]["k"], 32);

    std::fs::write(&cfg, "radius = 0.5\nbogus = 1\n").unwrap();
    let out = lagfib(&["monodromy", "--config", path]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_class(&out), "ConfigError");
}

#[test]
fn exit_codes_follow_the_failure_class() {
    let usage = lagfib(&["alpha", "--b", "1,0", "--no-such-flag"]);
    assert_eq!(usage.status.code(), Some(2));
    assert_eq!(error_class(&usage), "UsageError");

    let parse = lagfib(&["classify", "--H", "2*", "--Hp", "0"]);
    assert_eq!(parse.status.code(), Some(2));
    assert_eq!(error_class(&parse), "ParseError");

    let numerical = lagfib(&["alpha", "--b", "0,0,0"]);
    assert_eq!(numerical.status.code(), Some(3));
    assert_eq!(error_class(&numerical), "OnDiscriminant");

    let io = lagfib(&["alpha", "--b", "1,0,0", "--out", "/nonexistent-dir/x.json"]);
    assert_eq!(io.status.code(), Some(5));
    assert_eq!(error_class(&io), "IoError");

    let missing = lagfib(&["alpha", "--config", "/nonexistent-dir/none.conf"]);
    assert_eq!(missing.status.code(), Some(5));

    let check = lagfib(&["check", "--only", "4,5"]);
    assert_eq!(check.status.code(), Some(4));
    let v: Value = serde_json::from_slice(&check.stdout).unwrap();
    assert_eq!(v["result"]["failed"], 1);
    assert_eq!(v["result"]["criteria"][1]["pass"], true);

    let flatness_csv = lagfib(&["classify", "--H", "0", "--Hp", "0", "--format", "csv"]);
    assert!(flatness_csv.status.success());
}

#[test]
fn bad_thread_cap_is_a_config_error() {
    let out = Command::new(env!("CARGO_BIN_EXE_lagfib"))
        .args(["sweep", "--x-range=0:1:2", "--y-range=0:1:2"])
        .env("LAGFIB_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_class(&out), "ConfigError");
}

#[test]
fn check_report_lists_thresholds() {
    let v = json_of(&lagfib(&["check", "--only", "1,8"]));
    let crit = v["result"]["criteria"].as_array().unwrap();
    assert_eq!(crit.len(), 2);
    for c in crit {
        assert_eq!(c["pass"], true);
        for m in c["measurements"].as_array().unwrap() {
            assert!(m["threshold"].is_string());
            assert!(m["value"].is_number());
        }
    }
    assert!(crit[1]["label"].as_str().unwrap().contains("finite-order"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn csv_floats_round_trip(x in prop::num::f64::ANY) {
        let mut t = lagfib::emit::Table::new(["x"]);
        t.push(vec![x.into()]);
        let csv = t.to_csv();
        let back: f64 = csv.lines().nth(1).unwrap().parse().unwrap();
        prop_assert!(back.to_bits() == x.to_bits() || (x.is_nan() && back.is_nan()));
    }

    #[test]
    fn config_text_round_trips(entries in prop::collection::btree_map("[a-z][a-z-]{0,8}", "[a-z0-9.,:-]{1,10}", 0..6)) {
        let text: String = entries.iter().map(|(k, v)| format!("{k} = {v}\n")).collect();
        let parsed = lagfib::config::parse_config_text(&text).unwrap();
        prop_assert_eq!(parsed, entries);
    }
}
