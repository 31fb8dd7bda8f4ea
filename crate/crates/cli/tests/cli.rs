use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn ford(cache: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ford"))
        .args(args)
        .env("FORD_CACHE", cache)
        .output()
        .expect("spawn ford")
}

fn json_out(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

fn json_err(o: &Output) -> Value {
    let line = String::from_utf8_lossy(&o.stderr);
    let last = line.lines().last().expect("stderr has a line");
    serde_json::from_str(last).expect("stderr is JSON")
}

fn cache_files(dir: &Path) -> Vec<std::path::PathBuf> {
    fs::read_dir(dir)
        .map(|it| it.map(|e| e.unwrap().path()).collect())
        .unwrap_or_default()
}

#[test]
fn complexity_of_15() {
    let tmp = tempfile::tempdir().unwrap();
    let o = ford(tmp.path(), &["complexity", "15"]);
    assert!(o.status.success());
    let v = json_out(&o);
    assert_eq!(v["complexity"], 0);
    assert_eq!(v["psi"], 7);
    assert_eq!(v["agreement"], true);
    assert_eq!(v["timings"], Value::Null);
    let mids: Vec<u64> = v["regions"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|r| r["shape"] == "midpoint")
        .map(|r| r["n"].as_u64().unwrap())
        .collect();
    assert_eq!(mids, vec![5, 9]);
    let r9 = v["regions"].as_array().unwrap().iter().find(|r| r["n"] == 9).unwrap();
    assert_eq!(r9["disks"], serde_json::json!([[19, 30]]));
}

#[test]
fn complexity_of_210_is_one() {
    let tmp = tempfile::tempdir().unwrap();
    let o = ford(tmp.path(), &["complexity", "210"]);
    assert!(o.status.success());
    assert_eq!(json_out(&o)["complexity"], 1);
}

#[test]
fn exhaustive_matches_derived() {
    let tmp = tempfile::tempdir().unwrap();
    let strip = |mut v: Value| {
        v["exhaustive"] = Value::Null;
        for r in v["regions"].as_array_mut().unwrap() {
            r["source"] = Value::Null;
            r["mirror_of"] = Value::Null;
            // Derived good regions carry no certificate depth.
            if r["class"] == "good" {
                r["certificate_k"] = Value::Null;
            }
        }
        v
    };
    let a = strip(json_out(&ford(tmp.path(), &["complexity", "330"])));
    let b = strip(json_out(&ford(tmp.path(), &["complexity", "330", "--exhaustive"])));
    assert_eq!(a, b);
}

#[test]
fn sweep_exits_zero() {
    let tmp = tempfile::tempdir().unwrap();
    let o = ford(tmp.path(), &["sweep", "2", "300"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v = json_out(&o);
    assert_eq!(v["entries"].as_array().unwrap().len(), 299);
    assert_eq!(v["all_agree"], true);
}

#[test]
fn sweep_with_shallow_depth_is_unresolved() {
    let tmp = tempfile::tempdir().unwrap();
    let o = ford(tmp.path(), &["sweep", "28", "32", "--kmax", "1"]);
    assert_eq!(o.status.code(), Some(1));
    let e = json_err(&o);
    assert_eq!(e["error"], "unresolved");
    assert_eq!(e["levels"], serde_json::json!([28, 30]));
}

#[test]
fn region_reports_exposed_arcs_and_poles() {
    let tmp = tempfile::tempdir().unwrap();
    let o = ford(tmp.path(), &["region", "15", "5"]);
    assert!(o.status.success());
    let v = json_out(&o);
    assert_eq!(v["shape"], "midpoint");
    assert_eq!(v["disks"][0]["disk"], serde_json::json!([11, 30]));
    assert_eq!(v["disks"][0]["exposed"], serde_json::json!([[[1, 3], [2, 5]]]));
    assert_eq!(v["disks"][0]["pole"]["count"], 0);

    let o = ford(tmp.path(), &["region", "210", "117"]);
    let v = json_out(&o);
    assert_eq!(v["complexity"], 1);
    let covered: Vec<&Value> = v["disks"].as_array().unwrap().iter().filter(|d| d["pole"]["count"] == 1).collect();
    assert_eq!(covered.len(), 1);
}

#[test]
fn region_rejects_non_breakpoint() {
    let tmp = tempfile::tempdir().unwrap();
    let o = ford(tmp.path(), &["region", "15", "4"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(json_err(&o)["error"], "usage");
}

#[test]
fn render_nine() {
    let tmp = tempfile::tempdir().unwrap();
    let svg = tmp.path().join("r9.svg");
    let o = ford(tmp.path(), &["render", "9", "-o", svg.to_str().unwrap()]);
    assert!(o.status.success());
    let doc = fs::read_to_string(&svg).unwrap();
    assert!(doc.contains(r#"version="1.1""#));
    assert_eq!(doc.matches(r#"<circle class="disk""#).count(), 6);
    assert_eq!(doc.matches(r#"<line class="breakpoint""#).count(), 4);

    let one = tmp.path().join("r15.svg");
    let o = ford(tmp.path(), &["render", "15", "--region", "5", "-o", one.to_str().unwrap()]);
    assert!(o.status.success());
    let doc = fs::read_to_string(&one).unwrap();
    assert_eq!(doc.matches(r#"<circle class="disk""#).count(), 1);
    assert_eq!(doc.matches(r#"<line class="breakpoint""#).count(), 2);
}

#[test]
fn witnesses() {
    let tmp = tempfile::tempdir().unwrap();
    let o = ford(tmp.path(), &["witness-c1", "210"]);
    assert!(o.status.success());
    let v = json_out(&o);
    assert_eq!(v["n"], 117);
    assert_eq!(v["pair_complexity"], 1);
    assert_eq!(v["pole"]["tangential"], serde_json::json!([[353, 630]]));

    let v = json_out(&ford(tmp.path(), &["witness-c1", "15"]));
    assert_eq!(v["n"], Value::Null);

    let o = ford(tmp.path(), &["witness-q", "3"]);
    assert!(o.status.success());
    let v = json_out(&o);
    for (k, want) in [("A", 5), ("A_prime", 19), ("B", 119), ("C_prime", 249), ("C", 250)] {
        assert_eq!(v[k], want, "{k}");
    }
    assert!(v["n"].is_string());
    assert_eq!(v["verified"], true);
    assert_eq!(v["lower_bound"]["holds"], true);
    assert_eq!(v["lower_bound"]["pole_count"], 1);

    let o = ford(tmp.path(), &["witness-q", "9"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn cross_validate_small_range() {
    let tmp = tempfile::tempdir().unwrap();
    let o = ford(tmp.path(), &["cross-validate", "2", "60"]);
    assert!(o.status.success());
    let v = json_out(&o);
    assert!(v["regions_checked"].as_u64().unwrap() > 0);
    assert_eq!(v["mismatches"], serde_json::json!([]));
}

#[test]
fn csv_output() {
    let tmp = tempfile::tempdir().unwrap();
    let o = ford(tmp.path(), &["complexity", "15", "--format", "csv"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    assert_eq!(rdr.headers().unwrap().get(0), Some("n"));
    assert_eq!(rdr.records().count(), 7);
}

#[test]
fn repeated_runs_are_byte_identical_and_hit_cache() {
    let tmp = tempfile::tempdir().unwrap();
    let first = ford(tmp.path(), &["complexity", "210"]);
    let files = cache_files(tmp.path());
    assert_eq!(files.len(), 1);
    let stamp = fs::metadata(&files[0]).unwrap().modified().unwrap();
    let second = ford(tmp.path(), &["complexity", "210"]);
    assert_eq!(first.stdout, second.stdout);
    assert_eq!(fs::metadata(&files[0]).unwrap().modified().unwrap(), stamp, "cache entry rewritten");

    let uncached = Command::new(env!("CARGO_BIN_EXE_ford"))
        .args(["complexity", "210", "--no-cache"])
        .output()
        .unwrap();
    assert_eq!(first.stdout, uncached.stdout);
}

#[test]
fn stale_cache_entry_is_ignored() {
    let tmp = tempfile::tempdir().unwrap();
    let fresh = ford(tmp.path(), &["complexity", "15"]);
    let path = &cache_files(tmp.path())[0];
    let mut entry: Value = serde_json::from_slice(&fs::read(path).unwrap()).unwrap();
    entry["engine_version"] = "0.0.0+old".into();
    entry["record"]["complexity"] = 99.into();
    fs::write(path, serde_json::to_vec(&entry).unwrap()).unwrap();

    let again = ford(tmp.path(), &["complexity", "15"]);
    assert!(again.status.success());
    assert_eq!(fresh.stdout, again.stdout);
    let rewritten: Value = serde_json::from_slice(&fs::read(path).unwrap()).unwrap();
    assert_ne!(rewritten["engine_version"], "0.0.0+old");
}

#[test]
fn corrupt_cache_entry_warns_and_recomputes() {
    let tmp = tempfile::tempdir().unwrap();
    let fresh = ford(tmp.path(), &["complexity", "15"]);
    let path = &cache_files(tmp.path())[0];
    fs::write(path, b"{ not json").unwrap();

    let again = ford(tmp.path(), &["complexity", "15"]);
    assert!(again.status.success());
    assert_eq!(fresh.stdout, again.stdout);
    assert_eq!(json_err(&again)["warning"], "cache-entry-unreadable");
    let repaired: Value = serde_json::from_slice(&fs::read(path).unwrap()).unwrap();
    assert_eq!(repaired["record"]["N"], 15);
}

#[test]
fn deleted_cache_directory_is_recreated() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("nested").join("cache");
    let a = ford(&dir, &["complexity", "30"]);
    fs::remove_dir_all(&dir).unwrap();
    let b = ford(&dir, &["complexity", "30"]);
    assert!(b.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(cache_files(&dir).len(), 1);
}

#[test]
fn usage_errors_exit_two_with_json() {
    let tmp = tempfile::tempdir().unwrap();
    for args in [&["frobnicate"][..], &["complexity"], &["complexity", "1"], &["complexity", "x"], &["sweep", "9", "3"]] {
        let o = ford(tmp.path(), args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        let e = json_err(&o);
        assert_eq!(e["error"], "usage", "{args:?}");
        assert!(e["message"].is_string());
    }
    assert!(ford(tmp.path(), &["--help"]).status.success());
    assert!(ford(tmp.path(), &["--version"]).status.success());
}

#[test]
fn json_round_trips() {
    let tmp = tempfile::tempdir().unwrap();
    for args in [&["complexity", "60"][..], &["region", "60", "14"], &["sweep", "2", "40"]] {
        let o = ford(tmp.path(), args);
        let v = json_out(&o);
        let again: Value = serde_json::from_str(&serde_json::to_string(&v).unwrap()).unwrap();
        assert_eq!(v, again);
        assert_eq!(v["schema_version"], 1);
    }
}

#[test]
fn render_counts_match_boundary_set() {
    let tmp = tempfile::tempdir().unwrap();
    for big_n in [2u64, 6, 12, 15, 30, 49, 60, 105, 210] {
        let n = big_n.to_string();
        let rec = json_out(&ford(tmp.path(), &["complexity", &n]));
        let disks: std::collections::BTreeSet<(u64, u64)> = rec["regions"]
            .as_array()
            .unwrap()
            .iter()
            .flat_map(|r| r["disks"].as_array().unwrap().iter())
            .map(|d| (d[0].as_u64().unwrap(), d[1].as_u64().unwrap()))
            .collect();
        let out = tmp.path().join(format!("r{n}.svg"));
        assert!(ford(tmp.path(), &["render", &n, "-o", out.to_str().unwrap()]).status.success());
        let doc = fs::read_to_string(&out).unwrap();
        assert_eq!(doc.matches(r#"<circle class="disk""#).count(), disks.len(), "N = {n}");
        let psi = rec["psi"].as_u64().unwrap() as usize;
        assert_eq!(doc.matches(r#"<line class="breakpoint""#).count(), psi + 1, "N = {n}");
    }
}
