use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn sparsenorm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sparsenorm"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn simulate(dir: &Path, seed: u64) -> String {
    let out = sparsenorm(&[
        "simulate",
        "--world-per-year",
        "20000",
        "--categories",
        "2",
        "--seed",
        &seed.to_string(),
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    dir.join("manifest.json").display().to_string()
}

#[test]
fn empty_publications_file_fails_with_empty_table() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("pubs.csv"), "").unwrap();
    fs::write(
        dir.path().join("manifest.json"),
        r#"{"publications": "pubs.csv", "mentions": {}, "year_range": [2010, 2013]}"#,
    )
    .unwrap();
    let manifest = dir.path().join("manifest.json");
    let out = sparsenorm(&["compute", "--manifest", manifest.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("EmptyTable"));
}

#[test]
fn missing_manifest_is_an_input_error() {
    let out = sparsenorm(&["compute", "--manifest", "/nonexistent/manifest.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_source_label_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("pubs.csv"),
        "id,year,categories\na,2010,X\n",
    )
    .unwrap();
    fs::write(dir.path().join("m.csv"), "id,count\na,1\n").unwrap();
    fs::write(
        dir.path().join("manifest.json"),
        r#"{"publications": "pubs.csv", "mentions": {"facebook": "m.csv"}, "year_range": [2010, 2013]}"#,
    )
    .unwrap();
    let out = sparsenorm(&[
        "validate",
        "--manifest",
        dir.path().join("manifest.json").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("UnknownSource"));
}

#[test]
fn compute_writes_identical_reports_twice() {
    let data = tempfile::tempdir().unwrap();
    let manifest = simulate(data.path(), 5);
    let before: Vec<_> = fs::read_dir(data.path())
        .unwrap()
        .map(|e| fs::read(e.unwrap().path()).unwrap())
        .collect();
    let run = |out: &Path| {
        let o = sparsenorm(&[
            "compute",
            "--manifest",
            &manifest,
            "--source",
            "citations",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        o.stdout
    };
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let (sa, sb) = (run(a.path()), run(b.path()));
    assert_eq!(sa, sb);
    for name in ["report.csv", "report.json", "filter_log.csv"] {
        assert_eq!(
            fs::read(a.path().join(name)).unwrap(),
            fs::read(b.path().join(name)).unwrap(),
            "{name}"
        );
    }
    // inputs untouched
    let after: Vec<_> = fs::read_dir(data.path())
        .unwrap()
        .map(|e| fs::read(e.unwrap().path()).unwrap())
        .collect();
    assert_eq!(before, after);

    let csv = String::from_utf8(sa).unwrap();
    let mut lines = csv.lines();
    assert!(lines
        .next()
        .unwrap()
        .starts_with("group,source,indicator,value,ci_lower,ci_upper"));
    assert_eq!(lines.count(), 9, "three groups x three indicators");
}

#[test]
fn bootstrap_reports_bootstrap_intervals() {
    let data = tempfile::tempdir().unwrap();
    let manifest = simulate(data.path(), 2);
    let out = sparsenorm(&[
        "bootstrap",
        "--manifest",
        &manifest,
        "--source",
        "citations",
        "--group",
        "q2",
        "--indicator",
        "mhq",
        "--replicates",
        "200",
        "--seed",
        "7",
        "--format",
        "json",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["estimates"][0]["ci_kind"], "bootstrap");
    assert_eq!(json["config"]["bootstrap"]["seed"], 7);
    assert!(json["config"]["rng"].as_str().unwrap().contains("ChaCha8"));
}

#[test]
fn validate_summarizes_without_computing() {
    let data = tempfile::tempdir().unwrap();
    let manifest = simulate(data.path(), 3);
    let out = sparsenorm(&["validate", "--manifest", &manifest]);
    assert!(out.status.success());
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["categories"], 2);
    assert_eq!(json["years"].as_object().unwrap().len(), 4);
    assert_eq!(json["dataset_fingerprint"].as_str().unwrap().len(), 64);
}
