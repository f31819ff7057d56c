use std::path::Path;
use std::process::{Command, Output};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gbs-graph"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = run(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    stdout(&out)
}

fn lines(path: &Path) -> Vec<Vec<u16>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

#[test]
fn enumerate_lists_75_graphs_with_histogram() {
    let dir = tempfile::tempdir().unwrap();
    let json: serde_json::Value = serde_json::from_str(&ok(dir.path(), &["enumerate"])).unwrap();
    let records = json["records"].as_array().unwrap();
    assert_eq!(records.len(), 75);
    assert_eq!(json["class_histogram"]["3K2"], 16);
    assert_eq!(json["class_histogram"]["1K44"], 1);
    let codes: Vec<&str> = records.iter().map(|r| r["code"].as_str().unwrap()).collect();
    let mut sorted = codes.clone();
    sorted.sort();
    assert_eq!(codes, sorted);

    let all: serde_json::Value =
        serde_json::from_str(&ok(dir.path(), &["enumerate", "--all-candidates"])).unwrap();
    assert_eq!(all["records"].as_array().unwrap().len(), 1024);
    assert_eq!(ok(dir.path(), &["enumerate"]), ok(dir.path(), &["enumerate"]));
}

#[test]
fn classify_and_embed() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(dir.path(), &["classify", "1111111111", "0001001010"]);
    assert_eq!(out, "code,class,embeddable\n1111111111,1K44,true\n0001001010,2S3,true\n");

    let embed: serde_json::Value = serde_json::from_str(&ok(dir.path(), &["embed", "0110000000"])).unwrap();
    assert_eq!(embed["rank"], 2);
    assert_eq!(embed["class"], "2P3");

    let bad = run(dir.path(), &["embed", "1100000000"]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("singular"));
    assert_eq!(run(dir.path(), &["classify", "12"]).status.code(), Some(2));
}

#[test]
fn simulate_writes_samples_and_meta() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    ok(p, &["simulate", "1111111111", "--shots", "5000", "--seed", "7", "--out", "a.jsonl"]);
    ok(p, &["simulate", "1111111111", "--shots", "5000", "--seed", "7", "--out", "b.jsonl"]);
    let a = std::fs::read(p.join("a.jsonl")).unwrap();
    assert_eq!(a, std::fs::read(p.join("b.jsonl")).unwrap());
    let shots = lines(&p.join("a.jsonl"));
    assert_eq!(shots.len(), 5000);
    assert!(shots.iter().all(|s| s.len() == 8 && s.iter().sum::<u16>() % 2 == 0));
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(p.join("a.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["seed"], 7);
    assert_eq!(meta["shots"], 5000);

    ok(p, &["simulate", "0000000100", "--shots", "2000", "--loss", "0.55", "--threshold", "--out", "t.jsonl"]);
    assert!(lines(&p.join("t.jsonl")).iter().flatten().all(|&c| c <= 1));
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(p.join("t.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["loss"], 0.55);
    assert_eq!(meta["threshold"], true);

    let rejected = run(p, &["simulate", "1100000000", "--shots", "10"]);
    assert_eq!(rejected.status.code(), Some(2));
    assert_eq!(run(p, &["simulate", "1111111111", "--shots", "0"]).status.code(), Some(2));
    assert_eq!(run(p, &["simulate", "1111111111", "--loss", "1.5"]).status.code(), Some(2));
}

#[test]
fn ingest_reports_and_rejects() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    ok(p, &["simulate", "0000000100", "--shots", "3000", "--out", "s.jsonl"]);
    let report: serde_json::Value = serde_json::from_str(&ok(p, &["ingest", "s.jsonl"])).unwrap();
    assert_eq!(report["shots"], 3000);
    assert_eq!(report["meta"]["shots"], 3000);
    assert_eq!(report["odd_total_fraction"], 0.0);
    assert_eq!(report["loss_signature"], false);

    std::fs::write(p.join("odd.jsonl"), "[1,0,0,0,0,0,0,0]\n[0,0,0,0,0,0,0,0]\n").unwrap();
    let report: serde_json::Value = serde_json::from_str(&ok(p, &["ingest", "odd.jsonl"])).unwrap();
    assert_eq!(report["odd_total_fraction"], 0.5);
    assert_eq!(report["loss_signature"], true);

    std::fs::write(p.join("empty.jsonl"), "").unwrap();
    assert_eq!(run(p, &["ingest", "empty.jsonl"]).status.code(), Some(2));
    std::fs::write(p.join("bad.jsonl"), "[0,0,0,0,0,0,0,0]\n[1,2]\n").unwrap();
    let bad = run(p, &["ingest", "bad.jsonl"]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains(":2:"));
    assert_eq!(run(p, &["ingest", "missing.jsonl"]).status.code(), Some(3));
}

#[test]
fn fv_merges_sampled_and_analytic() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    ok(p, &["simulate", "1111111111", "--shots", "20000", "--out", "k44.jsonl"]);
    let csv = ok(p, &["fv", "--samples", "k44.jsonl", "--code", "1111111111"]);
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows[0], "code,class,provenance,loss_eta,label,value,stat_error,tail_bound");
    assert_eq!(rows.len(), 9);
    assert!(rows[1].starts_with("1111111111,1K44,sampled,1,\"event(k=2,n_max=8)\","));
    assert!(rows[5].starts_with("1111111111,1K44,analytic,1,"));

    let odd = ok(p, &["fv", "--samples", "k44.jsonl", "--events", "1,3,5"]);
    assert!(odd.lines().skip(1).all(|r| r.contains(",0,0,")));

    ok(p, &["simulate", "1111111111", "--shots", "20000", "--loss", "0.5", "--out", "lossy.jsonl"]);
    let orbits = ok(p, &["fv", "--samples", "lossy.jsonl", "--orbits", "1,1,1;1,1,1,1;2,1,1"]);
    let first: Vec<&str> = orbits.lines().nth(1).unwrap().split(',').collect();
    assert!(orbits.lines().nth(1).unwrap().contains("orbit[1,1,1]"));
    let value: f64 = first[first.len() - 3].parse().unwrap();
    assert!(value > 0.0);

    let analytic_only = ok(p, &["fv", "--code", "0000000100", "--orbits", "1,1;[]"]);
    assert!(analytic_only.contains("\"orbit[1,1]\",0.243595894,"));
    assert!(analytic_only.contains(",orbit[],0.419974341614,"));
    assert_eq!(run(p, &["fv"]).status.code(), Some(2));
    assert_eq!(run(p, &["fv", "--samples", "nope.jsonl"]).status.code(), Some(3));
}

#[test]
fn deviation_and_fig3_find_the_generating_loss() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    ok(p, &["simulate", "1111111111", "--shots", "200000", "--loss", "0.55", "--seed", "3", "--out", "s.jsonl"]);
    let json: serde_json::Value =
        serde_json::from_str(&ok(p, &["deviation", "s.jsonl", "--format", "json"])).unwrap();
    assert_eq!(json["loss_factors"].as_array().unwrap().len(), 100);
    let crossings = json["crossings"].as_array().unwrap();
    assert!(!crossings.is_empty());
    for c in crossings {
        let x = c["loss_factor"].as_f64().unwrap();
        assert!((x - 0.45).abs() < 0.03, "{c}");
    }

    ok(p, &["figure", "fig3", "--samples", "s.jsonl", "--out", "f1"]);
    ok(p, &["figure", "fig3", "--samples", "s.jsonl", "--out", "f2"]);
    for name in ["fig3.csv", "fig3_crossings.csv", "fig3.svg"] {
        assert_eq!(
            std::fs::read(p.join("f1").join(name)).unwrap(),
            std::fs::read(p.join("f2").join(name)).unwrap(),
            "{name}"
        );
    }
    let csv = std::fs::read_to_string(p.join("f1/fig3.csv")).unwrap();
    assert!(csv.starts_with("loss_factor,label,relative_deviation\n"));
    assert_eq!(csv.lines().count(), 1 + 400);
    assert!(std::fs::read_to_string(p.join("f1/fig3.svg")).unwrap().starts_with("<!-- gbs-graph"));
}

#[test]
fn fig2_and_fig4_from_a_sample_directory() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    ok(p, &["simulate", "--all", "--shots", "3000", "--loss", "0.55", "--seed", "1", "--out", "samples"]);
    assert_eq!(std::fs::read_dir(p.join("samples")).unwrap().count(), 150);

    ok(p, &["figure", "fig2", "--samples", "samples", "--out", "figs"]);
    let csv = std::fs::read_to_string(p.join("figs/fig2.csv")).unwrap();
    let rows: Vec<Vec<&str>> = csv.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 75);
    assert_eq!(rows[0][2], "1K2");
    assert_eq!(rows[74][2], "1K44");
    // analytic value constant within each class
    for w in rows.windows(2) {
        if w[0][2] == w[1][2] {
            assert_eq!(w[0][5], w[1][5], "{}", w[0][2]);
        }
    }

    let out = ok(p, &["figure", "fig4", "--samples", "samples", "--out", "figs", "--format", "csv"]);
    assert!(out.contains("analytic 2P3-2S3 orbit distance"));
    let spread = std::fs::read_to_string(p.join("figs/fig4_spread.csv")).unwrap();
    assert_eq!(spread.lines().count(), 11);
    assert!(!p.join("figs/fig4.svg").exists());
    let points = std::fs::read_to_string(p.join("figs/fig4.csv")).unwrap();
    assert!(points.starts_with("code,class,\"orbit[1,1,1]\",\"orbit[1,1,1,1]\",\"orbit[2,1,1]\"\n"));

    std::fs::remove_file(p.join("samples/1111111111.jsonl")).unwrap();
    let missing = run(p, &["figure", "fig4", "--samples", "samples"]);
    assert_eq!(missing.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("1111111111"));
}
