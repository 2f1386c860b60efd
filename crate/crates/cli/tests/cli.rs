//! Command-line behavior: exit codes, error wording, golden runs on the
//! bundled fixture, and the mirror-configuration symmetry check.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/synth500")
}

fn collabnet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_collabnet"))
        .args(args)
        .output()
        .expect("spawn collabnet")
}

fn fixture_args(command: &str, out: &Path) -> Vec<String> {
    let f = fixture_dir();
    [
        command.to_string(),
        "--stars".into(),
        f.join("stars.csv").display().to_string(),
        "--works".into(),
        f.join("works.csv").display().to_string(),
        "--cast".into(),
        f.join("cast.csv").display().to_string(),
        "--out".into(),
        out.display().to_string(),
    ]
    .to_vec()
}

fn run_fixture(command: &str, out: &Path, extra: &[&str]) -> Output {
    let mut args = fixture_args(command, out);
    args.extend(extra.iter().map(|s| s.to_string()));
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    collabnet(&refs)
}

#[test]
fn missing_cast_file_exits_3_and_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let f = fixture_dir();
    let out = collabnet(&[
        "index",
        "--stars",
        &f.join("stars.csv").display().to_string(),
        "--works",
        &f.join("works.csv").display().to_string(),
        "--cast",
        "/nonexistent/cast.csv",
        "--out",
        &dir.path().join("x").display().to_string(),
    ]);
    assert_eq!(out.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(
        stderr.contains("/nonexistent/cast.csv"),
        "stderr must name the missing file: {stderr}"
    );
}

#[test]
fn bad_region_list_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_fixture(
        "describe",
        &dir.path().join("x"),
        &["--regions", "Mainland,Atlantis"],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Atlantis"));

    let out = run_fixture("describe", &dir.path().join("x"), &["--regions", "Mainland"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn periods_file_conflicts_with_range_flags() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_fixture(
        "describe",
        &dir.path().join("x"),
        &["--periods", "p.json", "--from", "1990"],
    );
    assert_eq!(out.status.code(), Some(2), "clap conflict must exit 2");
}

#[test]
fn rank_deficient_term_list_exits_4_with_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let terms = dir.path().join("terms.json");
    std::fs::write(
        &terms,
        r#"[
            {"term": "edges"},
            {"term": "node_match", "attr": "region"},
            {"term": "node_match", "attr": "region"}
        ]"#,
    )
    .unwrap();
    let out = run_fixture(
        "ergm",
        &dir.path().join("x"),
        &["--terms", &terms.display().to_string()],
    );
    assert_eq!(out.status.code(), Some(4));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(
        stderr.contains("rank deficient") && stderr.contains("nodematch.region"),
        "diagnostic must name the collinear term: {stderr}"
    );
}

#[test]
fn index_golden_run_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let flags = [
        "--window",
        "1",
        "--from",
        "1990",
        "--to",
        "1994",
        "--replicates",
        "50",
        "--seed",
        "7",
    ];
    let out = run_fixture("index", &dir.path().join("a"), &flags);
    assert!(out.status.success());
    let first = std::fs::read_to_string(dir.path().join("a/index_trend.csv")).unwrap();
    assert_eq!(first.lines().count(), 6, "header plus five windows");
    assert!(first.starts_with("period,observed,expected,ratio,ci_low,ci_high\n"));

    let out = run_fixture("index", &dir.path().join("b"), &flags);
    assert!(out.status.success());
    let second = std::fs::read_to_string(dir.path().join("b/index_trend.csv")).unwrap();
    assert_eq!(first, second);

    let svg = std::fs::read_to_string(dir.path().join("a/index_trend.svg")).unwrap();
    assert!(svg.starts_with("<?xml") && svg.contains("<svg "));
    assert_eq!(svg.matches("<polyline").count(), 1, "one series, one polyline");
}

/// Hand-built dataset in which HongKong and Taiwan relate to the Mainland
/// in exactly mirrored ways, so both region pairs must give the same index.
fn write_symmetric_fixture(dir: &Path) -> (PathBuf, PathBuf, PathBuf) {
    let stars = dir.join("stars.csv");
    let works = dir.join("works.csv");
    let cast = dir.join("cast.csv");
    std::fs::write(
        &stars,
        "star_id,name,region,birth_year,first_work_year\n\
         m1,M One,Mainland,1960,\n\
         m2,M Two,Mainland,1962,\n\
         h1,H One,HongKong,1961,\n\
         h2,H Two,HongKong,1963,\n\
         t1,T One,Taiwan,1961,\n\
         t2,T Two,Taiwan,1963,\n",
    )
    .unwrap();
    let mut works_text = String::from("work_id,title,year,kind\n");
    for i in 1..=7 {
        works_text.push_str(&format!("w{i},Work {i},1995,movie\n"));
    }
    std::fs::write(&works, works_text).unwrap();
    std::fs::write(
        &cast,
        "work_id,star_id\n\
         w1,m1\nw1,h1\n\
         w2,m1\nw2,t1\n\
         w3,m2\nw3,h2\n\
         w4,m2\nw4,t2\n\
         w5,h1\nw5,h2\n\
         w6,t1\nw6,t2\n\
         w7,m1\nw7,m2\n",
    )
    .unwrap();
    (stars, works, cast)
}

#[test]
fn mirrored_region_pairs_give_identical_ratios() {
    let dir = tempfile::tempdir().unwrap();
    let (stars, works, cast) = write_symmetric_fixture(dir.path());
    let run = |regions: &str, out: &str| {
        let output = collabnet(&[
            "index",
            "--stars",
            &stars.display().to_string(),
            "--works",
            &works.display().to_string(),
            "--cast",
            &cast.display().to_string(),
            "--regions",
            regions,
            "--from",
            "1995",
            "--to",
            "1995",
            "--replicates",
            "40",
            "--seed",
            "3",
            "--out",
            &dir.path().join(out).display().to_string(),
        ]);
        assert!(
            output.status.success(),
            "{}",
            String::from_utf8_lossy(&output.stderr)
        );
        std::fs::read_to_string(dir.path().join(out).join("index_trend.csv")).unwrap()
    };
    let hk = run("Mainland,HongKong", "hk");
    let tw = run("Mainland,Taiwan", "tw");
    assert_eq!(hk, tw, "mirror configurations must agree line for line");
}

#[test]
fn describe_reports_zero_rows_for_empty_periods() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_fixture(
        "describe",
        &dir.path().join("x"),
        &["--from", "2050", "--to", "2051", "--window", "1"],
    );
    assert!(out.status.success());
    let text = std::fs::read_to_string(dir.path().join("x/summary.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(lines[1], "2050,2050,2050,0,0,0,0,0,0,0,0");
    assert_eq!(lines[2], "2051,2051,2051,0,0,0,0,0,0,0,0");
}

#[test]
fn default_model_has_the_expected_term_structure() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_fixture("ergm", &dir.path().join("x"), &[]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    let read_terms = |name: &str| -> Vec<String> {
        let path = dir.path().join("x/fits").join(name);
        let fit: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
        fit["terms"]
            .as_array()
            .unwrap()
            .iter()
            .map(|t| t.as_str().unwrap().to_string())
            .collect()
    };

    // First period: no preceding window, so no lagged terms.
    let first = read_terms("1990-1993.json");
    assert_eq!(first[0], "edges");
    assert_eq!(first.last().unwrap(), "nodematch.region");
    assert!(first.iter().any(|t| t.starts_with("nodefactor.age_group.")));
    assert!(first.iter().any(|t| t.starts_with("nodefactor.cohort.")));
    assert!(first.contains(&"nodefactor.region.HongKong".to_string()));
    assert!(!first.iter().any(|t| t.contains("prev_")));

    // Later periods add the lagged cooperation terms.
    let second = read_terms("1994-1997.json");
    assert!(second.contains(&"nodecov.prev_cooperation_count".to_string()));
    assert!(second.contains(&"nodefactor.prev_cross_region.true".to_string()));
    assert_eq!(second.last().unwrap(), "nodematch.region");
    assert!(
        !second.iter().any(|t| t.starts_with("nodefactor.region.Mainland")),
        "Mainland is the reference level and gets no dummy"
    );

    let coeffs = std::fs::read_to_string(dir.path().join("x/coefficients.csv")).unwrap();
    assert!(coeffs.starts_with("period,coefficient,se\n"));
    assert_eq!(coeffs.lines().count(), 6, "header plus five periods");
}

#[test]
fn manifest_echoes_the_resolved_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_fixture("subgroups", &dir.path().join("x"), &["--seed", "9"]);
    assert!(out.status.success());
    let manifest: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("x/manifest.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(manifest["command"], "subgroups");
    assert_eq!(manifest["seed"], 9);
    assert_eq!(manifest["config"]["fame_quantile"], 0.75);
    assert_eq!(manifest["config"]["generation_cutoff"], 1990);
    assert_eq!(manifest["config"]["schedule"].as_array().unwrap().len(), 5);
    assert!(manifest["versions"]["cli"].is_string());
    assert!(manifest["wall_time_ms"].is_u64());
}
