use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command as Process;

use nodalgraph_cli::{run, Command, ExperimentSpec};

fn data(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(rel)
}

fn bin() -> Process {
    Process::new(env!("CARGO_BIN_EXE_nodalgraph"))
}

#[test]
fn table_b_accumulation_points() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["accumulate", data("graphs/star4.graph").to_str().unwrap(), "--N", "800", "--basis"])
        .arg(data("tables/tableB.txt"))
        .arg("--out")
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    let csv = fs::read_to_string(dir.path().join("accumulation.csv")).unwrap();
    let points: Vec<&str> = csv
        .lines()
        .skip(1)
        .filter(|l| l.starts_with("nodal,"))
        .map(|l| l.split(',').nth(1).unwrap())
        .collect();
    assert_eq!(points, vec!["0.5", "0.75", "1"]);
}

#[test]
fn table_a_accumulation_points() {
    let dir = tempfile::tempdir().unwrap();
    let mut spec = ExperimentSpec::new(Command::Accumulate, Some(data("graphs/star4.graph")), dir.path().into());
    spec.n = 800;
    spec.basis = Some(data("tables/tableA.txt"));
    run(&spec).unwrap();
    let csv = fs::read_to_string(dir.path().join("accumulation.csv")).unwrap();
    assert!(csv.contains("\nnodal,0.5,") && csv.contains("\nnodal,1,") && !csv.contains("nodal,0.75"));
}

#[test]
fn reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let status = bin()
            .args(["verify", data("graphs/lasso.graph").to_str().unwrap(), "--N", "120", "--strategy", "supportmin"])
            .arg("--out")
            .arg(dir.path())
            .env("NODALGRAPH_THREADS", if dir.path() == a.path() { "1" } else { "3" })
            .status()
            .unwrap();
        assert!(status.success());
    }
    for name in ["spectrum.csv", "nodal.csv", "verify.csv", "ratios.svg"] {
        assert_eq!(
            fs::read(a.path().join(name)).unwrap(),
            fs::read(b.path().join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn strict_verify_passes_on_three_star() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["verify", data("graphs/star3-124.graph").to_str().unwrap(), "--N", "500", "--strict"])
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("verify.csv")).unwrap();
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",true")));
    for check in ["interlacing_upper", "nu_lambda_lower", "nodal_size", "lambda1_bound", "domain_groundstate"] {
        assert!(csv.contains(check), "{check}");
    }
}

#[test]
fn failed_checks_match_verify_rows() {
    let dir = tempfile::tempdir().unwrap();
    let mut spec = ExperimentSpec::new(Command::Verify, Some(data("graphs/interval-delta.graph")), dir.path().into());
    spec.n = 60;
    let summary = run(&spec).unwrap();
    let csv = fs::read_to_string(dir.path().join("verify.csv")).unwrap();
    let fails = csv.lines().filter(|l| l.ends_with(",false")).count();
    assert_eq!(summary.failed_checks, fails);
}

#[test]
fn errors_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["solve", "no-such.graph", "--out"])
        .arg(dir.path())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
    let bad = dir.path().join("bad.graph");
    fs::write(&bad, "edge e a b length -1\n").unwrap();
    let status = bin().arg("solve").arg(&bad).arg("--out").arg(dir.path()).status().unwrap();
    assert_eq!(status.code(), Some(2));
    let status = bin()
        .args(["nodal", data("graphs/star4.graph").to_str().unwrap(), "--strategy", "table", "--out"])
        .arg(dir.path())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn plap_brackets_and_weyl() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["plap", data("graphs/star3-124.graph").to_str().unwrap(), "--p", "3", "--N", "2000", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    let dev: f64 = stdout
        .split("deviation ")
        .nth(1)
        .and_then(|s| s.split_whitespace().next())
        .unwrap()
        .parse()
        .unwrap();
    assert!(dev < 0.02);
    let csv = fs::read_to_string(dir.path().join("brackets.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2001);
    assert!(csv.starts_with("n,lower,upper,p\n1,0,"));
}

#[test]
fn gen_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let run_gen = |sub: &str, extra: &[&str]| {
        let out = dir.path().join(sub);
        let status = bin().args(["gen", "--seed", "2", "--edges", "5"]).args(extra).arg("--out").arg(&out).status().unwrap();
        assert!(status.success());
        fs::read_to_string(out.join("random-2.graph")).unwrap()
    };
    let a = run_gen("a", &[]);
    assert_eq!(a, run_gen("b", &[]));
    let g = nodalgraph::MetricGraph::parse(&a).unwrap();
    assert_eq!(g.edge_count(), 5);

    let star = run_gen("c", &["--lengths", "rational", "--multipliers", "1,2,4", "--vertices", "6"]);
    let g = nodalgraph::MetricGraph::parse(&star).unwrap();
    let lens: Vec<f64> = g.edges().iter().map(|e| e.length).collect();
    assert_eq!(lens, vec![1.0, 2.0, 4.0, 1.0, 2.0]);
}
