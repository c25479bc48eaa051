use std::fs;
use std::path::{Path, PathBuf};

use lpsens_cli::{nondiff_path, run, CertificateFile};

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn cli(args: &[&str]) -> Run {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(std::iter::once("lpsens").chain(args.iter().copied()), &mut out, &mut err);
    Run {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn sensitize(dir: &Path, target: &str, measure: &str, p: &str, eps: &str, m: &str) -> (Run, PathBuf) {
    let out = dir.join("c.json");
    let r = cli(&[
        "sensitize", "--target", target, "--measure", measure, "--p", p, "--eps", eps, "--M", m, "--out",
        path_str(&out),
    ]);
    (r, out)
}

fn zero_certificate(dir: &Path) -> PathBuf {
    let (r, path) = sensitize(dir, "0", "uniform(0,1)", "1", "1", "0");
    assert_eq!(r.code, 0, "{}", r.stderr);
    path
}

fn value_of(line: &str, key: &str) -> f64 {
    line.split_whitespace()
        .find_map(|kv| kv.strip_prefix(&format!("{key}=")))
        .unwrap()
        .parse()
        .unwrap()
}

#[test]
fn zero_target_summary() {
    let dir = tempfile::tempdir().unwrap();
    let (r, path) = sensitize(dir.path(), "0", "uniform(0,1)", "1", "1", "0");
    assert_eq!(r.code, 0);
    assert_eq!(r.stdout.trim(), "b=2 error_bound=0.5 min_abs_slope=1/1");
    let c = CertificateFile::from_json(&fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(c.schema_version, "1");
    assert_eq!(c.scale, "1/2");
    assert!(c.phi0.is_empty());
}

#[test]
fn square_under_normal_summary() {
    let dir = tempfile::tempdir().unwrap();
    let (r, path) = sensitize(dir.path(), "x^2", "normal(0,1)", "2", "0.1", "10");
    assert_eq!(r.code, 0, "{}", r.stderr);
    let c = CertificateFile::from_json(&fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(c.b, 220);
    assert_eq!(c.min_abs_slope, "11/1");
    assert!(c.error_bound < 0.1);
}

#[test]
fn exponent_below_one_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    for p in ["0.5", "inf"] {
        let (r, path) = sensitize(dir.path(), "x", "uniform(0,1)", p, "0.1", "1");
        assert_eq!(r.code, 2);
        assert!(r.stderr.contains("p must satisfy 1 ≤ p < ∞"), "{}", r.stderr);
        assert!(!path.exists());
    }
}

#[test]
fn malformed_inputs_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(sensitize(dir.path(), "x +", "uniform(0,1)", "1", "0.1", "1").0.code, 2);
    assert_eq!(sensitize(dir.path(), "x", "uniform(1,0)", "1", "0.1", "1").0.code, 2);
    assert_eq!(sensitize(dir.path(), "x", "uniform(0,1)", "1", "0", "1").0.code, 2);
    assert_eq!(sensitize(dir.path(), "x", "uniform(0,1)", "1", "0.1", "-1").0.code, 2);
    assert_eq!(cli(&["sensitize", "--target", "x"]).code, 2);
    assert_eq!(cli(&["frobnicate"]).code, 2);
}

#[test]
fn infinite_moment_exits_four() {
    let dir = tempfile::tempdir().unwrap();
    let (r, _) = sensitize(dir.path(), "exp(x^2)", "normal(0,1)", "2", "0.1", "1");
    assert_eq!(r.code, 4, "{}", r.stderr);
}

#[test]
fn refinement_cap_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.json");
    let r = cli(&[
        "sensitize", "--target", "x", "--measure", "uniform(0,1)", "--p", "1", "--eps", "0.01", "--M", "0",
        "--max-cells", "16", "--out", path_str(&out),
    ]);
    assert_eq!(r.code, 3, "{}", r.stderr);
    assert!(r.stderr.contains("refinement cap"));
}

#[test]
fn help_and_version_exit_zero() {
    let r = cli(&["--help"]);
    assert_eq!(r.code, 0);
    assert!(r.stdout.contains("sensitize"));
    assert_eq!(cli(&["--version"]).code, 0);
}

#[test]
fn verify_zero_target_passes() {
    let dir = tempfile::tempdir().unwrap();
    let cert = zero_certificate(dir.path());
    let r = cli(&["verify", "--cert", path_str(&cert), "--samples", "1000000", "--seed", "42"]);
    assert_eq!(r.code, 0, "{}", r.stdout);
    assert_eq!(r.stdout.lines().last(), Some("PASS"));
    // ||phi1 / 2||_1 = 1/4 under uniform(0,1)
    let mc = r.stdout.lines().find(|l| l.contains("monte carlo")).unwrap();
    assert!(mc.contains("0.24") || mc.contains("0.25"), "{mc}");
}

#[test]
fn verify_fails_when_m_is_raised() {
    let dir = tempfile::tempdir().unwrap();
    let cert = zero_certificate(dir.path());
    let text = fs::read_to_string(&cert).unwrap().replace("\"M\": \"0\"", "\"M\": \"5\"");
    fs::write(&cert, text).unwrap();
    let r = cli(&["verify", "--cert", path_str(&cert), "--samples", "10000"]);
    assert_eq!(r.code, 1);
    assert_eq!(r.stdout.lines().last(), Some("FAIL"));
}

#[test]
fn verify_fails_when_slope_is_misstated() {
    let dir = tempfile::tempdir().unwrap();
    let cert = zero_certificate(dir.path());
    let text = fs::read_to_string(&cert)
        .unwrap()
        .replace("\"min_abs_slope\": \"1/1\"", "\"min_abs_slope\": \"2/1\"");
    fs::write(&cert, text).unwrap();
    assert_eq!(cli(&["verify", "--cert", path_str(&cert), "--samples", "10000"]).code, 1);
}

#[test]
fn verify_rejects_missing_and_corrupt_certificates() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.json");
    assert_eq!(cli(&["verify", "--cert", path_str(&missing)]).code, 2);
    let corrupt = dir.path().join("corrupt.json");
    fs::write(&corrupt, "{ not json").unwrap();
    assert_eq!(cli(&["verify", "--cert", path_str(&corrupt)]).code, 2);
    let cert = zero_certificate(dir.path());
    let bad_version = fs::read_to_string(&cert).unwrap().replace("\"schema_version\": \"1\"", "\"schema_version\": \"9\"");
    fs::write(&corrupt, bad_version).unwrap();
    assert_eq!(cli(&["verify", "--cert", path_str(&corrupt)]).code, 2);
    assert_eq!(cli(&["verify", "--cert", path_str(&cert), "--samples", "10"]).code, 2);
}

#[test]
fn verify_passes_across_seeds() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("x", "uniform(0,1)", "1", "0.1", "10"),
        ("x^2", "normal(0,1)", "2", "0.5", "0"),
        ("if(x<0.5, if(x>0, 1, 0), 0)", "mix(0.5*atom(0), 0.5*uniform(0,1))", "2", "0.1", "0"),
    ];
    for (target, measure, p, eps, m) in cases {
        let (r, cert) = sensitize(dir.path(), target, measure, p, eps, m);
        assert_eq!(r.code, 0, "{}", r.stderr);
        for seed in 1..=5 {
            let seed = seed.to_string();
            let v = cli(&["verify", "--cert", path_str(&cert), "--samples", "200000", "--seed", &seed]);
            assert_eq!(v.code, 0, "{target} seed {seed}: {}", v.stdout);
        }
    }
}

#[test]
fn certificate_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let (r, path) = sensitize(dir.path(), "x + 1", "mix(0.5*atom(0), 0.5*uniform(0,1))", "1.5", "0.2", "3");
    assert_eq!(r.code, 0, "{}", r.stderr);
    let text = fs::read_to_string(path).unwrap();
    let file = CertificateFile::from_json(&text).unwrap();
    assert_eq!(file.to_json(), text);
    let cert = file.to_certificate().unwrap();
    assert_eq!(CertificateFile::from_certificate(&cert), file);
    assert_eq!(cert.approximant().unwrap().min_abs_slope(), cert.min_abs_slope);
}

#[test]
fn norm_examples() {
    let r = cli(&["norm", "--target", "1", "--measure", "normal(0,1)", "--p", "4"]);
    assert_eq!(r.code, 0);
    assert!((value_of(&r.stdout, "value") - 1.0).abs() < 1e-12);

    let r = cli(&["norm", "--f", "x", "--measure", "uniform(0,1)", "--p", "1"]);
    assert_eq!(r.code, 0);
    assert!((value_of(&r.stdout, "value") - 0.5).abs() <= 1e-6);

    // either a value near 1 or a domain refusal
    let r = cli(&["norm", "--target", "log(x)", "--measure", "uniform(0,1)", "--p", "1"]);
    match r.code {
        0 => {
            let v = value_of(&r.stdout, "value");
            assert!((v - 1.0).abs() <= value_of(&r.stdout, "absolute_error_bound") + 1e-6, "{v}");
        }
        code => assert_eq!(code, 4, "{}", r.stderr),
    }
}

#[test]
fn norm_monte_carlo_and_errors() {
    let r = cli(&[
        "norm", "--target", "x", "--measure", "uniform(0,1)", "--p", "1", "--method", "monte-carlo", "--seed", "42",
    ]);
    assert_eq!(r.code, 0);
    assert!(r.stdout.contains("method=monte-carlo"));
    assert!((value_of(&r.stdout, "value") - 0.5).abs() <= value_of(&r.stdout, "absolute_error_bound"));
    assert_eq!(cli(&["norm", "--target", "x", "--measure", "uniform(0,1)", "--p", "0.5"]).code, 2);
    assert_eq!(cli(&["norm", "--target", "x", "--measure", "uniform(0,1)", "--p", "inf"]).code, 2);
    assert_eq!(cli(&["norm", "--target", "sqrt(x)", "--measure", "normal(0,1)", "--p", "1"]).code, 4);
}

#[test]
fn plot_zero_target() {
    let dir = tempfile::tempdir().unwrap();
    let cert = zero_certificate(dir.path());
    let csv = dir.path().join("plot.csv");
    let r = cli(&["plot", "--cert", path_str(&cert), "--window", "0:1", "--points", "5", "--out", path_str(&csv)]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let text = fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,target,approximant"));
    let approx: Vec<f64> = lines.map(|l| l.split(',').nth(2).unwrap().parse().unwrap()).collect();
    assert_eq!(approx, [0.0, 0.25, 0.5, 0.25, 0.0]);
    assert_eq!(fs::read_to_string(nondiff_path(&csv)).unwrap(), "0.5\n");
}

#[test]
fn plot_validation() {
    let dir = tempfile::tempdir().unwrap();
    let cert = zero_certificate(dir.path());
    let csv = dir.path().join("plot.csv");
    let c = path_str(&cert);
    let o = path_str(&csv);
    assert_eq!(cli(&["plot", "--cert", c, "--window", "0:1", "--points", "1", "--out", o]).code, 2);
    assert_eq!(cli(&["plot", "--cert", c, "--window", "1:0", "--points", "5", "--out", o]).code, 2);
    assert_eq!(cli(&["plot", "--cert", c, "--window", "0-1", "--points", "5", "--out", o]).code, 2);
    assert!(!csv.exists());
}

#[test]
fn plot_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (r, cert) = sensitize(dir.path(), "x^2", "normal(0,1)", "2", "0.5", "2");
    assert_eq!(r.code, 0);
    let mut outputs = Vec::new();
    for name in ["a.csv", "b.csv"] {
        let csv = dir.path().join(name);
        let r = cli(&[
            "plot", "--cert", path_str(&cert), "--window", "-3:3", "--points", "401", "--out", path_str(&csv),
        ]);
        assert_eq!(r.code, 0);
        outputs.push((fs::read(&csv).unwrap(), fs::read(nondiff_path(&csv)).unwrap()));
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[0].0.iter().filter(|c| **c == b'\n').count(), 402);
}
