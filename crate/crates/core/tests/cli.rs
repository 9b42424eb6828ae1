use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use pdmlab::cli::{
    execute, RunOptions, COMPARE_HEADER, CONVERGENCE_HEADER, ORDERING_HEADER, SPECTRUM_HEADER, VERIFY_HEADER,
};
use pdmlab::hamiltonian::Mutation;
use tempfile::TempDir;

fn run(dir: &Path, config: &str, extra: &[&str]) -> Output {
    let path = dir.join("run.ini");
    fs::write(&path, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_pdmlab"))
        .arg(&path)
        .arg("--out")
        .arg(dir)
        .args(extra)
        .output()
        .unwrap()
}

fn first_line(path: &Path) -> String {
    fs::read_to_string(path).unwrap().lines().next().unwrap().to_string()
}

const VERIFY: &str = "[experiment]\nkind = verify\n";

const SPECTRUM: &str = "\
[experiment]
kind = spectrum-chain   # lowest states of the chain
[profiles]
J = -(1+0.2*cos(2*pi*x/L))
eps = 0.1*x
[geometry]
N = 60
L = 1
[solver]
k = 4
";

#[test]
fn verify_passes_with_exit_zero() {
    let dir = TempDir::new().unwrap();
    let out = run(dir.path(), VERIFY, &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(first_line(&dir.path().join("verify.csv")), VERIFY_HEADER.join(","));
    let report = fs::read_to_string(dir.path().join("verify-report.txt")).unwrap();
    assert!(report.contains("recurrence-vs-hermitian"));
}

#[test]
fn midpoint_verify_names_the_failing_check() {
    let dir = TempDir::new().unwrap();
    let out = run(dir.path(), "[experiment]\nkind = verify\n[geometry]\nconvention = midpoint\n", &["--quiet"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("recurrence-vs-hermitian"), "{err}");
    assert!(out.stdout.is_empty());
}

#[test]
fn mutated_builds_fail_verification() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("v.ini");
    fs::write(&path, VERIFY).unwrap();
    for m in [Mutation::DropFirstOrderShift, Mutation::DropOrderingCrossTerm] {
        let opts = RunOptions { seed: 0, mutation: Some(m) };
        let (report, _) = execute(&path, dir.path(), &opts).unwrap();
        assert!(!report.passed(), "{m:?} went unnoticed");
    }
}

#[test]
fn configuration_errors_exit_two() {
    let dir = TempDir::new().unwrap();
    let out = run(dir.path(), "[experiment]\nkind = verify\nflavour = strange\n", &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("flavour"));

    let missing = Command::new(env!("CARGO_BIN_EXE_pdmlab"))
        .arg(dir.path().join("absent.ini"))
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(2));

    let bad_kind = run(dir.path(), "[experiment]\nkind = teleport\n", &[]);
    assert_eq!(bad_kind.status.code(), Some(2));
}

#[test]
fn sign_changing_hopping_exits_three() {
    let dir = TempDir::new().unwrap();
    let cfg = "[experiment]\nkind = spectrum-chain\n[profiles]\nJ = x - 1/2\n[geometry]\nN = 20\nL = 1\n";
    let out = run(dir.path(), cfg, &[]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
}

#[test]
fn csv_is_byte_identical_across_runs() {
    let (d1, d2) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    for d in [&d1, &d2] {
        let out = run(d.path(), SPECTRUM, &["--seed", "7", "--quiet"]);
        assert_eq!(out.status.code(), Some(0));
    }
    let a = fs::read(d1.path().join("spectrum-chain.csv")).unwrap();
    let b = fs::read(d2.path().join("spectrum-chain.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn csv_headers_per_kind() {
    let dir = TempDir::new().unwrap();
    let p = dir.path();
    let geometry = "[profiles]\nJ = -(1+0.2*cos(2*pi*x/L))\n[geometry]\nL = 1\n";
    let cases: [(&str, String, &[&str]); 5] = [
        ("spectrum-chain", format!("[experiment]\nkind = spectrum-chain\n{geometry}N = 30\n"), &SPECTRUM_HEADER),
        ("spectrum-effective", format!("[experiment]\nkind = spectrum-effective\n{geometry}N = 30\n"), &SPECTRUM_HEADER),
        ("compare", format!("[experiment]\nkind = compare\n{geometry}N = 30\n"), &COMPARE_HEADER),
        ("convergence", format!("[experiment]\nkind = convergence\n{geometry}N = 20, 40, 80\n"), &CONVERGENCE_HEADER),
        (
            "ordering-sweep",
            format!("[experiment]\nkind = ordering-sweep\n{geometry}N = 30\n[ordering]\nalpha = 0, 1\ngamma = 1/2\n"),
            &ORDERING_HEADER,
        ),
    ];
    for (kind, cfg, header) in cases {
        let out = run(p, &cfg, &["--quiet"]);
        assert!(out.status.code() == Some(0) || out.status.code() == Some(1), "{kind}: {:?}", out.status);
        assert_eq!(first_line(&p.join(format!("{kind}.csv"))), header.join(","), "{kind}");
    }
}

#[test]
fn report_echoes_resolved_config() {
    let dir = TempDir::new().unwrap();
    let out = run(dir.path(), SPECTRUM, &["--seed", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    let report = fs::read_to_string(dir.path().join("spectrum-chain-report.txt")).unwrap();
    for needle in ["kind = spectrum-chain", "seed = 3", "k = 4", "N = 60"] {
        assert!(report.contains(needle), "{needle} missing from\n{report}");
    }
    assert!(stdout.contains("seed = 3"));
}

#[test]
fn output_paths_follow_config() {
    let dir = TempDir::new().unwrap();
    let cfg = format!("{VERIFY}[output]\ncsv = sub/table.csv\nreport = sub/notes.txt\n");
    let out = run(dir.path(), &cfg, &["--quiet"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(dir.path().join("sub/table.csv").is_file());
    assert!(dir.path().join("sub/notes.txt").is_file());
}
