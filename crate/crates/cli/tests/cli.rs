use std::path::Path;
use std::process::{Command, Output};

fn quadk(cache: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quadk"))
        .args(args)
        .env("QUADK_CACHE_DIR", cache)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn tables_p3() {
    let dir = tempfile::tempdir().unwrap();
    let o = quadk(dir.path(), &["tables", "--p", "3"]);
    assert!(o.status.success());
    let s = stdout(&o);
    for v in ["25/12", "11/4", "9/4", "19/12", "10/9"] {
        assert!(s.contains(v), "missing {v}");
    }
}

#[test]
fn alpha_moments() {
    let dir = tempfile::tempdir().unwrap();
    let o = quadk(
        dir.path(),
        &["alpha", "--p", "3", "--u", "1", "--check-moments", "--format", "json"],
    );
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["passed"], true);
    let s1 = v["result"]["moments"]["sum_pr_alpha"].as_f64().unwrap();
    assert!((s1 - 4.0 / 3.0).abs() < 1e-10);
}

#[test]
fn bijection_small() {
    let dir = tempfile::tempdir().unwrap();
    let o = quadk(dir.path(), &["bijection-check", "--max-abs-d", "3000"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("0 mismatches"));
    assert!(dir.path().join("cubics/cubic_fields.csv").exists());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(quadk(dir.path(), &["cubics", "--x", "10"]).status.code(), Some(2));
    assert_eq!(
        quadk(dir.path(), &["brauer", "--p", "3", "--n", "1", "--d", "-3"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(quadk(dir.path(), &["cokernel", "--m", "5"]).status.code(), Some(2));
    assert_eq!(quadk(dir.path(), &["tables", "--threads", "0"]).status.code(), Some(2));
    assert_eq!(
        quadk(dir.path(), &["cokernel", "--m", "6", "--u", "0", "--exhaustive"])
            .status
            .code(),
        Some(5)
    );
    // A failing check: far too tight a tolerance.
    let o = quadk(dir.path(), &["alpha", "--check-moments", "--r-max", "2"]);
    assert_eq!(o.status.code(), Some(4));

    assert!(quadk(dir.path(), &["cubics", "--x", "500"]).status.success());
    let cache = dir.path().join("cubics/cubic_fields.csv");
    let text = std::fs::read_to_string(&cache).unwrap();
    std::fs::write(&cache, text.replacen("complex", "totally real", 1)).unwrap();
    assert_eq!(quadk(dir.path(), &["cubics", "--x", "500"]).status.code(), Some(3));
}

#[test]
fn reports_ignore_threads() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "cokernel",
        "--p",
        "3",
        "--u",
        "1",
        "--m",
        "20",
        "--samples",
        "20000",
        "--seed",
        "7",
        "--format",
        "json",
    ];
    let one = quadk(dir.path(), &[&args[..], &["--threads", "1"]].concat());
    let four = quadk(dir.path(), &[&args[..], &["--threads", "4"]].concat());
    assert!(one.status.success() && four.status.success());
    assert_eq!(one.stdout, four.stdout);
    let reports: Vec<_> = walk(&dir.path().join("reports/cokernel"));
    assert_eq!(reports.len(), 1, "same config and content give one file");
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&reports[0]).unwrap()).unwrap();
    assert_eq!(v["config"]["seed"], 7);
    assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
}

fn walk(dir: &Path) -> Vec<std::path::PathBuf> {
    let mut out = Vec::new();
    for e in std::fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.is_dir() {
            out.extend(walk(&p));
        } else {
            out.push(p);
        }
    }
    out
}

#[test]
fn formula_commands() {
    let dir = tempfile::tempdir().unwrap();
    let o = quadk(dir.path(), &["kappa", "--n", "31", "--p", "37", "--format", "csv"]);
    assert!(stdout(&o).lines().nth(1).unwrap().starts_with("31,37,1,"));
    let o = quadk(
        dir.path(),
        &["uvalue", "--p", "3", "--n", "2", "--d", "13", "--format", "csv"],
    );
    assert_eq!(stdout(&o).lines().nth(1).unwrap(), "3,2,13,2");
    let o = quadk(
        dir.path(),
        &["odd-k", "--p", "5", "--i", "3", "--d", "8", "--format", "csv"],
    );
    assert!(stdout(&o).ends_with(",0\n"));
    let o = quadk(dir.path(), &["classgroup", "--max-abs-d", "100", "--format", "csv"]);
    assert!(stdout(&o).contains("-23,-,1 mod 3,3,1,1"));
    let o = quadk(
        dir.path(),
        &[
            "quads", "--x", "1000", "--sign", "-", "--coset", "1", "--list", "--format", "csv",
        ],
    );
    assert!(stdout(&o).contains("\n-8,"));
}
