use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_plasmonwire")).args(args).output().expect("binary runs")
}

fn run_with_workers(args: &[&str], workers: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_plasmonwire"))
        .env("PLASMONWIRE_WORKERS", workers)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// (preamble, header, rows)
fn parse(csv: &str) -> (Vec<String>, Vec<String>, Vec<Vec<String>>) {
    let (pre, body): (Vec<&str>, Vec<&str>) = csv.lines().partition(|l| l.starts_with('#'));
    let split = |l: &str| l.split(',').map(str::to_string).collect::<Vec<_>>();
    (pre.iter().map(|s| s.to_string()).collect(), split(body[0]), body[1..].iter().map(|l| split(l)).collect())
}

#[test]
fn modes_table_has_cutoffs() {
    let o = run(&["modes", "--eps-re", "-75", "--r-min", "0.005", "--r-max", "0.5", "--orders", "0,1,2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (pre, header, rows) = parse(&stdout(&o));
    assert!(pre.iter().any(|l| l == "# command=modes"));
    assert!(pre.iter().any(|l| l.starts_with("# eps_re=-7.5")));
    assert_eq!(header, ["R", "kz_over_k0_n0", "kz_over_k0_n1", "kz_over_k0_n2"]);
    assert!(rows.iter().all(|r| !r[1].is_empty()));
    // the first (smallest) radius is below both cutoffs, the largest above the n = 1 cutoff
    assert!(rows[0][2].is_empty() && rows[0][3].is_empty());
    assert!(!rows.last().unwrap()[2].is_empty());
    for c in [2, 3] {
        let first_guided = rows.iter().position(|r| !r[c].is_empty());
        if let Some(i) = first_guided {
            assert!(rows[i..].iter().all(|r| !r[c].is_empty()), "column {c} is not empty only below a cutoff");
        }
    }
    // 12 significant digits
    assert_eq!(rows[0][0], "5.00000000000e-3");
}

#[test]
fn output_is_deterministic_across_worker_counts() {
    let args = ["cross", "--R", "0.01", "--rA", "0.015", "--d-min", "0.5", "--d-max", "1.5", "--d-step", "0.25", "--rel-tol", "1e-4"];
    let a = run_with_workers(&args, "1");
    let b = run_with_workers(&args, "3");
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
    let (pre, _, rows) = parse(&stdout(&a));
    assert!(pre.iter().any(|l| l == "# rel_tol=1.00000000000e-4"));
    for r in rows {
        let ratio: f64 = r[3].parse().unwrap();
        assert!(ratio.abs() <= 1.0 + 1e-6, "{ratio}");
    }
}

#[test]
fn out_file_matches_stdout() {
    let path = std::env::temp_dir().join(format!("plasmonwire-cli-{}.csv", std::process::id()));
    let args = ["gate", "scaling", "--ratios", "0.01,0.1"];
    let o = run(&[&args[..], &["--out", path.to_str().unwrap()]].concat());
    assert!(o.status.success() && o.stdout.is_empty());
    let written = std::fs::read(&path).unwrap();
    std::fs::remove_file(&path).unwrap();
    assert_eq!(written, run(&args).stdout);
}

#[test]
fn selftest_passes() {
    let o = run(&["selftest"]);
    assert!(o.status.success(), "{}", stdout(&o));
    let (_, header, rows) = parse(&stdout(&o));
    assert_eq!(header, ["module", "check", "passed", "detail"]);
    assert!(rows.len() >= 10);
}

#[test]
fn config_errors_exit_2_on_one_line() {
    for args in [
        &["cross", "--rA", "0.0105"][..],
        &["modes", "--no-such-flag"],
        &["modes", "--r-min", "0.5", "--r-max", "0.1"],
        &["gate", "scaling", "--ratios", "1.5"],
        &["optimum", "--objective", "cross-contrast"],
        &["decay", "grid", "--rel-tol", "0"],
    ] {
        let o = run(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        let err = String::from_utf8(o.stderr).unwrap();
        assert_eq!(err.lines().count(), 1, "{err}");
        assert!(err.starts_with("error kind=config exit=2: "), "{err}");
        assert!(o.stdout.is_empty());
    }
}

#[test]
fn worker_variable_is_validated() {
    let o = run_with_workers(&["selftest"], "zero");
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn convergence_failures_exit_3() {
    let o = run(&["decay", "grid", "--n-max", "1", "--points", "1", "--ra-min", "0.011", "--ra-max", "0.011"]);
    assert_eq!(o.status.code(), Some(3));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.starts_with("error kind=convergence exit=3: ") && err.lines().count() == 1, "{err}");
}
