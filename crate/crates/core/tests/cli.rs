use std::path::Path;
use std::process::{Command, Output};

fn es_lab(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_es-lab"))
        .args(args)
        .current_dir(cwd)
        .env_remove("ES_LAB_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn sweep_smoke_writes_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let o = es_lab(
        &["sweep", "--kind", "H4", "--dim", "4", "--cond", "10", "--lambdas", "10", "--iters", "2", "--out", "run.csv"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("run.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0], "kind,n,c,lambda,mode,ell_or_mu,translation_scale,iters,seed,e0,e1,e2,commutator_frob,alpha,status");
    assert!(lines[1].starts_with("H4,4,10,10,best,1,1,2,"));
    assert!(lines[1].ends_with(",ok"));
    let out = stdout(&o);
    assert!(out.contains("1 rows"), "{out}");
    assert!(out.contains("wall time"), "{out}");
}

#[test]
fn same_arguments_give_identical_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("grid.conf"), "kinds = H3, H5\ndims = 4\nlambdas = 5, 20\niters = 500\n").unwrap();
    let run = |out: &str, workers: &str| {
        let o = es_lab(&["sweep", "--config", "grid.conf", "--seed", "11", "--workers", workers, "--out", out], dir.path());
        assert!(o.status.success(), "{}", stderr(&o));
        std::fs::read(dir.path().join(out)).unwrap()
    };
    let a = run("a.csv", "1");
    assert_eq!(a, run("b.csv", "1"));
    assert_eq!(a, run("c.csv", "2"));
    assert_eq!(String::from_utf8(a).unwrap().lines().count(), 5);
}

#[test]
fn env_seed_is_a_fallback() {
    let dir = tempfile::tempdir().unwrap();
    let run = |extra: &[&str], env: Option<&str>| {
        let mut args = vec!["sweep", "--kind", "H1", "--dim", "2", "--lambdas", "5", "--iters", "2", "--out", "s.csv"];
        args.extend_from_slice(extra);
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_es-lab"));
        cmd.args(&args).current_dir(dir.path()).env_remove("ES_LAB_SEED");
        if let Some(e) = env {
            cmd.env("ES_LAB_SEED", e);
        }
        assert!(cmd.output().unwrap().status.success());
        let csv = std::fs::read_to_string(dir.path().join("s.csv")).unwrap();
        csv.lines().nth(1).unwrap().split(',').nth(8).unwrap().to_string()
    };
    let default = run(&[], None);
    let from_env = run(&[], Some("123"));
    assert_ne!(default, from_env);
    assert_eq!(run(&["--seed", "123"], None), from_env);
    assert_ne!(run(&["--seed", "5"], Some("123")), from_env);
}

#[test]
fn density_writes_two_histograms() {
    let dir = tempfile::tempdir().unwrap();
    let o = es_lab(
        &["density", "--kind", "H1", "--dim", "16", "--cond", "10", "--lambda", "100", "--samples", "100000", "--competitions", "2000", "--out", "d.csv"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    for name in ["d_psi.csv", "d_omega.csv"] {
        let csv = std::fs::read_to_string(dir.path().join(name)).unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("bin_lo,bin_hi,empirical_mass,analytic_mass"));
        let rows: Vec<Vec<f64>> = lines
            .map(|l| l.split(',').map(|f| f.parse::<f64>().unwrap()).collect())
            .collect();
        assert_eq!(rows.len(), 80);
        let total: f64 = rows.iter().map(|r| r[2]).sum();
        let analytic: f64 = rows.iter().map(|r| r[3]).sum();
        assert!((total - 1.0).abs() < 1e-6 && (analytic - 1.0).abs() < 1e-6);
        assert_eq!(rows.last().unwrap()[1], f64::INFINITY);
    }
}

#[test]
fn order_stat_writes_one_histogram() {
    let dir = tempfile::tempdir().unwrap();
    let o = es_lab(
        &["order-stat", "--kind", "H4", "--dim", "4", "--lambda", "50", "--ell", "3", "--samples", "1000", "--competitions", "500", "--bins", "10"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("order-stat.csv")).unwrap();
    assert_eq!(csv.lines().count(), 11);
    assert!(stdout(&o).contains("ell=3 of lambda=50"));
}

#[test]
fn perturb_ref_rows() {
    let dir = tempfile::tempdir().unwrap();
    let o = es_lab(&["perturb-ref", "--dim", "4", "--cond", "4,16", "--trials", "50", "--out", "p.csv"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("p.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("kind,n,c,epsilon,trials,e1_mean,e1_std,e2_mean,e2_std,status"));
    assert_eq!(csv.lines().count(), 11);
}

#[test]
fn hessian_info_reports_structure() {
    let dir = tempfile::tempdir().unwrap();
    let o = es_lab(&["hessian-info", "--kind", "H5", "--dim", "8", "--cond", "16"], dir.path());
    assert!(o.status.success());
    let out = stdout(&o);
    let spectrum: Vec<f64> = out
        .lines()
        .find_map(|l| l.strip_prefix("spectrum: "))
        .unwrap()
        .split_whitespace()
        .map(|v| v.parse().unwrap())
        .collect();
    let expected: Vec<f64> = (0..8).map(|i| 16f64.powf(i as f64 / 7.0)).collect();
    for (a, b) in spectrum.iter().zip(&expected) {
        assert!((a - b).abs() < 1e-8, "{a} vs {b}");
    }
    assert!(out.contains("condition number: 16.0000000"));
    assert!(out.contains("constant diagonal: yes"));

    let o = es_lab(&["hessian-info", "--kind", "H4", "--dim", "4", "--cond", "16"], dir.path());
    assert!(stdout(&o).contains("constant diagonal: no"));
}

#[test]
fn invalid_input_exits_nonzero_with_one_line() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["sweep", "--ell", "5", "--lambda", "3"][..],
        &["sweep", "--unknown"],
        &["launch"],
        &["sweep", "--iters", "many"],
        &["sweep", "--config", "missing.conf"],
    ] {
        let o = es_lab(args, dir.path());
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert_eq!(stderr(&o).trim_end().lines().count(), 1, "{args:?}: {}", stderr(&o));
    }
    // A runtime failure: the output path is a directory.
    std::fs::create_dir(dir.path().join("taken.csv")).unwrap();
    let o = es_lab(&["perturb-ref", "--dim", "4", "--trials", "2", "--out", "taken.csv"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("taken.csv"));
    assert!(!dir.path().join("sweep.csv").exists());
}

#[test]
fn help_exits_zero_and_lists_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let o = es_lab(&["--help"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    for flag in [
        "--kind", "--dim", "--cond", "--lambda ", "--lambdas", "--iters", "--samples", "--seed", "--mode", "--ell", "--mu",
        "--translation", "--workers", "--out", "--config",
    ] {
        // A flag's entry runs until the next flag line.
        let start = out.find(&format!("  {flag}")).unwrap_or_else(|| panic!("{flag}"));
        let rest = &out[start + 2..];
        let entry = &rest[..rest[2..].find("\n  -").map_or(rest.len(), |i| i + 2)];
        assert!(entry.contains("[default:"), "{entry}");
    }
    assert!(out.contains("ES_LAB_SEED"));
}
