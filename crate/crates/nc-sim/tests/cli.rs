//! Binary-level tests: flag handling, config diagnostics, exit codes and the
//! CSV contract, all through the real executable.

use std::path::PathBuf;
use std::process::{Command, Output};
use std::sync::atomic::{AtomicU64, Ordering};

static COUNTER: AtomicU64 = AtomicU64::new(0);

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_nc-sim"));
    // Tests control the variable explicitly where it matters.
    cmd.env_remove("NC_SIM_WORKERS");
    cmd
}

/// Writes a throwaway config file and returns its path.
fn config_file(content: &str) -> PathBuf {
    let n = COUNTER.fetch_add(1, Ordering::Relaxed);
    let path = std::env::temp_dir().join(format!(
        "nc-sim-cli-{}-{n}.conf",
        std::process::id()
    ));
    std::fs::write(&path, content).expect("write config");
    path
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("utf-8 stderr")
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("process not signalled")
}

const SMALL_SIM: &str = "protocol = rcnc\nrate = 2\nscheme = fixed\nkappa = 0.5\nsnr_db = 10\nframes = 2000\nseed = 1\n";

#[test]
fn paf_prints_closed_forms() {
    let out = bin().args(["paf", "--rate", "2"]).output().unwrap();
    assert_eq!(exit_code(&out), 0);
    assert_eq!(
        stdout(&out),
        "R,kappa_rcnc,kappa_rgnc\n2,0.5,0.6666666666666666\n"
    );
}

#[test]
fn paf_with_gains_appends_instantaneous_factors() {
    let out = bin()
        .args(["paf", "--rate", "2", "--gains", "1,1,2,1"])
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("R,kappa_rcnc,kappa_rgnc"));
    assert_eq!(lines.next(), Some("2,0.5,0.6666666666666666"));
    assert_eq!(lines.next(), Some("kappa1,kappa2,tau1,tau2"));
    let values: Vec<f64> = lines
        .next()
        .expect("factor row")
        .split(',')
        .map(|v| v.parse().unwrap())
        .collect();
    // |g1|=|g2|=1, |h1|=2, |h2|=1: kappa = 4/7 split evenly, tau = 3/7
    // split 2:1 toward the stronger relay link.
    let want = [2.0 / 7.0, 2.0 / 7.0, 2.0 / 7.0, 1.0 / 7.0];
    for (got, want) in values.iter().zip(want) {
        assert!((got - want).abs() < 1e-12, "{values:?}");
    }
}

#[test]
fn paf_rejects_unsupported_rate() {
    let out = bin().args(["paf", "--rate", "5"]).output().unwrap();
    assert_eq!(exit_code(&out), 2);
    assert!(stderr(&out).contains("unsupported modulation rate"));
}

#[test]
fn paf_rejects_malformed_gains() {
    let out = bin()
        .args(["paf", "--rate", "2", "--gains", "1,2,3"])
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn missing_config_file_exits_with_config_error() {
    let out = bin()
        .args(["simulate", "--config", "/nonexistent/nc-sim.conf"])
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 2);
    assert!(stderr(&out).contains("cannot read"));
}

#[test]
fn malformed_config_line_is_located() {
    let path = config_file("protocol = rcnc\nrate 2\n");
    let out = bin()
        .args(["simulate", "--config"])
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 2);
    assert!(stderr(&out).contains("line 2"), "stderr: {}", stderr(&out));
}

#[test]
fn duplicate_key_is_rejected_with_both_lines() {
    let path = config_file("rate = 2\nrate = 4\n");
    let out = bin()
        .args(["simulate", "--config"])
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 2);
    let err = stderr(&out);
    assert!(err.contains("line 2") && err.contains("rate"), "{err}");
}

#[test]
fn unknown_key_is_rejected_by_name() {
    let path = config_file(&format!("{SMALL_SIM}bogus = 1\n"));
    let out = bin()
        .args(["simulate", "--config"])
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 2);
    assert!(stderr(&out).contains("bogus"), "stderr: {}", stderr(&out));
}

#[test]
fn simulate_csv_is_deterministic_and_well_formed() {
    let path = config_file(SMALL_SIM);
    let run = || {
        let out = bin()
            .args(["simulate", "--config"])
            .arg(&path)
            .output()
            .unwrap();
        assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));
        stdout(&out)
    };
    let first = run();
    assert_eq!(first, run(), "reruns must be byte-identical");

    let mut lines = first.lines();
    assert_eq!(
        lines.next(),
        Some("protocol,R,kappa,scheme,snr_db,frames,errors,sfep,ci_low,ci_high,retries")
    );
    let row: Vec<&str> = lines.next().expect("data row").split(',').collect();
    assert_eq!(row.len(), 11);
    assert_eq!(&row[..6], &["rcnc", "2", "0.5", "fixed", "10", "2000"]);
    let errors: f64 = row[6].parse().unwrap();
    let sfep: f64 = row[7].parse().unwrap();
    assert_eq!(sfep, errors / 2000.0, "sfep must be errors/frames exactly");
    let (lo, hi): (f64, f64) = (row[8].parse().unwrap(), row[9].parse().unwrap());
    assert!(lo <= sfep && sfep <= hi);
    assert!(lines.next().is_none(), "single grid point, single row");
}

#[test]
fn grid_expansion_orders_kappa_before_snr() {
    let path = config_file(
        "protocol = rcnc\nrate = 2\nscheme = fixed\nkappa = 0.3:0.4:0.05\nsnr_db = 10,20\nframes = 50\nseed = 1\n",
    );
    let out = bin()
        .args(["simulate", "--config"])
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));
    let text = stdout(&out);
    let coords: Vec<(String, String)> = text
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[2].to_string(), f[4].to_string())
        })
        .collect();
    let want = [
        ("0.3", "10"),
        ("0.3", "20"),
        ("0.35", "10"),
        ("0.35", "20"),
        ("0.4", "10"),
        ("0.4", "20"),
    ];
    assert_eq!(
        coords,
        want.map(|(a, b)| (a.to_string(), b.to_string())),
        "kappa is the outer loop, snr the inner"
    );
}

#[test]
fn seed_flag_overrides_set_which_overrides_config() {
    let base = config_file(SMALL_SIM);
    let run = |extra: &[&str]| {
        let out = bin()
            .args(["simulate", "--config"])
            .arg(&base)
            .args(extra)
            .output()
            .unwrap();
        assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));
        stdout(&out)
    };
    let via_config = {
        let path = config_file(&SMALL_SIM.replace("seed = 1", "seed = 3"));
        let out = bin()
            .args(["simulate", "--config"])
            .arg(&path)
            .output()
            .unwrap();
        stdout(&out)
    };
    assert_eq!(run(&["--set", "seed=2", "--seed", "3"]), via_config);
    assert_eq!(run(&["--set", "seed=3"]), via_config);
    assert_ne!(run(&["--set", "seed=2"]), via_config);
}

#[test]
fn workers_never_change_results_and_env_is_validated() {
    let path = config_file(SMALL_SIM);
    let base = bin()
        .args(["simulate", "--config"])
        .arg(&path)
        .output()
        .unwrap();
    let with_env = bin()
        .args(["simulate", "--config"])
        .arg(&path)
        .env("NC_SIM_WORKERS", "2")
        .output()
        .unwrap();
    assert_eq!(exit_code(&with_env), 0);
    assert_eq!(stdout(&base), stdout(&with_env));

    let bad_env = bin()
        .args(["simulate", "--config"])
        .arg(&path)
        .env("NC_SIM_WORKERS", "many")
        .output()
        .unwrap();
    assert_eq!(exit_code(&bad_env), 2);
    assert!(stderr(&bad_env).contains("NC_SIM_WORKERS"));

    // An explicit flag wins before the environment is consulted.
    let flag_wins = bin()
        .args(["simulate", "--config"])
        .arg(&path)
        .args(["--workers", "1"])
        .env("NC_SIM_WORKERS", "many")
        .output()
        .unwrap();
    assert_eq!(exit_code(&flag_wins), 0, "stderr: {}", stderr(&flag_wins));
    assert_eq!(stdout(&base), stdout(&flag_wins));
}

#[test]
fn simulate_rejects_instantaneous_galois_combination() {
    let path = config_file(
        "protocol = rgnc\nrate = 2\nscheme = ipas\nsnr_db = 10\nframes = 100\n",
    );
    let out = bin()
        .args(["simulate", "--config"])
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn output_flag_writes_the_same_csv_to_a_file() {
    let config = config_file(SMALL_SIM);
    let n = COUNTER.fetch_add(1, Ordering::Relaxed);
    let out_path = std::env::temp_dir().join(format!(
        "nc-sim-cli-out-{}-{n}.csv",
        std::process::id()
    ));
    let to_stdout = bin()
        .args(["simulate", "--config"])
        .arg(&config)
        .output()
        .unwrap();
    let to_file = bin()
        .args(["simulate", "--config"])
        .arg(&config)
        .args(["--output"])
        .arg(&out_path)
        .output()
        .unwrap();
    assert_eq!(exit_code(&to_file), 0);
    assert!(stdout(&to_file).is_empty());
    let written = std::fs::read_to_string(&out_path).unwrap();
    assert_eq!(written, stdout(&to_stdout));
    let _ = std::fs::remove_file(&out_path);
}

#[test]
fn analytic_reports_the_crossover() {
    let path = config_file(
        "protocol = rcnc,rgnc\nrate = 2\nkappa = 0.6666666666666666\nsnr_db = 30\n",
    );
    let out = bin()
        .args(["analytic", "--config"])
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("protocol,R,kappa,snr_db,sfep_approx,gap"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0][0], "rcnc");
    assert_eq!(rows[1][0], "rgnc");
    let a: f64 = rows[0][4].parse().unwrap();
    let b: f64 = rows[1][4].parse().unwrap();
    assert!(
        ((a - b) / b).abs() < 1e-12,
        "both protocols predict the same error rate at the crossover"
    );
}

#[test]
fn closed_pipe_is_not_an_error() {
    use std::process::Stdio;
    // Enough rows to overflow the OS pipe buffer after the reader is gone.
    let path = config_file(
        "protocol = rcnc,rgnc\nrate = 2,4,6\nkappa = 0.001:0.999:0.001\nsnr_db = 10:30:1\n",
    );
    let mut child = bin()
        .args(["analytic", "--config"])
        .arg(&path)
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    drop(child.stdout.take());
    let status = child.wait().unwrap();
    assert_eq!(status.code(), Some(0), "early pipe close must stay silent");
}

#[test]
fn analytic_set_override_expands_a_grid() {
    let path = config_file("protocol = rcnc\nrate = 2\nkappa = 0.5\nsnr_db = 10\n");
    let out = bin()
        .args(["analytic", "--config"])
        .arg(&path)
        .args(["--set", "snr_db=10:30:10"])
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));
    let text = stdout(&out);
    let snrs: Vec<&str> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(3).unwrap())
        .collect();
    assert_eq!(snrs, ["10", "20", "30"]);
}
