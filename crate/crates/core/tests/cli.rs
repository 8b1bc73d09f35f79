use std::process::{Command, Output};

fn erasurenet(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_erasurenet"));
    c.args(args).env_remove("ERASURENET_SEED");
    for (k, v) in envs {
        c.env(k, v);
    }
    c.output().unwrap()
}

#[test]
fn verify_exit_codes() {
    let ok = erasurenet(&["verify", "--protocol", "erasure-flag", "--code", "412", "--faults", "0"], &[]);
    assert_eq!(ok.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&ok.stdout).unwrap();
    assert_eq!(report["verdict"], "pass");

    let bad = erasurenet(&["verify", "--protocol", "nonft", "--code", "steane", "--faults", "2"], &[]);
    assert_eq!(bad.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_slice(&bad.stdout).unwrap();
    assert!(!report["failures"].as_array().unwrap().is_empty());

    let unsupported = erasurenet(&["verify", "--protocol", "knill", "--code", "surface3", "--faults", "1"], &[]);
    assert_eq!(unsupported.status.code(), Some(2));
    let usage = erasurenet(&["verify", "--protocol", "bogus", "--code", "412", "--faults", "1"], &[]);
    assert_eq!(usage.status.code(), Some(2));
}

#[test]
fn verify_is_independent_of_jobs() {
    let args = ["verify", "--protocol", "erasure-flag", "--code", "steane", "--faults", "2"];
    let one = erasurenet(&[&["--jobs", "1"], &args[..]].concat(), &[]);
    let many = erasurenet(&[&["--jobs", "4"], &args[..]].concat(), &[]);
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, many.stdout);
}

#[test]
fn rates_csv_shape_and_markers() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(
        &cfg,
        "code = \"412\"\nscheme = \"erasure-flag\"\nlambda = 0.1\ntrials = 50\n\n[sweep]\ntaus = [\"0s\", \"1us\", \"10us\"]\n",
    )
    .unwrap();
    let out = erasurenet(&["rates", "--config", cfg.to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let mut r = csv::Reader::from_reader(&out.stdout[..]);
    let header = r.headers().unwrap().clone();
    let rows: Vec<csv::StringRecord> = r.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 3 + 4);
    let col = |name: &str| header.iter().position(|h| h == name).unwrap();
    let zero = &rows[0];
    assert_eq!(zero[col("gamma_unencoded")].parse::<f64>().unwrap(), 0.1);
    for name in ["gamma_exact_412", "gamma_exact_713", "gamma_approx_412", "gamma_approx_713", "gamma_nonft_upper_713"] {
        assert_eq!(zero[col(name)].parse::<f64>().unwrap(), 0.0, "{name}");
    }
    let marker = rows.iter().find(|r| &r[col("marker")] == "erasure-flag/412").unwrap();
    let hours: f64 = marker[col("lifetime_412_hours")].parse().unwrap();
    assert!((5.26..5.27).contains(&hours), "{hours}");
    let marker = rows.iter().find(|r| &r[col("marker")] == "erasure-flag/steane").unwrap();
    let days: f64 = marker[col("lifetime_713_days")].parse().unwrap();
    assert!((50.2..50.4).contains(&days), "{days}");
}

#[test]
fn rates_with_monte_carlo_is_seed_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(
        &cfg,
        "code = \"412\"\nscheme = \"knill\"\nlambda = 0.1\ntrials = 200\nmonte_carlo = true\n\n[sweep]\nmin = \"10us\"\nmax = \"1ms\"\npoints = 2\n",
    )
    .unwrap();
    let path = cfg.to_str().unwrap();
    let a = erasurenet(&["--jobs", "1", "rates", "--config", path], &[("ERASURENET_SEED", "11")]);
    let b = erasurenet(&["--jobs", "3", "rates", "--config", path], &[("ERASURENET_SEED", "11")]);
    let c = erasurenet(&["rates", "--config", path, "--seed", "12"], &[]);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
    assert!(String::from_utf8_lossy(&a.stdout).lines().next().unwrap().ends_with("mc_gamma,mc_ci_low,mc_ci_high"));
}

#[test]
fn simulate_and_timing_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("run.txt");
    let args = [
        "simulate",
        "--protocol",
        "erasure-flag",
        "--code",
        "steane",
        "--initial",
        "1",
        "--event",
        "A@100us",
        "--dump",
        dump.to_str().unwrap(),
    ];
    let a = erasurenet(&args, &[("ERASURENET_SEED", "5")]);
    let b = erasurenet(&args, &[("ERASURENET_SEED", "5")]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let last = String::from_utf8(a.stdout).unwrap().lines().last().unwrap().to_string();
    assert!(last.contains("\"verdict\":\"success\""));
    let text = std::fs::read_to_string(&dump).unwrap();
    assert!(text.starts_with("# qubits d1@D1"));

    let t1 = erasurenet(&["timing"], &[]);
    let t2 = erasurenet(&["--jobs", "2", "timing"], &[]);
    assert_eq!(t1.stdout, t2.stdout);
    let text = String::from_utf8(t1.stdout).unwrap();
    for want in ["6 us", "36 us", "39 us", "264 us", "1014 us", "213 us", "342 us"] {
        assert!(text.contains(want), "{want} missing from\n{text}");
    }
}

#[test]
fn timing_rescales_with_two_qubit_gate() {
    let out = erasurenet(&["timing", "--json", "--t-2q", "200ns"], &[]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["t_sq_s"].as_f64().unwrap() - 10e-6).abs() < 1e-15);
    let flag412 = &v["cells"][0];
    assert!((flag412["formula_s"].as_f64().unwrap() - (50e-6 + 6.0 * 63e-6)).abs() < 1e-12);
}

#[test]
fn audit_surface_passes() {
    let out = erasurenet(&["audit-surface", "--d", "3", "--faults", "1"], &[]);
    assert_eq!(out.status.code(), Some(0));
}
