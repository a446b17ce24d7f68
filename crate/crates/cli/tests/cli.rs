use dioph_cli::config::{Experiment, ExperimentConfig};
use dioph_cli::{run, RunOptions, EXIT_BUDGET, EXIT_CONFIG};
use serde_json::Value;
use std::process::Command;

fn dioph(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_dioph")).args(args).output().unwrap();
    (out.status.code().unwrap(), String::from_utf8(out.stdout).unwrap(), String::from_utf8(out.stderr).unwrap())
}

fn json_run(config: &str) -> Value {
    let c = ExperimentConfig::from_json(config).unwrap();
    let o = run(&c, &RunOptions { threads: Some(1), ..Default::default() }).unwrap();
    assert_eq!(o.exit_code, 0);
    serde_json::from_str(&o.report.to_json()).unwrap()
}

#[test]
fn dim_report_slope() {
    let r = json_run(r#"{"experiment": "dim", "parameters": {"tau": 3, "Q": 4000}}"#);
    let slope = r["summary"]["slope"].as_f64().unwrap();
    assert!((slope - 0.5).abs() < 0.1, "{slope}");
    assert_eq!(r["config"]["parameters"]["Q"], 4000);
}

#[test]
fn series_report_converges() {
    let r = json_run(r#"{"experiment": "series", "parameters": {"criterion": "khintchine", "psi": "power(1,2,0)", "N": 10000}}"#);
    assert_eq!(r["summary"]["classification"], "converges");
}

#[test]
fn measure_report_hand_example() {
    let r = json_run(r#"{"experiment": "measure", "parameters": {"psi": "table(2:1/4)", "q_to": 2, "variant": "plain"}}"#);
    assert_eq!(r["summary"]["measure_exact"], "1/2");
}

#[test]
fn unknown_keys_rejected() {
    let e = ExperimentConfig::from_json(r#"{"experiment": "dim", "parameters": {"tau": 2, "Q": 100, "samples": 4}}"#).unwrap_err();
    assert_eq!(e.code, EXIT_CONFIG);
    assert!(ExperimentConfig::from_json(r#"{"experiment": "dim", "parameters": {"taux": 2}}"#).is_err());
    assert!(ExperimentConfig::from_json(r#"{"experiment": "dim", "extra": 1}"#).is_err());
    let (code, _, err) = dioph(&["dim", "--set", "tau=2", "--set", "bogus=1"]);
    assert_eq!(code, EXIT_CONFIG, "{err}");
    let (code, _, _) = dioph(&["twisted", "--set", "mode=liminf", "--set", "x=golden", "--set", "b=0", "--set", "q_max=10", "--set", "tau=2"]);
    assert_eq!(code, EXIT_CONFIG);
}

#[test]
fn budget_exit_code() {
    let (code, _, err) = dioph(&["measure", "--set", "psi=power(1,1,0)", "--set", "q_to=100000000"]);
    assert_eq!(code, EXIT_BUDGET, "{err}");
}

#[test]
fn reports_are_deterministic() {
    let mut c = ExperimentConfig::new(Experiment::Twisted);
    for s in ["mode=kim", "x=golden", "samples=8", "q_max=2000"] {
        c.set(s).unwrap();
    }
    let go = |threads| {
        let mut r = run(&c, &RunOptions { seed: Some(5), threads: Some(threads), ..Default::default() }).unwrap().report;
        r.provenance.wall_time_ms = 0;
        r.provenance.threads = 0;
        r.to_json()
    };
    assert_eq!(go(1), go(3));
    let (code, a, _) = dioph(&["--seed", "9", "--format", "csv", "mc", "--set", "psi=power(1,2,0)", "--set", "q_max=20", "--set", "samples=300"]);
    assert_eq!(code, 0);
    let (_, b, _) = dioph(&["--seed", "9", "--format", "csv", "mc", "--set", "psi=power(1,2,0)", "--set", "q_max=20", "--set", "samples=300"]);
    assert_eq!(a, b);
    assert!(a.starts_with("sample,solutions\n"));
}

#[test]
fn report_echo_reruns_standalone() {
    let (code, out, _) = dioph(&["cf", "--set", "x=sqrt2-1", "--set", "depth=6"]);
    assert_eq!(code, 0);
    let r: Value = serde_json::from_str(&out).unwrap();
    let dir = std::env::temp_dir().join(format!("dioph-echo-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("c.json");
    std::fs::write(&cfg, r["config"].to_string()).unwrap();
    let (code, again, _) = dioph(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, 0);
    let again: Value = serde_json::from_str(&again).unwrap();
    assert_eq!(r["table"], again["table"]);
    assert_eq!(r["table"]["rows"][2][1], "2");
    // --config on a subcommand must name the same experiment
    let (code, _, _) = dioph(&["dim", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, EXIT_CONFIG);
    let out_path = dir.join("t.csv");
    let (code, _, _) = dioph(&["--out", out_path.to_str().unwrap(), "--format", "csv", "run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(std::fs::read_to_string(&out_path).unwrap().starts_with("k,a_k,p_k,q_k,q_k_norm\n"));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn every_experiment_runs() {
    for (exp, sets) in [
        ("cf", vec!["x=golden"]),
        ("series", vec!["criterion=groshev(n=2,m=1)", "psi=power(1,3,0)", "N=50", "checkpoints=[10,50]"]),
        ("measure", vec!["psi=power(1,2,0)", "checkpoints=[5,10]", "variant=coprime"]),
        ("mc", vec!["n=2", "psi=supnorm(power(1,2,0))", "q_max=10", "samples=50"]),
        ("twisted", vec!["x=golden", "b=1/2", "psi=power(1,1,0)", "q_max=100", "sign=plus"]),
        ("twisted", vec!["mode=dimension", "x=golden", "tau=2", "Q=2000"]),
        ("counterexample", vec!["alpha=golden", "terms=6"]),
        ("counterexample", vec!["construction=axis-lift", "theta=table(1:1,2:1/2,6:1/6)", "cutoffs=[3,6]"]),
        ("discrepancy", vec!["x=sqrt2-1", "checkpoints=[10,100]"]),
        ("conjecture-scan", vec!["alpha=sqrt2-1", "psi=power(1,1,0)", "b_grid=[\"0\",\"1/3\"]", "q_max=1000"]),
    ] {
        let mut args = vec!["--format", "csv", exp];
        for s in &sets {
            args.extend(["--set", s]);
        }
        let (code, out, err) = dioph(&args);
        assert_eq!(code, 0, "{exp} {sets:?}: {err}");
        assert!(out.lines().count() >= 2, "{exp}: {out}");
    }
}

#[test]
fn conjecture_scan_pell_denominators() {
    let r = json_run(r#"{"experiment": "conjecture-scan", "parameters": {"alpha": "sqrt2-1", "psi": "power(1,1,0)", "b_grid": [0], "q_max": 1000}}"#);
    let n = r["summary"]["total_solutions"].as_u64().unwrap();
    assert!(n >= 5, "{n}");
    let sols = r["table"]["rows"][0][2].as_str().unwrap();
    for q in ["2", "5", "12", "29", "70"] {
        assert!(sols.split(';').any(|s| s == q), "{sols}");
    }
}
