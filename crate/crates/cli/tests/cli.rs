use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use vdyn::eval::io::read_json;
use vdyn::eval::EvalReport;

fn vdyn(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vdyn"))
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

#[test]
fn generate_sample_three() {
    let dir = tempfile::tempdir().unwrap();
    let o = vdyn(dir.path(), &["generate", "--sample", "3"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("sample3_clean.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 1 + 1001);
    assert_eq!(
        lines[0],
        "t,x,y,psi,delta,v,beta,omega,omega_f,omega_r,a_x,v_delta"
    );
    let row: Vec<f64> = lines[1].split(',').map(|v| v.parse().unwrap()).collect();
    // wheels start at free rolling, 25 / 0.344 rad/s
    let rolling = 25.0 / 0.344;
    assert_eq!(&row[..8], &[0.0, 0.0, 0.0, 0.0, 0.0, 25.0, 0.0, 0.0]);
    assert!((row[8] - rolling).abs() < 1e-12 && (row[9] - rolling).abs() < 1e-12);
    assert!((row[10] - 0.06).abs() < 1e-15 && row[11] == 0.0);
    let noisy = fs::read_to_string(dir.path().join("sample3_noisy.csv")).unwrap();
    assert!(noisy.starts_with("t,x,y,psi,delta,v,beta,omega,a_x,v_delta\n"));
    assert!(dir.path().join("scaler.json").exists());
    assert!(dir.path().join("sample3_meta.json").exists());
}

#[test]
fn unknown_sample_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&vdyn(dir.path(), &["generate", "--sample", "4"])), 2);
}

#[test]
fn config_errors_and_numeric_failures() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "[solver]\nsubsteps = \"ten\"\n").unwrap();
    let o = vdyn(
        dir.path(),
        &["--config", bad.to_str().unwrap(), "simulate-ode"],
    );
    assert_eq!(code(&o), 2);

    // a singularity floor above the initial speed fails at t = 0
    let floor = dir.path().join("floor.toml");
    fs::write(&floor, "[solver]\nv_floor = 30.0\n").unwrap();
    let o = vdyn(
        dir.path(),
        &[
            "--config",
            floor.to_str().unwrap(),
            "generate",
            "--sample",
            "3",
        ],
    );
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("t = 0.000"));

    let o = vdyn(
        dir.path(),
        &["--config", "/nonexistent/cfg.toml", "simulate-ode"],
    );
    assert_eq!(code(&o), 4);
}

#[test]
fn simulate_ode_reports_benchmark() {
    let dir = tempfile::tempdir().unwrap();
    let o = vdyn(dir.path(), &["simulate-ode"]);
    assert_eq!(code(&o), 0);
    let report: EvalReport = read_json(&dir.path().join("ode_report.json")).unwrap();
    assert!(report.train_sse > 1000.0, "{}", report.train_sse);
    assert!(dir.path().join("ode_sample3.csv").exists());
}

#[test]
fn train_evaluate_plot_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let o = vdyn(
        p,
        &[
            "train",
            "--model",
            "ude",
            "--hidden",
            "5",
            "--seed",
            "2",
            "--iterations",
            "3",
        ],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let weights = p.join("ude_h5_s2_weights.json");
    let loss = fs::read_to_string(p.join("ude_h5_s2_loss.csv")).unwrap();
    assert_eq!(loss.lines().count(), 1 + 9);

    let eval_dir = p.join("eval");
    let o = vdyn(
        &eval_dir,
        &["evaluate", "--weights", weights.to_str().unwrap()],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let first = fs::read(eval_dir.join("ude_h5_s2_report.json")).unwrap();
    assert_eq!(first, fs::read(p.join("ude_h5_s2_report.json")).unwrap());
    let o = vdyn(
        &eval_dir,
        &["evaluate", "--weights", weights.to_str().unwrap()],
    );
    assert_eq!(code(&o), 0);
    assert_eq!(
        first,
        fs::read(eval_dir.join("ude_h5_s2_report.json")).unwrap()
    );

    // a scaler from another configuration is refused
    let other = p.join("other");
    let cfg = p.join("noise.toml");
    fs::write(&cfg, "[data]\nnoise_sigma = 0.05\n").unwrap();
    assert_eq!(
        code(&vdyn(
            &other,
            &[
                "--config",
                cfg.to_str().unwrap(),
                "generate",
                "--sample",
                "1"
            ]
        )),
        0
    );
    let scaler = other.join("scaler.json");
    let o = vdyn(
        p,
        &[
            "evaluate",
            "--weights",
            weights.to_str().unwrap(),
            "--scaler",
            scaler.to_str().unwrap(),
        ],
    );
    assert_eq!(code(&o), 2);
    let o = vdyn(
        p,
        &[
            "--config",
            cfg.to_str().unwrap(),
            "evaluate",
            "--weights",
            weights.to_str().unwrap(),
        ],
    );
    assert_eq!(code(&o), 2);
    assert_eq!(
        code(&vdyn(p, &["evaluate", "--weights", "/nonexistent/w.json"])),
        4
    );

    let report = p.join("ude_h5_s2_report.json");
    let o = vdyn(p, &["plot", "--report", report.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let svg = fs::read_to_string(p.join("ude_h5_s2_report.svg")).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 14);
    assert_eq!(code(&vdyn(p, &["plot"])), 2);
}

#[test]
fn small_sweep_and_scatter() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let o = vdyn(
        p,
        &[
            "sweep",
            "--model",
            "ude",
            "--hidden",
            "5",
            "--seeds",
            "1,2",
            "--iterations",
            "2",
            "--jobs",
            "2",
        ],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(p.join("sweep_ude.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(
        lines[0],
        "model,hidden,seed,lr,param_count,train_sse,val_sse,status"
    );
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("ude,5,1,0.025,53,") && lines[1].ends_with(",ok"));
    assert!(p.join("sweep_ude/ude_h5_s1_lr0.025_weights.json").exists());

    let table = p.join("sweep_ude.json");
    let o = vdyn(p, &["plot", "--sweep", table.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let svg = fs::read_to_string(p.join("validation_scatter.svg")).unwrap();
    assert!(svg.matches("<circle").count() >= 2);
}

#[test]
fn learning_rate_sweep_summary() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let o = vdyn(
        p,
        &[
            "sweep-lr",
            "--model",
            "node",
            "--rates",
            "0.05,0.01",
            "--hidden",
            "5",
            "--seeds",
            "1",
            "--iterations",
            "1",
        ],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(p.join("sweep_lr_node.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(
        lines[0],
        "model,lr,best_train_sse,best_val_sse,median_val_sse,n_ok,n_cells"
    );
    assert!(lines[1].starts_with("node,0.05,") && lines[2].starts_with("node,0.01,"));
}
