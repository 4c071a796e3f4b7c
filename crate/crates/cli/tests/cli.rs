use serde_json::Value;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn gevrey(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gevrey-nse"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn config(dir: &Path, body: &str) -> String {
    let path = dir.join("run.cfg");
    std::fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn json(path: PathBuf) -> Value {
    serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap()
}

#[test]
fn taylor_green_series_decays_exactly() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(tmp.path(), "k_max = 8\ndt = 1e-3\nt_end = 0.5\nsnapshot_stride = 100\n");
    let out = gevrey(&["simulate", "--config", &cfg, "--out", "tg"], tmp.path());
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = std::fs::read_to_string(tmp.path().join("tg/timeseries.jsonl")).unwrap();
    let lines: Vec<Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 6);
    let e0 = lines[0]["energy"].as_f64().unwrap();
    for l in &lines {
        let t = l["t"].as_f64().unwrap();
        let e = l["energy"].as_f64().unwrap();
        assert!((e - e0 * (-4.0 * t).exp()).abs() <= 1e-9 * e0, "t = {t}");
    }
    for f in ["final.snap", "spectrum.csv", "summary.json"] {
        assert!(tmp.path().join("tg").join(f).exists(), "{f}");
    }
}

#[test]
fn stability_violation_exits_before_stepping() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(tmp.path(), "k_max = 32\ndt = 0.1\n");
    let out = gevrey(&["simulate", "--config", &cfg, "--out", "o"], tmp.path());
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("stability_cap"));
    assert!(!tmp.path().join("o/timeseries.jsonl").exists());
}

#[test]
fn config_errors_name_the_key() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(tmp.path(), "viscosity = 1\n");
    let out = gevrey(&["simulate", "--config", &cfg], tmp.path());
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("viscosity"));
    let cfg = config(tmp.path(), "u0 = file\nu0_file = missing.snap\n");
    let out = gevrey(&["simulate", "--config", &cfg], tmp.path());
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("u0_file"));
}

#[test]
fn blowup_dumps_the_last_good_state() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(
        tmp.path(),
        "nu = 0.05\nk_max = 16\ndt = 0.01\nt_end = 2\nu0 = random\nu0_band = 1,4\n\
         forcing = random\nforcing_amplitude = 1\n",
    );
    let out = gevrey(&["simulate", "--config", &cfg, "--out", "o"], tmp.path());
    assert_eq!(code(&out), 2, "{}", stderr(&out));
    assert!(tmp.path().join("o/abort_state.snap").exists());
    assert_eq!(json(tmp.path().join("o/summary.json"))["status"], "numerical_abort");
}

#[test]
fn small_data_picard_meets_the_radius_bound() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(
        tmp.path(),
        "k_max = 8\nu0 = random\nu0_band = 1,3\nu0_amplitude = 0.01\nforcing = random\n\
         forcing_amplitude = 0.01\n",
    );
    let out = gevrey(&["picard", "--config", &cfg, "--out", "o"], tmp.path());
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let rep = json(tmp.path().join("o/picard_report.json"));
    assert_eq!(rep["status"], "converged");
    assert!(rep["comparison"]["ratio"].as_f64().unwrap() >= 1.0);
}

#[test]
fn large_data_picard_reports_divergence() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(
        tmp.path(),
        "k_max = 8\nu0 = random\nu0_band = 1,4\nu0_amplitude = 50\nforcing = random\n\
         forcing_amplitude = 1e-6\ntheorem = grashof-2d\npicard_max_iters = 30\n",
    );
    let out = gevrey(&["picard", "--config", &cfg, "--out", "o"], tmp.path());
    assert_eq!(code(&out), 3, "{}", stderr(&out));
    let rep = json(tmp.path().join("o/picard_report.json"));
    assert_eq!(rep["status"], "nonconvergent");
    assert!(rep["theorem"]["hypothesis"] == false);
    let ratios = rep["ratios"].as_array().unwrap();
    assert!(ratios.iter().any(|r| r.as_f64().unwrap() > 1.0));
}

#[test]
fn three_dimensional_exponents_are_reported() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(
        tmp.path(),
        "dim = 3\nk_max = 4\nu0 = random\nu0_band = 1,2\nu0_amplitude = 1e-4\nforcing = random\n\
         forcing_kappa_bar = 2\nforcing_amplitude = 1e-3\nsigma = -0.75\nq = 59/49\ntheorem = grashof-3d\n",
    );
    let out = gevrey(&["picard", "--config", &cfg, "--out", "o"], tmp.path());
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let th = &json(tmp.path().join("o/picard_report.json"))["theorem"];
    assert!((th["beta"].as_f64().unwrap() - 15.0 / 59.0).abs() < 1e-12);
    assert!((th["radius_exponent"].as_f64().unwrap() - 59.0 / 64.0).abs() < 1e-12);
}

#[test]
fn verify_suites_and_constants_files() {
    let tmp = tempfile::tempdir().unwrap();
    for suite in ["appendix", "semigroup"] {
        let out = gevrey(&["verify", "--suite", suite, "--out", suite], tmp.path());
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        let rep = json(tmp.path().join(suite).join("verify_report.json"));
        assert_eq!(rep["suite"], suite);
    }
    let out = gevrey(&["verify", "--suite", "everything"], tmp.path());
    assert_eq!(code(&out), 1);

    std::fs::write(tmp.path().join("bad.toml"), "version = \"x\"\n[mild]\nlinear_i = \"oops\"\n").unwrap();
    let cfg = config(tmp.path(), "calibration = bad.toml\n");
    let out = gevrey(&["verify", "--config", &cfg, "--suite", "appendix"], tmp.path());
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("bad.toml"));
}

#[test]
fn thread_override_is_validated() {
    let tmp = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_gevrey-nse"))
        .args(["verify", "--suite", "semigroup", "--out", "o"])
        .env("GEVREY_NSE_THREADS", "zero")
        .current_dir(tmp.path())
        .output()
        .unwrap();
    assert_eq!(code(&out), 1);
    let out = Command::new(env!("CARGO_BIN_EXE_gevrey-nse"))
        .args(["verify", "--suite", "semigroup", "--out", "o"])
        .env("GEVREY_NSE_THREADS", "1")
        .current_dir(tmp.path())
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
}

#[test]
fn seed_override_changes_random_data_only() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(
        tmp.path(),
        "k_max = 6\nnu = 0.1\ndt = 0.01\nt_end = 0.2\nu0 = random\nu0_band = 1,3\n",
    );
    let run = |seed: &str, out: &str| {
        let o = gevrey(&["simulate", "--config", &cfg, "--seed", seed, "--out", out], tmp.path());
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        std::fs::read(tmp.path().join(out).join("timeseries.jsonl")).unwrap()
    };
    let a = run("1", "a");
    assert_eq!(a, run("1", "b"));
    assert_ne!(a, run("2", "c"));
}

#[test]
fn keys_lists_every_documented_key() {
    let out = gevrey(&["keys"], Path::new("."));
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    for key in ["dim", "nu", "k_max", "forcing_kappa_bar", "calibration", "output_dir"] {
        assert!(text.lines().any(|l| l.starts_with(key)), "{key}");
    }
}
