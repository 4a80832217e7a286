use std::path::Path;
use std::process::{Command, Output};

use mfgame_cli::{Experiment, Settings};

fn mfgame(args: &[&str], env: Option<(&str, &Path)>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_mfgame"));
    cmd.args(args).env_remove(mfgame_cli::OUTPUT_DIR_ENV);
    if let Some((k, v)) = env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn list_prints_the_catalogue() {
    let out = mfgame(&["list"], None);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 8);
    assert!(text.lines().any(|l| l.starts_with("section5")));
}

#[test]
fn usage_errors_exit_with_two() {
    let out = mfgame(&["frobnicate"], None);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("Usage"));
    let help = mfgame(&["run", "--help"], None);
    assert!(help.status.success());
    assert!(String::from_utf8(help.stdout).unwrap().contains("--output"));
}

#[test]
fn bad_configs_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let negative = write_config(dir.path(), "neg.toml", "experiment = \"norms\"\nn = -5\n");
    let out = mfgame(&["run", &negative], None);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("line 2"));

    let unknown = write_config(
        dir.path(),
        "unk.toml",
        "experiment = \"norms\"\nparticles = 5\n",
    );
    assert_eq!(mfgame(&["run", &unknown], None).status.code(), Some(2));

    let missing = dir.path().join("nope.toml");
    assert_eq!(
        mfgame(&["run", missing.to_str().unwrap()], None)
            .status
            .code(),
        Some(2)
    );

    let delay = write_config(
        dir.path(),
        "delay.toml",
        "experiment = \"section5\"\ndelay = 1.5\n",
    );
    assert_eq!(mfgame(&["run", &delay], None).status.code(), Some(2));
}

#[test]
fn norms_run_writes_the_sqrt_pi_row() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let cfg = write_config(
        dir.path(),
        "norms.toml",
        &format!(
            "experiment = \"norms\"\noutput_dir = {:?}\n",
            out_dir.to_str().unwrap()
        ),
    );
    let out = mfgame(&["run", &cfg], None);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(stdout.lines().filter(|l| l.starts_with("PASS")).count(), 4);
    let csv = std::fs::read_to_string(out_dir.join("norms.csv")).unwrap();
    assert!(csv.starts_with("measure,k,value,expected,abs_error,trapezoid\n"));
    assert!(csv.contains("dirac(0),0,1.772453850905516"));
    assert!(csv
        .trim_end()
        .lines()
        .last()
        .unwrap()
        .starts_with("# seed=none, version="));
}

#[test]
fn environment_overrides_the_output_dir() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("from_env");
    let cfg = write_config(
        dir.path(),
        "b.toml",
        "experiment = \"bsde-oracles\"\noutput_dir = \"ignored\"\n",
    );
    let out = mfgame(&["run", &cfg], Some((mfgame_cli::OUTPUT_DIR_ENV, &target)));
    assert!(out.status.success());
    assert!(target.join("bsde_oracles.csv").exists());
    assert!(!Path::new("ignored").exists());
}

#[test]
fn consumption_small_fixture_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("s5");
    let cfg = write_config(
        dir.path(),
        "s5.toml",
        &format!(
            "experiment = \"section5\"\nn = 2000\nm = 50\nseed = 1\noutput_dir = {:?}\n",
            out_dir.to_str().unwrap()
        ),
    );
    let out = mfgame(&["run", &cfg], None);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
    let report = std::fs::read_to_string(out_dir.join("report.csv")).unwrap();
    assert!(report.starts_with("criterion,value,threshold,pass\n"));
    assert!(out_dir.join("controls.csv").exists());
}

#[test]
fn failing_checks_exit_with_one() {
    // On a long horizon with unit steps the explicit and implicit Euler
    // solutions drift far outside the O(Δt) band.
    let mut s = Settings::defaults(Experiment::BsdeOracles);
    s.m = 10;
    s.model.horizon = 10.0;
    let outcome = mfgame_cli::run(&s).unwrap();
    assert!(!outcome.passed());
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "coarse.toml",
        &format!(
            "experiment = \"bsde-oracles\"\nm = 10\noutput_dir = {:?}\n[model]\nhorizon = 10.0\n",
            dir.path().join("o").to_str().unwrap()
        ),
    );
    assert_eq!(mfgame(&["run", &cfg], None).status.code(), Some(1));
}

#[test]
fn settings_parse_and_default() {
    let s: Settings = "experiment = \"gateaux\"\nlambdas = [0.2, 0.1]\n[model]\nsigma = 0.3\n"
        .parse()
        .unwrap();
    assert_eq!(s.n, 10_000);
    assert_eq!(s.lambdas, vec![0.2, 0.1]);
    assert_eq!(s.model.sigma, 0.3);
    assert_eq!(s.model.theta, 1.0);
    assert!("experiment = \"gateaux\"\nlambdas = [0.0]\n"
        .parse::<Settings>()
        .is_err());
    assert!("experiment = \"nope\"\n".parse::<Settings>().is_err());
}
