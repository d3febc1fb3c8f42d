//! End-to-end tests of the command-line binary: exit codes, error wording,
//! flag overrides, output determinism, and the lock protocol. Each test runs
//! the compiled binary in a fresh temporary directory.

use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::{json, Value};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_electorate-lab")
}

struct RunResult {
    code: i32,
    stdout: String,
    stderr: String,
}

fn run(args: &[&str]) -> RunResult {
    run_with_env(args, &[])
}

fn run_with_env(args: &[&str], env: &[(&str, &str)]) -> RunResult {
    let mut cmd = Command::new(bin());
    cmd.args(args).env_remove("ELECTORATE_LAB_THREADS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    let out = cmd.output().expect("binary launches");
    RunResult {
        code: out.status.code().expect("binary exits normally"),
        stdout: String::from_utf8_lossy(&out.stdout).into_owned(),
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

fn race(id: &str, kind: &str, p1: &str, p2: &str, x1: f64, x2: f64) -> Value {
    json!({
        "race_id": id,
        "race_type": kind,
        "cand1_party": p1,
        "cand2_party": p2,
        "cand1_pos": [x1],
        "cand2_pos": [x2],
    })
}

/// A small but fully featured experiment: one same-party race for the group
/// ladder, six cross-party races fanning out from the center so polarization
/// takes several distinct values on both sides of its mean.
fn base_config(out_dir: &Path) -> Value {
    json!({
        "seed": 31,
        "output_dir": out_dir.to_str().expect("utf-8 path"),
        "electorate": {
            "n_voters": 600,
            "dimension": 1,
            "ideal_distribution": {"kind": "uniform", "lo": 0.0, "hi": 10.0},
            "n_measures": 3,
            "dem_position": [0.5],
            "rep_position": [9.5],
            "measure_spread": 3.0
        },
        "races": [
            race("dd_house", "state_house", "D", "D", -0.5, -0.04),
            race("dr_a", "us_house", "D", "R", 4.9, 5.1),
            race("dr_b", "us_house", "D", "R", 4.75, 5.25),
            race("dr_c", "us_house", "D", "R", 4.55, 5.45),
            race("dr_d", "us_house", "D", "R", 4.3, 5.7),
            race("dr_e", "us_house", "D", "R", 4.0, 6.0),
            race("dr_f", "us_house", "D", "R", 3.7, 6.3),
            race("dr_g", "us_house", "D", "R", 3.4, 6.6),
            race("dr_h", "us_house", "D", "R", 3.0, 7.0),
            race("dr_i", "state_senate", "D", "R", 2.2, 7.8),
            race("dr_j", "presidential", "D", "R", 0.8, 9.2),
        ],
        "loss": {"family": "reverse_s", "alpha": 1.0, "omega": 4.0},
        "choice": {
            "mode": "probabilistic",
            "cost": 0.025,
            "noise": {"kind": "normal", "scale": 0.08},
            "abstention": {"kind": "stakes"}
        }
    })
}

fn write_config(dir: &Path, config: &Value) -> PathBuf {
    let path = dir.join("config.json");
    std::fs::write(&path, serde_json::to_string_pretty(config).expect("serializes"))
        .expect("config written");
    path
}

fn read_bytes(path: &Path) -> Vec<u8> {
    std::fs::read(path).unwrap_or_else(|e| panic!("read {}: {e}", path.display()))
}

#[test]
fn simulate_and_analyze_are_deterministic_across_runs() {
    let tmp = tempfile::tempdir().expect("tempdir");
    let mut outputs: Vec<Vec<Vec<u8>>> = Vec::new();
    for attempt in 0..2 {
        let out_dir = tmp.path().join(format!("run{attempt}"));
        let config = write_config(tmp.path(), &base_config(&out_dir));
        let config = config.to_str().expect("utf-8");

        let sim = run(&["simulate", "--config", config, "--out", out_dir.to_str().unwrap()]);
        assert_eq!(sim.code, 0, "simulate failed: {}", sim.stderr);
        let ana = run(&["analyze", "--config", config, "--out", out_dir.to_str().unwrap()]);
        assert_eq!(ana.code, 0, "analyze failed: {}", ana.stderr);
        let fit = run(&["fit", "--config", config, "--out", out_dir.to_str().unwrap()]);
        assert_eq!(fit.code, 0, "fit failed: {}", fit.stderr);

        outputs.push(
            [
                "cvr.csv",
                "measures.csv",
                "case1_abstention.csv",
                "case2_pol.csv",
                "correlation.csv",
                "regressions.csv",
            ]
            .iter()
            .map(|name| read_bytes(&out_dir.join(name)))
            .collect(),
        );
    }
    for (i, (a, b)) in outputs[0].iter().zip(&outputs[1]).enumerate() {
        assert_eq!(a, b, "output file #{i} differs between identical runs");
    }
}

#[test]
fn seed_flag_changes_the_simulation() {
    let tmp = tempfile::tempdir().expect("tempdir");
    let out_a = tmp.path().join("a");
    let out_b = tmp.path().join("b");
    let config = write_config(tmp.path(), &base_config(&out_a));
    let config = config.to_str().expect("utf-8");

    let first = run(&["simulate", "--config", config, "--seed", "5", "--out", out_a.to_str().unwrap()]);
    assert_eq!(first.code, 0, "simulate failed: {}", first.stderr);
    let second = run(&["simulate", "--config", config, "--seed", "6", "--out", out_b.to_str().unwrap()]);
    assert_eq!(second.code, 0, "simulate failed: {}", second.stderr);
    assert_ne!(
        read_bytes(&out_a.join("cvr.csv")),
        read_bytes(&out_b.join("cvr.csv")),
        "different seeds must change the records"
    );
}

#[test]
fn set_overrides_reach_the_simulation() {
    let tmp = tempfile::tempdir().expect("tempdir");
    let out_dir = tmp.path().join("out");
    let config = write_config(tmp.path(), &base_config(&out_dir));
    let result = run(&[
        "simulate",
        "--config",
        config.to_str().unwrap(),
        "--set",
        "electorate.n_voters=50",
    ]);
    assert_eq!(result.code, 0, "simulate failed: {}", result.stderr);
    let cvr = String::from_utf8(read_bytes(&out_dir.join("cvr.csv"))).expect("utf-8");
    assert_eq!(cvr.lines().count(), 51, "header plus one line per overridden voter");
}

#[test]
fn predict_needs_no_electorate_section() {
    let tmp = tempfile::tempdir().expect("tempdir");
    let out_dir = tmp.path().join("trends");
    let result = run(&["predict", "--out", out_dir.to_str().unwrap()]);
    assert_eq!(result.code, 0, "predict failed: {}", result.stderr);
    assert!(
        result.stdout.contains("setting,dimensionality,family,beta,trend"),
        "trend table header missing from stdout: {}",
        result.stdout
    );
    assert!(result.stdout.contains("case1,uni,reverse_s,,u_shaped"));
    assert!(result.stdout.contains("case2,multi,concave,2,constant"));
    let table = String::from_utf8(read_bytes(&out_dir.join("trends.csv"))).expect("utf-8");
    assert_eq!(table.lines().count(), 21, "header plus twenty trend rows");

    // A config without an electorate section is also enough.
    let minimal = json!({"output_dir": tmp.path().join("trends2").to_str().unwrap()});
    let config = write_config(tmp.path(), &minimal);
    let result = run(&["predict", "--config", config.to_str().unwrap()]);
    assert_eq!(result.code, 0, "predict with minimal config failed: {}", result.stderr);
    assert!(tmp.path().join("trends2").join("trends.csv").exists());
}

#[test]
fn unknown_config_key_exits_one_and_names_the_key() {
    let tmp = tempfile::tempdir().expect("tempdir");
    let out_dir = tmp.path().join("out");
    let config = write_config(tmp.path(), &base_config(&out_dir));
    let result = run(&[
        "simulate",
        "--config",
        config.to_str().unwrap(),
        "--set",
        "loss.alpa=2.0",
    ]);
    assert_eq!(result.code, 1, "stderr: {}", result.stderr);
    assert!(
        result.stderr.contains("alpa"),
        "error must name the offending key: {}",
        result.stderr
    );
}

#[test]
fn missing_cvr_exits_two_and_names_the_file() {
    let tmp = tempfile::tempdir().expect("tempdir");
    let out_dir = tmp.path().join("out");
    let config = write_config(tmp.path(), &base_config(&out_dir));
    let result = run(&["analyze", "--config", config.to_str().unwrap()]);
    assert_eq!(result.code, 2, "stderr: {}", result.stderr);
    assert!(
        result.stderr.contains("cvr.csv"),
        "error must name the missing file: {}",
        result.stderr
    );
}

#[test]
fn malformed_cvr_exits_two_with_the_line_number() {
    let tmp = tempfile::tempdir().expect("tempdir");
    let out_dir = tmp.path().join("out");
    std::fs::create_dir_all(&out_dir).expect("mkdir");
    let config = write_config(tmp.path(), &base_config(&out_dir));
    std::fs::write(
        out_dir.join("cvr.csv"),
        "voter_id,m1,m2,m3,dd_house,dr_a,dr_b,dr_c,dr_d,dr_e,dr_f\n\
         0,1,0,1,D,D,R,A,D,R,D\n\
         1,1,0,X,D,D,R,A,D,R,D\n",
    )
    .expect("cvr written");
    let result = run(&["analyze", "--config", config.to_str().unwrap()]);
    assert_eq!(result.code, 2, "stderr: {}", result.stderr);
    assert!(
        result.stderr.contains("line 3"),
        "error must carry the 1-based line number: {}",
        result.stderr
    );
}

#[test]
fn empty_extreme_group_exits_three() {
    let tmp = tempfile::tempdir().expect("tempdir");
    let out_dir = tmp.path().join("out");
    std::fs::create_dir_all(&out_dir).expect("mkdir");
    let mut config = base_config(&out_dir);
    config["electorate"]["n_measures"] = json!(1);
    config["analysis"] = json!({"case1": false});
    let config = write_config(tmp.path(), &config);
    // Every voter answers the single measure with 1, so group 0 is empty and
    // polarization is undefined in every cross-party race.
    let mut cvr = String::from("voter_id,m1,dd_house,dr_a,dr_b,dr_c,dr_d,dr_e,dr_f\n");
    for voter in 0..8 {
        cvr.push_str(&format!("{voter},1,D,D,R,A,D,R,D\n"));
    }
    std::fs::write(out_dir.join("cvr.csv"), cvr).expect("cvr written");
    let result = run(&["analyze", "--config", config.to_str().unwrap()]);
    assert_eq!(result.code, 3, "stderr: {}", result.stderr);
    assert!(
        result.stderr.contains("polarization is undefined"),
        "error must explain the precondition: {}",
        result.stderr
    );
}

#[test]
fn locked_output_directory_is_refused() {
    let tmp = tempfile::tempdir().expect("tempdir");
    let out_dir = tmp.path().join("out");
    std::fs::create_dir_all(&out_dir).expect("mkdir");
    std::fs::write(out_dir.join(".electorate-lab.lock"), "held\n").expect("lock written");
    let config = write_config(tmp.path(), &base_config(&out_dir));
    let result = run(&["simulate", "--config", config.to_str().unwrap()]);
    assert_eq!(result.code, 1, "stderr: {}", result.stderr);
    assert!(
        result.stderr.contains("in use"),
        "error must say the directory is claimed: {}",
        result.stderr
    );
}

#[test]
fn bad_thread_environment_exits_one() {
    let tmp = tempfile::tempdir().expect("tempdir");
    let out_dir = tmp.path().join("out");
    let config = write_config(tmp.path(), &base_config(&out_dir));
    let result = run_with_env(
        &["simulate", "--config", config.to_str().unwrap()],
        &[("ELECTORATE_LAB_THREADS", "many")],
    );
    assert_eq!(result.code, 1, "stderr: {}", result.stderr);
    assert!(
        result.stderr.contains("ELECTORATE_LAB_THREADS"),
        "error must name the environment variable: {}",
        result.stderr
    );
}

#[test]
fn equilibrium_and_classify_produce_their_tables() {
    let tmp = tempfile::tempdir().expect("tempdir");
    let out_dir = tmp.path().join("out");
    let mut config = base_config(&out_dir);
    config["analysis"] = json!({"equilibrium": true, "classify": true, "platform_points": 51});
    let config = write_config(tmp.path(), &config);
    let config = config.to_str().unwrap();

    let sim = run(&["simulate", "--config", config]);
    assert_eq!(sim.code, 0, "simulate failed: {}", sim.stderr);

    let eq = run(&["equilibrium", "--config", config]);
    assert_eq!(eq.code, 0, "equilibrium failed: {}", eq.stderr);
    let contests = String::from_utf8(read_bytes(&out_dir.join("contests.csv"))).expect("utf-8");
    assert!(contests.starts_with("p1,p2,share1,share2,winner\n"));
    assert_eq!(contests.lines().count(), 52, "header plus one sweep row per platform");
    assert!(out_dir.join("equilibria.csv").exists());

    let cls = run(&["classify", "--config", config]);
    assert_eq!(cls.code, 0, "classify failed: {}", cls.stderr);
    let table = String::from_utf8(read_bytes(&out_dir.join("classification.csv"))).expect("utf-8");
    assert!(
        table.starts_with("label,consistent_families\n"),
        "classification table malformed: {table}"
    );
}
