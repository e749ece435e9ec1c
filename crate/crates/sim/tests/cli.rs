use std::path::PathBuf;
use std::process::{Command, Output};

fn repo(path: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..").join(path)
}

fn cocompute(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_cocompute"));
    cmd.args(args);
    if let Some(n) = threads {
        cmd.env("RAYON_NUM_THREADS", n);
    }
    cmd.output().unwrap()
}

fn config() -> String {
    repo("configs/default.json").display().to_string()
}

fn profile() -> String {
    repo("configs/three_epoch.profile").display().to_string()
}

#[test]
fn solve_prints_schedule() {
    let out = cocompute(&["solve", "--config", &config(), "--profile", &profile(), "--offload", "7e5"], None);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<Vec<f64>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    let cumulative: Vec<f64> = rows.iter().map(|r| r[1]).collect();
    let want = [0.0, 5e5, 6.2e5, 7e5];
    assert_eq!(cumulative.len(), want.len());
    for (a, b) in cumulative.iter().zip(want) {
        assert!((a - b).abs() < 1e-3, "{a} vs {b}");
    }
    assert!((rows[0][2] - 1e7).abs() < 1e-3);
}

#[test]
fn excess_offload_is_infeasible() {
    let out = cocompute(&["solve", "--config", &config(), "--profile", &profile(), "--offload", "8e5"], None);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn tunnel_for_bursty_arrivals() {
    let dir = tempfile::tempdir().unwrap();
    let arrivals = dir.path().join("arrivals.csv");
    std::fs::write(&arrivals, "time_s,size_bits\n0,2e5\n0.04,1e5\n").unwrap();
    let out = cocompute(
        &[
            "tunnel",
            "--config",
            &config(),
            "--profile",
            &profile(),
            "--arrivals",
            arrivals.to_str().unwrap(),
            "--theta",
            "0.5",
        ],
        None,
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let last = text.lines().last().unwrap();
    let fields: Vec<f64> = last.split(',').map(|x| x.parse().unwrap()).collect();
    assert!((fields[1] - 1.5e5).abs() < 1e-6 && (fields[2] - 1.5e5).abs() < 1e-6);
}

#[test]
fn missing_field_names_it() {
    let dir = tempfile::tempdir().unwrap();
    let mut json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(config()).unwrap()).unwrap();
    json.as_object_mut().unwrap().remove("bandwidth_hz");
    let path = dir.path().join("broken.json");
    std::fs::write(&path, json.to_string()).unwrap();
    let out = cocompute(&["oneshot", "--config", path.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bandwidth_hz"));
}

#[test]
fn same_seed_same_bytes_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    for experiment in ["oneshot", "buffer", "bursty"] {
        let mut outputs = Vec::new();
        for threads in ["1", "4"] {
            let path = dir.path().join(format!("{experiment}-{threads}.csv"));
            let out = cocompute(
                &[experiment, "--config", &config(), "--trials", "40", "--seed", "11", "--out", path.to_str().unwrap()],
                Some(threads),
            );
            assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
            outputs.push(std::fs::read(&path).unwrap());
        }
        assert_eq!(outputs[0], outputs[1], "{experiment}");
        assert!(!outputs[0].is_empty());
    }
}

#[test]
fn different_seeds_differ() {
    let run = |seed: &str| cocompute(&["oneshot", "--config", &config(), "--trials", "40", "--seed", seed], None).stdout;
    assert_ne!(run("1"), run("2"));
}
