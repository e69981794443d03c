//! End-to-end CLI checks: exit codes, artifact layout, and determinism of the
//! CSV bodies across worker counts and re-runs.

use std::path::Path;
use std::process::Command;

fn henon() -> Command {
    Command::new(env!("CARGO_BIN_EXE_henon"))
}

/// A grid small enough to finish in seconds but mixed enough to build a
/// ground truth: spans the full stability basin at desk map defaults with a
/// horizon long enough for the chaotic LE cluster to separate.
fn write_small_config(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("small.toml");
    std::fs::write(
        &path,
        "[grid]\nnx = 20\nny = 20\n\n[run]\nn_max = 100000\nest_n_min = 100\nest_n_max = 10000\n",
    )
    .unwrap();
    path
}

#[test]
fn report_pipeline_produces_all_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_small_config(dir.path());
    let out = dir.path().join("out");
    let status = henon()
        .args(["report", "--preset", "quick"])
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .args(["--threads", "2"])
        .status()
        .unwrap();
    assert!(status.success());
    for name in [
        "survival.csv",
        "le.csv",
        "fli.csv",
        "fli_wb.csv",
        "megno.csv",
        "gali4.csv",
        "rem.csv",
        "fma.csv",
        "gt.csv",
        "summary.json",
        "manifest.json",
        "report_le.csv",
        "report_fma.csv",
        "hist_le.csv",
    ] {
        assert!(out.join(name).exists(), "missing {name}");
    }
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert!(summary["performance_estimates"].is_object());
    assert!(summary["thresholds"].is_object());
    assert!(summary["sensitivities"].is_object());
    // Survival bodies use \n only and 17-significant-digit floats.
    let text = std::fs::read_to_string(out.join("survival.csv")).unwrap();
    assert!(!text.contains('\r'));
    assert!(text.lines().nth(1).unwrap().contains("e0") || text.lines().nth(1).unwrap().contains("e-"));
}

#[test]
fn unknown_preset_and_indicator_exit_2() {
    let status = henon().args(["survival", "--preset", "galactic"]).status().unwrap();
    assert_eq!(status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let status = henon()
        .args(["survival", "--preset", "quick", "--indicators", "le,warp"])
        .arg("--out")
        .arg(dir.path().join("o"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn invalid_config_file_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "[run]\nn_max = 10\n").unwrap(); // n_max too small
    let status = henon()
        .args(["survival", "--preset", "quick"])
        .arg("--config")
        .arg(&bad)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn all_regular_grid_fails_ground_truth_with_exit_3() {
    // A tiny grid deep inside the stable core: every orbit is regular, so
    // the LE distribution stays unimodal and GT construction must abort.
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("regular.toml");
    std::fs::write(
        &cfg,
        "[map]\nepsilon = 0.0\nmu = 0.0\n\n[grid]\nnx = 5\nny = 5\nx_min = 0.01\nx_max = 0.05\ny_min = 0.01\ny_max = 0.05\n\n[run]\nn_max = 5000\nest_n_min = 100\nest_n_max = 1000\n",
    )
    .unwrap();
    let status = henon()
        .args(["ground-truth", "--preset", "quick"])
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("o"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(3));
}

#[test]
fn unwritable_out_dir_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("blocked");
    std::fs::write(&blocker, b"file, not dir").unwrap();
    let status = henon()
        .args(["survival", "--preset", "quick"])
        .arg("--out")
        .arg(&blocker)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(4));
}

#[test]
fn csv_bodies_identical_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_small_config(dir.path());
    let mut bodies: Vec<Vec<(String, Vec<u8>)>> = Vec::new();
    for threads in ["1", "4", "8"] {
        let out = dir.path().join(format!("out_{threads}"));
        let status = henon()
            .args(["report", "--preset", "quick", "--threads", threads])
            .arg("--config")
            .arg(&cfg)
            .arg("--out")
            .arg(&out)
            .status()
            .unwrap();
        assert!(status.success(), "threads={threads}");
        let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(&out)
            .unwrap()
            .map(|e| {
                let e = e.unwrap();
                (
                    e.file_name().to_string_lossy().into_owned(),
                    std::fs::read(e.path()).unwrap(),
                )
            })
            .collect();
        files.sort();
        bodies.push(files);
    }
    assert_eq!(bodies[0].len(), bodies[1].len());
    for ((name1, b1), (name2, b2)) in bodies[0].iter().zip(&bodies[1]) {
        assert_eq!(name1, name2);
        assert_eq!(b1, b2, "file {name1} differs between 1 and 4 workers");
    }
    for ((name1, b1), (name2, b2)) in bodies[0].iter().zip(&bodies[2]) {
        assert_eq!(name1, name2);
        assert_eq!(b1, b2, "file {name1} differs between 1 and 8 workers");
    }
}

#[test]
fn rerun_reproduces_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_small_config(dir.path());
    let out = dir.path().join("out");
    for _ in 0..2 {
        // Wipe outputs so the second run recomputes rather than loads.
        let _ = std::fs::remove_dir_all(&out);
        let status = henon()
            .args(["report", "--preset", "quick", "--threads", "2"])
            .arg("--config")
            .arg(&cfg)
            .arg("--out")
            .arg(&out)
            .status()
            .unwrap();
        assert!(status.success());
        let snapshot = dir.path().join("first_run");
        if !snapshot.exists() {
            std::fs::create_dir_all(&snapshot).unwrap();
            for e in std::fs::read_dir(&out).unwrap() {
                let e = e.unwrap();
                std::fs::copy(e.path(), snapshot.join(e.file_name())).unwrap();
            }
        } else {
            for e in std::fs::read_dir(&out).unwrap() {
                let e = e.unwrap();
                let a = std::fs::read(e.path()).unwrap();
                let b = std::fs::read(snapshot.join(e.file_name())).unwrap();
                assert_eq!(a, b, "{:?} differs between reruns", e.file_name());
            }
        }
    }
}

#[test]
fn histograms_subcommand_with_checkpoint_subset() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_small_config(dir.path());
    let out = dir.path().join("out");
    let status = henon()
        .args(["histograms", "--preset", "quick", "--threads", "2"])
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .args(["--indicators", "rem,gali4", "--at", "100,100000"])
        .status()
        .unwrap();
    assert!(status.success());
    assert!(out.join("hist_rem.csv").exists());
    assert!(out.join("hist_gali4.csv").exists());
    assert!(!out.join("hist_le.csv").exists());
    let text = std::fs::read_to_string(out.join("hist_rem.csv")).unwrap();
    let ns: std::collections::BTreeSet<&str> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap())
        .collect();
    assert!(ns.contains("100"));
    assert!(ns.contains("100000"));
    assert_eq!(ns.len(), 2);
}
