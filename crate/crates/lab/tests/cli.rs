use std::path::Path;

use dtn_lab::cli::{run, EXIT_ERROR, EXIT_FAIL, EXIT_PASS};
use dtn_lab::io::read_results;

const STRUCTURE: &str = r#"
[[scenario]]
id = "sq"
domain = { kind = "square" }
coefficients = { preset = "rotated_anisotropic", theta = 0.5, lambda = 4.0 }
levels = [0.125]
criteria = ["structure"]
"#;

const BILINEAR: &str = r#"
[[scenario]]
id = "sq-random"
domain = { kind = "square" }
coefficients = { preset = "scalar_smooth", m = 1, omega = 2.0 }
levels = [0.1, 0.05]
samples = 3
seed = 17
"#;

fn invoke(dir: &Path, sub: &str, config: &str, extra: &[&str]) -> i32 {
    let path = dir.join("run.toml");
    std::fs::write(&path, config).unwrap();
    let out = dir.join("out");
    let mut argv = vec!["dtn-lab".to_string(), sub.into(), "--config".into(), path.display().to_string()];
    argv.extend(["--out".into(), out.display().to_string()]);
    argv.extend(extra.iter().map(|s| s.to_string()));
    run(argv)
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(invoke(dir.path(), "spectrum", STRUCTURE, &[]), EXIT_PASS);
    let out = dir.path().join("out");
    assert!(out.join("results.csv").exists());
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["passed"], true);

    let strict = format!("[thresholds]\nmin_form = -1.0\n{STRUCTURE}");
    assert_eq!(invoke(dir.path(), "spectrum", &strict, &[]), EXIT_FAIL);

    let empty = STRUCTURE.replace("levels = [0.125]", "levels = []");
    assert_eq!(invoke(dir.path(), "spectrum", &empty, &[]), EXIT_ERROR);
    let ragged = STRUCTURE.replace("levels = [0.125]", "levels = [0.125, 0.05]");
    assert_eq!(invoke(dir.path(), "spectrum", &ragged, &[]), EXIT_ERROR);
    assert_eq!(invoke(dir.path(), "no-such-command", STRUCTURE, &[]), EXIT_ERROR);
    assert_eq!(run(["dtn-lab", "--help"]), EXIT_PASS);
    assert_eq!(run(["dtn-lab", "spectrum", "--config", "/nonexistent/run.toml"]), EXIT_ERROR);
}

#[test]
fn matrix_dumps_are_written() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(invoke(dir.path(), "spectrum", STRUCTURE, &["--dump-matrices"]), EXIT_PASS);
    let dumps: Vec<_> = std::fs::read_dir(dir.path().join("out/matrices")).unwrap().collect();
    assert!(!dumps.is_empty());
}

#[test]
fn results_are_deterministic_across_thread_counts() {
    let csv = |threads: &str| {
        let dir = tempfile::tempdir().unwrap();
        let code = invoke(dir.path(), "bilinear", BILINEAR, &["--threads", threads]);
        assert_ne!(code, EXIT_ERROR);
        std::fs::read(dir.path().join("out/results.csv")).unwrap()
    };
    let first = csv("1");
    assert_eq!(first, csv("1"));
    assert_eq!(first, csv("2"));

    let dir = tempfile::tempdir().unwrap();
    invoke(dir.path(), "bilinear", BILINEAR, &["--threads", "1", "--seed", "99"]);
    let reseeded = std::fs::read(dir.path().join("out/results.csv")).unwrap();
    assert_ne!(first, reseeded);
    assert!(!read_results(&dir.path().join("out/results.csv")).unwrap().is_empty());
}
