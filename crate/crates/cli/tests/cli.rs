//! End-to-end checks of the `lab` binary: exit codes, artifacts, determinism.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

const SHORT_DUMBBELL: &str = "\
schema = 1
dimension = 3
family = \"dumbbell\"
neck = 0.3
grid_n = 100
stop_q_ratio = 5
";

fn lab(root: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lab"))
        .env_remove("LAB_OUTPUT_DIR")
        .arg("--output-dir")
        .arg(root)
        .args(args)
        .output()
        .expect("lab binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

/// Runs the short dumbbell into a fresh root and returns (root, run dir).
fn short_run() -> (TempDir, std::path::PathBuf) {
    let root = TempDir::new().unwrap();
    let scenario = write(root.path(), "neck.toml", SHORT_DUMBBELL);
    let out = lab(root.path(), &["run", &scenario]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let dir = root.path().join("neck");
    (root, dir)
}

#[test]
fn run_help_lists_every_key_with_defaults() {
    let root = TempDir::new().unwrap();
    let out = lab(root.path(), &["run", "--help"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    for needle in ["grid_n          default 200", "cfl             default 0.4", "profile_stride  default 10", "pairs", "Unknown keys are rejected"] {
        assert!(text.contains(needle), "missing {needle:?} in\n{text}");
    }
}

#[test]
fn usage_errors_exit_two() {
    let root = TempDir::new().unwrap();
    assert_eq!(code(&lab(root.path(), &["frobnicate"])), 2);
    assert_eq!(code(&lab(root.path(), &["run", "/nonexistent/scenario.toml"])), 2);
    assert_eq!(code(&lab(root.path(), &["verify", "/nonexistent/run"])), 2);

    let bad = write(root.path(), "bad.toml", &SHORT_DUMBBELL.replace("grid_n = 100", "grid_n = 100\ncfl = 1.5"));
    let out = lab(root.path(), &["run", &bad]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("cfl"), "{}", stderr(&out));

    let unknown = write(root.path(), "unknown.toml", &format!("{SHORT_DUMBBELL}colour = 3\n"));
    let out = lab(root.path(), &["run", &unknown]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("colour"), "{}", stderr(&out));
}

#[test]
fn gallery_prints_cylinder_gap() {
    let root = TempDir::new().unwrap();
    let out = lab(root.path(), &["gallery"]);
    assert_eq!(code(&out), 0);
    // S²×ℝ: gap √2/2
    assert!(stdout(&out).contains("0.7071067812"), "{}", stdout(&out));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(root.path().join("gallery.json")).unwrap()).unwrap();
    assert!(json.as_array().unwrap().len() >= 7);
}

#[test]
fn gh_of_three_and_two_points_on_a_line() {
    let root = TempDir::new().unwrap();
    let a = write(root.path(), "a.csv", "# {0, 1/2, 1}\n0,0.5,1\n0.5,0,0.5\n1,0.5,0\n");
    let b = write(root.path(), "b.csv", "0,1\n1,0\n");
    let out = lab(root.path(), &["gh", &a, &b]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(stdout(&out).lines().next().unwrap().trim(), "0.25");

    let six = (0..6).map(|i| (0..6).map(|j| format!("{}", (i as i32 - j as i32).abs())).collect::<Vec<_>>().join(",")).collect::<Vec<_>>().join("\n");
    let c = write(root.path(), "c.csv", &six);
    assert_eq!(code(&lab(root.path(), &["gh", &a, &c])), 2);
}

#[test]
fn run_then_verify_passes_and_tampering_fails() {
    let (root, dir) = short_run();
    for name in ["trace.csv", "profiles.csv", "functionals.csv", "dyadic.csv", "ledger.csv", "gap_report.json", "plot_products.py", "manifest.json"] {
        assert!(dir.join(name).is_file(), "missing {name}");
    }
    let run_dir = dir.to_str().unwrap();
    let out = lab(root.path(), &["verify", run_dir]);
    assert_eq!(code(&out), 0, "{}{}", stdout(&out), stderr(&out));
    assert!(dir.join("verify_report.json").is_file());

    // Q ten times larger breaks the doubling bound against the stored dyadic levels
    let trace = fs::read_to_string(dir.join("trace.csv")).unwrap();
    let mut lines = trace.lines();
    let header = lines.next().unwrap();
    let q_col = header.split(',').position(|h| h == "Q").unwrap();
    let mut tampered = vec![header.to_owned()];
    for line in lines {
        let mut cells: Vec<String> = line.split(',').map(str::to_owned).collect();
        cells[q_col] = format!("{}", cells[q_col].parse::<f64>().unwrap() * 10.0);
        tampered.push(cells.join(","));
    }
    fs::write(dir.join("trace.csv"), tampered.join("\n") + "\n").unwrap();
    let out = lab(root.path(), &["verify", run_dir]);
    assert_eq!(code(&out), 1, "{}{}", stdout(&out), stderr(&out));
    assert!(stderr(&out).contains("doubling"), "{}", stderr(&out));

    fs::remove_file(dir.join("dyadic.csv")).unwrap();
    assert_eq!(code(&lab(root.path(), &["verify", run_dir])), 2);
}

#[test]
fn reruns_give_identical_digests() {
    let digests = |dir: &Path| -> Vec<(String, String)> {
        let m: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap();
        m["artifacts"]
            .as_array()
            .unwrap()
            .iter()
            .map(|a| (a["path"].as_str().unwrap().to_owned(), a["sha256"].as_str().unwrap().to_owned()))
            .collect()
    };
    let (_a, dir_a) = short_run();
    let (_b, dir_b) = short_run();
    let (da, db) = (digests(&dir_a), digests(&dir_b));
    assert!(!da.is_empty());
    assert_eq!(da, db);
}

#[test]
fn output_dir_comes_from_the_environment() {
    let root = TempDir::new().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_lab"))
        .env("LAB_OUTPUT_DIR", root.path())
        .arg("gallery")
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    assert!(root.path().join("gallery.json").is_file());
}
