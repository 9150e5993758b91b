use std::path::Path;
use std::process::{Command, Output};

use molbo::objectives::RunHistory;

const BIN: &str = env!("CARGO_BIN_EXE_molbo");

fn molbo(dir: &Path, args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .current_dir(dir)
        .env_remove("MOLBO_OUTPUT_ROOT")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn small_config(dir: &Path, out: &str) -> std::path::PathBuf {
    let path = dir.join(format!("{out}.toml"));
    let text = format!(
        r#"
[run]
rng_seed = 2
n_init = 4
bo_iterations = 3
total_budget = 10
output_dir = "{}"

[ga]
population_size = 15
offspring_size = 15
generations = 2
"#,
        dir.join(out).display()
    );
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn fp_compare_prints_both_similarities() {
    let tmp = tempfile::tempdir().unwrap();
    let o = molbo(tmp.path(), &["fp-compare", "CCCCC", "CCCCCCCCCCCCCCCCCCCC"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let field = |name: &str| -> String {
        text.lines()
            .find_map(|l| l.strip_prefix(&format!("{name}\t")))
            .unwrap_or_else(|| panic!("{name} missing in {text}"))
            .to_string()
    };
    let count: f64 = field("count_tanimoto").parse().unwrap();
    let binary: f64 = field("binary_tanimoto").parse().unwrap();
    assert!(count < 1.0 && binary >= count);
    assert_eq!(field("same_molecule"), "false");
}

#[test]
fn fp_prints_header() {
    let tmp = tempfile::tempdir().unwrap();
    let o = molbo(tmp.path(), &["fp", "c1ccccc1O", "--mode", "binary"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("# formula\tC6H6O"));
}

#[test]
fn demo1d_writes_sweeps_and_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let o = molbo(tmp.path(), &["demo1d", "--out", "sweeps"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let text = stdout(&o);
    assert!(!text.contains("FAIL"));
    assert_eq!(std::fs::read_dir(tmp.path().join("sweeps")).unwrap().count(), 6);
}

#[test]
fn input_errors_exit_one() {
    let tmp = tempfile::tempdir().unwrap();
    let cases: &[&[&str]] = &[
        &["run", "--config", "missing.toml"],
        &["no-such-command"],
        &["fp", "C1CC"],
        &["fp", "CCO", "--radius", "9"],
        &["bench", "--config", "missing.toml", "--seeds", "3..1"],
        &["report", "empty"],
    ];
    std::fs::create_dir(tmp.path().join("empty")).unwrap();
    for args in cases {
        let o = molbo(tmp.path(), args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
    std::fs::write(tmp.path().join("bad.toml"), "[run]\nbogus = 1\n").unwrap();
    let o = molbo(tmp.path(), &["run", "--config", "bad.toml"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("bogus"));
}

#[test]
fn run_writes_outputs_and_report_reads_them() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path(), "out");
    let o = molbo(tmp.path(), &["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let out = tmp.path().join("out");
    for f in ["config.resolved", "history.jsonl", "rounds.jsonl", "summary.tsv"] {
        assert!(out.join(f).is_file(), "{f}");
    }
    let h = RunHistory::read_jsonl(&out.join("history.jsonl")).unwrap();
    assert_eq!(h.len(), 10);
    assert_eq!(std::fs::read_to_string(out.join("rounds.jsonl")).unwrap().lines().count(), 3);

    // The resolved config reproduces the run.
    let again = molbo(tmp.path(), &["run", "--config", out.join("config.resolved").to_str().unwrap()]);
    assert_eq!(again.status.code(), Some(0));

    let r = molbo(tmp.path(), &["report", out.to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(0));
    assert!(stdout(&r).contains("celecoxib_rediscovery"));
}

#[test]
fn output_root_override() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("rel.toml");
    std::fs::write(
        &path,
        "[run]\nn_init = 3\nbo_iterations = 1\ntotal_budget = 5\noutput_dir = \"nested/run\"\n\n[ga]\npopulation_size = 10\noffspring_size = 10\ngenerations = 1\n",
    )
    .unwrap();
    let root = tmp.path().join("root");
    let o = Command::new(BIN)
        .args(["run", "--config", path.to_str().unwrap()])
        .current_dir(tmp.path())
        .env("MOLBO_OUTPUT_ROOT", &root)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(root.join("nested/run/history.jsonl").is_file());
}

#[test]
fn shipped_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut n = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            let cfg = molbo::config::RunConfigFile::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            cfg.bo_config().unwrap();
            n += 1;
        }
    }
    assert!(n >= 2);
}
