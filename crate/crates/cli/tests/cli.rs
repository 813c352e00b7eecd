use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn melanie(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_melanie"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("experiment.toml");
    std::fs::write(&path, body).unwrap();
    path
}

fn line_count(path: &Path) -> usize {
    std::fs::read_to_string(path).unwrap().lines().count()
}

const ABRUPT: &str = r#"
[experiment]
runs = 3
seed = 5

[scenario]
kind = "abrupt"
class_size = 50
seed = 7

[[approach]]
name = "with-sources"
kind = "melanie"
size = 5

[[approach]]
name = "no-sources"
kind = "melanie"
size = 5
sources = "none"

[[approach]]
name = "dwm"
kind = "dwm"
learner = "naive_bayes"
"#;

#[test]
fn generate_no_drift_layout_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[scenario]\nkind = \"no_drift\"\nclass_size = 50\nseed = 4\n\n[[approach]]\nname = \"m\"\nkind = \"melanie\"\n",
    );
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = melanie(&["generate", "--config", arg(&cfg), "--out", arg(out)]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    // header + rows
    assert_eq!(line_count(&a.join("source_1.csv")), 10_001);
    assert_eq!(line_count(&a.join("source_2.csv")), 10_001);
    assert_eq!(line_count(&a.join("target.csv")), 101);
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(a.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["drift_points"], serde_json::json!([]));
    assert_eq!(manifest["seed"], 4);
    for f in ["source_1.csv", "source_2.csv", "target.csv", "manifest.json"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn generate_abrupt_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[scenario]\nkind = \"abrupt\"\nclass_size = 500\n\n[[approach]]\nname = \"m\"\nkind = \"melanie\"\n",
    );
    let out = dir.path().join("gen");
    assert!(melanie(&["generate", "--config", arg(&cfg), "--out", arg(&out), "--seed", "9"]).status.success());
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["drift_points"], serde_json::json!([1000]));
    assert_eq!(manifest["seed"], 9);
    assert_eq!(line_count(&out.join("target.csv")), 2001);
}

#[test]
fn run_stats_plot_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), ABRUPT);
    let out = dir.path().join("out");
    let o = melanie(&["run", "--config", arg(&cfg), "--out", arg(&out), "--jobs", "2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let results = out.join("results.csv");
    let text = std::fs::read_to_string(&results).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "scenario,approach,run,seq,correct,acc_running,acc_window"
    );
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    let count = |name: &str| rows.iter().filter(|r| r[1] == name).count();
    // 3 runs × 200 target examples for the stochastic approaches, one run for DWM
    assert_eq!(count("with-sources"), 600);
    assert_eq!(count("no-sources"), 600);
    assert_eq!(count("dwm"), 200);
    assert!(rows.iter().all(|r| r[0] == "abrupt_50" && r[5].len() == 8 && r[6].len() == 8));
    // approach blocks are contiguous
    let firsts: Vec<&str> = rows.iter().map(|r| r[1]).collect::<Vec<_>>().chunk_by(|a, b| a == b).map(|c| c[0]).collect();
    assert_eq!(firsts, vec!["with-sources", "no-sources", "dwm"]);
    // nothing but the final files in the output directory
    let mut names: Vec<String> = std::fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names, vec!["grid_summary.csv", "metadata.json", "results.csv"]);

    // same config and seed: byte-identical results
    let again = dir.path().join("again");
    assert!(melanie(&["run", "--config", arg(&cfg), "--out", arg(&again), "--jobs", "1"]).status.success());
    assert_eq!(std::fs::read(&results).unwrap(), std::fs::read(again.join("results.csv")).unwrap());

    let o = melanie(&["stats", arg(&results)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let ranks = std::fs::read_to_string(out.join("ranks.csv")).unwrap();
    assert!(ranks.starts_with("scenario,approach,mean_rank,chi2F,CD,bold,note\n"));
    assert_eq!(ranks.lines().count(), 4);

    let o = melanie(&["plot", arg(&results)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let svg = std::fs::read_to_string(out.join("abrupt_50.svg")).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 3);
    assert_eq!(svg.matches(r#"class="legend""#).count(), 1);
    assert!(svg.contains(r#"data-index="100""#));
}

#[test]
fn grid_summary_marks_one_best_point() {
    let dir = tempfile::tempdir().unwrap();
    let body = ABRUPT.replace("name = \"no-sources\"", "name = \"grid\"").replace(
        "sources = \"none\"",
        "sources = \"none\"\ntheta = [0.5, 0.9]",
    );
    let cfg = write_config(dir.path(), &body);
    let out = dir.path().join("out");
    assert!(melanie(&["run", "--config", arg(&cfg), "--out", arg(&out)]).status.success());
    let summary = std::fs::read_to_string(out.join("grid_summary.csv")).unwrap();
    let grid: Vec<&str> = summary.lines().filter(|l| l.contains(",grid,")).collect();
    assert_eq!(grid.len(), 2);
    assert_eq!(grid.iter().filter(|l| l.ends_with(",true")).count(), 1);
    // stats ranks only the best grid point by default
    assert!(melanie(&["stats", arg(&out.join("results.csv"))]).status.success());
    assert_eq!(std::fs::read_to_string(out.join("ranks.csv")).unwrap().lines().count(), 4);
    assert!(melanie(&["stats", arg(&out.join("results.csv")), "--all-grid-points"]).status.success());
    assert_eq!(std::fs::read_to_string(out.join("ranks.csv")).unwrap().lines().count(), 5);
}

#[test]
fn csv_scenario_run() {
    let dir = tempfile::tempdir().unwrap();
    let mut data = String::from("a,b,day,label\n");
    for i in 0..120 {
        let up = i % 3 != 0;
        let (a, b) = if up { (1.0 + (i % 7) as f64 * 0.1, 2.0) } else { (-1.0, -2.0 - (i % 5) as f64 * 0.1) };
        data.push_str(&format!("{a},{b},{},{}\n", i / 60, if up { "up" } else { "down" }));
    }
    std::fs::write(dir.path().join("stream.csv"), data).unwrap();
    let cfg = write_config(
        dir.path(),
        r#"
[experiment]
runs = 2
metric = "window"

[scenario]
kind = "csv"
path = "stream.csv"
features = ["a", "b"]
label = "label"
label_values = ["up", "down"]
group_column = "day"
source_fraction = 0.6

[[approach]]
name = "m"
kind = "melanie"
learner = "naive_bayes"
"#,
    );
    let out = dir.path().join("out");
    let o = melanie(&["run", "--config", arg(&cfg), "--out", arg(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    // 120 rows, 72 to the source, 48 target examples × 2 runs
    assert_eq!(line_count(&out.join("results.csv")), 1 + 2 * 48);
    let o = melanie(&["generate", "--config", arg(&cfg), "--out", arg(&out)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn config_errors_exit_2_with_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &ABRUPT.replace("size = 5\nsources", "size = 5\ntheta = 2.0\nsources"));
    let o = melanie(&["run", "--config", arg(&cfg), "--out", arg(&dir.path().join("out"))]);
    assert_eq!(o.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&o.stderr);
    assert!(stderr.contains("line 20"), "{stderr}");
    assert!(!dir.path().join("out").exists());

    let o = melanie(&["run", "--config", arg(&dir.path().join("missing.toml"))]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn data_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[scenario]\nkind = \"csv\"\npath = \"nope.csv\"\nfeatures = [\"a\"]\nlabel = \"y\"\nlabel_values = [\"p\", \"q\"]\nsplit = \"prefix\"\nsource_fraction = 0.5\n\n[[approach]]\nname = \"m\"\nkind = \"melanie\"\n",
    );
    let o = melanie(&["run", "--config", arg(&cfg), "--out", arg(&dir.path().join("out"))]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));

    let bad = dir.path().join("results.csv");
    std::fs::write(&bad, "scenario,approach,run,seq,correct,acc_running,acc_window\ns,a,0,0,1,oops,1.0\n").unwrap();
    assert_eq!(melanie(&["stats", arg(&bad)]).status.code(), Some(3));
    assert_eq!(melanie(&["plot", arg(&bad)]).status.code(), Some(3));
}

#[test]
fn shipped_configs_parse() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let dir = tempfile::tempdir().unwrap();
    for name in ["abrupt_50.toml", "no_drift_grid.toml"] {
        let o = melanie(&[
            "generate",
            "--config",
            arg(&root.join(name)),
            "--out",
            arg(&dir.path().join(name)),
        ]);
        assert!(o.status.success(), "{name}: {}", String::from_utf8_lossy(&o.stderr));
    }
}
