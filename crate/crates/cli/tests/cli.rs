use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use owc_core::scene::builtin_scenario;

fn owc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_owc"))
        .args(args)
        .env("OWC_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Two-rack slice of the data-centre scenario, written to `dir/name`.
fn small_config(dir: &Path, name: &str, threshold_db: f64) -> PathBuf {
    let mut cfg = builtin_scenario("datacentre").unwrap();
    cfg.stations.truncate(2);
    cfg.sinr_threshold_db = threshold_db;
    let path = dir.join(name);
    std::fs::write(&path, cfg.to_toml_string()).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn trace_uses_cache_until_config_changes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), "dc.toml", 15.6);
    let out = dir.path().join("out");

    let first = owc(&["trace", "--config", s(&cfg), "--out", s(&out)]);
    assert!(first.status.success(), "{}", stderr(&first));
    let cached = std::fs::read(out.join("channel.json")).unwrap();

    let again = owc(&["trace", "--config", s(&cfg), "--out", s(&out)]);
    assert!(again.status.success());
    assert!(stderr(&again).contains("up to date"), "{}", stderr(&again));
    assert!(!stderr(&again).contains("traced"));

    small_config(dir.path(), "dc.toml", 12.0);
    let edited = owc(&["trace", "--config", s(&cfg), "--out", s(&out)]);
    assert!(edited.status.success());
    assert!(stderr(&edited).contains("traced"), "{}", stderr(&edited));
    assert_ne!(std::fs::read(out.join("channel.json")).unwrap(), cached);
}

#[test]
fn allocate_from_cache_equals_allocate_with_retrace() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), "dc.toml", 15.6);
    let a = dir.path().join("a");
    let b = dir.path().join("b");

    assert!(owc(&["trace", "--config", s(&cfg), "--out", s(&a)])
        .status
        .success());
    let cached = owc(&["allocate", "--config", s(&cfg), "--out", s(&a)]);
    assert!(cached.status.success(), "{}", stderr(&cached));
    assert!(stderr(&cached).contains("up to date"));
    let fresh = owc(&["allocate", "--config", s(&cfg), "--out", s(&b), "--no-cache"]);
    assert!(fresh.status.success());

    for f in ["result.json", "report.csv", "report.json", "sinr.svg"] {
        assert_eq!(
            std::fs::read(a.join(f)).unwrap(),
            std::fs::read(b.join(f)).unwrap(),
            "{f} differs"
        );
    }
    let stdout = String::from_utf8_lossy(&cached.stdout);
    assert_eq!(stdout.lines().filter(|l| l.starts_with("rack")).count(), 2);
}

#[test]
fn export_only_writes_the_lp_file_and_nothing_else() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), "dc.toml", 15.6);
    let out = dir.path().join("out");
    let o = owc(&[
        "allocate",
        "--config",
        s(&cfg),
        "--out",
        s(&out),
        "--solver",
        "export-only",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let lp = std::fs::read_to_string(out.join("model.lp")).unwrap();
    assert!(lp.contains("Maximize") && lp.trim_end().ends_with("End"));
    assert!(!out.join("result.json").exists());
    assert!(!out.join("report.csv").exists());

    let bad = owc(&[
        "allocate",
        "--config",
        s(&cfg),
        "--out",
        s(&out),
        "--solver",
        "export-only",
        "--alpha",
        "1",
    ]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(stderr(&bad).contains("big-M"));
}

#[test]
fn report_regenerates_from_a_stored_result() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), "dc.toml", 15.6);
    let out = dir.path().join("out");
    assert!(owc(&[
        "allocate",
        "--config",
        s(&cfg),
        "--out",
        s(&out),
        "--formats",
        "json"
    ])
    .status
    .success());
    let result = out.join("result.json");
    let json = std::fs::read(out.join("report.json")).unwrap();

    let r1 = dir.path().join("r1");
    let o = owc(&["report", s(&result), "--out", s(&r1), "--formats", "json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let files: Vec<_> = std::fs::read_dir(&r1).unwrap().collect();
    assert_eq!(files.len(), 1);
    assert_eq!(std::fs::read(r1.join("report.json")).unwrap(), json);

    let r2 = dir.path().join("r2");
    assert!(
        owc(&["report", s(&result), "--out", s(&r2), "--formats", "csv,svg"])
            .status
            .success()
    );
    let mut names: Vec<String> = std::fs::read_dir(&r2)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names, ["bandwidth.svg", "rate.svg", "report.csv", "sinr.svg"]);
}

#[test]
fn infeasible_instances_exit_with_status_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), "dc.toml", 60.0);
    let out = dir.path().join("out");
    let o = owc(&["allocate", "--config", s(&cfg), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("SINR threshold"));
    assert!(!out.join("report.csv").exists());

    let again = owc(&["report", s(&out.join("result.json")), "--formats", "csv"]);
    assert_eq!(again.status.code(), Some(2));
}

#[test]
fn errors_exit_with_status_1() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.json");
    let o = owc(&["report", s(&missing)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("missing.json"));

    let o = owc(&["trace", "--scenario", "attic", "--out", s(dir.path())]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("office, cabin, datacentre"));

    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "name = \"x\"\nsinr_threshold_db = \"high\"\n").unwrap();
    let o = owc(&["trace", "--config", s(&bad), "--out", s(&dir.path().join("o"))]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));

    let cfg = small_config(dir.path(), "dc.toml", 15.6);
    let o = owc(&["trace", "--config", s(&cfg), "--out", s(dir.path())]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("must differ"));

    let corrupt = dir.path().join("result.json");
    std::fs::write(&corrupt, "{\"format\": 3}").unwrap();
    assert_eq!(owc(&["report", s(&corrupt)]).status.code(), Some(1));
}
