use std::path::Path;
use std::process::{Command, Output};

const CONFIG: &str = "\
# small lake
records=4000
files=100
value_range=500
queries=15
entries_per_file=200
";

fn lakecover(store: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lakecover"))
        .env_remove("LAKECOVER_LATENCY_US")
        .env("LAKECOVER_STORE", store)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn setup(dir: &Path) -> (std::path::PathBuf, String) {
    let cfg = dir.join("lake.conf");
    std::fs::write(&cfg, CONFIG).unwrap();
    let store = dir.join("store");
    let c = cfg.to_str().unwrap().to_string();
    for cmd in ["gen", "index"] {
        let o = lakecover(&store, &[cmd, "-c", &c]);
        assert!(o.status.success(), "{cmd}: {}", String::from_utf8_lossy(&o.stderr));
    }
    (store, c)
}

#[test]
fn pipeline_reports_are_reproducible() {
    let mut reports = Vec::new();
    for _ in 0..2 {
        let dir = tempfile::tempdir().unwrap();
        let (store, cfg) = setup(dir.path());
        let report = dir.path().join("r.tsv");
        let o = lakecover(
            &store,
            &["run", "-c", &cfg, "--mode", "indexed", "--no-elapsed", "--report", report.to_str().unwrap()],
        );
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        assert!(stdout(&o).contains("read reduction"));
        reports.push(std::fs::read_to_string(&report).unwrap());
    }
    assert_eq!(reports[0], reports[1]);
    assert_eq!(reports[0].lines().count(), 1 + 2 * 15);
    assert!(reports[0].starts_with("query\tmode\tgets\tcoverage_size\trows\thit\tfallback\n"));
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("lake.conf");
    std::fs::write(&cfg, CONFIG).unwrap();
    let o = lakecover(
        &dir.path().join("store"),
        &["gen", "-c", cfg.to_str().unwrap(), "--set", "records=3000", "--set", "files=30"],
    );
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "table bench: 3000 rows in 30 files");
}

#[test]
fn usage_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let store = dir.path().join("store");
    let cases: [&[&str]; 5] = [
        &["frobnicate"],
        &["gen", "--set", "colour=blue"],
        &["gen", "--set", "records"],
        &["run", "--seed", "x"],
        &["genomic-query", "--chrom", "1", "--from", "1", "--to", "5"],
    ];
    for args in cases {
        assert_eq!(lakecover(&store, args).status.code(), Some(1), "{args:?}");
    }
    let no_store = Command::new(env!("CARGO_BIN_EXE_lakecover"))
        .env_remove("LAKECOVER_STORE")
        .args(["gen"])
        .output()
        .unwrap();
    assert_eq!(no_store.status.code(), Some(1));
    assert_eq!(lakecover(&store, &["--help"]).status.code(), Some(0));
}

#[test]
fn wrong_rows_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let (store, cfg) = setup(dir.path());
    // make the index stale: every data file now holds file 0's rows
    let data = store.join("data/bench");
    let first = std::fs::read(data.join("part-000000")).unwrap();
    for e in std::fs::read_dir(&data).unwrap() {
        std::fs::write(e.unwrap().path(), &first).unwrap();
    }
    let o = lakecover(&store, &["run", "-c", &cfg, "--mode", "indexed"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("mismatch"));
}

#[test]
fn genomic_layout_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let store = dir.path().join("store");
    let raw = dir.path().join("raw.tsv");
    std::fs::write(&raw, "1\t100\tA\tG\t7\n1\t100\tA\tG\t3\n1\t150000\tC\tT\t1\nX\t5\tC\tT\t2\n").unwrap();
    let o = lakecover(&store, &["genomic-etl", "--input", raw.to_str().unwrap(), "--bucket-width", "100000"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("3 variants in 3 files"));
    let o = lakecover(&store, &["genomic-query", "--chrom", "1", "--from", "50", "--to", "160000"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "chrom\tpos\tref\talt\tids\n1\t100\tA\tG\t3,7\n1\t150000\tC\tT\t1\n");
    assert!(String::from_utf8_lossy(&o.stderr).contains("2 files read"));

    let bad = dir.path().join("bad.tsv");
    std::fs::write(&bad, "1\t100\tA\tG\t7\nchrZ\t1\tA\tG\t1\n").unwrap();
    let o = lakecover(&store, &["genomic-etl", "--input", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
}
