mod common;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use grant_novelty::corpus::{link, load_grants, load_publications, write_grants_csv, Agency, Format};
use grant_novelty::engine::NoveltyTable;
use grant_novelty::studies::{table1_regression, StudyConfig};

const SMALL: &str = r#"
seed = 3
topics = 6
min_history = 20
nmf_max_iter = 60
synth_years = 3
synth_grants_per_year = 80
synth_pubs_per_grant = 2.0
"#;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_grant-novelty"))
}

fn run(dir: &Path, args: &[&str]) -> i32 {
    let out = bin().current_dir(dir).env_remove("GRANT_NOVELTY_CONFIG").args(args).output().unwrap();
    if !out.status.success() {
        eprintln!("{}", String::from_utf8_lossy(&out.stderr));
    }
    out.status.code().unwrap()
}

fn small_config(dir: &Path) -> PathBuf {
    let p = dir.join("small.toml");
    fs::write(&p, SMALL).unwrap();
    p
}

/// Relative path → contents for every file under `root` except the manifest.
fn snapshot(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else if p.file_name().unwrap() != "manifest.json" {
                out.insert(p.strip_prefix(root).unwrap().to_path_buf(), fs::read(&p).unwrap());
            }
        }
    }
    out
}

#[test]
fn demo_is_reproducible_across_runs_and_jobs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path());
    let cfg = cfg.to_str().unwrap();
    for (out, jobs) in [("a", "1"), ("b", "1"), ("c", "3")] {
        assert_eq!(run(tmp.path(), &["--config", cfg, "--jobs", jobs, "--out", out, "demo"]), 0);
    }
    let a = snapshot(&tmp.path().join("a"));
    assert!(a.contains_key(Path::new("novelty.csv")));
    assert!(a.contains_key(Path::new("regression.json")));
    assert!(a.contains_key(Path::new("data/grants.csv")));
    assert_eq!(a, snapshot(&tmp.path().join("b")));
    assert_eq!(a, snapshot(&tmp.path().join("c")));

    let manifest: serde_json::Value = serde_json::from_slice(&fs::read(tmp.path().join("a/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "demo");
    assert_eq!(manifest["config"]["seed"], 3);
    let outputs = manifest["outputs"].as_array().unwrap();
    let novelty = outputs.iter().find(|o| o["path"] == "novelty.csv").unwrap();
    let digest = grant_novelty::cli::sha256_file(&tmp.path().join("a/novelty.csv")).unwrap();
    assert_eq!(novelty["sha256"], digest.as_str());
}

#[test]
fn seed_flag_overrides_config() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path());
    let cfg = cfg.to_str().unwrap();
    assert_eq!(run(tmp.path(), &["--config", cfg, "--out", "x", "synth"]), 0);
    assert_eq!(run(tmp.path(), &["--config", cfg, "--seed", "4", "--out", "y", "synth"]), 0);
    assert_eq!(run(tmp.path(), &["--config", cfg, "--seed", "3", "--out", "z", "synth"]), 0);
    let read = |d: &str| fs::read(tmp.path().join(d).join("grants.csv")).unwrap();
    assert_ne!(read("x"), read("y"));
    assert_eq!(read("x"), read("z"));
}

#[test]
fn score_requires_config() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(run(tmp.path(), &["--out", "d", "synth"]), 0);
    assert_eq!(run(tmp.path(), &["--out", "s", "score", "--grants", "d/grants.csv"]), 1);
    let cfg = small_config(tmp.path());
    let code = bin()
        .current_dir(tmp.path())
        .env("GRANT_NOVELTY_CONFIG", &cfg)
        .args(["--out", "s", "score", "--grants", "d/grants.csv"])
        .status()
        .unwrap()
        .code();
    assert_eq!(code, Some(0));
}

#[test]
fn bad_inputs_map_to_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(run(tmp.path(), &["ingest", "--grants", "missing.csv"]), 2);
    fs::write(tmp.path().join("bad.toml"), "topicz = 3\n").unwrap();
    assert_eq!(run(tmp.path(), &["--config", "bad.toml", "synth"]), 1);
    fs::write(tmp.path().join("neg.toml"), "nu = 1.5\n").unwrap();
    assert_eq!(run(tmp.path(), &["--config", "neg.toml", "synth"]), 1);
}

#[test]
fn regress_matches_library() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path());
    let cfg = cfg.to_str().unwrap();
    assert_eq!(run(tmp.path(), &["--config", cfg, "--out", "d", "synth"]), 0);
    assert_eq!(run(tmp.path(), &["--config", cfg, "--out", "s", "score", "--grants", "d/grants.csv"]), 0);
    let args = ["--config", cfg, "--out", "r", "regress", "--grants", "d/grants.csv", "--pubs", "d/publications.csv", "--novelty", "s/novelty.csv"];
    assert_eq!(run(tmp.path(), &args), 0);

    let g = load_grants(&tmp.path().join("d/grants.csv"), Format::Csv).unwrap().records;
    let p = load_publications(&tmp.path().join("d/publications.csv"), Format::Csv).unwrap().records;
    let t = NoveltyTable::read_csv(fs::File::open(tmp.path().join("s/novelty.csv")).unwrap()).unwrap();
    let fits = table1_regression(&link(g, p), &t, &StudyConfig::default()).unwrap();
    let expected: Vec<serde_json::Value> =
        fits.iter().map(|(a, f)| serde_json::json!({ "agency": a, "table": f.to_table_json("Citations") })).collect();
    let got: serde_json::Value = serde_json::from_slice(&fs::read(tmp.path().join("r/regression.json")).unwrap()).unwrap();
    assert!(common::close(&got, &serde_json::Value::Array(expected)));
    assert!(tmp.path().join("r/marginal_NSF.csv").exists());
}

#[test]
fn ingest_reports_rejects_and_duplicates() {
    let tmp = tempfile::tempdir().unwrap();
    let csv = "GRANT_ID,AGENCY,PROGRAM,DIVISION,FY,START_YEAR,END_YEAR,AWARD_AMOUNT_MUSD,PI_IDS,SUMMARY\n\
               A1,NSF,P,D,2010,2010,2013,0.5,x;y,first summary\n\
               A1,NSF,P,D,2009,2009,2012,0.5,x,earlier copy\n\
               B2,NSF,P,D,notayear,2010,2013,0.5,z,bad year\n";
    fs::write(tmp.path().join("g.csv"), csv).unwrap();
    let pubs = "PUB_ID,GRANT_IDS,PUB_YEAR,CITATIONS,SJR,FIELD,JOURNAL\np1,A1;ZZ,2012,4,1.2,Bio,J\np2,A1,2013,1,,,K\n";
    fs::write(tmp.path().join("p.csv"), pubs).unwrap();
    assert_eq!(run(tmp.path(), &["--out", "o", "ingest", "--grants", "g.csv", "--pubs", "p.csv"]), 0);
    let report: serde_json::Value = serde_json::from_slice(&fs::read(tmp.path().join("o/ingest_report.json")).unwrap()).unwrap();
    assert_eq!(report["grants_loaded"], 2);
    assert_eq!(report["grants_rejected"], 1);
    assert_eq!(report["grants_after_dedupe"], 1);
    assert_eq!(report["orphan_references"], 1);
    assert_eq!(report["coverage"]["missing_sjr"], 1);
    let kept = load_grants(&tmp.path().join("o/grants.csv"), Format::Csv).unwrap().records;
    assert_eq!(kept[0].fiscal_year, 2009);
    let rejects = fs::read_to_string(tmp.path().join("o/grant_rejects.csv")).unwrap();
    assert_eq!(rejects.lines().count(), 2);
}

#[test]
fn filter_labels_every_grant() {
    let tmp = tempfile::tempdir().unwrap();
    let mut grants = Vec::new();
    let mut labels = String::from("grant_id,label,provenance\n");
    for i in 0..60 {
        let admin = i % 4 == 0;
        let text = if admin {
            format!("conference travel support student registration workshop {i}")
        } else {
            format!("protein folding dynamics measured spectroscopy model {i}")
        };
        let id = format!("G{i}");
        let prov = if i < 8 { "seed-list" } else { "round-1" };
        labels.push_str(&format!("{id},{},{prov}\n", u8::from(admin)));
        grants.push(common::grant(&id, Agency::Nsf, 2010, &text));
    }
    write_grants_csv(fs::File::create(tmp.path().join("g.csv")).unwrap(), &grants).unwrap();
    fs::write(tmp.path().join("labels.csv"), labels).unwrap();
    fs::write(tmp.path().join("f.toml"), "rounds = 3\nbatch = 5\n").unwrap();
    let args = ["--config", "f.toml", "--out", "o", "filter", "--grants", "g.csv", "--labels", "labels.csv"];
    assert_eq!(run(tmp.path(), &args), 0);
    let out = load_grants(&tmp.path().join("o/grants_filtered.csv"), Format::Csv).unwrap().records;
    assert_eq!(out.len(), 60);
    for (i, g) in out.iter().enumerate() {
        assert_eq!(g.is_research, Some(i % 4 != 0), "{}", g.grant_id);
        assert!(g.research_prob.is_some());
    }
    let report: serde_json::Value = serde_json::from_slice(&fs::read(tmp.path().join("o/filter_report.json")).unwrap()).unwrap();
    assert_eq!(report["seed_labels"], 8);
    assert_eq!(report["labels"], 8 + 15);
}
