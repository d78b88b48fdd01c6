use std::fs;

use delib_core::harness::{run_records, Condition};
use delib_core::records::{load_records, persist_records, write_csv, CSV_HEADER};
use delib_core::rules::Rule;
use delib_core::{Error, ExperimentConfig};

fn cfg(replications: usize) -> ExperimentConfig {
    ExperimentConfig {
        replications,
        master_seed: 4242,
        ..Default::default()
    }
}

#[test]
fn jsonl_round_trips_every_field() {
    let records = run_records(&cfg(2), Some(1)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("records.jsonl");
    persist_records(&records, &path, false).unwrap();
    assert_eq!(load_records(&path).unwrap(), records);
    let csv = fs::read_to_string(path.with_extension("csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(CSV_HEADER));
    assert_eq!(lines.count(), records.len());
    // MES rows carry their seat prices
    assert!(records.iter().filter(|r| r.rule == Rule::Mes).all(|r| r.q.len() + r.completion == 5));
}

#[test]
fn append_keeps_a_single_header() {
    let records = run_records(&cfg(1), Some(1)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("records.jsonl");
    persist_records(&records, &path, true).unwrap();
    persist_records(&records, &path, true).unwrap();
    let loaded = load_records(&path).unwrap();
    assert_eq!(loaded.len(), 2 * records.len());
    let csv = fs::read_to_string(path.with_extension("csv")).unwrap();
    assert_eq!(csv.matches(CSV_HEADER).count(), 1);
    assert_eq!(csv.lines().count(), 1 + 2 * records.len());
}

#[test]
fn foreign_files_are_rejected() {
    let records = run_records(&cfg(1), Some(1)).unwrap();
    let dir = tempfile::tempdir().unwrap();

    let jsonl = dir.path().join("a.jsonl");
    fs::write(&jsonl, "{\"format\":\"something-else\",\"version\":1}\n").unwrap();
    assert!(matches!(load_records(&jsonl), Err(Error::Format { .. })));
    assert!(matches!(persist_records(&records, &jsonl, true), Err(Error::Format { .. })));

    fs::write(&jsonl, "{\"format\":\"delib-records\",\"version\":99}\n").unwrap();
    assert!(matches!(load_records(&jsonl), Err(Error::Format { .. })));

    fs::write(&jsonl, "not json\n").unwrap();
    assert!(matches!(load_records(&jsonl), Err(Error::Format { .. })));

    fs::write(&jsonl, "").unwrap();
    assert!(matches!(load_records(&jsonl), Err(Error::Format { .. })));

    let csv = dir.path().join("b.csv");
    fs::write(&csv, "a,b,c\n1,2,3\n").unwrap();
    assert!(matches!(write_csv(&records, &csv, true), Err(Error::Format { .. })));
    assert_eq!(fs::read_to_string(&csv).unwrap(), "a,b,c\n1,2,3\n");

    let good = dir.path().join("c.jsonl");
    persist_records(&records, &good, false).unwrap();
    let mut text = fs::read_to_string(&good).unwrap();
    text.push_str("{\"replication\": \"broken\"}\n");
    fs::write(&good, text).unwrap();
    assert!(matches!(load_records(&good), Err(Error::Format { .. })));

    assert!(matches!(load_records(&dir.path().join("missing.jsonl")), Err(Error::Io { .. })));
}

#[test]
fn output_is_independent_of_thread_count() {
    let config = cfg(4);
    let dir = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    for threads in [1, 3] {
        let records = run_records(&config, Some(threads)).unwrap();
        let path = dir.path().join(format!("t{threads}.jsonl"));
        persist_records(&records, &path, false).unwrap();
        files.push((fs::read(&path).unwrap(), fs::read(path.with_extension("csv")).unwrap()));
    }
    assert_eq!(files[0], files[1]);
}

#[test]
fn baseline_is_shared_and_strategies_are_isolated() {
    let full = run_records(&cfg(2), Some(1)).unwrap();
    let initial: Vec<_> = full.iter().filter(|r| r.strategy == Condition::INITIAL).collect();
    assert_eq!(initial.len(), 2 * Rule::ALL.len());

    let mut only_large = cfg(2);
    only_large.strategies = vec![delib_core::grouping::Strategy::Large];
    let partial = run_records(&only_large, Some(1)).unwrap();
    for r in &partial {
        let twin = full
            .iter()
            .find(|x| x.replication == r.replication && x.strategy == r.strategy && x.rule == r.rule)
            .unwrap();
        assert_eq!(twin, r);
    }
}

#[test]
fn aggregate_sanity() {
    let (_, report) = delib_core::run_experiment(&cfg(3), Some(1)).unwrap();
    for cell in &report.cells {
        assert!(cell.objectives["ur"].mean <= 1.0 && cell.objectives["rr"].mean <= 1.0);
        if cell.rule == Rule::Cc {
            assert_eq!(cell.objectives["rr"].mean, 1.0);
        }
    }
}

#[test]
fn empty_record_list_is_a_valid_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.jsonl");
    persist_records(&[], &path, false).unwrap();
    assert!(load_records(&path).unwrap().is_empty());
    assert_eq!(fs::read_to_string(path.with_extension("csv")).unwrap(), format!("{CSV_HEADER}\n"));
}
