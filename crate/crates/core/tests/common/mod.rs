#![allow(dead_code)]

pub mod oracle;
pub mod synth;

use std::path::PathBuf;

use chrono::NaiveDate;
use priorshift::{build_snapshot, BuildOptions, PriorIndex, SnapshotBuild};

use oracle::OracleIndex;

pub const FIXTURE_MIN_COUNT: u64 = 2;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

pub fn read_fixture(name: &str) -> String {
    std::fs::read_to_string(fixture(name)).unwrap()
}

pub fn date(y: i32, m: u32, d: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, m, d).unwrap()
}

pub fn build_str(dump: &str, label: &str, min_count: u64) -> SnapshotBuild {
    let options = BuildOptions {
        min_count,
        ..BuildOptions::default()
    };
    build_snapshot(dump.as_bytes(), label, date(2000, 1, 1), &options).unwrap()
}

pub fn build_2006() -> SnapshotBuild {
    let options = BuildOptions {
        min_count: FIXTURE_MIN_COUNT,
        ..BuildOptions::default()
    };
    build_snapshot(
        read_fixture("snapshot_2006.xml").as_bytes(),
        "2006",
        date(2006, 11, 30),
        &options,
    )
    .unwrap()
}

pub fn build_2016() -> SnapshotBuild {
    let options = BuildOptions {
        min_count: FIXTURE_MIN_COUNT,
        ..BuildOptions::default()
    };
    build_snapshot(
        read_fixture("snapshot_2016.xml").as_bytes(),
        "2016",
        date(2016, 7, 1),
        &options,
    )
    .unwrap()
}

/// Differences between an index and the oracle's, empty when they agree.
/// Counts must match exactly, priors to 1e-12.
pub fn diff_against_oracle(index: &PriorIndex, expected: &OracleIndex) -> Vec<String> {
    let mut problems = Vec::new();
    let got: Vec<&str> = index.mentions().map(String::as_str).collect();
    let want: Vec<&str> = expected.keys().map(String::as_str).collect();
    if got != want {
        problems.push(format!("mention sets differ: got {got:?}, want {want:?}"));
        return problems;
    }
    for (mention, want) in expected {
        let entry = index.entry(mention).unwrap();
        if entry.total_count != want.total {
            problems.push(format!("{mention:?}: total {} != {}", entry.total_count, want.total));
        }
        if entry.candidates.len() != want.candidates.len() {
            problems.push(format!(
                "{mention:?}: {} candidates != {}",
                entry.candidates.len(),
                want.candidates.len()
            ));
            continue;
        }
        for (c, (e, n, p)) in entry.candidates.iter().zip(&want.candidates) {
            if &c.entity != e || c.count != *n || (c.prior - p).abs() > 1e-12 {
                problems.push(format!(
                    "{mention:?}: got ({}, {}, {}), want ({e}, {n}, {p})",
                    c.entity, c.count, c.prior
                ));
            }
        }
    }
    problems
}
