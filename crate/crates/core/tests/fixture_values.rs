//! Expected values below were worked out by hand from the fixture dumps.

mod common;

use priorshift::eval::load_ground_truth_file;
use priorshift::{drift_stats, evaluate_matrix, persistent_annotations, top1_change_rate, PriorIndex, SnapshotView};

fn candidates(index: &PriorIndex, mention: &str) -> Vec<(String, u64)> {
    index
        .candidates(mention)
        .unwrap_or_default()
        .iter()
        .map(|c| (c.entity.clone(), c.count))
        .collect()
}

fn c(entity: &str, count: u64) -> (String, u64) {
    (entity.to_string(), count)
}

#[test]
fn index_2006() {
    let built = common::build_2006();
    let index = &built.index;
    assert_eq!(
        candidates(index, "Kirk"),
        [c("James T. Kirk", 3), c("Andy Kirk (footballer)", 1)]
    );
    assert_eq!(index.entry("Kirk").unwrap().total_count, 4);
    assert_eq!(candidates(index, "Amazon"), [c("Amazon River", 3), c("Amazon.com", 1)]);
    assert_eq!(candidates(index, "Amazon River"), [c("Amazon River", 2)]);
    assert_eq!(candidates(index, "Hillary Clinton"), [c("Hillary Rodham Clinton", 2)]);
    assert_eq!(candidates(index, "Al Capone"), [c("Al Capone", 2)]);
    assert_eq!(
        candidates(index, "Watson"),
        [c("Doctor Watson", 2), c("James D. Watson", 1)]
    );
    assert_eq!(candidates(index, "Chained"), [c("Newer Name", 2)]);

    let ghost = index.entry("Ghost").unwrap();
    assert_eq!((ghost.total_count, ghost.top().prior), (1, 1.0));
    assert!(!index.contains("Rare"));
    assert!(!index.contains("Looped"));

    let kirk = index.entry("Kirk").unwrap();
    assert_eq!(kirk.candidates[0].prior, 0.75);
    assert_eq!(kirk.candidates[1].prior, 0.25);
    assert!(index.entries().all(|e| e.validate().is_ok()));
}

#[test]
fn index_2016() {
    let built = common::build_2016();
    let index = &built.index;
    assert_eq!(
        candidates(index, "Kirk"),
        [c("Andy Kirk (footballer)", 3), c("James T. Kirk", 1)]
    );
    assert_eq!(candidates(index, "Amazon"), [c("Amazon River", 4), c("Amazon.com", 2)]);
    assert_eq!(candidates(index, "Hillary Clinton"), [c("Hillary Clinton", 2)]);
    assert_eq!(
        candidates(index, "Al Capone"),
        [c("Al Capone", 2), c("Al Capone (film)", 1)]
    );
    assert_eq!(candidates(index, "Obama"), [c("Barack Obama", 2), c("Obama, Fukui", 1)]);
    assert!(!index.contains("Watson"));
    assert_eq!(
        built.catalog.redirects.get("Hillary Rodham Clinton"),
        Some("Hillary Clinton")
    );
}

#[test]
fn non_article_namespaces_are_ignored_by_default() {
    let built = common::build_2006();
    assert!(built
        .catalog
        .articles
        .iter()
        .all(|t| !t.starts_with("Talk:") && !t.starts_with("Category:")));
}

#[test]
fn persistence_and_accuracy_matrix() {
    let (a, b) = (common::build_2006(), common::build_2016());
    let gt = load_ground_truth_file(&common::fixture("ground_truth.jsonl"), "fixture").unwrap();
    assert_eq!(gt.annotation_count(), 6);
    let views = [SnapshotView::from(&a.catalog), SnapshotView::from(&b.catalog)];
    let kept = persistent_annotations(&gt, &views);
    let golds: Vec<&str> = kept.annotations().map(|x| x.gold_entity.as_str()).collect();
    assert_eq!(
        golds,
        [
            "James T. Kirk",
            "Amazon_River",
            "Hillary Rodham Clinton",
            "James D. Watson"
        ]
    );

    let report = evaluate_matrix(&[gt], &[a.index, b.index], &views).unwrap();
    let y2006 = report.cell("fixture", "2006").unwrap();
    let y2016 = report.cell("fixture", "2016").unwrap();
    assert_eq!((y2006.correct, y2006.evaluated), (3, 4));
    assert_eq!((y2016.correct, y2016.evaluated), (2, 4));
    assert_eq!(report.to_csv(), common::read_fixture("expected_accuracy.csv"));
}

#[test]
fn drift_between_fixture_snapshots() {
    let (a, b) = (common::build_2006(), common::build_2016());
    let all = top1_change_rate(&a.index, &b.index, false, &b.catalog.redirects);
    assert_eq!((all.changed, all.considered), (1, 4));
    let amb = top1_change_rate(&a.index, &b.index, true, &b.catalog.redirects);
    assert_eq!((amb.changed, amb.considered), (1, 2));

    let report = drift_stats(&a.index, &b.index, 5, &b.catalog.redirects).unwrap();
    assert_eq!(report.shared_mentions, 4);
    assert_eq!(report.top1_change_rate_all, Some(0.25));
    assert_eq!(report.top1_change_rate_ambiguous, Some(0.5));
    let distances: Vec<(&str, f64)> = report.distances.iter().map(|(m, d)| (m.as_str(), *d)).collect();
    assert_eq!(distances, [("Amazon", 0.0), ("Kirk", 2.0 / 30.0)]);
    assert!((report.footrule_mean.unwrap() - 1.0 / 30.0).abs() < 1e-12);
    assert_eq!(report.fraction_above_half, Some(0.0));
}
