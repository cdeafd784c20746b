//! `priorshift`: build per-snapshot prior indices from dumps, link mentions,
//! evaluate against ground truth and compare snapshots.
//!
//! Exit codes: 0 success, 1 usage error, 2 input or format error, 3 internal
//! invariant violation.

mod config;

use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand};
use serde::Serialize;

use priorshift::eval::load_ground_truth_file;
use priorshift::{
    build_snapshot, drift_stats, evaluate_matrix, link, BuildOptions, DriftReport, PriorIndex, SnapshotCatalog,
    SnapshotView,
};

use config::{SnapshotSpec, WorkspaceConfig};

const USAGE: u8 = 1;
const INPUT: u8 = 2;
const INTERNAL: u8 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "priorshift",
    version,
    about = "Temporal mention-to-entity priors from knowledge-base snapshots"
)]
struct Cli {
    /// Workspace config file (TOML).
    #[arg(long, global = true, env = "PRIORSHIFT_CONFIG", default_value = "priorshift.toml")]
    config: PathBuf,

    /// Output directory; overrides `output_dir` from the config.
    #[arg(long, global = true, env = "PRIORSHIFT_OUT")]
    out_dir: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build the prior index of each given snapshot (all configured ones by default).
    Build {
        labels: Vec<String>,
        /// Minimum anchor occurrences for a mention to be kept; overrides the config.
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        min_count: Option<u64>,
        /// Rebuild even when an index already exists.
        #[arg(long)]
        force: bool,
    },
    /// Link mentions, one per line, with a snapshot's highest-prior entity.
    Link {
        label: String,
        /// Mentions file; standard input when absent or `-`.
        mentions: Option<PathBuf>,
    },
    /// Accuracy of every configured dataset on every configured snapshot.
    Evaluate,
    /// Compare the priors of snapshot A with those of snapshot B.
    Drift {
        a: String,
        b: String,
        /// Top-k depth of the footrule comparison; overrides the config.
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        k: Option<u64>,
        /// Headline the top-1 change rate over mentions ambiguous in both snapshots.
        #[arg(long)]
        ambiguous_only: bool,
        /// Also write per-mention footrule distances as TSV.
        #[arg(long)]
        per_mention: bool,
    },
    /// Print page, mention and ambiguous-mention counts of built indices.
    Stats { labels: Vec<String> },
}

#[derive(Debug)]
struct Failure {
    code: u8,
    error: anyhow::Error,
}

type Outcome<T = ()> = Result<T, Failure>;

trait Classify<T> {
    fn or_exit(self, code: u8) -> Outcome<T>;
}

impl<T, E: Into<anyhow::Error>> Classify<T> for Result<T, E> {
    fn or_exit(self, code: u8) -> Outcome<T> {
        self.map_err(|e| Failure { code, error: e.into() })
    }
}

fn fail<T>(code: u8, error: anyhow::Error) -> Outcome<T> {
    Err(Failure { code, error })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: Cli) -> Outcome {
    let mut config = WorkspaceConfig::load(&cli.config).or_exit(INPUT)?;
    if let Some(dir) = cli.out_dir {
        config.output_dir = dir;
    }
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match cli.command {
        Command::Build {
            labels,
            min_count,
            force,
        } => {
            if let Some(n) = min_count {
                config.min_count = n;
            }
            cmd_build(&config, &labels, force, &mut out)
        }
        Command::Link { label, mentions } => cmd_link(&config, &label, mentions.as_deref(), &mut out),
        Command::Evaluate => cmd_evaluate(&config, &mut out),
        Command::Drift {
            a,
            b,
            k,
            ambiguous_only,
            per_mention,
        } => {
            if let Some(k) = k {
                config.k = k as usize;
            }
            cmd_drift(&config, &a, &b, ambiguous_only, per_mention, &mut out)
        }
        Command::Stats { labels } => cmd_stats(&config, &labels, &mut out),
    }
}

fn selected<'c>(config: &'c WorkspaceConfig, labels: &[String]) -> Outcome<Vec<&'c SnapshotSpec>> {
    if labels.is_empty() {
        return Ok(config.snapshots.iter().collect());
    }
    labels.iter().map(|l| snapshot_spec(config, l)).collect()
}

fn snapshot_spec<'c>(config: &'c WorkspaceConfig, label: &str) -> Outcome<&'c SnapshotSpec> {
    config.snapshot(label).ok_or_else(|| {
        let known: Vec<&str> = config.snapshots.iter().map(|s| s.label.as_str()).collect();
        Failure {
            code: USAGE,
            error: anyhow!("unknown snapshot {label:?} (configured: {})", known.join(", ")),
        }
    })
}

fn load_index(config: &WorkspaceConfig, label: &str) -> Outcome<PriorIndex> {
    let path = config.index_path(label);
    if !path.exists() {
        return fail(
            INPUT,
            anyhow!(
                "index for snapshot {label:?} not built ({} missing); run `priorshift build {label}`",
                path.display()
            ),
        );
    }
    PriorIndex::load(&path)
        .with_context(|| format!("cannot load index for snapshot {label:?} from {}", path.display()))
        .or_exit(INPUT)
}

fn load_catalog(config: &WorkspaceConfig, label: &str) -> Outcome<SnapshotCatalog> {
    let path = config.catalog_path(label);
    if !path.exists() {
        return fail(
            INPUT,
            anyhow!(
                "catalog for snapshot {label:?} not built ({} missing); run `priorshift build {label}`",
                path.display()
            ),
        );
    }
    SnapshotCatalog::load(&path)
        .with_context(|| format!("cannot load catalog for snapshot {label:?} from {}", path.display()))
        .or_exit(INPUT)
}

fn write_file(path: &Path, content: &str) -> Outcome {
    std::fs::write(path, content)
        .with_context(|| format!("cannot write {}", path.display()))
        .or_exit(INPUT)
}

fn write_stats_header(out: &mut impl Write) -> Outcome {
    writeln!(out, "snapshot\tdate\tpages\tmentions\tambiguous_mentions").or_exit(INPUT)
}

fn write_stats(out: &mut impl Write, index: &PriorIndex) -> Outcome {
    let stats = index.stats();
    writeln!(
        out,
        "{}\t{}\t{}\t{}\t{}",
        index.meta.label,
        index.meta.dump_date,
        index.meta.page_count,
        stats.mention_count,
        stats.ambiguous_mention_count
    )
    .or_exit(INPUT)
}

enum Built {
    Fresh(PriorIndex),
    Existing(PriorIndex),
}

fn build_one(config: &WorkspaceConfig, spec: &SnapshotSpec, force: bool) -> Outcome<Built> {
    let index_path = config.index_path(&spec.label);
    if index_path.exists() && !force {
        return load_index(config, &spec.label).map(Built::Existing);
    }
    let file = File::open(&spec.dump)
        .with_context(|| format!("cannot open dump {} for snapshot {:?}", spec.dump.display(), spec.label))
        .or_exit(INPUT)?;
    let options = BuildOptions {
        keep_namespaces: config.keep_namespaces.clone(),
        min_count: config.min_count,
    };
    let built = build_snapshot(BufReader::new(file), &spec.label, spec.date, &options)
        .with_context(|| format!("cannot build snapshot {:?} from {}", spec.label, spec.dump.display()))
        .or_exit(INPUT)?;
    std::fs::create_dir_all(&config.output_dir)
        .with_context(|| format!("cannot create {}", config.output_dir.display()))
        .or_exit(INPUT)?;
    built
        .catalog
        .save(&config.catalog_path(&spec.label))
        .with_context(|| format!("cannot write catalog for snapshot {:?}", spec.label))
        .or_exit(INPUT)?;
    built
        .index
        .save(&index_path)
        .with_context(|| format!("cannot write {}", index_path.display()))
        .or_exit(INPUT)?;
    let d = built.diagnostics;
    eprintln!(
        "built {} -> {} ({} anchors; skipped {} unclosed, {} excluded, {} invalid links)",
        spec.label,
        index_path.display(),
        built.anchor_count,
        d.unclosed_links,
        d.excluded_links,
        d.invalid_targets
    );
    Ok(Built::Fresh(built.index))
}

fn cmd_build(config: &WorkspaceConfig, labels: &[String], force: bool, out: &mut impl Write) -> Outcome {
    let specs = selected(config, labels)?;
    let results: Vec<Outcome<Built>> = std::thread::scope(|scope| {
        let handles: Vec<_> = specs
            .iter()
            .map(|spec| scope.spawn(move || build_one(config, spec, force)))
            .collect();
        handles
            .into_iter()
            .map(|h| {
                h.join()
                    .unwrap_or_else(|_| fail(INTERNAL, anyhow!("snapshot build panicked")))
            })
            .collect()
    });
    write_stats_header(out)?;
    for (spec, result) in specs.iter().zip(results) {
        let index = match result? {
            Built::Fresh(index) => index,
            Built::Existing(index) => {
                eprintln!(
                    "kept existing index for {} at {} (use --force to rebuild)",
                    spec.label,
                    config.index_path(&spec.label).display()
                );
                index
            }
        };
        write_stats(out, &index)?;
    }
    Ok(())
}

fn cmd_stats(config: &WorkspaceConfig, labels: &[String], out: &mut impl Write) -> Outcome {
    let specs = selected(config, labels)?;
    write_stats_header(out)?;
    for spec in specs {
        write_stats(out, &load_index(config, &spec.label)?)?;
    }
    Ok(())
}

fn cmd_link(config: &WorkspaceConfig, label: &str, mentions: Option<&Path>, out: &mut impl Write) -> Outcome {
    snapshot_spec(config, label)?;
    let index = load_index(config, label)?;
    let input: Box<dyn BufRead> = match mentions {
        None => Box::new(io::stdin().lock()),
        Some(p) if p == Path::new("-") => Box::new(io::stdin().lock()),
        Some(p) => Box::new(BufReader::new(
            File::open(p)
                .with_context(|| format!("cannot open mentions file {}", p.display()))
                .or_exit(INPUT)?,
        )),
    };
    for line in input.lines() {
        let line = line.context("cannot read mentions").or_exit(INPUT)?;
        let mention = line.trim_end_matches('\r');
        if mention.trim().is_empty() {
            continue;
        }
        let r = link(&index, mention);
        let written = match (&r.entity, r.prior) {
            (Some(entity), Some(prior)) => writeln!(out, "{mention}\t{entity}\t{prior}"),
            _ => writeln!(out, "{mention}\tNIL\tNA"),
        };
        written.or_exit(INPUT)?;
    }
    Ok(())
}

fn cmd_evaluate(config: &WorkspaceConfig, out: &mut impl Write) -> Outcome {
    if config.snapshots.is_empty() {
        return fail(INPUT, anyhow!("no snapshots configured"));
    }
    let mut indices = Vec::new();
    let mut catalogs = Vec::new();
    for spec in &config.snapshots {
        indices.push(load_index(config, &spec.label)?);
        catalogs.push(load_catalog(config, &spec.label)?);
    }
    let mut datasets = Vec::new();
    for d in &config.datasets {
        let gt = load_ground_truth_file(&d.path, &d.name)
            .with_context(|| format!("cannot load dataset {:?} from {}", d.name, d.path.display()))
            .or_exit(INPUT)?;
        datasets.push(gt);
    }
    let views: Vec<SnapshotView<'_>> = catalogs.iter().map(SnapshotView::from).collect();
    let report = evaluate_matrix(&datasets, &indices, &views)
        .context("evaluation failed")
        .or_exit(INTERNAL)?;
    std::fs::create_dir_all(&config.output_dir)
        .with_context(|| format!("cannot create {}", config.output_dir.display()))
        .or_exit(INPUT)?;
    let csv = report.to_csv();
    write_file(&config.output_dir.join("accuracy.csv"), &csv)?;
    write_file(&config.output_dir.join("accuracy.json"), &report.to_json())?;
    out.write_all(csv.as_bytes()).or_exit(INPUT)
}

#[derive(Serialize)]
struct DriftOutput<'a> {
    headline_scope: &'static str,
    top1_change_rate: Option<f64>,
    #[serde(flatten)]
    report: &'a DriftReport,
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "NA".to_string(), |v| v.to_string())
}

fn cmd_drift(
    config: &WorkspaceConfig,
    a: &str,
    b: &str,
    ambiguous_only: bool,
    per_mention: bool,
    out: &mut impl Write,
) -> Outcome {
    snapshot_spec(config, a)?;
    snapshot_spec(config, b)?;
    let index_a = load_index(config, a)?;
    let index_b = load_index(config, b)?;
    let catalog_b = load_catalog(config, b)?;
    let report = drift_stats(&index_a, &index_b, config.k, &catalog_b.redirects)
        .context("drift computation failed")
        .or_exit(INTERNAL)?;

    let (scope, headline) = if ambiguous_only {
        ("ambiguous", report.top1_change_rate_ambiguous)
    } else {
        ("all", report.top1_change_rate_all)
    };
    let output = DriftOutput {
        headline_scope: scope,
        top1_change_rate: headline,
        report: &report,
    };
    let mut json = serde_json::to_string_pretty(&output)
        .context("cannot serialize drift report")
        .or_exit(INTERNAL)?;
    json.push('\n');
    std::fs::create_dir_all(&config.output_dir)
        .with_context(|| format!("cannot create {}", config.output_dir.display()))
        .or_exit(INPUT)?;
    let stem = format!("drift_{a}_{b}");
    let json_path = config.output_dir.join(format!("{stem}.json"));
    write_file(&json_path, &json)?;
    if per_mention {
        write_file(
            &config.output_dir.join(format!("{stem}.tsv")),
            &report.per_mention_tsv(),
        )?;
    }

    let written = writeln!(out, "snapshots\t{a}\t{b}")
        .and_then(|_| writeln!(out, "shared_mentions\t{}", report.shared_mentions))
        .and_then(|_| writeln!(out, "top1_change_rate ({scope})\t{}", fmt_opt(headline)))
        .and_then(|_| writeln!(out, "footrule_mentions\t{}", report.footrule_mentions))
        .and_then(|_| writeln!(out, "footrule_mean (k={})\t{}", report.k, fmt_opt(report.footrule_mean)))
        .and_then(|_| writeln!(out, "footrule_stddev\t{}", fmt_opt(report.footrule_stddev)))
        .and_then(|_| writeln!(out, "fraction_above_half\t{}", fmt_opt(report.fraction_above_half)));
    written.or_exit(INPUT)
}
