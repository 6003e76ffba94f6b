use std::path::PathBuf;

use clap::{Args, ValueEnum};
use gift_core::baselines::{BaselineKind, BaselinePolicy};
use gift_core::io::{fmt_float, report_csv, report_json};
use gift_core::synth::{corpus, run_sweep, Policy, SweepReport, SyntheticVideoSpec};
use gift_core::Error;

use crate::failure::{emit, Failure};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, default_value_t = 0)]
    corpus_seed: u64,
    #[arg(long, default_value_t = 50)]
    videos: usize,
    /// Comma-separated: gift, gift-oneshot, uniform, toprel, undirected, mmr.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "gift,gift-oneshot,uniform,toprel,undirected,mmr"
    )]
    policies: Vec<String>,
    #[arg(long, value_delimiter = ',', default_value = "4,8,16,32")]
    budgets: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "9")]
    batch_sizes: Vec<usize>,
    /// Redundancy weight for `mmr`.
    #[arg(long, default_value_t = BaselinePolicy::DEFAULT_LAMBDA)]
    lambda: f64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

fn parse_policies(names: &[String], lambda: f64) -> Result<Vec<Policy>, Failure> {
    let names: Vec<&str> = names
        .iter()
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .collect();
    if names.is_empty() {
        return Err(Failure::usage("--policies must name at least one policy"));
    }
    names
        .into_iter()
        .map(|n| Policy::parse(n, lambda).map_err(|e| Failure::usage(e.to_string())))
        .collect()
}

fn summary(report: &SweepReport) -> String {
    use std::fmt::Write;
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<13} {:>3} {:>3} {:>12} {:>12} {:>17} {:>10} {:>10}",
        "policy",
        "K",
        "B",
        "event_recall",
        "frame_recall",
        "temporal_coverage",
        "noise_rate",
        "redundancy"
    );
    for row in &report.rows {
        let m = &row.metrics;
        let _ = writeln!(
            s,
            "{:<13} {:>3} {:>3} {:>12} {:>12} {:>17} {:>10} {:>10}",
            row.policy,
            row.budget,
            row.batch.map_or_else(|| "-".to_string(), |b| b.to_string()),
            fmt_float(m.event_recall),
            fmt_float(m.frame_recall),
            fmt_float(m.temporal_coverage),
            fmt_float(m.noise_rate),
            fmt_float(m.redundancy),
        );
    }
    s
}

pub fn run(args: BenchArgs) -> Result<(), Failure> {
    let policies = parse_policies(&args.policies, args.lambda)?;
    if args.budgets.is_empty() || args.batch_sizes.is_empty() {
        return Err(Failure::usage(
            "--budgets and --batch-sizes must be nonempty",
        ));
    }
    if args.videos == 0 {
        return Err(Failure::usage("--videos must be at least 1"));
    }
    if policies.iter().any(|p| matches!(p, Policy::Mmr { .. })) {
        BaselinePolicy::with_lambda(BaselineKind::MmrGreedy, args.lambda)?;
    }

    let specs = corpus(
        &SyntheticVideoSpec::default(),
        args.videos,
        args.corpus_seed,
    );
    let report = run_sweep(&specs, &policies, &args.budgets, &args.batch_sizes)?;
    let body = match args.format {
        Format::Csv => report_csv(&report),
        Format::Json => report_json(&report)?,
    };
    std::fs::write(&args.out, body).map_err(|source| {
        Failure::output(Error::Io {
            path: args.out.clone(),
            source,
        })
    })?;
    emit(&summary(&report))
}
