use std::path::PathBuf;

use clap::{Args, ValueEnum};
use gift_core::baselines::{
    cosine_matrix, mmr_greedy_order, top_relevance_select, undirected_diversity_select,
    undirected_diversity_select_with_relevance, uniform_select, BaselineKind, BaselinePolicy,
};
use gift_core::io::{read_matrix, read_query, read_vector, subsample_candidates};
use gift_core::selector::{compute_relevance, raw_relevance};
use gift_core::{
    select, select_with_relevance, EmbeddingMatrix, Error, OutputOrder, QueryEmbedding,
    SelectionResult, SelectorConfig, TieBreak,
};
use serde::Serialize;

use crate::failure::{emit, Failure};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyArg {
    Gift,
    Uniform,
    Toprel,
    Undirected,
    Mmr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TieArg {
    Strict,
    Indexed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OrderArg {
    Temporal,
    Score,
}

#[derive(Debug, Args)]
pub struct SelectArgs {
    /// Frame embeddings, shape (N, D): .npy float32 or a JSON array of arrays.
    #[arg(long)]
    frames: PathBuf,
    /// Query embedding, shape (D,) or (1, D). Not needed for `uniform` or with --relevance.
    #[arg(long)]
    query: Option<PathBuf>,
    /// Per-frame relevance in [0, 1], shape (N,), used instead of query cosines.
    #[arg(long, conflicts_with = "query")]
    relevance: Option<PathBuf>,
    #[arg(long)]
    budget: usize,
    #[arg(long, default_value_t = SelectorConfig::DEFAULT_BATCH)]
    batch_size: usize,
    #[arg(long, value_enum, default_value_t = PolicyArg::Gift)]
    policy: PolicyArg,
    /// Redundancy weight for `mmr`.
    #[arg(long, default_value_t = BaselinePolicy::DEFAULT_LAMBDA)]
    lambda: f64,
    /// Frames are uniformly thinned to this many candidates before selection.
    #[arg(long, default_value_t = 128)]
    candidates: usize,
    #[arg(long)]
    no_normalize: bool,
    #[arg(long, value_enum, default_value_t = TieArg::Strict)]
    tie_break: TieArg,
    #[arg(long, value_enum, default_value_t = OrderArg::Temporal)]
    order: OrderArg,
    /// Include per-iteration score tables (gift and undirected only).
    #[arg(long)]
    trace: bool,
}

#[derive(Debug, Serialize)]
struct ConfigEcho {
    policy: PolicyArg,
    budget: usize,
    batch_size: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    lambda: Option<f32>,
    normalize: bool,
    tie_break: TieBreak,
    order: OutputOrder,
    relevance_source: &'static str,
    n_frames: usize,
    candidate_pool: usize,
    /// Number of frames actually scored after subsampling.
    candidates: usize,
    subsampled: bool,
}

#[derive(Debug, Serialize)]
struct TraceEntry {
    iteration: usize,
    candidate_count: usize,
    batch: Vec<usize>,
    candidates: Vec<usize>,
    relevance: Vec<f32>,
    diversity: Vec<f32>,
    score: Vec<f32>,
    substitute: Vec<Option<usize>>,
}

#[derive(Debug, Serialize)]
struct SelectOutput {
    selected_indices: Vec<usize>,
    /// Score of each selected frame; absent for `uniform`.
    #[serde(skip_serializing_if = "Option::is_none")]
    scores: Option<Vec<f32>>,
    config: ConfigEcho,
    #[serde(skip_serializing_if = "Option::is_none")]
    trace: Option<Vec<TraceEntry>>,
}

/// Candidate-space picks, in output order, with their scores.
struct Picks {
    indices: Vec<usize>,
    scores: Option<Vec<f64>>,
    result: Option<SelectionResult>,
}

fn to_f32(v: &[f64]) -> Vec<f32> {
    v.iter().map(|&x| x as f32).collect()
}

fn usage_if(cond: bool, msg: &str) -> Result<(), Failure> {
    if cond {
        Err(Failure::usage(msg))
    } else {
        Ok(())
    }
}

pub fn run(args: SelectArgs) -> Result<(), Failure> {
    let needs_query = match args.policy {
        PolicyArg::Uniform => false,
        PolicyArg::Mmr => true,
        _ => args.relevance.is_none(),
    };
    usage_if(
        needs_query && args.query.is_none(),
        "--query is required for this policy",
    )?;
    usage_if(
        args.policy == PolicyArg::Mmr && args.relevance.is_some(),
        "--relevance cannot drive mmr, which needs raw query cosines",
    )?;
    usage_if(
        args.trace && !matches!(args.policy, PolicyArg::Gift | PolicyArg::Undirected),
        "--trace is only available for gift and undirected",
    )?;
    if args.policy == PolicyArg::Mmr {
        BaselinePolicy::with_lambda(BaselineKind::MmrGreedy, args.lambda)?;
    }

    let all_frames = read_matrix(&args.frames)?;
    let n_frames = all_frames.n_frames();
    if args.budget > args.candidates {
        return Err(Error::BudgetExceedsPool {
            budget: args.budget,
            pool: args.candidates,
        }
        .into());
    }
    let (frames, map) = subsample_candidates(&all_frames, args.candidates)?;
    let relevance = match &args.relevance {
        Some(path) => {
            let r = read_vector(path)?;
            if r.len() != n_frames {
                return Err(Error::DimensionMismatch {
                    expected: n_frames,
                    actual: r.len(),
                }
                .into());
            }
            Some(map.iter().map(|&i| f64::from(r[i])).collect::<Vec<f64>>())
        }
        None => None,
    };
    let query = args.query.as_ref().map(read_query).transpose()?;

    let cfg = SelectorConfig::new(args.budget)
        .with_batch(args.batch_size)
        .with_normalize(!args.no_normalize)
        .with_tie_break(match args.tie_break {
            TieArg::Strict => TieBreak::Strict,
            TieArg::Indexed => TieBreak::IndexOrdered,
        })
        .with_order(match args.order {
            OrderArg::Temporal => OutputOrder::Temporal,
            OrderArg::Score => OutputOrder::ScoreDescending,
        });
    cfg.validate(frames.n_frames())?;

    let picks = pick(&args, &frames, query.as_ref(), relevance.as_deref(), &cfg)?;

    let out = SelectOutput {
        selected_indices: picks.indices.iter().map(|&c| map[c]).collect(),
        scores: picks.scores.as_deref().map(to_f32),
        config: ConfigEcho {
            policy: args.policy,
            budget: cfg.budget_k,
            batch_size: cfg.batch_b,
            lambda: (args.policy == PolicyArg::Mmr).then_some(args.lambda as f32),
            normalize: cfg.normalize_embeddings,
            tie_break: cfg.substitute_tie_break,
            order: cfg.output_order,
            relevance_source: match (&relevance, &query) {
                (Some(_), _) => "file",
                (None, Some(_)) => "query",
                (None, None) => "none",
            },
            n_frames,
            candidate_pool: args.candidates,
            candidates: frames.n_frames(),
            subsampled: frames.n_frames() < n_frames,
        },
        trace: args
            .trace
            .then(|| picks.result.as_ref().map(|res| trace_entries(res, &map)))
            .flatten(),
    };
    let json = serde_json::to_string_pretty(&out)
        .map_err(|e| Failure::output(Error::InvalidInput(e.to_string())))?;
    emit(&format!("{json}\n"))
}

fn pick(
    args: &SelectArgs,
    frames: &EmbeddingMatrix,
    query: Option<&QueryEmbedding>,
    relevance: Option<&[f64]>,
    cfg: &SelectorConfig,
) -> Result<Picks, Failure> {
    let k = cfg.budget_k;
    let from_result = |res: SelectionResult| Picks {
        indices: res.selected.clone(),
        scores: Some(res.selected_scores.clone()),
        result: Some(res),
    };
    Ok(match args.policy {
        PolicyArg::Gift => from_result(match (relevance, query) {
            (Some(r), _) => select_with_relevance(frames, r, cfg)?,
            (None, Some(q)) => select(frames, q, cfg)?,
            (None, None) => unreachable!("checked before reading files"),
        }),
        PolicyArg::Undirected => from_result(match (relevance, query) {
            (Some(r), _) => undirected_diversity_select_with_relevance(frames, r, cfg)?,
            (None, Some(q)) => undirected_diversity_select(frames, q, cfg)?,
            (None, None) => unreachable!("checked before reading files"),
        }),
        PolicyArg::Uniform => Picks {
            indices: uniform_select(frames.n_frames(), k)?,
            scores: None,
            result: None,
        },
        PolicyArg::Toprel => {
            let r = match (relevance, query) {
                (Some(r), _) => r.to_vec(),
                (None, Some(q)) => compute_relevance(frames, q)?,
                (None, None) => unreachable!("checked before reading files"),
            };
            let mut idx = top_relevance_select(&r, k)?;
            if cfg.output_order == OutputOrder::ScoreDescending {
                idx.sort_by(|&a, &b| r[b].total_cmp(&r[a]).then(a.cmp(&b)));
            }
            let scores = idx.iter().map(|&i| r[i]).collect();
            Picks {
                indices: idx,
                scores: Some(scores),
                result: None,
            }
        }
        PolicyArg::Mmr => {
            let q = query.expect("checked before reading files");
            let rel = raw_relevance(frames, q)?;
            let sims = cosine_matrix(frames)?;
            let order = mmr_greedy_order(&rel, &sims, k, args.lambda)?;
            let gains: Vec<f64> = order
                .iter()
                .enumerate()
                .map(|(t, &i)| {
                    rel[i] - args.lambda * order[..t].iter().map(|&j| sims[i][j]).sum::<f64>()
                })
                .collect();
            let mut pairs: Vec<(usize, f64)> = order.into_iter().zip(gains).collect();
            if cfg.output_order == OutputOrder::Temporal {
                pairs.sort_unstable_by_key(|p| p.0);
            }
            Picks {
                indices: pairs.iter().map(|p| p.0).collect(),
                scores: Some(pairs.iter().map(|p| p.1).collect()),
                result: None,
            }
        }
    })
}

fn trace_entries(res: &SelectionResult, map: &[usize]) -> Vec<TraceEntry> {
    let orig = |v: &[usize]| v.iter().map(|&c| map[c]).collect::<Vec<_>>();
    res.trace
        .iter()
        .map(|t| TraceEntry {
            iteration: t.iteration,
            candidate_count: t.candidate_count,
            batch: orig(&t.batch),
            candidates: orig(&t.scores.candidates),
            relevance: to_f32(&t.scores.relevance),
            diversity: to_f32(&t.scores.diversity),
            score: to_f32(&t.scores.score),
            substitute: t
                .scores
                .substitute
                .iter()
                .map(|s| s.map(|c| map[c]))
                .collect(),
        })
        .collect()
}
