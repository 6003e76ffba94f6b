//! Batched irreplaceability selection.
//!
//! Each frame gets a relevance `r` (min-max normalized query cosine, computed
//! once), a directed diversity `d` (squared distance to the nearest candidate
//! that is strictly more relevant, or the frozen pool diameter `d_max` when no
//! such candidate exists) and a score `s = r * d`. The top `b` scores are taken,
//! removed from the pool, and the survivors re-scored until `K` frames are chosen.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::math::{
    cosine_similarity, l2_normalize, max_pairwise_distance, minmax_normalize,
    pairwise_sq_distances, DistanceMatrix, EmbeddingMatrix, QueryEmbedding,
};

/// Which frames count as potential substitutes of frame `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TieBreak {
    /// Only frames with strictly higher relevance.
    #[default]
    Strict,
    /// Also frames of equal relevance with a smaller index, so exact
    /// duplicates suppress each other.
    IndexOrdered,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputOrder {
    /// Ascending frame index.
    #[default]
    Temporal,
    /// Descending score at the time of selection, smaller index first on ties.
    ScoreDescending,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SelectorConfig {
    pub budget_k: usize,
    pub batch_b: usize,
    pub normalize_embeddings: bool,
    pub substitute_tie_break: TieBreak,
    pub output_order: OutputOrder,
}

impl SelectorConfig {
    pub const DEFAULT_BATCH: usize = 9;

    pub fn new(budget_k: usize) -> Self {
        Self {
            budget_k,
            batch_b: Self::DEFAULT_BATCH,
            normalize_embeddings: true,
            substitute_tie_break: TieBreak::Strict,
            output_order: OutputOrder::Temporal,
        }
    }

    pub fn with_batch(mut self, batch_b: usize) -> Self {
        self.batch_b = batch_b;
        self
    }

    pub fn with_normalize(mut self, normalize: bool) -> Self {
        self.normalize_embeddings = normalize;
        self
    }

    pub fn with_tie_break(mut self, tie: TieBreak) -> Self {
        self.substitute_tie_break = tie;
        self
    }

    pub fn with_order(mut self, order: OutputOrder) -> Self {
        self.output_order = order;
        self
    }

    pub fn validate(&self, n_frames: usize) -> Result<()> {
        if n_frames == 0 {
            return Err(Error::InvalidInput("no frames to select from".into()));
        }
        if self.budget_k == 0 {
            return Err(Error::InvalidInput("budget K must be at least 1".into()));
        }
        if self.batch_b == 0 {
            return Err(Error::InvalidInput(
                "batch size B must be at least 1".into(),
            ));
        }
        if self.budget_k > n_frames {
            return Err(Error::BudgetExceedsPool {
                budget: self.budget_k,
                pool: n_frames,
            });
        }
        Ok(())
    }
}

/// Scores for one iteration. All vectors are aligned with `candidates`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreTable {
    pub candidates: Vec<usize>,
    pub relevance: Vec<f64>,
    pub diversity: Vec<f64>,
    pub score: Vec<f64>,
    /// The more-relevant frame attaining the minimum distance, if any.
    pub substitute: Vec<Option<usize>>,
}

impl ScoreTable {
    pub fn position(&self, frame: usize) -> Option<usize> {
        self.candidates.binary_search(&frame).ok()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationRecord {
    /// 1-based.
    pub iteration: usize,
    pub candidate_count: usize,
    /// Frames chosen this iteration, best score first.
    pub batch: Vec<usize>,
    pub scores: ScoreTable,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionResult {
    pub selected: Vec<usize>,
    /// Score each selected frame had when it was picked, aligned with `selected`.
    pub selected_scores: Vec<f64>,
    pub trace: Vec<IterationRecord>,
    pub d_max: f64,
}

/// Raw query cosine per frame.
pub fn raw_relevance(frames: &EmbeddingMatrix, query: &QueryEmbedding) -> Result<Vec<f64>> {
    if frames.dim() != query.dim() {
        return Err(Error::DimensionMismatch {
            expected: frames.dim(),
            actual: query.dim(),
        });
    }
    frames
        .rows()
        .enumerate()
        .map(|(i, row)| {
            cosine_similarity(row, query.as_slice()).map_err(|e| match e {
                Error::ZeroNormVector("a") => Error::ZeroNormRow(i),
                other => other,
            })
        })
        .collect()
}

/// Min-max normalized query cosine per frame.
pub fn compute_relevance(frames: &EmbeddingMatrix, query: &QueryEmbedding) -> Result<Vec<f64>> {
    minmax_normalize(&raw_relevance(frames, query)?)
}

#[inline]
fn is_substitute(r: &[f64], tie: TieBreak, i: usize, j: usize) -> bool {
    j != i && (r[j] > r[i] || (tie == TieBreak::IndexOrdered && r[j] == r[i] && j < i))
}

/// Nearest potential substitute of `i` among `candidates`: smallest distance,
/// then smallest index.
fn nearest_substitute(
    dm: &DistanceMatrix,
    r: &[f64],
    tie: TieBreak,
    candidates: &[usize],
    i: usize,
) -> Option<(usize, f32)> {
    let row = dm.row(i);
    let mut best: Option<(usize, f32)> = None;
    for &j in candidates {
        if !is_substitute(r, tie, i, j) {
            continue;
        }
        let dist = row[j];
        best = match best {
            Some((bj, bd)) if bd < dist || (bd == dist && bj < j) => Some((bj, bd)),
            _ => Some((j, dist)),
        };
    }
    best
}

fn directed_diversity_with(
    dm: &DistanceMatrix,
    r: &[f64],
    candidates: &[usize],
    d_max: f64,
    tie: TieBreak,
) -> (Vec<f64>, Vec<Option<usize>>) {
    candidates
        .iter()
        .map(|&i| match nearest_substitute(dm, r, tie, candidates, i) {
            Some((j, dist)) => (f64::from(dist), Some(j)),
            None => (d_max, None),
        })
        .unzip()
}

fn check_candidates(dm: &DistanceMatrix, r: &[f64], candidates: &[usize]) -> Result<()> {
    if candidates.is_empty() {
        return Err(Error::InvalidInput("empty candidate set".into()));
    }
    if r.len() != dm.len() {
        return Err(Error::DimensionMismatch {
            expected: dm.len(),
            actual: r.len(),
        });
    }
    if let Some(&bad) = candidates.iter().find(|&&i| i >= dm.len()) {
        return Err(Error::InvalidInput(format!(
            "candidate {bad} out of range for {} frames",
            dm.len()
        )));
    }
    Ok(())
}

/// Directed diversity of every candidate, with strict substitutes.
///
/// Returns `(d, substitute)` aligned with `candidates`.
pub fn directed_diversity(
    dm: &DistanceMatrix,
    r: &[f64],
    candidates: &[usize],
    d_max: f64,
) -> Result<(Vec<f64>, Vec<Option<usize>>)> {
    directed_diversity_tie(dm, r, candidates, d_max, TieBreak::Strict)
}

pub fn directed_diversity_tie(
    dm: &DistanceMatrix,
    r: &[f64],
    candidates: &[usize],
    d_max: f64,
    tie: TieBreak,
) -> Result<(Vec<f64>, Vec<Option<usize>>)> {
    check_candidates(dm, r, candidates)?;
    Ok(directed_diversity_with(dm, r, candidates, d_max, tie))
}

/// Element-wise `r * d`.
pub fn irreplaceability(r: &[f64], d: &[f64]) -> Result<Vec<f64>> {
    if r.len() != d.len() {
        return Err(Error::InvalidInput(format!(
            "relevance has {} entries but diversity has {}",
            r.len(),
            d.len()
        )));
    }
    Ok(r.iter().zip(d).map(|(a, b)| a * b).collect())
}

/// Positions of the `b` highest scores, best first, smaller frame index on ties.
pub(crate) fn top_positions(candidates: &[usize], scores: &[f64], b: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.sort_by(|&x, &y| {
        scores[y]
            .total_cmp(&scores[x])
            .then(candidates[x].cmp(&candidates[y]))
    });
    order.truncate(b);
    order
}

/// Strategy for producing diversity values over a shrinking candidate pool.
pub(crate) trait Rescorer {
    fn diversity(&mut self, candidates: &[usize]) -> (Vec<f64>, Vec<Option<usize>>);
    fn remove(&mut self, batch: &[usize], remaining: &[usize]);
}

struct FromScratch<'a> {
    dm: &'a DistanceMatrix,
    r: &'a [f64],
    d_max: f64,
    tie: TieBreak,
}

impl Rescorer for FromScratch<'_> {
    fn diversity(&mut self, candidates: &[usize]) -> (Vec<f64>, Vec<Option<usize>>) {
        directed_diversity_with(self.dm, self.r, candidates, self.d_max, self.tie)
    }

    fn remove(&mut self, _batch: &[usize], _remaining: &[usize]) {}
}

/// Directed diversity maintained across removals.
///
/// After a batch is removed, only frames whose recorded substitute was in the
/// batch are recomputed. Every other survivor keeps its value: a minimum over a
/// shrunken set that still holds the old argmin is unchanged, and a frame with
/// no substitutes cannot gain one.
#[derive(Debug, Clone)]
pub struct IncrementalDiversity<'a> {
    dm: &'a DistanceMatrix,
    r: &'a [f64],
    d_max: f64,
    tie: TieBreak,
    diversity: Vec<f64>,
    substitute: Vec<Option<usize>>,
    recomputed: usize,
}

impl<'a> IncrementalDiversity<'a> {
    pub fn new(
        dm: &'a DistanceMatrix,
        r: &'a [f64],
        candidates: &[usize],
        d_max: f64,
        tie: TieBreak,
    ) -> Result<Self> {
        check_candidates(dm, r, candidates)?;
        let n = dm.len();
        let mut diversity = vec![d_max; n];
        let mut substitute = vec![None; n];
        let (d, sub) = directed_diversity_with(dm, r, candidates, d_max, tie);
        for (k, &i) in candidates.iter().enumerate() {
            diversity[i] = d[k];
            substitute[i] = sub[k];
        }
        Ok(Self {
            dm,
            r,
            d_max,
            tie,
            diversity,
            substitute,
            recomputed: 0,
        })
    }

    pub fn diversity_of(&self, frame: usize) -> f64 {
        self.diversity[frame]
    }

    pub fn substitute_of(&self, frame: usize) -> Option<usize> {
        self.substitute[frame]
    }

    /// Total number of per-frame recomputations so far.
    pub fn recomputed(&self) -> usize {
        self.recomputed
    }

    /// Drops `batch` from the pool; `remaining` is the pool afterwards.
    /// Returns how many frames needed recomputation.
    pub fn remove(&mut self, batch: &[usize], remaining: &[usize]) -> usize {
        let mut removed = vec![false; self.dm.len()];
        for &b in batch {
            removed[b] = true;
        }
        let mut count = 0;
        for &i in remaining {
            let Some(j) = self.substitute[i] else {
                continue;
            };
            if !removed[j] {
                continue;
            }
            count += 1;
            match nearest_substitute(self.dm, self.r, self.tie, remaining, i) {
                Some((j, dist)) => {
                    self.diversity[i] = f64::from(dist);
                    self.substitute[i] = Some(j);
                }
                None => {
                    self.diversity[i] = self.d_max;
                    self.substitute[i] = None;
                }
            }
        }
        self.recomputed += count;
        count
    }
}

impl Rescorer for IncrementalDiversity<'_> {
    fn diversity(&mut self, candidates: &[usize]) -> (Vec<f64>, Vec<Option<usize>>) {
        candidates
            .iter()
            .map(|&i| (self.diversity[i], self.substitute[i]))
            .unzip()
    }

    fn remove(&mut self, batch: &[usize], remaining: &[usize]) {
        IncrementalDiversity::remove(self, batch, remaining);
    }
}

/// Inputs shared by every selector run: working distances, relevance and the
/// frozen pool diameter.
pub(crate) struct Prepared {
    pub dm: DistanceMatrix,
    pub relevance: Vec<f64>,
    pub d_max: f64,
}

pub(crate) enum RelevanceSource<'a> {
    Query(&'a QueryEmbedding),
    Given(&'a [f64]),
}

pub(crate) fn prepare(
    frames: &EmbeddingMatrix,
    source: RelevanceSource<'_>,
    cfg: &SelectorConfig,
) -> Result<Prepared> {
    cfg.validate(frames.n_frames())?;
    let normalized;
    let working = if cfg.normalize_embeddings {
        normalized = l2_normalize(frames)?;
        &normalized
    } else {
        frames
    };
    let relevance = match source {
        RelevanceSource::Query(q) => compute_relevance(working, q)?,
        RelevanceSource::Given(r) => {
            if r.len() != frames.n_frames() {
                return Err(Error::DimensionMismatch {
                    expected: frames.n_frames(),
                    actual: r.len(),
                });
            }
            if let Some(pos) = r.iter().position(|x| !(0.0..=1.0).contains(x)) {
                return Err(Error::InvalidInput(format!(
                    "relevance {} at frame {pos} is outside [0, 1]",
                    r[pos]
                )));
            }
            r.to_vec()
        }
    };
    let dm = pairwise_sq_distances(working);
    let all: Vec<usize> = (0..frames.n_frames()).collect();
    let d_max = f64::from(max_pairwise_distance(&dm, &all)?);
    Ok(Prepared {
        dm,
        relevance,
        d_max,
    })
}

/// The select, remove and re-score loop shared by every batched selector.
pub(crate) fn refine<R: Rescorer>(
    r: &[f64],
    d_max: f64,
    cfg: &SelectorConfig,
    rescorer: &mut R,
) -> SelectionResult {
    let mut candidates: Vec<usize> = (0..r.len()).collect();
    let mut picked: Vec<(usize, f64)> = Vec::with_capacity(cfg.budget_k);
    let mut trace = Vec::new();

    while picked.len() < cfg.budget_k {
        let (diversity, substitute) = rescorer.diversity(&candidates);
        let relevance: Vec<f64> = candidates.iter().map(|&i| r[i]).collect();
        let score: Vec<f64> = relevance
            .iter()
            .zip(&diversity)
            .map(|(a, b)| a * b)
            .collect();

        let b = cfg.batch_b.min(cfg.budget_k - picked.len());
        let positions = top_positions(&candidates, &score, b);
        let batch: Vec<usize> = positions.iter().map(|&p| candidates[p]).collect();
        picked.extend(positions.iter().map(|&p| (candidates[p], score[p])));

        trace.push(IterationRecord {
            iteration: trace.len() + 1,
            candidate_count: candidates.len(),
            batch: batch.clone(),
            scores: ScoreTable {
                candidates: candidates.clone(),
                relevance,
                diversity,
                score,
                substitute,
            },
        });

        candidates.retain(|i| !batch.contains(i));
        rescorer.remove(&batch, &candidates);
    }

    match cfg.output_order {
        OutputOrder::Temporal => picked.sort_by_key(|&(i, _)| i),
        OutputOrder::ScoreDescending => {
            picked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)))
        }
    }
    let (selected, selected_scores) = picked.into_iter().unzip();
    SelectionResult {
        selected,
        selected_scores,
        trace,
        d_max,
    }
}

fn run_from_scratch(p: &Prepared, cfg: &SelectorConfig) -> SelectionResult {
    let mut rescorer = FromScratch {
        dm: &p.dm,
        r: &p.relevance,
        d_max: p.d_max,
        tie: cfg.substitute_tie_break,
    };
    refine(&p.relevance, p.d_max, cfg, &mut rescorer)
}

fn run_incremental(p: &Prepared, cfg: &SelectorConfig) -> Result<SelectionResult> {
    let all: Vec<usize> = (0..p.relevance.len()).collect();
    let mut rescorer =
        IncrementalDiversity::new(&p.dm, &p.relevance, &all, p.d_max, cfg.substitute_tie_break)?;
    Ok(refine(&p.relevance, p.d_max, cfg, &mut rescorer))
}

/// Selects `cfg.budget_k` frames, re-scoring every survivor from scratch after
/// each batch.
pub fn select(
    frames: &EmbeddingMatrix,
    query: &QueryEmbedding,
    cfg: &SelectorConfig,
) -> Result<SelectionResult> {
    let p = prepare(frames, RelevanceSource::Query(query), cfg)?;
    Ok(run_from_scratch(&p, cfg))
}

/// Like [`select`], but with relevance supplied directly (already in `[0, 1]`)
/// instead of derived from a query.
pub fn select_with_relevance(
    frames: &EmbeddingMatrix,
    relevance: &[f64],
    cfg: &SelectorConfig,
) -> Result<SelectionResult> {
    let p = prepare(frames, RelevanceSource::Given(relevance), cfg)?;
    Ok(run_from_scratch(&p, cfg))
}

/// Same output as [`select`], bit for bit, recomputing only the survivors whose
/// nearest substitute was removed.
pub fn select_incremental(
    frames: &EmbeddingMatrix,
    query: &QueryEmbedding,
    cfg: &SelectorConfig,
) -> Result<SelectionResult> {
    let p = prepare(frames, RelevanceSource::Query(query), cfg)?;
    run_incremental(&p, cfg)
}

pub fn select_incremental_with_relevance(
    frames: &EmbeddingMatrix,
    relevance: &[f64],
    cfg: &SelectorConfig,
) -> Result<SelectionResult> {
    let p = prepare(frames, RelevanceSource::Given(relevance), cfg)?;
    run_incremental(&p, cfg)
}

/// The single-pass ablation: top-K by the initial scores (`B = K`).
pub fn select_one_shot(
    frames: &EmbeddingMatrix,
    query: &QueryEmbedding,
    cfg: &SelectorConfig,
) -> Result<SelectionResult> {
    let cfg = cfg.clone().with_batch(cfg.budget_k.max(1));
    select(frames, query, &cfg)
}
