//! Reference selectors for comparisons and ablations.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::math::{cosine_similarity, DistanceMatrix, EmbeddingMatrix, QueryEmbedding};
use crate::selector::{
    self, raw_relevance, RelevanceSource, Rescorer, SelectionResult, SelectorConfig,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineKind {
    Uniform,
    TopRelevance,
    UndirectedDiversity,
    MmrGreedy,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BaselinePolicy {
    pub kind: BaselineKind,
    /// Redundancy weight, used by [`BaselineKind::MmrGreedy`] only.
    pub lambda: f64,
}

impl BaselinePolicy {
    pub const DEFAULT_LAMBDA: f64 = 0.5;

    pub fn new(kind: BaselineKind) -> Self {
        Self {
            kind,
            lambda: Self::DEFAULT_LAMBDA,
        }
    }

    pub fn with_lambda(kind: BaselineKind, lambda: f64) -> Result<Self> {
        if !lambda.is_finite() || lambda < 0.0 {
            return Err(Error::InvalidInput(format!(
                "lambda must be finite and non-negative, got {lambda}"
            )));
        }
        Ok(Self { kind, lambda })
    }
}

fn check_budget(k: usize, n: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidInput("budget K must be at least 1".into()));
    }
    if k > n {
        return Err(Error::BudgetExceedsPool { budget: k, pool: n });
    }
    Ok(())
}

/// Midpoints of `k` equal strides over `0..n`: `floor((2i + 1) * n / (2k))`.
pub fn uniform_select(n_frames: usize, k: usize) -> Result<Vec<usize>> {
    check_budget(k, n_frames)?;
    Ok((0..k)
        .map(|i| (((2 * i + 1) * n_frames) / (2 * k)).min(n_frames - 1))
        .collect())
}

/// `k` largest entries of `r`, returned in ascending index order.
pub fn top_relevance_select(r: &[f64], k: usize) -> Result<Vec<usize>> {
    check_budget(k, r.len())?;
    let all: Vec<usize> = (0..r.len()).collect();
    let mut picked = selector::top_positions(&all, r, k);
    picked.sort_unstable();
    Ok(picked)
}

struct MeanDistance<'a> {
    dm: &'a DistanceMatrix,
}

impl Rescorer for MeanDistance<'_> {
    fn diversity(&mut self, candidates: &[usize]) -> (Vec<f64>, Vec<Option<usize>>) {
        let m = candidates.len();
        candidates
            .iter()
            .map(|&i| {
                if m < 2 {
                    return (0.0, None);
                }
                let row = self.dm.row(i);
                let sum: f64 = candidates
                    .iter()
                    .filter(|&&j| j != i)
                    .map(|&j| f64::from(row[j]))
                    .sum();
                (sum / (m - 1) as f64, None)
            })
            .unzip()
    }

    fn remove(&mut self, _batch: &[usize], _remaining: &[usize]) {}
}

/// Mean distance to the other candidates, aligned with `candidates`; 0 for a
/// lone candidate.
pub fn undirected_diversity(dm: &DistanceMatrix, candidates: &[usize]) -> Vec<f64> {
    MeanDistance { dm }.diversity(candidates).0
}

/// The batched selector with relevance-agnostic diversity: each candidate's
/// diversity is its mean distance to the rest of the current pool.
pub fn undirected_diversity_select(
    frames: &EmbeddingMatrix,
    query: &QueryEmbedding,
    cfg: &SelectorConfig,
) -> Result<SelectionResult> {
    let p = selector::prepare(frames, RelevanceSource::Query(query), cfg)?;
    let mut rescorer = MeanDistance { dm: &p.dm };
    Ok(selector::refine(&p.relevance, p.d_max, cfg, &mut rescorer))
}

pub fn undirected_diversity_select_with_relevance(
    frames: &EmbeddingMatrix,
    relevance: &[f64],
    cfg: &SelectorConfig,
) -> Result<SelectionResult> {
    let p = selector::prepare(frames, RelevanceSource::Given(relevance), cfg)?;
    let mut rescorer = MeanDistance { dm: &p.dm };
    Ok(selector::refine(&p.relevance, p.d_max, cfg, &mut rescorer))
}

/// Pairwise cosine similarities between all rows.
pub fn cosine_matrix(frames: &EmbeddingMatrix) -> Result<Vec<Vec<f64>>> {
    let n = frames.n_frames();
    let mut sims = vec![vec![0.0; n]; n];
    #[allow(clippy::needless_range_loop)]
    for i in 0..n {
        for j in i..n {
            let s = cosine_similarity(frames.row(i), frames.row(j)).map_err(|e| match e {
                Error::ZeroNormVector("a") => Error::ZeroNormRow(i),
                Error::ZeroNormVector("b") => Error::ZeroNormRow(j),
                other => other,
            })?;
            sims[i][j] = s;
            sims[j][i] = s;
        }
    }
    Ok(sims)
}

/// Relevance-minus-redundancy objective of a subset: the sum of raw query
/// cosines minus `lambda` times the sum of cosines over unordered pairs.
pub fn mmr_objective(relevance: &[f64], sims: &[Vec<f64>], subset: &[usize], lambda: f64) -> f64 {
    let total: f64 = subset.iter().map(|&i| relevance[i]).sum();
    let mut redundancy = 0.0;
    for (a, &i) in subset.iter().enumerate() {
        for &j in &subset[a + 1..] {
            redundancy += sims[i][j];
        }
    }
    total - lambda * redundancy
}

/// Greedy maximization of [`mmr_objective`] on precomputed relevance and
/// similarities. Picks in greedy order; ties go to the smaller index.
pub fn mmr_greedy_order(
    relevance: &[f64],
    sims: &[Vec<f64>],
    k: usize,
    lambda: f64,
) -> Result<Vec<usize>> {
    check_budget(k, relevance.len())?;
    let n = relevance.len();
    let mut taken = vec![false; n];
    let mut redundancy = vec![0.0f64; n];
    let mut order = Vec::with_capacity(k);
    for _ in 0..k {
        let mut best: Option<(usize, f64)> = None;
        for i in (0..n).filter(|&i| !taken[i]) {
            let gain = relevance[i] - lambda * redundancy[i];
            if best.is_none_or(|(_, g)| gain > g) {
                best = Some((i, gain));
            }
        }
        let (pick, _) = best.expect("k <= n leaves a candidate");
        taken[pick] = true;
        order.push(pick);
        for (i, red) in redundancy.iter_mut().enumerate() {
            *red += sims[i][pick];
        }
    }
    Ok(order)
}

/// Greedy relevance-minus-redundancy selection on raw (un-normalized) query
/// cosines. Output in ascending index order.
pub fn mmr_greedy_select(
    frames: &EmbeddingMatrix,
    query: &QueryEmbedding,
    k: usize,
    lambda: f64,
) -> Result<Vec<usize>> {
    BaselinePolicy::with_lambda(BaselineKind::MmrGreedy, lambda)?;
    check_budget(k, frames.n_frames())?;
    let relevance = raw_relevance(frames, query)?;
    let sims = cosine_matrix(frames)?;
    let mut picked = mmr_greedy_order(&relevance, &sims, k, lambda)?;
    picked.sort_unstable();
    Ok(picked)
}
