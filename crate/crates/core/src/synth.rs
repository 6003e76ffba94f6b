//! Seeded synthetic "videos" with planted events, selection metrics, and
//! parameter sweeps over whole corpora.
//!
//! A video is a sequence of unit embeddings of three kinds:
//! - event frames: a short trajectory around a center with high query
//!   cosine; the middle frame is the most relevant and neighbours drift away
//!   slowly, so adjacent frames look alike;
//! - filler frames: near-duplicates of one background center with low
//!   query cosine;
//! - noise frames: isolated random directions with the lowest query cosine.

use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::baselines::{self, uniform_select};
use crate::error::{Error, Result};
use crate::math::{cosine_similarity, EmbeddingMatrix, QueryEmbedding};
use crate::selector::{self, SelectorConfig};
use crate::Execution;

/// Query cosine range for event centers.
const EVENT_COSINE: (f64, f64) = (0.55, 0.75);
/// Per-frame step along an event's motion direction.
const EVENT_STEP: f64 = 0.25;
const FILLER_COSINE: f64 = 0.1;
const NOISE_COSINE: (f64, f64) = (-0.3, -0.1);
const MAX_ATTEMPTS: u32 = 64;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SyntheticVideoSpec {
    pub n_frames: usize,
    pub dim: usize,
    pub n_events: usize,
    pub event_span: usize,
    /// Fraction of the non-event frames that are background filler; the rest are noise.
    pub duplicate_rate: f64,
    /// Norm of the Gaussian perturbation added to every frame before normalizing.
    pub noise_sigma: f64,
    pub seed: u64,
}

impl Default for SyntheticVideoSpec {
    fn default() -> Self {
        Self {
            n_frames: 128,
            dim: 32,
            n_events: 3,
            event_span: 5,
            duplicate_rate: 0.6,
            noise_sigma: 0.05,
            seed: 0,
        }
    }
}

impl SyntheticVideoSpec {
    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("n_frames", self.n_frames),
            ("dim", self.dim),
            ("n_events", self.n_events),
            ("event_span", self.event_span),
        ];
        if let Some((name, _)) = counts.iter().find(|(_, v)| *v == 0) {
            return Err(Error::InvalidInput(format!("{name} must be at least 1")));
        }
        if self.dim < 3 {
            return Err(Error::InvalidInput("dim must be at least 3".into()));
        }
        if self.n_events.saturating_mul(self.event_span) > self.n_frames {
            return Err(Error::InvalidInput(format!(
                "{} events of span {} do not fit in {} frames",
                self.n_events, self.event_span, self.n_frames
            )));
        }
        if !(0.0..=1.0).contains(&self.duplicate_rate) {
            return Err(Error::InvalidInput(format!(
                "duplicate_rate {} outside [0, 1]",
                self.duplicate_rate
            )));
        }
        if !self.noise_sigma.is_finite() || self.noise_sigma < 0.0 {
            return Err(Error::InvalidInput(format!(
                "noise_sigma {} must be finite and non-negative",
                self.noise_sigma
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroundTruth {
    /// One ascending, contiguous index list per event, in temporal order.
    pub event_frames: Vec<Vec<usize>>,
    pub noise_frames: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticVideo {
    pub frames: EmbeddingMatrix,
    pub query: QueryEmbedding,
    pub truth: GroundTruth,
    /// How many draws it took to satisfy the event/noise separation check.
    pub attempts: u32,
}

fn gaussian(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    (0..dim)
        .map(|_| rng.sample::<f64, _>(StandardNormal))
        .collect()
}

fn normalized(mut v: Vec<f64>) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= n);
    v
}

/// Random unit vector orthogonal to the unit vector `axis`.
fn orthogonal_unit(rng: &mut ChaCha8Rng, axis: &[f64]) -> Vec<f64> {
    loop {
        let mut v = gaussian(rng, axis.len());
        let proj: f64 = v.iter().zip(axis).map(|(a, b)| a * b).sum();
        v.iter_mut().zip(axis).for_each(|(x, a)| *x -= proj * a);
        if v.iter().map(|x| x * x).sum::<f64>() > 1e-12 {
            return normalized(v);
        }
    }
}

/// `cos * axis + sin * perp`, a unit vector at the given cosine to `axis`.
fn at_cosine(axis: &[f64], perp: &[f64], cos: f64) -> Vec<f64> {
    let sin = (1.0 - cos * cos).max(0.0).sqrt();
    axis.iter()
        .zip(perp)
        .map(|(a, p)| cos * a + sin * p)
        .collect()
}

fn perturbed_unit(rng: &mut ChaCha8Rng, base: &[f64], sigma: f64) -> Vec<f32> {
    let mut v = base.to_vec();
    if sigma > 0.0 {
        let scale = sigma / (base.len() as f64).sqrt();
        let g = gaussian(rng, base.len());
        v.iter_mut().zip(g).for_each(|(x, e)| *x += scale * e);
    }
    normalized(v).into_iter().map(|x| x as f32).collect()
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Slot {
    Event,
    Filler,
    Noise,
}

fn draw(
    spec: &SyntheticVideoSpec,
    rng: &mut ChaCha8Rng,
) -> Result<(EmbeddingMatrix, QueryEmbedding, GroundTruth)> {
    let n = spec.n_frames;
    let dim = spec.dim;
    let query = normalized(gaussian(rng, dim));

    // Event placement: sorted gap offsets keep intervals disjoint and ordered.
    let free = n - spec.n_events * spec.event_span;
    let mut offsets: Vec<usize> = (0..spec.n_events)
        .map(|_| rng.random_range(0..=free))
        .collect();
    offsets.sort_unstable();
    let mut slots = vec![Slot::Filler; n];
    let mut event_frames = Vec::with_capacity(spec.n_events);
    for (e, &off) in offsets.iter().enumerate() {
        let start = off + e * spec.event_span;
        let span: Vec<usize> = (start..start + spec.event_span).collect();
        for &i in &span {
            slots[i] = Slot::Event;
        }
        event_frames.push(span);
    }

    let mut rest: Vec<usize> = (0..n).filter(|&i| slots[i] != Slot::Event).collect();
    let n_filler = (spec.duplicate_rate * rest.len() as f64).round() as usize;
    rest.shuffle(rng);
    let mut noise_frames: Vec<usize> = rest[n_filler..].to_vec();
    for &i in &noise_frames {
        slots[i] = Slot::Noise;
    }
    noise_frames.sort_unstable();

    let mut rows: Vec<Vec<f32>> = vec![Vec::new(); n];

    let background = at_cosine(&query, &orthogonal_unit(rng, &query), FILLER_COSINE);
    for i in 0..n {
        if slots[i] == Slot::Filler {
            rows[i] = perturbed_unit(rng, &background, spec.noise_sigma);
        }
    }

    let mid = (spec.event_span as f64 - 1.0) / 2.0;
    for span in &event_frames {
        let cos = rng.random_range(EVENT_COSINE.0..EVENT_COSINE.1);
        let center = at_cosine(&query, &orthogonal_unit(rng, &query), cos);
        let motion = orthogonal_unit(rng, &query);
        for (t, &i) in span.iter().enumerate() {
            let offset = (t as f64 - mid) * EVENT_STEP;
            let base: Vec<f64> = center
                .iter()
                .zip(&motion)
                .map(|(c, m)| c + offset * m)
                .collect();
            rows[i] = perturbed_unit(rng, &base, spec.noise_sigma);
        }
    }

    for &i in &noise_frames {
        let cos = rng.random_range(NOISE_COSINE.0..NOISE_COSINE.1);
        let dir = at_cosine(&query, &orthogonal_unit(rng, &query), cos);
        rows[i] = perturbed_unit(rng, &dir, spec.noise_sigma);
    }

    let frames = EmbeddingMatrix::from_rows(&rows)?;
    let query = QueryEmbedding::new(query.into_iter().map(|x| x as f32).collect())?;
    Ok((
        frames,
        query,
        GroundTruth {
            event_frames,
            noise_frames,
        },
    ))
}

/// True when every event frame's query cosine beats every noise frame's.
pub fn planted_separation(
    frames: &EmbeddingMatrix,
    query: &QueryEmbedding,
    truth: &GroundTruth,
) -> Result<bool> {
    let cos = |i: usize| cosine_similarity(frames.row(i), query.as_slice());
    let mut min_event = f64::INFINITY;
    for &i in truth.event_frames.iter().flatten() {
        min_event = min_event.min(cos(i)?);
    }
    let mut max_noise = f64::NEG_INFINITY;
    for &i in &truth.noise_frames {
        max_noise = max_noise.max(cos(i)?);
    }
    Ok(min_event > max_noise)
}

/// Generates one video. Deterministic in `spec.seed`; redraws (from the same
/// stream) until event frames are strictly more query-relevant than noise.
pub fn generate(spec: &SyntheticVideoSpec) -> Result<SyntheticVideo> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    for attempt in 1..=MAX_ATTEMPTS {
        let (frames, query, truth) = draw(spec, &mut rng)?;
        if planted_separation(&frames, &query, &truth)? {
            return Ok(SyntheticVideo {
                frames,
                query,
                truth,
                attempts: attempt,
            });
        }
    }
    Err(Error::InvalidInput(format!(
        "no draw separated events from noise in {MAX_ATTEMPTS} attempts; lower noise_sigma"
    )))
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// `videos` copies of `base` with per-video seeds derived from `corpus_seed`.
pub fn corpus(
    base: &SyntheticVideoSpec,
    videos: usize,
    corpus_seed: u64,
) -> Vec<SyntheticVideoSpec> {
    (0..videos as u64)
        .map(|i| SyntheticVideoSpec {
            seed: splitmix64(corpus_seed ^ splitmix64(i)),
            ..base.clone()
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct SelectionMetrics {
    /// Fraction of events with at least one selected frame.
    pub event_recall: f64,
    /// Fraction of all event frames that were selected.
    pub frame_recall: f64,
    /// Fraction of events with at least two selected frames.
    pub temporal_coverage: f64,
    /// Fraction of selected frames that are noise.
    pub noise_rate: f64,
    /// Mean pairwise cosine among selected frames; 0 for a single frame.
    pub redundancy: f64,
}

impl SelectionMetrics {
    fn add(&mut self, other: &Self) {
        self.event_recall += other.event_recall;
        self.frame_recall += other.frame_recall;
        self.temporal_coverage += other.temporal_coverage;
        self.noise_rate += other.noise_rate;
        self.redundancy += other.redundancy;
    }

    fn scale(&mut self, f: f64) {
        self.event_recall *= f;
        self.frame_recall *= f;
        self.temporal_coverage *= f;
        self.noise_rate *= f;
        self.redundancy *= f;
    }

    /// Element-wise mean, accumulated in slice order.
    pub fn mean(items: &[Self]) -> Self {
        let mut acc = Self::default();
        for m in items {
            acc.add(m);
        }
        if !items.is_empty() {
            acc.scale(1.0 / items.len() as f64);
        }
        acc
    }
}

pub fn evaluate(
    selected: &[usize],
    truth: &GroundTruth,
    frames: &EmbeddingMatrix,
) -> Result<SelectionMetrics> {
    let n = frames.n_frames();
    if selected.is_empty() {
        return Err(Error::InvalidInput("empty selection".into()));
    }
    let mut chosen = vec![false; n];
    for &i in selected {
        if i >= n {
            return Err(Error::InvalidInput(format!(
                "selected index {i} out of range for {n} frames"
            )));
        }
        if chosen[i] {
            return Err(Error::InvalidInput(format!(
                "selected index {i} appears twice"
            )));
        }
        chosen[i] = true;
    }
    let mut sorted = selected.to_vec();
    sorted.sort_unstable();

    let n_events = truth.event_frames.len().max(1) as f64;
    let mut hit = 0usize;
    let mut covered = 0usize;
    let mut event_hits = 0usize;
    let mut event_total = 0usize;
    for span in &truth.event_frames {
        let c = span.iter().filter(|&&i| i < n && chosen[i]).count();
        event_hits += c;
        event_total += span.len();
        hit += usize::from(c >= 1);
        covered += usize::from(c >= 2);
    }
    let noise = truth
        .noise_frames
        .iter()
        .filter(|&&i| i < n && chosen[i])
        .count();

    let mut redundancy = 0.0;
    let pairs = sorted.len() * (sorted.len() - 1) / 2;
    if pairs > 0 {
        for (a, &i) in sorted.iter().enumerate() {
            for &j in &sorted[a + 1..] {
                redundancy +=
                    cosine_similarity(frames.row(i), frames.row(j)).map_err(|e| match e {
                        Error::ZeroNormVector("a") => Error::ZeroNormRow(i),
                        Error::ZeroNormVector("b") => Error::ZeroNormRow(j),
                        other => other,
                    })?;
            }
        }
        redundancy /= pairs as f64;
    }

    Ok(SelectionMetrics {
        event_recall: hit as f64 / n_events,
        frame_recall: if event_total == 0 {
            0.0
        } else {
            event_hits as f64 / event_total as f64
        },
        temporal_coverage: covered as f64 / n_events,
        noise_rate: noise as f64 / selected.len() as f64,
        redundancy,
    })
}

/// A selector under evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Policy {
    Gift,
    /// `B = K`: top-K by the first-iteration scores.
    GiftOneShot,
    Uniform,
    TopRelevance,
    Undirected,
    Mmr {
        lambda: f64,
    },
}

impl Policy {
    pub fn parse(name: &str, lambda: f64) -> Result<Self> {
        Ok(match name {
            "gift" => Policy::Gift,
            "gift-oneshot" | "oneshot" => Policy::GiftOneShot,
            "uniform" => Policy::Uniform,
            "toprel" => Policy::TopRelevance,
            "undirected" => Policy::Undirected,
            "mmr" => Policy::Mmr { lambda },
            other => {
                return Err(Error::InvalidInput(format!(
                    "unknown policy '{other}' (expected gift, gift-oneshot, uniform, toprel, undirected or mmr)"
                )))
            }
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Policy::Gift => "gift",
            Policy::GiftOneShot => "gift-oneshot",
            Policy::Uniform => "uniform",
            Policy::TopRelevance => "toprel",
            Policy::Undirected => "undirected",
            Policy::Mmr { .. } => "mmr",
        }
    }

    /// Whether the batch size changes this policy's output.
    pub fn uses_batch(&self) -> bool {
        matches!(self, Policy::Gift | Policy::Undirected)
    }

    /// Runs the policy on one video and returns the selected indices.
    pub fn run(
        &self,
        frames: &EmbeddingMatrix,
        query: &QueryEmbedding,
        budget: usize,
        batch: usize,
    ) -> Result<Vec<usize>> {
        let cfg = SelectorConfig::new(budget).with_batch(batch);
        Ok(match *self {
            Policy::Gift => selector::select(frames, query, &cfg)?.selected,
            Policy::GiftOneShot => selector::select_one_shot(frames, query, &cfg)?.selected,
            Policy::Uniform => uniform_select(frames.n_frames(), budget)?,
            Policy::TopRelevance => baselines::top_relevance_select(
                &selector::compute_relevance(frames, query)?,
                budget,
            )?,
            Policy::Undirected => {
                baselines::undirected_diversity_select(frames, query, &cfg)?.selected
            }
            Policy::Mmr { lambda } => baselines::mmr_greedy_select(frames, query, budget, lambda)?,
        })
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One (policy, K, B) cell with metrics averaged over the corpus.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub policy: String,
    #[serde(rename = "K")]
    pub budget: usize,
    /// `None` for policies that ignore the batch size.
    #[serde(rename = "B")]
    pub batch: Option<usize>,
    pub videos: usize,
    #[serde(flatten)]
    pub metrics: SelectionMetrics,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
}

impl SweepReport {
    pub fn row(&self, policy: &str, budget: usize, batch: Option<usize>) -> Option<&SweepRow> {
        self.rows
            .iter()
            .find(|r| r.policy == policy && r.budget == budget && r.batch == batch)
    }
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    policy: Policy,
    budget: usize,
    batch: Option<usize>,
}

fn map_indexed<T, U, F>(items: &[T], exec: Execution, f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(usize, &T) -> U + Sync + Send,
{
    if exec.is_parallel() {
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            return items.par_iter().enumerate().map(|(i, t)| f(i, t)).collect();
        }
    }
    items.iter().enumerate().map(|(i, t)| f(i, t)).collect()
}

/// Generates every video in `corpus`.
pub fn generate_corpus(
    corpus: &[SyntheticVideoSpec],
    exec: Execution,
) -> Result<Vec<SyntheticVideo>> {
    map_indexed(corpus, exec, |_, spec| generate(spec))
        .into_iter()
        .collect()
}

/// Mean metrics for every (policy, K, B) combination over the corpus, using
/// the default [`Execution`].
pub fn run_sweep(
    corpus: &[SyntheticVideoSpec],
    policies: &[Policy],
    budgets: &[usize],
    batch_sizes: &[usize],
) -> Result<SweepReport> {
    run_sweep_with(corpus, policies, budgets, batch_sizes, Execution::default())
}

/// Rows come out ordered by policy, then K, then B, as listed. Cells and
/// videos may be evaluated in parallel; per-cell means are always accumulated
/// in corpus order, so the report does not depend on `exec`.
pub fn run_sweep_with(
    corpus: &[SyntheticVideoSpec],
    policies: &[Policy],
    budgets: &[usize],
    batch_sizes: &[usize],
    exec: Execution,
) -> Result<SweepReport> {
    if corpus.is_empty() || policies.is_empty() || budgets.is_empty() || batch_sizes.is_empty() {
        return Err(Error::InvalidInput(
            "sweep needs a nonempty corpus, policy list, budget list and batch-size list".into(),
        ));
    }
    let videos = generate_corpus(corpus, exec)?;

    let mut cells = Vec::new();
    for &policy in policies {
        for &budget in budgets {
            if policy.uses_batch() {
                cells.extend(batch_sizes.iter().map(|&b| Cell {
                    policy,
                    budget,
                    batch: Some(b),
                }));
            } else {
                cells.push(Cell {
                    policy,
                    budget,
                    batch: None,
                });
            }
        }
    }

    let jobs: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|c| (0..videos.len()).map(move |v| (c, v)))
        .collect();
    let results = map_indexed(&jobs, exec, |_, &(c, v)| {
        let cell = cells[c];
        let video = &videos[v];
        let batch = cell.batch.unwrap_or(SelectorConfig::DEFAULT_BATCH);
        cell.policy
            .run(&video.frames, &video.query, cell.budget, batch)
            .and_then(|sel| evaluate(&sel, &video.truth, &video.frames))
            .map_err(|e| Error::Cell {
                policy: cell.policy.name().to_string(),
                budget: cell.budget,
                batch: cell.batch.map_or_else(|| "-".into(), |b| b.to_string()),
                video: v,
                source: Box::new(e),
            })
    });
    let metrics: Vec<SelectionMetrics> = results.into_iter().collect::<Result<_>>()?;

    let rows = cells
        .iter()
        .zip(metrics.chunks(videos.len()))
        .map(|(cell, per_video)| SweepRow {
            policy: cell.policy.name().to_string(),
            budget: cell.budget,
            batch: cell.batch,
            videos: videos.len(),
            metrics: SelectionMetrics::mean(per_video),
        })
        .collect();
    Ok(SweepReport { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::pairwise_sq_distances;

    fn small(seed: u64) -> SyntheticVideoSpec {
        SyntheticVideoSpec {
            n_frames: 32,
            n_events: 2,
            event_span: 3,
            seed,
            ..Default::default()
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let a = generate(&small(7)).unwrap();
        let b = generate(&small(7)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.frames, generate(&small(8)).unwrap().frames);
    }

    #[test]
    fn zero_sigma_full_duplicates_share_one_row() {
        let spec = SyntheticVideoSpec {
            noise_sigma: 0.0,
            duplicate_rate: 1.0,
            ..small(3)
        };
        let v = generate(&spec).unwrap();
        assert!(v.truth.noise_frames.is_empty());
        let events: Vec<usize> = v.truth.event_frames.iter().flatten().copied().collect();
        let filler: Vec<usize> = (0..32).filter(|i| !events.contains(i)).collect();
        assert_eq!(filler.len(), 32 - 6);
        let dm = pairwise_sq_distances(&v.frames);
        for &i in &filler {
            assert_eq!(v.frames.row(i), v.frames.row(filler[0]));
            assert_eq!(dm.get(i, filler[0]), 0.0);
        }
    }

    #[test]
    fn ground_truth_is_a_partition() {
        for seed in 0..100u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let events = rng.random_range(1..5usize);
            let span = rng.random_range(1..6usize);
            let spec = SyntheticVideoSpec {
                n_frames: events * span + rng.random_range(0..40usize),
                dim: rng.random_range(3..24usize),
                n_events: events,
                event_span: span,
                duplicate_rate: rng.random_range(0.0..=1.0),
                noise_sigma: rng.random_range(0.0..0.1),
                seed,
            };
            let v = generate(&spec).unwrap();
            let n = spec.n_frames;
            let mut owner = vec![0u8; n];
            for span_idx in &v.truth.event_frames {
                assert_eq!(span_idx.len(), spec.event_span);
                assert!(span_idx.windows(2).all(|w| w[1] == w[0] + 1));
                for &i in span_idx {
                    owner[i] += 1;
                }
            }
            for &i in &v.truth.noise_frames {
                owner[i] += 1;
            }
            assert!(owner.iter().all(|&c| c <= 1), "overlap for seed {seed}");
            assert!(planted_separation(&v.frames, &v.query, &v.truth).unwrap());
            for row in v.frames.rows() {
                let norm: f64 = row
                    .iter()
                    .map(|&x| f64::from(x) * f64::from(x))
                    .sum::<f64>()
                    .sqrt();
                assert!((norm - 1.0).abs() < 1e-5);
            }
        }
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let bad = [
            SyntheticVideoSpec {
                n_events: 0,
                ..small(0)
            },
            SyntheticVideoSpec {
                n_events: 11,
                event_span: 3,
                ..small(0)
            },
            SyntheticVideoSpec {
                duplicate_rate: 1.5,
                ..small(0)
            },
            SyntheticVideoSpec {
                noise_sigma: -1.0,
                ..small(0)
            },
        ];
        for spec in bad {
            assert!(generate(&spec).is_err(), "{spec:?}");
        }
    }

    fn toy_truth() -> (GroundTruth, EmbeddingMatrix) {
        let rows: Vec<[f32; 3]> = (0..10)
            .map(|i| [1.0 + i as f32, (i * i) as f32 * 0.1, 1.0])
            .collect();
        (
            GroundTruth {
                event_frames: vec![vec![1, 2, 3], vec![6, 7]],
                noise_frames: vec![0, 9],
            },
            EmbeddingMatrix::from_rows(&rows).unwrap(),
        )
    }

    #[test]
    fn metric_examples() {
        let (truth, frames) = toy_truth();
        let one_each = evaluate(&[2, 7], &truth, &frames).unwrap();
        assert_eq!(one_each.event_recall, 1.0);
        assert_eq!(one_each.temporal_coverage, 0.0);
        assert_eq!(one_each.frame_recall, 2.0 / 5.0);
        assert_eq!(one_each.noise_rate, 0.0);

        let noise = evaluate(&[0, 9], &truth, &frames).unwrap();
        assert_eq!(noise.event_recall, 0.0);
        assert_eq!(noise.noise_rate, 1.0);

        let single = evaluate(&[4], &truth, &frames).unwrap();
        assert_eq!(single.redundancy, 0.0);

        let both = evaluate(&[1, 2, 6, 7], &truth, &frames).unwrap();
        assert_eq!(both.temporal_coverage, 1.0);

        assert!(evaluate(&[10], &truth, &frames).is_err());
        assert!(evaluate(&[], &truth, &frames).is_err());
        assert!(evaluate(&[1, 1], &truth, &frames).is_err());
    }

    #[test]
    fn metrics_ignore_selection_order() {
        let (truth, frames) = toy_truth();
        let a = evaluate(&[0, 2, 3, 7, 8], &truth, &frames).unwrap();
        let b = evaluate(&[8, 7, 3, 0, 2], &truth, &frames).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn single_cell_sweep_has_one_row() {
        let corpus = corpus(&small(0), 3, 1);
        let report = run_sweep(&corpus, &[Policy::Uniform], &[4], &[9]).unwrap();
        assert_eq!(report.rows.len(), 1);
        assert_eq!(report.rows[0].batch, None);
        assert_eq!(report.rows[0].videos, 3);
    }

    #[test]
    fn sweep_reports_cell_coordinates_on_error() {
        let corpus = corpus(&small(0), 2, 1);
        let err = run_sweep(&corpus, &[Policy::Gift], &[64], &[2]).unwrap_err();
        match err {
            Error::Cell {
                policy,
                budget,
                batch,
                ..
            } => {
                assert_eq!((policy.as_str(), budget, batch.as_str()), ("gift", 64, "2"));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(run_sweep(&corpus, &[], &[4], &[9]).is_err());
    }

    #[test]
    fn sweep_is_execution_independent() {
        let corpus = corpus(&small(0), 4, 9);
        let policies = [Policy::Gift, Policy::Uniform, Policy::Mmr { lambda: 0.5 }];
        let par =
            run_sweep_with(&corpus, &policies, &[2, 4], &[1, 3], Execution::Parallel).unwrap();
        let seq =
            run_sweep_with(&corpus, &policies, &[2, 4], &[1, 3], Execution::Sequential).unwrap();
        assert_eq!(par, seq);
        assert_eq!(par.rows.len(), 2 * 2 + 2 + 2);
    }

    #[test]
    fn policy_names_round_trip() {
        for p in [
            Policy::Gift,
            Policy::GiftOneShot,
            Policy::Uniform,
            Policy::TopRelevance,
            Policy::Undirected,
            Policy::Mmr { lambda: 0.5 },
        ] {
            assert_eq!(Policy::parse(p.name(), 0.5).unwrap(), p);
        }
        assert!(Policy::parse("bolt", 0.5).is_err());
    }
}
