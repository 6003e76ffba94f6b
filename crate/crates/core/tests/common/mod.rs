#![allow(dead_code)]

use gift_core::{EmbeddingMatrix, QueryEmbedding, SelectorConfig, TieBreak};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub struct Instance {
    pub frames: EmbeddingMatrix,
    pub query: QueryEmbedding,
    pub cfg: SelectorConfig,
}

/// Random selection problem. A third of the instances draw coordinates from
/// a small integer grid and copy rows, so relevance and distance ties occur.
pub fn random_instance(seed: u64, max_n: usize, max_d: usize) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(1..=max_n);
    let d = rng.random_range(1..=max_d);
    let gridded = rng.random_range(0..3) == 0;
    let coord = |rng: &mut ChaCha8Rng| -> f32 {
        if gridded {
            rng.random_range(-2i32..=2) as f32
        } else {
            rng.sample::<f64, _>(StandardNormal) as f32
        }
    };
    let mut rows: Vec<Vec<f32>> = Vec::with_capacity(n);
    while rows.len() < n {
        if !rows.is_empty() && gridded && rng.random_range(0..4) == 0 {
            let src = rng.random_range(0..rows.len());
            rows.push(rows[src].clone());
            continue;
        }
        let row: Vec<f32> = (0..d).map(|_| coord(&mut rng)).collect();
        if row.iter().any(|&x| x != 0.0) {
            rows.push(row);
        }
    }
    let query = loop {
        let q: Vec<f32> = (0..d).map(|_| coord(&mut rng)).collect();
        if q.iter().any(|&x| x != 0.0) {
            break QueryEmbedding::new(q).unwrap();
        }
    };
    let k = rng.random_range(1..=n);
    let b = rng.random_range(1..=n);
    let cfg = SelectorConfig::new(k)
        .with_batch(b)
        .with_normalize(rng.random_bool(0.7))
        .with_tie_break(if rng.random_bool(0.25) {
            TieBreak::IndexOrdered
        } else {
            TieBreak::Strict
        });
    Instance {
        frames: EmbeddingMatrix::from_rows(&rows).unwrap(),
        query,
        cfg,
    }
}

/// Indices of the `k` largest scores, smaller index first on ties, sorted
/// ascending. Written independently of the library's batch picker.
pub fn static_top_k(scores: &[(usize, f64)], k: usize) -> Vec<usize> {
    let mut v = scores.to_vec();
    v.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .expect("finite scores")
            .then(a.0.cmp(&b.0))
    });
    let mut top: Vec<usize> = v.into_iter().take(k).map(|(i, _)| i).collect();
    top.sort_unstable();
    top
}
