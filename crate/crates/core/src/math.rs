//! Embedding containers and the vector primitives shared by every selector.
//!
//! Storage is `f32` to match embedding files; dot products and distance sums
//! accumulate in `f64`.

use crate::error::{Error, Result};
use crate::Execution;

/// `N` frame embeddings of dimension `D`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    data: Vec<f32>,
    n_frames: usize,
    dim: usize,
}

impl EmbeddingMatrix {
    pub fn new(data: Vec<f32>, n_frames: usize, dim: usize) -> Result<Self> {
        if n_frames == 0 || dim == 0 {
            return Err(Error::InvalidInput(format!(
                "embedding matrix must be non-empty, got {n_frames}x{dim}"
            )));
        }
        if n_frames.checked_mul(dim) != Some(data.len()) {
            return Err(Error::InvalidInput(format!(
                "data length {} does not match shape {n_frames}x{dim}",
                data.len()
            )));
        }
        check_finite(&data)?;
        Ok(Self {
            data,
            n_frames,
            dim,
        })
    }

    pub fn from_rows<R: AsRef<[f32]>>(rows: &[R]) -> Result<Self> {
        let dim = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut data = Vec::with_capacity(rows.len() * dim);
        for row in rows {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Self::new(data, rows.len(), dim)
    }

    pub fn n_frames(&self) -> usize {
        self.n_frames
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f32> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f32]> + '_ {
        self.data.chunks_exact(self.dim)
    }

    /// Copies the listed rows, in the given order, into a new matrix.
    pub fn select_rows(&self, indices: &[usize]) -> Result<Self> {
        let mut data = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            if i >= self.n_frames {
                return Err(Error::InvalidInput(format!(
                    "row index {i} out of range for {} frames",
                    self.n_frames
                )));
            }
            data.extend_from_slice(self.row(i));
        }
        Self::new(data, indices.len(), self.dim)
    }

    /// Multiplies every entry by `factor`.
    pub fn scaled(&self, factor: f32) -> Result<Self> {
        Self::new(
            self.data.iter().map(|x| x * factor).collect(),
            self.n_frames,
            self.dim,
        )
    }
}

/// A single query embedding. Finite and of nonzero norm.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryEmbedding {
    data: Vec<f32>,
}

impl QueryEmbedding {
    pub fn new(data: Vec<f32>) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::InvalidInput("query embedding is empty".into()));
        }
        check_finite(&data)?;
        if norm(&data) == 0.0 {
            return Err(Error::ZeroNormVector("query"));
        }
        Ok(Self { data })
    }

    pub fn dim(&self) -> usize {
        self.data.len()
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f32> {
        self.data
    }
}

/// Squared Euclidean distances between all pairs of rows.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    data: Vec<f32>,
    n: usize,
}

impl DistanceMatrix {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f32 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.data
    }
}

fn check_finite(data: &[f32]) -> Result<()> {
    match data.iter().position(|x| !x.is_finite()) {
        Some(pos) => Err(Error::NonFinite(pos)),
        None => Ok(()),
    }
}

#[inline]
pub(crate) fn dot(a: &[f32], b: &[f32]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| f64::from(x) * f64::from(y))
        .sum()
}

#[inline]
pub(crate) fn norm(a: &[f32]) -> f64 {
    dot(a, a).sqrt()
}

/// Cosine similarity, clamped to `[-1, 1]`.
pub fn cosine_similarity(a: &[f32], b: &[f32]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            actual: b.len(),
        });
    }
    let na = norm(a);
    if na == 0.0 {
        return Err(Error::ZeroNormVector("a"));
    }
    let nb = norm(b);
    if nb == 0.0 {
        return Err(Error::ZeroNormVector("b"));
    }
    Ok((dot(a, b) / (na * nb)).clamp(-1.0, 1.0))
}

/// Scales every row to unit Euclidean norm.
pub fn l2_normalize(m: &EmbeddingMatrix) -> Result<EmbeddingMatrix> {
    let mut data = Vec::with_capacity(m.data.len());
    for (i, row) in m.rows().enumerate() {
        let n = norm(row);
        if n == 0.0 {
            return Err(Error::ZeroNormRow(i));
        }
        data.extend(row.iter().map(|&x| (f64::from(x) / n) as f32));
    }
    EmbeddingMatrix::new(data, m.n_frames, m.dim)
}

/// Affine map of `v` onto `[0, 1]`. A constant vector maps to all ones, so
/// an uninformative relevance never zeroes out a product score.
pub fn minmax_normalize(v: &[f64]) -> Result<Vec<f64>> {
    if v.is_empty() {
        return Err(Error::InvalidInput(
            "cannot normalize an empty vector".into(),
        ));
    }
    if let Some(pos) = v.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite(pos));
    }
    let min = v.iter().copied().fold(f64::INFINITY, f64::min);
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let range = max - min;
    if range == 0.0 {
        return Ok(vec![1.0; v.len()]);
    }
    Ok(v.iter()
        .map(|&x| ((x - min) / range).clamp(0.0, 1.0))
        .collect())
}

#[inline]
fn sq_distance(a: &[f32], b: &[f32]) -> f32 {
    let sum: f64 = a
        .iter()
        .zip(b)
        .map(|(&x, &y)| {
            let d = f64::from(x) - f64::from(y);
            d * d
        })
        .sum();
    sum.max(0.0) as f32
}

fn distance_row(m: &EmbeddingMatrix, i: usize, out: &mut [f32]) {
    let ri = m.row(i);
    for (j, slot) in out.iter_mut().enumerate() {
        *slot = if i == j {
            0.0
        } else {
            sq_distance(ri, m.row(j))
        };
    }
}

/// All-pairs squared distances using the default [`Execution`].
pub fn pairwise_sq_distances(m: &EmbeddingMatrix) -> DistanceMatrix {
    pairwise_sq_distances_with(m, Execution::default())
}

/// All-pairs squared distances. Every entry is computed independently with a
/// fixed summation order, so the parallel and sequential paths agree bit for bit.
pub fn pairwise_sq_distances_with(m: &EmbeddingMatrix, exec: Execution) -> DistanceMatrix {
    let n = m.n_frames;
    let mut data = vec![0.0f32; n * n];
    if exec.is_parallel() {
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            data.par_chunks_mut(n)
                .enumerate()
                .for_each(|(i, out)| distance_row(m, i, out));
        }
    } else {
        for (i, out) in data.chunks_mut(n).enumerate() {
            distance_row(m, i, out);
        }
    }
    DistanceMatrix { data, n }
}

/// Largest entry of `dm` over all pairs drawn from `subset`; 0 for a singleton.
pub fn max_pairwise_distance(dm: &DistanceMatrix, subset: &[usize]) -> Result<f32> {
    if subset.is_empty() {
        return Err(Error::InvalidInput(
            "max_pairwise_distance over an empty subset".into(),
        ));
    }
    if let Some(&bad) = subset.iter().find(|&&i| i >= dm.n) {
        return Err(Error::InvalidInput(format!(
            "subset index {bad} out of range for {} frames",
            dm.n
        )));
    }
    let mut best = 0.0f32;
    for &j in subset {
        let row = dm.row(j);
        for &k in subset {
            best = best.max(row[k]);
        }
    }
    Ok(best)
}
