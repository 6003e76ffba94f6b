//! Embedding files, candidate subsampling and sweep report writers.
//!
//! Embeddings travel as `.npy` files (little-endian float32, C order, shape
//! `(N, D)` or `(D,)`). Hand-written fixtures may instead be JSON: a flat array
//! for a vector or an array of equal-length arrays for a matrix.
//!
//! Floats in reports are written as the shortest decimal that round-trips the
//! value as `f32` (at most 9 significant digits).

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::baselines::uniform_select;
use crate::error::{Error, FormatError, Result};
use crate::math::{EmbeddingMatrix, QueryEmbedding};
use crate::synth::SweepReport;

pub const NPY_MAGIC: &[u8; 6] = b"\x93NUMPY";
const ARRAY_ALIGN: usize = 64;
/// Room numpy leaves after the header so the leading axis can grow in place.
const GROWTH_AXIS_MAX_DIGITS: usize = 21;

/// A decoded float32 array.
#[derive(Debug, Clone, PartialEq)]
pub struct Array {
    pub shape: Vec<usize>,
    pub data: Vec<f32>,
}

/// What an embedding file holds, by rank.
#[derive(Debug, Clone, PartialEq)]
pub enum Embeddings {
    Matrix(EmbeddingMatrix),
    Query(QueryEmbedding),
}

fn shape_repr(shape: &[usize]) -> String {
    match shape {
        [single] => format!("({single},)"),
        _ => {
            let parts: Vec<String> = shape.iter().map(|d| d.to_string()).collect();
            format!("({})", parts.join(", "))
        }
    }
}

/// Serializes a float32 array exactly as `numpy.save` does.
pub fn encode_npy(shape: &[usize], data: &[f32]) -> Vec<u8> {
    let mut header = format!(
        "{{'descr': '<f4', 'fortran_order': False, 'shape': {}, }}",
        shape_repr(shape)
    );
    if let Some(first) = shape.first() {
        let digits = first.to_string().len();
        header.push_str(&" ".repeat(GROWTH_AXIS_MAX_DIGITS.saturating_sub(digits)));
    }
    let pad = ARRAY_ALIGN - (NPY_MAGIC.len() + 2 + 2 + header.len() + 1) % ARRAY_ALIGN;
    header.push_str(&" ".repeat(pad));
    header.push('\n');

    let mut out = Vec::with_capacity(10 + header.len() + data.len() * 4);
    out.extend_from_slice(NPY_MAGIC);
    out.extend_from_slice(&[1, 0]);
    out.extend_from_slice(&(header.len() as u16).to_le_bytes());
    out.extend_from_slice(header.as_bytes());
    for x in data {
        out.extend_from_slice(&x.to_le_bytes());
    }
    out
}

/// Pulls the value text for `'key':` out of a header dict literal.
fn header_value<'a>(header: &'a str, key: &str) -> std::result::Result<&'a str, FormatError> {
    let needle = format!("'{key}':");
    let start = header
        .find(&needle)
        .ok_or_else(|| FormatError::MalformedHeader(format!("missing key '{key}'")))?
        + needle.len();
    let rest = header[start..].trim_start();
    let end = if rest.starts_with('(') {
        rest.find(')').map(|p| p + 1)
    } else if let Some(body) = rest.strip_prefix('\'') {
        body.find('\'').map(|p| p + 2)
    } else {
        rest.find([',', '}'])
    }
    .ok_or_else(|| FormatError::MalformedHeader(format!("unterminated value for '{key}'")))?;
    Ok(rest[..end].trim())
}

fn parse_shape(text: &str) -> std::result::Result<Vec<usize>, FormatError> {
    let inner = text
        .strip_prefix('(')
        .and_then(|t| t.strip_suffix(')'))
        .ok_or_else(|| FormatError::MalformedHeader(format!("shape '{text}' is not a tuple")))?;
    inner
        .split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| {
            p.parse::<usize>()
                .map_err(|_| FormatError::MalformedHeader(format!("bad shape entry '{p}'")))
        })
        .collect()
}

fn parse_npy(bytes: &[u8]) -> std::result::Result<Array, FormatError> {
    if bytes.len() < 8 {
        return Err(FormatError::Truncated {
            expected: 10,
            actual: bytes.len(),
        });
    }
    let (major, minor) = (bytes[6], bytes[7]);
    let (len_bytes, header_start) = match major {
        1 => (2, 10),
        2 | 3 => (4, 12),
        _ => return Err(FormatError::UnsupportedVersion { major, minor }),
    };
    if bytes.len() < header_start {
        return Err(FormatError::Truncated {
            expected: header_start,
            actual: bytes.len(),
        });
    }
    let header_len = if len_bytes == 2 {
        u16::from_le_bytes([bytes[8], bytes[9]]) as usize
    } else {
        u32::from_le_bytes([bytes[8], bytes[9], bytes[10], bytes[11]]) as usize
    };
    let data_start = header_start + header_len;
    if bytes.len() < data_start {
        return Err(FormatError::Truncated {
            expected: data_start,
            actual: bytes.len(),
        });
    }
    let header = std::str::from_utf8(&bytes[header_start..data_start])
        .map_err(|_| FormatError::MalformedHeader("header is not text".into()))?;

    let descr = header_value(header, "descr")?.trim_matches('\'');
    if descr != "<f4" {
        return Err(FormatError::UnsupportedDtype(descr.to_string()));
    }
    match header_value(header, "fortran_order")? {
        "False" => {}
        "True" => return Err(FormatError::FortranOrder),
        other => {
            return Err(FormatError::MalformedHeader(format!(
                "fortran_order '{other}' is not a boolean"
            )))
        }
    }
    let shape = parse_shape(header_value(header, "shape")?)?;
    if shape.is_empty() || shape.len() > 2 {
        return Err(FormatError::ShapeMismatch(format!(
            "expected shape (N, D) or (D,), got {}",
            shape_repr(&shape)
        )));
    }
    let count = shape
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .ok_or_else(|| FormatError::ShapeMismatch("shape overflows".into()))?;
    let expected = count * 4;
    let payload = &bytes[data_start..];
    if payload.len() < expected {
        return Err(FormatError::Truncated {
            expected,
            actual: payload.len(),
        });
    }
    if payload.len() > expected {
        return Err(FormatError::TrailingData {
            extra: payload.len() - expected,
        });
    }
    let data = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    Ok(Array { shape, data })
}

fn json_number(v: &serde_json::Value) -> std::result::Result<f32, FormatError> {
    v.as_f64()
        .map(|x| x as f32)
        .ok_or_else(|| FormatError::Json(format!("expected a number, found {v}")))
}

fn parse_json(bytes: &[u8]) -> std::result::Result<Array, FormatError> {
    let value: serde_json::Value =
        serde_json::from_slice(bytes).map_err(|e| FormatError::Json(e.to_string()))?;
    let items = value
        .as_array()
        .ok_or_else(|| FormatError::Json("top level is not an array".into()))?;
    if items.iter().all(|v| v.is_array()) && !items.is_empty() {
        let dim = items[0].as_array().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(items.len() * dim);
        for (i, row) in items.iter().enumerate() {
            let row = row.as_array().expect("checked above");
            if row.len() != dim {
                return Err(FormatError::ShapeMismatch(format!(
                    "row {i} has {} entries, row 0 has {dim}",
                    row.len()
                )));
            }
            for v in row {
                data.push(json_number(v)?);
            }
        }
        Ok(Array {
            shape: vec![items.len(), dim],
            data,
        })
    } else {
        let data = items
            .iter()
            .map(json_number)
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(Array {
            shape: vec![data.len()],
            data,
        })
    }
}

/// Decodes `.npy` bytes, or a JSON array when the bytes start with `[`.
pub fn parse_array(bytes: &[u8]) -> std::result::Result<Array, FormatError> {
    if bytes.starts_with(NPY_MAGIC) {
        return parse_npy(bytes);
    }
    let first = bytes.iter().find(|b| !b.is_ascii_whitespace());
    if first == Some(&b'[') {
        return parse_json(bytes);
    }
    Err(FormatError::BadMagic)
}

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_array(path: impl AsRef<Path>) -> Result<Array> {
    Ok(parse_array(&read_bytes(path.as_ref())?)?)
}

fn into_matrix(a: Array) -> Result<EmbeddingMatrix> {
    match a.shape[..] {
        [n, d] => EmbeddingMatrix::new(a.data, n, d),
        _ => Err(FormatError::ShapeMismatch(format!(
            "expected a matrix (N, D), got {}",
            shape_repr(&a.shape)
        ))
        .into()),
    }
}

fn into_query(a: Array) -> Result<QueryEmbedding> {
    match a.shape[..] {
        [_] | [1, _] => QueryEmbedding::new(a.data),
        _ => Err(FormatError::ShapeMismatch(format!(
            "expected a vector (D,) or (1, D), got {}",
            shape_repr(&a.shape)
        ))
        .into()),
    }
}

/// Reads a frame matrix (rank 2) or a query vector (rank 1).
pub fn read_embeddings(path: impl AsRef<Path>) -> Result<Embeddings> {
    let a = read_array(path)?;
    if a.shape.len() == 2 {
        into_matrix(a).map(Embeddings::Matrix)
    } else {
        into_query(a).map(Embeddings::Query)
    }
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<EmbeddingMatrix> {
    into_matrix(read_array(path)?)
}

pub fn read_query(path: impl AsRef<Path>) -> Result<QueryEmbedding> {
    into_query(read_array(path)?)
}

/// Reads a rank-1 array of any finite values.
pub fn read_vector(path: impl AsRef<Path>) -> Result<Vec<f32>> {
    let a = read_array(path)?;
    if a.shape.len() != 1 {
        return Err(FormatError::ShapeMismatch(format!(
            "expected a vector (N,), got {}",
            shape_repr(&a.shape)
        ))
        .into());
    }
    if let Some(pos) = a.data.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite(pos));
    }
    Ok(a.data)
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_npy(path: impl AsRef<Path>, shape: &[usize], data: &[f32]) -> Result<()> {
    write_bytes(path.as_ref(), &encode_npy(shape, data))
}

pub fn write_matrix(path: impl AsRef<Path>, m: &EmbeddingMatrix) -> Result<()> {
    write_npy(path, &[m.n_frames(), m.dim()], m.as_slice())
}

pub fn write_query(path: impl AsRef<Path>, q: &QueryEmbedding) -> Result<()> {
    write_npy(path, &[q.dim()], q.as_slice())
}

/// Uniformly thins `frames` to at most `pool` rows. Returns the kept rows and,
/// for each, its index in the original matrix.
pub fn subsample_candidates(
    frames: &EmbeddingMatrix,
    pool: usize,
) -> Result<(EmbeddingMatrix, Vec<usize>)> {
    if pool == 0 {
        return Err(Error::InvalidInput(
            "candidate pool must be at least 1".into(),
        ));
    }
    let n = frames.n_frames();
    if n <= pool {
        return Ok((frames.clone(), (0..n).collect()));
    }
    let map = uniform_select(n, pool)?;
    Ok((frames.select_rows(&map)?, map))
}

/// Report columns, in order.
pub const REPORT_COLUMNS: [&str; 8] = [
    "policy",
    "K",
    "B",
    "event_recall",
    "frame_recall",
    "temporal_coverage",
    "noise_rate",
    "redundancy",
];

/// `f64` rendered through `f32`'s shortest round-trip form.
pub fn fmt_float(x: f64) -> String {
    format!("{}", x as f32)
}

pub fn report_csv(report: &SweepReport) -> String {
    let mut out = REPORT_COLUMNS.join(",");
    out.push('\n');
    for row in &report.rows {
        let m = &row.metrics;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            row.policy,
            row.budget,
            row.batch.map(|b| b.to_string()).unwrap_or_default(),
            fmt_float(m.event_recall),
            fmt_float(m.frame_recall),
            fmt_float(m.temporal_coverage),
            fmt_float(m.noise_rate),
            fmt_float(m.redundancy),
        );
    }
    out
}

#[derive(Serialize)]
struct JsonRow<'a> {
    policy: &'a str,
    #[serde(rename = "K")]
    budget: usize,
    #[serde(rename = "B")]
    batch: Option<usize>,
    videos: usize,
    event_recall: f32,
    frame_recall: f32,
    temporal_coverage: f32,
    noise_rate: f32,
    redundancy: f32,
}

pub fn report_json(report: &SweepReport) -> Result<String> {
    let rows: Vec<JsonRow<'_>> = report
        .rows
        .iter()
        .map(|r| JsonRow {
            policy: &r.policy,
            budget: r.budget,
            batch: r.batch,
            videos: r.videos,
            event_recall: r.metrics.event_recall as f32,
            frame_recall: r.metrics.frame_recall as f32,
            temporal_coverage: r.metrics.temporal_coverage as f32,
            noise_rate: r.metrics.noise_rate as f32,
            redundancy: r.metrics.redundancy as f32,
        })
        .collect();
    let mut s = serde_json::to_string_pretty(&serde_json::json!({ "rows": rows }))
        .map_err(|e| Error::InvalidInput(e.to_string()))?;
    s.push('\n');
    Ok(s)
}
