//! File formats: plain CSV matrices, `key = value` metadata sidecars, and
//! atomic writes.
//!
//! Matrices are headerless comma-separated numeric rows. All numeric output
//! uses 17 significant digits so every f64 round-trips bit-exactly. Every
//! writer goes through a temp file in the destination directory followed by
//! an atomic rename: a failed run never leaves a partially written file.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use ndarray::Array2;
use thiserror::Error;

use crate::model::{BlockStructure, BlockSupport, Dataset, GroundTruth, ModelError};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: cannot parse '{token}' as a number")]
    BadNumber {
        path: PathBuf,
        line: usize,
        token: String,
    },
    #[error("{path}:{line}: row has {got} fields, expected {expected}")]
    RaggedRow {
        path: PathBuf,
        line: usize,
        got: usize,
        expected: usize,
    },
    #[error("{path}: file is empty")]
    Empty { path: PathBuf },
    #[error("{path}: missing key '{key}'")]
    MissingKey { path: PathBuf, key: &'static str },
    #[error("{path}:{line}: expected 'key = value'")]
    BadKeyValue { path: PathBuf, line: usize },
    #[error("{path}: {source}")]
    Model {
        path: PathBuf,
        source: ModelError,
    },
    #[error("{path}: {reason}")]
    Inconsistent { path: PathBuf, reason: String },
}

fn io_err(path: &Path, source: std::io::Error) -> IoError {
    IoError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Formats one f64 with 17 significant digits, enough for exact round-trip.
pub fn format_full(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes `content` to `path` atomically: temp file in the same directory,
/// then rename. The destination is either fully written or untouched.
pub fn atomic_write(path: &Path, content: &str) -> Result<(), IoError> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty());
    let tmp = match dir {
        Some(d) => tempfile::NamedTempFile::new_in(d),
        None => tempfile::NamedTempFile::new_in("."),
    }
    .map_err(|e| io_err(path, e))?;
    std::fs::write(tmp.path(), content).map_err(|e| io_err(path, e))?;
    tmp.persist(path).map_err(|e| io_err(path, e.error))?;
    Ok(())
}

/// Writes a matrix as headerless CSV rows, one line per matrix row.
pub fn write_matrix_csv(path: &Path, m: &Array2<f64>) -> Result<(), IoError> {
    let mut out = String::with_capacity(m.len() * 24);
    for row in m.rows() {
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            let _ = write!(out, "{v:.16e}");
        }
        out.push('\n');
    }
    atomic_write(path, &out)
}

/// Reads a headerless CSV matrix; every row must have the same width.
pub fn read_matrix_csv(path: &Path) -> Result<Array2<f64>, IoError> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut data: Vec<f64> = Vec::new();
    let mut width: Option<usize> = None;
    let mut rows = 0;
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut count = 0;
        for token in line.split(',') {
            let v: f64 = token.trim().parse().map_err(|_| IoError::BadNumber {
                path: path.to_path_buf(),
                line: i + 1,
                token: token.trim().to_string(),
            })?;
            data.push(v);
            count += 1;
        }
        match width {
            None => width = Some(count),
            Some(w) if w != count => {
                return Err(IoError::RaggedRow {
                    path: path.to_path_buf(),
                    line: i + 1,
                    got: count,
                    expected: w,
                })
            }
            _ => {}
        }
        rows += 1;
    }
    let width = width.ok_or_else(|| IoError::Empty {
        path: path.to_path_buf(),
    })?;
    Ok(Array2::from_shape_vec((rows, width), data).expect("row width enforced above"))
}

/// Everything the metadata sidecar records about a synthesized dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetMeta {
    pub structure: BlockStructure,
    pub snr_db: f64,
    pub seed: u64,
    pub true_support: BlockSupport,
}

const META_FILE: &str = "meta.txt";
const A_FILE: &str = "A.csv";
const Y_FILE: &str = "Y.csv";
const X_FILE: &str = "X.csv";

/// Writes the metadata sidecar: one `key = value` line per field.
pub fn write_meta(path: &Path, meta: &DatasetMeta) -> Result<(), IoError> {
    let s = &meta.structure;
    let content = format!(
        "N = {}\np = {}\nL = {}\nL_B = {}\nsnr_db = {}\nseed = {}\ntrue_support = {}\n",
        s.n,
        s.p,
        s.l,
        s.l_b,
        format_full(meta.snr_db),
        meta.seed,
        meta.true_support.to_list_string(),
    );
    atomic_write(path, &content)
}

/// Parses a `key = value` file into (key, value) string pairs, skipping
/// blank lines and `#` comments.
pub fn parse_key_values(path: &Path, text: &str) -> Result<Vec<(String, String)>, IoError> {
    let mut pairs = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| IoError::BadKeyValue {
            path: path.to_path_buf(),
            line: i + 1,
        })?;
        pairs.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(pairs)
}

fn lookup<'a>(
    pairs: &'a [(String, String)],
    key: &'static str,
    path: &Path,
) -> Result<&'a str, IoError> {
    pairs
        .iter()
        .find(|(k, _)| k == key)
        .map(|(_, v)| v.as_str())
        .ok_or_else(|| IoError::MissingKey {
            path: path.to_path_buf(),
            key,
        })
}

fn parse_num<T: std::str::FromStr>(raw: &str, path: &Path, line_hint: usize) -> Result<T, IoError> {
    raw.parse().map_err(|_| IoError::BadNumber {
        path: path.to_path_buf(),
        line: line_hint,
        token: raw.to_string(),
    })
}

pub fn read_meta(path: &Path) -> Result<DatasetMeta, IoError> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let pairs = parse_key_values(path, &text)?;
    let n: usize = parse_num(lookup(&pairs, "N", path)?, path, 0)?;
    let p: usize = parse_num(lookup(&pairs, "p", path)?, path, 0)?;
    let l: usize = parse_num(lookup(&pairs, "L", path)?, path, 0)?;
    let l_b: usize = parse_num(lookup(&pairs, "L_B", path)?, path, 0)?;
    let snr_db: f64 = parse_num(lookup(&pairs, "snr_db", path)?, path, 0)?;
    let seed: u64 = parse_num(lookup(&pairs, "seed", path)?, path, 0)?;
    let support_raw = lookup(&pairs, "true_support", path)?;
    let structure = BlockStructure::new(n, p, l, l_b).map_err(|e| IoError::Model {
        path: path.to_path_buf(),
        source: e,
    })?;
    let mut indices = Vec::new();
    if !support_raw.is_empty() {
        for token in support_raw.split(',') {
            indices.push(parse_num::<usize>(token.trim(), path, 0)?);
        }
    }
    let true_support =
        BlockSupport::new(indices, structure.p_b()).map_err(|e| IoError::Model {
            path: path.to_path_buf(),
            source: e,
        })?;
    Ok(DatasetMeta {
        structure,
        snr_db,
        seed,
        true_support,
    })
}

/// Writes A.csv, Y.csv, meta.txt, and (when truth is present) X.csv.
pub fn write_dataset(dir: &Path, dataset: &Dataset, seed: u64) -> Result<(), IoError> {
    std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    write_matrix_csv(&dir.join(A_FILE), &dataset.a)?;
    write_matrix_csv(&dir.join(Y_FILE), &dataset.y)?;
    let (snr_db, support) = match &dataset.truth {
        Some(t) => {
            write_matrix_csv(&dir.join(X_FILE), &t.x)?;
            (t.snr_db, t.support.clone())
        }
        None => (f64::NAN, BlockSupport::empty()),
    };
    write_meta(
        &dir.join(META_FILE),
        &DatasetMeta {
            structure: dataset.structure,
            snr_db,
            seed,
            true_support: support,
        },
    )
}

/// Reads a dataset directory back. X.csv is optional; when present, the
/// truth's noise variance is recomputed from (A, X, snr_db), which is exact
/// because those three fields determine it.
pub fn read_dataset(dir: &Path) -> Result<Dataset, IoError> {
    let meta = read_meta(&dir.join(META_FILE))?;
    let a = read_matrix_csv(&dir.join(A_FILE))?;
    let y = read_matrix_csv(&dir.join(Y_FILE))?;
    let s = meta.structure;
    for (name, got, expected) in [
        ("A rows", a.nrows(), s.n),
        ("A cols", a.ncols(), s.p),
        ("Y rows", y.nrows(), s.n),
        ("Y cols", y.ncols(), s.l),
    ] {
        if got != expected {
            return Err(IoError::Inconsistent {
                path: dir.to_path_buf(),
                reason: format!("{name} = {got}, meta says {expected}"),
            });
        }
    }
    let x_path = dir.join(X_FILE);
    let truth = if x_path.exists() {
        let x = read_matrix_csv(&x_path)?;
        if x.dim() != (s.p, s.l) {
            return Err(IoError::Inconsistent {
                path: dir.to_path_buf(),
                reason: format!("X is {:?}, meta says ({}, {})", x.dim(), s.p, s.l),
            });
        }
        let (_, sigma2) = crate::model::noise_variance_for_snr(&a, &x, meta.snr_db, &s)
            .map_err(|e| IoError::Model {
                path: x_path.clone(),
                source: e,
            })?;
        Some(GroundTruth {
            x,
            support: meta.true_support.clone(),
            sigma2,
            snr_db: meta.snr_db,
        })
    } else {
        None
    };
    Ok(Dataset {
        structure: s,
        a,
        y,
        truth,
    })
}
