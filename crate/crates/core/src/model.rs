//! Problem geometry and synthetic data generation for the block-sparse
//! multiple-measurement model Y = A X + W.
//!
//! Conventions used across the whole crate:
//!
//! - Block indices are 1-based everywhere, in code and in files. Block `j`
//!   owns rows I_j = {(j−1)·L_B+1, …, j·L_B} of `X`, which are the same
//!   indices as the columns of `A` it multiplies.
//! - Matrix storage uses ndarray's native 0-based indexing;
//!   [`BlockStructure::block_rows`] is the single place the two conventions
//!   meet.

use ndarray::Array2;
use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("block length {l_b} does not divide predictor count {p}")]
    BlockLengthMismatch { p: usize, l_b: usize },
    #[error("{name} must be at least 1")]
    EmptyDimension { name: &'static str },
    #[error("block index {index} outside 1..={p_b}")]
    IndexOutOfRange { index: usize, p_b: usize },
    #[error("duplicate block index {index} in support")]
    DuplicateIndex { index: usize },
    #[error("support occupies {rows} rows but only {n} samples are available")]
    SupportTooLarge { rows: usize, n: usize },
    #[error("signal power is zero: A·X vanishes")]
    ZeroSignal,
}

/// Dimensions of one regression problem: N samples, p predictors split into
/// p_B = p/L_B contiguous blocks of L_B rows, L response columns.
///
/// The four classical shapes are parameterizations of this one type:
/// single-measurement (L = 1, L_B = 1), multiple-measurement (L > 1,
/// L_B = 1), block single-measurement (L = 1, L_B > 1), and the general
/// block multiple-measurement case.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockStructure {
    pub n: usize,
    pub p: usize,
    pub l: usize,
    pub l_b: usize,
}

impl BlockStructure {
    pub fn new(n: usize, p: usize, l: usize, l_b: usize) -> Result<Self, ModelError> {
        for (name, v) in [("N", n), ("p", p), ("L", l), ("L_B", l_b)] {
            if v == 0 {
                return Err(ModelError::EmptyDimension { name });
            }
        }
        if p % l_b != 0 {
            return Err(ModelError::BlockLengthMismatch { p, l_b });
        }
        Ok(Self { n, p, l, l_b })
    }

    /// Number of blocks, p / L_B.
    pub fn p_b(&self) -> usize {
        self.p / self.l_b
    }

    /// 0-based row range of 1-based block `j`: rows (j−1)·L_B .. j·L_B.
    /// These index rows of X and, equivalently, columns of A.
    pub fn block_rows(&self, j: usize) -> Result<std::ops::Range<usize>, ModelError> {
        if j < 1 || j > self.p_b() {
            return Err(ModelError::IndexOutOfRange {
                index: j,
                p_b: self.p_b(),
            });
        }
        Ok((j - 1) * self.l_b..j * self.l_b)
    }
}

/// A set of 1-based block indices, stored sorted ascending.
///
/// Equality is set equality; the greedy path's discovery order lives in
/// `CandidatePath`, not here.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockSupport {
    indices: Vec<usize>,
}

impl BlockSupport {
    /// Builds a support from 1-based block indices in any order.
    pub fn new(mut indices: Vec<usize>, p_b: usize) -> Result<Self, ModelError> {
        indices.sort_unstable();
        for pair in indices.windows(2) {
            if pair[0] == pair[1] {
                return Err(ModelError::DuplicateIndex { index: pair[0] });
            }
        }
        if let Some(&bad) = indices.iter().find(|&&j| j < 1 || j > p_b) {
            return Err(ModelError::IndexOutOfRange { index: bad, p_b });
        }
        Ok(Self { indices })
    }

    pub fn empty() -> Self {
        Self {
            indices: Vec::new(),
        }
    }

    /// The first K_B blocks, {1, …, k_b}.
    pub fn first_blocks(k_b: usize, p_b: usize) -> Result<Self, ModelError> {
        Self::new((1..=k_b).collect(), p_b)
    }

    /// Sorted 1-based block indices.
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    /// Cardinality k_B.
    pub fn k_b(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, j: usize) -> bool {
        self.indices.binary_search(&j).is_ok()
    }

    /// 0-based rows of X (= columns of A) covered by this support, ascending.
    pub fn rows(&self, structure: &BlockStructure) -> Result<Vec<usize>, ModelError> {
        let mut rows = Vec::with_capacity(self.indices.len() * structure.l_b);
        for &j in &self.indices {
            rows.extend(structure.block_rows(j)?);
        }
        Ok(rows)
    }

    /// Renders as comma-separated 1-based indices, e.g. "1,2,7".
    pub fn to_list_string(&self) -> String {
        let parts: Vec<String> = self.indices.iter().map(|j| j.to_string()).collect();
        parts.join(",")
    }
}

/// The generating ground truth carried alongside synthesized data.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub x: Array2<f64>,
    pub support: BlockSupport,
    pub sigma2: f64,
    pub snr_db: f64,
}

/// One regression problem instance: design, response, and (for synthetic
/// data) the truth that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub structure: BlockStructure,
    pub a: Array2<f64>,
    pub y: Array2<f64>,
    pub truth: Option<GroundTruth>,
}

/// N×p design with i.i.d. standard-normal entries, filled row-major.
pub fn generate_design<R: Rng>(structure: &BlockStructure, rng: &mut R) -> Array2<f64> {
    let data: Vec<f64> = (0..structure.n * structure.p)
        .map(|_| rng.sample::<f64, _>(StandardNormal))
        .collect();
    Array2::from_shape_vec((structure.n, structure.p), data)
        .expect("shape matches allocation by construction")
}

/// p×L coefficient matrix: rows inside the support's blocks hold independent
/// equiprobable ±1 entries, all other rows are exactly zero.
pub fn generate_signal<R: Rng>(
    structure: &BlockStructure,
    true_support: &BlockSupport,
    rng: &mut R,
) -> Result<Array2<f64>, ModelError> {
    let mut x = Array2::zeros((structure.p, structure.l));
    for row in true_support.rows(structure)? {
        for col in 0..structure.l {
            x[[row, col]] = if rng.random::<bool>() { 1.0 } else { -1.0 };
        }
    }
    Ok(x)
}

/// Signal and noise powers for a target SNR: σ_s² = ‖AX‖²_F/(NL) from the
/// raw (unnormalized) design, σ² = σ_s²/10^(snr_db/10).
///
/// `snr_db = +∞` gives σ² = 0 exactly, the noiseless limit.
pub fn noise_variance_for_snr(
    a: &Array2<f64>,
    x: &Array2<f64>,
    snr_db: f64,
    structure: &BlockStructure,
) -> Result<(f64, f64), ModelError> {
    let ax = a.dot(x);
    let energy = crate::linalg::frob_sq(&ax);
    if energy == 0.0 {
        return Err(ModelError::ZeroSignal);
    }
    let sigma_s2 = energy / (structure.n * structure.l) as f64;
    let sigma2 = sigma_s2 / 10f64.powf(snr_db / 10.0);
    Ok((sigma_s2, sigma2))
}

/// Draws one full problem instance: fresh design, ±1 signal on the given
/// support, and Gaussian noise scaled to hit `snr_db`.
///
/// Draw order from `rng` is fixed (design, then signal, then noise), so a
/// given stream always produces the same dataset.
pub fn synthesize_dataset<R: Rng>(
    structure: &BlockStructure,
    true_support: &BlockSupport,
    snr_db: f64,
    rng: &mut R,
) -> Result<Dataset, ModelError> {
    let occupied = true_support.k_b() * structure.l_b;
    if occupied >= structure.n {
        return Err(ModelError::SupportTooLarge {
            rows: occupied,
            n: structure.n,
        });
    }
    let a = generate_design(structure, rng);
    let x = generate_signal(structure, true_support, rng)?;
    let (_, sigma2) = noise_variance_for_snr(&a, &x, snr_db, structure)?;
    let sigma = sigma2.sqrt();
    let mut y = a.dot(&x);
    for v in y.iter_mut() {
        *v += sigma * rng.sample::<f64, _>(StandardNormal);
    }
    Ok(Dataset {
        structure: *structure,
        a,
        y,
        truth: Some(GroundTruth {
            x,
            support: true_support.clone(),
            sigma2,
            snr_db,
        }),
    })
}
