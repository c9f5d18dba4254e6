//! Block orthogonal matching pursuit: greedy generation of a nested
//! sequence of candidate block supports.
//!
//! Each iteration picks the block whose columns correlate most strongly
//! (Frobenius norm of the block-correlation matrix) with the current
//! residual, then re-projects the response onto the orthogonal complement
//! of everything selected so far. The k-th candidate support is the set of
//! the first k picks, so one run prices every model order up to K.

use ndarray::{Array2, Axis};
use thiserror::Error;

use crate::linalg::{self, LinalgError};
use crate::model::{BlockStructure, BlockSupport, ModelError};

/// Relative residual threshold below which further picks would fit
/// numerical noise; the path is truncated there.
pub const EARLY_STOP_REL_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BompError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("iteration count must be at least 1")]
    ZeroIterations,
    #[error("{k} iterations of width {l_b} exceed the {n} available samples")]
    TooManyIterations { k: usize, l_b: usize, n: usize },
    #[error("design is {got_rows}x{got_cols}, structure says {n}x{p}")]
    DesignShape {
        got_rows: usize,
        got_cols: usize,
        n: usize,
        p: usize,
    },
    #[error("response is {got_rows}x{got_cols}, structure says {n}x{l}")]
    ResponseShape {
        got_rows: usize,
        got_cols: usize,
        n: usize,
        l: usize,
    },
}

/// Greedy selection order: distinct 1-based block indices d¹, …, d^K.
/// The candidate support of order k is the set of the first k entries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidatePath {
    blocks: Vec<usize>,
    p_b: usize,
}

impl CandidatePath {
    /// Blocks in selection order (1-based).
    pub fn blocks(&self) -> &[usize] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Support set of the first `k` picks. Panics if `k` exceeds the path
    /// length; callers iterate `1..=len()`.
    pub fn prefix_support(&self, k: usize) -> BlockSupport {
        assert!(k <= self.blocks.len(), "prefix {k} of {}", self.blocks.len());
        BlockSupport::new(self.blocks[..k].to_vec(), self.p_b)
            .expect("path entries are distinct and in range by construction")
    }

    /// Support set of the whole path.
    pub fn full_support(&self) -> BlockSupport {
        self.prefix_support(self.blocks.len())
    }
}

/// Runs up to `k` iterations of block matching pursuit on (A, Y).
///
/// Columns are unit-normalized on a working copy first, so the caller's
/// design is untouched and selection is invariant to per-column scaling.
/// The path is truncated early once the residual drops below
/// [`EARLY_STOP_REL_TOL`]·‖Y‖_F; callers must accept paths shorter than `k`.
pub fn run_bomp(
    a: &Array2<f64>,
    y: &Array2<f64>,
    k: usize,
    structure: &BlockStructure,
) -> Result<CandidatePath, BompError> {
    let (n, p, l) = (structure.n, structure.p, structure.l);
    if a.dim() != (n, p) {
        return Err(BompError::DesignShape {
            got_rows: a.nrows(),
            got_cols: a.ncols(),
            n,
            p,
        });
    }
    if y.dim() != (n, l) {
        return Err(BompError::ResponseShape {
            got_rows: y.nrows(),
            got_cols: y.ncols(),
            n,
            l,
        });
    }
    if k == 0 {
        return Err(BompError::ZeroIterations);
    }
    if k * structure.l_b > n {
        return Err(BompError::TooManyIterations {
            k,
            l_b: structure.l_b,
            n,
        });
    }
    let p_b = structure.p_b();
    let a_norm = linalg::normalize_columns(a)?;
    let y_norm = linalg::frob(y);
    let stop_at = EARLY_STOP_REL_TOL * y_norm;

    let mut taken = vec![false; p_b + 1];
    let mut blocks: Vec<usize> = Vec::with_capacity(k.min(p_b));
    let mut selected_cols: Vec<usize> = Vec::with_capacity(k * structure.l_b);
    let mut residual = y.clone();

    for _ in 0..k.min(p_b) {
        // One gemm gives every block's correlation with the residual.
        let corr = a_norm.t().dot(&residual);
        let mut best: Option<(usize, f64)> = None;
        for j in 1..=p_b {
            if taken[j] {
                continue;
            }
            let rows = structure.block_rows(j)?;
            let energy: f64 = corr
                .slice(ndarray::s![rows, ..])
                .iter()
                .map(|v| v * v)
                .sum();
            // Strict comparison over ascending j: ties go to the smallest
            // block index.
            match best {
                Some((_, e)) if energy <= e => {}
                _ => best = Some((j, energy)),
            }
        }
        let (d, _) = best.expect("at least one unselected block remains");
        taken[d] = true;
        blocks.push(d);
        selected_cols.extend(structure.block_rows(d)?);
        let sub = a_norm.select(Axis(1), &selected_cols);
        residual = linalg::residual_matrix(&sub, y)?;
        if linalg::frob(&residual) < stop_at {
            break;
        }
    }
    Ok(CandidatePath { blocks, p_b })
}
