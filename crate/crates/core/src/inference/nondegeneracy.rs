//! Numeric rank check of the stacked kernel jets.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::{GaussianKernel, Order};
use crate::lattice::VoxelSet;

/// Relative singular-value cutoff for the numeric rank.
pub const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NondegeneracyReport {
    pub point: Vec<f64>,
    pub rank: usize,
    /// `D + 1 + D (D + 1) / 2`.
    pub required: usize,
    pub pass: bool,
    pub singular_values: Vec<f64>,
}

/// Rank of the matrix whose rows are `(K, grad K, vech Hess K)(x, v)` over the
/// voxels `v` in the kernel support at `x`.
pub fn nondegeneracy_check(kernel: &GaussianKernel, domain: &VoxelSet, x: &[f64]) -> Result<NondegeneracyReport> {
    let dim = domain.dim();
    if kernel.dim() != dim || x.len() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: x.len() });
    }
    let required = 1 + dim + dim * (dim + 1) / 2;
    let mut rows: Vec<f64> = Vec::new();
    let mut n = 0;
    for v in domain.points().filter(|v| kernel.in_support(x, v)) {
        let jet = kernel.jet(x, v, Order::Hessian);
        rows.push(jet.value);
        rows.extend_from_slice(&jet.grad[..dim]);
        for d in 0..dim {
            for e in d..dim {
                rows.push(jet.hess[d][e]);
            }
        }
        n += 1;
    }
    let mut singular_values: Vec<f64> = if n == 0 {
        Vec::new()
    } else {
        DMatrix::from_row_slice(n, required, &rows).singular_values().iter().copied().collect()
    };
    singular_values.sort_by(|a, b| b.total_cmp(a));
    let top = singular_values.first().copied().unwrap_or(0.0);
    let rank = singular_values.iter().filter(|&&s| top > 0.0 && s > RANK_TOLERANCE * top).count();
    Ok(NondegeneracyReport { point: x.to_vec(), rank, required, pass: rank == required, singular_values })
}
