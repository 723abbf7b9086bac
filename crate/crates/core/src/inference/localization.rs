//! Voxels that can explain a rejection at a point.

use crate::error::{Error, Result};
use crate::kernel::GaussianKernel;
use crate::lattice::VoxelSet;

/// Indices of the voxels `v` with `K(x, v) != 0`: for a non-negative kernel
/// a positive smoothed mean at `x` implies a positive mean at one of them.
pub fn localization_support(kernel: &GaussianKernel, domain: &VoxelSet, x: &[f64]) -> Result<Vec<usize>> {
    if kernel.dim() != domain.dim() || x.len() != domain.dim() {
        return Err(Error::DimensionMismatch { expected: domain.dim(), got: x.len() });
    }
    Ok(domain.points().enumerate().filter(|(_, v)| kernel.in_support(x, v)).map(|(i, _)| i).collect())
}
