//! Lipschitz–Killing curvatures of voxel manifolds.
//!
//! The estimators are Riemann sums over the refined grid `M^(r)`. Each grid
//! point carries the part of the manifold nearest to it: for the volume term
//! the occupied fraction of its `2^D` surrounding grid cells, for the
//! boundary term the boundary part of the `2^(D-1)` half cells of each face
//! plane through it, and for three-dimensional edges the two half segments
//! of each axis line through it.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{christoffel_from_gram, face_term, metric_from_gram, theta_for_pattern, Christoffel, SymMat};
use crate::jets::{gram_slabs, GramSlab, JetSource};
use crate::kernel::GaussianKernel;
use crate::lattice::MAX_DIM;
use crate::manifold::{quadrant_pattern, FineAxes, RefinedGrid, VoxelManifold};

/// How a set of LKCs was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LkcSource {
    Estimate,
    WhiteNoiseTheory,
    StationaryClosedForm,
}

impl LkcSource {
    pub fn as_str(&self) -> &'static str {
        match self {
            LkcSource::Estimate => "estimate",
            LkcSource::WhiteNoiseTheory => "white-noise-theory",
            LkcSource::StationaryClosedForm => "stationary-closed-form",
        }
    }
}

/// `L_0, ..., L_D`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LkcVector {
    pub dim: usize,
    pub values: Vec<f64>,
    /// Added resolution of the Riemann sums.
    pub r: Option<u32>,
    pub source: LkcSource,
    /// Set when `L_1` of a three-dimensional manifold uses the locally
    /// stationary approximation.
    pub l1_locally_stationary: bool,
    /// Grid points whose metric needed eigenvalue flooring.
    #[serde(default)]
    pub clipped: usize,
}

impl LkcVector {
    /// LKCs given directly, e.g. read from a file.
    pub fn from_values(values: Vec<f64>, source: LkcSource) -> Result<Self> {
        if values.is_empty() || values.len() > MAX_DIM + 1 {
            return Err(Error::InvalidArgument(format!("expected 1 to 4 LKCs, got {}", values.len())));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("LKCs must be finite".into()));
        }
        Ok(LkcVector { dim: values.len() - 1, values, r: None, source, l1_locally_stationary: false, clipped: 0 })
    }

    pub fn get(&self, d: usize) -> f64 {
        self.values.get(d).copied().unwrap_or(0.0)
    }
}

/// Options of [`lkc_compute`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LkcOptions {
    /// Adds the second-fundamental-form integral over faces to the
    /// three-dimensional `L_1`.
    pub face_term: bool,
}

#[derive(Debug, Clone, Copy, Default)]
struct Acc {
    l: [f64; MAX_DIM + 1],
    clipped: usize,
}

impl Acc {
    fn add(&mut self, o: &Acc) {
        for d in 0..=MAX_DIM {
            self.l[d] += o.l[d];
        }
        self.clipped += o.clipped;
    }
}

/// Adds the contributions of one grid point with orthant pattern `pattern`.
fn accumulate(acc: &mut Acc, axes: &FineAxes, pattern: u8, lam: &SymMat, gamma: Option<&Christoffel>) -> Result<()> {
    let dim = axes.dim;
    let h = &axes.step;
    let orthants = 1u32 << dim;

    let occupied = pattern.count_ones();
    let (root, clipped) = lam.sqrt_det_repaired();
    acc.clipped += clipped as usize;
    let cell: f64 = h[..dim].iter().product();
    acc.l[dim] += cell * occupied as f64 / orthants as f64 * root;
    if occupied == orthants {
        return Ok(());
    }

    if dim > 1 {
        for m in 0..dim {
            // Half cells of the face plane normal to m: pairs of orthants
            // differing only along m. A half cell is on the boundary when
            // exactly one of the pair is occupied; the inward side is the
            // occupied one.
            let mut boundary = 0u32;
            let mut inward = 0i32;
            for b in 0..(1u8 << dim) {
                if (b >> m) & 1 == 1 {
                    continue;
                }
                let lo = (pattern >> b) & 1;
                let hi = (pattern >> (b | (1 << m))) & 1;
                if lo != hi {
                    boundary += 1;
                    inward += if hi == 1 { 1 } else { -1 };
                }
            }
            if boundary == 0 {
                continue;
            }
            let others: Vec<usize> = (0..dim).filter(|&d| d != m).collect();
            let area: f64 = others.iter().map(|&d| h[d]).product::<f64>() * boundary as f64 / (orthants / 2) as f64;
            let (face_root, c) = lam.sub(&others).sqrt_det_repaired();
            acc.clipped += c as usize;
            acc.l[dim - 1] += 0.5 * area * face_root;
            if let (Some(g), 3) = (gamma, dim) {
                if inward != 0 {
                    // Area per boundary half cell, signed by its inward side.
                    let signed = area / boundary as f64 * inward as f64;
                    acc.l[1] +=
                        face_term(&lam.to_matrix3(), g, m, signed.signum())? * signed.abs() * face_root / (2.0 * PI);
                }
            }
        }
    }

    if dim == 3 {
        let metric = lam.to_matrix3();
        for k in 0..3 {
            let lkk = metric[(k, k)].max(0.0).sqrt();
            for side in [false, true] {
                let q = quadrant_pattern(pattern, k, side);
                if let Some(theta) = theta_for_pattern(&metric, k, q)? {
                    acc.l[1] += theta * lkk * h[k] / 2.0 / (2.0 * PI);
                }
            }
        }
    }
    Ok(())
}

fn finish(manifold: &VoxelManifold, r: u32, acc: Acc, source: LkcSource) -> LkcVector {
    let dim = manifold.dim();
    let mut values = vec![0.0; dim + 1];
    values[0] = manifold.euler_characteristic() as f64;
    values[1..=dim].copy_from_slice(&acc.l[1..=dim]);
    LkcVector { dim, values, r: Some(r), source, l1_locally_stationary: dim == 3, clipped: acc.clipped }
}

fn check_resolution(r: u32) -> Result<()> {
    if r == 0 {
        return Err(Error::InvalidArgument("LKC estimation needs an odd added resolution r >= 1".into()));
    }
    if r.is_multiple_of(2) {
        return Err(Error::EvenResolution(r));
    }
    Ok(())
}

/// LKC Riemann sums for the metric induced by `source` on `manifold`.
///
/// Ensemble sources give the estimates `L^_d^(r)`, white-noise sources the
/// deterministic values of the normalized SuRF of white noise.
pub fn lkc_compute(
    source: JetSource<'_>,
    kernel: &GaussianKernel,
    manifold: &VoxelManifold,
    r: u32,
    options: LkcOptions,
) -> Result<LkcVector> {
    check_resolution(r)?;
    let grid = manifold.refined_grid(r)?;
    Ok(lkc_on_grid(source, kernel, manifold, &grid, options, |_, _| Ok(()))?.0)
}

/// [`lkc_compute`] on a prebuilt grid, also evaluating `extra` at every grid
/// point from the same jet moments. The extra values are returned in grid order.
pub(crate) fn lkc_on_grid<T, F>(
    source: JetSource<'_>,
    kernel: &GaussianKernel,
    manifold: &VoxelManifold,
    grid: &RefinedGrid,
    options: LkcOptions,
    extra: F,
) -> Result<(LkcVector, Vec<T>)>
where
    T: Send,
    F: Fn(&GramSlab, usize) -> Result<T> + Sync,
{
    let r = grid.r();
    check_resolution(r)?;
    let dim = manifold.dim();
    if source.data().dim() != dim || kernel.dim() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: source.data().dim() });
    }
    let axes = grid.axes();
    let dense = grid.dense_map();
    let level = if options.face_term && dim == 3 { 2 } else { 1 };
    let parts = gram_slabs(source, kernel, axes, level, |slab| {
        let start = slab.rows.start * slab.qlen[1] * slab.qlen[2];
        let mut acc = Acc::default();
        let mut values = Vec::new();
        for local in 0..slab.len() {
            let id = dense[start + local];
            if id == u32::MAX {
                continue;
            }
            let p = &grid.points()[id as usize];
            let x = &p.coord[..dim];
            let g = slab.gram(local);
            let lam = metric_from_gram(&g, dim, x)?;
            let gamma =
                if level == 2 && p.pattern.count_ones() < 8 { Some(christoffel_from_gram(&g, dim, x)?) } else { None };
            accumulate(&mut acc, axes, p.pattern, &lam, gamma.as_ref())?;
            values.push(extra(slab, local)?);
        }
        Ok((acc, values))
    })?;
    let mut total = Acc::default();
    let mut values = Vec::with_capacity(grid.len());
    // Slabs cover the bounding box in row-major order, as do grid points.
    for (part, v) in parts {
        total.add(&part);
        values.extend(v);
    }
    let tag = if source.is_ensemble() { LkcSource::Estimate } else { LkcSource::WhiteNoiseTheory };
    Ok((finish(manifold, r, total, tag), values))
}

/// The same Riemann sums for a constant metric.
pub fn lkc_constant_metric(manifold: &VoxelManifold, r: u32, metric: &SymMat) -> Result<LkcVector> {
    check_resolution(r)?;
    if metric.dim != manifold.dim() {
        return Err(Error::DimensionMismatch { expected: manifold.dim(), got: metric.dim });
    }
    let grid = manifold.refined_grid(r)?;
    let mut acc = Acc::default();
    for p in grid.points() {
        accumulate(&mut acc, grid.axes(), p.pattern, metric, None)?;
    }
    Ok(finish(manifold, r, acc, LkcSource::WhiteNoiseTheory))
}

/// LKCs of a box with the given side lengths under the stationary metric of
/// an isotropic Gaussian kernel with FWHM `fwhm`:
/// `L_d = (4 log 2)^(d/2) V_d / f^d` with `V_d` the intrinsic volumes.
pub fn lkc_stationary_closed_form(sides: &[f64], fwhm: f64) -> Result<LkcVector> {
    let dim = sides.len();
    if dim == 0 || dim > MAX_DIM {
        return Err(Error::Dimension(dim));
    }
    if sides.iter().any(|&s| !(s > 0.0 && s.is_finite())) || !(fwhm > 0.0 && fwhm.is_finite()) {
        return Err(Error::InvalidArgument("box sides and FWHM must be positive".into()));
    }
    // Elementary symmetric polynomials of the side lengths.
    let mut e = vec![0.0; dim + 1];
    e[0] = 1.0;
    for &s in sides {
        for d in (1..=dim).rev() {
            e[d] += e[d - 1] * s;
        }
    }
    let scale = (4.0 * std::f64::consts::LN_2).sqrt() / fwhm;
    let values = (0..=dim).map(|d| e[d] * scale.powi(d as i32)).collect();
    Ok(LkcVector {
        dim,
        values,
        r: None,
        source: LkcSource::StationaryClosedForm,
        l1_locally_stationary: false,
        clipped: 0,
    })
}
