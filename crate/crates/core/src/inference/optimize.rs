//! Maximization of the t-field over a voxel manifold.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::jets::{gram_slabs, JetSource};
use crate::kernel::{GaussianKernel, Order};
use crate::lattice::{FieldEnsemble, MAX_DIM};
use crate::manifold::{RefinedGrid, VoxelManifold};
use crate::surf::{t_from_jets, PointEvaluator, SurfSpec};

use super::maxima::top_local_maxima;

/// Stopping rules of the projected quasi-Newton ascent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AscentOptions {
    pub gradient_tol: f64,
    pub step_tol: f64,
    pub max_iter: usize,
}

impl Default for AscentOptions {
    fn default() -> Self {
        AscentOptions { gradient_tol: 1e-8, step_tol: 1e-10, max_iter: 200 }
    }
}

/// End point of one ascent.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Ascent {
    pub point: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    /// Whether a stopping tolerance was met before the iteration limit.
    pub converged: bool,
}

/// Result of [`maximize_t_field`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Maximum {
    pub point: Vec<f64>,
    pub value: f64,
    /// Maximum over the scan grid.
    pub grid_max: f64,
    pub ascents: Vec<Ascent>,
}

/// t-statistic from the sample mean and variance of the smoothed fields.
pub(crate) fn t_from_moments(x: &[f64], n: usize, mean: f64, var: f64) -> Result<f64> {
    if !(var > 1e-300) || var <= 1e-24 * mean * mean {
        return Err(Error::DegenerateStatistic { location: x.to_vec() });
    }
    Ok((n as f64).sqrt() * mean / var.sqrt())
}

/// The t-field at every point of `grid`, in grid order.
pub fn t_on_grid(ensemble: &FieldEnsemble, kernel: &GaussianKernel, grid: &RefinedGrid) -> Result<Vec<f64>> {
    let dim = grid.dim();
    let dense = grid.dense_map();
    let parts = gram_slabs(JetSource::Ensemble(ensemble), kernel, grid.axes(), 0, |slab| {
        let start = slab.rows.start * slab.qlen[1] * slab.qlen[2];
        let mut out = Vec::new();
        for local in 0..slab.len() {
            let id = dense[start + local];
            if id != u32::MAX {
                let x = &grid.points()[id as usize].coord[..dim];
                out.push(t_from_moments(x, slab.fields, slab.means[0][local], slab.get(local, 0, 0))?);
            }
        }
        Ok(out)
    })?;
    Ok(parts.into_iter().flatten().collect())
}

/// Objective for the ascent: the t-field and its gradient.
struct Objective<'a> {
    eval: &'a PointEvaluator,
    manifold: &'a VoxelManifold,
}

impl Objective<'_> {
    fn value_grad(&self, x: &[f64]) -> Result<(f64, DVector<f64>)> {
        let jets = self.eval.field_jets(x, Order::Gradient);
        let t = t_from_jets(x, &jets, Order::Gradient)?;
        Ok((t.value, DVector::from_vec(t.gradient)))
    }

    /// Gradient with components pointing out of the manifold removed.
    fn project_gradient(&self, x: &[f64], g: &DVector<f64>) -> DVector<f64> {
        let mut pg = g.clone();
        let mut probe = x.to_vec();
        for d in 0..x.len() {
            if g[d] == 0.0 {
                continue;
            }
            probe[d] = x[d] + g[d].signum() * 1e-7 * self.manifold.spacing()[d];
            if !self.manifold.contains(&probe) {
                pg[d] = 0.0;
            }
            probe[d] = x[d];
        }
        pg
    }

    /// Nearest point of the boxes within two lattice steps of the box
    /// containing `anchor`.
    fn project(&self, anchor: &[f64], y: &[f64]) -> Vec<f64> {
        if self.manifold.contains(y) {
            return y.to_vec();
        }
        let dim = y.len();
        let lattice = self.manifold.lattice();
        let home = self.manifold.locate(anchor).map(|v| lattice.index(v)).unwrap_or([0; MAX_DIM]);
        let mut best = anchor.to_vec();
        let mut best_d = f64::INFINITY;
        let span = |d: usize| if d < dim { -2..=2 } else { 0..=0 };
        for o0 in span(0) {
            for o1 in span(1) {
                for o2 in span(2) {
                    let idx = [home[0] + o0, home[1] + o1, home[2] + o2];
                    let Some(v) = lattice.lookup(&idx) else {
                        continue;
                    };
                    let (lo, hi) = self.manifold.voxel_box(v);
                    let c: Vec<f64> = (0..dim).map(|d| y[d].clamp(lo[d], hi[d])).collect();
                    let dist: f64 = (0..dim).map(|d| (c[d] - y[d]).powi(2)).sum();
                    if dist < best_d {
                        best_d = dist;
                        best = c;
                    }
                }
            }
        }
        best
    }
}

/// Projected BFGS ascent of the t-field from `x0`, with steps capped at the
/// smallest voxel spacing and an Armijo backtracking line search.
pub fn ascend(eval: &PointEvaluator, manifold: &VoxelManifold, x0: &[f64], options: &AscentOptions) -> Result<Ascent> {
    let dim = manifold.dim();
    if x0.len() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: x0.len() });
    }
    if !manifold.contains(x0) {
        return Err(Error::InvalidArgument(format!("start point {x0:?} is outside the manifold")));
    }
    let obj = Objective { eval, manifold };
    let max_step = manifold.spacing().iter().cloned().fold(f64::INFINITY, f64::min);
    let mut x = x0.to_vec();
    let (mut f, mut g) = obj.value_grad(&x)?;
    let mut h = DMatrix::<f64>::identity(dim, dim);
    let mut fresh = true;
    for it in 0..options.max_iter {
        let pg = obj.project_gradient(&x, &g);
        if pg.norm() < options.gradient_tol {
            return Ok(Ascent { point: x, value: f, iterations: it, converged: true });
        }
        let mut p = &h * &pg;
        if p.dot(&pg) <= 0.0 {
            h = DMatrix::identity(dim, dim);
            fresh = true;
            p = pg.clone();
        }
        let norm = p.norm();
        if norm > max_step {
            p *= max_step / norm;
        }
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let trial: Vec<f64> = (0..dim).map(|d| x[d] + t * p[d]).collect();
            let y = obj.project(&x, &trial);
            let s = DVector::from_iterator(dim, (0..dim).map(|d| y[d] - x[d]));
            if s.norm() < options.step_tol {
                break;
            }
            let (fy, gy) = obj.value_grad(&y)?;
            if fy >= f + 1e-4 * g.dot(&s) && fy >= f {
                accepted = Some((y, s, fy, gy));
                break;
            }
            t *= 0.5;
        }
        let Some((y, s, fy, gy)) = accepted else {
            if fresh {
                return Ok(Ascent { point: x, value: f, iterations: it, converged: true });
            }
            h = DMatrix::identity(dim, dim);
            fresh = true;
            continue;
        };
        // Inverse-Hessian update for the minimization of -T.
        let yv = &g - &gy;
        let sy = s.dot(&yv);
        if sy > 1e-12 * s.norm() * yv.norm() {
            let rho = 1.0 / sy;
            let id = DMatrix::<f64>::identity(dim, dim);
            let a = &id - rho * &s * yv.transpose();
            let b = &id - rho * &yv * s.transpose();
            h = &a * &h * &b + rho * &s * s.transpose();
            fresh = false;
        }
        let step = s.norm();
        x = y;
        f = fy;
        g = gy;
        if step < options.step_tol {
            return Ok(Ascent { point: x, value: f, iterations: it + 1, converged: true });
        }
    }
    Ok(Ascent { point: x, value: f, iterations: options.max_iter, converged: false })
}

/// Ascents from the highest local maxima of `values` on `grid`.
pub(crate) fn ascend_from_grid(
    eval: &PointEvaluator,
    manifold: &VoxelManifold,
    grid: &RefinedGrid,
    values: &[f64],
    starts: usize,
) -> Result<Vec<Ascent>> {
    let dim = grid.dim();
    top_local_maxima(grid, values, starts)
        .into_iter()
        .map(|i| ascend(eval, manifold, &grid.points()[i].coord[..dim], &AscentOptions::default()))
        .collect()
}

/// Maximum of the t-field of `spec` over `manifold`: scans the refined grid
/// with added resolution `r_scan`, then ascends from its `starts` highest
/// local maxima. The result is never below the grid maximum.
pub fn maximize_t_field(spec: &SurfSpec, manifold: &VoxelManifold, starts: usize, r_scan: u32) -> Result<Maximum> {
    if starts == 0 {
        return Err(Error::InvalidArgument("at least one start is needed".into()));
    }
    if spec.dim() != manifold.dim() {
        return Err(Error::DimensionMismatch { expected: manifold.dim(), got: spec.dim() });
    }
    let grid = manifold.refined_grid(r_scan)?;
    let values = t_on_grid(spec.ensemble(), spec.kernel(), &grid)?;
    let (imax, &grid_max) = values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))
        .ok_or_else(|| Error::InvalidArgument("empty scan grid".into()))?;
    let ascents = ascend_from_grid(spec.evaluator(), manifold, &grid, &values, starts)?;
    let dim = grid.dim();
    let mut point = grid.points()[imax].coord[..dim].to_vec();
    let mut value = grid_max;
    for a in &ascents {
        if a.value > value {
            value = a.value;
            point = a.point.clone();
        }
    }
    Ok(Maximum { point, value, grid_max, ascents })
}
