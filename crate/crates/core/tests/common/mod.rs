//! Oracles shared by the integration targets: tabulated LKCs, finite
//! differences and a Monte-Carlo estimate of the expected Euler
//! characteristic of excursion sets.
#![allow(dead_code)]

use std::sync::Arc;

use rayon::prelude::*;
use surf_core::jets::JetSource;
use surf_core::kernel::{GaussianKernel, Order};
use surf_core::lattice::{make_domain_preset, sample_ensemble, RngSpec};
use surf_core::lkc::{lkc_compute, LkcOptions};
use surf_core::manifold::VoxelManifold;
use surf_core::surf::PointEvaluator;

pub const FWHM: [f64; 7] = [1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0];

/// White-noise LKCs of the almost stationary boxes, one row per `L_d`.
pub const TABLE_D1: [[f64; 7]; 1] = [[146.52, 110.41, 83.25, 66.60, 55.50, 47.57, 41.63]];
pub const TABLE_D2: [[f64; 7]; 2] =
    [[58.61, 44.16, 33.30, 26.64, 22.20, 19.03, 16.65], [858.72, 487.59, 277.24, 177.45, 123.23, 90.53, 69.31]];
pub const TABLE_D3: [[f64; 7]; 3] = [
    [87.91, 66.24, 49.95, 39.96, 33.30, 28.54, 24.98],
    [2576.13, 1462.77, 831.72, 532.34, 369.68, 271.60, 207.94],
    [25163.37, 10766.66, 4616.20, 2363.73, 1367.90, 861.42, 577.08],
];

/// LKCs of the stationary field with the same covariance on the unexpanded boxes.
pub const CLOSED_D1: [[f64; 7]; 1] = [[166.51, 111.01, 83.26, 66.60, 55.50, 47.57, 41.63]];
pub const CLOSED_D2: [[f64; 7]; 2] =
    [[66.60, 44.40, 33.30, 26.64, 22.20, 19.03, 16.65], [1109.00, 492.90, 277.26, 177.45, 123.23, 90.53, 69.31]];
pub const CLOSED_D3: [[f64; 7]; 3] = [
    [99.91, 66.60, 49.95, 39.96, 33.30, 28.54, 24.98],
    [3327.11, 1478.71, 831.78, 532.34, 369.68, 271.6, 207.94],
    [36933.30, 10943.20, 4616.66, 2363.73, 1367.90, 861.42, 577.08],
];

pub fn stat_preset(dim: usize) -> &'static str {
    ["stat1d", "stat2d", "stat3d"][dim - 1]
}

/// White-noise LKCs of the stationary preset of dimension `dim`.
pub fn white_noise_lkcs(dim: usize, f: f64, r: u32) -> Vec<f64> {
    let p = make_domain_preset(stat_preset(dim), f).unwrap();
    let m = VoxelManifold::new(p.domain.clone()).unwrap();
    let k = GaussianKernel::isotropic(dim, f).unwrap();
    lkc_compute(JetSource::WhiteNoise(&p.data), &k, &m, r, LkcOptions::default()).unwrap().values
}

/// Whether `got` agrees with `want` when both are rounded to `digits`
/// significant figures.
pub fn same_sig_figs(got: f64, want: f64, digits: i32) -> bool {
    let e = want.abs().log10().floor() as i32 - digits + 1;
    let scale = 10f64.powi(e);
    (got / scale).round() == (want / scale).round()
}

/// Central-difference gradient of a scalar function.
pub fn fd_gradient(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    (0..x.len())
        .map(|d| {
            let mut p = x.to_vec();
            let mut m = x.to_vec();
            p[d] += h;
            m[d] -= h;
            (f(&p) - f(&m)) / (2.0 * h)
        })
        .collect()
}

/// `max |a - b| / max(|b|, floor)`.
pub fn max_rel_err(a: &[f64], b: &[f64], floor: f64) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs() / y.abs().max(floor)).fold(0.0, f64::max)
}

/// Monte-Carlo mean of the Euler characteristic of `{X >= u}`.
#[derive(Debug, Clone, Copy)]
pub struct EcEstimate {
    pub u: f64,
    pub mean: f64,
    pub se: f64,
}

/// Samples `reps` unit-variance smoothed white-noise fields on the stationary
/// preset of dimension 1 or 2, evaluates them on the resolution-`r` grid and
/// counts the Euler characteristic of each excursion set directly: runs of
/// exceeding points on a line, `V - E + F` of the union of closed pixels in
/// the plane.
pub fn monte_carlo_ec(dim: usize, f: f64, reps: usize, r: u32, seed: u64, us: &[f64]) -> Vec<EcEstimate> {
    assert!(dim == 1 || dim == 2);
    let p = make_domain_preset(stat_preset(dim), f).unwrap();
    let m = VoxelManifold::new(p.domain.clone()).unwrap();
    let grid = m.refined_grid(r).unwrap();
    let kernel = GaussianKernel::isotropic(dim, f).unwrap();
    let ens = Arc::new(sample_ensemble(p.data.clone(), reps, RngSpec::new(seed, 0), None).unwrap());
    let eval = PointEvaluator::new(kernel, &ens).unwrap();
    // values[point][field]
    let values: Vec<Vec<f64>> = grid
        .points()
        .par_iter()
        .map(|g| {
            let x = &g.coord[..dim];
            let norm = eval.norm_jet(x, Order::Value).value.sqrt();
            eval.field_jets(x, Order::Value).value.iter().map(|v| v / norm).collect()
        })
        .collect();
    let axes = grid.axes();
    let (n0, n1) = (axes.len[0], if dim == 2 { axes.len[1] } else { 1 });
    let cell = |g: &surf_core::manifold::GridPoint| {
        let k0 = (g.index[0] - axes.jmin[0]) as usize;
        let k1 = if dim == 2 { (g.index[1] - axes.jmin[1]) as usize } else { 0 };
        (k0, k1)
    };
    us.iter()
        .map(|&u| {
            let ecs: Vec<f64> = (0..reps)
                .into_par_iter()
                .map(|i| {
                    let mut on = vec![false; n0 * n1];
                    for (g, v) in grid.points().iter().zip(&values) {
                        if v[i] >= u {
                            let (a, b) = cell(g);
                            on[a * n1 + b] = true;
                        }
                    }
                    if dim == 1 {
                        (0..n0).filter(|&a| on[a] && (a == 0 || !on[a - 1])).count() as f64
                    } else {
                        pixel_euler(&on, n0, n1) as f64
                    }
                })
                .collect();
            let n = ecs.len() as f64;
            let mean = ecs.iter().sum::<f64>() / n;
            let var = ecs.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (n - 1.0);
            EcEstimate { u, mean, se: (var / n).sqrt() }
        })
        .collect()
}

/// Euler characteristic of the union of closed unit squares at the `on`
/// cells of an `n0 x n1` raster.
pub fn pixel_euler(on: &[bool], n0: usize, n1: usize) -> i64 {
    let at = |a: isize, b: isize| {
        a >= 0 && b >= 0 && (a as usize) < n0 && (b as usize) < n1 && on[a as usize * n1 + b as usize]
    };
    let (mut v, mut e, mut faces) = (0i64, 0i64, 0i64);
    for a in 0..=n0 as isize {
        for b in 0..=n1 as isize {
            if at(a, b) {
                faces += 1;
            }
            // Vertex at the lower-left corner of cell (a, b).
            if at(a, b) || at(a - 1, b) || at(a, b - 1) || at(a - 1, b - 1) {
                v += 1;
            }
            // Edge from that vertex along the first axis, shared by cells (a, b - 1) and (a, b).
            if at(a, b) || at(a, b - 1) {
                e += 1;
            }
            // Edge along the second axis, shared by cells (a - 1, b) and (a, b).
            if at(a, b) || at(a - 1, b) {
                e += 1;
            }
        }
    }
    v - e + faces
}
