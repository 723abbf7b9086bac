//! Second moments of kernel jets on fine grids.
//!
//! For a query point `x` and jets `K_a(x, .)` (the kernel and its
//! derivatives), the white-noise Gram matrix is `G_ab = sum_v K_a K_b`; for an
//! ensemble it is the sample covariance of the smoothed fields' jets. Both
//! feed the metric and Christoffel formulas of [`crate::geometry`].

use std::ops::Range;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernel::{GaussianKernel, KernelJet, Order};
use crate::lattice::{FieldEnsemble, LatticeIndex, VoxelSet, MAX_DIM};
use crate::manifold::FineAxes;
use crate::surf::PointEvaluator;
use crate::tensor::{field_requests, gram_requests, jet_orders, packed_index, Contractor};

/// Where the covariance of the smoothed field comes from.
#[derive(Debug, Clone, Copy)]
pub enum JetSource<'a> {
    /// Independent unit-variance noise on the given lattice.
    WhiteNoise(&'a Arc<VoxelSet>),
    /// Sample moments of an ensemble.
    Ensemble(&'a FieldEnsemble),
}

impl JetSource<'_> {
    pub fn data(&self) -> &Arc<VoxelSet> {
        match self {
            JetSource::WhiteNoise(d) => d,
            JetSource::Ensemble(e) => e.domain(),
        }
    }

    pub fn is_ensemble(&self) -> bool {
        matches!(self, JetSource::Ensemble(_))
    }
}

/// Number of jets of a given level.
pub fn jet_count(dim: usize, level: u8) -> usize {
    jet_orders(dim, level).len()
}

/// Position of the jet `d/dx_d d/dx_e` among the jets of level 2.
pub fn hessian_jet(dim: usize, d: usize, e: usize) -> usize {
    let (d, e) = if d <= e { (d, e) } else { (e, d) };
    1 + dim + packed_index(dim, d, e)
}

/// Gram matrix of the jets at one point, packed upper triangle.
#[derive(Debug, Clone, PartialEq)]
pub struct Gram {
    pub jets: usize,
    pub packed: Vec<f64>,
    /// Sample means of the jets (ensemble source only).
    pub mean: Vec<f64>,
}

impl Gram {
    #[inline]
    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.packed[packed_index(self.jets, a, b)]
    }
}

/// Gram matrices for the points of a slab of query rows, stored per pair.
#[derive(Debug, Clone)]
pub struct GramSlab {
    pub rows: Range<usize>,
    pub qlen: [usize; MAX_DIM],
    pub jets: usize,
    /// `pairs[packed][local point]`.
    pub pairs: Vec<Vec<f64>>,
    /// `means[jet][local point]` (ensemble source only).
    pub means: Vec<Vec<f64>>,
    pub fields: usize,
}

impl GramSlab {
    /// Number of points in the slab.
    pub fn len(&self) -> usize {
        self.rows.len() * self.qlen[1] * self.qlen[2]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Local position of bounding-box position `flat` (which must be in the slab).
    #[inline]
    pub fn local(&self, flat: usize) -> usize {
        flat - self.rows.start * self.qlen[1] * self.qlen[2]
    }

    #[inline]
    pub fn get(&self, local: usize, a: usize, b: usize) -> f64 {
        self.pairs[packed_index(self.jets, a, b)][local]
    }

    pub fn gram(&self, local: usize) -> Gram {
        Gram {
            jets: self.jets,
            packed: self.pairs.iter().map(|p| p[local]).collect(),
            mean: self.means.iter().map(|m| m[local]).collect(),
        }
    }
}

/// Approximate number of doubles held per slab.
const SLAB_BUDGET: usize = 1 << 22;

/// Dense embedding of a data lattice for separable evaluation.
struct DenseData {
    lattice: LatticeIndex,
    axes: [Vec<f64>; MAX_DIM],
}

impl DenseData {
    fn new(set: &VoxelSet) -> Option<Self> {
        let lattice = set.lattice().ok()?;
        let ext = lattice.extent();
        let axes = std::array::from_fn(|d| {
            if d < set.dim() {
                (0..ext[d]).map(|i| lattice.origin()[d] + i as f64 * lattice.spacing()[d]).collect()
            } else {
                vec![0.0]
            }
        });
        Some(DenseData { lattice, axes })
    }

    fn embed(&self, values: impl Iterator<Item = f64>) -> Vec<f64> {
        let mut out = vec![0.0; self.lattice.dense_len()];
        for (i, v) in values.enumerate() {
            out[self.lattice.dense_position(i)] = v;
        }
        out
    }
}

/// Computes jet Gram matrices on the whole fine grid `axes`, slab by slab,
/// and hands each slab to `visit`. Results are returned in slab order.
///
/// `level` 1 gives the value and first derivatives; level 2 adds the second
/// derivatives. Slab boundaries depend only on the grid and the level, so the
/// output is identical for any number of threads.
pub fn gram_slabs<R, F>(
    source: JetSource<'_>,
    kernel: &GaussianKernel,
    axes: &FineAxes,
    level: u8,
    visit: F,
) -> Result<Vec<R>>
where
    R: Send,
    F: Fn(&GramSlab) -> Result<R> + Sync,
{
    let data = source.data();
    if kernel.dim() != data.dim() || axes.dim != data.dim() {
        return Err(Error::DimensionMismatch { expected: data.dim(), got: kernel.dim() });
    }
    if let JetSource::Ensemble(e) = source {
        if e.len() < 2 {
            return Err(Error::InvalidArgument("ensemble moments need at least two fields".into()));
        }
    }
    let dim = data.dim();
    let orders = jet_orders(dim, level);
    let jets = orders.len();
    let npairs = jets * (jets + 1) / 2;
    let qlen = axes.len;
    let per_row = qlen[1] * qlen[2] * (npairs + jets);
    let rows_per_slab = (SLAB_BUDGET / per_row.max(1)).clamp(1, qlen[0]);
    let slabs: Vec<Range<usize>> =
        (0..qlen[0]).step_by(rows_per_slab).map(|s| s..(s + rows_per_slab).min(qlen[0])).collect();
    let query = axes.coords();
    let dense = if kernel.truncation().is_none() { DenseData::new(data) } else { None };

    match (source, dense) {
        (JetSource::WhiteNoise(set), Some(dense)) => {
            let requests = gram_requests(&orders);
            let c = Contractor::new(kernel, &query, &dense.axes, &requests);
            let mask = dense.embed(std::iter::repeat_n(1.0, set.len()));
            let partials = c.partials(&mask, &requests);
            slabs
                .into_par_iter()
                .map(|rows| {
                    let pairs = c.finish(&partials, &requests, rows.clone());
                    visit(&GramSlab { rows, qlen, jets, pairs, means: Vec::new(), fields: 0 })
                })
                .collect()
        }
        (JetSource::Ensemble(ens), Some(dense)) => {
            let requests = field_requests(&orders);
            let c = Contractor::new(kernel, &query, &dense.axes, &requests);
            slabs
                .into_par_iter()
                .map(|rows| {
                    let npts = rows.len() * qlen[1] * qlen[2];
                    let mut acc = Moments::new(jets, npts);
                    for field in ens.fields() {
                        let p = c.partials(&dense.embed(field.iter().copied()), &requests);
                        let j = c.finish(&p, &requests, rows.clone());
                        acc.push(&j);
                    }
                    let (means, pairs) = acc.finish();
                    visit(&GramSlab { rows, qlen, jets, pairs, means, fields: ens.len() })
                })
                .collect()
        }
        (source, None) => {
            let eval = match source {
                JetSource::WhiteNoise(set) => PointEvaluator::kernel_only(kernel.clone(), set.clone())?,
                JetSource::Ensemble(ens) => PointEvaluator::new(kernel.clone(), ens)?,
            };
            slabs
                .into_par_iter()
                .map(|rows| {
                    let npts = rows.len() * qlen[1] * qlen[2];
                    let mut pairs = vec![vec![0.0; npts]; npairs];
                    let mut means = if source.is_ensemble() { vec![vec![0.0; npts]; jets] } else { Vec::new() };
                    let mut local = 0;
                    for q0 in rows.clone() {
                        for q1 in 0..qlen[1] {
                            for q2 in 0..qlen[2] {
                                let x = [query[0][q0], query[1][q1], query[2][q2]];
                                let g = point_gram(source, &eval, &x[..dim], level);
                                for (k, v) in g.packed.iter().enumerate() {
                                    pairs[k][local] = *v;
                                }
                                for (k, v) in g.mean.iter().enumerate() {
                                    means[k][local] = *v;
                                }
                                local += 1;
                            }
                        }
                    }
                    let fields = match source {
                        JetSource::Ensemble(e) => e.len(),
                        JetSource::WhiteNoise(_) => 0,
                    };
                    visit(&GramSlab { rows, qlen, jets, pairs, means, fields })
                })
                .collect()
        }
    }
}

/// Streaming means and co-moments of jets at many points.
struct Moments {
    jets: usize,
    count: f64,
    mean: Vec<Vec<f64>>,
    comoment: Vec<Vec<f64>>,
    delta: Vec<f64>,
}

impl Moments {
    fn new(jets: usize, npts: usize) -> Self {
        Moments {
            jets,
            count: 0.0,
            mean: vec![vec![0.0; npts]; jets],
            comoment: vec![vec![0.0; npts]; jets * (jets + 1) / 2],
            delta: vec![0.0; jets],
        }
    }

    /// Adds one field's jets (`values[jet][point]`).
    fn push(&mut self, values: &[Vec<f64>]) {
        self.count += 1.0;
        let n = self.count;
        let npts = self.mean[0].len();
        for p in 0..npts {
            for a in 0..self.jets {
                self.delta[a] = values[a][p] - self.mean[a][p];
                self.mean[a][p] += self.delta[a] / n;
            }
            let mut k = 0;
            for a in 0..self.jets {
                for b in a..self.jets {
                    // Welford: delta before the update times the residual after it.
                    self.comoment[k][p] += self.delta[a] * (values[b][p] - self.mean[b][p]);
                    k += 1;
                }
            }
        }
    }

    fn finish(self) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let denom = self.count - 1.0;
        let cov = self.comoment.into_iter().map(|c| c.into_iter().map(|v| v / denom).collect()).collect();
        (self.mean, cov)
    }
}

fn jet_component(jet: &KernelJet, order: &[u8; MAX_DIM]) -> f64 {
    let total: u8 = order.iter().sum();
    match total {
        0 => jet.value,
        1 => jet.grad[order.iter().position(|&o| o == 1).unwrap()],
        _ => {
            let mut idx = order.iter().enumerate().flat_map(|(d, &o)| std::iter::repeat_n(d, o as usize));
            let d = idx.next().unwrap();
            let e = idx.next().unwrap();
            jet.hess[d][e]
        }
    }
}

fn point_gram(source: JetSource<'_>, eval: &PointEvaluator, x: &[f64], level: u8) -> Gram {
    let dim = x.len();
    let orders = jet_orders(dim, level);
    let jets = orders.len();
    let order = if level >= 2 { Order::Hessian } else { Order::Gradient };
    let mut packed = vec![0.0; jets * (jets + 1) / 2];
    match source {
        JetSource::WhiteNoise(_) => {
            let mut comp = vec![0.0; jets];
            eval.for_each_voxel(x, order, |_, jet| {
                for (c, o) in comp.iter_mut().zip(&orders) {
                    *c = jet_component(jet, o);
                }
                let mut k = 0;
                for a in 0..jets {
                    for b in a..jets {
                        packed[k] += comp[a] * comp[b];
                        k += 1;
                    }
                }
            });
            Gram { jets, packed, mean: Vec::new() }
        }
        JetSource::Ensemble(ens) => {
            let fj = eval.field_jets(x, order);
            let n = ens.len();
            let comp = |i: usize, o: &[u8; MAX_DIM]| -> f64 {
                let total: u8 = o.iter().sum();
                match total {
                    0 => fj.value[i],
                    1 => fj.grad[i * dim + o.iter().position(|&v| v == 1).unwrap()],
                    _ => {
                        let mut idx = o.iter().enumerate().flat_map(|(d, &c)| std::iter::repeat_n(d, c as usize));
                        let d = idx.next().unwrap();
                        let e = idx.next().unwrap();
                        fj.hess[(i * dim + d) * dim + e]
                    }
                }
            };
            let values: Vec<Vec<f64>> = orders.iter().map(|o| (0..n).map(|i| comp(i, o)).collect()).collect();
            let mut m = Moments::new(jets, 1);
            for i in 0..n {
                let col: Vec<Vec<f64>> = values.iter().map(|v| vec![v[i]]).collect();
                m.push(&col);
            }
            let (mean, cov) = m.finish();
            for (k, c) in cov.iter().enumerate() {
                packed[k] = c[0];
            }
            Gram { jets, packed, mean: mean.into_iter().map(|m| m[0]).collect() }
        }
    }
}

/// Gram matrix of the jets at a single point by direct summation.
pub fn gram_at(source: JetSource<'_>, kernel: &GaussianKernel, x: &[f64], level: u8) -> Result<Gram> {
    let data = source.data();
    if x.len() != data.dim() || kernel.dim() != data.dim() {
        return Err(Error::DimensionMismatch { expected: data.dim(), got: x.len() });
    }
    let eval = match source {
        JetSource::WhiteNoise(set) => PointEvaluator::kernel_only(kernel.clone(), set.clone())?,
        JetSource::Ensemble(ens) => {
            if ens.len() < 2 {
                return Err(Error::InvalidArgument("ensemble moments need at least two fields".into()));
            }
            PointEvaluator::new(kernel.clone(), ens)?
        }
    };
    Ok(point_gram(source, &eval, x, level))
}
