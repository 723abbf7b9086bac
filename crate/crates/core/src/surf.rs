//! Super-resolution fields: kernel sums of lattice data evaluated anywhere,
//! with exact derivatives, their covariance and the one-sample t-field.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::kernel::{GaussianKernel, KernelJet, Order};
use crate::lattice::{FieldEnsemble, LatticeField, LatticeIndex, VoxelSet, MAX_DIM};

/// A lattice covariance `c(u, v)` between voxels.
pub type LatticeCovariance = Arc<dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync>;

/// Value and derivatives of a SuRF at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfValue {
    pub value: f64,
    /// Empty unless the gradient was requested.
    pub gradient: Vec<f64>,
    /// Row-major `D x D`; empty unless the Hessian was requested.
    pub hessian: Vec<f64>,
}

/// Kernel-weighted sums of every field of an ensemble at one point.
#[derive(Debug, Clone)]
pub struct FieldJets {
    pub fields: usize,
    pub dim: usize,
    pub value: Vec<f64>,
    /// `grad[i * dim + d]`.
    pub grad: Vec<f64>,
    /// `hess[(i * dim + d) * dim + e]`.
    pub hess: Vec<f64>,
}

/// Direct summation of kernel-weighted lattice values at arbitrary points.
///
/// Values are stored voxel-major so that the kernel jet of each voxel is
/// computed once and applied to every field.
#[derive(Debug, Clone)]
pub struct PointEvaluator {
    kernel: GaussianKernel,
    domain: Arc<VoxelSet>,
    lattice: Option<LatticeIndex>,
    values: Vec<f64>,
    fields: usize,
}

impl PointEvaluator {
    pub fn new(kernel: GaussianKernel, ensemble: &FieldEnsemble) -> Result<Self> {
        let domain = ensemble.domain().clone();
        check_kernel(&kernel, &domain)?;
        let n = ensemble.len();
        let mut values = vec![0.0; n * domain.len()];
        for (i, f) in ensemble.fields().enumerate() {
            for (v, x) in f.iter().enumerate() {
                values[v * n + i] = *x;
            }
        }
        Ok(Self::with_values(kernel, domain, values, n))
    }

    /// An evaluator without field values, for kernel sums only.
    pub fn kernel_only(kernel: GaussianKernel, domain: Arc<VoxelSet>) -> Result<Self> {
        check_kernel(&kernel, &domain)?;
        Ok(Self::with_values(kernel, domain, Vec::new(), 0))
    }

    fn with_values(kernel: GaussianKernel, domain: Arc<VoxelSet>, values: Vec<f64>, fields: usize) -> Self {
        let lattice = kernel.truncation().and_then(|_| domain.lattice().ok());
        PointEvaluator { kernel, domain, lattice, values, fields }
    }

    pub fn kernel(&self) -> &GaussianKernel {
        &self.kernel
    }

    pub fn domain(&self) -> &Arc<VoxelSet> {
        &self.domain
    }

    pub fn fields(&self) -> usize {
        self.fields
    }

    /// Calls `f(voxel, jet)` for every voxel in the kernel support at `x`.
    pub fn for_each_voxel(&self, x: &[f64], order: Order, mut f: impl FnMut(usize, &KernelJet)) {
        let dim = self.domain.dim();
        match (self.kernel.truncation(), &self.lattice) {
            (Some(rho), Some(lat)) => {
                let mut lo = [0i64; MAX_DIM];
                let mut hi = [0i64; MAX_DIM];
                for d in 0..dim {
                    let o = lat.origin()[d];
                    let s = lat.spacing()[d];
                    lo[d] = ((x[d] - rho - o) / s).ceil().max(0.0) as i64;
                    hi[d] = ((x[d] + rho - o) / s).floor().min(lat.extent()[d] as f64 - 1.0) as i64;
                    if hi[d] < lo[d] {
                        return;
                    }
                }
                for i0 in lo[0]..=hi[0] {
                    for i1 in lo[1]..=hi[1] {
                        for i2 in lo[2]..=hi[2] {
                            if let Some(v) = lat.lookup(&[i0, i1, i2]) {
                                let p = self.domain.point(v);
                                if self.kernel.in_support(x, p) {
                                    f(v, &self.kernel.jet(x, p, order));
                                }
                            }
                        }
                    }
                }
            }
            _ => {
                for (v, p) in self.domain.points().enumerate() {
                    if self.kernel.in_support(x, p) {
                        f(v, &self.kernel.jet(x, p, order));
                    }
                }
            }
        }
    }

    /// Kernel sums of every field at `x`, up to `order`.
    pub fn field_jets(&self, x: &[f64], order: Order) -> FieldJets {
        let dim = self.domain.dim();
        let n = self.fields;
        let mut out = FieldJets {
            fields: n,
            dim,
            value: vec![0.0; n],
            grad: if order >= Order::Gradient { vec![0.0; n * dim] } else { Vec::new() },
            hess: if order >= Order::Hessian { vec![0.0; n * dim * dim] } else { Vec::new() },
        };
        self.for_each_voxel(x, order, |v, jet| {
            let vals = &self.values[v * n..(v + 1) * n];
            for (acc, &y) in out.value.iter_mut().zip(vals) {
                *acc += jet.value * y;
            }
            if order >= Order::Gradient {
                for (i, &y) in vals.iter().enumerate() {
                    for d in 0..dim {
                        out.grad[i * dim + d] += jet.grad[d] * y;
                    }
                }
            }
            if order >= Order::Hessian {
                for (i, &y) in vals.iter().enumerate() {
                    for d in 0..dim {
                        for e in 0..dim {
                            out.hess[(i * dim + d) * dim + e] += jet.hess[d][e] * y;
                        }
                    }
                }
            }
        });
        out
    }

    /// `||K_x||^2` under the identity lattice covariance, with derivatives.
    pub fn norm_jet(&self, x: &[f64], order: Order) -> NormJet {
        let mut s = NormJet::default();
        self.for_each_voxel(x, order, |_, jet| s.add_pair(jet, jet, 1.0, order));
        s
    }

    /// `||K_x||^2` under a general lattice covariance, with derivatives.
    pub fn norm_jet_with(&self, x: &[f64], order: Order, cov: &LatticeCovariance) -> NormJet {
        let mut jets = Vec::new();
        self.for_each_voxel(x, order, |v, jet| jets.push((v, *jet)));
        let mut s = NormJet::default();
        for (u, ju) in &jets {
            for (v, jv) in &jets {
                let c = cov(self.domain.point(*u), self.domain.point(*v));
                if c != 0.0 {
                    s.add_pair(ju, jv, c, order);
                }
            }
        }
        s
    }
}

fn check_kernel(kernel: &GaussianKernel, domain: &VoxelSet) -> Result<()> {
    if kernel.dim() != domain.dim() {
        return Err(Error::DimensionMismatch { expected: domain.dim(), got: kernel.dim() });
    }
    Ok(())
}

/// `s(x) = ||K_x||^2` with gradient and Hessian.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct NormJet {
    pub value: f64,
    pub grad: [f64; MAX_DIM],
    pub hess: [[f64; MAX_DIM]; MAX_DIM],
}

impl NormJet {
    /// Adds `c * K_u K_v` and its derivatives (symmetrized in `u`, `v`).
    fn add_pair(&mut self, ju: &KernelJet, jv: &KernelJet, c: f64, order: Order) {
        self.value += c * ju.value * jv.value;
        if order >= Order::Gradient {
            for d in 0..MAX_DIM {
                self.grad[d] += c * (ju.grad[d] * jv.value + ju.value * jv.grad[d]);
            }
        }
        if order >= Order::Hessian {
            for d in 0..MAX_DIM {
                for e in 0..MAX_DIM {
                    self.hess[d][e] += c
                        * (ju.hess[d][e] * jv.value
                            + ju.grad[d] * jv.grad[e]
                            + ju.grad[e] * jv.grad[d]
                            + ju.value * jv.hess[d][e]);
                }
            }
        }
    }
}

/// A SuRF (or a family of SuRFs sharing one kernel) built from lattice data.
#[derive(Clone)]
pub struct SurfSpec {
    ensemble: Arc<FieldEnsemble>,
    kernel: GaussianKernel,
    normalized: bool,
    covariance: Option<LatticeCovariance>,
    evaluator: PointEvaluator,
}

impl fmt::Debug for SurfSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SurfSpec")
            .field("fields", &self.ensemble.len())
            .field("voxels", &self.ensemble.domain().len())
            .field("kernel", &self.kernel)
            .field("normalized", &self.normalized)
            .field("custom_covariance", &self.covariance.is_some())
            .finish()
    }
}

impl SurfSpec {
    pub fn new(ensemble: Arc<FieldEnsemble>, kernel: GaussianKernel, normalized: bool) -> Result<Self> {
        let evaluator = PointEvaluator::new(kernel.clone(), &ensemble)?;
        Ok(SurfSpec { ensemble, kernel, normalized, covariance: None, evaluator })
    }

    pub fn from_field(field: &LatticeField, kernel: GaussianKernel, normalized: bool) -> Result<Self> {
        let ensemble = FieldEnsemble::from_fields(std::slice::from_ref(field))?;
        Self::new(Arc::new(ensemble), kernel, normalized)
    }

    /// Uses `cov` instead of the identity when normalizing.
    pub fn with_covariance(mut self, cov: LatticeCovariance) -> Self {
        self.covariance = Some(cov);
        self
    }

    pub fn ensemble(&self) -> &Arc<FieldEnsemble> {
        &self.ensemble
    }

    pub fn kernel(&self) -> &GaussianKernel {
        &self.kernel
    }

    pub fn normalized(&self) -> bool {
        self.normalized
    }

    pub fn dim(&self) -> usize {
        self.kernel.dim()
    }

    pub fn evaluator(&self) -> &PointEvaluator {
        &self.evaluator
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: x.len() });
        }
        if x.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite point {x:?}")));
        }
        Ok(())
    }

    /// Evaluates field `i` at `x` up to `order`.
    pub fn eval(&self, x: &[f64], order: Order, i: usize) -> Result<SurfValue> {
        self.check_point(x)?;
        if i >= self.ensemble.len() {
            return Err(Error::InvalidArgument(format!(
                "field index {i} out of range for {} fields",
                self.ensemble.len()
            )));
        }
        let dim = self.dim();
        let jets = self.evaluator.field_jets(x, order);
        let f = jets.value[i];
        let g: Vec<f64> =
            if order >= Order::Gradient { jets.grad[i * dim..(i + 1) * dim].to_vec() } else { Vec::new() };
        let h: Vec<f64> =
            if order >= Order::Hessian { jets.hess[i * dim * dim..(i + 1) * dim * dim].to_vec() } else { Vec::new() };
        if !self.normalized {
            return Ok(SurfValue { value: f, gradient: g, hessian: h });
        }
        let s = match &self.covariance {
            None => self.evaluator.norm_jet(x, order),
            Some(c) => self.evaluator.norm_jet_with(x, order, c),
        };
        normalize(x, f, &g, &h, &s, order, dim)
    }

    /// Evaluates field `i` at every point of `xs`, in input order.
    pub fn eval_batch(&self, xs: &[Vec<f64>], order: Order, i: usize) -> Result<Vec<SurfValue>> {
        use rayon::prelude::*;
        xs.par_iter().map(|x| self.eval(x, order, i)).collect()
    }

    /// The t-field `sqrt(N) mean / sd` at `x`, with its gradient if requested.
    pub fn t_field(&self, x: &[f64], order: Order) -> Result<SurfValue> {
        self.check_point(x)?;
        let n = self.ensemble.len();
        if n < 2 {
            return Err(Error::InvalidArgument("the t-field needs at least two fields".into()));
        }
        let order = order.min(Order::Gradient);
        let jets = self.evaluator.field_jets(x, order);
        t_from_jets(x, &jets, order)
    }
}

/// Applies the quotient rule for `f / ||K_x||`.
fn normalize(x: &[f64], f: f64, g: &[f64], h: &[f64], s: &NormJet, order: Order, dim: usize) -> Result<SurfValue> {
    let n = s.value.max(0.0).sqrt();
    if !(n >= 1e-30) {
        return Err(Error::DegenerateNormalization { location: x.to_vec(), value: n });
    }
    let value = f / n;
    let mut gradient = Vec::new();
    let mut hessian = Vec::new();
    let mut dn = [0.0; MAX_DIM];
    for d in 0..dim {
        dn[d] = s.grad[d] / (2.0 * n);
    }
    if order >= Order::Gradient {
        gradient = (0..dim).map(|d| g[d] / n - f * dn[d] / (n * n)).collect();
    }
    if order >= Order::Hessian {
        hessian = vec![0.0; dim * dim];
        for d in 0..dim {
            for e in 0..dim {
                let hn = s.hess[d][e] / (2.0 * n) - s.grad[d] * s.grad[e] / (4.0 * n * n * n);
                hessian[d * dim + e] = h[d * dim + e] / n - (g[d] * dn[e] + g[e] * dn[d]) / (n * n) - f * hn / (n * n)
                    + 2.0 * f * dn[d] * dn[e] / (n * n * n);
            }
        }
    }
    Ok(SurfValue { value, gradient, hessian })
}

/// t-statistic and gradient from kernel sums of all fields.
pub fn t_from_jets(x: &[f64], jets: &FieldJets, order: Order) -> Result<SurfValue> {
    let n = jets.fields;
    let dim = jets.dim;
    let nf = n as f64;
    let mean = jets.value.iter().sum::<f64>() / nf;
    let scale = jets.value.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let var = jets.value.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (nf - 1.0);
    if !(var > 1e-26 * scale * scale) || scale == 0.0 {
        return Err(Error::DegenerateStatistic { location: x.to_vec() });
    }
    let sd = var.sqrt();
    let value = nf.sqrt() * mean / sd;
    let mut gradient = Vec::new();
    if order >= Order::Gradient {
        gradient = (0..dim)
            .map(|d| {
                let gm = (0..n).map(|i| jets.grad[i * dim + d]).sum::<f64>() / nf;
                let gv =
                    (0..n).map(|i| (jets.value[i] - mean) * (jets.grad[i * dim + d] - gm)).sum::<f64>() / (nf - 1.0);
                let gsd = gv / sd;
                nf.sqrt() * (gm / sd - mean * gsd / var)
            })
            .collect();
    }
    Ok(SurfValue { value, gradient, hessian: Vec::new() })
}

/// Evaluates field `i` of `spec` at `x`.
pub fn surf_eval(spec: &SurfSpec, x: &[f64], order: Order, i: usize) -> Result<SurfValue> {
    spec.eval(x, order, i)
}

/// The t-field of `spec` at `x` (value, or value and gradient).
pub fn t_field(spec: &SurfSpec, x: &[f64], order: Order) -> Result<SurfValue> {
    spec.t_field(x, order)
}

/// `Cov(X~(x), X~(y)) = sum_u sum_v K(x,u) K(y,v) c(u,v)`; identity `c` by default.
pub fn surf_covariance(
    kernel: &GaussianKernel,
    domain: &VoxelSet,
    covariance: Option<&LatticeCovariance>,
    x: &[f64],
    y: &[f64],
) -> Result<f64> {
    check_kernel(kernel, domain)?;
    for p in [x, y] {
        if p.len() != domain.dim() {
            return Err(Error::DimensionMismatch { expected: domain.dim(), got: p.len() });
        }
    }
    let kx: Vec<f64> = domain.points().map(|v| kernel.value(x, v)).collect();
    let ky: Vec<f64> = domain.points().map(|v| kernel.value(y, v)).collect();
    Ok(match covariance {
        None => kx.iter().zip(&ky).map(|(a, b)| a * b).sum(),
        Some(c) => {
            let mut s = 0.0;
            for (u, pu) in domain.points().enumerate() {
                if kx[u] == 0.0 {
                    continue;
                }
                for (v, pv) in domain.points().enumerate() {
                    if ky[v] != 0.0 {
                        s += kx[u] * ky[v] * c(pu, pv);
                    }
                }
            }
            s
        }
    })
}
