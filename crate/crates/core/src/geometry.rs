//! Riemannian metric and Christoffel symbols induced by a normalized SuRF,
//! metric-orthonormal frames and the edge angle of three-dimensional voxel
//! manifolds.

use nalgebra::{DMatrix, Matrix3, SymmetricEigen, Vector3};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::jets::{gram_at, gram_slabs, hessian_jet, Gram, JetSource};
use crate::kernel::GaussianKernel;
use crate::lattice::MAX_DIM;
use crate::manifold::{transverse_axes, EdgeType, RefinedGrid};

/// Eigenvalue floor applied when a metric is not numerically positive definite.
pub const EIGEN_FLOOR: f64 = 1e-12;

/// Symmetric `D x D` matrix stored in a fixed `3 x 3` buffer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SymMat {
    pub dim: usize,
    pub m: [[f64; MAX_DIM]; MAX_DIM],
}

impl SymMat {
    pub fn zeros(dim: usize) -> Self {
        SymMat { dim, m: [[0.0; MAX_DIM]; MAX_DIM] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut s = Self::zeros(dim);
        for d in 0..dim {
            s.m[d][d] = 1.0;
        }
        s
    }

    /// Builds from a row-major `D x D` slice.
    pub fn from_row_major(dim: usize, values: &[f64]) -> Self {
        let mut s = Self::zeros(dim);
        for a in 0..dim {
            for b in 0..dim {
                s.m[a][b] = values[a * dim + b];
            }
        }
        s
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.m[a][b]
    }

    /// Principal submatrix on `axes`.
    pub fn sub(&self, axes: &[usize]) -> SymMat {
        let mut s = Self::zeros(axes.len());
        for (i, &a) in axes.iter().enumerate() {
            for (j, &b) in axes.iter().enumerate() {
                s.m[i][j] = self.m[a][b];
            }
        }
        s
    }

    pub fn det(&self) -> f64 {
        let m = &self.m;
        match self.dim {
            0 => 1.0,
            1 => m[0][0],
            2 => m[0][0] * m[1][1] - m[0][1] * m[1][0],
            _ => {
                m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                    + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
            }
        }
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim, self.dim, |a, b| self.m[a][b])
    }

    pub fn to_matrix3(&self) -> Matrix3<f64> {
        Matrix3::from_fn(|a, b| if a < self.dim && b < self.dim { self.m[a][b] } else { 0.0 })
    }

    /// Whether a Cholesky factorization succeeds.
    fn cholesky_ok(&self) -> bool {
        let n = self.dim;
        let mut l = [[0.0; MAX_DIM]; MAX_DIM];
        for i in 0..n {
            for j in 0..=i {
                let mut s = self.m[i][j];
                for k in 0..j {
                    s -= l[i][k] * l[j][k];
                }
                if i == j {
                    if !(s > 0.0) {
                        return false;
                    }
                    l[i][i] = s.sqrt();
                } else {
                    l[i][j] = s / l[j][j];
                }
            }
        }
        true
    }

    /// `sqrt(det)`, flooring the eigenvalues at [`EIGEN_FLOOR`] when the
    /// matrix is not numerically positive definite. Returns whether it clipped.
    pub fn sqrt_det_repaired(&self) -> (f64, bool) {
        if self.dim == 0 {
            return (1.0, false);
        }
        if self.cholesky_ok() {
            let d = self.det();
            if d > 0.0 {
                return (d.sqrt(), false);
            }
        }
        let eig = SymmetricEigen::new(self.to_dmatrix());
        let det: f64 = eig.eigenvalues.iter().map(|&e| e.max(EIGEN_FLOOR)).product();
        (det.sqrt(), true)
    }
}

/// Christoffel symbols of the first kind, `gamma[k][d][e]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Christoffel {
    pub dim: usize,
    pub gamma: [[[f64; MAX_DIM]; MAX_DIM]; MAX_DIM],
}

fn degenerate(g: &Gram, x: &[f64], ensemble: bool) -> Option<Error> {
    let g00 = g.get(0, 0);
    if ensemble {
        let m0 = g.mean.first().copied().unwrap_or(0.0);
        if !(g00 > 1e-300) || g00 <= 1e-24 * m0 * m0 {
            return Some(Error::DegenerateStatistic { location: x.to_vec() });
        }
    } else if !(g00.max(0.0).sqrt() >= 1e-30) {
        return Some(Error::DegenerateNormalization { location: x.to_vec(), value: g00.max(0.0).sqrt() });
    }
    None
}

/// The induced metric from the Gram matrix of the value and first-derivative jets.
pub fn metric_from_gram(g: &Gram, dim: usize, x: &[f64]) -> Result<SymMat> {
    if let Some(e) = degenerate(g, x, !g.mean.is_empty()) {
        return Err(e);
    }
    let g00 = g.get(0, 0);
    let mut s = SymMat::zeros(dim);
    for d in 0..dim {
        for e in d..dim {
            let v = g.get(d + 1, e + 1) / g00 - g.get(d + 1, 0) * g.get(0, e + 1) / (g00 * g00);
            s.m[d][e] = v;
            s.m[e][d] = v;
        }
    }
    Ok(s)
}

/// Christoffel symbols of the first kind from a level-2 Gram matrix.
pub fn christoffel_from_gram(g: &Gram, dim: usize, x: &[f64]) -> Result<Christoffel> {
    if let Some(e) = degenerate(g, x, !g.mean.is_empty()) {
        return Err(e);
    }
    if g.jets < 1 + dim + dim * (dim + 1) / 2 {
        return Err(Error::InvalidArgument("Christoffel symbols need second-derivative jets".into()));
    }
    let n = g.get(0, 0);
    let mut out = Christoffel { dim, gamma: [[[0.0; MAX_DIM]; MAX_DIM]; MAX_DIM] };
    for k in 0..dim {
        for d in 0..dim {
            let h = hessian_jet(dim, k, d);
            for e in 0..dim {
                out.gamma[k][d][e] = g.get(h, e + 1) / n
                    - g.get(h, 0) * g.get(0, e + 1) / (n * n)
                    - g.get(k + 1, 0) * g.get(d + 1, e + 1) / (n * n)
                    - g.get(d + 1, 0) * g.get(k + 1, e + 1) / (n * n)
                    + 2.0 * g.get(k + 1, 0) * g.get(d + 1, 0) * g.get(0, e + 1) / (n * n * n);
            }
        }
    }
    Ok(out)
}

/// The induced metric at `x`.
pub fn metric(source: JetSource<'_>, kernel: &GaussianKernel, x: &[f64]) -> Result<DMatrix<f64>> {
    let g = gram_at(source, kernel, x, 1)?;
    Ok(metric_from_gram(&g, x.len(), x)?.to_dmatrix())
}

/// Christoffel symbols of the first kind at `x`.
pub fn christoffel(source: JetSource<'_>, kernel: &GaussianKernel, x: &[f64]) -> Result<Christoffel> {
    let g = gram_at(source, kernel, x, 2)?;
    christoffel_from_gram(&g, x.len(), x)
}

/// Origin of a geometric field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SourceTag {
    EnsembleEstimate,
    WhiteNoiseTheory,
}

impl From<JetSource<'_>> for SourceTag {
    fn from(s: JetSource<'_>) -> Self {
        if s.is_ensemble() {
            SourceTag::EnsembleEstimate
        } else {
            SourceTag::WhiteNoiseTheory
        }
    }
}

/// The metric at every point of a refined grid, in grid order.
#[derive(Debug, Clone)]
pub struct MetricField {
    pub source: SourceTag,
    pub metrics: Vec<SymMat>,
    /// Number of metrics that needed eigenvalue flooring.
    pub clipped: usize,
}

/// Christoffel symbols at every point of a refined grid, in grid order.
#[derive(Debug, Clone)]
pub struct ChristoffelField {
    pub source: SourceTag,
    pub symbols: Vec<Christoffel>,
}

fn grid_values<T: Send + Clone>(
    source: JetSource<'_>,
    kernel: &GaussianKernel,
    grid: &RefinedGrid,
    level: u8,
    f: impl Fn(&Gram, &[f64]) -> Result<T> + Sync,
) -> Result<Vec<T>> {
    let dim = grid.dim();
    let dense = grid.dense_map();
    let slabs = gram_slabs(source, kernel, grid.axes(), level, |slab| {
        let start = slab.rows.start * slab.qlen[1] * slab.qlen[2];
        let mut out = Vec::new();
        for local in 0..slab.len() {
            let id = dense[start + local];
            if id != u32::MAX {
                let p = &grid.points()[id as usize];
                out.push((id, f(&slab.gram(local), &p.coord[..dim])?));
            }
        }
        Ok(out)
    })?;
    let mut values: Vec<Option<T>> = vec![None; grid.len()];
    for (id, v) in slabs.into_iter().flatten() {
        values[id as usize] = Some(v);
    }
    Ok(values.into_iter().map(|v| v.expect("every grid point visited")).collect())
}

pub fn metric_field(source: JetSource<'_>, kernel: &GaussianKernel, grid: &RefinedGrid) -> Result<MetricField> {
    let dim = grid.dim();
    let metrics = grid_values(source, kernel, grid, 1, |g, x| metric_from_gram(g, dim, x))?;
    let clipped = metrics.iter().filter(|m| m.sqrt_det_repaired().1).count();
    Ok(MetricField { source: source.into(), metrics, clipped })
}

pub fn christoffel_field(
    source: JetSource<'_>,
    kernel: &GaussianKernel,
    grid: &RefinedGrid,
) -> Result<ChristoffelField> {
    let dim = grid.dim();
    let symbols = grid_values(source, kernel, grid, 2, |g, x| christoffel_from_gram(g, dim, x))?;
    Ok(ChristoffelField { source: source.into(), symbols })
}

/// A metric-orthonormal frame adapted to a face `F_I`, `I = (k, l)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    pub u: Vector3<f64>,
    pub v: Vector3<f64>,
    pub n: Vector3<f64>,
}

/// Gram–Schmidt frame for a three-dimensional metric: `U`, `V` span the face
/// through axes `k < l` and `N` is metric-normal to it.
pub fn orthonormal_frame(metric: &Matrix3<f64>, k: usize, l: usize) -> Result<Frame> {
    if !(k < l && l < 3) {
        return Err(Error::InvalidArgument(format!("face axes must satisfy k < l < 3, got ({k}, {l})")));
    }
    let m = 3 - k - l;
    let lkk = metric[(k, k)];
    let c = lkk * metric[(l, l)] - metric[(k, l)] * metric[(l, k)];
    let inv = metric.try_inverse().ok_or(Error::SingularMetric)?;
    let emm = inv[(m, m)];
    if !(lkk > 0.0 && c > 0.0 && emm > 0.0) {
        return Err(Error::SingularMetric);
    }
    let mut u = Vector3::zeros();
    u[k] = 1.0 / lkk.sqrt();
    let mut v = Vector3::zeros();
    v[k] = metric[(k, l)] / (c * lkk).sqrt();
    v[l] = -(lkk / c).sqrt();
    let n = inv.column(m) / emm.sqrt();
    Ok(Frame { u, v, n: n.into_owned() })
}

/// Metric angle `beta` of the quadrant on sides `(sa, sb)` (each `+1` or `-1`)
/// of the two axes transverse to the edge with tangent axis `tangent`.
pub fn edge_beta(metric: &Matrix3<f64>, tangent: usize, sa: f64, sb: f64) -> Result<f64> {
    let (a, b) = transverse_axes(tangent);
    let perm = [tangent, a, b];
    let adapted = Matrix3::from_fn(|i, j| metric[(perm[i], perm[j])]);
    let frame = orthonormal_frame(&adapted, 0, 1)?;
    let m = frame.v.cross(&frame.n);
    if m[0] == 0.0 {
        return Err(Error::SingularMetric);
    }
    // Directions into the two faces of the quadrant, projected orthogonally
    // to the edge tangent.
    let ra = Vector3::new(-sa * m[1] / m[0], sa, 0.0);
    let rb = Vector3::new(-sb * m[2] / m[0], 0.0, sb);
    let ip = |x: &Vector3<f64>, y: &Vector3<f64>| (x.transpose() * adapted * y)[0];
    let cos = ip(&ra, &rb) / (ip(&ra, &ra) * ip(&rb, &rb)).sqrt();
    Ok(cos.clamp(-1.0, 1.0).acos())
}

/// The edge angle `Theta` from the angle `beta` of a reference quadrant: an
/// occupied quadrant for convex and double-convex edges, the empty one for
/// concave edges.
pub fn theta_from_beta(beta: f64, edge: EdgeType) -> f64 {
    match edge {
        EdgeType::Convex => std::f64::consts::PI - beta,
        EdgeType::DoubleConvex => -2.0 * beta,
        EdgeType::Concave => beta - std::f64::consts::PI,
    }
}

/// `Theta` for an edge along `tangent`, with `beta` measured in the positive quadrant.
pub fn theta_angle(metric: &Matrix3<f64>, tangent: usize, edge: EdgeType) -> Result<f64> {
    Ok(theta_from_beta(edge_beta(metric, tangent, 1.0, 1.0)?, edge))
}

/// `Theta` for an edge given its four-quadrant occupancy pattern (bit
/// `2 * sb + sa`, `1` meaning the positive side).
pub fn theta_for_pattern(metric: &Matrix3<f64>, tangent: usize, quadrants: u8) -> Result<Option<f64>> {
    let Some(edge) = EdgeType::from_quadrants(quadrants) else {
        return Ok(None);
    };
    let want_occupied = edge != EdgeType::Concave;
    let bit = (0..4u8).find(|b| ((quadrants >> b) & 1 == 1) == want_occupied).expect("pattern has both kinds");
    let sa = if bit & 1 == 1 { 1.0 } else { -1.0 };
    let sb = if bit & 2 == 2 { 1.0 } else { -1.0 };
    Ok(Some(theta_from_beta(edge_beta(metric, tangent, sa, sb)?, edge)))
}

/// Integrand of the face term of the first LKC on a face with normal axis
/// `normal`: `sum_ij (U_i U_j + V_i V_j) <nabla_i d_j, N>` with `N` pointing
/// into the manifold (`inward_sign` is the sign of the inward direction
/// along `normal`).
pub fn face_term(metric: &Matrix3<f64>, gamma: &Christoffel, normal: usize, inward_sign: f64) -> Result<f64> {
    let (k, l) = transverse_axes(normal);
    let frame = orthonormal_frame(metric, k, l)?;
    let n = frame.n * inward_sign.signum();
    let mut s = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            let w = frame.u[i] * frame.u[j] + frame.v[i] * frame.v[j];
            if w == 0.0 {
                continue;
            }
            let ng: f64 = (0..3).map(|c| n[c] * gamma.gamma[i][j][c]).sum();
            s += w * ng;
        }
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{box_points, sample_ensemble, RngSpec};
    use crate::manifold::VoxelManifold;
    use rand::{RngExt, SeedableRng};
    use std::f64::consts::PI;
    use std::sync::Arc;

    #[test]
    fn frame_examples() {
        let f = orthonormal_frame(&Matrix3::identity(), 0, 1).unwrap();
        assert_eq!(f.u, Vector3::new(1.0, 0.0, 0.0));
        assert_eq!(f.v, Vector3::new(0.0, -1.0, 0.0));
        assert_eq!(f.n, Vector3::new(0.0, 0.0, 1.0));
        let f = orthonormal_frame(&Matrix3::from_diagonal(&Vector3::new(4.0, 1.0, 1.0)), 0, 1).unwrap();
        assert_eq!(f.u, Vector3::new(0.5, 0.0, 0.0));
        assert_eq!(f.v, Vector3::new(0.0, -1.0, 0.0));
        assert_eq!(f.n, Vector3::new(0.0, 0.0, 1.0));
    }

    fn random_spd(rng: &mut impl rand::Rng) -> Matrix3<f64> {
        let a = Matrix3::from_fn(|_, _| rng.random_range(-1.0..1.0));
        a * a.transpose() + Matrix3::identity() * 0.1
    }

    #[test]
    fn frames_are_orthonormal() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for _ in 0..200 {
            let lam = random_spd(&mut rng);
            for (k, l) in [(0, 1), (0, 2), (1, 2)] {
                let f = orthonormal_frame(&lam, k, l).unwrap();
                let ip = |x: &Vector3<f64>, y: &Vector3<f64>| (x.transpose() * lam * y)[0];
                for (x, y, want) in [
                    (&f.u, &f.u, 1.0),
                    (&f.v, &f.v, 1.0),
                    (&f.n, &f.n, 1.0),
                    (&f.u, &f.v, 0.0),
                    (&f.u, &f.n, 0.0),
                    (&f.v, &f.n, 0.0),
                ] {
                    assert!((ip(x, y) - want).abs() < 1e-12);
                }
                let m = 3 - k - l;
                assert_eq!(f.u[m], 0.0);
                assert_eq!(f.v[m], 0.0);
            }
        }
    }

    #[test]
    fn identity_theta_values() {
        let id = Matrix3::identity();
        for t in 0..3 {
            assert!((theta_angle(&id, t, EdgeType::Convex).unwrap() - PI / 2.0).abs() < 1e-15);
            assert!((theta_angle(&id, t, EdgeType::DoubleConvex).unwrap() + PI).abs() < 1e-15);
            assert!((theta_angle(&id, t, EdgeType::Concave).unwrap() + PI / 2.0).abs() < 1e-15);
        }
    }

    #[test]
    fn beta_is_the_metric_angle_between_faces() {
        // Sheared coordinates: the metric of the map (x, y, z) -> (x, y + s z, z)
        // makes the quadrant angle between +y and +z equal to acos(s / sqrt(1 + s^2)).
        let s: f64 = 0.6;
        let lam = Matrix3::new(1.0, 0.0, 0.0, 0.0, 1.0, s, 0.0, s, 1.0 + s * s);
        let beta = edge_beta(&lam, 0, 1.0, 1.0).unwrap();
        assert!((beta - (s / (1.0 + s * s).sqrt()).acos()).abs() < 1e-12);
        let other = edge_beta(&lam, 0, -1.0, 1.0).unwrap();
        assert!((beta + other - PI).abs() < 1e-12);
    }

    #[test]
    fn white_noise_metric_in_the_stationary_limit() {
        let data = Arc::new(box_points(1, -40, 140).unwrap());
        let k = GaussianKernel::isotropic(1, 3.0).unwrap();
        let lam = metric(JetSource::WhiteNoise(&data), &k, &[50.3]).unwrap()[(0, 0)];
        let stationary = 4.0 * std::f64::consts::LN_2 / 9.0;
        assert!((lam - stationary).abs() / stationary < 5e-3, "{lam}");
    }

    #[test]
    fn christoffel_symmetry_and_stationarity() {
        let data = Arc::new(box_points(1, 1, 100).unwrap());
        let k = GaussianKernel::isotropic(1, 3.0).unwrap();
        let deep = christoffel(JetSource::WhiteNoise(&data), &k, &[50.5]).unwrap();
        assert!(deep.gamma[0][0][0].abs() < 1e-3);
        let edge = christoffel(JetSource::WhiteNoise(&data), &k, &[1.2]).unwrap();
        assert!(edge.gamma[0][0][0].abs() > 1e-3);

        let data = Arc::new(box_points(3, 0, 4).unwrap());
        let k = GaussianKernel::new(vec![1.5, 2.0, 2.5]).unwrap();
        let ens = sample_ensemble(data.clone(), 6, RngSpec::new(0, 0), None).unwrap();
        for source in [JetSource::WhiteNoise(&data), JetSource::Ensemble(&ens)] {
            let g = christoffel(source, &k, &[1.3, 2.2, 0.7]).unwrap();
            for a in 0..3 {
                for b in 0..3 {
                    for c in 0..3 {
                        assert!((g.gamma[a][b][c] - g.gamma[b][a][c]).abs() < 1e-10);
                    }
                }
            }
        }
    }

    // The Christoffel symbols are derivatives of the metric:
    // d_k Lambda_{de} = Gamma_{kde} + Gamma_{ked}.
    #[test]
    fn christoffel_matches_metric_derivatives() {
        let data = Arc::new(box_points(2, 0, 5).unwrap());
        let k = GaussianKernel::isotropic(2, 2.0).unwrap();
        let src = JetSource::WhiteNoise(&data);
        let x = [1.4, 2.8];
        let g = christoffel(src, &k, &x).unwrap();
        let h = 1e-5;
        for kk in 0..2 {
            let mut xp = x;
            let mut xm = x;
            xp[kk] += h;
            xm[kk] -= h;
            let mp = metric(src, &k, &xp).unwrap();
            let mm = metric(src, &k, &xm).unwrap();
            for d in 0..2 {
                for e in 0..2 {
                    let fd = (mp[(d, e)] - mm[(d, e)]) / (2.0 * h);
                    let want = g.gamma[kk][d][e] + g.gamma[kk][e][d];
                    assert!((fd - want).abs() < 1e-6, "{fd} vs {want}");
                }
            }
        }
    }

    // Independent oracle: sample covariance of finite-difference derivatives
    // of the smoothed fields.
    #[test]
    fn ensemble_metric_matches_finite_difference_oracle() {
        let data = Arc::new(box_points(2, 0, 7).unwrap());
        let k = GaussianKernel::isotropic(2, 2.5).unwrap();
        let ens = sample_ensemble(data.clone(), 12, RngSpec::new(6, 0), None).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let smooth =
            |i: usize, x: &[f64]| -> f64 { data.points().zip(ens.field(i)).map(|(v, y)| k.value(x, v) * y).sum() };
        for _ in 0..50 {
            let x = [rng.random_range(-0.5..7.5), rng.random_range(-0.5..7.5)];
            let h = 1e-4;
            let n = ens.len();
            let mut cols = vec![vec![0.0; n]; 3];
            for i in 0..n {
                cols[0][i] = smooth(i, &x);
                for d in 0..2 {
                    let mut xp = x;
                    let mut xm = x;
                    xp[d] += h;
                    xm[d] -= h;
                    cols[d + 1][i] = (smooth(i, &xp) - smooth(i, &xm)) / (2.0 * h);
                }
            }
            let mean: Vec<f64> = cols.iter().map(|c| c.iter().sum::<f64>() / n as f64).collect();
            let cov = |a: usize, b: usize| {
                (0..n).map(|i| (cols[a][i] - mean[a]) * (cols[b][i] - mean[b])).sum::<f64>() / (n as f64 - 1.0)
            };
            let got = metric(JetSource::Ensemble(&ens), &k, &x).unwrap();
            for d in 0..2 {
                for e in 0..2 {
                    let want = cov(d + 1, e + 1) / cov(0, 0) - cov(d + 1, 0) * cov(0, e + 1) / cov(0, 0).powi(2);
                    assert!((got[(d, e)] - want).abs() <= 1e-3 * want.abs().max(1e-2), "{} vs {want}", got[(d, e)]);
                }
            }
        }
    }

    #[test]
    fn metric_is_symmetric_psd_and_translation_invariant() {
        let data = Arc::new(box_points(2, 0, 6).unwrap());
        let shifted = Arc::new(data.translated(&[3.5, -2.0]).unwrap());
        let k = GaussianKernel::isotropic(2, 1.5).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let x = [rng.random_range(0.0..6.0), rng.random_range(0.0..6.0)];
            let a = metric(JetSource::WhiteNoise(&data), &k, &x).unwrap();
            let b = metric(JetSource::WhiteNoise(&shifted), &k, &[x[0] + 3.5, x[1] - 2.0]).unwrap();
            assert!((a.clone() - a.transpose()).abs().max() < 1e-15);
            assert!(a.clone().symmetric_eigenvalues().min() > 0.0);
            assert!((a - b).abs().max() < 1e-10);
        }
    }

    #[test]
    fn grid_fields_match_pointwise_evaluation() {
        let dom = Arc::new(box_points(2, 0, 3).unwrap());
        let m = VoxelManifold::new(dom.clone()).unwrap();
        let grid = m.refined_grid(1).unwrap();
        let k = GaussianKernel::isotropic(2, 2.0).unwrap();
        let src = JetSource::WhiteNoise(&dom);
        let field = metric_field(src, &k, &grid).unwrap();
        let chr = christoffel_field(src, &k, &grid).unwrap();
        assert_eq!(field.clipped, 0);
        for (i, p) in grid.points().iter().enumerate().step_by(7) {
            let want = metric(src, &k, &p.coord[..2]).unwrap();
            assert!((field.metrics[i].to_dmatrix() - want).abs().max() < 1e-12);
            let g = christoffel(src, &k, &p.coord[..2]).unwrap();
            assert!((chr.symbols[i].gamma[1][0][1] - g.gamma[1][0][1]).abs() < 1e-12);
        }
    }

    #[test]
    fn face_term_vanishes_for_constant_metric() {
        let zero = Christoffel { dim: 3, gamma: [[[0.0; 3]; 3]; 3] };
        let lam = Matrix3::new(2.0, 0.3, 0.1, 0.3, 1.5, 0.2, 0.1, 0.2, 1.0);
        for n in 0..3 {
            assert_eq!(face_term(&lam, &zero, n, 1.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn repaired_sqrt_det() {
        let ok = SymMat::identity(2);
        assert_eq!(ok.sqrt_det_repaired(), (1.0, false));
        let bad = SymMat::from_row_major(2, &[1.0, 1.0, 1.0, 1.0 - 1e-17]);
        let (v, clipped) = bad.sqrt_det_repaired();
        assert!(clipped && v > 0.0 && v < 1e-5);
    }

    #[test]
    fn degenerate_statistics_are_errors() {
        let data = Arc::new(box_points(1, 0, 3).unwrap());
        let rows = vec![vec![1.0, 2.0, 3.0, 4.0]; 3];
        let ens = crate::lattice::FieldEnsemble::from_rows(data, rows).unwrap();
        let k = GaussianKernel::isotropic(1, 2.0).unwrap();
        assert!(matches!(metric(JetSource::Ensemble(&ens), &k, &[1.0]), Err(Error::DegenerateStatistic { .. })));
    }
}
