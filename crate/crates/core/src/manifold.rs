//! Voxel manifolds, their refined grids, boundary strata and Euler characteristic.
//!
//! Grid points are addressed by integer fine indices: along axis `d` with
//! added resolution `r`, fine index `j` sits at `origin_d + j * delta_d / (r + 1)`
//! where `origin` is the centre of lattice voxel 0. Box boundaries fall on
//! fine indices, so occupancy of the `2^D` grid cells around a point is
//! decided exactly by probing the cell centres in quarter-step units.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{LatticeIndex, VoxelSet, MAX_DIM};

/// Type of a boundary edge of a three-dimensional voxel manifold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EdgeType {
    /// One of the four incident voxels is present.
    Convex,
    /// Two diagonally opposite incident voxels are present.
    DoubleConvex,
    /// Three incident voxels are present.
    Concave,
}

impl EdgeType {
    /// Classifies a four-quadrant occupancy pattern.
    ///
    /// Bit `2 * sb + sa` is set when the quadrant on side `sa` of the first
    /// transverse axis and side `sb` of the second is occupied (`0` is the
    /// negative side). Patterns without an edge return `None`.
    pub fn from_quadrants(pattern: u8) -> Option<EdgeType> {
        match (pattern & 0xf).count_ones() {
            1 => Some(EdgeType::Convex),
            2 if pattern & 0xf == 0b1001 || pattern & 0xf == 0b0110 => Some(EdgeType::DoubleConvex),
            3 => Some(EdgeType::Concave),
            _ => None,
        }
    }
}

/// Stratum of a point of a voxel manifold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Stratum {
    Interior,
    /// Point on a `(D-1)`-dimensional face; the face spans every axis but `normal`.
    Face {
        normal: usize,
    },
    /// Point on an edge of a three-dimensional manifold.
    Edge {
        tangent: usize,
        edge: EdgeType,
    },
    Vertex,
    /// Not in the manifold.
    Outside,
}

impl Stratum {
    /// Axes spanned by the stratum (the set `I` of the face `F_I`).
    pub fn axes(&self, dim: usize) -> Vec<usize> {
        match *self {
            Stratum::Interior => (0..dim).collect(),
            Stratum::Face { normal } => (0..dim).filter(|&d| d != normal).collect(),
            Stratum::Edge { tangent, .. } => vec![tangent],
            Stratum::Vertex | Stratum::Outside => Vec::new(),
        }
    }
}

/// Classifies a `2^D` orthant occupancy pattern.
///
/// Bit `sum_d s_d 2^d` is set when the orthant on side `s_d` (`1` positive)
/// of every axis is occupied.
pub fn stratum_from_pattern(dim: usize, pattern: u8) -> Stratum {
    let full = (1u16 << (1 << dim)) - 1;
    if pattern == 0 {
        return Stratum::Outside;
    }
    if pattern as u16 == full {
        return Stratum::Interior;
    }
    let free: Vec<usize> = (0..dim).filter(|&d| invariant_along(dim, pattern, d)).collect();
    match free.len() {
        n if n + 1 == dim && dim > 1 => {
            let normal = (0..dim).find(|d| !free.contains(d)).expect("one constrained axis");
            Stratum::Face { normal }
        }
        1 if dim == 3 => {
            let tangent = free[0];
            let q = quadrant_pattern(pattern, tangent, false);
            match EdgeType::from_quadrants(q) {
                Some(edge) => Stratum::Edge { tangent, edge },
                None => Stratum::Vertex,
            }
        }
        _ => Stratum::Vertex,
    }
}

fn invariant_along(dim: usize, pattern: u8, axis: usize) -> bool {
    (0..(1u8 << dim)).all(|b| ((pattern >> b) & 1) == ((pattern >> (b ^ (1 << axis))) & 1))
}

/// Restricts a 3D orthant pattern to the quadrants of the two axes other
/// than `tangent`, on the positive (`side = true`) or negative side of `tangent`.
pub fn quadrant_pattern(pattern: u8, tangent: usize, side: bool) -> u8 {
    let (a, b) = transverse_axes(tangent);
    let mut q = 0u8;
    for sb in 0..2u8 {
        for sa in 0..2u8 {
            let bit = (sa << a) | (sb << b) | ((side as u8) << tangent);
            if (pattern >> bit) & 1 == 1 {
                q |= 1 << (2 * sb + sa);
            }
        }
    }
    q
}

/// The two axes orthogonal to `tangent`, in increasing order.
pub fn transverse_axes(tangent: usize) -> (usize, usize) {
    match tangent {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    }
}

/// The union of closed boxes `B_v(delta)` around the voxels of a lattice.
#[derive(Debug, Clone)]
pub struct VoxelManifold {
    domain: Arc<VoxelSet>,
    lattice: LatticeIndex,
}

impl VoxelManifold {
    pub fn new(domain: Arc<VoxelSet>) -> Result<Self> {
        let lattice = domain.lattice()?;
        Ok(VoxelManifold { domain, lattice })
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn domain(&self) -> &Arc<VoxelSet> {
        &self.domain
    }

    pub fn lattice(&self) -> &LatticeIndex {
        &self.lattice
    }

    pub fn spacing(&self) -> &[f64] {
        self.domain.spacing()
    }

    /// Lower and upper corners of box `i`.
    pub fn voxel_box(&self, i: usize) -> ([f64; MAX_DIM], [f64; MAX_DIM]) {
        let mut lo = [0.0; MAX_DIM];
        let mut hi = [0.0; MAX_DIM];
        let p = self.domain.point(i);
        for d in 0..self.dim() {
            let h = self.spacing()[d] / 2.0;
            lo[d] = p[d] - h;
            hi[d] = p[d] + h;
        }
        (lo, hi)
    }

    /// Total Euclidean volume.
    pub fn volume(&self) -> f64 {
        self.domain.len() as f64 * self.spacing().iter().product::<f64>()
    }

    /// Lattice index of the voxel box containing `x`, preferring the lowest
    /// index along each axis when `x` is on a shared boundary.
    pub fn locate(&self, x: &[f64]) -> Option<usize> {
        let dim = self.dim();
        let mut cand: [[i64; 2]; MAX_DIM] = [[0, 0]; MAX_DIM];
        let mut ncand = [1usize; MAX_DIM];
        for d in 0..dim {
            let t = (x[d] - self.lattice.origin()[d]) / self.lattice.spacing()[d];
            let lo = (t - 0.5 - 1e-12).ceil() as i64;
            let hi = (t + 0.5 + 1e-12).floor() as i64;
            if hi < lo {
                return None;
            }
            cand[d] = [lo, hi];
            ncand[d] = (hi - lo + 1).min(2) as usize;
        }
        for c0 in 0..ncand[0] {
            for c1 in 0..ncand[1] {
                for c2 in 0..ncand[2] {
                    let idx = [cand[0][0] + c0 as i64, cand[1][0] + c1 as i64, cand[2][0] + c2 as i64];
                    if let Some(v) = self.lattice.lookup(&idx) {
                        return Some(v);
                    }
                }
            }
        }
        None
    }

    /// Whether the point lies in the closed union of boxes.
    pub fn contains(&self, x: &[f64]) -> bool {
        self.locate(x).is_some()
    }

    /// Fine-grid axes for added resolution `r`.
    pub fn fine_axes(&self, r: u32) -> Result<FineAxes> {
        FineAxes::new(&self.lattice, r)
    }

    /// Occupancy of the voxel containing the quarter-step position `q` (which
    /// must not lie on a box boundary).
    #[inline]
    pub fn occupied_quarter(&self, axes: &FineAxes, q: [i64; MAX_DIM]) -> bool {
        let s4 = 4 * axes.step_div as i64;
        let s2 = 2 * axes.step_div as i64;
        let mut idx = [0i64; MAX_DIM];
        for d in 0..self.dim() {
            idx[d] = if axes.r == 0 { (q[d] + 2).div_euclid(4) } else { (q[d] + s2).div_euclid(s4) };
        }
        self.lattice.contains(&idx)
    }

    /// `2^D` orthant occupancy pattern around fine index `j`.
    pub fn pattern(&self, axes: &FineAxes, j: [i64; MAX_DIM]) -> u8 {
        let dim = self.dim();
        let mut pattern = 0u8;
        for b in 0..(1u8 << dim) {
            let mut q = [0i64; MAX_DIM];
            for d in 0..dim {
                q[d] = 4 * j[d] + if (b >> d) & 1 == 1 { 1 } else { -1 };
            }
            if self.occupied_quarter(axes, q) {
                pattern |= 1 << b;
            }
        }
        pattern
    }

    /// The refined grid `M^(r)`; `r = 0` gives the voxel centres only.
    pub fn refined_grid(&self, r: u32) -> Result<RefinedGrid> {
        RefinedGrid::new(self, r)
    }

    /// Counts boundary faces, edges and vertices of the cubical boundary.
    pub fn classify_boundary(&self) -> StratumCensus {
        let grid = self.refined_grid(1).expect("r = 1 is valid");
        let dim = self.dim();
        let mut census = StratumCensus { dim, faces: vec![0; dim], edges: Vec::new(), vertices: 0 };
        if dim == 3 {
            census.edges = (0..3).map(|k| EdgeCensus { tangent: k, ..Default::default() }).collect();
        }
        for p in grid.points() {
            // At r = 1 odd fine indices are box corners and even ones box centres,
            // so every grid point is the centre of exactly one cell of the complex.
            let corner: Vec<bool> = (0..dim).map(|d| p.index[d].rem_euclid(2) == 1).collect();
            match p.stratum {
                Stratum::Face { normal } if (0..dim).all(|d| corner[d] == (d == normal)) => {
                    census.faces[normal] += 1;
                }
                Stratum::Edge { tangent, edge } if (0..dim).all(|d| corner[d] == (d != tangent)) => {
                    let e = &mut census.edges[tangent];
                    match edge {
                        EdgeType::Convex => e.convex += 1,
                        EdgeType::DoubleConvex => e.double_convex += 1,
                        EdgeType::Concave => e.concave += 1,
                    }
                }
                Stratum::Vertex if corner.iter().all(|&c| c) => census.vertices += 1,
                _ => {}
            }
        }
        census
    }

    /// Euler characteristic of the closed union of boxes.
    pub fn euler_characteristic(&self) -> i64 {
        // The r = 1 grid points are exactly the cells of the cubical complex in
        // doubled coordinates, and a cell's dimension is its number of centre axes.
        let grid = self.refined_grid(1).expect("r = 1 is valid");
        let dim = self.dim();
        grid.points()
            .iter()
            .map(|p| {
                let cell_dim = (0..dim).filter(|&d| p.index[d].rem_euclid(2) == 0).count();
                if cell_dim % 2 == 0 {
                    1
                } else {
                    -1
                }
            })
            .sum()
    }
}

/// Per-axis description of a fine grid over the bounding box of a manifold.
#[derive(Debug, Clone)]
pub struct FineAxes {
    pub dim: usize,
    pub r: u32,
    /// Number of fine steps per voxel, `r + 1`.
    pub step_div: u32,
    pub origin: [f64; MAX_DIM],
    pub step: [f64; MAX_DIM],
    pub jmin: [i64; MAX_DIM],
    pub len: [usize; MAX_DIM],
}

impl FineAxes {
    fn new(lattice: &LatticeIndex, r: u32) -> Result<Self> {
        if r > 0 && r.is_multiple_of(2) {
            return Err(Error::EvenResolution(r));
        }
        let dim = lattice.dim();
        let s = r + 1;
        let ext = lattice.extent();
        let mut axes = FineAxes {
            dim,
            r,
            step_div: s,
            origin: [0.0; MAX_DIM],
            step: [1.0; MAX_DIM],
            jmin: [0; MAX_DIM],
            len: [1; MAX_DIM],
        };
        for d in 0..dim {
            axes.origin[d] = lattice.origin()[d];
            axes.step[d] = lattice.spacing()[d] / s as f64;
            if r == 0 {
                axes.len[d] = ext[d];
            } else {
                axes.jmin[d] = -(s as i64 / 2);
                axes.len[d] = ext[d] * s as usize + 1;
            }
        }
        Ok(axes)
    }

    pub fn coord(&self, d: usize, j: i64) -> f64 {
        if d < self.dim {
            self.origin[d] + j as f64 * self.step[d]
        } else {
            0.0
        }
    }

    /// Coordinates along every axis (unused axes hold a single 0).
    pub fn coords(&self) -> [Vec<f64>; MAX_DIM] {
        std::array::from_fn(|d| (0..self.len[d]).map(|k| self.coord(d, self.jmin[d] + k as i64)).collect())
    }

    pub fn total(&self) -> usize {
        self.len.iter().product()
    }

    /// Row-major position of fine index `j` in the bounding box.
    #[inline]
    pub fn flat(&self, j: [i64; MAX_DIM]) -> Option<usize> {
        let mut k = [0usize; MAX_DIM];
        for d in 0..MAX_DIM {
            let o = j[d] - self.jmin[d];
            if o < 0 || o as usize >= self.len[d] {
                return None;
            }
            k[d] = o as usize;
        }
        Some((k[0] * self.len[1] + k[1]) * self.len[2] + k[2])
    }

    #[inline]
    pub fn unflat(&self, flat: usize) -> [i64; MAX_DIM] {
        let k2 = flat % self.len[2];
        let k1 = (flat / self.len[2]) % self.len[1];
        let k0 = flat / (self.len[1] * self.len[2]);
        [k0 as i64 + self.jmin[0], k1 as i64 + self.jmin[1], k2 as i64 + self.jmin[2]]
    }

    /// Whether fine index `j` is a voxel centre.
    pub fn is_center(&self, j: [i64; MAX_DIM]) -> bool {
        (0..self.dim).all(|d| j[d].rem_euclid(self.step_div as i64) == 0)
    }
}

/// One point of a refined grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridPoint {
    pub index: [i64; MAX_DIM],
    pub coord: [f64; MAX_DIM],
    pub pattern: u8,
    pub stratum: Stratum,
}

/// The deduplicated grid `M^(r)` with stratum tags.
#[derive(Debug, Clone)]
pub struct RefinedGrid {
    axes: FineAxes,
    points: Vec<GridPoint>,
    dense: Vec<u32>,
}

impl RefinedGrid {
    fn new(manifold: &VoxelManifold, r: u32) -> Result<Self> {
        let axes = manifold.fine_axes(r)?;
        let dim = manifold.dim();
        let mut dense = vec![u32::MAX; axes.total()];
        let mut points = Vec::new();
        for (flat, slot) in dense.iter_mut().enumerate() {
            let j = axes.unflat(flat);
            let pattern = manifold.pattern(&axes, j);
            if r == 0 && pattern != (((1u16 << (1 << dim)) - 1) as u8) {
                continue;
            }
            let stratum = stratum_from_pattern(dim, pattern);
            if stratum == Stratum::Outside {
                continue;
            }
            let coord = std::array::from_fn(|d| axes.coord(d, j[d]));
            *slot = points.len() as u32;
            points.push(GridPoint { index: j, coord, pattern, stratum });
        }
        Ok(RefinedGrid { axes, points, dense })
    }

    pub fn r(&self) -> u32 {
        self.axes.r
    }

    pub fn dim(&self) -> usize {
        self.axes.dim
    }

    pub fn axes(&self) -> &FineAxes {
        &self.axes
    }

    pub fn points(&self) -> &[GridPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Point number at fine index `j`, if it is on the grid.
    pub fn lookup(&self, j: [i64; MAX_DIM]) -> Option<usize> {
        let k = self.dense[self.axes.flat(j)?];
        (k != u32::MAX).then_some(k as usize)
    }

    /// Point number of each cell of the bounding box (`u32::MAX` if absent).
    pub fn dense_map(&self) -> &[u32] {
        &self.dense
    }

    /// Grid neighbours of point `i` in the `3^D - 1` neighbourhood.
    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        let dim = self.dim();
        let j = self.points[i].index;
        let count = 3usize.pow(dim as u32);
        (0..count).filter_map(move |mut c| {
            let mut n = j;
            let mut all_zero = true;
            for d in 0..dim {
                let off = (c % 3) as i64 - 1;
                c /= 3;
                n[d] += off;
                all_zero &= off == 0;
            }
            if all_zero {
                None
            } else {
                self.lookup(n)
            }
        })
    }
}

/// Per-tangent-axis counts of boundary edge segments.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct EdgeCensus {
    pub tangent: usize,
    pub convex: usize,
    pub double_convex: usize,
    pub concave: usize,
}

/// Counts of the unit cells of each boundary stratum.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StratumCensus {
    pub dim: usize,
    /// Unit boundary faces by normal axis (the face spans the other axes).
    pub faces: Vec<usize>,
    /// Unit boundary edges by tangent axis (three-dimensional manifolds only).
    pub edges: Vec<EdgeCensus>,
    pub vertices: usize,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{box_points, make_domain_preset};

    fn manifold(dim: usize, pts: &[&[i64]]) -> VoxelManifold {
        let set = VoxelSet::from_integer_points(dim, pts.iter().map(|p| p.to_vec())).unwrap();
        VoxelManifold::new(Arc::new(set)).unwrap()
    }

    #[test]
    fn grid_of_two_voxels() {
        let m = manifold(1, &[&[1], &[2]]);
        let g = m.refined_grid(1).unwrap();
        let xs: Vec<f64> = g.points().iter().map(|p| p.coord[0]).collect();
        assert_eq!(xs, vec![0.5, 1.0, 1.5, 2.0, 2.5]);
        assert_eq!(g.points()[0].stratum, Stratum::Vertex);
        assert_eq!(g.points()[2].stratum, Stratum::Interior);
    }

    #[test]
    fn grid_sizes() {
        let m = VoxelManifold::new(Arc::new(box_points(1, 1, 100).unwrap())).unwrap();
        assert_eq!(m.refined_grid(3).unwrap().len(), 401);
        assert_eq!(m.refined_grid(0).unwrap().len(), 100);
        assert!(matches!(m.refined_grid(2), Err(Error::EvenResolution(2))));
        let sq = VoxelManifold::new(Arc::new(box_points(2, 1, 3).unwrap())).unwrap();
        assert_eq!(sq.refined_grid(1).unwrap().len(), 49);
    }

    #[test]
    fn lattice_points_are_on_every_grid() {
        let p = make_domain_preset("nonstat2d", 1.0).unwrap();
        let m = VoxelManifold::new(p.domain.clone()).unwrap();
        for r in [0, 1, 3, 5] {
            let g = m.refined_grid(r).unwrap();
            for v in p.domain.points() {
                let found =
                    g.points().iter().any(|q| (q.coord[0] - v[0]).abs() < 1e-12 && (q.coord[1] - v[1]).abs() < 1e-12);
                assert!(found, "voxel {v:?} missing at r = {r}");
            }
            for q in g.points() {
                assert!(m.contains(&q.coord[..2]));
            }
        }
    }

    #[test]
    fn single_cube_census() {
        let m = manifold(3, &[&[0, 0, 0]]);
        let c = m.classify_boundary();
        assert_eq!(c.faces, vec![2, 2, 2]);
        assert_eq!(c.vertices, 8);
        for e in &c.edges {
            assert_eq!((e.convex, e.double_convex, e.concave), (4, 0, 0));
        }
    }

    #[test]
    fn diagonal_and_l_shaped_edges() {
        let diag = manifold(3, &[&[0, 0, 0], &[1, 1, 0]]);
        let c = diag.classify_boundary();
        assert_eq!(c.edges[2].double_convex, 1);
        assert_eq!(c.edges[0].double_convex + c.edges[1].double_convex, 0);
        let ell = manifold(3, &[&[0, 0, 0], &[1, 1, 0], &[1, 0, 0]]);
        let c = ell.classify_boundary();
        assert_eq!(c.edges[2].double_convex, 0);
        assert_eq!(c.edges[2].concave, 1);
    }

    #[test]
    fn cuboid_combinatorics() {
        let (n1, n2, n3) = (3i64, 4i64, 2i64);
        let pts: Vec<Vec<i64>> =
            (0..n1).flat_map(|a| (0..n2).flat_map(move |b| (0..n3).map(move |c| vec![a, b, c]))).collect();
        let m = VoxelManifold::new(Arc::new(VoxelSet::from_integer_points(3, pts).unwrap())).unwrap();
        let c = m.classify_boundary();
        let n = [n1 as usize, n2 as usize, n3 as usize];
        assert_eq!(c.faces, vec![2 * n[1] * n[2], 2 * n[0] * n[2], 2 * n[0] * n[1]]);
        for k in 0..3 {
            assert_eq!(c.edges[k].convex, 4 * n[k]);
            assert_eq!(c.edges[k].double_convex + c.edges[k].concave, 0);
        }
        assert_eq!(c.vertices, 8);
    }

    #[test]
    fn census_is_invariant_under_translation_and_permutation() {
        let pts: Vec<Vec<i64>> = vec![vec![0, 0, 0], vec![1, 1, 0], vec![1, 0, 0], vec![2, 2, 1], vec![0, 0, 2]];
        let base = VoxelManifold::new(Arc::new(VoxelSet::from_integer_points(3, pts.clone()).unwrap()))
            .unwrap()
            .classify_boundary();
        let shifted = VoxelManifold::new(Arc::new(
            VoxelSet::from_integer_points(3, pts.iter().map(|p| vec![p[0] + 7, p[1] - 3, p[2] + 1])).unwrap(),
        ))
        .unwrap()
        .classify_boundary();
        assert_eq!(base, shifted);
        let perm = VoxelManifold::new(Arc::new(
            VoxelSet::from_integer_points(3, pts.iter().map(|p| vec![p[2], p[0], p[1]])).unwrap(),
        ))
        .unwrap()
        .classify_boundary();
        assert_eq!(perm.faces, vec![base.faces[2], base.faces[0], base.faces[1]]);
        assert_eq!(perm.vertices, base.vertices);
        for (new, old) in [(0, 2), (1, 0), (2, 1)] {
            let (a, b) = (&perm.edges[new], &base.edges[old]);
            assert_eq!((a.convex, a.double_convex, a.concave), (b.convex, b.double_convex, b.concave));
        }
    }

    #[test]
    fn euler_characteristics() {
        for dim in 1..=3 {
            let one = VoxelManifold::new(Arc::new(box_points(dim, 0, 2).unwrap())).unwrap();
            assert_eq!(one.euler_characteristic(), 1, "box in {dim}D");
        }
        let unit = |dim: usize, coords: Vec<f64>| {
            let set = VoxelSet::with_spacing(dim, coords, vec![1.0; dim]).unwrap();
            VoxelManifold::new(Arc::new(set)).unwrap()
        };
        assert_eq!(unit(2, vec![0.0, 0.0, 3.0, 0.0]).euler_characteristic(), 2);
        assert_eq!(unit(3, vec![0.0, 0.0, 0.0, 2.0, 2.0, 2.0]).euler_characteristic(), 2);
        assert_eq!(unit(1, vec![0.0, 5.0, 9.0]).euler_characteristic(), 3);
        let frame = VoxelManifold::new(make_domain_preset("nonstat2d", 1.0).unwrap().domain).unwrap();
        assert_eq!(frame.euler_characteristic(), 0);
        let shell = VoxelManifold::new(make_domain_preset("nonstat3d", 1.0).unwrap().domain).unwrap();
        // A cube with all six faces present encloses a cavity: chi = 1 + 1.
        assert_eq!(shell.euler_characteristic(), 2);
        let touching = manifold(2, &[&[0, 0], &[1, 1]]);
        assert_eq!(touching.euler_characteristic(), 1);
    }

    #[test]
    fn locate_and_contains() {
        let m = manifold(2, &[&[0, 0], &[1, 1]]);
        assert!(m.contains(&[0.5, 0.5]));
        assert!(m.contains(&[1.4, 1.5]));
        assert!(!m.contains(&[1.0, 0.0]));
        assert!(!m.contains(&[-0.6, 0.0]));
    }
}
