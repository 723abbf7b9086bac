//! Discrete voxel sets, lattice-valued fields and seeded Gaussian ensembles.
//!
//! Voxel coordinates are stored as reals even when integral, so anisotropic
//! and non-unit spacings work without special cases. Masked domains are kept
//! as explicit coordinate lists.

use std::collections::HashSet;
use std::sync::Arc;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported domain dimension.
pub const MAX_DIM: usize = 3;

/// Relative tolerance used when snapping coordinates onto the lattice.
const LATTICE_TOL: f64 = 1e-9;

/// A finite set of points in `R^D` together with its per-axis spacing.
#[derive(Debug, Clone, PartialEq)]
pub struct VoxelSet {
    dim: usize,
    coords: Vec<f64>,
    spacing: Vec<f64>,
}

impl VoxelSet {
    /// Builds a voxel set from a flat list of `D`-tuples.
    ///
    /// The spacing along axis `d` is the smallest positive gap between two
    /// coordinates on that axis. Axes on which all voxels share a coordinate
    /// get spacing 1.
    pub fn new(dim: usize, coords: Vec<f64>) -> Result<Self> {
        check_dim(dim)?;
        let spacing = min_gaps(dim, &coords)?;
        let set = VoxelSet { dim, coords, spacing };
        set.validate()?;
        Ok(set)
    }

    /// Builds a voxel set with an explicit spacing, which must not exceed the
    /// smallest coordinate gap on any axis.
    pub fn with_spacing(dim: usize, coords: Vec<f64>, spacing: Vec<f64>) -> Result<Self> {
        check_dim(dim)?;
        if spacing.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: spacing.len() });
        }
        if spacing.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::VoxelSet(format!("spacing must be positive, got {spacing:?}")));
        }
        let gaps = min_gaps(dim, &coords)?;
        for d in 0..dim {
            if has_gap(dim, &coords, d) && spacing[d] > gaps[d] * (1.0 + LATTICE_TOL) {
                return Err(Error::VoxelSet(format!(
                    "spacing {} on axis {d} exceeds the minimal coordinate gap {}",
                    spacing[d], gaps[d]
                )));
            }
        }
        let set = VoxelSet { dim, coords, spacing };
        set.validate()?;
        Ok(set)
    }

    /// Builds a voxel set from integer lattice points.
    pub fn from_integer_points<I>(dim: usize, points: I) -> Result<Self>
    where
        I: IntoIterator<Item = Vec<i64>>,
    {
        let mut coords = Vec::new();
        for p in points {
            if p.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: p.len() });
            }
            coords.extend(p.iter().map(|&c| c as f64));
        }
        Self::new(dim, coords)
    }

    fn validate(&self) -> Result<()> {
        if self.coords.is_empty() {
            return Err(Error::VoxelSet("voxel set is empty".into()));
        }
        if !self.coords.len().is_multiple_of(self.dim) {
            return Err(Error::VoxelSet(format!(
                "coordinate count {} is not a multiple of D = {}",
                self.coords.len(),
                self.dim
            )));
        }
        if self.coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::VoxelSet("non-finite coordinate".into()));
        }
        let mut seen = HashSet::with_capacity(self.len());
        for p in self.points() {
            let key: Vec<u64> = p.iter().map(|c| c.to_bits()).collect();
            if !seen.insert(key) {
                return Err(Error::VoxelSet(format!("duplicate voxel {p:?}")));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    /// Flat coordinate buffer, `D` entries per voxel.
    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    /// Recomputes the spacing from the coordinates.
    pub fn recompute_spacing(&self) -> Vec<f64> {
        min_gaps(self.dim, &self.coords).expect("validated at construction")
    }

    /// Translates every voxel by `offset`.
    pub fn translated(&self, offset: &[f64]) -> Result<Self> {
        if offset.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: offset.len() });
        }
        let coords =
            self.coords.chunks_exact(self.dim).flat_map(|p| p.iter().zip(offset).map(|(c, o)| c + o)).collect();
        Self::with_spacing(self.dim, coords, self.spacing.clone())
    }

    /// Snaps the voxels onto the integer lattice `origin + spacing * Z^D`.
    pub fn lattice(&self) -> Result<LatticeIndex> {
        LatticeIndex::new(self)
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if (1..=MAX_DIM).contains(&dim) {
        Ok(())
    } else {
        Err(Error::Dimension(dim))
    }
}

fn has_gap(dim: usize, coords: &[f64], axis: usize) -> bool {
    let first = coords[axis];
    coords.iter().skip(axis).step_by(dim).any(|&c| c != first)
}

fn min_gaps(dim: usize, coords: &[f64]) -> Result<Vec<f64>> {
    if coords.is_empty() || !coords.len().is_multiple_of(dim) {
        return Err(Error::VoxelSet("coordinate buffer has the wrong length".into()));
    }
    let mut gaps = Vec::with_capacity(dim);
    for d in 0..dim {
        let mut axis: Vec<f64> = coords.iter().skip(d).step_by(dim).copied().collect();
        axis.sort_by(f64::total_cmp);
        axis.dedup();
        let gap = axis.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
        gaps.push(if gap.is_finite() { gap } else { 1.0 });
    }
    Ok(gaps)
}

/// Integer lattice indices of a voxel set embedded in its bounding box.
#[derive(Debug, Clone)]
pub struct LatticeIndex {
    dim: usize,
    origin: [f64; MAX_DIM],
    spacing: [f64; MAX_DIM],
    extent: [usize; MAX_DIM],
    indices: Vec<[i64; MAX_DIM]>,
    dense: Vec<i64>,
}

impl LatticeIndex {
    fn new(set: &VoxelSet) -> Result<Self> {
        let dim = set.dim();
        let mut origin = [0.0; MAX_DIM];
        let mut spacing = [1.0; MAX_DIM];
        for d in 0..dim {
            origin[d] = set.points().map(|p| p[d]).fold(f64::INFINITY, f64::min);
            spacing[d] = set.spacing()[d];
        }
        let mut indices = Vec::with_capacity(set.len());
        let mut extent = [1usize; MAX_DIM];
        for p in set.points() {
            let mut idx = [0i64; MAX_DIM];
            for d in 0..dim {
                let t = (p[d] - origin[d]) / spacing[d];
                let r = t.round();
                if (t - r).abs() > LATTICE_TOL * t.abs().max(1.0) {
                    return Err(Error::VoxelSet(format!(
                        "voxel {p:?} is not on the lattice with spacing {:?}",
                        set.spacing()
                    )));
                }
                idx[d] = r as i64;
                extent[d] = extent[d].max(r as usize + 1);
            }
            indices.push(idx);
        }
        let mut dense = vec![-1i64; extent.iter().product()];
        for (i, idx) in indices.iter().enumerate() {
            let flat = flat_index(&extent, idx);
            dense[flat] = i as i64;
        }
        Ok(LatticeIndex { dim, origin, spacing, extent, indices, dense })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Coordinate of lattice index 0 on each axis.
    pub fn origin(&self) -> &[f64] {
        &self.origin[..self.dim]
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing[..self.dim]
    }

    /// Bounding-box extent in voxels (unused axes are 1).
    pub fn extent(&self) -> [usize; MAX_DIM] {
        self.extent
    }

    /// Lattice index of voxel `i` (unused axes are 0).
    pub fn index(&self, i: usize) -> [i64; MAX_DIM] {
        self.indices[i]
    }

    pub fn indices(&self) -> &[[i64; MAX_DIM]] {
        &self.indices
    }

    /// Voxel number at a lattice index, if occupied.
    pub fn lookup(&self, idx: &[i64; MAX_DIM]) -> Option<usize> {
        for d in 0..MAX_DIM {
            if idx[d] < 0 || idx[d] as usize >= self.extent[d] {
                return None;
            }
        }
        let v = self.dense[flat_index(&self.extent, idx)];
        (v >= 0).then_some(v as usize)
    }

    pub fn contains(&self, idx: &[i64; MAX_DIM]) -> bool {
        self.lookup(idx).is_some()
    }

    /// Row-major position of voxel `i` inside the bounding box.
    pub fn dense_position(&self, i: usize) -> usize {
        flat_index(&self.extent, &self.indices[i])
    }

    /// Number of cells of the bounding box.
    pub fn dense_len(&self) -> usize {
        self.dense.len()
    }
}

fn flat_index(extent: &[usize; MAX_DIM], idx: &[i64; MAX_DIM]) -> usize {
    ((idx[0] as usize) * extent[1] + idx[1] as usize) * extent[2] + idx[2] as usize
}

/// A real value at every voxel of a domain.
#[derive(Debug, Clone)]
pub struct LatticeField {
    domain: Arc<VoxelSet>,
    values: Vec<f64>,
}

impl LatticeField {
    pub fn new(domain: Arc<VoxelSet>, values: Vec<f64>) -> Result<Self> {
        check_values(&domain, &values)?;
        Ok(LatticeField { domain, values })
    }

    pub fn domain(&self) -> &Arc<VoxelSet> {
        &self.domain
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Indicator of a single voxel.
    pub fn indicator(domain: Arc<VoxelSet>, voxel: usize) -> Result<Self> {
        if voxel >= domain.len() {
            return Err(Error::Field(format!("voxel {voxel} out of range")));
        }
        let mut values = vec![0.0; domain.len()];
        values[voxel] = 1.0;
        Ok(LatticeField { domain, values })
    }
}

fn check_values(domain: &VoxelSet, values: &[f64]) -> Result<()> {
    if values.len() != domain.len() {
        return Err(Error::Field(format!("{} values for {} voxels", values.len(), domain.len())));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Field("non-finite value".into()));
    }
    Ok(())
}

/// Seed and stream of a reproducible random number source.
///
/// Each stream index selects an independent ChaCha stream of the master
/// seed, so replications can be generated in any order or in parallel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngSpec {
    pub seed: u64,
    pub stream: u64,
}

impl RngSpec {
    pub fn new(seed: u64, stream: u64) -> Self {
        RngSpec { seed, stream }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

/// `N` lattice fields on a shared domain.
#[derive(Debug, Clone)]
pub struct FieldEnsemble {
    domain: Arc<VoxelSet>,
    /// Row-major, one row of `domain.len()` values per field.
    values: Vec<f64>,
    count: usize,
    rng: Option<RngSpec>,
    signal: Option<Vec<f64>>,
}

impl FieldEnsemble {
    /// Builds an ensemble from explicit rows of values.
    pub fn from_rows(domain: Arc<VoxelSet>, rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Field("ensemble needs at least one field".into()));
        }
        let mut values = Vec::with_capacity(rows.len() * domain.len());
        for row in &rows {
            check_values(&domain, row)?;
            values.extend_from_slice(row);
        }
        Ok(FieldEnsemble { domain, values, count: rows.len(), rng: None, signal: None })
    }

    pub fn from_fields(fields: &[LatticeField]) -> Result<Self> {
        let first = fields.first().ok_or_else(|| Error::Field("ensemble needs at least one field".into()))?;
        let domain = first.domain.clone();
        if fields.iter().any(|f| !Arc::ptr_eq(&f.domain, &domain) && *f.domain != *domain) {
            return Err(Error::Field("fields do not share one domain".into()));
        }
        Self::from_rows(domain, fields.iter().map(|f| f.values.clone()).collect())
    }

    pub fn domain(&self) -> &Arc<VoxelSet> {
        &self.domain
    }

    /// Number of fields `N`.
    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn field(&self, i: usize) -> &[f64] {
        let n = self.domain.len();
        &self.values[i * n..(i + 1) * n]
    }

    pub fn fields(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.domain.len())
    }

    pub fn rng(&self) -> Option<RngSpec> {
        self.rng
    }

    pub fn signal(&self) -> Option<&[f64]> {
        self.signal.as_deref()
    }

    /// Returns a copy with every field multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= factor);
        out
    }

    /// Returns a copy with `offset` added to every value.
    pub fn shifted(&self, offset: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v += offset);
        out
    }
}

/// Draws `n` fields of i.i.d. standard normal noise, plus an optional mean.
///
/// Fields are generated in index order from a single stream, so the result is
/// a pure function of `(domain, n, rng, signal)`.
pub fn sample_ensemble(domain: Arc<VoxelSet>, n: usize, rng: RngSpec, signal: Option<&[f64]>) -> Result<FieldEnsemble> {
    if n == 0 {
        return Err(Error::InvalidArgument("ensemble size must be at least 1".into()));
    }
    if let Some(mu) = signal {
        if mu.len() != domain.len() {
            return Err(Error::Field(format!("signal has {} values for {} voxels", mu.len(), domain.len())));
        }
    }
    let voxels = domain.len();
    let mut gen = rng.rng();
    let mut values = Vec::with_capacity(n * voxels);
    for _ in 0..n {
        for j in 0..voxels {
            let z: f64 = gen.sample(StandardNormal);
            values.push(z + signal.map_or(0.0, |mu| mu[j]));
        }
    }
    Ok(FieldEnsemble { domain, values, count: n, rng: Some(rng), signal: signal.map(<[f64]>::to_vec) })
}

/// The simulation domains used for LKC and FWER experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PresetName {
    Stat1d,
    Stat2d,
    Stat3d,
    Nonstat1d,
    Nonstat2d,
    Nonstat3d,
}

impl PresetName {
    pub const ALL: [PresetName; 6] = [
        PresetName::Stat1d,
        PresetName::Stat2d,
        PresetName::Stat3d,
        PresetName::Nonstat1d,
        PresetName::Nonstat2d,
        PresetName::Nonstat3d,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            PresetName::Stat1d => "stat1d",
            PresetName::Stat2d => "stat2d",
            PresetName::Stat3d => "stat3d",
            PresetName::Nonstat1d => "nonstat1d",
            PresetName::Nonstat2d => "nonstat2d",
            PresetName::Nonstat3d => "nonstat3d",
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            PresetName::Stat1d | PresetName::Nonstat1d => 1,
            PresetName::Stat2d | PresetName::Nonstat2d => 2,
            PresetName::Stat3d | PresetName::Nonstat3d => 3,
        }
    }

    pub fn is_stationary(&self) -> bool {
        matches!(self, PresetName::Stat1d | PresetName::Stat2d | PresetName::Stat3d)
    }
}

impl std::str::FromStr for PresetName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PresetName::ALL.into_iter().find(|p| p.as_str() == s).ok_or_else(|| Error::UnknownPreset(s.to_string()))
    }
}

impl std::fmt::Display for PresetName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A simulation domain: the lattice the data lives on and the (possibly
/// smaller) lattice whose voxel manifold is the inference domain.
#[derive(Debug, Clone)]
pub struct DomainPreset {
    pub name: PresetName,
    /// Expansion `a` applied to the data lattice (0 for non-stationary presets).
    pub expansion: f64,
    /// Lattice carrying the white noise that gets smoothed.
    pub data: Arc<VoxelSet>,
    /// Lattice whose voxel manifold is the domain of the field.
    pub domain: Arc<VoxelSet>,
}

/// Expansion `a = sqrt(2) f / sqrt(log 2)` that removes boundary effects.
pub fn stationary_expansion(fwhm: f64) -> f64 {
    std::f64::consts::SQRT_2 * fwhm / std::f64::consts::LN_2.sqrt()
}

const NONSTAT1D_EXCLUDED: [i64; 22] =
    [2, 4, 8, 9, 11, 15, 20, 21, 22, 40, 41, 42, 43, 44, 45, 60, 62, 64, 65, 98, 99, 100];

/// Builds one of the six simulation domains for smoothing bandwidth `fwhm`.
pub fn make_domain_preset(name: &str, fwhm: f64) -> Result<DomainPreset> {
    let preset: PresetName = name.parse()?;
    if !(fwhm.is_finite() && fwhm > 0.0) {
        return Err(Error::InvalidArgument(format!("fwhm must be positive, got {fwhm}")));
    }
    let a = if preset.is_stationary() { stationary_expansion(fwhm) } else { 0.0 };
    preset_with_expansion(preset, a)
}

/// Builds a preset with an explicit expansion `a >= 0` (ignored for the
/// non-stationary presets).
pub fn preset_with_expansion(preset: PresetName, a: f64) -> Result<DomainPreset> {
    if !(a.is_finite() && a >= 0.0) {
        return Err(Error::InvalidArgument(format!("expansion must be >= 0, got {a}")));
    }
    let dim = preset.dim();
    let (data, domain, expansion) = if preset.is_stationary() {
        let side = if dim == 1 { 100 } else { 20 };
        let lo = (1.0 - a).ceil() as i64;
        let hi = (side as f64 + a).floor() as i64;
        let data = Arc::new(box_points(dim, lo, hi)?);
        let domain = if a == 0.0 { data.clone() } else { Arc::new(box_points(dim, 1, side)?) };
        (data, domain, a)
    } else {
        let set = Arc::new(match preset {
            PresetName::Nonstat1d => VoxelSet::from_integer_points(
                1,
                (1..=100).filter(|i| !NONSTAT1D_EXCLUDED.contains(i)).map(|i| vec![i]),
            )?,
            _ => {
                let frame = |c: i64| matches!(c, 1 | 2 | 19 | 20);
                VoxelSet::from_integer_points(dim, box_iter(dim, 1, 20).filter(|p| p.iter().any(|&c| frame(c))))?
            }
        });
        (set.clone(), set, 0.0)
    };
    Ok(DomainPreset { name: preset, expansion, data, domain })
}

fn box_iter(dim: usize, lo: i64, hi: i64) -> impl Iterator<Item = Vec<i64>> {
    let side = (hi - lo + 1).max(0) as usize;
    let total = side.pow(dim as u32);
    (0..total).map(move |mut k| {
        let mut p = vec![0i64; dim];
        for d in (0..dim).rev() {
            p[d] = lo + (k % side) as i64;
            k /= side;
        }
        p
    })
}

/// The integer box `[lo, hi]^D` as a voxel set.
pub fn box_points(dim: usize, lo: i64, hi: i64) -> Result<VoxelSet> {
    VoxelSet::from_integer_points(dim, box_iter(dim, lo, hi))
}
