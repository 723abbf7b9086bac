//! Field files: the binary SRF1 format and CSV.
//!
//! SRF1 layout, all little-endian: magic `SRF1`, format version `u16`, `D`
//! as `u8`, voxel count `u64`, the voxel coordinates as `D` `f64`s each, a
//! field count `u32`, then the values of each field in voxel order.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::lattice::{FieldEnsemble, VoxelSet, MAX_DIM};

pub const SRF1_MAGIC: &[u8; 4] = b"SRF1";
pub const SRF1_VERSION: u16 = 1;

/// Voxels with any number of fields on them.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldFile {
    pub domain: VoxelSet,
    pub fields: Vec<Vec<f64>>,
}

impl FieldFile {
    pub fn new(domain: VoxelSet, fields: Vec<Vec<f64>>) -> Result<Self> {
        for f in &fields {
            if f.len() != domain.len() {
                return Err(Error::Field(format!("field has {} values for {} voxels", f.len(), domain.len())));
            }
        }
        Ok(FieldFile { domain, fields })
    }

    pub fn from_ensemble(ensemble: &FieldEnsemble) -> Self {
        FieldFile {
            domain: ensemble.domain().as_ref().clone(),
            fields: ensemble.fields().map(<[f64]>::to_vec).collect(),
        }
    }

    pub fn into_ensemble(self) -> Result<FieldEnsemble> {
        FieldEnsemble::from_rows(Arc::new(self.domain), self.fields)
    }
}

pub fn write_srf1<W: Write>(mut w: W, file: &FieldFile) -> Result<()> {
    let dim = file.domain.dim();
    w.write_all(SRF1_MAGIC)?;
    w.write_all(&SRF1_VERSION.to_le_bytes())?;
    w.write_all(&[dim as u8])?;
    w.write_all(&(file.domain.len() as u64).to_le_bytes())?;
    for c in file.domain.coords() {
        w.write_all(&c.to_le_bytes())?;
    }
    w.write_all(&(file.fields.len() as u32).to_le_bytes())?;
    for f in &file.fields {
        for v in f {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

fn read_array<const N: usize, R: Read>(r: &mut R) -> Result<[u8; N]> {
    let mut b = [0u8; N];
    r.read_exact(&mut b).map_err(|e| Error::Format(format!("truncated SRF1 file: {e}")))?;
    Ok(b)
}

fn read_f64s<R: Read>(r: &mut R, n: usize) -> Result<Vec<f64>> {
    (0..n).map(|_| Ok(f64::from_le_bytes(read_array::<8, R>(r)?))).collect()
}

pub fn read_srf1<R: Read>(mut r: R) -> Result<FieldFile> {
    if &read_array::<4, R>(&mut r)? != SRF1_MAGIC {
        return Err(Error::Format("not an SRF1 file (bad magic)".into()));
    }
    let version = u16::from_le_bytes(read_array::<2, R>(&mut r)?);
    if version != SRF1_VERSION {
        return Err(Error::Format(format!("unsupported SRF1 version {version}")));
    }
    let dim = read_array::<1, R>(&mut r)?[0] as usize;
    if dim == 0 || dim > MAX_DIM {
        return Err(Error::Dimension(dim));
    }
    let n = u64::from_le_bytes(read_array::<8, R>(&mut r)?) as usize;
    let coords = read_f64s(&mut r, n * dim)?;
    let nfields = u32::from_le_bytes(read_array::<4, R>(&mut r)?) as usize;
    let fields = (0..nfields).map(|_| read_f64s(&mut r, n)).collect::<Result<Vec<_>>>()?;
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return Err(Error::Format("trailing bytes after SRF1 payload".into()));
    }
    FieldFile::new(VoxelSet::new(dim, coords)?, fields)
}

/// Writes rows `x1..xD, value` (one field) or `x1..xD, value_1..value_N`.
pub fn write_csv<W: Write>(w: W, file: &FieldFile) -> Result<()> {
    let dim = file.domain.dim();
    let mut out = csv::Writer::from_writer(w);
    let mut header: Vec<String> = (1..=dim).map(|d| format!("x{d}")).collect();
    if file.fields.len() == 1 {
        header.push("value".into());
    } else {
        header.extend((1..=file.fields.len()).map(|i| format!("value_{i}")));
    }
    out.write_record(&header)?;
    for (v, p) in file.domain.points().enumerate() {
        let row: Vec<String> =
            p.iter().copied().chain(file.fields.iter().map(|f| f[v])).map(|x| format!("{x:?}")).collect();
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

/// Reads the CSV layout of [`write_csv`]; coordinate columns are those whose
/// header starts with `x`.
pub fn read_csv<R: Read>(r: R) -> Result<FieldFile> {
    let mut input = csv::Reader::from_reader(r);
    let header = input.headers()?.clone();
    let dim = header.iter().take_while(|h| h.trim().starts_with('x')).count();
    if dim == 0 || dim > MAX_DIM {
        return Err(Error::Format(format!("expected 1 to 3 leading coordinate columns x1..xD, found {dim}")));
    }
    let nfields = header.len() - dim;
    let mut coords = Vec::new();
    let mut fields = vec![Vec::new(); nfields];
    for (line, rec) in input.records().enumerate() {
        let rec = rec?;
        let vals: Vec<f64> = rec
            .iter()
            .map(|s| s.trim().parse::<f64>().map_err(|e| Error::Format(format!("row {}: {e}", line + 2))))
            .collect::<Result<_>>()?;
        coords.extend_from_slice(&vals[..dim]);
        for (f, v) in fields.iter_mut().zip(&vals[dim..]) {
            f.push(*v);
        }
    }
    FieldFile::new(VoxelSet::new(dim, coords)?, fields)
}

/// Reads points, one per row, from a CSV with a header.
pub fn read_points_csv<R: Read>(r: R) -> Result<Vec<Vec<f64>>> {
    let mut input = csv::Reader::from_reader(r);
    let mut out = Vec::new();
    for (line, rec) in input.records().enumerate() {
        let rec = rec?;
        let p = rec
            .iter()
            .map(|s| s.trim().parse::<f64>().map_err(|e| Error::Format(format!("row {}: {e}", line + 2))))
            .collect::<Result<Vec<_>>>()?;
        out.push(p);
    }
    Ok(out)
}

/// Loads a field file, choosing the format from the extension (`.csv` or SRF1).
pub fn load(path: &Path) -> Result<FieldFile> {
    let f = BufReader::new(File::open(path)?);
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        read_csv(f)
    } else {
        read_srf1(f)
    }
}

/// Saves a field file, choosing the format from the extension (`.csv` or SRF1).
pub fn save(path: &Path, file: &FieldFile) -> Result<()> {
    let f = BufWriter::new(File::create(path)?);
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        write_csv(f, file)
    } else {
        write_srf1(f, file)
    }
}
