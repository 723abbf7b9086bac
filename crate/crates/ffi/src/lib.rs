//! C ABI for `surf-core`.
//!
//! Objects are opaque handles created by `*_new` style functions and released
//! with the matching `*_free`. Every fallible function returns a
//! [`SurfStatus`]; on failure a message is available from
//! [`surf_last_error_message`] until the next failing call on the same thread.
//! Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::Arc;

use surf_core::inference::{ec_density, threshold, FieldType};
use surf_core::jets::JetSource;
use surf_core::kernel::{GaussianKernel, Order};
use surf_core::lattice::{make_domain_preset, sample_ensemble, FieldEnsemble, RngSpec, VoxelSet};
use surf_core::lkc::{lkc_compute, lkc_stationary_closed_form, LkcOptions, LkcSource, LkcVector};
use surf_core::manifold::VoxelManifold;
use surf_core::surf::SurfSpec;
use surf_core::Error;

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SurfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Dimension = 3,
    Degenerate = 4,
    Threshold = 5,
    Io = 6,
    Panic = 7,
}

/// Field family for EC densities and thresholds.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SurfFieldType {
    Gaussian = 0,
    StudentT = 1,
}

/// A set of voxels.
pub struct SurfVoxelSet {
    inner: Arc<VoxelSet>,
}

/// Lattice fields sharing one voxel set.
pub struct SurfEnsemble {
    inner: Arc<FieldEnsemble>,
}

/// A Gaussian smoothing kernel.
pub struct SurfKernel {
    inner: GaussianKernel,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> SurfStatus {
    match e {
        Error::Dimension(_) | Error::DimensionMismatch { .. } => SurfStatus::Dimension,
        Error::DegenerateNormalization { .. }
        | Error::DegenerateStatistic { .. }
        | Error::DegenerateMetric { .. }
        | Error::SingularMetric => SurfStatus::Degenerate,
        Error::Threshold(_) => SurfStatus::Threshold,
        Error::Io(_) | Error::Csv(_) | Error::Json(_) | Error::Format(_) => SurfStatus::Io,
        _ => SurfStatus::InvalidArgument,
    }
}

/// Runs `f`, converting errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), (SurfStatus, String)>) -> SurfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SurfStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            SurfStatus::Panic
        }
    }
}

fn lift<T>(r: surf_core::Result<T>) -> Result<T, (SurfStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (SurfStatus, String) {
    (SurfStatus::NullPointer, format!("{what} is null"))
}

unsafe fn slice<'a, T>(p: *const T, n: usize, what: &str) -> Result<&'a [T], (SurfStatus, String)> {
    if n == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, n))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, (SurfStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

fn field_type(kind: SurfFieldType, df: f64) -> surf_core::Result<FieldType> {
    match kind {
        SurfFieldType::Gaussian => Ok(FieldType::Gaussian),
        SurfFieldType::StudentT => FieldType::student_t(df),
    }
}

/// Copies `L_0..L_D` into `out` (capacity 4) and stores `D + 1` in `out_len`.
unsafe fn write_lkcs(l: &LkcVector, out: *mut f64, out_len: *mut usize) -> Result<(), (SurfStatus, String)> {
    if out.is_null() {
        return Err(null("out"));
    }
    for (d, v) in l.values.iter().enumerate() {
        *out.add(d) = *v;
    }
    if !out_len.is_null() {
        *out_len = l.values.len();
    }
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[unsafe(no_mangle)]
pub extern "C" fn surf_version() -> *const c_char {
    static VERSION: std::sync::OnceLock<CString> = std::sync::OnceLock::new();
    VERSION.get_or_init(|| CString::new(surf_core::cli::VERSION).expect("no nul")).as_ptr()
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`) and returns the full message length, or 0 if none.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn surf_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| match e.borrow().as_ref() {
        None => 0,
        Some(msg) => {
            let bytes = msg.as_bytes();
            if !buf.is_null() && len > 0 {
                let n = bytes.len().min(len - 1);
                ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
                *buf.add(n) = 0;
            }
            bytes.len()
        }
    })
}

/// Creates a voxel set from `n` points of dimension `dim`, stored row-major.
///
/// # Safety
/// `coords` must point to `n * dim` doubles and `out` must be writable.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn surf_voxel_set_new(
    dim: usize,
    coords: *const f64,
    n: usize,
    out: *mut *mut SurfVoxelSet,
) -> SurfStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let c = slice(coords, n * dim, "coords")?.to_vec();
        let set = lift(VoxelSet::new(dim, c))?;
        *out = Box::into_raw(Box::new(SurfVoxelSet { inner: Arc::new(set) }));
        Ok(())
    })
}

/// Creates the manifold domain (`data = 0`) or data lattice (`data = 1`) of
/// a named simulation preset.
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` writable.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn surf_voxel_set_from_preset(
    name: *const c_char,
    fwhm: f64,
    data: i32,
    out: *mut *mut SurfVoxelSet,
) -> SurfStatus {
    guard(|| {
        if name.is_null() {
            return Err(null("name"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let name = CStr::from_ptr(name).to_str().map_err(|e| (SurfStatus::InvalidArgument, e.to_string()))?;
        let preset = lift(make_domain_preset(name, fwhm))?;
        let inner = if data != 0 { preset.data } else { preset.domain };
        *out = Box::into_raw(Box::new(SurfVoxelSet { inner }));
        Ok(())
    })
}

/// Number of voxels, or 0 for a null handle.
///
/// # Safety
/// `set` must be null or a live handle.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn surf_voxel_set_len(set: *const SurfVoxelSet) -> usize {
    set.as_ref().map_or(0, |s| s.inner.len())
}

/// Releases a voxel set. Null is ignored.
///
/// # Safety
/// `set` must be null or a handle not yet freed.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn surf_voxel_set_free(set: *mut SurfVoxelSet) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}

/// Euler characteristic of the union of voxel boxes.
///
/// # Safety
/// `set` must be a live handle and `out` writable.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn surf_euler_characteristic(set: *const SurfVoxelSet, out: *mut i64) -> SurfStatus {
    guard(|| {
        let s = handle(set, "set")?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = lift(VoxelManifold::new(s.inner.clone()))?.euler_characteristic();
        Ok(())
    })
}

/// Draws `n` standard Gaussian fields on `set` from stream `(seed, stream)`.
///
/// # Safety
/// `set` must be a live handle and `out` writable.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn surf_ensemble_sample(
    set: *const SurfVoxelSet,
    n: usize,
    seed: u64,
    stream: u64,
    out: *mut *mut SurfEnsemble,
) -> SurfStatus {
    guard(|| {
        let s = handle(set, "set")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let e = lift(sample_ensemble(s.inner.clone(), n, RngSpec::new(seed, stream), None))?;
        *out = Box::into_raw(Box::new(SurfEnsemble { inner: Arc::new(e) }));
        Ok(())
    })
}

/// Wraps `nfields` fields on `set`; `values` holds the fields one after the other.
///
/// # Safety
/// `values` must point to `nfields * len(set)` doubles and `out` be writable.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn surf_ensemble_from_values(
    set: *const SurfVoxelSet,
    values: *const f64,
    nfields: usize,
    out: *mut *mut SurfEnsemble,
) -> SurfStatus {
    guard(|| {
        let s = handle(set, "set")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let n = s.inner.len();
        let v = slice(values, n * nfields, "values")?;
        let rows = v.chunks(n.max(1)).map(<[f64]>::to_vec).collect();
        let e = lift(FieldEnsemble::from_rows(s.inner.clone(), rows))?;
        *out = Box::into_raw(Box::new(SurfEnsemble { inner: Arc::new(e) }));
        Ok(())
    })
}

/// Releases an ensemble. Null is ignored.
///
/// # Safety
/// `e` must be null or a handle not yet freed.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn surf_ensemble_free(e: *mut SurfEnsemble) {
    if !e.is_null() {
        drop(Box::from_raw(e));
    }
}

/// Creates a Gaussian kernel with one FWHM per axis; `truncation <= 0`
/// means untruncated.
///
/// # Safety
/// `fwhm` must point to `dim` doubles and `out` be writable.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn surf_kernel_new(
    dim: usize,
    fwhm: *const f64,
    truncation: f64,
    out: *mut *mut SurfKernel,
) -> SurfStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let f = slice(fwhm, dim, "fwhm")?.to_vec();
        let mut k = lift(GaussianKernel::new(f))?;
        if truncation > 0.0 {
            k = lift(k.with_truncation(truncation))?;
        }
        *out = Box::into_raw(Box::new(SurfKernel { inner: k }));
        Ok(())
    })
}

/// Releases a kernel. Null is ignored.
///
/// # Safety
/// `k` must be null or a handle not yet freed.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn surf_kernel_free(k: *mut SurfKernel) {
    if !k.is_null() {
        drop(Box::from_raw(k));
    }
}

/// LKCs of the manifold over `domain` for smoothed white noise on `data`.
/// Writes up to four values to `out` and their count to `out_len`.
///
/// # Safety
/// Handles must be live, `out` must hold 4 doubles, `out_len` may be null.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn surf_lkc_white_noise(
    data: *const SurfVoxelSet,
    kernel: *const SurfKernel,
    domain: *const SurfVoxelSet,
    r: u32,
    out: *mut f64,
    out_len: *mut usize,
) -> SurfStatus {
    guard(|| {
        let data = handle(data, "data")?;
        let k = handle(kernel, "kernel")?;
        let m = lift(VoxelManifold::new(handle(domain, "domain")?.inner.clone()))?;
        let l = lift(lkc_compute(JetSource::WhiteNoise(&data.inner), &k.inner, &m, r, LkcOptions::default()))?;
        write_lkcs(&l, out, out_len)
    })
}

/// LKC estimates from an ensemble.
///
/// # Safety
/// Handles must be live, `out` must hold 4 doubles, `out_len` may be null.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn surf_lkc_estimate(
    ensemble: *const SurfEnsemble,
    kernel: *const SurfKernel,
    domain: *const SurfVoxelSet,
    r: u32,
    out: *mut f64,
    out_len: *mut usize,
) -> SurfStatus {
    guard(|| {
        let e = handle(ensemble, "ensemble")?;
        let k = handle(kernel, "kernel")?;
        let m = lift(VoxelManifold::new(handle(domain, "domain")?.inner.clone()))?;
        let l = lift(lkc_compute(JetSource::Ensemble(&e.inner), &k.inner, &m, r, LkcOptions::default()))?;
        write_lkcs(&l, out, out_len)
    })
}

/// Stationary LKCs of a box with `dim` side lengths.
///
/// # Safety
/// `sides` must point to `dim` doubles and `out` hold `dim + 1` doubles.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn surf_lkc_closed_form(sides: *const f64, dim: usize, fwhm: f64, out: *mut f64) -> SurfStatus {
    guard(|| {
        let s = slice(sides, dim, "sides")?;
        let l = lift(lkc_stationary_closed_form(s, fwhm))?;
        write_lkcs(&l, out, ptr::null_mut())
    })
}

/// EC density `rho_d(u)`; `df` is used for t-fields only.
///
/// # Safety
/// `out` must be writable.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn surf_ec_density(kind: SurfFieldType, df: f64, d: usize, u: f64, out: *mut f64) -> SurfStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = lift(ec_density(lift(field_type(kind, df))?, d, u))?;
        Ok(())
    })
}

/// The EEC threshold for `len` LKCs `L_0..`.
///
/// # Safety
/// `lkcs` must point to `len` doubles and `out` be writable.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn surf_threshold(
    lkcs: *const f64,
    len: usize,
    kind: SurfFieldType,
    df: f64,
    alpha: f64,
    out: *mut f64,
) -> SurfStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let l = lift(LkcVector::from_values(slice(lkcs, len, "lkcs")?.to_vec(), LkcSource::Estimate))?;
        *out = lift(threshold(&l, lift(field_type(kind, df))?, alpha))?;
        Ok(())
    })
}

/// The t-field of an ensemble at `x`; `grad` (nullable) receives the gradient.
///
/// # Safety
/// Handles must be live, `x` and `grad` must hold `dim` doubles.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn surf_t_field(
    ensemble: *const SurfEnsemble,
    kernel: *const SurfKernel,
    x: *const f64,
    dim: usize,
    value: *mut f64,
    grad: *mut f64,
) -> SurfStatus {
    guard(|| {
        let e = handle(ensemble, "ensemble")?;
        let k = handle(kernel, "kernel")?;
        if value.is_null() {
            return Err(null("value"));
        }
        let x = slice(x, dim, "x")?;
        let spec = lift(SurfSpec::new(e.inner.clone(), k.inner.clone(), false))?;
        let order = if grad.is_null() { Order::Value } else { Order::Gradient };
        let t = lift(spec.t_field(x, order))?;
        *value = t.value;
        if !grad.is_null() {
            for (d, g) in t.gradient.iter().enumerate() {
                *grad.add(d) = *g;
            }
        }
        Ok(())
    })
}
