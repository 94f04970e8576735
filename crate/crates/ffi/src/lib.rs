//! C ABI over the `haar` crate.
//!
//! Objects are opaque handles created by `*_new`/`*_load` functions and
//! released with the matching `*_free`. Every fallible call returns a
//! [`HaarStatus`]; the message of the last failure on the calling thread is
//! available from [`haar_last_error`]. Matrices are written row-major.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use haar::engine::algebra_basis;
use haar::reynolds::{dim_invariants_closed, dim_invariants_reduced, REDUCED_NODES};
use haar::sampling::{Sampler, SamplerConfig};
use haar::{BuiltinChart, Chart, Error, GroupTag, QuadratureRule};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HaarStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    Domain = 4,
    Numerical = 5,
    Io = 6,
    BufferTooSmall = 7,
    Overflow = 8,
    Panic = 9,
}

/// A parsed chart.
pub struct HaarChart {
    inner: Chart,
}

/// A chart with its normalized Haar density.
pub struct HaarDensity {
    inner: haar::HaarDensity,
}

/// A seeded Haar-uniform sampler.
pub struct HaarSampler {
    inner: Sampler,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> HaarStatus {
    match e {
        Error::Parse(_) => HaarStatus::Parse,
        Error::OutsideDomain { .. } | Error::StencilOutOfDomain { .. } => HaarStatus::Domain,
        Error::Io { .. } => HaarStatus::Io,
        e if e.is_numerical() => HaarStatus::Numerical,
        _ => HaarStatus::InvalidArgument,
    }
}

fn guard<F>(f: F) -> HaarStatus
where
    F: FnOnce() -> Result<(), (HaarStatus, String)>,
{
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            HaarStatus::Ok
        }
        Ok(Err((status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            HaarStatus::Panic
        }
    }
}

fn lib(e: Error) -> (HaarStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(name: &str) -> (HaarStatus, String) {
    (HaarStatus::NullPointer, format!("`{name}` is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, (HaarStatus, String)> {
    if p.is_null() {
        return Err(null(name));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (HaarStatus::InvalidArgument, format!("`{name}` is not UTF-8")))
}

unsafe fn slice_arg<'a>(p: *const f64, len: usize, name: &str) -> Result<&'a [f64], (HaarStatus, String)> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(name));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn write_matrix(m: &haar::Matrix, out: *mut f64, out_len: usize) -> Result<(), (HaarStatus, String)> {
    let need = m.nrows() * m.ncols();
    if out.is_null() {
        return Err(null("out"));
    }
    if out_len < need {
        return Err((HaarStatus::BufferTooSmall, format!("need {need} doubles, got {out_len}")));
    }
    let dst = std::slice::from_raw_parts_mut(out, need);
    for (k, x) in m.transpose().iter().enumerate() {
        dst[k] = *x;
    }
    Ok(())
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), (HaarStatus, String)> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

/// Message of the last failed call on this thread, or NULL. Valid until the
/// next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn haar_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Static description of a status code; unknown codes get a generic text.
#[no_mangle]
pub extern "C" fn haar_status_string(status: i32) -> *const c_char {
    let s: &'static [u8] = match status {
        0 => b"ok\0",
        1 => b"null pointer\0",
        2 => b"invalid argument\0",
        3 => b"parse error\0",
        4 => b"point outside chart domain\0",
        5 => b"numerical failure\0",
        6 => b"i/o error\0",
        7 => b"output buffer too small\0",
        8 => b"result does not fit\0",
        9 => b"internal panic\0",
        _ => b"unknown status\0",
    };
    s.as_ptr().cast()
}

/// Loads `builtin:<tag>` or a chart file.
///
/// # Safety
/// `spec` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn haar_chart_load(spec: *const c_char, out: *mut *mut HaarChart) -> HaarStatus {
    guard(|| {
        let spec = str_arg(spec, "spec")?;
        put(out, HaarChart {
            inner: Chart::load(spec).map_err(lib)?,
        })
    })
}

/// Parses chart source text.
///
/// # Safety
/// `source` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn haar_chart_parse(source: *const c_char, out: *mut *mut HaarChart) -> HaarStatus {
    guard(|| {
        let source = str_arg(source, "source")?;
        put(out, HaarChart {
            inner: Chart::parse(source).map_err(lib)?,
        })
    })
}

/// # Safety
/// `chart` must come from this library or be NULL.
#[no_mangle]
pub unsafe extern "C" fn haar_chart_free(chart: *mut HaarChart) {
    if !chart.is_null() {
        drop(Box::from_raw(chart));
    }
}

/// Number of chart parameters, 0 for NULL.
///
/// # Safety
/// `chart` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn haar_chart_param_count(chart: *const HaarChart) -> usize {
    chart.as_ref().map_or(0, |c| c.inner.param_count())
}

/// Size `D` of the chart's `D×D` matrices, 0 for NULL.
///
/// # Safety
/// `chart` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn haar_chart_matrix_dim(chart: *const HaarChart) -> usize {
    chart.as_ref().map_or(0, |c| c.inner.matrix_dim())
}

/// Writes `p(u)` row-major into `out`.
///
/// # Safety
/// `u` must hold `n` doubles and `out` `out_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn haar_chart_evaluate(
    chart: *const HaarChart,
    u: *const f64,
    n: usize,
    out: *mut f64,
    out_len: usize,
) -> HaarStatus {
    guard(|| {
        let chart = chart.as_ref().ok_or_else(|| null("chart"))?;
        let u = slice_arg(u, n, "u")?;
        write_matrix(&chart.inner.evaluate(u).map_err(lib)?, out, out_len)
    })
}

/// Numeric Maurer–Cartan density normalized with `nodes` Gauss–Legendre
/// points per axis. The chart handle stays owned by the caller.
///
/// # Safety
/// `chart` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn haar_density_new(
    chart: *const HaarChart,
    nodes: usize,
    out: *mut *mut HaarDensity,
) -> HaarStatus {
    guard(|| {
        let chart = chart.as_ref().ok_or_else(|| null("chart"))?;
        if nodes == 0 {
            return Err((HaarStatus::InvalidArgument, "nodes must be positive".into()));
        }
        let c = chart.inner.clone();
        let basis = algebra_basis(&c).map_err(lib)?;
        let rule = QuadratureRule::uniform(nodes, c.domain());
        let inner = haar::HaarDensity::normalize(c, basis, &rule).map_err(lib)?;
        put(out, HaarDensity { inner })
    })
}

/// Closed-form density of a built-in chart tag such as `so3-euler`.
///
/// # Safety
/// `tag` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn haar_density_closed_form(tag: *const c_char, out: *mut *mut HaarDensity) -> HaarStatus {
    guard(|| {
        let which: BuiltinChart = str_arg(tag, "tag")?.parse().map_err(lib)?;
        put(out, HaarDensity {
            inner: haar::HaarDensity::closed_form(which),
        })
    })
}

/// # Safety
/// `density` must come from this library or be NULL.
#[no_mangle]
pub unsafe extern "C" fn haar_density_free(density: *mut HaarDensity) {
    if !density.is_null() {
        drop(Box::from_raw(density));
    }
}

/// Normalized density `k(u)`.
///
/// # Safety
/// `u` must hold `n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn haar_density_value(
    density: *const HaarDensity,
    u: *const f64,
    n: usize,
    out: *mut f64,
) -> HaarStatus {
    guard(|| {
        let density = density.as_ref().ok_or_else(|| null("density"))?;
        let u = slice_arg(u, n, "u")?;
        let value = density.inner.value(u).map_err(lib)?;
        *out.as_mut().ok_or_else(|| null("out"))? = value;
        Ok(())
    })
}

/// The normalization constant `C`.
///
/// # Safety
/// `density` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn haar_density_normalization(density: *const HaarDensity, out: *mut f64) -> HaarStatus {
    guard(|| {
        let density = density.as_ref().ok_or_else(|| null("density"))?;
        *out.as_mut().ok_or_else(|| null("out"))? = density.inner.normalization();
        Ok(())
    })
}

/// Sampler for `group` (`so2`, `o2`, `so3`, `o3`) in a built-in chart.
///
/// # Safety
/// `group` and `chart` must be NUL-terminated strings; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn haar_sampler_new(
    group: *const c_char,
    chart: *const c_char,
    seed: u64,
    out: *mut *mut HaarSampler,
) -> HaarStatus {
    guard(|| {
        let group: GroupTag = str_arg(group, "group")?.parse().map_err(lib)?;
        let chart: BuiltinChart = str_arg(chart, "chart")?.parse().map_err(lib)?;
        let config = SamplerConfig::new(group, chart, seed, 1).map_err(lib)?;
        put(out, HaarSampler {
            inner: Sampler::new(config).map_err(lib)?,
        })
    })
}

/// # Safety
/// `sampler` must come from this library or be NULL.
#[no_mangle]
pub unsafe extern "C" fn haar_sampler_free(sampler: *mut HaarSampler) {
    if !sampler.is_null() {
        drop(Box::from_raw(sampler));
    }
}

/// Writes the next sample row-major (`D·D` doubles).
///
/// # Safety
/// `sampler` must be a live handle not used concurrently; `out` must hold
/// `out_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn haar_sampler_next(sampler: *mut HaarSampler, out: *mut f64, out_len: usize) -> HaarStatus {
    guard(|| {
        let sampler = sampler.as_mut().ok_or_else(|| null("sampler"))?;
        let g = sampler.inner.next_element().map_err(lib)?;
        write_matrix(g.matrix(), out, out_len)
    })
}

/// Exact dimension of the invariants of the `n`-th tensor power.
///
/// # Safety
/// `group` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn haar_dim_invariants(group: *const c_char, n: u32, out: *mut u64) -> HaarStatus {
    guard(|| {
        let group: GroupTag = str_arg(group, "group")?.parse().map_err(lib)?;
        let value = u64::try_from(&dim_invariants_closed(group, n))
            .map_err(|_| (HaarStatus::Overflow, format!("dimension for n = {n} exceeds 64 bits")))?;
        *out.as_mut().ok_or_else(|| null("out"))? = value;
        Ok(())
    })
}

/// The same dimension by the one-dimensional trace integral.
///
/// # Safety
/// `group` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn haar_dim_invariants_quadrature(group: *const c_char, n: u32, out: *mut f64) -> HaarStatus {
    guard(|| {
        let group: GroupTag = str_arg(group, "group")?.parse().map_err(lib)?;
        let value = dim_invariants_reduced(group, n, REDUCED_NODES).map_err(lib)?;
        *out.as_mut().ok_or_else(|| null("out"))? = value;
        Ok(())
    })
}
