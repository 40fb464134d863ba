//! C ABI for chaosadapt.
//!
//! Objects are opaque handles created by `ca_*_new`/`ca_*_read_*`/`ca_adapt_*`
//! and released with the matching `ca_*_free`. Every fallible call returns a
//! [`CaStatus`]; on failure [`ca_last_error`] holds a message for the calling
//! thread. Matrices are passed row-major.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use chaosadapt::adaptation::{adapt_successive, AdaptConfig, AdaptedExpansion};
use chaosadapt::chaos::{count_basis, expansion_moments, hermite_normalized};
use chaosadapt::io::{read_dataset_csv, ColumnSchema, ExpansionDocument};
use chaosadapt::nalgebra::{DMatrix, DVector};
use chaosadapt::{Dataset, Error};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    Infeasible = 4,
    NumericalFailure = 5,
    Io = 6,
    Parse = 7,
    Format = 8,
    OutOfBounds = 9,
    Panic = 10,
}

/// Samples and observations.
pub struct CaDataset(Dataset);

/// Results of a successive adaptation, one per reduced dimension.
pub struct CaRun(Vec<AdaptedExpansion>);

/// One adapted expansion `u(ξ) ≈ Σ c_k ψ_k(Wξ)`.
pub struct CaExpansion(AdaptedExpansion);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(CaStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::DimensionMismatch { .. } => CaStatus::DimensionMismatch,
            Error::InfeasibleEpsilon { .. } | Error::AllGridInfeasible { .. } => CaStatus::Infeasible,
            Error::SvdFailure
            | Error::ProjectionNoConvergence { .. }
            | Error::RankCollapse { .. }
            | Error::NewtonNoConvergence { .. } => CaStatus::NumericalFailure,
            Error::Io(_) | Error::File { .. } => CaStatus::Io,
            Error::Parse { .. } | Error::Csv(_) | Error::Json(_) => CaStatus::Parse,
            Error::Format(_) => CaStatus::Format,
            Error::OutOfRange { .. } => CaStatus::OutOfBounds,
            _ => CaStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

fn fail(status: CaStatus, msg: impl Into<String>) -> Failure {
    Failure(status, msg.into())
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> CaStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CaStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            CaStatus::Panic
        }
    }
}

unsafe fn get<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| fail(CaStatus::NullPointer, format!("{what} is null")))
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(fail(CaStatus::NullPointer, format!("{what} is null")));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut<'a>(p: *mut f64, len: usize, what: &str) -> Result<&'a mut [f64], Failure> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(fail(CaStatus::NullPointer, format!("{what} is null")));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(fail(CaStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(CaStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(fail(CaStatus::NullPointer, "output handle pointer is null"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

fn checked_len(a: usize, b: usize) -> Result<usize, Failure> {
    a.checked_mul(b)
        .ok_or_else(|| fail(CaStatus::InvalidArgument, "size overflow"))
}

/// Message of the last failed call on this thread, or NULL. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ca_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Frees a string returned by this library.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn ca_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Number of total-degree multi-indices in `dim` variables up to `order`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ca_count_basis(dim: usize, order: usize, out: *mut usize) -> CaStatus {
    guard(|| {
        let n = count_basis(dim, order)?;
        if out.is_null() {
            return Err(fail(CaStatus::NullPointer, "out is null"));
        }
        *out = n;
        Ok(())
    })
}

/// Orthonormal probabilists' Hermite polynomial of degree `n` at `x`.
#[no_mangle]
pub extern "C" fn ca_hermite(n: usize, x: f64) -> f64 {
    hermite_normalized(n, x)
}

/// Dataset from `n × dim` row-major inputs and `n` outputs.
///
/// # Safety
/// `inputs` must hold `n * dim` values, `outputs` `n` values.
#[no_mangle]
pub unsafe extern "C" fn ca_dataset_new(
    inputs: *const f64,
    outputs: *const f64,
    n: usize,
    dim: usize,
    out: *mut *mut CaDataset,
) -> CaStatus {
    guard(|| {
        let x = slice(inputs, checked_len(n, dim)?, "inputs")?;
        let u = slice(outputs, n, "outputs")?;
        let data = Dataset::new(DMatrix::from_row_slice(n, dim, x), DVector::from_column_slice(u))?;
        put(out, CaDataset(data))
    })
}

/// Reads a dataset CSV (`xi_1,…,xi_d,u` layout).
///
/// # Safety
/// `path` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn ca_dataset_read_csv(path: *const c_char, out: *mut *mut CaDataset) -> CaStatus {
    guard(|| {
        let p = text(path, "path")?;
        let data = read_dataset_csv(Path::new(p), &ColumnSchema::default())?;
        put(out, CaDataset(data))
    })
}

/// # Safety
/// `ds` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn ca_dataset_len(ds: *const CaDataset) -> usize {
    ds.as_ref().map_or(0, |d| d.0.len())
}

/// # Safety
/// `ds` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn ca_dataset_dim(ds: *const CaDataset) -> usize {
    ds.as_ref().map_or(0, |d| d.0.dimension())
}

/// # Safety
/// `ds` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn ca_dataset_free(ds: *mut CaDataset) {
    if !ds.is_null() {
        drop(Box::from_raw(ds));
    }
}

/// Fits reduced dimensions `1..=max_reduced` at polynomial order `order`.
/// `config_json` may be NULL for defaults; otherwise a JSON object whose
/// fields override the defaults (`{"seed": 3, "dr": {"gamma": 0.1}}`).
///
/// # Safety
/// `ds` must be a live handle, `config_json` NULL or NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn ca_adapt_successive(
    ds: *const CaDataset,
    max_reduced: usize,
    order: usize,
    config_json: *const c_char,
    out: *mut *mut CaRun,
) -> CaStatus {
    guard(|| {
        let data = get(ds, "dataset")?;
        let config: AdaptConfig = if config_json.is_null() {
            AdaptConfig::default()
        } else {
            serde_json::from_str(text(config_json, "config")?)
                .map_err(|e| fail(CaStatus::Parse, format!("config: {e}")))?
        };
        let results = adapt_successive(&data.0, max_reduced, order, &config)?;
        put(out, CaRun(results))
    })
}

/// # Safety
/// `run` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn ca_run_len(run: *const CaRun) -> usize {
    run.as_ref().map_or(0, |r| r.0.len())
}

/// Copies result `index` (reduced dimension `index + 1`) into a new handle.
///
/// # Safety
/// `run` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ca_run_get(run: *const CaRun, index: usize, out: *mut *mut CaExpansion) -> CaStatus {
    guard(|| {
        let r = get(run, "run")?;
        let e = r.0.get(index).ok_or_else(|| {
            fail(
                CaStatus::OutOfBounds,
                format!("index {index} out of bounds for {} results", r.0.len()),
            )
        })?;
        put(out, CaExpansion(e.clone()))
    })
}

/// # Safety
/// `run` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn ca_run_free(run: *mut CaRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

/// Shape of an expansion. Any output pointer may be NULL.
///
/// # Safety
/// `e` must be a live handle; non-NULL outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn ca_expansion_shape(
    e: *const CaExpansion,
    reduced_dim: *mut usize,
    input_dim: *mut usize,
    order: *mut usize,
    n_coefficients: *mut usize,
) -> CaStatus {
    guard(|| {
        let e = &get(e, "expansion")?.0;
        for (p, v) in [
            (reduced_dim, e.reduced_dim()),
            (input_dim, e.input_dim()),
            (order, e.order()),
            (n_coefficients, e.expansion.coefficients().len()),
        ] {
            if !p.is_null() {
                *p = v;
            }
        }
        Ok(())
    })
}

/// Copies the `reduced_dim × input_dim` projection, row-major.
///
/// # Safety
/// `out` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn ca_expansion_projection(e: *const CaExpansion, out: *mut f64, len: usize) -> CaStatus {
    guard(|| {
        let e = &get(e, "expansion")?.0;
        let rows = e.projection.rows().concat();
        if len != rows.len() {
            return Err(fail(
                CaStatus::DimensionMismatch,
                format!("projection has {} entries, buffer {len}", rows.len()),
            ));
        }
        slice_mut(out, len, "out")?.copy_from_slice(&rows);
        Ok(())
    })
}

/// Copies the coefficients in graded multi-index order.
///
/// # Safety
/// `out` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn ca_expansion_coefficients(e: *const CaExpansion, out: *mut f64, len: usize) -> CaStatus {
    guard(|| {
        let c = get(e, "expansion")?.0.expansion.coefficients();
        if len != c.len() {
            return Err(fail(
                CaStatus::DimensionMismatch,
                format!("{} coefficients, buffer {len}", c.len()),
            ));
        }
        slice_mut(out, len, "out")?.copy_from_slice(c);
        Ok(())
    })
}

/// Evaluates at `n` points given row-major as `n × dim`.
///
/// # Safety
/// `points` must hold `n * dim` values and `out` `n` values.
#[no_mangle]
pub unsafe extern "C" fn ca_expansion_evaluate(
    e: *const CaExpansion,
    points: *const f64,
    n: usize,
    dim: usize,
    out: *mut f64,
) -> CaStatus {
    guard(|| {
        let e = &get(e, "expansion")?.0;
        if dim != e.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: e.input_dim(),
                actual: dim,
                context: "point dimension",
            }
            .into());
        }
        let x = slice(points, checked_len(n, dim)?, "points")?;
        let dst = slice_mut(out, n, "out")?;
        if n == 0 {
            return Ok(());
        }
        let values = e.evaluate_many(&DMatrix::from_row_slice(n, dim, x))?;
        dst.copy_from_slice(&values);
        Ok(())
    })
}

/// Mean and variance under standard Gaussian inputs.
///
/// # Safety
/// `mean` and `variance` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ca_expansion_moments(e: *const CaExpansion, mean: *mut f64, variance: *mut f64) -> CaStatus {
    guard(|| {
        let e = &get(e, "expansion")?.0;
        if mean.is_null() || variance.is_null() {
            return Err(fail(CaStatus::NullPointer, "mean or variance is null"));
        }
        let (m, v) = expansion_moments(&e.expansion);
        *mean = m;
        *variance = v;
        Ok(())
    })
}

/// Serializes to the expansion document format. Free with `ca_string_free`.
///
/// # Safety
/// `e` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ca_expansion_to_json(e: *const CaExpansion, out: *mut *mut c_char) -> CaStatus {
    guard(|| {
        let e = &get(e, "expansion")?.0;
        let s = serde_json::to_string_pretty(&ExpansionDocument::from_adapted(e))
            .map_err(|err| fail(CaStatus::Format, err.to_string()))?;
        if out.is_null() {
            return Err(fail(CaStatus::NullPointer, "out is null"));
        }
        *out = CString::new(s)
            .map_err(|_| fail(CaStatus::Format, "embedded NUL"))?
            .into_raw();
        Ok(())
    })
}

/// Parses an expansion document.
///
/// # Safety
/// `json` must be NUL-terminated and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ca_expansion_from_json(json: *const c_char, out: *mut *mut CaExpansion) -> CaStatus {
    guard(|| {
        let doc: ExpansionDocument =
            serde_json::from_str(text(json, "json")?).map_err(|e| fail(CaStatus::Parse, e.to_string()))?;
        put(out, CaExpansion(doc.into_adapted()?))
    })
}

/// # Safety
/// `e` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn ca_expansion_free(e: *mut CaExpansion) {
    if !e.is_null() {
        drop(Box::from_raw(e));
    }
}
