//! C ABI for the boundary detector: opaque handles, integer error codes, and
//! caller-owned output buffers. The matching header lives in `include/`.

use std::ffi::CStr;
use std::os::raw::{c_char, c_double, c_int};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use bdlle::bdlle::{BoundaryReport, Regularizer};
use bdlle::pointcloud::{NeighborParams, PointCloud};
use bdlle::Error;

/// Error codes shared with the C header.
pub const BDLLE_OK: c_int = 0;
pub const BDLLE_ERR_NULL_ARGUMENT: c_int = 1;
pub const BDLLE_ERR_INVALID_INPUT: c_int = 2;
pub const BDLLE_ERR_EMPTY_NEIGHBORHOOD: c_int = 3;
pub const BDLLE_ERR_NUMERICAL: c_int = 4;
pub const BDLLE_ERR_IO: c_int = 5;
pub const BDLLE_ERR_BUFFER_TOO_SMALL: c_int = 6;
pub const BDLLE_ERR_PANIC: c_int = 7;

/// Opaque point-cloud handle.
pub struct BdlleCloud(PointCloud);

/// Opaque detection-result handle.
pub struct BdlleReport(BoundaryReport);

fn error_code(err: &Error) -> c_int {
    match err {
        Error::InvalidCloud(_) | Error::InvalidParams(_) | Error::Parse(_) => {
            BDLLE_ERR_INVALID_INPUT
        }
        Error::EmptyNeighborhood { .. } => BDLLE_ERR_EMPTY_NEIGHBORHOOD,
        Error::Io(_) => BDLLE_ERR_IO,
        _ => BDLLE_ERR_NUMERICAL,
    }
}

fn guard<F: FnOnce() -> c_int>(f: F) -> c_int {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or(BDLLE_ERR_PANIC)
}

/// Creates a cloud from a row-major `n x p` buffer. On success writes the
/// new handle to `out`.
///
/// # Safety
/// `data` must point to `n * p` doubles and `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bdlle_cloud_create(
    data: *const c_double,
    n: usize,
    p: usize,
    out: *mut *mut BdlleCloud,
) -> c_int {
    if data.is_null() || out.is_null() {
        return BDLLE_ERR_NULL_ARGUMENT;
    }
    guard(|| {
        let slice = std::slice::from_raw_parts(data, n * p);
        match PointCloud::new(slice.to_vec(), n, p) {
            Ok(cloud) => {
                *out = Box::into_raw(Box::new(BdlleCloud(cloud)));
                BDLLE_OK
            }
            Err(e) => error_code(&e),
        }
    })
}

/// Loads a cloud from a CSV file (same format the CLI emits).
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bdlle_cloud_load_csv(
    path: *const c_char,
    out: *mut *mut BdlleCloud,
) -> c_int {
    if path.is_null() || out.is_null() {
        return BDLLE_ERR_NULL_ARGUMENT;
    }
    guard(|| {
        let Ok(path) = CStr::from_ptr(path).to_str() else {
            return BDLLE_ERR_INVALID_INPUT;
        };
        match PointCloud::load_csv(Path::new(path)) {
            Ok(cloud) => {
                *out = Box::into_raw(Box::new(BdlleCloud(cloud)));
                BDLLE_OK
            }
            Err(e) => error_code(&e),
        }
    })
}

/// Number of points in the cloud; 0 for a null handle.
#[no_mangle]
pub extern "C" fn bdlle_cloud_len(cloud: *const BdlleCloud) -> usize {
    if cloud.is_null() {
        return 0;
    }
    unsafe { (*cloud).0.n() }
}

/// Ambient dimension of the cloud; 0 for a null handle.
#[no_mangle]
pub extern "C" fn bdlle_cloud_dim(cloud: *const BdlleCloud) -> usize {
    if cloud.is_null() {
        return 0;
    }
    unsafe { (*cloud).0.p() }
}

/// Releases a cloud handle. Null is a no-op.
#[no_mangle]
pub extern "C" fn bdlle_cloud_free(cloud: *mut BdlleCloud) {
    if !cloud.is_null() {
        drop(unsafe { Box::from_raw(cloud) });
    }
}

unsafe fn run_detection(
    cloud: *const BdlleCloud,
    params: NeighborParams,
    d: usize,
    c: c_double,
    threshold_frac: c_double,
    out: *mut *mut BdlleReport,
) -> c_int {
    if cloud.is_null() || out.is_null() {
        return BDLLE_ERR_NULL_ARGUMENT;
    }
    let reg = if c > 0.0 {
        Regularizer {
            c,
            provenance: bdlle::bdlle::RegProvenance::Explicit,
        }
    } else {
        // Non-positive c requests the automatic data-driven choice, which
        // needs the intrinsic dimension d.
        if d == 0 {
            return BDLLE_ERR_INVALID_INPUT;
        }
        let index = bdlle::pointcloud::NeighborIndex::build(&(*cloud).0);
        let nbrs = match bdlle::pointcloud::all_neighbors(&index, params) {
            Ok(n) => n,
            Err(e) => return error_code(&e),
        };
        match bdlle::bdlle::select_regularizer(&(*cloud).0, &nbrs, d, 0.01) {
            Ok(r) => r,
            Err(e) => return error_code(&e),
        }
    };
    match bdlle::bdlle::detect_boundary(&(*cloud).0, params, reg, threshold_frac) {
        Ok(report) => {
            *out = Box::into_raw(Box::new(BdlleReport(report)));
            BDLLE_OK
        }
        Err(e) => error_code(&e),
    }
}

/// Runs detection with an epsilon-ball neighborhood. `c <= 0` selects the
/// regularizer automatically from the intrinsic dimension `d` (ignored
/// otherwise); `threshold_frac` is the kept fraction of the maximum
/// indicator (0.5 reproduces the reference setting).
///
/// # Safety
/// `cloud` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn bdlle_detect_epsilon(
    cloud: *const BdlleCloud,
    epsilon: c_double,
    d: usize,
    c: c_double,
    threshold_frac: c_double,
    out: *mut *mut BdlleReport,
) -> c_int {
    guard(|| run_detection(cloud, NeighborParams::EpsilonBall { epsilon }, d, c, threshold_frac, out))
}

/// Runs detection with a K-nearest-neighbor neighborhood (ties included).
/// Parameters behave as in [`bdlle_detect_epsilon`].
///
/// # Safety
/// `cloud` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn bdlle_detect_knn(
    cloud: *const BdlleCloud,
    k: usize,
    d: usize,
    c: c_double,
    threshold_frac: c_double,
    out: *mut *mut BdlleReport,
) -> c_int {
    guard(|| run_detection(cloud, NeighborParams::Knn { k }, d, c, threshold_frac, out))
}

/// Number of detected boundary points; 0 for a null handle.
#[no_mangle]
pub extern "C" fn bdlle_report_len(report: *const BdlleReport) -> usize {
    if report.is_null() {
        return 0;
    }
    unsafe { (*report).0.boundary_indices.len() }
}

/// Copies the detected indices into `buf` (capacity `cap`).
///
/// # Safety
/// `buf` must point to at least `cap` writable `size_t` slots.
#[no_mangle]
pub unsafe extern "C" fn bdlle_report_indices(
    report: *const BdlleReport,
    buf: *mut usize,
    cap: usize,
) -> c_int {
    if report.is_null() || buf.is_null() {
        return BDLLE_ERR_NULL_ARGUMENT;
    }
    let indices = &(*report).0.boundary_indices;
    if cap < indices.len() {
        return BDLLE_ERR_BUFFER_TOO_SMALL;
    }
    ptr::copy_nonoverlapping(indices.as_ptr(), buf, indices.len());
    BDLLE_OK
}

/// Copies the per-point indicator values (length = cloud size) into `buf`.
///
/// # Safety
/// `buf` must point to at least `cap` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn bdlle_report_indicator(
    report: *const BdlleReport,
    buf: *mut c_double,
    cap: usize,
) -> c_int {
    if report.is_null() || buf.is_null() {
        return BDLLE_ERR_NULL_ARGUMENT;
    }
    let values = &(*report).0.indicator.values;
    if cap < values.len() {
        return BDLLE_ERR_BUFFER_TOO_SMALL;
    }
    ptr::copy_nonoverlapping(values.as_ptr(), buf, values.len());
    BDLLE_OK
}

/// Detection threshold actually applied (fraction of the max indicator).
#[no_mangle]
pub extern "C" fn bdlle_report_threshold(report: *const BdlleReport) -> c_double {
    if report.is_null() {
        return f64::NAN;
    }
    unsafe { (*report).0.threshold }
}

/// Regularizer value actually used.
#[no_mangle]
pub extern "C" fn bdlle_report_regularizer(report: *const BdlleReport) -> c_double {
    if report.is_null() {
        return f64::NAN;
    }
    unsafe { (*report).0.indicator.c.c }
}

/// Releases a report handle. Null is a no-op.
#[no_mangle]
pub extern "C" fn bdlle_report_free(report: *mut BdlleReport) {
    if !report.is_null() {
        drop(unsafe { Box::from_raw(report) });
    }
}
