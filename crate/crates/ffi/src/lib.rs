//! C ABI over `corona-core`.
//!
//! Every function returns a [`CoronaStatus`]; results go through out
//! pointers. On failure the message is kept per thread and read with
//! [`corona_last_error_message`]. Parameter sets live behind the opaque
//! [`CoronaParams`] handle, released with [`corona_params_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use corona_core::continuation::{monodromy_loop, topology, PathSpec};
use corona_core::corona::verify_data;
use corona_core::interp::{choose_root_order, interp_lb, AnnulusRegime};
use corona_core::surface::sample_surface;
use corona_core::trace::certify_lb;
use corona_core::{Complex64, Error, Params};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoronaStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    ParameterOrder = 3,
    OutOfDomain = 4,
    Underflow = 5,
    DataViolation = 6,
    InvariantViolation = 7,
    NonConvergence = 8,
    NumericalFailure = 9,
    Panic = 10,
}

impl From<&Error> for CoronaStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::InvalidParameter(_) | Error::SamplingStarvation { .. } | Error::RankDeficient { .. } => {
                CoronaStatus::InvalidParameter
            }
            Error::ParameterOrder { .. } => CoronaStatus::ParameterOrder,
            Error::OutOfDomain { .. } | Error::PathOutsideDomain { .. } | Error::Pole { .. } => CoronaStatus::OutOfDomain,
            Error::Underflow { .. } => CoronaStatus::Underflow,
            Error::DataViolation { .. } => CoronaStatus::DataViolation,
            Error::InvariantViolation(_) => CoronaStatus::InvariantViolation,
            Error::NonConvergence { .. } => CoronaStatus::NonConvergence,
            Error::StepUnderflow { .. } => CoronaStatus::NumericalFailure,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

/// Runs `f`, recording errors and panics.
fn guard<F>(f: F) -> CoronaStatus
where
    F: FnOnce() -> Result<(), CoronaFailure>,
{
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CoronaStatus::Ok,
        Ok(Err(CoronaFailure::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            CoronaStatus::NullPointer
        }
        Ok(Err(CoronaFailure::Core(e))) => {
            set_error(e.to_string());
            CoronaStatus::from(&e)
        }
        Err(_) => {
            set_error("panic inside corona-ffi".into());
            CoronaStatus::Panic
        }
    }
}

enum CoronaFailure {
    Null(&'static str),
    Core(Error),
}

impl From<Error> for CoronaFailure {
    fn from(e: Error) -> Self {
        CoronaFailure::Core(e)
    }
}

fn out_ref<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, CoronaFailure> {
    // SAFETY: the caller passes either null or a valid, writable pointer.
    unsafe { p.as_mut() }.ok_or(CoronaFailure::Null(what))
}

fn params_ref<'a>(p: *const CoronaParams) -> Result<&'a Params, CoronaFailure> {
    // SAFETY: non-null handles come from a constructor and are not yet freed.
    unsafe { p.as_ref() }.map(|h| &h.0).ok_or(CoronaFailure::Null("params"))
}

/// Opaque parameter set.
pub struct CoronaParams(Params);

fn store(out: *mut *mut CoronaParams, p: Params) -> Result<(), CoronaFailure> {
    let slot = out_ref(out, "out")?;
    *slot = Box::into_raw(Box::new(CoronaParams(p)));
    Ok(())
}

/// Parameters from `(δ, M)` with the smallest admissible `n`.
#[no_mangle]
pub extern "C" fn corona_params_delta_chain(delta: f64, m: f64, out: *mut *mut CoronaParams) -> CoronaStatus {
    guard(|| store(out, Params::delta_chain(delta, m)?))
}

/// Parameters `(n, c, d)` given directly.
#[no_mangle]
pub extern "C" fn corona_params_direct(n: u32, c: f64, d: f64, out: *mut *mut CoronaParams) -> CoronaStatus {
    guard(|| store(out, Params::direct(n, c, d)?))
}

/// Releases a handle; null is ignored.
///
/// # Safety
/// `p` must be null or a handle from a constructor that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn corona_params_free(p: *mut CoronaParams) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CoronaParamValues {
    pub n: u32,
    pub c: f64,
    pub d: f64,
    pub log_c: f64,
    pub log_d: f64,
    pub underflow: bool,
    pub validated: bool,
}

#[no_mangle]
pub extern "C" fn corona_params_get(p: *const CoronaParams, out: *mut CoronaParamValues) -> CoronaStatus {
    guard(|| {
        let p = params_ref(p)?;
        *out_ref(out, "out")? = CoronaParamValues {
            n: p.n,
            c: p.c,
            d: p.d,
            log_c: p.log_c,
            log_d: p.log_d,
            underflow: p.underflow,
            validated: p.validated,
        };
        Ok(())
    })
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CoronaCertificate {
    pub term_outer: f64,
    pub term_inner: f64,
    pub lb_sharp: f64,
    /// NaN unless `has_lb_paper`.
    pub lb_paper: f64,
    pub has_lb_paper: bool,
}

/// Lower bounds on `‖G1‖` for any corona solution.
#[no_mangle]
pub extern "C" fn corona_certify(p: *const CoronaParams, out: *mut CoronaCertificate) -> CoronaStatus {
    guard(|| {
        let cert = certify_lb(params_ref(p)?)?;
        *out_ref(out, "out")? = CoronaCertificate {
            term_outer: cert.term_outer,
            term_inner: cert.term_inner,
            lb_sharp: cert.lb_sharp,
            lb_paper: cert.lb_paper.unwrap_or(f64::NAN),
            has_lb_paper: cert.lb_paper.is_some(),
        };
        Ok(())
    })
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CoronaDataReport {
    pub min_of_max: f64,
    pub max_of_max: f64,
    pub surface_points: usize,
}

/// Samples `base_points` points of `D2`, lifts them and checks the data bounds.
#[no_mangle]
pub extern "C" fn corona_verify(
    p: *const CoronaParams,
    base_points: usize,
    seed: u64,
    out: *mut CoronaDataReport,
) -> CoronaStatus {
    guard(|| {
        let p = params_ref(p)?;
        let report = verify_data(&sample_surface(p, base_points, seed)?, p)?;
        *out_ref(out, "out")? = CoronaDataReport {
            min_of_max: report.min_of_max,
            max_of_max: report.max_of_max,
            surface_points: report.samples,
        };
        Ok(())
    })
}

/// Lower bound on the norm of any annulus interpolant.
#[no_mangle]
pub extern "C" fn corona_interp_lb(eps: f64, n: u32, out: *mut f64) -> CoronaStatus {
    guard(|| {
        let r = AnnulusRegime::new(eps, n)?;
        *out_ref(out, "out")? = interp_lb(&r);
        Ok(())
    })
}

/// Root order `N` and the certified minimum modulus it rests on.
#[no_mangle]
pub extern "C" fn corona_choose_root_order(n: u32, out_order: *mut u32, out_min_modulus: *mut f64) -> CoronaStatus {
    guard(|| {
        let ro = choose_root_order(n)?;
        *out_ref(out_order, "out_order")? = ro.big_n;
        *out_ref(out_min_modulus, "out_min_modulus")? = ro.certified_min_modulus;
        Ok(())
    })
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CoronaTopology {
    pub euler: i64,
    pub boundary_components: u64,
    pub genus: i64,
}

#[no_mangle]
pub extern "C" fn corona_topology(p: *const CoronaParams, out: *mut CoronaTopology) -> CoronaStatus {
    guard(|| {
        let t = topology(params_ref(p)?)?;
        *out_ref(out, "out")? = CoronaTopology {
            euler: t.euler,
            boundary_components: t.boundary_components,
            genus: t.genus,
        };
        Ok(())
    })
}

/// Sheet offset of the closed polygon with vertices `re[i] + i·im[i]`.
///
/// # Safety
/// `re` and `im` must each point to `len` readable doubles.
#[no_mangle]
pub unsafe extern "C" fn corona_monodromy(
    p: *const CoronaParams,
    re: *const f64,
    im: *const f64,
    len: usize,
    out: *mut u32,
) -> CoronaStatus {
    guard(|| {
        let p = params_ref(p)?;
        if re.is_null() {
            return Err(CoronaFailure::Null("re"));
        }
        if im.is_null() {
            return Err(CoronaFailure::Null("im"));
        }
        if len < 3 {
            return Err(Error::InvalidParameter("a loop needs at least 3 vertices".into()).into());
        }
        let (re, im) = (std::slice::from_raw_parts(re, len), std::slice::from_raw_parts(im, len));
        let verts = re.iter().zip(im).map(|(a, b)| Complex64::new(*a, *b)).collect();
        *out_ref(out, "out")? = monodromy_loop(&PathSpec::closed(verts), p)?;
        Ok(())
    })
}

/// Message of the last failure on this thread, or null. Valid until the
/// next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn corona_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}
