//! C interface to the chain solvers.
//!
//! Every function returns a [`ChaindpStatus`]; on failure the message is
//! available from [`chaindp_last_error`] on the same thread. Handles are
//! opaque and must be released with their `_free` function. Strings
//! returned by the library are released with [`chaindp_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use chaindp::classical::solve_classical;
use chaindp::hamiltonian::{classicalize, parse_hamiltonian, Boundary, ChainHamiltonian, Preset};
use chaindp::meanfield::solve_mean_field;
use chaindp::mps::{estimate_cost, serialize_solution, solve_mps, MpsOptions, MpsSolution};
use chaindp::oracles::exact_diagonalize;
use chaindp::{Error, ErrorCategory};

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChaindpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    Resource = 3,
    Internal = 4,
    Panic = 5,
}

/// Opaque chain Hamiltonian.
pub struct ChaindpHamiltonian {
    inner: ChainHamiltonian,
}

/// Opaque result of the MPS net solver.
pub struct ChaindpMpsSolution {
    inner: MpsSolution,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> ChaindpStatus {
    match e.category() {
        ErrorCategory::Input => ChaindpStatus::InvalidInput,
        ErrorCategory::Resource => ChaindpStatus::Resource,
        ErrorCategory::Internal => ChaindpStatus::Internal,
    }
}

/// Run `f`, converting errors and panics into status codes.
fn guard<F>(f: F) -> ChaindpStatus
where
    F: FnOnce() -> Result<(), (ChaindpStatus, String)>,
{
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ChaindpStatus::Ok,
        Ok(Err((status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            ChaindpStatus::Panic
        }
    }
}

fn lift(e: Error) -> (ChaindpStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (ChaindpStatus, String) {
    (ChaindpStatus::NullPointer, format!("{what} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, (ChaindpStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (ChaindpStatus::InvalidInput, format!("{what} is not UTF-8")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, (ChaindpStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

/// Message of the last failed call on this thread, or null. Valid until
/// the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn chaindp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Build a preset chain (`ising_zz`, `heisenberg`, `aklt`, `tfim:g=<g>`).
///
/// # Safety
/// `name` must be a valid C string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn chaindp_hamiltonian_from_preset(
    name: *const c_char,
    n: usize,
    periodic: bool,
    out: *mut *mut ChaindpHamiltonian,
) -> ChaindpStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let preset: Preset = str_arg(name, "name")?.parse().map_err(lift)?;
        let boundary = if periodic { Boundary::Periodic } else { Boundary::Open };
        let inner = ChainHamiltonian::from_preset(preset, n, boundary).map_err(lift)?;
        *out = Box::into_raw(Box::new(ChaindpHamiltonian { inner }));
        Ok(())
    })
}

/// Parse a Hamiltonian JSON document.
///
/// # Safety
/// `json` must be a valid C string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn chaindp_hamiltonian_from_json(
    json: *const c_char,
    out: *mut *mut ChaindpHamiltonian,
) -> ChaindpStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let inner = parse_hamiltonian(str_arg(json, "json")?).map_err(lift)?;
        *out = Box::into_raw(Box::new(ChaindpHamiltonian { inner }));
        Ok(())
    })
}

/// # Safety
/// `h` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn chaindp_hamiltonian_free(h: *mut ChaindpHamiltonian) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Local dimension and chain length.
///
/// # Safety
/// `h`, `d` and `n` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn chaindp_hamiltonian_shape(
    h: *const ChaindpHamiltonian,
    d: *mut usize,
    n: *mut usize,
) -> ChaindpStatus {
    guard(|| {
        let h = handle(h, "h")?;
        if d.is_null() || n.is_null() {
            return Err(null("output"));
        }
        *d = h.inner.d();
        *n = h.inner.n();
        Ok(())
    })
}

/// Ground energy by dense diagonalization.
///
/// # Safety
/// `h` and `energy` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn chaindp_exact_ground_energy(
    h: *const ChaindpHamiltonian,
    energy: *mut f64,
) -> ChaindpStatus {
    guard(|| {
        let h = handle(h, "h")?;
        if energy.is_null() {
            return Err(null("energy"));
        }
        *energy = exact_diagonalize(&h.inner).map_err(lift)?.ground_energy;
        Ok(())
    })
}

/// Exact minimum of a diagonal chain; writes `N` spin values into
/// `configuration` (capacity `len`).
///
/// # Safety
/// `configuration` must hold `len` entries; other pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn chaindp_solve_classical(
    h: *const ChaindpHamiltonian,
    energy: *mut f64,
    configuration: *mut usize,
    len: usize,
) -> ChaindpStatus {
    guard(|| {
        let h = handle(h, "h")?;
        if energy.is_null() || configuration.is_null() {
            return Err(null("output"));
        }
        if len < h.inner.n() {
            return Err((ChaindpStatus::InvalidInput, format!("configuration needs {} entries", h.inner.n())));
        }
        let c = classicalize(&h.inner).map_err(lift)?;
        let s = solve_classical(&c);
        *energy = h.inner.scale() * s.energy;
        std::slice::from_raw_parts_mut(configuration, len)[..s.configuration.len()]
            .copy_from_slice(&s.configuration);
        Ok(())
    })
}

/// Best product state energy to accuracy `delta`.
///
/// # Safety
/// `h` and `energy` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn chaindp_solve_mean_field(
    h: *const ChaindpHamiltonian,
    delta: f64,
    energy: *mut f64,
) -> ChaindpStatus {
    guard(|| {
        let h = handle(h, "h")?;
        if energy.is_null() {
            return Err(null("energy"));
        }
        *energy = solve_mean_field(&h.inner, delta).map_err(lift)?.energy;
        Ok(())
    })
}

/// MPS net solver at bond dimension `bond_dim` with explicit net radii.
///
/// # Safety
/// `h` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn chaindp_solve_mps(
    h: *const ChaindpHamiltonian,
    bond_dim: usize,
    eps_rho: f64,
    eps_a: f64,
    out: *mut *mut ChaindpMpsSolution,
) -> ChaindpStatus {
    guard(|| {
        let h = handle(h, "h")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let options = MpsOptions::new(bond_dim).with_epsilons(eps_rho, eps_a);
        let inner = solve_mps(&h.inner, &options).map_err(lift)?;
        *out = Box::into_raw(Box::new(ChaindpMpsSolution { inner }));
        Ok(())
    })
}

/// Energy of the returned state and the error budget of the nets used.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn chaindp_mps_solution_energy(
    s: *const ChaindpMpsSolution,
    energy: *mut f64,
    budget: *mut f64,
) -> ChaindpStatus {
    guard(|| {
        let s = handle(s, "s")?;
        if energy.is_null() || budget.is_null() {
            return Err(null("output"));
        }
        *energy = s.inner.energy;
        *budget = s.inner.bounds.total;
        Ok(())
    })
}

/// JSON export of the solution; release with [`chaindp_string_free`].
///
/// # Safety
/// `s` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn chaindp_mps_solution_json(
    s: *const ChaindpMpsSolution,
    out: *mut *mut c_char,
) -> ChaindpStatus {
    guard(|| {
        let s = handle(s, "s")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let text = CString::new(serialize_solution(&s.inner)).expect("JSON has no nul bytes");
        *out = text.into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn chaindp_mps_solution_free(s: *mut ChaindpMpsSolution) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// # Safety
/// `s` must be a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn chaindp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Base-10 logarithms of the mean-field and MPS operation counts.
///
/// # Safety
/// Output pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn chaindp_cost_log10(
    n: u64,
    d: u64,
    bond_dim: u64,
    delta: f64,
    mean_field: *mut f64,
    mps: *mut f64,
) -> ChaindpStatus {
    guard(|| {
        if mean_field.is_null() || mps.is_null() {
            return Err(null("output"));
        }
        let r = estimate_cost(n, d, bond_dim, delta).map_err(lift)?;
        *mean_field = r.mean_field.log10;
        *mps = r.mps.log10;
        Ok(())
    })
}
