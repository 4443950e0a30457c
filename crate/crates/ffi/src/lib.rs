//! C ABI over `flho`.
//!
//! Every function returns an [`FlhoStatus`]; on failure a message is kept in
//! thread-local storage and can be read with [`flho_last_error`]. Spectra are
//! handed out as opaque [`FlhoSpectrum`] pointers owned by the caller and
//! released with [`flho_spectrum_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use flho::liealg::{self, StructureConstants, Verdict};
use flho::oscillator::{spectrum, BandedHamiltonian, Parity, SpectrumOptions, SpectrumResult};
use flho::su2rep::make_constants;
use flho::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlhoStatus {
    Ok = 0,
    InvalidArgument = 1,
    NumericalFailure = 2,
    Io = 3,
    NullPointer = 4,
    Panic = 5,
}

/// Computed spectrum of `H = (K/2)(Lx² + κ²Ly²)`.
pub struct FlhoSpectrum {
    inner: SpectrumResult,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct FlhoConstants {
    pub hbar: f64,
    pub hbar1: f64,
    pub hbar2: f64,
    pub mass: f64,
    pub stiffness: f64,
    pub q: f64,
    pub p: f64,
    pub j: f64,
    pub l: u64,
    pub k_energy: f64,
    pub kappa: f64,
    pub omega: f64,
    /// Factor applied to hbar1 and hbar2 so that l is an integer.
    pub rescale: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct FlhoKillingReport {
    pub jacobi_defect: f64,
    pub killing_det: f64,
    pub killing_rank: u32,
    /// 1 when the Killing form is nondegenerate.
    pub semisimple: u32,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> FlhoStatus {
    match e {
        Error::NoConvergence { .. } | Error::Numerical(_) => FlhoStatus::NumericalFailure,
        Error::Io(_) => FlhoStatus::Io,
        _ => FlhoStatus::InvalidArgument,
    }
}

/// Runs `f`, converting errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), (FlhoStatus, String)>) -> FlhoStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            FlhoStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string());
            set_error(&format!("internal panic: {msg}"));
            FlhoStatus::Panic
        }
    }
}

fn lib<T>(r: flho::Result<T>) -> Result<T, (FlhoStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(name: &str) -> (FlhoStatus, String) {
    (FlhoStatus::NullPointer, format!("{name} is null"))
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next `flho_*` call on the same thread.
#[no_mangle]
pub extern "C" fn flho_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn flho_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Computes the spectrum for `(l, K, κ)`. `lowest = 0` requests every eigenvalue.
///
/// # Safety
/// `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn flho_spectrum_new(
    l: u64,
    k_energy: f64,
    kappa: f64,
    lowest: usize,
    out: *mut *mut FlhoSpectrum,
) -> FlhoStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let h = lib(BandedHamiltonian::new(l, k_energy, kappa))?;
        let inner = lib(spectrum(
            &h,
            SpectrumOptions {
                lowest: (lowest > 0).then_some(lowest),
                ..Default::default()
            },
        ))?;
        *out = Box::into_raw(Box::new(FlhoSpectrum { inner }));
        Ok(())
    })
}

/// # Safety
/// `spec` must be null or a pointer from [`flho_spectrum_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn flho_spectrum_free(spec: *mut FlhoSpectrum) {
    if !spec.is_null() {
        drop(Box::from_raw(spec));
    }
}

/// Number of eigenvalues held, 0 for a null handle.
///
/// # Safety
/// `spec` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn flho_spectrum_len(spec: *const FlhoSpectrum) -> usize {
    spec.as_ref().map_or(0, |s| s.inner.eigenvalues.len())
}

/// Copies up to `cap` ascending eigenvalues into `buf`; `written` receives the count.
///
/// # Safety
/// `spec` must be a live handle, `buf` valid for `cap` doubles, `written` writable.
#[no_mangle]
pub unsafe extern "C" fn flho_spectrum_eigenvalues(
    spec: *const FlhoSpectrum,
    buf: *mut f64,
    cap: usize,
    written: *mut usize,
) -> FlhoStatus {
    guard(|| {
        let s = spec.as_ref().ok_or_else(|| null("spec"))?;
        if written.is_null() {
            return Err(null("written"));
        }
        let vals = &s.inner.eigenvalues;
        let n = vals.len().min(cap);
        if n > 0 {
            if buf.is_null() {
                return Err(null("buf"));
            }
            ptr::copy_nonoverlapping(vals.as_ptr(), buf, n);
        }
        *written = n;
        Ok(())
    })
}

/// Eigenvalue `index` with its parity (0 even `m`, 1 odd `m`) and degeneracy group.
/// Any of the output pointers may be null.
///
/// # Safety
/// `spec` must be a live handle; non-null outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn flho_spectrum_get(
    spec: *const FlhoSpectrum,
    index: usize,
    energy: *mut f64,
    parity: *mut u32,
    group: *mut usize,
) -> FlhoStatus {
    guard(|| {
        let s = &spec.as_ref().ok_or_else(|| null("spec"))?.inner;
        if index >= s.eigenvalues.len() {
            return Err((
                FlhoStatus::InvalidArgument,
                format!("index {index} outside 0..{}", s.eigenvalues.len()),
            ));
        }
        if let Some(e) = energy.as_mut() {
            *e = s.eigenvalues[index];
        }
        if let Some(p) = parity.as_mut() {
            *p = match s.parities[index] {
                Parity::Even => 0,
                Parity::Odd => 1,
            };
        }
        if let Some(g) = group.as_mut() {
            *g = s.group_of[index];
        }
        Ok(())
    })
}

/// Number of degeneracy groups.
///
/// # Safety
/// `spec` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn flho_spectrum_group_count(spec: *const FlhoSpectrum) -> usize {
    spec.as_ref().map_or(0, |s| s.inner.groups.len())
}

/// Lowest value and multiplicity of degeneracy group `g`.
///
/// # Safety
/// `spec` must be a live handle; non-null outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn flho_spectrum_group(
    spec: *const FlhoSpectrum,
    g: usize,
    value: *mut f64,
    multiplicity: *mut usize,
) -> FlhoStatus {
    guard(|| {
        let s = &spec.as_ref().ok_or_else(|| null("spec"))?.inner;
        let grp = s.groups.get(g).ok_or_else(|| {
            (
                FlhoStatus::InvalidArgument,
                format!("group {g} outside 0..{}", s.groups.len()),
            )
        })?;
        if let Some(v) = value.as_mut() {
            *v = grp.value;
        }
        if let Some(m) = multiplicity.as_mut() {
            *m = grp.multiplicity;
        }
        Ok(())
    })
}

/// Derives the oscillator constants from `ħ, ħ′, ħ″, m, k`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn flho_constants(
    hbar: f64,
    hbar1: f64,
    hbar2: f64,
    mass: f64,
    stiffness: f64,
    out: *mut FlhoConstants,
) -> FlhoStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let c = lib(make_constants(hbar, hbar1, hbar2, mass, stiffness))?;
        *out = FlhoConstants {
            hbar: c.hbar,
            hbar1: c.hbar1,
            hbar2: c.hbar2,
            mass: c.mass,
            stiffness: c.stiffness,
            q: c.q,
            p: c.p,
            j: c.j,
            l: c.l,
            k_energy: c.k_energy,
            kappa: c.kappa,
            omega: c.omega,
            rescale: c.rescale,
        };
        Ok(())
    })
}

/// Closed-form level `E_n` of the `κ = 1` oscillator.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn flho_medium_level(l: u64, k_energy: f64, n: u64, out: *mut f64) -> FlhoStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let levels = lib(flho::analysis::medium_closed_form(l, k_energy, n))?;
        *out = levels[n as usize];
        Ok(())
    })
}

/// Stability report for a bracket given as `count` rows of `(i, j, k, value)`
/// in `entries` (row-major, `4·count` doubles, indices as exact integers).
///
/// # Safety
/// `entries` must be valid for `4·count` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn flho_killing_report(
    dim: usize,
    entries: *const f64,
    count: usize,
    out: *mut FlhoKillingReport,
) -> FlhoStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let raw: &[f64] = if count == 0 {
            &[]
        } else if entries.is_null() {
            return Err(null("entries"));
        } else {
            std::slice::from_raw_parts(entries, 4 * count)
        };
        let mut parsed = Vec::with_capacity(count);
        for row in raw.chunks_exact(4) {
            let idx = |x: f64| -> Result<usize, (FlhoStatus, String)> {
                if x >= 0.0 && x.fract() == 0.0 && x < dim as f64 {
                    Ok(x as usize)
                } else {
                    Err((
                        FlhoStatus::InvalidArgument,
                        format!("index {x} is not an integer in 0..{dim}"),
                    ))
                }
            };
            parsed.push((idx(row[0])?, idx(row[1])?, idx(row[2])?, row[3]));
        }
        let sc = lib(StructureConstants::from_entries(dim, &parsed))?;
        lib(liealg::killing_form(&sc))?;
        let r = liealg::semisimplicity_report(&sc, liealg::RANK_TOL);
        *out = FlhoKillingReport {
            jacobi_defect: r.jacobi_defect,
            killing_det: r.killing_det,
            killing_rank: r.killing_rank as u32,
            semisimple: u32::from(r.verdict == Verdict::Semisimple),
        };
        Ok(())
    })
}

/// Same as [`flho_killing_report`] for structure constants in the JSON file format.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn flho_killing_report_file(path: *const c_char, out: *mut FlhoKillingReport) -> FlhoStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        if path.is_null() {
            return Err(null("path"));
        }
        let path = CStr::from_ptr(path)
            .to_str()
            .map_err(|_| (FlhoStatus::InvalidArgument, "path is not UTF-8".to_string()))?;
        let sc = lib(StructureConstants::from_json_file(path))?;
        lib(liealg::killing_form(&sc))?;
        let r = liealg::semisimplicity_report(&sc, liealg::RANK_TOL);
        *out = FlhoKillingReport {
            jacobi_defect: r.jacobi_defect,
            killing_det: r.killing_det,
            killing_rank: r.killing_rank as u32,
            semisimple: u32::from(r.verdict == Verdict::Semisimple),
        };
        Ok(())
    })
}
