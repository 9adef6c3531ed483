//! C ABI for the relbound solver: opaque handles, integer error codes, and a
//! thread-local last-error message. All entry points catch panics so no
//! unwinding crosses the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, c_double, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use relbound::interaction::FormFactorSet;
use relbound::kernel::{kernel_element, ChannelBlock};
use relbound::kinematics::{KinPoint, TwoBodyConfig};
use relbound::solver::{spectrum, SpectrumResult};
use relbound::Error;

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RbStatus {
    RbOk = 0,
    /// invalid configuration (masses, charge, coupling, grid, names)
    RbErrConfig = 1,
    /// arguments outside the mathematical domain
    RbErrDomain = 2,
    /// numerical failure during assembly or diagonalization
    RbErrNumerical = 3,
    /// a required pointer argument was null
    RbErrNullArgument = 4,
    /// an index argument was out of range
    RbErrIndex = 5,
    /// internal panic; the handle state is still valid
    RbErrInternal = 6,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(msg: &str) {
    let clean: String = msg.chars().filter(|c| *c != '\0').collect();
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(clean).unwrap());
}

fn status_of(err: &Error) -> RbStatus {
    match err {
        Error::Config(_) => RbStatus::RbErrConfig,
        Error::Domain(_) => RbStatus::RbErrDomain,
        Error::Numerical(_) => RbStatus::RbErrNumerical,
    }
}

fn guard<F: FnOnce() -> RbStatus>(f: F) -> RbStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(code) => code,
        Err(_) => {
            set_error("internal panic");
            RbStatus::RbErrInternal
        }
    }
}

/// Opaque two-body system: masses, charge, coupling and form factors.
pub struct RbSystem {
    cfg: TwoBodyConfig,
    ffs: FormFactorSet,
}

/// Opaque solved spectrum of one channel block.
pub struct RbSpectrum {
    result: SpectrumResult,
}

unsafe fn cstr<'a>(p: *const c_char) -> Option<&'a str> {
    if p.is_null() {
        return None;
    }
    CStr::from_ptr(p).to_str().ok()
}

/// Copies the message of the most recent error on this thread into `buf`
/// (always NUL-terminated, truncated to `len`). Returns the full message
/// length in bytes, excluding the terminator.
///
/// # Safety
/// `buf` must point to `len` writable bytes, or be null (query mode).
#[no_mangle]
pub unsafe extern "C" fn rb_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Creates a system from explicit parameters. `form_factors` selects the
/// vertex structure by name ("point", "dipole-proton", ...); pass null for
/// point couplings.
///
/// # Safety
/// `out` must be a valid pointer; `form_factors` must be null or a
/// NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn rb_system_new(
    m1: c_double,
    m2: c_double,
    z: c_int,
    alpha: c_double,
    form_factors: *const c_char,
    out: *mut *mut RbSystem,
) -> RbStatus {
    if out.is_null() {
        return RbStatus::RbErrNullArgument;
    }
    guard(|| {
        let cfg = match TwoBodyConfig::new(m1, m2, z as u32, alpha) {
            Ok(c) => c,
            Err(e) => {
                set_error(&e.to_string());
                return status_of(&e);
            }
        };
        let ffs = match cstr(form_factors) {
            None => FormFactorSet::point(cfg.alpha),
            Some(name) => match FormFactorSet::from_names(name, cfg.alpha) {
                Ok(f) => f,
                Err(e) => {
                    set_error(&e.to_string());
                    return status_of(&e);
                }
            },
        };
        *out = Box::into_raw(Box::new(RbSystem { cfg, ffs }));
        RbStatus::RbOk
    })
}

/// Creates a system from a named preset: "hydrogen", "muonic-hydrogen" or
/// "equal-mass".
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rb_system_preset(
    name: *const c_char,
    out: *mut *mut RbSystem,
) -> RbStatus {
    if out.is_null() {
        return RbStatus::RbErrNullArgument;
    }
    guard(|| {
        let Some(name) = cstr(name) else {
            set_error("preset name is null or not UTF-8");
            return RbStatus::RbErrNullArgument;
        };
        match TwoBodyConfig::preset(name) {
            Ok(cfg) => {
                let ffs = FormFactorSet::point(cfg.alpha);
                *out = Box::into_raw(Box::new(RbSystem { cfg, ffs }));
                RbStatus::RbOk
            }
            Err(e) => {
                set_error(&e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Frees a system handle. Null is accepted.
///
/// # Safety
/// `sys` must be a pointer from `rb_system_new`/`rb_system_preset`, used
/// at most once here.
#[no_mangle]
pub unsafe extern "C" fn rb_system_free(sys: *mut RbSystem) {
    if !sys.is_null() {
        drop(Box::from_raw(sys));
    }
}

fn parse_block(j: c_int, block: c_char) -> Result<ChannelBlock, Error> {
    if j < 0 {
        return Err(Error::config("total angular momentum must be non-negative"));
    }
    match block as u8 {
        b'a' | b'A' => Ok(ChannelBlock::block_a(j as u32)),
        b'b' | b'B' => Ok(ChannelBlock::block_b(j as u32)),
        other => Err(Error::config(format!(
            "unknown channel block '{}' (use 'a' or 'b')",
            other as char
        ))),
    }
}

/// One partial-wave kernel element V_ab(k, k') of the block (`j`, `block`),
/// where `block` is 'a' (spin-singlet-type) or 'b' (spin-triplet-type) and
/// `a`, `b` index the block channels.
///
/// # Safety
/// `sys` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn rb_kernel_element(
    sys: *const RbSystem,
    j: c_int,
    block: c_char,
    a: usize,
    b: usize,
    k: c_double,
    kp: c_double,
    out: *mut c_double,
) -> RbStatus {
    if sys.is_null() || out.is_null() {
        return RbStatus::RbErrNullArgument;
    }
    guard(|| {
        let sys = &*sys;
        let blk = match parse_block(j, block) {
            Ok(b) => b,
            Err(e) => {
                set_error(&e.to_string());
                return status_of(&e);
            }
        };
        if a >= blk.len() || b >= blk.len() {
            set_error("channel index out of range for block");
            return RbStatus::RbErrIndex;
        }
        let p = match KinPoint::new(k, kp) {
            Ok(p) => p,
            Err(e) => {
                set_error(&e.to_string());
                return status_of(&e);
            }
        };
        match kernel_element(&sys.cfg, &blk, a, b, &p, &sys.ffs) {
            Ok(v) => {
                *out = v;
                RbStatus::RbOk
            }
            Err(e) => {
                set_error(&e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Solves the block (`j`, `block`) on an `n`-point grid. `k0 <= 0` selects
/// the automatic Bohr-momentum scale. On success `*out` owns the spectrum.
///
/// # Safety
/// `sys` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn rb_solve(
    sys: *const RbSystem,
    j: c_int,
    block: c_char,
    n: usize,
    k0: c_double,
    out: *mut *mut RbSpectrum,
) -> RbStatus {
    if sys.is_null() || out.is_null() {
        return RbStatus::RbErrNullArgument;
    }
    guard(|| {
        let sys = &*sys;
        let blk = match parse_block(j, block) {
            Ok(b) => b,
            Err(e) => {
                set_error(&e.to_string());
                return status_of(&e);
            }
        };
        let scale = if k0 > 0.0 { Some(k0) } else { None };
        match spectrum(&sys.cfg, &blk, n, scale, &sys.ffs) {
            Ok(result) => {
                *out = Box::into_raw(Box::new(RbSpectrum { result }));
                RbStatus::RbOk
            }
            Err(e) => {
                set_error(&e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Frees a spectrum handle. Null is accepted.
///
/// # Safety
/// `spec` must be a pointer from `rb_solve`, used at most once here.
#[no_mangle]
pub unsafe extern "C" fn rb_spectrum_free(spec: *mut RbSpectrum) {
    if !spec.is_null() {
        drop(Box::from_raw(spec));
    }
}

/// Number of states (channels x grid points) in the spectrum.
///
/// # Safety
/// `spec` must be a valid spectrum pointer.
#[no_mangle]
pub unsafe extern "C" fn rb_spectrum_size(spec: *const RbSpectrum) -> usize {
    if spec.is_null() {
        return 0;
    }
    (*spec).result.masses.len()
}

/// Number of states with negative binding energy.
///
/// # Safety
/// `spec` must be a valid spectrum pointer.
#[no_mangle]
pub unsafe extern "C" fn rb_spectrum_bound_count(spec: *const RbSpectrum) -> usize {
    if spec.is_null() {
        return 0;
    }
    (*spec).result.bound_count
}

/// Invariant mass of state `idx` (ascending order).
///
/// # Safety
/// `spec` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn rb_spectrum_mass(
    spec: *const RbSpectrum,
    idx: usize,
    out: *mut c_double,
) -> RbStatus {
    if spec.is_null() || out.is_null() {
        return RbStatus::RbErrNullArgument;
    }
    let masses: &[f64] = &(*spec).result.masses;
    match masses.get(idx) {
        Some(m) => {
            *out = *m;
            RbStatus::RbOk
        }
        None => {
            set_error("state index out of range");
            RbStatus::RbErrIndex
        }
    }
}

/// Binding energy M - m1 - m2 of state `idx`.
///
/// # Safety
/// `spec` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn rb_spectrum_binding(
    spec: *const RbSpectrum,
    idx: usize,
    out: *mut c_double,
) -> RbStatus {
    if spec.is_null() || out.is_null() {
        return RbStatus::RbErrNullArgument;
    }
    let binding: &[f64] = &(*spec).result.binding;
    match binding.get(idx) {
        Some(b) => {
            *out = *b;
            RbStatus::RbOk
        }
        None => {
            set_error("state index out of range");
            RbStatus::RbErrIndex
        }
    }
}

/// Copies the grid nodes (momenta) into `buf`; returns the grid size. With a
/// null `buf` only the size is reported.
///
/// # Safety
/// `buf` must be null or point to at least `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn rb_spectrum_grid(
    spec: *const RbSpectrum,
    buf: *mut c_double,
    len: usize,
) -> usize {
    if spec.is_null() {
        return 0;
    }
    let nodes = &(*spec).result.grid.nodes;
    if !buf.is_null() {
        let n = nodes.len().min(len);
        ptr::copy_nonoverlapping(nodes.as_ptr(), buf, n);
    }
    nodes.len()
}

/// Copies the radial wave function Phi of (`state`, `channel`) at the grid
/// nodes into `buf` (up to `len` values); returns the grid size, or 0 if the
/// indices are out of range.
///
/// # Safety
/// `buf` must be null or point to at least `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn rb_spectrum_wavefunction(
    spec: *const RbSpectrum,
    state: usize,
    channel: usize,
    buf: *mut c_double,
    len: usize,
) -> usize {
    if spec.is_null() {
        return 0;
    }
    let result = &(*spec).result;
    let Some(chan) = result.vectors.get(state).and_then(|s| s.get(channel)) else {
        return 0;
    };
    if !buf.is_null() {
        let n = chan.len().min(len);
        ptr::copy_nonoverlapping(chan.as_ptr(), buf, n);
    }
    chan.len()
}

/// Runs the full internal verification battery with the given seed. Returns
/// RbOk when every suite passes; RbErrNumerical when a suite fails, with the
/// failing suites named in the last-error message.
#[no_mangle]
pub extern "C" fn rb_verify(seed: u64) -> RbStatus {
    guard(|| match relbound::verify::all_suites(seed) {
        Ok(reports) => {
            let failed: Vec<&str> = reports
                .iter()
                .filter(|r| !r.passed)
                .map(|r| r.name.as_str())
                .collect();
            if failed.is_empty() {
                RbStatus::RbOk
            } else {
                set_error(&format!("failed suites: {}", failed.join(", ")));
                RbStatus::RbErrNumerical
            }
        }
        Err(e) => {
            set_error(&e.to_string());
            status_of(&e)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ffi::CString;

    unsafe fn hydrogen() -> *mut RbSystem {
        let name = CString::new("hydrogen").unwrap();
        let mut sys: *mut RbSystem = ptr::null_mut();
        assert_eq!(rb_system_preset(name.as_ptr(), &mut sys), RbStatus::RbOk);
        assert!(!sys.is_null());
        sys
    }

    #[test]
    fn preset_solve_and_read_through_abi() {
        unsafe {
            let sys = hydrogen();
            let mut spec: *mut RbSpectrum = ptr::null_mut();
            assert_eq!(
                rb_solve(sys, 0, b'a' as c_char, 48, 0.0, &mut spec),
                RbStatus::RbOk
            );
            assert!(rb_spectrum_bound_count(spec) >= 3);
            let mut b1 = 0.0;
            assert_eq!(rb_spectrum_binding(spec, 0, &mut b1), RbStatus::RbOk);
            // hydrogen ground state, eV scale
            assert!((b1 * 1e6 + 13.6).abs() < 0.1, "B1 = {} MeV", b1);
            let mut m1 = 0.0;
            assert_eq!(rb_spectrum_mass(spec, 0, &mut m1), RbStatus::RbOk);
            let threshold =
                relbound::kinematics::ELECTRON_MASS_MEV + relbound::kinematics::PROTON_MASS_MEV;
            assert!((m1 - b1 - threshold).abs() < 1e-9);
            let n = rb_spectrum_grid(spec, ptr::null_mut(), 0);
            assert_eq!(n, 48);
            let mut phi = vec![0.0; n];
            assert_eq!(rb_spectrum_wavefunction(spec, 0, 0, phi.as_mut_ptr(), n), n);
            assert!(phi.iter().all(|v| v.is_finite()));
            // ground state is nodeless
            assert!(phi.iter().all(|v| *v > 0.0) || phi.iter().all(|v| *v < 0.0));
            rb_spectrum_free(spec);
            rb_system_free(sys);
        }
    }

    #[test]
    fn kernel_element_matches_core() {
        unsafe {
            let sys = hydrogen();
            let mut v = 0.0;
            assert_eq!(
                rb_kernel_element(sys, 0, b'a' as c_char, 0, 0, 0.3, 0.7, &mut v),
                RbStatus::RbOk
            );
            let cfg = TwoBodyConfig::hydrogen();
            let ffs = FormFactorSet::point(cfg.alpha);
            let direct = kernel_element(
                &cfg,
                &ChannelBlock::block_a(0),
                0,
                0,
                &KinPoint::new(0.3, 0.7).unwrap(),
                &ffs,
            )
            .unwrap();
            assert!((v - direct).abs() <= 1e-15 * direct.abs());
            rb_system_free(sys);
        }
    }

    #[test]
    fn errors_map_to_codes_and_messages() {
        unsafe {
            // bad preset
            let name = CString::new("unobtainium").unwrap();
            let mut sys: *mut RbSystem = ptr::null_mut();
            assert_eq!(
                rb_system_preset(name.as_ptr(), &mut sys),
                RbStatus::RbErrConfig
            );
            let mut buf = [0 as c_char; 256];
            let len = rb_last_error(buf.as_mut_ptr(), buf.len());
            assert!(len > 0);
            // bad masses
            assert_eq!(
                rb_system_new(-1.0, 1.0, 1, 0.01, ptr::null(), &mut sys),
                RbStatus::RbErrConfig
            );
            // null arguments
            assert_eq!(
                rb_system_new(1.0, 1.0, 1, 0.01, ptr::null(), ptr::null_mut()),
                RbStatus::RbErrNullArgument
            );
            // bad block and bad grid through a valid system
            let sys = hydrogen();
            let mut spec: *mut RbSpectrum = ptr::null_mut();
            assert_eq!(
                rb_solve(sys, 0, b'x' as c_char, 48, 0.0, &mut spec),
                RbStatus::RbErrConfig
            );
            assert_eq!(
                rb_solve(sys, 0, b'a' as c_char, 4, 0.0, &mut spec),
                RbStatus::RbErrConfig
            );
            // channel index out of range
            let mut v = 0.0;
            assert_eq!(
                rb_kernel_element(sys, 0, b'a' as c_char, 1, 0, 0.3, 0.7, &mut v),
                RbStatus::RbErrIndex
            );
            rb_system_free(sys);
            rb_system_free(ptr::null_mut());
            rb_spectrum_free(ptr::null_mut());
        }
    }

    #[test]
    fn verify_passes_through_abi() {
        assert_eq!(rb_verify(2024), RbStatus::RbOk);
    }
}
