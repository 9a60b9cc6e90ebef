//! C interface. Handles are opaque; every call returns an `SgpStatus` and
//! leaves a message for `sgp_last_error` on failure.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use sgp_pinn::io::{BuiltProblem, Checkpoint, IoError, RunConfig};
use sgp_pinn::oracle::homogeneous_ode;
use sgp_pinn::physics1d::{Loading, Material1D};
use sgp_pinn::problem::Problem;
use sgp_pinn::run::{self, RunError};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SgpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Io = 3,
    Config = 4,
    Physics = 5,
    Train = 6,
    Oracle = 7,
    Unsupported = 8,
    BadArgument = 9,
    Panic = 10,
}

/// A trained model loaded from a checkpoint.
pub struct SgpModel {
    ck: Checkpoint,
    problem: BuiltProblem,
}

/// Material and loading of the homogeneous 1D strip, SI units.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SgpMaterial1D {
    pub mu_pa: f64,
    pub s0_pa: f64,
    pub d0_per_s: f64,
    pub m: f64,
    pub hardening_pa: f64,
    pub shear_rate_per_s: f64,
    pub t_max_s: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let s = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = s);
}

fn status_of(e: &RunError) -> SgpStatus {
    match e {
        RunError::Io(IoError::Config(_)) => SgpStatus::Config,
        RunError::Io(_) => SgpStatus::Io,
        RunError::Train(_) => SgpStatus::Train,
        RunError::Physics(_) => SgpStatus::Physics,
        RunError::Oracle(_) => SgpStatus::Oracle,
        RunError::Unsupported(_) => SgpStatus::Unsupported,
        RunError::Usage(_) => SgpStatus::BadArgument,
    }
}

fn guard(f: impl FnOnce() -> Result<(), (SgpStatus, String)>) -> SgpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            SgpStatus::Ok
        }
        Ok(Err((s, m))) => {
            set_error(m);
            s
        }
        Err(_) => {
            set_error("internal panic");
            SgpStatus::Panic
        }
    }
}

fn fail<E: Into<RunError>>(e: E) -> (SgpStatus, String) {
    let e = e.into();
    (status_of(&e), e.to_string())
}

unsafe fn path_arg<'a>(p: *const c_char, what: &str) -> Result<&'a Path, (SgpStatus, String)> {
    if p.is_null() {
        return Err((SgpStatus::NullPointer, format!("{what} is null")));
    }
    // SAFETY: caller passes a NUL-terminated string.
    let s = unsafe { CStr::from_ptr(p) }
        .to_str()
        .map_err(|_| (SgpStatus::InvalidUtf8, format!("{what} is not UTF-8")))?;
    Ok(Path::new(s))
}

/// Message describing the last failed call on this thread. Valid until the
/// next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn sgp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version, a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sgp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Loads a checkpoint. On success `*out` owns a model to release with
/// `sgp_model_free`.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sgp_model_load(path: *const c_char, out: *mut *mut SgpModel) -> SgpStatus {
    guard(|| {
        if out.is_null() {
            return Err((SgpStatus::NullPointer, "out is null".into()));
        }
        let path = unsafe { path_arg(path, "path")? };
        let ck = Checkpoint::load(path).map_err(fail)?;
        let (_, problem) = run::problem_for(&ck).map_err(fail)?;
        // SAFETY: checked non-null above.
        unsafe { *out = Box::into_raw(Box::new(SgpModel { ck, problem })) };
        Ok(())
    })
}

/// Releases a model. Null is ignored.
///
/// # Safety
/// `model` must come from `sgp_model_load` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sgp_model_free(model: *mut SgpModel) {
    if !model.is_null() {
        // SAFETY: ownership returns from the caller.
        drop(unsafe { Box::from_raw(model) });
    }
}

/// Number of network inputs (scaled coordinates per point).
///
/// # Safety
/// `model` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn sgp_model_input_count(model: *const SgpModel, out: *mut usize) -> SgpStatus {
    guard(|| {
        let m = unsafe { model.as_ref() }.ok_or((SgpStatus::NullPointer, "model is null".into()))?;
        let o = unsafe { out.as_mut() }.ok_or((SgpStatus::NullPointer, "out is null".into()))?;
        *o = match &m.problem {
            BuiltProblem::OneD(p) => p.dim(),
            BuiltProblem::TwoD(p) => p.dim(),
        };
        Ok(())
    })
}

/// Shear stress at the strip centre at `n` equally spaced times from 0 to
/// `t_max`: applied strain into `strain`, stress (Pa) into `stress`. For the
/// 2D model the stress is T12.
///
/// # Safety
/// `strain` and `stress` must each hold `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn sgp_model_stress_strain(model: *const SgpModel, n: usize, strain: *mut f64, stress: *mut f64) -> SgpStatus {
    guard(|| {
        let m = unsafe { model.as_ref() }.ok_or((SgpStatus::NullPointer, "model is null".into()))?;
        if strain.is_null() || stress.is_null() {
            return Err((SgpStatus::NullPointer, "output buffer is null".into()));
        }
        if n < 2 {
            return Err((SgpStatus::BadArgument, "n must be at least 2".into()));
        }
        // SAFETY: caller guarantees n elements each.
        let (gs, ts) = unsafe { (std::slice::from_raw_parts_mut(strain, n), std::slice::from_raw_parts_mut(stress, n)) };
        match &m.problem {
            BuiltProblem::OneD(p) => {
                for (i, s) in p.stress_strain(&m.ck.theta, n, None).map_err(fail)?.iter().enumerate() {
                    gs[i] = s.strain;
                    ts[i] = s.tau;
                }
            }
            BuiltProblem::TwoD(p) => {
                for (i, s) in p.stress_strain(&m.ck.theta, n).map_err(fail)?.iter().enumerate() {
                    gs[i] = s.strain;
                    ts[i] = s.stress[3];
                }
            }
        }
        Ok(())
    })
}

/// Plastic strain and shear stress (Pa) at one point given in scaled
/// coordinates (`n_coords` must equal `sgp_model_input_count`).
///
/// # Safety
/// `coords` must hold `n_coords` doubles; `gamma_p` and `stress` must be valid.
#[no_mangle]
pub unsafe extern "C" fn sgp_model_evaluate(
    model: *const SgpModel,
    coords: *const f64,
    n_coords: usize,
    gamma_p: *mut f64,
    stress: *mut f64,
) -> SgpStatus {
    guard(|| {
        let m = unsafe { model.as_ref() }.ok_or((SgpStatus::NullPointer, "model is null".into()))?;
        if coords.is_null() || gamma_p.is_null() || stress.is_null() {
            return Err((SgpStatus::NullPointer, "argument is null".into()));
        }
        let c = unsafe { std::slice::from_raw_parts(coords, n_coords) };
        let (g, t) = match &m.problem {
            BuiltProblem::OneD(p) => {
                if c.len() != p.dim() {
                    return Err((SgpStatus::BadArgument, format!("expected {} coordinates", p.dim())));
                }
                let s = p.state_at(&m.ck.theta, c).map_err(fail)?;
                (s.gamma_p, s.tau)
            }
            BuiltProblem::TwoD(p) => {
                if c.len() != p.dim() {
                    return Err((SgpStatus::BadArgument, format!("expected {} coordinates", p.dim())));
                }
                let s = p.state_at(&m.ck.theta, c).map_err(fail)?;
                (s.gamma_p, s.stress[3])
            }
        };
        unsafe {
            *gamma_p = g;
            *stress = t;
        }
        Ok(())
    })
}

/// Trains from a TOML config file into run directory `out_dir`.
///
/// # Safety
/// Both arguments must be NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn sgp_train(config_path: *const c_char, out_dir: *const c_char) -> SgpStatus {
    guard(|| {
        let cfg_path = unsafe { path_arg(config_path, "config_path")? };
        let out = unsafe { path_arg(out_dir, "out_dir")? };
        let cfg = RunConfig::load(cfg_path).map_err(fail)?;
        run::train(&cfg, out).map_err(fail)?;
        Ok(())
    })
}

/// Homogeneous reference solution: stress (Pa) at `n` equally spaced applied
/// strains from 0 to the maximum, interpolated from the integrated series.
///
/// # Safety
/// `mat` must be valid; `strain` and `tau` must each hold `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn sgp_oracle_homogeneous(
    mat: *const SgpMaterial1D,
    tol: f64,
    n: usize,
    strain: *mut f64,
    tau: *mut f64,
) -> SgpStatus {
    guard(|| {
        let m = unsafe { mat.as_ref() }.ok_or((SgpStatus::NullPointer, "mat is null".into()))?;
        if strain.is_null() || tau.is_null() {
            return Err((SgpStatus::NullPointer, "output buffer is null".into()));
        }
        if n < 2 {
            return Err((SgpStatus::BadArgument, "n must be at least 2".into()));
        }
        let material = Material1D {
            mu: m.mu_pa,
            s0: m.s0_pa,
            d0: m.d0_per_s,
            m: m.m,
            hardening: m.hardening_pa,
            ..Material1D::default()
        };
        let loading = Loading {
            shear_rate: m.shear_rate_per_s,
            t_max: m.t_max_s,
        };
        let s = homogeneous_ode(&material, &loading, tol).map_err(fail)?;
        let (gs, ts) = unsafe { (std::slice::from_raw_parts_mut(strain, n), std::slice::from_raw_parts_mut(tau, n)) };
        let gmax = loading.max_strain();
        for i in 0..n {
            let g = gmax * i as f64 / (n - 1) as f64;
            gs[i] = g;
            ts[i] = s.tau_at_strain(g);
        }
        Ok(())
    })
}
