//! C interface to radtherm.
//!
//! Objects cross the boundary as opaque handles created by `*_new`/`*_load`
//! and released by the matching `*_free`. Every call returns an
//! [`RtStatus`]; on failure a description is available from
//! [`rt_last_error_message`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use radtherm::curve::SpectralCurve;
use radtherm::inverse::invert_prepared;
use radtherm::surrogate::{load_model, MlpModel, INPUTS};
use radtherm::{
    planck_radiance, Band, Error, ModelKind, PhysicalConstants, PreparedModel, QuadratureConfig, SceneConditions,
    SolverConfig,
};

/// Result of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RtStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Bracket = 3,
    Convergence = 4,
    Parse = 5,
    Shape = 6,
    NotFound = 7,
    Io = 8,
    Training = 9,
    Lookup = 10,
    Panic = 99,
}

/// Measurement model selector.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RtModel {
    A = 0,
    B = 1,
    C = 2,
    D = 3,
}

impl From<RtModel> for ModelKind {
    fn from(m: RtModel) -> Self {
        match m {
            RtModel::A => ModelKind::A,
            RtModel::B => ModelKind::B,
            RtModel::C => ModelKind::C,
            RtModel::D => ModelKind::D,
        }
    }
}

/// Scene conditions (everything but the tube temperature) and quadrature.
pub struct RtScene {
    conditions: SceneConditions,
    quadrature: QuadratureConfig,
}

/// A loaded surrogate network.
pub struct RtSurrogate {
    model: MlpModel,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> RtStatus {
    match e {
        Error::Domain(_) => RtStatus::InvalidArgument,
        Error::Bracket { .. } => RtStatus::Bracket,
        Error::Convergence { .. } => RtStatus::Convergence,
        Error::Lookup(_) => RtStatus::Lookup,
        Error::Training { .. } => RtStatus::Training,
        Error::Parse { .. } | Error::Json(_) => RtStatus::Parse,
        Error::Shape { .. } => RtStatus::Shape,
        Error::NotFound(_) => RtStatus::NotFound,
        Error::Io { .. } => RtStatus::Io,
    }
}

fn guard(f: impl FnOnce() -> Result<(), RtStatus>) -> RtStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            RtStatus::Ok
        }
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic".into());
            RtStatus::Panic
        }
    }
}

fn fail(e: Error) -> RtStatus {
    let s = status_of(&e);
    set_error(e.to_string());
    s
}

fn null(what: &str) -> RtStatus {
    set_error(format!("{what} is null"));
    RtStatus::NullPointer
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, RtStatus> {
    p.as_ref().ok_or_else(|| null(what))
}

/// Copies the last error of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length in bytes.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn rt_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            std::ptr::copy_nonoverlapping(msg.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rt_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Spectral radiance (W·m⁻²·sr⁻¹·μm⁻¹) at `lambda_um` and `temp_k`.
///
/// # Safety
/// `out` must be a valid pointer to a double.
#[no_mangle]
pub unsafe extern "C" fn rt_planck_radiance(lambda_um: f64, temp_k: f64, out: *mut f64) -> RtStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = planck_radiance(lambda_um, temp_k, &PhysicalConstants::SI).map_err(fail)?;
        Ok(())
    })
}

/// Nominal furnace conditions: ε = 0.82, α = 0.05, T_w = 1378.15 K,
/// T_g = 1253.15 K, band 3.7–4.2 μm, 64-node Gauss-Legendre.
///
/// # Safety
/// `out` must be a valid pointer; the handle is released with [`rt_scene_free`].
#[no_mangle]
pub unsafe extern "C" fn rt_scene_new_nominal(out: *mut *mut RtScene) -> RtStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = Box::into_raw(Box::new(RtScene {
            conditions: SceneConditions::nominal(),
            quadrature: QuadratureConfig::default(),
        }));
        Ok(())
    })
}

/// Scene with spectrally constant emissivity and absorption.
/// Temperatures in kelvin, band edges in μm.
///
/// # Safety
/// `out` must be a valid pointer; the handle is released with [`rt_scene_free`].
#[no_mangle]
pub unsafe extern "C" fn rt_scene_new(
    wall_temp_k: f64,
    gas_temp_k: f64,
    emissivity: f64,
    absorption: f64,
    path_length: f64,
    band_lo_um: f64,
    band_hi_um: f64,
    quadrature_nodes: usize,
    out: *mut *mut RtScene,
) -> RtStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let conditions = SceneConditions {
            wall_temp: wall_temp_k,
            gas_temp: gas_temp_k,
            emissivity: SpectralCurve::constant(emissivity),
            absorption: SpectralCurve::constant(absorption),
            path_length,
            responsivity: SpectralCurve::constant(1.0),
            band: Band::new(band_lo_um, band_hi_um).map_err(fail)?,
        };
        conditions.validate().map_err(fail)?;
        let quadrature = QuadratureConfig::gauss_legendre(quadrature_nodes).map_err(fail)?;
        *out = Box::into_raw(Box::new(RtScene { conditions, quadrature }));
        Ok(())
    })
}

/// # Safety
/// `scene` must be null or a handle from `rt_scene_new*` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rt_scene_free(scene: *mut RtScene) {
    if !scene.is_null() {
        drop(Box::from_raw(scene));
    }
}

/// Band-integrated signal of `model` at tube temperature `tube_temp_k`.
///
/// # Safety
/// `scene` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rt_forward_signal(
    scene: *const RtScene,
    model: RtModel,
    tube_temp_k: f64,
    out: *mut f64,
) -> RtStatus {
    guard(|| {
        let scene = deref(scene, "scene")?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let m = PreparedModel::new(model.into(), &scene.conditions, &scene.quadrature).map_err(fail)?;
        *out = m.signal(tube_temp_k).map_err(fail)?;
        Ok(())
    })
}

/// Tube temperature (K) reproducing `signal` under `model`, by bisection
/// on 973.15–1573.15 K to 1e-3 K. `iterations` may be null.
///
/// # Safety
/// `scene` must be a live handle, `out_temp_k` valid, `iterations` null or valid.
#[no_mangle]
pub unsafe extern "C" fn rt_invert_signal(
    scene: *const RtScene,
    model: RtModel,
    signal: f64,
    out_temp_k: *mut f64,
    iterations: *mut u32,
) -> RtStatus {
    guard(|| {
        let scene = deref(scene, "scene")?;
        let out = out_temp_k.as_mut().ok_or_else(|| null("out_temp_k"))?;
        let m = PreparedModel::new(model.into(), &scene.conditions, &scene.quadrature).map_err(fail)?;
        let r = invert_prepared(&m, signal, &SolverConfig::default()).map_err(fail)?;
        *out = r.temperature_ts;
        if let Some(it) = iterations.as_mut() {
            *it = r.iterations as u32;
        }
        Ok(())
    })
}

/// Loads an `MLPT` model file.
///
/// # Safety
/// `path` must be a NUL-terminated UTF-8 string and `out` a valid pointer;
/// the handle is released with [`rt_surrogate_free`].
#[no_mangle]
pub unsafe extern "C" fn rt_surrogate_load(path: *const c_char, out: *mut *mut RtSurrogate) -> RtStatus {
    guard(|| {
        if path.is_null() {
            return Err(null("path"));
        }
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let path = CStr::from_ptr(path)
            .to_str()
            .map_err(|_| fail(Error::Domain("path is not UTF-8".into())))?;
        let model = load_model(Path::new(path)).map_err(fail)?;
        *out = Box::into_raw(Box::new(RtSurrogate { model }));
        Ok(())
    })
}

/// # Safety
/// `model` must be null or a handle from [`rt_surrogate_load`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rt_surrogate_free(model: *mut RtSurrogate) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Number of weights in the network.
///
/// # Safety
/// `model` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rt_surrogate_parameter_count(model: *const RtSurrogate, out: *mut usize) -> RtStatus {
    guard(|| {
        let m = deref(model, "model")?;
        *out.as_mut().ok_or_else(|| null("out"))? = m.model.parameter_count();
        Ok(())
    })
}

/// Predicts tube temperatures (K) for `rows` feature rows laid out
/// row-major as `[S, T_w, T_g, h_ε, μ_ε, σ_ε, h_α, μ_α, σ_α]`.
///
/// # Safety
/// `inputs` must hold `rows * 9` doubles and `out` room for `rows` doubles.
#[no_mangle]
pub unsafe extern "C" fn rt_surrogate_predict(
    model: *const RtSurrogate,
    inputs: *const f64,
    rows: usize,
    out: *mut f64,
) -> RtStatus {
    guard(|| {
        let m = deref(model, "model")?;
        if rows == 0 {
            return Ok(());
        }
        if inputs.is_null() {
            return Err(null("inputs"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let x = std::slice::from_raw_parts(inputs, rows * INPUTS);
        let y = m.model.predict_flat(x).map_err(fail)?;
        std::slice::from_raw_parts_mut(out, rows).copy_from_slice(&y);
        Ok(())
    })
}
