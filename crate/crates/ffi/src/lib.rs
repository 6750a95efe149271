//! C interface to `curvlab`.
//!
//! Contexts and tensors are opaque heap handles released with their `_free`
//! function. Every fallible call returns a [`CurvlabStatus`]; on failure the
//! message is available from [`curvlab_last_error`] on the same thread.
//! Strings returned through `char **` out-parameters are owned by the caller
//! and released with [`curvlab_string_free`].
//!
//! Matrices are row-major `dim × dim` arrays and tensors are flat `dim⁴`
//! arrays with index `((i·dim + j)·dim + k)·dim + l`.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::slice;

use curvlab::exchange::TensorDocument;
use curvlab::lab::Lab;
use curvlab::report::{self, Settings};
use curvlab::{
    constancy_report, evaluate, fit_model, generate, holomorphic_sectional_curvature, model_tensor,
    project_to_curvature, r1_tensor, r2_tensor, rk_defect, sectional_curvature, seeded, CurvatureKind,
    CurvatureTensor, Error, GeneratorKind, GeneratorSpec, HermitianContext, Plane, Vector,
};
use nalgebra::DMatrix;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CurvlabStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// `J`, `g` or a vector family does not have the required structure.
    InvalidStructure = 3,
    /// Coefficients violate a curvature-tensor symmetry.
    NotCurvature = 4,
    /// Malformed tensor document.
    Parse = 5,
    /// A Rust panic was caught at the boundary.
    Internal = 99,
}

/// Almost Hermitian structure `(g, J)`.
pub struct CurvlabContext {
    inner: HermitianContext,
}

/// Algebraic curvature tensor bound to a context.
pub struct CurvlabTensor {
    inner: CurvatureTensor,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).expect("nul bytes removed"));
}

fn status_of(e: &Error) -> CurvlabStatus {
    match e {
        Error::NotComplexStructure(_)
        | Error::MetricNotSymmetric(_)
        | Error::MetricNotPositive(_)
        | Error::MetricNotCompatible(_)
        | Error::RankDeficient { .. }
        | Error::NotOrthonormal(_)
        | Error::ZeroVector => CurvlabStatus::InvalidStructure,
        Error::NotCurvature { .. } => CurvlabStatus::NotCurvature,
        Error::Format(_) => CurvlabStatus::Parse,
        _ => CurvlabStatus::InvalidArgument,
    }
}

struct Failure(CurvlabStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn null(what: &str) -> Failure {
    Failure(CurvlabStatus::NullPointer, format!("{what} is null"))
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(CurvlabStatus::InvalidArgument, msg.into())
}

/// Runs `f`, records any failure and converts panics.
fn guard(f: impl FnOnce() -> Outcome) -> CurvlabStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            CurvlabStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal error: {msg}"));
            CurvlabStatus::Internal
        }
    }
}

unsafe fn context<'a>(p: *const CurvlabContext) -> Result<&'a HermitianContext, Failure> {
    p.as_ref().map(|c| &c.inner).ok_or_else(|| null("context"))
}

unsafe fn tensor<'a>(p: *const CurvlabTensor) -> Result<&'a CurvatureTensor, Failure> {
    p.as_ref().map(|t| &t.inner).ok_or_else(|| null("tensor"))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn vector(p: *const f64, dim: usize, what: &str) -> Result<Vector, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(Vector::from_slice(slice::from_raw_parts(p, dim)))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| invalid(format!("{what} is not UTF-8")))
}

unsafe fn optional(p: *const f64) -> Option<f64> {
    p.as_ref().copied()
}

fn give_tensor(t: CurvatureTensor, dst: &mut *mut CurvlabTensor) {
    *dst = Box::into_raw(Box::new(CurvlabTensor { inner: t }));
}

fn give_string(s: String, dst: &mut *mut c_char) {
    *dst = CString::new(s).expect("JSON has no nul bytes").into_raw();
}

/// Message of the last failed call on this thread, or an empty string.
/// Valid until the next call into the library from this thread.
#[no_mangle]
pub extern "C" fn curvlab_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn curvlab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn curvlab_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Builds a context of real dimension `2m`. `j` and `g` are optional
/// row-major `2m × 2m` matrices; null selects the canonical structure and the
/// identity metric.
///
/// # Safety
/// Non-null `j` and `g` must point to `4m²` doubles.
#[no_mangle]
pub unsafe extern "C" fn curvlab_context_new(
    m: usize,
    j: *const f64,
    g: *const f64,
    out_ctx: *mut *mut CurvlabContext,
) -> CurvlabStatus {
    guard(|| {
        let dst = out(out_ctx, "out_ctx")?;
        let dim = m.checked_mul(2).ok_or_else(|| invalid("m too large"))?;
        let read = |p: *const f64| {
            (!p.is_null()).then(|| DMatrix::from_row_slice(dim, dim, slice::from_raw_parts(p, dim * dim)))
        };
        if m < 2 {
            return Err(Error::DimensionTooSmall(m).into());
        }
        let ctx = HermitianContext::new(m, read(j), read(g))?;
        *dst = Box::into_raw(Box::new(CurvlabContext { inner: ctx }));
        Ok(())
    })
}

/// # Safety
/// `ctx` must come from [`curvlab_context_new`] and not have been freed. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn curvlab_context_free(ctx: *mut CurvlabContext) {
    if !ctx.is_null() {
        drop(Box::from_raw(ctx));
    }
}

/// Real dimension `2m`, or 0 for a null handle.
///
/// # Safety
/// `ctx` must be null or a live context.
#[no_mangle]
pub unsafe extern "C" fn curvlab_context_dim(ctx: *const CurvlabContext) -> usize {
    ctx.as_ref().map_or(0, |c| c.inner.dim())
}

/// # Safety
/// `t` must come from this library and not have been freed. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn curvlab_tensor_free(t: *mut CurvlabTensor) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Real dimension of the tensor's context, or 0 for a null handle.
///
/// # Safety
/// `t` must be null or a live tensor.
#[no_mangle]
pub unsafe extern "C" fn curvlab_tensor_dim(t: *const CurvlabTensor) -> usize {
    t.as_ref().map_or(0, |t| t.inner.dim())
}

/// `R1(X,Y,Z,U) = g(X,U)g(Y,Z) − g(X,Z)g(Y,U)`.
///
/// # Safety
/// `ctx` must be a live context; `out_tensor` must be writable.
#[no_mangle]
pub unsafe extern "C" fn curvlab_tensor_r1(ctx: *const CurvlabContext, out_tensor: *mut *mut CurvlabTensor) -> CurvlabStatus {
    guard(|| {
        let c = context(ctx)?;
        give_tensor(r1_tensor(c), out(out_tensor, "out_tensor")?);
        Ok(())
    })
}

/// `R2` built from the fundamental 2-form.
///
/// # Safety
/// As [`curvlab_tensor_r1`].
#[no_mangle]
pub unsafe extern "C" fn curvlab_tensor_r2(ctx: *const CurvlabContext, out_tensor: *mut *mut CurvlabTensor) -> CurvlabStatus {
    guard(|| {
        let c = context(ctx)?;
        give_tensor(r2_tensor(c), out(out_tensor, "out_tensor")?);
        Ok(())
    })
}

/// `K·R1 + ((c − K)/3)·R2`.
///
/// # Safety
/// As [`curvlab_tensor_r1`].
#[no_mangle]
pub unsafe extern "C" fn curvlab_tensor_model(
    ctx: *const CurvlabContext,
    k: f64,
    c: f64,
    out_tensor: *mut *mut CurvlabTensor,
) -> CurvlabStatus {
    guard(|| {
        let cx = context(ctx)?;
        if !(k.is_finite() && c.is_finite()) {
            return Err(invalid("K and c must be finite"));
        }
        give_tensor(model_tensor(cx, k, c), out(out_tensor, "out_tensor")?);
        Ok(())
    })
}

/// Tensor from `len = dim⁴` flat coefficients. With `project` non-zero the
/// array is first projected onto curvature tensors; otherwise it must already
/// satisfy the symmetries.
///
/// # Safety
/// `coeffs` must point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn curvlab_tensor_from_coeffs(
    ctx: *const CurvlabContext,
    coeffs: *const f64,
    len: usize,
    project: c_int,
    out_tensor: *mut *mut CurvlabTensor,
) -> CurvlabStatus {
    guard(|| {
        let cx = context(ctx)?;
        if coeffs.is_null() {
            return Err(null("coeffs"));
        }
        let data = slice::from_raw_parts(coeffs, len);
        let t = if project != 0 {
            project_to_curvature(data, cx)?
        } else {
            CurvatureTensor::new(cx, data.to_vec())?
        };
        give_tensor(t, out(out_tensor, "out_tensor")?);
        Ok(())
    })
}

/// Copies the `dim⁴` coefficients into `buf`, which holds `len` doubles.
///
/// # Safety
/// `buf` must be writable for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn curvlab_tensor_coeffs(t: *const CurvlabTensor, buf: *mut f64, len: usize) -> CurvlabStatus {
    guard(|| {
        let r = tensor(t)?;
        if buf.is_null() {
            return Err(null("buf"));
        }
        let c = r.coeffs();
        if len < c.len() {
            return Err(invalid(format!("buffer holds {len} values, need {}", c.len())));
        }
        slice::from_raw_parts_mut(buf, c.len()).copy_from_slice(c);
        Ok(())
    })
}

/// Generator over the canonical context. `kind` is one of `space-form`,
/// `complex-space-form`, `model`, `random`, `random-rk`, `kernel-31`,
/// `kernel-38`, `perturbed`; `k`, `c` and `eps` are null when absent.
///
/// # Safety
/// `kind` must be a NUL-terminated string; non-null parameters must be readable.
#[no_mangle]
pub unsafe extern "C" fn curvlab_tensor_generate(
    kind: *const c_char,
    m: usize,
    k: *const f64,
    c: *const f64,
    seed: u64,
    eps: *const f64,
    out_tensor: *mut *mut CurvlabTensor,
) -> CurvlabStatus {
    guard(|| {
        let kind: GeneratorKind = text(kind, "kind")?.parse()?;
        let spec = GeneratorSpec {
            kind,
            m,
            k: optional(k),
            c: optional(c),
            seed,
            eps: optional(eps),
        };
        give_tensor(generate(&spec)?, out(out_tensor, "out_tensor")?);
        Ok(())
    })
}

/// Parses a tensor document and validates context and symmetries.
///
/// # Safety
/// `json` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn curvlab_tensor_from_json(json: *const c_char, out_tensor: *mut *mut CurvlabTensor) -> CurvlabStatus {
    guard(|| {
        let raw = TensorDocument::parse(text(json, "json")?)?.to_raw()?;
        let ctx = raw.context()?;
        give_tensor(CurvatureTensor::new(&ctx, raw.coeffs)?, out(out_tensor, "out_tensor")?);
        Ok(())
    })
}

/// Serializes to a tensor document (sparse records when `sparse` is non-zero).
///
/// # Safety
/// `t` must be a live tensor; free the result with [`curvlab_string_free`].
#[no_mangle]
pub unsafe extern "C" fn curvlab_tensor_to_json(t: *const CurvlabTensor, sparse: c_int, out_json: *mut *mut c_char) -> CurvlabStatus {
    guard(|| {
        let r = tensor(t)?;
        give_string(TensorDocument::from_tensor(r, sparse != 0).to_json(), out(out_json, "out_json")?);
        Ok(())
    })
}

/// `R(X, Y, Z, U)` for vectors of length `dim`.
///
/// # Safety
/// Each vector must point to `dim` doubles.
#[no_mangle]
pub unsafe extern "C" fn curvlab_evaluate(
    t: *const CurvlabTensor,
    x: *const f64,
    y: *const f64,
    z: *const f64,
    u: *const f64,
    out_value: *mut f64,
) -> CurvlabStatus {
    guard(|| {
        let r = tensor(t)?;
        let d = r.dim();
        let v = evaluate(r, &vector(x, d, "x")?, &vector(y, d, "y")?, &vector(z, d, "z")?, &vector(u, d, "u")?)?;
        *out(out_value, "out_value")? = v;
        Ok(())
    })
}

/// Sectional curvature of the plane spanned by `x` and `y` (any basis).
///
/// # Safety
/// `x`, `y` must point to `dim` doubles.
#[no_mangle]
pub unsafe extern "C" fn curvlab_sectional_curvature(
    t: *const CurvlabTensor,
    x: *const f64,
    y: *const f64,
    out_value: *mut f64,
) -> CurvlabStatus {
    guard(|| {
        let r = tensor(t)?;
        let d = r.dim();
        let p = Plane::spanned_by(r.context(), &vector(x, d, "x")?, &vector(y, d, "y")?)?;
        *out(out_value, "out_value")? = sectional_curvature(r, &p)?;
        Ok(())
    })
}

/// `H(X)` for nonzero `x` (normalized internally).
///
/// # Safety
/// `x` must point to `dim` doubles.
#[no_mangle]
pub unsafe extern "C" fn curvlab_holomorphic_sectional_curvature(
    t: *const CurvlabTensor,
    x: *const f64,
    out_value: *mut f64,
) -> CurvlabStatus {
    guard(|| {
        let r = tensor(t)?;
        let v = holomorphic_sectional_curvature(r, &vector(x, r.dim(), "x")?)?;
        *out(out_value, "out_value")? = v;
        Ok(())
    })
}

/// Largest `|R − R(J·,J·,J·,J·)|` entry.
///
/// # Safety
/// `t` must be a live tensor.
#[no_mangle]
pub unsafe extern "C" fn curvlab_rk_defect(t: *const CurvlabTensor, out_value: *mut f64) -> CurvlabStatus {
    guard(|| {
        let r = tensor(t)?;
        *out(out_value, "out_value")? = rk_defect(r);
        Ok(())
    })
}

/// Least-squares fit to `K·R1 + ((c − K)/3)·R2`.
///
/// # Safety
/// Out-pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn curvlab_fit_model(
    t: *const CurvlabTensor,
    out_k: *mut f64,
    out_c: *mut f64,
    out_residual: *mut f64,
) -> CurvlabStatus {
    guard(|| {
        let f = fit_model(tensor(t)?);
        *out(out_k, "out_k")? = f.k;
        *out(out_c, "out_c")? = f.c;
        *out(out_residual, "out_residual")? = f.residual;
        Ok(())
    })
}

/// Holomorphic (`kind = 0`) or antiholomorphic (`kind = 1`) sectional
/// curvature statistics over a basis sweep plus `samples` random planes.
///
/// # Safety
/// Out-pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn curvlab_constancy(
    t: *const CurvlabTensor,
    kind: c_int,
    samples: usize,
    seed: u64,
    out_mean: *mut f64,
    out_max_deviation: *mut f64,
) -> CurvlabStatus {
    guard(|| {
        let r = tensor(t)?;
        let kind = match kind {
            0 => CurvatureKind::Holomorphic,
            1 => CurvatureKind::Antiholomorphic,
            other => return Err(invalid(format!("kind must be 0 or 1, got {other}"))),
        };
        let c = constancy_report(r, kind, samples, &mut seeded(seed));
        *out(out_mean, "out_mean")? = c.mean;
        *out(out_max_deviation, "out_max_deviation")? = c.max_deviation;
        Ok(())
    })
}

/// Full analysis report as JSON (same schema as the command-line `analyze --json`).
///
/// # Safety
/// Free the result with [`curvlab_string_free`].
#[no_mangle]
pub unsafe extern "C" fn curvlab_analyze_json(
    t: *const CurvlabTensor,
    tol: f64,
    samples: usize,
    seed: u64,
    out_json: *mut *mut c_char,
) -> CurvlabStatus {
    guard(|| {
        let r = tensor(t)?;
        if tol.is_nan() || tol <= 0.0 {
            return Err(invalid("tol must be positive"));
        }
        let rep = report::analyze(r, "<memory>", &Settings { tol, samples, seed });
        give_string(rep.to_json(), out(out_json, "out_json")?);
        Ok(())
    })
}

/// Runs a verifier on the canonical context of half-dimension `m`. `lemma`
/// is `"1"`, `"3"`, `"4"` or `"A"`. `out_holds` receives 1 or 0; a verdict
/// that fails is not an error. `out_json` may be null; otherwise it receives
/// the verdict as JSON.
///
/// # Safety
/// `lemma` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn curvlab_verify(
    lemma: *const c_char,
    m: usize,
    trials: usize,
    seed: u64,
    out_holds: *mut c_int,
    out_json: *mut *mut c_char,
) -> CurvlabStatus {
    guard(|| {
        let lemma = text(lemma, "lemma")?;
        let holds = out(out_holds, "out_holds")?;
        if m < 2 {
            return Err(Error::DimensionTooSmall(m).into());
        }
        let lab = Lab::new(&HermitianContext::canonical(m)?);
        let v = match lemma {
            "1" => lab.verify_lemma1(trials, seed)?,
            "3" => lab.verify_lemma3(trials, seed)?,
            "4" => lab.verify_lemma4(trials, seed)?,
            "A" => lab.verify_special_angles(seed)?,
            other => return Err(invalid(format!("unknown lemma '{other}'"))),
        };
        *holds = c_int::from(v.holds);
        if let Some(dst) = out_json.as_mut() {
            give_string(serde_json::to_string(&v).expect("verdict serializes"), dst);
        }
        Ok(())
    })
}
