//! C ABI for `cpscan`.
//!
//! Conventions:
//!
//! - Every fallible function returns a [`CpsStatus`] and writes its result
//!   through an out-pointer. On failure the out-pointer is left untouched and
//!   [`cps_last_error_message`] describes the error.
//! - Optional real parameters are passed as NaN when absent.
//! - Handles ([`CpsSeries`], [`CpsConstantTable`]) are created by `*_new`
//!   functions and released with the matching `*_free`.
//! - Panics never cross the boundary; they are reported as
//!   [`CpsStatus::Internal`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use cpscan::asymptotics::{
    p1_fixed, p2_fixed, p2_free_delta, p3_fixed, p3_free_delta, p4_tail, statistic_pvalue, theorem1_tail,
    AsymptoticParams, ConstantSource, ConstantTable, ConstantValue, ContinuousProblemParams, Penalty, TailApprox,
    Trend,
};
use cpscan::fieldsim::{kuiper_half_tail, simulate_sup, FieldKind, TailEstimate};
use cpscan::normal::{log_norm_survival, norm_survival};
use cpscan::pickands::{estimate_h, estimate_p, estimate_q, ConstantEstimate, HForm, McConfig};
use cpscan::stats::{statistic, HypothesisParams, ObservationSeries, StatKind};
use cpscan::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CpsStatus {
    Ok = 0,
    Input = 2,
    Parameter = 3,
    Resource = 4,
    Domain = 5,
    NullPointer = 6,
    Internal = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CpsStatKind {
    Z1 = 1,
    Z2 = 2,
    Z3 = 3,
    Z4 = 4,
}

/// Closed-form approximations and simulated fields.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CpsTailKind {
    P1 = 1,
    P2 = 2,
    P3 = 3,
    P4 = 4,
    Free2 = 5,
    Free3 = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CpsTrend {
    Linear = 0,
    Quadratic = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CpsHForm {
    /// H_α(λ)
    OfLambda = 0,
    /// (H_α(λ) − H_α(λ/2))/(λ/2)
    Rate = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct CpsStatReport {
    pub value: f64,
    pub i_star: usize,
    pub j_star: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct CpsTailApprox {
    pub value: f64,
    pub log_value: f64,
    pub constant: f64,
    pub exponent_power: f64,
    pub pre_asymptotic: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct CpsConstantEstimate {
    pub value: f64,
    pub std_error: f64,
    pub n_replicates: usize,
    pub step: f64,
    pub horizon: f64,
    pub n_points: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct CpsTailEstimate {
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub exceedances: u64,
    pub n_rep: usize,
    pub grid_m: usize,
    pub threshold: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct CpsAsymptoticParams {
    pub s1: f64,
    pub s2: f64,
    pub a: f64,
    pub b: f64,
    pub alpha: f64,
    pub beta: f64,
    pub c: f64,
    pub trend: CpsTrend,
}

/// Opaque observation series.
pub struct CpsSeries(ObservationSeries);

/// Opaque table of limit constants.
pub struct CpsConstantTable(ConstantTable);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> CpsStatus {
    match e {
        Error::Input(_) => CpsStatus::Input,
        Error::Parameter(_) => CpsStatus::Parameter,
        Error::Domain(_) => CpsStatus::Domain,
        Error::Resource(_) => CpsStatus::Resource,
    }
}

enum Fail {
    Lib(Error),
    Null(&'static str),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

/// Run `f`, writing its value to `out`; translate errors and panics.
fn guarded<T>(out: *mut T, f: impl FnOnce() -> Result<T, Fail>) -> CpsStatus {
    if out.is_null() {
        set_error("out pointer is null");
        return CpsStatus::NullPointer;
    }
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(v)) => {
            // SAFETY: checked non-null above; the caller guarantees it points to a T.
            unsafe { out.write(v) };
            CpsStatus::Ok
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(&e.to_string());
            status_of(&e)
        }
        Ok(Err(Fail::Null(what))) => {
            set_error(&format!("{what} is null"));
            CpsStatus::NullPointer
        }
        Err(_) => {
            set_error("internal panic");
            CpsStatus::Internal
        }
    }
}

fn opt(v: f64) -> Option<f64> {
    if v.is_nan() {
        None
    } else {
        Some(v)
    }
}

impl From<TailApprox> for CpsTailApprox {
    fn from(t: TailApprox) -> Self {
        Self {
            value: t.value,
            log_value: t.log_value,
            constant: t.constant,
            exponent_power: t.exponent_power,
            pre_asymptotic: t.pre_asymptotic,
        }
    }
}

impl From<ConstantEstimate> for CpsConstantEstimate {
    fn from(e: ConstantEstimate) -> Self {
        Self {
            value: e.value,
            std_error: e.std_error,
            n_replicates: e.n_replicates,
            step: e.grid.step,
            horizon: e.grid.horizon,
            n_points: e.grid.n_points,
        }
    }
}

impl From<TailEstimate> for CpsTailEstimate {
    fn from(e: TailEstimate) -> Self {
        Self {
            p_hat: e.p_hat,
            ci_low: e.ci_low,
            ci_high: e.ci_high,
            exceedances: e.exceedances,
            n_rep: e.n_rep,
            grid_m: e.grid_m,
            threshold: e.threshold,
        }
    }
}

fn stat_kind(k: CpsStatKind) -> StatKind {
    match k {
        CpsStatKind::Z1 => StatKind::Z1,
        CpsStatKind::Z2 => StatKind::Z2,
        CpsStatKind::Z3 => StatKind::Z3,
        CpsStatKind::Z4 => StatKind::Z4,
    }
}

/// Message for the last failed call on this thread. Valid until the next
/// call into the library from the same thread.
#[no_mangle]
pub extern "C" fn cps_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version, a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn cps_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copy `len` values into a new series (`len ≥ 2`, all finite).
///
/// # Safety
/// `values` must point to `len` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cps_series_new(values: *const f64, len: usize, out: *mut *mut CpsSeries) -> CpsStatus {
    guarded(out, || {
        if values.is_null() {
            return Err(Fail::Null("values"));
        }
        let v = std::slice::from_raw_parts(values, len).to_vec();
        Ok(Box::into_raw(Box::new(CpsSeries(ObservationSeries::new(v)?))))
    })
}

/// # Safety
/// `series` must come from [`cps_series_new`] and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn cps_series_free(series: *mut CpsSeries) {
    if !series.is_null() {
        drop(Box::from_raw(series));
    }
}

/// Number of observations, or 0 for a null handle.
///
/// # Safety
/// `series` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cps_series_len(series: *const CpsSeries) -> usize {
    series.as_ref().map_or(0, |s| s.0.len())
}

/// Compute a scan statistic. `mu0` and `delta` may be NaN when not needed.
///
/// # Safety
/// `series` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cps_statistic(
    series: *const CpsSeries,
    kind: CpsStatKind,
    mu0: f64,
    delta: f64,
    out: *mut CpsStatReport,
) -> CpsStatus {
    guarded(out, || {
        let s = series.as_ref().ok_or(Fail::Null("series"))?;
        let h = HypothesisParams::new(opt(mu0), opt(delta))?;
        let r = statistic(stat_kind(kind), &s.0, &h)?;
        Ok(CpsStatReport { value: r.value, i_star: r.i_star, j_star: r.j_star })
    })
}

/// Approximate p-value of an observed statistic for `m` observations.
/// `delta` is required for Z1–Z3 and ignored for Z4.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cps_pvalue(
    kind: CpsStatKind,
    m: usize,
    delta: f64,
    level: f64,
    out: *mut CpsTailApprox,
) -> CpsStatus {
    guarded(out, || Ok(statistic_pvalue(stat_kind(kind), m, opt(delta), level)?.0.into()))
}

/// Closed-form tail approximation. `x` is `u` for all kinds except P4, where it is `d`.
/// Unused parameters may be NaN.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cps_tail_formula(
    kind: CpsTailKind,
    c: f64,
    d: f64,
    x: f64,
    out: *mut CpsTailApprox,
) -> CpsStatus {
    guarded(out, || {
        let q = ContinuousProblemParams::new(c, d, x);
        let t = match kind {
            CpsTailKind::P1 => p1_fixed(&q)?,
            CpsTailKind::P2 => p2_fixed(&q)?,
            CpsTailKind::P3 => p3_fixed(&q)?,
            CpsTailKind::P4 => p4_tail(x)?,
            CpsTailKind::Free2 => p2_free_delta(c, x)?,
            CpsTailKind::Free3 => p3_free_delta(c, x)?,
        };
        Ok(t.into())
    })
}

/// A table holding the closed-form constants H₁ = 1 and H₂ = 1/√π.
#[no_mangle]
pub extern "C" fn cps_constant_table_new() -> *mut CpsConstantTable {
    Box::into_raw(Box::new(CpsConstantTable(ConstantTable::builtin())))
}

/// # Safety
/// `table` must come from [`cps_constant_table_new`] and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn cps_constant_table_free(table: *mut CpsConstantTable) {
    if !table.is_null() {
        drop(Box::from_raw(table));
    }
}

/// Register a user-supplied Pickands constant `H_α`.
///
/// # Safety
/// `table` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn cps_constant_table_set_pickands(
    table: *mut CpsConstantTable,
    alpha: f64,
    value: f64,
) -> CpsStatus {
    let mut unit = ();
    guarded(&mut unit, || {
        let t = table.as_mut().ok_or(Fail::Null("table"))?;
        t.0.insert_pickands(alpha, ConstantValue { value, source: ConstantSource::User });
        Ok(())
    })
}

/// Register a user-supplied constant `P_α^f` for the penalty `(b_over_a, c_over_sqrt_a)`.
///
/// # Safety
/// `table` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn cps_constant_table_set_piterbarg(
    table: *mut CpsConstantTable,
    alpha: f64,
    b_over_a: f64,
    c_over_sqrt_a: f64,
    value: f64,
) -> CpsStatus {
    let mut unit = ();
    guarded(&mut unit, || {
        let t = table.as_mut().ok_or(Fail::Null("table"))?;
        let pen = Penalty { b_over_a, c_over_sqrt_a };
        t.0.insert_piterbarg(alpha, pen, ConstantValue { value, source: ConstantSource::User });
        Ok(())
    })
}

/// General field tail approximation at level `u`. A null `table` uses the built-in constants.
///
/// # Safety
/// `params` must be readable, `table` null or live, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cps_field_tail(
    params: *const CpsAsymptoticParams,
    u: f64,
    table: *const CpsConstantTable,
    out: *mut CpsTailApprox,
) -> CpsStatus {
    guarded(out, || {
        let p = params.as_ref().ok_or(Fail::Null("params"))?;
        let ap = AsymptoticParams {
            s1: p.s1,
            s2: p.s2,
            a: p.a,
            b: p.b,
            alpha: p.alpha,
            beta: p.beta,
            c: p.c,
            trend: match p.trend {
                CpsTrend::Linear => Trend::Linear,
                CpsTrend::Quadratic => Trend::Quadratic,
            },
        };
        let tail = match table.as_ref() {
            Some(t) => theorem1_tail(&ap, u, &t.0)?,
            None => theorem1_tail(&ap, u, &ConstantTable::builtin())?,
        };
        Ok(tail.approx.into())
    })
}

/// Ψ(x) = P{N(0,1) > x}.
#[no_mangle]
pub extern "C" fn cps_norm_survival(x: f64) -> f64 {
    norm_survival(x)
}

/// ln Ψ(x), finite for every finite x.
#[no_mangle]
pub extern "C" fn cps_log_norm_survival(x: f64) -> f64 {
    log_norm_survival(x)
}

/// Monte Carlo estimate of `H_α(λ)` or its increment form (tilted estimator).
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cps_estimate_h(
    alpha: f64,
    lambda: f64,
    form: CpsHForm,
    step: f64,
    n_rep: usize,
    seed: u64,
    out: *mut CpsConstantEstimate,
) -> CpsStatus {
    guarded(out, || {
        let form = match form {
            CpsHForm::OfLambda => HForm::OfLambda,
            CpsHForm::Rate => HForm::Rate,
        };
        Ok(estimate_h(alpha, lambda, form, &McConfig::new(step, n_rep, seed))?.into())
    })
}

/// Monte Carlo estimate of `P_α^f(λ, λ1)` (tilted estimator).
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cps_estimate_p(
    alpha: f64,
    b_over_a: f64,
    c_over_sqrt_a: f64,
    lambda: f64,
    lambda1: f64,
    step: f64,
    n_rep: usize,
    seed: u64,
    out: *mut CpsConstantEstimate,
) -> CpsStatus {
    guarded(out, || {
        let pen = Penalty { b_over_a, c_over_sqrt_a };
        Ok(estimate_p(alpha, pen, lambda, lambda1, &McConfig::new(step, n_rep, seed))?.into())
    })
}

/// Monte Carlo estimate of `Q_α(λ, λ1)` (tilted estimator).
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cps_estimate_q(
    alpha: f64,
    lambda: f64,
    lambda1: f64,
    step: f64,
    n_rep: usize,
    seed: u64,
    out: *mut CpsConstantEstimate,
) -> CpsStatus {
    guarded(out, || Ok(estimate_q(alpha, lambda, lambda1, &McConfig::new(step, n_rep, seed))?.into()))
}

/// Exceedance frequency of a simulated field on `grid_m` intervals. `level`
/// is `u`, or `d` for P4. Unused parameters may be NaN.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cps_simulate_sup(
    kind: CpsTailKind,
    c: f64,
    d: f64,
    level: f64,
    grid_m: usize,
    n_rep: usize,
    seed: u64,
    out: *mut CpsTailEstimate,
) -> CpsStatus {
    guarded(out, || {
        let field = match kind {
            CpsTailKind::P1 => FieldKind::P1 { c, d },
            CpsTailKind::P2 => FieldKind::P2 { c, d },
            CpsTailKind::P3 => FieldKind::P3 { c, d },
            CpsTailKind::P4 => FieldKind::P4,
            CpsTailKind::Free2 => FieldKind::Free2 { c },
            CpsTailKind::Free3 => FieldKind::Free3 { c },
        };
        Ok(simulate_sup(field, level, grid_m, n_rep, seed)?.into())
    })
}

/// `Σ_{k≤terms} (4k²u² − 1)e^{−2k²u²}`, the tail of the Brownian-bridge range.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cps_kuiper_half_tail(u: f64, terms: usize, out: *mut f64) -> CpsStatus {
    guarded(out, || Ok(kuiper_half_tail(u, terms)?))
}
