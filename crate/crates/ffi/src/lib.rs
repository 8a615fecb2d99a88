//! C interface to `pathdecomp`.
//!
//! Every function returns a [`PdStatus`]. On failure the message is kept in a
//! thread-local slot readable with [`pd_last_error`]. Tables are opaque
//! handles created by [`pd_table_new`] and released with [`pd_table_free`].

use std::cell::{Cell, RefCell};
use std::ffi::{c_char, c_void, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use pathdecomp::market::{
    decompose_homogamy_change, homogamy_share, ContingencyTable, OddsRatioIpf, Period, SchemeName,
};
use pathdecomp::{decompose, Assignment, Error, FactorScenario, OutcomeFunction, Scheme};

/// Result code of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PdStatus {
    Ok = 0,
    NullPointer = 1,
    /// Bad argument or invalid table.
    InvalidArgument = 2,
    /// Too many factors for the requested scheme.
    Capacity = 3,
    /// IPF did not converge.
    Convergence = 4,
    /// The outcome callback failed or returned a non-finite value.
    Callback = 5,
    /// A Rust panic was caught at the boundary.
    Internal = 6,
}

/// Decomposition scheme for homogamy changes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PdScheme {
    /// Preferences switched first.
    SequentialXy = 0,
    /// Availability switched first.
    SequentialYx = 1,
    PathIndependent = 2,
    Shapley = 3,
}

/// Scheme for the generic callback decomposition.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PdGenericScheme {
    /// Factors switched in the order given by `order`.
    Sequential = 0,
    PathIndependent = 1,
    Shapley = 2,
}

/// Opaque contingency table.
pub struct PdTable(ContingencyTable);

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct PdHomogamyResult {
    pub preference: f64,
    pub availability: f64,
    pub interaction: f64,
    pub total: f64,
    pub observed_share_from: f64,
    pub observed_share_to: f64,
    /// Nonzero when a zero-cell adjustment was applied.
    pub zero_adjusted: i32,
    pub zero_adjustment: f64,
}

/// Outcome callback: `values` holds `n` factor values for one corner.
/// Write the outcome to `*out` and return 0, or return nonzero to abort.
pub type PdOutcomeFn =
    Option<extern "C" fn(values: *const f64, n: usize, user_data: *mut c_void, out: *mut f64) -> i32>;

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn fail(status: PdStatus, msg: impl Into<String>) -> PdStatus {
    set_error(msg);
    status
}

fn status_of(err: &Error) -> PdStatus {
    match err.root() {
        Error::Capacity(_) => PdStatus::Capacity,
        Error::Convergence { .. } => PdStatus::Convergence,
        Error::NonFinite { .. } => PdStatus::Callback,
        _ => PdStatus::InvalidArgument,
    }
}

fn guard(f: impl FnOnce() -> PdStatus) -> PdStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(PdStatus::Internal, format!("internal error: {msg}"))
        }
    }
}

/// Message of the last failed call on this thread, or NULL.
/// Valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn pd_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Creates a `k`×`k` table from row-major `counts` (rows = husbands).
///
/// # Safety
/// `counts` must point to `k * k` readable doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pd_table_new(k: usize, counts: *const f64, out: *mut *mut PdTable) -> PdStatus {
    guard(|| {
        if counts.is_null() || out.is_null() {
            return fail(PdStatus::NullPointer, "null pointer argument");
        }
        let Some(n) = k.checked_mul(k).filter(|&n| n > 0) else {
            return fail(PdStatus::InvalidArgument, format!("invalid table size {k}"));
        };
        let cells = std::slice::from_raw_parts(counts, n);
        let rows = cells.chunks(k).map(<[f64]>::to_vec).collect();
        match ContingencyTable::unlabelled(rows) {
            Ok(t) => {
                *out = Box::into_raw(Box::new(PdTable(t)));
                PdStatus::Ok
            }
            Err(e) => fail(status_of(&e), e.to_string()),
        }
    })
}

/// Releases a table. NULL is ignored.
///
/// # Safety
/// `table` must come from [`pd_table_new`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn pd_table_free(table: *mut PdTable) {
    if !table.is_null() {
        drop(Box::from_raw(table));
    }
}

/// Number of education levels.
///
/// # Safety
/// `table` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn pd_table_k(table: *const PdTable) -> usize {
    table.as_ref().map_or(0, |t| t.0.k())
}

/// Share of couples on the diagonal.
///
/// # Safety
/// `table` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pd_homogamy_share(table: *const PdTable, out: *mut f64) -> PdStatus {
    guard(|| {
        let (Some(t), false) = (table.as_ref(), out.is_null()) else {
            return fail(PdStatus::NullPointer, "null pointer argument");
        };
        match homogamy_share(&t.0) {
            Ok(v) => {
                *out = v;
                PdStatus::Ok
            }
            Err(e) => fail(status_of(&e), e.to_string()),
        }
    })
}

/// Decomposes the change in homogamy share from `t0` to `t1` into
/// preference, availability and interaction parts.
///
/// # Safety
/// `t0` and `t1` must be live handles and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pd_decompose_homogamy(
    t0: *const PdTable,
    t1: *const PdTable,
    scheme: PdScheme,
    ipf_tol: f64,
    ipf_max_iter: usize,
    zero_adjust: f64,
    out: *mut PdHomogamyResult,
) -> PdStatus {
    guard(|| {
        let (Some(t0), Some(t1), false) = (t0.as_ref(), t1.as_ref(), out.is_null()) else {
            return fail(PdStatus::NullPointer, "null pointer argument");
        };
        let mut model = OddsRatioIpf {
            zero_adjust,
            ..Default::default()
        };
        model.ipf.tol = ipf_tol;
        model.ipf.max_iter = ipf_max_iter;
        let name = match scheme {
            PdScheme::SequentialXy => SchemeName::SequentialXy,
            PdScheme::SequentialYx => SchemeName::SequentialYx,
            PdScheme::PathIndependent => SchemeName::PathIndependent,
            PdScheme::Shapley => SchemeName::Shapley,
        };
        match decompose_homogamy_change(&t0.0, &t1.0, Period::new(0, 1), &name.scheme(), &model) {
            Ok(d) => {
                *out = PdHomogamyResult {
                    preference: d.preference,
                    availability: d.availability,
                    interaction: d.interaction,
                    total: d.total,
                    observed_share_from: d.metadata.observed_share_from,
                    observed_share_to: d.metadata.observed_share_to,
                    zero_adjusted: d.metadata.zero_adjustment.is_some() as i32,
                    zero_adjustment: d.metadata.zero_adjustment.unwrap_or(0.0),
                };
                PdStatus::Ok
            }
            Err(e) => fail(status_of(&e), e.to_string()),
        }
    })
}

struct Callback {
    f: extern "C" fn(*const f64, usize, *mut c_void, *mut f64) -> i32,
    user_data: *mut c_void,
    failed: Cell<Option<i32>>,
}

impl OutcomeFunction<f64> for Callback {
    fn evaluate(&self, a: &Assignment<'_, f64>) -> pathdecomp::Result<f64> {
        let values: Vec<f64> = a.iter().map(|(_, v)| *v).collect();
        let mut out = f64::NAN;
        let rc = (self.f)(values.as_ptr(), values.len(), self.user_data, &mut out);
        if rc != 0 {
            self.failed.set(Some(rc));
            return Err(Error::Domain(format!("outcome callback returned {rc}")));
        }
        Ok(out)
    }
}

/// Decomposes `f(final) - f(baseline)` over `n` scalar factors.
///
/// `order` is a permutation of `0..n` and is read only for the sequential
/// scheme. `components` receives `n` values. `interaction` and `total` are
/// optional.
///
/// # Safety
/// `baseline`, `final_values` and `components` must hold `n` doubles;
/// `order`, when read, must hold `n` indices.
#[no_mangle]
pub unsafe extern "C" fn pd_decompose(
    n: usize,
    baseline: *const f64,
    final_values: *const f64,
    scheme: PdGenericScheme,
    order: *const usize,
    outcome: PdOutcomeFn,
    user_data: *mut c_void,
    components: *mut f64,
    interaction: *mut f64,
    total: *mut f64,
) -> PdStatus {
    guard(|| {
        let Some(f) = outcome else {
            return fail(PdStatus::NullPointer, "null outcome callback");
        };
        if n > 0 && (baseline.is_null() || final_values.is_null() || components.is_null()) {
            return fail(PdStatus::NullPointer, "null pointer argument");
        }
        let (b, fv) = if n == 0 {
            (&[][..], &[][..])
        } else {
            (
                std::slice::from_raw_parts(baseline, n),
                std::slice::from_raw_parts(final_values, n),
            )
        };
        let names: Vec<String> = (0..n).map(|i| format!("f{i}")).collect();
        let scenario = match FactorScenario::new(
            names
                .iter()
                .zip(b.iter().zip(fv))
                .map(|(s, (&x, &y))| (s.as_str(), x, y)),
        ) {
            Ok(s) => s,
            Err(e) => return fail(status_of(&e), e.to_string()),
        };
        let scheme = match scheme {
            PdGenericScheme::Sequential => {
                if order.is_null() {
                    return fail(PdStatus::NullPointer, "sequential scheme needs an order");
                }
                let idx = if n == 0 {
                    &[][..]
                } else {
                    std::slice::from_raw_parts(order, n)
                };
                let mut seq = Vec::with_capacity(n);
                for &i in idx {
                    match names.get(i) {
                        Some(s) => seq.push(s.clone()),
                        None => return fail(PdStatus::InvalidArgument, format!("order index {i} out of range")),
                    }
                }
                Scheme::Sequential(seq)
            }
            PdGenericScheme::PathIndependent => Scheme::PathIndependent,
            PdGenericScheme::Shapley => Scheme::Shapley,
        };
        let cb = Callback {
            f,
            user_data,
            failed: Cell::new(None),
        };
        match decompose(&cb, &scenario, &scheme) {
            Ok(r) => {
                for (i, (_, v)) in r.components.iter().enumerate() {
                    *components.add(i) = *v;
                }
                if !interaction.is_null() {
                    *interaction = r.interaction;
                }
                if !total.is_null() {
                    *total = r.total;
                }
                PdStatus::Ok
            }
            Err(e) if cb.failed.get().is_some() => fail(PdStatus::Callback, e.to_string()),
            Err(e) => fail(status_of(&e), e.to_string()),
        }
    })
}
