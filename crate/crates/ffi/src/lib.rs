//! C ABI over the `bestarm` library.
//!
//! Instances are opaque handles created by `bestarm_instance_new` or
//! `bestarm_hard_instance_new` and released with `bestarm_instance_free`.
//! Every fallible function returns a [`BestarmStatus`]; on failure the
//! message is available from `bestarm_last_error` on the same thread.
//! Randomness is addressed by `(seed, stream)`, so a call is reproducible
//! from its arguments.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use bestarm::explore::{find_best, median_elimination, pac_bar, r_bar_regret, r_bar_sample};
use bestarm::kl::bernoulli_kl;
use bestarm::osmd::run_osmd;
use bestarm::{
    hard_instance, BernoulliInstance, Error, EstimatorVariant, OsmdConfig, PacParams,
    RetentionResult, RngStream,
};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BestarmStatus {
    Ok = 0,
    InvalidArgument = 1,
    NumericError = 2,
    NullPointer = 3,
    BufferTooSmall = 4,
    Panic = 5,
}

/// Loss estimator used by mirror-descent based calls.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BestarmEstimator {
    CenteredImportanceWeighted = 0,
    Unweighted = 1,
}

impl From<BestarmEstimator> for EstimatorVariant {
    fn from(e: BestarmEstimator) -> Self {
        match e {
            BestarmEstimator::CenteredImportanceWeighted => {
                EstimatorVariant::CenteredImportanceWeighted
            }
            BestarmEstimator::Unweighted => EstimatorVariant::Unweighted,
        }
    }
}

/// Opaque Bernoulli instance.
pub struct BestarmInstance {
    inner: BernoulliInstance,
}

/// Scalar outcome of a selection or retention call.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BestarmOutcome {
    /// Number of retained arms; for single-arm calls this is 1.
    pub retained_len: usize,
    /// Arm returned by the final identification step.
    pub chosen_arm: usize,
    pub samples_used: u64,
    /// Pseudo-regret of all pulls made.
    pub regret: f64,
    /// Best mean minus the best retained mean.
    pub gap: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let message = CString::new(message.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(message));
}

fn fail(status: BestarmStatus, message: impl Into<String>) -> BestarmStatus {
    set_last_error(message.into());
    status
}

fn status_of(err: Error) -> BestarmStatus {
    let status = match err {
        Error::Numeric(_) => BestarmStatus::NumericError,
        _ => BestarmStatus::InvalidArgument,
    };
    fail(status, err.to_string())
}

/// Run `body`, converting errors and panics into status codes.
fn guard(body: impl FnOnce() -> Result<(), BestarmStatus>) -> BestarmStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => BestarmStatus::Ok,
        Ok(Err(status)) => status,
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            fail(BestarmStatus::Panic, format!("panic: {message}"))
        }
    }
}

fn lift<T>(r: bestarm::Result<T>) -> Result<T, BestarmStatus> {
    r.map_err(status_of)
}

fn non_null<T>(p: *const T, name: &str) -> Result<(), BestarmStatus> {
    if p.is_null() {
        Err(fail(BestarmStatus::NullPointer, format!("{name} is NULL")))
    } else {
        Ok(())
    }
}

/// # Safety
/// `handle` must be NULL or a live pointer from this library.
unsafe fn instance<'a>(
    handle: *const BestarmInstance,
) -> Result<&'a BernoulliInstance, BestarmStatus> {
    non_null(handle, "instance")?;
    Ok(&(*handle).inner)
}

fn osmd_config(rounds: u64, estimator: BestarmEstimator) -> OsmdConfig {
    OsmdConfig::new(rounds).with_variant(estimator.into())
}

/// # Safety
/// `retained` must be valid for `capacity` writes, `out` for one write.
unsafe fn write_retention(
    inst: &BernoulliInstance,
    res: &RetentionResult,
    retained: *mut usize,
    capacity: usize,
    out: *mut BestarmOutcome,
) -> Result<(), BestarmStatus> {
    *out = BestarmOutcome {
        retained_len: res.retained.len(),
        chosen_arm: res
            .chosen_arm
            .or_else(|| res.retained.first().copied())
            .unwrap_or(0),
        samples_used: res.samples_used,
        regret: res.regret(inst),
        gap: res.gap(inst),
    };
    if res.retained.len() > capacity {
        return Err(fail(
            BestarmStatus::BufferTooSmall,
            format!(
                "{} retained arms do not fit in capacity {capacity}",
                res.retained.len()
            ),
        ));
    }
    if !res.retained.is_empty() {
        non_null(retained, "retained")?;
        ptr::copy_nonoverlapping(res.retained.as_ptr(), retained, res.retained.len());
    }
    Ok(())
}

/// Message of the last failed call on this thread, or NULL if none failed.
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn bestarm_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Create an instance from `n` arm means in `[0, 1]`.
///
/// # Safety
/// `means` must be valid for `n` reads and `out` for one write.
#[no_mangle]
pub unsafe extern "C" fn bestarm_instance_new(
    means: *const f64,
    n: usize,
    out: *mut *mut BestarmInstance,
) -> BestarmStatus {
    guard(|| {
        non_null(out, "out")?;
        non_null(means, "means")?;
        let means = std::slice::from_raw_parts(means, n).to_vec();
        let inner = lift(BernoulliInstance::new(means))?;
        *out = Box::into_raw(Box::new(BestarmInstance { inner }));
        Ok(())
    })
}

/// Create the hard instance with `n` arms: arm 0 at `1/2 + eps`, the rest at
/// `1/2`, and arm `j` at `1/2 + 2 eps` when `j` is nonnegative.
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn bestarm_hard_instance_new(
    n: usize,
    eps: f64,
    j: i64,
    out: *mut *mut BestarmInstance,
) -> BestarmStatus {
    guard(|| {
        non_null(out, "out")?;
        let raised = if j < 0 { None } else { Some(j as usize) };
        let inner = lift(hard_instance(n, eps, raised))?;
        *out = Box::into_raw(Box::new(BestarmInstance { inner }));
        Ok(())
    })
}

/// Release an instance. NULL is ignored.
///
/// # Safety
/// `handle` must be NULL or a pointer from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bestarm_instance_free(handle: *mut BestarmInstance) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Number of arms, or 0 for NULL.
///
/// # Safety
/// `handle` must be NULL or a live instance.
#[no_mangle]
pub unsafe extern "C" fn bestarm_instance_n_arms(handle: *const BestarmInstance) -> usize {
    if handle.is_null() {
        0
    } else {
        (*handle).inner.n_arms()
    }
}

/// Copy the arm means into `means`, which must hold `n_arms` values.
///
/// # Safety
/// `handle` must be a live instance and `means` valid for `capacity` writes.
#[no_mangle]
pub unsafe extern "C" fn bestarm_instance_means(
    handle: *const BestarmInstance,
    means: *mut f64,
    capacity: usize,
) -> BestarmStatus {
    guard(|| {
        let inst = instance(handle)?;
        if capacity < inst.n_arms() {
            return Err(fail(
                BestarmStatus::BufferTooSmall,
                "means buffer too small",
            ));
        }
        non_null(means, "means")?;
        ptr::copy_nonoverlapping(inst.means().as_ptr(), means, inst.n_arms());
        Ok(())
    })
}

/// Bernoulli KL divergence `d(x, y)`; infinite when `y` is 0 or 1 and differs from `x`.
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn bestarm_bernoulli_kl(x: f64, y: f64, out: *mut f64) -> BestarmStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = lift(bernoulli_kl(x, y))?;
        Ok(())
    })
}

/// Pseudo-regret of `rounds` rounds of mirror descent over all arms.
///
/// # Safety
/// `handle` must be a live instance and `regret` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn bestarm_osmd_regret(
    handle: *const BestarmInstance,
    rounds: u64,
    estimator: BestarmEstimator,
    seed: u64,
    stream: u64,
    regret: *mut f64,
) -> BestarmStatus {
    guard(|| {
        let inst = instance(handle)?;
        non_null(regret, "regret")?;
        let arms: Vec<usize> = (0..inst.n_arms()).collect();
        let cfg = osmd_config(rounds, estimator);
        let stats = lift(run_osmd(
            &arms,
            inst,
            &cfg,
            &mut RngStream::new(seed, stream),
        ))?;
        *regret = stats.regret(inst);
        Ok(())
    })
}

/// (eps, delta)-PAC identification over all arms by median elimination.
///
/// # Safety
/// `handle` must be a live instance and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn bestarm_median_elimination(
    handle: *const BestarmInstance,
    eps: f64,
    delta: f64,
    seed: u64,
    stream: u64,
    out: *mut BestarmOutcome,
) -> BestarmStatus {
    guard(|| {
        let inst = instance(handle)?;
        non_null(out, "out")?;
        let arms: Vec<usize> = (0..inst.n_arms()).collect();
        let res = lift(median_elimination(
            &arms,
            eps,
            delta,
            inst,
            &mut RngStream::new(seed, stream),
        ))?;
        *out = BestarmOutcome {
            retained_len: 1,
            chosen_arm: res.arm,
            samples_used: res.samples,
            regret: res.stats.regret(inst),
            gap: inst.gap(res.arm),
        };
        Ok(())
    })
}

/// Mirror descent for `rounds` rounds, then one arm drawn in proportion to its pulls.
///
/// # Safety
/// `handle` must be a live instance and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn bestarm_find_best(
    handle: *const BestarmInstance,
    rounds: u64,
    estimator: BestarmEstimator,
    seed: u64,
    stream: u64,
    out: *mut BestarmOutcome,
) -> BestarmStatus {
    guard(|| {
        let inst = instance(handle)?;
        non_null(out, "out")?;
        let arms: Vec<usize> = (0..inst.n_arms()).collect();
        let cfg = osmd_config(rounds, estimator);
        let (arm, stats) = lift(find_best(
            &arms,
            rounds,
            inst,
            &cfg,
            &mut RngStream::new(seed, stream),
        ))?;
        *out = BestarmOutcome {
            retained_len: 1,
            chosen_arm: arm,
            samples_used: stats.rounds(),
            regret: stats.regret(inst),
            gap: inst.gap(arm),
        };
        Ok(())
    })
}

/// (eps, delta)-PAC retention of `m` arms. Retained arms are written to
/// `retained` in ascending order; `out` is filled even when the buffer is
/// too small, so `out->retained_len` tells the required capacity.
///
/// # Safety
/// `handle` must be a live instance, `retained` valid for `capacity` writes
/// and `out` for one write.
#[no_mangle]
pub unsafe extern "C" fn bestarm_pac_bar(
    handle: *const BestarmInstance,
    eps: f64,
    delta: f64,
    m: usize,
    seed: u64,
    stream: u64,
    retained: *mut usize,
    capacity: usize,
    out: *mut BestarmOutcome,
) -> BestarmStatus {
    guard(|| {
        let inst = instance(handle)?;
        non_null(out, "out")?;
        let params = lift(PacParams::new(eps, delta, m))?;
        let res = lift(pac_bar(&params, inst, &mut RngStream::new(seed, stream)))?;
        write_retention(inst, &res, retained, capacity, out)
    })
}

/// Retention of `m` arms with expected gap below `r` at minimal sample cost.
/// Buffers behave as in `bestarm_pac_bar`.
///
/// # Safety
/// As for `bestarm_pac_bar`.
#[no_mangle]
pub unsafe extern "C" fn bestarm_r_bar_sample(
    handle: *const BestarmInstance,
    m: usize,
    r: f64,
    estimator: BestarmEstimator,
    seed: u64,
    stream: u64,
    retained: *mut usize,
    capacity: usize,
    out: *mut BestarmOutcome,
) -> BestarmStatus {
    guard(|| {
        let inst = instance(handle)?;
        non_null(out, "out")?;
        let cfg = osmd_config(0, estimator);
        let res = lift(r_bar_sample(
            m,
            r,
            inst,
            &cfg,
            &mut RngStream::new(seed, stream),
        ))?;
        write_retention(inst, &res, retained, capacity, out)
    })
}

/// Retention of `m` arms with expected gap below `r` at low regret.
/// Buffers behave as in `bestarm_pac_bar`.
///
/// # Safety
/// As for `bestarm_pac_bar`.
#[no_mangle]
pub unsafe extern "C" fn bestarm_r_bar_regret(
    handle: *const BestarmInstance,
    m: usize,
    r: f64,
    estimator: BestarmEstimator,
    seed: u64,
    stream: u64,
    retained: *mut usize,
    capacity: usize,
    out: *mut BestarmOutcome,
) -> BestarmStatus {
    guard(|| {
        let inst = instance(handle)?;
        non_null(out, "out")?;
        let cfg = osmd_config(0, estimator);
        let res = lift(r_bar_regret(
            m,
            r,
            inst,
            &cfg,
            &mut RngStream::new(seed, stream),
        ))?;
        write_retention(inst, &res, retained, capacity, out)
    })
}
