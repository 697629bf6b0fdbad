use std::ffi::CStr;
use std::ptr;

use bestarm_ffi::*;

fn last_error() -> String {
    let p = bestarm_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn hard(n: usize, eps: f64) -> *mut BestarmInstance {
    let mut handle = ptr::null_mut();
    let status = unsafe { bestarm_hard_instance_new(n, eps, -1, &mut handle) };
    assert_eq!(status, BestarmStatus::Ok);
    handle
}

#[test]
fn instance_lifecycle() {
    let means = [0.2, 0.9, 0.4];
    let mut handle = ptr::null_mut();
    let status = unsafe { bestarm_instance_new(means.as_ptr(), means.len(), &mut handle) };
    assert_eq!(status, BestarmStatus::Ok);
    assert_eq!(unsafe { bestarm_instance_n_arms(handle) }, 3);
    let mut copy = [0.0; 3];
    assert_eq!(
        unsafe { bestarm_instance_means(handle, copy.as_mut_ptr(), 3) },
        BestarmStatus::Ok
    );
    assert_eq!(copy, means);
    assert_eq!(
        unsafe { bestarm_instance_means(handle, copy.as_mut_ptr(), 2) },
        BestarmStatus::BufferTooSmall
    );
    unsafe { bestarm_instance_free(handle) };
    unsafe { bestarm_instance_free(ptr::null_mut()) };
}

#[test]
fn invalid_input_sets_message() {
    let means = [0.5, 1.5];
    let mut handle = ptr::null_mut();
    let status = unsafe { bestarm_instance_new(means.as_ptr(), 2, &mut handle) };
    assert_eq!(status, BestarmStatus::InvalidArgument);
    assert!(handle.is_null());
    assert!(last_error().contains("1.5"), "{}", last_error());

    let status = unsafe { bestarm_hard_instance_new(4, 0.1, 0, &mut handle) };
    assert_eq!(status, BestarmStatus::InvalidArgument);
}

#[test]
fn null_pointers_are_reported() {
    let mut out = 0.0;
    assert_eq!(
        unsafe { bestarm_bernoulli_kl(0.5, 0.7, ptr::null_mut()) },
        BestarmStatus::NullPointer
    );
    assert_eq!(
        unsafe {
            bestarm_osmd_regret(
                ptr::null(),
                10,
                BestarmEstimator::CenteredImportanceWeighted,
                0,
                0,
                &mut out,
            )
        },
        BestarmStatus::NullPointer
    );
    assert!(last_error().contains("instance"));
}

#[test]
fn kl_matches_closed_form() {
    let mut out = 0.0;
    assert_eq!(
        unsafe { bestarm_bernoulli_kl(0.5, 0.7, &mut out) },
        BestarmStatus::Ok
    );
    let expected = 0.5 * (0.5f64 / 0.7).ln() + 0.5 * (0.5f64 / 0.3).ln();
    assert!((out - expected).abs() < 1e-15);
    assert_eq!(
        unsafe { bestarm_bernoulli_kl(0.5, 1.0, &mut out) },
        BestarmStatus::Ok
    );
    assert!(out.is_infinite());
}

#[test]
fn pac_bar_fills_buffers() {
    let inst = hard(10, 0.1);
    let mut retained = [usize::MAX; 10];
    let mut out = BestarmOutcome::default();
    let status = unsafe {
        bestarm_pac_bar(
            inst,
            0.1,
            0.2,
            4,
            7,
            0,
            retained.as_mut_ptr(),
            retained.len(),
            &mut out,
        )
    };
    assert_eq!(status, BestarmStatus::Ok);
    assert_eq!(out.retained_len, 4);
    assert!(retained[..4].windows(2).all(|w| w[0] < w[1]));
    assert!(retained[..4].contains(&out.chosen_arm));
    assert!(out.samples_used > 0);

    let mut small = [0usize; 2];
    let status = unsafe {
        bestarm_pac_bar(
            inst,
            0.1,
            0.2,
            4,
            7,
            0,
            small.as_mut_ptr(),
            small.len(),
            &mut out,
        )
    };
    assert_eq!(status, BestarmStatus::BufferTooSmall);
    assert_eq!(out.retained_len, 4);
    unsafe { bestarm_instance_free(inst) };
}

#[test]
fn calls_are_reproducible_from_seed_and_stream() {
    let inst = hard(10, 0.15);
    let run = |stream| {
        let mut retained = [0usize; 3];
        let mut out = BestarmOutcome::default();
        let status = unsafe {
            bestarm_r_bar_regret(
                inst,
                3,
                0.1,
                BestarmEstimator::CenteredImportanceWeighted,
                42,
                stream,
                retained.as_mut_ptr(),
                3,
                &mut out,
            )
        };
        assert_eq!(status, BestarmStatus::Ok);
        (retained, out)
    };
    let (a, oa) = run(1);
    let (b, ob) = run(1);
    assert_eq!(a, b);
    assert_eq!(oa, ob);
    assert_eq!(oa.samples_used, 2000);
    unsafe { bestarm_instance_free(inst) };
}

#[test]
fn r_bar_sample_uses_closed_form_budget() {
    let inst = hard(10, 0.15);
    let mut retained = [0usize; 3];
    let mut out = BestarmOutcome::default();
    let status = unsafe {
        bestarm_r_bar_sample(
            inst,
            3,
            0.1,
            BestarmEstimator::Unweighted,
            1,
            2,
            retained.as_mut_ptr(),
            3,
            &mut out,
        )
    };
    assert_eq!(status, BestarmStatus::Ok);
    assert_eq!(out.samples_used, 1458);
    assert_eq!(out.retained_len, 3);
    unsafe { bestarm_instance_free(inst) };
}

#[test]
fn single_arm_calls() {
    let inst = hard(5, 0.1);
    let mut out = BestarmOutcome::default();
    let status = unsafe { bestarm_median_elimination(inst, 0.2, 0.1, 3, 0, &mut out) };
    assert_eq!(status, BestarmStatus::Ok);
    assert_eq!(out.retained_len, 1);
    assert!(out.chosen_arm < 5);
    let status = unsafe {
        bestarm_find_best(
            inst,
            500,
            BestarmEstimator::CenteredImportanceWeighted,
            3,
            0,
            &mut out,
        )
    };
    assert_eq!(status, BestarmStatus::Ok);
    assert_eq!(out.samples_used, 500);
    let mut regret = -1.0;
    let status = unsafe {
        bestarm_osmd_regret(
            inst,
            1000,
            BestarmEstimator::CenteredImportanceWeighted,
            3,
            0,
            &mut regret,
        )
    };
    assert_eq!(status, BestarmStatus::Ok);
    assert!((0.0..=100.0).contains(&regret));
    let status = unsafe { bestarm_median_elimination(inst, 2.0, 0.1, 3, 0, &mut out) };
    assert_eq!(status, BestarmStatus::InvalidArgument);
    unsafe { bestarm_instance_free(inst) };
}

#[test]
fn header_declares_the_api() {
    let header = include_str!("../include/bestarm.h");
    for symbol in [
        "typedef struct BestarmInstance BestarmInstance;",
        "BESTARM_STATUS_OK = 0",
        "BESTARM_STATUS_PANIC",
        "bestarm_instance_new(",
        "bestarm_hard_instance_new(",
        "bestarm_instance_free(",
        "bestarm_last_error(",
        "bestarm_pac_bar(",
        "bestarm_r_bar_sample(",
        "bestarm_r_bar_regret(",
        "bestarm_find_best(",
        "bestarm_median_elimination(",
        "bestarm_osmd_regret(",
        "bestarm_bernoulli_kl(",
    ] {
        assert!(header.contains(symbol), "missing {symbol}");
    }
}
