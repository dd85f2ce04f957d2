use std::ffi::CStr;
use std::ptr;

use nehari_lab_ffi::*;

fn last_error() -> String {
    let p = nl_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn version_is_a_c_string() {
    let v = unsafe { CStr::from_ptr(nl_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn grid_lifecycle_and_buffers() {
    let mut g: *mut NlGrid = ptr::null_mut();
    assert_eq!(unsafe { nl_grid_new(128, 10.0, NlScheme::Uniform, &mut g) }, NlStatus::Ok);
    assert_eq!(unsafe { nl_grid_len(g) }, 128);
    let mut buf = vec![0.0; 128];
    assert_eq!(unsafe { nl_grid_nodes(g, buf.as_mut_ptr(), buf.len()) }, NlStatus::Ok);
    assert!(buf[0] > 0.0 && buf.windows(2).all(|w| w[0] < w[1]));
    assert!((buf[127] - 10.0).abs() < 1e-12);
    let mut small = vec![0.0; 10];
    assert_eq!(unsafe { nl_grid_nodes(g, small.as_mut_ptr(), small.len()) }, NlStatus::BufferTooSmall);
    assert!(last_error().contains("128"));
    unsafe { nl_grid_free(g) };
    unsafe { nl_grid_free(ptr::null_mut()) };
}

#[test]
fn invalid_arguments_map_to_codes() {
    let mut g: *mut NlGrid = ptr::null_mut();
    assert_eq!(unsafe { nl_grid_new(8, 10.0, NlScheme::Log, &mut g) }, NlStatus::InvalidArgument);
    assert!(g.is_null());
    assert!(last_error().contains("n = 8"));
    assert_eq!(unsafe { nl_grid_new(128, 10.0, NlScheme::Log, ptr::null_mut()) }, NlStatus::NullPointer);
    let (mut s, mut gm) = (0.0, 0.0);
    assert_eq!(unsafe { nl_g_beta(5.0, 1.0, &mut s, &mut gm) }, NlStatus::InvalidArgument);
    assert!(unsafe { nl_report_energy(ptr::null()) }.is_nan());
    assert_eq!(unsafe { nl_report_converged(ptr::null()) }, 0);
}

#[test]
fn fibering_roots_of_the_quadratic_case() {
    let mut r = NlRoots { count: 0, t_minus: 0.0, t_plus: 0.0, class_minus: 0, class_plus: 0 };
    assert_eq!(unsafe { nl_fibering_roots(1.0, 1.0, 3.0, 3.0, 1.0, &mut r) }, NlStatus::Ok);
    assert_eq!(r.count, 2);
    assert!((r.t_minus - (3.0 - 5f64.sqrt()) / 2.0).abs() < 1e-12);
    assert!((r.t_plus - (3.0 + 5f64.sqrt()) / 2.0).abs() < 1e-12);
    assert_eq!((r.class_minus, r.class_plus), (1, 3));
    assert_eq!(unsafe { nl_fibering_roots(1.0, 1.0, 0.5, 3.0, 1.0, &mut r) }, NlStatus::Ok);
    assert_eq!(r.count, 0);
    assert!(r.t_minus.is_nan());
}

#[test]
fn g_beta_half_split() {
    let (mut s, mut g) = (0.0, 0.0);
    assert_eq!(unsafe { nl_g_beta(3.0, 1.0, &mut s, &mut g) }, NlStatus::Ok);
    assert!((s - 0.5).abs() < 1e-12);
    assert!((g - 2f64.sqrt()).abs() < 1e-12);
}

#[test]
fn thresholds_and_solve_round_trip() {
    let mut g: *mut NlGrid = ptr::null_mut();
    assert_eq!(unsafe { nl_grid_new(1024, 30.0, NlScheme::Log, &mut g) }, NlStatus::Ok);

    let mut json = ptr::null_mut();
    assert_eq!(unsafe { nl_thresholds_json(g, 2.5, 1.0, 0.0, 1.0, &mut json) }, NlStatus::Ok);
    let text = unsafe { CStr::from_ptr(json) }.to_str().unwrap().to_owned();
    unsafe { nl_string_free(json) };
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["C_p_beta"].as_f64(), Some(0.08));

    let mut rep: *mut NlReport = ptr::null_mut();
    assert_eq!(unsafe { nl_solve(g, 2.5, 0.0020262, 1.0, 1.0, NlSolveMode::NehariMinus, &mut rep) }, NlStatus::Ok);
    assert_eq!(unsafe { nl_report_converged(rep) }, 1);
    assert!(unsafe { nl_report_energy(rep) } > 0.0);
    assert!(unsafe { nl_report_residual(rep) } < 1e-6);
    assert_eq!(unsafe { nl_report_class(rep) }, 1);
    let mut u = vec![0.0; 1024];
    assert_eq!(unsafe { nl_report_profile(rep, 0, u.as_mut_ptr(), u.len()) }, NlStatus::Ok);
    assert!(u[0] > 0.0);
    assert_eq!(unsafe { nl_report_profile(rep, 2, u.as_mut_ptr(), u.len()) }, NlStatus::InvalidArgument);
    let mut json = ptr::null_mut();
    assert_eq!(unsafe { nl_report_json(rep, &mut json) }, NlStatus::Ok);
    let text = unsafe { CStr::from_ptr(json) }.to_str().unwrap().to_owned();
    unsafe { nl_string_free(json) };
    assert!(text.contains("\"mode\":\"nehari_minus\""));
    unsafe { nl_report_free(rep) };

    // λ beyond the Minus-branch regime: no start with a Minus root exists
    let mut rep: *mut NlReport = ptr::null_mut();
    let st = unsafe { nl_solve(g, 2.5, 50.0, 0.0, 1.0, NlSolveMode::NehariMinus, &mut rep) };
    assert_eq!(st, NlStatus::NoBranch);
    assert!(rep.is_null());
    unsafe { nl_grid_free(g) };
}
