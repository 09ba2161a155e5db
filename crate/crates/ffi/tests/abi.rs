use std::ffi::CStr;
use std::ptr;

use roughness_ffi::*;

fn last_error() -> String {
    let p = rough_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn cubic(level: u32) -> *mut RoughPath {
    let n = 1usize << level;
    let v: Vec<f64> = (0..=n).map(|i| (i as f64 / n as f64).powi(3)).collect();
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { rough_path_from_values(v.as_ptr(), v.len(), &mut h) }, RoughStatus::Ok);
    h
}

#[test]
fn path_round_trip() {
    let v = [0.0, 0.5, 0.25, 1.0, -2.0];
    let mut h = ptr::null_mut();
    unsafe {
        assert_eq!(rough_path_from_values(v.as_ptr(), v.len(), &mut h), RoughStatus::Ok);
        assert_eq!(rough_path_len(h), 5);
        let mut level = 0;
        assert_eq!(rough_path_level(h, &mut level), RoughStatus::Ok);
        assert_eq!(level, 2);
        let mut back = [0.0; 5];
        assert_eq!(rough_path_copy_values(h, back.as_mut_ptr(), back.len()), RoughStatus::Ok);
        assert_eq!(back, v);
        assert_eq!(rough_path_copy_values(h, back.as_mut_ptr(), 4), RoughStatus::InvalidArgument);
        rough_path_free(h);
        rough_path_free(ptr::null_mut());
    }
}

#[test]
fn bad_length_is_rejected_with_message() {
    let v = [0.0; 6];
    let mut h = ptr::null_mut();
    let s = unsafe { rough_path_from_values(v.as_ptr(), v.len(), &mut h) };
    assert_eq!(s, RoughStatus::InvalidArgument);
    assert!(h.is_null());
    assert!(last_error().contains('6'));
}

#[test]
fn null_pointers() {
    let mut x = 0.0;
    unsafe {
        assert_eq!(rough_fgn_autocov(1, 0.3, ptr::null_mut()), RoughStatus::NullPointer);
        assert_eq!(rough_r_hat(ptr::null(), 3, &mut x), RoughStatus::NullPointer);
        assert_eq!(rough_path_len(ptr::null()), 0);
        assert_eq!(rough_path_from_values(ptr::null(), 3, &mut ptr::null_mut()), RoughStatus::NullPointer);
    }
}

#[test]
fn autocov_and_domain() {
    let mut g = 0.0;
    unsafe {
        assert_eq!(rough_fgn_autocov(0, 0.3, &mut g), RoughStatus::Ok);
        assert_eq!(g, 1.0);
        assert_eq!(rough_fgn_autocov(1, 0.5, &mut g), RoughStatus::Ok);
        assert!(g.abs() < 1e-15);
        assert_eq!(rough_fgn_autocov(1, 1.2, &mut g), RoughStatus::InvalidArgument);
    }
    assert!(last_error().to_lowercase().contains("hurst"));
}

#[test]
fn cubic_estimates() {
    let h = cubic(14);
    let alphas = [1.0; 4];
    let mut r = 0.0;
    let mut est = RoughEstimate::default();
    unsafe {
        assert_eq!(rough_r_hat(h, 10, &mut r), RoughStatus::Ok);
        assert!((r - (2.0 - 1.5f64.log2() / 10.0)).abs() < 1e-12);
        assert_eq!(rough_r_seq(h, 10, 3, alphas.as_ptr(), &mut est), RoughStatus::Ok);
        assert!((est.r_seq - 2.0).abs() < 1e-10);
        assert_eq!(est.r_hat, r);
        assert!((est.eta_seq - est.lambda_star.exp2()).abs() < 1e-12 * est.eta_seq);
        assert_eq!(rough_r_hat(h, 13, &mut r), RoughStatus::InsufficientResolution);
        assert_eq!(rough_r_seq(h, 4, 3, alphas.as_ptr(), &mut est), RoughStatus::InsufficientResolution);
        rough_path_free(h);
    }
}

#[test]
fn quadratic_is_degenerate() {
    let n = 1usize << 8;
    let v: Vec<f64> = (0..=n).map(|i| (i as f64 / n as f64).powi(2)).collect();
    let mut h = ptr::null_mut();
    let mut r = 0.0;
    unsafe {
        assert_eq!(rough_path_from_values(v.as_ptr(), v.len(), &mut h), RoughStatus::Ok);
        assert_eq!(rough_r_hat(h, 5, &mut r), RoughStatus::Degenerate);
        rough_path_free(h);
    }
}

#[test]
fn beta_weights() {
    let alphas = [1.0, 0.0];
    let mut beta = [0.0; 3];
    unsafe {
        assert_eq!(rough_beta_coeffs(10, 1, alphas.as_ptr(), beta.as_mut_ptr(), 3), RoughStatus::Ok);
        assert_eq!(rough_beta_coeffs(10, 1, alphas.as_ptr(), beta.as_mut_ptr(), 2), RoughStatus::InvalidArgument);
    }
    // k = 8, 9, 10
    for (b, want) in beta.iter().zip([0.0, -9.0, 10.0]) {
        assert!((b - want).abs() < 1e-12, "{beta:?}");
    }
}

#[test]
fn simulate_observed_is_seeded() {
    let params = RoughProcessParams {
        model: RoughModel::Fou,
        hurst: 0.2,
        x0: 2.0,
        rho: 0.2,
        mu: 2.0,
        drift: 0.0,
        transform: RoughTransform::ExpTwoT,
        target_level: 10,
        oversample_q: 2,
        backend: RoughBackend::Circulant,
    };
    let read = |seed| {
        let mut h = ptr::null_mut();
        unsafe {
            assert_eq!(rough_simulate_observed(&params, seed, &mut h), RoughStatus::Ok);
            let mut v = vec![0.0; rough_path_len(h)];
            assert_eq!(rough_path_copy_values(h, v.as_mut_ptr(), v.len()), RoughStatus::Ok);
            rough_path_free(h);
            v
        }
    };
    let (a, b, c) = (read(5), read(5), read(6));
    assert_eq!(a.len(), 1025);
    assert_eq!(a, b);
    assert_ne!(a, c);
    assert_eq!(a[0], 0.0);
    assert!(a.windows(2).all(|w| w[1] > w[0]), "exp(2x) > 0 so Y increases");
}

#[test]
fn fbm_handles() {
    let mut h = ptr::null_mut();
    unsafe {
        assert_eq!(rough_simulate_fbm(8, 0.3, 1, RoughBackend::Cholesky, &mut h), RoughStatus::Ok);
        assert_eq!(rough_path_len(h), 257);
        rough_path_free(h);
        assert_eq!(rough_simulate_fbm(8, 0.0, 1, RoughBackend::Circulant, &mut h), RoughStatus::InvalidArgument);
    }
}

#[test]
fn header_declares_every_export() {
    let header = include_str!("../include/roughness.h");
    for name in [
        "rough_last_error_message",
        "rough_path_from_values",
        "rough_path_free",
        "rough_path_len",
        "rough_path_level",
        "rough_path_copy_values",
        "rough_fgn_autocov",
        "rough_simulate_fbm",
        "rough_simulate_observed",
        "rough_r_hat",
        "rough_r_seq",
        "rough_beta_coeffs",
        "ROUGH_STATUS_DEGENERATE",
        "typedef struct RoughPath RoughPath",
    ] {
        assert!(header.contains(name), "missing {name}");
    }
}

#[test]
fn header_compiles_as_c() {
    let Ok(cc) = std::process::Command::new("cc").arg("--version").output() else {
        eprintln!("no C compiler; skipping");
        return;
    };
    assert!(cc.status.success());
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(
        &src,
        "#include \"roughness.h\"\n\
         int main(void) {\n\
           RoughPath *p = 0; double v[5] = {0, 1, 2, 3, 4}; RoughEstimate e; double a[4] = {1, 1, 1, 1};\n\
           if (rough_path_from_values(v, 5, &p) != ROUGH_STATUS_OK) return 1;\n\
           (void)rough_r_seq(p, 10, 3, a, &e); rough_path_free(p); return 0;\n\
         }\n",
    )
    .unwrap();
    let include = concat!(env!("CARGO_MANIFEST_DIR"), "/include");
    let out = std::process::Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I", include])
        .arg(&src)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
