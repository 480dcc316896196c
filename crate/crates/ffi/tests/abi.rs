use std::ffi::CStr;
use std::ptr;

use es_lab_ffi::*;

fn last_error() -> String {
    let p = es_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn hessian(kind: EsHessianKind, n: usize, c: f64) -> *mut EsHessian {
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { es_hessian_new(kind as u32, n, c, &mut h) }, EsStatus::Ok);
    assert!(!h.is_null());
    h
}

#[test]
fn hessian_round_trip() {
    let h = hessian(EsHessianKind::HadamardEllipse, 8, 16.0);
    unsafe {
        assert_eq!(es_hessian_dim(h), 8);
        let mut spectrum = [0.0; 8];
        assert_eq!(es_hessian_spectrum(h, spectrum.as_mut_ptr(), 8), EsStatus::Ok);
        for (i, v) in spectrum.iter().enumerate() {
            let expected = 16f64.powf(i as f64 / 7.0);
            assert!((v - expected).abs() <= 1e-12 * expected);
        }
        let mut entries = [0.0; 64];
        assert_eq!(es_hessian_entries(h, entries.as_mut_ptr(), 64), EsStatus::Ok);
        let mean = spectrum.iter().sum::<f64>() / 8.0;
        for i in 0..8 {
            assert!((entries[i * 9] - mean).abs() < 1e-10);
        }
        let mut small = [0.0; 10];
        assert_eq!(es_hessian_entries(h, small.as_mut_ptr(), 10), EsStatus::BufferTooSmall);
        assert!(last_error().contains("64"));
        es_hessian_free(h);
    }
}

#[test]
fn invalid_arguments_map_to_codes() {
    let mut h = ptr::null_mut();
    unsafe {
        assert_eq!(es_hessian_new(EsHessianKind::HadamardEllipse as u32, 6, 4.0, &mut h), EsStatus::Dimension);
        assert!(h.is_null());
        assert_eq!(es_hessian_new(EsHessianKind::Discus as u32, 4, 0.5, &mut h), EsStatus::InvalidParameter);
        assert_eq!(es_hessian_new(42, 4, 2.0, &mut h), EsStatus::InvalidParameter);
        assert!(last_error().contains("42"));
        assert_eq!(es_hessian_new(EsHessianKind::Discus as u32, 4, 2.0, ptr::null_mut()), EsStatus::NullPointer);
        assert_eq!(es_hessian_dim(ptr::null()), 0);
        es_hessian_free(ptr::null_mut());

        let indefinite = [1.0, 2.0, 2.0, 1.0];
        assert_ne!(es_hessian_custom(indefinite.as_ptr(), 2, &mut h), EsStatus::Ok);
        let spd = [2.0, 1.0, 1.0, 2.0];
        assert_eq!(es_hessian_custom(spd.as_ptr(), 2, &mut h), EsStatus::Ok);
        let mut spectrum = [0.0; 2];
        assert_eq!(es_hessian_spectrum(h, spectrum.as_mut_ptr(), 2), EsStatus::Ok);
        assert!((spectrum[0] - 1.0).abs() < 1e-12 && (spectrum[1] - 3.0).abs() < 1e-12);
        es_hessian_free(h);
    }
}

#[test]
fn objective_and_sampling() {
    let h = hessian(EsHessianKind::Ellipse, 3, 4.0);
    unsafe {
        let a = [1.0, 1.0, 1.0];
        let mut obj = ptr::null_mut();
        assert_eq!(es_objective_new(h, a.as_ptr(), 3, &mut obj), EsStatus::Ok);
        es_hessian_free(h);

        let mut xstar = [0.0; 3];
        assert_eq!(es_objective_minimizer(obj, xstar.as_mut_ptr(), 3), EsStatus::Ok);
        let diag = [1.0, 2.0, 4.0];
        for i in 0..3 {
            assert!((xstar[i] + 0.5 / diag[i]).abs() < 1e-14);
        }
        let mut v = 0.0;
        let z = [1.0, 0.0, 0.0];
        assert_eq!(es_objective_eval(obj, z.as_ptr(), 3, &mut v), EsStatus::Ok);
        assert_eq!(v, 2.0);
        assert_eq!(es_objective_eval(obj, z.as_ptr(), 2, &mut v), EsStatus::Dimension);

        let run = |workers: usize| {
            let mut mean = [0.0; 3];
            let mut cov = [0.0; 9];
            let mut e0 = 0.0;
            let s = es_sample(
                obj,
                20,
                EsSelection::Best as u32,
                0,
                3000,
                9,
                workers,
                mean.as_mut_ptr(),
                3,
                cov.as_mut_ptr(),
                9,
                &mut e0,
            );
            assert_eq!(s, EsStatus::Ok);
            (mean, cov, e0)
        };
        let (mean, cov, e0) = run(1);
        assert_eq!(run(3), (mean, cov, e0));
        assert!(e0 > 0.0);
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(cov[i * 3 + j], cov[j * 3 + i]);
            }
        }
        // Curvier directions are sampled more tightly.
        assert!(cov[0] > cov[4] && cov[4] > cov[8]);

        let mut mean = [0.0; 3];
        let mut cov = [0.0; 9];
        let mut e0 = 0.0;
        let bad = es_sample(obj, 5, EsSelection::LthDegree as u32, 6, 10, 1, 1, mean.as_mut_ptr(), 3, cov.as_mut_ptr(), 9, &mut e0);
        assert_eq!(bad, EsStatus::InvalidParameter);
        let bad = es_sample(obj, 5, 7, 1, 10, 1, 1, mean.as_mut_ptr(), 3, cov.as_mut_ptr(), 9, &mut e0);
        assert_eq!(bad, EsStatus::InvalidParameter);
        es_objective_free(obj);
    }
}

#[test]
fn metrics_of_exact_inverse() {
    let h = hessian(EsHessianKind::Ellipse, 2, 4.0);
    unsafe {
        let cov = [1.0, 0.0, 0.0, 0.25];
        let mut m = EsMetrics::default();
        assert_eq!(es_metrics(h, cov.as_ptr(), 4, &mut m), EsStatus::Ok);
        assert_eq!((m.e1, m.e2, m.commutator_frob, m.alpha), (0.0, 0.0, 0.0, 1.0));
        assert_eq!(es_metrics(h, cov.as_ptr(), 3, &mut m), EsStatus::Dimension);
        es_hessian_free(h);
    }
}

#[test]
fn distributions() {
    unsafe {
        let (mut u, mut eta) = (0.0, 0.0);
        let ones = [1.0; 4];
        assert_eq!(es_gamma_params(ones.as_ptr(), 4, &mut u, &mut eta), EsStatus::Ok);
        assert_eq!((u, eta), (0.5, 2.0));

        let mut f = 0.0;
        assert_eq!(es_gen_chi2_cdf(2.0, ones.as_ptr(), 2, &mut f), EsStatus::Ok);
        assert!((f - (1.0 - (-1.0f64).exp())).abs() < 1e-6);

        // Minimum of λ exponentials with rate ½ is exponential with rate λ/2.
        assert_eq!(es_order_stat_cdf(0.3, 1, 10, 0.5, 1.0, &mut f), EsStatus::Ok);
        assert!((f - (1.0 - (-1.5f64).exp())).abs() < 1e-12);
        assert_eq!(es_order_stat_pdf(0.3, 1, 10, 0.5, 1.0, &mut f), EsStatus::Ok);
        assert!((f - 5.0 * (-1.5f64).exp()).abs() < 1e-12);
        assert_eq!(es_order_stat_cdf(0.3, 11, 10, 0.5, 1.0, &mut f), EsStatus::InvalidParameter);
        assert_eq!(es_order_stat_cdf(0.3, 1, 10, -0.5, 1.0, &mut f), EsStatus::Domain);
    }
}

#[test]
fn errors_are_thread_local() {
    let mut h = ptr::null_mut();
    unsafe { es_hessian_new(99, 4, 2.0, &mut h) };
    std::thread::spawn(|| assert!(es_last_error().is_null())).join().unwrap();
    assert!(last_error().contains("99"));
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(es_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_every_export_and_compiles() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR"));
    let header = std::fs::read_to_string(dir.join("include/es_lab.h")).unwrap();
    let src = std::fs::read_to_string(dir.join("src/lib.rs")).unwrap();
    let exports: Vec<&str> = src
        .split("extern \"C\" fn ")
        .skip(1)
        .map(|s| s.split('(').next().unwrap())
        .collect();
    assert!(exports.len() >= 15);
    for name in exports {
        assert!(header.contains(&format!("{name}(")), "{name} missing from header");
    }
    let Ok(status) = std::process::Command::new("cc")
        .args(["-fsyntax-only", "-Wall", "-Werror", "-x", "c"])
        .arg(dir.join("include/es_lab.h"))
        .status()
    else {
        return;
    };
    assert!(status.success());
}
