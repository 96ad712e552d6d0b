use std::ffi::{CStr, CString};
use std::ptr;

use mbrlab_ffi::*;

fn last_error() -> String {
    let p = mbr_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string()
}

fn categorical(probs: &[f64]) -> *mut MbrCategorical {
    let mut out = ptr::null_mut();
    let s = unsafe { mbr_categorical_new(probs.as_ptr(), probs.len(), &mut out) };
    assert_eq!(s, MbrStatus::Ok);
    out
}

fn worked_utility() -> *mut MbrUtility {
    let m = [1.0, 0.8, 0.2, 0.8, 1.0, 0.3, 0.2, 0.3, 1.0];
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { mbr_utility_from_matrix(m.as_ptr(), 3, 1.0, &mut out) }, MbrStatus::Ok);
    out
}

#[test]
fn worked_example_through_handles() {
    let p = categorical(&[0.5, 0.3, 0.2]);
    let u = worked_utility();
    unsafe {
        let mut score = 0.0;
        for (y, want) in [(0, 0.78), (1, 0.76), (2, 0.39)] {
            assert_eq!(mbr_expected_utility(u, p, y, &mut score), MbrStatus::Ok);
            assert!((score - want).abs() < 1e-12);
        }
        let mut chosen = 9;
        assert_eq!(mbr_decode_exact(u, p, &mut chosen, &mut score), MbrStatus::Ok);
        assert_eq!(chosen, 0);
        assert!((score - 0.78).abs() < 1e-12);

        let refs = [1usize, 1, 2];
        assert_eq!(mbr_decode_mc(u, refs.as_ptr(), refs.len(), &mut chosen, &mut score), MbrStatus::Ok);
        assert_eq!(chosen, 1);
        assert!((score - (1.0 + 1.0 + 0.3) / 3.0).abs() < 1e-12);

        assert_eq!(mbr_map_decode(p, &mut chosen, &mut score), MbrStatus::Ok);
        assert_eq!((chosen, score), (0, 0.5));

        let mut v = 0.0;
        assert_eq!(mbr_utility_value(u, 1, 2, &mut v), MbrStatus::Ok);
        assert_eq!(v, 0.3);
        assert_eq!(mbr_utility_value(u, 3, 0, &mut v), MbrStatus::IndexOutOfRange);

        mbr_utility_free(u);
        mbr_categorical_free(p);
    }
}

#[test]
fn sampling_empirical_and_temperature() {
    let p = categorical(&[0.5, 0.3, 0.2]);
    unsafe {
        let mut a = vec![0usize; 64];
        let mut b = vec![0usize; 64];
        assert_eq!(mbr_categorical_sample(p, 64, 11, a.as_mut_ptr()), MbrStatus::Ok);
        assert_eq!(mbr_categorical_sample(p, 64, 11, b.as_mut_ptr()), MbrStatus::Ok);
        assert_eq!(a, b);
        assert!(a.iter().all(|&i| i < 3));

        let mut e = ptr::null_mut();
        let idx = [0usize, 2, 2, 2];
        assert_eq!(mbr_empirical_new(3, idx.as_ptr(), idx.len(), &mut e), MbrStatus::Ok);
        let mut probs = [0.0; 3];
        assert_eq!(mbr_categorical_probs(e, probs.as_mut_ptr(), 3), MbrStatus::Ok);
        assert_eq!(probs, [0.25, 0.0, 0.75]);
        assert_eq!(mbr_categorical_probs(e, probs.as_mut_ptr(), 2), MbrStatus::InvalidArgument);

        let mut t = ptr::null_mut();
        assert_eq!(mbr_temperature_new(p, 1e6, &mut t), MbrStatus::Ok);
        assert_eq!(mbr_categorical_len(t), 3);
        assert_eq!(mbr_temperature_new(p, 0.0, &mut t), MbrStatus::InvalidArgument);
        assert!(last_error().contains("temperature"));

        let mut h = ptr::null_mut();
        assert_eq!(mbr_human_new(10, MbrHumanFamily::Dirichlet, 1.0, 4, &mut h), MbrStatus::Ok);
        let mut hp = [0.0; 10];
        assert_eq!(mbr_categorical_probs(h, hp.as_mut_ptr(), 10), MbrStatus::Ok);
        assert!((hp.iter().sum::<f64>() - 1.0).abs() < 1e-12);

        for d in [p, e, t, h] {
            mbr_categorical_free(d);
        }
    }
}

#[test]
fn wasserstein_total_variation_identity() {
    let nu = categorical(&[0.5, 0.5, 0.0]);
    let mu = categorical(&[0.2, 0.5, 0.3]);
    let cost = [0.0, 1.0, 1.0, 1.0, 0.0, 1.0, 1.0, 1.0, 0.0];
    let mut d = 0.0;
    unsafe {
        assert_eq!(mbr_wasserstein(nu, mu, cost.as_ptr(), 3, &mut d), MbrStatus::Ok);
        assert!((d - 0.3).abs() < 1e-12);
        let small = [0.0, 1.0, 1.0, 0.0];
        assert_eq!(mbr_wasserstein(nu, mu, small.as_ptr(), 2, &mut d), MbrStatus::SpaceMismatch);
        assert_eq!(mbr_wasserstein(nu, mu, cost.as_ptr(), 2, &mut d), MbrStatus::InvalidArgument);
        mbr_categorical_free(nu);
        mbr_categorical_free(mu);
    }
}

#[test]
fn bounds_by_name() {
    let inputs = MbrBoundInputs {
        n: 100,
        d_size: 0,
        dim: 4,
        delta: 0.01,
        wd_hm: f64::NAN,
        wd_tt: f64::NAN,
        u_max: f64::NAN,
        alpha_err: f64::NAN,
    };
    let heart = CString::new("lemma_heart").unwrap();
    let theorem = CString::new("theorem_bound").unwrap();
    let bogus = CString::new("no_such_bound").unwrap();
    let mut v = 0.0;
    unsafe {
        assert_eq!(mbr_bound_eval(heart.as_ptr(), &inputs, false, &mut v), MbrStatus::Ok);
        assert!((v - 1.49153).abs() < 1e-5);
        assert_eq!(mbr_bound_eval(theorem.as_ptr(), &inputs, false, &mut v), MbrStatus::MissingInput);
        assert!(last_error().contains("requires D"));
        let with_d = MbrBoundInputs { d_size: 1000, ..inputs };
        assert_eq!(mbr_bound_eval(theorem.as_ptr(), &with_d, false, &mut v), MbrStatus::Ok);
        let bad_delta = MbrBoundInputs { delta: 1.5, ..inputs };
        assert_eq!(mbr_bound_eval(heart.as_ptr(), &bad_delta, false, &mut v), MbrStatus::InvalidDelta);
        assert_eq!(mbr_bound_eval(bogus.as_ptr(), &inputs, false, &mut v), MbrStatus::InvalidArgument);
        assert_eq!(mbr_bound_eval(ptr::null(), &inputs, false, &mut v), MbrStatus::NullPointer);
    }
}

#[test]
fn invalid_inputs_and_nulls() {
    let mut out = ptr::null_mut();
    let bad = [0.5, 0.4];
    unsafe {
        assert_eq!(mbr_categorical_new(bad.as_ptr(), 2, &mut out), MbrStatus::InvalidDistribution);
        assert!(out.is_null());
        assert_eq!(mbr_categorical_new(ptr::null(), 2, &mut out), MbrStatus::NullPointer);
        assert_eq!(last_error(), "probs is null");
        let mut score = 0.0;
        let mut chosen = 0;
        assert_eq!(
            mbr_decode_exact(ptr::null(), ptr::null(), &mut chosen, &mut score),
            MbrStatus::NullPointer
        );
        let neg = [0.5, -0.5, 0.0, 0.5];
        let mut e = ptr::null_mut();
        assert_eq!(mbr_utility_embedding(neg.as_ptr(), 2, 2, &mut e), MbrStatus::InvalidArgument);
        let ok = [0.6, 0.0, 0.0, 0.8];
        assert_eq!(mbr_utility_embedding(ok.as_ptr(), 2, 2, &mut e), MbrStatus::Ok);
        let mut v = 1.0;
        assert_eq!(mbr_utility_value(e, 0, 1, &mut v), MbrStatus::Ok);
        assert_eq!(v, 0.0);
        mbr_utility_free(e);
        mbr_categorical_free(ptr::null_mut());
        mbr_utility_free(ptr::null_mut());
    }
    let version = unsafe { CStr::from_ptr(mbr_version()) }.to_str().unwrap();
    assert_eq!(version, env!("CARGO_PKG_VERSION"));
}

#[test]
fn generated_header_declares_every_entry_point() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/mbrlab.h")).unwrap();
    let src = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/src/lib.rs")).unwrap();
    let exported: Vec<&str> = src
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(exported.len() >= 18);
    for name in exported {
        assert!(header.contains(&format!("{name}(")), "{name} missing from header");
    }
    assert!(header.contains("typedef struct MbrCategorical MbrCategorical;"));
    assert!(header.contains("MBR_STATUS_PANIC = 10"));

    // Compile a small C translation unit against the header when a C compiler exists.
    let Ok(cc) = which_cc() else { return };
    let dir = tempfile::tempdir().unwrap();
    let c_file = dir.path().join("probe.c");
    std::fs::write(
        &c_file,
        "#include \"mbrlab.h\"\nint probe(void) {\n  MbrCategorical *p = 0;\n  double probs[2] = {0.5, 0.5};\n  MbrStatus s = mbr_categorical_new(probs, 2, &p);\n  mbr_categorical_free(p);\n  return (int)s;\n}\n",
    )
    .unwrap();
    let status = std::process::Command::new(cc)
        .args(["-fsyntax-only", "-Wall", "-Werror", "-I"])
        .arg(concat!(env!("CARGO_MANIFEST_DIR"), "/include"))
        .arg(&c_file)
        .status()
        .unwrap();
    assert!(status.success());
}

fn which_cc() -> Result<&'static str, ()> {
    for cc in ["cc", "gcc", "clang"] {
        if std::process::Command::new(cc).arg("--version").output().is_ok() {
            return Ok(cc);
        }
    }
    Err(())
}
