use charp_ffi::*;
use std::ffi::{CStr, CString};
use std::ptr;

fn last_error() -> String {
    unsafe { CStr::from_ptr(charp_last_error()) }
        .to_str()
        .unwrap()
        .to_string()
}

#[test]
fn ring_arithmetic_roundtrip() {
    let mut r = ptr::null_mut();
    unsafe {
        assert_eq!(charp_ring_gf(2, 2, &mut r), CharpStatus::Ok);
        let mut n = 0;
        assert_eq!(charp_ring_order(r, &mut n), CharpStatus::Ok);
        assert_eq!(n, 4);
        for a in 1..4 {
            let mut inv = 0;
            assert_eq!(
                charp_ring_op(r, CharpOp::Inv, a, 0, &mut inv),
                CharpStatus::Ok
            );
            let mut one = 0;
            assert_eq!(
                charp_ring_op(r, CharpOp::Mul, a, inv, &mut one),
                CharpStatus::Ok
            );
            assert_eq!(one, 1);
        }
        let mut x = 0;
        assert_eq!(
            charp_ring_op(r, CharpOp::Inv, 0, 0, &mut x),
            CharpStatus::NotInvertible
        );
        assert!(!last_error().is_empty());
        assert_eq!(
            charp_ring_op(r, CharpOp::Add, 7, 0, &mut x),
            CharpStatus::InvalidArgument
        );
        charp_ring_free(r);
    }
}

#[test]
fn invalid_rings_and_null_pointers() {
    let mut r = ptr::null_mut();
    unsafe {
        assert_eq!(charp_ring_fp(4, &mut r), CharpStatus::InvalidArgument);
        assert!(r.is_null());
        assert_eq!(charp_ring_fp(3, ptr::null_mut()), CharpStatus::NullPointer);
        let mut n = 0;
        assert_eq!(
            charp_ring_order(ptr::null(), &mut n),
            CharpStatus::NullPointer
        );
        charp_ring_free(ptr::null_mut());
        charp_report_free(ptr::null_mut());
        charp_string_free(ptr::null_mut());
    }
}

#[test]
fn rank_and_cokernel() {
    let mut f = ptr::null_mut();
    let mut z = ptr::null_mut();
    unsafe {
        assert_eq!(charp_ring_fp(3, &mut f), CharpStatus::Ok);
        let m = [1u64, 2, 2, 1];
        let mut rank = 9;
        assert_eq!(
            charp_matrix_rank(f, 2, 2, m.as_ptr(), &mut rank),
            CharpStatus::Ok
        );
        assert_eq!(rank, 1);
        assert_eq!(charp_ring_zpe(3, 2, &mut z), CharpStatus::Ok);
        // diag(3, 1) over Z/9 has cokernel Z/3.
        let d = [3u64, 0, 0, 1];
        let mut exps = [0u32; 4];
        let mut len = 0;
        assert_eq!(
            charp_matrix_cokernel(z, 2, 2, d.as_ptr(), exps.as_mut_ptr(), 4, &mut len),
            CharpStatus::Ok
        );
        assert_eq!(&exps[..len], &[1]);
        assert_eq!(
            charp_matrix_cokernel(z, 2, 2, d.as_ptr(), exps.as_mut_ptr(), 0, &mut len),
            CharpStatus::InvalidArgument
        );
        assert_eq!(len, 1);
        charp_ring_free(f);
        charp_ring_free(z);
    }
}

#[test]
fn scenarios_through_the_abi() {
    let n = charp_scenario_count();
    assert!(n >= 29);
    let ids: Vec<String> = (0..n)
        .map(|i| {
            unsafe { CStr::from_ptr(charp_scenario_id(i)) }
                .to_str()
                .unwrap()
                .to_string()
        })
        .collect();
    assert!(ids.iter().any(|s| s == "witt-identity"));
    assert!(charp_scenario_id(n).is_null());
    let id = CString::new("witt-identity").unwrap();
    let mut rep = ptr::null_mut();
    unsafe {
        assert_eq!(
            charp_run(id.as_ptr(), 5, -1, -1, -1, &mut rep),
            CharpStatus::Ok
        );
        assert_eq!(charp_report_pass(rep), 1);
        assert_eq!(charp_report_skipped(rep), 0);
        let mut s = ptr::null_mut();
        assert_eq!(charp_report_json(rep, &mut s), CharpStatus::Ok);
        let v: serde_json::Value =
            serde_json::from_str(CStr::from_ptr(s).to_str().unwrap()).unwrap();
        assert_eq!(v["id"], "witt-identity");
        assert_eq!(v["params"]["p"], 5);
        charp_string_free(s);
        charp_report_free(rep);
        let bad = CString::new("no-such-scenario").unwrap();
        assert_eq!(
            charp_run(bad.as_ptr(), -1, -1, -1, -1, &mut rep),
            CharpStatus::UnknownScenario
        );
        assert!(last_error().contains("no-such-scenario"));
    }
}

#[test]
fn version_is_static() {
    let v = unsafe { CStr::from_ptr(charp_version()) };
    assert_eq!(v.to_str().unwrap(), charp::VERSION);
}

#[test]
fn header_declares_every_export_and_compiles() {
    let dir = env!("CARGO_MANIFEST_DIR");
    let header = std::fs::read_to_string(format!("{dir}/include/charp.h")).unwrap();
    let src = std::fs::read_to_string(format!("{dir}/src/lib.rs")).unwrap();
    let exports: Vec<&str> = src
        .split("extern \"C\" fn ")
        .skip(1)
        .map(|s| s.split('(').next().unwrap())
        .collect();
    assert!(exports.len() >= 15);
    for name in exports {
        assert!(
            header.contains(&format!("{name}(")),
            "{name} missing from header"
        );
    }
    // Syntax-check the header with a C compiler when one is installed.
    let probe = std::env::temp_dir().join(format!("charp_header_{}.c", std::process::id()));
    std::fs::write(
        &probe,
        "#include \"charp.h\"\nint main(void) { return charp_scenario_count() > 0 ? 0 : 1; }\n",
    )
    .unwrap();
    let status = std::process::Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(format!("{dir}/include"))
        .arg(&probe)
        .status();
    let _ = std::fs::remove_file(&probe);
    if let Ok(s) = status {
        assert!(s.success(), "charp.h does not compile as C99");
    }
}
