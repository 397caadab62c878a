use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use ips_ffi::*;

fn fixture(name: &str) -> CString {
    let p = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/fixtures")
        .join(name);
    CString::new(std::fs::read(p).unwrap()).unwrap()
}

fn last_error() -> String {
    let p = ips_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn load(name: &str) -> *mut IpsChannel {
    let mut ch = ptr::null_mut();
    let s = unsafe { ips_channel_from_json(fixture(name).as_ptr(), ptr::null(), &mut ch) };
    assert_eq!(s, IpsStatus::Ok);
    ch
}

#[test]
fn analyze_example_through_the_c_abi() {
    let ch = load("paper_example.json");
    assert_eq!(unsafe { ips_channel_dim(ch) }, 6);
    let mut r = ptr::null_mut();
    let s = unsafe { ips_analyze(ch, IpsMode::Noiseless, ptr::null(), 0, &mut r) };
    assert_eq!(s, IpsStatus::Ok);
    assert!(ips_last_error_message().is_null());
    unsafe {
        assert_eq!(ips_report_block_count(r), 1);
        let (mut d, mut n) = (0, 0);
        assert_eq!(ips_report_block(r, 0, &mut d, &mut n), IpsStatus::Ok);
        assert_eq!((d, n), (2, 2));
        assert_eq!(ips_report_support_rank(r), 4);
        assert_eq!(ips_report_fixed_dim(r), 4);
        assert_eq!(
            ips_report_block(r, 5, &mut d, &mut n),
            IpsStatus::Validation
        );
        let json = ips_report_to_json(r);
        let text = CStr::from_ptr(json).to_str().unwrap().to_owned();
        ips_string_free(json);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["shape"], serde_json::json!([[2, 2]]));
        ips_report_free(r);
        ips_channel_free(ch);
    }
}

#[test]
fn kraus_input_is_row_major_interleaved() {
    // amplitude damping with gamma = 0.36: K0 = diag(1, 0.8), K1 = 0.6 |0><1|
    let data = [
        1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.8, 0.0, //
        0.0, 0.0, 0.6, 0.0, 0.0, 0.0, 0.0, 0.0,
    ];
    let mut ch = ptr::null_mut();
    let s = unsafe { ips_channel_from_kraus(2, 2, data.as_ptr(), ptr::null(), &mut ch) };
    assert_eq!(s, IpsStatus::Ok);
    let mut r = ptr::null_mut();
    unsafe {
        assert_eq!(
            ips_analyze(ch, IpsMode::Noiseless, ptr::null(), 0, &mut r),
            IpsStatus::Ok
        );
        assert_eq!(ips_report_support_rank(r), 1);
        ips_report_free(r);
        ips_channel_free(ch);
    }

    // transposed K1 is not trace preserving together with K0
    let bad = [
        1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.8, 0.0, //
        0.0, 0.0, 0.0, 0.0, 0.6, 0.0, 0.0, 0.0,
    ];
    let s = unsafe { ips_channel_from_kraus(2, 2, bad.as_ptr(), ptr::null(), &mut ch) };
    assert_eq!(s, IpsStatus::Validation);
    assert!(!last_error().is_empty());
}

#[test]
fn verify_reports_pass_and_fail() {
    let ex = load("paper_example.json");
    let dep = load("depolarizing_qubit.json");
    let mut dev = -1.0;
    unsafe {
        let code = fixture("paper_example_fixed_code.json");
        let s = ips_verify(
            ex,
            code.as_ptr(),
            IpsVerifyMode::Noiseless,
            ptr::null(),
            0,
            8,
            &mut dev,
        );
        assert_eq!(s, IpsStatus::Ok);
        assert!((0.0..1e-8).contains(&dev));

        let bits = fixture("classical_bit_code.json");
        let s = ips_verify(
            dep,
            bits.as_ptr(),
            IpsVerifyMode::Preserved,
            ptr::null(),
            0,
            8,
            &mut dev,
        );
        assert_eq!(s, IpsStatus::Fail);
        assert!(dev > 0.5);
        assert!(last_error().contains("verification failed"));
        ips_channel_free(ex);
        ips_channel_free(dep);
    }
}

#[test]
fn errors_are_reported_not_raised() {
    let mut ch = ptr::null_mut();
    let junk = CString::new("{ nope").unwrap();
    unsafe {
        assert_eq!(
            ips_channel_from_json(junk.as_ptr(), ptr::null(), &mut ch),
            IpsStatus::Parse
        );
        assert!(last_error().starts_with("parse"));
        assert_eq!(
            ips_channel_from_json(ptr::null(), ptr::null(), &mut ch),
            IpsStatus::NullArgument
        );
        let mut r = ptr::null_mut();
        assert_eq!(
            ips_analyze(ptr::null(), IpsMode::Noiseless, ptr::null(), 0, &mut r),
            IpsStatus::NullArgument
        );
        assert!(ips_report_to_json(ptr::null()).is_null());
        assert_eq!(ips_channel_dim(ptr::null()), 0);
        ips_channel_free(ptr::null_mut());
        ips_report_free(ptr::null_mut());
        ips_string_free(ptr::null_mut());

        let ex = load("paper_example.json");
        let mut tol = ips_tolerance_default();
        tol.rank_cutoff = 1.0;
        assert_eq!(
            ips_analyze(ex, IpsMode::Noiseless, &tol, 0, &mut r),
            IpsStatus::Validation
        );
        ips_channel_free(ex);
    }
    let v = unsafe { CStr::from_ptr(ips_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_the_public_api() {
    let header =
        std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("include/ips.h"))
            .unwrap();
    for name in [
        "typedef struct IpsChannel IpsChannel;",
        "typedef struct IpsReport IpsReport;",
        "IPS_STATUS_STRUCTURAL = 4",
        "ips_last_error_message(void)",
        "ips_channel_from_kraus(",
        "ips_analyze(",
        "ips_verify(",
        "ips_string_free(",
    ] {
        assert!(header.contains(name), "missing {name}");
    }
}

fn target_dir() -> PathBuf {
    // integration test binaries live in target/<profile>/deps
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn c_program_links_against_the_static_library() {
    let lib = target_dir().join("libips_ffi.a");
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    if !lib.exists() || Command::new(&cc).arg("--version").output().is_err() {
        eprintln!(
            "skipping: no C compiler or static library at {}",
            lib.display()
        );
        return;
    }
    let dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let out = tempfile_path("ips_smoke");
    let status = Command::new(&cc)
        .args(["-std=c99", "-Wall", "-Werror", "-I"])
        .arg(dir.join("include"))
        .arg(dir.join("tests/c/smoke.c"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success(), "C smoke program failed to build");
    let run = Command::new(&out).output().unwrap();
    let text = String::from_utf8_lossy(&run.stdout);
    assert!(
        run.status.success(),
        "{text}{}",
        String::from_utf8_lossy(&run.stderr)
    );
    assert!(
        text.contains("d=1 n=2 support_rank=2 fixed_dim=1"),
        "{text}"
    );
    let _ = std::fs::remove_file(out);
}

fn tempfile_path(stem: &str) -> PathBuf {
    std::env::temp_dir().join(format!("{stem}_{}", std::process::id()))
}
