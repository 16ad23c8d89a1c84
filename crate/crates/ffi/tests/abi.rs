use std::ffi::{c_char, CStr, CString};
use std::path::Path;
use std::ptr;

use oag_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

unsafe fn take(s: *mut c_char) -> String {
    let out = CStr::from_ptr(s).to_str().unwrap().to_string();
    oag_string_free(s);
    out
}

unsafe fn last_error() -> String {
    CStr::from_ptr(oag_last_error()).to_str().unwrap().to_string()
}

unsafe fn spec(text: &str) -> *mut OagSpec {
    let mut h = ptr::null_mut();
    assert_eq!(oag_spec_parse(c(text).as_ptr(), &mut h), OagStatus::Ok);
    h
}

#[test]
fn classify_and_rank() {
    unsafe {
        let z = spec("component z: realize Z");
        let mut out = ptr::null_mut();
        assert_eq!(oag_spec_classify(z, &mut out), OagStatus::Ok);
        assert_eq!(take(out), "kind=dp_minimal dp_rank=1");
        let (mut rank, mut finite) = (0u64, false);
        assert_eq!(oag_spec_dp_rank(z, &mut rank, &mut finite), OagStatus::Ok);
        assert_eq!((rank, finite), (1, true));
        let mut k = 0usize;
        assert_eq!(oag_spec_components(z, &mut k), OagStatus::Ok);
        assert_eq!(k, 1);
        oag_spec_free(z);

        let wild = spec("component a: default inf");
        assert_eq!(oag_spec_dp_rank(wild, &mut rank, &mut finite), OagStatus::Ok);
        assert!(!finite);
        oag_spec_free(wild);
    }
}

#[test]
fn eliminate_and_solve() {
    unsafe {
        let z = spec("component z: realize Z");
        let mut f = ptr::null_mut();
        let text = c("exists x. y < x and x < z and x == 0 mod 2G");
        assert_eq!(oag_formula_parse(z, text.as_ptr(), &mut f), OagStatus::Ok);
        let mut qf = ptr::null_mut();
        assert_eq!(oag_formula_eliminate(z, f, &mut qf), OagStatus::Ok);
        let mut s = ptr::null_mut();
        assert_eq!(oag_formula_to_string(qf, &mut s), OagStatus::Ok);
        let printed = take(s);
        assert!(!printed.contains("exists") && printed.contains('y'), "{printed}");
        oag_formula_free(f);
        oag_formula_free(qf);

        let mut out = ptr::null_mut();
        assert_eq!(oag_solve(z, c("x == (1) mod 2G\nx == (2) mod 3G").as_ptr(), &mut out), OagStatus::Ok);
        assert_eq!(take(out), "SOLVABLE base=(5) modulus=6G");
        assert_eq!(oag_solve(z, c("x == (1) mod 2G\nx == (2) mod 4G").as_ptr(), &mut out), OagStatus::Ok);
        assert_eq!(take(out), "UNSOLVABLE pair=(0,1)");
        oag_spec_free(z);
    }
}

#[test]
fn errors_are_reported() {
    unsafe {
        let mut h = ptr::null_mut();
        assert_eq!(oag_spec_parse(c("component z: realize W").as_ptr(), &mut h), OagStatus::Parse);
        assert!(h.is_null());
        assert!(last_error().contains("realize"));
        assert_eq!(oag_spec_parse(ptr::null(), &mut h), OagStatus::NullPointer);
        assert_eq!(oag_spec_components(ptr::null(), ptr::null_mut()), OagStatus::NullPointer);

        let bad = [0xffu8, 0];
        assert_eq!(oag_spec_parse(bad.as_ptr() as *const c_char, &mut h), OagStatus::InvalidUtf8);

        let tower = spec("component z: realize Z\nomega_tower: default 1");
        let mut out = ptr::null_mut();
        assert_eq!(oag_solve(tower, c("x == (1) mod 2G").as_ptr(), &mut out), OagStatus::NotComputable);
        oag_spec_free(tower);
        oag_spec_free(ptr::null_mut());
        oag_string_free(ptr::null_mut());
    }
}

#[test]
fn header_declares_the_exports() {
    let header = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("include/oag.h")).unwrap();
    for name in [
        "oag_last_error",
        "oag_string_free",
        "oag_spec_parse",
        "oag_spec_free",
        "oag_spec_components",
        "oag_spec_dp_rank",
        "oag_spec_classify",
        "oag_formula_parse",
        "oag_formula_free",
        "oag_formula_to_string",
        "oag_formula_eliminate",
        "oag_solve",
        "OAG_STATUS_OK = 0",
        "typedef struct OagSpec OagSpec",
    ] {
        assert!(header.contains(name), "{name} missing from the header");
    }
}

#[test]
fn header_compiles_as_c() {
    let Ok(cc) = which_cc() else { return };
    let dir = std::env::temp_dir().join(format!("oag-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let src = dir.join("use.c");
    std::fs::write(
        &src,
        "#include \"oag.h\"\nint use(void) { OagSpec *s = 0; OagStatus st = oag_spec_parse(\"\", &s); oag_spec_free(s); return st == OAG_STATUS_OK; }\n",
    )
    .unwrap();
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let status = std::process::Command::new(cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(&include)
        .arg(&src)
        .status()
        .unwrap();
    std::fs::remove_dir_all(&dir).ok();
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
