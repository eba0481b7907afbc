use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use flowcalc_ffi::*;

const FIG1: &str = "poset fig1\nelem 0 A B C 1\nrel 0 < A\nrel A < B\nrel B < 1\nrel 0 < C\nrel C < 1\n";
const SEGMENT: &str = "flow seg\nstate a b\ncell u : a -> b dim 0\n";

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    let p = fc_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string()
}

unsafe fn take(s: *mut std::ffi::c_char) -> serde_json::Value {
    let v = serde_json::from_str(CStr::from_ptr(s).to_str().unwrap()).unwrap();
    fc_string_free(s);
    v
}

#[test]
fn poset_round_trip() {
    unsafe {
        let mut p = ptr::null_mut();
        assert_eq!(fc_poset_parse(c(FIG1).as_ptr(), &mut p), FcStatus::Ok);
        assert!(fc_last_error().is_null());
        let mut n = 0;
        assert_eq!(fc_poset_len(p, &mut n), FcStatus::Ok);
        assert_eq!(n, 5);
        assert_eq!(fc_poset_chain_length(p, c("0").as_ptr(), c("1").as_ptr(), &mut n), FcStatus::Ok);
        assert_eq!(n, 3);
        assert_eq!(fc_poset_chain_length(p, c("A").as_ptr(), c("C").as_ptr(), &mut n), FcStatus::InputError);
        assert!(last_error().contains("not strictly below"));
        let mut s = ptr::null_mut();
        assert_eq!(fc_poset_report_json(p, &mut s), FcStatus::Ok);
        let v = take(s);
        assert!(v["degree_violations"].as_array().unwrap().is_empty());

        let mut f = ptr::null_mut();
        assert_eq!(fc_flow_from_poset(p, 3, &mut f), FcStatus::Ok);
        assert_eq!(fc_flow_state_count(f, &mut n), FcStatus::Ok);
        assert_eq!(n, 5);
        assert_eq!(fc_flow_ball_check_json(f, &mut s), FcStatus::Ok);
        let v = take(s);
        assert_eq!(v["ball"]["is_ball"], true);
        assert_eq!(v["bottom"]["passes"], true);
        fc_flow_free(f);
        fc_poset_free(p);
    }
}

#[test]
fn flows_and_invariance() {
    unsafe {
        let mut x = ptr::null_mut();
        assert_eq!(fc_flow_parse(c(SEGMENT).as_ptr(), 3, 1000, &mut x), FcStatus::Ok);
        let mut p = ptr::null_mut();
        assert_eq!(fc_poset_parse(c(FIG1).as_ptr(), &mut p), FcStatus::Ok);
        let mut d = ptr::null_mut();
        assert_eq!(fc_flow_from_poset(p, 3, &mut d), FcStatus::Ok);
        let mut s = ptr::null_mut();
        assert_eq!(fc_flow_branch_json(x, false, &mut s), FcStatus::Ok);
        assert_eq!(take(s)["direction"], "minus");
        assert_eq!(fc_check_invariance_json(x, c("a").as_ptr(), c("b").as_ptr(), 0, d, 1000, &mut s), FcStatus::Ok);
        assert_eq!(take(s)["pass"], true);
        assert_eq!(
            fc_check_invariance_json(x, c("b").as_ptr(), c("a").as_ptr(), 0, d, 1000, &mut s),
            FcStatus::InputError
        );
        assert!(last_error().contains("no path"));
        fc_flow_free(d);
        fc_flow_free(x);
        fc_poset_free(p);
    }
}

#[test]
fn error_codes() {
    unsafe {
        let mut p = ptr::null_mut();
        assert_eq!(fc_poset_parse(ptr::null(), &mut p), FcStatus::NullArgument);
        assert_eq!(fc_poset_parse(c("poset p\nrel a < b\n").as_ptr(), &mut p), FcStatus::ParseError);
        assert!(last_error().starts_with("2:"));
        assert_eq!(fc_poset_parse(c(SEGMENT).as_ptr(), &mut p), FcStatus::InputError);
        let bad = [0x70u8, 0xff, 0];
        assert_eq!(fc_poset_parse(bad.as_ptr().cast(), &mut p), FcStatus::InvalidUtf8);
        assert!(p.is_null());
        let mut f = ptr::null_mut();
        assert_eq!(fc_flow_parse(c(SEGMENT).as_ptr(), 9, 1000, &mut f), FcStatus::InputError);
        let square = std::fs::read_to_string(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/data/square.flow")).unwrap();
        assert_eq!(fc_flow_parse(c(&square).as_ptr(), 3, 1, &mut f), FcStatus::BudgetExceeded);
        assert!(f.is_null());
        let mut n = 0;
        assert_eq!(fc_flow_state_count(ptr::null(), &mut n), FcStatus::NullArgument);
        fc_flow_free(ptr::null_mut());
        fc_string_free(ptr::null_mut());
    }
}

#[test]
fn header_compiles_as_c() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let header = std::fs::read_to_string(dir.join("include/flowcalc.h")).unwrap();
    for name in ["fc_poset_parse", "fc_flow_parse", "fc_check_invariance_json", "fc_last_error", "FC_STATUS_BUDGET_EXCEEDED"] {
        assert!(header.contains(name), "{name} missing from header");
    }
    let src = tempfile_path("use.c");
    std::fs::write(
        &src,
        "#include \"flowcalc.h\"\nint main(void) {\n  FcPoset *p = 0;\n  FcStatus s = fc_poset_parse(\"poset p\", &p);\n  fc_poset_free(p);\n  return s == FC_STATUS_OK ? 0 : 1;\n}\n",
    )
    .unwrap();
    let status = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(dir.join("include"))
        .arg(&src)
        .status()
        .expect("run cc");
    assert!(status.success());
}

fn tempfile_path(name: &str) -> PathBuf {
    let d = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    std::fs::create_dir_all(&d).unwrap();
    d.join(name)
}
