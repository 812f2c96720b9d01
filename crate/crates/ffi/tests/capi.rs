use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use sumsets_ffi::*;

fn cstr(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn parse(dsl: &str) -> *mut SumsetsSet {
    let mut h = ptr::null_mut();
    let st = unsafe { sumsets_set_parse(cstr(dsl).as_ptr(), &mut h) };
    assert_eq!(st, SumsetsStatus::Ok);
    assert!(!h.is_null());
    h
}

fn take_string(p: *mut std::ffi::c_char) -> String {
    let s = unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_owned();
    unsafe { sumsets_string_free(p) };
    s
}

fn last_error() -> String {
    let p = sumsets_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn membership_count_and_render() {
    let h = parse("intervals(n>=1; 4^n, (2-1/n)*4^n)");
    let mut m = false;
    assert_eq!(unsafe { sumsets_set_member(h, 16, &mut m) }, SumsetsStatus::Ok);
    assert!(m);
    assert_eq!(unsafe { sumsets_set_member(h, 5, &mut m) }, SumsetsStatus::Ok);
    assert!(!m);
    let mut c = 0u64;
    assert_eq!(unsafe { sumsets_set_count(h, 24, &mut c) }, SumsetsStatus::Ok);
    assert_eq!(c, 8);
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { sumsets_set_render(h, &mut s) }, SumsetsStatus::Ok);
    assert_eq!(take_string(s), "intervals(n>=1; 4^n, (2-1/n)*4^n)");
    unsafe { sumsets_set_free(h) };
}

#[test]
fn bitmap_packing() {
    let h = parse("cong(3,0)");
    let mut buf = [0xffu8; 2];
    assert_eq!(unsafe { sumsets_set_bitmap(h, 10, buf.as_mut_ptr(), buf.len()) }, SumsetsStatus::Ok);
    // 3, 6, 9 -> bits 2, 5, 8
    assert_eq!(buf, [0b0010_0100, 0b0000_0001]);
    assert_eq!(
        unsafe { sumsets_set_bitmap(h, 17, buf.as_mut_ptr(), buf.len()) },
        SumsetsStatus::BufferTooSmall
    );
    unsafe { sumsets_set_free(h) };
}

#[test]
fn error_codes() {
    let mut h = ptr::null_mut();
    let st = unsafe { sumsets_set_parse(cstr("cong(2;0)").as_ptr(), &mut h) };
    assert_eq!(st, SumsetsStatus::Parse);
    assert!(h.is_null());
    assert!(last_error().contains("byte 6"), "{}", last_error());

    assert_eq!(unsafe { sumsets_set_builtin(cstr("P99").as_ptr(), &mut h) }, SumsetsStatus::UnknownKey);
    assert_eq!(
        unsafe { sumsets_set_builtin(cstr("COLOR3").as_ptr(), &mut h) },
        SumsetsStatus::InvalidParameter
    );
    assert_eq!(unsafe { sumsets_set_parse(ptr::null(), &mut h) }, SumsetsStatus::NullPointer);

    let s = parse("cong(2,0)");
    let mut m = false;
    assert_eq!(unsafe { sumsets_set_member(s, 0, &mut m) }, SumsetsStatus::InvalidParameter);
    let mut out = ptr::null_mut();
    assert_eq!(
        unsafe { sumsets_density_json(s, cstr("cubes(3)").as_ptr(), &mut out) },
        SumsetsStatus::UnknownSchedule
    );
    unsafe { sumsets_set_free(s) };
    unsafe { sumsets_set_free(ptr::null_mut()) };
    unsafe { sumsets_string_free(ptr::null_mut()) };
}

#[test]
fn json_entry_points() {
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { sumsets_set_builtin(cstr("P41_A").as_ptr(), &mut h) }, SumsetsStatus::Ok);
    let mut out = ptr::null_mut();
    assert_eq!(
        unsafe { sumsets_density_json(h, cstr("prop41(6)").as_ptr(), &mut out) },
        SumsetsStatus::Ok
    );
    let v: serde_json::Value = serde_json::from_str(&take_string(out)).unwrap();
    assert_eq!(v["windows"].as_array().unwrap().len(), 6);

    assert_eq!(unsafe { sumsets_search_json(h, 0, 1024, true, 0, &mut out) }, SumsetsStatus::Ok);
    let v: serde_json::Value = serde_json::from_str(&take_string(out)).unwrap();
    assert_eq!(v["witness"]["verified"], true);
    assert_eq!(v["stats"]["complete"], true);
    unsafe { sumsets_set_free(h) };

    assert_eq!(unsafe { sumsets_verify_json(cstr("P41_A").as_ptr(), 4096, &mut out) }, SumsetsStatus::Ok);
    let v: serde_json::Value = serde_json::from_str(&take_string(out)).unwrap();
    assert_eq!(v["key"], "P41_A");
}

#[test]
fn version_matches_crate() {
    let v = unsafe { CStr::from_ptr(sumsets_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

fn header() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include/sumsets.h")
}

#[test]
fn header_declares_every_export() {
    let h = std::fs::read_to_string(header()).unwrap();
    let src = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("src/lib.rs")).unwrap();
    let exports: Vec<&str> = src
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(exports.len() >= 12);
    for name in exports {
        assert!(h.contains(&format!("{name}(")), "{name} missing from header");
    }
    assert!(h.contains("typedef struct SumsetsSet SumsetsSet;"));
}

fn static_lib() -> Option<PathBuf> {
    let target = std::env::var_os("CARGO_TARGET_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| Path::new(env!("CARGO_MANIFEST_DIR")).join("../../target"));
    ["debug", "release"]
        .iter()
        .map(|p| target.join(p).join("libsumsets_ffi.a"))
        .find(|p| p.exists())
}

const C_PROGRAM: &str = r#"
#include <stdio.h>
#include <string.h>
#include "sumsets.h"

int main(void) {
    SumsetsSet *a = NULL;
    if (sumsets_set_parse("compl(cong(7,0))", &a) != SUMSETS_STATUS_OK) return 10;
    bool m = true;
    if (sumsets_set_member(a, 14, &m) != SUMSETS_STATUS_OK || m) return 11;
    uint64_t c = 0;
    if (sumsets_set_count(a, 70, &c) != SUMSETS_STATUS_OK || c != 60) return 12;
    char *json = NULL;
    if (sumsets_search_json(a, 0, 40, true, 0, &json) != SUMSETS_STATUS_OK) return 13;
    if (strstr(json, "\"verified\":true") == NULL) return 14;
    sumsets_string_free(json);
    sumsets_set_free(a);
    if (sumsets_set_parse("cong(0,1)", &a) != SUMSETS_STATUS_PARSE) return 15;
    if (sumsets_last_error() == NULL) return 16;
    printf("ok %s\n", sumsets_version());
    return 0;
}
"#;

#[test]
fn c_program_links_against_static_library() {
    let lib = static_lib().expect("libsumsets_ffi.a not built");
    let dir = std::env::temp_dir().join(format!("sumsets-capi-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let src = dir.join("main.c");
    let exe = dir.join("main");
    std::fs::write(&src, C_PROGRAM).unwrap();
    let status = Command::new("cc")
        .arg("-std=c11")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(header().parent().unwrap())
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm"])
        .arg("-o")
        .arg(&exe)
        .status()
        .expect("cc");
    assert!(status.success(), "C compile failed");
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "C program exit {:?}", out.status.code());
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok "));
    std::fs::remove_dir_all(&dir).ok();
}
