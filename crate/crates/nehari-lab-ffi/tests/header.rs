//! Checks the generated header with a C compiler, and links and runs a small
//! C program against the static library when `cargo build` has produced it.
//! Skipped when no C compiler is on PATH.

use std::path::{Path, PathBuf};
use std::process::Command;

const PROGRAM: &str = r#"
#include <math.h>
#include <stdio.h>
#include "nehari_lab.h"

int main(void) {
    NlRoots r;
    if (nl_fibering_roots(1.0, 1.0, 3.0, 3.0, 1.0, &r) != NL_STATUS_OK) return 1;
    if (r.count != 2 || fabs(r.t_plus - 2.618033988749895) > 1e-12) return 2;
    NlGrid *g = NULL;
    if (nl_grid_new(8, 1.0, NL_SCHEME_LOG, &g) != NL_STATUS_INVALID_ARGUMENT) return 3;
    if (nl_last_error() == NULL) return 4;
    if (nl_grid_new(256, 20.0, NL_SCHEME_LOG, &g) != NL_STATUS_OK) return 5;
    if (nl_grid_len(g) != 256) return 6;
    nl_grid_free(g);
    printf("%s\n", nl_version());
    return 0;
}
"#;

fn target_dir() -> PathBuf {
    // tests run from target/<profile>/deps
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

fn compiler() -> Option<&'static str> {
    ["cc", "gcc", "clang"].into_iter().find(|c| Command::new(c).arg("--version").output().is_ok())
}

#[test]
fn header_is_generated() {
    let h = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("include/nehari_lab.h")).unwrap();
    for name in ["nl_grid_new", "nl_solve", "nl_report_free", "nl_last_error", "typedef struct NlGrid NlGrid"] {
        assert!(h.contains(name), "{name} missing from header");
    }
}

#[test]
fn c_program_compiles_against_header() {
    let Some(cc) = compiler() else {
        eprintln!("no C compiler found; skipping");
        return;
    };
    let work = std::env::temp_dir().join(format!("nehari_lab_h_{}", std::process::id()));
    std::fs::create_dir_all(&work).unwrap();
    let src = work.join("main.c");
    std::fs::write(&src, PROGRAM).unwrap();
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let status = Command::new(cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only"])
        .arg("-I")
        .arg(&include)
        .arg(&src)
        .status()
        .unwrap();
    let _ = std::fs::remove_dir_all(&work);
    assert!(status.success(), "header does not compile as C99");
}

#[test]
fn c_program_links_and_runs() {
    let Some(cc) = compiler() else {
        eprintln!("no C compiler found; skipping");
        return;
    };
    let lib_dir = target_dir();
    let lib = lib_dir.join("libnehari_lab_ffi.a");
    if !lib.exists() {
        eprintln!("{} not built; skipping", lib.display());
        return;
    }
    let work = std::env::temp_dir().join(format!("nehari_lab_c_{}", std::process::id()));
    std::fs::create_dir_all(&work).unwrap();
    let src = work.join("main.c");
    std::fs::write(&src, PROGRAM).unwrap();
    let exe = work.join("main");
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let status = Command::new(cc)
        .arg(&src)
        .arg("-I")
        .arg(&include)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "C compilation failed");
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "C program exited with {:?}", out.status.code());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), env!("CARGO_PKG_VERSION"));
    let _ = std::fs::remove_dir_all(&work);
}
