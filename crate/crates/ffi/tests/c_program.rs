//! Compiles a small C program against the generated header and static library.

use std::path::PathBuf;
use std::process::Command;

const PROGRAM: &str = r#"
#include <math.h>
#include <stdio.h>
#include "cpscan.h"

int main(void) {
    double xs[] = {0.0, 0.0, 2.0, 2.0};
    CpsSeries *s = NULL;
    if (cps_series_new(xs, 4, &s) != CPS_STATUS_OK) return 1;
    CpsStatReport r;
    if (cps_statistic(s, CPS_STAT_KIND_Z4, NAN, NAN, &r) != CPS_STATUS_OK) return 2;
    cps_series_free(s);
    if (r.value != 2.0 || r.i_star != 2 || r.j_star != 4) return 3;
    CpsTailApprox t;
    if (cps_tail_formula(CPS_TAIL_KIND_P3, 1.0, 1.0, 1.0, &t) != CPS_STATUS_DOMAIN) return 4;
    printf("%s\n", cps_last_error_message());
    printf("%s\n", cps_version());
    return 0;
}
"#;

fn target_dir() -> PathBuf {
    // <target>/<profile>/deps/<this test>
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn c_program_links_and_runs() {
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    if Command::new(&cc).arg("--version").output().is_err() {
        eprintln!("no C compiler found; skipping");
        return;
    }
    let lib = target_dir().join("libcpscan_ffi.a");
    assert!(lib.exists(), "static library not found at {}", lib.display());
    let include = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include");
    let work = std::env::temp_dir().join(format!("cpscan-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&work).unwrap();
    let src = work.join("main.c");
    let bin = work.join("main");
    std::fs::write(&src, PROGRAM).unwrap();
    let status = Command::new(&cc)
        .arg(&src)
        .arg("-I")
        .arg(&include)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success(), "C compile failed");
    let out = Command::new(&bin).output().unwrap();
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "C program exited with {:?}: {stdout}", out.status);
    assert!(stdout.contains("requires c > 4d > 0"));
    assert!(stdout.contains(env!("CARGO_PKG_VERSION")));
    let _ = std::fs::remove_dir_all(&work);
}
