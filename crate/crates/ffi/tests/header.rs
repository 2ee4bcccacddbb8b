//! Compiles and runs a small C program against the generated header and
//! the static library. Skipped when no C compiler is on the path.

use std::path::{Path, PathBuf};
use std::process::Command;

const PROGRAM: &str = r#"
#include <stdio.h>
#include "mmnet.h"

int main(void) {
    MmnetNetwork *net = NULL;
    if (mmnet_network_from_fixture("line3", &net) != MMNET_STATUS_OK) return 1;
    size_t nodes = 0;
    if (mmnet_network_node_count(net, &nodes) != MMNET_STATUS_OK || nodes != 3) return 2;
    double cap = 0.0;
    if (mmnet_link_capacity(net, 1, 2, &cap) != MMNET_STATUS_OK) return 3;
    if (cap < 0.5309 || cap > 0.5311) return 4;
    if (mmnet_link_capacity(net, 9, 2, &cap) != MMNET_STATUS_INVALID_ARGUMENT) return 5;
    if (mmnet_last_error_message() == NULL) return 6;
    mmnet_network_free(net);
    if (mmnet_network_from_json("{", &net) != MMNET_STATUS_PARSE_ERROR) return 7;
    printf("ok\n");
    return 0;
}
"#;

fn compiler() -> Option<String> {
    ["cc", "gcc", "clang"]
        .into_iter()
        .find(|c| Command::new(c).arg("--version").output().is_ok_and(|o| o.status.success()))
        .map(String::from)
}

/// The static library sits next to the test binary in `target/<profile>/deps`
/// or one level up after a plain `cargo build`.
fn static_library() -> Option<PathBuf> {
    let exe = std::env::current_exe().ok()?;
    let deps = exe.parent()?;
    let found = [deps, deps.parent()?].into_iter().map(|d| d.join("libmmnet_ffi.a")).find(|p| p.exists());
    found
}

#[test]
fn c_program_links_and_runs() {
    let Some(cc) = compiler() else {
        eprintln!("no C compiler found; skipping");
        return;
    };
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let lib = static_library().expect("static library next to the test binary");
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR"));
    let src = dir.join("mmnet_smoke.c");
    let exe = dir.join("mmnet_smoke");
    std::fs::write(&src, PROGRAM).unwrap();
    let status = Command::new(cc)
        .args(["-std=c99", "-Wall", "-Werror", "-o"])
        .arg(&exe)
        .arg(&src)
        .arg("-I")
        .arg(&include)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm"])
        .status()
        .unwrap();
    assert!(status.success(), "C build failed");
    let out = Command::new(&exe).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "ok");
}
