use std::path::{Path, PathBuf};
use std::process::Command;

fn header() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include/pldist.h")
}

#[test]
fn header_declares_the_api() {
    let h = std::fs::read_to_string(header()).unwrap();
    for name in [
        "typedef struct PldInstance PldInstance;",
        "typedef struct PldTally PldTally;",
        "PLD_STATUS_OK = 0",
        "pld_last_error(void)",
        "pld_string_free(char *s)",
        "pld_construct(",
        "pld_sample_tally(",
        "pld_apply_rule(",
        "pld_population_distortion(",
        "pld_empirical_distortion(",
        "pld_bounds(",
    ] {
        assert!(h.contains(name), "missing {name}");
    }
}

/// Directory holding this build's library artifacts.
fn artifact_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().and_then(Path::parent).unwrap().to_path_buf()
}

#[test]
fn c_program_links_and_runs() {
    let lib = artifact_dir().join("libpldist_ffi.a");
    assert!(lib.exists(), "static library not built at {}", lib.display());
    let tmp = Path::new(env!("CARGO_TARGET_TMPDIR"));
    let src = tmp.join("smoke.c");
    let bin = tmp.join("smoke");
    std::fs::write(
        &src,
        r#"
#include <stdio.h>
#include <string.h>
#include "pldist.h"

int main(void) {
    double u[3] = {1.0, 0.6, 0.0};
    PldInstance *inst = NULL;
    if (pld_instance_single(3.0, u, 3, &inst) != PLD_STATUS_OK) return 1;
    double d = 0.0;
    if (pld_population_distortion(inst, "rd", 1e-6, &d) != PLD_STATUS_OK) return 2;
    if (pld_population_distortion(inst, "nonsense", 1e-6, &d) != PLD_STATUS_UNKNOWN_RULE) return 3;
    char *msg = pld_last_error();
    if (msg == NULL || strstr(msg, "nonsense") == NULL) return 4;
    pld_string_free(msg);
    pld_instance_free(inst);
    printf("%.6f\n", d);
    return 0;
}
"#,
    )
    .unwrap();
    let status = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(header().parent().unwrap())
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .expect("a C compiler on PATH");
    assert!(status.success());
    let out = Command::new(&bin).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let d: f64 = String::from_utf8_lossy(&out.stdout).trim().parse().unwrap();
    assert!(d > 1.0);
}
