use std::path::{Path, PathBuf};
use std::process::Command;

fn crate_dir() -> &'static Path {
    Path::new(env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(crate_dir().join("include/peglab.h")).unwrap();
    for name in [
        "typedef struct PegCurve PegCurve",
        "typedef struct PegReport PegReport",
        "PEG_STATUS_OK",
        "PEG_STATUS_NOT_EMBEDDED",
        "peg_curve_ellipse",
        "peg_curve_from_json",
        "peg_curve_free",
        "peg_solve_rectangle",
        "peg_solve_quad",
        "peg_report_topology",
        "peg_report_to_json",
        "peg_string_free",
        "peg_last_error",
    ] {
        assert!(header.contains(name), "missing {name}");
    }
}

/// Directory holding the built static library: `target/<profile>`.
fn artifact_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().and_then(Path::parent).unwrap().to_path_buf()
}

#[test]
#[ignore = "needs the static library: run `cargo build -p peglab-ffi` first"]
fn c_program_links_against_the_static_library() {
    let lib = artifact_dir().join("libpeglab_ffi.a");
    assert!(lib.exists(), "{} not built", lib.display());
    let out_dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    let exe = out_dir.join("peglab_smoke");
    let status = Command::new("cc")
        .arg(crate_dir().join("tests/smoke.c"))
        .arg("-I")
        .arg(crate_dir().join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .expect("C compiler runs");
    assert!(status.success());
    let run = Command::new(&exe).output().unwrap();
    assert!(run.status.success(), "exit {:?}", run.status.code());
    assert!(String::from_utf8_lossy(&run.stdout).starts_with("orbits=2 total=0"));
}
