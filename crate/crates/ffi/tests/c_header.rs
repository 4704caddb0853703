//! The generated header compiles as C and C++, and a C program links against the library.

use std::path::PathBuf;
use std::process::Command;

fn compile(compiler: &str, lang: &str) {
    let include = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include");
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("probe.c");
    std::fs::write(
        &src,
        "#include \"monoview.h\"\n\
         int probe(void) {\n\
             MvSample s; MvPlannerConfig c = mv_planner_config_default();\n\
             double f = 0.0; MvStatus st = mv_focal_from_fov(480.0, 90.0, &f);\n\
             (void)s; (void)c;\n\
             return st == MV_STATUS_OK ? 0 : 1;\n\
         }\n",
    )
    .unwrap();
    let status = Command::new(compiler)
        .args(["-x", lang, "-fsyntax-only", "-Wall", "-Werror", "-I"])
        .arg(&include)
        .arg(&src)
        .status()
        .unwrap_or_else(|e| panic!("{compiler} not runnable: {e}"));
    assert!(status.success(), "{compiler} rejected the header as {lang}");
}

#[test]
fn header_is_valid_c() {
    compile("cc", "c");
}

#[test]
fn header_is_valid_cpp() {
    compile("c++", "c++");
}

#[test]
fn c_program_links_and_runs() {
    // Test binaries live in target/<profile>/deps; the library sits one level up.
    let lib_dir = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    assert!(lib_dir.join("libmonoview_ffi.so").exists(), "no shared library in {}", lib_dir.display());
    let include = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include");
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    std::fs::write(
        &src,
        "#include <stdio.h>\n#include \"monoview.h\"\n\
         int main(void) {\n\
             double f = 0.0;\n\
             if (mv_focal_from_fov(480.0, 90.0, &f) != MV_STATUS_OK || f != 240.0) return 1;\n\
             MvScene *scene = NULL;\n\
             if (mv_scene_parse(\"garbage\", &scene) != MV_STATUS_PARSE || scene != NULL) return 2;\n\
             if (mv_last_error_message() == NULL) return 3;\n\
             if (mv_scene_object_center(NULL, 1, NULL) != MV_STATUS_NULL_ARGUMENT) return 4;\n\
             printf(\"ok\\n\");\n\
             return 0;\n\
         }\n",
    )
    .unwrap();
    let exe = dir.path().join("probe");
    let status = Command::new("cc")
        .arg("-I")
        .arg(&include)
        .arg(&src)
        .arg("-o")
        .arg(&exe)
        .arg(format!("-L{}", lib_dir.display()))
        .arg("-lmonoview_ffi")
        .status()
        .unwrap();
    assert!(status.success(), "link failed");
    let out = Command::new(&exe).env("LD_LIBRARY_PATH", &lib_dir).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(String::from_utf8_lossy(&out.stdout), "ok\n");
}
