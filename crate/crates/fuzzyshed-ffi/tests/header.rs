//! Guards the generated C header: the declarations the ABI promises are
//! present, and the file compiles as both C and C++ when a compiler is
//! around.

use std::path::PathBuf;
use std::process::Command;

fn header() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include/fuzzyshed.h")
}

#[test]
fn header_declares_the_full_surface() {
    let text = std::fs::read_to_string(header()).expect("header generated by the build script");
    for decl in [
        "typedef enum FzStatus",
        "FZ_STATUS_OK = 0",
        "FZ_STATUS_PRECONDITION = 3",
        "typedef struct FzTerrain FzTerrain;",
        "typedef struct FzNodeSet FzNodeSet;",
        "typedef struct FzMinima FzMinima;",
        "fz_version(void)",
        "fz_last_error(void)",
        "fz_terrain_parse",
        "fz_nodeset_create",
        "fz_watershed",
        "fz_potential_watershed",
        "fz_potential_downstream",
        "fz_persistent_watershed",
        "fz_fuzzy_boundary",
        "fz_fuzzy_ridge",
        "fz_minima_compute",
        "fz_minima_surface",
    ] {
        assert!(text.contains(decl), "missing declaration: {decl}");
    }
}

#[test]
fn header_compiles_as_c_and_cpp() {
    let Ok(cc) = which("cc") else {
        eprintln!("skipped: no C compiler on PATH");
        return;
    };
    let header = header();
    for lang in ["c", "c++"] {
        let out = Command::new(&cc)
            .args(["-fsyntax-only", "-Wall", "-Werror", "-x", lang])
            .arg(&header)
            .output()
            .expect("compiler runs");
        assert!(
            out.status.success(),
            "header fails as {lang}:\n{}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
}

fn which(name: &str) -> Result<PathBuf, ()> {
    let path = std::env::var_os("PATH").ok_or(())?;
    std::env::split_paths(&path)
        .map(|dir| dir.join(name))
        .find(|p| p.is_file())
        .ok_or(())
}
