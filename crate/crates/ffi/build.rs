//! Generates the C header for the exported API into include/bdlle.h.

use std::env;
use std::path::PathBuf;

fn main() {
    let crate_dir = PathBuf::from(env::var("CARGO_MANIFEST_DIR").unwrap());
    let out = crate_dir.join("include/bdlle.h");
    let config = cbindgen::Config {
        language: cbindgen::Language::C,
        header: Some("/* C interface for the boundary detection library. */".into()),
        include_guard: Some("BDLLE_H".into()),
        cpp_compat: true,
        documentation: true,
        ..Default::default()
    };
    match cbindgen::Builder::new()
        .with_crate(&crate_dir)
        .with_config(config)
        .generate()
    {
        Ok(bindings) => {
            bindings.write_to_file(&out);
        }
        Err(err) => {
            // Keep the previously generated header when generation fails.
            println!("cargo:warning=header generation skipped: {err}");
        }
    }
    println!("cargo:rerun-if-changed=src/lib.rs");
}
