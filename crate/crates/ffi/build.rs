use std::env;
use std::path::PathBuf;

fn main() {
    let crate_dir = PathBuf::from(env::var("CARGO_MANIFEST_DIR").unwrap());
    println!("cargo:rerun-if-changed=src/lib.rs");
    println!("cargo:rerun-if-changed=cbindgen.toml");
    let config = cbindgen::Config::from_file(crate_dir.join("cbindgen.toml")).expect("cbindgen.toml");
    // parsing the single source file avoids `cargo metadata` (and its network access)
    let result = cbindgen::Builder::new()
        .with_config(config)
        .with_src(crate_dir.join("src/lib.rs"))
        .generate();
    match result {
        Ok(bindings) => {
            bindings.write_to_file(crate_dir.join("include/curvlab.h"));
        }
        // keep the checked-in header when the source does not parse yet; rustc reports the real error
        Err(e) => println!("cargo:warning=header not regenerated: {e}"),
    }
}
