//! Fixtures shared by the benchmarks.

use std::path::PathBuf;

use ddef_core::{parse_model, ModelFile};

pub fn model_text(name: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../models").join(name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

pub fn model(name: &str) -> ModelFile {
    parse_model(&model_text(name)).expect("bundled models parse")
}
