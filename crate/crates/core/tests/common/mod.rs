#![allow(dead_code)]

pub mod oracles;
pub mod precision;

use std::path::PathBuf;

use precise_core::Model;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

pub fn read_fixture(name: &str) -> String {
    std::fs::read_to_string(fixture(name)).unwrap()
}

pub fn movies() -> Model {
    Model::load(
        &read_fixture("movies.schema.json"),
        &read_fixture("movies.lexicon.json"),
    )
    .unwrap()
}

pub fn geo() -> Model {
    Model::load(
        &read_fixture("geo.schema.json"),
        &read_fixture("geo.lexicon.json"),
    )
    .unwrap()
}
