//! Fixtures shared by the integration tests: an in-process SPARQL endpoint, a
//! scripted chat-completions server and generators for annotations.

pub mod chat;
pub mod generate;
pub mod sparql;

pub use chat::{Reply, StubChatServer};
pub use generate::{annotation_strategy, annotation_triples, output_strategy};
pub use sparql::SparqlFixtureEndpoint;

use std::path::PathBuf;

/// The repository's `fixtures/` directory.
pub fn fixtures_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}
