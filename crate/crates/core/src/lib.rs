//! Power-equipment knowledge graph construction and retrieval.
//!
//! Free-text operation records are segmented (dictionary locking plus a
//! BMES hidden Markov model), tagged against an electric-power dictionary
//! and mined for relation triples. Structured station documents are
//! converted to triples directly. Both sides are fused into a
//! [`store::GraphStore`], which supports level-wise retrieval and
//! forward-chaining rules through [`query`].

pub mod entity;
pub mod fusion;
pub mod lexicon;
pub mod model;
pub mod pipeline;
pub mod query;
pub mod relation;
pub mod segmenter;
pub mod store;
pub mod text;

pub use lexicon::Lexicon;
pub use model::{Category, Predicate, Provenance, ProvenanceKind, TagCategory};
pub use store::{Direction, Edge, EntityId, GraphStore};
