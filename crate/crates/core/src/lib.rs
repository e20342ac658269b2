// SPDX-License-Identifier: Apache-2.0

//! Keyword-aware influential community search over attributed graphs.
//!
//! A query names terms joined by AND or OR. Each term expands to a set of
//! graph keywords, every vertex gets a relevance score from its keyword
//! influence, and the search returns the `r` best connected maximal k-core
//! components ranked by a blend of cohesion and summed relevance.
//!
//! Three exact algorithms produce identical answers: level-by-level
//! enumeration ([`Algorithm::Basic`]), branch-and-bound over core levels
//! ([`Algorithm::Pruned`]) and traversal of a precomputed [`KicTree`] index
//! ([`Algorithm::Tree`]).

mod binio;
pub mod coreops;
pub mod error;
pub mod graph;
pub mod kictree;
pub mod par;
pub mod query;
pub mod scoring;
pub mod search;
pub mod semantics;
pub mod synth;
pub mod workload;

pub use error::{Error, Result};
pub use graph::{build_inverted_index, AttributedGraph, GraphBuilder, InvertedIndex, KeywordId, VertexId};
pub use kictree::KicTree;
pub use par::Execution;
pub use query::{formulate_query, parse_query_expression, Formulator, KicQuery, Predicate, QueryParams};
pub use scoring::{Community, ScoreContext};
pub use search::{run_query, Algorithm, SearchStats};
pub use semantics::{Metric, SimilarityModel, Taxonomy};
