//! Dynamic persona routing: recommend, for each query, the personas that
//! solved its most similar reference item.

mod memory;
mod routing;
mod split;
mod tfidf;

pub use routing::{
    best_static_persona, check_corpus, evaluate_routing, CorpusItem, Route, RoutingMemory,
    RoutingReport, RoutingResult, SplitInfo,
};
pub use split::{split_reference_test, test_size};
pub use tfidf::{build_index, retrieve_anchor, tokenize, Retrieval, SparseVector, TfidfIndex};
