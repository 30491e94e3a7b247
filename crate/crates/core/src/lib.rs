//! Word-by-word semantic interpretation: incremental categorial parsing
//! into typed lambda terms, existential closure, quantifier scoping,
//! pronoun coindexing, dynamic evaluation against finite world models and
//! a source-tagged proposition store.

pub mod lf;
pub mod lexicon;
pub mod parser;
pub mod closure;
pub mod evaluator;
pub mod ground;
pub mod scoper;
pub mod world;
pub mod tms;
pub mod resolver;
pub mod report;
pub mod session;
pub mod api;
