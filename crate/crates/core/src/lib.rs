//! Coverage-set query planning for data lakes kept in an object store.
//!
//! A query over a lake only needs the files that hold at least one matching
//! tuple. This crate finds (supersets of) that set cheaply through value
//! indexes, balanced plan selection and a predicate-containment cache, over
//! an object store that counts every read.

pub mod bench;
pub mod cache;
pub mod engine;
pub mod error;
pub mod estimator;
pub mod genomic;
pub mod index;
pub mod model;
pub mod par;
pub mod planner;
pub mod rangesearch;
pub mod store;

pub use error::{Error, Result};
