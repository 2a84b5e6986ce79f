//! Relational model of a lake table: values, schemas, files, CNF predicates
//! and coverage-set semantics.

mod codec;
mod coverage;
mod predicate;
pub mod sample;
mod schema;
mod value;

pub use codec::{decode_schema, decode_tuples, encode_schema, encode_tuples};
pub use coverage::{
    coverage_degree, is_coverage, naive_tight_coverage, schema_key, tight_coverage_in_memory, tightness_degree,
    tightness_degree_from_sizes, write_lake, CoverageSet, LakeMeta,
};
pub use predicate::{satisfies, BoundPredicate, Clause, CmpOp, CnfPredicate, Operand, Query, Term};
pub use schema::{data_file_key, data_prefix, Column, Lake, LakeFile, RecordId, TableSchema, Tuple};
pub use value::{Value, ValueKind};

pub(crate) use codec::write_header;
