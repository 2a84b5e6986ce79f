//! Coverage sets and the scan-based reference algorithms over a stored lake.

use std::collections::BTreeSet;

use super::codec::{decode_schema, decode_tuples, encode_schema, encode_tuples};
use super::predicate::{BoundPredicate, Query};
use super::schema::{data_prefix, Lake, LakeFile, TableSchema, Tuple};
use crate::error::{Error, Result};
use crate::store::ObjectStore;

/// A set of data-file keys.
pub type CoverageSet = BTreeSet<String>;

/// Table identity needed to find and decode its files in a store.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LakeMeta {
    pub table: String,
    pub schema: TableSchema,
}

impl LakeMeta {
    pub fn data_prefix(&self) -> String {
        data_prefix(&self.table)
    }

    /// Current data-file keys (metadata listing, no reads).
    pub fn file_keys(&self, store: &ObjectStore) -> Vec<String> {
        store.list(&self.data_prefix())
    }

    /// Reads and decodes one data file (one store read).
    pub fn read_file(&self, store: &ObjectStore, key: &str) -> Result<Vec<Tuple>> {
        let bytes = store.get(key)?;
        decode_tuples(&self.schema, &bytes)
    }

    /// Loads the persisted schema of `table`.
    pub fn load(store: &ObjectStore, table: &str) -> Result<Self> {
        let bytes = store.get(&schema_key(table))?;
        Ok(LakeMeta {
            table: table.to_string(),
            schema: decode_schema(&bytes)?,
        })
    }

    /// Reads every data file back into memory (one read per file).
    pub fn load_lake(&self, store: &ObjectStore) -> Result<Lake> {
        let files = self
            .file_keys(store)
            .into_iter()
            .map(|k| {
                let mut f = LakeFile::new(k.clone(), self.read_file(store, &k)?);
                f.created_at = store.created_at(&k).unwrap_or(0);
                Ok(f)
            })
            .collect::<Result<Vec<_>>>()?;
        Lake::new(self.table.clone(), self.schema.clone(), files)
    }
}

impl Lake {
    pub fn meta(&self) -> LakeMeta {
        LakeMeta {
            table: self.table.clone(),
            schema: self.schema.clone(),
        }
    }
}

pub fn schema_key(table: &str) -> String {
    format!("meta/{table}/schema")
}

/// Persists every file of `lake` (and its schema) and records the ticks
/// the store assigned as each file's `created_at`.
pub fn write_lake(lake: &mut Lake, store: &ObjectStore) -> Result<()> {
    store.put(&schema_key(&lake.table), encode_schema(&lake.schema))?;
    for f in &mut lake.files {
        f.created_at = store.put(&f.key, encode_tuples(&lake.schema, &f.tuples))?;
    }
    Ok(())
}

fn bind(q: &Query, meta: &LakeMeta) -> Result<BoundPredicate> {
    q.predicate.bind(&meta.schema)
}

/// Scans every file and keeps those holding at least one matching tuple.
/// Exactly one read per file; scanning a file stops at its first match.
pub fn naive_tight_coverage(q: &Query, meta: &LakeMeta, store: &ObjectStore) -> Result<CoverageSet> {
    let pred = bind(q, meta)?;
    let mut out = CoverageSet::new();
    for key in meta.file_keys(store) {
        let tuples = meta.read_file(store, &key)?;
        if tuples.iter().any(|t| pred.matches(t)) {
            out.insert(key);
        }
    }
    Ok(out)
}

/// True iff no file outside `x` holds a matching tuple. Reads every file
/// outside `x`.
pub fn is_coverage(x: &CoverageSet, q: &Query, meta: &LakeMeta, store: &ObjectStore) -> Result<bool> {
    let pred = bind(q, meta)?;
    for key in meta.file_keys(store) {
        if x.contains(&key) {
            continue;
        }
        if meta.read_file(store, &key)?.iter().any(|t| pred.matches(t)) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `1 - (|X| - |TC|) / (|F| - |TC|)` when `|TC| < |F|`, otherwise 0.
pub fn tightness_degree_from_sizes(x: usize, tight: usize, files: usize) -> f64 {
    if tight < files {
        1.0 - (x as f64 - tight as f64) / (files as f64 - tight as f64)
    } else {
        0.0
    }
}

pub fn tightness_degree(x: &CoverageSet, q: &Query, meta: &LakeMeta, store: &ObjectStore) -> Result<f64> {
    if !is_coverage(x, q, meta, store)? {
        return Err(Error::Contract("tightness degree requires a coverage set".into()));
    }
    let tc = naive_tight_coverage(q, meta, store)?;
    let files = meta.file_keys(store).len();
    Ok(tightness_degree_from_sizes(x.len(), tc.len(), files))
}

/// `|TC(q)| / |F|`.
pub fn coverage_degree(q: &Query, meta: &LakeMeta, store: &ObjectStore) -> Result<f64> {
    let files = meta.file_keys(store).len();
    if files == 0 {
        return Err(Error::Contract("coverage degree of an empty lake".into()));
    }
    let tc = naive_tight_coverage(q, meta, store)?;
    Ok(tc.len() as f64 / files as f64)
}

/// In-memory tight coverage, for oracles that already hold the lake.
pub fn tight_coverage_in_memory(q: &Query, lake: &Lake) -> Result<CoverageSet> {
    let pred = q.predicate.bind(&lake.schema)?;
    Ok(lake
        .files
        .iter()
        .filter(|f| f.tuples.iter().any(|t| pred.matches(t)))
        .map(|f| f.key.clone())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tightness_degree_formula() {
        assert_eq!(tightness_degree_from_sizes(1, 1, 3), 1.0);
        assert_eq!(tightness_degree_from_sizes(3, 1, 3), 0.0);
        assert_eq!(tightness_degree_from_sizes(2, 1, 3), 0.5);
        assert_eq!(tightness_degree_from_sizes(3, 3, 3), 0.0);
    }
}
