//! Value-to-record secondary indexes stored as ordinary lake objects.
//!
//! For every indexed column the index is the relation `(value, file,
//! record)` over all values of that column, sorted by value and chunked into
//! index files under `index/<table>/<column>/part-NNNNNN`. A root index keeps
//! one summary row per index file (`min`, `max`, `cnt`, `cntd`); it is held in
//! memory by the planner and persisted to `index/<table>/_root`.
//!
//! Coverage for a set of clauses is computed by reading only the index files
//! whose `[min, max]` can satisfy a term, taking the union of matching records
//! within a clause and the intersection across clauses.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::model::{
    write_header, Clause, CmpOp, CoverageSet, Lake, LakeFile, LakeMeta, Operand, RecordId, TableSchema, Term, Value,
    ValueKind,
};
use crate::par::{self, Parallelism};
use crate::store::ObjectStore;

pub const DEFAULT_ENTRIES_PER_FILE: usize = 1000;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct IndexEntry {
    pub value: Value,
    pub record: RecordId,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndexFile {
    pub column: String,
    pub key: String,
    pub entries: Vec<IndexEntry>,
}

impl IndexFile {
    pub fn encode(&self) -> Vec<u8> {
        let mut out = String::with_capacity(32 * (self.entries.len() + 1));
        write_header(&mut out, ["value", "file", "record"].into_iter());
        for e in &self.entries {
            let _ = writeln!(out, "{}\t{}\t{}", e.value, e.record.file, e.record.ordinal);
        }
        out.into_bytes()
    }

    pub fn decode(column: &str, key: &str, kind: ValueKind, bytes: &[u8]) -> Result<Self> {
        let text = std::str::from_utf8(bytes).map_err(|e| Error::parse(0, format!("index file not UTF-8: {e}")))?;
        let mut lines = text.split_terminator('\n');
        if lines.next() != Some("value\tfile\trecord") {
            return Err(Error::parse(1, format!("index file `{key}` has a bad header")));
        }
        let mut entries = Vec::new();
        for (n, line) in lines.enumerate() {
            let mut parts = line.split('\t');
            let (Some(v), Some(file), Some(rec), None) = (parts.next(), parts.next(), parts.next(), parts.next()) else {
                return Err(Error::parse(n + 2, format!("bad index row `{line}`")));
            };
            let ordinal = rec
                .parse()
                .map_err(|_| Error::parse(n + 2, format!("bad record ordinal `{rec}`")))?;
            entries.push(IndexEntry {
                value: Value::parse(kind, v).map_err(|e| Error::parse(n + 2, e.to_string()))?,
                record: RecordId::new(file, ordinal),
            });
        }
        Ok(IndexFile {
            column: column.to_string(),
            key: key.to_string(),
            entries,
        })
    }

    fn summary(&self) -> Option<RootIndexEntry> {
        let first = self.entries.first()?;
        let mut min = &first.value;
        let mut max = &first.value;
        let mut distinct = HashSet::new();
        for e in &self.entries {
            if e.value < *min {
                min = &e.value;
            }
            if e.value > *max {
                max = &e.value;
            }
            distinct.insert(&e.value);
        }
        Some(RootIndexEntry {
            col: self.column.clone(),
            file: self.key.clone(),
            min: min.clone(),
            max: max.clone(),
            cnt: self.entries.len() as u64,
            cntd: distinct.len() as u64,
        })
    }
}

/// Summary of one index file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootIndexEntry {
    pub col: String,
    pub file: String,
    pub min: Value,
    pub max: Value,
    pub cnt: u64,
    pub cntd: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootIndex {
    pub table: String,
    pub entries: Vec<RootIndexEntry>,
}

pub fn root_key(table: &str) -> String {
    format!("index/{table}/_root")
}

pub fn index_file_key(table: &str, column: &str, n: usize) -> String {
    format!("index/{table}/{column}/part-{n:06}")
}

impl RootIndex {
    pub fn empty(table: impl Into<String>) -> Self {
        RootIndex {
            table: table.into(),
            entries: Vec::new(),
        }
    }

    pub fn is_indexed(&self, column: &str) -> bool {
        self.entries.iter().any(|e| e.col == column)
    }

    pub fn entries_for<'a>(&'a self, column: &'a str) -> impl Iterator<Item = &'a RootIndexEntry> + 'a {
        self.entries.iter().filter(move |e| e.col == column)
    }

    /// Number of index files of `column`.
    pub fn file_count(&self, column: &str) -> usize {
        self.entries_for(column).count()
    }

    /// Total indexed values of `column`.
    pub fn total_count(&self, column: &str) -> u64 {
        self.entries_for(column).map(|e| e.cnt).sum()
    }

    pub fn columns(&self) -> Vec<String> {
        let mut cols: Vec<String> = self.entries.iter().map(|e| e.col.clone()).collect();
        cols.dedup();
        let mut seen = HashSet::new();
        cols.retain(|c| seen.insert(c.clone()));
        cols
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = String::new();
        write_header(&mut out, ["col", "file", "min", "max", "cnt", "cntd"].into_iter());
        for e in &self.entries {
            let _ = writeln!(out, "{}\t{}\t{}\t{}\t{}\t{}", e.col, e.file, e.min, e.max, e.cnt, e.cntd);
        }
        out.into_bytes()
    }

    pub fn decode(table: &str, schema: &TableSchema, bytes: &[u8]) -> Result<Self> {
        let text = std::str::from_utf8(bytes).map_err(|e| Error::parse(0, format!("root index not UTF-8: {e}")))?;
        let mut lines = text.split_terminator('\n');
        if lines.next() != Some("col\tfile\tmin\tmax\tcnt\tcntd") {
            return Err(Error::parse(1, "root index has a bad header"));
        }
        let mut entries = Vec::new();
        for (n, line) in lines.enumerate() {
            let line_no = n + 2;
            let f: Vec<&str> = line.split('\t').collect();
            if f.len() != 6 {
                return Err(Error::parse(line_no, format!("bad root index row `{line}`")));
            }
            let kind = schema.kind_of(f[0]).map_err(|e| Error::parse(line_no, e.to_string()))?;
            let val = |s: &str| Value::parse(kind, s).map_err(|e| Error::parse(line_no, e.to_string()));
            let num = |s: &str| {
                s.parse::<u64>()
                    .map_err(|_| Error::parse(line_no, format!("bad count `{s}`")))
            };
            entries.push(RootIndexEntry {
                col: f[0].to_string(),
                file: f[1].to_string(),
                min: val(f[2])?,
                max: val(f[3])?,
                cnt: num(f[4])?,
                cntd: num(f[5])?,
            });
        }
        Ok(RootIndex {
            table: table.to_string(),
            entries,
        })
    }

    pub fn persist(&self, store: &ObjectStore) -> Result<()> {
        store.put(&root_key(&self.table), self.encode())?;
        Ok(())
    }

    /// Loads the root index (one store read).
    pub fn load(store: &ObjectStore, meta: &LakeMeta) -> Result<Self> {
        let bytes = store.get(&root_key(&meta.table))?;
        Self::decode(&meta.table, &meta.schema, &bytes)
    }
}

/// How a column's sorted entries are cut into index files.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Chunking {
    /// At most `n` entries per file.
    Fixed(usize),
    /// Explicit file sizes; the last size absorbs nothing beyond what is listed.
    Sizes(Vec<usize>),
}

impl Chunking {
    fn cut<T>(&self, mut entries: Vec<T>) -> Result<Vec<Vec<T>>> {
        match self {
            Chunking::Fixed(0) => Err(Error::Config("entries_per_file must be at least 1".into())),
            Chunking::Fixed(n) => {
                let mut out = Vec::with_capacity(entries.len().div_ceil(*n));
                while !entries.is_empty() {
                    let rest = entries.split_off(entries.len().min(*n));
                    out.push(std::mem::replace(&mut entries, rest));
                }
                Ok(out)
            }
            Chunking::Sizes(sizes) => {
                if sizes.iter().sum::<usize>() != entries.len() || sizes.contains(&0) {
                    return Err(Error::Config(format!(
                        "chunk sizes {sizes:?} do not partition {} entries",
                        entries.len()
                    )));
                }
                let mut out = Vec::with_capacity(sizes.len());
                for &s in sizes {
                    let rest = entries.split_off(s);
                    out.push(std::mem::replace(&mut entries, rest));
                }
                Ok(out)
            }
        }
    }
}

/// Builds and persists indexes on `columns`, `entries_per_file` entries per
/// index file, and returns the persisted root index.
pub fn build_index(
    lake: &Lake,
    columns: &[&str],
    entries_per_file: usize,
    store: &ObjectStore,
    p: Parallelism,
) -> Result<RootIndex> {
    let plan: Vec<(&str, Chunking)> = columns.iter().map(|c| (*c, Chunking::Fixed(entries_per_file))).collect();
    build_index_chunked(lake, &plan, store, p)
}

/// Like [`build_index`] with an explicit chunking per column.
pub fn build_index_chunked(
    lake: &Lake,
    columns: &[(&str, Chunking)],
    store: &ObjectStore,
    p: Parallelism,
) -> Result<RootIndex> {
    let mut root = RootIndex::empty(&lake.table);
    write_index_files(&lake.table, &lake.schema, &lake.files, columns, &HashMap::new(), &mut root, store, p)?;
    root.persist(store)?;
    Ok(root)
}

/// Indexes newly added files and extends `root`. Existing index files are
/// never rewritten; new ones take the next part numbers of each column.
pub fn append_to_index(
    root: &RootIndex,
    meta: &LakeMeta,
    new_files: &[LakeFile],
    columns: &[&str],
    entries_per_file: usize,
    store: &ObjectStore,
    p: Parallelism,
) -> Result<RootIndex> {
    for f in new_files {
        for t in &f.tuples {
            meta.schema.check_tuple(t)?;
        }
    }
    let mut next = root.clone();
    if new_files.is_empty() {
        return Ok(next);
    }
    let offsets: HashMap<String, usize> = columns
        .iter()
        .map(|c| (c.to_string(), root.file_count(c)))
        .collect();
    let plan: Vec<(&str, Chunking)> = columns.iter().map(|c| (*c, Chunking::Fixed(entries_per_file))).collect();
    write_index_files(&meta.table, &meta.schema, new_files, &plan, &offsets, &mut next, store, p)?;
    next.persist(store)?;
    Ok(next)
}

#[allow(clippy::too_many_arguments)]
fn write_index_files(
    table: &str,
    schema: &TableSchema,
    files: &[LakeFile],
    columns: &[(&str, Chunking)],
    offsets: &HashMap<String, usize>,
    root: &mut RootIndex,
    store: &ObjectStore,
    p: Parallelism,
) -> Result<()> {
    let positions = columns
        .iter()
        .map(|(c, _)| schema.position(c))
        .collect::<Result<Vec<_>>>()?;

    // Per source file: one entry list per indexed column.
    let per_file: Vec<Vec<Vec<IndexEntry>>> = par::map(p, files, |f| {
        positions
            .iter()
            .map(|&pos| {
                f.tuples
                    .iter()
                    .enumerate()
                    .map(|(ord, t)| IndexEntry {
                        value: t.get(pos).clone(),
                        record: RecordId::new(f.key.clone(), ord as u32),
                    })
                    .collect()
            })
            .collect()
    });

    let mut merged: Vec<Vec<IndexEntry>> = vec![Vec::new(); columns.len()];
    for file_entries in per_file {
        for (slot, entries) in merged.iter_mut().zip(file_entries) {
            slot.extend(entries);
        }
    }

    for ((column, chunking), mut entries) in columns.iter().zip(merged) {
        par::sort_unstable(p, &mut entries);
        let start = offsets.get(*column).copied().unwrap_or(0);
        for (i, chunk) in chunking.cut(entries)?.into_iter().enumerate() {
            let file = IndexFile {
                column: column.to_string(),
                key: index_file_key(table, column, start + i),
                entries: chunk,
            };
            store.put(&file.key, file.encode())?;
            if let Some(summary) = file.summary() {
                root.entries.push(summary);
            }
        }
    }
    Ok(())
}

/// Could a value in `[min, max]` satisfy `value op v`?
fn range_may_match(op: CmpOp, min: &Value, max: &Value, v: &Value) -> bool {
    match op {
        CmpOp::Eq => min <= v && v <= max,
        CmpOp::Ne => true,
        CmpOp::Lt => min < v,
        CmpOp::Le => min <= v,
        CmpOp::Gt => max > v,
        CmpOp::Ge => max >= v,
    }
}

/// Index files that must be read to evaluate `term`.
pub fn prune_index_files(term: &Term, root: &RootIndex) -> Result<Vec<String>> {
    if !root.is_indexed(&term.column) {
        return Err(Error::NotIndexed(term.column.clone()));
    }
    match &term.rhs {
        Operand::Value(v) => Ok(root
            .entries_for(&term.column)
            .filter(|e| range_may_match(term.op, &e.min, &e.max, v))
            .map(|e| e.file.clone())
            .collect()),
        Operand::Column(other) => {
            if !root.is_indexed(other) {
                return Err(Error::NotIndexed(other.clone()));
            }
            Ok(root
                .entries_for(&term.column)
                .chain(root.entries_for(other))
                .map(|e| e.file.clone())
                .collect())
        }
    }
}

fn read_index_file(store: &ObjectStore, root: &RootIndex, key: &str, kind_of: &HashMap<&str, ValueKind>) -> Result<IndexFile> {
    let entry = root
        .entries
        .iter()
        .find(|e| e.file == key)
        .ok_or_else(|| Error::NotFound(key.to_string()))?;
    let kind = kind_of
        .get(entry.col.as_str())
        .copied()
        .unwrap_or_else(|| entry.min.kind());
    let bytes = store.get(key)?;
    IndexFile::decode(&entry.col, key, kind, &bytes)
}

/// Records satisfying a single term, read from its pruned index files.
fn term_records(term: &Term, root: &RootIndex, store: &ObjectStore) -> Result<BTreeSet<RecordId>> {
    let kinds: HashMap<&str, ValueKind> = root.entries.iter().map(|e| (e.col.as_str(), e.min.kind())).collect();
    let mut out = BTreeSet::new();
    match &term.rhs {
        Operand::Value(v) => {
            for key in prune_index_files(term, root)? {
                let file = read_index_file(store, root, &key, &kinds)?;
                if file.entries.first().is_some_and(|e| e.value.kind() != v.kind()) {
                    return Err(Error::TypeMismatch {
                        expected: file.entries[0].value.kind(),
                        found: v.kind(),
                    });
                }
                out.extend(
                    file.entries
                        .into_iter()
                        .filter(|e| term.op.eval(&e.value, v))
                        .map(|e| e.record),
                );
            }
        }
        Operand::Column(other) => {
            prune_index_files(term, root)?;
            let mut rhs_values: HashMap<RecordId, Value> = HashMap::new();
            for e in root.entries_for(other) {
                for entry in read_index_file(store, root, &e.file, &kinds)?.entries {
                    rhs_values.insert(entry.record, entry.value);
                }
            }
            for e in root.entries_for(&term.column) {
                for entry in read_index_file(store, root, &e.file, &kinds)?.entries {
                    if let Some(rv) = rhs_values.get(&entry.record) {
                        if term.op.eval(&entry.value, rv) {
                            out.insert(entry.record);
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Per-clause, per-term record sets produced while computing coverage.
pub type CoverageTrace = Vec<Vec<BTreeSet<RecordId>>>;

/// Tight coverage of the conjunction of `clauses`, using only the index.
///
/// `universe` lists every data file; it is the answer for zero clauses.
/// Each term reads its pruned index files, so the number of store reads
/// equals the summed per-term costs.
pub fn coverage_by_index(
    clauses: &[Clause],
    root: &RootIndex,
    store: &ObjectStore,
    universe: &[String],
) -> Result<CoverageSet> {
    coverage_by_index_traced(clauses, root, store, universe).map(|(c, _)| c)
}

pub fn coverage_by_index_traced(
    clauses: &[Clause],
    root: &RootIndex,
    store: &ObjectStore,
    universe: &[String],
) -> Result<(CoverageSet, CoverageTrace)> {
    for clause in clauses {
        for term in clause.terms() {
            for col in term.referenced_columns() {
                if !root.is_indexed(col) {
                    return Err(Error::NotIndexed(col.to_string()));
                }
            }
        }
    }
    let mut result: Option<BTreeSet<RecordId>> = None;
    let mut trace = Vec::with_capacity(clauses.len());
    for clause in clauses {
        let mut clause_set = BTreeSet::new();
        let mut term_sets = Vec::with_capacity(clause.terms().len());
        for term in clause.terms() {
            let set = term_records(term, root, store)?;
            clause_set.extend(set.iter().cloned());
            term_sets.push(set);
        }
        trace.push(term_sets);
        result = Some(match result {
            None => clause_set,
            Some(acc) => acc.intersection(&clause_set).cloned().collect(),
        });
    }
    let coverage = match result {
        None => universe.iter().cloned().collect(),
        Some(records) => records.into_iter().map(|r| r.file).collect(),
    };
    Ok((coverage, trace))
}

/// Brute-force summary of what the index over `columns` must contain, for
/// checking completeness. Maps column → sorted list of entries.
pub fn expected_entries(lake: &Lake, columns: &[&str]) -> Result<BTreeMap<String, Vec<IndexEntry>>> {
    let mut out = BTreeMap::new();
    for c in columns {
        let pos = lake.schema.position(c)?;
        let mut v: Vec<IndexEntry> = lake
            .files
            .iter()
            .flat_map(|f| {
                f.tuples.iter().enumerate().map(move |(i, t)| IndexEntry {
                    value: t.get(pos).clone(),
                    record: RecordId::new(f.key.clone(), i as u32),
                })
            })
            .collect();
        v.sort();
        out.insert(c.to_string(), v);
    }
    Ok(out)
}

/// Reads back every index file of `column` (test and tooling helper).
pub fn read_column_index(store: &ObjectStore, root: &RootIndex, column: &str) -> Result<Vec<IndexFile>> {
    let kinds: HashMap<&str, ValueKind> = root.entries.iter().map(|e| (e.col.as_str(), e.min.kind())).collect();
    root.entries_for(column)
        .map(|e| read_index_file(store, root, &e.file, &kinds))
        .collect()
}
