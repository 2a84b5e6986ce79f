use std::collections::HashSet;
use std::fmt;

use super::value::{Value, ValueKind};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Column {
    pub name: String,
    pub kind: ValueKind,
}

/// Ordered column list of a lake table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableSchema {
    columns: Vec<Column>,
}

impl TableSchema {
    pub fn new(columns: Vec<Column>) -> Result<Self> {
        if columns.is_empty() {
            return Err(Error::Schema("a table needs at least one column".into()));
        }
        let mut seen = HashSet::new();
        for c in &columns {
            if c.name.is_empty() {
                return Err(Error::Schema("column names must be non-empty".into()));
            }
            if c.name.contains(|ch: char| ch.is_whitespace() || "()=<>!,".contains(ch)) {
                return Err(Error::Schema(format!("column name `{}` has reserved characters", c.name)));
            }
            if !seen.insert(c.name.as_str()) {
                return Err(Error::Schema(format!("duplicate column `{}`", c.name)));
            }
        }
        Ok(TableSchema { columns })
    }

    /// Convenience constructor from `(name, kind)` pairs.
    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, ValueKind)>) -> Result<Self> {
        Self::new(
            pairs
                .into_iter()
                .map(|(name, kind)| Column {
                    name: name.to_string(),
                    kind,
                })
                .collect(),
        )
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn position(&self, name: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c.name == name)
            .ok_or_else(|| Error::UnknownColumn(name.to_string()))
    }

    pub fn kind_of(&self, name: &str) -> Result<ValueKind> {
        Ok(self.columns[self.position(name)?].kind)
    }

    pub fn check_tuple(&self, t: &Tuple) -> Result<()> {
        if t.len() != self.len() {
            return Err(Error::Schema(format!(
                "tuple has {} values, schema has {} columns",
                t.len(),
                self.len()
            )));
        }
        for (v, c) in t.values().iter().zip(&self.columns) {
            if v.kind() != c.kind {
                return Err(Error::TypeMismatch {
                    expected: c.kind,
                    found: v.kind(),
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Tuple(Vec<Value>);

impl Tuple {
    pub fn new(values: Vec<Value>) -> Self {
        Tuple(values)
    }

    pub fn values(&self) -> &[Value] {
        &self.0
    }

    pub fn get(&self, i: usize) -> &Value {
        &self.0[i]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn project(&self, positions: &[usize]) -> Tuple {
        Tuple(positions.iter().map(|&i| self.0[i].clone()).collect())
    }
}

impl From<Vec<Value>> for Tuple {
    fn from(v: Vec<Value>) -> Self {
        Tuple(v)
    }
}

impl fmt::Display for Tuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("\t")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Record identity: the file a tuple lives in plus its zero-based ordinal there.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RecordId {
    pub file: String,
    pub ordinal: u32,
}

impl RecordId {
    pub fn new(file: impl Into<String>, ordinal: u32) -> Self {
        RecordId {
            file: file.into(),
            ordinal,
        }
    }
}

/// One immutable partition of a table.
#[derive(Debug, Clone, PartialEq)]
pub struct LakeFile {
    pub key: String,
    /// Logical store tick; 0 until the file is written.
    pub created_at: u64,
    pub tuples: Vec<Tuple>,
}

impl LakeFile {
    pub fn new(key: impl Into<String>, tuples: Vec<Tuple>) -> Self {
        LakeFile {
            key: key.into(),
            created_at: 0,
            tuples,
        }
    }
}

/// Key of the `n`-th data file of a table.
pub fn data_file_key(table: &str, n: usize) -> String {
    format!("{}part-{n:06}", data_prefix(table))
}

/// Prefix shared by every data file of a table.
pub fn data_prefix(table: &str) -> String {
    format!("data/{table}/")
}

/// A table partitioned into files.
#[derive(Debug, Clone, PartialEq)]
pub struct Lake {
    pub table: String,
    pub schema: TableSchema,
    pub files: Vec<LakeFile>,
}

impl Lake {
    pub fn new(table: impl Into<String>, schema: TableSchema, files: Vec<LakeFile>) -> Result<Self> {
        let table = table.into();
        if table.is_empty() || table.contains('/') {
            return Err(Error::Schema(format!("invalid table name `{table}`")));
        }
        let mut keys = HashSet::new();
        for f in &files {
            if !keys.insert(f.key.as_str()) {
                return Err(Error::Schema(format!("duplicate file key `{}`", f.key)));
            }
            for t in &f.tuples {
                schema.check_tuple(t)?;
            }
        }
        Ok(Lake { table, schema, files })
    }

    pub fn row_count(&self) -> usize {
        self.files.iter().map(|f| f.tuples.len()).sum()
    }

    pub fn file_keys(&self) -> Vec<String> {
        self.files.iter().map(|f| f.key.clone()).collect()
    }

    pub fn file(&self, key: &str) -> Option<&LakeFile> {
        self.files.iter().find(|f| f.key == key)
    }

    /// Per-column `(min, max)` over all tuples; `None` for an empty lake.
    pub fn column_ranges(&self) -> Option<Vec<(Value, Value)>> {
        let mut it = self.files.iter().flat_map(|f| f.tuples.iter());
        let first = it.next()?;
        let mut ranges: Vec<(Value, Value)> =
            first.values().iter().map(|v| (v.clone(), v.clone())).collect();
        for t in it {
            for (r, v) in ranges.iter_mut().zip(t.values()) {
                if *v < r.0 {
                    r.0 = v.clone();
                }
                if *v > r.1 {
                    r.1 = v.clone();
                }
            }
        }
        Some(ranges)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schema_rejects_duplicates_and_empty_names() {
        assert!(TableSchema::from_pairs([("a", ValueKind::Int), ("a", ValueKind::Int)]).is_err());
        assert!(TableSchema::from_pairs([("", ValueKind::Int)]).is_err());
        assert!(TableSchema::from_pairs([("a b", ValueKind::Int)]).is_err());
    }

    #[test]
    fn lake_rejects_duplicate_keys_and_bad_tuples() {
        let schema = TableSchema::from_pairs([("a", ValueKind::Int)]).unwrap();
        let f = LakeFile::new("k", vec![Tuple::new(vec![Value::Int(1)])]);
        assert!(Lake::new("t", schema.clone(), vec![f.clone(), f.clone()]).is_err());
        let bad = LakeFile::new("k2", vec![Tuple::new(vec![Value::Date(1)])]);
        assert!(Lake::new("t", schema, vec![bad]).is_err());
    }

    #[test]
    fn data_keys_are_zero_padded() {
        assert_eq!(data_file_key("metrics", 7), "data/metrics/part-000007");
    }
}
