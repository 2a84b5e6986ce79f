//! TSV encodings of lake data files and table schemas.
//!
//! Data files are UTF-8, LF-terminated, tab-separated. The first line holds
//! the column names; every following line is one tuple in schema order.

use std::fmt::Write as _;

use super::schema::{Column, TableSchema, Tuple};
use super::value::{Value, ValueKind};
use crate::error::{Error, Result};

pub fn encode_tuples(schema: &TableSchema, tuples: &[Tuple]) -> Vec<u8> {
    let mut out = String::with_capacity(16 * (tuples.len() + 1) * schema.len());
    write_header(&mut out, schema.columns().iter().map(|c| c.name.as_str()));
    for t in tuples {
        let _ = writeln!(out, "{t}");
    }
    out.into_bytes()
}

pub(crate) fn write_header<'a>(out: &mut String, names: impl Iterator<Item = &'a str>) {
    for (i, n) in names.enumerate() {
        if i > 0 {
            out.push('\t');
        }
        out.push_str(n);
    }
    out.push('\n');
}

pub fn decode_tuples(schema: &TableSchema, bytes: &[u8]) -> Result<Vec<Tuple>> {
    let text = std::str::from_utf8(bytes).map_err(|e| Error::parse(0, format!("not UTF-8: {e}")))?;
    let mut lines = text.split_terminator('\n');
    let header = lines.next().ok_or_else(|| Error::parse(1, "missing header line"))?;
    let expected = schema.columns().iter().map(|c| c.name.as_str());
    if !header.split('\t').eq(expected) {
        return Err(Error::parse(1, format!("header `{header}` does not match the schema")));
    }
    let kinds: Vec<ValueKind> = schema.columns().iter().map(|c| c.kind).collect();
    let mut tuples = Vec::new();
    for (n, line) in lines.enumerate() {
        tuples.push(decode_row(&kinds, line).map_err(|e| Error::parse(n + 2, e.to_string()))?);
    }
    Ok(tuples)
}

fn decode_row(kinds: &[ValueKind], line: &str) -> Result<Tuple> {
    let mut values = Vec::with_capacity(kinds.len());
    let mut fields = line.split('\t');
    for &kind in kinds {
        let field = fields
            .next()
            .ok_or_else(|| Error::InvalidValue(format!("expected {} fields", kinds.len())))?;
        values.push(Value::parse(kind, field)?);
    }
    if fields.next().is_some() {
        return Err(Error::InvalidValue(format!("expected {} fields", kinds.len())));
    }
    Ok(Tuple::new(values))
}

/// Schema file: one `name\tkind` line per column.
pub fn encode_schema(schema: &TableSchema) -> Vec<u8> {
    let mut out = String::new();
    for c in schema.columns() {
        let _ = writeln!(out, "{}\t{}", c.name, c.kind);
    }
    out.into_bytes()
}

pub fn decode_schema(bytes: &[u8]) -> Result<TableSchema> {
    let text = std::str::from_utf8(bytes).map_err(|e| Error::parse(0, format!("not UTF-8: {e}")))?;
    let mut cols = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let (name, kind) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse(n + 1, "expected `name<TAB>kind`"))?;
        cols.push(Column {
            name: name.to_string(),
            kind: kind.parse().map_err(|e: Error| Error::parse(n + 1, e.to_string()))?,
        });
    }
    TableSchema::new(cols)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn encodes_header_and_rows() {
        let schema = TableSchema::from_pairs([("d", ValueKind::Date), ("v", ValueKind::Float)]).unwrap();
        let rows = vec![Tuple::new(vec![Value::date(2020, 2, 10).unwrap(), Value::Float(0.5)])];
        let bytes = encode_tuples(&schema, &rows);
        assert_eq!(std::str::from_utf8(&bytes).unwrap(), "d\tv\n2020-02-10\t0.5\n");
        assert_eq!(decode_tuples(&schema, &bytes).unwrap(), rows);
    }

    #[test]
    fn decode_reports_line_numbers() {
        let schema = TableSchema::from_pairs([("a", ValueKind::Int)]).unwrap();
        let err = decode_tuples(&schema, b"a\n1\nx\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        assert!(decode_tuples(&schema, b"b\n1\n").is_err());
        assert!(decode_tuples(&schema, b"a\n1\t2\n").is_err());
    }

    #[test]
    fn schema_round_trip() {
        let schema = TableSchema::from_pairs([("a", ValueKind::Int), ("b", ValueKind::Text)]).unwrap();
        assert_eq!(decode_schema(&encode_schema(&schema)).unwrap(), schema);
    }
}
