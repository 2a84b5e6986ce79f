//! The nine-row metrics table used throughout the docs and tests.
//!
//! Rows 1-3 live in `file201`, rows 4-6 in `file170`, rows 7-9 in `file051`.

use super::schema::{Lake, LakeFile, TableSchema, Tuple};
use super::value::{Value, ValueKind};

pub const TABLE: &str = "metrics";

/// `(date, metric, val)` rows in global record order.
pub const ROWS: [(&str, &str, i64); 9] = [
    ("2020-02-10", "cpu", 47),
    ("2020-02-14", "cpu", 58),
    ("2020-02-18", "memory", 11),
    ("2020-02-16", "memory", 8),
    ("2020-02-20", "cpu", 88),
    ("2020-02-21", "cpu", 66),
    ("2020-03-13", "memory", 6),
    ("2020-03-22", "cpu", 92),
    ("2020-03-28", "cpu", 71),
];

pub const FILES: [&str; 3] = ["file201", "file170", "file051"];

pub fn file_key(short: &str) -> String {
    format!("data/{TABLE}/{short}")
}

pub fn schema() -> TableSchema {
    TableSchema::from_pairs([("date", ValueKind::Date), ("metric", ValueKind::Text), ("val", ValueKind::Int)])
        .expect("static schema")
}

pub fn tuple(row: usize) -> Tuple {
    let (d, m, v) = ROWS[row];
    Tuple::new(vec![
        Value::parse(ValueKind::Date, d).expect("static date"),
        Value::text(m).expect("static text"),
        Value::Int(v),
    ])
}

/// Global 1-based record id of `(file, ordinal)`.
pub fn global_record_id(file_short: &str, ordinal: u32) -> Option<u32> {
    let f = FILES.iter().position(|f| *f == file_short)?;
    Some(f as u32 * 3 + ordinal + 1)
}

pub fn lake() -> Lake {
    let files = FILES
        .iter()
        .enumerate()
        .map(|(i, short)| LakeFile::new(file_key(short), (0..3).map(|r| tuple(i * 3 + r)).collect()))
        .collect();
    Lake::new(TABLE, schema(), files).expect("static lake")
}
