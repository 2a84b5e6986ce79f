use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;

use chrono::{Days, NaiveDate};

use crate::error::{Error, Result};

/// The kind of a column domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ValueKind {
    Int,
    Float,
    Text,
    Date,
}

impl ValueKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ValueKind::Int => "int",
            ValueKind::Float => "float",
            ValueKind::Text => "text",
            ValueKind::Date => "date",
        }
    }

    /// Integer-like domains where a strict bound can be closed with a unit step.
    pub fn is_discrete(self) -> bool {
        matches!(self, ValueKind::Int | ValueKind::Date)
    }
}

impl fmt::Display for ValueKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ValueKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "int" => Ok(ValueKind::Int),
            "float" => Ok(ValueKind::Float),
            "text" => Ok(ValueKind::Text),
            "date" => Ok(ValueKind::Date),
            other => Err(Error::Schema(format!("unknown value kind `{other}`"))),
        }
    }
}

/// A single cell value.
///
/// Values of different kinds are never compared by the query layer; the
/// `Ord` impl orders by kind first so that mixed collections still sort
/// deterministically. Floats compare by `total_cmp`, so equality is
/// bit-exact and NaN is rejected at construction.
#[derive(Debug, Clone)]
pub enum Value {
    Int(i64),
    Float(f64),
    Text(String),
    /// Days since 1970-01-01.
    Date(i32),
}

impl Value {
    pub fn kind(&self) -> ValueKind {
        match self {
            Value::Int(_) => ValueKind::Int,
            Value::Float(_) => ValueKind::Float,
            Value::Text(_) => ValueKind::Text,
            Value::Date(_) => ValueKind::Date,
        }
    }

    pub fn float(v: f64) -> Result<Self> {
        if v.is_nan() {
            return Err(Error::InvalidValue("NaN is not a valid float value".into()));
        }
        Ok(Value::Float(v))
    }

    pub fn text(s: impl Into<String>) -> Result<Self> {
        let s = s.into();
        check_text(&s)?;
        Ok(Value::Text(s))
    }

    /// Builds a date from a calendar day.
    pub fn date(year: i32, month: u32, day: u32) -> Result<Self> {
        let d = NaiveDate::from_ymd_opt(year, month, day)
            .ok_or_else(|| Error::InvalidValue(format!("invalid date {year}-{month}-{day}")))?;
        Ok(Value::Date(days_from_epoch(d)))
    }

    /// Compares two values of the same kind.
    pub fn compare(&self, other: &Value) -> Result<Ordering> {
        if self.kind() != other.kind() {
            return Err(Error::TypeMismatch {
                expected: self.kind(),
                found: other.kind(),
            });
        }
        Ok(self.cmp(other))
    }

    /// Parses the canonical text form of a value of the given kind.
    pub fn parse(kind: ValueKind, s: &str) -> Result<Self> {
        match kind {
            ValueKind::Int => s
                .parse::<i64>()
                .map(Value::Int)
                .map_err(|e| Error::InvalidValue(format!("`{s}` is not an int: {e}"))),
            ValueKind::Float => {
                let v = s
                    .parse::<f64>()
                    .map_err(|e| Error::InvalidValue(format!("`{s}` is not a float: {e}")))?;
                Value::float(v)
            }
            ValueKind::Text => Value::text(s),
            ValueKind::Date => {
                let d = NaiveDate::parse_from_str(s, "%Y-%m-%d")
                    .map_err(|e| Error::InvalidValue(format!("`{s}` is not a date: {e}")))?;
                Ok(Value::Date(days_from_epoch(d)))
            }
        }
    }

    /// Next value in a discrete domain, saturating at the domain edge.
    pub(crate) fn successor(&self) -> Option<Value> {
        match self {
            Value::Int(v) => v.checked_add(1).map(Value::Int),
            Value::Date(v) => v.checked_add(1).map(Value::Date),
            _ => None,
        }
    }

    pub(crate) fn predecessor(&self) -> Option<Value> {
        match self {
            Value::Int(v) => v.checked_sub(1).map(Value::Int),
            Value::Date(v) => v.checked_sub(1).map(Value::Date),
            _ => None,
        }
    }

    /// Numeric position on the real line, for volumes and overlap fractions.
    /// Text has no meaningful distance.
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Int(v) => Some(*v as f64),
            Value::Float(v) => Some(*v),
            Value::Date(v) => Some(f64::from(*v)),
            Value::Text(_) => None,
        }
    }
}

fn check_text(s: &str) -> Result<()> {
    if s.is_empty() {
        return Err(Error::InvalidValue("empty text values are not supported".into()));
    }
    if s.contains(['\t', '\n', '\r']) {
        return Err(Error::InvalidValue(format!("text value {s:?} contains a tab or newline")));
    }
    Ok(())
}

const EPOCH: NaiveDate = match NaiveDate::from_ymd_opt(1970, 1, 1) {
    Some(d) => d,
    None => unreachable!(),
};

fn days_from_epoch(d: NaiveDate) -> i32 {
    d.signed_duration_since(EPOCH).num_days() as i32
}

fn date_from_days(days: i32) -> Option<NaiveDate> {
    if days >= 0 {
        EPOCH.checked_add_days(Days::new(days as u64))
    } else {
        EPOCH.checked_sub_days(Days::new(u64::from(days.unsigned_abs())))
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(v) => write!(f, "{v}"),
            // `{}` on f64 is the shortest representation that round-trips.
            Value::Float(v) => write!(f, "{v}"),
            Value::Text(s) => f.write_str(s),
            Value::Date(days) => match date_from_days(*days) {
                Some(d) => write!(f, "{}", d.format("%Y-%m-%d")),
                None => write!(f, "date({days})"),
            },
        }
    }
}

impl Ord for Value {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Value::Int(a), Value::Int(b)) => a.cmp(b),
            (Value::Float(a), Value::Float(b)) => a.total_cmp(b),
            (Value::Text(a), Value::Text(b)) => a.as_bytes().cmp(b.as_bytes()),
            (Value::Date(a), Value::Date(b)) => a.cmp(b),
            _ => self.kind().cmp(&other.kind()),
        }
    }
}

impl PartialOrd for Value {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Value {}

impl Hash for Value {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.kind().hash(state);
        match self {
            Value::Int(v) => v.hash(state),
            Value::Float(v) => v.to_bits().hash(state),
            Value::Text(s) => s.hash(state),
            Value::Date(v) => v.hash(state),
        }
    }
}

impl From<i64> for Value {
    fn from(v: i64) -> Self {
        Value::Int(v)
    }
}
