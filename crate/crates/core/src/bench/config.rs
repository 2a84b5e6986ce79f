//! Scenario configuration from `key=value` text.

use std::fmt;
use std::str::FromStr;

use crate::cache::{Backend, EvictionPolicy};
use crate::engine::ExecMode;
use crate::error::{Error, Result};

/// Query shape of a generated workload.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WorkloadKind {
    /// Equality on values taken from real rows, one clause per column.
    Point,
    /// Random CNF: clauses of one or two comparison terms.
    Cnf,
    /// Conjunctive `lo <= c <= hi` ranges of a configured width.
    Range,
    /// Conjunctive ranges built from a few discrete anchors per column, so
    /// queries repeat and nest.
    Anchored,
}

impl WorkloadKind {
    pub fn as_str(self) -> &'static str {
        match self {
            WorkloadKind::Point => "point",
            WorkloadKind::Cnf => "cnf",
            WorkloadKind::Range => "range",
            WorkloadKind::Anchored => "anchored",
        }
    }
}

impl FromStr for WorkloadKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "point" => Ok(WorkloadKind::Point),
            "cnf" => Ok(WorkloadKind::Cnf),
            "range" => Ok(WorkloadKind::Range),
            "anchored" => Ok(WorkloadKind::Anchored),
            other => Err(Error::Config(format!("unknown workload `{other}` (point, cnf, range, anchored)"))),
        }
    }
}

/// Which columns get an index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IndexedColumns {
    All,
    Some(Vec<String>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub table: String,
    pub columns: usize,
    pub records: usize,
    pub files: usize,
    pub seed: u64,
    /// Values are drawn from `0..value_range`.
    pub value_range: i64,
    /// Zipf exponent for values; 0 means uniform.
    pub skew: f64,
    pub indexed: IndexedColumns,
    pub entries_per_file: usize,
    pub queries: usize,
    pub workload: WorkloadKind,
    /// Columns touched per predicate (upper bound for random shapes).
    pub predicate_columns: usize,
    /// Range width as a fraction of `value_range`.
    pub range_width: f64,
    /// Anchors per column for anchored workloads.
    pub anchors: usize,
    pub mode: ExecMode,
    pub k_multiplier: f64,
    pub cache_capacity: usize,
    pub policy: EvictionPolicy,
    pub backend: Backend,
    pub latency_us: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            table: "bench".into(),
            columns: 3,
            records: 10_000,
            files: 1_000,
            seed: 42,
            value_range: 1_000_000,
            skew: 0.0,
            indexed: IndexedColumns::All,
            entries_per_file: crate::index::DEFAULT_ENTRIES_PER_FILE,
            queries: 100,
            workload: WorkloadKind::Point,
            predicate_columns: 1,
            range_width: 0.01,
            anchors: 8,
            mode: ExecMode::Indexed,
            k_multiplier: 1.0,
            cache_capacity: 1_000,
            policy: EvictionPolicy::Unlimited,
            backend: Backend::List,
            latency_us: 0,
        }
    }
}

fn num<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::Config(format!("`{key}` expects a number, got `{v}`")))
}

impl BenchConfig {
    /// Applies one `key=value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key.trim() {
            "table" => self.table = v.to_string(),
            "columns" => self.columns = num(key, v)?,
            "records" => self.records = num(key, v)?,
            "files" => self.files = num(key, v)?,
            "seed" => self.seed = num(key, v)?,
            "value_range" => self.value_range = num(key, v)?,
            "skew" => self.skew = num(key, v)?,
            "indexed" => {
                self.indexed = if v == "all" {
                    IndexedColumns::All
                } else {
                    IndexedColumns::Some(v.split(',').map(|c| c.trim().to_string()).filter(|c| !c.is_empty()).collect())
                }
            }
            "entries_per_file" => self.entries_per_file = num(key, v)?,
            "queries" => self.queries = num(key, v)?,
            "workload" => self.workload = v.parse()?,
            "predicate_columns" => self.predicate_columns = num(key, v)?,
            "range_width" => self.range_width = num(key, v)?,
            "anchors" => self.anchors = num(key, v)?,
            "mode" => self.mode = v.parse()?,
            "k_multiplier" => self.k_multiplier = num(key, v)?,
            "cache_capacity" => self.cache_capacity = num(key, v)?,
            "policy" => self.policy = EvictionPolicy::parse(v)?,
            "backend" => self.backend = v.parse()?,
            "latency_us" => self.latency_us = num(key, v)?,
            other => return Err(Error::Config(format!("unknown setting `{other}`"))),
        }
        Ok(())
    }

    /// Applies `key=value` lines; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(n + 1, format!("expected key=value, got `{line}`")))?;
            self.set(k, v).map_err(|e| Error::parse(n + 1, e.to_string()))?;
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut c = BenchConfig::default();
        c.apply_text(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("columns", self.columns),
            ("records", self.records),
            ("files", self.files),
            ("entries_per_file", self.entries_per_file),
            ("queries", self.queries),
            ("predicate_columns", self.predicate_columns),
            ("anchors", self.anchors),
            ("cache_capacity", self.cache_capacity),
        ];
        for (name, v) in counts {
            if v == 0 {
                return Err(Error::Config(format!("`{name}` must be at least 1")));
            }
        }
        if self.files > self.records {
            return Err(Error::Config("`files` cannot exceed `records` (every file holds a row)".into()));
        }
        if self.predicate_columns > self.columns {
            return Err(Error::Config("`predicate_columns` cannot exceed `columns`".into()));
        }
        if self.value_range < 1 {
            return Err(Error::Config("`value_range` must be at least 1".into()));
        }
        if !(self.range_width > 0.0 && self.range_width <= 1.0) {
            return Err(Error::Config("`range_width` must be in (0, 1]".into()));
        }
        if self.skew.is_nan() || self.skew < 0.0 {
            return Err(Error::Config("`skew` must be non-negative".into()));
        }
        if self.k_multiplier.is_nan() || self.k_multiplier <= 0.0 {
            return Err(Error::Config("`k_multiplier` must be positive".into()));
        }
        if self.workload == WorkloadKind::Anchored && self.columns < 3 {
            return Err(Error::Config("anchored workloads need at least 3 columns".into()));
        }
        if let IndexedColumns::Some(cols) = &self.indexed {
            for c in cols {
                if !self.column_names().contains(c) {
                    return Err(Error::Config(format!("indexed column `{c}` does not exist")));
                }
            }
        }
        Ok(())
    }

    pub fn column_names(&self) -> Vec<String> {
        (0..self.columns).map(|i| format!("c{i}")).collect()
    }

    pub fn indexed_columns(&self) -> Vec<String> {
        match &self.indexed {
            IndexedColumns::All => self.column_names(),
            IndexedColumns::Some(c) => c.clone(),
        }
    }
}

impl fmt::Display for BenchConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let indexed = match &self.indexed {
            IndexedColumns::All => "all".to_string(),
            IndexedColumns::Some(c) => c.join(","),
        };
        let policy = match self.policy {
            EvictionPolicy::Unlimited => "unlimited".to_string(),
            EvictionPolicy::CoverageOptimized => "coverage".to_string(),
            EvictionPolicy::VolumeOptimized => "volume".to_string(),
            EvictionPolicy::Combined { w1, w2 } => format!("combined:{w1},{w2}"),
        };
        let backend = match self.backend {
            Backend::List => "list",
            Backend::Spatial => "spatial",
        };
        writeln!(f, "table={}", self.table)?;
        writeln!(f, "columns={}", self.columns)?;
        writeln!(f, "records={}", self.records)?;
        writeln!(f, "files={}", self.files)?;
        writeln!(f, "seed={}", self.seed)?;
        writeln!(f, "value_range={}", self.value_range)?;
        writeln!(f, "skew={}", self.skew)?;
        writeln!(f, "indexed={indexed}")?;
        writeln!(f, "entries_per_file={}", self.entries_per_file)?;
        writeln!(f, "queries={}", self.queries)?;
        writeln!(f, "workload={}", self.workload.as_str())?;
        writeln!(f, "predicate_columns={}", self.predicate_columns)?;
        writeln!(f, "range_width={}", self.range_width)?;
        writeln!(f, "anchors={}", self.anchors)?;
        writeln!(f, "mode={}", self.mode)?;
        writeln!(f, "k_multiplier={}", self.k_multiplier)?;
        writeln!(f, "cache_capacity={}", self.cache_capacity)?;
        writeln!(f, "policy={policy}")?;
        writeln!(f, "backend={backend}")?;
        writeln!(f, "latency_us={}", self.latency_us)
    }
}
