//! End-to-end query execution.
//!
//! Every mode returns the same rows; they differ only in which data files
//! are read. `Baseline` reads them all. `Indexed` plans over the index
//! and reads the coverage it computes, falling back to a full scan when the
//! plan is not worth it. The cached modes reuse coverages of containing
//! predicates and remember what each miss observed.

use std::time::{Duration, Instant};

use crate::cache::{to_interval, Backend, PredicateCache};
use crate::error::{Error, Result};
use crate::estimator::build_bqcpp_input;
use crate::index::{coverage_by_index, RootIndex};
use crate::model::{BoundPredicate, Clause, CoverageSet, LakeMeta, Query, Tuple};
use crate::planner::{decide, solve_greedy, Decision, NumericSemigroup};
use crate::store::ObjectStore;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExecMode {
    Baseline,
    Indexed,
    Cached,
    CachedSpatial,
    IndexedCached,
}

impl ExecMode {
    pub const ALL: [ExecMode; 5] = [
        ExecMode::Baseline,
        ExecMode::Indexed,
        ExecMode::Cached,
        ExecMode::CachedSpatial,
        ExecMode::IndexedCached,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExecMode::Baseline => "baseline",
            ExecMode::Indexed => "indexed",
            ExecMode::Cached => "cached",
            ExecMode::CachedSpatial => "cached-spatial",
            ExecMode::IndexedCached => "indexed-cached",
        }
    }

    pub fn uses_index(self) -> bool {
        matches!(self, ExecMode::Indexed | ExecMode::IndexedCached)
    }

    pub fn uses_cache(self) -> bool {
        matches!(self, ExecMode::Cached | ExecMode::CachedSpatial | ExecMode::IndexedCached)
    }
}

impl std::fmt::Display for ExecMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ExecMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExecMode::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown mode `{s}`")))
    }
}

/// Everything a query may need.
#[derive(Debug)]
pub struct ExecContext<'a> {
    pub store: &'a ObjectStore,
    pub meta: LakeMeta,
    pub root: Option<RootIndex>,
    pub cache: Option<PredicateCache>,
    /// Row count of the table, for estimates.
    pub table_rows: u64,
    /// Plans costing more than `k_multiplier · |F|` fall back to a scan.
    pub k_multiplier: f64,
}

impl<'a> ExecContext<'a> {
    pub fn new(store: &'a ObjectStore, meta: LakeMeta) -> Self {
        ExecContext {
            store,
            meta,
            root: None,
            cache: None,
            table_rows: 0,
            k_multiplier: 1.0,
        }
    }

    pub fn with_index(mut self, root: RootIndex) -> Self {
        if self.table_rows == 0 {
            self.table_rows = root.columns().iter().map(|c| root.total_count(c)).max().unwrap_or(0);
        }
        self.root = Some(root);
        self
    }

    pub fn with_cache(mut self, cache: PredicateCache) -> Self {
        self.cache = Some(cache);
        self
    }

    pub fn with_table_rows(mut self, rows: u64) -> Self {
        self.table_rows = rows;
        self
    }

    pub fn with_k_multiplier(mut self, k: f64) -> Result<Self> {
        if k.is_nan() || k <= 0.0 {
            return Err(Error::Config(format!("K multiplier must be positive, got {k}")));
        }
        self.k_multiplier = k;
        Ok(self)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExecReport {
    pub rows: Vec<Tuple>,
    /// Store reads made by this query.
    pub gets: u64,
    /// Data files read.
    pub coverage_size: usize,
    pub fallback_taken: bool,
    pub cache_hit: bool,
    /// Estimated plan cost, when a plan was made.
    pub plan_cost: Option<f64>,
    pub elapsed: Duration,
}

struct Scan {
    rows: Vec<Tuple>,
    matched: CoverageSet,
    files_read: usize,
}

fn scan_files<'k>(
    keys: impl IntoIterator<Item = &'k String>,
    pred: &BoundPredicate,
    projection: Option<&[usize]>,
    ctx: &ExecContext<'_>,
) -> Result<Scan> {
    let mut scan = Scan {
        rows: Vec::new(),
        matched: CoverageSet::new(),
        files_read: 0,
    };
    for key in keys {
        let tuples = ctx.meta.read_file(ctx.store, key)?;
        scan.files_read += 1;
        let before = scan.rows.len();
        for t in tuples.into_iter().filter(|t| pred.matches(t)) {
            scan.rows.push(match projection {
                Some(p) => t.project(p),
                None => t,
            });
        }
        if scan.rows.len() > before {
            scan.matched.insert(key.clone());
        }
    }
    Ok(scan)
}

enum Path {
    Full,
    Files(CoverageSet),
}

struct IndexedChoice {
    path: Path,
    fallback: bool,
    plan_cost: Option<f64>,
}

fn indexed_path(q: &Query, ctx: &ExecContext<'_>, universe: &[String]) -> Result<IndexedChoice> {
    let root = ctx
        .root
        .as_ref()
        .ok_or_else(|| Error::Config("indexed mode needs a root index".into()))?;
    let file_count = universe.len() as u64;
    let input = build_bqcpp_input(q, root, ctx.table_rows.max(1), file_count);
    let sg = NumericSemigroup::for_input(&input);
    let plan = solve_greedy(&input, &sg);
    let k = ctx.k_multiplier * file_count as f64;
    if plan.is_empty() || decide(&plan, k) == Decision::Fallback {
        return Ok(IndexedChoice {
            path: Path::Full,
            fallback: true,
            plan_cost: Some(plan.total_cost),
        });
    }
    let clauses: Vec<Clause> = plan
        .clauses()
        .into_iter()
        .map(|c| q.predicate.clauses()[c].clone())
        .collect();
    let cov = coverage_by_index(&clauses, root, ctx.store, universe)?;
    Ok(IndexedChoice {
        path: Path::Files(cov),
        fallback: false,
        plan_cost: Some(plan.total_cost),
    })
}

/// Runs `q` in `mode` and reports rows and read accounting.
pub fn execute_query(q: &Query, mode: ExecMode, ctx: &mut ExecContext<'_>) -> Result<ExecReport> {
    let start = Instant::now();
    let reads_before = ctx.store.reads();
    let pred = q.predicate.bind(&ctx.meta.schema)?;
    let projection = q.projection_positions(&ctx.meta.schema)?;
    let projection = projection.as_deref();
    let universe = ctx.meta.file_keys(ctx.store);

    let mut fallback = false;
    let mut cache_hit = false;
    let mut plan_cost = None;

    // interval and the tick before any scan, for cache insertion
    let mut to_cache = None;
    let mut path = None;
    if mode.uses_cache() {
        let cache = ctx
            .cache
            .as_ref()
            .ok_or_else(|| Error::Config(format!("{mode} mode needs a cache")))?;
        if mode == ExecMode::CachedSpatial && cache.config().backend != Backend::Spatial {
            return Err(Error::Config("cached-spatial mode needs a spatial cache backend".into()));
        }
        match to_interval(&q.predicate, &ctx.meta.schema) {
            Ok(iv) if iv.is_false() => path = Some(Path::Files(CoverageSet::new())),
            Ok(iv) => match cache.get_min_coverage(&iv, ctx.store) {
                Some(cov) => {
                    cache_hit = true;
                    let live: CoverageSet = cov.into_iter().filter(|k| ctx.store.contains(k)).collect();
                    path = Some(Path::Files(live));
                }
                None => to_cache = Some((iv, ctx.store.current_tick())),
            },
            Err(Error::NotCacheable(_)) => {}
            Err(e) => return Err(e),
        }
    }
    let path = match path {
        Some(p) => p,
        None if mode.uses_index() => {
            let choice = indexed_path(q, ctx, &universe)?;
            fallback = choice.fallback;
            plan_cost = choice.plan_cost;
            choice.path
        }
        None => Path::Full,
    };

    let scan = match &path {
        Path::Full => scan_files(&universe, &pred, projection, ctx)?,
        Path::Files(keys) => scan_files(keys, &pred, projection, ctx)?,
    };
    if let (Some((iv, ts)), Some(cache)) = (to_cache, ctx.cache.as_mut()) {
        cache.put(iv, scan.matched.clone(), ts)?;
    }
    Ok(ExecReport {
        gets: ctx.store.reads() - reads_before,
        coverage_size: scan.files_read,
        rows: scan.rows,
        fallback_taken: fallback,
        cache_hit,
        plan_cost,
        elapsed: start.elapsed(),
    })
}

/// Rows sorted, for multiset comparison across modes.
pub fn canonical_rows(rows: &[Tuple]) -> Vec<Tuple> {
    let mut v = rows.to_vec();
    v.sort_by(|a, b| a.values().cmp(b.values()));
    v
}
