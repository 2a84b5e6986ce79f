//! Runs a workload in one mode next to the baseline and reports reads.

use std::fmt::Write as _;
use std::time::Duration;

use super::config::BenchConfig;
use crate::cache::{CacheConfig, PredicateCache};
use crate::engine::{canonical_rows, execute_query, ExecContext, ExecMode, ExecReport};
use crate::error::{Error, Result};
use crate::index::RootIndex;
use crate::model::{LakeMeta, Query, Value};
use crate::store::ObjectStore;

#[derive(Debug, Clone, PartialEq)]
pub struct QueryRow {
    pub query: usize,
    pub mode: ExecMode,
    pub gets: u64,
    pub coverage_size: usize,
    pub rows: usize,
    pub cache_hit: bool,
    pub fallback: bool,
    pub elapsed: Duration,
}

impl QueryRow {
    fn new(query: usize, mode: ExecMode, r: &ExecReport) -> Self {
        QueryRow {
            query,
            mode,
            gets: r.gets,
            coverage_size: r.coverage_size,
            rows: r.rows.len(),
            cache_hit: r.cache_hit,
            fallback: r.fallback_taken,
            elapsed: r.elapsed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSummary {
    pub mode: ExecMode,
    pub queries: usize,
    pub baseline_gets: u64,
    pub mode_gets: u64,
    /// `100 · (1 − mode_gets / baseline_gets)`.
    pub read_reduction_pct: f64,
    pub baseline_elapsed: Duration,
    pub mode_elapsed: Duration,
    pub hit_rate: f64,
    /// Cumulative hit rate after each quarter of the workload.
    pub cumulative_hit_rates: Vec<f64>,
    pub fallbacks: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioReport {
    pub rows: Vec<QueryRow>,
    pub summary: ScenarioSummary,
}

impl ScenarioReport {
    /// Per-query TSV; elapsed is left out when `with_elapsed` is false so
    /// reports of equal seeds compare byte for byte.
    pub fn to_tsv(&self, with_elapsed: bool) -> String {
        let mut out = String::from("query\tmode\tgets\tcoverage_size\trows\thit\tfallback");
        out.push_str(if with_elapsed { "\telapsed_us\n" } else { "\n" });
        for r in &self.rows {
            let _ = write!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}",
                r.query, r.mode, r.gets, r.coverage_size, r.rows, r.cache_hit, r.fallback
            );
            if with_elapsed {
                let _ = write!(out, "\t{}", r.elapsed.as_micros());
            }
            out.push('\n');
        }
        out
    }

    pub fn summary_text(&self) -> String {
        let s = &self.summary;
        let n = s.queries.max(1) as u32;
        let windows: Vec<String> = s.cumulative_hit_rates.iter().map(|h| format!("{h:.3}")).collect();
        format!(
            "queries            {}\n\
             mode               {}\n\
             baseline gets      {}\n\
             mode gets          {}\n\
             read reduction     {:.2}%\n\
             baseline mean      {:.3} ms\n\
             mode mean          {:.3} ms\n\
             hit rate           {:.3}\n\
             cumulative hits    {}\n\
             fallbacks          {}\n",
            s.queries,
            s.mode,
            s.baseline_gets,
            s.mode_gets,
            s.read_reduction_pct,
            (s.baseline_elapsed / n).as_secs_f64() * 1e3,
            (s.mode_elapsed / n).as_secs_f64() * 1e3,
            s.hit_rate,
            windows.join(" "),
            s.fallbacks
        )
    }
}

/// Builds the execution context `cfg.mode` needs.
pub fn mode_context<'a>(cfg: &BenchConfig, store: &'a ObjectStore, meta: LakeMeta) -> Result<ExecContext<'a>> {
    let mut ctx = ExecContext::new(store, meta.clone())
        .with_table_rows(cfg.records as u64)
        .with_k_multiplier(cfg.k_multiplier)?;
    if cfg.mode.uses_index() {
        ctx = ctx.with_index(RootIndex::load(store, &meta)?);
    }
    if cfg.mode.uses_cache() {
        let backend = if cfg.mode == ExecMode::CachedSpatial {
            crate::cache::Backend::Spatial
        } else {
            cfg.backend
        };
        let domain = vec![(Value::Int(0), Value::Int(cfg.value_range - 1)); meta.schema.len()];
        let cache = PredicateCache::new(
            CacheConfig {
                backend,
                policy: cfg.policy,
                capacity: cfg.cache_capacity,
                ..CacheConfig::default()
            },
            meta.data_prefix(),
            domain,
        )?;
        ctx = ctx.with_cache(cache);
    }
    Ok(ctx)
}

/// Executes `workload` under the baseline and under `cfg.mode`, checking
/// that both return the same rows. A difference is a [`Error::Mismatch`].
pub fn run_scenario(cfg: &BenchConfig, store: &ObjectStore, workload: &[Query]) -> Result<ScenarioReport> {
    cfg.validate()?;
    let meta = LakeMeta::load(store, &cfg.table)?;
    store.set_latency(Duration::from_micros(cfg.latency_us));
    let mut base_ctx = ExecContext::new(store, meta.clone());
    let mut mode_ctx = mode_context(cfg, store, meta)?;

    let mut rows = Vec::with_capacity(2 * workload.len());
    let mut hits = Vec::with_capacity(workload.len());
    let (mut base_gets, mut mode_gets) = (0, 0);
    let (mut base_time, mut mode_time) = (Duration::ZERO, Duration::ZERO);
    let mut fallbacks = 0;
    for (i, q) in workload.iter().enumerate() {
        let base = execute_query(q, ExecMode::Baseline, &mut base_ctx)?;
        let run = execute_query(q, cfg.mode, &mut mode_ctx)?;
        if canonical_rows(&base.rows) != canonical_rows(&run.rows) {
            return Err(Error::Mismatch(format!(
                "query {i} `{}`: baseline returned {} rows, {} returned {}",
                q.predicate,
                base.rows.len(),
                cfg.mode,
                run.rows.len()
            )));
        }
        base_gets += base.gets;
        mode_gets += run.gets;
        base_time += base.elapsed;
        mode_time += run.elapsed;
        fallbacks += usize::from(run.fallback_taken);
        hits.push(run.cache_hit);
        rows.push(QueryRow::new(i, ExecMode::Baseline, &base));
        rows.push(QueryRow::new(i, cfg.mode, &run));
    }
    let n = workload.len();
    let hit_count = hits.iter().filter(|h| **h).count();
    let cumulative_hit_rates = (1..=4)
        .map(|w| {
            let end = n * w / 4;
            if end == 0 {
                0.0
            } else {
                hits[..end].iter().filter(|h| **h).count() as f64 / end as f64
            }
        })
        .collect();
    let summary = ScenarioSummary {
        mode: cfg.mode,
        queries: n,
        baseline_gets: base_gets,
        mode_gets,
        read_reduction_pct: if base_gets == 0 {
            0.0
        } else {
            100.0 * (1.0 - mode_gets as f64 / base_gets as f64)
        },
        baseline_elapsed: base_time,
        mode_elapsed: mode_time,
        hit_rate: if n == 0 { 0.0 } else { hit_count as f64 / n as f64 },
        cumulative_hit_rates,
        fallbacks,
    };
    Ok(ScenarioReport { rows, summary })
}
