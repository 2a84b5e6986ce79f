//! Predicate-containment cache of coverage sets.
//!
//! An entry `(I, X, ts)` records that `X` was the tight coverage of the
//! interval predicate `I` at store tick `ts`. Any query whose interval is
//! contained in `I` is covered by `X` plus every data file created after
//! `ts`. Deleted files are removed from every entry as they go.

mod interval;
mod policy;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

pub use interval::{to_interval, IntervalPredicate, ResolvedInterval};
pub use policy::{policy_score, EvictionPolicy, PolicyStats};

use crate::error::{Error, Result};
use crate::model::{CoverageSet, Value};
use crate::rangesearch::{interval_to_point, query_to_bounds, KdTree};
use crate::store::ObjectStore;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Backend {
    #[default]
    List,
    Spatial,
}

impl std::str::FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "list" => Ok(Backend::List),
            "spatial" => Ok(Backend::Spatial),
            other => Err(Error::Config(format!("unknown cache backend `{other}` (list, spatial)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CacheConfig {
    pub backend: Backend,
    pub policy: EvictionPolicy,
    /// Ignored for [`EvictionPolicy::Unlimited`].
    pub capacity: usize,
    /// Score coverage with the literal (keep-large) term.
    pub literal_coverage_term: bool,
    /// Keep a file → entries map so deletes touch only affected entries.
    pub file_map: bool,
}

impl Default for CacheConfig {
    fn default() -> Self {
        CacheConfig {
            backend: Backend::List,
            policy: EvictionPolicy::Unlimited,
            capacity: usize::MAX,
            literal_coverage_term: false,
            file_map: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CacheEntry {
    pub id: u64,
    pub interval: IntervalPredicate,
    pub coverage: CoverageSet,
    pub ts: u64,
    pub volume: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PutOutcome {
    pub id: u64,
    pub evicted: Vec<u64>,
}

#[derive(Debug)]
pub struct PredicateCache {
    config: CacheConfig,
    data_prefix: String,
    domain: Vec<(Value, Value)>,
    entries: BTreeMap<u64, CacheEntry>,
    by_interval: HashMap<IntervalPredicate, u64>,
    next_id: u64,
    files: HashMap<String, BTreeSet<u64>>,
    tree: KdTree<u64>,
    // spatial backend: entries with an open end live here
    side: BTreeSet<u64>,
}

impl PredicateCache {
    /// `domain` holds each column's `(min, max)`; it is used only to give
    /// unbounded intervals a finite volume.
    pub fn new(config: CacheConfig, data_prefix: impl Into<String>, domain: Vec<(Value, Value)>) -> Result<Self> {
        if config.policy != EvictionPolicy::Unlimited && config.capacity == 0 {
            return Err(Error::Config("cache capacity must be at least 1".into()));
        }
        let m = domain.len();
        Ok(PredicateCache {
            config,
            data_prefix: data_prefix.into(),
            domain,
            entries: BTreeMap::new(),
            by_interval: HashMap::new(),
            next_id: 0,
            files: HashMap::new(),
            tree: KdTree::new(2 * m),
            side: BTreeSet::new(),
        })
    }

    pub fn config(&self) -> &CacheConfig {
        &self.config
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = &CacheEntry> {
        self.entries.values()
    }

    pub fn entry(&self, id: u64) -> Option<&CacheEntry> {
        self.entries.get(&id)
    }

    /// KD-tree nodes inspected so far (spatial backend).
    pub fn visited_nodes(&self) -> u64 {
        self.tree.visited()
    }

    pub fn reset_visited_nodes(&self) {
        self.tree.reset_visited();
    }

    /// Stores the tight coverage `x` of `p` observed at tick `ts`. An entry
    /// with the same interval is replaced.
    pub fn put(&mut self, p: IntervalPredicate, x: CoverageSet, ts: u64) -> Result<PutOutcome> {
        if p.is_false() {
            return Err(Error::NotCacheable("the false predicate needs no coverage".into()));
        }
        if p.dims().len() != self.domain.len() {
            return Err(Error::Contract(format!(
                "interval has {} dimensions, cache has {}",
                p.dims().len(),
                self.domain.len()
            )));
        }
        if let Some(old) = self.by_interval.get(&p).copied() {
            self.remove_entry(old);
        }
        let id = self.next_id;
        self.next_id += 1;
        if self.config.file_map {
            for f in &x {
                self.files.entry(f.clone()).or_default().insert(id);
            }
        }
        if self.config.backend == Backend::Spatial {
            match interval_to_point(p.dims()) {
                Ok(point) => self.tree.insert(point, id)?,
                Err(_) => {
                    self.side.insert(id);
                }
            }
        }
        let volume = p.volume(&self.domain);
        self.by_interval.insert(p.clone(), id);
        self.entries.insert(
            id,
            CacheEntry {
                id,
                interval: p,
                coverage: x,
                ts,
                volume,
            },
        );
        let evicted = self.evict_to_capacity();
        Ok(PutOutcome { id, evicted })
    }

    fn evict_to_capacity(&mut self) -> Vec<u64> {
        let Some((w1, w2)) = self.config.policy.weights() else {
            return Vec::new();
        };
        let mut evicted = Vec::new();
        while self.entries.len() > self.config.capacity {
            let stats = PolicyStats::from_entries(self.entries.values().map(|e| (e.volume, e.coverage.len())))
                .expect("cache is over capacity, so non-empty");
            // lowest score goes; ties evict the oldest
            let victim = self
                .entries
                .values()
                .map(|e| {
                    let s = policy_score(e.volume, e.coverage.len(), &stats, w1, w2, self.config.literal_coverage_term);
                    (s, e.id)
                })
                .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
                .map(|(_, id)| id)
                .expect("non-empty");
            self.remove_entry(victim);
            evicted.push(victim);
        }
        evicted
    }

    fn remove_entry(&mut self, id: u64) -> Option<CacheEntry> {
        let e = self.entries.remove(&id)?;
        self.by_interval.remove(&e.interval);
        if self.config.file_map {
            for f in &e.coverage {
                if let Some(ids) = self.files.get_mut(f) {
                    ids.remove(&id);
                    if ids.is_empty() {
                        self.files.remove(f);
                    }
                }
            }
        }
        if !self.side.remove(&id) {
            self.tree.remove(&id);
        }
        Some(e)
    }

    /// Ids of every entry whose interval contains `p`, ascending.
    pub fn candidates(&self, p: &IntervalPredicate) -> Vec<u64> {
        if p.is_false() {
            return self.entries.keys().copied().collect();
        }
        let mut ids: Vec<u64> = match self.config.backend {
            Backend::List => self
                .entries
                .values()
                .filter(|e| p.contained_in(&e.interval))
                .map(|e| e.id)
                .collect(),
            Backend::Spatial => {
                let mut ids = self.tree.range_search(&query_to_bounds(p.dims()));
                ids.extend(
                    self.side
                        .iter()
                        .filter(|id| p.contained_in(&self.entries[id].interval))
                        .copied(),
                );
                ids
            }
        };
        ids.sort_unstable();
        ids
    }

    /// The smallest coverage derivable from a containing entry, if any.
    pub fn get_min_coverage(&self, p: &IntervalPredicate, store: &ObjectStore) -> Option<CoverageSet> {
        self.lookup(p, store).map(|(_, c)| c)
    }

    /// Like [`Self::get_min_coverage`], also naming the entry used.
    pub fn lookup(&self, p: &IntervalPredicate, store: &ObjectStore) -> Option<(u64, CoverageSet)> {
        let mut cands: Vec<&CacheEntry> = self.candidates(p).iter().map(|id| &self.entries[id]).collect();
        cands.sort_by_key(|e| (e.coverage.len(), e.id));
        let mut newer_by_ts: HashMap<u64, Vec<String>> = HashMap::new();
        let mut best: Option<(u64, CoverageSet)> = None;
        for e in cands {
            if best.as_ref().is_some_and(|(_, b)| e.coverage.len() >= b.len()) {
                // sorted by size: later entries cannot be smaller
                break;
            }
            let newer = newer_by_ts
                .entry(e.ts)
                .or_insert_with(|| store.files_created_after(&self.data_prefix, e.ts));
            let mut cov = e.coverage.clone();
            cov.extend(newer.iter().cloned());
            if best.as_ref().is_none_or(|(_, b)| cov.len() < b.len()) {
                best = Some((e.id, cov));
            }
        }
        best
    }

    /// Drops `file_key` from every entry's coverage.
    pub fn on_delete(&mut self, file_key: &str) {
        if self.config.file_map {
            if let Some(ids) = self.files.remove(file_key) {
                for id in ids {
                    if let Some(e) = self.entries.get_mut(&id) {
                        e.coverage.remove(file_key);
                    }
                }
            }
        } else {
            for e in self.entries.values_mut() {
                e.coverage.remove(file_key);
            }
        }
    }

    /// One TSV row per entry: id, interval, comma-joined coverage, tick.
    pub fn dump(&self) -> String {
        let mut out = String::from("id\tinterval\tcoverage\tts\n");
        for e in self.entries.values() {
            let cov: Vec<&str> = e.coverage.iter().map(String::as_str).collect();
            let _ = writeln!(out, "{}\t{}\t{}\t{}", e.id, e.interval, cov.join(","), e.ts);
        }
        out
    }
}
