//! In-memory object store with read accounting.
//!
//! Every `get` counts as one remote read and optionally sleeps for a
//! configured latency. Listing and timestamp lookups are metadata
//! operations and never touch the read counter. Each `put` stamps the
//! object with a fresh logical tick from a monotonically increasing clock.
//!
//! A store can mirror its objects into a directory (key `a/b/c` maps to
//! `<root>/a/b/c`) so CLI invocations can share state. Ticks survive
//! restarts through an append-only `_store.log` under the root.

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, RwLock};
use std::time::Duration;

use crate::error::{Error, Result};

const LOG_FILE: &str = "_store.log";

#[derive(Debug, Clone)]
struct StoredObject {
    bytes: Arc<[u8]>,
    created_at: u64,
}

#[derive(Debug)]
struct DirBacking {
    root: PathBuf,
    log: Mutex<File>,
}

#[derive(Debug, Default)]
struct State {
    objects: BTreeMap<String, StoredObject>,
    // tick -> key, for cheap "created after" lookups
    by_tick: BTreeMap<u64, String>,
    tick: u64,
}

impl State {
    fn insert(&mut self, key: String, obj: StoredObject) {
        self.by_tick.insert(obj.created_at, key.clone());
        if let Some(old) = self.objects.insert(key, obj) {
            self.by_tick.remove(&old.created_at);
        }
    }

    fn remove(&mut self, key: &str) -> bool {
        match self.objects.remove(key) {
            Some(old) => {
                self.by_tick.remove(&old.created_at);
                true
            }
            None => false,
        }
    }
}

#[derive(Debug, Default)]
pub struct ObjectStore {
    state: RwLock<State>,
    reads: AtomicU64,
    bytes_read: AtomicU64,
    latency_us: AtomicU64,
    backing: Option<DirBacking>,
}

impl ObjectStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_latency(latency: Duration) -> Self {
        let s = Self::new();
        s.set_latency(latency);
        s
    }

    /// Opens (or creates) a directory-backed store rooted at `root`.
    pub fn open_dir(root: impl AsRef<Path>) -> Result<Self> {
        let root = root.as_ref().to_path_buf();
        fs::create_dir_all(&root).map_err(|e| Error::io(&root, e))?;
        let log_path = root.join(LOG_FILE);
        let mut state = State::default();
        if log_path.exists() {
            let f = File::open(&log_path).map_err(|e| Error::io(&log_path, e))?;
            let mut ticks: BTreeMap<String, u64> = BTreeMap::new();
            for (n, line) in BufReader::new(f).lines().enumerate() {
                let line = line.map_err(|e| Error::io(&log_path, e))?;
                let mut parts = line.split('\t');
                match (parts.next(), parts.next(), parts.next()) {
                    (Some("put"), Some(key), Some(tick)) => {
                        let tick: u64 = tick.parse().map_err(|_| Error::parse(n + 1, "bad tick in store log"))?;
                        state.tick = state.tick.max(tick);
                        ticks.insert(key.to_string(), tick);
                    }
                    (Some("del"), Some(key), None) => {
                        ticks.remove(key);
                    }
                    _ => return Err(Error::parse(n + 1, format!("bad store log line `{line}`"))),
                }
            }
            for (key, tick) in ticks {
                let path = root.join(&key);
                let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
                state.insert(
                    key,
                    StoredObject {
                        bytes: bytes.into(),
                        created_at: tick,
                    },
                );
            }
        }
        let log = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&log_path)
            .map_err(|e| Error::io(&log_path, e))?;
        Ok(ObjectStore {
            state: RwLock::new(state),
            backing: Some(DirBacking {
                root,
                log: Mutex::new(log),
            }),
            ..Default::default()
        })
    }

    pub fn root(&self) -> Option<&Path> {
        self.backing.as_ref().map(|b| b.root.as_path())
    }

    pub fn set_latency(&self, latency: Duration) {
        self.latency_us.store(latency.as_micros() as u64, Ordering::Relaxed);
    }

    pub fn latency(&self) -> Duration {
        Duration::from_micros(self.latency_us.load(Ordering::Relaxed))
    }

    /// Stores `bytes` under `key` and returns the new tick.
    pub fn put(&self, key: &str, bytes: impl Into<Arc<[u8]>>) -> Result<u64> {
        check_key(key)?;
        let bytes = bytes.into();
        let mut state = self.state.write().expect("store lock poisoned");
        let tick = state.tick + 1;
        if let Some(b) = &self.backing {
            let path = b.root.join(key);
            if let Some(dir) = path.parent() {
                fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
            }
            fs::write(&path, &bytes).map_err(|e| Error::io(&path, e))?;
            let mut log = b.log.lock().expect("store log lock poisoned");
            writeln!(log, "put\t{key}\t{tick}").map_err(|e| Error::io(&b.root, e))?;
        }
        state.tick = tick;
        state.insert(
            key.to_string(),
            StoredObject {
                bytes,
                created_at: tick,
            },
        );
        Ok(tick)
    }

    /// Reads an object. Counts as one remote read.
    pub fn get(&self, key: &str) -> Result<Arc<[u8]>> {
        let bytes = {
            let state = self.state.read().expect("store lock poisoned");
            state
                .objects
                .get(key)
                .map(|o| o.bytes.clone())
                .ok_or_else(|| Error::NotFound(key.to_string()))?
        };
        self.reads.fetch_add(1, Ordering::Relaxed);
        self.bytes_read.fetch_add(bytes.len() as u64, Ordering::Relaxed);
        let latency = self.latency_us.load(Ordering::Relaxed);
        if latency > 0 {
            std::thread::sleep(Duration::from_micros(latency));
        }
        Ok(bytes)
    }

    pub fn delete(&self, key: &str) -> Result<bool> {
        let mut state = self.state.write().expect("store lock poisoned");
        let existed = state.remove(key);
        if existed {
            if let Some(b) = &self.backing {
                let path = b.root.join(key);
                fs::remove_file(&path).map_err(|e| Error::io(&path, e))?;
                let mut log = b.log.lock().expect("store log lock poisoned");
                writeln!(log, "del\t{key}").map_err(|e| Error::io(&b.root, e))?;
            }
        }
        Ok(existed)
    }

    pub fn contains(&self, key: &str) -> bool {
        self.state.read().expect("store lock poisoned").objects.contains_key(key)
    }

    /// Keys under `prefix`, in lexicographic order. Metadata only.
    pub fn list(&self, prefix: &str) -> Vec<String> {
        let state = self.state.read().expect("store lock poisoned");
        state
            .objects
            .range(prefix.to_string()..)
            .take_while(|(k, _)| k.starts_with(prefix))
            .map(|(k, _)| k.clone())
            .collect()
    }

    /// Keys under `prefix` created strictly after `ts`. Metadata only.
    pub fn files_created_after(&self, prefix: &str, ts: u64) -> Vec<String> {
        let state = self.state.read().expect("store lock poisoned");
        let mut keys: Vec<String> = state
            .by_tick
            .range(ts.saturating_add(1)..)
            .filter(|(_, k)| k.starts_with(prefix))
            .map(|(_, k)| k.clone())
            .collect();
        keys.sort_unstable();
        keys
    }

    pub fn created_at(&self, key: &str) -> Option<u64> {
        self.state
            .read()
            .expect("store lock poisoned")
            .objects
            .get(key)
            .map(|o| o.created_at)
    }

    /// The latest tick handed out by `put` (0 for a fresh store).
    pub fn current_tick(&self) -> u64 {
        self.state.read().expect("store lock poisoned").tick
    }

    pub fn reads(&self) -> u64 {
        self.reads.load(Ordering::Relaxed)
    }

    pub fn bytes_read(&self) -> u64 {
        self.bytes_read.load(Ordering::Relaxed)
    }

    pub fn reset_reads(&self) {
        self.reads.store(0, Ordering::Relaxed);
        self.bytes_read.store(0, Ordering::Relaxed);
    }

    pub fn len(&self) -> usize {
        self.state.read().expect("store lock poisoned").objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn check_key(key: &str) -> Result<()> {
    if key.is_empty() {
        return Err(Error::InvalidValue("object keys must be non-empty".into()));
    }
    if key.starts_with('/') || key.split('/').any(|seg| seg.is_empty() || seg == "." || seg == "..") || key == LOG_FILE {
        return Err(Error::InvalidValue(format!("invalid object key `{key}`")));
    }
    Ok(())
}
