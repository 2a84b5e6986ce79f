//! Chromosome/position-bucket layout for variant data.
//!
//! Raw calls `(chrom, pos, ref, alt, sample_id)` are grouped per variant
//! and written as one file per `(chrom, ⌊pos/p⌋)` under
//! `<root>/<chrom>/<bucket>`. A region query `(chrom, from, to)` then reads
//! only the buckets `⌊from/p⌋..=⌊to/p⌋`, which is at most two files when
//! the region is no wider than `p`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::par::{self, Parallelism};
use crate::store::ObjectStore;

pub const DEFAULT_BUCKET_WIDTH: u64 = 100_000;
pub const DEFAULT_ROOT: &str = "variants";

/// `⌊pos / p⌋`.
pub fn bucket_of(pos: u64, p: u64) -> u64 {
    pos / p
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Chrom(String);

impl Chrom {
    pub fn new(s: &str) -> Result<Self> {
        let ok = matches!(s, "X" | "Y") || s.parse::<u8>().is_ok_and(|n| (1..=22).contains(&n)) && !s.starts_with('0');
        if !ok {
            return Err(Error::InvalidValue(format!("unknown chromosome `{s}`")));
        }
        Ok(Chrom(s.to_string()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// 1..22, then X, then Y.
    fn rank(&self) -> u8 {
        match self.0.as_str() {
            "X" => 23,
            "Y" => 24,
            n => n.parse().unwrap_or(0),
        }
    }
}

impl std::fmt::Display for Chrom {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

fn check_bases(s: &str) -> Result<()> {
    if s.is_empty() || !s.bytes().all(|b| matches!(b, b'G' | b'A' | b'C' | b'T')) {
        return Err(Error::InvalidValue(format!("`{s}` is not a G/A/C/T sequence")));
    }
    Ok(())
}

/// One sample's call.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct RawCall {
    pub chrom: Chrom,
    pub pos: u64,
    pub reference: String,
    pub alt: String,
    pub sample_id: u64,
}

/// A variant with every sample that carries it.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct VariantRecord {
    pub chrom: Chrom,
    pub pos: u64,
    pub reference: String,
    pub alt: String,
    pub ids: Vec<u64>,
}

impl VariantRecord {
    fn write_row(&self, out: &mut String) {
        let ids: Vec<String> = self.ids.iter().map(u64::to_string).collect();
        let _ = writeln!(out, "{}\t{}\t{}\t{}\t{}", self.chrom, self.pos, self.reference, self.alt, ids.join(","));
    }
}

fn field<'a>(it: &mut impl Iterator<Item = &'a str>, line: usize, what: &str) -> Result<&'a str> {
    it.next().ok_or_else(|| Error::parse(line, format!("missing {what}")))
}

fn parse_pos(s: &str, line: usize) -> Result<u64> {
    s.parse()
        .map_err(|_| Error::parse(line, format!("bad position `{s}`")))
}

/// Parses raw TSV `chrom\tpos\tref\talt\tsample_id`. Blank lines and lines
/// starting with `#` are skipped.
pub fn parse_raw(text: &str) -> Result<Vec<RawCall>> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let ln = n + 1;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let mut it = line.split('\t');
        let chrom = Chrom::new(field(&mut it, ln, "chrom")?).map_err(|e| Error::parse(ln, e.to_string()))?;
        let pos = parse_pos(field(&mut it, ln, "pos")?, ln)?;
        let reference = field(&mut it, ln, "ref")?.to_string();
        let alt = field(&mut it, ln, "alt")?.to_string();
        let sid = field(&mut it, ln, "sample_id")?;
        if it.next().is_some() {
            return Err(Error::parse(ln, "too many fields"));
        }
        check_bases(&reference).map_err(|e| Error::parse(ln, e.to_string()))?;
        check_bases(&alt).map_err(|e| Error::parse(ln, e.to_string()))?;
        let sample_id = sid
            .parse()
            .map_err(|_| Error::parse(ln, format!("bad sample id `{sid}`")))?;
        out.push(RawCall {
            chrom,
            pos,
            reference,
            alt,
            sample_id,
        });
    }
    Ok(out)
}

/// Parses a variant file body (`chrom\tpos\tref\talt\tids`).
pub fn parse_variants(text: &str) -> Result<Vec<VariantRecord>> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let ln = n + 1;
        let mut it = line.split('\t');
        let chrom = Chrom::new(field(&mut it, ln, "chrom")?).map_err(|e| Error::parse(ln, e.to_string()))?;
        let pos = parse_pos(field(&mut it, ln, "pos")?, ln)?;
        let reference = field(&mut it, ln, "ref")?.to_string();
        let alt = field(&mut it, ln, "alt")?.to_string();
        let ids = field(&mut it, ln, "ids")?
            .split(',')
            .map(|s| s.parse().map_err(|_| Error::parse(ln, format!("bad id `{s}`"))))
            .collect::<Result<Vec<u64>>>()?;
        out.push(VariantRecord {
            chrom,
            pos,
            reference,
            alt,
            ids,
        });
    }
    Ok(out)
}

/// Groups calls by `(chrom, pos, ref, alt)`; ids sorted and deduplicated.
pub fn aggregate(raw: &[RawCall]) -> Vec<VariantRecord> {
    let mut groups: BTreeMap<(u8, &Chrom, u64, &str, &str), BTreeSet<u64>> = BTreeMap::new();
    for c in raw {
        groups
            .entry((c.chrom.rank(), &c.chrom, c.pos, &c.reference, &c.alt))
            .or_default()
            .insert(c.sample_id);
    }
    groups
        .into_iter()
        .map(|((_, chrom, pos, r, a), ids)| VariantRecord {
            chrom: chrom.clone(),
            pos,
            reference: r.to_string(),
            alt: a.to_string(),
            ids: ids.into_iter().collect(),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayoutConfig {
    /// Bucket width.
    pub p: u64,
    /// Key prefix; one per reference genome.
    pub root: String,
}

impl Default for LayoutConfig {
    fn default() -> Self {
        LayoutConfig {
            p: DEFAULT_BUCKET_WIDTH,
            root: DEFAULT_ROOT.to_string(),
        }
    }
}

impl LayoutConfig {
    pub fn new(p: u64, root: impl Into<String>) -> Result<Self> {
        if p == 0 {
            return Err(Error::Config("bucket width must be at least 1".into()));
        }
        Ok(LayoutConfig { p, root: root.into() })
    }

    pub fn file_key(&self, chrom: &Chrom, bucket: u64) -> String {
        format!("{}/{}/{}", self.root, chrom, bucket)
    }

    pub fn manifest_key(&self) -> String {
        format!("{}/_manifest", self.root)
    }
}

/// Existing bucket files: `(chrom, bucket) → (key, rows)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Manifest {
    pub config: LayoutConfig,
    pub files: BTreeMap<(Chrom, u64), (String, usize)>,
}

impl Manifest {
    pub fn is_empty(&self) -> bool {
        self.files.is_empty()
    }

    pub fn len(&self) -> usize {
        self.files.len()
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = format!("p\t{}\n", self.config.p);
        for ((chrom, bucket), (key, rows)) in &self.files {
            let _ = writeln!(out, "{chrom}\t{bucket}\t{key}\t{rows}");
        }
        out.into_bytes()
    }

    pub fn decode(root: &str, bytes: &[u8]) -> Result<Self> {
        let text = std::str::from_utf8(bytes).map_err(|e| Error::parse(0, format!("manifest not UTF-8: {e}")))?;
        let mut lines = text.lines();
        let p = lines
            .next()
            .and_then(|l| l.strip_prefix("p\t"))
            .and_then(|p| p.parse().ok())
            .ok_or_else(|| Error::parse(1, "manifest must start with `p<TAB>width`"))?;
        let config = LayoutConfig::new(p, root)?;
        let mut files = BTreeMap::new();
        for (n, line) in lines.enumerate() {
            let ln = n + 2;
            let f: Vec<&str> = line.split('\t').collect();
            let [chrom, bucket, key, rows] = f[..] else {
                return Err(Error::parse(ln, format!("bad manifest row `{line}`")));
            };
            let chrom = Chrom::new(chrom).map_err(|e| Error::parse(ln, e.to_string()))?;
            let bucket = bucket.parse().map_err(|_| Error::parse(ln, "bad bucket"))?;
            let rows = rows.parse().map_err(|_| Error::parse(ln, "bad row count"))?;
            files.insert((chrom, bucket), (key.to_string(), rows));
        }
        Ok(Manifest { config, files })
    }

    pub fn load(store: &ObjectStore, root: &str) -> Result<Self> {
        let cfg = LayoutConfig::new(1, root)?;
        let bytes = store.get(&cfg.manifest_key())?;
        Self::decode(root, &bytes)
    }
}

/// Aggregates `raw` and writes the bucket files and the manifest.
/// Output is byte-identical for identical input.
pub fn partition_variants(raw: &[RawCall], config: &LayoutConfig, store: &ObjectStore, p: Parallelism) -> Result<Manifest> {
    let mut by_chrom: BTreeMap<(u8, Chrom), Vec<RawCall>> = BTreeMap::new();
    for c in raw {
        by_chrom.entry((c.chrom.rank(), c.chrom.clone())).or_default().push(c.clone());
    }
    let groups: Vec<Vec<RawCall>> = by_chrom.into_values().collect();
    let encoded: Vec<Vec<(Chrom, u64, String, usize)>> = par::map(p, &groups, |calls| {
        let mut buckets: BTreeMap<u64, (String, usize)> = BTreeMap::new();
        for v in aggregate(calls) {
            let slot = buckets.entry(bucket_of(v.pos, config.p)).or_default();
            v.write_row(&mut slot.0);
            slot.1 += 1;
        }
        let chrom = calls[0].chrom.clone();
        buckets
            .into_iter()
            .map(|(b, (body, rows))| (chrom.clone(), b, body, rows))
            .collect()
    });
    let mut manifest = Manifest {
        config: config.clone(),
        files: BTreeMap::new(),
    };
    for (chrom, bucket, body, rows) in encoded.into_iter().flatten() {
        let key = config.file_key(&chrom, bucket);
        store.put(&key, body.into_bytes())?;
        manifest.files.insert((chrom, bucket), (key, rows));
    }
    store.put(&config.manifest_key(), manifest.encode())?;
    Ok(manifest)
}

/// Keys of the existing bucket files intersecting `[from, to]`.
pub fn range_coverage(manifest: &Manifest, chrom: &Chrom, from: u64, to: u64) -> Result<Vec<String>> {
    if from > to {
        return Err(Error::InvalidValue(format!("empty region {from}..{to}")));
    }
    let p = manifest.config.p;
    let lo = (chrom.clone(), bucket_of(from, p));
    let hi = (chrom.clone(), bucket_of(to, p));
    Ok(manifest.files.range(lo..=hi).map(|(_, (k, _))| k.clone()).collect())
}

/// Variants of `chrom` with `from <= pos <= to`, reading only the covering
/// bucket files.
pub fn query_range(manifest: &Manifest, chrom: &Chrom, from: u64, to: u64, store: &ObjectStore) -> Result<Vec<VariantRecord>> {
    let mut out = Vec::new();
    for key in range_coverage(manifest, chrom, from, to)? {
        let bytes = store.get(&key)?;
        let text = std::str::from_utf8(&bytes).map_err(|e| Error::parse(0, format!("{key} not UTF-8: {e}")))?;
        out.extend(
            parse_variants(text)?
                .into_iter()
                .filter(|v| v.pos >= from && v.pos <= to),
        );
    }
    Ok(out)
}
