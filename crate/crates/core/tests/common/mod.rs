#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use lakecover::estimator::{BqcppInput, Plan};
use lakecover::index::{build_index_chunked, Chunking, RootIndex};
use lakecover::model::{
    sample, write_lake, Clause, CmpOp, CnfPredicate, Lake, LakeFile, TableSchema, Term, Tuple, Value, ValueKind,
};
use lakecover::par::Parallelism;
use lakecover::planner::SetSemigroup;
use lakecover::store::ObjectStore;
use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn files(keys: &[&str]) -> BTreeSet<String> {
    keys.iter().map(|k| k.to_string()).collect()
}

/// The three-clause estimate table with explicit file sets.
pub fn estimate_table() -> (BqcppInput<BTreeSet<String>>, SetSemigroup<String>) {
    let plans = vec![
        Plan { cost: 5.0, result: files(&["file170", "file051"]) },
        Plan { cost: 1.0, result: files(&["file051", "file033", "file302", "file048"]) },
        Plan { cost: 2.0, result: files(&["file201", "file170", "file051", "file079"]) },
    ];
    let universe: BTreeSet<String> = plans.iter().flat_map(|p| p.result.iter().cloned()).collect();
    let n = universe.len() as u64;
    (BqcppInput::single(plans, n, n), SetSemigroup { universe })
}

/// The metrics lake written to a fresh store, indexed on `val` (4 + 5
/// entries) and `date` (5 + 4 entries).
pub fn sample_indexed() -> (ObjectStore, Lake, RootIndex) {
    let store = ObjectStore::new();
    let mut lake = sample::lake();
    write_lake(&mut lake, &store).unwrap();
    let root = build_index_chunked(
        &lake,
        &[("val", Chunking::Sizes(vec![4, 5])), ("date", Chunking::Sizes(vec![5, 4]))],
        &store,
        Parallelism::Sequential,
    )
    .unwrap();
    (store, lake, root)
}

/// Index-file key → short display name: `index<c><f>` where `c` is the
/// 1-based position of the column in `order` and `f` the file number.
pub fn index_names(root: &RootIndex, order: &[&str]) -> BTreeMap<String, String> {
    let mut out = BTreeMap::new();
    for (ci, col) in order.iter().enumerate() {
        for (fi, e) in root.entries_for(col).enumerate() {
            out.insert(e.file.clone(), format!("index{}{}", ci + 1, fi + 1));
        }
    }
    out
}

/// `data/metrics/file170` → `170`.
pub fn short(key: &str) -> String {
    key.rsplit('/').next().unwrap().trim_start_matches("file").to_string()
}

pub fn date(s: &str) -> Value {
    Value::parse(ValueKind::Date, s).unwrap()
}

pub fn text(s: &str) -> Value {
    Value::text(s).unwrap()
}

// ---- random lakes and predicates ----

const KINDS: [ValueKind; 4] = [ValueKind::Int, ValueKind::Float, ValueKind::Text, ValueKind::Date];
const WORDS: [&str; 6] = ["ant", "bee", "cat", "dog", "eel", "fox"];

pub fn random_value(rng: &mut ChaCha8Rng, kind: ValueKind, domain: i64) -> Value {
    match kind {
        ValueKind::Int => Value::Int(rng.random_range(0..domain)),
        ValueKind::Float => Value::float(rng.random_range(0..domain) as f64 / 4.0).unwrap(),
        ValueKind::Text => Value::text(WORDS[rng.random_range(0..WORDS.len().min(domain as usize).max(1))]).unwrap(),
        ValueKind::Date => Value::Date(18_000 + rng.random_range(0..domain) as i32),
    }
}

pub struct RandomLake {
    pub lake: Lake,
    pub domain: i64,
}

/// Up to `max_files` files, `max_rows` rows and `max_cols` columns of mixed
/// kinds over small domains, so predicates hit and miss.
pub fn random_lake(rng: &mut ChaCha8Rng, table: &str, max_files: usize, max_rows: usize, max_cols: usize) -> RandomLake {
    let cols = rng.random_range(1..=max_cols);
    let names: Vec<String> = (0..cols).map(|i| format!("k{i}")).collect();
    let kinds: Vec<ValueKind> = (0..cols).map(|_| *KINDS.choose(rng).unwrap()).collect();
    let schema = TableSchema::from_pairs(names.iter().map(String::as_str).zip(kinds.iter().copied())).unwrap();
    let nfiles = rng.random_range(1..=max_files);
    let rows = rng.random_range(nfiles..=max_rows.max(nfiles));
    let domain = rng.random_range(2..=30);
    let mut per_file: Vec<Vec<Tuple>> = vec![Vec::new(); nfiles];
    for r in 0..rows {
        let f = if r < nfiles { r } else { rng.random_range(0..nfiles) };
        per_file[f].push(Tuple::new(kinds.iter().map(|k| random_value(rng, *k, domain)).collect()));
    }
    let files = per_file
        .into_iter()
        .enumerate()
        .map(|(i, t)| LakeFile::new(lakecover::model::data_file_key(table, i), t))
        .collect();
    RandomLake {
        lake: Lake::new(table, schema, files).unwrap(),
        domain,
    }
}

fn random_term(rng: &mut ChaCha8Rng, schema: &TableSchema, domain: i64, allow_cols: bool) -> Term {
    let cols = schema.columns();
    let c = &cols[rng.random_range(0..cols.len())];
    let op = CmpOp::ALL[rng.random_range(0..CmpOp::ALL.len())];
    if allow_cols && rng.random_bool(0.15) {
        let same: Vec<_> = cols.iter().filter(|o| o.kind == c.kind && o.name != c.name).collect();
        if let Some(o) = same.choose(rng) {
            return Term::columns(c.name.clone(), op, o.name.clone());
        }
    }
    Term::value(c.name.clone(), op, random_value(rng, c.kind, domain))
}

/// Random CNF with up to `max_clauses` clauses of up to 3 terms.
pub fn random_cnf(rng: &mut ChaCha8Rng, schema: &TableSchema, domain: i64, max_clauses: usize, allow_cols: bool) -> CnfPredicate {
    let n = rng.random_range(0..=max_clauses);
    let clauses = (0..n)
        .map(|_| {
            let k = rng.random_range(1..=3);
            Clause::new((0..k).map(|_| random_term(rng, schema, domain, allow_cols)).collect()).unwrap()
        })
        .collect();
    CnfPredicate::new(clauses)
}

/// Random conjunction of `<column op value>` terms without `!=`.
pub fn random_conjunction(rng: &mut ChaCha8Rng, schema: &TableSchema, domain: i64, max_terms: usize) -> CnfPredicate {
    let n = rng.random_range(0..=max_terms);
    let ops = [CmpOp::Eq, CmpOp::Lt, CmpOp::Le, CmpOp::Gt, CmpOp::Ge];
    CnfPredicate::conjunction((0..n).map(|_| {
        let cols = schema.columns();
        let c = &cols[rng.random_range(0..cols.len())];
        Term::value(c.name.clone(), *ops.choose(rng).unwrap(), random_value(rng, c.kind, domain))
    }))
}

/// Smallest number of sets whose union is `universe`, by exhaustive search.
pub fn min_set_cover(universe: &BTreeSet<u32>, sets: &[BTreeSet<u32>]) -> usize {
    let mut best = usize::MAX;
    for mask in 0u32..(1 << sets.len()) {
        let k = mask.count_ones() as usize;
        if k >= best {
            continue;
        }
        let mut u = BTreeSet::new();
        for (i, s) in sets.iter().enumerate() {
            if mask & (1 << i) != 0 {
                u.extend(s.iter().copied());
            }
        }
        if &u == universe {
            best = k;
        }
    }
    best
}
