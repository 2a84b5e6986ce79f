mod common;

use std::collections::BTreeSet;

use common::{date, random_cnf, random_lake, sample_indexed, short, RandomLake};
use lakecover::error::Error;
use lakecover::index::{
    append_to_index, build_index, coverage_by_index, prune_index_files, read_column_index, root_key, IndexEntry,
    RootIndex,
};
use lakecover::model::{
    data_file_key, naive_tight_coverage, sample, write_lake, Clause, CmpOp, LakeFile, LakeMeta, Query, RecordId, Term,
    Tuple, Value,
};
use lakecover::par::Parallelism;
use lakecover::store::ObjectStore;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn indexed_random_lake(seed: u64) -> (ObjectStore, lakecover::model::Lake, RootIndex, i64, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let RandomLake { mut lake, domain } = random_lake(&mut rng, "t", 30, 300, 5);
    let store = ObjectStore::new();
    write_lake(&mut lake, &store).unwrap();
    let cols: Vec<String> = lake.schema.columns().iter().map(|c| c.name.clone()).collect();
    let refs: Vec<&str> = cols.iter().map(String::as_str).collect();
    let epf = rng.random_range(1..40);
    let root = build_index(&lake, &refs, epf, &store, Parallelism::Parallel).unwrap();
    (store, lake, root, domain, epf)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn index_holds_every_record_once(seed in any::<u64>()) {
        let (store, lake, root, _, epf) = indexed_random_lake(seed);
        for (pos, col) in lake.schema.columns().iter().enumerate() {
            let mut want: Vec<(Value, RecordId)> = Vec::new();
            for f in &lake.files {
                for (i, t) in f.tuples.iter().enumerate() {
                    want.push((t.get(pos).clone(), RecordId::new(f.key.clone(), i as u32)));
                }
            }
            want.sort();
            let files = read_column_index(&store, &root, &col.name).unwrap();
            let got: Vec<(Value, RecordId)> = files
                .iter()
                .flat_map(|f| f.entries.iter().map(|e| (e.value.clone(), e.record.clone())))
                .collect();
            prop_assert_eq!(got, want);
            prop_assert!(files.iter().all(|f| !f.entries.is_empty() && f.entries.len() <= epf));
        }
    }

    #[test]
    fn root_summaries_are_sound(seed in any::<u64>()) {
        let (store, _, root, _, _) = indexed_random_lake(seed);
        for e in &root.entries {
            let f = read_column_index(&store, &root, &e.col).unwrap().into_iter().find(|f| f.key == e.file).unwrap();
            let values: Vec<&Value> = f.entries.iter().map(|x| &x.value).collect();
            let distinct: BTreeSet<&Value> = values.iter().copied().collect();
            prop_assert_eq!(&e.min, *values.iter().min().unwrap());
            prop_assert_eq!(&e.max, *values.iter().max().unwrap());
            prop_assert_eq!(e.cnt as usize, values.len());
            prop_assert_eq!(e.cntd as usize, distinct.len());
        }
        let meta = LakeMeta { table: "t".into(), schema: store_schema(&store) };
        prop_assert_eq!(RootIndex::load(&store, &meta).unwrap(), root);
    }

    #[test]
    fn index_coverage_is_tight(seed in any::<u64>()) {
        let (store, lake, root, domain, _) = indexed_random_lake(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let meta = lake.meta();
        for _ in 0..8 {
            let q = Query::new(random_cnf(&mut rng, &lake.schema, domain, 3, true));
            let naive = naive_tight_coverage(&q, &meta, &store).unwrap();
            let got = coverage_by_index(q.predicate.clauses(), &root, &store, &lake.file_keys()).unwrap();
            prop_assert_eq!(got, naive, "{}", q.predicate);
        }
    }

    #[test]
    fn reads_equal_pruned_files(seed in any::<u64>()) {
        let (store, lake, root, domain, _) = indexed_random_lake(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xacc);
        for _ in 0..8 {
            let pred = random_cnf(&mut rng, &lake.schema, domain, 3, false);
            let expected: usize = pred
                .clauses()
                .iter()
                .flat_map(|c| c.terms())
                .map(|t| prune_index_files(t, &root).unwrap().len())
                .sum();
            store.reset_reads();
            coverage_by_index(pred.clauses(), &root, &store, &lake.file_keys()).unwrap();
            prop_assert_eq!(store.reads() as usize, expected);
        }
    }
}

fn store_schema(store: &ObjectStore) -> lakecover::model::TableSchema {
    LakeMeta::load(store, "t").unwrap().schema
}

#[test]
fn sample_coverage_with_pruning() {
    let (store, lake, root) = sample_indexed();
    let universe = lake.file_keys();
    let clauses = vec![
        Clause::new(vec![
            Term::value("date", CmpOp::Eq, date("2020-02-20")),
            Term::value("date", CmpOp::Eq, date("2020-03-13")),
        ])
        .unwrap(),
        Clause::single(Term::value("val", CmpOp::Gt, 80)),
    ];
    store.reset_reads();
    let cov = coverage_by_index(&clauses, &root, &store, &universe).unwrap();
    assert_eq!(cov.iter().map(|k| short(k)).collect::<Vec<_>>(), vec!["170"]);
    // one date file per equality, one val file for `> 80`
    assert_eq!(store.reads(), 3);

    let all = coverage_by_index(&[], &root, &store, &universe).unwrap();
    assert_eq!(all.len(), 3);
}

#[test]
fn pruning_rules() {
    let (_, _, root) = sample_indexed();
    let count = |op, v: i64| prune_index_files(&Term::value("val", op, v), &root).unwrap().len();
    // val files are [6, 47] and [58, 92]
    assert_eq!(count(CmpOp::Eq, 47), 1);
    assert_eq!(count(CmpOp::Eq, 50), 0);
    assert_eq!(count(CmpOp::Lt, 58), 1);
    assert_eq!(count(CmpOp::Le, 58), 2);
    assert_eq!(count(CmpOp::Gt, 47), 1);
    assert_eq!(count(CmpOp::Ge, 47), 2);
    assert_eq!(count(CmpOp::Gt, 92), 0);
    assert_eq!(count(CmpOp::Ne, 6), 2);
    assert_eq!(prune_index_files(&Term::columns("val", CmpOp::Lt, "val"), &root).unwrap().len(), 4);
    assert!(matches!(
        prune_index_files(&Term::value("metric", CmpOp::Eq, Value::text("cpu").unwrap()), &root),
        Err(Error::NotIndexed(_))
    ));
}

#[test]
fn root_file_round_trips() {
    let (store, lake, root) = sample_indexed();
    let text = String::from_utf8(store.get(&root_key(sample::TABLE)).unwrap().to_vec()).unwrap();
    assert!(text.starts_with("col\tfile\tmin\tmax\tcnt\tcntd\n"));
    assert_eq!(text.lines().count(), 5);
    assert_eq!(RootIndex::load(&store, &lake.meta()).unwrap(), root);
}

#[test]
fn append_matches_a_rebuild() {
    let (store, lake, root, domain, epf) = indexed_random_lake(99);
    let meta = lake.meta();
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    let cols: Vec<String> = lake.schema.columns().iter().map(|c| c.name.clone()).collect();
    let refs: Vec<&str> = cols.iter().map(String::as_str).collect();
    let kinds: Vec<_> = lake.schema.columns().iter().map(|c| c.kind).collect();
    let new_files: Vec<LakeFile> = (0..5)
        .map(|i| {
            let tuples = (0..rng.random_range(1..20))
                .map(|_| Tuple::new(kinds.iter().map(|k| common::random_value(&mut rng, *k, domain)).collect()))
                .collect();
            LakeFile::new(data_file_key("t", lake.files.len() + i), tuples)
        })
        .collect();
    for f in &new_files {
        store
            .put(&f.key, lakecover::model::encode_tuples(&lake.schema, &f.tuples))
            .unwrap();
    }
    let before: Vec<String> = root.entries.iter().map(|e| e.file.clone()).collect();
    let next = append_to_index(&root, &meta, &new_files, &refs, epf, &store, Parallelism::Sequential).unwrap();
    assert!(before.iter().all(|f| next.entries.iter().any(|e| &e.file == f)));
    assert_eq!(RootIndex::load(&store, &meta).unwrap(), next);

    let universe = meta.file_keys(&store);
    assert_eq!(universe.len(), lake.files.len() + 5);
    for _ in 0..30 {
        let q = Query::new(random_cnf(&mut rng, &lake.schema, domain, 3, true));
        let naive = naive_tight_coverage(&q, &meta, &store).unwrap();
        assert_eq!(coverage_by_index(q.predicate.clauses(), &next, &store, &universe).unwrap(), naive);
    }
    for c in &refs {
        let n: usize = read_column_index(&store, &next, c).unwrap().iter().map(|f| f.entries.len()).sum();
        assert_eq!(n, lake.row_count() + new_files.iter().map(|f| f.tuples.len()).sum::<usize>());
    }
}

#[test]
fn unindexed_columns_are_reported() {
    let (store, lake, root) = sample_indexed();
    let clause = Clause::single(Term::value("metric", CmpOp::Eq, Value::text("cpu").unwrap()));
    assert!(matches!(
        coverage_by_index(&[clause], &root, &store, &lake.file_keys()),
        Err(Error::NotIndexed(c)) if c == "metric"
    ));
}

#[test]
fn index_entries_sort_by_value_then_record() {
    let a = IndexEntry { value: Value::Int(1), record: RecordId::new("b", 0) };
    let b = IndexEntry { value: Value::Int(1), record: RecordId::new("c", 0) };
    let c = IndexEntry { value: Value::Int(2), record: RecordId::new("a", 0) };
    let mut v = vec![c.clone(), b.clone(), a.clone()];
    v.sort();
    assert_eq!(v, vec![a, b, c]);
}
