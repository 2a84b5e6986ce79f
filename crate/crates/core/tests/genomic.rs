use std::collections::BTreeMap;

use lakecover::error::Error;
use lakecover::genomic::{
    aggregate, bucket_of, parse_raw, parse_variants, partition_variants, query_range, range_coverage, Chrom,
    LayoutConfig, Manifest, RawCall,
};
use lakecover::par::Parallelism;
use lakecover::store::ObjectStore;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CHROMS: [&str; 5] = ["1", "2", "10", "X", "Y"];

fn random_calls(seed: u64, n: usize, max_pos: u64) -> Vec<RawCall> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bases = ["A", "C", "G", "T", "AT", "GGC"];
    (0..n)
        .map(|_| RawCall {
            chrom: Chrom::new(CHROMS[rng.random_range(0..CHROMS.len())]).unwrap(),
            pos: rng.random_range(1..=max_pos),
            reference: bases[rng.random_range(0..2)].to_string(),
            alt: bases[rng.random_range(2..bases.len())].to_string(),
            sample_id: rng.random_range(0..50),
        })
        .collect()
}

fn to_text(calls: &[RawCall]) -> String {
    calls
        .iter()
        .map(|c| format!("{}\t{}\t{}\t{}\t{}\n", c.chrom, c.pos, c.reference, c.alt, c.sample_id))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn region_queries_match_a_direct_filter(seed in any::<u64>(), p in 1u64..5_000) {
        let calls = random_calls(seed, 2_000, 50_000);
        let store = ObjectStore::new();
        let cfg = LayoutConfig::new(p, "v").unwrap();
        let manifest = partition_variants(&calls, &cfg, &store, Parallelism::Parallel).unwrap();
        let all = aggregate(&calls);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        for _ in 0..20 {
            let chrom = Chrom::new(CHROMS[rng.random_range(0..CHROMS.len())]).unwrap();
            let from = rng.random_range(0..50_000);
            let to = from + rng.random_range(0..=p.min(10_000));
            let want: Vec<_> = all.iter().filter(|v| v.chrom == chrom && v.pos >= from && v.pos <= to).cloned().collect();
            store.reset_reads();
            let got = query_range(&manifest, &chrom, from, to, &store).unwrap();
            prop_assert_eq!(&got, &want);
            let files = range_coverage(&manifest, &chrom, from, to).unwrap();
            prop_assert_eq!(store.reads() as usize, files.len());
            if to - from < p {
                prop_assert!(files.len() <= 2);
            }
        }
    }
}

#[test]
fn aggregation_merges_samples_per_variant() {
    let text = "1\t100\tA\tG\t7\n1\t100\tA\tG\t3\n1\t100\tA\tG\t7\n1\t100\tA\tT\t1\nX\t5\tC\tT\t2\n2\t9\tC\tT\t2\n";
    let agg = aggregate(&parse_raw(text).unwrap());
    let rows: Vec<(String, u64, String, Vec<u64>)> =
        agg.iter().map(|v| (v.chrom.to_string(), v.pos, v.alt.clone(), v.ids.clone())).collect();
    assert_eq!(
        rows,
        vec![
            ("1".into(), 100, "G".into(), vec![3, 7]),
            ("1".into(), 100, "T".into(), vec![1]),
            ("2".into(), 9, "T".into(), vec![2]),
            ("X".into(), 5, "T".into(), vec![2]),
        ]
    );
}

#[test]
fn layout_is_idempotent_and_policy_independent() {
    let calls = random_calls(7, 20_000, 2_000_000);
    let cfg = LayoutConfig::new(100_000, "variants").unwrap();
    let dump = |p: Parallelism| {
        let store = ObjectStore::new();
        partition_variants(&calls, &cfg, &store, p).unwrap();
        partition_variants(&calls, &cfg, &store, p).unwrap();
        store
            .list("variants/")
            .into_iter()
            .map(|k| (k.clone(), store.get(&k).unwrap().to_vec()))
            .collect::<BTreeMap<_, _>>()
    };
    let seq = dump(Parallelism::Sequential);
    assert_eq!(seq, dump(Parallelism::Parallel));

    // one file per populated (chromosome, bucket), rows sorted by position
    let store = ObjectStore::new();
    let m = partition_variants(&calls, &cfg, &store, Parallelism::Parallel).unwrap();
    assert_eq!(Manifest::load(&store, "variants").unwrap(), m);
    let total: usize = m.files.values().map(|(_, n)| n).sum();
    assert_eq!(total, aggregate(&calls).len());
    for ((chrom, bucket), (key, rows)) in &m.files {
        let vs = parse_variants(std::str::from_utf8(&store.get(key).unwrap()).unwrap()).unwrap();
        assert_eq!(vs.len(), *rows);
        assert!(vs.iter().all(|v| &v.chrom == chrom && bucket_of(v.pos, 100_000) == *bucket));
        assert!(vs.windows(2).all(|w| w[0].pos <= w[1].pos));
    }
}

#[test]
fn malformed_input_is_rejected_with_a_line() {
    for (text, line) in [
        ("1\t5\tA\tG\t1\nchr1\t5\tA\tG\t1\n", 2),
        ("1\tfive\tA\tG\t1\n", 1),
        ("1\t5\tA\tN\t1\n", 1),
        ("1\t5\tA\tG\n", 1),
        ("1\t5\tA\tG\t1\textra\n", 1),
        ("# header\n\n23\t5\tA\tG\t1\n", 3),
        ("1\t5\tA\tG\tx\n", 1),
    ] {
        match parse_raw(text) {
            Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
            other => panic!("{text:?}: {other:?}"),
        }
    }
    assert!(Chrom::new("0").is_err());
    assert!(Chrom::new("01").is_err());
    assert!(Chrom::new("22").is_ok());
    assert!(LayoutConfig::new(0, "v").is_err());
    let m = Manifest::decode("v", b"p\t10\n1\t0\tv/1/0\t3\n").unwrap();
    assert!(range_coverage(&m, &Chrom::new("1").unwrap(), 9, 3).is_err());
    assert!(Manifest::decode("v", b"1\t0\tv/1/0\t3\n").is_err());
}

#[test]
fn raw_text_round_trips() {
    let calls = random_calls(3, 500, 10_000);
    assert_eq!(parse_raw(&to_text(&calls)).unwrap(), calls);
}
