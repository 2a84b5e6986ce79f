//! Seeded lake and workload generators.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Zipf};

use super::config::{BenchConfig, WorkloadKind};
use crate::error::{Error, Result};
use crate::model::{
    data_file_key, write_lake, Clause, CmpOp, CnfPredicate, Lake, LakeFile, Query, TableSchema, Term, Tuple, Value,
    ValueKind,
};
use crate::par::{self, Parallelism};
use crate::store::ObjectStore;

const LAKE_STREAM_BASE: u64 = 1 << 32;
const WORKLOAD_STREAM: u64 = 7;

pub fn bench_schema(cfg: &BenchConfig) -> Result<TableSchema> {
    let names = cfg.column_names();
    TableSchema::from_pairs(names.iter().map(|n| (n.as_str(), ValueKind::Int)))
}

enum ValueSource {
    Uniform(i64),
    Zipf(Zipf<f64>),
}

impl ValueSource {
    fn new(cfg: &BenchConfig) -> Result<Self> {
        if cfg.skew > 0.0 {
            let z = Zipf::new(cfg.value_range as f64, cfg.skew)
                .map_err(|e| Error::Config(format!("zipf parameters: {e}")))?;
            Ok(ValueSource::Zipf(z))
        } else {
            Ok(ValueSource::Uniform(cfg.value_range))
        }
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> i64 {
        match self {
            ValueSource::Uniform(n) => rng.random_range(0..*n),
            ValueSource::Zipf(z) => z.sample(rng) as i64 - 1,
        }
    }
}

/// Random integer table; rows are dealt round-robin so file sizes differ
/// by at most one. Each file draws from its own stream of the seed, so the
/// result does not depend on the parallelism policy.
pub fn generate_lake_in_memory(cfg: &BenchConfig, p: Parallelism) -> Result<Lake> {
    cfg.validate()?;
    let schema = bench_schema(cfg)?;
    let source = ValueSource::new(cfg)?;
    let base = cfg.records / cfg.files;
    let extra = cfg.records % cfg.files;
    let files = par::map_range(p, cfg.files, |i| {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(LAKE_STREAM_BASE + i as u64);
        let rows = base + usize::from(i < extra);
        let tuples = (0..rows)
            .map(|_| Tuple::new((0..cfg.columns).map(|_| Value::Int(source.draw(&mut rng))).collect()))
            .collect();
        LakeFile::new(data_file_key(&cfg.table, i), tuples)
    });
    Lake::new(cfg.table.clone(), schema, files)
}

/// Generates the lake and writes it (schema and data files) to `store`.
pub fn generate_lake(cfg: &BenchConfig, store: &ObjectStore, p: Parallelism) -> Result<Lake> {
    let mut lake = generate_lake_in_memory(cfg, p)?;
    write_lake(&mut lake, store)?;
    Ok(lake)
}

fn random_row<'a>(lake: &'a Lake, rng: &mut ChaCha8Rng) -> &'a Tuple {
    loop {
        let f = &lake.files[rng.random_range(0..lake.files.len())];
        if !f.tuples.is_empty() {
            return &f.tuples[rng.random_range(0..f.tuples.len())];
        }
    }
}

fn col(i: usize) -> String {
    format!("c{i}")
}

fn range_terms(c: &str, lo: i64, hi: i64) -> [Term; 2] {
    [Term::value(c, CmpOp::Ge, lo), Term::value(c, CmpOp::Le, hi)]
}

/// Seeded query workload of `cfg.workload` shape over `lake`.
pub fn generate_workload(cfg: &BenchConfig, lake: &Lake) -> Result<Vec<Query>> {
    cfg.validate()?;
    if lake.row_count() == 0 {
        return Err(Error::Config("cannot draw queries from an empty lake".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(WORKLOAD_STREAM);
    let vr = cfg.value_range;
    let mut out = Vec::with_capacity(cfg.queries);
    for _ in 0..cfg.queries {
        let pred = match cfg.workload {
            WorkloadKind::Point => {
                let row = random_row(lake, &mut rng);
                let cols = sample(&mut rng, cfg.columns, cfg.predicate_columns);
                CnfPredicate::conjunction(cols.iter().map(|c| Term::value(col(c), CmpOp::Eq, row.get(c).clone())))
            }
            WorkloadKind::Cnf => {
                let k = rng.random_range(1..=cfg.predicate_columns);
                let cols = sample(&mut rng, cfg.columns, k);
                let mut clauses = Vec::with_capacity(k);
                for c in cols.iter() {
                    let terms = rng.random_range(1..=2);
                    let mut ts = Vec::with_capacity(terms);
                    for _ in 0..terms {
                        let op = [CmpOp::Eq, CmpOp::Lt, CmpOp::Gt, CmpOp::Le, CmpOp::Ge][rng.random_range(0..5)];
                        let v = match op {
                            CmpOp::Eq => random_row(lake, &mut rng).get(c).clone(),
                            _ => Value::Int(rng.random_range(0..vr)),
                        };
                        ts.push(Term::value(col(c), op, v));
                    }
                    clauses.push(Clause::new(ts)?);
                }
                CnfPredicate::new(clauses)
            }
            WorkloadKind::Range => {
                let k = rng.random_range(1..=cfg.predicate_columns);
                let cols = sample(&mut rng, cfg.columns, k);
                let w = ((cfg.range_width * vr as f64).round() as i64).clamp(1, vr);
                CnfPredicate::conjunction(cols.iter().flat_map(|c| {
                    let lo = rng.random_range(0..=vr - w);
                    range_terms(&col(c), lo, lo + w - 1)
                }))
            }
            WorkloadKind::Anchored => {
                let a = cfg.anchors as i64;
                let w = (vr / a).max(1);
                let bucket = rng.random_range(0..a);
                let center = rng.random_range(0..a) * w + w / 2;
                let half = ((cfg.range_width * vr as f64) / 2.0).round().max(0.0) as i64;
                let cap = if rng.random_bool(0.5) { vr / 2 } else { vr };
                let mut terms = Vec::with_capacity(5);
                terms.push(Term::value("c0", CmpOp::Ge, bucket * w));
                terms.push(Term::value("c0", CmpOp::Lt, (bucket + 1) * w));
                terms.extend(range_terms("c1", center - half, center + half));
                terms.push(Term::value("c2", CmpOp::Lt, cap));
                CnfPredicate::conjunction(terms)
            }
        };
        out.push(Query::new(pred));
    }
    Ok(out)
}

/// Range workloads of growing width: `steps` rungs, doubling from
/// `cfg.range_width` and ending at the full domain.
pub fn generate_ladder(cfg: &BenchConfig, lake: &Lake, steps: usize) -> Result<Vec<(f64, Vec<Query>)>> {
    let mut out = Vec::with_capacity(steps);
    for i in 0..steps {
        let width = if i + 1 == steps {
            1.0
        } else {
            (cfg.range_width * 2f64.powi(i as i32)).min(1.0)
        };
        let rung = BenchConfig {
            workload: WorkloadKind::Range,
            range_width: width,
            ..cfg.clone()
        };
        out.push((width, generate_workload(&rung, lake)?));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> BenchConfig {
        BenchConfig {
            records: 200,
            files: 20,
            queries: 10,
            ..BenchConfig::default()
        }
    }

    #[test]
    fn lake_is_deterministic_and_balanced() {
        let cfg = small();
        let a = generate_lake_in_memory(&cfg, Parallelism::Sequential).unwrap();
        let b = generate_lake_in_memory(&cfg, Parallelism::Parallel).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.row_count(), 200);
        assert!(a.files.iter().all(|f| f.tuples.len() == 10));
    }

    #[test]
    fn skewed_values_stay_in_range() {
        let cfg = BenchConfig {
            skew: 1.2,
            value_range: 50,
            ..small()
        };
        let lake = generate_lake_in_memory(&cfg, Parallelism::Sequential).unwrap();
        for f in &lake.files {
            for t in &f.tuples {
                for v in t.values() {
                    let Value::Int(x) = v else { panic!() };
                    assert!((0..50).contains(x));
                }
            }
        }
    }

    #[test]
    fn workload_shapes() {
        for kind in [WorkloadKind::Point, WorkloadKind::Cnf, WorkloadKind::Range, WorkloadKind::Anchored] {
            let cfg = BenchConfig {
                workload: kind,
                predicate_columns: 2,
                ..small()
            };
            let lake = generate_lake_in_memory(&cfg, Parallelism::Sequential).unwrap();
            let w1 = generate_workload(&cfg, &lake).unwrap();
            let w2 = generate_workload(&cfg, &lake).unwrap();
            assert_eq!(w1, w2);
            assert_eq!(w1.len(), 10);
            for q in &w1 {
                q.predicate.check(&lake.schema).unwrap();
            }
        }
    }
}
