//! Per-clause cost and result-size estimates derived from the root index.
//!
//! A clause's cost is the number of index files its terms must read, which
//! the root index gives exactly. Its result is an estimated record count:
//! equality terms use `cnt / cntd` of every candidate index file, range terms
//! assume values are spread uniformly over `[min, max]`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::index::{prune_index_files, RootIndex, RootIndexEntry};
use crate::model::{Clause, CmpOp, Operand, Query, Term, Value};
use crate::par::{self, Parallelism};

/// Estimated number of matching records, or "every record".
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RecordEstimate {
    All,
    Count(f64),
}

/// One coverage plan for a clause: what it costs and what it yields.
#[derive(Debug, Clone, PartialEq)]
pub struct Plan<R> {
    /// Index files to read; `f64::INFINITY` when the plan is unusable.
    pub cost: f64,
    pub result: R,
}

pub type PlanEstimate = Plan<RecordEstimate>;

impl PlanEstimate {
    pub fn unusable() -> Self {
        Plan {
            cost: f64::INFINITY,
            result: RecordEstimate::All,
        }
    }
}

/// Planner input: candidate plans per clause.
#[derive(Debug, Clone, PartialEq)]
pub struct BqcppInput<R> {
    pub clauses: Vec<Vec<Plan<R>>>,
    pub table_rows: u64,
    pub file_count: u64,
}

impl<R> BqcppInput<R> {
    /// One plan per clause.
    pub fn single(plans: Vec<Plan<R>>, table_rows: u64, file_count: u64) -> Self {
        BqcppInput {
            clauses: plans.into_iter().map(|p| vec![p]).collect(),
            table_rows,
            file_count,
        }
    }

    /// Number of plan subsets with at most one plan per clause.
    pub fn combinations(&self) -> u128 {
        self.clauses
            .iter()
            .try_fold(1u128, |acc, c| acc.checked_mul(c.len() as u128 + 1))
            .unwrap_or(u128::MAX)
    }
}

/// Expected non-empty files after spreading `records` uniformly over
/// `file_count` files.
pub fn records_to_files(records: f64, file_count: u64) -> f64 {
    if records <= 0.0 || file_count == 0 {
        return 0.0;
    }
    let f = file_count as f64;
    f * (1.0 - ((f - 1.0) / f).powf(records))
}

/// Expected size of the intersection of two independent record sets.
pub fn intersect_records(r1: f64, r2: f64, table_rows: u64) -> u64 {
    if table_rows == 0 {
        return 0;
    }
    (r1.max(0.0) * r2.max(0.0) / table_rows as f64).floor() as u64
}

/// Fraction of `[min, max]` whose values satisfy `x op v`, assuming a
/// uniform spread.
fn overlap_fraction(op: CmpOp, e: &RootIndexEntry, v: &Value) -> f64 {
    let all = op.eval(&e.min, v) && op.eval(&e.max, v);
    if all {
        return 1.0;
    }
    let none = !op.eval(&e.min, v) && !op.eval(&e.max, v) && matches!(op, CmpOp::Lt | CmpOp::Le | CmpOp::Gt | CmpOp::Ge);
    if none {
        return 0.0;
    }
    let (Some(lo), Some(hi), Some(x)) = (e.min.as_f64(), e.max.as_f64(), v.as_f64()) else {
        // no arithmetic on text: half the range is as good a guess as any
        return 0.5;
    };
    if hi <= lo {
        return if op.eval(&e.min, v) { 1.0 } else { 0.0 };
    }
    let below = ((x - lo) / (hi - lo)).clamp(0.0, 1.0);
    match op {
        CmpOp::Lt | CmpOp::Le => below,
        CmpOp::Gt | CmpOp::Ge => 1.0 - below,
        CmpOp::Eq | CmpOp::Ne => unreachable!("handled by the caller"),
    }
}

fn term_records(term: &Term, root: &RootIndex) -> f64 {
    match (&term.rhs, term.op) {
        (Operand::Column(other), _) => root.total_count(&term.column).min(root.total_count(other)) as f64,
        (Operand::Value(_), CmpOp::Ne) => root.total_count(&term.column) as f64,
        (Operand::Value(v), CmpOp::Eq) => root
            .entries_for(&term.column)
            .filter(|e| e.min <= *v && *v <= e.max && e.cntd > 0)
            .map(|e| e.cnt as f64 / e.cntd as f64)
            .sum(),
        (Operand::Value(v), op) => root
            .entries_for(&term.column)
            .map(|e| e.cnt as f64 * overlap_fraction(op, e, v))
            .sum(),
    }
}

/// Cost and result estimate of evaluating `clause` through the index.
pub fn estimate_clause(clause: &Clause, root: &RootIndex, table_rows: u64) -> PlanEstimate {
    let indexed = clause
        .terms()
        .iter()
        .all(|t| t.referenced_columns().all(|c| root.is_indexed(c)));
    if !indexed {
        return PlanEstimate::unusable();
    }
    let mut cost = 0usize;
    let mut records = 0.0;
    for term in clause.terms() {
        cost += match prune_index_files(term, root) {
            Ok(files) => files.len(),
            Err(_) => return PlanEstimate::unusable(),
        };
        records += term_records(term, root);
    }
    Plan {
        cost: cost as f64,
        result: RecordEstimate::Count(records.min(table_rows as f64)),
    }
}

/// One plan per clause of `q`.
pub fn build_bqcpp_input(q: &Query, root: &RootIndex, table_rows: u64, file_count: u64) -> BqcppInput<RecordEstimate> {
    let plans = q
        .predicate
        .clauses()
        .iter()
        .map(|c| estimate_clause(c, root, table_rows))
        .collect();
    BqcppInput::single(plans, table_rows, file_count)
}

/// Ordinary least-squares line through `(x, y)` pairs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
}

impl LinearFit {
    pub fn fit(pairs: &[(f64, f64)]) -> Result<Self> {
        if pairs.len() < 2 {
            return Err(Error::DegenerateFit("need at least two pairs".into()));
        }
        let n = pairs.len() as f64;
        let mx = pairs.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pairs.iter().map(|p| p.1).sum::<f64>() / n;
        let sxx: f64 = pairs.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let sxy: f64 = pairs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        if sxx == 0.0 {
            return Err(Error::DegenerateFit("all estimates are equal".into()));
        }
        let slope = sxy / sxx;
        Ok(LinearFit {
            slope,
            intercept: my - slope * mx,
        })
    }

    pub fn predict(&self, x: f64) -> f64 {
        self.slope * x + self.intercept
    }
}

/// Corrects an estimate `x` by regressing actual values on past estimates.
pub fn regression_adjust(pairs: &[(f64, f64)], x: f64) -> Result<f64> {
    LinearFit::fit(pairs).map(|f| f.predict(x))
}

/// Mean number of non-empty bins when `balls` balls land uniformly in
/// `bins` bins, averaged over `trials` seeded trials.
pub fn monte_carlo_occupancy(bins: u64, balls: u64, trials: u64, seed: u64, p: Parallelism) -> f64 {
    if bins == 0 || trials == 0 {
        return 0.0;
    }
    const CHUNKS: u64 = 64;
    let per_chunk = trials.div_ceil(CHUNKS);
    let total = par::map_reduce(
        p,
        CHUNKS,
        0u64,
        |chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(chunk);
            let mut occupied = vec![false; bins as usize];
            let mut sum = 0u64;
            let start = chunk * per_chunk;
            let end = trials.min(start + per_chunk);
            for _ in start..end {
                occupied.fill(false);
                let mut nonempty = 0u64;
                for _ in 0..balls {
                    let b = rng.random_range(0..bins) as usize;
                    if !occupied[b] {
                        occupied[b] = true;
                        nonempty += 1;
                    }
                }
                sum += nonempty;
            }
            sum
        },
        |a, b| a + b,
    );
    total as f64 / trials as f64
}
