//! Balanced coverage-plan selection.
//!
//! A plan picks at most one candidate per clause. Its cost is the sum of the
//! chosen candidates' costs plus the size of the combined result; the empty
//! plan costs the size of the identity, i.e. a full scan.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::estimator::{intersect_records, records_to_files, BqcppInput, Plan, RecordEstimate};
use crate::par::{self, Parallelism};

pub const DEFAULT_COMBINATION_BOUND: u128 = 1 << 20;

/// How candidate results combine and how big a combined result is.
pub trait ResultSemigroup: Sync {
    type R: Clone + Send + Sync;

    fn combine(&self, a: &Self::R, b: &Self::R) -> Self::R;
    fn size(&self, r: &Self::R) -> f64;
    /// The result meaning "every file"; its size is the file count.
    fn identity(&self) -> Self::R;
}

/// Record-count estimates combined under independence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NumericSemigroup {
    pub table_rows: u64,
    pub file_count: u64,
}

impl NumericSemigroup {
    pub fn for_input<R>(input: &BqcppInput<R>) -> Self {
        NumericSemigroup {
            table_rows: input.table_rows,
            file_count: input.file_count,
        }
    }
}

impl ResultSemigroup for NumericSemigroup {
    type R = RecordEstimate;

    fn combine(&self, a: &RecordEstimate, b: &RecordEstimate) -> RecordEstimate {
        match (a, b) {
            (RecordEstimate::All, x) | (x, RecordEstimate::All) => *x,
            (RecordEstimate::Count(x), RecordEstimate::Count(y)) => {
                RecordEstimate::Count(intersect_records(*x, *y, self.table_rows) as f64)
            }
        }
    }

    fn size(&self, r: &RecordEstimate) -> f64 {
        match r {
            RecordEstimate::All => self.file_count as f64,
            RecordEstimate::Count(x) => records_to_files(*x, self.file_count),
        }
    }

    fn identity(&self) -> RecordEstimate {
        RecordEstimate::All
    }
}

/// Explicit sets combined by intersection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetSemigroup<T: Ord> {
    pub universe: BTreeSet<T>,
}

impl<T: Ord + Clone + Send + Sync> ResultSemigroup for SetSemigroup<T> {
    type R = BTreeSet<T>;

    fn combine(&self, a: &BTreeSet<T>, b: &BTreeSet<T>) -> BTreeSet<T> {
        a.intersection(b).cloned().collect()
    }

    fn size(&self, r: &BTreeSet<T>) -> f64 {
        r.len() as f64
    }

    fn identity(&self) -> BTreeSet<T> {
        self.universe.clone()
    }
}

/// Chosen `(clause, plan)` pairs, sorted, at most one per clause.
#[derive(Debug, Clone, PartialEq)]
pub struct CoveragePlan {
    pub chosen: Vec<(usize, usize)>,
    pub total_cost: f64,
}

impl CoveragePlan {
    pub fn is_empty(&self) -> bool {
        self.chosen.is_empty()
    }

    pub fn clauses(&self) -> Vec<usize> {
        self.chosen.iter().map(|c| c.0).collect()
    }
}

fn check_plan<R>(chosen: &[(usize, usize)], input: &BqcppInput<R>) -> Result<()> {
    let mut seen = BTreeSet::new();
    for &(c, p) in chosen {
        if c >= input.clauses.len() || p >= input.clauses[c].len() {
            return Err(Error::Contract(format!("plan ({c}, {p}) does not exist")));
        }
        if !seen.insert(c) {
            return Err(Error::Contract(format!("clause {c} chosen twice")));
        }
    }
    Ok(())
}

fn cost_of<S: ResultSemigroup>(chosen: &[(usize, usize)], input: &BqcppInput<S::R>, sg: &S) -> f64 {
    let mut plan_costs = 0.0;
    let mut acc: Option<S::R> = None;
    for &(c, p) in chosen {
        let plan = &input.clauses[c][p];
        plan_costs += plan.cost;
        acc = Some(match acc {
            None => plan.result.clone(),
            Some(r) => sg.combine(&r, &plan.result),
        });
    }
    plan_costs + sg.size(&acc.unwrap_or_else(|| sg.identity()))
}

/// Estimated cost of running `chosen` and scanning the combined result.
pub fn plan_cost<S: ResultSemigroup>(chosen: &[(usize, usize)], input: &BqcppInput<S::R>, sg: &S) -> Result<f64> {
    check_plan(chosen, input)?;
    let mut sorted = chosen.to_vec();
    sorted.sort_unstable();
    Ok(cost_of(&sorted, input, sg))
}

#[derive(Debug, Clone)]
struct Candidate {
    cost: f64,
    chosen: Vec<(usize, usize)>,
}

impl Candidate {
    // Lower cost, then fewer plans, then lexicographic.
    fn better_than(&self, other: &Candidate) -> bool {
        match self.cost.total_cmp(&other.cost) {
            std::cmp::Ordering::Less => true,
            std::cmp::Ordering::Greater => false,
            std::cmp::Ordering::Equal => {
                (self.chosen.len(), &self.chosen) < (other.chosen.len(), &other.chosen)
            }
        }
    }
}

fn pick(a: Option<Candidate>, b: Option<Candidate>) -> Option<Candidate> {
    match (a, b) {
        (Some(a), Some(b)) => Some(if b.better_than(&a) { b } else { a }),
        (a, b) => a.or(b),
    }
}

/// Exhaustive search over every plan subset.
pub fn solve_optimistic<S: ResultSemigroup>(input: &BqcppInput<S::R>, sg: &S) -> Result<CoveragePlan> {
    solve_optimistic_with(input, sg, DEFAULT_COMBINATION_BOUND, Parallelism::default())
}

pub fn solve_optimistic_with<S: ResultSemigroup>(
    input: &BqcppInput<S::R>,
    sg: &S,
    bound: u128,
    p: Parallelism,
) -> Result<CoveragePlan> {
    let combinations = input.combinations();
    if combinations > bound {
        return Err(Error::TooManyCombinations { combinations, bound });
    }
    let radices: Vec<u64> = input.clauses.iter().map(|c| c.len() as u64 + 1).collect();
    let best = par::map_reduce(
        p,
        combinations as u64,
        None,
        |mut n| {
            let mut chosen = Vec::new();
            for (c, &r) in radices.iter().enumerate() {
                let digit = n % r;
                n /= r;
                if digit > 0 {
                    chosen.push((c, digit as usize - 1));
                }
            }
            Some(Candidate {
                cost: cost_of(&chosen, input, sg),
                chosen,
            })
        },
        pick,
    );
    let best = best.expect("at least the empty plan is enumerated");
    Ok(CoveragePlan {
        chosen: best.chosen,
        total_cost: best.cost,
    })
}

/// One accepted greedy step: the plan added and the cost after adding it.
#[derive(Debug, Clone, PartialEq)]
pub struct GreedyStep {
    pub added: (usize, usize),
    pub cost: f64,
}

/// Repeatedly adds the single plan that lowers the cost the most.
pub fn solve_greedy<S: ResultSemigroup>(input: &BqcppInput<S::R>, sg: &S) -> CoveragePlan {
    solve_greedy_traced(input, sg).0
}

pub fn solve_greedy_traced<S: ResultSemigroup>(input: &BqcppInput<S::R>, sg: &S) -> (CoveragePlan, Vec<GreedyStep>) {
    let mut chosen: Vec<(usize, usize)> = Vec::new();
    let mut used = vec![false; input.clauses.len()];
    let mut current = cost_of(&chosen, input, sg);
    let mut steps = Vec::new();
    while chosen.len() < input.clauses.len() {
        let mut best: Option<((usize, usize), f64)> = None;
        for (c, plans) in input.clauses.iter().enumerate() {
            if used[c] {
                continue;
            }
            for p in 0..plans.len() {
                let mut next = chosen.clone();
                next.push((c, p));
                next.sort_unstable();
                let cost = cost_of(&next, input, sg);
                if best.is_none_or(|(_, b)| cost < b) {
                    best = Some(((c, p), cost));
                }
            }
        }
        match best {
            Some((added, cost)) if cost < current => {
                chosen.push(added);
                chosen.sort_unstable();
                used[added.0] = true;
                current = cost;
                steps.push(GreedyStep { added, cost });
            }
            _ => break,
        }
    }
    (
        CoveragePlan {
            chosen,
            total_cost: current,
        },
        steps,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Execute,
    Fallback,
}

/// Runs the plan iff its cost is at most `k`.
pub fn decide(plan: &CoveragePlan, k: f64) -> Decision {
    if plan.total_cost <= k {
        Decision::Execute
    } else {
        Decision::Fallback
    }
}

/// Encodes a set-cover instance: clause `i` has one plan of cost 0 whose
/// result is `U \ S_i`, so a zero-cost plan is exactly a cover.
pub fn reduce_scp_to_bqcpp<T: Ord + Clone>(
    universe: &BTreeSet<T>,
    sets: &[BTreeSet<T>],
) -> Result<(BqcppInput<BTreeSet<T>>, SetSemigroup<T>)> {
    let union: BTreeSet<T> = sets.iter().flatten().cloned().collect();
    if &union != universe {
        return Err(Error::Contract("the sets do not cover the universe exactly".into()));
    }
    let plans = sets
        .iter()
        .map(|s| Plan {
            cost: 0.0,
            result: universe.difference(s).cloned().collect(),
        })
        .collect();
    let n = universe.len() as u64;
    Ok((
        BqcppInput::single(plans, n, n),
        SetSemigroup {
            universe: universe.clone(),
        },
    ))
}

/// Maps a plan over a reduced instance back to the chosen sets.
pub fn extract_scp_solution<T: Clone>(plan: &CoveragePlan, sets: &[BTreeSet<T>]) -> Vec<BTreeSet<T>> {
    plan.chosen.iter().map(|&(c, _)| sets[c].clone()).collect()
}
