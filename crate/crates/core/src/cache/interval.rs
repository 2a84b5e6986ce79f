//! Conjunctive predicates as per-column intervals.
//!
//! Each column carries a lower and an upper [`Bound`]. A column the
//! predicate does not mention is unbounded on both sides, which denotes the
//! same set as `[c.min, c.max]` for any data in the lake, now or later.
//! Strict bounds on integers and dates are closed with a unit step, so
//! `x > 5` and `x >= 6` have one representation. Contradictory predicates
//! become the canonical false interval.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Bound;

use crate::error::{Error, Result};
use crate::model::{CmpOp, CnfPredicate, Operand, TableSchema, Value};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IntervalPredicate {
    dims: Vec<(Bound<Value>, Bound<Value>)>,
    is_false: bool,
}

/// Orders lower bounds by the set they start: a smaller lower bound admits more.
fn cmp_lower(a: &Bound<Value>, b: &Bound<Value>) -> Ordering {
    match (a, b) {
        (Bound::Unbounded, Bound::Unbounded) => Ordering::Equal,
        (Bound::Unbounded, _) => Ordering::Less,
        (_, Bound::Unbounded) => Ordering::Greater,
        (Bound::Included(x), Bound::Included(y)) | (Bound::Excluded(x), Bound::Excluded(y)) => x.cmp(y),
        (Bound::Included(x), Bound::Excluded(y)) => x.cmp(y).then(Ordering::Less),
        (Bound::Excluded(x), Bound::Included(y)) => x.cmp(y).then(Ordering::Greater),
    }
}

/// Orders upper bounds: a larger upper bound admits more.
fn cmp_upper(a: &Bound<Value>, b: &Bound<Value>) -> Ordering {
    match (a, b) {
        (Bound::Unbounded, Bound::Unbounded) => Ordering::Equal,
        (Bound::Unbounded, _) => Ordering::Greater,
        (_, Bound::Unbounded) => Ordering::Less,
        (Bound::Included(x), Bound::Included(y)) | (Bound::Excluded(x), Bound::Excluded(y)) => x.cmp(y),
        (Bound::Included(x), Bound::Excluded(y)) => x.cmp(y).then(Ordering::Greater),
        (Bound::Excluded(x), Bound::Included(y)) => x.cmp(y).then(Ordering::Less),
    }
}

fn close_lower(b: Bound<Value>) -> Option<Bound<Value>> {
    match b {
        Bound::Excluded(v) if v.kind().is_discrete() => v.successor().map(Bound::Included),
        b => Some(b),
    }
}

fn close_upper(b: Bound<Value>) -> Option<Bound<Value>> {
    match b {
        Bound::Excluded(v) if v.kind().is_discrete() => v.predecessor().map(Bound::Included),
        b => Some(b),
    }
}

fn is_empty_range(lo: &Bound<Value>, hi: &Bound<Value>) -> bool {
    match (lo, hi) {
        (Bound::Unbounded, _) | (_, Bound::Unbounded) => false,
        (Bound::Included(a), Bound::Included(b)) => a > b,
        (Bound::Included(a), Bound::Excluded(b))
        | (Bound::Excluded(a), Bound::Included(b))
        | (Bound::Excluded(a), Bound::Excluded(b)) => a >= b,
    }
}

impl IntervalPredicate {
    /// The unconstrained interval over `m` columns.
    pub fn full(m: usize) -> Self {
        IntervalPredicate {
            dims: vec![(Bound::Unbounded, Bound::Unbounded); m],
            is_false: false,
        }
    }

    pub fn false_over(m: usize) -> Self {
        IntervalPredicate {
            dims: vec![(Bound::Unbounded, Bound::Unbounded); m],
            is_false: true,
        }
    }

    /// Builds an interval from explicit bounds, canonicalizing them.
    pub fn from_bounds(dims: Vec<(Bound<Value>, Bound<Value>)>) -> Self {
        let m = dims.len();
        let mut out = Vec::with_capacity(m);
        for (lo, hi) in dims {
            match (close_lower(lo), close_upper(hi)) {
                (Some(lo), Some(hi)) if !is_empty_range(&lo, &hi) => out.push((lo, hi)),
                _ => return Self::false_over(m),
            }
        }
        IntervalPredicate {
            dims: out,
            is_false: false,
        }
    }

    pub fn dims(&self) -> &[(Bound<Value>, Bound<Value>)] {
        &self.dims
    }

    pub fn is_false(&self) -> bool {
        self.is_false
    }

    /// True iff no bound is exclusive.
    pub fn is_closed(&self) -> bool {
        self.dims
            .iter()
            .all(|(l, h)| !matches!(l, Bound::Excluded(_)) && !matches!(h, Bound::Excluded(_)))
    }

    /// `self ⊆ other`. The false interval is contained in everything.
    pub fn contained_in(&self, other: &IntervalPredicate) -> bool {
        if self.is_false {
            return true;
        }
        if other.is_false || self.dims.len() != other.dims.len() {
            return false;
        }
        self.dims.iter().zip(&other.dims).all(|((al, ah), (bl, bh))| {
            cmp_lower(bl, al) != Ordering::Greater && cmp_upper(ah, bh) != Ordering::Greater
        })
    }

    /// Product of side lengths, with unbounded ends clipped to `domain`.
    /// Text columns count 0 when pinned to one value and 1 otherwise.
    pub fn volume(&self, domain: &[(Value, Value)]) -> f64 {
        if self.is_false {
            return 0.0;
        }
        let mut v = 1.0;
        for ((lo, hi), (dmin, dmax)) in self.dims.iter().zip(domain) {
            let lo_v = match lo {
                Bound::Included(x) | Bound::Excluded(x) => x.max(dmin),
                Bound::Unbounded => dmin,
            };
            let hi_v = match hi {
                Bound::Included(x) | Bound::Excluded(x) => x.min(dmax),
                Bound::Unbounded => dmax,
            };
            let side = match (lo_v.as_f64(), hi_v.as_f64()) {
                (Some(a), Some(b)) => (b - a).max(0.0),
                _ => {
                    if lo_v >= hi_v {
                        0.0
                    } else {
                        1.0
                    }
                }
            };
            v *= side;
        }
        v
    }

    /// Same interval with unbounded ends replaced by the domain limits.
    pub fn resolve(&self, domain: &[(Value, Value)]) -> Vec<(Bound<Value>, Bound<Value>)> {
        self.dims
            .iter()
            .zip(domain)
            .map(|((lo, hi), (dmin, dmax))| {
                let lo = match lo {
                    Bound::Unbounded => Bound::Included(dmin.clone()),
                    b => b.clone(),
                };
                let hi = match hi {
                    Bound::Unbounded => Bound::Included(dmax.clone()),
                    b => b.clone(),
                };
                (lo, hi)
            })
            .collect()
    }
}

/// Interval form of a conjunction of `<column op value>` terms.
pub fn to_interval(pred: &CnfPredicate, schema: &TableSchema) -> Result<IntervalPredicate> {
    pred.check(schema)?;
    let mut dims: Vec<(Bound<Value>, Bound<Value>)> = vec![(Bound::Unbounded, Bound::Unbounded); schema.len()];
    for clause in pred.clauses() {
        let [term] = clause.terms() else {
            return Err(Error::NotCacheable(format!("disjunction `{clause}`")));
        };
        let Operand::Value(v) = &term.rhs else {
            return Err(Error::NotCacheable(format!("column comparison `{term}`")));
        };
        let (lo, hi) = match term.op {
            CmpOp::Eq => (Bound::Included(v.clone()), Bound::Included(v.clone())),
            CmpOp::Ge => (Bound::Included(v.clone()), Bound::Unbounded),
            CmpOp::Gt => (Bound::Excluded(v.clone()), Bound::Unbounded),
            CmpOp::Le => (Bound::Unbounded, Bound::Included(v.clone())),
            CmpOp::Lt => (Bound::Unbounded, Bound::Excluded(v.clone())),
            CmpOp::Ne => return Err(Error::NotCacheable(format!("`{term}` is not an interval"))),
        };
        let d = &mut dims[schema.position(&term.column)?];
        if cmp_lower(&lo, &d.0) == Ordering::Greater {
            d.0 = lo;
        }
        if cmp_upper(&hi, &d.1) == Ordering::Less {
            d.1 = hi;
        }
    }
    Ok(IntervalPredicate::from_bounds(dims))
}

fn fmt_bounds(f: &mut fmt::Formatter<'_>, dims: &[(Bound<Value>, Bound<Value>)]) -> fmt::Result {
    for (i, (lo, hi)) in dims.iter().enumerate() {
        if i > 0 {
            f.write_str(" x ")?;
        }
        match lo {
            Bound::Included(v) => write!(f, "[{v}, ")?,
            Bound::Excluded(v) => write!(f, "({v}, ")?,
            Bound::Unbounded => f.write_str("(-inf, ")?,
        }
        match hi {
            Bound::Included(v) => write!(f, "{v}]")?,
            Bound::Excluded(v) => write!(f, "{v})")?,
            Bound::Unbounded => f.write_str("+inf)")?,
        }
    }
    Ok(())
}

impl fmt::Display for IntervalPredicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_false {
            return f.write_str("false");
        }
        fmt_bounds(f, &self.dims)
    }
}

/// Display helper for resolved bounds.
pub struct ResolvedInterval<'a>(pub &'a [(Bound<Value>, Bound<Value>)]);

impl fmt::Display for ResolvedInterval<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_bounds(f, self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Term, ValueKind};

    fn schema() -> TableSchema {
        TableSchema::from_pairs([("x", ValueKind::Int), ("y", ValueKind::Float)]).unwrap()
    }

    fn iv(terms: Vec<Term>) -> IntervalPredicate {
        to_interval(&CnfPredicate::conjunction(terms), &schema()).unwrap()
    }

    #[test]
    fn tightens_and_closes_integer_bounds() {
        let a = iv(vec![Term::value("x", CmpOp::Gt, 5), Term::value("x", CmpOp::Gt, 10)]);
        let b = iv(vec![Term::value("x", CmpOp::Ge, 11)]);
        assert_eq!(a, b);
        assert_eq!(a.dims()[0].0, Bound::Included(Value::Int(11)));
    }

    #[test]
    fn contradiction_is_false() {
        let a = iv(vec![Term::value("x", CmpOp::Gt, 5), Term::value("x", CmpOp::Lt, 0)]);
        assert!(a.is_false());
        let b = iv(vec![Term::value("x", CmpOp::Gt, 5), Term::value("x", CmpOp::Lt, 6)]);
        assert!(b.is_false());
        let y = Value::float(0.5).unwrap();
        let c = iv(vec![Term::value("y", CmpOp::Gt, y.clone()), Term::value("y", CmpOp::Lt, y)]);
        assert!(c.is_false());
    }

    #[test]
    fn float_strict_bounds_stay_open() {
        let a = iv(vec![Term::value("y", CmpOp::Lt, Value::float(0.5).unwrap())]);
        assert_eq!(a.dims()[1].1, Bound::Excluded(Value::float(0.5).unwrap()));
        assert!(!a.is_closed());
        let b = iv(vec![Term::value("y", CmpOp::Le, Value::float(0.5).unwrap())]);
        assert!(a.contained_in(&b));
        assert!(!b.contained_in(&a));
    }

    #[test]
    fn rejects_non_intervals() {
        let s = schema();
        let ne = CnfPredicate::conjunction([Term::value("x", CmpOp::Ne, 1)]);
        assert!(matches!(to_interval(&ne, &s), Err(Error::NotCacheable(_))));
        let or = CnfPredicate::parse("x = 1 OR x = 2", &s).unwrap();
        assert!(matches!(to_interval(&or, &s), Err(Error::NotCacheable(_))));
    }

    #[test]
    fn volume_uses_domain_for_open_ends() {
        let domain = vec![(Value::Int(0), Value::Int(100)), (Value::float(0.0).unwrap(), Value::float(1.0).unwrap())];
        assert_eq!(IntervalPredicate::full(2).volume(&domain), 100.0);
        let a = iv(vec![Term::value("x", CmpOp::Eq, 3)]);
        assert_eq!(a.volume(&domain), 0.0);
    }
}
