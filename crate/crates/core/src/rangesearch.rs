//! Interval containment as dominance search over points.
//!
//! An m-dimensional interval `[x1,y1] x .. x [xm,ym]` becomes the 2m-point
//! `(x1..xm, -y1..-ym)`. An interval contains the query `[a1,b1] x ..` iff
//! its point is dominated by `(a1..am, -b1..-bm)`, i.e. every coordinate is
//! at most the bound. Negation is done by order reversal ([`Coord::Desc`]),
//! which works for text and dates as well as numbers.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering as AtomicOrdering};
use std::ops::Bound;

use crate::error::{Error, Result};
use crate::model::Value;

/// A value on the extended line.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Ext {
    NegInf,
    Val(Value),
    PosInf,
}

/// One point coordinate: a lower end (ascending) or a negated upper end.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Coord {
    Asc(Ext),
    Desc(Ext),
}

impl Ord for Coord {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Coord::Asc(a), Coord::Asc(b)) => a.cmp(b),
            (Coord::Desc(a), Coord::Desc(b)) => b.cmp(a),
            (Coord::Asc(_), Coord::Desc(_)) => Ordering::Less,
            (Coord::Desc(_), Coord::Asc(_)) => Ordering::Greater,
        }
    }
}

impl PartialOrd for Coord {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Coord {
    /// Numeric reading, with the upper ends negated.
    pub fn to_f64(&self) -> Option<f64> {
        match self {
            Coord::Asc(Ext::Val(v)) => v.as_f64(),
            Coord::Desc(Ext::Val(v)) => v.as_f64().map(|x| -x),
            Coord::Asc(Ext::NegInf) | Coord::Desc(Ext::PosInf) => Some(f64::NEG_INFINITY),
            Coord::Asc(Ext::PosInf) | Coord::Desc(Ext::NegInf) => Some(f64::INFINITY),
        }
    }
}

impl fmt::Display for Coord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coord::Asc(Ext::Val(v)) => write!(f, "{v}"),
            Coord::Desc(Ext::Val(v)) => write!(f, "-{v}"),
            c => match c.to_f64() {
                Some(x) if x < 0.0 => f.write_str("-inf"),
                _ => f.write_str("+inf"),
            },
        }
    }
}

/// An interval as a list of per-dimension `(lower, upper)` bounds.
pub type Dims = [(Bound<Value>, Bound<Value>)];

fn lower_ext(b: &Bound<Value>) -> Result<Ext> {
    match b {
        Bound::Included(v) => Ok(Ext::Val(v.clone())),
        Bound::Unbounded => Ok(Ext::NegInf),
        Bound::Excluded(_) => Err(Error::InvalidValue("open interval ends have no point image".into())),
    }
}

fn upper_ext(b: &Bound<Value>) -> Result<Ext> {
    match b {
        Bound::Included(v) => Ok(Ext::Val(v.clone())),
        Bound::Unbounded => Ok(Ext::PosInf),
        Bound::Excluded(_) => Err(Error::InvalidValue("open interval ends have no point image".into())),
    }
}

/// `(x1..xm, -y1..-ym)` for a closed interval. Unbounded ends map to the
/// infinities.
pub fn interval_to_point(dims: &Dims) -> Result<Vec<Coord>> {
    let mut out = Vec::with_capacity(2 * dims.len());
    for (lo, _) in dims {
        out.push(Coord::Asc(lower_ext(lo)?));
    }
    for (_, hi) in dims {
        out.push(Coord::Desc(upper_ext(hi)?));
    }
    Ok(out)
}

/// Upper bounds `(a1..am, -b1..-bm)` selecting every stored closed interval
/// that contains the query. The query's own inclusivity does not matter: a
/// closed `[x, ..]` contains `(x, ..]` as well as `[x, ..]`.
pub fn query_to_bounds(dims: &Dims) -> Vec<Coord> {
    let lo = |b: &Bound<Value>| match b {
        Bound::Included(v) | Bound::Excluded(v) => Ext::Val(v.clone()),
        Bound::Unbounded => Ext::NegInf,
    };
    let hi = |b: &Bound<Value>| match b {
        Bound::Included(v) | Bound::Excluded(v) => Ext::Val(v.clone()),
        Bound::Unbounded => Ext::PosInf,
    };
    dims.iter()
        .map(|(l, _)| Coord::Asc(lo(l)))
        .chain(dims.iter().map(|(_, h)| Coord::Desc(hi(h))))
        .collect()
}

#[derive(Debug, Clone)]
struct Node<P> {
    point: Vec<Coord>,
    payload: P,
    left: Option<usize>,
    right: Option<usize>,
    // componentwise minimum over the subtree, tombstones included
    min_corner: Vec<Coord>,
    deleted: bool,
}

/// KD-tree over points of a fixed dimension with dominance queries.
///
/// Removal marks a tombstone; once tombstones exceed a quarter of the nodes
/// the tree is rebuilt balanced from the live points.
#[derive(Debug)]
pub struct KdTree<P> {
    dim: usize,
    nodes: Vec<Node<P>>,
    root: Option<usize>,
    by_payload: HashMap<P, usize>,
    tombstones: usize,
    visited: AtomicU64,
}

impl<P: Clone> Clone for KdTree<P> {
    fn clone(&self) -> Self {
        KdTree {
            dim: self.dim,
            nodes: self.nodes.clone(),
            root: self.root,
            by_payload: self.by_payload.clone(),
            tombstones: self.tombstones,
            visited: AtomicU64::new(self.visited.load(AtomicOrdering::Relaxed)),
        }
    }
}

impl<P: Clone + Eq + std::hash::Hash> KdTree<P> {
    pub fn new(dim: usize) -> Self {
        KdTree {
            dim,
            nodes: Vec::new(),
            root: None,
            by_payload: HashMap::new(),
            tombstones: 0,
            visited: AtomicU64::new(0),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Live points.
    pub fn len(&self) -> usize {
        self.nodes.len() - self.tombstones
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Nodes inspected by range searches since the last reset.
    pub fn visited(&self) -> u64 {
        self.visited.load(AtomicOrdering::Relaxed)
    }

    pub fn reset_visited(&self) {
        self.visited.store(0, AtomicOrdering::Relaxed);
    }

    /// Balanced build by median splits.
    pub fn build(dim: usize, points: Vec<(Vec<Coord>, P)>) -> Result<Self> {
        let mut t = KdTree::new(dim);
        for (p, _) in &points {
            t.check_dim(p)?;
        }
        t.nodes.reserve(points.len());
        let mut items = points;
        t.root = t.build_rec(&mut items, 0);
        Ok(t)
    }

    fn build_rec(&mut self, items: &mut [(Vec<Coord>, P)], depth: usize) -> Option<usize> {
        if items.is_empty() {
            return None;
        }
        let d = depth % self.dim;
        let mid = items.len() / 2;
        items.select_nth_unstable_by(mid, |a, b| a.0[d].cmp(&b.0[d]));
        // equal keys go right on insert, so the median must be the first of its run
        let key = items[mid].0[d].clone();
        let (before, _) = items.split_at_mut(mid);
        let mut first = mid;
        let equal_before = before.iter().filter(|x| x.0[d] == key).count();
        if equal_before > 0 {
            let len = before.len();
            let mut i = 0;
            for j in 0..len {
                if before[j].0[d] != key {
                    before.swap(i, j);
                    i += 1;
                }
            }
            first = i;
            items.swap(first, mid);
        }
        let (point, payload) = items[first].clone();
        let idx = self.nodes.len();
        self.nodes.push(Node {
            min_corner: point.clone(),
            point,
            payload: payload.clone(),
            left: None,
            right: None,
            deleted: false,
        });
        self.by_payload.insert(payload, idx);
        let (left_items, rest) = items.split_at_mut(first);
        let right_items = &mut rest[1..];
        let left = self.build_rec(left_items, depth + 1);
        let right = self.build_rec(right_items, depth + 1);
        self.nodes[idx].left = left;
        self.nodes[idx].right = right;
        for child in [left, right].into_iter().flatten() {
            let corner = self.nodes[child].min_corner.clone();
            lower_corner(&mut self.nodes[idx].min_corner, &corner);
        }
        Some(idx)
    }

    fn check_dim(&self, p: &[Coord]) -> Result<()> {
        if p.len() != self.dim {
            return Err(Error::InvalidValue(format!(
                "point has {} coordinates, tree has {}",
                p.len(),
                self.dim
            )));
        }
        Ok(())
    }

    /// Inserts a point; a payload already present is replaced.
    pub fn insert(&mut self, point: Vec<Coord>, payload: P) -> Result<()> {
        self.check_dim(&point)?;
        self.remove(&payload);
        let idx = self.nodes.len();
        let mut depth = 0;
        let mut cur = self.root;
        let mut parent: Option<(usize, bool)> = None;
        while let Some(i) = cur {
            lower_corner(&mut self.nodes[i].min_corner, &point);
            let d = depth % self.dim;
            let go_left = point[d] < self.nodes[i].point[d];
            parent = Some((i, go_left));
            cur = if go_left { self.nodes[i].left } else { self.nodes[i].right };
            depth += 1;
        }
        self.nodes.push(Node {
            min_corner: point.clone(),
            point,
            payload: payload.clone(),
            left: None,
            right: None,
            deleted: false,
        });
        match parent {
            None => self.root = Some(idx),
            Some((p, true)) => self.nodes[p].left = Some(idx),
            Some((p, false)) => self.nodes[p].right = Some(idx),
        }
        self.by_payload.insert(payload, idx);
        Ok(())
    }

    /// Removes the point carrying `payload`; returns whether it existed.
    pub fn remove(&mut self, payload: &P) -> bool {
        let Some(idx) = self.by_payload.remove(payload) else {
            return false;
        };
        self.nodes[idx].deleted = true;
        self.tombstones += 1;
        if self.tombstones * 4 > self.nodes.len() {
            self.rebuild();
        }
        true
    }

    fn rebuild(&mut self) {
        let live: Vec<(Vec<Coord>, P)> = std::mem::take(&mut self.nodes)
            .into_iter()
            .filter(|n| !n.deleted)
            .map(|n| (n.point, n.payload))
            .collect();
        let visited = self.visited();
        *self = KdTree::build(self.dim, live).expect("points already validated");
        self.visited = AtomicU64::new(visited);
    }

    /// Payloads of every point dominated by `bounds`.
    pub fn range_search(&self, bounds: &[Coord]) -> Vec<P> {
        let mut out = Vec::new();
        if bounds.len() != self.dim {
            return out;
        }
        let mut stack: Vec<(usize, usize)> = self.root.map(|r| (r, 0)).into_iter().collect();
        let mut visited = 0u64;
        while let Some((i, depth)) = stack.pop() {
            visited += 1;
            let node = &self.nodes[i];
            if node.min_corner.iter().zip(bounds).any(|(c, b)| c > b) {
                continue;
            }
            if !node.deleted && node.point.iter().zip(bounds).all(|(c, b)| c <= b) {
                out.push(node.payload.clone());
            }
            let d = depth % self.dim;
            if let Some(l) = node.left {
                stack.push((l, depth + 1));
            }
            // right subtree holds coordinates >= the split key
            if node.point[d] <= bounds[d] {
                if let Some(r) = node.right {
                    stack.push((r, depth + 1));
                }
            }
        }
        self.visited.fetch_add(visited, AtomicOrdering::Relaxed);
        out
    }
}

fn lower_corner(corner: &mut [Coord], p: &[Coord]) {
    for (c, x) in corner.iter_mut().zip(p) {
        if x < c {
            *c = x.clone();
        }
    }
}
