//! Dynamic approximate nearest-neighbour and closest-pair index.
//!
//! One balanced ordered collection (a treap with deterministic, key-derived
//! priorities) per shift of the covering family, each sorted by that shift's
//! L-order with a lexicographic raw-coordinate tie-break. A nearest query
//! locates the query point in every order and takes the best of the at most
//! `2(3d+3)` order-neighbours; the closest pair is the best order-adjacent
//! pair. Updates touch each collection once; queries never mutate.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering as AtomicOrdering};

use crate::cover::{shift_family, ShiftFamily};
use crate::error::Error;
use crate::geometry::{distance, Point};
use crate::lorder::{compare_transformed, transform, FixedVector};
use crate::scalar::Scalar;
use crate::Result;

/// Stateless splitmix64 step, used for treap priorities and sampling.
fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E3779B97F4A7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

fn priority_of(key: &[u64]) -> u64 {
    let mut h = 0x8000_0000_0000_0001u64;
    for &w in key {
        h = splitmix64(h ^ w);
    }
    h
}

#[derive(Debug, Clone, Copy, Default)]
struct TreapNode {
    left: Option<u32>,
    right: Option<u32>,
}

/// Treap over arena slots; comparisons are delegated so all 3(D+1) orders
/// share one node arena layout.
#[derive(Debug, Default)]
struct Treap {
    root: Option<u32>,
    nodes: Vec<TreapNode>,
}

impl Treap {
    fn ensure(&mut self, slot: usize) {
        if self.nodes.len() <= slot {
            self.nodes.resize(slot + 1, TreapNode::default());
        }
    }

    fn insert(&mut self, slot: u32, prios: &[u64], cmp: &mut dyn FnMut(u32, u32) -> Ordering) {
        self.ensure(slot as usize);
        self.nodes[slot as usize] = TreapNode::default();
        self.root = Self::insert_at(&mut self.nodes, self.root, slot, prios, cmp);
    }

    fn insert_at(
        nodes: &mut [TreapNode],
        root: Option<u32>,
        slot: u32,
        prios: &[u64],
        cmp: &mut dyn FnMut(u32, u32) -> Ordering,
    ) -> Option<u32> {
        let Some(r) = root else { return Some(slot) };
        if cmp(slot, r) == Ordering::Less {
            let nl = Self::insert_at(nodes, nodes[r as usize].left, slot, prios, cmp);
            nodes[r as usize].left = nl;
            let nl = nl.unwrap();
            if prios[nl as usize] > prios[r as usize] {
                // rotate right
                nodes[r as usize].left = nodes[nl as usize].right;
                nodes[nl as usize].right = Some(r);
                return Some(nl);
            }
        } else {
            let nr = Self::insert_at(nodes, nodes[r as usize].right, slot, prios, cmp);
            nodes[r as usize].right = nr;
            let nr = nr.unwrap();
            if prios[nr as usize] > prios[r as usize] {
                // rotate left
                nodes[r as usize].right = nodes[nr as usize].left;
                nodes[nr as usize].left = Some(r);
                return Some(nr);
            }
        }
        Some(r)
    }

    fn remove(&mut self, slot: u32, prios: &[u64], cmp: &mut dyn FnMut(u32, u32) -> Ordering) {
        self.root = Self::remove_at(&mut self.nodes, self.root, slot, prios, cmp);
    }

    fn remove_at(
        nodes: &mut [TreapNode],
        root: Option<u32>,
        slot: u32,
        prios: &[u64],
        cmp: &mut dyn FnMut(u32, u32) -> Ordering,
    ) -> Option<u32> {
        let r = root.expect("slot present in treap");
        if r == slot {
            return Self::merge(nodes, nodes[r as usize].left, nodes[r as usize].right, prios);
        }
        if cmp(slot, r) == Ordering::Less {
            let nl = Self::remove_at(nodes, nodes[r as usize].left, slot, prios, cmp);
            nodes[r as usize].left = nl;
        } else {
            let nr = Self::remove_at(nodes, nodes[r as usize].right, slot, prios, cmp);
            nodes[r as usize].right = nr;
        }
        Some(r)
    }

    fn merge(
        nodes: &mut [TreapNode],
        a: Option<u32>,
        b: Option<u32>,
        prios: &[u64],
    ) -> Option<u32> {
        match (a, b) {
            (None, b) => b,
            (a, None) => a,
            (Some(x), Some(y)) => {
                if prios[x as usize] >= prios[y as usize] {
                    let m = Self::merge(nodes, nodes[x as usize].right, Some(y), prios);
                    nodes[x as usize].right = m;
                    Some(x)
                } else {
                    let m = Self::merge(nodes, Some(x), nodes[y as usize].left, prios);
                    nodes[y as usize].left = m;
                    Some(y)
                }
            }
        }
    }

    /// Predecessor, exact match and successor of a query position.
    fn locate(&self, q: &mut dyn FnMut(u32) -> Ordering) -> (Option<u32>, Option<u32>, Option<u32>) {
        let (mut pred, mut exact, mut succ) = (None, None, None);
        let mut cur = self.root;
        while let Some(c) = cur {
            match q(c) {
                Ordering::Less => {
                    succ = Some(c);
                    cur = self.nodes[c as usize].left;
                }
                Ordering::Greater => {
                    pred = Some(c);
                    cur = self.nodes[c as usize].right;
                }
                Ordering::Equal => {
                    exact = Some(c);
                    let mut l = self.nodes[c as usize].left;
                    while let Some(x) = l {
                        pred = Some(x);
                        l = self.nodes[x as usize].right;
                    }
                    let mut r = self.nodes[c as usize].right;
                    while let Some(x) = r {
                        succ = Some(x);
                        r = self.nodes[x as usize].left;
                    }
                    break;
                }
            }
        }
        (pred, exact, succ)
    }

    fn in_order(&self, out: &mut Vec<u32>) {
        fn walk(nodes: &[TreapNode], n: Option<u32>, out: &mut Vec<u32>) {
            let Some(n) = n else { return };
            walk(nodes, nodes[n as usize].left, out);
            out.push(n);
            walk(nodes, nodes[n as usize].right, out);
        }
        walk(&self.nodes, self.root, out);
    }
}

struct Entry<S: Scalar> {
    point: Point<S>,
    /// Transformed coordinates under each shift, precomputed once.
    keys: Vec<FixedVector>,
}

/// The dynamic approximate nearest-neighbour / closest-pair index.
pub struct NeighborIndex<S: Scalar> {
    family: ShiftFamily<S>,
    entries: Vec<Option<Entry<S>>>,
    prios: Vec<u64>,
    free: Vec<u32>,
    by_key: HashMap<Vec<u64>, u32>,
    orders: Vec<Treap>,
    comparisons: AtomicU64,
}

impl<S: Scalar> NeighborIndex<S> {
    /// Empty index for dimension `d` at query scale Δ.
    pub fn new(d: usize, delta: f64) -> Result<Self> {
        let family = shift_family(delta, d)?;
        let orders = (0..family.shifts().len()).map(|_| Treap::default()).collect();
        Ok(NeighborIndex {
            family,
            entries: Vec::new(),
            prios: Vec::new(),
            free: Vec::new(),
            by_key: HashMap::new(),
            orders,
            comparisons: AtomicU64::new(0),
        })
    }

    /// Index over a distinct point set.
    pub fn build(d: usize, points: &[Point<S>], delta: f64) -> Result<Self> {
        let mut ix = Self::new(d, delta)?;
        for p in points {
            ix.insert(p.clone())?;
        }
        Ok(ix)
    }

    /// As [`NeighborIndex::build`] with Δ set from the data: twice the
    /// maximum distance over a deterministic `2n`-pair sample.
    pub fn with_auto_delta(d: usize, points: &[Point<S>], seed: u64) -> Result<Self> {
        let mut delta: f64 = 1e-3;
        if points.len() >= 2 {
            let mut state = splitmix64(seed);
            for _ in 0..2 * points.len() {
                state = splitmix64(state);
                let a = (state % points.len() as u64) as usize;
                state = splitmix64(state);
                let b = (state % points.len() as u64) as usize;
                if a != b {
                    delta = delta.max(distance(&points[a], &points[b])?.as_f64());
                }
            }
        }
        Self::build(d, points, 2.0 * delta)
    }

    pub fn family(&self) -> &ShiftFamily<S> {
        &self.family
    }

    pub fn len(&self) -> usize {
        self.by_key.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_key.is_empty()
    }

    /// Total comparator invocations since construction or the last reset.
    pub fn comparator_calls(&self) -> u64 {
        self.comparisons.load(AtomicOrdering::Relaxed)
    }

    pub fn reset_comparator_calls(&self) {
        self.comparisons.store(0, AtomicOrdering::Relaxed);
    }

    fn keys_for(&self, p: &Point<S>) -> Result<Vec<FixedVector>> {
        self.family
            .shifts()
            .iter()
            .map(|s| transform(&s.apply(p)))
            .collect()
    }

    /// Comparator for order `k`: shifted L-order, ties broken by raw
    /// coordinates so distinct points always order strictly.
    fn cmp_entries(&self, k: usize, a: u32, b: u32) -> Ordering {
        self.comparisons.fetch_add(1, AtomicOrdering::Relaxed);
        let ea = self.entries[a as usize].as_ref().expect("live slot");
        let eb = self.entries[b as usize].as_ref().expect("live slot");
        compare_transformed(&ea.keys[k], &eb.keys[k])
            .then_with(|| ea.point.lex_cmp(&eb.point))
    }

    pub fn insert(&mut self, p: Point<S>) -> Result<()> {
        if p.dim() != self.family.dim() {
            return Err(Error::DimensionMismatch(p.dim(), self.family.dim()));
        }
        let key = p.key();
        if self.by_key.contains_key(&key) {
            return Err(Error::DuplicatePoint);
        }
        let keys = self.keys_for(&p)?;
        let prio = priority_of(&key);
        let slot = match self.free.pop() {
            Some(s) => {
                self.entries[s as usize] = Some(Entry { point: p, keys });
                self.prios[s as usize] = prio;
                s
            }
            None => {
                self.entries.push(Some(Entry { point: p, keys }));
                self.prios.push(prio);
                (self.entries.len() - 1) as u32
            }
        };
        self.by_key.insert(key, slot);
        for k in 0..self.orders.len() {
            let mut order = std::mem::take(&mut self.orders[k]);
            order.insert(slot, &self.prios, &mut |a, b| self.cmp_entries(k, a, b));
            self.orders[k] = order;
        }
        Ok(())
    }

    pub fn remove(&mut self, p: &Point<S>) -> Result<()> {
        let slot = *self.by_key.get(&p.key()).ok_or(Error::PointNotFound)?;
        for k in 0..self.orders.len() {
            let mut order = std::mem::take(&mut self.orders[k]);
            order.remove(slot, &self.prios, &mut |a, b| self.cmp_entries(k, a, b));
            self.orders[k] = order;
        }
        self.by_key.remove(&p.key());
        self.entries[slot as usize] = None;
        self.free.push(slot);
        Ok(())
    }

    /// Indexed points in order `k`, for audits.
    pub fn order_points(&self, k: usize) -> Vec<&Point<S>> {
        let mut slots = Vec::with_capacity(self.len());
        self.orders[k].in_order(&mut slots);
        slots
            .into_iter()
            .map(|s| &self.entries[s as usize].as_ref().expect("live slot").point)
            .collect()
    }

    /// Approximate nearest neighbour: the best of the order-neighbours of
    /// `q` across all shifts. Read-only.
    pub fn nearest(&self, q: &Point<S>) -> Result<Option<Point<S>>> {
        if self.is_empty() {
            return Ok(None);
        }
        if q.dim() != self.family.dim() {
            return Err(Error::DimensionMismatch(q.dim(), self.family.dim()));
        }
        let qkeys = self.keys_for(q)?;
        let mut cands: Vec<u32> = Vec::with_capacity(2 * self.orders.len());
        for (k, order) in self.orders.iter().enumerate() {
            let (pred, exact, succ) = order.locate(&mut |slot| {
                self.comparisons.fetch_add(1, AtomicOrdering::Relaxed);
                let e = self.entries[slot as usize].as_ref().expect("live slot");
                compare_transformed(&qkeys[k], &e.keys[k])
                    .then_with(|| q.lex_cmp(&e.point))
            });
            if let Some(e) = exact {
                // the query is an indexed point
                let p = &self.entries[e as usize].as_ref().expect("live slot").point;
                return Ok(Some(p.clone()));
            }
            cands.extend(pred);
            cands.extend(succ);
        }
        cands.sort_unstable();
        cands.dedup();
        let mut best: Option<(S, &Point<S>)> = None;
        for slot in cands {
            let p = &self.entries[slot as usize].as_ref().expect("live slot").point;
            let dist = distance(q, p)?;
            let better = match &best {
                None => true,
                Some((bd, bp)) => {
                    dist < *bd || (dist == *bd && p.lex_cmp(bp) == Ordering::Less)
                }
            };
            if better {
                best = Some((dist, p));
            }
        }
        Ok(best.map(|(_, p)| p.clone()))
    }

    /// Approximate closest pair: the closest order-adjacent pair over all
    /// shifts. Read-only.
    pub fn closest_pair(&self) -> Result<(Point<S>, Point<S>)> {
        if self.len() < 2 {
            return Err(Error::TooFewPoints { needed: 2, got: self.len() });
        }
        let mut best: Option<(S, &Point<S>, &Point<S>)> = None;
        for k in 0..self.orders.len() {
            let pts = self.order_points(k);
            for w in pts.windows(2) {
                let dist = distance(w[0], w[1])?;
                let (a, b) = if w[0].lex_cmp(w[1]) == Ordering::Less {
                    (w[0], w[1])
                } else {
                    (w[1], w[0])
                };
                let better = match &best {
                    None => true,
                    Some((bd, ba, bb)) => {
                        dist < *bd
                            || (dist == *bd
                                && (a.lex_cmp(ba), b.lex_cmp(bb))
                                    < (Ordering::Equal, Ordering::Equal))
                    }
                };
                if better {
                    best = Some((dist, a, b));
                }
            }
        }
        let (_, a, b) = best.expect("len >= 2 gives adjacent pairs");
        Ok((a.clone(), b.clone()))
    }
}

/// Exact nearest neighbour by exhaustive scan; ties go to the
/// lexicographically smallest point.
pub fn brute_force_nearest<S: Scalar>(points: &[Point<S>], q: &Point<S>) -> Result<Point<S>> {
    let mut best: Option<(S, &Point<S>)> = None;
    if points.is_empty() {
        return Err(Error::EmptyPointSet);
    }
    for p in points {
        let dist = distance(q, p)?;
        let better = match &best {
            None => true,
            Some((bd, bp)) => dist < *bd || (dist == *bd && p.lex_cmp(bp) == Ordering::Less),
        };
        if better {
            best = Some((dist, p));
        }
    }
    Ok(best.expect("nonempty").1.clone())
}

/// Exact closest pair by exhaustive scan.
pub fn brute_force_closest_pair<S: Scalar>(points: &[Point<S>]) -> Result<(Point<S>, Point<S>)> {
    if points.len() < 2 {
        return Err(Error::TooFewPoints { needed: 2, got: points.len() });
    }
    let mut best: Option<(S, &Point<S>, &Point<S>)> = None;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let dist = distance(&points[i], &points[j])?;
            let (a, b) = if points[i].lex_cmp(&points[j]) == Ordering::Less {
                (&points[i], &points[j])
            } else {
                (&points[j], &points[i])
            };
            let better = match &best {
                None => true,
                Some((bd, ba, bb)) => {
                    dist < *bd
                        || (dist == *bd
                            && (a.lex_cmp(ba), b.lex_cmp(bb))
                                < (Ordering::Equal, Ordering::Equal))
                }
            };
            if better {
                best = Some((dist, a, b));
            }
        }
    }
    let (_, a, b) = best.expect("len >= 2");
    Ok((a.clone(), b.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lorder::shifted_compare;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn pt(x: &[f64], z: f64) -> Point<f64> {
        Point::new(x.to_vec(), z).unwrap()
    }

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn random_point(r: &mut ChaCha8Rng, d: usize) -> Point<f64> {
        let x: Vec<f64> = (0..d - 1).map(|_| r.gen_range(-5.0..5.0)).collect();
        let z = (r.gen_range(-3.0..3.0) as f64).exp2();
        Point::new(x, z).unwrap()
    }

    #[test]
    fn empty_and_singleton() {
        let ix: NeighborIndex<f64> = NeighborIndex::new(2, 1.0).unwrap();
        assert!(ix.is_empty());
        assert_eq!(ix.nearest(&pt(&[0.0], 1.0)).unwrap(), None);
        assert!(ix.closest_pair().is_err());

        let mut ix = ix;
        let p = pt(&[0.3], 1.4);
        ix.insert(p.clone()).unwrap();
        assert_eq!(ix.nearest(&pt(&[5.0], 0.2)).unwrap(), Some(p));
    }

    #[test]
    fn duplicate_and_missing() {
        let mut ix: NeighborIndex<f64> = NeighborIndex::new(2, 1.0).unwrap();
        let p = pt(&[0.3], 1.4);
        ix.insert(p.clone()).unwrap();
        assert!(matches!(ix.insert(p.clone()), Err(Error::DuplicatePoint)));
        assert!(matches!(ix.remove(&pt(&[9.0], 1.0)), Err(Error::PointNotFound)));
        ix.remove(&p).unwrap();
        assert!(ix.is_empty());
    }

    #[test]
    fn orders_are_sorted() {
        let mut r = rng(50);
        let pts: Vec<_> = (0..200).map(|_| random_point(&mut r, 3)).collect();
        let ix = NeighborIndex::build(3, &pts, 2.0).unwrap();
        for (k, shift) in ix.family().shifts().iter().enumerate() {
            let seq = ix.order_points(k);
            assert_eq!(seq.len(), pts.len());
            for w in seq.windows(2) {
                let o = shifted_compare(shift, w[0], w[1]).unwrap();
                assert_ne!(o, Ordering::Greater, "order {k} out of order");
                if o == Ordering::Equal {
                    assert_eq!(w[0].lex_cmp(w[1]), Ordering::Less);
                }
            }
        }
    }

    #[test]
    fn insert_remove_round_trip_restores_orders() {
        let mut r = rng(51);
        let pts: Vec<_> = (0..100).map(|_| random_point(&mut r, 2)).collect();
        let mut ix = NeighborIndex::build(2, &pts, 2.0).unwrap();
        let before: Vec<Vec<Point<f64>>> = (0..ix.family().shifts().len())
            .map(|k| ix.order_points(k).into_iter().cloned().collect())
            .collect();
        let extra = pt(&[0.123], 1.456);
        ix.insert(extra.clone()).unwrap();
        ix.remove(&extra).unwrap();
        for (k, want) in before.iter().enumerate() {
            let got: Vec<Point<f64>> = ix.order_points(k).into_iter().cloned().collect();
            assert_eq!(&got, want, "order {k} changed");
        }
    }

    #[test]
    fn incremental_equals_batch() {
        let mut r = rng(52);
        let pts: Vec<_> = (0..150).map(|_| random_point(&mut r, 3)).collect();
        let batch = NeighborIndex::build(3, &pts, 2.0).unwrap();
        let mut inc: NeighborIndex<f64> = NeighborIndex::new(3, 2.0).unwrap();
        for p in &pts {
            inc.insert(p.clone()).unwrap();
        }
        for k in 0..batch.family().shifts().len() {
            let a: Vec<_> = batch.order_points(k);
            let b: Vec<_> = inc.order_points(k);
            assert_eq!(a, b);
        }
    }

    #[test]
    fn random_churn_keeps_collections_consistent() {
        let mut r = rng(53);
        let mut ix: NeighborIndex<f64> = NeighborIndex::new(2, 2.0).unwrap();
        let mut live: Vec<Point<f64>> = Vec::new();
        for _ in 0..1_000 {
            if live.is_empty() || r.gen_bool(0.6) {
                let p = random_point(&mut r, 2);
                if ix.insert(p.clone()).is_ok() {
                    live.push(p);
                }
            } else {
                let i = r.gen_range(0..live.len());
                let p = live.swap_remove(i);
                ix.remove(&p).unwrap();
            }
        }
        assert_eq!(ix.len(), live.len());
        let mut want: Vec<Vec<u64>> = live.iter().map(|p| p.key()).collect();
        want.sort();
        for k in 0..ix.family().shifts().len() {
            let mut got: Vec<Vec<u64>> = ix.order_points(k).iter().map(|p| p.key()).collect();
            got.sort();
            assert_eq!(got, want, "order {k} multiset diverged");
        }
    }

    #[test]
    fn nearest_is_sound_and_close() {
        let mut r = rng(54);
        let pts: Vec<_> = (0..500).map(|_| random_point(&mut r, 2)).collect();
        let ix = NeighborIndex::build(2, &pts, 8.0).unwrap();
        let mut worst = 1.0f64;
        for _ in 0..100 {
            let q = random_point(&mut r, 2);
            let got = ix.nearest(&q).unwrap().unwrap();
            let exact = brute_force_nearest(&pts, &q).unwrap();
            let dg = distance(&q, &got).unwrap();
            let de = distance(&q, &exact).unwrap();
            assert!(dg >= de - 1e-12, "approximate beat exact");
            if de > 0.0 {
                worst = worst.max(dg / de);
            }
        }
        assert!(worst < 15.0, "d=2 nearest ratio {worst}");
    }

    #[test]
    fn nearest_of_indexed_point_is_itself() {
        let mut r = rng(55);
        let pts: Vec<_> = (0..100).map(|_| random_point(&mut r, 3)).collect();
        let ix = NeighborIndex::build(3, &pts, 4.0).unwrap();
        for p in pts.iter().step_by(7) {
            assert_eq!(ix.nearest(p).unwrap(), Some(p.clone()));
        }
    }

    #[test]
    fn closest_pair_examples() {
        // two points: exactly optimal
        let pts = vec![pt(&[0.0], 1.0), pt(&[0.7], 1.3)];
        let ix = NeighborIndex::build(2, &pts, 4.0).unwrap();
        let (a, b) = ix.closest_pair().unwrap();
        let (ea, eb) = brute_force_closest_pair(&pts).unwrap();
        assert_eq!((a, b), (ea, eb));

        // vertical stack: closest pair is (1, 2) at distance ln 2
        let stack = vec![pt(&[0.0], 1.0), pt(&[0.0], 2.0), pt(&[0.0], 8.0), pt(&[0.0], 64.0)];
        let ix = NeighborIndex::build(2, &stack, 8.0).unwrap();
        let (a, b) = ix.closest_pair().unwrap();
        let mut zs = [a.z(), b.z()];
        zs.sort_by(f64::total_cmp);
        assert_eq!(zs, [1.0, 2.0]);
        let d = distance(&a, &b).unwrap();
        assert!((d - std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn closest_pair_ratio_bounded() {
        let mut r = rng(56);
        let mut worst = 1.0f64;
        for _ in 0..20 {
            let d = r.gen_range(2..4);
            let pts: Vec<_> = (0..200).map(|_| random_point(&mut r, d)).collect();
            let ix = NeighborIndex::build(d, &pts, 8.0).unwrap();
            let (a, b) = ix.closest_pair().unwrap();
            let (ea, eb) = brute_force_closest_pair(&pts).unwrap();
            let got = distance(&a, &b).unwrap();
            let exact = distance(&ea, &eb).unwrap();
            assert!(got >= exact - 1e-12);
            if exact > 0.0 {
                worst = worst.max(got / exact);
            }
        }
        assert!(worst < 15.0, "closest-pair ratio {worst}");
    }

    #[test]
    fn brute_force_examples() {
        let pts = vec![pt(&[0.0], 1.0), pt(&[0.0], 2.0), pt(&[0.0], 8.0)];
        let (a, b) = brute_force_closest_pair(&pts).unwrap();
        assert_eq!((a.z(), b.z()), (1.0, 2.0));
        assert!(brute_force_nearest::<f64>(&[], &pts[0]).is_err());
        let q = pt(&[0.0], 1.9);
        assert_eq!(brute_force_nearest(&pts, &q).unwrap().z(), 2.0);
    }

    #[test]
    fn dynamic_matches_fresh_build() {
        let mut r = rng(57);
        let mut ix: NeighborIndex<f64> = NeighborIndex::new(2, 4.0).unwrap();
        let mut live: Vec<Point<f64>> = Vec::new();
        for _ in 0..300 {
            if live.is_empty() || r.gen_bool(0.7) {
                let p = random_point(&mut r, 2);
                if ix.insert(p.clone()).is_ok() {
                    live.push(p);
                }
            } else {
                let i = r.gen_range(0..live.len());
                ix.remove(&live.swap_remove(i)).unwrap();
            }
        }
        let fresh = NeighborIndex::build(2, &live, 4.0).unwrap();
        for _ in 0..50 {
            let q = random_point(&mut r, 2);
            assert_eq!(ix.nearest(&q).unwrap(), fresh.nearest(&q).unwrap());
        }
    }

    #[test]
    fn comparator_counter_moves() {
        let mut r = rng(58);
        let pts: Vec<_> = (0..64).map(|_| random_point(&mut r, 2)).collect();
        let ix = NeighborIndex::build(2, &pts, 4.0).unwrap();
        ix.reset_comparator_calls();
        let _ = ix.nearest(&pt(&[0.0], 1.0)).unwrap();
        let calls = ix.comparator_calls();
        assert!(calls > 0);
        // localization is logarithmic-ish: way below n per order
        assert!(calls < (ix.family().shifts().len() as u64) * 40, "calls {calls}");
    }
}
