//! Slow reference implementations used by the test suites.
//!
//! [`aligned_dfs_order`] traverses the aligned infinite quadtree by explicit
//! interval bisection on the quantised coordinates — no exclusive-or or
//! leading-zero tricks — and therefore serves as an independent oracle for
//! the bit-twiddling comparator in [`crate::lorder`].
//!
//! The traversal conventions are the pinned ones: the top child of a
//! horosphere split is visited first; horizontal splits visit the low half
//! first with axis 1 most significant; the two sides of the `z̃ = 0`
//! boundary are visited upper-side-first, matching the order the comparator
//! assigns across that boundary.

use crate::error::Error;
use crate::lorder::FixedVector;
use crate::quadtree::{infinite_cell_from, LEVEL_FLOOR};
use crate::Result;

/// Supported coordinate range: `|log₂ z| < 64` and `|x sqrt(d-1)| < 2^62`.
fn check_domain(vs: &[FixedVector]) -> Result<usize> {
    let d = vs.first().ok_or(Error::EmptyPointSet)?.dim();
    for v in vs {
        if v.dim() != d {
            return Err(Error::DimensionMismatch(v.dim(), d));
        }
        let raw = v.raw();
        if raw[d - 1].unsigned_abs() >= 64 << 63 {
            return Err(Error::OracleDomain);
        }
        for &x in &raw[..d - 1] {
            if x.unsigned_abs() >= 1 << 125 {
                return Err(Error::OracleDomain);
            }
        }
    }
    Ok(d)
}

/// Depth-first order of the aligned infinite quadtree restricted to the
/// given transformed points, as indices into the input. Duplicate inputs are
/// emitted in input order.
pub fn aligned_dfs_order(vs: &[FixedVector]) -> Result<Vec<usize>> {
    let d = check_domain(vs)?;
    let mut out = Vec::with_capacity(vs.len());
    // the two sides of z̃ = 0 never share a real cell; visit the upper side
    // first (top-child-first at the virtual merge)
    let (pos, neg): (Vec<usize>, Vec<usize>) =
        (0..vs.len()).partition(|&i| vs[i].raw()[d - 1] >= 0);
    for (idxs, s) in [(pos, 0i128), (neg, -64)] {
        if idxs.is_empty() {
            continue;
        }
        // the group is a level-6 cell with z̃ in [s, s + 64); refine the full
        // horizontal span down to this cell's granularity 2^(s + 63)
        let st = State {
            xlo: vec![-(1i128 << 126); d - 1],
            xsz: 127,
            zlo: s << 63,
            level: 6,
        };
        let target = clamp_size(s + 63 + 63);
        emit_grid(vs, idxs, st, target, &mut out);
    }
    Ok(out)
}

/// Per-cell traversal state: half-open coordinate intervals, every size a
/// power of two of the raw (2^-63-granular) units.
#[derive(Clone)]
struct State {
    xlo: Vec<i128>,
    xsz: u32, // log2 of every horizontal interval size, in raw units
    zlo: i128,
    level: i32, // cell level; z interval size is 2^(level + 63) raw units
}

fn clamp_size(log: i128) -> u32 {
    log.clamp(0, 127) as u32
}

/// Halve every horizontal axis (axis 1 first, low half first) until the
/// interval size reaches `target`, then descend into the cell.
fn emit_grid(vs: &[FixedVector], idxs: Vec<usize>, st: State, target: u32, out: &mut Vec<usize>) {
    if idxs.is_empty() {
        return;
    }
    if st.xsz <= target {
        dfs_cell(vs, idxs, st, out);
        return;
    }
    split_axes(vs, idxs, st, 0, target, out);
}

/// One halving round across the horizontal axes, then back to `emit_grid`.
fn split_axes(
    vs: &[FixedVector],
    idxs: Vec<usize>,
    st: State,
    axis: usize,
    target: u32,
    out: &mut Vec<usize>,
) {
    if idxs.is_empty() {
        return;
    }
    let d1 = st.xlo.len();
    if axis == d1 {
        let mut next = st;
        next.xsz -= 1;
        emit_grid(vs, idxs, next, target, out);
        return;
    }
    let mid = st.xlo[axis] + (1i128 << (st.xsz - 1));
    let (lo, hi): (Vec<usize>, Vec<usize>) =
        idxs.into_iter().partition(|&i| vs[i].raw()[axis] < mid);
    split_axes(vs, lo, st.clone(), axis + 1, target, out);
    let mut hst = st;
    hst.xlo[axis] = mid;
    split_axes(vs, hi, hst, axis + 1, target, out);
}

/// Depth-first traversal of one aligned cell.
fn dfs_cell(vs: &[FixedVector], idxs: Vec<usize>, st: State, out: &mut Vec<usize>) {
    if idxs.len() <= 1 {
        out.extend(idxs);
        return;
    }
    let d1 = st.xlo.len();
    let zsz = st.level + 63; // log2 of the z interval, raw units
    if st.xsz == 0 && zsz <= 0 {
        // identical quantised coordinates; keep input order
        out.extend(idxs);
        return;
    }
    if st.level >= 1 {
        let zmid = st.zlo + (1i128 << (zsz - 1));
        let (top, bottom): (Vec<usize>, Vec<usize>) =
            idxs.into_iter().partition(|&i| vs[i].raw()[d1] >= zmid);
        // top child first; it keeps the parent's horizontal granularity
        let mut tst = st.clone();
        tst.zlo = zmid;
        tst.level -= 1;
        dfs_cell(vs, top, tst, out);
        // the base grid refines to the child schedule before descending
        let mut bst = st;
        bst.level -= 1;
        let s = bst.zlo >> 63;
        let target = clamp_size(s + (1i128 << bst.level) - 1 + 63);
        emit_grid(vs, bottom, bst, target, out);
    } else {
        // split every axis once: x axes in order, then z, low halves first
        split_small(vs, idxs, st, 0, out);
    }
}

/// One `2^d`-way split of a level-`ℓ <= 0` cell, axes in significance order.
fn split_small(vs: &[FixedVector], idxs: Vec<usize>, st: State, axis: usize, out: &mut Vec<usize>) {
    if idxs.is_empty() {
        return;
    }
    let d1 = st.xlo.len();
    if axis < d1 {
        if st.xsz == 0 {
            // single raw value; nothing to split on this axis
            split_small(vs, idxs, st, axis + 1, out);
            return;
        }
        let mid = st.xlo[axis] + (1i128 << (st.xsz - 1));
        let (lo, hi): (Vec<usize>, Vec<usize>) =
            idxs.into_iter().partition(|&i| vs[i].raw()[axis] < mid);
        split_small(vs, lo, st.clone(), axis + 1, out);
        let mut hst = st;
        hst.xlo[axis] = mid;
        split_small(vs, hi, hst, axis + 1, out);
        return;
    }
    // vertical axis, then recurse one level down with all sizes halved
    let zsz = st.level + 63;
    let descend = |vs: &[FixedVector], idxs: Vec<usize>, mut st: State, out: &mut Vec<usize>| {
        st.level -= 1;
        if st.xsz > 0 {
            st.xsz -= 1;
        }
        dfs_cell(vs, idxs, st, out);
    };
    if zsz <= 0 {
        descend(vs, idxs, st, out);
        return;
    }
    let zmid = st.zlo + (1i128 << (zsz - 1));
    let (lo, hi): (Vec<usize>, Vec<usize>) =
        idxs.into_iter().partition(|&i| vs[i].raw()[d1] < zmid);
    descend(vs, lo, st.clone(), out);
    let mut hst = st;
    hst.zlo = zmid;
    descend(vs, hi, hst, out);
}

/// Smallest level in `[LEVEL_FLOOR, lmax]` at which the two points share an
/// aligned cell, by upward scan over explicit cell addresses. `None` if they
/// are still separated at `lmax` (a wall lies between them) or the points
/// coincide.
pub fn common_cell_scan(u: &FixedVector, v: &FixedVector, lmax: i32) -> Result<Option<i32>> {
    if u == v {
        return Ok(None);
    }
    for level in LEVEL_FLOOR..=lmax {
        // deep negative levels under low tiles have sub-quantum horizontal
        // granularity; distinct quantised points cannot first merge there
        let (a, b) = match (infinite_cell_from(u, level), infinite_cell_from(v, level)) {
            (Ok(a), Ok(b)) => (a, b),
            (Err(Error::Unrepresentable(_)), _) | (_, Err(Error::Unrepresentable(_))) => continue,
            (Err(e), _) | (_, Err(e)) => return Err(e),
        };
        if a == b {
            return Ok(Some(level));
        }
    }
    Ok(None)
}
