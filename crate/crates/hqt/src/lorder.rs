//! The L-order comparator.
//!
//! Points are transformed to `(x̃, z̃) = (x·sqrt(d-1), log₂ z)` and quantised
//! into signed fixed-point with 64 integer and 63 fractional bits. In these
//! coordinates the aligned infinite quadtree has dyadic cell boundaries, so
//! the depth-first visiting order of two points can be decided with a handful
//! of exclusive-ors and shifts: find the coarsest axis on which the points
//! separate, then order along that axis.
//!
//! Conventions (fixed once, shared with the traversal oracle):
//! * A cell split by a horosphere emits its top child first, so along the
//!   vertical axis *larger* `z̃` comes first.
//! * Horizontal splits emit the lower half first; ties between axes go to the
//!   lowest axis index, with the vertical axis last.
//! * Sign boundaries (`x_i = 0`, `z̃ = 0`) never merge in the quadtree; the
//!   biased (offset-binary) encoding below extends the dyadic index scheme
//!   across them consistently, so the order is total over the whole space.

use std::cmp::Ordering;

use crate::error::Error;
use crate::geometry::{Isometry, Point};
use crate::scalar::Scalar;
use crate::Result;

/// Fractional bits of the fixed-point encoding.
pub const FRAC_BITS: u32 = 63;

/// Transformed, quantised coordinates of a point: `d` signed fixed-point
/// values `(x_1 sqrt(d-1), .., x_{d-1} sqrt(d-1), log₂ z)`, each with 64
/// integer and 63 fractional bits.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FixedVector {
    raw: Vec<i128>,
}

impl FixedVector {
    /// Raw fixed-point words; the last entry is the vertical coordinate.
    pub fn raw(&self) -> &[i128] {
        &self.raw
    }

    /// Ambient dimension `d`.
    pub fn dim(&self) -> usize {
        self.raw.len()
    }

    /// Quantise one scalar; monotone, error at most `2^-64`.
    pub fn encode(v: f64) -> Result<i128> {
        if !v.is_finite() || v.abs() >= (63f64).exp2() {
            return Err(Error::Unrepresentable(v));
        }
        Ok((v * (63f64).exp2()).round() as i128)
    }

    /// Real value of one fixed-point word.
    pub fn decode(r: i128) -> f64 {
        r as f64 * (-63f64).exp2()
    }
}

/// Offset-binary view: flipping the sign bit makes unsigned comparison and
/// unsigned shifts agree with arithmetic (floor) semantics on the values.
pub(crate) fn biased(raw: i128) -> u128 {
    (raw as u128) ^ (1u128 << 127)
}

/// Index of the dyadic interval of length `2^level` containing the value,
/// in the biased convention (so indices are comparable across signs).
///
/// For `level <= -63` the quantum is finer than the encoding and the biased
/// word itself serves as an (equality-equivalent) index.
pub(crate) fn dyadic_index(raw: i128, level: i32) -> u128 {
    let shift = 63 + level;
    if shift >= 128 {
        0
    } else if shift <= 0 {
        biased(raw)
    } else {
        biased(raw) >> shift
    }
}

/// `floor(value / 2^level) * 2^level` in real units, biased convention.
/// Only meaningful for `0 <= level <= 65`.
pub(crate) fn aligned_start(raw: i128, level: i32) -> i128 {
    debug_assert!((0..=65).contains(&level));
    ((dyadic_index(raw, level) as i128) << level) - (1i128 << 64)
}

/// `floor(value)` of a fixed-point word.
pub(crate) fn floor_value(raw: i128) -> i128 {
    aligned_start(raw, 0)
}

/// `log₂ z`, exact whenever `z` is a power of two.
fn log2_exact(z: f64) -> f64 {
    debug_assert!(z > 0.0 && z.is_finite());
    let bits = z.to_bits();
    if z.is_normal() && bits & ((1u64 << 52) - 1) == 0 {
        ((bits >> 52) as i64 - 1023) as f64
    } else {
        z.log2()
    }
}

/// Transform a point into quantised `(x·sqrt(d-1), log₂ z)` coordinates.
pub fn transform<S: Scalar>(p: &Point<S>) -> Result<FixedVector> {
    let d1 = p.dim() - 1;
    let scale = (d1 as f64).sqrt();
    let mut raw = Vec::with_capacity(d1 + 1);
    for &xi in p.x() {
        raw.push(FixedVector::encode(xi.as_f64() * scale)?);
    }
    raw.push(FixedVector::encode(log2_exact(p.z().as_f64()))?);
    Ok(FixedVector { raw })
}

/// `L(a, b)`: the smallest level `k` such that `a` and `b` lie in the same
/// dyadic interval of length `2^k` (equivalently `floor(a/2^k) = floor(b/2^k)`
/// in the biased convention). `None` for equal inputs, standing in for the
/// `-inf` sentinel: equal values share every interval.
pub fn msb_split_index(a: i128, b: i128) -> Option<i32> {
    if a == b {
        return None;
    }
    let x = (a ^ b) as u128;
    // highest differing bit h (0-based); floors agree iff 63 + k > h
    Some(127 - x.leading_zeros() as i32 - 63 + 1)
}

/// Euclidean Z-order on fixed-point words: order by the coordinate whose
/// split level is highest, ties to the lowest axis index.
pub fn zorder_compare(u: &[i128], v: &[i128]) -> Ordering {
    assert_eq!(u.len(), v.len(), "zorder on slices of different length");
    let mut best: Option<(i32, usize)> = None;
    for i in 0..u.len() {
        if let Some(l) = msb_split_index(u[i], v[i]) {
            if best.map_or(true, |(bl, _)| l > bl) {
                best = Some((l, i));
            }
        }
    }
    match best {
        None => Ordering::Equal,
        Some((_, i)) => u[i].cmp(&v[i]),
    }
}

/// Compare two transformed points in L-order. `Less` means the first point
/// is visited earlier by the depth-first traversal of the aligned quadtree.
pub fn compare_transformed(u: &FixedVector, v: &FixedVector) -> Ordering {
    assert_eq!(u.raw.len(), v.raw.len(), "dimension mismatch");
    let d1 = u.raw.len() - 1;
    let (zu, zv) = (u.raw[d1], v.raw[d1]);
    let lz = msb_split_index(zu, zv);

    if lz.map_or(true, |l| l <= 0) {
        // Same unit z-slab, hence the same tile base b = floor(z̃).
        let b = floor_value(zu);
        let same_tile = (0..d1).all(|i| {
            msb_split_index(u.raw[i], v.raw[i]).map_or(true, |l| l as i128 <= b)
        });
        if same_tile {
            // Inside one tile the sub-quadtree is an ordinary dyadic grid,
            // except the horizontal extent at sub-level ℓ is 2^(b+ℓ) while
            // the vertical extent is 2^ℓ. Normalising by b gives each axis an
            // effective split level; the coarsest one decides. Ties go to the
            // lowest x axis; the vertical axis is least significant.
            let mut best: Option<(i128, usize)> = None;
            for i in 0..d1 {
                if let Some(l) = msb_split_index(u.raw[i], v.raw[i]) {
                    let e = l as i128 - b;
                    if best.map_or(true, |(be, _)| e > be) {
                        best = Some((e, i));
                    }
                }
            }
            if let Some(l) = lz {
                if best.map_or(true, |(be, _)| (l as i128) > be) {
                    best = Some((l as i128, d1));
                }
            }
            match best {
                None => Ordering::Equal,
                Some((_, axis)) => u.raw[axis].cmp(&v.raw[axis]),
            }
        } else {
            // Same z-slab, different tiles: the common ancestor is split by
            // vertical hyperplanes only.
            zorder_compare(&u.raw[..d1], &v.raw[..d1])
        }
    } else {
        let lz = lz.unwrap(); // >= 1
        // Smallest common z-range: starts at s = floor(z̃ / 2^lz) · 2^lz and
        // has horizontal cells of dyadic size 2^(L*), L* = s + 2^lz - 1.
        let s = aligned_start(zu, lz);
        let l_star = s + (1i128 << lz) - 1;
        let same_cell = (0..d1).all(|i| {
            msb_split_index(u.raw[i], v.raw[i]).map_or(true, |l| l as i128 <= l_star)
        });
        if same_cell {
            // Split by a horosphere: the top child is visited first.
            zv.cmp(&zu)
        } else {
            zorder_compare(&u.raw[..d1], &v.raw[..d1])
        }
    }
}

/// L-order comparison of two points of the same dimension.
pub fn lorder_compare<S: Scalar>(p: &Point<S>, q: &Point<S>) -> Result<Ordering> {
    if p.dim() != q.dim() {
        return Err(Error::DimensionMismatch(p.dim(), q.dim()));
    }
    Ok(compare_transformed(&transform(p)?, &transform(q)?))
}

/// L-order after applying the shift isometry `s` to both points.
pub fn shifted_compare<S: Scalar>(
    s: &Isometry<S>,
    p: &Point<S>,
    q: &Point<S>,
) -> Result<Ordering> {
    lorder_compare(&s.apply(p), &s.apply(q))
}
