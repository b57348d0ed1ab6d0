//! The shifted covering family: at most `3d+3` isometries such that every
//! pair of points at distance at most Δ lands, under at least one shift, in
//! an aligned quadtree cell of diameter `O(d sqrt d)` times their distance.
//!
//! Shifts combine three vertical rescalings `sigma_i = 2^(H i/3)` with `D+1`
//! diagonal translations `tau_j = (W j/(D+1)) (1,..,1)`, where `H = 2^L` and
//! `W` are the height and width of a level-`L` cell and `D = 2 floor(d/2)`.

use crate::error::Error;
use crate::geometry::{distance, Isometry, Point};
use crate::lorder::{self, msb_split_index, FixedVector};
use crate::quadtree::{cell_geometry, CellGeometry, LEVEL_FLOOR};
use crate::scalar::Scalar;
use crate::Result;

/// Smallest level `L >= 0` whose cells are guaranteed to inscribe a ball of
/// radius Δ: both `2^L ln 2 >= 2Δ` (height) and `ln(W(L)+1) >= 2Δ` (width),
/// the latter evaluated in the log domain so large levels don't overflow.
pub fn level_for_delta(delta: f64, d: usize) -> i32 {
    assert!(delta > 0.0 && delta.is_finite());
    let need = 2.0 * delta;
    // ln(W+1) >= need  <=>  (2^L - 1) ln 2 - ln sqrt(d-1) >= ln(e^need - 1)
    let rhs = need + (-(-need).exp()).ln_1p();
    let half_log = 0.5 * ((d - 1) as f64).ln();
    let mut level = 0;
    loop {
        let h = (level as f64).exp2();
        if h * std::f64::consts::LN_2 >= need
            && (h - 1.0) * std::f64::consts::LN_2 - half_log >= rhs
        {
            return level;
        }
        level += 1;
    }
}

/// The family of shift isometries for scale Δ in dimension `d`.
#[derive(Debug, Clone)]
pub struct ShiftFamily<S: Scalar> {
    delta: f64,
    level: i32,
    big_d: usize,
    dim: usize,
    shifts: Vec<Isometry<S>>,
}

impl<S: Scalar> ShiftFamily<S> {
    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Scale level `L`.
    pub fn level(&self) -> i32 {
        self.level
    }

    /// Height parameter `H = 2^L`.
    pub fn height(&self) -> f64 {
        (self.level as f64).exp2()
    }

    /// Width parameter `W = 2^(2^L - 1)/sqrt(d-1)`.
    pub fn width(&self) -> f64 {
        (self.height() - 1.0).exp2() / ((self.dim - 1) as f64).sqrt()
    }

    /// `D = 2 floor(d/2)`.
    pub fn big_d(&self) -> usize {
        self.big_d
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The `3(D+1)` shifts, row-major in `(i, j)`.
    pub fn shifts(&self) -> &[Isometry<S>] {
        &self.shifts
    }
}

/// Build the shift family for scale Δ: `shifts[i(D+1)+j] = T(sigma_i, tau_j)`.
pub fn shift_family<S: Scalar>(delta: f64, d: usize) -> Result<ShiftFamily<S>> {
    assert!(d >= 2, "dimension must be at least 2");
    let level = level_for_delta(delta, d);
    let h = (level as f64).exp2();
    let w = (h - 1.0).exp2() / ((d - 1) as f64).sqrt();
    if !w.is_finite() {
        return Err(Error::InvalidCoordinate(format!(
            "scale {delta} needs level-{level} cells, beyond f64"
        )));
    }
    let big_d = 2 * (d / 2);
    let mut shifts = Vec::with_capacity(3 * (big_d + 1));
    for i in 0..3 {
        let sigma = (h * i as f64 / 3.0).exp2();
        if !sigma.is_finite() {
            return Err(Error::InvalidCoordinate(format!("sigma overflow at level {level}")));
        }
        for j in 0..=big_d {
            let t = w * j as f64 / (big_d as f64 + 1.0);
            shifts.push(Isometry::new(
                S::from_f64_c(sigma),
                vec![S::from_f64_c(t); d - 1],
            )?);
        }
    }
    Ok(ShiftFamily { delta, level, big_d, dim: d, shifts })
}

/// Result of a smallest-common-cell query.
#[derive(Debug, Clone, PartialEq)]
pub enum CommonCell {
    /// Identical quantised coordinates: common at every level.
    Every,
    /// Smallest common level (clamped below at `LEVEL_FLOOR`) and its
    /// geometry.
    At(i32, CellGeometry),
    /// A cell wall lies between the points at every level: the quadtree
    /// never merges across `x_i = 0`, `z = 1`, or below-`z=1` widths.
    Separated,
}

/// Smallest aligned-quadtree level at which `shift(p)` and `shift(q)` share a
/// cell, computed from the split indices of the quantised coordinates.
pub fn smallest_common_cell<S: Scalar>(
    shift: &Isometry<S>,
    p: &Point<S>,
    q: &Point<S>,
) -> Result<CommonCell> {
    let u = lorder::transform(&shift.apply(p))?;
    let v = lorder::transform(&shift.apply(q))?;
    Ok(common_cell_transformed(&u, &v))
}

/// As [`smallest_common_cell`], on already-transformed coordinates.
pub fn common_cell_transformed(u: &FixedVector, v: &FixedVector) -> CommonCell {
    assert_eq!(u.dim(), v.dim(), "dimension mismatch");
    if u == v {
        return CommonCell::Every;
    }
    let d1 = u.dim() - 1;
    let (zu, zv) = (u.raw()[d1], v.raw()[d1]);
    let lz = msb_split_index(zu, zv);
    // a split index of 65 means opposite signs, which no real cell merges
    if lz == Some(65) {
        return CommonCell::Separated;
    }
    let mut mx: Option<i32> = None;
    for i in 0..d1 {
        if let Some(l) = msb_split_index(u.raw()[i], v.raw()[i]) {
            if l == 65 {
                return CommonCell::Separated;
            }
            mx = Some(mx.map_or(l, |m: i32| m.max(l)));
        }
    }
    let lz_floor = lz.unwrap_or(i32::MIN);
    let b0 = lorder::floor_value(zu); // equal for both when lz <= 0
    // negative-level candidate: z splits at lz, x at sub-tile granularity
    let neg_candidate = match mx {
        None => lz_floor.max(LEVEL_FLOOR),
        Some(m) => {
            let need = (m as i128) - b0; // smallest ℓ with m <= b0 + ℓ
            let need = need.clamp(i32::MIN as i128, i32::MAX as i128) as i32;
            need.max(lz_floor).max(LEVEL_FLOOR)
        }
    };
    if neg_candidate <= 0 {
        return at(neg_candidate, zu, d1 + 1);
    }
    // nonnegative levels: scan for the smallest ℓ with a wide-enough L*
    let start = lz.unwrap_or(0).max(1);
    let mx = mx.unwrap_or(i32::MIN) as i128;
    for level in start..=64 {
        let s = lorder::aligned_start(zu, level);
        let l_star = s + (1i128 << level) - 1;
        if l_star >= mx {
            return at(level, zu, d1 + 1);
        }
        if s == -(1i128 << level) {
            // below z = 1 the width schedule has converged; it will never
            // reach the horizontal split
            return CommonCell::Separated;
        }
    }
    CommonCell::Separated
}

fn at(level: i32, zraw: i128, d: usize) -> CommonCell {
    let alpha = if level < 0 {
        // alpha = 2^-(f) with f the offset of the cell's base above its tile
        let shift = (63 + level) as u32;
        let start = (lorder::dyadic_index(zraw, level) << shift) as i128;
        let tile = (lorder::dyadic_index(zraw, 0) << 63) as i128;
        let f = (start - tile) as f64 * (-63f64).exp2();
        (-f).exp2()
    } else {
        1.0
    };
    CommonCell::At(level, cell_geometry(level, alpha, d))
}

/// `min` over the family of the common-cell diameter, divided by the pair's
/// distance. Infinite if every shift leaves a wall between the points.
///
/// The covering guarantee is height-dependent: the fixed translations act at
/// the scale of cells near `z = 1`, so the bound holds for pairs with
/// `log2 z < 2^L/3` (anything below `z = 1` is always fine). Far above that
/// band, cell widths outgrow the translations and a pair straddling a deep
/// wall can be separated under every shift.
pub fn covering_ratio<S: Scalar>(
    family: &ShiftFamily<S>,
    p: &Point<S>,
    q: &Point<S>,
) -> Result<f64> {
    let dist = distance(p, q)?.as_f64();
    if dist == 0.0 {
        return Err(Error::CoincidentPoints);
    }
    if dist > family.delta() {
        return Err(Error::PairBeyondDelta { dist, delta: family.delta() });
    }
    let mut best = f64::INFINITY;
    for shift in family.shifts() {
        let diam = match smallest_common_cell(shift, p, q)? {
            CommonCell::Every => 0.0,
            CommonCell::At(_, g) => g.diameter(),
            CommonCell::Separated => continue,
        };
        best = best.min(diam / dist);
    }
    Ok(best)
}

/// One-dimensional shift lemma witness: a shift `sigma` in {0, 1/3, 2/3}
/// such that `p + sigma` and `q + sigma` lie in a common dyadic interval of
/// length `< 3|p - q|` with the smaller point in its lower third.
pub fn one_dim_shift_witness(p: f64, q: f64) -> Option<f64> {
    if p == q {
        return Some(0.0);
    }
    let gap = (p - q).abs();
    for k in 0..3 {
        let sigma = k as f64 / 3.0;
        let (a, b) = (p.min(q) + sigma, p.max(q) + sigma);
        // smallest dyadic interval containing both; [0, 2) covers the
        // shifted range of unit-interval inputs
        let mut len = 2.0f64;
        let mut start = 0.0f64;
        loop {
            let half = len / 2.0;
            let mid = start + half;
            if a >= mid {
                start = mid;
            } else if b < mid {
                // keep the lower half
            } else {
                break;
            }
            len = half;
            if len < f64::EPSILON {
                break;
            }
        }
        if len < 3.0 * gap && a - start < len / 3.0 {
            return Some(sigma);
        }
    }
    None
}

/// Centrality lemma witness: a shift index `j` in `{0,..,d}` such that every
/// coordinate of `x + (j r/(d+1)) (1,..,1)` keeps distance at least
/// `r/(2d+2)` from the boundary of its length-`r` grid cell.
pub fn centrality_witness(x: &[f64], r: f64) -> Option<usize> {
    let d = x.len();
    let margin = r / (2.0 * d as f64 + 2.0);
    for j in 0..=d {
        let delta = r * j as f64 / (d as f64 + 1.0);
        let ok = x.iter().all(|&xi| {
            let t = (xi + delta).rem_euclid(r);
            t.min(r - t) >= margin - 1e-9 * r
        });
        if ok {
            return Some(j);
        }
    }
    None
}
