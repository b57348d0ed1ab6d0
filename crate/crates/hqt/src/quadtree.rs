//! Hyperbolic quadtrees: finite construction over a point set, aligned
//! infinite-quadtree cell addressing, and per-level cell geometry.
//!
//! Two distinct trees appear here and must not be confused:
//!
//! * the *finite* quadtree of [`build`], whose root hugs the bounding box of
//!   the input and is generally not aligned to anything, and
//! * the *aligned infinite* quadtree addressed by [`infinite_cell`], whose
//!   level-ℓ cells have base height `2^(b·2^ℓ)` and horizontal boundaries at
//!   multiples of `2^(b·2^ℓ + 2^ℓ - 1)` in `x·sqrt(d-1)` coordinates.
//!
//! The ordering machinery (`lorder`, `cover`) works exclusively with the
//! aligned tree; the finite tree is the data structure built over `P`.

use std::collections::HashSet;

use crate::error::Error;
use crate::geometry::{minimum_bounding_horobox, Horobox, Point};
use crate::lorder::{self, FixedVector};
use crate::scalar::{arsinh, arsinh_exp2, exp2_m1, Scalar};
use crate::Result;

/// Deepest level the finite construction will descend to; points that are not
/// separated by then are indistinguishable at double precision.
pub const LEVEL_FLOOR: i32 = -60;

/// Cap on the number of children [`subdivide`] will enumerate eagerly.
const SUBDIVIDE_CAP: u128 = 1 << 20;

/// Address of a cell of the aligned infinite quadtree.
///
/// For `level >= 0` the cell is `(a, b)` directly. For `level < 0`, `(a, b)`
/// address the enclosing level-0 tile and `sub` lists the child indices
/// (each in `[0, 2^d)`, horizontal axes first, vertical bit last) taken on
/// the way down; `sub.len() == -level`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CellAddress {
    level: i32,
    a: Vec<i128>,
    b: i128,
    sub: Vec<u32>,
}

impl CellAddress {
    pub fn level(&self) -> i32 {
        self.level
    }

    pub fn a(&self) -> &[i128] {
        &self.a
    }

    pub fn b(&self) -> i128 {
        self.b
    }

    pub fn sub(&self) -> &[u32] {
        &self.sub
    }

    /// Ambient dimension.
    pub fn dim(&self) -> usize {
        self.a.len() + 1
    }

    /// Width parameter `alpha`: 1 at nonnegative levels, otherwise determined
    /// by the vertical offset of the cell within its tile.
    pub fn alpha(&self) -> f64 {
        let mut f = 0.0;
        for (k, &c) in self.sub.iter().enumerate() {
            if c & 1 == 1 {
                f += (-(k as f64 + 1.0)).exp2();
            }
        }
        (-f).exp2()
    }

    /// Geometry (width, height, alpha, diameter) of this cell.
    pub fn geometry(&self) -> CellGeometry {
        cell_geometry(self.level, self.alpha(), self.dim())
    }

    /// The cell as a concrete horobox, when representable in `f64`.
    pub fn horobox(&self) -> Result<Horobox<f64>> {
        let d1 = self.a.len();
        let scale = (d1 as f64).sqrt();
        if self.level >= 0 {
            let s = self
                .b
                .checked_shl(self.level as u32)
                .ok_or(Error::Unrepresentable(self.b as f64))?;
            let l_star = s + (1i128 << self.level.min(126)) - 1;
            let z = (s as f64).exp2();
            let w = ((self.level as f64).exp2() - 1.0).exp2() / scale;
            let x = self
                .a
                .iter()
                .map(|&ai| ai as f64 * (l_star as f64).exp2() / scale)
                .collect();
            let b = Horobox::new(x, z, w, (self.level as f64).exp2())?;
            return Ok(b);
        }
        // descend from the level-0 tile
        let z0 = (self.b as f64).exp2();
        let mut x: Vec<f64> = self
            .a
            .iter()
            .map(|&ai| ai as f64 * (self.b as f64).exp2() / scale)
            .collect();
        let mut z = z0;
        let mut h = 1.0f64;
        let mut w = 1.0 / scale; // relative width of a level-0 tile
        let d = d1 + 1;
        for &c in &self.sub {
            let side = z * w;
            for (i, xi) in x.iter_mut().enumerate() {
                if c >> (d - 1 - i) & 1 == 1 {
                    *xi += side / 2.0;
                }
            }
            let zmid = z * (h / 2.0).exp2();
            if c & 1 == 1 {
                w = side / 2.0 / zmid;
                z = zmid;
            } else {
                w /= 2.0;
            }
            h /= 2.0;
        }
        Horobox::new(x, z, w, h)
    }
}

/// Exact width/height schedule of a quadtree cell at a given level.
#[derive(Debug, Clone, PartialEq)]
pub struct CellGeometry {
    level: i32,
    width: f64,
    height: f64,
    alpha: f64,
    dim: usize,
}

impl CellGeometry {
    pub fn level(&self) -> i32 {
        self.level
    }

    /// Width parameter `w`; may overflow to infinity at extreme levels, in
    /// which case use [`CellGeometry::diameter`] which works in the log
    /// domain.
    pub fn width(&self) -> f64 {
        self.width
    }

    /// Height parameter `h = 2^level`.
    pub fn height(&self) -> f64 {
        self.height
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Hyperbolic diameter of the cell.
    pub fn diameter(&self) -> f64 {
        level_diameter(self.level, self.alpha)
    }
}

/// Geometry of a level-`level` cell with width parameter `alpha` (ignored,
/// and reported as 1, for nonnegative levels).
pub fn cell_geometry(level: i32, alpha: f64, d: usize) -> CellGeometry {
    let scale = ((d - 1) as f64).sqrt();
    let height = (level as f64).exp2();
    let (width, alpha) = if level >= 0 {
        ((height - 1.0).exp2() / scale, 1.0)
    } else {
        debug_assert!(alpha > 0.5 && alpha <= 1.0, "alpha = {alpha}");
        (alpha * height / scale, alpha)
    };
    CellGeometry { level, width, height, alpha, dim: d }
}

/// Diameter of a level-`level` cell, valid far beyond `f64`'s range for the
/// width itself. Independent of the dimension.
fn level_diameter(level: i32, alpha: f64) -> f64 {
    if level >= 0 {
        // 2 arsinh(2^(2^ℓ - 2))
        2.0 * arsinh_exp2((level as f64).exp2() - 2.0)
    } else {
        let h = (level as f64).exp2(); // 2^ℓ
        let q = exp2_m1(h); // 2^(2^ℓ) - 1
        let num = alpha * alpha * (2.0 * level as f64).exp2() + q * q;
        2.0 * arsinh(0.5 * (num / h.exp2()).sqrt())
    }
}

/// Ratio `diameter(child at level-1, alpha') / diameter(parent, alpha)`.
pub fn child_diameter_ratio(level: i32, alpha: f64, alpha_prime: f64) -> f64 {
    level_diameter(level - 1, alpha_prime) / level_diameter(level, alpha)
}

/// Inscribed-ball over circumscribed-ball diameter bound: the inscribed ball
/// touches either the top/bottom horospheres (diameter `h ln 2`) or the side
/// hyperplanes (diameter `ln(w+1)`).
pub fn fatness(g: &CellGeometry) -> f64 {
    let vertical = g.height * std::f64::consts::LN_2;
    let horizontal = if g.width.is_finite() {
        g.width.ln_1p()
    } else {
        // ln(w + 1) ~ ln w for the overflowing widths of large levels
        let e = (g.level as f64).exp2() - 1.0;
        std::f64::consts::LN_2 * e - 0.5 * ((g.dim - 1) as f64).ln()
    };
    vertical.min(horizontal) / (2.0 * g.diameter())
}

/// Number of children of a level-`level` cell: `2^d` in the `h <= 1` regime,
/// one top child plus a `2^(2^(ℓ-1))`-per-axis grid above it.
pub fn child_count(level: i32, d: usize) -> Result<u128> {
    if level <= 0 {
        if d >= 128 {
            return Err(Error::CountOverflow(format!("2^{d} children")));
        }
        Ok(1u128 << d)
    } else {
        let bits = (1u128 << (level - 1).min(126)) * (d as u128 - 1);
        if level - 1 > 126 || bits >= 128 {
            return Err(Error::CountOverflow(format!(
                "level {level} grid needs 2^{bits} children"
            )));
        }
        Ok((1u128 << bits) + 1)
    }
}

/// Signed dyadic index `floor(v / 2^level)` of a fixed-point word, sharing
/// floor semantics with the comparator. Levels at or above 65 see every
/// representable value in the interval adjoining zero.
fn floor_index(raw: i128, level: i128) -> Result<i128> {
    if level >= 65 {
        Ok(if raw < 0 { -1 } else { 0 })
    } else if level >= -62 {
        let shift = (63 + level) as u32;
        Ok((lorder::dyadic_index(raw, level as i32) as i128) - (1i128 << (127 - shift)))
    } else {
        Err(Error::Unrepresentable(FixedVector::decode(raw)))
    }
}

/// Address of the level-`level` cell of the aligned infinite quadtree
/// containing `p`. Requires `level >= LEVEL_FLOOR` and coordinates within the
/// quantisable range.
pub fn infinite_cell<S: Scalar>(p: &Point<S>, level: i32) -> Result<CellAddress> {
    assert!(level >= LEVEL_FLOOR, "level {level} below the floor");
    let v = lorder::transform(p)?;
    infinite_cell_from(&v, level)
}

/// As [`infinite_cell`], from already-transformed coordinates.
pub fn infinite_cell_from(v: &FixedVector, level: i32) -> Result<CellAddress> {
    let raw = v.raw();
    let d1 = raw.len() - 1;
    let zraw = raw[d1];
    if level >= 0 {
        let b = floor_index(zraw, level as i128)?;
        let s = b << level.min(126);
        let l_star = s + (1i128 << level.min(126)) - 1;
        let a = (0..d1)
            .map(|i| floor_index(raw[i], l_star))
            .collect::<Result<Vec<_>>>()?;
        return Ok(CellAddress { level, a, b, sub: Vec::new() });
    }
    // enclosing tile, then the recorded child path
    let b0 = floor_index(zraw, 0)?;
    let a = (0..d1)
        .map(|i| floor_index(raw[i], b0))
        .collect::<Result<Vec<_>>>()?;
    let d = d1 + 1;
    let mut sub = Vec::with_capacity((-level) as usize);
    for k in 1..=(-level) as i128 {
        let zbit = (floor_index(zraw, -k)? & 1) as u32;
        let mut c = zbit;
        for i in 0..d1 {
            let xbit = (floor_index(raw[i], b0 - k)? & 1) as u32;
            c |= xbit << (d - 1 - i);
        }
        sub.push(c);
    }
    Ok(CellAddress { level, a, b: b0, sub })
}

/// Regime of the finite quadtree's root, per the two cases of the
/// construction: a small point set fits a plain `2^ℓ`-width box, otherwise
/// the root follows the level width schedule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RootRegime {
    Small,
    Large,
}

/// Root cell of the finite quadtree: the smallest schedule box at the
/// bounding corner of `P` that contains every point.
pub fn root_cell<S: Scalar>(points: &[Point<S>]) -> Result<(Horobox<S>, i32, RootRegime)> {
    let bb = minimum_bounding_horobox(points)?;
    let d1 = bb.dim() - 1;
    let scale = S::from_f64_c((d1 as f64).sqrt());
    let w = bb.w();
    let h = bb.h();
    let small = w * scale <= S::one() && h <= S::one();
    let contains_all = |cell: &Horobox<S>| -> Result<bool> {
        for p in points {
            if !cell.contains(p)? {
                return Ok(false);
            }
        }
        Ok(true)
    };
    if small {
        let mut level = (w * scale).as_f64().log2().max(h.as_f64().log2()).ceil() as i32;
        loop {
            let side = S::from_f64_c((level as f64).exp2());
            let cell = Horobox::new(bb.x().to_vec(), bb.z(), side / scale, side)?;
            if contains_all(&cell)? {
                return Ok((cell, level, RootRegime::Small));
            }
            level += 1;
            if level > 0 {
                break; // boundary growth pushed us out of the small case
            }
        }
    }
    let mut level = 0;
    loop {
        let height = (level as f64).exp2();
        let width = (height - 1.0).exp2();
        if !width.is_finite() {
            return Err(Error::InvalidCoordinate(format!(
                "point spread needs a level-{level} root, beyond f64"
            )));
        }
        let cell = Horobox::new(
            bb.x().to_vec(),
            bb.z(),
            S::from_f64_c(width) / scale,
            S::from_f64_c(height),
        )?;
        if contains_all(&cell)? {
            return Ok((cell, level, RootRegime::Large));
        }
        level += 1;
    }
}

/// Children of a cell, in emission (traversal) order.
///
/// In the `h <= 1` regime the cell splits into `2^d` halves; children are
/// emitted in Z-order of the child index with axis 1 most significant and
/// the vertical bit least significant (so the lower half of every axis comes
/// first). In the `h > 1` regime the top child is emitted first, followed by
/// the base grid in Z-order of the grid index. Fails with `CountOverflow`
/// if the grid is too large to enumerate.
pub fn subdivide<S: Scalar>(cell: &Horobox<S>) -> Result<Vec<Horobox<S>>> {
    let d = cell.dim();
    let h = cell.h().as_f64();
    let side = cell.euclidean_width();
    let half = S::from_f64_c((h / 2.0).exp2());
    let zmid = cell.z() * half;
    if h <= 1.0 {
        let mut out = Vec::with_capacity(1 << d);
        for r in 0..(1u32 << d) {
            let x = (0..d - 1)
                .map(|i| {
                    if r >> (d - 1 - i) & 1 == 1 {
                        cell.x()[i] + side / S::from_f64_c(2.0)
                    } else {
                        cell.x()[i]
                    }
                })
                .collect();
            let (z, w) = if r & 1 == 1 {
                (zmid, side / S::from_f64_c(2.0) / zmid)
            } else {
                (cell.z(), cell.w() / S::from_f64_c(2.0))
            };
            out.push(Horobox::new(x, z, w, cell.h() / S::from_f64_c(2.0))?);
        }
        return Ok(out);
    }
    // top child, then the base grid
    let m = (h / 2.0).exp2(); // children per horizontal axis
    let count = 1u128
        .checked_shl(((h / 2.0) * (d as f64 - 1.0)) as u32)
        .filter(|&c| c <= SUBDIVIDE_CAP)
        .ok_or_else(|| Error::CountOverflow(format!("{m}^{} grid children", d - 1)))?;
    let mut out = Vec::with_capacity(count as usize + 1);
    out.push(Horobox::new(
        cell.x().to_vec(),
        zmid,
        cell.w() / half,
        cell.h() / S::from_f64_c(2.0),
    )?);
    let bits_per_axis = (h / 2.0) as u32; // log2(m); h = 2^ℓ with ℓ >= 1
    let step = side / S::from_f64_c(m);
    for mc in 0..count {
        let x = (0..d - 1)
            .map(|i| {
                let mut c = 0u128;
                for p in 0..bits_per_axis {
                    c |= (mc >> (p as usize * (d - 1) + (d - 2 - i)) & 1) << p;
                }
                cell.x()[i] + S::from_f64_c(c as f64) * step
            })
            .collect();
        out.push(Horobox::new(
            x,
            cell.z(),
            cell.w() / S::from_f64_c(m),
            cell.h() / S::from_f64_c(2.0),
        )?);
    }
    Ok(out)
}

/// One node of the finite quadtree.
#[derive(Debug)]
pub struct Node<S: Scalar> {
    cell: Horobox<S>,
    level: i32,
    children: Vec<Node<S>>,
    point: Option<usize>,
}

impl<S: Scalar> Node<S> {
    pub fn cell(&self) -> &Horobox<S> {
        &self.cell
    }

    pub fn level(&self) -> i32 {
        self.level
    }

    pub fn children(&self) -> &[Node<S>] {
        &self.children
    }

    /// Index into the tree's point set, for occupied leaves.
    pub fn point(&self) -> Option<usize> {
        self.point
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    fn subtree_points(&self, out: &mut Vec<usize>) {
        if let Some(i) = self.point {
            out.push(i);
        }
        for c in &self.children {
            c.subtree_points(out);
        }
    }
}

/// The finite hyperbolic quadtree over a distinct point set.
#[derive(Debug)]
pub struct Quadtree<S: Scalar> {
    root: Node<S>,
    regime: RootRegime,
    points: Vec<Point<S>>,
}

impl<S: Scalar> Quadtree<S> {
    pub fn root(&self) -> &Node<S> {
        &self.root
    }

    pub fn regime(&self) -> RootRegime {
        self.regime
    }

    pub fn points(&self) -> &[Point<S>] {
        &self.points
    }

    /// Point indices in depth-first (emission-order) traversal.
    pub fn dfs_order(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.points.len());
        self.root.subtree_points(&mut out);
        out
    }
}

/// Build the quadtree over `points`, subdividing until every leaf holds at
/// most one point. Duplicates and unseparable near-duplicates are errors.
pub fn build<S: Scalar>(points: &[Point<S>]) -> Result<Quadtree<S>> {
    let mut seen = HashSet::new();
    for p in points {
        if !seen.insert(p.key()) {
            return Err(Error::DuplicatePoint);
        }
    }
    let (cell, level, regime) = root_cell(points)?;
    let idxs: Vec<usize> = (0..points.len()).collect();
    let root = build_node(points, idxs, cell, level)?;
    Ok(Quadtree { root, regime, points: points.to_vec() })
}

fn build_node<S: Scalar>(
    points: &[Point<S>],
    idxs: Vec<usize>,
    cell: Horobox<S>,
    level: i32,
) -> Result<Node<S>> {
    debug_assert!(idxs.iter().all(|&i| cell.contains(&points[i]).unwrap()));
    if idxs.len() <= 1 {
        return Ok(Node { cell, level, children: Vec::new(), point: idxs.first().copied() });
    }
    if level <= LEVEL_FLOOR {
        return Err(Error::DepthFloorReached(level));
    }
    let d = cell.dim();
    let h = cell.h().as_f64();
    let side = cell.euclidean_width();
    let half = S::from_f64_c((h / 2.0).exp2());
    let zmid = cell.z() * half;
    let two = S::from_f64_c(2.0);
    let mut children = Vec::new();
    if h <= 1.0 {
        // group by the d membership bits, in emission order
        let mut groups: Vec<Vec<usize>> = vec![Vec::new(); 1 << d];
        for &i in &idxs {
            let p = &points[i];
            let mut r = if p.z() >= zmid { 1u32 } else { 0 };
            for (ax, &lo) in cell.x().iter().enumerate() {
                if p.x()[ax] >= lo + side / two {
                    r |= 1 << (d - 1 - ax);
                }
            }
            groups[r as usize].push(i);
        }
        for (r, group) in groups.into_iter().enumerate() {
            if group.is_empty() {
                continue;
            }
            let x = (0..d - 1)
                .map(|i| {
                    if r >> (d - 1 - i) & 1 == 1 {
                        cell.x()[i] + side / two
                    } else {
                        cell.x()[i]
                    }
                })
                .collect();
            let (z, w) = if r & 1 == 1 {
                (zmid, side / two / zmid)
            } else {
                (cell.z(), cell.w() / two)
            };
            let child = Horobox::new(x, z, w, cell.h() / two)?;
            children.push(build_node(points, group, child, level - 1)?);
        }
    } else {
        let (top, bottom): (Vec<usize>, Vec<usize>) =
            idxs.into_iter().partition(|&i| points[i].z() >= zmid);
        if !top.is_empty() {
            let child = Horobox::new(
                cell.x().to_vec(),
                zmid,
                cell.w() / half,
                cell.h() / two,
            )?;
            children.push(build_node(points, top, child, level - 1)?);
        }
        if !bottom.is_empty() {
            let halvings = (h / 2.0) as u32; // grid is 2^(h/2) per axis
            build_grid(
                points,
                bottom,
                cell.x().to_vec(),
                cell.z(),
                cell.w(),
                cell.h() / two,
                halvings,
                level - 1,
                &mut children,
            )?;
        }
    }
    Ok(Node { cell, level, children, point: None })
}

/// Recursive bisection of the base grid: one bit level splits every
/// horizontal axis in half (axis 1 first), which visits nonempty grid cells
/// in Z-order without enumerating the full grid.
#[allow(clippy::too_many_arguments)]
fn build_grid<S: Scalar>(
    points: &[Point<S>],
    idxs: Vec<usize>,
    x: Vec<S>,
    z: S,
    w: S,
    child_h: S,
    halvings: u32,
    level: i32,
    out: &mut Vec<Node<S>>,
) -> Result<()> {
    if halvings == 0 {
        let cell = Horobox::new(x, z, w, child_h)?;
        out.push(build_node(points, idxs, cell, level)?);
        return Ok(());
    }
    let d1 = x.len();
    let side = z * w;
    let two = S::from_f64_c(2.0);
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); 1 << d1];
    for &i in &idxs {
        let p = &points[i];
        let mut r = 0u32;
        for (ax, &lo) in x.iter().enumerate() {
            if p.x()[ax] >= lo + side / two {
                r |= 1 << (d1 - 1 - ax);
            }
        }
        groups[r as usize].push(i);
    }
    for (r, group) in groups.into_iter().enumerate() {
        if group.is_empty() {
            continue;
        }
        let sub_x = (0..d1)
            .map(|i| {
                if r >> (d1 - 1 - i) & 1 == 1 {
                    x[i] + side / two
                } else {
                    x[i]
                }
            })
            .collect();
        build_grid(points, group, sub_x, z, w / two, child_h, halvings - 1, level, out)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::distance;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn pt(x: &[f64], z: f64) -> Point<f64> {
        Point::new(x.to_vec(), z).unwrap()
    }

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn random_point(r: &mut ChaCha8Rng, d: usize) -> Point<f64> {
        let x: Vec<f64> = (0..d - 1).map(|_| r.gen_range(-8.0..8.0)).collect();
        let z = (r.gen_range(-4.0..4.0) as f64).exp2();
        Point::new(x, z).unwrap()
    }

    #[test]
    fn root_cell_small_case() {
        // fits a level-0 box exactly
        let p = [pt(&[0.0], 1.0), pt(&[0.9], 1.9)];
        let (cell, level, regime) = root_cell(&p).unwrap();
        assert_eq!(level, 0);
        assert_eq!(regime, RootRegime::Small);
        assert_eq!(cell.w(), 1.0);
        assert_eq!(cell.h(), 1.0);
        // tiny spread: negative root level
        let q = [pt(&[0.0], 1.0), pt(&[0.1], 1.05)];
        let (_, level, regime) = root_cell(&q).unwrap();
        assert!(level < 0);
        assert_eq!(regime, RootRegime::Small);
    }

    #[test]
    fn root_cell_large_case() {
        // d=2 bounding box w=3, h=1.5: smallest level with 3 <= 2^(2^ℓ - 1)
        // and 1.5 <= 2^ℓ is 2
        let p = [pt(&[0.0], 1.0), pt(&[3.0 - 1e-9], 2f64.powf(1.5) - 1e-9)];
        let (cell, level, regime) = root_cell(&p).unwrap();
        assert_eq!(level, 2);
        assert_eq!(regime, RootRegime::Large);
        assert_eq!(cell.w(), 8.0);
        assert_eq!(cell.h(), 4.0);
    }

    #[test]
    fn root_contains_all_points() {
        let mut r = rng(20);
        for _ in 0..100 {
            let d = r.gen_range(2..5);
            let pts: Vec<_> = (0..r.gen_range(1..30)).map(|_| random_point(&mut r, d)).collect();
            let (cell, _, _) = root_cell(&pts).unwrap();
            for p in &pts {
                assert!(cell.contains(p).unwrap());
            }
        }
    }

    #[test]
    fn subdivide_counts() {
        // d=2, level 1 (h=2): 1 top + 2 bottom
        let c = Horobox::new(vec![0.0], 1.0, 2.0, 2.0).unwrap();
        assert_eq!(subdivide(&c).unwrap().len(), 3);
        // d=2, level 2 (h=4): 1 + 4
        let c = Horobox::new(vec![0.0], 1.0, 8.0, 4.0).unwrap();
        assert_eq!(subdivide(&c).unwrap().len(), 5);
        // d=3, h <= 1: 2^3
        let c = Horobox::new(vec![0.0, 0.0], 1.0, 0.5, 1.0).unwrap();
        assert_eq!(subdivide(&c).unwrap().len(), 8);
    }

    #[test]
    fn subdivide_partitions_parent() {
        let mut r = rng(21);
        for _ in 0..50 {
            let d = r.gen_range(2..4);
            let level: i32 = r.gen_range(-2..3);
            let h = (level as f64).exp2();
            let w = if level >= 0 {
                (h - 1.0).exp2() / ((d - 1) as f64).sqrt()
            } else {
                r.gen_range(0.51..1.0) * h / ((d - 1) as f64).sqrt()
            };
            let cell = Horobox::new(
                (0..d - 1).map(|_| r.gen_range(-2.0..2.0)).collect(),
                r.gen_range(0.3..3.0),
                w,
                h,
            )
            .unwrap();
            let kids = subdivide(&cell).unwrap();
            // random interior points land in exactly one child
            for _ in 0..200 {
                let side = cell.euclidean_width();
                let p = Point::new(
                    cell.x().iter().map(|&lo| lo + r.gen_range(0.0..1.0) * side).collect(),
                    cell.z() * (r.gen_range(0.0..1.0) * cell.h()).exp2(),
                )
                .unwrap();
                let n = kids.iter().filter(|k| k.contains(&p).unwrap()).count();
                assert_eq!(n, 1, "point in {n} children");
            }
            // children stay inside the parent (corner spot checks)
            for k in &kids {
                assert!(k.z() >= cell.z() && k.z_top() <= cell.z_top() * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn build_single_point() {
        let t = build(&[pt(&[0.3], 1.7)]).unwrap();
        assert!(t.root().is_leaf());
        assert_eq!(t.dfs_order(), vec![0]);
    }

    #[test]
    fn build_rejects_duplicates() {
        let p = pt(&[0.3], 1.7);
        assert!(matches!(build(&[p.clone(), p]), Err(Error::DuplicatePoint)));
    }

    #[test]
    fn build_separates_close_points() {
        let p = pt(&[0.40], 1.3);
        let q = pt(&[0.62], 1.1);
        assert!((distance(&p, &q).unwrap() - 0.3).abs() < 0.1);
        let t = build(&[p, q]).unwrap();
        let mut leaves = 0;
        fn walk<S: Scalar>(n: &Node<S>, leaves: &mut usize) {
            if n.is_leaf() {
                assert!(n.point().is_some() || n.children().is_empty());
                *leaves += 1;
            }
            for c in n.children() {
                walk(c, leaves);
            }
        }
        walk(t.root(), &mut leaves);
        assert_eq!(t.dfs_order().len(), 2);
        assert!(leaves >= 2);
    }

    #[test]
    fn build_structural_audit() {
        let mut r = rng(22);
        for _ in 0..100 {
            let d = r.gen_range(2..5);
            let pts: Vec<_> = (0..50).map(|_| random_point(&mut r, d)).collect();
            let t = match build(&pts) {
                Ok(t) => t,
                Err(Error::DuplicatePoint) => continue,
                Err(e) => panic!("{e}"),
            };
            // every point in exactly one leaf, internal nodes have >= 2 below
            let mut order = t.dfs_order();
            order.sort_unstable();
            assert_eq!(order, (0..pts.len()).collect::<Vec<_>>());
            fn audit<S: Scalar>(n: &Node<S>, points: &[Point<S>]) -> usize {
                if n.is_leaf() {
                    if let Some(i) = n.point() {
                        assert!(n.cell().contains(&points[i]).unwrap());
                        return 1;
                    }
                    return 0;
                }
                assert!(n.point().is_none());
                let below: usize = n.children().iter().map(|c| audit(c, points)).sum();
                assert!(below >= 2, "internal node with {below} points");
                below
            }
            audit(t.root(), t.points());
        }
    }

    #[test]
    fn infinite_cell_examples() {
        // origin tile
        let c = infinite_cell(&pt(&[0.0, 0.0], 1.0), 0).unwrap();
        assert_eq!((c.level(), c.b(), c.a()), (0, 0, &[0i128, 0][..]));
        // z = 3 at level 1 in d=2: b = floor(log2(3)/2) = 0, z-range [1, 4)
        let c = infinite_cell(&pt(&[0.0], 3.0), 1).unwrap();
        assert_eq!(c.b(), 0);
        let hb = c.horobox().unwrap();
        assert_eq!(hb.z(), 1.0);
        assert_eq!(hb.z_top(), 4.0);
        // negative z̃ floors downward
        let c = infinite_cell(&pt(&[0.0], 0.7), 0).unwrap();
        assert_eq!(c.b(), -1);
        // negative x side
        let c = infinite_cell(&pt(&[-0.25], 1.0), 0).unwrap();
        assert_eq!(c.a(), &[-1]);
    }

    #[test]
    fn infinite_cell_contains_point() {
        let mut r = rng(23);
        for _ in 0..2_000 {
            let d = r.gen_range(2..5);
            let p = random_point(&mut r, d);
            let level = r.gen_range(-6..5);
            let c = infinite_cell(&p, level).unwrap();
            let hb = c.horobox().unwrap();
            assert!(
                hb.contains(&p).unwrap(),
                "level {level} cell {hb:?} misses {p:?}"
            );
        }
    }

    #[test]
    fn infinite_cell_nesting() {
        let mut r = rng(24);
        for _ in 0..1_000 {
            let d = r.gen_range(2..4);
            let p = random_point(&mut r, d);
            for level in -4..4 {
                let child = infinite_cell(&p, level).unwrap().horobox().unwrap();
                let parent = infinite_cell(&p, level + 1).unwrap().horobox().unwrap();
                // child box inside parent box
                assert!(child.z() >= parent.z() * (1.0 - 1e-12));
                assert!(child.z_top() <= parent.z_top() * (1.0 + 1e-12));
                let (ps, cs) = (parent.euclidean_width(), child.euclidean_width());
                for (clo, plo) in child.x().iter().zip(parent.x().iter()) {
                    assert!(*clo >= plo - ps * 1e-12 && clo + cs <= plo + ps * (1.0 + 1e-12));
                }
            }
        }
    }

    #[test]
    fn cell_geometry_diameters() {
        // level 0: both the schedule formula and the alpha formula give
        // 2 arsinh(1/2)
        let g = cell_geometry(0, 1.0, 2);
        assert!((g.diameter() - 0.9624236501192069).abs() < 1e-15);
        let lo = level_diameter(-1, 1.0);
        let manual = 2.0 * arsinh(0.5 * ((0.25 + (2f64.sqrt() - 1.0).powi(2)) / 2f64.sqrt()).sqrt());
        assert!((lo - manual).abs() < 1e-15);
        // level 2: 2 arsinh(4) = 4.18937...
        let g = cell_geometry(2, 1.0, 2);
        assert!((g.diameter() - 2.0 * 4f64.asinh()).abs() < 1e-12);
        // width schedule
        assert!((cell_geometry(3, 1.0, 5).width() - 128.0 / 2.0).abs() < 1e-12);
        assert!((cell_geometry(-2, 0.8, 2).width() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn alpha_stays_in_range() {
        let mut r = rng(25);
        for _ in 0..10_000 {
            let d = r.gen_range(2..4);
            let p = random_point(&mut r, d);
            let c = infinite_cell(&p, r.gen_range(-20..0)).unwrap();
            let a = c.alpha();
            assert!(a > 0.5 && a <= 1.0, "alpha {a}");
        }
    }

    #[test]
    fn alpha_child_factor() {
        // descending one level multiplies alpha by 1 (bottom) or
        // 2^(-2^(ℓ-1)) (top)
        let mut r = rng(26);
        for _ in 0..2_000 {
            let p = random_point(&mut r, 2);
            let level = r.gen_range(-10..1);
            let parent = infinite_cell(&p, level).unwrap();
            let child = infinite_cell(&p, level - 1).unwrap();
            let ratio = child.alpha() / parent.alpha();
            let top = (-(level as f64 - 1.0).exp2()).exp2();
            assert!(
                (ratio - 1.0).abs() < 1e-12 || (ratio - top).abs() < 1e-12,
                "level {level} ratio {ratio}"
            );
        }
    }

    #[test]
    fn table_of_child_diameter_ratios() {
        // tabulated child/parent diameter ratios; the level-1 entry is
        // arsinh(1/2)/arsinh(1) = 0.5460 by direct evaluation
        let cases = [
            (-1, 0.5f64.sqrt(), 0.125f64.powf(0.25), 0.485, 5e-4),
            (-1, 0.5f64.sqrt(), 0.5f64.sqrt(), 0.5218, 5e-5),
            (-1, 1.0, 0.5f64.powf(0.25), 0.4795, 5e-5),
            (-1, 1.0, 1.0, 0.5312, 5e-5),
            (0, 1.0, 0.5f64.sqrt(), 0.4718, 5e-5),
            (0, 1.0, 1.0, 0.5605, 5e-5),
            (1, 1.0, 1.0, 0.545979, 5e-6),
            (2, 1.0, 1.0, 0.4208, 5e-5),
            (3, 1.0, 1.0, 0.4317, 5e-5),
        ];
        for &(level, a, ap, want, tol) in &cases {
            let got = child_diameter_ratio(level, a, ap);
            assert!(
                (got - want).abs() < tol,
                "level {level} alpha {a} alpha' {ap}: {got} vs {want}"
            );
        }
        assert!(
            (child_diameter_ratio(1, 1.0, 1.0) - 0.5f64.asinh() / 1f64.asinh()).abs() < 1e-12
        );
    }

    #[test]
    fn ratio_bounds_across_levels() {
        let mut r = rng(27);
        for level in -20..=6 {
            for _ in 0..200 {
                let alpha = if level < 0 { r.gen_range(0.5001..=1.0) } else { 1.0 };
                let ap_choices = if level - 1 >= 0 {
                    vec![1.0]
                } else {
                    let shrink = (-(level as f64 - 1.0).exp2()).exp2();
                    vec![alpha, alpha * shrink]
                };
                for ap in ap_choices {
                    if !(0.5 < ap && ap <= 1.0) {
                        continue;
                    }
                    let ratio = child_diameter_ratio(level, alpha, ap);
                    assert!(
                        ratio > 0.42 && ratio < 0.561,
                        "level {level} alpha {alpha} alpha' {ap}: {ratio}"
                    );
                }
            }
        }
    }

    #[test]
    fn fatness_sweep() {
        let mut worst = f64::INFINITY;
        for d in 2..=10 {
            for level in -10..=6 {
                let g = cell_geometry(level, 1.0, d);
                let f = fatness(&g);
                assert!(f > 0.0 && f.is_finite());
                worst = worst.min(f * (d as f64).sqrt());
            }
        }
        // Ω(1/sqrt d) fatness: the normalised minimum stays bounded away
        // from zero
        assert!(worst > 0.2, "min fatness*sqrt(d) = {worst}");
    }

    #[test]
    fn child_counts() {
        assert_eq!(child_count(3, 2).unwrap(), 17);
        assert_eq!(child_count(0, 3).unwrap(), 8);
        assert_eq!(child_count(-5, 2).unwrap(), 4);
        assert_eq!(child_count(2, 4).unwrap(), (1 << 6) + 1);
        assert!(child_count(9, 9).is_err());
    }

    #[test]
    fn same_level_cells_are_isometric() {
        let mut r = rng(28);
        for _ in 0..200 {
            let d = r.gen_range(2..4);
            let level = r.gen_range(0..4);
            let p = random_point(&mut r, d);
            let q = random_point(&mut r, d);
            let cp = infinite_cell(&p, level).unwrap().horobox().unwrap();
            let cq = infinite_cell(&q, level).unwrap().horobox().unwrap();
            assert!((cp.w() - cq.w()).abs() <= 1e-12 * cp.w());
            assert_eq!(cp.h(), cq.h());
            // canonical map: sigma = z'/z, tau = x' - x z'/z
            let sigma = cq.z() / cp.z();
            let tau = cq
                .x()
                .iter()
                .zip(cp.x().iter())
                .map(|(&xq, &xp)| xq - xp * sigma)
                .collect();
            let t = crate::geometry::Isometry::new(sigma, tau).unwrap();
            for (a, b) in cp.corners().iter().zip(cq.corners().iter()) {
                let img = t.apply(a);
                assert!(distance(&img, b).unwrap() < 1e-9);
            }
        }
    }

    #[test]
    fn width_spread_below_two() {
        let mut r = rng(29);
        for level in -8..0 {
            let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
            for _ in 0..500 {
                let p = random_point(&mut r, 3);
                let g = infinite_cell(&p, level).unwrap().geometry();
                lo = lo.min(g.width());
                hi = hi.max(g.width());
            }
            assert!(hi / lo < 2.0, "level {level}: spread {}", hi / lo);
        }
    }

    #[test]
    fn dfs_two_points_vertically_adjacent_tiles() {
        // upper-tile point first
        let lo = pt(&[0.05], 1.1);
        let hi = pt(&[0.05], 2.2);
        let t = build(&[lo, hi]).unwrap();
        assert_eq!(t.dfs_order(), vec![1, 0]);
    }
}
