//! Half-space model primitives: points, isometries, horoboxes.
//!
//! A point of d-dimensional hyperbolic space is written `(x, z)` with
//! `x` a `(d-1)`-vector of horizontal coordinates and `z > 0` the vertical
//! coordinate. Distances use the half-space formula
//! `2 arsinh( (1/2) sqrt( (|x-x'|^2 + (z-z')^2) / (z z') ) )`.

use crate::error::Error;
use crate::scalar::{arsinh, Scalar};
use crate::Result;

/// Width/height floor for degenerate bounding boxes (single point, coplanar
/// sets), as a power-of-two exponent so subdivision stays dyadic. The
/// quadtree construction assumes a box with positive extent.
pub const EPS_BOX_EXP: i32 = -40;

/// A point of `H^d` in half-space coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Point<S: Scalar> {
    x: Vec<S>,
    z: S,
}

impl<S: Scalar> Point<S> {
    /// Construct a point; rejects `z <= 0`, non-finite coordinates and `d < 2`.
    pub fn new(x: Vec<S>, z: S) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::InvalidCoordinate("dimension must be at least 2".into()));
        }
        if !(z > S::zero()) || !z.is_finite() {
            return Err(Error::InvalidCoordinate(format!("z must be positive, got {z}")));
        }
        if x.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidCoordinate("non-finite horizontal coordinate".into()));
        }
        Ok(Point { x, z })
    }

    pub fn x(&self) -> &[S] {
        &self.x
    }

    pub fn z(&self) -> S {
        self.z
    }

    /// Ambient dimension `d = len(x) + 1`.
    pub fn dim(&self) -> usize {
        self.x.len() + 1
    }

    /// Raw coordinate bit patterns, used for hashing and lexicographic
    /// tie-breaking among distinct points.
    pub fn key(&self) -> Vec<u64> {
        self.x
            .iter()
            .map(|c| c.as_f64().to_bits())
            .chain(std::iter::once(self.z.as_f64().to_bits()))
            .collect()
    }

    /// Lexicographic order on raw coordinates; a strict total order on
    /// distinct points, used only for deterministic tie-breaking.
    pub fn lex_cmp(&self, other: &Self) -> std::cmp::Ordering {
        for (a, b) in self.x.iter().zip(other.x.iter()) {
            match a.partial_cmp(b).expect("finite coords") {
                std::cmp::Ordering::Equal => {}
                o => return o,
            }
        }
        self.z.partial_cmp(&other.z).expect("finite coords")
    }
}

/// The isometry `T_{sigma,tau}(x, z) = (sigma x + tau, sigma z)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Isometry<S: Scalar> {
    sigma: S,
    tau: Vec<S>,
}

impl<S: Scalar> Isometry<S> {
    pub fn new(sigma: S, tau: Vec<S>) -> Result<Self> {
        if !(sigma > S::zero()) || !sigma.is_finite() {
            return Err(Error::InvalidCoordinate(format!("sigma must be positive, got {sigma}")));
        }
        if tau.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidCoordinate("non-finite translation".into()));
        }
        Ok(Isometry { sigma, tau })
    }

    /// Identity transform for dimension `d`.
    pub fn identity(d: usize) -> Self {
        Isometry { sigma: S::one(), tau: vec![S::zero(); d - 1] }
    }

    pub fn sigma(&self) -> S {
        self.sigma
    }

    pub fn tau(&self) -> &[S] {
        &self.tau
    }

    /// Apply the transform to a point.
    pub fn apply(&self, p: &Point<S>) -> Point<S> {
        assert_eq!(self.tau.len(), p.x.len(), "isometry/point dimension mismatch");
        let x = p
            .x
            .iter()
            .zip(self.tau.iter())
            .map(|(&xi, &ti)| self.sigma * xi + ti)
            .collect();
        Point { x, z: self.sigma * p.z }
    }

    /// Algebraic inverse: `sigma -> 1/sigma`, `tau -> -tau/sigma`.
    pub fn invert(&self) -> Isometry<S> {
        let inv = S::one() / self.sigma;
        Isometry { sigma: inv, tau: self.tau.iter().map(|&t| -t * inv).collect() }
    }

    /// Composition `self . other` (apply `other` first).
    pub fn compose(&self, other: &Isometry<S>) -> Isometry<S> {
        assert_eq!(self.tau.len(), other.tau.len());
        Isometry {
            sigma: self.sigma * other.sigma,
            tau: other
                .tau
                .iter()
                .zip(self.tau.iter())
                .map(|(&ot, &st)| self.sigma * ot + st)
                .collect(),
        }
    }
}

/// Hyperbolic distance between two points of the same dimension.
pub fn distance<S: Scalar>(p: &Point<S>, q: &Point<S>) -> Result<S> {
    if p.dim() != q.dim() {
        return Err(Error::DimensionMismatch(p.dim(), q.dim()));
    }
    let mut sq = S::zero();
    for (&a, &b) in p.x.iter().zip(q.x.iter()) {
        let dxi = a - b;
        sq = sq + dxi * dxi;
    }
    let dz = p.z - q.z;
    sq = sq + dz * dz;
    let half = S::from_f64_c(0.5);
    Ok(S::from_f64_c(2.0) * arsinh(half * (sq / (p.z * q.z)).sqrt()))
}

/// Distance from `p` to the hyperplane `x_i = 0` (axes are 1-based).
pub fn distance_to_axis_hyperplane<S: Scalar>(p: &Point<S>, axis: usize) -> Result<S> {
    if axis == 0 || axis > p.dim() - 1 {
        return Err(Error::AxisOutOfRange { axis, dim: p.dim() });
    }
    Ok(arsinh(p.x[axis - 1].abs() / p.z))
}

/// A cube-based horobox `R(x, z, w, h)`: the Euclidean box with corner points
/// `(x, z)` and `(x + z*(w,..,w), z*2^h)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Horobox<S: Scalar> {
    x: Vec<S>,
    z: S,
    w: S,
    h: S,
}

impl<S: Scalar> Horobox<S> {
    pub fn new(x: Vec<S>, z: S, w: S, h: S) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::InvalidCoordinate("dimension must be at least 2".into()));
        }
        if !(z > S::zero()) || !(w > S::zero()) || !(h > S::zero()) {
            return Err(Error::InvalidCoordinate(format!(
                "horobox requires z, w, h > 0 (z={z}, w={w}, h={h})"
            )));
        }
        Ok(Horobox { x, z, w, h })
    }

    pub fn x(&self) -> &[S] {
        &self.x
    }
    pub fn z(&self) -> S {
        self.z
    }
    pub fn w(&self) -> S {
        self.w
    }
    pub fn h(&self) -> S {
        self.h
    }

    pub fn dim(&self) -> usize {
        self.x.len() + 1
    }

    /// Euclidean side length of the base, `z * w`.
    pub fn euclidean_width(&self) -> S {
        self.z * self.w
    }

    /// Top of the box, `z * 2^h`.
    pub fn z_top(&self) -> S {
        self.z * S::from_f64_c(self.h.as_f64().exp2())
    }

    /// Half-open containment `[x, x + z w)^(d-1) x [z, z 2^h)`, so that
    /// tilings partition space exactly.
    pub fn contains(&self, p: &Point<S>) -> Result<bool> {
        if p.dim() != self.dim() {
            return Err(Error::DimensionMismatch(p.dim(), self.dim()));
        }
        let side = self.euclidean_width();
        for (&lo, &c) in self.x.iter().zip(p.x.iter()) {
            if !(c >= lo && c < lo + side) {
                return Ok(false);
            }
        }
        Ok(p.z >= self.z && p.z < self.z_top())
    }

    /// Hyperbolic diameter; depends only on `(w, h, d)`.
    pub fn diameter(&self) -> S {
        horobox_diameter(self.w, self.h, self.dim())
    }

    /// All `2^d` Euclidean corner points.
    pub fn corners(&self) -> Vec<Point<S>> {
        let side = self.euclidean_width();
        let top = self.z_top();
        let d1 = self.x.len();
        let mut out = Vec::with_capacity(1 << (d1 + 1));
        for mask in 0..(1usize << (d1 + 1)) {
            let x = (0..d1)
                .map(|i| if mask >> i & 1 == 1 { self.x[i] + side } else { self.x[i] })
                .collect();
            let z = if mask >> d1 & 1 == 1 { top } else { self.z };
            out.push(Point { x, z });
        }
        out
    }
}

/// Diameter of a cube-based horobox with width `w` and height `h` in
/// dimension `d`: the wide regime is realised between two base corners, the
/// tall regime between a base corner and the opposite top corner.
pub fn horobox_diameter<S: Scalar>(w: S, h: S, d: usize) -> S {
    let dm1 = S::from_f64_c((d - 1) as f64);
    let half = S::from_f64_c(0.5);
    let two = S::from_f64_c(2.0);
    let pow = S::from_f64_c(crate::scalar::exp2_m1(h.as_f64())); // 2^h - 1
    let threshold = (pow / dm1).sqrt();
    if w >= threshold {
        two * arsinh(half * w * dm1.sqrt())
    } else {
        let num = dm1 * w * w + pow * pow;
        let den = S::from_f64_c(h.as_f64().exp2());
        two * arsinh(half * (num / den).sqrt())
    }
}

/// Minimum bounding horobox of a nonempty point set, base at the minimum `z`.
/// Degenerate extents are clamped to width/height `2^-40`.
pub fn minimum_bounding_horobox<S: Scalar>(points: &[Point<S>]) -> Result<Horobox<S>> {
    let first = points.first().ok_or(Error::EmptyPointSet)?;
    let d1 = first.x.len();
    for p in points {
        if p.x.len() != d1 {
            return Err(Error::DimensionMismatch(p.dim(), d1 + 1));
        }
    }
    let mut lo = first.x.clone();
    let mut hi = first.x.clone();
    let mut zmin = first.z;
    let mut zmax = first.z;
    for p in &points[1..] {
        for i in 0..d1 {
            lo[i] = lo[i].min(p.x[i]);
            hi[i] = hi[i].max(p.x[i]);
        }
        zmin = zmin.min(p.z);
        zmax = zmax.max(p.z);
    }
    let eps = S::from_f64_c((EPS_BOX_EXP as f64).exp2());
    let mut extent = S::zero();
    for i in 0..d1 {
        extent = extent.max(hi[i] - lo[i]);
    }
    let w = (extent / zmin).max(eps);
    let h = S::from_f64_c((zmax / zmin).as_f64().log2()).max(eps);
    Horobox::new(lo, zmin, w, h)
}
