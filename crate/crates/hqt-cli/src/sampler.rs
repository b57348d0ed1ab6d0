//! Deterministic point samplers.
//!
//! Ball mode draws uniformly (with respect to hyperbolic volume) from the
//! ball of a given radius centred at `(0,..,0,1)`: a uniform direction, a
//! radius with density proportional to `sinh^{d-1}(r)`, then the Poincaré
//! ball point is mapped to half-space coordinates. Box mode draws uniformly
//! from a Euclidean box based at `z = 1`.

use hqt::Pointf;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Inverse of the radial CDF `F(r) ∝ ∫ sinh^{d-1}`, by Simpson quadrature on
/// a fixed grid and bisection.
pub struct RadialCdf {
    grid: Vec<f64>, // cumulative integral at i * step
    step: f64,
    radius: f64,
}

impl RadialCdf {
    pub fn new(d: usize, radius: f64) -> RadialCdf {
        assert!(radius >= 0.0 && radius.is_finite());
        let n = 4096;
        let step = radius / n as f64;
        let f = |r: f64| r.sinh().powi(d as i32 - 1);
        let mut grid = Vec::with_capacity(n + 1);
        grid.push(0.0);
        let mut acc = 0.0;
        for i in 0..n {
            let a = i as f64 * step;
            // Simpson on [a, a + step]
            acc += step / 6.0 * (f(a) + 4.0 * f(a + 0.5 * step) + f(a + step));
            grid.push(acc);
        }
        RadialCdf { grid, step, radius }
    }

    /// CDF value at radius `r`.
    pub fn cdf(&self, r: f64) -> f64 {
        let total = *self.grid.last().unwrap();
        if total == 0.0 {
            return if r >= self.radius { 1.0 } else { 0.0 };
        }
        let t = (r / self.step).clamp(0.0, (self.grid.len() - 1) as f64);
        let i = t.floor() as usize;
        let frac = t - i as f64;
        let v = if i + 1 < self.grid.len() {
            self.grid[i] + frac * (self.grid[i + 1] - self.grid[i])
        } else {
            self.grid[i]
        };
        v / total
    }

    /// Radius with `cdf(radius) = u`, by bisection.
    pub fn invert(&self, u: f64) -> f64 {
        let (mut lo, mut hi) = (0.0, self.radius);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if self.cdf(mid) < u {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller; u1 in (0, 1]
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Uniform direction on the unit sphere in `R^d`.
fn direction(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| gaussian(rng)).collect();
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|a| a / norm).collect();
        }
    }
}

/// Map a Poincaré-ball point `y` (|y| < 1, ball centre at the origin) to
/// half-space coordinates with the centre going to `(0,..,0,1)`.
fn ball_to_half_space(y: &[f64]) -> Pointf {
    let d = y.len();
    let norm2: f64 = y.iter().map(|a| a * a).sum();
    let denom = norm2 - 2.0 * y[d - 1] + 1.0;
    let x: Vec<f64> = y[..d - 1].iter().map(|&yi| 2.0 * yi / denom).collect();
    let z = (1.0 - norm2) / denom;
    Pointf::new(x, z).expect("interior ball point maps to z > 0")
}

/// One uniform sample from the hyperbolic ball of radius `radius` around
/// `(0,..,0,1)`.
pub fn sample_ball(rng: &mut ChaCha8Rng, cdf: &RadialCdf, d: usize) -> Pointf {
    if cdf.radius == 0.0 {
        return Pointf::new(vec![0.0; d - 1], 1.0).unwrap();
    }
    let r = cdf.invert(rng.gen());
    let u = direction(rng, d);
    // Poincaré-ball radius for hyperbolic distance r from the centre
    let rho = (0.5 * r).tanh();
    let y: Vec<f64> = u.into_iter().map(|ui| rho * ui).collect();
    ball_to_half_space(&y)
}

/// One uniform sample from the Euclidean box `[0, w]^{d-1} x [1, 2^h]`.
pub fn sample_box(rng: &mut ChaCha8Rng, d: usize, w: f64, h: f64) -> Pointf {
    let x: Vec<f64> = (0..d - 1).map(|_| rng.gen::<f64>() * w).collect();
    let z = 1.0 + rng.gen::<f64>() * (h.exp2() - 1.0);
    Pointf::new(x, z).unwrap()
}
