//! The four subcommand implementations. Each returns a [`Report`]; the
//! binary serializes it and maps `all_pass` to the exit code.

use std::time::Instant;

use hqt::cover::{covering_ratio, shift_family};
use hqt::geometry::distance;
use hqt::nnindex::{brute_force_closest_pair, brute_force_nearest};
use hqt::quadtree::child_diameter_ratio;
use hqt::{Isometryf, NeighborIndexf, Pointf};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::frozen;
use crate::report::{Parameters, Report};
use crate::sampler::{sample_ball, sample_box, RadialCdf};
use crate::{CliError, Result};

#[derive(Debug, Clone, Copy)]
pub enum GenMode {
    Ball { radius: f64 },
    Box { width: f64, height: f64 },
}

pub fn cmd_gen(d: usize, n: usize, mode: GenMode, seed: u64) -> Result<Vec<Pointf>> {
    if d < 2 {
        return Err(CliError::Usage("--dim must be >= 2".into()));
    }
    if n == 0 {
        return Err(CliError::Usage("--n must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match mode {
        GenMode::Ball { radius } => {
            if radius < 0.0 || !radius.is_finite() {
                return Err(CliError::Usage("--radius must be a finite nonnegative number".into()));
            }
            let cdf = RadialCdf::new(d, radius);
            Ok((0..n).map(|_| sample_ball(&mut rng, &cdf, d)).collect())
        }
        GenMode::Box { width, height } => {
            if width <= 0.0 || height <= 0.0 {
                return Err(CliError::Usage("box width and height must be positive".into()));
            }
            Ok((0..n).map(|_| sample_box(&mut rng, d, width, height)).collect())
        }
    }
}

/// A small random isometry keeping a query near the data manifold.
fn jiggle(rng: &mut ChaCha8Rng, p: &Pointf) -> Pointf {
    let d = p.dim();
    let sigma = (rng.gen_range(-0.2..0.2) as f64).exp2();
    let tau: Vec<f64> = (0..d - 1).map(|_| rng.gen_range(-0.2..0.2) * p.z()).collect();
    Isometryf::new(sigma, tau).unwrap().apply(p)
}

pub fn cmd_validate(points: &[Pointf], delta: f64, queries: usize, seed: u64) -> Result<Report> {
    if points.is_empty() {
        return Err(CliError::Usage("point file is empty".into()));
    }
    if delta <= 0.0 || !delta.is_finite() {
        return Err(CliError::Usage("--delta must be positive".into()));
    }
    let d = points[0].dim();
    let fr = frozen::load();
    let mut report = Report::new(
        "validate",
        Parameters { d, n: points.len(), delta: Some(delta), seed: Some(seed) },
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let index = NeighborIndexf::build(d, points, delta).map_err(|e| match e {
        hqt::Error::DuplicatePoint => CliError::Usage("point file contains duplicates".into()),
        other => CliError::Lib(other),
    })?;

    // nearest-neighbour ratio vs brute force
    let mut sound = true;
    let mut max_ratio = 1.0f64;
    let mut sum_ratio = 0.0f64;
    let nq = queries.max(1);
    for _ in 0..nq {
        let base = points.choose(&mut rng).unwrap();
        let q = jiggle(&mut rng, base);
        let got = index.nearest(&q)?.expect("nonempty index");
        let exact = brute_force_nearest(points, &q)?;
        let dg = distance(&q, &got)?;
        let de = distance(&q, &exact)?;
        if dg < de - 1e-12 {
            sound = false;
        }
        let ratio = if de == 0.0 { 1.0 } else { dg / de };
        max_ratio = max_ratio.max(ratio);
        sum_ratio += ratio;
    }
    report.metric("nearest_ratio_max", max_ratio);
    report.metric("nearest_ratio_mean", sum_ratio / nq as f64);
    report.check("nearest_sound", sound);
    report.check("nearest_ratio", max_ratio <= fr.ann_ratio_max);

    // closest pair vs brute force
    if points.len() >= 2 {
        let (a, b) = index.closest_pair()?;
        let (ea, eb) = brute_force_closest_pair(points)?;
        let got = distance(&a, &b)?;
        let exact = distance(&ea, &eb)?;
        let ratio = if exact == 0.0 { 1.0 } else { got / exact };
        report.metric("closest_pair_ratio", ratio);
        report.metric("closest_pair", [[a.x().to_vec(), vec![a.z()]], [b.x().to_vec(), vec![b.z()]]]);
        report.check("closest_pair_ratio", ratio >= 1.0 - 1e-12 && ratio <= fr.closest_pair_ratio_max);
    }

    // covering ratios over sampled in-band pairs from the data
    let family = shift_family::<f64>(delta, d)?;
    let band_top = family.height() / 3.0;
    let mut cover_max = 0.0f64;
    let mut cover_sum = 0.0f64;
    let mut cover_n = 0usize;
    let mut cover_finite = true;
    for _ in 0..4 * points.len().min(500) {
        let p = points.choose(&mut rng).unwrap();
        let q = points.choose(&mut rng).unwrap();
        let dist = distance(p, q)?;
        if dist == 0.0 || dist > delta {
            continue;
        }
        if p.z().log2().max(q.z().log2()) > band_top {
            continue; // outside the height band the guarantee covers
        }
        let ratio = covering_ratio(&family, p, q)?;
        if !ratio.is_finite() {
            cover_finite = false;
            continue;
        }
        cover_max = cover_max.max(ratio);
        cover_sum += ratio;
        cover_n += 1;
    }
    report.metric("covering_pairs", cover_n);
    if cover_n > 0 {
        report.metric("covering_ratio_max", cover_max);
        report.metric("covering_ratio_mean", cover_sum / cover_n as f64);
        report.check("covering_finite", cover_finite);
        report.check(
            "covering_ratio",
            cover_max / (d as f64 * (d as f64).sqrt()) <= fr.covering_max_over_d_sqrt_d,
        );
    }

    Ok(report)
}

/// The tabulated child/parent diameter ratios: (level, alpha, alpha',
/// printed value, tolerance).
pub const TABLE1: [(i32, f64, f64, f64, f64); 9] = [
    (-1, std::f64::consts::FRAC_1_SQRT_2, 0.5946035575013605, 0.485, 5e-4), // 8^(-1/4)
    (-1, std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2, 0.5218, 5e-5),
    (-1, 1.0, 0.8408964152537145, 0.4795, 5e-5), // 2^(-1/4)
    (-1, 1.0, 1.0, 0.5312, 5e-5),
    (0, 1.0, std::f64::consts::FRAC_1_SQRT_2, 0.4718, 5e-5),
    (0, 1.0, 1.0, 0.5605, 5e-5),
    (1, 1.0, 1.0, 0.526, 5e-4),
    (2, 1.0, 1.0, 0.4208, 5e-5),
    (3, 1.0, 1.0, 0.4317, 5e-5),
];

pub fn cmd_table1() -> Report {
    let mut report = Report::new(
        "table1",
        Parameters { d: 2, n: 0, delta: None, seed: None },
    );
    let mut entries = Vec::new();
    for &(level, a, ap, want, tol) in &TABLE1 {
        let got = child_diameter_ratio(level, a, ap);
        let ok = (got - want).abs() < tol;
        entries.push(serde_json::json!({
            "level": level, "alpha": a, "alpha_child": ap,
            "computed": got, "printed": want, "ok": ok,
        }));
        report.check(&format!("table1_l{level}_a{a:.4}_ap{ap:.4}"), ok);
    }
    report.metric("table1", entries);
    report
}

pub fn cmd_bench(points: &[Pointf], delta: f64, queries: usize, seed: u64) -> Result<Report> {
    if points.is_empty() {
        return Err(CliError::Usage("point file is empty".into()));
    }
    if delta <= 0.0 || !delta.is_finite() {
        return Err(CliError::Usage("--delta must be positive".into()));
    }
    let d = points[0].dim();
    let mut report = Report::new(
        "bench",
        Parameters { d, n: points.len(), delta: Some(delta), seed: Some(seed) },
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let t0 = Instant::now();
    let index = NeighborIndexf::build(d, points, delta).map_err(|e| match e {
        hqt::Error::DuplicatePoint => CliError::Usage("point file contains duplicates".into()),
        other => CliError::Lib(other),
    })?;
    report.metric("build_ns", t0.elapsed().as_nanos() as u64);

    if queries > 0 {
        let mut lat = Vec::with_capacity(queries);
        let mut calls = Vec::with_capacity(queries);
        for _ in 0..queries {
            let base = points.choose(&mut rng).unwrap();
            let q = jiggle(&mut rng, base);
            index.reset_comparator_calls();
            let t = Instant::now();
            let _ = index.nearest(&q)?;
            lat.push(t.elapsed().as_nanos() as u64);
            calls.push(index.comparator_calls());
        }
        lat.sort_unstable();
        calls.sort_unstable();
        report.metric("query_ns_p50", lat[lat.len() / 2]);
        report.metric("query_ns_p99", lat[(lat.len() * 99) / 100]);
        report.metric("query_calls_p50", calls[calls.len() / 2]);

        // comparator-call scaling over power-of-two prefixes
        let (ns, means) = query_call_scaling(points, delta, queries.min(50), seed)?;
        if ns.len() >= 3 {
            let (_, _, r2) = fit_log(&ns, &means);
            report.metric("calls_vs_log_n", serde_json::json!({
                "n": ns, "mean_calls": means, "r_squared": r2,
            }));
        }
    }
    report.check("completed", true);
    Ok(report)
}

/// Mean comparator calls per query for prefixes n = 2^10, 2^11, ... of the
/// point set.
pub fn query_call_scaling(
    points: &[Pointf],
    delta: f64,
    queries: usize,
    seed: u64,
) -> Result<(Vec<usize>, Vec<f64>)> {
    let d = points[0].dim();
    let mut ns = Vec::new();
    let mut means = Vec::new();
    let mut k = 10u32;
    while (1usize << k) <= points.len() {
        let n = 1usize << k;
        let prefix = &points[..n];
        let index = NeighborIndexf::build(d, prefix, delta)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ k as u64);
        index.reset_comparator_calls();
        for _ in 0..queries {
            let base = prefix.choose(&mut rng).unwrap();
            let q = jiggle(&mut rng, base);
            let _ = index.nearest(&q)?;
        }
        ns.push(n);
        means.push(index.comparator_calls() as f64 / queries as f64);
        k += 1;
    }
    Ok((ns, means))
}

/// Least-squares fit `calls = a + b * ln n`; returns `(a, b, r_squared)`.
pub fn fit_log(ns: &[usize], ys: &[f64]) -> (f64, f64, f64) {
    let xs: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let b = sxy / sxx;
    let a = my - b * mx;
    let ss_res: f64 = xs.iter().zip(ys).map(|(x, y)| (y - (a + b * x)).powi(2)).sum();
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let r2 = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    (a, b, r2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gen_is_deterministic() {
        let a = cmd_gen(2, 50, GenMode::Ball { radius: 1.5 }, 9).unwrap();
        let b = cmd_gen(2, 50, GenMode::Ball { radius: 1.5 }, 9).unwrap();
        let ka: Vec<_> = a.iter().map(|p| p.key()).collect();
        let kb: Vec<_> = b.iter().map(|p| p.key()).collect();
        assert_eq!(ka, kb);
        assert!(matches!(cmd_gen(1, 5, GenMode::Ball { radius: 1.0 }, 0), Err(CliError::Usage(_))));
        assert!(matches!(cmd_gen(2, 0, GenMode::Ball { radius: 1.0 }, 0), Err(CliError::Usage(_))));
    }

    #[test]
    fn validate_two_point_file() {
        let pts = vec![
            Pointf::new(vec![0.0], 1.0).unwrap(),
            Pointf::new(vec![0.0], 2.0).unwrap(),
        ];
        let report = cmd_validate(&pts, 2.0, 10, 1).unwrap();
        let ratio = report.metrics["closest_pair_ratio"].as_f64().unwrap();
        assert!((ratio - 1.0).abs() < 1e-12);
        assert_eq!(report.parameters.n, 2);
        assert_eq!(report.parameters.seed, Some(1));
    }

    #[test]
    fn vertical_stack_pair_reported() {
        let pts: Vec<Pointf> = [1.0, 2.0, 8.0, 64.0]
            .iter()
            .map(|&z| Pointf::new(vec![0.0], z).unwrap())
            .collect();
        let report = cmd_validate(&pts, 8.0, 10, 1).unwrap();
        let ratio = report.metrics["closest_pair_ratio"].as_f64().unwrap();
        assert!((ratio - 1.0).abs() < 1e-12);
        let pair = &report.metrics["closest_pair"];
        let mut zs = [
            pair[0][1][0].as_f64().unwrap(),
            pair[1][1][0].as_f64().unwrap(),
        ];
        zs.sort_by(f64::total_cmp);
        assert_eq!(zs, [1.0, 2.0]);
    }

    #[test]
    fn table1_detects_the_known_mismatch() {
        let report = cmd_table1();
        // every entry except the printed level-1 value reproduces
        let fails: Vec<_> = report
            .pass
            .iter()
            .filter(|(_, &ok)| !ok)
            .map(|(k, _)| k.clone())
            .collect();
        assert_eq!(fails, vec!["table1_l1_a1.0000_ap1.0000".to_string()]);
    }

    #[test]
    fn bench_completes_without_queries() {
        let pts = cmd_gen(2, 64, GenMode::Ball { radius: 1.0 }, 3).unwrap();
        let report = cmd_bench(&pts, 2.0, 0, 3).unwrap();
        assert!(report.metrics.contains_key("build_ns"));
        assert!(!report.metrics.contains_key("query_ns_p50"));
        assert!(report.all_pass());
    }
}
