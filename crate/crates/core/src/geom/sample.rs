use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{Point, SpaceKind, SpaceWithGeodesic};
use crate::error::{Error, Result};

fn random_point(space: &SpaceWithGeodesic, rng: &mut ChaCha8Rng) -> Point {
    match space.kind() {
        SpaceKind::Interval { lo, hi } => Point::scalar(uniform(rng, *lo, *hi)),
        SpaceKind::Box { lo, hi, .. } => Point::new(
            lo.iter()
                .zip(hi)
                .map(|(a, b)| uniform(rng, *a, *b))
                .collect(),
        ),
        SpaceKind::Ball { center, radius, .. } => loop {
            let p = Point::new(
                center
                    .iter()
                    .map(|c| uniform(rng, c - radius, c + radius))
                    .collect(),
            );
            if crate::geom::GeodesicSpace::contains(space, &p) {
                break p;
            }
        },
        SpaceKind::Sphere { radius } => loop {
            let v: [f64; 3] = [
                rng.sample(StandardNormal),
                rng.sample(StandardNormal),
                rng.sample(StandardNormal),
            ];
            let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            if n > 1e-6 {
                break Point::new(v.iter().map(|c| radius * c / n).collect());
            }
        },
    }
}

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.random_range(lo..=hi)
    }
}

/// `n` points of the space, reproducible for a fixed `seed`.
///
/// With `include_special` the space's designated points come first (truncated
/// to `n`) and the rest are uniform random.
pub fn sample_points(
    space: &SpaceWithGeodesic,
    n: usize,
    seed: u64,
    include_special: bool,
) -> Result<Vec<Point>> {
    if n == 0 {
        return Err(Error::Precondition(
            "sample size n must be at least 1".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    if include_special {
        out.extend(space.special_points().into_iter().take(n));
    }
    while out.len() < n {
        out.push(random_point(space, &mut rng));
    }
    Ok(out)
}

/// Evenly spaced grid: `per_axis` points per coordinate on intervals and boxes
/// (endpoints exact), the box grid clipped to the ball for balls, and a
/// Fibonacci lattice of `per_axis` points on the sphere.
pub fn grid_points(space: &SpaceWithGeodesic, per_axis: usize) -> Result<Vec<Point>> {
    if per_axis < 2 {
        return Err(Error::Precondition(
            "a grid needs at least 2 points per axis".into(),
        ));
    }
    let axis = |lo: f64, hi: f64| -> Vec<f64> {
        let m = (per_axis - 1) as f64;
        let mut v: Vec<f64> = (0..per_axis)
            .map(|i| lo + (hi - lo) * i as f64 / m)
            .collect();
        v[per_axis - 1] = hi;
        v
    };
    let product = |axes: Vec<Vec<f64>>| -> Vec<Point> {
        let mut pts: Vec<Vec<f64>> = vec![Vec::new()];
        for ax in &axes {
            pts = pts
                .into_iter()
                .flat_map(|p| {
                    ax.iter().map(move |&c| {
                        let mut q = p.clone();
                        q.push(c);
                        q
                    })
                })
                .collect();
        }
        pts.into_iter().map(Point::new).collect()
    };
    Ok(match space.kind() {
        SpaceKind::Interval { lo, hi } => axis(*lo, *hi).into_iter().map(Point::scalar).collect(),
        SpaceKind::Box { lo, hi, .. } => {
            product(lo.iter().zip(hi).map(|(a, b)| axis(*a, *b)).collect())
        }
        SpaceKind::Ball { center, radius, .. } => product(
            center
                .iter()
                .map(|c| axis(c - radius, c + radius))
                .collect(),
        )
        .into_iter()
        .filter(|p| crate::geom::GeodesicSpace::contains(space, p))
        .collect(),
        SpaceKind::Sphere { radius } => {
            let golden = std::f64::consts::PI * (3.0 - 5.0_f64.sqrt());
            (0..per_axis)
                .map(|i| {
                    let z = 1.0 - 2.0 * (i as f64 + 0.5) / per_axis as f64;
                    let r = (1.0 - z * z).sqrt();
                    let phi = golden * i as f64;
                    Point::new(vec![
                        radius * r * phi.cos(),
                        radius * r * phi.sin(),
                        radius * z,
                    ])
                })
                .collect()
        }
    })
}

/// All ordered pairs of a sample.
pub fn all_pairs(points: &[Point]) -> Vec<(Point, Point)> {
    points
        .iter()
        .flat_map(|x| points.iter().map(move |y| (x.clone(), y.clone())))
        .collect()
}

/// `n` random triples drawn from the space.
pub fn random_triples(
    space: &SpaceWithGeodesic,
    n: usize,
    seed: u64,
) -> Result<Vec<(Point, Point, Point)>> {
    let pts = sample_points(space, 3 * n, seed, false)?;
    Ok(pts
        .chunks_exact(3)
        .map(|c| (c[0].clone(), c[1].clone(), c[2].clone()))
        .collect())
}
