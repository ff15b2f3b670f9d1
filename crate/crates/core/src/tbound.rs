//! Total boundedness over finite samples: greedy nets, the approximate modulus
//! beta and the beta-to-alpha conversion.

use std::io;

use rayon::prelude::*;
use serde::Serialize;

use crate::csvout;
use crate::error::{check_param, Error, Result};
use crate::geom::{GeodesicSpace, Point, SpaceWithGeodesic};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NetResult {
    pub radius: f64,
    pub centers: Vec<Point>,
    /// Sample indices of the centers, in selection order.
    pub center_indices: Vec<usize>,
    pub covered: bool,
    /// Largest distance from a sample point to its nearest center.
    pub max_uncovered_distance: f64,
    pub sample_size: usize,
}

impl NetResult {
    fn from_centers(
        space: &SpaceWithGeodesic,
        sample: &[Point],
        radius: f64,
        center_indices: Vec<usize>,
    ) -> NetResult {
        let reach = covering_distance(space, sample, &center_indices);
        NetResult {
            radius,
            centers: center_indices.iter().map(|&i| sample[i].clone()).collect(),
            center_indices,
            covered: reach <= radius,
            max_uncovered_distance: reach,
            sample_size: sample.len(),
        }
    }

    /// Recomputes coverage of `sample` by the centers at `radius`.
    pub fn covers(&self, space: &SpaceWithGeodesic, sample: &[Point], radius: f64) -> bool {
        sample
            .iter()
            .all(|x| self.centers.iter().any(|c| space.dist(x, c) <= radius))
    }

    /// CSV with columns `center`, `sample_index` and the coordinates.
    pub fn write_csv<W: io::Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let dim = self.centers.first().map_or(1, Point::dim);
        let mut header = vec!["center".to_string(), "sample_index".to_string()];
        header.extend(csvout::coord_columns("x", dim));
        w.write_record(&header)?;
        for (k, (c, i)) in self.centers.iter().zip(&self.center_indices).enumerate() {
            let mut row = vec![k.to_string(), i.to_string()];
            row.extend(c.coords().iter().map(|v| csvout::real(*v)));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn covering_distance(space: &SpaceWithGeodesic, sample: &[Point], centers: &[usize]) -> f64 {
    sample
        .par_iter()
        .map(|x| {
            centers
                .iter()
                .map(|&c| space.dist(x, &sample[c]))
                .fold(f64::INFINITY, f64::min)
        })
        .reduce(|| 0.0, f64::max)
}

fn check_net_args(sample: &[Point], radius: f64) -> Result<()> {
    check_param("radius", radius, radius > 0.0, "> 0")?;
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    Ok(())
}

/// Farthest-point greedy: the first center is `sample[0]`, each next one the
/// lowest-index point farthest from the current centers, until every point is
/// within `radius`.
pub fn greedy_net(space: &SpaceWithGeodesic, sample: &[Point], radius: f64) -> Result<NetResult> {
    check_net_args(sample, radius)?;
    let mut nearest = vec![f64::INFINITY; sample.len()];
    let mut centers = Vec::new();
    let mut next = 0;
    loop {
        centers.push(next);
        let c = &sample[next];
        nearest.par_iter_mut().zip(sample).for_each(|(m, x)| {
            *m = m.min(space.dist(x, c));
        });
        let (far, d) = nearest
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, &d)| {
                if d > best.1 {
                    (i, d)
                } else {
                    best
                }
            });
        if d <= radius {
            break;
        }
        next = far;
    }
    Ok(NetResult::from_centers(space, sample, radius, centers))
}

/// Max-coverage greedy: each step takes the lowest-index point whose
/// `radius`-ball holds the most uncovered points.
pub fn coverage_greedy_net(
    space: &SpaceWithGeodesic,
    sample: &[Point],
    radius: f64,
) -> Result<NetResult> {
    check_net_args(sample, radius)?;
    let balls: Vec<Vec<usize>> = (0..sample.len())
        .into_par_iter()
        .map(|i| {
            (0..sample.len())
                .filter(|&j| space.dist(&sample[i], &sample[j]) <= radius)
                .collect()
        })
        .collect();
    let mut gain: Vec<usize> = balls.iter().map(Vec::len).collect();
    let mut covered = vec![false; sample.len()];
    let mut left = sample.len();
    let mut centers = Vec::new();
    while left > 0 {
        let (best, _) = gain
            .iter()
            .enumerate()
            .fold((0, 0), |b, (i, &g)| if g > b.1 { (i, g) } else { b });
        centers.push(best);
        for &j in &balls[best] {
            if !covered[j] {
                covered[j] = true;
                left -= 1;
                // the ball relation is symmetric, so j's ball lists exactly
                // the candidates that just lost j
                for &i in &balls[j] {
                    gain[i] -= 1;
                }
            }
        }
    }
    Ok(NetResult::from_centers(space, sample, radius, centers))
}

/// The smaller of the two greedy nets (farthest-point on ties).
pub fn best_net(space: &SpaceWithGeodesic, sample: &[Point], radius: f64) -> Result<NetResult> {
    let a = greedy_net(space, sample, radius)?;
    let b = coverage_greedy_net(space, sample, radius)?;
    Ok(if b.centers.len() < a.centers.len() {
        b
    } else {
        a
    })
}

/// Upper estimate of the modulus of approximate total boundedness at `k`:
/// one less than the number of centers needed at radius `1/(k+1)`.
///
/// Uses the better of the two greedy nets and the running maximum over
/// `j <= k`, so the result is nondecreasing in `k`.
pub fn modulus_beta(space: &SpaceWithGeodesic, sample: &[Point], k: usize) -> Result<usize> {
    Ok(*beta_profile(space, sample, k)?
        .last()
        .expect("k + 1 entries"))
}

/// `[beta(0), ..., beta(k)]`.
pub fn beta_profile(space: &SpaceWithGeodesic, sample: &[Point], k: usize) -> Result<Vec<usize>> {
    let mut out = Vec::with_capacity(k + 1);
    let mut running = 0;
    for j in 0..=k {
        let net = best_net(space, sample, 1.0 / (j as f64 + 1.0))?;
        running = running.max(net.centers.len() - 1);
        out.push(running);
    }
    Ok(out)
}

/// Least `k` with `2/(k+1) < 1/(K+1)`.
pub fn alpha_index(big_k: usize) -> usize {
    // 2/(k+1) < 1/(K+1)  <=>  2(K+1) < k+1
    (0..)
        .find(|k| 2 * (big_k + 1) < k + 1)
        .expect("unbounded search")
}

/// The conversion `K -> k -> beta(k)`; returns `(k, beta(k))`.
pub fn alpha_from_beta<F>(beta: F, big_k: usize) -> Result<(usize, usize)>
where
    F: FnOnce(usize) -> Result<usize>,
{
    let k = alpha_index(big_k);
    Ok((k, beta(k)?))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AlphaNet {
    pub big_k: usize,
    pub k: usize,
    pub beta_k: usize,
    pub net: NetResult,
    /// The centers cover the sample at radius `1/(K+1)`.
    pub covers_target: bool,
}

/// Runs the conversion on a sample and re-checks coverage at `1/(K+1)`.
pub fn alpha_net(space: &SpaceWithGeodesic, sample: &[Point], big_k: usize) -> Result<AlphaNet> {
    let k = alpha_index(big_k);
    let beta_k = modulus_beta(space, sample, k)?;
    let net = best_net(space, sample, 1.0 / (k as f64 + 1.0))?;
    let covers_target = net.covers(space, sample, 1.0 / (big_k as f64 + 1.0));
    Ok(AlphaNet {
        big_k,
        k,
        beta_k,
        net,
        covers_target,
    })
}
