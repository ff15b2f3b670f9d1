use rayon::prelude::*;

use super::{ConditionReport, MapUnderTest, Witness};
use crate::error::{check_param, Error, Result};
use crate::geom::{check_unit, tsub, GeodesicSpace, Point, SpaceKind, SpaceWithGeodesic};

/// Pairs with `lambda d(x,Tx) <= d(x,y) + ANTECEDENT_SLACK` count as satisfying
/// the antecedent of (C_lambda).
pub const ANTECEDENT_SLACK: f64 = 1e-9;

#[derive(Clone, Copy)]
struct Scan {
    worst: f64,
    at: Option<(usize, usize)>,
}

impl Scan {
    const EMPTY: Scan = Scan {
        worst: 0.0,
        at: None,
    };

    fn merge(self, other: Scan) -> Scan {
        // ties keep the earlier (lower-index) witness
        if other.worst > self.worst {
            other
        } else {
            self
        }
    }
}

/// Max of row `i`'s values over the index square, where `row(i, out)` fills
/// `out[j]` for every `j`; NaN counts as an infinite violation and values
/// below zero are ignored. The reduction is order-preserving, so the witness
/// does not depend on the thread count.
fn scan_pairs(n: usize, row: impl Fn(usize, &mut [f64]) + Sync) -> Scan {
    (0..n)
        .into_par_iter()
        .map_init(
            || vec![0.0f64; n],
            |buf, i| {
                row(i, buf);
                let (m, nan) = row_max(buf);
                if !(m > 0.0 || nan) {
                    return Scan::EMPTY;
                }
                let at = if nan {
                    buf.iter().position(|v| v.is_nan())
                } else {
                    buf.iter().position(|&v| v == m)
                };
                Scan {
                    worst: if nan { f64::INFINITY } else { m },
                    at: Some((i, at.expect("the row max is attained"))),
                }
            },
        )
        .reduce(|| Scan::EMPTY, Scan::merge)
}

fn row_max(values: &[f64]) -> (f64, bool) {
    // independent lanes keep the loop vectorizable
    const LANES: usize = 8;
    let mut lane_max = [0.0f64; LANES];
    let mut lane_nan = [false; LANES];
    let chunks = values.chunks_exact(LANES);
    let rest = chunks.remainder();
    for chunk in chunks {
        for k in 0..LANES {
            let v = chunk[k];
            lane_max[k] = if v > lane_max[k] { v } else { lane_max[k] };
            lane_nan[k] |= v.is_nan();
        }
    }
    for &v in rest {
        lane_max[0] = if v > lane_max[0] { v } else { lane_max[0] };
        lane_nan[0] |= v.is_nan();
    }
    let m = lane_max.iter().fold(0.0f64, |a, &b| a.max(b));
    (m, lane_nan.iter().any(|&b| b))
}

/// Runs `$body` with `$d` bound to the space's distance over the prepared
/// point arrays; intervals get a scalar fast path.
macro_rules! with_metric {
    ($space:expr, [$($src:expr => $dst:ident),+], $d:ident => $body:expr) => {{
        if matches!($space.kind(), SpaceKind::Interval { .. }) {
            $(
                let $dst: Vec<f64> = $src.iter().map(|p| p.x()).collect();
                let $dst = &$dst[..];
            )+
            let $d = |a: &f64, b: &f64| (a - b).abs();
            $body
        } else {
            $( let $dst: &[Point] = &$src[..]; )+
            let $d = |a: &Point, b: &Point| $space.dist(a, b);
            $body
        }
    }};
}

struct Prepared {
    images: Vec<Point>,
    residuals: Vec<f64>,
}

fn prepare(space: &SpaceWithGeodesic, map: &MapUnderTest, sample: &[Point]) -> Result<Prepared> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    let images = sample
        .iter()
        .map(|x| map.apply(space, x))
        .collect::<Result<Vec<_>>>()?;
    let residuals = sample
        .iter()
        .zip(&images)
        .map(|(x, tx)| space.dist(x, tx))
        .collect();
    Ok(Prepared { images, residuals })
}

fn pair_witness(sample: &[Point], at: Option<(usize, usize)>) -> Option<Witness> {
    at.map(|(i, j)| Witness::Pair(sample[i].clone(), sample[j].clone()))
}

/// (E_mu): worst `(d(x,Ty) -. mu d(x,Tx)) -. d(x,y)` over all ordered pairs of
/// `sample`.
pub fn check_condition_e(
    space: &SpaceWithGeodesic,
    map: &MapUnderTest,
    mu: f64,
    sample: &[Point],
    tol: f64,
) -> Result<ConditionReport> {
    check_param("mu", mu, mu >= 1.0, ">= 1")?;
    let prep = prepare(space, map, sample)?;
    let r = &prep.residuals;
    let scan = with_metric!(space, [sample => xs, prep.images => txs], d => {
        scan_pairs(xs.len(), |i, out| {
            let (x, slack) = (&xs[i], mu * r[i]);
            for ((o, y), ty) in out.iter_mut().zip(xs).zip(txs) {
                *o = tsub(tsub(d(x, ty), slack), d(x, y));
            }
        })
    });
    Ok(ConditionReport::new(
        "E",
        Some(mu),
        scan.worst,
        pair_witness(sample, scan.at),
        sample.len() * sample.len(),
        tol,
    ))
}

fn implication_scan(
    space: &SpaceWithGeodesic,
    sample: &[Point],
    prep: &Prepared,
    lambda: f64,
) -> Scan {
    let r = &prep.residuals;
    with_metric!(space, [sample => xs, prep.images => txs], d => {
        scan_pairs(xs.len(), |i, out| {
            let (x, tx) = (&xs[i], &txs[i]);
            let threshold = lambda * r[i] - ANTECEDENT_SLACK;
            for ((o, y), ty) in out.iter_mut().zip(xs).zip(txs) {
                let dxy = d(x, y);
                // pairs outside the antecedent contribute 0
                let v = tsub(d(tx, ty), dxy);
                *o = if threshold <= dxy { v } else { 0.0 };
            }
        })
    })
}

/// (C_lambda) as a guarded check: over ordered pairs with
/// `lambda d(x,Tx) <= d(x,y)`, worst `d(Tx,Ty) -. d(x,y)`. Pairs failing the
/// antecedent are skipped.
pub fn check_condition_c(
    space: &SpaceWithGeodesic,
    map: &MapUnderTest,
    lambda: f64,
    sample: &[Point],
    tol: f64,
) -> Result<ConditionReport> {
    check_param("lambda", lambda, lambda > 0.0 && lambda < 1.0, "(0, 1)")?;
    let prep = prepare(space, map, sample)?;
    let scan = implication_scan(space, sample, &prep, lambda);
    Ok(ConditionReport::new(
        "C",
        Some(lambda),
        scan.worst,
        pair_witness(sample, scan.at),
        sample.len() * sample.len(),
        tol,
    ))
}

/// Plain nonexpansiveness, i.e. (C_0): worst `d(Tx,Ty) -. d(x,y)`.
pub fn check_nonexpansive(
    space: &SpaceWithGeodesic,
    map: &MapUnderTest,
    sample: &[Point],
    tol: f64,
) -> Result<ConditionReport> {
    let prep = prepare(space, map, sample)?;
    let scan = implication_scan(space, sample, &prep, 0.0);
    Ok(ConditionReport::new(
        "nonexpansive",
        None,
        scan.worst,
        pair_witness(sample, scan.at),
        sample.len() * sample.len(),
        tol,
    ))
}

/// Worst `d(Tx, T L(x,Tx,lambda)) -. lambda d(x,Tx)` for each point, as
/// `(violation, index)`.
fn d_violations(
    space: &SpaceWithGeodesic,
    map: &MapUnderTest,
    lambda: f64,
    sample: &[Point],
    prep: &Prepared,
) -> Result<(f64, Option<usize>)> {
    let per_point = sample
        .par_iter()
        .zip(&prep.images)
        .zip(&prep.residuals)
        .map(|((x, tx), &r)| {
            let step = space.geodesic(x, tx, lambda);
            let t_step = map.apply(space, &step)?;
            let v = tsub(space.dist(tx, &t_step), lambda * r);
            Ok(if v.is_nan() { f64::INFINITY } else { v })
        })
        .collect::<Result<Vec<f64>>>()?;
    let mut worst = (0.0, None);
    for (i, v) in per_point.into_iter().enumerate() {
        if v > worst.0 {
            worst = (v, Some(i));
        }
    }
    Ok(worst)
}

/// (D_lambda): worst `d(Tx, T L(x,Tx,lambda)) -. lambda d(x,Tx)` over `sample`.
pub fn check_condition_d(
    space: &SpaceWithGeodesic,
    map: &MapUnderTest,
    lambda: f64,
    sample: &[Point],
    tol: f64,
) -> Result<ConditionReport> {
    check_param("lambda", lambda, lambda > 0.0 && lambda < 1.0, "(0, 1)")?;
    let prep = prepare(space, map, sample)?;
    let (worst, at) = d_violations(space, map, lambda, sample, &prep)?;
    Ok(ConditionReport::new(
        "D",
        Some(lambda),
        worst,
        at.map(|i| Witness::Point(sample[i].clone())),
        sample.len(),
        tol,
    ))
}

/// The (D_lambda) inequality for every `lambda` of `lambda_grid` at once.
pub fn check_directional_nonexpansive(
    space: &SpaceWithGeodesic,
    map: &MapUnderTest,
    lambda_grid: &[f64],
    sample: &[Point],
    tol: f64,
) -> Result<ConditionReport> {
    if lambda_grid.is_empty() {
        return Err(Error::EmptySample);
    }
    lambda_grid
        .iter()
        .try_for_each(|&l| check_unit("lambda", l))?;
    let prep = prepare(space, map, sample)?;
    let mut worst = 0.0;
    let mut witness = None;
    for &lambda in lambda_grid {
        let (v, at) = d_violations(space, map, lambda, sample, &prep)?;
        if v > worst {
            worst = v;
            witness = at.map(|i| Witness::PointAt {
                point: sample[i].clone(),
                lambda,
            });
        }
    }
    Ok(ConditionReport::new(
        "directional",
        None,
        worst,
        witness,
        sample.len() * lambda_grid.len(),
        tol,
    ))
}

/// Worst `d(x0, Tx) -. d(x0, x)` over `sample`, for an approximate fixed
/// point `x0` (`d(x0, Tx0) <= tol`).
pub fn check_quasi_nonexpansive_at(
    space: &SpaceWithGeodesic,
    map: &MapUnderTest,
    fixed_candidate: &Point,
    sample: &[Point],
    tol: f64,
) -> Result<ConditionReport> {
    let t0 = map.apply(space, fixed_candidate)?;
    let r0 = space.dist(fixed_candidate, &t0);
    if r0 > tol {
        return Err(Error::Precondition(format!(
            "{fixed_candidate} is not an approximate fixed point: d(x0, Tx0) = {r0} > {tol}"
        )));
    }
    let prep = prepare(space, map, sample)?;
    let mut worst = (0.0, None);
    for (i, (x, tx)) in sample.iter().zip(&prep.images).enumerate() {
        let v = tsub(
            space.dist(fixed_candidate, tx),
            space.dist(fixed_candidate, x),
        );
        if v > worst.0 {
            worst = (v, Some(i));
        }
    }
    Ok(ConditionReport::new(
        "quasi_nonexpansive",
        None,
        worst.0,
        worst.1.map(|i| Witness::Point(sample[i].clone())),
        sample.len(),
        tol,
    ))
}

/// Grid search: the smallest parameter in `grid` whose check passes.
pub fn smallest_passing(
    grid: &[f64],
    check: impl Fn(f64) -> Result<ConditionReport>,
) -> Result<Option<f64>> {
    let mut sorted = grid.to_vec();
    sorted.sort_by(f64::total_cmp);
    for p in sorted {
        if check(p)?.passed {
            return Ok(Some(p));
        }
    }
    Ok(None)
}

/// Pairs `lambda < lambda'` from `lambdas` where (D_lambda) passes on the
/// sample but (D_lambda') fails. Monotonicity of (D) in lambda is not known to
/// hold; this only records what the sample shows.
pub fn d_monotonicity_counterexamples(
    space: &SpaceWithGeodesic,
    map: &MapUnderTest,
    lambdas: &[f64],
    sample: &[Point],
    tol: f64,
) -> Result<Vec<(f64, f64)>> {
    let mut sorted = lambdas.to_vec();
    sorted.sort_by(f64::total_cmp);
    let passed = sorted
        .iter()
        .map(|&l| Ok((l, check_condition_d(space, map, l, sample, tol)?.passed)))
        .collect::<Result<Vec<_>>>()?;
    let mut out = Vec::new();
    for (i, &(l, ok)) in passed.iter().enumerate() {
        for &(lp, okp) in &passed[i + 1..] {
            if ok && !okp && l < lp {
                out.push((l, lp));
            }
        }
    }
    Ok(out)
}
