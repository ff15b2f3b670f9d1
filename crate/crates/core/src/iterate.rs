//! The lambda-Mann iteration `x_{n+1} = L(x_n, T x_n, lambda)` and the checks
//! run along its traces.

use std::io;

use serde::Serialize;

use crate::csvout;
use crate::error::{check_param, Error, Result};
use crate::geom::{tsub, GeodesicSpace, Point, SpaceWithGeodesic};
use crate::maps::{ConditionReport, MapUnderTest, Witness};

/// Pairs whose `(1 - lambda)^(-n)` exceeds this are skipped by the
/// Goebel-Kirk verifier.
pub const GK_GUARD: f64 = 1e12;

pub const DEFAULT_TRACE_LENGTH: usize = 10_000;

/// Indices are 1-based in the accessors; the vectors are 0-based.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IterationTrace {
    pub lambda: f64,
    /// `x_1 .. x_N`.
    pub points: Vec<Point>,
    /// `y_n = T x_n`.
    pub images: Vec<Point>,
    /// `r_n = d(x_n, T x_n)`.
    pub residuals: Vec<f64>,
    /// `d_n = d(x_n, x_{n+1})`; `d_N` uses the (unstored) `x_{N+1}`.
    pub steps: Vec<f64>,
}

impl IterationTrace {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `x_n`, 1-based.
    pub fn point(&self, n: usize) -> &Point {
        &self.points[n - 1]
    }

    pub fn residual(&self, n: usize) -> f64 {
        self.residuals[n - 1]
    }

    /// Largest `|d_n - lambda r_n|`.
    pub fn step_identity_defect(&self) -> f64 {
        self.steps
            .iter()
            .zip(&self.residuals)
            .map(|(d, r)| (d - self.lambda * r).abs())
            .fold(0.0, f64::max)
    }

    /// CSV with columns `n`, the coordinates of `x_n`, `r_n`, `d_n`.
    pub fn write_csv<W: io::Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let dim = self.points.first().map_or(1, Point::dim);
        let mut header = vec!["n".to_string()];
        header.extend(csvout::coord_columns("x_n", dim));
        header.extend(["r_n".to_string(), "d_n".to_string()]);
        w.write_record(&header)?;
        for (i, p) in self.points.iter().enumerate() {
            let mut row = vec![(i + 1).to_string()];
            row.extend(p.coords().iter().map(|c| csvout::real(*c)));
            row.push(csvout::real(self.residuals[i]));
            row.push(csvout::real(self.steps[i]));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Runs `n` steps of the lambda-Mann iteration from `x1`.
pub fn mann_iterate(
    space: &SpaceWithGeodesic,
    map: &MapUnderTest,
    x1: &Point,
    lambda: f64,
    n: usize,
) -> Result<IterationTrace> {
    check_param("lambda", lambda, lambda > 0.0 && lambda < 1.0, "(0, 1)")?;
    if n < 2 {
        return Err(Error::Precondition(format!(
            "trace length must be at least 2, got {n}"
        )));
    }
    space.validate(x1)?;
    let mut trace = IterationTrace {
        lambda,
        points: Vec::with_capacity(n),
        images: Vec::with_capacity(n),
        residuals: Vec::with_capacity(n),
        steps: Vec::with_capacity(n),
    };
    let mut x = x1.clone();
    for index in 1..=n {
        let tx = map.apply(space, &x).map_err(|e| Error::LeftSpace {
            index,
            detail: e.to_string(),
        })?;
        let next = space.geodesic(&x, &tx, lambda);
        if !space.contains(&next) {
            return Err(Error::LeftSpace {
                index: index + 1,
                detail: format!("iterate {next} is outside the space"),
            });
        }
        trace.residuals.push(space.dist(&x, &tx));
        trace.steps.push(space.dist(&x, &next));
        trace.images.push(tx);
        trace.points.push(std::mem::replace(&mut x, next));
    }
    Ok(trace)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GkReport {
    /// Largest positive part of `lhs - rhs`.
    pub worst_violation: f64,
    /// `(i, n)` of the worst pair, when it exceeds the tolerance.
    pub witness: Option<(usize, usize)>,
    pub pairs_checked: usize,
    /// Pairs skipped because `(1 - lambda)^(-n)` exceeded [`GK_GUARD`].
    pub pairs_skipped: usize,
    pub tolerance: f64,
}

impl GkReport {
    pub fn passed(&self) -> bool {
        self.worst_violation <= self.tolerance
    }
}

/// `lhs - rhs` of the Goebel-Kirk inequality
/// `(1 + n lambda) d(x_i, y_i) <= d(x_i, y_{i+n}) + (1 - lambda)^(-n) (d(x_i, y_i) - d(x_{i+n}, y_{i+n}))`
/// with `y_k = T x_k`; 1-based `i`, `n`.
pub fn goebel_kirk_gap(
    space: &SpaceWithGeodesic,
    trace: &IterationTrace,
    i: usize,
    n: usize,
) -> f64 {
    let lambda = trace.lambda;
    let lhs = (1.0 + n as f64 * lambda) * trace.residual(i);
    let rhs = space.dist(trace.point(i), &trace.images[i + n - 1])
        + (1.0 - lambda).powi(-(n as i32)) * (trace.residual(i) - trace.residual(i + n));
    lhs - rhs
}

/// Checks the Goebel-Kirk inequality for every `(i, n)` with `i + n <= N`.
pub fn verify_goebel_kirk(
    space: &SpaceWithGeodesic,
    trace: &IterationTrace,
    tol: f64,
) -> Result<GkReport> {
    let len = trace.len();
    if len < 3 {
        return Err(Error::Precondition(format!(
            "Goebel-Kirk check needs a trace of length >= 3, got {len}"
        )));
    }
    let mut worst = 0.0;
    let mut at = None;
    let mut checked = 0;
    let mut skipped = 0;
    for n in 1..len {
        let growth = (1.0 - trace.lambda).powi(-(n as i32));
        let valid = len - n;
        if growth > GK_GUARD {
            skipped += valid;
            continue;
        }
        for i in 1..=valid {
            checked += 1;
            let v = goebel_kirk_gap(space, trace, i, n);
            if v > worst || v.is_nan() {
                worst = if v.is_nan() { f64::INFINITY } else { v };
                at = Some((i, n));
            }
        }
    }
    Ok(GkReport {
        worst_violation: worst,
        witness: if worst > tol { at } else { None },
        pairs_checked: checked,
        pairs_skipped: skipped,
        tolerance: tol,
    })
}

/// First 1-based index whose residual is at most `tol`.
pub fn detect_fixed_point(trace: &IterationTrace, tol: f64) -> Option<(usize, Point)> {
    trace
        .residuals
        .iter()
        .position(|r| *r <= tol)
        .map(|i| (i + 1, trace.points[i].clone()))
}

/// Worst `d(p, x_{n+1}) -. d(p, x_n)` along the trace, for an approximate fixed
/// point `p` of `map`.
pub fn check_fejer_monotone(
    space: &SpaceWithGeodesic,
    map: &MapUnderTest,
    trace: &IterationTrace,
    limit_candidate: &Point,
    tol: f64,
) -> Result<ConditionReport> {
    let tp = map.apply(space, limit_candidate)?;
    let r = space.dist(limit_candidate, &tp);
    if r > tol {
        return Err(Error::Precondition(format!(
            "{limit_candidate} is not an approximate fixed point: d(p, Tp) = {r} > {tol}"
        )));
    }
    let dists: Vec<f64> = trace
        .points
        .iter()
        .map(|x| space.dist(limit_candidate, x))
        .collect();
    let mut worst = (0.0, None);
    for (k, w) in dists.windows(2).enumerate() {
        let v = tsub(w[1], w[0]);
        if v > worst.0 {
            worst = (v, Some(k + 1));
        }
    }
    Ok(ConditionReport::new(
        "fejer_monotone",
        None,
        worst.0,
        worst.1.map(Witness::Index),
        dists.len().saturating_sub(1),
        tol,
    ))
}

/// `A_n f = (1/n) sum_{m < n} T^m f` for a linear map.
pub fn ergodic_average(map: &MapUnderTest, f: &Point, n: usize) -> Result<Point> {
    ergodic_averages(map, f, n)?
        .pop()
        .ok_or_else(|| Error::Precondition("ergodic average needs n >= 1".into()))
}

/// `A_1 f, ..., A_n f`.
pub fn ergodic_averages(map: &MapUnderTest, f: &Point, n: usize) -> Result<Vec<Point>> {
    if !map.kind.is_linear() {
        return Err(Error::MapKind {
            expected: "linear (matrix)",
            found: map.kind.name().to_string(),
        });
    }
    if n == 0 {
        return Err(Error::Precondition("ergodic average needs n >= 1".into()));
    }
    let mut sum = vec![0.0; f.dim()];
    let mut power = f.clone();
    let mut out = Vec::with_capacity(n);
    for m in 1..=n {
        for (s, c) in sum.iter_mut().zip(power.coords()) {
            *s += c;
        }
        out.push(Point::new(sum.iter().map(|s| s / m as f64).collect()));
        if m < n {
            power = map.kind.image(&power)?;
        }
    }
    Ok(out)
}
