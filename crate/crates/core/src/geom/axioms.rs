//! Sampling verifiers for the linear-structure axioms and for hyperbolic type.

use std::fmt;

use serde::Serialize;

use super::space::check_unit;
use super::{GeodesicSpace, Point};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AxiomPart {
    /// `d(L_t(x,y), L_t'(x,y)) = |t - t'| d(x,y)`.
    Isometry,
    /// `d(L_t(x,y), L_{1-t}(y,x)) = 0`.
    Symmetry,
    /// `d(p, L_t(x,y)) <= (1-t) d(p,x) + t d(p,y)`.
    HyperbolicType,
}

impl fmt::Display for AxiomPart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AxiomPart::Isometry => "isometry",
            AxiomPart::Symmetry => "symmetry",
            AxiomPart::HyperbolicType => "hyperbolic_type",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AxiomWitness {
    pub part: AxiomPart,
    /// `(x, y)` for the linear axioms, `(p, x, y)` for hyperbolic type.
    pub points: Vec<Point>,
    pub t: f64,
    pub t_prime: Option<f64>,
}

impl fmt::Display for AxiomWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:", self.part)?;
        for p in &self.points {
            write!(f, " {p}")?;
        }
        write!(f, " t={}", self.t)?;
        if let Some(tp) = self.t_prime {
            write!(f, " t'={tp}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AxiomReport {
    pub worst_violation: f64,
    /// Present exactly when `worst_violation > tolerance`.
    pub witness: Option<AxiomWitness>,
    pub samples_checked: usize,
    pub tolerance: f64,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.worst_violation <= self.tolerance
    }
}

struct Worst {
    value: f64,
    witness: Option<AxiomWitness>,
    checked: usize,
}

impl Worst {
    fn new() -> Self {
        Worst {
            value: 0.0,
            witness: None,
            checked: 0,
        }
    }

    fn offer(&mut self, violation: f64, make: impl FnOnce() -> AxiomWitness) {
        self.checked += 1;
        // NaN counts as a violation.
        if violation > self.value || (violation.is_nan() && !self.value.is_nan()) {
            self.value = violation;
            self.witness = Some(make());
        }
    }

    fn finish(self, tol: f64) -> AxiomReport {
        let witness = if self.value > tol || self.value.is_nan() {
            self.witness
        } else {
            None
        };
        AxiomReport {
            worst_violation: self.value,
            witness,
            samples_checked: self.checked,
            tolerance: tol,
        }
    }
}

fn check_grid(t_grid: &[f64]) -> Result<()> {
    t_grid.iter().try_for_each(|&t| check_unit("t", t))
}

/// Worst violation of the isometry and symmetry axioms of a linear structure
/// over `pairs x (t, t')` for all `t, t'` in `t_grid`.
pub fn check_linear_axioms<S: GeodesicSpace + ?Sized>(
    space: &S,
    pairs: &[(Point, Point)],
    t_grid: &[f64],
    tol: f64,
) -> Result<AxiomReport> {
    if pairs.is_empty() || t_grid.is_empty() {
        return Err(Error::EmptySample);
    }
    check_grid(t_grid)?;
    let mut worst = Worst::new();
    for (x, y) in pairs {
        space.validate(x)?;
        space.validate(y)?;
        let dxy = space.dist(x, y);
        let path: Vec<Point> = t_grid.iter().map(|&t| space.geodesic(x, y, t)).collect();
        for (i, &t) in t_grid.iter().enumerate() {
            let back = space.geodesic(y, x, 1.0 - t);
            let v = space.dist(&path[i], &back);
            worst.offer(v, || AxiomWitness {
                part: AxiomPart::Symmetry,
                points: vec![x.clone(), y.clone()],
                t,
                t_prime: None,
            });
            for (j, &tp) in t_grid.iter().enumerate() {
                let v = (space.dist(&path[i], &path[j]) - (t - tp).abs() * dxy).abs();
                worst.offer(v, || AxiomWitness {
                    part: AxiomPart::Isometry,
                    points: vec![x.clone(), y.clone()],
                    t,
                    t_prime: Some(tp),
                });
            }
        }
    }
    Ok(worst.finish(tol))
}

/// Worst value of `(d(p, L_t(x,y)) -. (1-t) d(p,x)) -. t d(p,y)` over
/// `triples x t_grid`.
pub fn check_hyperbolic_type<S: GeodesicSpace + ?Sized>(
    space: &S,
    triples: &[(Point, Point, Point)],
    t_grid: &[f64],
    tol: f64,
) -> Result<AxiomReport> {
    if triples.is_empty() || t_grid.is_empty() {
        return Err(Error::EmptySample);
    }
    check_grid(t_grid)?;
    let mut worst = Worst::new();
    for (p, x, y) in triples {
        for q in [p, x, y] {
            space.validate(q)?;
        }
        let (dpx, dpy) = (space.dist(p, x), space.dist(p, y));
        for &t in t_grid {
            let m = space.geodesic(x, y, t);
            let v = tsub(tsub(space.dist(p, &m), (1.0 - t) * dpx), t * dpy);
            worst.offer(v, || AxiomWitness {
                part: AxiomPart::HyperbolicType,
                points: vec![p.clone(), x.clone(), y.clone()],
                t,
                t_prime: None,
            });
        }
    }
    Ok(worst.finish(tol))
}

/// Truncated subtraction `a -. b = max(a - b, 0)`.
pub fn tsub(a: f64, b: f64) -> f64 {
    (a - b).max(0.0)
}
