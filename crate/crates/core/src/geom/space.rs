use std::cmp::Ordering;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::Point;
use crate::error::{check_param, Error, Result};

/// Distances below this are treated as zero wherever a check asks for `d = 0`.
pub const ZERO_DISTANCE: f64 = 1e-9;

/// Slack allowed when deciding membership in a box or on a sphere.
const CONTAINMENT_SLACK: f64 = 1e-12;

/// A bounded pseudometric space carrying a linear (geodesic) structure.
///
/// `dist` and `geodesic` are the raw operations and assume points of the right
/// dimension; the provided `distance` and `geodesic_point` validate their
/// arguments first.
pub trait GeodesicSpace: Sync {
    fn dim(&self) -> usize;

    /// Upper bound `D` on all distances in the space.
    fn diameter_bound(&self) -> f64;

    fn contains(&self, x: &Point) -> bool;

    fn dist(&self, x: &Point, y: &Point) -> f64;

    /// `L(x, y, t)`.
    fn geodesic(&self, x: &Point, y: &Point, t: f64) -> Point;

    fn validate(&self, x: &Point) -> Result<()> {
        if x.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.dim(),
            });
        }
        if x.coords().iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidPoint(format!("non-finite coordinate in {x}")));
        }
        if !self.contains(x) {
            return Err(Error::InvalidPoint(format!("{x} is not in the space")));
        }
        Ok(())
    }

    fn distance(&self, x: &Point, y: &Point) -> Result<f64> {
        self.validate(x)?;
        self.validate(y)?;
        Ok(self.dist(x, y))
    }

    fn geodesic_point(&self, x: &Point, y: &Point, t: f64) -> Result<Point> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::Domain(format!(
                "geodesic parameter t = {t} not in [0, 1]"
            )));
        }
        self.validate(x)?;
        self.validate(y)?;
        Ok(self.geodesic(x, y, t))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Norm {
    L1,
    L2,
    Sup,
}

impl Norm {
    fn of_difference(self, x: &[f64], y: &[f64]) -> f64 {
        let diffs = x.iter().zip(y).map(|(a, b)| (a - b).abs());
        match self {
            Norm::L1 => diffs.sum(),
            Norm::L2 => diffs.map(|d| d * d).sum::<f64>().sqrt(),
            Norm::Sup => diffs.fold(0.0, f64::max),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpaceKind {
    /// `[lo, hi]` with `|x - y|`.
    Interval { lo: f64, hi: f64 },
    /// Axis-aligned box `prod [lo_i, hi_i]` under a p-norm.
    Box {
        lo: Vec<f64>,
        hi: Vec<f64>,
        norm: Norm,
    },
    /// Closed norm ball.
    Ball {
        center: Vec<f64>,
        radius: f64,
        norm: Norm,
    },
    /// 2-sphere of the given radius in R^3 with the great-circle metric.
    Sphere { radius: f64 },
}

/// Selector for the linear structure `L`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Geodesic {
    /// `(1 - t) x + t y`.
    Affine,
    /// The alternative structure `L'` on the sup-norm plane: the pair
    /// `(0,0), (2,0)` is joined by the path through `(1,1)`, every other pair
    /// affinely.
    SupNormDetour,
    /// Minimal great-circle arcs on the sphere.
    GreatCircle,
}

const DETOUR_START: [f64; 2] = [0.0, 0.0];
const DETOUR_END: [f64; 2] = [2.0, 0.0];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpaceWithGeodesic {
    kind: SpaceKind,
    geodesic: Geodesic,
    diameter: f64,
}

impl SpaceWithGeodesic {
    /// Builds a space with its default linear structure (affine, or great
    /// circles on the sphere).
    pub fn new(kind: SpaceKind) -> Result<Self> {
        let geodesic = match kind {
            SpaceKind::Sphere { .. } => Geodesic::GreatCircle,
            _ => Geodesic::Affine,
        };
        Self::with_geodesic(kind, geodesic)
    }

    pub fn with_geodesic(kind: SpaceKind, geodesic: Geodesic) -> Result<Self> {
        let diameter = match &kind {
            SpaceKind::Interval { lo, hi } => {
                if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                    return Err(Error::InvalidSpace(format!("interval [{lo}, {hi}]")));
                }
                hi - lo
            }
            SpaceKind::Box { lo, hi, norm } => {
                if lo.is_empty() || lo.len() != hi.len() {
                    return Err(Error::InvalidSpace(
                        "box bounds must be nonempty and of equal length".into(),
                    ));
                }
                if lo
                    .iter()
                    .zip(hi)
                    .any(|(a, b)| !(a.is_finite() && b.is_finite() && a <= b))
                {
                    return Err(Error::InvalidSpace("box needs finite lo <= hi".into()));
                }
                norm.of_difference(lo, hi)
            }
            SpaceKind::Ball { center, radius, .. } => {
                if center.is_empty() || !(radius.is_finite() && *radius > 0.0) {
                    return Err(Error::InvalidSpace(
                        "ball needs a center and radius > 0".into(),
                    ));
                }
                2.0 * radius
            }
            SpaceKind::Sphere { radius } => {
                if !(radius.is_finite() && *radius > 0.0) {
                    return Err(Error::InvalidSpace("sphere radius must be > 0".into()));
                }
                PI * radius
            }
        };
        let space = SpaceWithGeodesic {
            kind,
            geodesic,
            diameter,
        };
        match (geodesic, &space.kind) {
            (Geodesic::GreatCircle, SpaceKind::Sphere { .. }) => {}
            (Geodesic::GreatCircle, _) => {
                return Err(Error::InvalidSpace(
                    "great-circle structure needs a sphere".into(),
                ))
            }
            (_, SpaceKind::Sphere { .. }) => {
                return Err(Error::InvalidSpace(
                    "the sphere only carries the great-circle structure".into(),
                ))
            }
            (
                Geodesic::SupNormDetour,
                SpaceKind::Box {
                    norm: Norm::Sup,
                    lo,
                    ..
                },
            )
            | (
                Geodesic::SupNormDetour,
                SpaceKind::Ball {
                    norm: Norm::Sup,
                    center: lo,
                    ..
                },
            ) if lo.len() == 2 => {
                let ends = [Point::from(DETOUR_START), Point::from(DETOUR_END)];
                if ends.iter().all(|p| space.contains(p)) && !space.contains(&[1.0, 1.0].into()) {
                    return Err(Error::InvalidSpace(
                        "space contains (0,0) and (2,0) but not the detour vertex (1,1)".into(),
                    ));
                }
            }
            (Geodesic::SupNormDetour, _) => {
                return Err(Error::InvalidSpace(
                    "the detour structure lives on the sup-norm plane".into(),
                ))
            }
            (Geodesic::Affine, _) => {}
        }
        Ok(space)
    }

    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        Self::new(SpaceKind::Interval { lo, hi })
    }

    pub fn norm_box(lo: Vec<f64>, hi: Vec<f64>, norm: Norm) -> Result<Self> {
        Self::new(SpaceKind::Box { lo, hi, norm })
    }

    pub fn unit_sphere() -> Self {
        Self::new(SpaceKind::Sphere { radius: 1.0 }).expect("unit sphere is valid")
    }

    pub fn kind(&self) -> &SpaceKind {
        &self.kind
    }

    pub fn geodesic_kind(&self) -> Geodesic {
        self.geodesic
    }

    /// Designated boundary and special points: interval endpoints, box corners
    /// `lo`/`hi`, the ball center, the sphere's poles.
    pub fn special_points(&self) -> Vec<Point> {
        match &self.kind {
            SpaceKind::Interval { lo, hi } => vec![Point::scalar(*lo), Point::scalar(*hi)],
            SpaceKind::Box { lo, hi, .. } => vec![lo.clone().into(), hi.clone().into()],
            SpaceKind::Ball { center, .. } => vec![center.clone().into()],
            SpaceKind::Sphere { radius } => {
                vec![[0.0, 0.0, *radius].into(), [0.0, 0.0, -*radius].into()]
            }
        }
    }

    fn slack(&self) -> f64 {
        let scale = match &self.kind {
            SpaceKind::Interval { lo, hi } => lo.abs().max(hi.abs()),
            SpaceKind::Box { lo, hi, .. } => {
                lo.iter().chain(hi).fold(0.0_f64, |m, c| m.max(c.abs()))
            }
            SpaceKind::Ball { center, radius, .. } => {
                center.iter().fold(*radius, |m, c| m.max(c.abs()))
            }
            SpaceKind::Sphere { radius } => *radius,
        };
        CONTAINMENT_SLACK * scale.max(1.0)
    }

    fn detour(&self, x: &Point, y: &Point, t: f64) -> Option<Point> {
        let path = |s: f64| -> Point {
            if s <= 1.0 {
                [s, s].into()
            } else {
                [s, 2.0 - s].into()
            }
        };
        let (xs, ys) = (x.coords(), y.coords());
        if xs == DETOUR_START && ys == DETOUR_END {
            Some(path(2.0 * t))
        } else if xs == DETOUR_END && ys == DETOUR_START {
            Some(path(2.0 * (1.0 - t)))
        } else {
            None
        }
    }

    fn great_circle(&self, x: &Point, y: &Point, t: f64, radius: f64) -> Point {
        let theta = sphere_angle(x.coords(), y.coords());
        if theta * radius < ZERO_DISTANCE {
            return x.clone();
        }
        let u = x.scaled(1.0 / x.norm2());
        let v = y.scaled(1.0 / y.norm2());
        let sin_theta = theta.sin();
        if sin_theta < 1e-9 {
            if theta > PI / 2.0 {
                return antipodal_arc(x, y, t, radius);
            }
            let p = u.lerp(&v, t);
            return p.scaled(radius / p.norm2());
        }
        let a = ((1.0 - t) * theta).sin() / sin_theta;
        let b = (t * theta).sin() / sin_theta;
        let p: Vec<f64> = u
            .coords()
            .iter()
            .zip(v.coords())
            .map(|(ui, vi)| a * ui + b * vi)
            .collect();
        let p = Point::new(p);
        p.scaled(radius / p.norm2())
    }
}

fn cross(a: &[f64], b: &[f64]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Angle between two vectors of R^3, accurate near 0 and pi.
fn sphere_angle(a: &[f64], b: &[f64]) -> f64 {
    let c = cross(a, b);
    let sin_part = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
    let cos_part: f64 = a.iter().zip(b).map(|(p, q)| p * q).sum();
    sin_part.atan2(cos_part)
}

/// Half great circle between (near-)antipodal points.
///
/// The arc starts at the lexicographically smaller endpoint and runs through
/// the plane spanned by it and the first standard basis vector not parallel to
/// it; the other orientation is the same arc traversed backwards, so
/// `L(x, y, t) = L(y, x, 1 - t)` holds exactly.
fn antipodal_arc(x: &Point, y: &Point, t: f64, radius: f64) -> Point {
    let x_first = x
        .coords()
        .partial_cmp(y.coords()) != Some(Ordering::Greater);
    let (base, s) = if x_first { (x, t) } else { (y, 1.0 - t) };
    let u = base.scaled(1.0 / base.norm2());
    let axis = (0..3)
        .find(|&i| u[i].abs() < 1.0 - 1e-6)
        .expect("a unit vector is parallel to at most one basis vector");
    let mut w = [0.0; 3];
    w[axis] = 1.0;
    let proj = u[axis];
    for (i, wi) in w.iter_mut().enumerate() {
        *wi -= proj * u[i];
    }
    let wn = (w[0] * w[0] + w[1] * w[1] + w[2] * w[2]).sqrt();
    let (c, sn) = ((s * PI).cos(), (s * PI).sin());
    Point::new(
        (0..3)
            .map(|i| radius * (c * u[i] + sn * w[i] / wn))
            .collect(),
    )
}

impl GeodesicSpace for SpaceWithGeodesic {
    fn dim(&self) -> usize {
        match &self.kind {
            SpaceKind::Interval { .. } => 1,
            SpaceKind::Box { lo, .. } => lo.len(),
            SpaceKind::Ball { center, .. } => center.len(),
            SpaceKind::Sphere { .. } => 3,
        }
    }

    fn diameter_bound(&self) -> f64 {
        self.diameter
    }

    fn contains(&self, x: &Point) -> bool {
        if x.dim() != self.dim() {
            return false;
        }
        let slack = self.slack();
        match &self.kind {
            SpaceKind::Interval { lo, hi } => x.x() >= lo - slack && x.x() <= hi + slack,
            SpaceKind::Box { lo, hi, .. } => x
                .coords()
                .iter()
                .zip(lo.iter().zip(hi))
                .all(|(c, (a, b))| *c >= a - slack && *c <= b + slack),
            SpaceKind::Ball {
                center,
                radius,
                norm,
            } => norm.of_difference(x.coords(), center) <= radius + slack,
            SpaceKind::Sphere { radius } => (x.norm2() - radius).abs() <= slack,
        }
    }

    fn dist(&self, x: &Point, y: &Point) -> f64 {
        match &self.kind {
            SpaceKind::Interval { .. } => (x.x() - y.x()).abs(),
            SpaceKind::Box { norm, .. } | SpaceKind::Ball { norm, .. } => {
                norm.of_difference(x.coords(), y.coords())
            }
            SpaceKind::Sphere { radius } => radius * sphere_angle(x.coords(), y.coords()),
        }
    }

    fn geodesic(&self, x: &Point, y: &Point, t: f64) -> Point {
        match (&self.kind, self.geodesic) {
            (SpaceKind::Sphere { radius }, _) => self.great_circle(x, y, t, *radius),
            (_, Geodesic::SupNormDetour) => self.detour(x, y, t).unwrap_or_else(|| x.lerp(y, t)),
            _ => x.lerp(y, t),
        }
    }
}

/// `{0, 1/8, ..., 1}`, plus `lambda` when given.
pub fn default_t_grid(lambda: Option<f64>) -> Vec<f64> {
    let mut grid: Vec<f64> = (0..=8).map(|i| i as f64 / 8.0).collect();
    if let Some(l) = lambda {
        if !grid.contains(&l) {
            grid.push(l);
            grid.sort_by(f64::total_cmp);
        }
    }
    grid
}

pub(crate) fn check_unit(name: &'static str, t: f64) -> Result<()> {
    check_param(name, t, (0.0..=1.0).contains(&t), "[0, 1]")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sup_plane(geodesic: Geodesic) -> SpaceWithGeodesic {
        SpaceWithGeodesic::with_geodesic(
            SpaceKind::Box {
                lo: vec![-1.0, -1.0],
                hi: vec![3.0, 3.0],
                norm: Norm::Sup,
            },
            geodesic,
        )
        .unwrap()
    }

    #[test]
    fn interval_distance() {
        let s = SpaceWithGeodesic::interval(0.0, 3.0).unwrap();
        assert_eq!(s.distance(&1.0.into(), &2.5.into()).unwrap(), 1.5);
        assert_eq!(s.distance(&2.0.into(), &2.0.into()).unwrap(), 0.0);
        assert_eq!(s.diameter_bound(), 3.0);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let s = SpaceWithGeodesic::interval(0.0, 3.0).unwrap();
        let err = s.distance(&[1.0, 2.0].into(), &1.0.into()).unwrap_err();
        assert_eq!(
            err,
            Error::DimensionMismatch {
                expected: 1,
                found: 2
            }
        );
    }

    #[test]
    fn antipodal_sphere_distance_is_pi() {
        let s = SpaceWithGeodesic::unit_sphere();
        let d = s
            .distance(&[1.0, 0.0, 0.0].into(), &[-1.0, 0.0, 0.0].into())
            .unwrap();
        assert!((d - PI).abs() < 1e-15);
    }

    #[test]
    fn affine_geodesic_point() {
        let s = SpaceWithGeodesic::interval(0.0, 3.0).unwrap();
        let m = s
            .geodesic_point(&0.0.into(), &3.0.into(), 1.0 / 3.0)
            .unwrap();
        assert!((m.x() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn t_outside_unit_interval_is_rejected() {
        let s = SpaceWithGeodesic::interval(0.0, 3.0).unwrap();
        assert!(matches!(
            s.geodesic_point(&0.0.into(), &3.0.into(), 1.5),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn detour_path_values() {
        let s = sup_plane(Geodesic::SupNormDetour);
        let (a, b): (Point, Point) = ([0.0, 0.0].into(), [2.0, 0.0].into());
        assert_eq!(s.geodesic_point(&a, &b, 0.25).unwrap(), [0.5, 0.5].into());
        assert_eq!(s.geodesic_point(&a, &b, 0.75).unwrap(), [1.5, 0.5].into());
        assert_eq!(s.geodesic_point(&b, &a, 0.25).unwrap(), [1.5, 0.5].into());
        // other pairs stay affine
        let c: Point = [1.0, 2.0].into();
        assert_eq!(s.geodesic_point(&a, &c, 0.5).unwrap(), [0.5, 1.0].into());
    }

    #[test]
    fn detour_needs_room_for_the_vertex() {
        let r = SpaceWithGeodesic::with_geodesic(
            SpaceKind::Box {
                lo: vec![0.0, 0.0],
                hi: vec![2.0, 0.5],
                norm: Norm::Sup,
            },
            Geodesic::SupNormDetour,
        );
        assert!(matches!(r, Err(Error::InvalidSpace(_))));
    }

    #[test]
    fn sphere_rejects_affine_structure() {
        let r =
            SpaceWithGeodesic::with_geodesic(SpaceKind::Sphere { radius: 1.0 }, Geodesic::Affine);
        assert!(r.is_err());
    }

    #[test]
    fn zero_distance_pair_returns_first_point() {
        let s = SpaceWithGeodesic::unit_sphere();
        let p: Point = [0.0, 1.0, 0.0].into();
        assert_eq!(s.geodesic(&p, &p, 0.3), p);
    }

    #[test]
    fn antipodal_arc_is_symmetric_and_on_sphere() {
        let s = SpaceWithGeodesic::unit_sphere();
        let x: Point = [0.0, 0.0, 1.0].into();
        let y: Point = [0.0, 0.0, -1.0].into();
        for i in 0..=16 {
            let t = i as f64 / 16.0;
            let a = s.geodesic(&x, &y, t);
            let b = s.geodesic(&y, &x, 1.0 - t);
            assert!(s.dist(&a, &b) <= 1e-12);
            assert!(s.contains(&a));
            assert!((s.dist(&x, &a) - t * PI).abs() < 1e-9);
        }
    }

    #[test]
    fn default_grid_includes_lambda() {
        let g = default_t_grid(Some(0.3));
        assert_eq!(g.len(), 10);
        assert!(g.contains(&0.3) && g.contains(&0.0) && g.contains(&1.0));
        assert_eq!(default_t_grid(Some(0.5)).len(), 9);
    }
}
