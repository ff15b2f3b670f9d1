//! Self-maps under test, possibly discontinuous, and sampling verifiers for the
//! conditions they are claimed to satisfy.

mod conditions;
mod report;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{GeodesicSpace, Point};

pub use conditions::{
    check_condition_c, check_condition_d, check_condition_e, check_directional_nonexpansive,
    check_nonexpansive, check_quasi_nonexpansive_at, d_monotonicity_counterexamples,
    smallest_passing, ANTECEDENT_SLACK,
};
pub use report::{ConditionReport, Witness};

/// The single discontinuity of the toy map: `T(3) = 1`, `T(x) = 0` otherwise.
pub const SUZUKI_JUMP: f64 = 3.0;
pub const SUZUKI_JUMP_IMAGE: f64 = 1.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MapKind {
    /// On `[0, 3]`: `T(3) = 1`, `T(x) = 0` for `x != 3`.
    SuzukiToy,
    Identity,
    Constant {
        value: Vec<f64>,
    },
    /// `x -> scale * x + offset`, coordinate-wise.
    Affine {
        scale: f64,
        offset: Vec<f64>,
    },
    /// Planar rotation by `angle` about `center`, then shrink toward it by `factor`.
    RotationShrink {
        center: [f64; 2],
        angle: f64,
        factor: f64,
    },
    /// Piecewise-constant map on an interval: `values[k]` on the k-th cell cut
    /// by the sorted `breaks` (a break belongs to the cell on its right), and
    /// `jumps` overriding single points exactly.
    PiecewiseJump {
        breaks: Vec<f64>,
        values: Vec<f64>,
        #[serde(default)]
        jumps: Vec<(f64, f64)>,
    },
    /// Linear operator `x -> A x` (row-major).
    Matrix {
        rows: Vec<Vec<f64>>,
    },
    /// User table of `(point, image)` on an interval; exact hits return the
    /// tabulated image, other points interpolate linearly between neighbours
    /// and clamp outside the table's range.
    Table {
        entries: Vec<(f64, f64)>,
    },
}

impl MapKind {
    pub fn name(&self) -> &'static str {
        match self {
            MapKind::SuzukiToy => "suzuki_toy",
            MapKind::Identity => "identity",
            MapKind::Constant { .. } => "constant",
            MapKind::Affine { .. } => "affine",
            MapKind::RotationShrink { .. } => "rotation_shrink",
            MapKind::PiecewiseJump { .. } => "piecewise_jump",
            MapKind::Matrix { .. } => "matrix",
            MapKind::Table { .. } => "table",
        }
    }

    pub fn is_linear(&self) -> bool {
        matches!(self, MapKind::Identity | MapKind::Matrix { .. })
    }

    /// Reads a two-column `point image` table; whitespace or comma separated,
    /// `#` starts a comment.
    pub fn table_from_str(text: &str) -> Result<MapKind> {
        let mut map = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .collect();
            let bad = || Error::InvalidPoint(format!("table line {}: `{line}`", lineno + 1));
            if fields.len() != 2 {
                return Err(bad());
            }
            let x: f64 = fields[0].parse().map_err(|_| bad())?;
            let y: f64 = fields[1].parse().map_err(|_| bad())?;
            if !x.is_finite() || !y.is_finite() {
                return Err(bad());
            }
            if map.insert(x.to_bits(), (x, y)).is_some() {
                return Err(Error::InvalidPoint(format!(
                    "table line {}: duplicate point {x}",
                    lineno + 1
                )));
            }
        }
        if map.is_empty() {
            return Err(Error::InvalidPoint("empty map table".into()));
        }
        let mut entries: Vec<(f64, f64)> = map.into_values().collect();
        entries.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(MapKind::Table { entries })
    }

    pub(crate) fn image(&self, x: &Point) -> Result<Point> {
        let need_dim = |d: usize| -> Result<()> {
            if x.dim() == d {
                Ok(())
            } else {
                Err(Error::DimensionMismatch {
                    expected: d,
                    found: x.dim(),
                })
            }
        };
        Ok(match self {
            MapKind::SuzukiToy => {
                need_dim(1)?;
                // exact comparison against the stored jump point
                if x.x() == SUZUKI_JUMP {
                    Point::scalar(SUZUKI_JUMP_IMAGE)
                } else {
                    Point::scalar(0.0)
                }
            }
            MapKind::Identity => x.clone(),
            MapKind::Constant { value } => {
                need_dim(value.len())?;
                value.clone().into()
            }
            MapKind::Affine { scale, offset } => {
                need_dim(offset.len())?;
                Point::new(
                    x.coords()
                        .iter()
                        .zip(offset)
                        .map(|(c, b)| scale * c + b)
                        .collect(),
                )
            }
            MapKind::RotationShrink {
                center,
                angle,
                factor,
            } => {
                need_dim(2)?;
                let (dx, dy) = (x[0] - center[0], x[1] - center[1]);
                let (s, c) = angle.sin_cos();
                Point::new(vec![
                    center[0] + factor * (c * dx - s * dy),
                    center[1] + factor * (s * dx + c * dy),
                ])
            }
            MapKind::PiecewiseJump {
                breaks,
                values,
                jumps,
            } => {
                need_dim(1)?;
                let v = x.x();
                if let Some(&(_, img)) = jumps.iter().find(|(p, _)| *p == v) {
                    Point::scalar(img)
                } else {
                    let cell = breaks.partition_point(|b| *b <= v);
                    Point::scalar(values[cell])
                }
            }
            MapKind::Matrix { rows } => {
                need_dim(rows.len())?;
                Point::new(
                    rows.iter()
                        .map(|r| r.iter().zip(x.coords()).map(|(a, c)| a * c).sum())
                        .collect(),
                )
            }
            MapKind::Table { entries } => {
                need_dim(1)?;
                Point::scalar(interpolate(entries, x.x()))
            }
        })
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidPoint(format!("{} map: {m}", self.name())));
        match self {
            MapKind::Affine { scale, offset } => {
                if !scale.is_finite() || offset.is_empty() || offset.iter().any(|b| !b.is_finite())
                {
                    return bad("scale and offset must be finite, offset nonempty");
                }
            }
            MapKind::Constant { value } if value.is_empty() => return bad("empty value"),
            MapKind::RotationShrink { factor, angle, .. } => {
                if !(factor.is_finite() && *factor >= 0.0 && angle.is_finite()) {
                    return bad("factor must be finite and nonnegative");
                }
            }
            MapKind::PiecewiseJump { breaks, values, .. } => {
                if values.len() != breaks.len() + 1 {
                    return bad("needs exactly one more value than breaks");
                }
                if breaks.windows(2).any(|w| w[0] > w[1]) {
                    return bad("breaks must be sorted");
                }
            }
            MapKind::Matrix { rows } => {
                if rows.is_empty() || rows.iter().any(|r| r.len() != rows.len()) {
                    return bad("matrix must be square and nonempty");
                }
            }
            MapKind::Table { entries }
                if (entries.is_empty() || entries.windows(2).any(|w| w[0].0 >= w[1].0)) => {
                    return bad("entries must be nonempty with strictly increasing points");
                }
            _ => {}
        }
        Ok(())
    }
}

fn interpolate(entries: &[(f64, f64)], x: f64) -> f64 {
    let i = entries.partition_point(|(p, _)| *p < x);
    if i < entries.len() && entries[i].0 == x {
        return entries[i].1;
    }
    if i == 0 {
        return entries[0].1;
    }
    if i == entries.len() {
        return entries[i - 1].1;
    }
    let (x0, y0) = entries[i - 1];
    let (x1, y1) = entries[i];
    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
}

/// A total self-map together with the parameters it is claimed to satisfy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapUnderTest {
    #[serde(flatten)]
    pub kind: MapKind,
    #[serde(default)]
    pub claimed_lambda: Option<f64>,
    #[serde(default)]
    pub claimed_mu: Option<f64>,
}

impl MapUnderTest {
    pub fn new(kind: MapKind) -> Result<Self> {
        kind.validate()?;
        Ok(MapUnderTest {
            kind,
            claimed_lambda: None,
            claimed_mu: None,
        })
    }

    pub fn suzuki_toy() -> Self {
        MapUnderTest::new(MapKind::SuzukiToy)
            .expect("valid")
            .with_claims(Some(0.5), Some(3.0))
    }

    pub fn identity() -> Self {
        MapUnderTest::new(MapKind::Identity).expect("valid")
    }

    pub fn affine(scale: f64, offset: f64) -> Result<Self> {
        MapUnderTest::new(MapKind::Affine {
            scale,
            offset: vec![offset],
        })
    }

    pub fn with_claims(mut self, lambda: Option<f64>, mu: Option<f64>) -> Self {
        self.claimed_lambda = lambda;
        self.claimed_mu = mu;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.kind.validate()
    }

    /// `Tx`; fails when `x` is not in `space` or `Tx` leaves it.
    pub fn apply<S: GeodesicSpace + ?Sized>(&self, space: &S, x: &Point) -> Result<Point> {
        space.validate(x).map_err(|e| {
            Error::Domain(format!(
                "{} applied outside its space: {e}",
                self.kind.name()
            ))
        })?;
        let y = self.kind.image(x)?;
        if !space.contains(&y) {
            return Err(Error::Domain(format!(
                "{} maps {x} to {y}, outside the space",
                self.kind.name()
            )));
        }
        Ok(y)
    }

    /// Points where the map is discontinuous or tabulated; samples should
    /// contain them.
    pub fn special_points(&self) -> Vec<Point> {
        match &self.kind {
            MapKind::SuzukiToy => vec![Point::scalar(SUZUKI_JUMP)],
            MapKind::PiecewiseJump { breaks, jumps, .. } => breaks
                .iter()
                .copied()
                .chain(jumps.iter().map(|j| j.0))
                .map(Point::scalar)
                .collect(),
            MapKind::Table { entries } => entries.iter().map(|e| Point::scalar(e.0)).collect(),
            _ => Vec::new(),
        }
    }
}
