use std::fmt;

use serde::Serialize;

use crate::geom::Point;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Witness {
    Point(Point),
    Pair(Point, Point),
    /// A point together with the step parameter it failed at.
    PointAt {
        point: Point,
        lambda: f64,
    },
    /// 1-based position in an iteration trace.
    Index(usize),
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::Point(p) => write!(f, "x={p}"),
            Witness::Pair(x, y) => write!(f, "x={x} y={y}"),
            Witness::PointAt { point, lambda } => write!(f, "x={point} lambda={lambda}"),
            Witness::Index(n) => write!(f, "n={n}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionReport {
    pub condition: &'static str,
    pub parameter: Option<f64>,
    pub worst_violation: f64,
    /// Present exactly when the check failed.
    pub witness: Option<Witness>,
    pub samples_checked: usize,
    pub tolerance: f64,
    pub passed: bool,
}

impl ConditionReport {
    pub(crate) fn new(
        condition: &'static str,
        parameter: Option<f64>,
        worst_violation: f64,
        witness: Option<Witness>,
        samples_checked: usize,
        tolerance: f64,
    ) -> Self {
        let passed = worst_violation <= tolerance;
        ConditionReport {
            condition,
            parameter,
            worst_violation,
            witness: if passed { None } else { witness },
            samples_checked,
            tolerance,
            passed,
        }
    }

    /// `C(0.5)`, `E(3)`, `nonexpansive`, ...
    pub fn label(&self) -> String {
        match self.parameter {
            Some(p) => format!("{}({p})", self.condition),
            None => self.condition.to_string(),
        }
    }
}
