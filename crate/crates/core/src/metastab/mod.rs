//! Metastability: least witnesses for a sampling function, oscillation,
//! adversarial sampling functions, in-sample Cauchy moduli and family-wide
//! empirical bounds.

mod family;
mod fspec;

use serde::{Deserialize, Serialize};

pub use family::{
    uniform_bound, uniform_bound_fixedpoint, FamilyKind, FamilyResult, FamilySpec, Instance,
    InstanceOutcome, MetastabSettings,
};
pub use fspec::{FExpr, FSpec};

use crate::error::{check_param, Error, Result};
use crate::geom::{GeodesicSpace, Point, SpaceKind, SpaceWithGeodesic};
use crate::iterate::IterationTrace;

pub const DEFAULT_CAP: usize = 1000;

/// A finite sequence in a pseudometric space, indexed from 1.
pub trait MetricSequence {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `d(x_i, x_j)`; 1-based, unchecked.
    fn dist(&self, i: usize, j: usize) -> f64;

    /// Diameter of `{x_a, ..., x_b}`; 1-based, unchecked.
    fn window_diameter(&self, a: usize, b: usize) -> f64 {
        let mut m: f64 = 0.0;
        for i in a..=b {
            for j in i + 1..=b {
                m = m.max(self.dist(i, j));
            }
        }
        m
    }
}

fn real_window(xs: &[f64]) -> f64 {
    let (lo, hi) = xs
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        });
    hi - lo
}

impl MetricSequence for [f64] {
    fn len(&self) -> usize {
        <[f64]>::len(self)
    }

    fn dist(&self, i: usize, j: usize) -> f64 {
        (self[i - 1] - self[j - 1]).abs()
    }

    fn window_diameter(&self, a: usize, b: usize) -> f64 {
        real_window(&self[a - 1..b])
    }
}

impl MetricSequence for Vec<f64> {
    fn len(&self) -> usize {
        self.as_slice().len()
    }

    fn dist(&self, i: usize, j: usize) -> f64 {
        self.as_slice().dist(i, j)
    }

    fn window_diameter(&self, a: usize, b: usize) -> f64 {
        self.as_slice().window_diameter(a, b)
    }
}

/// Points measured with the distance of `space`.
pub struct PointSequence<'a> {
    pub space: &'a SpaceWithGeodesic,
    pub points: &'a [Point],
}

impl MetricSequence for PointSequence<'_> {
    fn len(&self) -> usize {
        self.points.len()
    }

    fn dist(&self, i: usize, j: usize) -> f64 {
        self.space.dist(&self.points[i - 1], &self.points[j - 1])
    }

    fn window_diameter(&self, a: usize, b: usize) -> f64 {
        if let SpaceKind::Interval { .. } = self.space.kind() {
            let xs: Vec<f64> = self.points[a - 1..b].iter().map(Point::x).collect();
            return real_window(&xs);
        }
        let mut m: f64 = 0.0;
        for i in a..=b {
            for j in i + 1..=b {
                m = m.max(self.dist(i, j));
            }
        }
        m
    }
}

/// `max d(x_i, x_j)` over `i, j` in `[a, b]`.
pub fn oscillation<S: MetricSequence + ?Sized>(seq: &S, a: usize, b: usize) -> Result<f64> {
    if a == 0 || a > b || b > seq.len() {
        return Err(Error::IndexOutOfRange {
            a,
            b,
            len: seq.len(),
        });
    }
    Ok(seq.window_diameter(a, b))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetastabilityReport {
    pub epsilon: f64,
    pub witness_n: Option<usize>,
    /// Oscillation over `[n, max(n, F(n))]` at the witness.
    pub oscillation_at_witness: Option<f64>,
    pub scan_cap: usize,
    pub exhausted: bool,
}

/// Least `n <= cap` with `oscillation(seq, n, max(n, F(n))) < epsilon`.
pub fn least_witness<S: MetricSequence + ?Sized>(
    seq: &S,
    f: &FSpec,
    epsilon: f64,
    cap: usize,
) -> Result<MetastabilityReport> {
    check_param("epsilon", epsilon, epsilon > 0.0, "> 0")?;
    if cap == 0 {
        return Err(Error::Precondition("cap must be at least 1".into()));
    }
    for n in 1..=cap {
        let end = f.window_end(n)?;
        if end > seq.len() {
            return Err(Error::InsufficientData {
                required: end,
                available: seq.len(),
            });
        }
        let osc = seq.window_diameter(n, end);
        if osc < epsilon {
            return Ok(MetastabilityReport {
                epsilon,
                witness_n: Some(n),
                oscillation_at_witness: Some(osc),
                scan_cap: cap,
                exhausted: false,
            });
        }
    }
    Ok(MetastabilityReport {
        epsilon,
        witness_n: None,
        oscillation_at_witness: None,
        scan_cap: cap,
        exhausted: true,
    })
}

/// For each `n <= cap`, the least `j >= n` such that some `i` in `[n, j)` has
/// `d(x_i, x_j) >= epsilon`; the table `n -> j` defeats every witness up to
/// `cap`. `None` when some `n` has no such pair in the data.
#[allow(non_snake_case)]
pub fn counterexample_F<S: MetricSequence + ?Sized>(
    seq: &S,
    epsilon: f64,
    cap: usize,
) -> Option<FSpec> {
    if cap == 0 || !(epsilon > 0.0) {
        return None;
    }
    let mut table = std::collections::BTreeMap::new();
    for n in 1..=cap.min(seq.len()) {
        let j = (n + 1..=seq.len()).find(|&j| (n..j).any(|i| seq.dist(i, j) >= epsilon))?;
        table.insert(n, j);
    }
    if table.len() < cap {
        return None;
    }
    Some(FSpec::Table(table))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CauchyEstimate {
    pub epsilon: f64,
    /// Least `K` with `oscillation(seq, K, N) < epsilon`; `None` for
    /// `epsilon <= 0`.
    pub k: Option<usize>,
    /// Always true: the tail beyond the data is unknown.
    pub in_sample: bool,
    /// The oscillation at `K` or at `K - 1` lies within `tol` of `epsilon`.
    pub marginal: bool,
}

/// In-sample Cauchy modulus for each `epsilon`.
pub fn cauchy_modulus_estimate<S: MetricSequence + ?Sized>(
    seq: &S,
    epsilons: &[f64],
    tol: f64,
) -> Vec<CauchyEstimate> {
    let len = seq.len();
    // tail[k - 1] = oscillation(seq, k, N)
    let mut tail = vec![0.0; len];
    for k in (1..len).rev() {
        let reach = (k + 1..=len).map(|j| seq.dist(k, j)).fold(0.0, f64::max);
        tail[k - 1] = f64::max(tail[k], reach);
    }
    epsilons
        .iter()
        .map(|&epsilon| {
            let k = if epsilon > 0.0 && len > 0 {
                tail.iter().position(|&o| o < epsilon).map(|i| i + 1)
            } else {
                None
            };
            let near = |i: usize| (tail[i] - epsilon).abs() <= tol;
            let marginal = k.is_some_and(|k| near(k - 1) || (k >= 2 && near(k - 2)));
            CauchyEstimate {
                epsilon,
                k,
                in_sample: true,
                marginal,
            }
        })
        .collect()
}

/// Which sequence of a trace a metastability scan runs on.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SequenceMode {
    /// `r_n = d(x_n, T x_n)`.
    #[default]
    Residual,
    /// `d_n = d(x_n, x_{n+1}) = lambda r_n`.
    Step,
    /// The iterates themselves.
    Points,
}

impl SequenceMode {
    pub fn name(self) -> &'static str {
        match self {
            SequenceMode::Residual => "residual",
            SequenceMode::Step => "step",
            SequenceMode::Points => "points",
        }
    }
}

/// [`least_witness`] on one sequence of a trace.
pub fn trace_witness(
    space: &SpaceWithGeodesic,
    trace: &IterationTrace,
    mode: SequenceMode,
    f: &FSpec,
    epsilon: f64,
    cap: usize,
) -> Result<MetastabilityReport> {
    match mode {
        SequenceMode::Residual => least_witness(trace.residuals.as_slice(), f, epsilon, cap),
        SequenceMode::Step => least_witness(trace.steps.as_slice(), f, epsilon, cap),
        SequenceMode::Points => least_witness(
            &PointSequence {
                space,
                points: &trace.points,
            },
            f,
            epsilon,
            cap,
        ),
    }
}
