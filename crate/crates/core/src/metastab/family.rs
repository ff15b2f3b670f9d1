use std::io;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{trace_witness, FSpec, MetastabilityReport, SequenceMode, DEFAULT_CAP};
use crate::csvout;
use crate::error::{check_param, Error, Result};
use crate::geom::{grid_points, GeodesicSpace, Norm, Point, SpaceKind, SpaceWithGeodesic};
use crate::iterate::mann_iterate;
use crate::maps::{check_condition_d, check_condition_e, MapKind, MapUnderTest};
use crate::tbound::beta_profile;

/// Tolerance of the (D)/(E) checks run on trace points.
const CONDITION_TOL: f64 = 1e-9;
/// Trace points (from the start) used for the pairwise (E) check.
const E_CHECK_POINTS: usize = 200;
/// beta is reported for `k = 0..=BETA_DEPTH`.
const BETA_DEPTH: usize = 4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FamilyKind {
    /// `x -> c x + b` on `[0, 1]`, `c` uniform in the range, `b` uniform in
    /// `[0, 1 - c]`, random start.
    AffineContraction { c_min: f64, c_max: f64 },
    /// The toy map rescaled to `[0, 3s]` (jump `3s -> s`), started at the jump.
    ScaledSuzuki { s_min: f64, s_max: f64 },
    /// A constant map on `[0, 1]`, random value and start.
    Constant,
    /// Rotation by a random angle and shrink toward the origin in the closed
    /// Euclidean unit disc, random start.
    RotationShrink { factor_min: f64, factor_max: f64 },
    /// Cycles through the four kinds above with default ranges.
    Mixed,
    /// Every instance is the same space, map and start.
    Single {
        space: SpaceKind,
        map: MapUnderTest,
        x1: Point,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    #[serde(flatten)]
    pub kind: FamilyKind,
    pub count: usize,
    pub seed: u64,
    pub lambda: f64,
    #[serde(default)]
    pub mu: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct Instance {
    pub id: usize,
    pub space: SpaceWithGeodesic,
    pub map: MapUnderTest,
    pub x1: Point,
    pub lambda: f64,
    /// `name(param=value, ...)`.
    pub description: String,
}

fn unit_interval() -> SpaceWithGeodesic {
    SpaceWithGeodesic::interval(0.0, 1.0).expect("valid")
}

fn draw(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.random_range(lo..=hi)
    }
}

fn affine(
    rng: &mut ChaCha8Rng,
    c_min: f64,
    c_max: f64,
) -> Result<(SpaceWithGeodesic, MapUnderTest, Point, String)> {
    let c = draw(rng, c_min, c_max);
    let b = draw(rng, 0.0, 1.0 - c);
    let x1 = draw(rng, 0.0, 1.0);
    Ok((
        unit_interval(),
        MapUnderTest::affine(c, b)?,
        Point::scalar(x1),
        format!("affine_contraction(c={c}, b={b}, x1={x1})"),
    ))
}

fn scaled_suzuki(
    rng: &mut ChaCha8Rng,
    s_min: f64,
    s_max: f64,
) -> Result<(SpaceWithGeodesic, MapUnderTest, Point, String)> {
    let s = draw(rng, s_min, s_max);
    let jump = 3.0 * s;
    let map = MapUnderTest::new(MapKind::PiecewiseJump {
        breaks: vec![],
        values: vec![0.0],
        jumps: vec![(jump, s)],
    })?;
    Ok((
        SpaceWithGeodesic::interval(0.0, jump)?,
        map,
        Point::scalar(jump),
        format!("scaled_suzuki(s={s})"),
    ))
}

fn constant(rng: &mut ChaCha8Rng) -> Result<(SpaceWithGeodesic, MapUnderTest, Point, String)> {
    let v = draw(rng, 0.0, 1.0);
    let x1 = draw(rng, 0.0, 1.0);
    Ok((
        unit_interval(),
        MapUnderTest::new(MapKind::Constant { value: vec![v] })?,
        Point::scalar(x1),
        format!("constant(value={v}, x1={x1})"),
    ))
}

fn rotation(
    rng: &mut ChaCha8Rng,
    f_min: f64,
    f_max: f64,
) -> Result<(SpaceWithGeodesic, MapUnderTest, Point, String)> {
    let factor = draw(rng, f_min, f_max);
    let angle = draw(rng, 0.0, std::f64::consts::TAU);
    let disc = SpaceWithGeodesic::new(SpaceKind::Ball {
        center: vec![0.0, 0.0],
        radius: 1.0,
        norm: Norm::L2,
    })?;
    let rho = draw(rng, 0.0, 1.0).sqrt();
    let phi = draw(rng, 0.0, std::f64::consts::TAU);
    let x1 = Point::new(vec![rho * phi.cos(), rho * phi.sin()]);
    let map = MapUnderTest::new(MapKind::RotationShrink {
        center: [0.0, 0.0],
        angle,
        factor,
    })?;
    let desc = format!("rotation_shrink(angle={angle}, factor={factor}, x1={x1})");
    Ok((disc, map, x1, desc))
}

impl FamilySpec {
    pub fn new(kind: FamilyKind, count: usize, seed: u64, lambda: f64) -> FamilySpec {
        FamilySpec {
            kind,
            count,
            seed,
            lambda,
            mu: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_param(
            "lambda",
            self.lambda,
            self.lambda > 0.0 && self.lambda < 1.0,
            "(0, 1)",
        )?;
        if let Some(mu) = self.mu {
            check_param("mu", mu, mu >= 1.0, ">= 1")?;
        }
        let range = |name, lo: f64, hi: f64, max: f64| {
            check_param(
                name,
                lo,
                lo > 0.0 && lo <= hi && hi < max,
                "0 < min <= max (< 1 for factors)",
            )
        };
        match &self.kind {
            FamilyKind::AffineContraction { c_min, c_max } => range("c_min", *c_min, *c_max, 1.0),
            FamilyKind::RotationShrink {
                factor_min,
                factor_max,
            } => range("factor_min", *factor_min, *factor_max, 1.0 + f64::EPSILON),
            FamilyKind::ScaledSuzuki { s_min, s_max } => {
                range("s_min", *s_min, *s_max, f64::INFINITY)
            }
            FamilyKind::Single { space, map, x1 } => {
                let s = SpaceWithGeodesic::new(space.clone())?;
                map.validate()?;
                s.validate(x1)
            }
            FamilyKind::Constant | FamilyKind::Mixed => Ok(()),
        }
    }

    /// The `id`-th instance; depends only on `(seed, id)`.
    pub fn instance(&self, id: usize) -> Result<Instance> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(id as u64);
        let (space, map, x1, description) = match &self.kind {
            FamilyKind::AffineContraction { c_min, c_max } => affine(&mut rng, *c_min, *c_max)?,
            FamilyKind::ScaledSuzuki { s_min, s_max } => scaled_suzuki(&mut rng, *s_min, *s_max)?,
            FamilyKind::Constant => constant(&mut rng)?,
            FamilyKind::RotationShrink {
                factor_min,
                factor_max,
            } => rotation(&mut rng, *factor_min, *factor_max)?,
            FamilyKind::Mixed => match id % 4 {
                0 => affine(&mut rng, 0.1, 0.9)?,
                1 => scaled_suzuki(&mut rng, 0.25, 1.0)?,
                2 => constant(&mut rng)?,
                _ => rotation(&mut rng, 0.5, 1.0)?,
            },
            FamilyKind::Single { space, map, x1 } => (
                SpaceWithGeodesic::new(space.clone())?,
                map.clone(),
                x1.clone(),
                format!("{}(x1={x1})", map.kind.name()),
            ),
        };
        Ok(Instance {
            id,
            space,
            map,
            x1,
            lambda: self.lambda,
            description,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetastabSettings {
    pub f: FSpec,
    pub epsilon: f64,
    #[serde(default = "default_cap")]
    pub cap: usize,
    /// Defaults to `max_{n <= cap} max(n, F(n)) + 1`.
    #[serde(default)]
    pub trace_length: Option<usize>,
    #[serde(default)]
    pub mode: SequenceMode,
}

fn default_cap() -> usize {
    DEFAULT_CAP
}

impl MetastabSettings {
    pub fn new(f: FSpec, epsilon: f64, cap: usize) -> MetastabSettings {
        MetastabSettings {
            f,
            epsilon,
            cap,
            trace_length: None,
            mode: SequenceMode::Residual,
        }
    }

    pub fn with_mode(mut self, mode: SequenceMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn trace_length(&self) -> Result<usize> {
        match self.trace_length {
            Some(n) => Ok(n),
            None => Ok(self.f.required_length(self.cap)? + 1),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InstanceOutcome {
    pub id: usize,
    pub description: String,
    /// (D_lambda) held on the trace points.
    pub d_verified: bool,
    /// (E_mu) held on the leading trace points (fixed-point variant only).
    pub e_verified: Option<bool>,
    pub report: MetastabilityReport,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FamilyResult {
    pub mode: SequenceMode,
    pub epsilon: f64,
    pub f: String,
    pub instances: Vec<InstanceOutcome>,
    /// Empirical: the max of the per-instance witnesses; `None` when no
    /// instance produced one.
    pub uniform_bound: Option<usize>,
    /// Ids of instances that exhausted the cap.
    pub failures: Vec<usize>,
    /// Largest `beta(k)`, `k = 0..`, over the family's spaces (fixed-point
    /// variant only).
    pub beta: Option<Vec<usize>>,
}

impl FamilyResult {
    fn aggregate(
        mode: SequenceMode,
        settings: &MetastabSettings,
        instances: Vec<InstanceOutcome>,
    ) -> Self {
        let uniform_bound = instances.iter().filter_map(|o| o.report.witness_n).max();
        let failures = instances
            .iter()
            .filter(|o| o.report.exhausted)
            .map(|o| o.id)
            .collect();
        FamilyResult {
            mode,
            epsilon: settings.epsilon,
            f: settings.f.to_string(),
            instances,
            uniform_bound,
            failures,
            beta: None,
        }
    }

    pub fn all_verified(&self) -> bool {
        self.instances
            .iter()
            .all(|o| o.d_verified && o.e_verified.unwrap_or(true))
    }

    /// One row per instance, then a `uniform_bound` row.
    pub fn write_csv<W: io::Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "instance",
            "parameters",
            "mode",
            "epsilon",
            "witness_n",
            "oscillation_at_witness",
            "exhausted",
            "d_verified",
            "e_verified",
        ])?;
        let flag = |b: Option<bool>| b.map(|b| b.to_string()).unwrap_or_default();
        for o in &self.instances {
            w.write_record([
                o.id.to_string(),
                o.description.clone(),
                self.mode.name().to_string(),
                csvout::real(self.epsilon),
                csvout::opt_count(o.report.witness_n),
                csvout::opt_real(o.report.oscillation_at_witness),
                o.report.exhausted.to_string(),
                o.d_verified.to_string(),
                flag(o.e_verified),
            ])?;
        }
        w.write_record([
            "uniform_bound".to_string(),
            format!("empirical max over {} instances", self.instances.len()),
            self.mode.name().to_string(),
            csvout::real(self.epsilon),
            csvout::opt_count(self.uniform_bound),
            String::new(),
            (!self.failures.is_empty()).to_string(),
            self.all_verified().to_string(),
            String::new(),
        ])?;
        w.flush()?;
        Ok(())
    }
}

fn run_instance(
    family: &FamilySpec,
    settings: &MetastabSettings,
    id: usize,
    mode: SequenceMode,
    mu: Option<f64>,
) -> Result<InstanceOutcome> {
    let inst = family.instance(id)?;
    let trace = mann_iterate(
        &inst.space,
        &inst.map,
        &inst.x1,
        inst.lambda,
        settings.trace_length()?,
    )?;
    let d = check_condition_d(
        &inst.space,
        &inst.map,
        inst.lambda,
        &trace.points,
        CONDITION_TOL,
    )?;
    let e_verified = match mu {
        Some(mu) => {
            let head = &trace.points[..trace.len().min(E_CHECK_POINTS)];
            Some(check_condition_e(&inst.space, &inst.map, mu, head, CONDITION_TOL)?.passed)
        }
        None => None,
    };
    let report = trace_witness(
        &inst.space,
        &trace,
        mode,
        &settings.f,
        settings.epsilon,
        settings.cap,
    )?;
    Ok(InstanceOutcome {
        id,
        description: inst.description,
        d_verified: d.passed,
        e_verified,
        report,
    })
}

fn run_family(
    family: &FamilySpec,
    settings: &MetastabSettings,
    mode: SequenceMode,
    mu: Option<f64>,
    threads: Option<usize>,
) -> Result<Vec<InstanceOutcome>> {
    family.validate()?;
    let work = || -> Result<Vec<InstanceOutcome>> {
        (0..family.count)
            .into_par_iter()
            .map(|id| run_instance(family, settings, id, mode, mu))
            .collect()
    };
    match threads {
        None => work(),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Precondition(format!("thread pool: {e}")))?
            .install(work),
    }
}

/// Witness of every instance on the sequence chosen by `settings.mode`
/// (residuals by default), and their max.
pub fn uniform_bound(
    family: &FamilySpec,
    settings: &MetastabSettings,
    threads: Option<usize>,
) -> Result<FamilyResult> {
    let outcomes = run_family(family, settings, settings.mode, None, threads)?;
    Ok(FamilyResult::aggregate(settings.mode, settings, outcomes))
}

/// Witnesses on the iterates themselves, with (E_mu) checked per instance and
/// the family's modulus beta recorded.
pub fn uniform_bound_fixedpoint(
    family: &FamilySpec,
    settings: &MetastabSettings,
    threads: Option<usize>,
) -> Result<FamilyResult> {
    let mu = family
        .mu
        .ok_or_else(|| Error::Precondition("the fixed-point variant needs mu".into()))?;
    let outcomes = run_family(family, settings, SequenceMode::Points, Some(mu), threads)?;
    let mut result = FamilyResult::aggregate(SequenceMode::Points, settings, outcomes);
    let mut spaces: Vec<SpaceKind> = Vec::new();
    for id in 0..family.count {
        let k = family.instance(id)?.space.kind().clone();
        if !spaces.contains(&k) {
            spaces.push(k);
        }
    }
    let mut beta = vec![0; BETA_DEPTH + 1];
    for kind in spaces {
        let space = SpaceWithGeodesic::new(kind)?;
        let per_axis = if space.dim() == 1 { 1025 } else { 41 };
        let grid = grid_points(&space, per_axis)?;
        for (b, v) in beta
            .iter_mut()
            .zip(beta_profile(&space, &grid, BETA_DEPTH)?)
        {
            *b = (*b).max(v);
        }
    }
    result.beta = Some(beta);
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn instances_depend_only_on_seed_and_id() {
        let fam = FamilySpec::new(FamilyKind::Mixed, 8, 11, 0.5);
        let a = fam.instance(5).unwrap();
        let b = fam.instance(5).unwrap();
        assert_eq!(a.description, b.description);
        assert_ne!(
            fam.instance(1).unwrap().description,
            fam.instance(5).unwrap().description
        );
        for id in 0..8 {
            let i = fam.instance(id).unwrap();
            assert!(i.space.contains(&i.x1));
        }
    }

    #[test]
    fn bad_family_parameters() {
        let fam = FamilySpec::new(
            FamilyKind::AffineContraction {
                c_min: 0.5,
                c_max: 1.2,
            },
            3,
            1,
            0.5,
        );
        assert!(fam.validate().is_err());
        let fam = FamilySpec::new(FamilyKind::Constant, 3, 1, 1.0);
        assert!(fam.validate().is_err());
    }

    #[test]
    fn default_trace_length() {
        let s = MetastabSettings::new(FSpec::linear(2), 0.1, 1000);
        assert_eq!(s.trace_length().unwrap(), 2001);
    }
}
