use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use geometa::geom::{
    grid_points, sample_points, Geodesic, GeodesicSpace, Point, SpaceKind, SpaceWithGeodesic,
};
use geometa::maps::{MapKind, MapUnderTest};
use geometa::metastab::{FSpec, FamilyKind, FamilySpec, SequenceMode};
use serde::{Deserialize, Serialize};

use crate::Failure;

/// One experiment. Every field is optional in the file; each subcommand fills
/// in the defaults it uses, and the filled-in config is what gets hashed and
/// echoed in the report header.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub space: Option<SpaceKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub geodesic: Option<Geodesic>,
    /// The map bound to the symbol `T`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub map: Option<MapKind>,
    /// Further map symbols for formulas.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub maps: BTreeMap<String, MapKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilyConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x1: Option<Point>,
    #[serde(rename = "F", skip_serializing_if = "Option::is_none")]
    pub f: Option<FSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace_length: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cap: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<SequenceMode>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sample: Option<SampleConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Checker names for `check`: `C(l)`, `D(l)`, `E(m)`, `nonexpansive`,
    /// `directional`, `hyperbolic_type`, `linear_axioms`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub checks: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    /// Largest `k` of the beta profile for `net`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    /// Target index of the beta-to-alpha conversion for `net`.
    #[serde(rename = "K", skip_serializing_if = "Option::is_none")]
    pub big_k: Option<usize>,
    /// Formula source for `eval-formula`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub formula: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub predicates: BTreeMap<String, PredicateConfig>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub constants: BTreeMap<String, Point>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub bindings: BTreeMap<String, Point>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleConfig {
    /// Points per axis on a grid, total points otherwise.
    pub size: usize,
    #[serde(default = "yes")]
    pub grid: bool,
    #[serde(default = "yes")]
    pub include_special: bool,
}

fn yes() -> bool {
    true
}

impl Default for SampleConfig {
    fn default() -> Self {
        SampleConfig {
            size: 1001,
            grid: true,
            include_special: true,
        }
    }
}

// `deny_unknown_fields` does not combine with `flatten`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FamilyConfig {
    #[serde(flatten)]
    pub kind: FamilyKind,
    pub count: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum PredicateConfig {
    /// `P(x) = min over the set of d(x, c)`.
    DistanceToSet(Vec<Point>),
}

pub const DEFAULT_LAMBDA: f64 = 0.5;
pub const DEFAULT_TOLERANCE: f64 = 1e-9;
pub const DEFAULT_EPSILON: f64 = 0.1;
pub const DEFAULT_F: &str = "2n";
pub const DEFAULT_K: usize = 4;

pub fn load(path: &Path) -> Result<ExperimentConfig, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Runtime(format!("reading {}: {e}", path.display())))?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let at = e.path().to_string();
        Failure::Validation(format!("{}: {at}: {}", path.display(), e.inner()))
    })
}

/// Wraps a library error as a validation failure naming the field.
pub fn invalid(field: &str) -> impl Fn(geometa::Error) -> Failure + '_ {
    move |e| Failure::Validation(format!("{field}: {e}"))
}

fn missing(field: &str) -> Failure {
    Failure::Validation(format!("{field}: required by this subcommand"))
}

impl ExperimentConfig {
    pub fn space(&self) -> Result<SpaceWithGeodesic, Failure> {
        let kind = self.space.clone().ok_or_else(|| missing("space"))?;
        match self.geodesic {
            Some(g) => SpaceWithGeodesic::with_geodesic(kind, g),
            None => SpaceWithGeodesic::new(kind),
        }
        .map_err(invalid("space"))
    }

    pub fn map(&self) -> Result<MapUnderTest, Failure> {
        let kind = self.map.clone().ok_or_else(|| missing("map"))?;
        MapUnderTest::new(kind).map_err(invalid("map"))
    }

    pub fn lambda(&mut self) -> Result<f64, Failure> {
        let l = *self.lambda.get_or_insert(DEFAULT_LAMBDA);
        if l > 0.0 && l < 1.0 {
            Ok(l)
        } else {
            Err(Failure::Validation(format!("lambda: {l} is not in (0, 1)")))
        }
    }

    pub fn x1(&self, space: &SpaceWithGeodesic) -> Result<Point, Failure> {
        let x1 = self.x1.clone().ok_or_else(|| missing("x1"))?;
        space.validate(&x1).map_err(invalid("x1"))?;
        Ok(x1)
    }

    pub fn f(&mut self) -> FSpec {
        self.f
            .get_or_insert_with(|| DEFAULT_F.parse().expect("valid default"))
            .clone()
    }

    pub fn epsilons(&mut self) -> Result<Vec<f64>, Failure> {
        let eps = self
            .epsilon
            .get_or_insert_with(|| vec![DEFAULT_EPSILON])
            .clone();
        if eps.is_empty() {
            return Err(Failure::Validation("epsilon: empty list".into()));
        }
        if let Some(e) = eps.iter().find(|e| !(**e > 0.0) || !e.is_finite()) {
            return Err(Failure::Validation(format!("epsilon: {e} is not > 0")));
        }
        Ok(eps)
    }

    pub fn cap(&mut self) -> Result<usize, Failure> {
        let cap = *self.cap.get_or_insert(geometa::metastab::DEFAULT_CAP);
        if cap == 0 {
            return Err(Failure::Validation("cap: must be at least 1".into()));
        }
        Ok(cap)
    }

    pub fn tolerance(&mut self) -> Result<f64, Failure> {
        let t = *self.tolerance.get_or_insert(DEFAULT_TOLERANCE);
        if t >= 0.0 && t.is_finite() {
            Ok(t)
        } else {
            Err(Failure::Validation(format!("tolerance: {t} is not >= 0")))
        }
    }

    pub fn seed(&mut self) -> u64 {
        *self.seed.get_or_insert(0)
    }

    pub fn sample(&mut self, space: &SpaceWithGeodesic) -> Result<Vec<Point>, Failure> {
        let seed = self.seed();
        let cfg = self
            .sample
            .get_or_insert_with(SampleConfig::default)
            .clone();
        let pts = if cfg.grid {
            grid_points(space, cfg.size)
        } else {
            sample_points(space, cfg.size, seed, cfg.include_special)
        }
        .map_err(invalid("sample"))?;
        if pts.is_empty() {
            return Err(Failure::Validation(
                "sample: no point of the grid lies in the space".into(),
            ));
        }
        Ok(pts)
    }

    pub fn family(&mut self) -> Result<FamilySpec, Failure> {
        let fam = self.family.clone().ok_or_else(|| missing("family"))?;
        let spec = FamilySpec {
            kind: fam.kind,
            count: fam.count,
            seed: self.seed(),
            lambda: self.lambda()?,
            mu: self.mu,
        };
        if spec.count == 0 {
            return Err(Failure::Validation(
                "family.count: must be at least 1".into(),
            ));
        }
        spec.validate().map_err(invalid("family"))?;
        Ok(spec)
    }
}
