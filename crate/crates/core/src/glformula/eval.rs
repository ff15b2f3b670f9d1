use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::Serialize;

use super::ast::{Formula, Rational, Term};
use crate::error::{Error, Result};
use crate::geom::{sample_points, GeodesicSpace, Point, SpaceKind, SpaceWithGeodesic};
use crate::maps::MapUnderTest;

/// Reference points used to estimate the mesh of non-interval samples.
const MESH_PROBES: usize = 2000;

#[derive(Clone)]
pub enum Predicate {
    /// `P(x) = inf_{c in C} d(x, c)`.
    DistanceToSet(Vec<Point>),
    Function(Arc<dyn Fn(&[Point]) -> f64 + Send + Sync>),
}

impl fmt::Debug for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Predicate::DistanceToSet(c) => f.debug_tuple("DistanceToSet").field(c).finish(),
            Predicate::Function(_) => f.write_str("Function(..)"),
        }
    }
}

impl Predicate {
    pub fn function(f: impl Fn(&[Point]) -> f64 + Send + Sync + 'static) -> Predicate {
        Predicate::Function(Arc::new(f))
    }

    fn value(&self, space: &SpaceWithGeodesic, args: &[Point]) -> Result<f64> {
        match self {
            Predicate::DistanceToSet(set) => {
                if args.len() != 1 {
                    return Err(Error::Precondition(format!(
                        "a distance-to-set predicate takes 1 argument, got {}",
                        args.len()
                    )));
                }
                Ok(set
                    .iter()
                    .map(|c| space.dist(&args[0], c))
                    .fold(f64::INFINITY, f64::min))
            }
            Predicate::Function(f) => Ok(f(args)),
        }
    }
}

/// The interpretation a formula is evaluated in; quantifiers range over
/// `sample`.
#[derive(Clone, Debug)]
pub struct FiniteStructure {
    pub space: SpaceWithGeodesic,
    pub maps: BTreeMap<String, MapUnderTest>,
    pub predicates: BTreeMap<String, Predicate>,
    pub constants: BTreeMap<String, Point>,
    pub sample: Vec<Point>,
}

impl FiniteStructure {
    pub fn new(space: SpaceWithGeodesic, sample: Vec<Point>) -> Result<Self> {
        if sample.is_empty() {
            return Err(Error::EmptySample);
        }
        for p in &sample {
            space.validate(p)?;
        }
        Ok(FiniteStructure {
            space,
            maps: BTreeMap::new(),
            predicates: BTreeMap::new(),
            constants: BTreeMap::new(),
            sample,
        })
    }

    pub fn with_map(mut self, symbol: &str, map: MapUnderTest) -> Self {
        self.maps.insert(symbol.to_string(), map);
        self
    }

    pub fn with_predicate(mut self, symbol: &str, p: Predicate) -> Self {
        self.predicates.insert(symbol.to_string(), p);
        self
    }

    pub fn with_constant(mut self, name: &str, p: Point) -> Self {
        self.constants.insert(name.to_string(), p);
        self
    }

    /// How far a point of the space can be from the sample: exact for
    /// intervals, estimated from random probes otherwise.
    pub fn mesh(&self) -> Mesh {
        if let SpaceKind::Interval { lo, hi } = self.space.kind() {
            let mut xs: Vec<f64> = self.sample.iter().map(Point::x).collect();
            xs.sort_by(f64::total_cmp);
            let gap = xs
                .windows(2)
                .map(|w| (w[1] - w[0]) / 2.0)
                .fold(0.0, f64::max);
            let radius = gap.max(xs[0] - lo).max(hi - xs[xs.len() - 1]);
            return Mesh {
                covering_radius: radius,
                exact: true,
            };
        }
        let probes = sample_points(&self.space, MESH_PROBES, 0x6d65_7368, true).expect("nonzero");
        let radius = probes
            .par_iter()
            .map(|p| {
                self.sample
                    .iter()
                    .map(|s| self.space.dist(p, s))
                    .fold(f64::INFINITY, f64::min)
            })
            .reduce(|| 0.0, f64::max);
        Mesh {
            covering_radius: radius,
            exact: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Mesh {
    /// `sup_x min_s d(x, s)` over the space.
    pub covering_radius: f64,
    /// False when the radius is a lower estimate from random probes.
    pub exact: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Evaluation {
    pub value: f64,
    /// Bindings achieving the outermost chain of quantifiers, outermost first.
    pub witnesses: Vec<(String, Point)>,
}

struct Env<'a> {
    st: &'a FiniteStructure,
    vars: Vec<(&'a str, Point)>,
}

impl<'a> Env<'a> {
    fn lookup(&self, name: &str) -> Option<&Point> {
        self.vars
            .iter()
            .rev()
            .find(|(n, _)| *n == name)
            .map(|(_, p)| p)
    }

    fn term(&self, t: &Term) -> Result<Point> {
        match t {
            Term::Var { name, span } => {
                self.lookup(name)
                    .cloned()
                    .ok_or_else(|| Error::UnboundVariable {
                        name: name.clone(),
                        position: span.0,
                    })
            }
            Term::Const { name, .. } => self
                .st
                .constants
                .get(name)
                .cloned()
                .ok_or_else(|| Error::UnknownSymbol(format!("constant @{name}"))),
            Term::MapApply { symbol, arg, .. } => {
                let map = self
                    .st
                    .maps
                    .get(symbol)
                    .ok_or_else(|| Error::UnknownSymbol(format!("map {symbol}")))?;
                map.apply(&self.st.space, &self.term(arg)?)
            }
            Term::Geo { t, a, b } => {
                let (a, b) = (self.term(a)?, self.term(b)?);
                self.st.space.geodesic_point(&a, &b, to_f64(t))
            }
        }
    }

    fn formula(&mut self, f: &'a Formula) -> Result<f64> {
        Ok(match f {
            Formula::Dist(a, b) => self.st.space.dist(&self.term(a)?, &self.term(b)?),
            Formula::Pred { symbol, args, .. } => {
                let p = self
                    .st
                    .predicates
                    .get(symbol)
                    .ok_or_else(|| Error::UnknownSymbol(format!("predicate {symbol}")))?;
                let args = args
                    .iter()
                    .map(|a| self.term(a))
                    .collect::<Result<Vec<_>>>()?;
                p.value(&self.st.space, &args)?
            }
            Formula::Const(q) => to_f64(q),
            Formula::Add(a, b) => self.formula(a)? + self.formula(b)?,
            Formula::TruncSub(a, b) => (self.formula(a)? - self.formula(b)?).max(0.0),
            Formula::ScalarMul(q, a) => to_f64(q) * self.formula(a)?,
            Formula::Min(xs) => self.fold(xs, f64::INFINITY, f64::min)?,
            Formula::Max(xs) => self.fold(xs, f64::NEG_INFINITY, f64::max)?,
            Formula::Abs(a) => self.formula(a)?.abs(),
            Formula::Sup { var, body } => self.quantify(var, body, true)?.0,
            Formula::Inf { var, body } => self.quantify(var, body, false)?.0,
        })
    }

    fn fold(&mut self, xs: &'a [Formula], init: f64, op: fn(f64, f64) -> f64) -> Result<f64> {
        let mut acc = init;
        for x in xs {
            acc = op(acc, self.formula(x)?);
        }
        Ok(acc)
    }

    /// Best value over the sample and the lowest index achieving it.
    fn quantify(&mut self, var: &'a str, body: &'a Formula, sup: bool) -> Result<(f64, usize)> {
        let st = self.st;
        let values: Vec<f64> = if st.sample.len() >= 64 && self.vars.len() < 2 {
            let base = self.vars.clone();
            st.sample
                .par_iter()
                .map(|p| {
                    let mut env = Env {
                        st,
                        vars: base.clone(),
                    };
                    env.vars.push((var, p.clone()));
                    env.formula(body)
                })
                .collect::<Result<_>>()?
        } else {
            let mut out = Vec::with_capacity(st.sample.len());
            for p in &st.sample {
                self.vars.push((var, p.clone()));
                let v = self.formula(body);
                self.vars.pop();
                out.push(v?);
            }
            out
        };
        let mut best = (values[0], 0);
        for (i, &v) in values.iter().enumerate().skip(1) {
            if (sup && v > best.0) || (!sup && v < best.0) {
                best = (v, i);
            }
        }
        Ok(best)
    }
}

fn to_f64(q: &Rational) -> f64 {
    q.to_f64().expect("finite rational")
}

/// Value of `f` in `structure` with the free variables taken from `bindings`.
pub fn evaluate(
    f: &Formula,
    structure: &FiniteStructure,
    bindings: &[(String, Point)],
) -> Result<Evaluation> {
    let mut env = Env {
        st: structure,
        vars: bindings
            .iter()
            .map(|(n, p)| (n.as_str(), p.clone()))
            .collect(),
    };
    if !matches!(f, Formula::Sup { .. } | Formula::Inf { .. }) {
        return Ok(Evaluation {
            value: env.formula(f)?,
            witnesses: Vec::new(),
        });
    }
    // each quantifier of the outer chain is re-optimised with the ones above
    // it fixed at their witnesses
    let mut value = None;
    let mut witnesses = Vec::new();
    let mut node = f;
    while let Formula::Sup { var, body } | Formula::Inf { var, body } = node {
        let (v, at) = env.quantify(var, body, matches!(node, Formula::Sup { .. }))?;
        value.get_or_insert(v);
        let p = structure.sample[at].clone();
        witnesses.push((var.clone(), p.clone()));
        env.vars.push((var, p));
        node = body;
    }
    Ok(Evaluation {
        value: value.expect("at least one quantifier"),
        witnesses,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::grid_points;
    use crate::glformula::parse;

    fn toy() -> FiniteStructure {
        let s = SpaceWithGeodesic::interval(0.0, 3.0).unwrap();
        let g = grid_points(&s, 301).unwrap();
        FiniteStructure::new(s, g)
            .unwrap()
            .with_map("T", MapUnderTest::suzuki_toy())
    }

    #[test]
    fn self_distance_is_zero() {
        let st = toy();
        let e = evaluate(
            &parse("d(x,x)").unwrap(),
            &st,
            &[("x".into(), Point::scalar(1.3))],
        )
        .unwrap();
        assert_eq!(e.value, 0.0);
        assert!(e.witnesses.is_empty());
    }

    #[test]
    fn unbound_and_unknown_symbols() {
        let st = toy();
        assert!(matches!(
            evaluate(
                &parse("d(x, y)").unwrap(),
                &st,
                &[("x".into(), Point::scalar(1.0))]
            ),
            Err(Error::UnboundVariable { .. })
        ));
        assert!(matches!(
            evaluate(&parse("sup x . d(x, S(x))").unwrap(), &st, &[]),
            Err(Error::UnknownSymbol(_))
        ));
        assert!(matches!(
            evaluate(&parse("sup x . P(x)").unwrap(), &st, &[]),
            Err(Error::UnknownSymbol(_))
        ));
    }

    #[test]
    fn witnesses_follow_the_outer_chain() {
        let st = toy();
        let e = evaluate(
            &parse("sup x . inf y . d(x, y) + d(y, @o)").unwrap(),
            &st.clone().with_constant("o", Point::scalar(0.0)),
            &[],
        )
        .unwrap();
        // inf_y d(x,y) + d(y,0) = x, maximised at x = 3 with y anywhere in [0, 3]
        assert_eq!(e.value, 3.0);
        assert_eq!(e.witnesses[0], ("x".to_string(), Point::scalar(3.0)));
        assert_eq!(e.witnesses[1].0, "y");
    }

    #[test]
    fn toy_conditions_vanish() {
        let st = toy();
        for text in [
            "sup x . sup y . (d(x, T(y)) -. 3*d(x, T(x))) -. d(x,y)",
            "sup x . (d(T(x), T(L[0.5](x, T(x)))) -. 0.5*d(x, T(x)))",
        ] {
            assert_eq!(
                evaluate(&parse(text).unwrap(), &st, &[]).unwrap().value,
                0.0,
                "{text}"
            );
        }
    }

    #[test]
    fn distance_to_set_predicate_and_mesh() {
        let s = SpaceWithGeodesic::interval(0.0, 1.0).unwrap();
        let st = FiniteStructure::new(
            s,
            grid_points(&SpaceWithGeodesic::interval(0.0, 1.0).unwrap(), 11).unwrap(),
        )
        .unwrap()
        .with_predicate("P", Predicate::DistanceToSet(vec![Point::scalar(0.0)]));
        let e = evaluate(&parse("sup x . P(x)").unwrap(), &st, &[]).unwrap();
        assert_eq!(e.value, 1.0);
        let m = st.mesh();
        assert!(m.exact && (m.covering_radius - 0.05).abs() < 1e-12);
    }
}
