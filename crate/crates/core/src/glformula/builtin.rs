use std::fmt;
use std::str::FromStr;

use num_traits::{One, ToPrimitive, Zero};

use super::ast::{Formula, Rational};
use super::parse::{parse, parse_rational};
use crate::error::{Error, Result};

/// Formulas for the standard axioms and conditions. Map symbol `T`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Builtin {
    HyperbolicType(Rational),
    ConditionD(Rational),
    ConditionE(Rational),
    /// Subsets-as-predicates axioms for the named predicate.
    SapAxiom1(String),
    SapAxiom2(String),
    LinearAxiomA(Rational, Rational),
    LinearAxiomB(Rational),
    /// `beta` is the value `beta(k)`.
    ApproxTb {
        beta: usize,
        k: usize,
    },
}

fn q(r: &Rational) -> String {
    if r.denom().is_one() || r.numer().is_zero() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn param_error(name: &'static str, r: &Rational, expected: &'static str) -> Error {
    Error::Parameter {
        name,
        value: r.to_f64().unwrap_or(f64::NAN),
        expected,
    }
}

fn unit(name: &'static str, r: &Rational) -> Result<()> {
    if *r > Rational::one() {
        return Err(param_error(name, r, "[0, 1]"));
    }
    Ok(())
}

impl Builtin {
    pub fn validate(&self) -> Result<()> {
        match self {
            Builtin::HyperbolicType(t) | Builtin::LinearAxiomB(t) => unit("t", t),
            Builtin::LinearAxiomA(t, s) => unit("t", t).and(unit("t'", s)),
            Builtin::ConditionD(l) => {
                if l.is_zero() || *l >= Rational::one() {
                    Err(param_error("lambda", l, "(0, 1)"))
                } else {
                    Ok(())
                }
            }
            Builtin::ConditionE(m) => {
                if *m < Rational::one() {
                    Err(param_error("mu", m, ">= 1"))
                } else {
                    Ok(())
                }
            }
            Builtin::SapAxiom1(p) | Builtin::SapAxiom2(p) => {
                if p.is_empty() || !p.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                    Err(Error::UnknownSymbol(format!("predicate name `{p}`")))
                } else {
                    Ok(())
                }
            }
            Builtin::ApproxTb { .. } => Ok(()),
        }
    }

    /// Source text of the formula.
    pub fn text(&self) -> Result<String> {
        self.validate()?;
        Ok(match self {
            Builtin::HyperbolicType(t) => format!(
                "sup p . sup x . sup y . (d(p, L[{t}](x, y)) -. {s}*d(p, x)) -. {t}*d(p, y)",
                t = q(t),
                s = q(&(Rational::one() - t)),
            ),
            Builtin::ConditionD(l) => format!(
                "sup x . d(T(x), T(L[{l}](x, T(x)))) -. {l}*d(x, T(x))",
                l = q(l)
            ),
            Builtin::ConditionE(m) => format!(
                "sup x . sup y . (d(x, T(y)) -. {m}*d(x, T(x))) -. d(x, y)",
                m = q(m)
            ),
            Builtin::SapAxiom1(p) => {
                format!("sup x . inf y . max({p}(y), max({p}(x) -. d(x, y), d(x, y) -. {p}(x)))")
            }
            Builtin::SapAxiom2(p) => {
                let inner = format!("(inf y . min({p}(y) + d(x, y), 1))");
                format!("sup x . max({p}(x) -. {inner}, {inner} -. {p}(x))")
            }
            Builtin::LinearAxiomA(t, s) => {
                let c = if t > s { t - s } else { s - t };
                let lhs = format!("d(L[{}](x, y), L[{}](x, y))", q(t), q(s));
                let rhs = format!("{}*d(x, y)", q(&c));
                format!("sup x . sup y . max({lhs} -. {rhs}, {rhs} -. {lhs})")
            }
            Builtin::LinearAxiomB(t) => format!(
                "sup x . sup y . d(L[{}](x, y), L[{}](y, x))",
                q(t),
                q(&(Rational::one() - t))
            ),
            Builtin::ApproxTb { beta, k } => {
                let centers: Vec<String> = (0..=*beta).map(|i| format!("x{i}")).collect();
                let infs: String = centers.iter().map(|c| format!("inf {c} . ")).collect();
                let dists: Vec<String> = centers.iter().map(|c| format!("d(x, {c})")).collect();
                format!("{infs}sup x . min({}) -. 1/{}", dists.join(", "), k + 1)
            }
        })
    }

    pub fn formula(&self) -> Result<Formula> {
        parse(&self.text()?)
    }
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Builtin::HyperbolicType(t) => write!(f, "hyperbolic_type({})", q(t)),
            Builtin::ConditionD(l) => write!(f, "condition_D({})", q(l)),
            Builtin::ConditionE(m) => write!(f, "condition_E({})", q(m)),
            Builtin::SapAxiom1(p) => write!(f, "sap_axiom_1({p})"),
            Builtin::SapAxiom2(p) => write!(f, "sap_axiom_2({p})"),
            Builtin::LinearAxiomA(t, s) => write!(f, "linear_axiom_a({}, {})", q(t), q(s)),
            Builtin::LinearAxiomB(t) => write!(f, "linear_axiom_b({})", q(t)),
            Builtin::ApproxTb { beta, k } => write!(f, "approx_tb({beta}, {k})"),
        }
    }
}

impl FromStr for Builtin {
    type Err = Error;

    /// `condition_E(3)`, `linear_axiom_a(0.25, 1/2)`, `sap_axiom_1` (predicate
    /// `P`), `approx_tb(0, 1)`.
    fn from_str(s: &str) -> Result<Builtin> {
        let s = s.trim();
        let (name, args) = match s.split_once('(') {
            Some((n, rest)) => {
                let inner = rest
                    .strip_suffix(')')
                    .ok_or_else(|| Error::UnknownSymbol(format!("builtin `{s}`: missing `)`")))?;
                (
                    n.trim(),
                    inner.split(',').map(str::trim).collect::<Vec<_>>(),
                )
            }
            None => (s, Vec::new()),
        };
        let bad = || Error::UnknownSymbol(format!("builtin `{s}`"));
        let rat = |i: usize| -> Result<Rational> {
            args.get(i).and_then(|a| parse_rational(a)).ok_or_else(bad)
        };
        let count = |i: usize| -> Result<usize> {
            args.get(i).and_then(|a| a.parse().ok()).ok_or_else(bad)
        };
        let arity = |n: usize| if args.len() == n { Ok(()) } else { Err(bad()) };
        let pred = || -> Result<String> {
            match args.as_slice() {
                [] => Ok("P".into()),
                [p] => Ok(p.to_string()),
                _ => Err(bad()),
            }
        };
        let b = match name {
            "hyperbolic_type" => arity(1).and_then(|_| Ok(Builtin::HyperbolicType(rat(0)?)))?,
            "condition_D" => arity(1).and_then(|_| Ok(Builtin::ConditionD(rat(0)?)))?,
            "condition_E" => arity(1).and_then(|_| Ok(Builtin::ConditionE(rat(0)?)))?,
            "sap_axiom_1" => Builtin::SapAxiom1(pred()?),
            "sap_axiom_2" => Builtin::SapAxiom2(pred()?),
            "linear_axiom_a" => {
                arity(2).and_then(|_| Ok(Builtin::LinearAxiomA(rat(0)?, rat(1)?)))?
            }
            "linear_axiom_b" => arity(1).and_then(|_| Ok(Builtin::LinearAxiomB(rat(0)?)))?,
            "approx_tb" => arity(2).and_then(|_| {
                Ok(Builtin::ApproxTb {
                    beta: count(0)?,
                    k: count(1)?,
                })
            })?,
            _ => return Err(bad()),
        };
        b.validate()?;
        Ok(b)
    }
}

/// Parses a builtin spec and returns its formula.
pub fn builtin(spec: &str) -> Result<Formula> {
    spec.parse::<Builtin>()?.formula()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_builtins_parse() {
        for spec in [
            "hyperbolic_type(1/2)",
            "condition_D(0.25)",
            "condition_E(3)",
            "sap_axiom_1",
            "sap_axiom_2(C)",
            "linear_axiom_a(0, 3/4)",
            "linear_axiom_b(1/3)",
            "approx_tb(2, 1)",
        ] {
            let b: Builtin = spec.parse().unwrap();
            let f = b.formula().unwrap();
            assert!(f.is_closed(), "{spec}");
            assert_eq!(b.to_string().parse::<Builtin>().unwrap(), b);
        }
    }

    #[test]
    fn e_text_matches_the_hand_written_condition() {
        assert_eq!(
            builtin("condition_E(3)").unwrap(),
            parse("sup x . sup y . (d(x, T(y)) -. 3*d(x, T(x))) -. d(x,y)").unwrap()
        );
    }

    #[test]
    fn parameters_are_checked() {
        assert!("condition_D(1)".parse::<Builtin>().is_err());
        assert!("condition_E(1/2)".parse::<Builtin>().is_err());
        assert!("hyperbolic_type(3/2)".parse::<Builtin>().is_err());
        assert!("linear_axiom_a(1/2)".parse::<Builtin>().is_err());
        assert!("nonsense(1)".parse::<Builtin>().is_err());
    }

    #[test]
    fn approx_tb_nesting() {
        let f = builtin("approx_tb(1, 3)").unwrap();
        assert_eq!(
            f.to_string(),
            "(inf x0 . (inf x1 . (sup x . (min(d(x, x0), d(x, x1)) -. 1/4))))"
        );
    }
}
