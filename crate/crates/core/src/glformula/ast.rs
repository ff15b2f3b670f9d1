use std::fmt;

use num_rational::Ratio;
use num_traits::{One, Zero};

use crate::error::Position;

pub type Rational = Ratio<u64>;

/// Source location of a node. All spans compare equal, so trees built from
/// different texts compare structurally.
#[derive(Clone, Copy, Debug, Default, Eq)]
pub struct Span(pub Position);

impl PartialEq for Span {
    fn eq(&self, _: &Span) -> bool {
        true
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Term {
    Var {
        name: String,
        span: Span,
    },
    /// `@name`
    Const {
        name: String,
        span: Span,
    },
    /// `T(t)`
    MapApply {
        symbol: String,
        arg: Box<Term>,
        span: Span,
    },
    /// `L[t](a, b)`
    Geo {
        t: Rational,
        a: Box<Term>,
        b: Box<Term>,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub enum Formula {
    Dist(Term, Term),
    Pred {
        symbol: String,
        args: Vec<Term>,
        span: Span,
    },
    /// A rational in `[0, 1]`.
    Const(Rational),
    Add(Box<Formula>, Box<Formula>),
    /// `a -. b = max(a - b, 0)`
    TruncSub(Box<Formula>, Box<Formula>),
    ScalarMul(Rational, Box<Formula>),
    Min(Vec<Formula>),
    Max(Vec<Formula>),
    Abs(Box<Formula>),
    Sup {
        var: String,
        body: Box<Formula>,
    },
    Inf {
        var: String,
        body: Box<Formula>,
    },
}

pub fn var(name: &str) -> Term {
    Term::Var {
        name: name.to_string(),
        span: Span::default(),
    }
}

impl Term {
    fn collect_vars<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Term::Var { name, .. } => out.push(name),
            Term::Const { .. } => {}
            Term::MapApply { arg, .. } => arg.collect_vars(out),
            Term::Geo { a, b, .. } => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }
}

impl Formula {
    pub fn dist(a: Term, b: Term) -> Formula {
        Formula::Dist(a, b)
    }

    pub fn tsub(a: Formula, b: Formula) -> Formula {
        Formula::TruncSub(Box::new(a), Box::new(b))
    }

    pub fn add(a: Formula, b: Formula) -> Formula {
        Formula::Add(Box::new(a), Box::new(b))
    }

    pub fn scale(q: Rational, a: Formula) -> Formula {
        Formula::ScalarMul(q, Box::new(a))
    }

    pub fn sup(var: &str, body: Formula) -> Formula {
        Formula::Sup {
            var: var.to_string(),
            body: Box::new(body),
        }
    }

    pub fn inf(var: &str, body: Formula) -> Formula {
        Formula::Inf {
            var: var.to_string(),
            body: Box::new(body),
        }
    }

    /// Variables occurring free, in order of first occurrence.
    pub fn free_vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.free_into(&mut Vec::new(), &mut out);
        out
    }

    fn free_into(&self, bound: &mut Vec<String>, out: &mut Vec<String>) {
        let terms = |ts: &[&Term], out: &mut Vec<String>| {
            for t in ts {
                let mut vs = Vec::new();
                t.collect_vars(&mut vs);
                for v in vs {
                    if !bound.iter().any(|b| b == v) && !out.iter().any(|o| o == v) {
                        out.push(v.to_string());
                    }
                }
            }
        };
        match self {
            Formula::Dist(a, b) => terms(&[a, b], out),
            Formula::Pred { args, .. } => terms(&args.iter().collect::<Vec<_>>(), out),
            Formula::Const(_) => {}
            Formula::Add(a, b) | Formula::TruncSub(a, b) => {
                a.free_into(bound, out);
                b.free_into(bound, out);
            }
            Formula::ScalarMul(_, a) | Formula::Abs(a) => a.free_into(bound, out),
            Formula::Min(xs) | Formula::Max(xs) => {
                for x in xs {
                    x.free_into(bound, out);
                }
            }
            Formula::Sup { var, body } | Formula::Inf { var, body } => {
                bound.push(var.clone());
                body.free_into(bound, out);
                bound.pop();
            }
        }
    }

    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// Number of nodes, terms included.
    pub fn size(&self) -> usize {
        fn term(t: &Term) -> usize {
            match t {
                Term::Var { .. } | Term::Const { .. } => 1,
                Term::MapApply { arg, .. } => 1 + term(arg),
                Term::Geo { a, b, .. } => 1 + term(a) + term(b),
            }
        }
        match self {
            Formula::Dist(a, b) => 1 + term(a) + term(b),
            Formula::Pred { args, .. } => 1 + args.iter().map(term).sum::<usize>(),
            Formula::Const(_) => 1,
            Formula::Add(a, b) | Formula::TruncSub(a, b) => 1 + a.size() + b.size(),
            Formula::ScalarMul(_, a) | Formula::Abs(a) => 1 + a.size(),
            Formula::Min(xs) | Formula::Max(xs) => 1 + xs.iter().map(Formula::size).sum::<usize>(),
            Formula::Sup { body, .. } | Formula::Inf { body, .. } => 1 + body.size(),
        }
    }
}

pub(crate) fn write_rational(f: &mut fmt::Formatter<'_>, q: &Rational) -> fmt::Result {
    if q.denom().is_one() || q.numer().is_zero() {
        write!(f, "{}", q.numer())
    } else {
        write!(f, "{}/{}", q.numer(), q.denom())
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var { name, .. } => f.write_str(name),
            Term::Const { name, .. } => write!(f, "@{name}"),
            Term::MapApply { symbol, arg, .. } => write!(f, "{symbol}({arg})"),
            Term::Geo { t, a, b } => {
                f.write_str("L[")?;
                write_rational(f, t)?;
                write!(f, "]({a}, {b})")
            }
        }
    }
}

fn write_list(f: &mut fmt::Formatter<'_>, name: &str, xs: &[Formula]) -> fmt::Result {
    write!(f, "{name}(")?;
    for (i, x) in xs.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{x}")?;
    }
    f.write_str(")")
}

/// Binary operations, scalings and quantifiers are always parenthesized, so
/// the printed text parses back to the same tree.
impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Dist(a, b) => write!(f, "d({a}, {b})"),
            Formula::Pred { symbol, args, .. } => {
                write!(f, "{symbol}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
            Formula::Const(q) => write_rational(f, q),
            Formula::Add(a, b) => write!(f, "({a} + {b})"),
            Formula::TruncSub(a, b) => write!(f, "({a} -. {b})"),
            Formula::ScalarMul(q, a) => {
                f.write_str("(")?;
                write_rational(f, q)?;
                write!(f, "*{a})")
            }
            Formula::Min(xs) => write_list(f, "min", xs),
            Formula::Max(xs) => write_list(f, "max", xs),
            Formula::Abs(a) => write!(f, "abs({a})"),
            Formula::Sup { var, body } => write!(f, "(sup {var} . {body})"),
            Formula::Inf { var, body } => write!(f, "(inf {var} . {body})"),
        }
    }
}
