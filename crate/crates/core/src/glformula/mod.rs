//! Geodesic-logic formulas: parsing, printing, built-in axioms and evaluation
//! over a finite sample.
//!
//! ```text
//! sup x . sup y . (d(x, T(y)) -. 3*d(x, T(x))) -. d(x, y)
//! ```
//!
//! Terms are variables, constants `@c`, map applications `T(t)` and geodesic
//! points `L[t](a, b)` with `t` in `[0, 1]`. Formulas combine `d(a, b)`,
//! predicates `P(t, ...)`, rational constants in `[0, 1]`, `+`, `-.`
//! (truncated minus), `q*phi`, `min(...)`, `max(...)`, `abs(...)` and the
//! quantifiers `sup x . phi`, `inf x . phi`, whose bodies extend as far right
//! as possible.

mod ast;
mod builtin;
mod eval;
mod parse;

pub use ast::{var, Formula, Rational, Span, Term};
pub use builtin::{builtin, Builtin};
pub use eval::{evaluate, Evaluation, FiniteStructure, Mesh, Predicate};
pub use parse::{parse, parse_rational};
