#![allow(dead_code)]

use geometa::glformula::{Formula, Rational, Span, Term};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Hand iteration of the toy map from x1 = 3 with lambda = 1/2:
/// 3, 2, 1, 1/2, 1/4, ...
pub fn toy_point(n: usize) -> f64 {
    match n {
        1 => 3.0,
        2 => 2.0,
        _ => 2.0_f64.powi(3 - n as i32),
    }
}

/// `d(x_n, T x_n)`: T(3) = 1, T = 0 elsewhere.
pub fn toy_residual(n: usize) -> f64 {
    if n == 1 {
        2.0
    } else {
        toy_point(n)
    }
}

/// Least n <= cap whose window [n, max(n, F(n))] has all pairwise gaps < eps,
/// by checking every pair.
pub fn brute_witness(
    seq: &[f64],
    f: impl Fn(usize) -> usize,
    eps: f64,
    cap: usize,
) -> Option<usize> {
    (1..=cap).find(|&n| {
        let end = f(n).max(n);
        (n..=end).all(|i| (n..=end).all(|j| (seq[i - 1] - seq[j - 1]).abs() < eps))
    })
}

const VARS: [&str; 4] = ["x", "y", "z", "w"];

fn rational(rng: &mut ChaCha8Rng, max: u64) -> Rational {
    let den = rng.random_range(1..=8u64);
    Rational::new(rng.random_range(0..=max * den), den)
}

pub fn random_term(rng: &mut ChaCha8Rng, depth: usize) -> Term {
    let span = Span::default();
    let leaf = depth == 0 || rng.random_bool(0.4);
    if leaf {
        return if rng.random_bool(0.8) {
            Term::Var {
                name: VARS[rng.random_range(0..VARS.len())].to_string(),
                span,
            }
        } else {
            Term::Const {
                name: "c".into(),
                span,
            }
        };
    }
    if rng.random_bool(0.5) {
        Term::MapApply {
            symbol: if rng.random_bool(0.5) { "T" } else { "S" }.into(),
            arg: Box::new(random_term(rng, depth - 1)),
            span,
        }
    } else {
        Term::Geo {
            t: rational(rng, 1).min(Rational::from_integer(1)),
            a: Box::new(random_term(rng, depth - 1)),
            b: Box::new(random_term(rng, depth - 1)),
        }
    }
}

/// A random formula using every node kind; not necessarily closed.
pub fn random_formula(rng: &mut ChaCha8Rng, depth: usize) -> Formula {
    if depth == 0 || rng.random_bool(0.2) {
        return match rng.random_range(0..3) {
            0 => Formula::Dist(random_term(rng, 2), random_term(rng, 2)),
            1 => Formula::Pred {
                symbol: "P".into(),
                args: (0..rng.random_range(1..=2))
                    .map(|_| random_term(rng, 1))
                    .collect(),
                span: Span::default(),
            },
            _ => Formula::Const(rational(rng, 1).min(Rational::from_integer(1))),
        };
    }
    let sub = |rng: &mut ChaCha8Rng| Box::new(random_formula(rng, depth - 1));
    match rng.random_range(0..9) {
        0 => Formula::Add(sub(rng), sub(rng)),
        1 => Formula::TruncSub(sub(rng), sub(rng)),
        2 => Formula::ScalarMul(rational(rng, 4), sub(rng)),
        3 => Formula::Min((0..rng.random_range(1..=3)).map(|_| *sub(rng)).collect()),
        4 => Formula::Max((0..rng.random_range(1..=3)).map(|_| *sub(rng)).collect()),
        5 => Formula::Abs(sub(rng)),
        6 => Formula::Sup {
            var: VARS[rng.random_range(0..VARS.len())].into(),
            body: sub(rng),
        },
        7 => Formula::Inf {
            var: VARS[rng.random_range(0..VARS.len())].into(),
            body: sub(rng),
        },
        _ => Formula::Dist(random_term(rng, 3), random_term(rng, 3)),
    }
}
