use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Position, Result};

/// A sampling function `F: N -> N`, either an arithmetic expression in `n` or
/// an explicit table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FSpec {
    Expr(FExpr),
    Table(BTreeMap<usize, usize>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FExpr {
    N,
    Lit(u64),
    Add(Box<FExpr>, Box<FExpr>),
    Mul(Box<FExpr>, Box<FExpr>),
    /// Exponent is an integer literal.
    Pow(Box<FExpr>, u32),
}

impl FExpr {
    fn eval(&self, n: u64) -> Option<u64> {
        match self {
            FExpr::N => Some(n),
            FExpr::Lit(k) => Some(*k),
            FExpr::Add(a, b) => a.eval(n)?.checked_add(b.eval(n)?),
            FExpr::Mul(a, b) => a.eval(n)?.checked_mul(b.eval(n)?),
            FExpr::Pow(a, e) => a.eval(n)?.checked_pow(*e),
        }
    }

    fn prec(&self) -> u8 {
        match self {
            FExpr::Add(..) => 1,
            FExpr::Mul(..) => 2,
            FExpr::Pow(..) => 3,
            FExpr::N | FExpr::Lit(_) => 4,
        }
    }

    fn write(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        let paren = self.prec() < min;
        if paren {
            f.write_str("(")?;
        }
        match self {
            FExpr::N => f.write_str("n")?,
            FExpr::Lit(k) => write!(f, "{k}")?,
            FExpr::Add(a, b) => {
                a.write(f, 1)?;
                f.write_str("+")?;
                b.write(f, 2)?;
            }
            FExpr::Mul(a, b) => {
                a.write(f, 2)?;
                f.write_str("*")?;
                b.write(f, 3)?;
            }
            FExpr::Pow(a, e) => {
                a.write(f, 4)?;
                write!(f, "^{e}")?;
            }
        }
        if paren {
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl FSpec {
    /// `F(n) = k n`.
    pub fn linear(k: u64) -> FSpec {
        FSpec::Expr(FExpr::Mul(Box::new(FExpr::Lit(k)), Box::new(FExpr::N)))
    }

    /// `F(n) = n + k`.
    pub fn shift(k: u64) -> FSpec {
        FSpec::Expr(FExpr::Add(Box::new(FExpr::N), Box::new(FExpr::Lit(k))))
    }

    pub fn eval(&self, n: usize) -> Result<usize> {
        match self {
            FSpec::Expr(e) => e
                .eval(n as u64)
                .and_then(|v| usize::try_from(v).ok())
                .ok_or(Error::FOverflow(n)),
            FSpec::Table(t) => t.get(&n).copied().ok_or(Error::FUndefined(n)),
        }
    }

    /// Right end of the scanned interval `[n, max(n, F(n))]`.
    pub fn window_end(&self, n: usize) -> Result<usize> {
        Ok(self.eval(n)?.max(n))
    }

    /// Longest prefix a scan over `n = 1..=cap` can touch.
    pub fn required_length(&self, cap: usize) -> Result<usize> {
        (1..=cap).try_fold(0, |m, n| Ok(m.max(self.window_end(n)?)))
    }
}

impl fmt::Display for FSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FSpec::Expr(e) => e.write(f, 0),
            FSpec::Table(t) => {
                f.write_str("table:")?;
                for (i, (n, v)) in t.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{n}->{v}")?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for FSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<FSpec> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("table:") {
            return parse_table(rest);
        }
        let mut p = ExprParser {
            src: s.as_bytes(),
            pos: 0,
        };
        let e = p.sum()?;
        p.skip_ws();
        if p.pos < p.src.len() {
            return Err(p.error("unexpected trailing input"));
        }
        Ok(FSpec::Expr(e))
    }
}

fn parse_table(s: &str) -> Result<FSpec> {
    let syntax = |message: String| Error::Syntax {
        position: Position { line: 1, column: 1 },
        message,
    };
    let mut t = BTreeMap::new();
    for entry in s.split(',').map(str::trim).filter(|e| !e.is_empty()) {
        let (a, b) = entry
            .split_once("->")
            .ok_or_else(|| syntax(format!("table entry `{entry}` is not `n->F(n)`")))?;
        let n: usize = a
            .trim()
            .parse()
            .map_err(|_| syntax(format!("bad index `{a}`")))?;
        let v: usize = b
            .trim()
            .parse()
            .map_err(|_| syntax(format!("bad value `{b}`")))?;
        if n == 0 {
            return Err(syntax("table indices start at 1".into()));
        }
        if t.insert(n, v).is_some() {
            return Err(syntax(format!("index {n} appears twice")));
        }
    }
    if t.is_empty() {
        return Err(syntax("empty table".into()));
    }
    Ok(FSpec::Table(t))
}

struct ExprParser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl ExprParser<'_> {
    fn error(&self, message: &str) -> Error {
        Error::Syntax {
            position: Position {
                line: 1,
                column: self.pos + 1,
            },
            message: message.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.src.get(self.pos).is_some_and(u8::is_ascii_whitespace) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn sum(&mut self) -> Result<FExpr> {
        let mut e = self.product()?;
        while self.peek() == Some(b'+') {
            self.pos += 1;
            e = FExpr::Add(Box::new(e), Box::new(self.product()?));
        }
        Ok(e)
    }

    fn product(&mut self) -> Result<FExpr> {
        let mut e = self.power()?;
        loop {
            match self.peek() {
                Some(b'*') => self.pos += 1,
                // `2n`, `3(n+1)`
                Some(b'n' | b'(') if matches!(e, FExpr::Lit(_)) => {}
                _ => return Ok(e),
            }
            e = FExpr::Mul(Box::new(e), Box::new(self.power()?));
        }
    }

    fn power(&mut self) -> Result<FExpr> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let exp = self.literal()?;
            let exp = u32::try_from(exp).map_err(|_| self.error("exponent too large"))?;
            return Ok(FExpr::Pow(Box::new(base), exp));
        }
        Ok(base)
    }

    fn literal(&mut self) -> Result<u64> {
        let start = self.pos;
        while self.src.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected an integer"));
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .expect("ascii digits")
            .parse()
            .map_err(|_| Error::Syntax {
                position: Position {
                    line: 1,
                    column: start + 1,
                },
                message: "integer literal too large".into(),
            })
    }

    fn atom(&mut self) -> Result<FExpr> {
        match self.peek() {
            Some(b'n') => {
                self.pos += 1;
                Ok(FExpr::N)
            }
            Some(b'(') => {
                self.pos += 1;
                let e = self.sum()?;
                if self.peek() != Some(b')') {
                    return Err(self.error("expected `)`"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => Ok(FExpr::Lit(self.literal()?)),
            Some(_) => Err(self.error("expected `n`, an integer or `(`")),
            None => Err(self.error("unexpected end of input")),
        }
    }
}

impl Serialize for FSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for FSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
