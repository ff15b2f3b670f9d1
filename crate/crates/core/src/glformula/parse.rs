use num_traits::{One, Zero};

use super::ast::{Formula, Rational, Span, Term};
use crate::error::{Error, Position, Result};

const KEYWORDS: [&str; 6] = ["sup", "inf", "d", "min", "max", "abs"];

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    /// Digits with an optional fractional part, as written.
    Number(String),
    At,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Dot,
    Plus,
    Star,
    Slash,
    TruncMinus,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Number(s) => format!("number `{s}`"),
            Tok::Eof => "end of input".into(),
            other => format!(
                "`{}`",
                match other {
                    Tok::At => "@",
                    Tok::LParen => "(",
                    Tok::RParen => ")",
                    Tok::LBracket => "[",
                    Tok::RBracket => "]",
                    Tok::Comma => ",",
                    Tok::Dot => ".",
                    Tok::Plus => "+",
                    Tok::Star => "*",
                    Tok::Slash => "/",
                    _ => "-.",
                }
            ),
        }
    }
}

fn lex(src: &str) -> Result<Vec<(Tok, Position)>> {
    let mut out = Vec::new();
    let mut line = 1;
    let mut col = 1;
    let mut chars = src.chars().peekable();
    while let Some(&c) = chars.peek() {
        let pos = Position { line, column: col };
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars<'_>>| {
            let c = chars.next();
            if c == Some('\n') {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            c
        };
        if c.is_whitespace() {
            bump(&mut chars);
            continue;
        }
        if c == '#' {
            while chars.peek().is_some_and(|&c| c != '\n') {
                bump(&mut chars);
            }
            continue;
        }
        let tok = if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            while chars
                .peek()
                .is_some_and(|c| c.is_ascii_alphanumeric() || *c == '_' || *c == '\'')
            {
                s.push(bump(&mut chars).unwrap());
            }
            Tok::Ident(s)
        } else if c.is_ascii_digit() {
            let mut s = String::new();
            while chars.peek().is_some_and(char::is_ascii_digit) {
                s.push(bump(&mut chars).unwrap());
            }
            // a `.` followed by a digit continues the number; otherwise it is
            // the quantifier dot
            let mut ahead = chars.clone();
            if ahead.next() == Some('.') && ahead.next().is_some_and(|c| c.is_ascii_digit()) {
                s.push(bump(&mut chars).unwrap());
                while chars.peek().is_some_and(char::is_ascii_digit) {
                    s.push(bump(&mut chars).unwrap());
                }
            }
            Tok::Number(s)
        } else {
            bump(&mut chars);
            match c {
                '@' => Tok::At,
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '[' => Tok::LBracket,
                ']' => Tok::RBracket,
                ',' => Tok::Comma,
                '.' => Tok::Dot,
                '+' => Tok::Plus,
                '*' => Tok::Star,
                '/' => Tok::Slash,
                '\u{2238}' => Tok::TruncMinus,
                '-' if chars.peek() == Some(&'.') => {
                    bump(&mut chars);
                    Tok::TruncMinus
                }
                '-' => {
                    return Err(Error::Syntax {
                        position: pos,
                        message: "plain `-` is not a connective; use `-.` (truncated minus)".into(),
                    })
                }
                other => {
                    return Err(Error::Syntax {
                        position: pos,
                        message: format!("unexpected character `{other}`"),
                    })
                }
            }
        };
        out.push((tok, pos));
    }
    out.push((Tok::Eof, Position { line, column: col }));
    Ok(out)
}

/// Parses `digits` or `digits.digits` exactly.
pub(crate) fn parse_decimal(s: &str) -> Option<Rational> {
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    if int.is_empty()
        || !int.bytes().all(|b| b.is_ascii_digit())
        || !frac.bytes().all(|b| b.is_ascii_digit())
    {
        return None;
    }
    let den = 10u64.checked_pow(frac.len() as u32)?;
    let num = format!("{int}{frac}").parse::<u64>().ok()?;
    Some(Rational::new(num, den))
}

/// `3`, `0.25` or `1/4`.
pub fn parse_rational(s: &str) -> Option<Rational> {
    match s.split_once('/') {
        Some((a, b)) => {
            let a = parse_decimal(a.trim())?;
            let b = parse_decimal(b.trim())?;
            (!b.is_zero()).then(|| a / b)
        }
        None => parse_decimal(s.trim()),
    }
}

struct Parser {
    toks: Vec<(Tok, Position)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn peek2(&self) -> &Tok {
        &self.toks[(self.at + 1).min(self.toks.len() - 1)].0
    }

    fn pos(&self) -> Position {
        self.toks[self.at].1
    }

    fn next(&mut self) -> (Tok, Position) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Syntax {
            position: self.pos(),
            message: message.into(),
        })
    }

    fn expect(&mut self, tok: Tok) -> Result<()> {
        if *self.peek() == tok {
            self.next();
            Ok(())
        } else {
            self.error(format!(
                "expected {}, found {}",
                tok.describe(),
                self.peek().describe()
            ))
        }
    }

    fn ident(&mut self) -> Result<(String, Position)> {
        match self.next() {
            (Tok::Ident(s), p) => Ok((s, p)),
            (t, p) => Err(Error::Syntax {
                position: p,
                message: format!("expected a name, found {}", t.describe()),
            }),
        }
    }

    fn rational(&mut self) -> Result<Rational> {
        let (tok, pos) = self.next();
        let Tok::Number(a) = tok else {
            return Err(Error::Syntax {
                position: pos,
                message: format!("expected a number, found {}", tok.describe()),
            });
        };
        let overflow = || Error::Syntax {
            position: pos,
            message: format!("number `{a}` is out of range"),
        };
        let mut q = parse_decimal(&a).ok_or_else(overflow)?;
        if *self.peek() == Tok::Slash {
            self.next();
            let (tok, dpos) = self.next();
            let Tok::Number(b) = tok else {
                return Err(Error::Syntax {
                    position: dpos,
                    message: format!("expected a denominator, found {}", tok.describe()),
                });
            };
            let d = parse_decimal(&b).ok_or_else(overflow)?;
            if d.is_zero() {
                return Err(Error::Syntax {
                    position: dpos,
                    message: "zero denominator".into(),
                });
            }
            q /= d;
        }
        Ok(q)
    }

    fn sum(&mut self) -> Result<Formula> {
        let mut f = self.product()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.next();
                    f = Formula::add(f, self.product()?);
                }
                Tok::TruncMinus => {
                    self.next();
                    f = Formula::tsub(f, self.product()?);
                }
                _ => return Ok(f),
            }
        }
    }

    fn product(&mut self) -> Result<Formula> {
        if let Tok::Number(_) = self.peek() {
            let pos = self.pos();
            let q = self.rational()?;
            if *self.peek() == Tok::Star {
                self.next();
                return Ok(Formula::scale(q, self.product()?));
            }
            if q > Rational::one() {
                return Err(Error::Syntax {
                    position: pos,
                    message: format!("constant {q} is outside [0, 1]"),
                });
            }
            return Ok(Formula::Const(q));
        }
        self.primary()
    }

    fn args(&mut self) -> Result<Vec<Formula>> {
        self.expect(Tok::LParen)?;
        let mut xs = vec![self.sum()?];
        while *self.peek() == Tok::Comma {
            self.next();
            xs.push(self.sum()?);
        }
        self.expect(Tok::RParen)?;
        Ok(xs)
    }

    fn primary(&mut self) -> Result<Formula> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::LParen => {
                self.next();
                let f = self.sum()?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            Tok::Ident(name) => match name.as_str() {
                "sup" | "inf" => {
                    self.next();
                    let (var, vpos) = self.ident()?;
                    if KEYWORDS.contains(&var.as_str()) {
                        return Err(Error::Syntax {
                            position: vpos,
                            message: format!("`{var}` is reserved"),
                        });
                    }
                    self.expect(Tok::Dot)?;
                    let body = self.sum()?;
                    Ok(if name == "sup" {
                        Formula::sup(&var, body)
                    } else {
                        Formula::inf(&var, body)
                    })
                }
                "d" => {
                    self.next();
                    self.expect(Tok::LParen)?;
                    let a = self.term()?;
                    self.expect(Tok::Comma)?;
                    let b = self.term()?;
                    self.expect(Tok::RParen)?;
                    Ok(Formula::Dist(a, b))
                }
                "min" | "max" => {
                    self.next();
                    let xs = self.args()?;
                    Ok(if name == "min" {
                        Formula::Min(xs)
                    } else {
                        Formula::Max(xs)
                    })
                }
                "abs" => {
                    self.next();
                    let mut xs = self.args()?;
                    if xs.len() != 1 {
                        return Err(Error::Syntax {
                            position: pos,
                            message: "abs takes one argument".into(),
                        });
                    }
                    Ok(Formula::Abs(Box::new(xs.pop().unwrap())))
                }
                _ if *self.peek2() == Tok::LParen => {
                    self.next();
                    self.expect(Tok::LParen)?;
                    let mut args = vec![self.term()?];
                    while *self.peek() == Tok::Comma {
                        self.next();
                        args.push(self.term()?);
                    }
                    self.expect(Tok::RParen)?;
                    Ok(Formula::Pred {
                        symbol: name,
                        args,
                        span: Span(pos),
                    })
                }
                _ => self.error(format!(
                    "expected a formula, found the term `{name}` (distances are written d(x, y))"
                )),
            },
            t => self.error(format!("expected a formula, found {}", t.describe())),
        }
    }

    fn term(&mut self) -> Result<Term> {
        let pos = self.pos();
        match self.next() {
            (Tok::At, _) => {
                let (name, _) = self.ident()?;
                Ok(Term::Const {
                    name,
                    span: Span(pos),
                })
            }
            (Tok::Ident(name), _) if name == "L" && *self.peek() == Tok::LBracket => {
                self.next();
                let tpos = self.pos();
                let t = self.rational()?;
                if t > Rational::one() {
                    return Err(Error::Syntax {
                        position: tpos,
                        message: format!("L[t] needs t in [0, 1], got {t}"),
                    });
                }
                self.expect(Tok::RBracket)?;
                self.expect(Tok::LParen)?;
                let a = self.term()?;
                self.expect(Tok::Comma)?;
                let b = self.term()?;
                self.expect(Tok::RParen)?;
                Ok(Term::Geo {
                    t,
                    a: Box::new(a),
                    b: Box::new(b),
                })
            }
            (Tok::Ident(name), _) => {
                if KEYWORDS.contains(&name.as_str()) {
                    return Err(Error::Syntax {
                        position: pos,
                        message: format!("`{name}` is reserved and cannot be a term"),
                    });
                }
                if *self.peek() == Tok::LParen {
                    self.next();
                    let arg = self.term()?;
                    self.expect(Tok::RParen)?;
                    Ok(Term::MapApply {
                        symbol: name,
                        arg: Box::new(arg),
                        span: Span(pos),
                    })
                } else {
                    Ok(Term::Var {
                        name,
                        span: Span(pos),
                    })
                }
            }
            (t, _) => Err(Error::Syntax {
                position: pos,
                message: format!("expected a term, found {}", t.describe()),
            }),
        }
    }
}

/// Parses one formula; `#` starts a comment running to the end of the line.
pub fn parse(text: &str) -> Result<Formula> {
    let mut p = Parser {
        toks: lex(text)?,
        at: 0,
    };
    let f = p.sum()?;
    if *p.peek() != Tok::Eof {
        return p.error(format!(
            "unexpected {} after the formula",
            p.peek().describe()
        ));
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::glformula::ast::var;

    #[test]
    fn distance_of_a_variable_to_itself() {
        assert_eq!(parse("d(x,x)").unwrap(), Formula::Dist(var("x"), var("x")));
    }

    #[test]
    fn e_condition_shape() {
        let f = parse("sup x . sup y . (d(x, T(y)) -. 3*d(x, T(x))) -. d(x,y)").unwrap();
        let tx = |v: &str| Term::MapApply {
            symbol: "T".into(),
            arg: Box::new(var(v)),
            span: Span::default(),
        };
        let body = Formula::tsub(
            Formula::tsub(
                Formula::dist(var("x"), tx("y")),
                Formula::scale(Rational::from_integer(3), Formula::dist(var("x"), tx("x"))),
            ),
            Formula::dist(var("x"), var("y")),
        );
        assert_eq!(f, Formula::sup("x", Formula::sup("y", body)));
    }

    #[test]
    fn geodesic_parameter_domain() {
        match parse("d(L[1.5](x,y), x)") {
            Err(Error::Syntax { position, message }) => {
                assert_eq!(position, Position { line: 1, column: 5 });
                assert!(message.contains("[0, 1]"));
            }
            other => panic!("{other:?}"),
        }
        let f = parse("d(L[0.25](x,y), L[1/4](x, y))").unwrap();
        let Formula::Dist(Term::Geo { t: a, .. }, Term::Geo { t: b, .. }) = f else {
            panic!()
        };
        assert_eq!(a, Rational::new(1, 4));
        assert_eq!(a, b);
    }

    #[test]
    fn syntax_errors_have_positions() {
        match parse("sup x .\n  d(x, y) -. ") {
            Err(Error::Syntax { position, .. }) => assert_eq!(position.line, 2),
            other => panic!("{other:?}"),
        }
        assert!(parse("d(x, y) - d(y, x)").is_err());
        assert!(parse("2").is_err());
        assert!(parse("sup d . d(d, d)").is_err());
        assert!(parse("x").is_err());
        assert!(parse("d(x, y))").is_err());
    }

    #[test]
    fn comments_and_constants() {
        let f = parse("# a comment\nmin(d(x, @zero), 1/2) # trailing\n").unwrap();
        assert_eq!(f.to_string(), "min(d(x, @zero), 1/2)");
        assert_eq!(f.free_vars(), vec!["x".to_string()]);
    }

    #[test]
    fn printing_round_trips() {
        for text in [
            "sup x . sup y . (d(x, T(y)) -. 3*d(x, T(x))) -. d(x,y)",
            "inf a . sup b . max(P(a), 1/3*d(L[0.5](a, b), b) + 0) -. abs(d(a, a))",
            "(sup x . d(x, x)) + inf y . 1",
            "2*3*d(x, y)",
        ] {
            let f = parse(text).unwrap();
            assert_eq!(parse(&f.to_string()).unwrap(), f, "{text}");
        }
    }

    #[test]
    fn rationals() {
        assert_eq!(parse_rational("0.125"), Some(Rational::new(1, 8)));
        assert_eq!(parse_rational("3/6"), Some(Rational::new(1, 2)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("-1"), None);
    }
}
