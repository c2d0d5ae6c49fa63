//! Small arithmetic language for right-hand sides `f_i(u)` and synthetic
//! fields: numbers, `u1..um`, `x1..xn`, `r`, `+`, `*`, `^` and parentheses.
//! Exponents are numeric literals and may carry a sign.

use crate::error::{Error, Result};
use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    /// `u{i+1}`
    Field(usize),
    /// `x{d+1}`
    Coord(usize),
    Radius,
    Add(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, f64),
}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr> {
        let mut p = Parser {
            chars: src.chars().filter(|c| !c.is_whitespace()).collect(),
            pos: 0,
        };
        let e = p.sum()?;
        if p.pos != p.chars.len() {
            return Err(p.fail("unexpected trailing input"));
        }
        Ok(e)
    }

    pub fn field(i: usize) -> Expr {
        Expr::Field(i)
    }

    pub fn pow(self, p: f64) -> Expr {
        Expr::Pow(Box::new(self), p)
    }

    pub fn eval(&self, u: &[f64], x: &[f64]) -> f64 {
        match self {
            Expr::Const(c) => *c,
            Expr::Field(i) => u[*i],
            Expr::Coord(d) => x[*d],
            Expr::Radius => x.iter().map(|v| v * v).sum::<f64>().sqrt(),
            Expr::Add(a, b) => a.eval(u, x) + b.eval(u, x),
            Expr::Mul(a, b) => a.eval(u, x) * b.eval(u, x),
            Expr::Pow(a, p) => {
                let base = a.eval(u, x);
                if p.fract() == 0.0 && p.abs() < 64.0 {
                    base.powi(*p as i32)
                } else {
                    base.powf(*p)
                }
            }
        }
    }

    /// Highest field index referenced, plus one.
    pub fn fields_used(&self) -> usize {
        self.fold(0, &|acc, e| match e {
            Expr::Field(i) => acc.max(i + 1),
            _ => acc,
        })
    }

    pub fn coords_used(&self) -> usize {
        self.fold(0, &|acc, e| match e {
            Expr::Coord(d) => acc.max(d + 1),
            Expr::Radius => acc.max(1),
            _ => acc,
        })
    }

    fn fold<T: Copy>(&self, init: T, f: &dyn Fn(T, &Expr) -> T) -> T {
        let here = f(init, self);
        match self {
            Expr::Add(a, b) | Expr::Mul(a, b) => b.fold(a.fold(here, f), f),
            Expr::Pow(a, _) => a.fold(here, f),
            _ => here,
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) => 1,
            Expr::Mul(..) => 2,
            Expr::Pow(..) => 3,
            _ => 4,
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let wrap = |f: &mut fmt::Formatter<'_>, e: &Expr, min: u8| {
            if e.precedence() < min {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        };
        match self {
            Expr::Const(c) => write!(f, "{c:?}"),
            Expr::Field(i) => write!(f, "u{}", i + 1),
            Expr::Coord(d) => write!(f, "x{}", d + 1),
            Expr::Radius => write!(f, "r"),
            Expr::Add(a, b) => {
                wrap(f, a, 1)?;
                write!(f, " + ")?;
                wrap(f, b, 2)
            }
            Expr::Mul(a, b) => {
                wrap(f, a, 2)?;
                write!(f, " * ")?;
                wrap(f, b, 3)
            }
            Expr::Pow(a, p) => {
                wrap(f, a, 4)?;
                write!(f, "^{p:?}")
            }
        }
    }
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
}

impl Parser {
    fn fail(&self, what: &str) -> Error {
        let src: String = self.chars.iter().collect();
        Error::Parse(format!("{what} at offset {} in `{src}`", self.pos))
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn sum(&mut self) -> Result<Expr> {
        let mut lhs = self.product()?;
        while self.peek() == Some('+') {
            self.pos += 1;
            lhs = Expr::Add(Box::new(lhs), Box::new(self.product()?));
        }
        Ok(lhs)
    }

    fn product(&mut self) -> Result<Expr> {
        let mut lhs = self.power()?;
        while self.peek() == Some('*') {
            self.pos += 1;
            lhs = Expr::Mul(Box::new(lhs), Box::new(self.power()?));
        }
        Ok(lhs)
    }

    fn power(&mut self) -> Result<Expr> {
        let mut base = self.atom()?;
        while self.peek() == Some('^') {
            self.pos += 1;
            let p = if self.peek() == Some('(') {
                self.pos += 1;
                let v = self.number()?;
                self.expect(')')?;
                v
            } else {
                self.number()?
            };
            base = Expr::Pow(Box::new(base), p);
        }
        Ok(base)
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.fail(&format!("expected `{c}`")))
        }
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let e = self.sum()?;
                self.expect(')')?;
                Ok(e)
            }
            Some(c @ ('u' | 'x')) => {
                self.pos += 1;
                let start = self.pos;
                while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                    self.pos += 1;
                }
                let digits: String = self.chars[start..self.pos].iter().collect();
                let idx: usize = digits.parse().map_err(|_| self.fail("expected an index"))?;
                if idx == 0 {
                    return Err(self.fail("indices start at 1"));
                }
                Ok(if c == 'u' {
                    Expr::Field(idx - 1)
                } else {
                    Expr::Coord(idx - 1)
                })
            }
            Some('r') => {
                self.pos += 1;
                Ok(Expr::Radius)
            }
            Some(c) if c.is_ascii_digit() || c == '.' || c == '-' => Ok(Expr::Const(self.number()?)),
            _ => Err(self.fail("expected a term")),
        }
    }

    fn number(&mut self) -> Result<f64> {
        let start = self.pos;
        if self.peek() == Some('-') {
            self.pos += 1;
        }
        while let Some(c) = self.peek() {
            let exp_sign = (c == '-' || c == '+')
                && matches!(self.chars.get(self.pos.wrapping_sub(1)), Some('e' | 'E'));
            if c.is_ascii_digit() || c == '.' || c == 'e' || c == 'E' || exp_sign {
                self.pos += 1;
            } else {
                break;
            }
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        text.parse().map_err(|_| self.fail("malformed number"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_evaluates() {
        let e = Expr::parse("u1^5 + 2*u1*u2^(-1.5)").unwrap();
        let v = e.eval(&[2.0, 4.0], &[]);
        assert!((v - (32.0 + 2.0 * 2.0 / 8.0)).abs() < 1e-14);
        assert_eq!(e.fields_used(), 2);
        let g = Expr::parse("(1 + r^2)^-1").unwrap();
        assert!((g.eval(&[], &[1.0, 1.0, 1.0]) - 0.25).abs() < 1e-15);
        assert_eq!(Expr::parse("1 + x3").unwrap().coords_used(), 3);
    }

    #[test]
    fn display_round_trips() {
        for src in ["u1^5", "(u1 + u2)^3 * u3", "0.1 + 2.5e-7 * u1", "(1 + r^2)^-1.5", "x1 * (x2 + 3)"] {
            let e = Expr::parse(src).unwrap();
            assert_eq!(Expr::parse(&e.to_string()).unwrap(), e, "{src} -> {e}");
        }
        let odd = Expr::Const(0.1 + 0.2);
        assert_eq!(Expr::parse(&odd.to_string()).unwrap(), odd);
    }

    #[test]
    fn rejects_garbage() {
        assert!(Expr::parse("u0").is_err());
        assert!(Expr::parse("u1 +").is_err());
        assert!(Expr::parse("(u1").is_err());
        assert!(Expr::parse("u1 u2").is_err());
    }
}
