//! Expression grammar shared by scalars, `U_q` elements and `O_q` words.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/')? unary)*        juxtaposition multiplies
//! unary  := '-' unary | power
//! power  := atom ('^' '-'? int)?
//! atom   := int | 'q' | 'nu' | ident | E<i> | F<i> | K<i> | u[a,b]
//!         | '(' expr ')' | '[' expr ',' expr ']' ('_' (atom | '{' expr '}'))?
//! ```

use std::collections::BTreeMap;

use thiserror::Error;

use crate::scalars::{RatQ, ScalarError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("parse error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
}

pub type Vars = BTreeMap<String, RatQ>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GenKind {
    E,
    F,
    K,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Int(i128),
    Q,
    Nu,
    Var(String),
    Gen(GenKind, usize),
    U(usize, usize),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Pow(Box<Expr>, i32),
    Comm(Box<Expr>, Box<Expr>, Box<Expr>),
}

impl Expr {
    /// True when no generator or matrix coefficient occurs.
    pub fn is_scalar(&self) -> bool {
        match self {
            Expr::Int(_) | Expr::Q | Expr::Nu | Expr::Var(_) => true,
            Expr::Gen(..) | Expr::U(..) => false,
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.is_scalar() && b.is_scalar()
            }
            Expr::Neg(a) | Expr::Pow(a, _) => a.is_scalar(),
            Expr::Comm(a, b, c) => a.is_scalar() && b.is_scalar() && c.is_scalar(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(i128),
    Ident(String),
    Gen(GenKind, usize),
    Sym(char),
}

fn tokenize(s: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let b = s.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < b.len() {
        let c = b[i] as char;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if c.is_ascii_digit() {
            while i < b.len() && b[i].is_ascii_digit() {
                i += 1;
            }
            let v: i128 = s[start..i].parse().map_err(|_| ParseError::Syntax {
                pos: start,
                msg: "integer literal too large".into(),
            })?;
            out.push((start, Tok::Int(v)));
        } else if matches!(c, 'E' | 'F' | 'K') && i + 1 < b.len() && b[i + 1].is_ascii_digit() {
            i += 1;
            while i < b.len() && b[i].is_ascii_digit() {
                i += 1;
            }
            let idx: usize = s[start + 1..i].parse().map_err(|_| ParseError::Syntax {
                pos: start,
                msg: "bad generator index".into(),
            })?;
            let kind = match c {
                'E' => GenKind::E,
                'F' => GenKind::F,
                _ => GenKind::K,
            };
            out.push((start, Tok::Gen(kind, idx)));
        } else if c.is_ascii_lowercase() {
            while i < b.len() && b[i].is_ascii_lowercase() {
                i += 1;
            }
            while i < b.len() && b[i].is_ascii_digit() {
                i += 1;
            }
            out.push((start, Tok::Ident(s[start..i].to_string())));
        } else if "+-*/^()[],_{}".contains(c) {
            out.push((start, Tok::Sym(c)));
            i += 1;
        } else {
            return Err(ParseError::Syntax { pos: start, msg: format!("unexpected character `{c}`") });
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.1)
    }

    fn at(&self) -> usize {
        self.toks.get(self.pos).map(|t| t.0).unwrap_or(self.end)
    }

    fn err<T>(&self, msg: &str) -> Result<T, ParseError> {
        Err(ParseError::Syntax { pos: self.at(), msg: msg.to_string() })
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            self.err(&format!("expected `{c}`"))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat('-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn starts_atom(&self) -> bool {
        matches!(
            self.peek(),
            Some(Tok::Int(_)) | Some(Tok::Ident(_)) | Some(Tok::Gen(..)) | Some(Tok::Sym('(')) | Some(Tok::Sym('['))
        )
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat('/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else if self.starts_atom() {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.power()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.eat('^') {
            let neg = self.eat('-');
            let braced = self.eat('{');
            let neg = neg || (braced && self.eat('-'));
            let e = match self.peek() {
                Some(Tok::Int(v)) => *v,
                _ => return self.err("expected integer exponent"),
            };
            self.pos += 1;
            if braced {
                self.expect('}')?;
            }
            let e = i32::try_from(e).map_err(|_| ParseError::Invalid("exponent too large".into()))?;
            return Ok(Expr::Pow(Box::new(base), if neg { -e } else { e }));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let tok = match self.peek() {
            Some(t) => t.clone(),
            None => return self.err("unexpected end of input"),
        };
        self.pos += 1;
        match tok {
            Tok::Int(v) => Ok(Expr::Int(v)),
            Tok::Gen(k, i) => Ok(Expr::Gen(k, i)),
            Tok::Ident(name) => match name.as_str() {
                "q" => Ok(Expr::Q),
                "nu" => Ok(Expr::Nu),
                "u" if self.peek() == Some(&Tok::Sym('[')) => {
                    self.pos += 1;
                    let a = self.index()?;
                    self.expect(',')?;
                    let b = self.index()?;
                    self.expect(']')?;
                    Ok(Expr::U(a, b))
                }
                _ => Ok(Expr::Var(name)),
            },
            Tok::Sym('(') => {
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Sym('[') => {
                let a = self.expr()?;
                self.expect(',')?;
                let b = self.expr()?;
                self.expect(']')?;
                let c = if self.eat('_') {
                    if self.eat('{') {
                        let c = self.expr()?;
                        self.expect('}')?;
                        c
                    } else if self.eat('-') {
                        // `[a,b]_-` and `[a,b]_+` shorthands
                        Expr::Pow(Box::new(Expr::Q), -1)
                    } else if self.eat('+') {
                        Expr::Q
                    } else {
                        self.power()?
                    }
                } else {
                    Expr::Int(1)
                };
                Ok(Expr::Comm(Box::new(a), Box::new(b), Box::new(c)))
            }
            Tok::Sym(c) => {
                self.pos -= 1;
                self.err(&format!("unexpected `{c}`"))
            }
        }
    }

    fn index(&mut self) -> Result<usize, ParseError> {
        match self.peek() {
            Some(Tok::Int(v)) if *v > 0 => {
                let v = *v as usize;
                self.pos += 1;
                Ok(v)
            }
            _ => self.err("expected positive index"),
        }
    }
}

pub fn parse_expr(s: &str) -> Result<Expr, ParseError> {
    let toks = tokenize(s)?;
    if toks.is_empty() {
        return Err(ParseError::Syntax { pos: 0, msg: "empty expression".into() });
    }
    let mut p = Parser { toks, pos: 0, end: s.len() };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return p.err("trailing input");
    }
    Ok(e)
}

/// Evaluates a generator-free expression.
pub fn eval_scalar(e: &Expr, vars: &Vars) -> Result<RatQ, ParseError> {
    Ok(match e {
        Expr::Int(v) => RatQ::from_parts(vec![*v], vec![1]),
        Expr::Q => RatQ::q(),
        Expr::Nu => RatQ::nu(),
        Expr::Var(v) => vars.get(v).cloned().ok_or_else(|| ParseError::UnknownSymbol(v.clone()))?,
        Expr::Gen(..) | Expr::U(..) => {
            return Err(ParseError::Invalid("generator in a scalar expression".into()))
        }
        Expr::Add(a, b) => eval_scalar(a, vars)? + eval_scalar(b, vars)?,
        Expr::Sub(a, b) => eval_scalar(a, vars)? - eval_scalar(b, vars)?,
        Expr::Mul(a, b) => eval_scalar(a, vars)? * eval_scalar(b, vars)?,
        Expr::Div(a, b) => eval_scalar(a, vars)?.try_div(&eval_scalar(b, vars)?)?,
        Expr::Neg(a) => -eval_scalar(a, vars)?,
        Expr::Pow(a, k) => eval_scalar(a, vars)?.pow(*k)?,
        Expr::Comm(a, b, c) => {
            let (a, b, c) = (eval_scalar(a, vars)?, eval_scalar(b, vars)?, eval_scalar(c, vars)?);
            &(&a * &b) - &(&c * &(&b * &a))
        }
    })
}

pub fn parse_scalar(s: &str, vars: &Vars) -> Result<RatQ, ParseError> {
    eval_scalar(&parse_expr(s)?, vars)
}

/// A ring into which expressions can be evaluated.
pub trait ExprTarget: Sized {
    fn scalar(&self, c: RatQ) -> Result<Self::Elem, ParseError>;
    /// A generator or coefficient raised to an integer power.
    fn atom(&self, a: &Expr, power: i32) -> Result<Self::Elem, ParseError>;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn scale(&self, a: &Self::Elem, c: &RatQ) -> Self::Elem;
    type Elem: Clone;
}

pub fn eval_in<T: ExprTarget>(t: &T, e: &Expr, vars: &Vars) -> Result<T::Elem, ParseError> {
    if e.is_scalar() {
        return t.scalar(eval_scalar(e, vars)?);
    }
    Ok(match e {
        Expr::Gen(..) | Expr::U(..) => t.atom(e, 1)?,
        Expr::Add(a, b) => t.add(&eval_in(t, a, vars)?, &eval_in(t, b, vars)?),
        Expr::Sub(a, b) => {
            let nb = t.scale(&eval_in(t, b, vars)?, &RatQ::int(-1));
            t.add(&eval_in(t, a, vars)?, &nb)
        }
        Expr::Mul(a, b) => {
            if a.is_scalar() {
                t.scale(&eval_in(t, b, vars)?, &eval_scalar(a, vars)?)
            } else if b.is_scalar() {
                t.scale(&eval_in(t, a, vars)?, &eval_scalar(b, vars)?)
            } else {
                t.mul(&eval_in(t, a, vars)?, &eval_in(t, b, vars)?)
            }
        }
        Expr::Div(a, b) => {
            if !b.is_scalar() {
                return Err(ParseError::Invalid("division by a non-scalar".into()));
            }
            let inv = eval_scalar(b, vars)?.inv()?;
            t.scale(&eval_in(t, a, vars)?, &inv)
        }
        Expr::Neg(a) => t.scale(&eval_in(t, a, vars)?, &RatQ::int(-1)),
        Expr::Pow(a, k) => match a.as_ref() {
            Expr::Gen(..) | Expr::U(..) => t.atom(a, *k)?,
            _ => {
                if *k < 0 {
                    return Err(ParseError::Invalid("negative power of a non-scalar".into()));
                }
                let base = eval_in(t, a, vars)?;
                let mut acc = t.scalar(RatQ::one())?;
                for _ in 0..*k {
                    acc = t.mul(&acc, &base);
                }
                acc
            }
        },
        Expr::Comm(a, b, c) => {
            if !c.is_scalar() {
                return Err(ParseError::Invalid("commutator subscript must be a scalar".into()));
            }
            let c = eval_scalar(c, vars)?;
            let x = eval_in(t, a, vars)?;
            let y = eval_in(t, b, vars)?;
            let xy = t.mul(&x, &y);
            let yx = t.mul(&y, &x);
            t.add(&xy, &t.scale(&yx, &(-c)))
        }
        Expr::Int(_) | Expr::Q | Expr::Nu | Expr::Var(_) => unreachable!("handled as scalar"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_grammar() {
        let v = Vars::new();
        assert_eq!(parse_scalar("q*q^-1", &v).unwrap(), RatQ::one());
        assert_eq!(parse_scalar("nu", &v).unwrap(), RatQ::nu());
        assert_eq!(parse_scalar("-q^2", &v).unwrap(), -RatQ::q_pow(2));
        assert_eq!(parse_scalar("2 q", &v).unwrap(), &RatQ::int(2) * &RatQ::q());
        assert_eq!(parse_scalar("(q^2 - q^-2)/(q - q^-1)", &v).unwrap(), RatQ::qint(2));
        assert_eq!(parse_scalar("q^{-1}", &v).unwrap(), RatQ::q_pow(-1));
        assert!(parse_scalar("1/0", &v).is_err());
        assert!(parse_scalar("q +", &v).is_err());
        assert!(parse_scalar("E1", &v).is_err());
        assert!(matches!(parse_scalar("t", &v), Err(ParseError::UnknownSymbol(_))));
        let mut w = Vars::new();
        w.insert("t".into(), RatQ::int(3));
        assert_eq!(parse_scalar("t^2", &w).unwrap(), RatQ::int(9));
    }

    #[test]
    fn generator_tokens() {
        let e = parse_expr("[E2,E1]_{q^-1} - K3^-1 u[1,2]").unwrap();
        assert!(!e.is_scalar());
        assert!(parse_expr("E1E2").is_ok());
        assert!(parse_expr("[E1, E2]_-").is_ok());
    }
}
