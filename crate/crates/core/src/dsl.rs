//! A small expression language for colorings of `FinFn`.
//!
//! ```text
//! expr    := term (("+" | "-") term)*
//! term    := factor (("*" | "%") factor)*
//! factor  := integer | builtin | "(" expr ")"
//! builtin := "weight" | "suppSize" | "minSupp" | "maxSupp"
//!          | "valAtMin" | "valAtMax" | "countVal" "(" integer ")"
//! ```
//!
//! Values are naturals; `-` truncates at zero. The caller reduces the result
//! mod `r` to get a color.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::fin::FinFn;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Mod,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Mod => '%',
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Mod => 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Builtin {
    Weight,
    SuppSize,
    MinSupp,
    MaxSupp,
    ValAtMin,
    ValAtMax,
    CountVal(u64),
}

impl Builtin {
    fn name(self) -> &'static str {
        match self {
            Builtin::Weight => "weight",
            Builtin::SuppSize => "suppSize",
            Builtin::MinSupp => "minSupp",
            Builtin::MaxSupp => "maxSupp",
            Builtin::ValAtMin => "valAtMin",
            Builtin::ValAtMax => "valAtMax",
            Builtin::CountVal(_) => "countVal",
        }
    }

    fn eval(self, f: &FinFn) -> Result<u64> {
        let entries = f.entries();
        let need = |x: Option<&(usize, u32)>| x.copied().ok_or(Error::EmptySupportBuiltin(self.name()));
        Ok(match self {
            Builtin::Weight => f.weight(),
            Builtin::SuppSize => entries.len() as u64,
            Builtin::MinSupp => need(entries.first())?.0 as u64,
            Builtin::MaxSupp => need(entries.last())?.0 as u64,
            Builtin::ValAtMin => u64::from(need(entries.first())?.1),
            Builtin::ValAtMax => u64::from(need(entries.last())?.1),
            Builtin::CountVal(v) => entries.iter().filter(|&&(_, w)| u64::from(w) == v).count() as u64,
        })
    }
}

/// Parsed coloring expression.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ColoringExpr {
    Int(u64),
    Builtin(Builtin),
    Binary(BinOp, Box<ColoringExpr>, Box<ColoringExpr>),
    Paren(Box<ColoringExpr>),
}

impl ColoringExpr {
    pub fn parse(text: &str) -> Result<Self> {
        let mut parser = Parser { src: text, pos: 0 };
        let expr = parser.expr()?;
        parser.skip_ws();
        if parser.pos < text.len() {
            return Err(parser.syntax("unexpected trailing input"));
        }
        Ok(expr)
    }

    pub fn eval(&self, f: &FinFn) -> Result<u64> {
        match self {
            ColoringExpr::Int(n) => Ok(*n),
            ColoringExpr::Builtin(b) => b.eval(f),
            ColoringExpr::Paren(inner) => inner.eval(f),
            ColoringExpr::Binary(op, l, r) => {
                let (a, b) = (l.eval(f)?, r.eval(f)?);
                match op {
                    BinOp::Add => a.checked_add(b).ok_or(Error::Overflow),
                    BinOp::Sub => Ok(a.saturating_sub(b)),
                    BinOp::Mul => a.checked_mul(b).ok_or(Error::Overflow),
                    BinOp::Mod => a.checked_rem(b).ok_or(Error::ModuloByZero),
                }
            }
        }
    }

    /// `eval(f) mod r`.
    pub fn color(&self, f: &FinFn, r: u32) -> Result<u32> {
        if r == 0 {
            return Err(Error::Invalid("number of colors must be positive".into()));
        }
        Ok((self.eval(f)? % u64::from(r)) as u32)
    }

    /// Wraps every operand that would otherwise re-associate when printed, so
    /// that `parse(print(e)) == e`. Parser output is already in this form.
    pub fn with_required_parens(self) -> Self {
        match self {
            ColoringExpr::Binary(op, l, r) => {
                let l = l.with_required_parens();
                let r = r.with_required_parens();
                let wrap = |e: ColoringExpr, strict: bool| match &e {
                    ColoringExpr::Binary(inner, ..)
                        if inner.precedence() < op.precedence()
                            || (strict && inner.precedence() == op.precedence()) =>
                    {
                        ColoringExpr::Paren(Box::new(e))
                    }
                    _ => e,
                };
                ColoringExpr::Binary(op, Box::new(wrap(l, false)), Box::new(wrap(r, true)))
            }
            ColoringExpr::Paren(inner) => ColoringExpr::Paren(Box::new(inner.with_required_parens())),
            leaf => leaf,
        }
    }
}

impl fmt::Display for ColoringExpr {
    /// Canonical form: single spaces around binary operators, no spaces inside parentheses.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ColoringExpr::Int(n) => write!(f, "{n}"),
            ColoringExpr::Builtin(Builtin::CountVal(v)) => write!(f, "countVal({v})"),
            ColoringExpr::Builtin(b) => f.write_str(b.name()),
            ColoringExpr::Paren(inner) => write!(f, "({inner})"),
            ColoringExpr::Binary(op, l, r) => write!(f, "{l} {} {r}", op.symbol()),
        }
    }
}

impl ColoringExpr {
    /// Tree form, e.g. `binary(%, builtin(weight), 3)`.
    pub fn tree(&self) -> String {
        match self {
            ColoringExpr::Int(n) => n.to_string(),
            ColoringExpr::Builtin(Builtin::CountVal(v)) => format!("builtin(countVal, {v})"),
            ColoringExpr::Builtin(b) => format!("builtin({})", b.name()),
            ColoringExpr::Paren(inner) => format!("paren({})", inner.tree()),
            ColoringExpr::Binary(op, l, r) => format!("binary({}, {}, {})", op.symbol(), l.tree(), r.tree()),
        }
    }
}

impl FromStr for ColoringExpr {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl Parser<'_> {
    fn syntax(&self, message: &str) -> Error {
        Error::Syntax { offset: self.pos, message: message.to_string() }
    }

    fn skip_ws(&mut self) {
        let rest = &self.src[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.src[self.pos..].chars().next()
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.syntax(&format!("expected '{c}'")))
        }
    }

    fn expr(&mut self) -> Result<ColoringExpr> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some('+') => BinOp::Add,
                Some('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = ColoringExpr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<ColoringExpr> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek() {
                Some('*') => BinOp::Mul,
                Some('%') => BinOp::Mod,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.factor()?;
            lhs = ColoringExpr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn integer(&mut self) -> Result<u64> {
        self.skip_ws();
        let start = self.pos;
        let digits = self.src[start..].chars().take_while(char::is_ascii_digit).count();
        if digits == 0 {
            return Err(self.syntax("expected an integer"));
        }
        self.pos += digits;
        self.src[start..self.pos].parse().map_err(|_| Error::Syntax {
            offset: start,
            message: "integer literal too large".into(),
        })
    }

    fn factor(&mut self) -> Result<ColoringExpr> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let inner = self.expr()?;
                self.expect(')')?;
                Ok(ColoringExpr::Paren(Box::new(inner)))
            }
            Some(c) if c.is_ascii_digit() => Ok(ColoringExpr::Int(self.integer()?)),
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                let len = self.src[start..]
                    .chars()
                    .take_while(|c| c.is_ascii_alphanumeric() || *c == '_')
                    .count();
                let name = &self.src[start..start + len];
                let builtin = match name {
                    "weight" => Builtin::Weight,
                    "suppSize" => Builtin::SuppSize,
                    "minSupp" => Builtin::MinSupp,
                    "maxSupp" => Builtin::MaxSupp,
                    "valAtMin" => Builtin::ValAtMin,
                    "valAtMax" => Builtin::ValAtMax,
                    "countVal" => {
                        self.pos += len;
                        self.expect('(')?;
                        let v = self.integer()?;
                        self.expect(')')?;
                        return Ok(ColoringExpr::Builtin(Builtin::CountVal(v)));
                    }
                    _ => {
                        return Err(Error::UnknownIdentifier { offset: start, name: name.to_string() })
                    }
                };
                self.pos += len;
                Ok(ColoringExpr::Builtin(builtin))
            }
            Some(_) => Err(self.syntax("unexpected character")),
            None => Err(self.syntax("unexpected end of input")),
        }
    }
}
