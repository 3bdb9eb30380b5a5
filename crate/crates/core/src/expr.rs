//! A small expression language for boundary data and level sets.
//!
//! Grammar: `+ - * / ^` (right-associative `^`, binding tighter than unary
//! minus), parentheses, numbers, `pi`, the variables `t`, `x` (same as `x1`)
//! and `x1 .. xN`, and the functions `exp cosh sinh abs sqrt`.

use std::fmt;

use crate::calorics::SpaceTimePoint;
use crate::error::{Error, Result};
use crate::field::Field;

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Num(f64),
    X(usize),
    T,
    Neg(Box<Node>),
    Bin(Op, Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Op {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Func {
    Exp,
    Cosh,
    Sinh,
    Abs,
    Sqrt,
}

impl Func {
    fn from_name(s: &str) -> Option<Self> {
        Some(match s {
            "exp" => Func::Exp,
            "cosh" => Func::Cosh,
            "sinh" => Func::Sinh,
            "abs" => Func::Abs,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }

    fn apply(self, v: f64) -> f64 {
        match self {
            Func::Exp => v.exp(),
            Func::Cosh => v.cosh(),
            Func::Sinh => v.sinh(),
            Func::Abs => v.abs(),
            Func::Sqrt => v.sqrt(),
        }
    }
}

/// A parsed expression in `x_1, ..., x_N, t`.
#[derive(Debug, Clone, PartialEq)]
pub struct Expression {
    source: String,
    dim: usize,
    root: Node,
}

impl Expression {
    pub fn parse(source: &str, dim: usize) -> Result<Self> {
        let mut p = Parser { src: source.as_bytes(), pos: 0, dim };
        let root = p.expr()?;
        p.skip_ws();
        if p.pos < p.src.len() {
            return Err(p.error("unexpected trailing input"));
        }
        Ok(Expression { source: source.to_string(), dim, root })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn eval_split(&self, x: &[f64], t: f64) -> f64 {
        eval(&self.root, x, t)
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

impl Field for Expression {
    fn eval(&self, z: &SpaceTimePoint) -> Result<f64> {
        if z.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: z.dim() });
        }
        Ok(self.eval_split(&z.x, z.t))
    }
}

fn eval(n: &Node, x: &[f64], t: f64) -> f64 {
    match n {
        Node::Num(v) => *v,
        Node::X(i) => x[*i],
        Node::T => t,
        Node::Neg(a) => -eval(a, x, t),
        Node::Call(f, a) => f.apply(eval(a, x, t)),
        Node::Bin(op, a, b) => {
            let (a, b) = (eval(a, x, t), eval(b, x, t));
            match op {
                Op::Add => a + b,
                Op::Sub => a - b,
                Op::Mul => a * b,
                Op::Div => a / b,
                Op::Pow => {
                    if b.fract() == 0.0 && b.abs() <= i32::MAX as f64 {
                        a.powi(b as i32)
                    } else {
                        a.powf(b)
                    }
                }
            }
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    dim: usize,
}

impl Parser<'_> {
    fn error(&self, message: impl Into<String>) -> Error {
        Error::Parse { position: self.pos, message: message.into() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        while let Some(c @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let rhs = self.term()?;
            let op = if c == b'+' { Op::Add } else { Op::Sub };
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        while let Some(c @ (b'*' | b'/')) = self.peek() {
            self.pos += 1;
            let rhs = self.unary()?;
            let op = if c == b'*' { Op::Mul } else { Op::Div };
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Node> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(Node::Neg(Box::new(self.unary()?)))
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Node> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let exp = self.unary()?;
            return Ok(Node::Bin(Op::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node> {
        match self.peek() {
            None => Err(self.error("unexpected end of input")),
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.error("expected ')'"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.name(),
            Some(c) => Err(self.error(format!("unexpected character '{}'", c as char))),
        }
    }

    fn number(&mut self) -> Result<Node> {
        let start = self.pos;
        while self.pos < self.src.len() && (self.src[self.pos].is_ascii_digit() || self.src[self.pos] == b'.') {
            self.pos += 1;
        }
        if self.pos < self.src.len() && matches!(self.src[self.pos], b'e' | b'E') {
            let mark = self.pos;
            self.pos += 1;
            if self.pos < self.src.len() && matches!(self.src[self.pos], b'+' | b'-') {
                self.pos += 1;
            }
            if self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
            } else {
                self.pos = mark;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        text.parse::<f64>().map(Node::Num).map_err(|_| Error::Parse {
            position: start,
            message: format!("malformed number '{text}'"),
        })
    }

    fn name(&mut self) -> Result<Node> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphanumeric() {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        if let Some(f) = Func::from_name(name) {
            if self.peek() != Some(b'(') {
                return Err(self.error(format!("expected '(' after {name}")));
            }
            self.pos += 1;
            let arg = self.expr()?;
            if self.peek() != Some(b')') {
                return Err(self.error("expected ')'"));
            }
            self.pos += 1;
            return Ok(Node::Call(f, Box::new(arg)));
        }
        match name {
            "t" => Ok(Node::T),
            "pi" => Ok(Node::Num(std::f64::consts::PI)),
            "x" => {
                if self.dim == 0 {
                    return Err(Error::Parse { position: start, message: "no spatial variables".into() });
                }
                Ok(Node::X(0))
            }
            _ => {
                if let Some(i) = name.strip_prefix('x').and_then(|d| d.parse::<usize>().ok()) {
                    if i >= 1 && i <= self.dim {
                        return Ok(Node::X(i - 1));
                    }
                    return Err(Error::Parse {
                        position: start,
                        message: format!("variable {name} out of range for dimension {}", self.dim),
                    });
                }
                Err(Error::Parse { position: start, message: format!("unknown name '{name}'") })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(s: &str, x: &[f64], t: f64) -> f64 {
        Expression::parse(s, x.len()).unwrap().eval_split(x, t)
    }

    #[test]
    fn arithmetic_and_precedence() {
        assert_eq!(ev("x^2+2*t", &[3.0], 0.5), 10.0);
        assert_eq!(ev("-x^2", &[3.0], 0.0), -9.0);
        assert_eq!(ev("2^3^2", &[0.0], 0.0), 512.0);
        assert_eq!(ev("2^-1", &[0.0], 0.0), 0.5);
        assert_eq!(ev("(1 - x) / 4", &[3.0], 0.0), -0.5);
        assert_eq!(ev("1.5e1 + .5", &[0.0], 0.0), 15.5);
        assert_eq!(ev("x1*x2 - x", &[2.0, 5.0], 0.0), 8.0);
        let v = ev("exp(t)*cosh(x)", &[0.3], 0.2);
        assert!((v - 0.2f64.exp() * 0.3f64.cosh()).abs() < 1e-15);
        assert_eq!(ev("abs(x) + sqrt(4) + sinh(0)", &[-2.0], 0.0), 4.0);
        assert!((ev("pi", &[0.0], 0.0) - std::f64::consts::PI).abs() < 1e-16);
    }

    #[test]
    fn errors_carry_positions() {
        match Expression::parse("x + * t", 1) {
            Err(Error::Parse { position, .. }) => assert_eq!(position, 4),
            other => panic!("{other:?}"),
        }
        assert!(matches!(Expression::parse("x3", 2), Err(Error::Parse { position: 0, .. })));
        assert!(matches!(Expression::parse("exp x", 1), Err(Error::Parse { .. })));
        assert!(matches!(Expression::parse("(x", 1), Err(Error::Parse { .. })));
        assert!(matches!(Expression::parse("x)", 1), Err(Error::Parse { position: 1, .. })));
        assert!(matches!(Expression::parse("foo(x)", 1), Err(Error::Parse { .. })));
        let e = Expression::parse("x", 1).unwrap();
        assert!(matches!(e.eval(&SpaceTimePoint::new(vec![0.0, 1.0], 0.0)), Err(Error::DimensionMismatch { .. })));
    }
}
