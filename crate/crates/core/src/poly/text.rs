//! Text format: a sum of terms `c * x1^a1 * ... * xN^aN * t^k`.
//!
//! Coefficients are rationals written `p/q` (decimals are accepted and read
//! exactly). Whitespace is ignored. For `N = 1` the printer writes `x`; the
//! parser accepts `x` as a synonym of `x1` in any dimension.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::{MultiIndex, Polynomial};
use crate::error::{Error, Result};

struct Parser<'a> {
    chars: Vec<(usize, char)>,
    pos: usize,
    src: &'a str,
}

#[derive(Debug)]
struct RawTerm {
    coeff: BigRational,
    // (variable slot, exponent); slot usize::MAX marks `t`.
    factors: Vec<(usize, u32)>,
}

const TIME_SLOT: usize = usize::MAX;

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Parser {
            chars: src.char_indices().filter(|(_, c)| !c.is_whitespace()).collect(),
            pos: 0,
            src,
        }
    }

    fn offset(&self) -> usize {
        self.chars.get(self.pos).map_or(self.src.len(), |&(i, _)| i)
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).map(|&(_, c)| c)
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Parse { position: self.offset(), message: message.into() })
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn digits(&mut self) -> Option<String> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        (self.pos > start).then(|| self.chars[start..self.pos].iter().map(|&(_, c)| c).collect())
    }

    fn number(&mut self) -> Result<BigRational> {
        let Some(int_part) = self.digits() else {
            return self.err("expected a number");
        };
        let mut value = BigRational::from_integer(int_part.parse::<BigInt>().unwrap());
        if self.eat('.') {
            let frac = self.digits().unwrap_or_default();
            if !frac.is_empty() {
                let num: BigInt = frac.parse().unwrap();
                let den = num_traits::pow(BigInt::from(10), frac.len());
                value += BigRational::new(num, den);
            }
        }
        if self.eat('/') {
            let Some(den) = self.digits() else {
                return self.err("expected a denominator after '/'");
            };
            let den: BigInt = den.parse().unwrap();
            if den.is_zero() {
                return self.err("zero denominator");
            }
            value /= BigRational::from_integer(den);
        }
        Ok(value)
    }

    fn exponent(&mut self) -> Result<u32> {
        if !self.eat('^') {
            return Ok(1);
        }
        match self.digits() {
            Some(d) => d.parse::<u32>().or_else(|_| self.err("exponent too large")),
            None => self.err("expected an exponent after '^'"),
        }
    }

    fn factor(&mut self, term: &mut RawTerm) -> Result<()> {
        match self.peek() {
            Some(c) if c.is_ascii_digit() => {
                let v = self.number()?;
                term.coeff *= v;
                Ok(())
            }
            Some('t') => {
                self.pos += 1;
                let e = self.exponent()?;
                term.factors.push((TIME_SLOT, e));
                Ok(())
            }
            Some('x') => {
                self.pos += 1;
                let slot = match self.digits() {
                    None => 0,
                    Some(d) => match d.parse::<usize>() {
                        Ok(k) if k >= 1 => k - 1,
                        _ => return self.err("spatial variables are numbered from x1"),
                    },
                };
                let e = self.exponent()?;
                term.factors.push((slot, e));
                Ok(())
            }
            Some(c) => self.err(format!("unexpected character '{c}'")),
            None => self.err("unexpected end of input"),
        }
    }

    fn term(&mut self, sign: bool) -> Result<RawTerm> {
        let mut term = RawTerm {
            coeff: if sign { -BigRational::one() } else { BigRational::one() },
            factors: Vec::new(),
        };
        self.factor(&mut term)?;
        while self.eat('*') {
            self.factor(&mut term)?;
        }
        Ok(term)
    }

    fn terms(&mut self) -> Result<Vec<RawTerm>> {
        if self.chars.is_empty() {
            return self.err("empty polynomial");
        }
        let mut out = Vec::new();
        let mut negative = if self.eat('-') {
            true
        } else {
            self.eat('+');
            false
        };
        loop {
            out.push(self.term(negative)?);
            match self.peek() {
                None => break,
                Some('+') => {
                    self.pos += 1;
                    negative = false;
                }
                Some('-') => {
                    self.pos += 1;
                    negative = true;
                }
                Some(c) => return self.err(format!("expected '+', '-' or '*', found '{c}'")),
            }
        }
        Ok(out)
    }
}

fn assemble(terms: Vec<RawTerm>, dim: usize) -> Result<Polynomial> {
    let mut p = Polynomial::zero(dim);
    for term in terms {
        let mut e = vec![0u32; dim + 1];
        for (slot, k) in term.factors {
            let idx = if slot == TIME_SLOT { dim } else { slot };
            if idx > dim || (slot != TIME_SLOT && slot >= dim) {
                return Err(Error::DimensionMismatch { expected: dim, got: slot + 1 });
            }
            e[idx] += k;
        }
        p.add_term(MultiIndex(e), term.coeff);
    }
    Ok(p)
}

/// Parses a polynomial in spatial dimension `dim`.
pub fn parse_polynomial(s: &str, dim: usize) -> Result<Polynomial> {
    if dim == 0 {
        return Err(Error::InvalidArgument("spatial dimension must be at least 1".into()));
    }
    let terms = Parser::new(s).terms()?;
    assemble(terms, dim)
}

/// Parses with `N` inferred as the largest spatial index used (at least 1).
pub(crate) fn parse_polynomial_infer(s: &str) -> Result<Polynomial> {
    let terms = Parser::new(s).terms()?;
    let dim = terms
        .iter()
        .flat_map(|t| t.factors.iter())
        .filter(|(slot, _)| *slot != TIME_SLOT)
        .map(|(slot, _)| slot + 1)
        .max()
        .unwrap_or(1);
    assemble(terms, dim)
}

fn format_rational(v: &BigRational) -> String {
    if v.denom().is_one() {
        v.numer().to_string()
    } else {
        format!("{}/{}", v.numer(), v.denom())
    }
}

pub(crate) fn format_polynomial(p: &Polynomial) -> String {
    if p.is_zero() {
        return "0".to_string();
    }
    let dim = p.dim();
    let mut terms: Vec<_> = p.terms().collect();
    terms.sort_by(|a, b| b.0.graded_cmp(a.0));
    let mut out = String::new();
    for (i, (alpha, c)) in terms.into_iter().enumerate() {
        let negative = c.is_negative();
        match (i, negative) {
            (0, true) => out.push('-'),
            (0, false) => {}
            (_, true) => out.push_str(" - "),
            (_, false) => out.push_str(" + "),
        }
        let mag = c.abs();
        let mut factors = Vec::new();
        for (slot, &k) in alpha.exponents().iter().enumerate() {
            if k == 0 {
                continue;
            }
            let name = if slot == dim {
                "t".to_string()
            } else if dim == 1 {
                "x".to_string()
            } else {
                format!("x{}", slot + 1)
            };
            factors.push(if k == 1 { name } else { format!("{name}^{k}") });
        }
        if factors.is_empty() {
            out.push_str(&format_rational(&mag));
        } else {
            if !mag.is_one() {
                out.push_str(&format_rational(&mag));
                out.push('*');
            }
            out.push_str(&factors.join("*"));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_and_prints() {
        let p = parse_polynomial("1/3 * x^2 + 2/3*t", 1).unwrap();
        assert_eq!(p.to_string(), "1/3*x^2 + 2/3*t");
        let p = parse_polynomial(" - x1*x2^2 * t + 0.5 - 3/6 ", 2).unwrap();
        assert_eq!(p.to_string(), "-x1*x2^2*t");
        assert_eq!(parse_polynomial("5", 3).unwrap().to_string(), "5");
        assert_eq!(parse_polynomial("x - x", 1).unwrap().to_string(), "0");
        assert_eq!(parse_polynomial("2*x*x*3", 1).unwrap().to_string(), "6*x^2");
    }

    #[test]
    fn reports_error_positions() {
        match parse_polynomial("x^2 + * t", 1) {
            Err(Error::Parse { position, .. }) => assert_eq!(position, 6),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse_polynomial("1/0", 1), Err(Error::Parse { .. })));
        assert!(matches!(parse_polynomial("y", 1), Err(Error::Parse { position: 0, .. })));
        assert!(matches!(parse_polynomial("x3", 2), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(parse_polynomial("", 1), Err(Error::Parse { .. })));
    }

    #[test]
    fn infers_dimension() {
        let p: Polynomial = "x3*t + x1".parse().unwrap();
        assert_eq!(p.dim(), 3);
        let p: Polynomial = "t".parse().unwrap();
        assert_eq!(p.dim(), 1);
    }

    fn arb_poly(dim: usize) -> impl Strategy<Value = Polynomial> {
        prop::collection::vec(
            (-50i64..50, 1i64..20, prop::collection::vec(0u32..4, dim + 1)),
            0..8,
        )
        .prop_map(move |terms| {
            Polynomial::from_terms(
                dim,
                terms
                    .into_iter()
                    .map(|(n, d, e)| (BigRational::new(n.into(), d.into()), e)),
            )
            .unwrap()
        })
    }

    proptest! {
        #[test]
        fn print_parse_round_trip(p in (1usize..4).prop_flat_map(arb_poly)) {
            let text = p.to_string();
            let back = parse_polynomial(&text, p.dim()).unwrap();
            prop_assert_eq!(back, p);
        }
    }
}
