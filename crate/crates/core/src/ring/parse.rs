//! Text grammar for polynomials.
//!
//! ```text
//! poly   := sign? term (sign term)*
//! term   := factor ('*' factor)*
//! factor := integer ('/' integer)? | 'i' | name ('^' integer)?
//! ```
//!
//! Whitespace is insignificant. `i` is the imaginary unit and is only
//! accepted over the Gaussian field.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use super::poly::{Monomial, Poly};
use super::scalar::{Field, Scalar};
use crate::error::{Error, Result};

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    vars: &'a [String],
    field: Field,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Syntax { pos: self.pos, msg: msg.into() })
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

    fn integer(&mut self) -> Result<BigInt> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected integer");
        }
        let s = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        Ok(s.parse().unwrap())
    }

    fn ident(&mut self) -> &'a str {
        let start = self.pos;
        while self.pos < self.src.len() && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_') {
            self.pos += 1;
        }
        std::str::from_utf8(&self.src[start..self.pos]).unwrap()
    }

    fn factor(&mut self, coeff: &mut Scalar, exps: &mut [u32]) -> Result<()> {
        match self.peek() {
            Some(c) if c.is_ascii_digit() => {
                let num = self.integer()?;
                let mut r = BigRational::from_integer(num);
                if self.peek() == Some(b'/') {
                    self.pos += 1;
                    let den = self.integer()?;
                    if den.is_zero() {
                        return self.err("zero denominator");
                    }
                    r /= BigRational::from_integer(den);
                }
                *coeff = &*coeff * &Scalar::from(r);
                Ok(())
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                let name = self.ident();
                if name == "i" {
                    if self.field != Field::Gaussian {
                        return Err(Error::FieldMismatch(format!(
                            "imaginary unit at position {start} over the rational field"
                        )));
                    }
                    *coeff = &*coeff * &Scalar::i();
                    return Ok(());
                }
                let Some(idx) = self.vars.iter().position(|v| v == name) else {
                    return Err(Error::UnknownVariable(name.to_string()));
                };
                let mut e = 1u32;
                if self.peek() == Some(b'^') {
                    self.pos += 1;
                    let n = self.integer()?;
                    e = match u32::try_from(n) {
                        Ok(e) => e,
                        Err(_) => return self.err("exponent too large"),
                    };
                }
                exps[idx] += e;
                Ok(())
            }
            Some(_) => self.err("expected number, `i` or variable"),
            None => self.err("unexpected end of input"),
        }
    }

    fn term(&mut self, negative: bool) -> Result<Poly> {
        let mut coeff = if negative { Scalar::from_int(-1) } else { Scalar::one() };
        let mut exps = vec![0u32; self.vars.len()];
        self.factor(&mut coeff, &mut exps)?;
        while self.peek() == Some(b'*') {
            self.pos += 1;
            self.factor(&mut coeff, &mut exps)?;
        }
        Ok(Poly::term(Monomial::new(exps), coeff))
    }

    fn poly(&mut self) -> Result<Poly> {
        let mut acc = Poly::zero(self.vars.len());
        let mut negative = match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                true
            }
            Some(b'+') => {
                self.pos += 1;
                false
            }
            _ => false,
        };
        loop {
            acc = acc + self.term(negative)?;
            match self.peek() {
                Some(b'+') => negative = false,
                Some(b'-') => negative = true,
                None => return Ok(acc),
                Some(_) => return self.err("expected `+`, `-` or end of input"),
            }
            self.pos += 1;
        }
    }
}

/// Parses `text` as a polynomial in `vars` over `field`.
pub fn parse_poly(text: &str, vars: &[String], field: Field) -> Result<Poly> {
    let mut p = Parser { src: text.as_bytes(), pos: 0, vars, field };
    p.poly()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(n: usize) -> Vec<String> {
        (1..=n).map(|i| format!("x{i}")).collect()
    }

    #[test]
    fn zero_parses_to_zero() {
        assert!(parse_poly("0", &names(2), Field::Rational).unwrap().is_zero());
        assert!(parse_poly(" x1 - x1 ", &names(2), Field::Rational).unwrap().is_zero());
    }

    #[test]
    fn two_term_example_reprints_canonically() {
        let v = names(2);
        let p = parse_poly("3/2*x1^2*x2 - x2", &v, Field::Rational).unwrap();
        assert_eq!(p.len(), 2);
        assert_eq!(p.to_text(&v), "3/2*x1^2*x2 - 1*x2");
        // canonical text is a fixed point
        let q = parse_poly(&p.to_text(&v), &v, Field::Rational).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn imaginary_unit_requires_gaussian_field() {
        let v = names(1);
        let err = parse_poly("i*x1", &v, Field::Rational).unwrap_err();
        assert!(matches!(err, Error::FieldMismatch(_)));
        let p = parse_poly("i*x1", &v, Field::Gaussian).unwrap();
        assert_eq!(p.to_text(&v), "1*i*x1");
    }

    #[test]
    fn errors_carry_positions() {
        let v = names(2);
        match parse_poly("x1 + * x2", &v, Field::Rational) {
            Err(Error::Syntax { pos, .. }) => assert_eq!(pos, 5),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            parse_poly("x3", &v, Field::Rational),
            Err(Error::UnknownVariable(n)) if n == "x3"
        ));
        assert!(parse_poly("1/0", &v, Field::Rational).is_err());
        assert!(parse_poly("x1 x2", &v, Field::Rational).is_err());
    }

    #[test]
    fn repeated_factors_multiply() {
        let v = names(2);
        let p = parse_poly("2*x1*x1^2*1/3*x2", &v, Field::Rational).unwrap();
        assert_eq!(p.to_text(&v), "2/3*x1^3*x2");
    }
}
