//! Text form of rational functions.
//!
//! ```text
//! rf     := sum [ "/" "(" factor { "*" factor } ")" ]
//! factor := "(" sum ")" "^" uint
//! sum    := [sign] term { sign term }
//! term   := atom { "*" atom }
//! atom   := uint [ "/" uint ] | name [ "^" uint ] | "(" sum ")"
//! ```
//!
//! Whitespace is ignored. Printing emits exactly this grammar, so
//! `parse(print(f))` is structurally equal to `f`.

use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::poly::{Polynomial, Q};
use super::rational::RationalFunction;
use super::registry::VariableRegistry;
use super::FieldError;

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    reg: &'a VariableRegistry,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, msg: &str) -> Result<T, FieldError> {
        Err(FieldError::Parse { pos: self.pos, msg: msg.to_string() })
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

    fn peek_after(&mut self) -> Option<u8> {
        let mut p = self.pos + 1;
        while p < self.src.len() && self.src[p].is_ascii_whitespace() {
            p += 1;
        }
        self.src.get(p).copied()
    }

    fn expect(&mut self, c: u8) -> Result<(), FieldError> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(&format!("expected '{}'", c as char))
        }
    }

    fn uint(&mut self) -> Result<BigInt, FieldError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected digits");
        }
        let s = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        Ok(s.parse().expect("digits parse"))
    }

    fn small_uint(&mut self) -> Result<u32, FieldError> {
        let v = self.uint()?;
        u32::try_from(v).or_else(|_| self.err("exponent too large"))
    }

    fn atom(&mut self) -> Result<Polynomial, FieldError> {
        let nv = self.reg.len();
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let p = self.sum()?;
                self.expect(b')')?;
                Ok(p)
            }
            Some(c) if c.is_ascii_digit() => {
                let n = self.uint()?;
                let mut v = Q::from_integer(n);
                if self.peek() == Some(b'/') && self.peek_after().is_some_and(|c| c.is_ascii_digit()) {
                    self.pos += 1;
                    let d = self.uint()?;
                    if d.is_zero() {
                        return self.err("zero denominator");
                    }
                    v /= Q::from_integer(d);
                }
                Ok(Polynomial::constant(nv, v))
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii name");
                let idx = self.reg.index_of(name).ok_or_else(|| FieldError::UnknownVariable(name.to_string()))?;
                let mut p = Polynomial::var(nv, idx);
                if self.peek() == Some(b'^') {
                    self.pos += 1;
                    p = p.pow(self.small_uint()?);
                }
                Ok(p)
            }
            _ => self.err("expected number, variable or '('"),
        }
    }

    fn term(&mut self) -> Result<Polynomial, FieldError> {
        let mut p = self.atom()?;
        while self.peek() == Some(b'*') {
            self.pos += 1;
            p = p.mul(&self.atom()?);
        }
        Ok(p)
    }

    fn sum(&mut self) -> Result<Polynomial, FieldError> {
        let mut neg = false;
        match self.peek() {
            Some(b'-') => {
                neg = true;
                self.pos += 1;
            }
            Some(b'+') => self.pos += 1,
            _ => {}
        }
        let t = self.term()?;
        let mut p = if neg { t.neg() } else { t };
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    p = p.add(&self.term()?);
                }
                Some(b'-') => {
                    self.pos += 1;
                    p = p.sub(&self.term()?);
                }
                _ => return Ok(p),
            }
        }
    }
}

pub fn parse_polynomial(reg: &VariableRegistry, text: &str) -> Result<Polynomial, FieldError> {
    let mut p = Parser { src: text.as_bytes(), pos: 0, reg };
    let out = p.sum()?;
    if p.peek().is_some() {
        return p.err("trailing input");
    }
    Ok(out)
}

pub fn parse_rational(reg: &Arc<VariableRegistry>, text: &str) -> Result<RationalFunction, FieldError> {
    let mut p = Parser { src: text.as_bytes(), pos: 0, reg };
    let top = p.sum()?;
    let mut out = RationalFunction::from_polynomial(reg, &top);
    if p.peek() == Some(b'/') {
        p.pos += 1;
        p.expect(b'(')?;
        loop {
            p.expect(b'(')?;
            let f = p.sum()?;
            p.expect(b')')?;
            p.expect(b'^')?;
            let e = p.small_uint()?;
            if f.is_zero() {
                return Err(FieldError::DivisionByZero);
            }
            let d = RationalFunction::from_polynomial(reg, &f);
            for _ in 0..e {
                out = out.div(&d)?;
            }
            match p.peek() {
                Some(b'*') => p.pos += 1,
                Some(b')') => {
                    p.pos += 1;
                    break;
                }
                _ => return p.err("expected '*' or ')'"),
            }
        }
    }
    if p.peek().is_some() {
        return p.err("trailing input");
    }
    debug_assert!(out.is_zero() || !out.coefficient().is_zero() || out.coefficient().is_one());
    Ok(out)
}
