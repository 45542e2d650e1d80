//! Canonical text forms.
//!
//! Expressions print as `-1/2*E[r2^2] + 1/6*E[r1^4]` (terms in descending
//! monomial order, factors by ascending index). Polynomials inside
//! certificates print the same way without the `E[...]` wrapper. The
//! parser accepts both.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::{self, Write};
use core::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::{Monomial, MomentExpr};
use crate::error::{Error, Result};
use crate::rational::Rational;

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_one() {
            return f.write_str("1");
        }
        let mut first = true;
        for (i, a) in self.factors() {
            if !first {
                f.write_char('*')?;
            }
            first = false;
            write!(f, "r{i}")?;
            if a > 1 {
                write!(f, "^{a}")?;
            }
        }
        Ok(())
    }
}

fn write_rational(out: &mut String, q: &Rational) {
    if q.is_integer() {
        let _ = write!(out, "{}", q.numer());
    } else {
        let _ = write!(out, "{}/{}", q.numer(), q.denom());
    }
}

fn render(e: &MomentExpr, wrap: bool) -> String {
    if e.is_zero() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (k, (m, c)) in e.terms().rev().enumerate() {
        let neg = c.is_negative();
        match (k, neg) {
            (0, true) => out.push('-'),
            (0, false) => {}
            (_, true) => out.push_str(" - "),
            (_, false) => out.push_str(" + "),
        }
        let mag = c.abs();
        let body = if wrap { format!("E[{m}]") } else { m.to_string() };
        if !wrap && m.is_one() {
            write_rational(&mut out, &mag);
            continue;
        }
        if !mag.is_one() {
            write_rational(&mut out, &mag);
            out.push('*');
        }
        out.push_str(&body);
    }
    out
}

impl fmt::Display for MomentExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render(self, true))
    }
}

impl MomentExpr {
    /// Render as a bare polynomial in the ratios, e.g. `r2 - r1^2`.
    pub fn to_polynomial_string(&self) -> String {
        render(self, false)
    }

    /// Render the functional in f-notation: `∫ (-1/2 f2^2/f + 1/6 f1^4/f^3) dy`.
    pub fn to_paper_notation(&self) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        format!("∫ ({}) dy", paper_sum(self, true))
    }

    /// Render as a ratio polynomial in f-notation: `f2/f - f1^2/f^2`.
    pub fn to_paper_ratio_notation(&self) -> String {
        paper_sum(self, false)
    }
}

/// `∏ f_i^{a_i} / f^{deg − shift}`; `integrand` multiplies by one power of `f`.
pub fn paper_monomial(m: &Monomial, integrand: bool) -> String {
    let mut num = String::new();
    for (i, a) in m.factors() {
        if !num.is_empty() {
            num.push(' ');
        }
        let _ = write!(num, "f{i}");
        if a > 1 {
            let _ = write!(num, "^{a}");
        }
    }
    let den = m.degree() as i64 - if integrand { 1 } else { 0 };
    if num.is_empty() {
        return if integrand { "f".to_string() } else { "1".to_string() };
    }
    match den {
        0 => num,
        1 => format!("{num}/f"),
        d => format!("{num}/f^{d}"),
    }
}

fn paper_sum(e: &MomentExpr, integrand: bool) -> String {
    if e.is_zero() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (k, (m, c)) in e.terms().rev().enumerate() {
        let neg = c.is_negative();
        match (k, neg) {
            (0, true) => out.push('-'),
            (0, false) => {}
            (_, true) => out.push_str(" - "),
            (_, false) => out.push_str(" + "),
        }
        let mag = c.abs();
        if !mag.is_one() {
            write_rational(&mut out, &mag);
            out.push(' ');
        }
        out.push_str(&paper_monomial(m, integrand));
    }
    out
}

struct Cursor<'a> {
    s: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(s: &'a str) -> Self {
        Self { s: s.as_bytes(), pos: 0 }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(&format!("expected '{}'", c as char)))
        }
    }

    fn err(&self, msg: &str) -> Error {
        Error::Parse(format!("{msg} at offset {}", self.pos))
    }

    fn integer(&mut self) -> Result<BigInt> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected an integer"));
        }
        let digits = core::str::from_utf8(&self.s[start..self.pos]).map_err(|_| self.err("bad utf-8"))?;
        BigInt::from_str(digits).map_err(|_| self.err("bad integer"))
    }

    fn small(&mut self) -> Result<u32> {
        let n = self.integer()?;
        u32::try_from(n).map_err(|_| self.err("index or exponent too large"))
    }

    fn rational(&mut self) -> Result<Rational> {
        let num = self.integer()?;
        if self.eat(b'/') {
            let den = self.integer()?;
            if den.is_zero() {
                return Err(self.err("zero denominator"));
            }
            Ok(Rational::new(num, den))
        } else {
            Ok(Rational::from_integer(num))
        }
    }

    fn monomial(&mut self) -> Result<Monomial> {
        if self.peek() == Some(b'1') {
            self.pos += 1;
            return Ok(Monomial::one());
        }
        let mut factors = Vec::new();
        loop {
            self.expect(b'r')?;
            let i = self.small()? as usize;
            if i == 0 {
                return Err(self.err("ratio index starts at 1"));
            }
            let a = if self.eat(b'^') { self.small()? } else { 1 };
            factors.push((i, a));
            if !self.eat(b'*') {
                break;
            }
        }
        Ok(Monomial::from_factors(&factors))
    }

    fn atom(&mut self) -> Result<Monomial> {
        if self.eat(b'E') {
            self.expect(b'[')?;
            let m = self.monomial()?;
            self.expect(b']')?;
            Ok(m)
        } else {
            self.monomial()
        }
    }

    fn term(&mut self) -> Result<(Rational, Monomial)> {
        match self.peek() {
            Some(c) if c.is_ascii_digit() => {
                // Either a coefficient or the constant monomial `1`.
                let q = self.rational()?;
                if self.eat(b'*') {
                    Ok((q, self.atom()?))
                } else {
                    Ok((q, Monomial::one()))
                }
            }
            Some(b'E') | Some(b'r') => Ok((Rational::one(), self.atom()?)),
            _ => Err(self.err("expected a term")),
        }
    }
}

/// Parse the canonical text form (with or without `E[...]` wrappers).
pub fn parse_expr(s: &str) -> Result<MomentExpr> {
    let mut cur = Cursor::new(s);
    let mut out = MomentExpr::zero();
    if cur.peek() == Some(b'0') {
        cur.pos += 1;
        if cur.peek().is_none() {
            return Ok(out);
        }
        cur.pos -= 1;
    }
    let mut sign = if cur.eat(b'-') { -Rational::one() } else { Rational::one() };
    loop {
        let (c, m) = cur.term()?;
        out.add_term(m, c * &sign);
        match cur.peek() {
            None => break,
            Some(b'+') => {
                cur.pos += 1;
                sign = Rational::one();
            }
            Some(b'-') => {
                cur.pos += 1;
                sign = -Rational::one();
            }
            Some(_) => return Err(cur.err("unexpected character")),
        }
    }
    Ok(out)
}

impl FromStr for MomentExpr {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        parse_expr(s)
    }
}

pub fn parse_rational(s: &str) -> Result<Rational> {
    let t = s.trim();
    let (neg, body) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t),
    };
    let mut cur = Cursor::new(body);
    let q = cur.rational()?;
    if cur.peek().is_some() {
        return Err(cur.err("trailing characters after rational"));
    }
    Ok(if neg { -q } else { q })
}
