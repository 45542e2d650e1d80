//! Line-oriented certificate format:
//!
//! ```text
//! order 3
//! sign +1
//! prefactor 1/2
//! square 1 : r3 - r1*r2 + 1/3*r1^3
//! remainder 1/45 : r1^6
//! ```
//!
//! `#` starts a comment. `prefactor` defaults to 1.

use alloc::format;
use alloc::string::String;
use core::fmt::{self, Write};

use num_traits::One;

use super::{Remainder, Sign, SosCertificate, Square};
use crate::error::{Error, Result};
use crate::moments::{paper_monomial, parse_expr, parse_rational};
use crate::rational::Rational;

fn fmt_q(q: &Rational) -> String {
    if q.is_integer() {
        format!("{}", q.numer())
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

impl fmt::Display for SosCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "order {}", self.order)?;
        writeln!(f, "sign {}", if self.sign == Sign::Positive { "+1" } else { "-1" })?;
        writeln!(f, "prefactor {}", fmt_q(&self.prefactor))?;
        for sq in &self.squares {
            writeln!(f, "square {} : {}", fmt_q(&sq.coefficient), sq.base.to_polynomial_string())?;
        }
        for rem in &self.remainders {
            writeln!(f, "remainder {} : {}", fmt_q(&rem.coefficient), rem.monomial)?;
        }
        Ok(())
    }
}

impl SosCertificate {
    /// f-notation rendering, e.g. `-1/2 ∫ f (f2/f - f1^2/f^2)^2 dy`.
    pub fn to_paper_notation(&self) -> String {
        let mut out = String::new();
        if self.sign == Sign::Negative {
            out.push('-');
        }
        if !self.prefactor.is_one() {
            let _ = write!(out, "{} ", fmt_q(&self.prefactor));
        }
        out.push_str("∫ ");
        let mut first = true;
        for sq in &self.squares {
            if !first {
                out.push_str(" + ");
            }
            first = false;
            if !sq.coefficient.is_one() {
                let _ = write!(out, "{} ", fmt_q(&sq.coefficient));
            }
            let _ = write!(out, "f ({})^2", sq.base.to_paper_ratio_notation());
        }
        for rem in &self.remainders {
            if !first {
                out.push_str(" + ");
            }
            first = false;
            let _ = write!(out, "{} {}", fmt_q(&rem.coefficient), paper_monomial(&rem.monomial, true));
        }
        if first {
            out.push('0');
        }
        out.push_str(" dy");
        out
    }
}

pub fn parse_certificate(text: &str) -> Result<SosCertificate> {
    let mut order = None;
    let mut sign = None;
    let mut prefactor = Rational::one();
    let mut squares = alloc::vec::Vec::new();
    let mut remainders = alloc::vec::Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: &str| Error::Parse(format!("certificate line {}: {msg}", lineno + 1));
        let (key, rest) = line.split_once(char::is_whitespace).ok_or_else(|| err("missing value"))?;
        let rest = rest.trim();
        match key {
            "order" => order = Some(rest.parse::<u32>().map_err(|_| err("order must be a positive integer"))?),
            "sign" => {
                sign = Some(match rest {
                    "+1" | "1" | "+" => Sign::Positive,
                    "-1" | "-" => Sign::Negative,
                    _ => return Err(err("sign must be +1 or -1")),
                })
            }
            "prefactor" => prefactor = parse_rational(rest).map_err(|e| err(&format!("{e}")))?,
            "square" | "remainder" => {
                let (c, body) = rest.split_once(':').ok_or_else(|| err("expected `<coefficient> : <polynomial>`"))?;
                let coefficient = parse_rational(c).map_err(|e| err(&format!("{e}")))?;
                let base = parse_expr(body).map_err(|e| err(&format!("{e}")))?;
                if key == "square" {
                    squares.push(Square { coefficient, base });
                } else {
                    let mut terms = base.into_terms();
                    if terms.len() != 1 || !terms[0].1.is_one() {
                        return Err(err("remainder must be a single monomial with unit coefficient"));
                    }
                    let (monomial, _) = terms.pop().expect("one term");
                    remainders.push(Remainder { coefficient, monomial });
                }
            }
            other => return Err(err(&format!("unknown key `{other}`"))),
        }
    }
    let order = order.ok_or_else(|| Error::Parse("certificate is missing `order`".into()))?;
    let sign = sign.ok_or_else(|| Error::Parse("certificate is missing `sign`".into()))?;
    let cert = SosCertificate { order, sign, prefactor, squares, remainders };
    cert.validate()?;
    Ok(cert)
}
