//! Sum-of-squares sign certificates for entropy derivatives along heat flow.
//!
//! A certificate claims
//!
//! ```text
//! dⁿh/dtⁿ = sign · prefactor · ( Σ_j c_j E[P_j²] + Σ_l d_l E[m_l] )
//! ```
//!
//! modulo integration-by-parts identities, with `c_j, d_l ≥ 0`, each `P_j`
//! homogeneous of weight `n` and each `m_l` an even monomial of weight
//! `2n`. Every integrand in the bracket is pointwise nonnegative, so a
//! verified certificate fixes the sign of the derivative for every smooth
//! rapidly decaying density.

mod search;
mod text;

use alloc::format;
use alloc::vec::Vec;

use num_traits::{One, Signed};

use crate::error::{Error, Result};
use crate::moments::{parse_expr, Calculus, Monomial, MomentExpr};
use crate::rational::{ratio, Rational};

pub use search::{search_certificate, SearchConfig, SearchOutcome, SearchStats};
pub use text::parse_certificate;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Positive,
    Negative,
}

impl Sign {
    /// `(−1)^{n+1}`: the sign complete monotonicity predicts for `dⁿh/dtⁿ`.
    pub fn expected_for_order(n: u32) -> Sign {
        if n % 2 == 1 {
            Sign::Positive
        } else {
            Sign::Negative
        }
    }

    pub fn as_i32(self) -> i32 {
        match self {
            Sign::Positive => 1,
            Sign::Negative => -1,
        }
    }

    fn as_rational(self) -> Rational {
        Rational::from_integer(self.as_i32().into())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Square {
    pub coefficient: Rational,
    pub base: MomentExpr,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Remainder {
    pub coefficient: Rational,
    pub monomial: Monomial,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SosCertificate {
    pub order: u32,
    pub sign: Sign,
    /// Common positive factor in front of the bracket (the printed theorems use 1/2).
    pub prefactor: Rational,
    pub squares: Vec<Square>,
    pub remainders: Vec<Remainder>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyReport {
    pub verified: bool,
    /// Canonical form of `expansion − dⁿh/dtⁿ`.
    pub residual: MomentExpr,
    pub residual_norm_l1: Rational,
}

impl SosCertificate {
    pub fn new(order: u32, sign: Sign) -> Self {
        Self { order, sign, prefactor: Rational::one(), squares: Vec::new(), remainders: Vec::new() }
    }

    pub fn with_prefactor(mut self, prefactor: Rational) -> Self {
        self.prefactor = prefactor;
        self
    }

    pub fn square(mut self, coefficient: Rational, base: MomentExpr) -> Self {
        self.squares.push(Square { coefficient, base });
        self
    }

    pub fn remainder(mut self, coefficient: Rational, monomial: Monomial) -> Self {
        self.remainders.push(Remainder { coefficient, monomial });
        self
    }

    /// Check the sign-definiteness invariants, naming the first offending term.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: alloc::string::String| Err(Error::MalformedCertificate(msg));
        if !self.prefactor.is_positive() {
            return bad(format!("prefactor {} must be positive", self.prefactor));
        }
        for (j, sq) in self.squares.iter().enumerate() {
            if sq.coefficient.is_negative() {
                return bad(format!("square {j} has negative coefficient {}", sq.coefficient));
            }
            if let Some((m, _)) = sq.base.terms().find(|(m, _)| m.weight() != self.order) {
                return bad(format!(
                    "square {j} contains {m} of weight {}, expected weight {}",
                    m.weight(),
                    self.order
                ));
            }
        }
        for (l, rem) in self.remainders.iter().enumerate() {
            if rem.coefficient.is_negative() {
                return bad(format!("remainder {l} ({}) has negative coefficient {}", rem.monomial, rem.coefficient));
            }
            if !rem.monomial.is_even() {
                return bad(format!("remainder {l} ({}) has an odd exponent", rem.monomial));
            }
            if rem.monomial.weight() != 2 * self.order {
                return bad(format!(
                    "remainder {l} ({}) has weight {}, expected {}",
                    rem.monomial,
                    rem.monomial.weight(),
                    2 * self.order
                ));
            }
        }
        Ok(())
    }

    /// The bracketed sum before reduction, each term pointwise ≥ 0.
    pub fn unreduced_bracket(&self) -> MomentExpr {
        let mut out = MomentExpr::zero();
        for sq in &self.squares {
            out += &sq.base.square().scale(&sq.coefficient);
        }
        for rem in &self.remainders {
            out.add_term(rem.monomial.clone(), rem.coefficient.clone());
        }
        out
    }
}

/// `sign · prefactor · bracket`, reduced to canonical form.
pub fn expand_certificate(c: &SosCertificate, calculus: &mut Calculus) -> Result<MomentExpr> {
    c.validate()?;
    let scale = c.sign.as_rational() * &c.prefactor;
    let expanded = c.unreduced_bracket().scale(&scale);
    Ok(calculus.reduce(&expanded))
}

/// Exact check that the certificate expands to `dⁿh/dtⁿ`.
pub fn verify_certificate(c: &SosCertificate, calculus: &mut Calculus) -> Result<VerifyReport> {
    if c.order > calculus.cap() {
        return Err(Error::OrderExceedsCap { order: c.order, cap: calculus.cap() });
    }
    let expansion = expand_certificate(c, calculus)?;
    let target = calculus.entropy_derivative(c.order)?;
    let residual = calculus.reduce(&(&expansion - &target));
    let residual_norm_l1 = residual.l1_norm();
    Ok(VerifyReport { verified: residual.is_zero(), residual, residual_norm_l1 })
}

fn poly(s: &str) -> MomentExpr {
    parse_expr(s).expect("built-in polynomial parses")
}

/// `d²h/dt² = −½ E[(ρ_2 − ρ_1²)²]`.
pub fn paper_order2() -> SosCertificate {
    SosCertificate::new(2, Sign::Negative).with_prefactor(ratio(1, 2)).square(ratio(1, 1), poly("r2 - r1^2"))
}

/// `d³h/dt³ = ½ E[(ρ_3 − ρ_1ρ_2 + ⅓ρ_1³)² + ρ_1⁶/45]`.
pub fn paper_order3() -> SosCertificate {
    SosCertificate::new(3, Sign::Positive)
        .with_prefactor(ratio(1, 2))
        .square(ratio(1, 1), poly("r3 - r1*r2 + 1/3*r1^3"))
        .remainder(ratio(1, 45), Monomial::rho(1, 6))
}

/// The fourth-order certificate with three squares and three remainders.
pub fn paper_order4() -> SosCertificate {
    SosCertificate::new(4, Sign::Negative)
        .with_prefactor(ratio(1, 2))
        .square(ratio(1, 1), poly("r4 - 6/5*r1*r3 - 7/10*r2^2 + 8/5*r1^2*r2 - 1/2*r1^4"))
        .square(ratio(1, 1), poly("2/5*r1*r3 - 1/3*r1^2*r2 + 9/100*r1^4"))
        .square(ratio(1, 1), poly("-4/100*r1^2*r2 + 4/100*r1^4"))
        .remainder(ratio(1, 300), Monomial::rho(2, 4))
        .remainder(ratio(56, 90000), Monomial::from_factors(&[(1, 4), (2, 2)]))
        .remainder(ratio(13, 70000), Monomial::rho(1, 8))
}

pub const BUILTIN_NAMES: [&str; 3] = ["paper-n2", "paper-n3", "paper-n4"];

pub fn builtin(name: &str) -> Option<SosCertificate> {
    match name {
        "paper-n2" => Some(paper_order2()),
        "paper-n3" => Some(paper_order3()),
        "paper-n4" => Some(paper_order4()),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Zero;

    #[test]
    fn order2_expands_to_second_derivative() {
        let mut calc = Calculus::default();
        let target = calc.entropy_derivative(2).unwrap();
        assert_eq!(expand_certificate(&paper_order2(), &mut calc).unwrap(), target);
        // Same certificate written without a prefactor.
        let bare = SosCertificate::new(2, Sign::Negative).square(ratio(1, 2), poly("r2 - r1^2"));
        assert_eq!(expand_certificate(&bare, &mut calc).unwrap(), target);
    }

    #[test]
    fn empty_certificate_is_zero() {
        let mut calc = Calculus::default();
        assert!(expand_certificate(&SosCertificate::new(2, Sign::Positive), &mut calc).unwrap().is_zero());
    }

    #[test]
    fn order3_expands_to_third_derivative() {
        let mut calc = Calculus::default();
        let target = calc.entropy_derivative(3).unwrap();
        assert_eq!(expand_certificate(&paper_order3(), &mut calc).unwrap(), target);
    }

    #[test]
    fn built_in_certificates_verify() {
        let mut calc = Calculus::default();
        for name in BUILTIN_NAMES {
            let report = verify_certificate(&builtin(name).unwrap(), &mut calc).unwrap();
            assert!(report.verified, "{name}: residual {}", report.residual);
            assert!(report.residual_norm_l1.is_zero());
        }
    }

    #[test]
    fn perturbed_order3_fails() {
        let mut calc = Calculus::default();
        let mut c = paper_order3();
        c.squares[0].base = poly("r3 - r1*r2 + 1/2*r1^3");
        let report = verify_certificate(&c, &mut calc).unwrap();
        assert!(!report.verified);
        assert!(!report.residual.is_zero());
        assert!(report.residual_norm_l1.is_positive());
    }

    #[test]
    fn validation_names_offending_term() {
        let neg = SosCertificate::new(2, Sign::Negative).square(ratio(-1, 2), poly("r2 - r1^2"));
        assert!(matches!(neg.validate(), Err(Error::MalformedCertificate(m)) if m.contains("square 0")));
        let odd = SosCertificate::new(2, Sign::Negative).remainder(ratio(1, 2), Monomial::from_factors(&[(1, 2), (2, 1)]));
        assert!(matches!(odd.validate(), Err(Error::MalformedCertificate(m)) if m.contains("odd")));
        let weight = SosCertificate::new(3, Sign::Positive).square(ratio(1, 1), poly("r2 - r1^2"));
        assert!(matches!(weight.validate(), Err(Error::MalformedCertificate(m)) if m.contains("weight 2")));
        let mut calc = Calculus::default();
        assert!(expand_certificate(&odd, &mut calc).is_err());
    }

    #[test]
    fn order_above_cap_rejected() {
        let mut calc = Calculus::new(3);
        assert!(matches!(verify_certificate(&paper_order4(), &mut calc), Err(Error::OrderExceedsCap { .. })));
    }

    #[test]
    fn sign_pattern() {
        let signs: Vec<i32> = (1..=4).map(|n| Sign::expected_for_order(n).as_i32()).collect();
        assert_eq!(signs, [1, -1, 1, -1]);
    }
}
