//! Exact rationals and float-to-rational refinement.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision rational used by every symbolic module.
pub type Rational = num_rational::BigRational;

/// Shorthand for `num / den`.
pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// Best continued-fraction convergent of `x` whose denominator does not
/// exceed `max_denominator`.
///
/// The expansion runs on the exact binary value of `x`, so a float that
/// is the nearest double to a small-denominator rational comes back as
/// that rational.
pub fn rationalize(x: f64, max_denominator: u64) -> Result<Rational> {
    if !x.is_finite() {
        return Err(Error::NonFinite("rationalize"));
    }
    if max_denominator == 0 {
        return Err(Error::InvalidArgument("max_denominator must be at least 1".into()));
    }
    if x == 0.0 {
        return Ok(Rational::zero());
    }
    let exact = Rational::from_float(x).ok_or(Error::NonFinite("rationalize"))?;
    let limit = BigInt::from(max_denominator);

    // Convergents p_k/q_k via the standard recurrence.
    let (mut p_prev, mut q_prev) = (BigInt::one(), BigInt::zero());
    let (mut p, mut q) = (exact.numer().div_floor(exact.denom()), BigInt::one());
    let mut rem = &exact - Rational::from_integer(p.clone());
    while !rem.is_zero() {
        let inv = rem.recip();
        let a = inv.numer().div_floor(inv.denom());
        let q_next = &a * &q + &q_prev;
        if q_next > limit {
            break;
        }
        let p_next = &a * &p + &p_prev;
        p_prev = core::mem::replace(&mut p, p_next);
        q_prev = core::mem::replace(&mut q, q_next);
        rem = inv - Rational::from_integer(a);
    }
    Ok(Rational::new(p, q))
}

pub(crate) fn abs(q: &Rational) -> Rational {
    q.abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn third_from_truncated_decimal() {
        assert_eq!(rationalize(0.333333333, 1_000_000).unwrap(), ratio(1, 3));
    }

    #[test]
    fn paper_remainder_coefficient_round_trips() {
        let x = 13.0 / 70000.0;
        assert_eq!(rationalize(x, 1_000_000).unwrap(), ratio(13, 70000));
    }

    #[test]
    fn zero_and_negative() {
        assert_eq!(rationalize(0.0, 10).unwrap(), Rational::zero());
        assert_eq!(rationalize(-0.75, 10).unwrap(), ratio(-3, 4));
        assert_eq!(rationalize(2.0, 1).unwrap(), int(2));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(rationalize(f64::NAN, 10).is_err());
        assert!(rationalize(f64::INFINITY, 10).is_err());
        assert!(rationalize(0.5, 0).is_err());
    }

    #[test]
    fn denominator_bound_respected() {
        let q = rationalize(core::f64::consts::PI, 1000).unwrap();
        assert_eq!(q, ratio(355, 113));
    }
}
