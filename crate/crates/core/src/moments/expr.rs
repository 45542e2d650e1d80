use alloc::collections::btree_map::Entry;
use alloc::collections::BTreeMap;
use alloc::collections::BTreeSet;
use alloc::vec::Vec;
use core::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_traits::{One, Zero};

use super::Monomial;
use crate::rational::{abs, Rational};

/// Exact linear combination `Σ c_m E_f[m]`, where `E_f[m] = ∫ f·m dy`.
///
/// The same type doubles as a plain polynomial in the score ratios (for
/// instance the bases of squares in a certificate); [`MomentExpr::mul`]
/// is the pointwise product of integrands.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct MomentExpr {
    terms: BTreeMap<Monomial, Rational>,
}

impl MomentExpr {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Rational) -> Self {
        Self::term(c, Monomial::one())
    }

    pub fn term(c: Rational, m: Monomial) -> Self {
        let mut e = Self::zero();
        e.add_term(m, c);
        e
    }

    pub fn monomial(m: Monomial) -> Self {
        Self::term(Rational::one(), m)
    }

    pub fn from_terms<I: IntoIterator<Item = (Rational, Monomial)>>(terms: I) -> Self {
        let mut e = Self::zero();
        for (c, m) in terms {
            e.add_term(m, c);
        }
        e
    }

    pub fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            Entry::Occupied(mut slot) => {
                *slot.get_mut() += c;
                if slot.get().is_zero() {
                    slot.remove();
                }
            }
            Entry::Vacant(slot) => {
                slot.insert(c);
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    /// Terms in ascending monomial order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn leading(&self) -> Option<(&Monomial, &Rational)> {
        self.terms.iter().next_back()
    }

    pub fn weights(&self) -> BTreeSet<u32> {
        self.terms.keys().map(Monomial::weight).collect()
    }

    /// Single weight shared by every term, if any.
    pub fn homogeneous_weight(&self) -> Option<u32> {
        let w = self.weights();
        if w.len() == 1 {
            w.into_iter().next()
        } else {
            None
        }
    }

    pub fn part_of_weight(&self, weight: u32) -> MomentExpr {
        Self {
            terms: self.terms.iter().filter(|(m, _)| m.weight() == weight).map(|(m, c)| (m.clone(), c.clone())).collect(),
        }
    }

    pub fn max_index(&self) -> usize {
        self.terms.keys().map(Monomial::max_index).max().unwrap_or(0)
    }

    pub fn scale(&self, c: &Rational) -> MomentExpr {
        if c.is_zero() {
            return Self::zero();
        }
        Self { terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect() }
    }

    /// Pointwise product of integrand polynomials.
    pub fn mul(&self, other: &MomentExpr) -> MomentExpr {
        let mut out = Self::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }

    pub fn square(&self) -> MomentExpr {
        self.mul(self)
    }

    /// `Σ |c_m|`.
    pub fn l1_norm(&self) -> Rational {
        self.terms.values().map(abs).fold(Rational::zero(), |a, b| a + b)
    }

    pub fn into_terms(self) -> Vec<(Monomial, Rational)> {
        self.terms.into_iter().collect()
    }
}

impl AddAssign<&MomentExpr> for MomentExpr {
    fn add_assign(&mut self, rhs: &MomentExpr) {
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), c.clone());
        }
    }
}

impl SubAssign<&MomentExpr> for MomentExpr {
    fn sub_assign(&mut self, rhs: &MomentExpr) {
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), -c.clone());
        }
    }
}

impl Add<&MomentExpr> for &MomentExpr {
    type Output = MomentExpr;
    fn add(self, rhs: &MomentExpr) -> MomentExpr {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub<&MomentExpr> for &MomentExpr {
    type Output = MomentExpr;
    fn sub(self, rhs: &MomentExpr) -> MomentExpr {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Add for MomentExpr {
    type Output = MomentExpr;
    fn add(mut self, rhs: MomentExpr) -> MomentExpr {
        self += &rhs;
        self
    }
}

impl Sub for MomentExpr {
    type Output = MomentExpr;
    fn sub(mut self, rhs: MomentExpr) -> MomentExpr {
        self -= &rhs;
        self
    }
}

impl Neg for MomentExpr {
    type Output = MomentExpr;
    fn neg(self) -> MomentExpr {
        Self { terms: self.terms.into_iter().map(|(m, c)| (m, -c)).collect() }
    }
}

impl Mul<&Rational> for &MomentExpr {
    type Output = MomentExpr;
    fn mul(self, rhs: &Rational) -> MomentExpr {
        self.scale(rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    #[test]
    fn cancellation_removes_terms() {
        let m = Monomial::rho(1, 2);
        let mut e = MomentExpr::term(ratio(1, 2), m.clone());
        e.add_term(m.clone(), ratio(-1, 2));
        assert!(e.is_zero());
        let a = MomentExpr::term(ratio(1, 3), m.clone()) + MomentExpr::monomial(Monomial::rho(2, 1));
        let b = a.clone() - a;
        assert!(b.is_zero());
    }

    #[test]
    fn square_of_binomial() {
        let p = MomentExpr::monomial(Monomial::rho(2, 1)) - MomentExpr::monomial(Monomial::rho(1, 2));
        let sq = p.square();
        assert_eq!(sq.len(), 3);
        assert_eq!(sq.coefficient(&Monomial::from_factors(&[(1, 2), (2, 1)])), ratio(-2, 1));
        assert_eq!(sq.homogeneous_weight(), Some(4));
        assert_eq!(sq.l1_norm(), ratio(4, 1));
    }
}
