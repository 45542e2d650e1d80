use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use num_traits::{One, Zero};

use super::{Monomial, MomentExpr};
use crate::error::{Error, Result};
use crate::rational::{int, ratio, Rational};

/// Default upper bound on the entropy derivative order.
pub const DEFAULT_DERIVATIVE_CAP: u32 = 8;

/// Spatial derivative of the integrand polynomial, using `ρ_i' = ρ_{i+1} − ρ_1 ρ_i`.
pub fn derive_y(e: &MomentExpr) -> MomentExpr {
    let mut out = MomentExpr::zero();
    for (m, c) in e.terms() {
        derive_y_monomial(m, c, &mut out);
    }
    out
}

fn derive_y_monomial(m: &Monomial, c: &Rational, out: &mut MomentExpr) {
    let degree = m.degree();
    for (i, a) in m.factors() {
        // a·m·ρ_{i+1}/ρ_i
        let shifted = m.shift(i, -1).shift(i + 1, 1);
        out.add_term(shifted, c * int(a as i64));
    }
    if degree > 0 {
        out.add_term(m.shift(1, 1), -(c * int(degree as i64)));
    }
}

/// Time derivative of the functional `E_f[e]` along `f_t = f_yy / 2`.
///
/// `∂_t E_f[m] = E_f[ρ_2 m / 2 + ∂_t m]` with `∂_t ρ_i = (ρ_{i+2} − ρ_i ρ_2) / 2`.
pub fn derive_t(e: &MomentExpr) -> MomentExpr {
    let half = ratio(1, 2);
    let mut out = MomentExpr::zero();
    for (m, c) in e.terms() {
        let c_half = c * &half;
        out.add_term(m.shift(2, 1), c_half.clone());
        for (i, a) in m.factors() {
            let ca = &c_half * int(a as i64);
            out.add_term(m.shift(i, -1).shift(i + 2, 1), ca.clone());
            out.add_term(m.shift(2, 1), -ca);
        }
    }
    out
}

/// Integration-by-parts identity generated by `m`: `E_f[derive_y(m) + ρ_1 m] = 0`.
pub fn ibp_relation(m: &Monomial) -> MomentExpr {
    let mut r = MomentExpr::zero();
    derive_y_monomial(m, &Rational::one(), &mut r);
    r.add_term(m.shift(1, 1), Rational::one());
    r
}

/// The integration-by-parts identities of one weight, in reduced row-echelon form.
#[derive(Clone, Debug)]
pub struct RelationBasis {
    weight: u32,
    relations: Vec<MomentExpr>,
    // Pivot monomial -> row with unit coefficient on the pivot; no pivot
    // appears in any other row.
    rows: BTreeMap<Monomial, MomentExpr>,
}

impl RelationBasis {
    /// One relation per monomial of weight `weight - 1`.
    pub fn build(weight: u32) -> Self {
        let relations: Vec<MomentExpr> = if weight == 0 {
            Vec::new()
        } else {
            Monomial::all_of_weight(weight - 1).iter().map(ibp_relation).collect()
        };
        let mut rows: BTreeMap<Monomial, MomentExpr> = BTreeMap::new();
        for rel in &relations {
            let mut row = reduce_by(rel, &rows);
            let Some((pivot, lead)) = row.leading().map(|(m, c)| (m.clone(), c.clone())) else {
                continue;
            };
            row = row.scale(&lead.recip());
            for other in rows.values_mut() {
                let c = other.coefficient(&pivot);
                if !c.is_zero() {
                    *other -= &row.scale(&c);
                }
            }
            rows.insert(pivot, row);
        }
        Self { weight, relations, rows }
    }

    pub fn weight(&self) -> u32 {
        self.weight
    }

    pub fn relations(&self) -> &[MomentExpr] {
        &self.relations
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Leading monomial of each elimination row with its row.
    pub fn elimination_table(&self) -> impl Iterator<Item = (&Monomial, &MomentExpr)> {
        self.rows.iter()
    }

    pub fn is_pivot(&self, m: &Monomial) -> bool {
        self.rows.contains_key(m)
    }

    /// Monomials of this weight that survive reduction, descending.
    pub fn normal_monomials(&self) -> Vec<Monomial> {
        Monomial::all_of_weight(self.weight).into_iter().filter(|m| !self.is_pivot(m)).collect()
    }

    /// Normal form of a homogeneous expression of this weight.
    pub fn reduce(&self, e: &MomentExpr) -> MomentExpr {
        reduce_by(e, &self.rows)
    }
}

fn reduce_by(e: &MomentExpr, rows: &BTreeMap<Monomial, MomentExpr>) -> MomentExpr {
    let mut out = e.clone();
    // Rows are fully reduced against each other, so a single pass per pivot suffices.
    for (pivot, row) in rows {
        let c = out.coefficient(pivot);
        if !c.is_zero() {
            out -= &row.scale(&c);
        }
    }
    out
}

/// Caches relation bases by weight and reduces expressions to normal form.
#[derive(Clone, Debug, Default)]
pub struct Reducer {
    bases: BTreeMap<u32, RelationBasis>,
}

impl Reducer {
    pub fn new() -> Self {
        Self::default()
    }

    /// Build every basis up to `max_weight` so the reducer can be shared read-only.
    pub fn with_weights_up_to(max_weight: u32) -> Self {
        let mut r = Self::new();
        for w in 0..=max_weight {
            r.basis(w);
        }
        r
    }

    pub fn basis(&mut self, weight: u32) -> &RelationBasis {
        self.bases.entry(weight).or_insert_with(|| RelationBasis::build(weight))
    }

    pub fn cached_basis(&self, weight: u32) -> Option<&RelationBasis> {
        self.bases.get(&weight)
    }

    /// Canonical form; each homogeneous part is reduced independently.
    pub fn reduce(&mut self, e: &MomentExpr) -> MomentExpr {
        let mut out = MomentExpr::zero();
        for w in e.weights() {
            let part = e.part_of_weight(w);
            out += &self.basis(w).reduce(&part);
        }
        out
    }

    /// Like [`Reducer::reduce`] but only uses already-built bases.
    pub fn reduce_cached(&self, e: &MomentExpr) -> Option<MomentExpr> {
        let mut out = MomentExpr::zero();
        for w in e.weights() {
            out += &self.bases.get(&w)?.reduce(&e.part_of_weight(w));
        }
        Some(out)
    }
}

/// One-shot canonical form; builds the needed bases on the fly.
pub fn ibp_reduce(e: &MomentExpr) -> MomentExpr {
    Reducer::new().reduce(e)
}

/// Derives and caches `dⁿh/dtⁿ` and `dⁿI/dtⁿ` as canonical moment expressions.
#[derive(Clone, Debug)]
pub struct Calculus {
    cap: u32,
    reducer: Reducer,
    entropy: Vec<MomentExpr>,
}

impl Default for Calculus {
    fn default() -> Self {
        Self::new(DEFAULT_DERIVATIVE_CAP)
    }
}

impl Calculus {
    pub fn new(cap: u32) -> Self {
        Self { cap, reducer: Reducer::new(), entropy: Vec::new() }
    }

    pub fn cap(&self) -> u32 {
        self.cap
    }

    pub fn reducer(&mut self) -> &mut Reducer {
        &mut self.reducer
    }

    pub fn reduce(&mut self, e: &MomentExpr) -> MomentExpr {
        self.reducer.reduce(e)
    }

    /// `dⁿ h(Y_t) / dtⁿ` for `1 ≤ n ≤ cap`; every term has weight `2n`.
    pub fn entropy_derivative(&mut self, n: u32) -> Result<MomentExpr> {
        if n == 0 {
            return Err(Error::InvalidArgument("entropy derivative order starts at 1".into()));
        }
        if n > self.cap {
            return Err(Error::OrderExceedsCap { order: n, cap: self.cap });
        }
        if self.entropy.is_empty() {
            // de Bruijn: dh/dt = I/2 = E[ρ_1²]/2.
            self.entropy.push(MomentExpr::term(ratio(1, 2), Monomial::rho(1, 2)));
        }
        while self.entropy.len() < n as usize {
            let last = self.entropy.last().expect("seeded");
            let next = derive_t(last);
            let reduced = self.reducer.reduce(&next);
            self.entropy.push(reduced);
        }
        Ok(self.entropy[n as usize - 1].clone())
    }

    /// `dⁿ I(Y_t) / dtⁿ = 2 dⁿ⁺¹h/dtⁿ⁺¹` for `0 ≤ n ≤ cap − 1`.
    pub fn fisher_derivative(&mut self, n: u32) -> Result<MomentExpr> {
        if n == 0 {
            return Ok(MomentExpr::monomial(Monomial::rho(1, 2)));
        }
        if n + 1 > self.cap {
            return Err(Error::OrderExceedsCap { order: n, cap: self.cap.saturating_sub(1) });
        }
        Ok(self.entropy_derivative(n + 1)?.scale(&int(2)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(i: usize, a: u32) -> Monomial {
        Monomial::rho(i, a)
    }

    fn e(terms: &[(i64, i64, &[(usize, u32)])]) -> MomentExpr {
        MomentExpr::from_terms(terms.iter().map(|&(n, d, f)| (ratio(n, d), Monomial::from_factors(f))))
    }

    #[test]
    fn derive_y_examples() {
        assert_eq!(derive_y(&MomentExpr::monomial(r(1, 1))), e(&[(1, 1, &[(2, 1)]), (-1, 1, &[(1, 2)])]));
        assert!(derive_y(&MomentExpr::constant(int(1))).is_zero());
        assert_eq!(
            derive_y(&MomentExpr::monomial(r(1, 2))),
            e(&[(2, 1, &[(1, 1), (2, 1)]), (-2, 1, &[(1, 3)])])
        );
    }

    #[test]
    fn derive_t_examples() {
        assert_eq!(
            derive_t(&MomentExpr::monomial(r(1, 2))),
            e(&[(1, 1, &[(1, 1), (3, 1)]), (-1, 2, &[(1, 2), (2, 1)])])
        );
        assert!(derive_t(&MomentExpr::zero()).is_zero());
        let mass = derive_t(&MomentExpr::constant(int(1)));
        assert_eq!(mass, MomentExpr::term(ratio(1, 2), r(2, 1)));
        assert!(ibp_reduce(&mass).is_zero());
    }

    #[test]
    fn derivation_raises_weight() {
        let x = e(&[(3, 1, &[(1, 1), (2, 2)]), (1, 7, &[(4, 1), (1, 1)])]);
        assert!(derive_y(&x).terms().all(|(m, _)| m.weight() == 6));
        assert!(derive_t(&x).terms().all(|(m, _)| m.weight() == 7));
    }

    #[test]
    fn ibp_reduce_examples() {
        assert!(ibp_reduce(&MomentExpr::monomial(r(3, 1))).is_zero());
        assert_eq!(
            ibp_reduce(&MomentExpr::monomial(Monomial::from_factors(&[(1, 2), (2, 1)]))),
            MomentExpr::term(ratio(2, 3), r(1, 4))
        );
        assert!(ibp_reduce(&MomentExpr::monomial(r(1, 1))).is_zero());
        assert_eq!(ibp_reduce(&MomentExpr::constant(int(5))), MomentExpr::constant(int(5)));
    }

    #[test]
    fn second_derivative_is_negated_square() {
        let mut calc = Calculus::default();
        let d2 = calc.entropy_derivative(2).unwrap();
        let base = MomentExpr::monomial(r(2, 1)) - MomentExpr::monomial(r(1, 2));
        let expected = calc.reduce(&base.square().scale(&ratio(-1, 2)));
        assert_eq!(d2, expected);
        assert_eq!(d2, e(&[(-1, 2, &[(2, 2)]), (1, 6, &[(1, 4)])]));
    }

    #[test]
    fn first_fisher_derivative() {
        let mut calc = Calculus::default();
        assert_eq!(calc.fisher_derivative(0).unwrap(), MomentExpr::monomial(r(1, 2)));
        assert_eq!(calc.entropy_derivative(1).unwrap(), MomentExpr::term(ratio(1, 2), r(1, 2)));
        let d1 = calc.fisher_derivative(1).unwrap();
        let base = MomentExpr::monomial(r(2, 1)) - MomentExpr::monomial(r(1, 2));
        assert_eq!(d1, calc.reduce(&-base.square()));
    }

    #[test]
    fn cap_is_enforced() {
        let mut calc = Calculus::new(4);
        assert_eq!(calc.entropy_derivative(5), Err(Error::OrderExceedsCap { order: 5, cap: 4 }));
        assert!(calc.fisher_derivative(4).is_err());
        assert!(calc.fisher_derivative(3).is_ok());
        assert!(calc.entropy_derivative(0).is_err());
    }

    #[test]
    fn relation_basis_is_reduced_echelon() {
        for w in 1..=10 {
            let b = RelationBasis::build(w);
            let pivots: Vec<&Monomial> = b.elimination_table().map(|(p, _)| p).collect();
            for (p, row) in b.elimination_table() {
                assert_eq!(row.coefficient(p), Rational::one());
                assert_eq!(row.leading().unwrap().0, p);
                for q in &pivots {
                    if *q != p {
                        assert!(row.coefficient(q).is_zero());
                    }
                }
                assert_eq!(row.homogeneous_weight(), Some(w));
            }
            assert!(b.relations().iter().all(|r| r.homogeneous_weight() == Some(w)));
        }
    }
}
