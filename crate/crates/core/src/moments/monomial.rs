use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

/// Product of score ratios `ρ_1^{a_1} ρ_2^{a_2} …` with `ρ_i = f_i / f`.
///
/// Stored as a dense exponent vector (`exps[i - 1] = a_i`) with trailing
/// zeros trimmed, so equal monomials have equal representations.
#[derive(Clone, PartialEq, Eq, Hash, Default, Debug)]
pub struct Monomial {
    exps: Vec<u32>,
}

impl Monomial {
    /// The constant monomial `1`.
    pub fn one() -> Self {
        Self { exps: Vec::new() }
    }

    /// `ρ_index^power`.
    pub fn rho(index: usize, power: u32) -> Self {
        assert!(index >= 1, "score ratio indices start at 1");
        let mut exps = vec![0; index];
        exps[index - 1] = power;
        Self::from_dense(exps)
    }

    /// Build from `(index, exponent)` pairs; repeated indices accumulate.
    pub fn from_factors(factors: &[(usize, u32)]) -> Self {
        let len = factors.iter().map(|&(i, _)| i).max().unwrap_or(0);
        let mut exps = vec![0; len];
        for &(i, a) in factors {
            assert!(i >= 1, "score ratio indices start at 1");
            exps[i - 1] += a;
        }
        Self::from_dense(exps)
    }

    fn from_dense(mut exps: Vec<u32>) -> Self {
        while exps.last() == Some(&0) {
            exps.pop();
        }
        Self { exps }
    }

    pub fn exponent(&self, index: usize) -> u32 {
        if index == 0 {
            return 0;
        }
        self.exps.get(index - 1).copied().unwrap_or(0)
    }

    /// Highest index with a nonzero exponent (0 for the constant).
    pub fn max_index(&self) -> usize {
        self.exps.len()
    }

    /// `Σ i·a_i`.
    pub fn weight(&self) -> u32 {
        self.exps.iter().enumerate().map(|(k, &a)| (k as u32 + 1) * a).sum()
    }

    /// `Σ a_i`, the power of `f` in the denominator of `∏ f_i^{a_i} / f^deg`.
    pub fn degree(&self) -> u32 {
        self.exps.iter().sum()
    }

    pub fn is_one(&self) -> bool {
        self.exps.is_empty()
    }

    /// True when every exponent is even, i.e. the integrand is pointwise ≥ 0.
    pub fn is_even(&self) -> bool {
        self.exps.iter().all(|a| a % 2 == 0)
    }

    /// Nonzero `(index, exponent)` pairs in ascending index order.
    pub fn factors(&self) -> impl Iterator<Item = (usize, u32)> + '_ {
        self.exps.iter().enumerate().filter(|(_, &a)| a > 0).map(|(k, &a)| (k + 1, a))
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let len = self.exps.len().max(other.exps.len());
        let exps = (0..len)
            .map(|k| self.exps.get(k).copied().unwrap_or(0) + other.exps.get(k).copied().unwrap_or(0))
            .collect();
        Self::from_dense(exps)
    }

    pub fn square(&self) -> Monomial {
        self.mul(self)
    }

    /// Multiply by `ρ_index^delta` (negative `delta` divides; panics on underflow).
    pub(crate) fn shift(&self, index: usize, delta: i32) -> Monomial {
        let mut exps = self.exps.clone();
        if exps.len() < index {
            exps.resize(index, 0);
        }
        let slot = &mut exps[index - 1];
        *slot = (*slot as i32 + delta).try_into().expect("exponent underflow");
        Self::from_dense(exps)
    }

    /// Every monomial of the given weight, in descending monomial order.
    pub fn all_of_weight(weight: u32) -> Vec<Monomial> {
        let mut out = Vec::new();
        let mut parts = Vec::new();
        partitions(weight, weight, &mut parts, &mut out);
        out.sort_by(|a, b| b.cmp(a));
        out
    }
}

fn partitions(remaining: u32, largest: u32, parts: &mut Vec<(usize, u32)>, out: &mut Vec<Monomial>) {
    if remaining == 0 {
        out.push(Monomial::from_factors(parts));
        return;
    }
    for part in (1..=largest.min(remaining)).rev() {
        parts.push((part as usize, 1));
        partitions(remaining - part, part, parts, out);
        parts.pop();
    }
}

/// Graded order: weight first, then exponent vectors compared from the
/// highest index downward. Monomials carrying higher-index ratios are larger.
impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.weight().cmp(&other.weight()).then_with(|| {
            let len = self.exps.len().max(other.exps.len());
            for k in (0..len).rev() {
                let a = self.exps.get(k).copied().unwrap_or(0);
                let b = other.exps.get(k).copied().unwrap_or(0);
                match a.cmp(&b) {
                    Ordering::Equal => continue,
                    ord => return ord,
                }
            }
            Ordering::Equal
        })
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
