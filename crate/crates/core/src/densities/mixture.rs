use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;

use crate::error::{Error, Result};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Component {
    pub weight: f64,
    pub mean: f64,
    pub variance: f64,
}

/// Finite mixture `Σ λ_k N(μ_k, σ_k²)`, closed under heat flow.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianMixture {
    components: Vec<Component>,
}

impl GaussianMixture {
    /// Weights are normalized to sum to one.
    pub fn new(components: Vec<Component>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidArgument("mixture needs at least one component".into()));
        }
        for (k, c) in components.iter().enumerate() {
            if !(c.weight.is_finite() && c.mean.is_finite() && c.variance.is_finite()) {
                return Err(Error::NonFinite("mixture component"));
            }
            if c.weight <= 0.0 {
                return Err(Error::InvalidArgument(format!("component {k} has nonpositive weight {}", c.weight)));
            }
            if c.variance <= 0.0 {
                return Err(Error::InvalidArgument(format!("component {k} has nonpositive variance {}", c.variance)));
            }
        }
        let total: f64 = components.iter().map(|c| c.weight).sum();
        let components = components.into_iter().map(|c| Component { weight: c.weight / total, ..c }).collect();
        Ok(Self { components })
    }

    pub fn from_triples(triples: &[(f64, f64, f64)]) -> Result<Self> {
        Self::new(triples.iter().map(|&(weight, mean, variance)| Component { weight, mean, variance }).collect())
    }

    pub fn gaussian(mean: f64, variance: f64) -> Result<Self> {
        Self::from_triples(&[(1.0, mean, variance)])
    }

    /// `λ N(0, 1) + (1 − λ) N(d, 1)`: the two-point test family of the scanner.
    pub fn two_point(lambda: f64, separation: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda < 1.0) {
            return Err(Error::OutOfRange { what: "lambda", value: lambda, range: "(0, 1)" });
        }
        Self::from_triples(&[(lambda, 0.0, 1.0), (1.0 - lambda, separation, 1.0)])
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    /// Density of `X + Z_t`: every variance grows by `t`.
    pub fn evolve(&self, t: f64) -> Result<Self> {
        if !t.is_finite() {
            return Err(Error::NonFinite("evolve"));
        }
        if t < 0.0 {
            return Err(Error::NegativeTime(t));
        }
        Ok(Self { components: self.components.iter().map(|c| Component { variance: c.variance + t, ..*c }).collect() })
    }

    /// Density of the sum of independent draws from `self` and `other`.
    pub fn convolve(&self, other: &GaussianMixture) -> GaussianMixture {
        let mut components = Vec::with_capacity(self.components.len() * other.components.len());
        for a in &self.components {
            for b in &other.components {
                components.push(Component {
                    weight: a.weight * b.weight,
                    mean: a.mean + b.mean,
                    variance: a.variance + b.variance,
                });
            }
        }
        Self { components }
    }

    pub fn min_std(&self) -> f64 {
        self.components.iter().map(|c| c.variance.sqrt()).fold(f64::INFINITY, f64::min)
    }

    pub fn max_std(&self) -> f64 {
        self.components.iter().map(|c| c.variance.sqrt()).fold(0.0, f64::max)
    }

    /// `[min μ − width·σ_max, max μ + width·σ_max]`.
    pub fn support(&self, width: f64) -> (f64, f64) {
        let s = self.max_std();
        let lo = self.components.iter().map(|c| c.mean).fold(f64::INFINITY, f64::min);
        let hi = self.components.iter().map(|c| c.mean).fold(f64::NEG_INFINITY, f64::max);
        (lo - width * s, hi + width * s)
    }

    pub fn mean(&self) -> f64 {
        self.components.iter().map(|c| c.weight * c.mean).sum()
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.components.iter().map(|c| c.weight * (c.variance + (c.mean - m).powi(2))).sum()
    }

    fn log_terms(&self, y: f64, out: &mut Vec<f64>) -> f64 {
        out.clear();
        let mut top = f64::NEG_INFINITY;
        for c in &self.components {
            let z = (y - c.mean) / c.variance.sqrt();
            let l = c.weight.ln() - 0.5 * z * z - 0.5 * c.variance.ln() - LN_SQRT_2PI;
            top = top.max(l);
            out.push(l);
        }
        top
    }

    pub fn log_pdf(&self, y: f64) -> f64 {
        let mut terms = Vec::with_capacity(self.components.len());
        let top = self.log_terms(y, &mut terms);
        top + terms.iter().map(|l| (l - top).exp()).sum::<f64>().ln()
    }

    pub fn pdf(&self, y: f64) -> f64 {
        self.log_pdf(y).exp()
    }

    /// `(f_0, f_1, …, f_max_order)` at `y` from the Hermite formula
    /// `dⁱ/dyⁱ N(μ,σ²) = (−σ)^{−i} He_i((y−μ)/σ) N(μ,σ²)`.
    pub fn pdf_derivatives(&self, y: f64, max_order: usize) -> Vec<f64> {
        let mut out = vec![0.0; max_order + 1];
        let mut he = vec![0.0; max_order + 1];
        for c in &self.components {
            let s = c.variance.sqrt();
            let z = (y - c.mean) / s;
            let phi = c.weight * (-0.5 * z * z - LN_SQRT_2PI).exp() / s;
            hermite_probabilists(z, &mut he);
            let mut scale = 1.0;
            for (i, slot) in out.iter_mut().enumerate() {
                *slot += phi * scale * he[i];
                scale *= -1.0 / s;
            }
        }
        out
    }

    /// `ln f(y)` and the score ratios `ρ_1 … ρ_max_index`, computed with
    /// normalized component responsibilities so that nothing underflows in
    /// the tails.
    pub fn score_ratios(&self, y: f64, max_index: usize, scratch: &mut ScoreScratch) -> f64 {
        let top = self.log_terms(y, &mut scratch.logs);
        let total: f64 = scratch.logs.iter().map(|l| (l - top).exp()).sum();
        scratch.rho.clear();
        scratch.rho.resize(max_index + 1, 0.0);
        scratch.he.resize(max_index + 1, 0.0);
        for (c, l) in self.components.iter().zip(&scratch.logs) {
            let resp = (l - top).exp() / total;
            if resp == 0.0 {
                continue;
            }
            let s = c.variance.sqrt();
            let z = (y - c.mean) / s;
            hermite_probabilists(z, &mut scratch.he);
            let mut scale = resp;
            for i in 0..=max_index {
                scratch.rho[i] += scale * scratch.he[i];
                scale *= -1.0 / s;
            }
        }
        top + total.ln()
    }
}

/// Reusable buffers for [`GaussianMixture::score_ratios`]; `rho[i]` is `ρ_i` (`rho[0] = 1`).
#[derive(Clone, Debug, Default)]
pub struct ScoreScratch {
    logs: Vec<f64>,
    he: Vec<f64>,
    pub rho: Vec<f64>,
}

/// `He_0 … He_{n−1}` at `x` via `He_{k+1} = x He_k − k He_{k−1}`.
pub fn hermite_probabilists(x: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = 1.0;
    if out.len() > 1 {
        out[1] = x;
    }
    for k in 1..out.len().saturating_sub(1) {
        out[k + 1] = x * out[k] - k as f64 * out[k - 1];
    }
}
