use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;

use super::GaussianMixture;
use crate::error::{Error, Result};

/// Points per smallest standard deviation when sampling a mixture.
pub const POINTS_PER_STD: f64 = 40.0;
/// Standard deviations beyond the extreme means covered by a default grid.
pub const HALF_WIDTH_STDS: f64 = 12.0;
/// Heat-kernel truncation in kernel standard deviations.
const KERNEL_STDS: f64 = 8.0;

/// Uniformly sampled density `values[i] ≈ f(origin + i·spacing)`, renormalized
/// to unit trapezoid mass.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityGrid {
    origin: f64,
    spacing: f64,
    values: Vec<f64>,
}

fn trapezoid_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        n => values.iter().sum::<f64>() - 0.5 * (values[0] + values[n - 1]),
    }
}

impl DensityGrid {
    pub fn new(origin: f64, spacing: f64, values: Vec<f64>) -> Result<Self> {
        if !(origin.is_finite() && spacing.is_finite()) {
            return Err(Error::NonFinite("grid geometry"));
        }
        if spacing <= 0.0 {
            return Err(Error::InvalidArgument(format!("grid spacing must be positive, got {spacing}")));
        }
        if values.len() < 2 {
            return Err(Error::InvalidArgument("grid needs at least two samples".into()));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("sample {i} is not finite")));
        }
        if let Some(i) = values.iter().position(|&v| v < 0.0) {
            return Err(Error::InvalidArgument(format!("sample {i} is negative ({})", values[i])));
        }
        let mass = spacing * trapezoid_sum(&values);
        if mass <= 0.0 {
            return Err(Error::InvalidArgument("grid has zero mass".into()));
        }
        let values = values.into_iter().map(|v| v / mass).collect();
        Ok(Self { origin, spacing, values })
    }

    /// Sample `m` on `[lo, hi]` at the given spacing.
    pub fn sample_range(m: &GaussianMixture, lo: f64, hi: f64, spacing: f64) -> Result<Self> {
        if !(hi > lo) || !(spacing > 0.0) {
            return Err(Error::InvalidArgument(format!("bad sampling range [{lo}, {hi}] step {spacing}")));
        }
        let n = ((hi - lo) / spacing).round() as usize + 1;
        Self::new(lo, spacing, (0..n).map(|i| m.pdf(lo + i as f64 * spacing)).collect())
    }

    /// Sample with the default resolution and support.
    pub fn sample(m: &GaussianMixture) -> Result<Self> {
        let (lo, hi) = m.support(HALF_WIDTH_STDS);
        Self::sample_range(m, lo, hi, m.min_std() / POINTS_PER_STD)
    }

    /// Sample with a given spacing on the default support, snapped to multiples of the spacing.
    pub fn sample_with_spacing(m: &GaussianMixture, spacing: f64) -> Result<Self> {
        let (lo, hi) = m.support(HALF_WIDTH_STDS);
        Self::sample_range(m, (lo / spacing).floor() * spacing, (hi / spacing).ceil() * spacing, spacing)
    }

    pub fn origin(&self) -> f64 {
        self.origin
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn y(&self, i: usize) -> f64 {
        self.origin + i as f64 * self.spacing
    }

    pub fn end(&self) -> f64 {
        self.y(self.values.len() - 1)
    }

    pub fn mass(&self) -> f64 {
        self.spacing * trapezoid_sum(&self.values)
    }

    /// Linear interpolation, zero outside the grid.
    pub fn eval(&self, y: f64) -> f64 {
        let x = (y - self.origin) / self.spacing;
        if x < 0.0 || x > (self.values.len() - 1) as f64 {
            return 0.0;
        }
        let i = (x.floor() as usize).min(self.values.len() - 2);
        let w = x - i as f64;
        self.values[i] * (1.0 - w) + self.values[i + 1] * w
    }
}

/// Discrete convolution with a sampled `N(0, t)` kernel on the same grid.
pub fn heat_evolve_grid(g: &DensityGrid, t: f64) -> Result<DensityGrid> {
    if !t.is_finite() {
        return Err(Error::NonFinite("heat_evolve_grid"));
    }
    if t <= 0.0 {
        return Err(Error::NegativeTime(t));
    }
    let h = g.spacing;
    let width = KERNEL_STDS * t.sqrt();
    let half = 0.5 * (g.end() - g.origin);
    if width > half {
        return Err(Error::KernelTooWide { kernel: width, grid: half, needed: width - half });
    }
    let m = (width / h).ceil() as usize;
    let mut kernel: Vec<f64> = (0..=2 * m)
        .map(|j| {
            let x = (j as f64 - m as f64) * h;
            (-0.5 * x * x / t).exp()
        })
        .collect();
    let total: f64 = kernel.iter().sum();
    kernel.iter_mut().for_each(|k| *k /= total);
    let n = g.values.len();
    let mut out = vec![0.0; n];
    for (i, slot) in out.iter_mut().enumerate() {
        let lo = i.saturating_sub(m);
        let hi = (i + m).min(n - 1);
        let mut acc = 0.0;
        for j in lo..=hi {
            acc += g.values[j] * kernel[j + m - i];
        }
        *slot = acc;
    }
    DensityGrid::new(g.origin, h, out)
}

/// Density of the sum of independent draws, on the grid starting at `a.origin + b.origin`.
pub fn convolve(a: &DensityGrid, b: &DensityGrid) -> Result<DensityGrid> {
    if (a.spacing - b.spacing).abs() > 1e-9 * a.spacing.max(b.spacing) {
        return Err(Error::SpacingMismatch(a.spacing, b.spacing));
    }
    let h = a.spacing;
    let (na, nb) = (a.values.len(), b.values.len());
    let mut out = vec![0.0; na + nb - 1];
    for (i, &av) in a.values.iter().enumerate() {
        if av == 0.0 {
            continue;
        }
        for (j, &bv) in b.values.iter().enumerate() {
            out[i + j] += av * bv * h;
        }
    }
    DensityGrid::new(a.origin + b.origin, h, out)
}
