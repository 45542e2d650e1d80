use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;

use crate::densities::GaussianMixture;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureConfig {
    pub points_per_component: usize,
    /// Integrand dropped where `f < ε · max f`.
    pub tail_cutoff_ratio: f64,
    pub relative_tolerance: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self { points_per_component: 200, tail_cutoff_ratio: 1e-60, relative_tolerance: 1e-10 }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if self.points_per_component < 16 {
            return Err(Error::InvalidArgument("pointsPerComponent must be at least 16".into()));
        }
        if !(self.tail_cutoff_ratio > 0.0 && self.tail_cutoff_ratio < 1.0) {
            return Err(Error::OutOfRange { what: "tailCutoffRatio", value: self.tail_cutoff_ratio, range: "(0, 1)" });
        }
        if !(self.relative_tolerance > 0.0) {
            return Err(Error::OutOfRange {
                what: "relativeTolerance",
                value: self.relative_tolerance,
                range: "(0, inf)",
            });
        }
        Ok(())
    }
}

/// Orthonormal Hermite function `ψ_n(z)` (Gaussian factor included) and `√(2n) ψ_{n−1}(z)`.
fn hermite_function(n: usize, z: f64) -> (f64, f64) {
    let mut p1 = 0.751_125_544_464_942_5 * (-0.5 * z * z).exp(); // π^{-1/4}
    let mut p2 = 0.0;
    for j in 0..n {
        let p3 = p2;
        p2 = p1;
        p1 = z * (2.0 / (j as f64 + 1.0)).sqrt() * p2 - (j as f64 / (j as f64 + 1.0)).sqrt() * p3;
    }
    (p1, (2.0 * n as f64).sqrt() * p2)
}

/// Gauss–Hermite rule for `∫ e^{−x²} g(x) dx` (physicists' weight), nodes ascending.
///
/// Positive roots are bracketed by sign changes on a scan finer than the
/// smallest root gap, then polished by safeguarded Newton steps.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut roots = Vec::with_capacity(n.div_ceil(2));
    if n % 2 == 1 {
        roots.push(0.0);
    }
    let top = (2.0 * n as f64 + 1.0).sqrt() + 1.0;
    let step = 0.2 * core::f64::consts::PI / (2.0 * n as f64 + 1.0).sqrt();
    let mut a = if n % 2 == 1 { 1e-3 * step } else { 0.0 };
    let mut fa = hermite_function(n, a).0;
    while a < top && roots.len() < n.div_ceil(2) {
        let b = a + step;
        let fb = hermite_function(n, b).0;
        if fa == 0.0 || fa.signum() != fb.signum() {
            let (mut lo, mut hi, flo) = (a, b, fa);
            let mut z = 0.5 * (lo + hi);
            for _ in 0..100 {
                let (p, dp) = hermite_function(n, z);
                if p == 0.0 {
                    break;
                }
                if p.signum() == flo.signum() {
                    lo = z;
                } else {
                    hi = z;
                }
                let newton = z - p / dp;
                let next = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
                let done = (next - z).abs() <= 4.0 * f64::EPSILON * z.abs().max(1.0);
                z = next;
                if done {
                    break;
                }
            }
            roots.push(z);
        }
        a = b;
        fa = fb;
    }
    let weight = |z: f64| {
        let (_, dp) = hermite_function(n, z);
        // ψ includes e^{−z²/2}; w = 2 / H̃'(z)² with H̃ the unweighted polynomial.
        (2f64.ln() - z * z - 2.0 * dp.abs().ln()).exp()
    };
    let mut x = Vec::with_capacity(n);
    let mut w = Vec::with_capacity(n);
    for &z in roots.iter().rev() {
        if z > 0.0 {
            x.push(-z);
            w.push(weight(z));
        }
    }
    for &z in &roots {
        x.push(z);
        w.push(weight(z));
    }
    (x, w)
}

/// Accumulates `∫ f(y) · g_k(y) dy` for a vector of integrands `g_k`, with per-integrand
/// absolute-value companions for convergence checks.
pub(crate) struct Accumulator {
    pub values: Vec<f64>,
    pub abs: Vec<f64>,
}

impl Accumulator {
    fn new(k: usize) -> Self {
        Self { values: vec![0.0; k], abs: vec![0.0; k] }
    }
}

/// Result of integrating several integrands against a mixture.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Integrals {
    pub values: Vec<f64>,
    /// `∫ f |g_k|`, the natural scale of each value.
    pub abs: Vec<f64>,
    pub converged: bool,
    pub cutoff_mass: f64,
    pub points: usize,
}

/// Standard normal tail bound `P(|Z| > z) ≤ 2φ(z)/z`.
fn two_sided_tail(z: f64) -> f64 {
    2.0 * (-0.5 * z * z).exp() / (z * 2.506_628_274_631_000_5)
}

/// Integrates `f(y)·g(y)` for every integrand written by `eval` into its output
/// slice. `eval(y, out)` fills `out` with the integrand values divided by `f`.
///
/// Single Gaussians use Gauss–Hermite (the integrands are polynomials in `y`).
/// Mixtures use a trapezoid rule on the `ε`-support, halving the spacing until
/// every integrand is stable to the relative tolerance of its absolute integral.
pub(crate) fn integrate<F>(m: &GaussianMixture, k: usize, cfg: &QuadratureConfig, mut eval: F) -> Result<Integrals>
where
    F: FnMut(f64, &mut [f64]),
{
    cfg.validate()?;
    let z_cut = (2.0 * (1.0 / cfg.tail_cutoff_ratio).ln()).sqrt();
    let cutoff_mass = two_sided_tail(z_cut);
    let mut buf = vec![0.0; k];
    if let [c] = m.components() {
        let s = c.variance.sqrt();
        let mut run = |n: usize| {
            let (x, w) = gauss_hermite(n);
            let mut acc = Accumulator::new(k);
            let norm = 1.0 / core::f64::consts::PI.sqrt();
            for (xi, wi) in x.iter().zip(&w) {
                let z = core::f64::consts::SQRT_2 * xi;
                if z.abs() > z_cut {
                    continue;
                }
                eval(c.mean + s * z, &mut buf);
                for j in 0..k {
                    acc.values[j] += norm * wi * buf[j];
                    acc.abs[j] += norm * wi * buf[j].abs();
                }
            }
            acc
        };
        let n = cfg.points_per_component;
        let coarse = run(n);
        let fine = run(2 * n);
        let converged = stable(&coarse, &fine, cfg.relative_tolerance);
        return Ok(Integrals { values: fine.values, abs: fine.abs, converged, cutoff_mass, points: 2 * n });
    }

    let s_max = m.max_std();
    let lo = m.components().iter().map(|c| c.mean).fold(f64::INFINITY, f64::min) - z_cut * s_max;
    let hi = m.components().iter().map(|c| c.mean).fold(f64::NEG_INFINITY, f64::max) + z_cut * s_max;
    let base = cfg.points_per_component * m.components().len();
    let mut intervals = base.max(((hi - lo) / (m.min_std() / 4.0)).ceil() as usize);
    let mut h = (hi - lo) / intervals as f64;
    let mut sums = Accumulator::new(k);
    let pdf_max = m.components().iter().map(|c| m.pdf(c.mean)).fold(0.0, f64::max);
    let floor = cfg.tail_cutoff_ratio * pdf_max;
    let mut add = |y: f64, weight: f64, sums: &mut Accumulator, buf: &mut [f64]| {
        let f = m.pdf(y);
        if f < floor {
            return;
        }
        eval(y, buf);
        for j in 0..k {
            sums.values[j] += weight * f * buf[j];
            sums.abs[j] += weight * f * buf[j].abs();
        }
    };
    for i in 0..=intervals {
        let wt = if i == 0 || i == intervals { 0.5 } else { 1.0 };
        add(lo + i as f64 * h, wt, &mut sums, &mut buf);
    }
    let mut prev = scaled(&sums, h);
    const MAX_HALVINGS: usize = 8;
    for _ in 0..MAX_HALVINGS {
        for i in 0..intervals {
            add(lo + (i as f64 + 0.5) * h, 1.0, &mut sums, &mut buf);
        }
        intervals *= 2;
        h *= 0.5;
        let next = scaled(&sums, h);
        if stable(&prev, &next, cfg.relative_tolerance) {
            return Ok(Integrals { values: next.values, abs: next.abs, converged: true, cutoff_mass, points: intervals + 1 });
        }
        prev = next;
    }
    Ok(Integrals { values: prev.values, abs: prev.abs, converged: false, cutoff_mass, points: intervals + 1 })
}

fn scaled(a: &Accumulator, h: f64) -> Accumulator {
    Accumulator { values: a.values.iter().map(|v| v * h).collect(), abs: a.abs.iter().map(|v| v * h).collect() }
}

fn stable(a: &Accumulator, b: &Accumulator, tol: f64) -> bool {
    a.values.iter().zip(&b.values).zip(&b.abs).all(|((x, y), s)| (x - y).abs() <= tol * s.max(f64::MIN_POSITIVE))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermite_rule_integrates_polynomials() {
        for n in [1usize, 2, 5, 20, 200, 400] {
            let (x, w) = gauss_hermite(n);
            let total: f64 = w.iter().sum();
            assert!((total - core::f64::consts::PI.sqrt()).abs() < 1e-12, "n={n}");
            assert!(x.windows(2).all(|p| p[0] < p[1]));
            if n >= 3 {
                let m2: f64 = x.iter().zip(&w).map(|(x, w)| w * x * x).sum();
                assert!((m2 - core::f64::consts::PI.sqrt() / 2.0).abs() < 1e-12, "n={n}");
            }
        }
    }

    #[test]
    fn config_validation() {
        assert!(QuadratureConfig::default().validate().is_ok());
        assert!(QuadratureConfig { points_per_component: 8, ..Default::default() }.validate().is_err());
        assert!(QuadratureConfig { tail_cutoff_ratio: 1.0, ..Default::default() }.validate().is_err());
    }

    #[test]
    fn mixture_mass_and_moments() {
        let m = GaussianMixture::from_triples(&[(0.3, -4.0, 0.7), (0.7, 3.0, 1.2)]).unwrap();
        let r = integrate(&m, 2, &QuadratureConfig::default(), |y, out| {
            out[0] = 1.0;
            out[1] = y * y;
        })
        .unwrap();
        assert!(r.converged);
        assert!((r.values[0] - 1.0).abs() < 1e-12);
        let want = 0.3 * (0.7 + 16.0) + 0.7 * (1.2 + 9.0);
        assert!((r.values[1] - want).abs() < 1e-10);
    }
}
