//! Numerical functionals of densities: entropy, Fisher information, moment
//! expressions `E_f[·]`, certificate integrands, entropy-power gaps, channel
//! capacity and forward Laplace transforms.

mod quadrature;

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;

use crate::certificates::{builtin, SosCertificate};
use crate::densities::{convolve, Density, DensityGrid, GaussianMixture, ScoreScratch};
use crate::error::{Error, Result};
use crate::moments::MomentExpr;
use crate::rational::to_f64;

pub use quadrature::{gauss_hermite, QuadratureConfig};

/// A quadrature value with its diagnostics.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    /// `Σ |c_m| E[|m|]`; cancellation below `relative_tolerance · scale` is noise.
    pub scale: f64,
    pub converged: bool,
    /// Bound on the density mass excluded by the tail cutoff.
    pub cutoff_mass: f64,
    pub points: usize,
    /// Largest `ρ` index the integrand needed.
    pub max_index: usize,
}

/// Floating-point image of a [`MomentExpr`].
#[derive(Clone, Debug, PartialEq)]
pub struct NumericExpr {
    terms: Vec<(f64, Vec<(usize, u32)>)>,
}

impl NumericExpr {
    pub fn new(terms: Vec<(f64, Vec<(usize, u32)>)>) -> Self {
        Self { terms }
    }

    pub fn terms(&self) -> &[(f64, Vec<(usize, u32)>)] {
        &self.terms
    }

    pub fn terms_mut(&mut self) -> &mut [(f64, Vec<(usize, u32)>)] {
        &mut self.terms
    }

    pub fn max_index(&self) -> usize {
        self.terms.iter().flat_map(|(_, f)| f.iter().map(|&(i, _)| i)).max().unwrap_or(0)
    }

    /// Pointwise value given `rho[i] = ρ_i`.
    pub fn eval(&self, rho: &[f64]) -> f64 {
        self.terms.iter().map(|(c, f)| c * monomial_value(f, rho)).sum()
    }
}

impl From<&MomentExpr> for NumericExpr {
    fn from(e: &MomentExpr) -> Self {
        Self { terms: e.terms().map(|(m, c)| (to_f64(c), m.factors().collect())).collect() }
    }
}

fn monomial_value(factors: &[(usize, u32)], rho: &[f64]) -> f64 {
    factors.iter().map(|&(i, a)| rho[i].powi(a as i32)).product()
}

fn mixture_of(d: &Density) -> Result<&GaussianMixture> {
    match d {
        Density::Mixture(m) => Ok(m),
        Density::Grid(_) => {
            Err(Error::InvalidArgument("score-ratio moments need an analytic mixture, not a sampled grid".into()))
        }
    }
}

/// Evaluates several expressions on one mixture, integrating each distinct monomial once.
pub fn moment_eval_many(exprs: &[NumericExpr], m: &GaussianMixture, cfg: &QuadratureConfig) -> Result<Vec<Estimate>> {
    let mut index: BTreeMap<&[(usize, u32)], usize> = BTreeMap::new();
    for e in exprs {
        for (_, f) in &e.terms {
            let next = index.len();
            index.entry(f.as_slice()).or_insert(next);
        }
    }
    let mut monomials: Vec<&[(usize, u32)]> = vec![&[]; index.len()];
    for (f, &j) in &index {
        monomials[j] = f;
    }
    let max_index = exprs.iter().map(NumericExpr::max_index).max().unwrap_or(0);
    let mut scratch = ScoreScratch::default();
    let k = monomials.len();
    let values = quadrature::integrate(m, k, cfg, |y, out| {
        m.score_ratios(y, max_index, &mut scratch);
        for (slot, f) in out.iter_mut().zip(&monomials) {
            *slot = monomial_value(f, &scratch.rho);
        }
    })?;
    Ok(exprs
        .iter()
        .map(|e| {
            let mut value = 0.0;
            let mut scale = 0.0;
            for (c, f) in &e.terms {
                let j = index[f.as_slice()];
                value += c * values.values[j];
                scale += c.abs() * values.abs[j];
            }
            Estimate {
                value,
                scale,
                converged: values.converged,
                cutoff_mass: values.cutoff_mass,
                points: values.points,
                max_index: e.max_index(),
            }
        })
        .collect())
}

/// `Σ c_m ∫ f ∏ ρ_i^{a_i} dy`.
pub fn moment_eval(e: &MomentExpr, d: &Density, cfg: &QuadratureConfig) -> Result<Estimate> {
    let m = mixture_of(d)?;
    Ok(moment_eval_many(&[NumericExpr::from(e)], m, cfg)?.remove(0))
}

/// Differential entropy `−∫ f ln f` in nats.
pub fn entropy(d: &Density, cfg: &QuadratureConfig) -> Result<Estimate> {
    match d {
        Density::Mixture(m) => {
            let r = quadrature::integrate(m, 1, cfg, |y, out| out[0] = -m.log_pdf(y))?;
            Ok(Estimate {
                value: r.values[0],
                scale: r.abs[0],
                converged: r.converged,
                cutoff_mass: r.cutoff_mass,
                points: r.points,
                max_index: 0,
            })
        }
        Density::Grid(g) => Ok(grid_estimate(g, cfg, |i| {
            let f = g.values()[i];
            if f > 0.0 {
                -f * f.ln()
            } else {
                0.0
            }
        })),
    }
}

/// Fisher information `∫ f₁²/f`.
pub fn fisher(d: &Density, cfg: &QuadratureConfig) -> Result<Estimate> {
    match d {
        Density::Mixture(m) => Ok(moment_eval_many(&[NumericExpr::new(vec![(1.0, vec![(1, 2)])])], m, cfg)?.remove(0)),
        Density::Grid(g) => {
            let v = g.values();
            let h = g.spacing();
            let top = v.iter().cloned().fold(0.0, f64::max);
            let n = v.len();
            Ok(grid_estimate(g, cfg, |i| {
                let f = v[i];
                if f < cfg.tail_cutoff_ratio * top || f == 0.0 {
                    return 0.0;
                }
                let slope = if i == 0 {
                    (v[1] - v[0]) / h
                } else if i == n - 1 {
                    (v[n - 1] - v[n - 2]) / h
                } else {
                    (v[i + 1] - v[i - 1]) / (2.0 * h)
                };
                slope * slope / f
            }))
        }
    }
}

fn grid_estimate(g: &DensityGrid, cfg: &QuadratureConfig, mut integrand: impl FnMut(usize) -> f64) -> Estimate {
    let n = g.len();
    let mut value = 0.0;
    let mut scale = 0.0;
    for i in 0..n {
        let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
        let v = integrand(i);
        value += w * v;
        scale += w * v.abs();
    }
    let top = g.values().iter().cloned().fold(0.0, f64::max);
    let ends = g.values()[0].max(g.values()[n - 1]);
    Estimate {
        value: value * g.spacing(),
        scale: scale * g.spacing(),
        converged: true,
        cutoff_mass: if top > 0.0 && ends > cfg.tail_cutoff_ratio * top { ends * g.spacing() } else { 0.0 },
        points: n,
        max_index: 0,
    }
}

/// `sign · prefactor · ∫ f (Σ c_j P_j² + Σ d_l m_l)`, evaluated pointwise without expansion.
pub fn certificate_integral(c: &SosCertificate, m: &GaussianMixture, cfg: &QuadratureConfig) -> Result<Estimate> {
    c.validate()?;
    let squares: Vec<(f64, NumericExpr)> =
        c.squares.iter().map(|s| (to_f64(&s.coefficient), NumericExpr::from(&s.base))).collect();
    let remainders: Vec<(f64, Vec<(usize, u32)>)> =
        c.remainders.iter().map(|r| (to_f64(&r.coefficient), r.monomial.factors().collect())).collect();
    let max_index = squares
        .iter()
        .map(|(_, p)| p.max_index())
        .chain(remainders.iter().flat_map(|(_, f)| f.iter().map(|&(i, _)| i)))
        .max()
        .unwrap_or(0);
    let factor = c.sign.as_i32() as f64 * to_f64(&c.prefactor);
    let mut scratch = ScoreScratch::default();
    let r = quadrature::integrate(m, 1, cfg, |y, out| {
        m.score_ratios(y, max_index, &mut scratch);
        let rho = &scratch.rho;
        let mut acc = 0.0;
        for (w, p) in &squares {
            let v = p.eval(rho);
            acc += w * v * v;
        }
        for (w, f) in &remainders {
            acc += w * monomial_value(f, rho);
        }
        out[0] = acc;
    })?;
    Ok(Estimate {
        value: factor * r.values[0],
        scale: (factor * r.values[0]).abs(),
        converged: r.converged,
        cutoff_mass: r.cutoff_mass,
        points: r.points,
        max_index,
    })
}

/// `dⁿh/dtⁿ` from the printed sum-of-squares integrands, `n ∈ {2, 3, 4}`.
pub fn paper_derivative(n: u32, d: &Density, cfg: &QuadratureConfig) -> Result<Estimate> {
    let cert = match n {
        2..=4 => builtin(&format!("paper-n{n}")).expect("built-in certificate"),
        _ => return Err(Error::OutOfRange { what: "order", value: n as f64, range: "{2, 3, 4}" }),
    };
    certificate_integral(&cert, mixture_of(d)?, cfg)
}

/// Entropy-power terms of one EPI check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpiGap {
    /// `e^{2h(a∗b)} − e^{2h(a)} − e^{2h(b)}`.
    pub gap: f64,
    pub power_sum: f64,
    pub power_a: f64,
    pub power_b: f64,
    pub converged: bool,
}

/// Entropy-power gap. Mixture pairs convolve analytically; otherwise both are
/// sampled at a common spacing and convolved on the grid.
pub fn epi_gap(a: &Density, b: &Density, cfg: &QuadratureConfig) -> Result<EpiGap> {
    let (sum, a, b) = match (a, b) {
        (Density::Mixture(x), Density::Mixture(y)) => (Density::Mixture(x.convolve(y)), a.clone(), b.clone()),
        _ => {
            let h = [a, b]
                .iter()
                .map(|d| match d {
                    Density::Mixture(m) => m.min_std() / crate::densities::POINTS_PER_STD,
                    Density::Grid(g) => g.spacing(),
                })
                .fold(f64::INFINITY, f64::min);
            let ga = on_grid(a, h)?;
            let gb = on_grid(b, h)?;
            (Density::Grid(convolve(&ga, &gb)?), Density::Grid(ga), Density::Grid(gb))
        }
    };
    let hs = entropy(&sum, cfg)?;
    let ha = entropy(&a, cfg)?;
    let hb = entropy(&b, cfg)?;
    let (ps, pa, pb) = ((2.0 * hs.value).exp(), (2.0 * ha.value).exp(), (2.0 * hb.value).exp());
    Ok(EpiGap {
        gap: ps - pa - pb,
        power_sum: ps,
        power_a: pa,
        power_b: pb,
        converged: hs.converged && ha.converged && hb.converged,
    })
}

/// Entropy power `e^{2h}` of one density.
pub fn entropy_power(d: &Density, cfg: &QuadratureConfig) -> Result<f64> {
    Ok((2.0 * entropy(d, cfg)?.value).exp())
}

fn on_grid(d: &Density, h: f64) -> Result<DensityGrid> {
    match d {
        Density::Mixture(m) => DensityGrid::sample_with_spacing(m, h),
        Density::Grid(g) if (g.spacing() - h).abs() <= 1e-9 * h => Ok(g.clone()),
        Density::Grid(g) => Err(Error::SpacingMismatch(g.spacing(), h)),
    }
}

/// Gaussian channel capacity `½ ln(1 + P/t)` in nats.
pub fn capacity(power: f64, noise: f64) -> Result<f64> {
    if !(power.is_finite() && noise.is_finite()) {
        return Err(Error::NonFinite("capacity"));
    }
    if power <= 0.0 {
        return Err(Error::OutOfRange { what: "P", value: power, range: "(0, inf)" });
    }
    if noise <= 0.0 {
        return Err(Error::OutOfRange { what: "t", value: noise, range: "(0, inf)" });
    }
    Ok(0.5 * (power / noise).ln_1p())
}

/// A hypothesized representing measure on `[0, ∞)`: an atom at zero plus a
/// density sampled at `x_i = i · spacing`.
#[derive(Clone, Debug, PartialEq)]
pub struct LaplaceMeasure {
    pub spacing: f64,
    pub density: Vec<f64>,
    pub atom_at_zero: f64,
}

impl LaplaceMeasure {
    pub fn from_fn(spacing: f64, upper: f64, atom_at_zero: f64, f: impl Fn(f64) -> f64) -> Self {
        let n = (upper / spacing).round() as usize + 1;
        Self { spacing, density: (0..n).map(|i| f(i as f64 * spacing)).collect(), atom_at_zero }
    }
}

/// Relative size of the last sample above which the tail is considered truncated.
pub const LAPLACE_TRUNCATION_RATIO: f64 = 1e-10;

/// `∫ e^{−xt} dμ(x)` by composite Simpson; `converged` is false when the
/// samples have visible mass at the right endpoint.
pub fn laplace_forward(mu: &LaplaceMeasure, t: f64) -> Result<Estimate> {
    if !t.is_finite() || !mu.spacing.is_finite() {
        return Err(Error::NonFinite("laplace_forward"));
    }
    if t <= 0.0 {
        return Err(Error::OutOfRange { what: "t", value: t, range: "(0, inf)" });
    }
    if mu.spacing <= 0.0 {
        return Err(Error::InvalidArgument("measure spacing must be positive".into()));
    }
    if mu.atom_at_zero < 0.0 || mu.density.iter().any(|v| !(*v >= 0.0)) {
        return Err(Error::InvalidArgument("representing measure must be nonnegative".into()));
    }
    let h = mu.spacing;
    let g: Vec<f64> = mu.density.iter().enumerate().map(|(i, v)| v * (-(i as f64) * h * t).exp()).collect();
    let n = g.len();
    let mut value = 0.0;
    if n >= 2 {
        let intervals = n - 1;
        let even = intervals - intervals % 2;
        for i in (0..even).step_by(2) {
            value += h / 3.0 * (g[i] + 4.0 * g[i + 1] + g[i + 2]);
        }
        if even < intervals {
            value += 0.5 * h * (g[n - 2] + g[n - 1]);
        }
    }
    value += mu.atom_at_zero;
    let top = mu.density.iter().cloned().fold(0.0, f64::max);
    let last = mu.density.last().copied().unwrap_or(0.0);
    let truncated = top > 0.0 && last > LAPLACE_TRUNCATION_RATIO * top;
    Ok(Estimate {
        value,
        scale: value.abs(),
        converged: !truncated,
        cutoff_mass: if truncated { last / t } else { 0.0 },
        points: n,
        max_index: 0,
    })
}
