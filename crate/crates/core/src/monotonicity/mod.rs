//! Complete-monotonicity and log-convexity checks of Fisher information along
//! heat flow, and the two-point mixture sweep.
//!
//! Time derivatives `dⁿI/dtⁿ` come from the symbolic moment expressions and are
//! only integrated at the end; finite differences appear solely as a
//! cross-check.

mod scan;

use alloc::vec::Vec;

use num_traits::Float;

use crate::densities::{Density, GaussianMixture};
use crate::error::{Error, Result};
use crate::functionals::{entropy, fisher, moment_eval_many, Estimate, NumericExpr, QuadratureConfig};
use crate::moments::{derive_t, Calculus, Monomial, MomentExpr};

pub use scan::{
    cm_scan, lin_space, log_space, scan_point, HeatmapCell, LogConvexityViolation, ScanConfig, ScanPoint, ScanReport, ScanRow,
    ScanSummary, Violation,
};

/// Relative zero band: no sign claim when `|value| < ZERO_BAND · max(1, I)`.
pub const ZERO_BAND: f64 = 1e-10;
/// Richardson base step as a fraction of `t`.
pub const RICHARDSON_STEP: f64 = 1e-2;

/// `dⁿI/dtⁿ` expressions for `n = 0..=max_order`, ready for quadrature.
///
/// Quadrature runs on the unreduced chain `∂_tⁿ E_f[ρ_1²]`. The IBP normal form
/// of the same functional cancels far more heavily under floating point, so it
/// is only used to check the chain.
#[derive(Clone, Debug, PartialEq)]
pub struct DerivativeTable {
    exprs: Vec<NumericExpr>,
}

impl DerivativeTable {
    pub fn new(max_order: u32, calculus: &mut Calculus) -> Result<Self> {
        if max_order + 1 > calculus.cap() {
            return Err(Error::OrderExceedsCap { order: max_order, cap: calculus.cap() - 1 });
        }
        let mut chain = MomentExpr::monomial(Monomial::rho(1, 2));
        let mut exprs = Vec::with_capacity(max_order as usize + 1);
        for n in 0..=max_order {
            if n > 0 {
                chain = derive_t(&chain);
            }
            if calculus.reduce(&chain) != calculus.fisher_derivative(n)? {
                return Err(Error::InvalidArgument(alloc::format!("derivative chain disagrees with the normal form at order {n}")));
            }
            exprs.push(NumericExpr::from(&chain));
        }
        Ok(Self { exprs })
    }

    pub fn max_order(&self) -> u32 {
        self.exprs.len() as u32 - 1
    }

    pub fn exprs(&self) -> &[NumericExpr] {
        &self.exprs
    }

    /// Replace the expression of one order (fault injection for tests and drills).
    pub fn with_expr(mut self, order: u32, expr: NumericExpr) -> Self {
        self.exprs[order as usize] = expr;
        self
    }

    /// Negate one order's expression.
    pub fn corrupted(self, order: u32) -> Self {
        let mut e = self.exprs[order as usize].clone();
        e.terms_mut().iter_mut().for_each(|(c, _)| *c = -*c);
        self.with_expr(order, e)
    }

    pub fn evaluate(&self, m: &GaussianMixture, cfg: &QuadratureConfig) -> Result<Vec<Estimate>> {
        moment_eval_many(&self.exprs, m, cfg)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SignFlag {
    Ok,
    /// Quadrature did not converge.
    Unconverged,
    /// `|value|` is below the quadrature noise (`relative_tolerance · scale`) but above the zero band.
    Unresolved,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SignEntry {
    pub order: u32,
    pub value: f64,
    /// −1, 0 or +1; 0 inside the zero band.
    pub sign: i8,
    /// `(−1)ⁿ`.
    pub expected: i8,
    /// `|value| / zero band`.
    pub relative: f64,
    pub flag: SignFlag,
    pub richardson: Option<f64>,
}

impl SignEntry {
    pub fn is_violation(&self) -> bool {
        self.flag == SignFlag::Ok && self.sign != 0 && self.sign != self.expected
    }

    /// `(−1)ⁿ dⁿI/dtⁿ` divided by its quadrature scale: positive when the sign is as conjectured.
    pub fn margin(&self, scale: f64) -> f64 {
        self.expected as f64 * self.value / scale.max(f64::MIN_POSITIVE)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SignReport {
    pub t: f64,
    pub fisher: f64,
    pub zero_band: f64,
    pub entries: Vec<SignEntry>,
    /// Per-order quadrature scales, parallel to `entries`.
    pub scales: Vec<f64>,
}

impl SignReport {
    pub fn violations(&self) -> impl Iterator<Item = &SignEntry> {
        self.entries.iter().filter(|e| e.is_violation())
    }

    pub fn flagged(&self) -> usize {
        self.entries.iter().filter(|e| e.flag != SignFlag::Ok).count()
    }

    pub fn min_margin(&self) -> f64 {
        self.entries
            .iter()
            .zip(&self.scales)
            .filter(|(e, _)| e.flag == SignFlag::Ok)
            .map(|(e, &s)| e.margin(s))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn values(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.value).collect()
    }
}

fn expected_sign(n: u32) -> i8 {
    if n % 2 == 0 {
        1
    } else {
        -1
    }
}

fn entries_from(estimates: &[Estimate], cfg: &QuadratureConfig) -> (f64, f64, Vec<SignEntry>, Vec<f64>) {
    let fisher = estimates[0].value;
    let zero_band = ZERO_BAND * fisher.abs().max(1.0);
    let entries = estimates
        .iter()
        .enumerate()
        .map(|(n, e)| {
            let sign = if e.value.abs() < zero_band { 0 } else { e.value.signum() as i8 };
            let flag = if !e.converged {
                SignFlag::Unconverged
            } else if sign != 0 && e.value.abs() <= cfg.relative_tolerance * e.scale {
                SignFlag::Unresolved
            } else {
                SignFlag::Ok
            };
            SignEntry {
                order: n as u32,
                value: e.value,
                sign,
                expected: expected_sign(n as u32),
                relative: e.value.abs() / zero_band,
                flag,
                richardson: None,
            }
        })
        .collect();
    (fisher, zero_band, entries, estimates.iter().map(|e| e.scale).collect())
}

/// Sign table of `dⁿI/dtⁿ` at `t` for `n = 0..=table.max_order()`.
pub fn sign_table(m: &GaussianMixture, t: f64, table: &DerivativeTable, cfg: &QuadratureConfig) -> Result<SignReport> {
    if !(t > 0.0) {
        return Err(Error::OutOfRange { what: "t", value: t, range: "(0, inf)" });
    }
    let evolved = m.evolve(t)?;
    let estimates = table.evaluate(&evolved, cfg)?;
    let (fisher, zero_band, entries, scales) = entries_from(&estimates, cfg);
    Ok(SignReport { t, fisher, zero_band, entries, scales })
}

/// [`sign_table`] plus the Richardson column for orders `1..=min(4, max_order)`.
pub fn sign_table_with_richardson(
    m: &GaussianMixture,
    t: f64,
    table: &DerivativeTable,
    cfg: &QuadratureConfig,
) -> Result<SignReport> {
    let mut report = sign_table(m, t, table, cfg)?;
    for entry in report.entries.iter_mut().skip(1).take(4) {
        entry.richardson = Some(richardson_derivative(m, t, entry.order, cfg)?);
    }
    Ok(report)
}

/// Central difference stencils (offsets `−k..=k`) for derivatives 1 to 4.
fn stencil(order: u32) -> &'static [f64] {
    match order {
        1 => &[-0.5, 0.0, 0.5],
        2 => &[1.0, -2.0, 1.0],
        3 => &[-0.5, 1.0, 0.0, -1.0, 0.5],
        4 => &[1.0, -4.0, 6.0, -4.0, 1.0],
        _ => &[],
    }
}

/// `dⁿI/dtⁿ` from central differences of `I(evolve(m, t))` at steps `h, 2h, 4h`
/// (`h = RICHARDSON_STEP · t`), extrapolated twice in `h²`.
pub fn richardson_derivative(m: &GaussianMixture, t: f64, order: u32, cfg: &QuadratureConfig) -> Result<f64> {
    if !(1..=4).contains(&order) {
        return Err(Error::OutOfRange { what: "order", value: order as f64, range: "[1, 4]" });
    }
    if !(t > 0.0) {
        return Err(Error::OutOfRange { what: "t", value: t, range: "(0, inf)" });
    }
    let w = stencil(order);
    let k = (w.len() / 2) as i32;
    let h = RICHARDSON_STEP * t;
    let info = |s: f64| -> Result<f64> { Ok(fisher(&Density::Mixture(m.evolve(s)?), cfg)?.value) };
    let diff = |step: f64| -> Result<f64> {
        let mut acc = 0.0;
        for (j, c) in w.iter().enumerate() {
            if *c != 0.0 {
                acc += c * info(t + (j as i32 - k) as f64 * step)?;
            }
        }
        Ok(acc / step.powi(order as i32))
    };
    let (d1, d2, d4) = (diff(h)?, diff(2.0 * h)?, diff(4.0 * h)?);
    let r1 = (4.0 * d1 - d2) / 3.0;
    let r2 = (4.0 * d2 - d4) / 3.0;
    Ok((16.0 * r1 - r2) / 15.0)
}

#[derive(Clone, Debug, PartialEq)]
pub struct LogConvexityReport {
    pub t: f64,
    /// `I·I″ − (I′)²`.
    pub function_margin: f64,
    pub function_ok: bool,
    /// `|g_{n−1}||g_{n+1}| − g_n²` for `n = 1..max_order`.
    pub sequence_margins: Vec<f64>,
    pub sequence_ok: bool,
    pub converged: bool,
}

impl LogConvexityReport {
    pub fn holds(&self) -> bool {
        self.function_ok && self.sequence_ok
    }
}

/// Log-convexity of `t ↦ I(Y_t)` and of the derivative sequence `|dⁿI/dtⁿ|`.
pub fn log_convexity_from_values(t: f64, values: &[f64], scales: &[f64], converged: bool, tol: f64) -> LogConvexityReport {
    let band = |a: f64, b: f64| ZERO_BAND.max(tol) * (a * b).abs().max(f64::MIN_POSITIVE);
    let (i0, i1, i2) = (values[0], values[1], values[2]);
    let function_margin = i0 * i2 - i1 * i1;
    let function_noise = tol * (scales[0] * scales[2] + scales[1] * scales[1]);
    let function_ok = function_margin >= -(band(i0, i2) + function_noise);
    let mut sequence_margins = Vec::new();
    let mut sequence_ok = true;
    for n in 1..values.len() - 1 {
        let m = (values[n - 1] * values[n + 1]).abs() - values[n] * values[n];
        let noise = tol * (scales[n - 1] * values[n + 1].abs() + values[n - 1].abs() * scales[n + 1] + 2.0 * scales[n] * values[n].abs());
        sequence_ok &= m >= -(band(values[n - 1], values[n + 1]) + noise);
        sequence_margins.push(m);
    }
    LogConvexityReport { t, function_margin, function_ok, sequence_margins, sequence_ok, converged }
}

pub fn log_convexity_check(m: &GaussianMixture, t: f64, table: &DerivativeTable, cfg: &QuadratureConfig) -> Result<LogConvexityReport> {
    if table.max_order() < 2 {
        return Err(Error::InvalidArgument("log-convexity needs derivatives up to order 2".into()));
    }
    let report = sign_table(m, t, table, cfg)?;
    let converged = report.entries.iter().all(|e| e.flag != SignFlag::Unconverged);
    Ok(log_convexity_from_values(t, &report.values(), &report.scales, converged, cfg.relative_tolerance))
}

/// One row of a heat-flow curve.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowPoint {
    pub t: f64,
    pub entropy: f64,
    pub fisher: f64,
    /// `dⁿI/dtⁿ` for `n = 1..=max_order`.
    pub derivatives: Vec<f64>,
    pub converged: bool,
}

pub fn flow_curve(m: &GaussianMixture, ts: &[f64], table: &DerivativeTable, cfg: &QuadratureConfig) -> Result<Vec<FlowPoint>> {
    ts.iter()
        .map(|&t| {
            let evolved = m.evolve(t)?;
            let h = entropy(&Density::Mixture(evolved.clone()), cfg)?;
            let est = table.evaluate(&evolved, cfg)?;
            Ok(FlowPoint {
                t,
                entropy: h.value,
                fisher: est[0].value,
                derivatives: est[1..].iter().map(|e| e.value).collect(),
                converged: h.converged && est.iter().all(|e| e.converged),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: u32) -> f64 {
        (1..=n).map(|k| k as f64).product()
    }

    #[test]
    fn gaussian_table_is_exact() {
        let mut calc = Calculus::default();
        let table = DerivativeTable::new(6, &mut calc).unwrap();
        let m = GaussianMixture::gaussian(0.0, 1.0).unwrap();
        let r = sign_table(&m, 1.0, &table, &QuadratureConfig::default()).unwrap();
        for e in &r.entries {
            let n = e.order;
            let want = if n % 2 == 0 { 1.0 } else { -1.0 } * factorial(n) / 2f64.powi(n as i32 + 1);
            assert!((e.value - want).abs() <= 1e-8 * want.abs(), "n={n}: {} vs {want}", e.value);
            assert_eq!(e.sign, e.expected);
            assert_eq!(e.flag, SignFlag::Ok);
        }
    }

    #[test]
    fn separated_symmetric_mixture_alternates() {
        let mut calc = Calculus::default();
        let table = DerivativeTable::new(7, &mut calc).unwrap();
        let m = GaussianMixture::two_point(0.5, 10.0).unwrap();
        let r = sign_table(&m, 1.0, &table, &QuadratureConfig::default()).unwrap();
        assert_eq!(r.violations().count(), 0);
        assert!(r.entries.iter().all(|e| e.sign == e.expected));
    }

    #[test]
    fn first_derivative_negative() {
        let mut calc = Calculus::default();
        let table = DerivativeTable::new(1, &mut calc).unwrap();
        let m = GaussianMixture::from_triples(&[(0.2, -3.0, 0.4), (0.8, 1.0, 2.0)]).unwrap();
        for t in [0.05, 0.5, 5.0] {
            assert_eq!(sign_table(&m, t, &table, &QuadratureConfig::default()).unwrap().entries[1].sign, -1);
        }
    }

    #[test]
    fn corruption_is_detected() {
        let mut calc = Calculus::default();
        let table = DerivativeTable::new(5, &mut calc).unwrap().corrupted(3);
        let m = GaussianMixture::two_point(0.3, 2.0).unwrap();
        let r = sign_table(&m, 0.5, &table, &QuadratureConfig::default()).unwrap();
        let orders: Vec<u32> = r.violations().map(|e| e.order).collect();
        assert_eq!(orders, [3]);
    }

    #[test]
    fn order_cap() {
        let mut calc = Calculus::default();
        assert!(DerivativeTable::new(8, &mut calc).is_err());
    }

    #[test]
    fn richardson_matches_symbolic() {
        let mut calc = Calculus::default();
        let table = DerivativeTable::new(4, &mut calc).unwrap();
        let cfg = QuadratureConfig::default();
        for m in [GaussianMixture::gaussian(0.0, 1.0).unwrap(), GaussianMixture::two_point(0.3, 3.0).unwrap()] {
            let r = sign_table_with_richardson(&m, 1.0, &table, &cfg).unwrap();
            for e in &r.entries[1..] {
                let fd = e.richardson.unwrap();
                assert!((fd - e.value).abs() <= 1e-5 * e.value.abs(), "order {}: {fd} vs {}", e.order, e.value);
            }
        }
    }

    #[test]
    fn gaussian_log_convexity() {
        let mut calc = Calculus::default();
        let table = DerivativeTable::new(5, &mut calc).unwrap();
        let m = GaussianMixture::gaussian(0.0, 1.0).unwrap();
        let r = log_convexity_check(&m, 1.0, &table, &QuadratureConfig::default()).unwrap();
        assert!((r.function_margin - 1.0 / 16.0).abs() < 1e-10);
        assert!(r.holds());
        let sep = GaussianMixture::two_point(0.5, 10.0).unwrap();
        for t in [0.01, 0.1, 1.0, 10.0] {
            assert!(log_convexity_check(&sep, t, &table, &QuadratureConfig::default()).unwrap().holds());
        }
    }

    #[test]
    fn flow_curve_gaussian() {
        let mut calc = Calculus::default();
        let table = DerivativeTable::new(4, &mut calc).unwrap();
        let m = GaussianMixture::gaussian(0.0, 1.0).unwrap();
        let rows = flow_curve(&m, &[0.1, 1.0, 10.0], &table, &QuadratureConfig::default()).unwrap();
        for r in rows {
            let s = 1.0 + r.t;
            assert!((r.fisher - 1.0 / s).abs() < 1e-12);
            assert!((r.entropy - 0.5 * (2.0 * core::f64::consts::PI * core::f64::consts::E * s).ln()).abs() < 1e-12);
            assert_eq!(r.derivatives.len(), 4);
        }
    }
}
