use alloc::vec::Vec;

use num_traits::Float;

use super::{log_convexity_from_values, sign_table, DerivativeTable, LogConvexityReport, SignFlag, SignReport};
use crate::densities::GaussianMixture;
use crate::error::{Error, Result};
use crate::functionals::QuadratureConfig;

/// Sweep over the two-point family `λ N(0,1) + (1−λ) N(d,1)` evolved to time `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScanConfig {
    pub lambdas: Vec<f64>,
    pub ds: Vec<f64>,
    pub ts: Vec<f64>,
    pub max_order: u32,
    pub quadrature: QuadratureConfig,
    pub check_log_convexity: bool,
}

/// `count` log-spaced points from `start` to `stop` inclusive.
pub fn log_space(start: f64, stop: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => alloc::vec![start],
        _ => {
            let (a, b) = (start.ln(), stop.ln());
            (0..count).map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp()).collect()
        }
    }
}

/// `start, start+step, …` up to `stop` (inclusive within rounding).
pub fn lin_space(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    (0..=n).map(|i| start + i as f64 * step).collect()
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            lambdas: lin_space(0.05, 0.5, 0.05),
            ds: lin_space(0.5, 20.0, 0.5),
            ts: log_space(1e-2, 10.0, 40),
            max_order: 7,
            quadrature: QuadratureConfig::default(),
            check_log_convexity: true,
        }
    }
}

impl ScanConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(&l) = self.lambdas.iter().find(|l| !(**l > 0.0 && **l < 1.0)) {
            return Err(Error::OutOfRange { what: "lambda", value: l, range: "(0, 1)" });
        }
        if let Some(&d) = self.ds.iter().find(|d| !(**d >= 0.0 && d.is_finite())) {
            return Err(Error::OutOfRange { what: "d", value: d, range: "[0, inf)" });
        }
        if let Some(&t) = self.ts.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
            return Err(Error::OutOfRange { what: "t", value: t, range: "(0, inf)" });
        }
        if self.check_log_convexity && self.max_order < 2 {
            return Err(Error::InvalidArgument("log-convexity needs max order at least 2".into()));
        }
        self.quadrature.validate()
    }

    pub fn point_count(&self) -> usize {
        self.lambdas.len() * self.ds.len() * self.ts.len()
    }

    /// Grid points in enumeration order: λ slowest, t fastest.
    pub fn points(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.lambdas
            .iter()
            .flat_map(move |&l| self.ds.iter().flat_map(move |&d| self.ts.iter().map(move |&t| (l, d, t))))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanPoint {
    pub lambda: f64,
    pub d: f64,
    pub t: f64,
    pub report: SignReport,
    pub log_convexity: Option<LogConvexityReport>,
}

pub fn scan_point(table: &DerivativeTable, cfg: &ScanConfig, lambda: f64, d: f64, t: f64) -> Result<ScanPoint> {
    let m = GaussianMixture::two_point(lambda, d)?;
    let report = sign_table(&m, t, table, &cfg.quadrature)?;
    let log_convexity = cfg.check_log_convexity.then(|| {
        let converged = report.entries.iter().all(|e| e.flag != SignFlag::Unconverged);
        log_convexity_from_values(t, &report.values(), &report.scales, converged, cfg.quadrature.relative_tolerance)
    });
    Ok(ScanPoint { lambda, d, t, report, log_convexity })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanRow {
    pub lambda: f64,
    pub d: f64,
    pub t: f64,
    pub order: u32,
    pub value: f64,
    pub sign: i8,
    pub flag: SignFlag,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Violation {
    pub lambda: f64,
    pub d: f64,
    pub t: f64,
    pub order: u32,
    pub value: f64,
    pub zero_band: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogConvexityViolation {
    pub lambda: f64,
    pub d: f64,
    pub t: f64,
    pub function_margin: f64,
    /// Most negative sequence margin and its index `n`.
    pub worst_sequence_margin: f64,
    pub worst_index: u32,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HeatmapCell {
    pub lambda: f64,
    pub d: f64,
    /// Smallest normalized sign margin over `t` and orders.
    pub min_margin: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ScanSummary {
    pub points: usize,
    pub entries: usize,
    pub violations: usize,
    pub unconverged: usize,
    pub unresolved: usize,
    pub zero_band: usize,
    pub log_convexity_checked: usize,
    pub log_convexity_violations: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanReport {
    pub config: ScanConfig,
    pub rows: Vec<ScanRow>,
    pub violations: Vec<Violation>,
    pub log_convexity_violations: Vec<LogConvexityViolation>,
    pub heatmap: Vec<HeatmapCell>,
    pub summary: ScanSummary,
}

impl ScanReport {
    /// Merge points given in the configuration's enumeration order.
    pub fn assemble(config: ScanConfig, points: impl IntoIterator<Item = ScanPoint>) -> Self {
        let mut rows = Vec::new();
        let mut violations = Vec::new();
        let mut lc_violations = Vec::new();
        let mut heatmap: Vec<HeatmapCell> = Vec::new();
        let mut summary = ScanSummary::default();
        for p in points {
            summary.points += 1;
            for e in &p.report.entries {
                summary.entries += 1;
                match e.flag {
                    SignFlag::Unconverged => summary.unconverged += 1,
                    SignFlag::Unresolved => summary.unresolved += 1,
                    SignFlag::Ok if e.sign == 0 => summary.zero_band += 1,
                    SignFlag::Ok => {}
                }
                if e.is_violation() {
                    violations.push(Violation {
                        lambda: p.lambda,
                        d: p.d,
                        t: p.t,
                        order: e.order,
                        value: e.value,
                        zero_band: p.report.zero_band,
                    });
                }
                rows.push(ScanRow { lambda: p.lambda, d: p.d, t: p.t, order: e.order, value: e.value, sign: e.sign, flag: e.flag });
            }
            if let Some(lc) = &p.log_convexity {
                if lc.converged {
                    summary.log_convexity_checked += 1;
                    if !lc.holds() {
                        let (worst_index, worst) = lc
                            .sequence_margins
                            .iter()
                            .enumerate()
                            .fold((0, f64::INFINITY), |acc, (i, &m)| if m < acc.1 { (i + 1, m) } else { acc });
                        lc_violations.push(LogConvexityViolation {
                            lambda: p.lambda,
                            d: p.d,
                            t: p.t,
                            function_margin: lc.function_margin,
                            worst_sequence_margin: worst,
                            worst_index: worst_index as u32,
                        });
                    }
                }
            }
            let margin = p.report.min_margin();
            match heatmap.last_mut() {
                Some(cell) if cell.lambda == p.lambda && cell.d == p.d => cell.min_margin = cell.min_margin.min(margin),
                _ => heatmap.push(HeatmapCell { lambda: p.lambda, d: p.d, min_margin: margin }),
            }
        }
        summary.violations = violations.len();
        summary.log_convexity_violations = lc_violations.len();
        Self { config, rows, violations, log_convexity_violations: lc_violations, heatmap, summary }
    }

    pub fn has_violations(&self) -> bool {
        self.summary.violations > 0 || self.summary.log_convexity_violations > 0
    }
}

/// Sequential sweep; see [`scan_point`] and [`ScanReport::assemble`] for parallel drivers.
pub fn cm_scan(cfg: &ScanConfig, table: &DerivativeTable) -> Result<ScanReport> {
    cfg.validate()?;
    if table.max_order() < cfg.max_order {
        return Err(Error::InvalidArgument("derivative table shorter than the scan's max order".into()));
    }
    let points = cfg.points().map(|(l, d, t)| scan_point(table, cfg, l, d, t)).collect::<Result<Vec<_>>>()?;
    Ok(ScanReport::assemble(cfg.clone(), points))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::Calculus;

    fn small(max_order: u32) -> ScanConfig {
        ScanConfig {
            lambdas: alloc::vec![0.1, 0.5],
            ds: alloc::vec![0.0, 1.0, 5.0],
            ts: log_space(0.01, 10.0, 4),
            max_order,
            ..Default::default()
        }
    }

    #[test]
    fn default_grid_shape() {
        let c = ScanConfig::default();
        assert_eq!((c.lambdas.len(), c.ds.len(), c.ts.len()), (10, 40, 40));
        assert!((c.lambdas[9] - 0.5).abs() < 1e-12 && (c.ds[39] - 20.0).abs() < 1e-12);
        assert!((c.ts[0] - 0.01).abs() < 1e-15 && (c.ts[39] - 10.0).abs() < 1e-12);
    }

    #[test]
    fn small_scan_is_clean() {
        let mut calc = Calculus::default();
        let table = DerivativeTable::new(5, &mut calc).unwrap();
        let r = cm_scan(&small(5), &table).unwrap();
        assert_eq!(r.summary.points, 24);
        assert_eq!(r.summary.violations, 0);
        assert_eq!(r.summary.log_convexity_violations, 0);
        assert_eq!(r.heatmap.len(), 6);
        assert!(r.heatmap.iter().all(|c| c.min_margin > 0.0));
    }

    #[test]
    fn degenerate_line_matches_gaussian() {
        let mut calc = Calculus::default();
        let table = DerivativeTable::new(5, &mut calc).unwrap();
        let cfg = small(5);
        for &t in &cfg.ts {
            let p = scan_point(&table, &cfg, 0.3, 0.0, t).unwrap();
            let mut fact = 1.0;
            for e in &p.report.entries {
                if e.order > 0 {
                    fact *= e.order as f64;
                }
                let want = e.expected as f64 * fact / (1.0 + t).powi(e.order as i32 + 1);
                assert!((e.value - want).abs() <= 1e-8 * want.abs(), "t={t} n={}", e.order);
            }
        }
    }

    #[test]
    fn corrupted_table_reports_violations_at_that_order() {
        let mut calc = Calculus::default();
        let table = DerivativeTable::new(4, &mut calc).unwrap().corrupted(2);
        let cfg = ScanConfig { check_log_convexity: false, ..small(4) };
        let r = cm_scan(&cfg, &table).unwrap();
        assert_eq!(r.summary.violations, cfg.point_count());
        assert!(r.violations.iter().all(|v| v.order == 2));
        assert!(r.has_violations());
    }

    #[test]
    fn invalid_config() {
        let mut calc = Calculus::default();
        let table = DerivativeTable::new(3, &mut calc).unwrap();
        let bad = ScanConfig { lambdas: alloc::vec![1.0], ..small(3) };
        assert!(cm_scan(&bad, &table).is_err());
        let bad_t = ScanConfig { ts: alloc::vec![0.0], ..small(3) };
        assert!(cm_scan(&bad_t, &table).is_err());
    }
}
