use alloc::vec::Vec;

use num_traits::Float;

use crate::error::{Error, Result};

const INV_ITERATIONS: usize = 200;
const INV_TOLERANCE: f64 = 1e-14;
/// Convexity is declared when every second difference is at least `−MGL_TOLERANCE`.
pub const MGL_TOLERANCE: f64 = 1e-10;

fn check_unit(what: &'static str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::OutOfRange { what, value: p, range: "[0, 1]" });
    }
    Ok(())
}

fn h2(p: f64) -> f64 {
    let term = |x: f64| if x > 0.0 { -x * x.log2() } else { 0.0 };
    term(p) + term(1.0 - p)
}

/// `H(p) = −p log₂ p − (1−p) log₂(1−p)`.
pub fn binary_entropy(p: f64) -> Result<f64> {
    check_unit("p", p)?;
    Ok(h2(p))
}

/// The branch of `H⁻¹` in `[0, ½]`, by bisection.
pub fn binary_entropy_inv(x: f64) -> Result<f64> {
    check_unit("x", x)?;
    if x == 1.0 {
        // H is flat to rounding near ½.
        return Ok(0.5);
    }
    let (mut lo, mut hi) = (0.0f64, 0.5f64);
    for _ in 0..INV_ITERATIONS {
        if hi - lo <= INV_TOLERANCE {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if h2(mid) < x {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // Endpoint closest in H.
    Ok(if (h2(lo) - x).abs() <= (h2(hi) - x).abs() { lo } else { hi })
}

/// `p ∗ q = p(1−q) + (1−p)q`.
pub fn binary_convolve(p: f64, q: f64) -> Result<f64> {
    check_unit("p", p)?;
    check_unit("q", q)?;
    Ok((p * (1.0 - q) + (1.0 - p) * q).clamp(0.0, 1.0))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvexityReport {
    pub p: f64,
    /// `H(p ∗ g(x_i))`.
    pub values: Vec<f64>,
    /// Smallest undivided second difference and where it occurs.
    pub min_second_difference: f64,
    pub argmin: Option<f64>,
    pub convex: bool,
}

/// Second-difference convexity test of `x ↦ H(p ∗ g(x))` on a grid.
pub fn mgl_scan(p: f64, xs: &[f64], gs: &[f64]) -> Result<ConvexityReport> {
    check_unit("p", p)?;
    if xs.len() != gs.len() {
        return Err(Error::InvalidArgument("x grid and g samples differ in length".into()));
    }
    let mut values = Vec::with_capacity(gs.len());
    for &g in gs {
        check_unit("g(x)", g)?;
        values.push(h2(binary_convolve(p, g)?));
    }
    let mut min = f64::INFINITY;
    let mut argmin = None;
    for i in 1..values.len().saturating_sub(1) {
        let d2 = values[i - 1] - 2.0 * values[i] + values[i + 1];
        if d2 < min {
            min = d2;
            argmin = Some(xs[i]);
        }
    }
    Ok(ConvexityReport { p, values, min_second_difference: min, argmin, convex: min >= -MGL_TOLERANCE })
}

/// The standard MGL curve `g = H⁻¹` on `n` equally spaced points of `[0, 1]`.
pub fn mgl_curve(p: f64, n: usize) -> Result<ConvexityReport> {
    if n < 3 {
        return Err(Error::InvalidArgument("MGL grid needs at least three points".into()));
    }
    let xs: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
    let gs = xs.iter().map(|&x| binary_entropy_inv(x)).collect::<Result<Vec<_>>>()?;
    mgl_scan(p, &xs, &gs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entropy_endpoints() {
        assert_eq!(binary_entropy(0.5).unwrap(), 1.0);
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        assert!(binary_entropy(1.5).is_err());
        assert!(binary_entropy(f64::NAN).is_err());
    }

    #[test]
    fn inverse_round_trip() {
        assert_eq!(binary_entropy_inv(1.0).unwrap(), 0.5);
        assert_eq!(binary_entropy_inv(0.0).unwrap(), 0.0);
        for i in 0..=10_000 {
            let x = i as f64 / 10_000.0;
            let p = binary_entropy_inv(x).unwrap();
            assert!((0.0..=0.5).contains(&p));
            assert!((binary_entropy(p).unwrap() - x).abs() < 1e-12, "x={x}");
        }
        assert!(binary_entropy_inv(-0.1).is_err());
    }

    #[test]
    fn convolution() {
        assert!((binary_convolve(0.1, 0.2).unwrap() - 0.26).abs() < 1e-15);
        assert_eq!(binary_convolve(0.3, 0.7).unwrap(), binary_convolve(0.7, 0.3).unwrap());
        assert!(binary_convolve(0.3, 1.2).is_err());
    }

    #[test]
    fn mgl_convex_for_inverse_entropy() {
        for k in 0..=10 {
            let r = mgl_curve(0.05 * k as f64, 400).unwrap();
            assert!(r.convex, "p={} min={}", r.p, r.min_second_difference);
        }
    }

    #[test]
    fn half_absorbs() {
        let r = mgl_curve(0.5, 50).unwrap();
        assert!(r.values.iter().all(|v| (*v - 1.0).abs() < 1e-15));
        assert!(r.min_second_difference.abs() < 1e-14);
    }

    #[test]
    fn non_convex_detected_at_zero() {
        let xs: Vec<f64> = (0..200).map(|i| 0.4 * i as f64 / 199.0).collect();
        let gs: Vec<f64> = xs.iter().map(|x| x * x).collect();
        let r = mgl_scan(0.0, &xs, &gs).unwrap();
        assert!(!r.convex);
        assert!(mgl_scan(0.0, &[0.0, 1.0], &[0.5, 1.5]).is_err());
    }
}
