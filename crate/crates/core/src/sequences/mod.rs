//! Discrete analogues: log-concave and log-convex sequences, chromatic
//! polynomials, binary entropy and Mrs. Gerber's Lemma convexity scans.

mod binary;
mod chromatic;

use alloc::vec::Vec;

use num_traits::Signed;

use crate::rational::Rational;

pub use binary::{binary_convolve, binary_entropy, binary_entropy_inv, mgl_curve, mgl_scan, ConvexityReport, MGL_TOLERANCE};
pub use chromatic::{chromatic_polynomial, evaluate_polynomial, Graph, DEFAULT_EDGE_CAP};

/// Relative band used for float comparisons in [`sequence_profile`].
pub const SEQUENCE_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct SequenceProfile {
    pub values: Vec<f64>,
    pub log_concave: bool,
    pub log_convex: bool,
    /// `a_i² − a_{i−1} a_{i+1}` for interior `i`; log-convex margins are the negation.
    pub margins: Vec<f64>,
}

impl SequenceProfile {
    pub fn convex_margins(&self) -> Vec<f64> {
        self.margins.iter().map(|m| -m).collect()
    }
}

/// Float verdicts with a relative band of [`SEQUENCE_TOLERANCE`] per margin.
pub fn sequence_profile(values: &[f64]) -> SequenceProfile {
    let mut margins = Vec::new();
    let mut log_concave = true;
    let mut log_convex = true;
    for w in values.windows(3) {
        let sq = w[1] * w[1];
        let prod = w[0] * w[2];
        let m = sq - prod;
        let band = SEQUENCE_TOLERANCE * sq.abs().max(prod.abs());
        log_concave &= m >= -band;
        log_convex &= m <= band;
        margins.push(m);
    }
    SequenceProfile { values: values.to_vec(), log_concave, log_convex, margins }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExactSequenceProfile {
    pub values: Vec<Rational>,
    pub log_concave: bool,
    pub log_convex: bool,
    pub margins: Vec<Rational>,
}

/// Exact verdicts for rational input.
pub fn sequence_profile_exact(values: &[Rational]) -> ExactSequenceProfile {
    let margins: Vec<Rational> = values.windows(3).map(|w| &w[1] * &w[1] - &w[0] * &w[2]).collect();
    ExactSequenceProfile {
        values: values.to_vec(),
        log_concave: margins.iter().all(|m| !m.is_negative()),
        log_convex: margins.iter().all(|m| !m.is_positive()),
        margins,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReciprocalProfile {
    pub sequence: SequenceProfile,
    pub reciprocals: SequenceProfile,
    /// Log-convex input must give log-concave reciprocals; the converse is not claimed.
    pub implication_holds: bool,
}

pub fn reciprocal_profile(values: &[f64]) -> crate::Result<ReciprocalProfile> {
    if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !(**v > 0.0) || !v.is_finite()) {
        return Err(crate::Error::InvalidArgument(alloc::format!("entry {i} ({v}) must be positive and finite")));
    }
    let sequence = sequence_profile(values);
    let inv: Vec<f64> = values.iter().map(|v| v.recip()).collect();
    let reciprocals = sequence_profile(&inv);
    let implication_holds = !sequence.log_convex || reciprocals.log_concave;
    Ok(ReciprocalProfile { sequence, reciprocals, implication_holds })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    #[test]
    fn basic_profiles() {
        let p = sequence_profile(&[1.0, 3.0, 2.0]);
        assert!(p.log_concave && !p.log_convex);
        assert_eq!(p.margins, [7.0]);
        let c = sequence_profile(&[1.0, 1.0, 1.0]);
        assert!(c.log_concave && c.log_convex);
        let g = sequence_profile(&[1.0, 2.0, 4.0, 8.0]);
        assert!(g.log_concave && g.log_convex);
        let short = sequence_profile(&[5.0, 1.0]);
        assert!(short.log_concave && short.log_convex && short.margins.is_empty());
    }

    #[test]
    fn exact_profiles() {
        let p = sequence_profile_exact(&[int(1), int(3), int(2)]);
        assert!(p.log_concave && !p.log_convex);
        let h = sequence_profile_exact(&[int(1), ratio(1, 2), ratio(1, 3), ratio(1, 4)]);
        assert!(h.log_convex && !h.log_concave);
        let g = sequence_profile_exact(&[ratio(1, 3), ratio(1, 9), ratio(1, 27)]);
        assert!(g.log_convex && g.log_concave);
    }

    #[test]
    fn reciprocals() {
        let r = reciprocal_profile(&[1.0, 0.5, 1.0 / 3.0, 0.25]).unwrap();
        assert!(r.sequence.log_convex && r.reciprocals.log_concave && r.implication_holds);
        let geo = reciprocal_profile(&[1.0, 0.3, 0.09, 0.027]).unwrap();
        assert!(geo.sequence.log_convex && geo.sequence.log_concave);
        assert!(geo.reciprocals.log_convex && geo.reciprocals.log_concave);
        let conv = reciprocal_profile(&[1.0, 2.0, 3.0]).unwrap();
        assert!(conv.sequence.log_concave && !conv.sequence.log_convex);
        assert!(conv.reciprocals.log_convex && conv.implication_holds);
        assert!(reciprocal_profile(&[1.0, 0.0, 2.0]).is_err());
        assert!(reciprocal_profile(&[1.0, -2.0, 2.0]).is_err());
    }
}
