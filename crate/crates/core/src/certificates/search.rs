//! Numerical search for certificates, finished in exact arithmetic.
//!
//! Gradient descent runs over the coefficients of `K` square polynomials
//! (on the full basis of weight-`n` monomials) and one weight per even
//! remainder `v_a²`, minimizing the squared residual in canonical-form
//! coordinates. Remainder weights are projected onto `[margin, ∞)`.
//!
//! A converged point is turned into an exact certificate through its Gram
//! matrix `Q = BᵀB + diag(d)`: entries are rationalized, a maximal set of
//! them is re-solved exactly so that the linear constraints hold, and an
//! exact `LDLᵀ` factorization recovers squares with rational coefficients.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::{Float, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{verify_certificate, Sign, SosCertificate, VerifyReport};
use crate::error::{Error, Result};
use crate::moments::{Calculus, Monomial, MomentExpr};
use crate::rational::{rationalize, to_f64, Rational};

#[derive(Clone, Debug, PartialEq)]
pub struct SearchConfig {
    pub order: u32,
    pub max_iterations: usize,
    pub initial_step: f64,
    /// Multiplier applied to the step after an accepted move.
    pub step_growth: f64,
    pub seed: u64,
    pub max_denominator: u64,
    pub residual_tolerance: f64,
    /// Number of square polynomials; `None` picks the default for the order.
    pub squares: Option<usize>,
    /// Lower bound kept on every remainder weight during descent.
    pub margin: f64,
    /// Damped Gauss-Newton steps run after descent when it has not converged.
    pub polish_iterations: usize,
}

impl SearchConfig {
    pub fn new(order: u32) -> Self {
        Self {
            order,
            max_iterations: 20_000,
            initial_step: 0.05,
            step_growth: 1.1,
            seed: 0,
            max_denominator: 1_000_000,
            residual_tolerance: 1e-9,
            squares: None,
            margin: 1e-5,
            polish_iterations: 500,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn validate(&self) -> Result<()> {
        let positive = self.max_iterations > 0
            && self.initial_step > 0.0
            && self.step_growth >= 1.0
            && self.max_denominator > 0
            && self.residual_tolerance > 0.0
            && self.margin >= 0.0
            && self.squares != Some(0);
        if self.order < 2 || !positive {
            return Err(Error::InvalidArgument("search configuration bounds must be positive and order ≥ 2".into()));
        }
        Ok(())
    }

    /// Squares in the known certificate of this order plus one slack square.
    pub fn default_squares(order: u32) -> usize {
        match order {
            2 | 3 => 2,
            4 => 4,
            n => Monomial::all_of_weight(n).len(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchStats {
    pub iterations: usize,
    pub residual_l2: f64,
    /// Denominator bound that produced the exact certificate, if any.
    pub max_denominator_used: Option<u64>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum SearchOutcome {
    Certified { certificate: SosCertificate, stats: SearchStats },
    /// Best point found, rationalized naively and verified exactly.
    Unconverged { best: SosCertificate, report: VerifyReport, stats: SearchStats },
}

impl SearchOutcome {
    pub fn is_certified(&self) -> bool {
        matches!(self, SearchOutcome::Certified { .. })
    }

    pub fn stats(&self) -> &SearchStats {
        match self {
            SearchOutcome::Certified { stats, .. } | SearchOutcome::Unconverged { stats, .. } => stats,
        }
    }
}

/// Fixed data of one search problem.
struct Problem {
    order: u32,
    sign: Sign,
    basis: Vec<Monomial>,
    // gram[a][b] = canonical coordinates of v_a v_b.
    gram: Vec<Vec<Vec<f64>>>,
    gram_exact: Vec<Vec<MomentExpr>>,
    coords: Vec<Monomial>,
    target: Vec<f64>,
    target_exact: MomentExpr,
}

impl Problem {
    fn build(order: u32, calculus: &mut Calculus) -> Result<Self> {
        let sign = Sign::expected_for_order(order);
        let derivative = calculus.entropy_derivative(order)?;
        let target_exact = derivative.scale(&Rational::from_integer(sign.as_i32().into()));
        let basis = Monomial::all_of_weight(order);
        let coords = calculus.reducer().basis(2 * order).normal_monomials();
        let p = basis.len();
        let mut gram_exact = vec![vec![MomentExpr::zero(); p]; p];
        for a in 0..p {
            for b in a..p {
                let nf = calculus.reduce(&MomentExpr::monomial(basis[a].mul(&basis[b])));
                gram_exact[a][b] = nf.clone();
                gram_exact[b][a] = nf;
            }
        }
        let to_vec = |e: &MomentExpr| coords.iter().map(|m| to_f64(&e.coefficient(m))).collect::<Vec<f64>>();
        let gram = gram_exact.iter().map(|row| row.iter().map(to_vec).collect()).collect();
        let target = to_vec(&target_exact);
        Ok(Self { order, sign, basis, gram, gram_exact, coords, target, target_exact })
    }

    fn p(&self) -> usize {
        self.basis.len()
    }

    fn n_coords(&self) -> usize {
        self.coords.len()
    }

    fn residual(&self, b: &[Vec<f64>], d: &[f64]) -> Vec<f64> {
        let p = self.p();
        let mut q = vec![vec![0.0; p]; p];
        for row in b {
            for x in 0..p {
                for y in 0..p {
                    q[x][y] += row[x] * row[y];
                }
            }
        }
        for a in 0..p {
            q[a][a] += d[a];
        }
        let mut r: Vec<f64> = self.target.iter().map(|t| -t).collect();
        for x in 0..p {
            for y in 0..p {
                let w = q[x][y];
                if w != 0.0 {
                    for (rk, gk) in r.iter_mut().zip(&self.gram[x][y]) {
                        *rk += w * gk;
                    }
                }
            }
        }
        r
    }

    fn loss(&self, b: &[Vec<f64>], d: &[f64]) -> f64 {
        0.5 * self.residual(b, d).iter().map(|x| x * x).sum::<f64>()
    }

    fn gradient(&self, b: &[Vec<f64>], r: &[f64]) -> (Vec<Vec<f64>>, Vec<f64>) {
        let p = self.p();
        let mut h = vec![vec![0.0; p]; p];
        for x in 0..p {
            for y in 0..p {
                h[x][y] = self.gram[x][y].iter().zip(r).map(|(g, rk)| g * rk).sum();
            }
        }
        let gb = b
            .iter()
            .map(|row| (0..p).map(|x| 2.0 * (0..p).map(|y| row[y] * h[x][y]).sum::<f64>()).collect())
            .collect();
        let gd = (0..p).map(|a| h[a][a]).collect();
        (gb, gd)
    }
}

pub fn search_certificate(cfg: &SearchConfig, calculus: &mut Calculus) -> Result<SearchOutcome> {
    cfg.validate()?;
    if cfg.order > calculus.cap() {
        return Err(Error::OrderExceedsCap { order: cfg.order, cap: calculus.cap() });
    }
    let problem = Problem::build(cfg.order, calculus)?;
    let p = problem.p();
    let k = cfg.squares.unwrap_or_else(|| SearchConfig::default_squares(cfg.order));

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut b: Vec<Vec<f64>> = (0..k).map(|_| (0..p).map(|_| rng.gen_range(-0.5..0.5)).collect()).collect();
    let mut d: Vec<f64> = (0..p).map(|_| cfg.margin + rng.gen_range(0.0..0.1)).collect();

    let mut step = cfg.initial_step;
    let mut r = problem.residual(&b, &d);
    let mut loss = 0.5 * r.iter().map(|x| x * x).sum::<f64>();
    let mut iterations = 0;
    while iterations < cfg.max_iterations && loss.sqrt() * core::f64::consts::SQRT_2 >= cfg.residual_tolerance {
        iterations += 1;
        let (gb, gd) = problem.gradient(&b, &r);
        loop {
            let nb: Vec<Vec<f64>> =
                b.iter().zip(&gb).map(|(row, g)| row.iter().zip(g).map(|(x, gx)| x - step * gx).collect()).collect();
            let nd: Vec<f64> = d.iter().zip(&gd).map(|(x, g)| (x - step * g).max(cfg.margin)).collect();
            let nl = problem.loss(&nb, &nd);
            if nl < loss {
                b = nb;
                d = nd;
                loss = nl;
                step *= cfg.step_growth;
                break;
            }
            step *= 0.5;
            if step < 1e-300 {
                break;
            }
        }
        if step < 1e-300 {
            break;
        }
        r = problem.residual(&b, &d);
    }
    if (2.0 * loss).sqrt() >= cfg.residual_tolerance {
        let (polished, steps) = polish(&problem, &mut b, &mut d, cfg);
        loss = polished;
        iterations += steps;
    }
    let residual_l2 = (2.0 * loss).sqrt();

    if residual_l2 < cfg.residual_tolerance {
        let mut den = cfg.max_denominator;
        loop {
            if let Some(cert) = exact_certificate(&problem, &b, &d, den)? {
                let report = verify_certificate(&cert, calculus)?;
                if report.verified {
                    let stats = SearchStats { iterations, residual_l2, max_denominator_used: Some(den) };
                    return Ok(SearchOutcome::Certified { certificate: cert, stats });
                }
            }
            if den >= 1_000_000_000 {
                break;
            }
            den = (den * 2).min(1_000_000_000);
        }
    }

    let best = naive_certificate(&problem, &b, &d, cfg.max_denominator)?;
    let report = verify_certificate(&best, calculus)?;
    Ok(SearchOutcome::Unconverged { best, report, stats: SearchStats { iterations, residual_l2, max_denominator_used: None } })
}

/// Projected Levenberg-Marquardt on the residual map.
///
/// Each step is the damped minimum-norm Gauss-Newton step
/// `δ = −Jᵀ(JJᵀ + λI)⁻¹ r`; remainder weights that would cross the margin
/// are frozen at it and the step is recomputed without them.
fn polish(problem: &Problem, b: &mut [Vec<f64>], d: &mut [f64], cfg: &SearchConfig) -> (f64, usize) {
    let p = problem.p();
    let n = problem.n_coords();
    let k = b.len();
    let mut lambda = 1e-3;
    let mut loss = problem.loss(b, d);
    let mut steps = 0;
    while steps < cfg.polish_iterations && (2.0 * loss).sqrt() >= cfg.residual_tolerance {
        steps += 1;
        let r = problem.residual(b, d);
        // Jacobian columns: square coefficients first, then remainder weights.
        let mut cols: Vec<Vec<f64>> = Vec::with_capacity(k * p + p);
        for row in b.iter() {
            for x in 0..p {
                let mut c = vec![0.0; n];
                for y in 0..p {
                    for (ci, g) in c.iter_mut().zip(&problem.gram[x][y]) {
                        *ci += 2.0 * row[y] * g;
                    }
                }
                cols.push(c);
            }
        }
        for a in 0..p {
            cols.push(problem.gram[a][a].clone());
        }
        let mut frozen = vec![false; p];
        let mut accepted = false;
        for _ in 0..8 {
            let mut delta = vec![0.0; cols.len()];
            for inner in 0..=p {
                let active: Vec<usize> = (0..cols.len()).filter(|&j| j < k * p || !frozen[j - k * p]).collect();
                let mut m = vec![vec![0.0; n]; n];
                for &j in &active {
                    for x in 0..n {
                        for y in 0..n {
                            m[x][y] += cols[j][x] * cols[j][y];
                        }
                    }
                }
                for (x, row) in m.iter_mut().enumerate() {
                    row[x] += lambda;
                }
                let Some(w) = solve_dense(m, r.clone()) else { break };
                delta.iter_mut().for_each(|v| *v = 0.0);
                for &j in &active {
                    delta[j] = -cols[j].iter().zip(&w).map(|(c, wi)| c * wi).sum::<f64>();
                }
                let mut newly = false;
                for a in 0..p {
                    if !frozen[a] && d[a] + delta[k * p + a] < cfg.margin {
                        frozen[a] = true;
                        newly = true;
                    }
                }
                if !newly || inner == p {
                    break;
                }
            }
            let nb: Vec<Vec<f64>> =
                b.iter().enumerate().map(|(j, row)| row.iter().enumerate().map(|(x, v)| v + delta[j * p + x]).collect()).collect();
            let nd: Vec<f64> = d
                .iter()
                .enumerate()
                .map(|(a, v)| if frozen[a] { cfg.margin.max(*v).min(*v) } else { (v + delta[k * p + a]).max(cfg.margin) })
                .collect();
            let nl = problem.loss(&nb, &nd);
            if nl < loss {
                b.iter_mut().zip(nb).for_each(|(dst, src)| *dst = src);
                d.copy_from_slice(&nd);
                loss = nl;
                lambda = (lambda * 0.3).max(1e-15);
                accepted = true;
                break;
            }
            lambda *= 10.0;
        }
        if !accepted {
            break;
        }
    }
    (loss, steps)
}

/// Gaussian elimination with partial pivoting.
fn solve_dense(mut m: Vec<Vec<f64>>, mut rhs: Vec<f64>) -> Option<Vec<f64>> {
    let n = rhs.len();
    for c in 0..n {
        let piv = (c..n).max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs()))?;
        if m[piv][c].abs() < 1e-300 {
            return None;
        }
        m.swap(c, piv);
        rhs.swap(c, piv);
        for i in (c + 1)..n {
            let f = m[i][c] / m[c][c];
            if f != 0.0 {
                for j in c..n {
                    m[i][j] -= f * m[c][j];
                }
                rhs[i] -= f * rhs[c];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = ((i + 1)..n).map(|j| m[i][j] * x[j]).sum();
        x[i] = (rhs[i] - s) / m[i][i];
    }
    Some(x)
}

/// Rationalize each square coefficient and remainder weight independently.
fn naive_certificate(problem: &Problem, b: &[Vec<f64>], d: &[f64], den: u64) -> Result<SosCertificate> {
    let mut cert = SosCertificate::new(problem.order, problem.sign);
    for row in b {
        let mut base = MomentExpr::zero();
        for (x, v) in row.iter().zip(&problem.basis) {
            base.add_term(v.clone(), rationalize(*x, den)?);
        }
        cert = cert.square(Rational::from_integer(1.into()), base);
    }
    for (w, v) in d.iter().zip(&problem.basis) {
        let q = rationalize(*w, den)?;
        if q.is_positive() {
            cert = cert.remainder(q, v.square());
        }
    }
    Ok(cert)
}

fn exact_certificate(problem: &Problem, b: &[Vec<f64>], d: &[f64], den: u64) -> Result<Option<SosCertificate>> {
    let p = problem.p();
    let n = problem.n_coords();

    // Float Gram matrix.
    let mut qf = vec![vec![0.0; p]; p];
    for row in b {
        for x in 0..p {
            for y in 0..p {
                qf[x][y] += row[x] * row[y];
            }
        }
    }
    for a in 0..p {
        qf[a][a] += d[a];
    }

    // Unknowns: upper-triangle Gram entries.
    let pairs: Vec<(usize, usize)> = (0..p).flat_map(|x| (x..p).map(move |y| (x, y))).collect();
    let column = |&(x, y): &(usize, usize)| -> Vec<Rational> {
        let mult = Rational::from_integer(if x == y { 1 } else { 2 }.into());
        problem.coords.iter().map(|m| problem.gram_exact[x][y].coefficient(m) * &mult).collect()
    };
    let columns: Vec<Vec<Rational>> = pairs.iter().map(column).collect();
    let pivots = choose_pivots(&columns, n);

    let mut values: Vec<Rational> = Vec::with_capacity(pairs.len());
    for &(x, y) in &pairs {
        values.push(rationalize(qf[x][y], den)?);
    }

    // Solve A_P x_P = T − A_F x_F exactly.
    let mut rhs: Vec<Rational> = problem.coords.iter().map(|m| problem.target_exact.coefficient(m)).collect();
    for (j, col) in columns.iter().enumerate() {
        if pivots.contains(&j) {
            continue;
        }
        for (r, c) in rhs.iter_mut().zip(col) {
            *r -= c * &values[j];
        }
    }
    let system: Vec<Vec<Rational>> = pivots.iter().map(|&j| columns[j].clone()).collect();
    let Some(solution) = solve_columns(&system, &rhs) else {
        return Ok(None);
    };
    for (&j, v) in pivots.iter().zip(solution) {
        values[j] = v;
    }

    let mut q = vec![vec![Rational::zero(); p]; p];
    for (&(x, y), v) in pairs.iter().zip(values) {
        q[x][y] = v.clone();
        q[y][x] = v;
    }
    let Some((l, diag)) = ldlt(&q) else {
        return Ok(None);
    };

    let mut cert = SosCertificate::new(problem.order, problem.sign);
    for kk in 0..p {
        if diag[kk].is_zero() {
            continue;
        }
        let mut base = MomentExpr::zero();
        for i in kk..p {
            base.add_term(problem.basis[i].clone(), l[i][kk].clone());
        }
        if base.len() == 1 {
            cert = cert.remainder(diag[kk].clone(), problem.basis[kk].square());
        } else {
            cert = cert.square(diag[kk].clone(), base);
        }
    }
    Ok(Some(cert))
}

/// Column indices forming a well-conditioned invertible `rank × rank` block,
/// chosen by floating-point elimination with full pivoting.
fn choose_pivots(columns: &[Vec<Rational>], rows: usize) -> Vec<usize> {
    let mut a: Vec<Vec<f64>> = columns.iter().map(|c| c.iter().map(to_f64).collect()).collect();
    let mut used_rows = vec![false; rows];
    let mut chosen = Vec::new();
    loop {
        let mut best = (0.0, 0, 0);
        for (j, col) in a.iter().enumerate() {
            if chosen.contains(&j) {
                continue;
            }
            for (i, v) in col.iter().enumerate() {
                if !used_rows[i] && v.abs() > best.0 {
                    best = (v.abs(), j, i);
                }
            }
        }
        if best.0 < 1e-12 {
            break;
        }
        let (_, pj, pi) = best;
        chosen.push(pj);
        used_rows[pi] = true;
        let pivot_col = a[pj].clone();
        for (j, col) in a.iter_mut().enumerate() {
            if j == pj {
                continue;
            }
            let f = col[pi] / pivot_col[pi];
            if f != 0.0 {
                for (c, pc) in col.iter_mut().zip(&pivot_col) {
                    *c -= f * pc;
                }
            }
        }
    }
    chosen
}

/// Solve `Σ_k x_k · cols[k] = rhs` exactly; `None` when inconsistent or singular.
fn solve_columns(cols: &[Vec<Rational>], rhs: &[Rational]) -> Option<Vec<Rational>> {
    let n_rows = rhs.len();
    let n_cols = cols.len();
    // Augmented row-major matrix.
    let mut m: Vec<Vec<Rational>> =
        (0..n_rows).map(|i| cols.iter().map(|c| c[i].clone()).chain(core::iter::once(rhs[i].clone())).collect()).collect();
    let mut pivot_row = 0;
    let mut pivot_of_col = vec![usize::MAX; n_cols];
    for c in 0..n_cols {
        let Some(r) = (pivot_row..n_rows).find(|&r| !m[r][c].is_zero()) else {
            return None;
        };
        m.swap(pivot_row, r);
        let inv = m[pivot_row][c].recip();
        for v in m[pivot_row].iter_mut() {
            *v *= &inv;
        }
        let prow = m[pivot_row].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != pivot_row && !row[c].is_zero() {
                let f = row[c].clone();
                for (v, pv) in row.iter_mut().zip(&prow) {
                    *v -= &f * pv;
                }
            }
        }
        pivot_of_col[c] = pivot_row;
        pivot_row += 1;
    }
    // Remaining rows must be consistent.
    if m[pivot_row..].iter().any(|row| !row[n_cols].is_zero()) {
        return None;
    }
    Some(pivot_of_col.iter().map(|&r| m[r][n_cols].clone()).collect())
}

/// Exact `Q = L D Lᵀ` with unit lower-triangular `L`; `None` unless `Q ⪰ 0`.
fn ldlt(q: &[Vec<Rational>]) -> Option<(Vec<Vec<Rational>>, Vec<Rational>)> {
    let p = q.len();
    let mut l = vec![vec![Rational::zero(); p]; p];
    let mut diag = vec![Rational::zero(); p];
    for k in 0..p {
        let mut dk = q[k][k].clone();
        for j in 0..k {
            dk -= &l[k][j] * &l[k][j] * &diag[j];
        }
        if dk.is_negative() {
            return None;
        }
        l[k][k] = Rational::from_integer(1.into());
        for i in (k + 1)..p {
            let mut s = q[i][k].clone();
            for j in 0..k {
                s -= &l[i][j] * &l[k][j] * &diag[j];
            }
            if dk.is_zero() {
                if !s.is_zero() {
                    return None;
                }
            } else {
                l[i][k] = s / &dk;
            }
        }
        diag[k] = dk;
    }
    Some((l, diag))
}
