use std::process::ExitCode;
use std::time::{Duration, Instant};

use gcmc::parallel_scan;
use gcmc_core::certificates::{paper_order2, paper_order3, paper_order4, search_certificate, verify_certificate, SearchConfig};
use gcmc_core::densities::{Density, GaussianMixture};
use gcmc_core::functionals::{
    entropy, epi_gap, fisher, laplace_forward, moment_eval, paper_derivative, LaplaceMeasure, QuadratureConfig,
};
use gcmc_core::monotonicity::{lin_space, DerivativeTable, ScanConfig};
use gcmc_core::sequences::{chromatic_polynomial, evaluate_polynomial, mgl_curve, Graph};
use gcmc_core::Calculus;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn quad() -> QuadratureConfig {
    QuadratureConfig::default()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn random_mixture(rng: &mut ChaCha8Rng) -> GaussianMixture {
    let k = rng.gen_range(1..=3);
    let triples: Vec<_> =
        (0..k).map(|_| (rng.gen_range(0.1..1.0), rng.gen_range(-3.0..3.0), rng.gen_range(0.3..3.0))).collect();
    GaussianMixture::from_triples(&triples).unwrap()
}

fn exact_certificates() -> Verdict {
    let start = Instant::now();
    let mut calc = Calculus::default();
    let verified: Vec<bool> = [paper_order2(), paper_order3(), paper_order4()]
        .iter()
        .map(|c| verify_certificate(c, &mut calc).unwrap().verified)
        .collect();
    let elapsed = start.elapsed();
    verdict(
        verified.iter().all(|v| *v) && elapsed < Duration::from_secs(10),
        format!("orders 2,3,4 verified {verified:?} in {elapsed:.2?}"),
    )
}

fn gaussian_closed_forms() -> Verdict {
    let mut calc = Calculus::default();
    let table = DerivativeTable::new(6, &mut calc).unwrap();
    let mut worst = 0.0f64;
    for a in [0.5, 1.0, 2.0] {
        for t in [0.1, 1.0, 10.0] {
            let s = a + t;
            let m = GaussianMixture::gaussian(0.0, a).unwrap().evolve(t).unwrap();
            let d: Density = m.clone().into();
            let h = entropy(&d, &quad()).unwrap().value;
            worst = worst.max(rel(h, 0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E * s).ln()));
            worst = worst.max(rel(fisher(&d, &quad()).unwrap().value, 1.0 / s));
            let mut factorial = 1.0;
            for (n, e) in table.evaluate(&m, &quad()).unwrap().iter().enumerate() {
                if n > 0 {
                    factorial *= n as f64;
                }
                let exact = if n % 2 == 0 { 1.0 } else { -1.0 } * factorial / s.powi(n as i32 + 1);
                worst = worst.max(rel(e.value, exact));
            }
        }
    }
    verdict(worst < 1e-6, format!("max relative error {worst:.2e} over h, I and dⁿI/dtⁿ, n ≤ 6"))
}

fn de_bruijn() -> Verdict {
    let mixtures = [
        GaussianMixture::two_point(0.3, 3.0).unwrap(),
        GaussianMixture::from_triples(&[(0.4, -1.5, 0.5), (0.6, 1.0, 1.0)]).unwrap(),
        GaussianMixture::from_triples(&[(0.2, -2.0, 0.4), (0.5, 0.5, 1.2), (0.3, 3.0, 0.7)]).unwrap(),
    ];
    let mut worst = 0.0f64;
    for m in &mixtures {
        for t in [0.1, 0.3, 1.0, 3.0, 10.0] {
            let dt = 1e-4 * (1.0 + t);
            let h = |s: f64| entropy(&m.evolve(s).unwrap().into(), &quad()).unwrap().value;
            let slope = (h(t + dt) - h(t - dt)) / (2.0 * dt);
            let i = fisher(&m.evolve(t).unwrap().into(), &quad()).unwrap().value;
            worst = worst.max(rel(slope, 0.5 * i));
        }
    }
    verdict(worst < 1e-6, format!("max relative gap {worst:.2e} between dh/dt and I/2 on 3 mixtures × 5 times"))
}

fn default_scan() -> Verdict {
    let cfg = ScanConfig::default();
    let mut calc = Calculus::default();
    let table = DerivativeTable::new(cfg.max_order, &mut calc).unwrap();
    let start = Instant::now();
    let r = parallel_scan(&cfg, &table, 0).unwrap();
    let elapsed = start.elapsed();
    let s = &r.summary;
    let min_margin = r.heatmap.iter().map(|c| c.min_margin).fold(f64::INFINITY, f64::min);
    verdict(
        s.violations == 0 && s.log_convexity_violations == 0 && elapsed < Duration::from_secs(15 * 60),
        format!(
            "{} points, orders ≤ {}: {} sign violations, {} log-convexity violations, {} unconverged, {} unresolved, min margin {min_margin:.2e}, {elapsed:.1?} on {} threads",
            s.points,
            cfg.max_order,
            s.violations,
            s.log_convexity_violations,
            s.unconverged,
            s.unresolved,
            rayon::current_num_threads()
        ),
    )
}

fn dual_paths() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut calc = Calculus::default();
    let mut worst = 0.0f64;
    let mut all_converged = true;
    for _ in 0..10 {
        let d: Density = random_mixture(&mut rng).into();
        for n in 2..=4 {
            let direct = paper_derivative(n, &d, &quad()).unwrap();
            let reduced = moment_eval(&calc.entropy_derivative(n).unwrap(), &d, &quad()).unwrap();
            all_converged &= direct.converged && reduced.converged;
            worst = worst.max(rel(reduced.value, direct.value));
        }
    }
    verdict(
        worst < 1e-8 && all_converged,
        format!("max relative gap {worst:.2e} between printed integrands and reduced moments, n = 2,3,4 on 10 mixtures"),
    )
}

fn certificate_search() -> Verdict {
    let mut calc = Calculus::default();
    let mut counts = Vec::new();
    let start = Instant::now();
    for order in 2..=4 {
        let hits = (0..10)
            .filter(|&seed| {
                search_certificate(&SearchConfig::new(order).with_seed(seed), &mut calc).unwrap().is_certified()
            })
            .count();
        counts.push(hits);
    }
    verdict(
        counts[0] >= 8 && counts[1] >= 8 && counts[2] >= 1,
        format!(
            "certified seeds out of 10: order 2 {}, order 3 {}, order 4 {} in {:.2?}",
            counts[0],
            counts[1],
            counts[2],
            start.elapsed()
        ),
    )
}

fn epi() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = f64::INFINITY;
    for _ in 0..20 {
        let a: Density = random_mixture(&mut rng).into();
        let b: Density = random_mixture(&mut rng).into();
        worst = worst.min(epi_gap(&a, &b, &quad()).unwrap().gap);
    }
    let g1: Density = GaussianMixture::gaussian(0.0, 1.0).unwrap().into();
    let g2: Density = GaussianMixture::gaussian(3.0, 2.0).unwrap().into();
    let equality = epi_gap(&g1, &g2, &quad()).unwrap().gap;
    verdict(
        worst >= -1e-8 && equality.abs() < 1e-6,
        format!("min gap {worst:.3e} on 20 random pairs, Gaussian pair gap {equality:.2e}"),
    )
}

fn mgl() -> Verdict {
    let worst = lin_space(0.0, 0.5, 0.05)
        .into_iter()
        .map(|p| mgl_curve(p, 400).unwrap().min_second_difference)
        .fold(f64::INFINITY, f64::min);
    verdict(worst >= -1e-10, format!("min second difference {worst:.3e} over 11 values of p on 400 points"))
}

fn brute_force_colorings(g: &Graph, q: usize) -> i128 {
    let n = g.vertex_count();
    let edges: Vec<_> = g.edges().collect();
    let mut colors = vec![0usize; n];
    let mut count = 0i128;
    loop {
        if edges.iter().all(|&(u, v)| colors[u] != colors[v]) {
            count += 1;
        }
        let mut i = 0;
        loop {
            if i == n {
                return count;
            }
            colors[i] += 1;
            if colors[i] < q {
                break;
            }
            colors[i] = 0;
            i += 1;
        }
    }
}

fn wheel(n: usize) -> Graph {
    let rim: Vec<_> = Graph::cycle(n - 1).unwrap().edges().collect();
    let mut g = Graph::with_edges(n, &rim).unwrap();
    for v in 0..n - 1 {
        g.add_edge(v, n - 1).unwrap();
    }
    g
}

fn petersen() -> Graph {
    let mut edges = Vec::new();
    for i in 0..5 {
        edges.push((i, (i + 1) % 5));
        edges.push((i, i + 5));
        edges.push((5 + i, 5 + (i + 2) % 5));
    }
    Graph::with_edges(10, &edges).unwrap()
}

fn log_concave_abs(c: &[i64]) -> bool {
    let a: Vec<i128> = c.iter().map(|x| (*x as i128).abs()).collect();
    a.windows(3).all(|w| w[1] * w[1] >= w[0] * w[2])
}

fn chromatic() -> Verdict {
    let mut corpus: Vec<(String, Graph)> = Vec::new();
    for n in 1..=8 {
        corpus.push((format!("K{n}"), Graph::complete(n).unwrap()));
        corpus.push((format!("P{n}"), Graph::path(n).unwrap()));
    }
    for n in 3..=8 {
        corpus.push((format!("C{n}"), Graph::cycle(n).unwrap()));
    }
    for n in 4..=8 {
        corpus.push((format!("W{n}"), wheel(n)));
    }
    corpus.push(("Petersen".into(), petersen()));
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for k in 0..20 {
        let n = rng.gen_range(2..=8);
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                if rng.gen_bool(0.45) {
                    edges.push((u, v));
                }
            }
        }
        corpus.push((format!("random{k}"), Graph::with_edges(n, &edges).unwrap()));
    }
    let mut failures = Vec::new();
    for (name, g) in &corpus {
        let c = chromatic_polynomial(g, 64).unwrap();
        let qmax = if g.vertex_count() <= 8 { 5 } else { 4 };
        let matches = (1..=qmax).all(|q| evaluate_polynomial(&c, q as i64) == brute_force_colorings(g, q));
        if !matches || !log_concave_abs(&c) {
            failures.push(name.clone());
        }
    }
    verdict(
        failures.is_empty(),
        format!("{} graphs checked against brute-force counts, failures {failures:?}", corpus.len()),
    )
}

fn laplace() -> Verdict {
    let mut worst = 0.0f64;
    for a in [0.5, 1.0, 2.0] {
        let mu = LaplaceMeasure::from_fn(1e-3, 41.5 / a, 0.0, |x| (-a * x).exp());
        for t in [0.5, 1.0, 5.0] {
            worst = worst.max((laplace_forward(&mu, t).unwrap().value - 1.0 / (t + a)).abs());
        }
    }
    verdict(worst < 1e-8, format!("max absolute error {worst:.2e} against 1/(t+a)"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Verdict); 10] = [
        ("exact certificates", exact_certificates),
        ("gaussian closed forms", gaussian_closed_forms),
        ("de bruijn identity", de_bruijn),
        ("default scan", default_scan),
        ("dual-path agreement", dual_paths),
        ("certificate search", certificate_search),
        ("entropy power inequality", epi),
        ("gerber convexity", mgl),
        ("chromatic polynomials", chromatic),
        ("laplace forward", laplace),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let v = check();
        println!("{} {:>2} {name}: {}", if v.pass { "PASS" } else { "FAIL" }, i + 1, v.detail);
        failed += usize::from(!v.pass);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
