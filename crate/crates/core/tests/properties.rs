use gcmc_core::certificates::{builtin, BUILTIN_NAMES};
use gcmc_core::densities::{heat_evolve_grid, Density, DensityGrid, GaussianMixture};
use gcmc_core::functionals::{certificate_integral, entropy, fisher, moment_eval, QuadratureConfig};
use gcmc_core::moments::{derive_t, derive_y, ibp_reduce, ibp_relation, Calculus};
use gcmc_core::rational::{ratio, to_f64};
use gcmc_core::sequences::{
    binary_entropy, binary_entropy_inv, chromatic_polynomial, evaluate_polynomial, sequence_profile, Graph,
};
use gcmc_core::{MomentExpr, Monomial};
use proptest::prelude::*;

fn mixture() -> impl Strategy<Value = GaussianMixture> {
    prop::collection::vec((0.1f64..1.0, -3.0f64..3.0, 0.3f64..3.0), 1..=3)
        .prop_map(|c| GaussianMixture::from_triples(&c).unwrap())
}

fn expr_of_weight(weight: u32) -> impl Strategy<Value = MomentExpr> {
    let basis = Monomial::all_of_weight(weight);
    let n = basis.len();
    prop::collection::vec((-5i64..=5, 1i64..=6), n).prop_map(move |cs| {
        MomentExpr::from_terms(basis.iter().cloned().zip(cs).map(|(m, (p, q))| (ratio(p, q), m)))
    })
}

fn weighted_expr() -> impl Strategy<Value = MomentExpr> {
    (2u32..=7).prop_flat_map(expr_of_weight)
}

fn graph() -> impl Strategy<Value = Graph> {
    (1usize..=8).prop_flat_map(|n| {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
        let k = pairs.len();
        prop::collection::vec(any::<bool>(), k).prop_map(move |keep| {
            let mut chosen: Vec<_> = pairs.iter().zip(keep).filter(|(_, k)| *k).map(|(e, _)| *e).collect();
            chosen.truncate(14);
            Graph::with_edges(n, &chosen).unwrap()
        })
    })
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

fn cfg() -> QuadratureConfig {
    QuadratureConfig::default()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn reduce_is_idempotent(e in weighted_expr()) {
        let r = ibp_reduce(&e);
        prop_assert_eq!(ibp_reduce(&r), r);
    }

    #[test]
    fn reduce_is_linear(
        (a, b) in (2u32..=6).prop_flat_map(|w| (expr_of_weight(w), expr_of_weight(w))),
        p in -4i64..=4,
        q in 1i64..=5,
    ) {
        let alpha = ratio(p, q);
        let beta = ratio(q, 7);
        let combined = &(&a * &alpha) + &(&b * &beta);
        let want = &(&ibp_reduce(&a) * &alpha) + &(&ibp_reduce(&b) * &beta);
        prop_assert_eq!(ibp_reduce(&combined), want);
    }

    #[test]
    fn reduction_preserves_weight(e in weighted_expr()) {
        let w = e.homogeneous_weight().unwrap();
        let r = ibp_reduce(&e);
        prop_assert!(r.is_zero() || r.homogeneous_weight() == Some(w));
        prop_assert_eq!(derive_t(&e).homogeneous_weight(), Some(w + 2));
        prop_assert_eq!(derive_y(&e).homogeneous_weight().unwrap_or(w + 1), w + 1);
    }

    #[test]
    fn semigroup_on_parameters(c in prop::collection::vec((1u32..8, -24i32..24, 1u32..64), 1..=3), s in 0u32..64, t in 0u32..64) {
        let triples: Vec<_> = c.iter().map(|&(w, m, v)| (w as f64 / 8.0, m as f64 / 8.0, v as f64 / 16.0)).collect();
        let m = GaussianMixture::from_triples(&triples).unwrap();
        let (s, t) = (s as f64 / 32.0, t as f64 / 32.0);
        prop_assert_eq!(m.evolve(s + t).unwrap(), m.evolve(s).unwrap().evolve(t).unwrap());
    }

    #[test]
    fn entropy_inverse_round_trip(x in 0.0f64..=1.0) {
        let p = binary_entropy_inv(x).unwrap();
        prop_assert!((0.0..=0.5).contains(&p));
        prop_assert!((binary_entropy(p).unwrap() - x).abs() < 1e-12);
    }

    #[test]
    fn chromatic_matches_brute_force(g in graph()) {
        let p = chromatic_polynomial(&g, 20).unwrap();
        for q in 1..=5 {
            prop_assert_eq!(evaluate_polynomial(&p, q as i64), brute_force_colorings(&g, q));
        }
    }

    #[test]
    fn deletion_contraction(g in graph()) {
        let p = chromatic_polynomial(&g, 20).unwrap();
        for e in g.edges() {
            let del = chromatic_polynomial(&g.delete(e), 20).unwrap();
            let con = chromatic_polynomial(&g.contract(e), 20).unwrap();
            let len = p.len().max(del.len()).max(con.len());
            for i in 0..len {
                let at = |v: &Vec<i64>| v.get(i).copied().unwrap_or(0);
                prop_assert_eq!(at(&p), at(&del) - at(&con));
            }
        }
    }

    #[test]
    fn chromatic_coefficients_log_concave(g in graph()) {
        let p = chromatic_polynomial(&g, 20).unwrap();
        // Skip the zero coefficients below the lowest power.
        let abs: Vec<f64> = p.iter().skip_while(|c| **c == 0).map(|c| c.unsigned_abs() as f64).collect();
        prop_assert!(sequence_profile(&abs).log_concave);
    }

    #[test]
    fn certificate_brackets_are_pointwise_nonnegative(rho in prop::collection::vec(-3.0f64..3.0, 9)) {
        let mut r = vec![1.0];
        r.extend(rho);
        for name in BUILTIN_NAMES {
            let c = builtin(name).unwrap();
            let bracket = c.unreduced_bracket();
            let v: f64 = bracket
                .terms()
                .map(|(m, c)| to_f64(c) * m.factors().map(|(i, a)| r[i].powi(a as i32)).product::<f64>())
                .sum();
            let scale: f64 = bracket
                .terms()
                .map(|(m, c)| (to_f64(c) * m.factors().map(|(i, a)| r[i].powi(a as i32)).product::<f64>()).abs())
                .sum();
            prop_assert!(v >= -1e-12 * scale.max(1.0), "{name}: {v}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn relations_vanish_on_mixtures(m in mixture(), w in 1u32..=5) {
        let d = Density::from(m);
        for mono in Monomial::all_of_weight(w) {
            let e = moment_eval(&ibp_relation(&mono), &d, &cfg()).unwrap();
            prop_assert!(e.value.abs() <= 1e-9 * e.scale.max(1.0), "{mono}: {} vs {}", e.value, e.scale);
        }
    }

    #[test]
    fn reduction_is_numerically_invisible(m in mixture(), e in (2u32..=5).prop_flat_map(expr_of_weight)) {
        let d = Density::from(m);
        let a = moment_eval(&e, &d, &cfg()).unwrap();
        let b = moment_eval(&ibp_reduce(&e), &d, &cfg()).unwrap();
        prop_assert!((a.value - b.value).abs() <= 1e-9 * a.scale.max(b.scale).max(1.0));
    }

    #[test]
    fn time_derivative_commutes(m in mixture(), e in (2u32..=4).prop_flat_map(expr_of_weight), t in 0.2f64..2.0) {
        let h = 1e-3 * t;
        let at = |s: f64| moment_eval(&e, &Density::from(m.evolve(s).unwrap()), &cfg()).unwrap();
        let (p, q) = (at(t + h), at(t - h));
        let (p2, q2) = (at(t + 2.0 * h), at(t - 2.0 * h));
        let fd = (8.0 * (p.value - q.value) - (p2.value - q2.value)) / (12.0 * h);
        let exact = moment_eval(&derive_t(&e), &Density::from(m.evolve(t).unwrap()), &cfg()).unwrap();
        let tol = 1e-6 * exact.scale.max(p.scale / t).max(1.0);
        prop_assert!((fd - exact.value).abs() <= tol, "fd {fd} exact {}", exact.value);
    }

    #[test]
    fn certified_signs_hold_on_mixtures(m in mixture(), t in prop::sample::select(vec![0.05, 0.5, 2.0])) {
        let mut calc = Calculus::default();
        let evolved = m.evolve(t).unwrap();
        for name in BUILTIN_NAMES {
            let c = builtin(name).unwrap();
            let target = moment_eval(&calc.entropy_derivative(c.order).unwrap(), &Density::from(evolved.clone()), &cfg()).unwrap();
            let sign = c.sign.as_i32() as f64;
            prop_assert!(sign * target.value >= -1e-9 * target.scale, "{name}: {}", target.value);
            let direct = certificate_integral(&c, &evolved, &cfg()).unwrap();
            prop_assert!(sign * direct.value >= 0.0);
        }
    }

    #[test]
    fn pdf_derivatives_match_finite_differences(m in mixture(), y in -4.0f64..4.0) {
        let h = 1e-4;
        let up = m.pdf_derivatives(y + h, 6);
        let down = m.pdf_derivatives(y - h, 6);
        let mid = m.pdf_derivatives(y, 7);
        for i in 0..6 {
            let fd = (up[i] - down[i]) / (2.0 * h);
            let scale = mid[i + 1].abs().max(mid[i].abs()).max(m.pdf(y)).max(1e-300);
            prop_assert!((fd - mid[i + 1]).abs() <= 1e-5 * scale * (1 << i) as f64, "i={i} fd={fd} exact={}", mid[i + 1]);
        }
    }

    #[test]
    fn scaling_laws(m in mixture(), c in 0.3f64..3.0) {
        let scaled = GaussianMixture::from_triples(
            &m.components().iter().map(|k| (k.weight, c * k.mean, c * c * k.variance)).collect::<Vec<_>>(),
        ).unwrap();
        let (a, b) = (Density::from(m), Density::from(scaled));
        let ia = fisher(&a, &cfg()).unwrap().value;
        let ib = fisher(&b, &cfg()).unwrap().value;
        prop_assert!((ib - ia / (c * c)).abs() <= 1e-8 * ib);
        let ha = entropy(&a, &cfg()).unwrap().value;
        let hb = entropy(&b, &cfg()).unwrap().value;
        prop_assert!((hb - ha - c.ln()).abs() <= 1e-8);
    }

    #[test]
    fn heat_flow_preserves_mass(m in mixture(), t in 0.0f64..2.0) {
        let g = DensityGrid::sample(&m).unwrap();
        prop_assert!((g.mass() - 1.0).abs() < 1e-12);
        let e = heat_evolve_grid(&g, t).unwrap();
        prop_assert!((e.mass() - 1.0).abs() < 1e-9);
    }
}

#[test]
fn entropy_derivatives_are_weight_homogeneous() {
    let mut calc = Calculus::default();
    for n in 1..=calc.cap() {
        let e = calc.entropy_derivative(n).unwrap();
        assert!(e.terms().all(|(m, _)| m.weight() == 2 * n), "n={n}");
    }
}
