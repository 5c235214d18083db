mod common;

use metricreact::algebra::{det_poly, row_subtracted, DenseMatrix};
use metricreact::document::GraphDocument;
use metricreact::feynman_kac::{evaluate_at, solve_survival};
use metricreact::harmonic::{green_matrix, hitting_split};
use metricreact::kac::{
    chain_alpha_recursive, conversion, rational_form, survival_det, survival_on_active, ChainSpec,
};
use metricreact::{
    derive_weights, split_at, split_weighted, EdgeWeights, KappaSpec, MetricGraph, PointOnGraph,
    Role,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn graph_from_seed(seed: u64, uniform: bool) -> (common::RandomGraph, ChaCha8Rng) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r = common::random_graph(&mut rng, 8, 3, uniform);
    (r, rng)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn weight_rows_sum_to_one(seed in any::<u64>()) {
        let (r, _) = graph_from_seed(seed, false);
        let w = derive_weights(&r.graph);
        for v in 0..r.graph.num_vertices() {
            prop_assert!((w.row_sum(&r.graph, v) - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn methods_agree(seed in any::<u64>(), kappa in 0.0f64..50.0) {
        let (r, _) = graph_from_seed(seed, false);
        let w = derive_weights(&r.graph);
        let x = PointOnGraph::Vertex(r.start);
        let kac = conversion(&r.graph, &w, x, &KappaSpec::Uniform(kappa)).unwrap();
        let field = solve_survival(&r.graph, &w, &KappaSpec::Uniform(kappa)).unwrap();
        prop_assert!((kac.psi - evaluate_at(&field, &r.graph, x)).abs() <= 1e-9);
    }

    #[test]
    fn per_site_rates_agree_with_feynman_kac(seed in any::<u64>()) {
        let (r, mut rng) = graph_from_seed(seed, false);
        let w = derive_weights(&r.graph);
        let ks = KappaSpec::PerSite((0..r.graph.active().len()).map(|_| rng.gen_range(0.0..20.0)).collect());
        let x = PointOnGraph::Vertex(r.start);
        let kac = conversion(&r.graph, &w, x, &ks).unwrap();
        let field = solve_survival(&r.graph, &w, &ks).unwrap();
        prop_assert!((kac.psi - evaluate_at(&field, &r.graph, x)).abs() <= 1e-9);
    }

    #[test]
    fn determinant_ratios_match_linear_solve(seed in any::<u64>(), kappa in 0.0f64..30.0) {
        let (r, _) = graph_from_seed(seed, false);
        let green = green_matrix(&r.graph, &derive_weights(&r.graph)).unwrap();
        let ks = KappaSpec::Uniform(kappa);
        let solved = survival_on_active(&green, &ks).unwrap();
        for (j, psi) in solved.iter().enumerate() {
            prop_assert!((survival_det(&green, &ks, j).unwrap() - psi).abs() <= 1e-12);
        }
    }

    #[test]
    fn survival_obeys_maximum_principle(seed in any::<u64>(), kappa in 0.0f64..50.0) {
        let (r, _) = graph_from_seed(seed, false);
        let field = solve_survival(&r.graph, &derive_weights(&r.graph), &KappaSpec::Uniform(kappa)).unwrap();
        for (v, &u) in field.values.iter().enumerate() {
            prop_assert!((0.0..=1.0).contains(&u));
            if r.graph.role(v) == Role::Exit {
                prop_assert_eq!(u, 1.0);
            }
        }
    }

    #[test]
    fn green_matrix_is_degree_symmetric_for_uniform_weights(seed in any::<u64>()) {
        let (r, _) = graph_from_seed(seed, true);
        let g = green_matrix(&r.graph, &EdgeWeights::uniform(&r.graph)).unwrap();
        let deg: Vec<f64> = g.active.iter().map(|&c| r.graph.degree(c) as f64).collect();
        let scale = g.matrix.max_abs().max(1.0);
        for i in 0..g.dim() {
            prop_assert!(g.get(i, i) > 0.0);
            for j in 0..g.dim() {
                prop_assert!(g.get(i, j) >= 0.0);
                let asym = (g.get(i, j) / deg[j] - g.get(j, i) / deg[i]).abs();
                prop_assert!(asym <= 1e-10 * scale);
            }
        }
        if deg.iter().all(|&d| d == deg[0]) {
            prop_assert!(g.max_asymmetry() <= 1e-9 * scale);
        }
    }

    #[test]
    fn rational_form_reproduces_conversion(seed in any::<u64>()) {
        let (r, _) = graph_from_seed(seed, false);
        let w = derive_weights(&r.graph);
        let x = PointOnGraph::Vertex(r.start);
        let form = rational_form(&r.graph, &w, x).unwrap();
        prop_assert_eq!(form.numerator.coeff(0), 0.0);
        prop_assert_eq!(form.denominator.coeff(0), 1.0);
        for i in 0..20 {
            let k = 0.02 * 1.5f64.powi(i);
            let alpha = conversion(&r.graph, &w, x, &KappaSpec::Uniform(k)).unwrap().alpha;
            prop_assert!((form.eval(k) - alpha).abs() <= 1e-9);
        }
    }

    #[test]
    fn conversion_limits(seed in any::<u64>()) {
        let (r, _) = graph_from_seed(seed, false);
        let w = derive_weights(&r.graph);
        let x = PointOnGraph::Vertex(r.start);
        let split = hitting_split(&r.graph, &w, x).unwrap();
        prop_assert_eq!(conversion(&r.graph, &w, x, &KappaSpec::Uniform(0.0)).unwrap().alpha, 0.0);
        let inf = conversion(&r.graph, &w, x, &KappaSpec::Uniform(f64::INFINITY)).unwrap();
        prop_assert_eq!(inf.alpha, split.alpha_inf);
        let big = conversion(&r.graph, &w, x, &KappaSpec::Uniform(1e6)).unwrap();
        prop_assert!((big.alpha - split.alpha_inf).abs() <= 1e-4);
        if !split.p.is_empty() && split.alpha_inf > 0.0 {
            prop_assert!((split.p.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn splitting_then_solving_matches_interpolation(seed in any::<u64>(), t in 0.05f64..0.95, kappa in 0.0f64..20.0) {
        let (r, mut rng) = graph_from_seed(seed, true);
        let w = EdgeWeights::uniform(&r.graph);
        let e = rng.gen_range(0..r.graph.num_edges());
        let x = PointOnGraph::Edge { edge: e, offset: t * r.graph.edge(e).length };
        let (sg, mid) = split_at(&r.graph, x).unwrap();
        let sw = EdgeWeights::uniform(&sg);
        let ks = KappaSpec::Uniform(kappa);
        let field = solve_survival(&r.graph, &w, &ks).unwrap();
        let split_field = solve_survival(&sg, &sw, &ks).unwrap();
        prop_assert!((split_field.at_vertex(mid) - evaluate_at(&field, &r.graph, x)).abs() <= 1e-12);
        let on_edge = conversion(&r.graph, &w, x, &ks).unwrap().alpha;
        let at_vertex = conversion(&sg, &sw, PointOnGraph::Vertex(mid), &ks).unwrap().alpha;
        prop_assert!((on_edge - at_vertex).abs() <= 1e-10);
    }

    #[test]
    fn degree_two_insertion_keeps_hitting_split(seed in any::<u64>(), t in 0.05f64..0.95) {
        let (r, mut rng) = graph_from_seed(seed, false);
        let w = derive_weights(&r.graph);
        let e = rng.gen_range(0..r.graph.num_edges());
        let (sg, sw, _) = split_weighted(&r.graph, &w, PointOnGraph::Edge { edge: e, offset: t * r.graph.edge(e).length }).unwrap();
        let x = PointOnGraph::Vertex(r.start);
        let a = hitting_split(&r.graph, &w, x).unwrap();
        let b = hitting_split(&sg, &sw, x).unwrap();
        prop_assert!((a.alpha_inf - b.alpha_inf).abs() <= 1e-10);
        for (p, q) in a.p.iter().zip(&b.p) {
            prop_assert!((p - q).abs() <= 1e-10);
        }
    }

    #[test]
    fn chain_recursion_is_conversion_at_doubled_rate(m in 1usize..=5, seed in any::<u64>(), kappa in 0.0f64..10.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let chain = ChainSpec::new(common::random_chain(&mut rng, m));
        let g = chain.graph();
        let alpha = conversion(&g, &derive_weights(&g), PointOnGraph::Vertex(0), &KappaSpec::Uniform(kappa)).unwrap().alpha;
        let rec = chain_alpha_recursive(&chain.lengths, 2.0 * kappa).unwrap();
        prop_assert!((alpha - rec).abs() <= 1e-10);
        let form = chain.rational_form().unwrap();
        let lead: f64 = 2f64.powi(m as i32) * chain.lengths[1..].iter().product::<f64>();
        prop_assert!((form.denominator.coeff(m) - lead).abs() <= 1e-9 * lead.max(1.0));
    }

    #[test]
    fn det_poly_matches_pointwise_determinant(n in 1usize..=6, seed in any::<u64>(), kappa in 0.0f64..3.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut entries = Vec::with_capacity(n * n);
        for _ in 0..n * n {
            entries.push(rng.gen_range(-1.0..1.0));
        }
        let a = DenseMatrix::from_fn(n, |i, j| entries[i * n + j]);
        let p = det_poly(&a);
        let direct = DenseMatrix::from_fn(n, |i, j| if i == j { 1.0 } else { 0.0 } + kappa * a[(i, j)]).determinant();
        prop_assert!((p.eval(kappa) - direct).abs() <= 1e-9 * direct.abs().max(1.0));
        prop_assert_eq!(p.coeff(0), 1.0);
        prop_assert!(row_subtracted(&a, n - 1).is_ok());
    }

    #[test]
    fn document_round_trip_preserves_results(seed in any::<u64>()) {
        let (r, _) = graph_from_seed(seed, false);
        let net = metricreact::document::Network {
            weights: derive_weights(&r.graph),
            graph: r.graph,
            explicit_weights: Vec::new(),
            injection: Some(PointOnGraph::Vertex(r.start)),
        };
        let text = GraphDocument::from_network(&net).to_json();
        let back: metricreact::document::Network<f64> = GraphDocument::from_json(&text).unwrap().to_network().unwrap();
        let ks = KappaSpec::Uniform(1.5);
        let a = conversion(&net.graph, &net.weights, net.start().unwrap(), &ks).unwrap().alpha;
        let b = conversion(&back.graph, &back.weights, back.start().unwrap(), &ks).unwrap().alpha;
        prop_assert!((a - b).abs() <= 1e-14);
    }
}

#[test]
fn single_precision_smoke() {
    let mut g: MetricGraph<f32> = MetricGraph::new();
    let v = g.add_vertex("v0", Role::Inert);
    let c = g.add_vertex("c", Role::Active);
    let a = g.add_vertex("a", Role::Exit);
    g.add_edge(v, c, 1.0);
    g.add_edge(c, a, 1.0);
    let w = derive_weights(&g);
    let alpha = conversion(&g, &w, PointOnGraph::Vertex(v), &KappaSpec::Uniform(1.0f32))
        .unwrap()
        .alpha;
    assert!((alpha - 2.0 / 3.0).abs() < 1e-6);
    let field = solve_survival(&g, &w, &KappaSpec::Uniform(1.0f32)).unwrap();
    assert!((field.at_vertex(v) - 1.0 / 3.0).abs() < 1e-6);
}
