mod common;

use std::f64::consts::PI;

use proptest::prelude::*;

use common::{marginal_quadrature, pressure_fixture, PRESSURE_LEAVES};
use girg_nav::hyperbolic::{
    embed_to_girg, hyperbolic_distance, sample_hyperbolic_graph, sample_points, sample_radius, HyperbolicParams,
};
use girg_nav::model::{marginal_edge_probability_estimate, sample_graph, sample_vertices};
use girg_nav::patching::{check_p1, check_p2, check_p3};
use girg_nav::routing::{greedy_route, phi, phi_hyperbolic, ExactPhi, RouteStatus};
use girg_nav::search::{connected_components, vertices_above_objective};
use girg_nav::{Alpha, Graph, ModelParams, TorusPoint, Vertex};

/// Mean degree per unit `w_min` of the threshold model with `d = 2`,
/// `beta = 2.5`, `c1 = 1`: `2^d c1 E[W / w_min]^2 = 4 * 3^2`.
const MEAN_DEGREE_PER_WMIN: f64 = 36.0;

/// `|V_{>= phi0}| * phi0` for the same model: `2^d E[W / w_min] = 4 * 3`.
const LEVEL_SET_CONSTANT: f64 = 12.0;

/// Largest component fraction at `n = 10^5`, `w_min = 2`, measured on seed 0.
const LARGEST_COMPONENT_WMIN2: f64 = 1.0;

fn threshold_model(n: f64, w_min: f64, seed: u64) -> ModelParams {
    ModelParams::new(n, 2, 2.5, w_min, Alpha::Infinite).with_seed(seed)
}

/// Exact expected mean degree given the realized weights:
/// `(1/N) sum_{u != v} min(1, 2^d c1 w_u w_v / (w_min n))`.
fn conditional_mean_degree(p: &ModelParams, weights: &[f64]) -> f64 {
    let k = 2f64.powi(p.d as i32) * p.c1 / (p.w_min * p.n);
    let mut sorted = weights.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut prefix = vec![0.0; sorted.len() + 1];
    for (i, w) in sorted.iter().enumerate() {
        prefix[i + 1] = prefix[i] + w;
    }
    let mut total = 0.0;
    for &w in &sorted {
        // partners with k w w' >= 1 contribute 1
        let cut = sorted.partition_point(|&x| k * w * x < 1.0);
        total += k * w * prefix[cut] + (sorted.len() - cut) as f64;
        total -= (k * w * w).min(1.0);
    }
    total / sorted.len() as f64
}

#[test]
fn mean_degree_scales_with_wmin() {
    let mut per_seed = Vec::new();
    for seed in 0..8 {
        let p = threshold_model(1e5, 1.0, seed);
        let g = sample_graph(&p).unwrap();
        let mean = 2.0 * g.edge_count() as f64 / g.vertex_count() as f64;
        let expected = conditional_mean_degree(&p, g.weights());
        assert!((mean / expected - 1.0).abs() < 0.01, "seed {seed}: {mean} vs {expected}");
        assert!((mean / MEAN_DEGREE_PER_WMIN - 1.0).abs() < 0.10, "seed {seed}: {mean}");
        per_seed.push(mean);
    }
    let avg = per_seed.iter().sum::<f64>() / per_seed.len() as f64;
    assert!((avg / MEAN_DEGREE_PER_WMIN - 1.0).abs() < 0.05, "average {avg}");

    let p = threshold_model(2e4, 3.0, 11);
    let g = sample_graph(&p).unwrap();
    let mean = 2.0 * g.edge_count() as f64 / g.vertex_count() as f64;
    let expected = conditional_mean_degree(&p, g.weights());
    assert!((mean / expected - 1.0).abs() < 0.02, "{mean} vs {expected}");
    assert!((mean / (3.0 * MEAN_DEGREE_PER_WMIN) - 1.0).abs() < 0.10, "{mean}");
}

#[test]
fn largest_component_at_wmin_two() {
    let g = sample_graph(&threshold_model(1e5, 2.0, 0)).unwrap();
    let frac = connected_components(&g).largest() as f64 / g.vertex_count() as f64;
    assert!(frac >= 0.5, "{frac}");
    assert!((frac - LARGEST_COMPONENT_WMIN2).abs() < 0.01, "{frac}");
}

#[test]
fn level_set_sizes_scale_inversely() {
    for seed in 0..3 {
        let p = threshold_model(1e5, 1.0, seed);
        let vs = sample_vertices(&p).unwrap();
        let g = Graph::from_parts(p, &vs, &[]).unwrap();
        let t = (seed as usize * 7919) % g.vertex_count();
        for phi0 in [1e-1, 1e-2, 1e-3] {
            let k = vertices_above_objective(&g, t, phi0).unwrap().len() as f64;
            let ratio = k * phi0 / LEVEL_SET_CONSTANT;
            assert!((0.2..=5.0).contains(&ratio), "seed {seed}, phi0 {phi0}: {k}");
        }
    }
}

#[test]
fn marginal_probability_matches_quadrature() {
    let cases = [
        ModelParams::new(1e4, 2, 2.5, 1.0, Alpha::Finite(2.0)),
        ModelParams::new(1e4, 1, 2.5, 1.0, Alpha::Finite(1.5)).with_kernel_c(0.3),
        ModelParams::new(1e4, 3, 2.5, 2.0, Alpha::Finite(3.0)).with_ep3(true).with_c1(2.0),
        ModelParams::new(1e4, 2, 2.5, 1.0, Alpha::Infinite).with_c1(0.5),
    ];
    for (i, p) in cases.iter().enumerate() {
        for ww in [3.0f64, 40.0, 900.0] {
            let p = p.clone().with_seed(i as u64 * 100 + ww as u64);
            let est = marginal_edge_probability_estimate(&p, ww.sqrt(), ww.sqrt(), 100_000).unwrap();
            let oracle = marginal_quadrature(&p, ww);
            let tol = 3.0 * est.std_error + 1e-9;
            assert!((est.estimate - oracle).abs() <= tol, "case {i}, ww {ww}: {} vs {oracle} (se {})", est.estimate, est.std_error);
        }
    }
}

#[test]
fn quadrature_matches_closed_forms() {
    // threshold model: the marginal is the ball volume 2^d c1 q
    let p = ModelParams::new(1e4, 2, 2.5, 1.0, Alpha::Infinite).with_c1(0.5);
    assert!((marginal_quadrature(&p, 40.0) - 4.0 * 0.5 * 40.0 / 1e4).abs() < 1e-9);
    // alpha = 2, d = 1: 2 q + integral_q^{1/2} 2 q^2 r^-2 dr = 4 q - 4 q^2
    let p = ModelParams::new(1e4, 1, 2.5, 1.0, Alpha::Finite(2.0));
    let q = 300.0 / 1e4;
    assert!((marginal_quadrature(&p, 300.0) - (4.0 * q - 4.0 * q * q)).abs() < 1e-8);
}

#[test]
fn radius_samples_follow_their_cdf() {
    let p = HyperbolicParams::new(100_000, 0.75, 0.0, 0.0).with_seed(3);
    let mut r: Vec<f64> = sample_points(&p).unwrap().iter().map(|x| x.r).collect();
    r.sort_by(f64::total_cmp);
    let big_r = p.radius();
    let cdf = |x: f64| ((0.75 * x).cosh() - 1.0) / ((0.75 * big_r).cosh() - 1.0);
    let n = r.len() as f64;
    let ks = r
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max((i as f64 + 1.0) / n - f)
        })
        .fold(0.0, f64::max);
    assert!(ks < 0.01, "KS statistic {ks}");
    assert!(r.iter().all(|&x| (0.0..=big_r).contains(&x)));
    assert_eq!(sample_radius(&p, 1.0).unwrap(), big_r);
}

#[test]
fn hyperbolic_distance_reference_values() {
    use girg_nav::hyperbolic::HyperbolicPoint;
    let a = HyperbolicPoint { r: 5.0, nu: 0.0 };
    let b = HyperbolicPoint { r: 5.0, nu: PI };
    // cosh d = cosh^2 5 + sinh^2 5 = cosh 10, so d = 10 exactly
    assert!((hyperbolic_distance(&a, &b) - 10.0).abs() < 1e-12);
    // r = 2 and 3 at angle 1: arcosh(cosh 2 cosh 3 - sinh 2 sinh 3 cos 1), 40-digit reference
    let x = HyperbolicPoint { r: 2.0, nu: 0.25 };
    let y = HyperbolicPoint { r: 3.0, nu: 1.25 };
    assert!((hyperbolic_distance(&x, &y) - 3.596_312_534_033_742).abs() < 1e-12);
    assert_eq!(hyperbolic_distance(&x, &y), hyperbolic_distance(&y, &x));
}

#[test]
fn hyperbolic_degree_tail_exponent() {
    let p = HyperbolicParams::new(100_000, 0.75, 0.0, 0.0).with_seed(0);
    let g = sample_hyperbolic_graph(&p).unwrap();
    let tail: Vec<f64> = (0..g.vertex_count())
        .map(|v| g.degree(v) as f64)
        .filter(|&d| d >= 10.0)
        .collect();
    // discrete Hill estimator with the usual half-unit continuity shift
    let exponent = 1.0 + tail.len() as f64 / tail.iter().map(|d| (d / 9.5).ln()).sum::<f64>();
    assert!((exponent - 2.5).abs() <= 0.15, "{exponent}");
}

#[test]
fn hyperbolic_objective_tracks_the_geometric_one() {
    let p = HyperbolicParams::new(20_000, 0.75, 0.0, 0.0).with_seed(8);
    let g = sample_hyperbolic_graph(&p).unwrap();
    for t in [0, 4_321, 17_777] {
        let mut ratios: Vec<f64> = (0..g.vertex_count())
            .filter(|&v| v != t)
            .map(|v| phi_hyperbolic(&g, v, t).unwrap() / phi(&g, v, t).unwrap().value())
            .collect();
        ratios.sort_by(f64::total_cmp);
        let q = |f: f64| ratios[(f * (ratios.len() - 1) as f64) as usize];
        // far from the target the ratio is sqrt 2 (theta / 2 pi) / sin(theta / 2)
        // for angular gap theta, increasing in theta; the median gap is pi / 2
        let median = q(0.5);
        assert!((median - 0.5).abs() < 0.02, "t {t}: median {median}");
        assert!(q(0.01) > median / 4.0 && q(0.99) < median * 4.0, "t {t}: {} {}", q(0.01), q(0.99));
    }
}

#[test]
fn embedding_roundtrips_coordinates() {
    let p = HyperbolicParams::new(5_000, 0.8, -1.0, 0.0).with_seed(2);
    let pts = sample_points(&p).unwrap();
    let (mp, vs) = embed_to_girg(&p, &pts).unwrap();
    assert_eq!(mp.d, 1);
    assert!((mp.beta - 2.6).abs() < 1e-12);
    for (x, v) in pts.iter().zip(&vs) {
        let back = girg_nav::hyperbolic::unembed(&p, v.weight, v.pos.coords()[0]).unwrap();
        assert!((back.r - x.r).abs() < 1e-9 && (back.nu - x.nu).abs() < 1e-9);
    }
}

#[test]
fn corrupted_walk_fails_only_the_search_check() {
    let (g, obj, walk) = pressure_fixture();
    assert_eq!(walk.steps, 2 + 2 * PRESSURE_LEAVES);
    check_p1(&walk, &g, &obj).unwrap();
    check_p2(&walk, 4.0, 2.0).unwrap();
    for exponent in [2.0, 3.0] {
        let v = check_p3(&walk, &g, &obj, 4.0, exponent).unwrap_err();
        // x (vertex 3) is the vertex the walk never reaches
        assert!(v.reason.contains(": 3 of its"), "{v}");
    }
}

/// Greedy routing written from the definitions: the message moves to the
/// neighbor of largest objective (smaller id on ties) while that beats the
/// current vertex.
fn reference_greedy(pos: &[Vec<f64>], w: &[f64], adj: &[Vec<bool>], n_param: f64, s: usize, t: usize) -> Vec<usize> {
    let d = pos[0].len() as i32;
    let dist = |a: usize, b: usize| {
        pos[a]
            .iter()
            .zip(&pos[b])
            .map(|(x, y)| {
                let z = (x - y).abs();
                z.min(1.0 - z)
            })
            .fold(0.0, f64::max)
    };
    let score = |v: usize| {
        if v == t {
            f64::INFINITY
        } else {
            w[v] / (n_param * dist(v, t).powi(d))
        }
    };
    let mut path = vec![s];
    let mut v = s;
    while v != t {
        let mut best: Option<usize> = None;
        for u in 0..w.len() {
            if adj[v][u] && best.is_none_or(|b| score(u) > score(b)) {
                best = Some(u);
            }
        }
        match best {
            Some(b) if score(b) > score(v) => {
                path.push(b);
                v = b;
            }
            _ => break,
        }
    }
    path
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn greedy_matches_the_reference_trace(
        pts in prop::collection::vec((prop::collection::vec(0.0f64..1.0, 2), 1.0f64..6.0), 4..12),
        bits in prop::collection::vec(any::<bool>(), 66),
        s_raw in any::<usize>(),
        t_raw in any::<usize>(),
    ) {
        let n = pts.len();
        let (s, t) = (s_raw % n, t_raw % n);
        prop_assume!(s != t);
        let params = ModelParams::new(n as f64, 2, 2.5, 1.0, Alpha::Infinite);
        let vs: Vec<Vertex> = pts
            .iter()
            .enumerate()
            .map(|(i, (x, w))| Vertex { id: i, pos: TorusPoint::new(x.clone()).unwrap(), weight: *w })
            .collect();
        let mut adj = vec![vec![false; n]; n];
        let mut edges = Vec::new();
        let mut k = 0;
        for u in 0..n {
            for v in u + 1..n {
                if bits[k % bits.len()] ^ (k / bits.len() % 2 == 1) {
                    adj[u][v] = true;
                    adj[v][u] = true;
                    edges.push((u, v));
                }
                k += 1;
            }
        }
        let g = Graph::from_parts(params, &vs, &edges).unwrap();
        let obj = ExactPhi::new(&g, t).unwrap();
        let got = greedy_route(&g, s, &obj, 100).unwrap();
        let pos: Vec<Vec<f64>> = pts.iter().map(|(x, _)| x.clone()).collect();
        let w: Vec<f64> = pts.iter().map(|(_, w)| *w).collect();
        let want = reference_greedy(&pos, &w, &adj, n as f64, s, t);
        prop_assert_eq!(&got.path, &want);
        prop_assert_eq!(got.status == RouteStatus::Delivered, *want.last().unwrap() == t);
    }
}

#[test]
fn four_vertex_instance() {
    // s = 0 at 0.5, a = 1 at 0.2, b = 2 at 0.7, t = 3 at 0.0, all weight 1, n = 4:
    // phi(a) = 1/(4*0.2) = 1.25, phi(b) = 1/(4*0.3) = 0.83, phi(s) = 1/(4*0.5) = 0.5
    let params = ModelParams::new(4.0, 1, 2.5, 1.0, Alpha::Infinite);
    let vs: Vec<Vertex> = [0.5, 0.2, 0.7, 0.0]
        .iter()
        .enumerate()
        .map(|(i, &x)| Vertex { id: i, pos: TorusPoint::new(vec![x]).unwrap(), weight: 1.0 })
        .collect();
    let g = Graph::from_parts(params, &vs, &[(0, 1), (0, 2), (1, 3)]).unwrap();
    assert!((phi(&g, 1, 3).unwrap().value() - 1.25).abs() < 1e-12);
    assert!((phi(&g, 2, 3).unwrap().value() - 1.0 / 1.2).abs() < 1e-12);
    assert!((phi(&g, 0, 3).unwrap().value() - 0.5).abs() < 1e-12);
    let r = greedy_route(&g, 0, &ExactPhi::new(&g, 3).unwrap(), 10).unwrap();
    assert_eq!(r.path, vec![0, 1, 3]);
    assert_eq!(r.steps, 2);
}
