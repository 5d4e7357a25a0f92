#![allow(dead_code)]

use girg_nav::patching::{EventKind, PatchEvent, PatchOutcome, PatchStatus};
use girg_nav::routing::{Objective, Score};
use girg_nav::{Alpha, Graph, ModelParams, TorusPoint, Vertex, VertexId};

/// Objective given by a score table; the target scores `Top`.
pub struct Table {
    pub scores: Vec<f64>,
    pub target: VertexId,
}

impl Objective for Table {
    fn target(&self) -> VertexId {
        self.target
    }

    fn score(&self, v: VertexId) -> Score {
        if v == self.target {
            Score::Top
        } else {
            Score::Finite(self.scores[v])
        }
    }
}

/// Graph on `n` vertices spaced along the circle, weights `1 + i`.
pub fn line_graph(n: usize, edges: &[(usize, usize)]) -> Graph {
    let params = ModelParams::new(n as f64, 1, 2.5, 1.0, Alpha::Infinite);
    let vs: Vec<Vertex> = (0..n)
        .map(|i| Vertex {
            id: i,
            pos: TorusPoint::new(vec![i as f64 / n as f64]).unwrap(),
            weight: 1.0 + i as f64,
        })
        .collect();
    Graph::from_parts(params, &vs, edges).unwrap()
}

/// Walk record with one explore event per position.
pub fn walk(path: Vec<VertexId>, status: PatchStatus) -> PatchOutcome {
    let event_log = path
        .iter()
        .enumerate()
        .map(|(i, &v)| PatchEvent {
            step: i,
            kind: EventKind::Explore,
            vertex: v,
            phi: None,
        })
        .collect();
    let mut distinct = path.clone();
    distinct.sort_unstable();
    distinct.dedup();
    PatchOutcome {
        steps: path.len() - 1,
        distinct_visited: distinct.len(),
        max_vertex_memory_words: 0,
        single_phi_violations: 0,
        event_log,
        status,
        path,
    }
}

/// Number of low vertices hanging off the local maximum in [`pressure_fixture`].
pub const PRESSURE_LEAVES: usize = 150;

/// A walk pulled into a low region: it makes only greedy choices and keeps
/// discovering new vertices, but after reaching the record vertex `v1` it
/// never visits `v1`'s better neighbor `x`, which leads to the target.
///
/// Vertices: `0 = s`, `1 = v1`, `2 = v2`, `3 = x`, `4 = t`, then leaves
/// `5..` attached to `v2` with decreasing scores.
pub fn pressure_fixture() -> (Graph, Table, PatchOutcome) {
    let n = 5 + PRESSURE_LEAVES;
    let mut edges = vec![(0, 1), (1, 2), (1, 3), (3, 4)];
    let mut scores = vec![1.0, 5.0, 7.0, 6.0, 0.0];
    for i in 0..PRESSURE_LEAVES {
        edges.push((2, 5 + i));
        scores.push(0.5 - i as f64 * 1e-3);
    }
    let g = line_graph(n, &edges);
    let obj = Table { scores, target: 4 };
    let mut path = vec![0, 1, 2];
    for i in 0..PRESSURE_LEAVES {
        path.push(5 + i);
        path.push(2);
    }
    (g, obj, walk(path, PatchStatus::StepLimit))
}

/// Edge probability at torus distance `r`, written out from the model
/// definition.
pub fn kernel_reference(p: &ModelParams, ww: f64, r: f64) -> f64 {
    let scale = ww / (p.w_min * p.n);
    let vol = r.powi(p.d as i32);
    let inside = vol <= p.c1 * scale;
    match p.alpha {
        Alpha::Infinite => f64::from(u8::from(inside)),
        Alpha::Finite(_) if p.ep3 && inside => 1.0,
        Alpha::Finite(a) => (p.kernel_c * (scale / vol).powf(a)).min(1.0),
    }
}

/// Marginal edge probability of two vertices with weight product `ww` and
/// independent uniform positions.
///
/// The max-norm torus distance of two uniform points has CDF `(2r)^d` on
/// `[0, 1/2]`, so the marginal is a one-dimensional Stieltjes integral,
/// evaluated by composite Simpson between the kinks of the kernel.
pub fn marginal_quadrature(p: &ModelParams, ww: f64) -> f64 {
    let d = p.d as i32;
    let scale = ww / (p.w_min * p.n);
    let mut cuts = vec![0.0, 0.5, (p.c1 * scale).powf(1.0 / d as f64)];
    if let Alpha::Finite(a) = p.alpha {
        cuts.push((p.kernel_c.powf(1.0 / a) * scale).powf(1.0 / d as f64));
    }
    cuts.retain(|&c| (0.0..=0.5).contains(&c));
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let density = |r: f64| f64::from(d) * 2f64.powi(d) * r.powi(d - 1);
    let f = |r: f64| kernel_reference(p, ww, r) * density(r);
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let m = 20_000;
        let h = (b - a) / m as f64;
        // open at the ends so the kernel jump at a cut does not leak in
        let at = |i: usize| {
            let x = a + i as f64 * h;
            f(x.clamp(a + h * 1e-9, b - h * 1e-9))
        };
        let mut s = at(0) + at(m);
        for i in 1..m {
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * at(i);
        }
        total += s * h / 3.0;
    }
    total
}
