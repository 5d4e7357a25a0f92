//! Objectives and greedy routing.
//!
//! Scores are compared through [`Rank`], which breaks ties between equal
//! scores in favor of the smaller vertex id. Greedy routing and both patching
//! protocols use the same order, so their choices coincide wherever the
//! protocols agree.

use std::cmp::{Ordering, Reverse};
use std::fmt;

use crate::error::{Error, Result};
use crate::geometry::dist;
use crate::graph::{Graph, VertexId};
use crate::hyperbolic;
use crate::rng::hash_unit;

/// Objective value. `Top` is the target's score and exceeds every finite value.
#[derive(Debug, Clone, Copy)]
pub enum Score {
    Finite(f64),
    Top,
}

impl Score {
    pub fn value(self) -> f64 {
        match self {
            Score::Finite(x) => x,
            Score::Top => f64::INFINITY,
        }
    }
}

impl PartialEq for Score {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Score {}

impl PartialOrd for Score {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Score {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Score::Top, Score::Top) => Ordering::Equal,
            (Score::Top, _) => Ordering::Greater,
            (_, Score::Top) => Ordering::Less,
            (Score::Finite(a), Score::Finite(b)) => a.total_cmp(b),
        }
    }
}

impl fmt::Display for Score {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Score::Finite(x) => write!(f, "{x:e}"),
            Score::Top => f.write_str("TOP"),
        }
    }
}

/// A score together with its vertex, totally ordered: larger score first,
/// then smaller id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Rank {
    pub score: Score,
    id: Reverse<VertexId>,
}

impl Rank {
    pub fn new(score: Score, vertex: VertexId) -> Self {
        Rank {
            score,
            id: Reverse(vertex),
        }
    }

    pub fn vertex(&self) -> VertexId {
        self.id.0
    }
}

/// A scoring function towards a fixed target. The target scores `Top`.
pub trait Objective {
    fn target(&self) -> VertexId;

    fn score(&self, v: VertexId) -> Score;

    fn rank(&self, v: VertexId) -> Rank {
        Rank::new(self.score(v), v)
    }
}

/// `w_v / (w_min n |x_v - x_t|^d)`.
pub fn phi(g: &Graph, v: VertexId, t: VertexId) -> Result<Score> {
    g.check_vertex(v)?;
    g.check_vertex(t)?;
    Ok(phi_unchecked(g, v, t))
}

#[inline]
fn phi_unchecked(g: &Graph, v: VertexId, t: VertexId) -> Score {
    if v == t {
        return Score::Top;
    }
    let p = g.params();
    let r = dist(g.pos(v), g.pos(t));
    Score::Finite(g.weight(v) / (p.w_min * p.n * r.powi(p.d as i32)))
}

/// The exact objective.
#[derive(Debug, Clone, Copy)]
pub struct ExactPhi<'g> {
    graph: &'g Graph,
    target: VertexId,
}

impl<'g> ExactPhi<'g> {
    pub fn new(graph: &'g Graph, target: VertexId) -> Result<Self> {
        graph.check_vertex(target)?;
        Ok(ExactPhi { graph, target })
    }
}

impl Objective for ExactPhi<'_> {
    fn target(&self) -> VertexId {
        self.target
    }

    fn score(&self, v: VertexId) -> Score {
        phi_unchecked(self.graph, v, self.target)
    }
}

/// Deterministic per-vertex perturbation of the objective.
///
/// Vertex `v` gets a factor `B_v` uniform in `band` and an exponent `E_v`
/// uniform in `[-g, g]`, both derived from `(seed, v)`. The relaxed score is
/// `phi(v) * B_v * min(w_v, 1/phi(v))^E_v`.
#[derive(Debug, Clone, PartialEq)]
pub struct Relaxation {
    pub band: (f64, f64),
    /// `g`; `None` selects [`default_relax_exponent`] of the model intensity.
    pub exponent: Option<f64>,
    pub seed: u64,
    pub weak: Option<WeakRelaxation>,
}

/// Replaces scores of vertices with `phi(v) >= cap` by a deterministic value
/// of at least `w_t^(-1 + delta/2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeakRelaxation {
    pub cap: f64,
    pub delta: f64,
}

impl Default for Relaxation {
    fn default() -> Self {
        Relaxation {
            band: (0.5, 2.0),
            exponent: None,
            seed: 0,
            weak: None,
        }
    }
}

impl Relaxation {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.band;
        if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
            return Err(Error::invalid(format!("relaxation band [{lo}, {hi}] must be positive and ordered")));
        }
        if let Some(g) = self.exponent {
            if !(0.0..1.0).contains(&g) {
                return Err(Error::invalid(format!("relaxation exponent {g} outside [0, 1)")));
            }
        }
        if let Some(w) = self.weak {
            if !(w.cap > 0.0 && w.delta > 0.0 && w.delta < 1.0) {
                return Err(Error::invalid("weak relaxation needs cap > 0 and delta in (0, 1)"));
            }
        }
        Ok(())
    }

    fn exponent_for(&self, n: f64) -> f64 {
        self.exponent.unwrap_or_else(|| default_relax_exponent(n))
    }
}

/// `1 / ln(ln(max(n, 27)))`.
pub fn default_relax_exponent(n: f64) -> f64 {
    1.0 / n.max(27.0).ln().ln()
}

/// Relaxed objective of `v` towards `t`.
pub fn phi_relaxed(g: &Graph, v: VertexId, t: VertexId, relax: &Relaxation) -> Result<Score> {
    relax.validate()?;
    let phi = phi(g, v, t)?;
    Ok(relaxed_score(g, v, t, phi, relax, relax.exponent_for(g.params().n)))
}

fn relaxed_score(g: &Graph, v: VertexId, t: VertexId, phi: Score, relax: &Relaxation, exponent: f64) -> Score {
    let Score::Finite(phi) = phi else {
        return Score::Top;
    };
    if let Some(weak) = relax.weak {
        if phi >= weak.cap {
            let floor = g.weight(t).powf(-1.0 + weak.delta / 2.0);
            return Score::Finite(floor * (1.0 + hash_unit(relax.seed ^ 0x5745_414B, v as u64)));
        }
    }
    let (lo, hi) = relax.band;
    let factor = lo + (hi - lo) * hash_unit(relax.seed, 2 * v as u64);
    let e = exponent * (2.0 * hash_unit(relax.seed, 2 * v as u64 + 1) - 1.0);
    let base = g.weight(v).min(1.0 / phi);
    Score::Finite(phi * factor * base.powf(e))
}

/// The relaxed objective bound to a graph and target.
#[derive(Debug, Clone)]
pub struct RelaxedPhi<'g> {
    graph: &'g Graph,
    target: VertexId,
    relax: Relaxation,
    exponent: f64,
}

impl<'g> RelaxedPhi<'g> {
    pub fn new(graph: &'g Graph, target: VertexId, relax: Relaxation) -> Result<Self> {
        graph.check_vertex(target)?;
        relax.validate()?;
        let exponent = relax.exponent_for(graph.params().n);
        Ok(RelaxedPhi {
            graph,
            target,
            relax,
            exponent,
        })
    }
}

impl Objective for RelaxedPhi<'_> {
    fn target(&self) -> VertexId {
        self.target
    }

    fn score(&self, v: VertexId) -> Score {
        let phi = phi_unchecked(self.graph, v, self.target);
        relaxed_score(self.graph, v, self.target, phi, &self.relax, self.exponent)
    }
}

/// `n / (w_t w_min sqrt(cosh d_H(v, t)))` on a graph with hyperbolic coordinates.
#[derive(Debug, Clone, Copy)]
pub struct HyperbolicPhi<'g> {
    graph: &'g Graph,
    target: VertexId,
    scale: f64,
}

impl<'g> HyperbolicPhi<'g> {
    pub fn new(graph: &'g Graph, target: VertexId) -> Result<Self> {
        graph.check_vertex(target)?;
        let layer = graph
            .hyperbolic()
            .ok_or_else(|| Error::invalid("graph has no hyperbolic coordinates"))?;
        let p = &layer.params;
        let n = p.n as f64;
        let w_t = n * (-layer.points[target].r / 2.0).exp();
        let w_min = (-p.c_h / 2.0).exp();
        Ok(HyperbolicPhi {
            graph,
            target,
            scale: n / (w_t * w_min),
        })
    }
}

impl Objective for HyperbolicPhi<'_> {
    fn target(&self) -> VertexId {
        self.target
    }

    fn score(&self, v: VertexId) -> Score {
        if v == self.target {
            return Score::Top;
        }
        let pts = &self.graph.hyperbolic().expect("checked at construction").points;
        let c = hyperbolic::cosh_distance(&pts[v], &pts[self.target]);
        Score::Finite(self.scale / c.sqrt())
    }
}

/// `phi_H(v)` towards `t`.
pub fn phi_hyperbolic(g: &Graph, v: VertexId, t: VertexId) -> Result<f64> {
    g.check_vertex(v)?;
    if v == t {
        return Err(Error::invalid("hyperbolic objective of the target itself"));
    }
    Ok(HyperbolicPhi::new(g, t)?.score(v).value())
}

/// Names an objective independently of a graph.
#[derive(Debug, Clone, PartialEq)]
pub enum ObjectiveSpec {
    Phi,
    PhiRelaxed(Relaxation),
    PhiH,
}

impl ObjectiveSpec {
    pub fn bind<'g>(&self, g: &'g Graph, target: VertexId) -> Result<Box<dyn Objective + 'g>> {
        Ok(match self {
            ObjectiveSpec::Phi => Box::new(ExactPhi::new(g, target)?),
            ObjectiveSpec::PhiRelaxed(r) => Box::new(RelaxedPhi::new(g, target, r.clone())?),
            ObjectiveSpec::PhiH => Box::new(HyperbolicPhi::new(g, target)?),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            ObjectiveSpec::Phi => "phi",
            ObjectiveSpec::PhiRelaxed(_) => "phi-relaxed",
            ObjectiveSpec::PhiH => "phi-h",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RouteStatus {
    Delivered,
    DeadEnd,
    StepLimit,
}

impl fmt::Display for RouteStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RouteStatus::Delivered => "DELIVERED",
            RouteStatus::DeadEnd => "DEAD_END",
            RouteStatus::StepLimit => "STEP_LIMIT",
        })
    }
}

/// One greedy move.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceStep {
    pub vertex: VertexId,
    pub score: Score,
    /// Neighbors scored at the vertex the move left from.
    pub inspected: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RouteOutcome {
    pub path: Vec<VertexId>,
    pub status: RouteStatus,
    pub steps: usize,
    pub trace: Vec<TraceStep>,
}

/// `10 * ceil(log2(n) + 1)`.
pub fn default_step_limit(n: usize) -> usize {
    10 * ((n.max(1) as f64).log2() + 1.0).ceil() as usize
}

/// Best neighbor of `v` under `obj`, if `v` has neighbors.
#[inline]
pub(crate) fn best_neighbor(g: &Graph, obj: &dyn Objective, v: VertexId) -> Option<Rank> {
    g.neighbors(v).iter().map(|&u| obj.rank(u as usize)).max()
}

/// Greedy routing from `s` towards the objective's target.
pub fn greedy_route(g: &Graph, s: VertexId, obj: &dyn Objective, step_limit: usize) -> Result<RouteOutcome> {
    g.check_vertex(s)?;
    let t = obj.target();
    g.check_vertex(t)?;
    if step_limit == 0 {
        return Err(Error::invalid("step limit must be at least 1"));
    }
    let mut path = vec![s];
    let mut trace = Vec::new();
    let mut cur = obj.rank(s);
    let status = loop {
        let v = cur.vertex();
        if v == t {
            break RouteStatus::Delivered;
        }
        if trace.len() == step_limit {
            break RouteStatus::StepLimit;
        }
        match best_neighbor(g, obj, v) {
            Some(best) if best.score > cur.score => {
                path.push(best.vertex());
                trace.push(TraceStep {
                    vertex: best.vertex(),
                    score: best.score,
                    inspected: g.degree(v),
                });
                cur = best;
            }
            _ => break RouteStatus::DeadEnd,
        }
    };
    Ok(RouteOutcome {
        steps: path.len() - 1,
        path,
        status,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::TorusPoint;
    use crate::model::{Alpha, ModelParams, Vertex};

    fn graph(d: usize, n: f64, vs: &[(&[f64], f64)], edges: &[(usize, usize)]) -> Graph {
        let params = ModelParams::new(n, d, 2.5, 1.0, Alpha::Infinite);
        let vs: Vec<Vertex> = vs
            .iter()
            .enumerate()
            .map(|(i, (x, w))| Vertex {
                id: i,
                pos: TorusPoint::new(x.to_vec()).unwrap(),
                weight: *w,
            })
            .collect();
        Graph::from_parts(params, &vs, edges).unwrap()
    }

    #[test]
    fn score_order() {
        assert!(Score::Top > Score::Finite(f64::INFINITY));
        assert!(Score::Finite(2.0) > Score::Finite(1.0));
        assert!(Rank::new(Score::Finite(1.0), 3) > Rank::new(Score::Finite(1.0), 4));
        assert!(Rank::new(Score::Finite(1.5), 9) > Rank::new(Score::Finite(1.0), 0));
    }

    #[test]
    fn phi_examples() {
        // v at distance 0.1 with weight 2, n = 100
        let g = graph(1, 100.0, &[(&[0.0], 1.0), (&[0.1], 2.0), (&[0.9], 4.0), (&[0.05], 2.0)], &[]);
        assert_eq!(phi(&g, 0, 0).unwrap(), Score::Top);
        assert!((phi(&g, 1, 0).unwrap().value() - 0.2).abs() < 1e-12);
        // double weight, same distance by wrap-around
        let a = phi(&g, 2, 0).unwrap().value();
        assert!((a - 0.4).abs() < 1e-12);
        // half distance
        assert!((phi(&g, 3, 0).unwrap().value() - 0.4).abs() < 1e-12);
    }

    #[test]
    fn relaxation_degenerate_band_is_exact() {
        let g = graph(2, 50.0, &[(&[0.0, 0.0], 1.0), (&[0.3, 0.1], 3.0), (&[0.7, 0.6], 1.5)], &[]);
        let r = Relaxation {
            band: (1.0, 1.0),
            exponent: Some(0.0),
            ..Default::default()
        };
        for v in 0..3 {
            assert_eq!(phi_relaxed(&g, v, 0, &r).unwrap(), phi(&g, v, 0).unwrap());
        }
        let r = Relaxation::default();
        assert_eq!(phi_relaxed(&g, 1, 0, &r).unwrap(), phi_relaxed(&g, 1, 0, &r).unwrap());
        let bad = Relaxation {
            band: (0.0, 1.0),
            ..Default::default()
        };
        assert!(phi_relaxed(&g, 1, 0, &bad).is_err());
    }

    #[test]
    fn relaxation_stays_in_envelope() {
        let g = graph(2, 50.0, &[(&[0.0, 0.0], 1.0), (&[0.3, 0.1], 3.0), (&[0.45, 0.2], 1.5)], &[]);
        let r = Relaxation {
            exponent: Some(0.2),
            ..Default::default()
        };
        for v in 1..3 {
            let p = phi(&g, v, 0).unwrap().value();
            let q = phi_relaxed(&g, v, 0, &r).unwrap().value();
            let m = g.weight(v).min(1.0 / p);
            let (lo, hi) = (m.powf(-0.2).min(m.powf(0.2)), m.powf(-0.2).max(m.powf(0.2)));
            assert!(q >= 0.5 * p * lo * (1.0 - 1e-12) && q <= 2.0 * p * hi * (1.0 + 1e-12));
        }
    }

    #[test]
    fn greedy_examples() {
        // s=0, a=1, b=2, t=3 on a line: phi(a) > phi(b) > phi(s)
        let g = graph(
            1,
            10.0,
            &[(&[0.5], 1.0), (&[0.2], 1.0), (&[0.7], 1.0), (&[0.0], 1.0), (&[0.3], 1.0)],
            &[(0, 1), (0, 2), (1, 3)],
        );
        let obj = ExactPhi::new(&g, 3).unwrap();
        let out = greedy_route(&g, 0, &obj, 10).unwrap();
        assert_eq!(out.status, RouteStatus::Delivered);
        assert_eq!(out.path, vec![0, 1, 3]);
        assert_eq!(out.steps, 2);
        assert_eq!(out.trace[0].inspected, 2);
        let out = greedy_route(&g, 3, &obj, 10).unwrap();
        assert_eq!((out.status, out.steps), (RouteStatus::Delivered, 0));
        let isolated = greedy_route(&g, 4, &obj, 10).unwrap();
        assert_eq!((isolated.status, isolated.steps), (RouteStatus::DeadEnd, 0));
        let limited = greedy_route(&g, 0, &obj, 1).unwrap();
        assert_eq!((limited.status, limited.steps), (RouteStatus::StepLimit, 1));
        assert!(greedy_route(&g, 0, &obj, 0).is_err());
        assert!(greedy_route(&g, 7, &obj, 5).is_err());
    }

    #[test]
    fn step_limit_default() {
        assert_eq!(default_step_limit(1), 10);
        assert_eq!(default_step_limit(1024), 110);
        assert_eq!(default_step_limit(1000), 110);
    }
}
