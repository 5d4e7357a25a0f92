//! GIRG model: parameters, the Poisson vertex process with power-law weights,
//! and the pairwise edge probability.

use std::fmt;

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{Error, Result};
use crate::geometry::{self, TorusPoint};
use crate::graph::Graph;
use crate::rng::{self, Phase};
use crate::sampler;

/// Decay parameter of the edge kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Alpha {
    Finite(f64),
    /// Threshold model: connect iff within the `c1` ball.
    Infinite,
}

impl Alpha {
    pub fn is_infinite(self) -> bool {
        matches!(self, Alpha::Infinite)
    }
}

impl fmt::Display for Alpha {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Alpha::Finite(a) => write!(f, "{a}"),
            Alpha::Infinite => f.write_str("inf"),
        }
    }
}

impl std::str::FromStr for Alpha {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "INF" | "infinity" | "INFINITY" | "Infinity" => Ok(Alpha::Infinite),
            other => other
                .parse::<f64>()
                .map(|a| if a.is_infinite() { Alpha::Infinite } else { Alpha::Finite(a) })
                .map_err(|e| Error::invalid(format!("alpha `{other}`: {e}"))),
        }
    }
}

/// Free parameters of the GIRG model plus the sampling seed.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    /// Intensity of the Poisson process (expected vertex count).
    pub n: f64,
    pub d: usize,
    pub beta: f64,
    pub w_min: f64,
    pub alpha: Alpha,
    /// Multiplicative constant of the polynomial kernel.
    pub kernel_c: f64,
    /// Always-connect radius constant.
    pub c1: f64,
    /// Outer constant of the threshold band; kept for validation only.
    pub c2: f64,
    /// Edges inside the `c1` ball are present with probability one.
    pub ep3: bool,
    pub seed: u64,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            n: 10_000.0,
            d: 2,
            beta: 2.5,
            w_min: 1.0,
            alpha: Alpha::Infinite,
            kernel_c: 1.0,
            c1: 1.0,
            c2: 1.0,
            ep3: false,
            seed: 0,
        }
    }
}

impl ModelParams {
    pub fn new(n: f64, d: usize, beta: f64, w_min: f64, alpha: Alpha) -> Self {
        ModelParams {
            n,
            d,
            beta,
            w_min,
            alpha,
            ..Default::default()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_ep3(mut self, ep3: bool) -> Self {
        self.ep3 = ep3;
        self
    }

    pub fn with_c1(mut self, c1: f64) -> Self {
        self.c1 = c1;
        self.c2 = self.c2.max(c1);
        self
    }

    pub fn with_kernel_c(mut self, kernel_c: f64) -> Self {
        self.kernel_c = kernel_c;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, reason: String| Err(Error::config(field, reason));
        if !(self.n >= 0.0) || !self.n.is_finite() {
            return bad("n", format!("must be a finite non-negative real, got {}", self.n));
        }
        if self.n >= u32::MAX as f64 / 2.0 {
            return bad("n", "too large for 32-bit vertex ids".into());
        }
        if self.d == 0 {
            return bad("d", "must be positive".into());
        }
        if !(self.beta > 2.0 && self.beta < 3.0) {
            return bad("beta", format!("must lie in (2, 3), got {}", self.beta));
        }
        if !(self.w_min > 0.0) || !self.w_min.is_finite() {
            return bad("wmin", format!("must be positive, got {}", self.w_min));
        }
        if let Alpha::Finite(a) = self.alpha {
            if !(a > 1.0) {
                return bad("alpha", format!("must exceed 1 or be inf, got {a}"));
            }
        }
        if !(self.kernel_c > 0.0) || !self.kernel_c.is_finite() {
            return bad("kernel_c", format!("must be positive, got {}", self.kernel_c));
        }
        if !(self.c1 > 0.0) || !self.c1.is_finite() {
            return bad("c1", format!("must be positive, got {}", self.c1));
        }
        if !(self.c2 >= self.c1) || !self.c2.is_finite() {
            return bad("c2", format!("must satisfy c1 <= c2, got c1={} c2={}", self.c1, self.c2));
        }
        Ok(())
    }

    pub(crate) fn kernel(&self) -> EdgeKernel {
        EdgeKernel {
            inv_norm: 1.0 / (self.w_min * self.n),
            d: self.d as i32,
            alpha: match self.alpha {
                Alpha::Finite(a) => a,
                Alpha::Infinite => f64::INFINITY,
            },
            kernel_c: self.kernel_c,
            c1: self.c1,
            ep3: self.ep3,
        }
    }
}

/// Precomputed form of the edge probability.
#[derive(Debug, Clone, Copy)]
pub(crate) struct EdgeKernel {
    pub inv_norm: f64,
    pub d: i32,
    pub alpha: f64,
    pub kernel_c: f64,
    pub c1: f64,
    pub ep3: bool,
}

impl EdgeKernel {
    /// Edge probability for weight product `ww` at torus distance `dist`.
    #[inline]
    pub fn prob(&self, ww: f64, dist: f64) -> f64 {
        let scale = ww * self.inv_norm;
        let vol = dist.powi(self.d);
        let inside = vol <= self.c1 * scale;
        if self.alpha.is_infinite() {
            return if inside { 1.0 } else { 0.0 };
        }
        if self.ep3 && inside {
            return 1.0;
        }
        let q = scale / vol;
        (self.kernel_c * q.powf(self.alpha)).min(1.0)
    }

    /// Volume `dist^d` below which the probability bound is one.
    pub fn saturation_volume(&self, ww: f64) -> f64 {
        let scale = ww * self.inv_norm;
        if self.alpha.is_infinite() {
            return self.c1 * scale;
        }
        let kernel = self.kernel_c.powf(1.0 / self.alpha) * scale;
        if self.ep3 {
            kernel.max(self.c1 * scale)
        } else {
            kernel
        }
    }
}

/// A vertex of a GIRG.
#[derive(Debug, Clone, PartialEq)]
pub struct Vertex {
    pub id: usize,
    pub pos: TorusPoint,
    pub weight: f64,
}

/// Inverse-CDF power-law weight: `w_min * u^(-1/(beta-1))` for `u` in `(0, 1]`.
///
/// The density is `(beta-1) w_min^(beta-1) w^(-beta)` on `[w_min, inf)`, so
/// `P[W >= w] = (w / w_min)^(1-beta)`.
pub fn sample_weight(params: &ModelParams, uniform: f64) -> Result<f64> {
    if !(uniform > 0.0 && uniform <= 1.0) {
        return Err(Error::invalid(format!("uniform {uniform} outside (0, 1]")));
    }
    if !(params.beta > 1.0) {
        return Err(Error::invalid("weight density needs beta > 1"));
    }
    Ok(params.w_min * uniform.powf(-1.0 / (params.beta - 1.0)))
}

/// Draws the Poisson point process of intensity `n` with i.i.d. weights.
pub fn sample_vertices(params: &ModelParams) -> Result<Vec<Vertex>> {
    params.validate()?;
    let count = if params.n > 0.0 {
        let poisson = Poisson::new(params.n).map_err(|e| Error::invalid(e.to_string()))?;
        poisson.sample(&mut rng::phase_rng(params.seed, Phase::Count)) as usize
    } else {
        0
    };
    let mut pos_rng = rng::phase_rng(params.seed, Phase::Positions);
    let mut w_rng = rng::phase_rng(params.seed, Phase::Weights);
    let mut out = Vec::with_capacity(count);
    for id in 0..count {
        let coords: Vec<f64> = (0..params.d).map(|_| pos_rng.random::<f64>()).collect();
        let weight = sample_weight(params, rng::open_closed_unit(&mut w_rng))?;
        out.push(Vertex {
            id,
            pos: TorusPoint::new(coords)?,
            weight,
        });
    }
    Ok(out)
}

/// Probability that `u` and `v` are adjacent.
pub fn edge_probability(params: &ModelParams, u: &Vertex, v: &Vertex) -> Result<f64> {
    if u.id == v.id {
        return Err(Error::invalid("edge probability of a vertex with itself"));
    }
    let dist = geometry::torus_distance(&u.pos, &v.pos)?;
    Ok(params.kernel().prob(u.weight * v.weight, dist))
}

/// Samples a GIRG: Poisson vertices, then independent edges.
pub fn sample_graph(params: &ModelParams) -> Result<Graph> {
    let vertices = sample_vertices(params)?;
    sample_graph_on(params, vertices)
}

/// Samples a GIRG whose vertex set is the Poisson process plus `injected`
/// vertices with fixed weights and positions. The injected vertices receive
/// ids `0..injected.len()`, in order.
pub fn sample_graph_with(params: &ModelParams, injected: &[(f64, TorusPoint)]) -> Result<Graph> {
    let sampled = sample_vertices(params)?;
    let mut vertices = Vec::with_capacity(sampled.len() + injected.len());
    for (weight, pos) in injected {
        if pos.dim() != params.d {
            return Err(Error::invalid("injected vertex has wrong dimension"));
        }
        if !(*weight >= params.w_min) {
            return Err(Error::invalid(format!(
                "injected weight {weight} below w_min {}",
                params.w_min
            )));
        }
        vertices.push(Vertex {
            id: vertices.len(),
            pos: pos.clone(),
            weight: *weight,
        });
    }
    let k = vertices.len();
    vertices.extend(sampled.into_iter().map(|mut v| {
        v.id += k;
        v
    }));
    sample_graph_on(params, vertices)
}

/// Samples independent edges on a fixed vertex set. Ids must be `0..len`.
pub fn sample_graph_on(params: &ModelParams, vertices: Vec<Vertex>) -> Result<Graph> {
    params.validate()?;
    let (weights, coords) = Graph::split_vertices(params, &vertices)?;
    let mut rng = rng::phase_rng(params.seed, Phase::Edges);
    let edges = sampler::sample_edges(&params.kernel(), params.w_min, params.d, &weights, &coords, &mut rng);
    Graph::from_raw(params.clone(), weights, coords, &edges)
}

/// Monte-Carlo estimate of the marginal edge probability of two vertices
/// with fixed weights and independent uniform positions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarginalEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub trials: usize,
}

pub fn marginal_edge_probability_estimate(
    params: &ModelParams,
    w_u: f64,
    w_v: f64,
    trials: usize,
) -> Result<MarginalEstimate> {
    if trials == 0 {
        return Err(Error::invalid("trials must be at least 1"));
    }
    let kernel = params.kernel();
    let mut rng = rng::phase_rng(params.seed, Phase::Pairs);
    let mut x = vec![0.0; params.d];
    let mut y = vec![0.0; params.d];
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..trials {
        x.iter_mut().for_each(|c| *c = rng.random());
        y.iter_mut().for_each(|c| *c = rng.random());
        let p = kernel.prob(w_u * w_v, geometry::dist(&x, &y));
        sum += p;
        sum_sq += p * p;
    }
    let t = trials as f64;
    let mean = sum / t;
    let var = if trials > 1 {
        ((sum_sq - t * mean * mean) / (t - 1.0)).max(0.0)
    } else {
        0.0
    };
    Ok(MarginalEstimate {
        estimate: mean,
        std_error: (var / t).sqrt(),
        trials,
    })
}
