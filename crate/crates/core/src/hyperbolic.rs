//! Hyperbolic random graphs on a disk of radius `R = 2 ln n + C_H`, and
//! their embedding as one-dimensional GIRGs.

use std::f64::consts::{LN_2, PI, TAU};

use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::{wrap_unit, TorusPoint};
use crate::graph::Graph;
use crate::model::{Alpha, ModelParams, Vertex};
use crate::rng::{self, Phase};

#[derive(Debug, Clone, PartialEq)]
pub struct HyperbolicParams {
    /// Exact vertex count.
    pub n: usize,
    pub alpha_h: f64,
    pub c_h: f64,
    /// Temperature; 0 selects the threshold model.
    pub t_h: f64,
    pub seed: u64,
}

impl HyperbolicParams {
    pub fn new(n: usize, alpha_h: f64, c_h: f64, t_h: f64) -> Self {
        HyperbolicParams {
            n,
            alpha_h,
            c_h,
            t_h,
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Disk radius `2 ln n + C_H`.
    pub fn radius(&self) -> f64 {
        2.0 * (self.n as f64).ln() + self.c_h
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::config("n", "must be positive"));
        }
        if self.n >= u32::MAX as usize / 2 {
            return Err(Error::config("n", "too large for 32-bit vertex ids"));
        }
        if !(self.alpha_h > 0.0) || !self.alpha_h.is_finite() {
            return Err(Error::config("alpha_h", format!("must be positive, got {}", self.alpha_h)));
        }
        if !self.c_h.is_finite() {
            return Err(Error::config("c_h", "must be finite"));
        }
        if !(self.t_h >= 0.0) || !self.t_h.is_finite() {
            return Err(Error::config("t_h", format!("must be finite and non-negative, got {}", self.t_h)));
        }
        if !(self.radius() > 0.0) {
            return Err(Error::config("c_h", format!("radius 2 ln n + C_H = {} must be positive", self.radius())));
        }
        Ok(())
    }
}

/// Polar coordinates on the hyperbolic disk.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperbolicPoint {
    pub r: f64,
    pub nu: f64,
}

/// Native coordinates kept alongside a graph sampled in the hyperbolic model.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperbolicLayer {
    pub params: HyperbolicParams,
    pub points: Vec<HyperbolicPoint>,
}

/// Inverse-CDF radius: `arcosh(1 + u (cosh(a R) - 1)) / a`.
pub fn sample_radius(params: &HyperbolicParams, uniform: f64) -> Result<f64> {
    if !(uniform > 0.0 && uniform <= 1.0) {
        return Err(Error::invalid(format!("uniform {uniform} outside (0, 1]")));
    }
    let a = params.alpha_h;
    let big_r = params.radius();
    if uniform == 1.0 {
        return Ok(big_r);
    }
    let r = (1.0 + uniform * ((a * big_r).cosh() - 1.0)).acosh() / a;
    Ok(r.min(big_r))
}

/// `cosh d_H(x, y)`, at least 1.
///
/// Evaluated as `cosh(r_x - r_y) + 2 sinh r_x sinh r_y sin^2(dnu/2)`, which
/// equals the law of cosines and avoids its cancellation for close points.
#[inline]
pub fn cosh_distance(x: &HyperbolicPoint, y: &HyperbolicPoint) -> f64 {
    let s = ((x.nu - y.nu) / 2.0).sin();
    let c = (x.r - y.r).cosh() + 2.0 * x.r.sinh() * y.r.sinh() * s * s;
    c.max(1.0)
}

pub fn hyperbolic_distance(x: &HyperbolicPoint, y: &HyperbolicPoint) -> f64 {
    cosh_distance(x, y).acosh()
}

/// Threshold adjacency `d_H(x, y) <= R`, compared on the cosh scale.
#[inline]
pub fn threshold_adjacent(params: &HyperbolicParams, x: &HyperbolicPoint, y: &HyperbolicPoint) -> bool {
    cosh_distance(x, y) <= params.radius().cosh()
}

/// Logistic connection probability `1 / (1 + exp((d - R) / (2 T)))`, or the
/// threshold indicator at temperature 0.
pub fn connection_probability(params: &HyperbolicParams, x: &HyperbolicPoint, y: &HyperbolicPoint) -> f64 {
    if params.t_h == 0.0 {
        return if threshold_adjacent(params, x, y) { 1.0 } else { 0.0 };
    }
    logistic(hyperbolic_distance(x, y), params.radius(), params.t_h)
}

#[inline]
fn logistic(d: f64, big_r: f64, t: f64) -> f64 {
    1.0 / (1.0 + ((d - big_r) / (2.0 * t)).exp())
}

/// Exactly `n` points with radii from the radial density and uniform angles.
pub fn sample_points(params: &HyperbolicParams) -> Result<Vec<HyperbolicPoint>> {
    params.validate()?;
    let mut r_rng = rng::phase_rng(params.seed, Phase::Weights);
    let mut a_rng = rng::phase_rng(params.seed, Phase::Positions);
    (0..params.n)
        .map(|_| {
            let r = sample_radius(params, rng::open_closed_unit(&mut r_rng))?;
            let nu = a_rng.random::<f64>() * TAU;
            Ok(HyperbolicPoint {
                // radius 0 has probability zero; rounding must not produce it
                r: r.max(f64::MIN_POSITIVE),
                nu: if nu >= TAU { 0.0 } else { nu },
            })
        })
        .collect()
}

/// GIRG parameters of the embedding: `d = 1`, `beta = 2 a + 1`,
/// `alpha = 1 / T`, `w_min = exp(-C_H / 2)`, intensity `n`.
pub fn embedded_params(params: &HyperbolicParams) -> Result<ModelParams> {
    params.validate()?;
    if !(params.alpha_h > 0.5) {
        return Err(Error::invalid(format!("alpha_h = {} must exceed 1/2", params.alpha_h)));
    }
    if !(params.alpha_h < 1.0) {
        return Err(Error::invalid(format!(
            "alpha_h = {} gives beta outside (2, 3); need 1/2 < alpha_h < 1",
            params.alpha_h
        )));
    }
    let alpha = if params.t_h == 0.0 {
        Alpha::Infinite
    } else if params.t_h < 1.0 {
        Alpha::Finite(1.0 / params.t_h)
    } else {
        return Err(Error::invalid(format!("t_h = {} gives alpha <= 1", params.t_h)));
    };
    let mut mp = ModelParams::new(params.n as f64, 1, 2.0 * params.alpha_h + 1.0, (-params.c_h / 2.0).exp(), alpha);
    mp.seed = params.seed;
    Ok(mp)
}

/// Maps `(r, nu)` to `(w, x) = (n exp(-r/2), nu / 2 pi)`.
pub fn embed_to_girg(params: &HyperbolicParams, points: &[HyperbolicPoint]) -> Result<(ModelParams, Vec<Vertex>)> {
    let mp = embedded_params(params)?;
    let n = params.n as f64;
    let big_r = params.radius();
    let vertices = points
        .iter()
        .enumerate()
        .map(|(id, p)| {
            if !(p.r > 0.0 && p.r <= big_r) || !(0.0..TAU).contains(&p.nu) {
                return Err(Error::invalid(format!("point {id} ({}, {}) outside the disk", p.r, p.nu)));
            }
            // r = R maps to w_min up to rounding
            let weight = (n * (-p.r / 2.0).exp()).max(mp.w_min);
            Ok(Vertex {
                id,
                pos: TorusPoint::new(vec![wrap_unit(p.nu / TAU)])?,
                weight,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((mp, vertices))
}

/// Inverse of the embedding: `r = 2 ln(n / w)`, `nu = 2 pi x`.
pub fn unembed(params: &HyperbolicParams, weight: f64, x: f64) -> Result<HyperbolicPoint> {
    if !(weight > 0.0) || !weight.is_finite() {
        return Err(Error::invalid(format!("weight {weight} must be positive and finite")));
    }
    if !(0.0..1.0).contains(&x) {
        return Err(Error::invalid(format!("coordinate {x} outside [0, 1)")));
    }
    Ok(HyperbolicPoint {
        r: 2.0 * (params.n as f64 / weight).ln(),
        nu: x * TAU,
    })
}

/// Samples points and edges; the graph carries both the embedded GIRG
/// coordinates and the native hyperbolic ones.
pub fn sample_hyperbolic_graph(params: &HyperbolicParams) -> Result<Graph> {
    let points = sample_points(params)?;
    hyperbolic_graph_on(params, points)
}

/// Samples edges on fixed points.
pub fn hyperbolic_graph_on(params: &HyperbolicParams, points: Vec<HyperbolicPoint>) -> Result<Graph> {
    let (mp, vertices) = embed_to_girg(params, &points)?;
    let edges = sample_hyperbolic_edges(params, &points, &mut rng::phase_rng(params.seed, Phase::Edges));
    let (weights, coords) = Graph::split_vertices(&mp, &vertices)?;
    Ok(Graph::from_raw(mp, weights, coords, &edges)?.with_hyperbolic(HyperbolicLayer {
        params: params.clone(),
        points,
    }))
}

/// Builds a hyperbolic graph from points and a given edge list.
pub fn hyperbolic_graph_from_edges(
    params: &HyperbolicParams,
    points: Vec<HyperbolicPoint>,
    edges: &[(usize, usize)],
) -> Result<Graph> {
    let (mp, vertices) = embed_to_girg(params, &points)?;
    Ok(Graph::from_parts(mp, &vertices, edges)?.with_hyperbolic(HyperbolicLayer {
        params: params.clone(),
        points,
    }))
}

/// Points of one radial band, ordered by angle.
struct Band {
    nus: Vec<f64>,
    ids: Vec<u32>,
    r_min: f64,
}

impl Band {
    /// Index ranges of the points with angular distance at most `theta` from `nu`.
    fn window(&self, nu: f64, theta: f64) -> [std::ops::Range<usize>; 2] {
        let len = self.nus.len();
        if theta >= PI {
            return [0..len, 0..0];
        }
        let lo = nu - theta;
        let hi = nu + theta;
        let idx = |x: f64| self.nus.partition_point(|&v| v < x);
        let idx_hi = |x: f64| self.nus.partition_point(|&v| v <= x);
        if lo < 0.0 {
            [idx(lo + TAU)..len, 0..idx_hi(hi)]
        } else if hi >= TAU {
            [idx(lo)..len, 0..idx_hi(hi - TAU)]
        } else {
            [idx(lo)..idx_hi(hi), 0..0]
        }
    }
}

/// Largest angular distance at which a point at radius `r_u` can reach a
/// point at radius `r_v >= r_lo`, for the threshold `cosh d <= cosh R`.
///
/// The bound is evaluated at `r_lo`; the admissible angle shrinks as `r_v`
/// grows.
fn max_angle(r_u: f64, r_lo: f64, cosh_r: f64) -> f64 {
    let s = (cosh_r - (r_u - r_lo).cosh()) / (2.0 * r_u.sinh() * r_lo.sinh());
    if !(s < 1.0) {
        PI
    } else if s <= 0.0 {
        0.0
    } else {
        widen(2.0 * s.sqrt().asin())
    }
}

/// Slightly larger angle so that window lookups never drop boundary points.
fn widen(theta: f64) -> f64 {
    (theta * (1.0 + 1e-9) + 1e-12).min(PI)
}

fn sample_hyperbolic_edges<R: Rng + ?Sized>(
    params: &HyperbolicParams,
    points: &[HyperbolicPoint],
    rng: &mut R,
) -> Vec<(u32, u32)> {
    let big_r = params.radius();
    let cosh_r = big_r.cosh();
    // band b holds weights in [w_min 2^b, w_min 2^(b+1)), i.e. R - r in [2b ln 2, 2(b+1) ln 2)
    let band_of = |r: f64| ((big_r - r) / (2.0 * LN_2)).floor().max(0.0) as usize;
    let nb = points.iter().map(|p| band_of(p.r)).max().map_or(0, |b| b + 1);
    let mut members: Vec<Vec<(f64, u32)>> = vec![Vec::new(); nb];
    for (i, p) in points.iter().enumerate() {
        members[band_of(p.r)].push((p.nu, i as u32));
    }
    let bands: Vec<Band> = members
        .into_iter()
        .map(|mut m| {
            m.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            Band {
                r_min: m.iter().map(|&(_, v)| points[v as usize].r).fold(f64::INFINITY, f64::min),
                nus: m.iter().map(|&(nu, _)| nu).collect(),
                ids: m.iter().map(|&(_, v)| v).collect(),
            }
        })
        .collect();

    let mut edges = Vec::new();
    let mut shell: Vec<u32> = Vec::new();
    for (u, pu) in points.iter().enumerate() {
        let own = band_of(pu.r);
        for (b, band) in bands.iter().enumerate().skip(own) {
            if band.ids.is_empty() {
                continue;
            }
            let keep = |v: u32| b != own || v as usize > u;
            let theta0 = max_angle(pu.r, band.r_min, cosh_r);
            let gap = |v: u32| {
                let dnu = (points[v as usize].nu - pu.nu).abs();
                dnu.min(TAU - dnu)
            };
            for range in band.window(pu.nu, widen(theta0)) {
                for &v in &band.ids[range] {
                    if !keep(v) || gap(v) > theta0 {
                        continue;
                    }
                    let pv = &points[v as usize];
                    let p = connection_probability(params, pu, pv);
                    if p >= 1.0 || (p > 0.0 && rng.random::<f64>() < p) {
                        edges.push((u as u32, v).min((v, u as u32)));
                    }
                }
            }
            if params.t_h == 0.0 || theta0 >= PI {
                continue;
            }
            // logistic tail: angular shells (theta_k, 2 theta_k] beyond the threshold window
            let mut inner = theta0.max(1e-9);
            while inner < PI {
                let outer = (2.0 * inner).min(PI);
                shell.clear();
                let [a, b2] = band.window(pu.nu, widen(outer));
                for &v in band.ids[a].iter().chain(&band.ids[b2]) {
                    let dnu = gap(v);
                    if dnu > inner && (dnu <= outer || outer >= PI) {
                        shell.push(v);
                    }
                }
                let half = (inner / 2.0).sin();
                let lb = 1.0 + 2.0 * pu.r.sinh() * band.r_min.sinh() * half * half;
                let bound = logistic(lb.acosh(), big_r, params.t_h);
                if bound > 0.0 && !shell.is_empty() {
                    let log_q = (-bound).ln_1p();
                    let mut idx = 0usize;
                    loop {
                        let skip = if bound >= 1.0 {
                            0.0
                        } else {
                            (rng::open_closed_unit(rng).ln() / log_q).floor()
                        };
                        if skip >= (shell.len() - idx) as f64 {
                            break;
                        }
                        idx += skip as usize;
                        let v = shell[idx];
                        idx += 1;
                        let p = connection_probability(params, pu, &points[v as usize]);
                        if keep(v) && rng.random::<f64>() * bound < p {
                            edges.push((u as u32, v).min((v, u as u32)));
                        }
                        if idx >= shell.len() {
                            break;
                        }
                    }
                }
                inner = outer;
            }
        }
    }
    edges
}
