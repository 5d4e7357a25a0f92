//! Immutable graph with vertex geometry and compressed adjacency.

use crate::error::{Error, Result};
use crate::geometry::TorusPoint;
use crate::hyperbolic::HyperbolicLayer;
use crate::model::{ModelParams, Vertex};

/// Vertex identifier. Ids of a graph are `0..vertex_count()`.
pub type VertexId = usize;

/// A sampled graph: weights, torus positions and sorted adjacency lists.
///
/// Hyperbolic graphs additionally keep their native coordinates, which the
/// hyperbolic objective reads instead of reconstructing them from the
/// embedded weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    params: ModelParams,
    weights: Vec<f64>,
    coords: Vec<f64>,
    offsets: Vec<usize>,
    targets: Vec<u32>,
    hyperbolic: Option<HyperbolicLayer>,
}

impl Graph {
    /// Builds a graph from vertices and an edge list. Ids must be `0..len`
    /// in order; edges must be distinct and free of self-loops, in either
    /// orientation.
    pub fn from_parts(params: ModelParams, vertices: &[Vertex], edges: &[(VertexId, VertexId)]) -> Result<Self> {
        let (weights, coords) = Self::split_vertices(&params, vertices)?;
        let n = weights.len();
        let mut raw = Vec::with_capacity(edges.len());
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::invalid(format!("edge ({u}, {v}) out of range for {n} vertices")));
            }
            if u == v {
                return Err(Error::invalid(format!("self-loop at {u}")));
            }
            raw.push(if u < v { (u as u32, v as u32) } else { (v as u32, u as u32) });
        }
        raw.sort_unstable();
        if let Some(w) = raw.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::invalid(format!("duplicate edge ({}, {})", w[0].0, w[0].1)));
        }
        Self::from_raw(params, weights, coords, &raw)
    }

    pub(crate) fn split_vertices(params: &ModelParams, vertices: &[Vertex]) -> Result<(Vec<f64>, Vec<f64>)> {
        let mut weights = Vec::with_capacity(vertices.len());
        let mut coords = Vec::with_capacity(vertices.len() * params.d);
        for (i, v) in vertices.iter().enumerate() {
            if v.id != i {
                return Err(Error::invalid(format!("vertex at position {i} has id {}", v.id)));
            }
            if v.pos.dim() != params.d {
                return Err(Error::invalid(format!("vertex {i} has dimension {}", v.pos.dim())));
            }
            if !(v.weight >= params.w_min) || !v.weight.is_finite() {
                return Err(Error::invalid(format!("vertex {i} weight {} below w_min", v.weight)));
            }
            weights.push(v.weight);
            coords.extend_from_slice(v.pos.coords());
        }
        Ok((weights, coords))
    }

    /// Builds the adjacency from distinct edges `(u, v)`, `u != v`, ids in range.
    pub(crate) fn from_raw(
        params: ModelParams,
        weights: Vec<f64>,
        coords: Vec<f64>,
        edges: &[(u32, u32)],
    ) -> Result<Self> {
        let n = weights.len();
        if n > u32::MAX as usize {
            return Err(Error::invalid("too many vertices for 32-bit ids"));
        }
        let mut offsets = vec![0usize; n + 1];
        for &(u, v) in edges {
            offsets[u as usize + 1] += 1;
            offsets[v as usize + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let mut fill = offsets.clone();
        let mut targets = vec![0u32; offsets[n]];
        for &(u, v) in edges {
            targets[fill[u as usize]] = v;
            fill[u as usize] += 1;
            targets[fill[v as usize]] = u;
            fill[v as usize] += 1;
        }
        for v in 0..n {
            targets[offsets[v]..offsets[v + 1]].sort_unstable();
        }
        Ok(Graph {
            params,
            weights,
            coords,
            offsets,
            targets,
            hyperbolic: None,
        })
    }

    pub(crate) fn with_hyperbolic(mut self, layer: HyperbolicLayer) -> Self {
        self.hyperbolic = Some(layer);
        self
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn vertex_count(&self) -> usize {
        self.weights.len()
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    /// Sorted neighbor ids of `v`.
    #[inline]
    pub fn neighbors(&self, v: VertexId) -> &[u32] {
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }

    #[inline]
    pub fn degree(&self, v: VertexId) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        u < self.vertex_count() && v < self.vertex_count() && self.neighbors(u).binary_search(&(v as u32)).is_ok()
    }

    #[inline]
    pub fn weight(&self, v: VertexId) -> f64 {
        self.weights[v]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Torus coordinates of `v`.
    #[inline]
    pub fn pos(&self, v: VertexId) -> &[f64] {
        let d = self.params.d;
        &self.coords[v * d..(v + 1) * d]
    }

    pub fn vertex(&self, v: VertexId) -> Vertex {
        Vertex {
            id: v,
            pos: TorusPoint::wrapped(self.pos(v).iter().copied()),
            weight: self.weights[v],
        }
    }

    pub fn vertices(&self) -> impl Iterator<Item = Vertex> + '_ {
        (0..self.vertex_count()).map(|v| self.vertex(v))
    }

    /// Edges `(u, v)` with `u < v`, ordered lexicographically.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        (0..self.vertex_count()).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .map(|&v| v as usize)
                .filter(move |&v| v > u)
                .map(move |v| (u, v))
        })
    }

    pub fn hyperbolic(&self) -> Option<&HyperbolicLayer> {
        self.hyperbolic.as_ref()
    }

    pub fn check_vertex(&self, v: VertexId) -> Result<()> {
        if v < self.vertex_count() {
            Ok(())
        } else {
            Err(Error::invalid(format!(
                "vertex {v} out of range for {} vertices",
                self.vertex_count()
            )))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Alpha;

    fn line(n: usize) -> Graph {
        let params = ModelParams::new(n as f64, 1, 2.5, 1.0, Alpha::Infinite);
        let vertices: Vec<Vertex> = (0..n)
            .map(|i| Vertex {
                id: i,
                pos: TorusPoint::new(vec![i as f64 / n as f64]).unwrap(),
                weight: 1.0,
            })
            .collect();
        let edges: Vec<_> = (1..n).map(|i| (i, i - 1)).collect();
        Graph::from_parts(params, &vertices, &edges).unwrap()
    }

    #[test]
    fn adjacency_is_symmetric_and_sorted() {
        let g = line(5);
        assert_eq!(g.edge_count(), 4);
        assert_eq!(g.neighbors(2), &[1, 3]);
        assert_eq!(g.neighbors(0), &[1]);
        assert!(g.has_edge(3, 4) && g.has_edge(4, 3));
        assert!(!g.has_edge(0, 2));
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1), (1, 2), (2, 3), (3, 4)]);
    }

    #[test]
    fn rejects_bad_edges() {
        let g = line(3);
        let vs: Vec<Vertex> = g.vertices().collect();
        let p = g.params().clone();
        assert!(Graph::from_parts(p.clone(), &vs, &[(0, 0)]).is_err());
        assert!(Graph::from_parts(p.clone(), &vs, &[(0, 1), (1, 0)]).is_err());
        assert!(Graph::from_parts(p.clone(), &vs, &[(0, 3)]).is_err());
        let mut light = vs.clone();
        light[1].weight = 0.5;
        assert!(Graph::from_parts(p, &light, &[]).is_err());
    }
}
