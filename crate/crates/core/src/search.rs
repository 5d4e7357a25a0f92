//! Breadth-first distances, connected components and objective level sets.

use std::collections::VecDeque;
use std::fmt;

use crate::error::{Error, Result};
use crate::graph::{Graph, VertexId};
use crate::routing::{phi, Score};

/// Hop distance between two vertices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Hops {
    Finite(usize),
    Unreachable,
}

impl Hops {
    pub fn finite(self) -> Option<usize> {
        match self {
            Hops::Finite(h) => Some(h),
            Hops::Unreachable => None,
        }
    }
}

impl fmt::Display for Hops {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Hops::Finite(h) => write!(f, "{h}"),
            Hops::Unreachable => f.write_str("NA"),
        }
    }
}

const UNSEEN: u32 = u32::MAX;

/// Shortest hop distance from `s` to `t`, stopping as soon as `t` is reached.
pub fn bfs_distance(g: &Graph, s: VertexId, t: VertexId) -> Result<Hops> {
    g.check_vertex(s)?;
    g.check_vertex(t)?;
    if s == t {
        return Ok(Hops::Finite(0));
    }
    let mut dist = vec![UNSEEN; g.vertex_count()];
    let mut queue = VecDeque::new();
    dist[s] = 0;
    queue.push_back(s);
    while let Some(u) = queue.pop_front() {
        for &v in g.neighbors(u) {
            let v = v as usize;
            if dist[v] == UNSEEN {
                dist[v] = dist[u] + 1;
                if v == t {
                    return Ok(Hops::Finite(dist[v] as usize));
                }
                queue.push_back(v);
            }
        }
    }
    Ok(Hops::Unreachable)
}

/// Hop distances from one source to every vertex, reusable across targets.
#[derive(Debug, Clone)]
pub struct BfsTree {
    source: VertexId,
    dist: Vec<u32>,
}

impl BfsTree {
    pub fn new(g: &Graph, source: VertexId) -> Result<Self> {
        g.check_vertex(source)?;
        let mut dist = vec![UNSEEN; g.vertex_count()];
        let mut queue = VecDeque::new();
        dist[source] = 0;
        queue.push_back(source);
        while let Some(u) = queue.pop_front() {
            for &v in g.neighbors(u) {
                let v = v as usize;
                if dist[v] == UNSEEN {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        Ok(BfsTree { source, dist })
    }

    pub fn source(&self) -> VertexId {
        self.source
    }

    pub fn distance(&self, t: VertexId) -> Result<Hops> {
        match self.dist.get(t) {
            None => Err(Error::invalid(format!("vertex {t} out of range"))),
            Some(&UNSEEN) => Ok(Hops::Unreachable),
            Some(&d) => Ok(Hops::Finite(d as usize)),
        }
    }
}

/// Component label of every vertex. Ids are assigned in order of the
/// smallest vertex they contain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentLabeling {
    pub component_id: Vec<usize>,
    pub component_sizes: Vec<usize>,
}

impl ComponentLabeling {
    pub fn same_component(&self, u: VertexId, v: VertexId) -> bool {
        self.component_id[u] == self.component_id[v]
    }

    pub fn largest(&self) -> usize {
        self.component_sizes.iter().copied().max().unwrap_or(0)
    }

    pub fn size_of(&self, v: VertexId) -> usize {
        self.component_sizes[self.component_id[v]]
    }
}

pub fn connected_components(g: &Graph) -> ComponentLabeling {
    let n = g.vertex_count();
    let mut component_id = vec![usize::MAX; n];
    let mut component_sizes = Vec::new();
    let mut stack = Vec::new();
    for root in 0..n {
        if component_id[root] != usize::MAX {
            continue;
        }
        let id = component_sizes.len();
        component_id[root] = id;
        stack.push(root);
        let mut size = 0;
        while let Some(u) = stack.pop() {
            size += 1;
            for &v in g.neighbors(u) {
                let v = v as usize;
                if component_id[v] == usize::MAX {
                    component_id[v] = id;
                    stack.push(v);
                }
            }
        }
        component_sizes.push(size);
    }
    ComponentLabeling {
        component_id,
        component_sizes,
    }
}

/// All vertices whose exact objective towards `t` is at least `phi0`,
/// including `t` itself.
pub fn vertices_above_objective(g: &Graph, t: VertexId, phi0: f64) -> Result<Vec<VertexId>> {
    g.check_vertex(t)?;
    if !(phi0 > 0.0) {
        return Err(Error::invalid(format!("phi0 must be positive, got {phi0}")));
    }
    let mut out = Vec::new();
    for v in 0..g.vertex_count() {
        if phi(g, v, t)? >= Score::Finite(phi0) {
            out.push(v);
        }
    }
    Ok(out)
}
