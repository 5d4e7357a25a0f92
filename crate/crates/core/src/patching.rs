//! Patched routing that delivers whenever source and target are connected.
//!
//! [`patch_route`] is a distributed depth-first exploration with a constant
//! amount of state per vertex. A search at level `Phi` only enters vertices
//! of objective at least `Phi` and tries the neighbors of each vertex best
//! first. Whenever a vertex beats every objective seen so far and has a
//! better neighbor, a nested search at that vertex's level starts; when it
//! completes without reaching the target, the previous search resumes at
//! that vertex and vertices of the discarded search count as unvisited.
//!
//! [`patch_route_history`] keeps the visited set in the message instead and
//! jumps to the best unexplored edge out of any visited vertex whenever the
//! greedy step is unavailable.
//!
//! The `check_p*` functions verify the three exploration conditions on a
//! recorded walk: greedy choices, polynomial time between discoveries, and
//! polynomial-time exhaustive search of every superlevel component.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, HashSet, VecDeque};
use std::fmt::{self, Write as _};

use crate::error::{Error, Result};
use crate::graph::{Graph, VertexId};
use crate::routing::{best_neighbor, Objective, Rank, RouteOutcome, RouteStatus};

/// Search level. `Bottom` admits every vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Threshold {
    Bottom,
    At(Rank),
}

impl Threshold {
    #[inline]
    fn admits(self, r: Rank) -> bool {
        Threshold::At(r) >= self
    }
}

impl fmt::Display for Threshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Threshold::Bottom => f.write_str("-inf"),
            Threshold::At(r) => write!(f, "{}", r.score),
        }
    }
}

/// State a vertex holds for one message.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct VertexPatchMemory {
    pub phi_mark: Option<Threshold>,
    pub parent: Option<VertexId>,
    pub started_new_dfs: bool,
    pub previous_phi: Option<Threshold>,
}

impl VertexPatchMemory {
    /// Number of fields currently holding information.
    pub fn words(&self) -> usize {
        self.phi_mark.is_some() as usize
            + self.parent.is_some() as usize
            + self.started_new_dfs as usize
            + self.previous_phi.is_some() as usize
    }
}

/// State carried by the message.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MessagePatchMemory {
    pub best_seen_objective: Threshold,
    pub phi: Threshold,
    pub last_visited_vertex: VertexId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EventKind {
    Explore,
    Backtrack,
    NewPhi,
    ResetPhi,
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EventKind::Explore => "EXPLORE",
            EventKind::Backtrack => "BACKTRACK",
            EventKind::NewPhi => "NEW_PHI",
            EventKind::ResetPhi => "RESET_PHI",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PatchEvent {
    /// Moves made before this event.
    pub step: usize,
    pub kind: EventKind,
    pub vertex: VertexId,
    pub phi: Option<Threshold>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PatchStatus {
    Delivered,
    /// Every vertex reachable from the source was explored.
    Exhausted,
    StepLimit,
    /// Only for walks converted from a failed greedy route.
    DeadEnd,
}

impl fmt::Display for PatchStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PatchStatus::Delivered => "DELIVERED",
            PatchStatus::Exhausted => "EXHAUSTED",
            PatchStatus::StepLimit => "STEP_LIMIT",
            PatchStatus::DeadEnd => "DEAD_END",
        })
    }
}

impl std::str::FromStr for PatchStatus {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "DELIVERED" => PatchStatus::Delivered,
            "EXHAUSTED" => PatchStatus::Exhausted,
            "STEP_LIMIT" => PatchStatus::StepLimit,
            "DEAD_END" => PatchStatus::DeadEnd,
            other => return Err(Error::invalid(format!("unknown status `{other}`"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PatchOutcome {
    /// Every vertex the message occupied, in order, with repeats.
    pub path: Vec<VertexId>,
    pub status: PatchStatus,
    pub steps: usize,
    pub distinct_visited: usize,
    pub max_vertex_memory_words: usize,
    /// Times a vertex was entered while holding a mark below the current level.
    pub single_phi_violations: usize,
    pub event_log: Vec<PatchEvent>,
}

impl PatchOutcome {
    /// The walk of a greedy route, as explore events.
    pub fn from_greedy(route: &RouteOutcome) -> Self {
        let event_log = route
            .path
            .iter()
            .enumerate()
            .map(|(i, &v)| PatchEvent {
                step: i,
                kind: EventKind::Explore,
                vertex: v,
                phi: None,
            })
            .collect();
        PatchOutcome {
            path: route.path.clone(),
            status: match route.status {
                RouteStatus::Delivered => PatchStatus::Delivered,
                RouteStatus::DeadEnd => PatchStatus::DeadEnd,
                RouteStatus::StepLimit => PatchStatus::StepLimit,
            },
            steps: route.steps,
            distinct_visited: route.path.len(),
            max_vertex_memory_words: 0,
            single_phi_violations: 0,
            event_log,
        }
    }

    /// One line per event: `<step> <event> <vertex> <phi-or-NA>`.
    pub fn event_log_text(&self) -> String {
        let mut out = String::new();
        for e in &self.event_log {
            let phi = e.phi.map_or_else(|| "NA".to_string(), |p| p.to_string());
            let _ = writeln!(out, "{} {} {} {}", e.step, e.kind, e.vertex, phi);
        }
        out
    }
}

/// `50 n`.
pub fn default_patch_step_limit(n: usize) -> usize {
    50 * n.max(1)
}

enum Call {
    Explore(VertexId),
    BacktrackTo(VertexId),
}

struct Walk {
    path: Vec<VertexId>,
    events: Vec<PatchEvent>,
    steps: usize,
    limit: usize,
}

impl Walk {
    fn new(s: VertexId, limit: usize) -> Self {
        Walk {
            path: vec![s],
            events: Vec::new(),
            steps: 0,
            limit,
        }
    }

    fn at(&self) -> VertexId {
        *self.path.last().expect("walk starts at the source")
    }

    /// Moves to `v`; false once the step budget is spent.
    fn step_to(&mut self, v: VertexId) -> bool {
        if self.steps == self.limit {
            return false;
        }
        self.steps += 1;
        self.path.push(v);
        true
    }

    fn log(&mut self, kind: EventKind, vertex: VertexId, phi: Option<Threshold>) {
        self.events.push(PatchEvent {
            step: self.steps,
            kind,
            vertex,
            phi,
        });
    }

    fn finish(self, status: PatchStatus, max_words: usize, violations: usize) -> PatchOutcome {
        let distinct_visited = self.path.iter().collect::<HashSet<_>>().len();
        PatchOutcome {
            steps: self.steps,
            distinct_visited,
            path: self.path,
            status,
            max_vertex_memory_words: max_words,
            single_phi_violations: violations,
            event_log: self.events,
        }
    }
}

fn check_route_args(g: &Graph, s: VertexId, obj: &dyn Objective, step_limit: usize) -> Result<()> {
    g.check_vertex(s)?;
    g.check_vertex(obj.target())?;
    if step_limit == 0 {
        return Err(Error::invalid("step limit must be at least 1"));
    }
    Ok(())
}

/// Constant-memory patched routing.
pub fn patch_route(g: &Graph, s: VertexId, obj: &dyn Objective, step_limit: usize) -> Result<PatchOutcome> {
    check_route_args(g, s, obj, step_limit)?;
    let t = obj.target();
    let mut walk = Walk::new(s, step_limit);
    let mut mem: HashMap<VertexId, VertexPatchMemory> = HashMap::new();
    let mut max_words = 0;
    let mut violations = 0;
    let mut m = MessagePatchMemory {
        best_seen_objective: Threshold::Bottom,
        phi: Threshold::Bottom,
        last_visited_vertex: s,
    };
    mem.entry(s).or_default().phi_mark = Some(Threshold::At(obj.rank(s)));
    let mut call = Call::Explore(s);

    let status = loop {
        match call {
            Call::Explore(v) => {
                let here = walk.at();
                if v != here {
                    if !walk.step_to(v) {
                        break PatchStatus::StepLimit;
                    }
                    m.last_visited_vertex = here;
                }
                walk.log(EventKind::Explore, v, Some(m.phi));
                if v == t {
                    break PatchStatus::Delivered;
                }
                let rank_v = obj.rank(v);
                let mark = mem.get(&v).and_then(|x| x.phi_mark);
                if mark == Some(m.phi) {
                    call = Call::BacktrackTo(m.last_visited_vertex);
                    continue;
                }
                if Threshold::At(rank_v) > m.best_seen_objective {
                    // a new best: start a nested search if v has a better neighbor
                    m.best_seen_objective = Threshold::At(rank_v);
                    if best_neighbor(g, obj, v).is_some_and(|b| b > rank_v) {
                        let e = mem.entry(v).or_default();
                        e.started_new_dfs = true;
                        e.previous_phi = Some(m.phi);
                        m.phi = Threshold::At(rank_v);
                        walk.log(EventKind::NewPhi, v, Some(m.phi));
                    }
                }
                if let Some(Threshold::At(old)) = mark {
                    if Threshold::At(old) < m.phi && Threshold::At(rank_v) != m.phi {
                        violations += 1;
                    }
                }
                let e = mem.entry(v).or_default();
                e.phi_mark = Some(m.phi);
                e.parent = Some(m.last_visited_vertex);
                max_words = max_words.max(e.words());
                call = match best_neighbor(g, obj, v) {
                    Some(b) if m.phi.admits(b) => Call::Explore(b.vertex()),
                    _ => Call::BacktrackTo(m.last_visited_vertex),
                };
            }
            Call::BacktrackTo(v) => {
                let here = walk.at();
                if v != here {
                    if !walk.step_to(v) {
                        break PatchStatus::StepLimit;
                    }
                    m.last_visited_vertex = here;
                }
                walk.log(EventKind::Backtrack, v, None);
                let state = mem.get(&v).copied().unwrap_or_default();
                let parent = state.parent.unwrap_or(v);
                let from = obj.rank(m.last_visited_vertex);
                let next = g
                    .neighbors(v)
                    .iter()
                    .map(|&u| u as usize)
                    .filter(|&u| u != parent)
                    .map(|u| obj.rank(u))
                    .filter(|&r| m.phi.admits(r) && r < from)
                    .max();
                if let Some(u) = next {
                    call = Call::Explore(u.vertex());
                } else if state.started_new_dfs {
                    // resume the enclosing search at v as if arriving from its parent;
                    // v itself is unvisited for that search
                    m.phi = state.previous_phi.unwrap_or(Threshold::Bottom);
                    let e = mem.entry(v).or_default();
                    e.started_new_dfs = false;
                    e.previous_phi = None;
                    e.phi_mark = None;
                    m.last_visited_vertex = parent;
                    walk.log(EventKind::ResetPhi, v, Some(m.phi));
                    call = Call::Explore(v);
                } else if parent == v {
                    break PatchStatus::Exhausted;
                } else {
                    call = Call::BacktrackTo(parent);
                }
            }
        }
    };
    Ok(walk.finish(status, max_words, violations))
}

/// Patched routing with the visited set stored in the message.
pub fn patch_route_history(g: &Graph, s: VertexId, obj: &dyn Objective, step_limit: usize) -> Result<PatchOutcome> {
    check_route_args(g, s, obj, step_limit)?;
    let t = obj.target();
    let mut walk = Walk::new(s, step_limit);
    // first-visit tree: parent and depth
    let mut tree: HashMap<VertexId, (VertexId, usize)> = HashMap::new();
    let mut frontier: BinaryHeap<(Rank, Reverse<VertexId>)> = BinaryHeap::new();
    tree.insert(s, (s, 0));
    walk.log(EventKind::Explore, s, None);
    let mut first = true;

    let status = loop {
        let v = walk.at();
        if v == t {
            break PatchStatus::Delivered;
        }
        if first {
            for &u in g.neighbors(v) {
                let u = u as usize;
                if !tree.contains_key(&u) {
                    frontier.push((obj.rank(u), Reverse(v)));
                }
            }
            if let Some(b) = best_neighbor(g, obj, v).filter(|&b| b > obj.rank(v)) {
                let u = b.vertex();
                if !walk.step_to(u) {
                    break PatchStatus::StepLimit;
                }
                walk.log(EventKind::Explore, u, None);
                first = !tree.contains_key(&u);
                if first {
                    let depth = tree[&v].1 + 1;
                    tree.insert(u, (v, depth));
                }
                continue;
            }
        }
        let next = loop {
            match frontier.pop() {
                Some((r, _)) if tree.contains_key(&r.vertex()) => continue,
                other => break other,
            }
        };
        let Some((r, Reverse(via))) = next else {
            break PatchStatus::Exhausted;
        };
        let mut stopped = false;
        for w in tree_path(&tree, v, via) {
            if !walk.step_to(w) {
                stopped = true;
                break;
            }
            walk.log(EventKind::Backtrack, w, None);
        }
        let u = r.vertex();
        if stopped || !walk.step_to(u) {
            break PatchStatus::StepLimit;
        }
        walk.log(EventKind::Explore, u, None);
        let depth = tree[&via].1 + 1;
        tree.insert(u, (via, depth));
        first = true;
    };
    Ok(walk.finish(status, 0, 0))
}

/// Vertices after `from` on the tree path from `from` to `to`.
fn tree_path(tree: &HashMap<VertexId, (VertexId, usize)>, from: VertexId, to: VertexId) -> Vec<VertexId> {
    let (mut a, mut b) = (from, to);
    let mut up = Vec::new();
    let mut down = Vec::new();
    while a != b {
        let (pa, da) = tree[&a];
        let (pb, db) = tree[&b];
        if da >= db {
            a = pa;
            up.push(a);
        } else {
            down.push(b);
            b = pb;
        }
    }
    up.extend(down.into_iter().rev());
    up
}

/// First position in a walk where a condition fails.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    /// Number of moves made before the offending point.
    pub step: usize,
    pub reason: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "step {}: {}", self.step, self.reason)
    }
}

pub type CheckResult = std::result::Result<(), Violation>;

/// Greedy choices: a move into a never-visited vertex must pick the best
/// never-visited neighbor, and the first visit of a vertex with a better
/// neighbor must move to its best neighbor.
pub fn check_p1(outcome: &PatchOutcome, g: &Graph, obj: &dyn Objective) -> CheckResult {
    let t = obj.target();
    let Some(&s) = outcome.path.first() else {
        return Ok(());
    };
    let mut visited: HashSet<VertexId> = HashSet::from([s]);
    let mut first_visit = true;
    for (i, w) in outcome.path.windows(2).enumerate() {
        let (v, u) = (w[0], w[1]);
        if !g.has_edge(v, u) {
            return Err(Violation {
                step: i,
                reason: format!("move {v} -> {u} is not an edge"),
            });
        }
        if first_visit && v != t {
            if let Some(b) = best_neighbor(g, obj, v).filter(|&b| b > obj.rank(v)) {
                if b.vertex() != u {
                    return Err(Violation {
                        step: i,
                        reason: format!("first visit of {v} went to {u}, best neighbor is {}", b.vertex()),
                    });
                }
            }
        }
        first_visit = !visited.contains(&u);
        if first_visit {
            let best_new = g
                .neighbors(v)
                .iter()
                .map(|&x| x as usize)
                .filter(|x| !visited.contains(x))
                .map(|x| obj.rank(x))
                .max()
                .expect("u itself is unvisited");
            if best_new.vertex() != u {
                return Err(Violation {
                    step: i,
                    reason: format!(
                        "explored {u} from {v}, best unexplored neighbor is {}",
                        best_new.vertex()
                    ),
                });
            }
            visited.insert(u);
        }
    }
    Ok(())
}

/// Polynomial exploration: with `k` vertices explored, the next new vertex
/// follows within `c * k^exponent` moves. A trailing gap counts only when the
/// walk was cut off by its step limit.
pub fn check_p2(outcome: &PatchOutcome, c: f64, exponent: f64) -> CheckResult {
    let Some(&s) = outcome.path.first() else {
        return Ok(());
    };
    let mut visited: HashSet<VertexId> = HashSet::from([s]);
    let mut last = 0usize;
    let within = |gap: usize, k: usize| gap as f64 <= c * (k as f64).powf(exponent);
    for (i, &u) in outcome.path.iter().enumerate().skip(1) {
        if visited.insert(u) {
            let k = visited.len() - 1;
            if !within(i - last, k) {
                return Err(Violation {
                    step: last,
                    reason: format!("{} moves without a new vertex after exploring {k}", i - last),
                });
            }
            last = i;
        }
    }
    let tail = outcome.path.len() - 1 - last;
    if outcome.status == PatchStatus::StepLimit && !within(tail, visited.len()) {
        return Err(Violation {
            step: last,
            reason: format!("{tail} trailing moves without a new vertex"),
        });
    }
    Ok(())
}

/// Exhaustive search: when a vertex `v` beating all earlier ones is first
/// reached, its component `S` in the subgraph of vertices at least as good
/// as `v` must be fully visited, or the target reached, within
/// `c * |S|^exponent` moves.
pub fn check_p3(outcome: &PatchOutcome, g: &Graph, obj: &dyn Objective, c: f64, exponent: f64) -> CheckResult {
    let t = obj.target();
    let total = outcome.path.len().saturating_sub(1);
    let mut first_seen: HashMap<VertexId, usize> = HashMap::new();
    let mut records = Vec::new();
    let mut best: Option<Rank> = None;
    for (i, &v) in outcome.path.iter().enumerate() {
        if first_seen.contains_key(&v) {
            continue;
        }
        first_seen.insert(v, i);
        let r = obj.rank(v);
        if best.is_none_or(|b| r > b) {
            best = Some(r);
            records.push((v, i));
        }
    }
    let bound = |size: usize| c * (size as f64).powf(exponent);
    for (v, at) in records {
        if v == t {
            continue;
        }
        let remaining = total - at;
        // components larger than this have a window extending past the walk
        let cap = {
            let mut k = 1usize;
            while bound(k) <= remaining as f64 {
                k += 1;
            }
            k
        };
        let Some(component) = superlevel_component(g, obj, v, cap) else {
            continue;
        };
        let deadline = at as f64 + bound(component.len());
        let elapsed = deadline <= total as f64;
        if !elapsed && outcome.status != PatchStatus::Exhausted {
            continue;
        }
        let reached = |x: &VertexId| first_seen.get(x).is_some_and(|&i| i as f64 <= deadline);
        if reached(&t) {
            continue;
        }
        if let Some(missing) = component.iter().find(|x| !reached(x)) {
            return Err(Violation {
                step: at,
                reason: format!(
                    "record vertex {v}: {missing} of its {}-vertex superlevel component unvisited after {} moves",
                    component.len(),
                    bound(component.len()).min(remaining as f64)
                ),
            });
        }
    }
    Ok(())
}

/// Component of `v` among vertices ranked at least `rank(v)`, or `None` once
/// it exceeds `cap - 1` vertices.
fn superlevel_component(g: &Graph, obj: &dyn Objective, v: VertexId, cap: usize) -> Option<Vec<VertexId>> {
    let floor = obj.rank(v);
    let mut seen: HashSet<VertexId> = HashSet::from([v]);
    let mut queue = VecDeque::from([v]);
    let mut out = Vec::new();
    while let Some(x) = queue.pop_front() {
        out.push(x);
        if out.len() >= cap {
            return None;
        }
        for &y in g.neighbors(x) {
            let y = y as usize;
            if obj.rank(y) >= floor && seen.insert(y) {
                queue.push_back(y);
            }
        }
    }
    Some(out)
}
