//! Monte-Carlo trials of greedy and patched routing, their summaries, and CSV
//! persistence.
//!
//! A configuration names a model, a grid of sweep points and a number of
//! trials per point. Every trial is one `(s, t)` pair; consecutive trials
//! share a graph in groups of `pairs_per_graph`. Seeds are derived from the
//! master seed per grid point and per graph, so results do not depend on
//! thread count or completion order.

use std::io::{BufRead, Write};

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::TorusPoint;
use crate::graph::{Graph, VertexId};
use crate::hyperbolic::{sample_hyperbolic_graph, HyperbolicParams};
use crate::model::{sample_graph, sample_graph_with, ModelParams};
use crate::patching::{
    check_p1, check_p2, check_p3, default_patch_step_limit, patch_route, patch_route_history, PatchOutcome,
    PatchStatus,
};
use crate::rng::{derive_seed, phase_rng, Phase};
use crate::routing::{default_step_limit, greedy_route, phi, ObjectiveSpec, Score};
use crate::search::{bfs_distance, connected_components, Hops};
use crate::stats;

pub const TRIALS_SCHEMA: &str = "# girg-nav trials v1";
pub const SUMMARY_SCHEMA: &str = "# girg-nav summary v1";
pub const PLOT_SCHEMA: &str = "# girg-nav plot v1";

#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    Girg(ModelParams),
    Hyperbolic(HyperbolicParams),
}

impl ModelSpec {
    fn validate(&self) -> Result<()> {
        match self {
            ModelSpec::Girg(p) => p.validate(),
            ModelSpec::Hyperbolic(p) => {
                p.validate()?;
                crate::hyperbolic::embedded_params(p).map_err(|e| Error::config("alpha_h", e.to_string()))?;
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PairSelection {
    /// Uniform `s != t` among the sampled vertices.
    Random,
    /// Injected endpoints of fixed weights. Without positions, each pair
    /// gets independent uniform positions.
    Fixed {
        source_weight: f64,
        target_weight: f64,
        positions: Option<(TorusPoint, TorusPoint)>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    Greedy,
    Patch,
    PatchHistory,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Greedy, Algorithm::Patch, Algorithm::PatchHistory];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Greedy => "greedy",
            Algorithm::Patch => "patch",
            Algorithm::PatchHistory => "patch-history",
        }
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s.trim())
            .ok_or_else(|| Error::invalid(format!("unknown algorithm `{s}`")))
    }
}

/// Constants of the polynomial bounds used when checking patched walks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConformanceBounds {
    pub p2_c: f64,
    pub p2_exponent: f64,
    pub p3_c: f64,
    pub p3_exponent: f64,
}

impl Default for ConformanceBounds {
    fn default() -> Self {
        ConformanceBounds {
            p2_c: 4.0,
            p2_exponent: 2.0,
            p3_c: 4.0,
            p3_exponent: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub model: ModelSpec,
    /// Trials per sweep point.
    pub trials: usize,
    pub pairs_per_graph: usize,
    pub pair_selection: PairSelection,
    pub objective: ObjectiveSpec,
    pub algorithms: Vec<Algorithm>,
    /// Values of `n` to sweep; empty means the model's own.
    pub sweep_n: Vec<f64>,
    /// Values of `w_min` to sweep (GIRG only); empty means the model's own.
    pub sweep_wmin: Vec<f64>,
    pub master_seed: u64,
    /// Greedy step limit; `None` selects [`default_step_limit`].
    pub step_limit: Option<usize>,
    /// Patching step limit; `None` selects [`default_patch_step_limit`].
    pub patch_step_limit: Option<usize>,
    pub compute_bfs: bool,
    /// Check every patched walk against the exploration conditions.
    pub conformance: Option<ConformanceBounds>,
}

impl ExperimentConfig {
    pub fn new(model: ModelSpec) -> Self {
        ExperimentConfig {
            model,
            trials: 100,
            pairs_per_graph: 1,
            pair_selection: PairSelection::Random,
            objective: ObjectiveSpec::Phi,
            algorithms: vec![Algorithm::Greedy],
            sweep_n: Vec::new(),
            sweep_wmin: Vec::new(),
            master_seed: 0,
            step_limit: None,
            patch_step_limit: None,
            compute_bfs: true,
            conformance: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.validate_sweeps()?;
        if self.pairs_per_graph == 0 {
            return Err(Error::config("pairs_per_graph", "must be at least 1"));
        }
        if self.algorithms.is_empty() {
            return Err(Error::config("algorithms", "must name at least one algorithm"));
        }
        if self.step_limit == Some(0) {
            return Err(Error::config("step_limit", "must be at least 1"));
        }
        if self.patch_step_limit == Some(0) {
            return Err(Error::config("patch_step_limit", "must be at least 1"));
        }
        match &self.objective {
            ObjectiveSpec::PhiRelaxed(r) => r.validate().map_err(|e| Error::config("relax_band", e.to_string()))?,
            ObjectiveSpec::PhiH if !matches!(self.model, ModelSpec::Hyperbolic(_)) => {
                return Err(Error::config("objective", "phi-h needs the hyperbolic model"));
            }
            _ => {}
        }
        let points = self.points();
        for p in &points {
            p.validate()?;
        }
        if let PairSelection::Fixed {
            source_weight,
            target_weight,
            positions,
        } = &self.pair_selection
        {
            let ModelSpec::Girg(base) = &self.model else {
                return Err(Error::config("pairs", "fixed pairs need the GIRG model"));
            };
            for p in &points {
                let w_min = p.w_min();
                if !(*source_weight >= w_min && source_weight.is_finite()) {
                    return Err(Error::config("source_weight", format!("must be finite and at least w_min = {w_min}")));
                }
                if !(*target_weight >= w_min && target_weight.is_finite()) {
                    return Err(Error::config("target_weight", format!("must be finite and at least w_min = {w_min}")));
                }
            }
            if let Some((a, b)) = positions {
                if a.dim() != base.d || b.dim() != base.d {
                    return Err(Error::config("source_pos", format!("positions must have dimension {}", base.d)));
                }
                if self.pairs_per_graph != 1 {
                    return Err(Error::config("pairs_per_graph", "must be 1 with fixed positions"));
                }
            }
        }
        Ok(())
    }

    /// The grid points, `n`-major.
    pub fn points(&self) -> Vec<ModelSpec> {
        let ns: Vec<Option<f64>> = if self.sweep_n.is_empty() {
            vec![None]
        } else {
            self.sweep_n.iter().copied().map(Some).collect()
        };
        let ws: Vec<Option<f64>> = if self.sweep_wmin.is_empty() {
            vec![None]
        } else {
            self.sweep_wmin.iter().copied().map(Some).collect()
        };
        let mut out = Vec::with_capacity(ns.len() * ws.len());
        for &n in &ns {
            for &w in &ws {
                out.push(match &self.model {
                    ModelSpec::Girg(p) => {
                        let mut p = p.clone();
                        if let Some(n) = n {
                            p.n = n;
                        }
                        if let Some(w) = w {
                            p.w_min = w;
                        }
                        ModelSpec::Girg(p)
                    }
                    ModelSpec::Hyperbolic(p) => {
                        let mut p = p.clone();
                        if let Some(n) = n {
                            p.n = n as usize;
                        }
                        ModelSpec::Hyperbolic(p)
                    }
                });
            }
        }
        out
    }

    fn validate_sweeps(&self) -> Result<()> {
        if let ModelSpec::Hyperbolic(_) = self.model {
            if !self.sweep_wmin.is_empty() {
                return Err(Error::config("sweep_wmin", "not available for the hyperbolic model"));
            }
            if let Some(n) = self.sweep_n.iter().find(|n| !(n.fract() == 0.0 && **n >= 1.0)) {
                return Err(Error::config("sweep_n", format!("hyperbolic n must be a positive integer, got {n}")));
            }
        }
        Ok(())
    }
}

impl ModelSpec {
    pub fn n(&self) -> f64 {
        match self {
            ModelSpec::Girg(p) => p.n,
            ModelSpec::Hyperbolic(p) => p.n as f64,
        }
    }

    pub fn w_min(&self) -> f64 {
        match self {
            ModelSpec::Girg(p) => p.w_min,
            ModelSpec::Hyperbolic(p) => (-p.c_h / 2.0).exp(),
        }
    }

    pub fn beta(&self) -> f64 {
        match self {
            ModelSpec::Girg(p) => p.beta,
            ModelSpec::Hyperbolic(p) => 2.0 * p.alpha_h + 1.0,
        }
    }

    fn with_seed(&self, seed: u64) -> ModelSpec {
        match self {
            ModelSpec::Girg(p) => ModelSpec::Girg(p.clone().with_seed(seed)),
            ModelSpec::Hyperbolic(p) => ModelSpec::Hyperbolic(p.clone().with_seed(seed)),
        }
    }
}

/// Result of one algorithm on one pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlgoRecord {
    pub status: PatchStatus,
    pub steps: usize,
    pub distinct_visited: usize,
    pub max_memory_words: usize,
    pub single_phi_violations: usize,
    /// Whether the walk passed all three exploration checks, if checked.
    pub conformant: Option<bool>,
}

impl AlgoRecord {
    fn from_outcome(o: &PatchOutcome, conformant: Option<bool>) -> Self {
        AlgoRecord {
            status: o.status,
            steps: o.steps,
            distinct_visited: o.distinct_visited,
            max_memory_words: o.max_vertex_memory_words,
            single_phi_violations: o.single_phi_violations,
            conformant,
        }
    }

    pub fn delivered(&self) -> bool {
        self.status == PatchStatus::Delivered
    }
}

/// Shortest-path distance column: `None` when not computed.
pub type BfsColumn = Option<Hops>;

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub point: usize,
    pub trial: usize,
    pub graph: usize,
    pub n_param: f64,
    pub wmin: f64,
    pub beta: f64,
    pub objective: String,
    pub n_realized: usize,
    pub s: VertexId,
    pub t: VertexId,
    pub w_s: f64,
    pub w_t: f64,
    /// Exact objective of `s` towards `t`.
    pub phi_s: f64,
    pub same_component: bool,
    pub bfs: BfsColumn,
    pub greedy: Option<AlgoRecord>,
    pub patch: Option<AlgoRecord>,
    pub patch_history: Option<AlgoRecord>,
    /// Greedy steps over shortest-path length, for delivered greedy routes
    /// with `s != t`.
    pub stretch: Option<f64>,
}

impl TrialRecord {
    pub fn algo(&self, a: Algorithm) -> Option<&AlgoRecord> {
        match a {
            Algorithm::Greedy => self.greedy.as_ref(),
            Algorithm::Patch => self.patch.as_ref(),
            Algorithm::PatchHistory => self.patch_history.as_ref(),
        }
    }
}

/// Caps rayon parallelism at `GIRG_NAV_THREADS` when set.
fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("GIRG_NAV_THREADS") {
        let k: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&k| k > 0)
            .ok_or_else(|| Error::config("GIRG_NAV_THREADS", format!("must be a positive integer, got `{v}`")))?;
        builder = builder.num_threads(k);
    }
    builder
        .build()
        .map_err(|e| Error::config("GIRG_NAV_THREADS", e.to_string()))
}

/// Runs every trial of every grid point. Records are ordered by point, then
/// trial index.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<TrialRecord>> {
    cfg.validate()?;
    let pool = thread_pool()?;
    let mut out = Vec::new();
    for (pi, point) in cfg.points().iter().enumerate() {
        let point_seed = derive_seed(cfg.master_seed, pi as u64);
        let graphs = cfg.trials.div_ceil(cfg.pairs_per_graph);
        let batches: Vec<Result<Vec<TrialRecord>>> = pool.install(|| {
            (0..graphs)
                .into_par_iter()
                .map(|gi| {
                    let first = gi * cfg.pairs_per_graph;
                    let pairs = cfg.pairs_per_graph.min(cfg.trials - first);
                    run_graph(cfg, pi, point, derive_seed(point_seed, gi as u64), gi, first, pairs)
                })
                .collect()
        });
        for b in batches {
            out.extend(b?);
        }
    }
    Ok(out)
}

fn run_graph(
    cfg: &ExperimentConfig,
    point_index: usize,
    point: &ModelSpec,
    seed: u64,
    graph_index: usize,
    first_trial: usize,
    pairs: usize,
) -> Result<Vec<TrialRecord>> {
    let spec = point.with_seed(seed);
    let (g, endpoints) = match (&spec, &cfg.pair_selection) {
        (ModelSpec::Girg(p), PairSelection::Fixed {
            source_weight,
            target_weight,
            positions,
        }) => {
            let mut rng = phase_rng(seed, Phase::Injected);
            let mut random_point = || TorusPoint::wrapped((0..p.d).map(|_| rng.random::<f64>()));
            let mut injected = Vec::with_capacity(2 * pairs);
            for _ in 0..pairs {
                let (a, b) = match positions {
                    Some((a, b)) => (a.clone(), b.clone()),
                    None => (random_point(), random_point()),
                };
                injected.push((*source_weight, a));
                injected.push((*target_weight, b));
            }
            let g = sample_graph_with(p, &injected)?;
            let endpoints: Vec<(VertexId, VertexId)> = (0..pairs).map(|j| (2 * j, 2 * j + 1)).collect();
            (g, endpoints)
        }
        (_, PairSelection::Fixed { .. }) => return Err(Error::config("pairs", "fixed pairs need the GIRG model")),
        (spec, PairSelection::Random) => {
            let g = match spec {
                ModelSpec::Girg(p) => sample_graph(p)?,
                ModelSpec::Hyperbolic(p) => sample_hyperbolic_graph(p)?,
            };
            let n = g.vertex_count();
            if n < 2 {
                return Err(Error::invalid(format!(
                    "graph {graph_index} has {n} vertices; random pairs need two"
                )));
            }
            let mut rng = phase_rng(seed, Phase::Pairs);
            let endpoints = (0..pairs)
                .map(|_| {
                    let s = rng.random_range(0..n);
                    let t = rng.random_range(0..n - 1);
                    (s, if t >= s { t + 1 } else { t })
                })
                .collect();
            (g, endpoints)
        }
    };
    let components = connected_components(&g);
    endpoints
        .into_iter()
        .enumerate()
        .map(|(j, (s, t))| {
            let same_component = components.same_component(s, t);
            let mut rec = run_pair(cfg, &g, s, t, same_component)?;
            rec.point = point_index;
            rec.trial = first_trial + j;
            rec.graph = graph_index;
            rec.n_param = point.n();
            rec.wmin = point.w_min();
            rec.beta = point.beta();
            Ok(rec)
        })
        .collect()
}

fn run_pair(cfg: &ExperimentConfig, g: &Graph, s: VertexId, t: VertexId, same_component: bool) -> Result<TrialRecord> {
    let obj = cfg.objective.bind(g, t)?;
    let n = g.vertex_count();
    let bfs = if !cfg.compute_bfs {
        None
    } else if same_component {
        Some(bfs_distance(g, s, t)?)
    } else {
        Some(Hops::Unreachable)
    };
    let check = |o: &PatchOutcome| {
        cfg.conformance.map(|b| {
            check_p1(o, g, obj.as_ref()).is_ok()
                && check_p2(o, b.p2_c, b.p2_exponent).is_ok()
                && check_p3(o, g, obj.as_ref(), b.p3_c, b.p3_exponent).is_ok()
        })
    };
    let patch_limit = cfg.patch_step_limit.unwrap_or_else(|| default_patch_step_limit(n));
    let mut greedy = None;
    let mut patch = None;
    let mut patch_history = None;
    for &a in &cfg.algorithms {
        match a {
            Algorithm::Greedy => {
                let route = greedy_route(g, s, obj.as_ref(), cfg.step_limit.unwrap_or_else(|| default_step_limit(n)))?;
                greedy = Some(AlgoRecord::from_outcome(&PatchOutcome::from_greedy(&route), None));
            }
            Algorithm::Patch => {
                let o = patch_route(g, s, obj.as_ref(), patch_limit)?;
                patch = Some(AlgoRecord::from_outcome(&o, check(&o)));
            }
            Algorithm::PatchHistory => {
                let o = patch_route_history(g, s, obj.as_ref(), patch_limit)?;
                patch_history = Some(AlgoRecord::from_outcome(&o, check(&o)));
            }
        }
    }
    let stretch = match (&greedy, bfs) {
        (Some(r), Some(Hops::Finite(d))) if r.delivered() && d >= 1 => Some(r.steps as f64 / d as f64),
        _ => None,
    };
    Ok(TrialRecord {
        point: 0,
        trial: 0,
        graph: 0,
        n_param: 0.0,
        wmin: 0.0,
        beta: 0.0,
        objective: cfg.objective.name().to_string(),
        n_realized: n,
        s,
        t,
        w_s: g.weight(s),
        w_t: g.weight(t),
        phi_s: match phi(g, s, t)? {
            Score::Finite(x) => x,
            Score::Top => f64::INFINITY,
        },
        same_component,
        bfs,
        greedy,
        patch,
        patch_history,
        stretch,
    })
}

/// Aggregates of one algorithm at one grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub point: usize,
    pub n_param: f64,
    pub wmin: f64,
    pub beta: f64,
    pub objective: String,
    pub algorithm: Algorithm,
    pub trials: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub same_component: usize,
    pub successes_same_component: usize,
    pub mean_steps: Option<f64>,
    pub median_steps: Option<f64>,
    pub mean_stretch: Option<f64>,
    pub median_stretch: Option<f64>,
    /// `2 ln ln n / |ln(beta - 2)|`.
    pub yardstick: f64,
    /// Mean endpoint-aware yardstick over the trials where it is defined.
    pub refined_yardstick: Option<f64>,
}

/// Per point and algorithm: success rate with a 95% Wilson interval, step
/// and stretch statistics over deliveries, and the path-length yardsticks.
pub fn summarize(records: &[TrialRecord]) -> Result<Vec<SummaryRow>> {
    if records.is_empty() {
        return Err(Error::invalid("no records to summarize"));
    }
    let mut points: Vec<usize> = records.iter().map(|r| r.point).collect();
    points.sort_unstable();
    points.dedup();
    let mut rows = Vec::new();
    for p in points {
        let group: Vec<&TrialRecord> = records.iter().filter(|r| r.point == p).collect();
        let head = group[0];
        let refined: Vec<f64> = group
            .iter()
            .filter_map(|r| stats::refined_yardstick(r.w_s, r.w_t, r.phi_s, r.beta))
            .collect();
        for a in Algorithm::ALL {
            let runs: Vec<(&TrialRecord, &AlgoRecord)> = group.iter().filter_map(|r| r.algo(a).map(|x| (*r, x))).collect();
            if runs.is_empty() {
                continue;
            }
            let delivered: Vec<(&TrialRecord, &AlgoRecord)> = runs.iter().copied().filter(|(_, x)| x.delivered()).collect();
            let steps: Vec<f64> = delivered.iter().map(|(_, x)| x.steps as f64).collect();
            let stretch: Vec<f64> = delivered
                .iter()
                .filter_map(|(r, x)| match r.bfs {
                    Some(Hops::Finite(d)) if d >= 1 => Some(x.steps as f64 / d as f64),
                    _ => None,
                })
                .collect();
            let (ci_lo, ci_hi) = stats::wilson_interval(delivered.len(), runs.len(), stats::Z95)?;
            rows.push(SummaryRow {
                point: p,
                n_param: head.n_param,
                wmin: head.wmin,
                beta: head.beta,
                objective: head.objective.clone(),
                algorithm: a,
                trials: runs.len(),
                successes: delivered.len(),
                success_rate: delivered.len() as f64 / runs.len() as f64,
                ci_lo,
                ci_hi,
                same_component: runs.iter().filter(|(r, _)| r.same_component).count(),
                successes_same_component: delivered.iter().filter(|(r, _)| r.same_component).count(),
                mean_steps: stats::mean(&steps),
                median_steps: stats::median(&steps),
                mean_stretch: stats::mean(&stretch),
                median_stretch: stats::median(&stretch),
                yardstick: stats::yardstick(head.n_param, head.beta),
                refined_yardstick: stats::mean(&refined),
            });
        }
    }
    Ok(rows)
}

/// Greedy failure rate at one `w_min`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub wmin: f64,
    pub trials: usize,
    pub failures: usize,
    pub failure_rate: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WminCurve {
    pub points: Vec<CurvePoint>,
    /// Consecutive pairs of grid points where the failure rate strictly drops.
    pub decreasing_steps: usize,
    /// Slope of `ln(failure rate)` against `w_min` over points with failures.
    pub log_failure_slope: Option<f64>,
}

/// Greedy failure rate per `w_min` of the sweep. Needs the GIRG model with
/// deterministic short edges.
pub fn sweep_wmin(cfg: &ExperimentConfig) -> Result<(WminCurve, Vec<TrialRecord>)> {
    match &cfg.model {
        ModelSpec::Girg(p) if p.ep3 => {}
        ModelSpec::Girg(_) => return Err(Error::config("ep3", "the w_min sweep requires ep3 = true")),
        ModelSpec::Hyperbolic(_) => return Err(Error::config("model", "the w_min sweep needs the GIRG model")),
    }
    if cfg.sweep_n.len() > 1 {
        return Err(Error::config("sweep_n", "the w_min sweep takes a single n"));
    }
    if !cfg.algorithms.contains(&Algorithm::Greedy) {
        return Err(Error::config("algorithms", "the w_min sweep measures greedy routing"));
    }
    let records = run_experiment(cfg)?;
    let mut points = Vec::new();
    for (pi, spec) in cfg.points().iter().enumerate() {
        let runs: Vec<&AlgoRecord> = records
            .iter()
            .filter(|r| r.point == pi)
            .filter_map(|r| r.greedy.as_ref())
            .collect();
        let failures = runs.iter().filter(|x| !x.delivered()).count();
        let (ci_lo, ci_hi) = if runs.is_empty() {
            (0.0, 1.0)
        } else {
            stats::wilson_interval(failures, runs.len(), stats::Z95)?
        };
        points.push(CurvePoint {
            wmin: spec.w_min(),
            trials: runs.len(),
            failures,
            failure_rate: if runs.is_empty() { 0.0 } else { failures as f64 / runs.len() as f64 },
            ci_lo,
            ci_hi,
        });
    }
    let decreasing_steps = points.windows(2).filter(|w| w[1].failure_rate < w[0].failure_rate).count();
    let (xs, ys): (Vec<f64>, Vec<f64>) = points
        .iter()
        .filter(|p| p.failures > 0)
        .map(|p| (p.wmin, p.failure_rate.ln()))
        .unzip();
    let log_failure_slope = stats::linear_fit(&xs, &ys).ok().map(|f| f.slope);
    Ok((
        WminCurve {
            points,
            decreasing_steps,
            log_failure_slope,
        },
        records,
    ))
}

fn opt<T: std::fmt::Display>(x: Option<T>) -> String {
    x.map_or_else(|| "NA".to_string(), |v| v.to_string())
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::invalid(format!("csv: {other:?}")),
    }
}

const TRIAL_COLUMNS: [&str; 30] = [
    "point",
    "trial",
    "graph",
    "n",
    "wmin",
    "beta",
    "objective",
    "n_realized",
    "s",
    "t",
    "w_s",
    "w_t",
    "phi_s",
    "same_component",
    "bfs",
    "greedy_status",
    "greedy_steps",
    "patch_status",
    "patch_steps",
    "patch_distinct",
    "patch_memory",
    "patch_phi_violations",
    "patch_conformant",
    "history_status",
    "history_steps",
    "history_distinct",
    "history_memory",
    "history_phi_violations",
    "history_conformant",
    "stretch",
];

/// Writes records as CSV after a schema line.
pub fn write_trials_csv<W: Write>(records: &[TrialRecord], mut out: W) -> Result<()> {
    writeln!(out, "{TRIALS_SCHEMA}")?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRIAL_COLUMNS).map_err(csv_err)?;
    for r in records {
        let bfs = match r.bfs {
            None => "NA".to_string(),
            Some(Hops::Unreachable) => "UNREACHABLE".to_string(),
            Some(Hops::Finite(d)) => d.to_string(),
        };
        let mut row = vec![
            r.point.to_string(),
            r.trial.to_string(),
            r.graph.to_string(),
            r.n_param.to_string(),
            r.wmin.to_string(),
            r.beta.to_string(),
            r.objective.clone(),
            r.n_realized.to_string(),
            r.s.to_string(),
            r.t.to_string(),
            r.w_s.to_string(),
            r.w_t.to_string(),
            r.phi_s.to_string(),
            u8::from(r.same_component).to_string(),
            bfs,
            opt(r.greedy.map(|g| g.status)),
            opt(r.greedy.map(|g| g.steps)),
        ];
        for x in [&r.patch, &r.patch_history] {
            row.extend([
                opt(x.map(|x| x.status)),
                opt(x.map(|x| x.steps)),
                opt(x.map(|x| x.distinct_visited)),
                opt(x.map(|x| x.max_memory_words)),
                opt(x.map(|x| x.single_phi_violations)),
                opt(x.and_then(|x| x.conformant).map(u8::from)),
            ]);
        }
        row.push(opt(r.stretch));
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads records written by [`write_trials_csv`].
pub fn read_trials_csv<R: BufRead>(mut input: R) -> Result<Vec<TrialRecord>> {
    let mut first = String::new();
    input.read_line(&mut first)?;
    if first.trim_end() != TRIALS_SCHEMA {
        return Err(Error::parse(1, format!("expected schema line `{TRIALS_SCHEMA}`")));
    }
    let mut rd = csv::Reader::from_reader(input);
    let header = rd.headers().map_err(csv_err)?.clone();
    if header.iter().ne(TRIAL_COLUMNS) {
        return Err(Error::parse(2, "unexpected column header"));
    }
    let mut out = Vec::new();
    for (i, row) in rd.records().enumerate() {
        let row = row.map_err(csv_err)?;
        let line = i + 3;
        let f = |k: usize| row.get(k).unwrap_or("");
        let num = |k: usize| -> Result<f64> {
            f(k).parse::<f64>()
                .map_err(|e| Error::parse(line, format!("{}: {e}", TRIAL_COLUMNS[k])))
        };
        let int = |k: usize| -> Result<usize> {
            f(k).parse::<usize>()
                .map_err(|e| Error::parse(line, format!("{}: {e}", TRIAL_COLUMNS[k])))
        };
        let na = |k: usize| f(k) == "NA";
        let flag = |k: usize| -> Result<Option<bool>> {
            match f(k) {
                "NA" => Ok(None),
                "0" => Ok(Some(false)),
                "1" => Ok(Some(true)),
                other => Err(Error::parse(line, format!("{}: `{other}`", TRIAL_COLUMNS[k]))),
            }
        };
        let algo = |k: usize, full: bool| -> Result<Option<AlgoRecord>> {
            if na(k) {
                return Ok(None);
            }
            let status = f(k).parse().map_err(|e: Error| Error::parse(line, e.to_string()))?;
            Ok(Some(if full {
                AlgoRecord {
                    status,
                    steps: int(k + 1)?,
                    distinct_visited: int(k + 2)?,
                    max_memory_words: int(k + 3)?,
                    single_phi_violations: int(k + 4)?,
                    conformant: flag(k + 5)?,
                }
            } else {
                AlgoRecord {
                    status,
                    steps: int(k + 1)?,
                    distinct_visited: 0,
                    max_memory_words: 0,
                    single_phi_violations: 0,
                    conformant: None,
                }
            }))
        };
        let bfs = match f(14) {
            "NA" => None,
            "UNREACHABLE" => Some(Hops::Unreachable),
            _ => Some(Hops::Finite(int(14)?)),
        };
        out.push(TrialRecord {
            point: int(0)?,
            trial: int(1)?,
            graph: int(2)?,
            n_param: num(3)?,
            wmin: num(4)?,
            beta: num(5)?,
            objective: f(6).to_string(),
            n_realized: int(7)?,
            s: int(8)?,
            t: int(9)?,
            w_s: num(10)?,
            w_t: num(11)?,
            phi_s: num(12)?,
            same_component: flag(13)?.ok_or_else(|| Error::parse(line, "same_component is NA"))?,
            bfs,
            greedy: algo(15, false)?,
            patch: algo(17, true)?,
            patch_history: algo(23, true)?,
            stretch: if na(29) { None } else { Some(num(29)?) },
        });
    }
    Ok(out)
}

pub fn write_summary_csv<W: Write>(rows: &[SummaryRow], mut out: W) -> Result<()> {
    writeln!(out, "{SUMMARY_SCHEMA}")?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "point",
        "n",
        "wmin",
        "beta",
        "objective",
        "algorithm",
        "trials",
        "successes",
        "success_rate",
        "ci_lo",
        "ci_hi",
        "same_component",
        "successes_same_component",
        "mean_steps",
        "median_steps",
        "mean_stretch",
        "median_stretch",
        "yardstick",
        "refined_yardstick",
    ])
    .map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.point.to_string(),
            r.n_param.to_string(),
            r.wmin.to_string(),
            r.beta.to_string(),
            r.objective.clone(),
            r.algorithm.name().to_string(),
            r.trials.to_string(),
            r.successes.to_string(),
            r.success_rate.to_string(),
            r.ci_lo.to_string(),
            r.ci_hi.to_string(),
            r.same_component.to_string(),
            r.successes_same_component.to_string(),
            opt(r.mean_steps),
            opt(r.median_steps),
            opt(r.mean_stretch),
            opt(r.median_stretch),
            r.yardstick.to_string(),
            opt(r.refined_yardstick),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Plot data `(x, y, ci_lo, ci_hi)` of a failure-rate curve.
pub fn write_curve_csv<W: Write>(curve: &WminCurve, mut out: W) -> Result<()> {
    writeln!(out, "{PLOT_SCHEMA}")?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x", "y", "ci_lo", "ci_hi"]).map_err(csv_err)?;
    for p in &curve.points {
        w.write_record([
            p.wmin.to_string(),
            p.failure_rate.to_string(),
            p.ci_lo.to_string(),
            p.ci_hi.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}
