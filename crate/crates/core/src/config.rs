//! Flat `key = value` configuration files.
//!
//! One assignment per line; `#` starts a comment; blank lines are ignored;
//! each key may appear once. Lists are comma separated. Booleans are
//! `true`/`false` or `1`/`0`.
//!
//! | key | meaning | default |
//! |---|---|---|
//! | `model` | `girg` or `hyperbolic` | `girg` |
//! | `n` | intensity (GIRG) or vertex count (hyperbolic) | `10000` |
//! | `d`, `beta`, `wmin`, `alpha`, `kernel_c`, `c1`, `c2`, `ep3`, `seed` | GIRG parameters; `alpha` may be `inf` | `2`, `2.5`, `1`, `inf`, `1`, `1`, `c1`, `false`, `0` |
//! | `alpha_h`, `c_h`, `t_h` | hyperbolic parameters (`seed` is shared) | `0.75`, `0`, `0` |
//! | `trials` | trials per sweep point | `100` |
//! | `pairs_per_graph` | trials sharing one sampled graph | `1` |
//! | `pairs` | `random` or `fixed` | `random` |
//! | `source_weight`, `target_weight` | weights of injected endpoints | required for `fixed` |
//! | `source_pos`, `target_pos` | positions of injected endpoints | uniform per pair |
//! | `objective` | `phi`, `phi-relaxed` or `phi-h` | `phi` |
//! | `relax_band`, `relax_exponent`, `relax_seed` | relaxation factor band, exponent (`default` or a real), seed | `0.5,2`, `default`, `0` |
//! | `weak_cap`, `weak_delta` | weak relaxation; both or neither | off |
//! | `algorithms` | subset of `greedy,patch,patch-history` | `greedy` |
//! | `sweep_n`, `sweep_wmin` | grids of `n` and `w_min` | none |
//! | `master_seed` | seed of the whole experiment | `0` |
//! | `step_limit`, `patch_step_limit` | `default` or a positive integer | `default` |
//! | `compute_bfs` | record shortest-path distances | `true` |
//! | `check_conformance` | check patched walks | `false` |
//! | `p2_c`, `p2_exponent`, `p3_c`, `p3_exponent` | check bounds | `4`, `2`, `4`, `2` |

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::experiments::{Algorithm, ConformanceBounds, ExperimentConfig, ModelSpec, PairSelection};
use crate::geometry::TorusPoint;
use crate::hyperbolic::HyperbolicParams;
use crate::model::{Alpha, ModelParams};
use crate::routing::{ObjectiveSpec, Relaxation, WeakRelaxation};

const GIRG_KEYS: [&str; 9] = ["d", "beta", "wmin", "alpha", "kernel_c", "c1", "c2", "ep3", "seed"];
const HYPERBOLIC_KEYS: [&str; 4] = ["alpha_h", "c_h", "t_h", "seed"];

struct Entries {
    map: BTreeMap<String, String>,
}

impl Entries {
    fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(Error::config(format!("line {}", i + 1), format!("expected `key = value`, got `{line}`")));
            };
            let (k, v) = (k.trim().to_string(), v.trim().to_string());
            if k.is_empty() {
                return Err(Error::config(format!("line {}", i + 1), "empty key"));
            }
            if map.insert(k.clone(), v).is_some() {
                return Err(Error::config(k, "assigned more than once"));
            }
        }
        Ok(Entries { map })
    }

    fn take_str(&mut self, key: &str) -> Option<String> {
        self.map.remove(key)
    }

    fn take<T: FromStr>(&mut self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.take_str(key)
            .map(|v| v.parse::<T>().map_err(|e| Error::config(key, format!("`{v}`: {e}"))))
            .transpose()
    }

    fn take_or<T: FromStr>(&mut self, key: &str, default: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        Ok(self.take(key)?.unwrap_or(default))
    }

    fn take_bool(&mut self, key: &str, default: bool) -> Result<bool> {
        match self.take_str(key).as_deref() {
            None => Ok(default),
            Some("true" | "1") => Ok(true),
            Some("false" | "0") => Ok(false),
            Some(v) => Err(Error::config(key, format!("`{v}` is not a boolean"))),
        }
    }

    fn take_list<T: FromStr>(&mut self, key: &str) -> Result<Option<Vec<T>>>
    where
        T::Err: std::fmt::Display,
    {
        self.take_str(key)
            .map(|v| {
                v.split(',')
                    .map(|x| x.trim().parse::<T>().map_err(|e| Error::config(key, format!("`{x}`: {e}"))))
                    .collect()
            })
            .transpose()
    }

    /// `default` or a value.
    fn take_defaultable<T: FromStr>(&mut self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.take_str(key) {
            None => Ok(None),
            Some(v) if v == "default" => Ok(None),
            Some(v) => v.parse().map(Some).map_err(|e| Error::config(key, format!("`{v}`: {e}"))),
        }
    }

    fn take_point(&mut self, key: &str) -> Result<Option<TorusPoint>> {
        self.take_list::<f64>(key)?
            .map(|c| TorusPoint::new(c).map_err(|e| Error::config(key, e.to_string())))
            .transpose()
    }

    fn reject(&mut self, keys: &[&str], why: &str) -> Result<()> {
        for k in keys {
            if self.map.contains_key(*k) {
                return Err(Error::config(*k, why.to_string()));
            }
        }
        Ok(())
    }

    fn finish(self) -> Result<()> {
        match self.map.into_keys().next() {
            Some(k) => Err(Error::config(k, "unknown key")),
            None => Ok(()),
        }
    }
}

/// Parses a configuration file. Every violation is reported as a
/// configuration error naming the offending key.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut e = Entries::parse(text)?;
    let model = match e.take_str("model").as_deref().unwrap_or("girg") {
        "girg" => {
            e.reject(&HYPERBOLIC_KEYS[..3], "only used by the hyperbolic model")?;
            let alpha = e.take_or("alpha", Alpha::Infinite)?;
            let mut p = ModelParams::new(
                e.take_or("n", 10_000.0)?,
                e.take_or("d", 2)?,
                e.take_or("beta", 2.5)?,
                e.take_or("wmin", 1.0)?,
                alpha,
            );
            p.kernel_c = e.take_or("kernel_c", 1.0)?;
            p.c1 = e.take_or("c1", 1.0)?;
            p.c2 = e.take_or("c2", p.c1)?;
            p.ep3 = e.take_bool("ep3", false)?;
            p.seed = e.take_or("seed", 0)?;
            ModelSpec::Girg(p)
        }
        "hyperbolic" => {
            e.reject(&GIRG_KEYS[..8], "only used by the GIRG model")?;
            let p = HyperbolicParams::new(
                e.take_or("n", 10_000usize)?,
                e.take_or("alpha_h", 0.75)?,
                e.take_or("c_h", 0.0)?,
                e.take_or("t_h", 0.0)?,
            )
            .with_seed(e.take_or("seed", 0)?);
            ModelSpec::Hyperbolic(p)
        }
        other => return Err(Error::config("model", format!("`{other}` is not girg or hyperbolic"))),
    };
    let mut cfg = ExperimentConfig::new(model);
    cfg.trials = e.take_or("trials", cfg.trials)?;
    cfg.pairs_per_graph = e.take_or("pairs_per_graph", cfg.pairs_per_graph)?;
    let source_weight = e.take::<f64>("source_weight")?;
    let target_weight = e.take::<f64>("target_weight")?;
    let source_pos = e.take_point("source_pos")?;
    let target_pos = e.take_point("target_pos")?;
    cfg.pair_selection = match e.take_str("pairs").as_deref().unwrap_or("random") {
        "random" => {
            if source_weight.is_some() || target_weight.is_some() || source_pos.is_some() || target_pos.is_some() {
                return Err(Error::config("pairs", "endpoint weights and positions need pairs = fixed"));
            }
            PairSelection::Random
        }
        "fixed" => PairSelection::Fixed {
            source_weight: source_weight.ok_or_else(|| Error::config("source_weight", "required with pairs = fixed"))?,
            target_weight: target_weight.ok_or_else(|| Error::config("target_weight", "required with pairs = fixed"))?,
            positions: match (source_pos, target_pos) {
                (Some(a), Some(b)) => Some((a, b)),
                (None, None) => None,
                _ => return Err(Error::config("source_pos", "give both source_pos and target_pos or neither")),
            },
        },
        other => return Err(Error::config("pairs", format!("`{other}` is not random or fixed"))),
    };
    let band = e.take_list::<f64>("relax_band")?;
    let exponent = e.take_defaultable::<f64>("relax_exponent")?;
    let relax_seed = e.take::<u64>("relax_seed")?;
    let weak_cap = e.take::<f64>("weak_cap")?;
    let weak_delta = e.take::<f64>("weak_delta")?;
    cfg.objective = match e.take_str("objective").as_deref().unwrap_or("phi") {
        "phi-relaxed" => {
            let mut r = Relaxation::default();
            if let Some(b) = band {
                let [lo, hi] = b[..] else {
                    return Err(Error::config("relax_band", "expected `lo,hi`"));
                };
                r.band = (lo, hi);
            }
            r.exponent = exponent;
            r.seed = relax_seed.unwrap_or(0);
            r.weak = match (weak_cap, weak_delta) {
                (Some(cap), Some(delta)) => Some(WeakRelaxation { cap, delta }),
                (None, None) => None,
                _ => return Err(Error::config("weak_cap", "give both weak_cap and weak_delta or neither")),
            };
            ObjectiveSpec::PhiRelaxed(r)
        }
        name @ ("phi" | "phi-h") => {
            if band.is_some() || exponent.is_some() || relax_seed.is_some() || weak_cap.is_some() || weak_delta.is_some() {
                return Err(Error::config("objective", "relaxation keys need objective = phi-relaxed"));
            }
            if name == "phi" {
                ObjectiveSpec::Phi
            } else {
                ObjectiveSpec::PhiH
            }
        }
        other => return Err(Error::config("objective", format!("unknown objective `{other}`"))),
    };
    if let Some(a) = e.take_list::<Algorithm>("algorithms")? {
        let mut a = a;
        a.dedup();
        cfg.algorithms = a;
    }
    cfg.sweep_n = e.take_list("sweep_n")?.unwrap_or_default();
    cfg.sweep_wmin = e.take_list("sweep_wmin")?.unwrap_or_default();
    cfg.master_seed = e.take_or("master_seed", 0)?;
    cfg.step_limit = e.take_defaultable("step_limit")?;
    cfg.patch_step_limit = e.take_defaultable("patch_step_limit")?;
    cfg.compute_bfs = e.take_bool("compute_bfs", true)?;
    let check = e.take_bool("check_conformance", false)?;
    let d = ConformanceBounds::default();
    let bounds = ConformanceBounds {
        p2_c: e.take_or("p2_c", d.p2_c)?,
        p2_exponent: e.take_or("p2_exponent", d.p2_exponent)?,
        p3_c: e.take_or("p3_c", d.p3_c)?,
        p3_exponent: e.take_or("p3_exponent", d.p3_exponent)?,
    };
    cfg.conformance = check.then_some(bounds);
    e.finish()?;
    cfg.validate()?;
    Ok(cfg)
}

fn join(xs: &[f64]) -> String {
    xs.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
}

/// Renders a configuration that [`parse_config`] reads back unchanged.
pub fn render_config(cfg: &ExperimentConfig) -> String {
    let mut s = String::new();
    let mut kv = |k: &str, v: String| {
        let _ = writeln!(s, "{k} = {v}");
    };
    match &cfg.model {
        ModelSpec::Girg(p) => {
            kv("model", "girg".into());
            kv("n", p.n.to_string());
            kv("d", p.d.to_string());
            kv("beta", p.beta.to_string());
            kv("wmin", p.w_min.to_string());
            kv("alpha", p.alpha.to_string());
            kv("kernel_c", p.kernel_c.to_string());
            kv("c1", p.c1.to_string());
            kv("c2", p.c2.to_string());
            kv("ep3", p.ep3.to_string());
            kv("seed", p.seed.to_string());
        }
        ModelSpec::Hyperbolic(p) => {
            kv("model", "hyperbolic".into());
            kv("n", p.n.to_string());
            kv("alpha_h", p.alpha_h.to_string());
            kv("c_h", p.c_h.to_string());
            kv("t_h", p.t_h.to_string());
            kv("seed", p.seed.to_string());
        }
    }
    kv("trials", cfg.trials.to_string());
    kv("pairs_per_graph", cfg.pairs_per_graph.to_string());
    match &cfg.pair_selection {
        PairSelection::Random => kv("pairs", "random".into()),
        PairSelection::Fixed {
            source_weight,
            target_weight,
            positions,
        } => {
            kv("pairs", "fixed".into());
            kv("source_weight", source_weight.to_string());
            kv("target_weight", target_weight.to_string());
            if let Some((a, b)) = positions {
                kv("source_pos", join(a.coords()));
                kv("target_pos", join(b.coords()));
            }
        }
    }
    kv("objective", cfg.objective.name().into());
    if let ObjectiveSpec::PhiRelaxed(r) = &cfg.objective {
        kv("relax_band", join(&[r.band.0, r.band.1]));
        kv("relax_exponent", r.exponent.map_or_else(|| "default".into(), |g| g.to_string()));
        kv("relax_seed", r.seed.to_string());
        if let Some(w) = r.weak {
            kv("weak_cap", w.cap.to_string());
            kv("weak_delta", w.delta.to_string());
        }
    }
    kv(
        "algorithms",
        cfg.algorithms.iter().map(|a| a.name()).collect::<Vec<_>>().join(","),
    );
    if !cfg.sweep_n.is_empty() {
        kv("sweep_n", join(&cfg.sweep_n));
    }
    if !cfg.sweep_wmin.is_empty() {
        kv("sweep_wmin", join(&cfg.sweep_wmin));
    }
    kv("master_seed", cfg.master_seed.to_string());
    let limit = |l: Option<usize>| l.map_or_else(|| "default".into(), |l| l.to_string());
    kv("step_limit", limit(cfg.step_limit));
    kv("patch_step_limit", limit(cfg.patch_step_limit));
    kv("compute_bfs", cfg.compute_bfs.to_string());
    kv("check_conformance", cfg.conformance.is_some().to_string());
    if let Some(b) = cfg.conformance {
        kv("p2_c", b.p2_c.to_string());
        kv("p2_exponent", b.p2_exponent.to_string());
        kv("p3_c", b.p3_c.to_string());
        kv("p3_exponent", b.p3_exponent.to_string());
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(r: Result<ExperimentConfig>) -> String {
        match r {
            Err(Error::Config { field, .. }) => field,
            other => panic!("expected a config error, got {other:?}"),
        }
    }

    #[test]
    fn defaults_and_comments() {
        let cfg = parse_config("# nothing but defaults\n\n  trials = 7   # inline\n").unwrap();
        assert_eq!(cfg.trials, 7);
        assert_eq!(cfg.objective, ObjectiveSpec::Phi);
        let ModelSpec::Girg(p) = &cfg.model else { panic!() };
        assert_eq!((p.n, p.d, p.beta, p.alpha), (10_000.0, 2, 2.5, Alpha::Infinite));
    }

    #[test]
    fn full_file() {
        let text = "model = girg\nn = 1e5\nalpha = 2\nkernel_c = 0.5\nep3 = 1\npairs = fixed\n\
                    source_weight = 31.6\ntarget_weight = 31.6\nobjective = phi-relaxed\nrelax_band = 0.5, 2\n\
                    algorithms = greedy, patch\nsweep_wmin = 1,2,4,8\nmaster_seed = 99\nstep_limit = 40\n\
                    check_conformance = true\np3_exponent = 3\n";
        let cfg = parse_config(text).unwrap();
        let ModelSpec::Girg(p) = &cfg.model else { panic!() };
        assert_eq!((p.n, p.alpha, p.kernel_c, p.ep3), (1e5, Alpha::Finite(2.0), 0.5, true));
        assert_eq!(cfg.algorithms, vec![Algorithm::Greedy, Algorithm::Patch]);
        assert_eq!(cfg.sweep_wmin, vec![1.0, 2.0, 4.0, 8.0]);
        assert_eq!(cfg.step_limit, Some(40));
        assert_eq!(cfg.conformance.unwrap().p3_exponent, 3.0);
        assert_eq!(parse_config(&render_config(&cfg)).unwrap(), cfg);
    }

    #[test]
    fn hyperbolic_file() {
        let cfg = parse_config("model = hyperbolic\nn = 5000\nalpha_h = 0.8\nc_h = -1\nobjective = phi-h\n").unwrap();
        let ModelSpec::Hyperbolic(p) = &cfg.model else { panic!() };
        assert_eq!((p.n, p.alpha_h, p.c_h), (5000, 0.8, -1.0));
        assert_eq!(parse_config(&render_config(&cfg)).unwrap(), cfg);
    }

    #[test]
    fn errors_name_the_key() {
        assert_eq!(field(parse_config("bogus = 1")), "bogus");
        assert_eq!(field(parse_config("trials = 1\ntrials = 2")), "trials");
        assert_eq!(field(parse_config("beta = 3.5")), "beta");
        assert_eq!(field(parse_config("beta = x")), "beta");
        assert_eq!(field(parse_config("just words")), "line 1");
        assert_eq!(field(parse_config("alpha_h = 0.7")), "alpha_h");
        assert_eq!(field(parse_config("model = hyperbolic\nalpha = 2")), "alpha");
        assert_eq!(field(parse_config("pairs = fixed\nsource_weight = 3")), "target_weight");
        assert_eq!(field(parse_config("relax_band = 1,1")), "objective");
        assert_eq!(field(parse_config("objective = phi-h")), "objective");
        assert_eq!(field(parse_config("ep3 = maybe")), "ep3");
        assert_eq!(field(parse_config("algorithms = greedy,teleport")), "algorithms");
        assert_eq!(field(parse_config("model = hyperbolic\nalpha_h = 1.2")), "alpha_h");
    }
}
