use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use girg_nav::experiments::{read_trials_csv, SUMMARY_SCHEMA, TRIALS_SCHEMA};
use girg_nav::io::{load_graph, GIRG_HEADER};

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_girg-nav"))
        .args(args)
        .env("GIRG_NAV_THREADS", "1")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = cli(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

#[test]
fn generate_then_route() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "g.cfg", "n = 300\nalpha = 2\nseed = 4\n");
    let graph = path(dir.path(), "g.txt");
    ok(&["generate", "--config", &cfg, "--out", &graph]);
    let g = load_graph(&graph).unwrap();
    assert!(fs::read_to_string(&graph).unwrap().starts_with(GIRG_HEADER));
    assert!(g.vertex_count() > 200);

    let out = ok(&["route", "--graph", &graph, "--source", "0", "--target", "1", "--algo", "patch", "--trace"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(&lines[..3], ["source 0", "target 1", "objective phi"]);
    assert_eq!(lines[3], "algorithm patch");
    assert!(lines[4].starts_with("status "));
    assert!(text.contains("\nevents\n"));
    let path_line = lines.iter().find(|l| l.starts_with("path ")).unwrap();
    assert_eq!(path_line.split(' ').nth(1), Some("0"));

    let out = ok(&["route", "--graph", &graph, "--algo", "greedy", "--objective", "phi-relaxed", "--seed", "9", "--trace"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("objective phi-relaxed\nalgorithm greedy\n"));
    assert!(text.contains("\ntrace\n"));
}

#[test]
fn experiment_and_stats_agree() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "e.cfg",
        "n = 500\nalpha = inf\ntrials = 12\npairs_per_graph = 4\nalgorithms = greedy, patch\ncheck_conformance = true\nmaster_seed = 5\n",
    );
    let (trials, summary, stats) = (path(dir.path(), "t.csv"), path(dir.path(), "s.csv"), path(dir.path(), "st.csv"));
    ok(&["experiment", "--config", &cfg, "--out", &trials, "--summary", &summary]);
    let text = fs::read_to_string(&trials).unwrap();
    assert!(text.starts_with(TRIALS_SCHEMA));
    let records = read_trials_csv(text.as_bytes()).unwrap();
    assert_eq!(records.len(), 12);
    assert!(records.iter().all(|r| r.patch.unwrap().conformant == Some(true)));
    ok(&["stats", "--in", &trials, "--out", &stats]);
    let s = fs::read_to_string(&summary).unwrap();
    assert!(s.starts_with(SUMMARY_SCHEMA));
    assert_eq!(s, fs::read_to_string(&stats).unwrap());
    let stdout = ok(&["stats", "--in", &trials]).stdout;
    assert_eq!(String::from_utf8(stdout).unwrap(), s);
}

#[test]
fn wmin_sweep_writes_a_curve() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.cfg",
        "n = 400\nalpha = 2\nep3 = true\ntrials = 10\nsweep_wmin = 1, 2\ncompute_bfs = false\n",
    );
    let (trials, curve) = (path(dir.path(), "t.csv"), path(dir.path(), "c.csv"));
    ok(&["experiment", "--config", &cfg, "--out", &trials, "--curve", &curve]);
    let c = fs::read_to_string(&curve).unwrap();
    assert!(c.starts_with("# girg-nav plot v1\n"));
    assert_eq!(c.lines().count(), 4, "{c}");

    let no_ep3 = write(dir.path(), "n.cfg", "n = 400\nalpha = 2\ntrials = 4\nsweep_wmin = 1, 2\n");
    let out = cli(&["experiment", "--config", &no_ep3, "--out", &trials, "--curve", &curve]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("ep3"));
}

#[test]
fn convert_embeds_hyperbolic_graphs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "h.cfg", "model = hyperbolic\nn = 400\nalpha_h = 0.8\nc_h = -1\nseed = 2\n");
    let (hyp, girg) = (path(dir.path(), "h.txt"), path(dir.path(), "g.txt"));
    ok(&["generate", "--config", &cfg, "--out", &hyp]);
    ok(&["convert", "--in", &hyp, "--out", &girg]);
    let h = load_graph(&hyp).unwrap();
    let g = load_graph(&girg).unwrap();
    assert!(h.hyperbolic().is_some() && g.hyperbolic().is_none());
    assert_eq!(h.edges().collect::<Vec<_>>(), g.edges().collect::<Vec<_>>());
    assert_eq!(g.params().d, 1);
    let out = ok(&["route", "--graph", &hyp, "--objective", "phi-h", "--algo", "patch-history"]);
    assert!(String::from_utf8(out.stdout).unwrap().contains("objective phi-h\n"));

    // converting a GIRG file is an input error
    let out = cli(&["convert", "--in", &girg, "--out", &path(dir.path(), "x.txt")]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(dir.path(), "o");
    let missing = path(dir.path(), "missing.cfg");
    assert_eq!(cli(&["generate", "--config", &missing, "--out", &out]).status.code(), Some(3));
    let bad = write(dir.path(), "bad.cfg", "n = 100\nbeta = 3.5\n");
    let r = cli(&["generate", "--config", &bad, "--out", &out]);
    assert_eq!(r.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&r.stderr).contains("beta"));
    let unknown = write(dir.path(), "u.cfg", "n = 100\ncolour = red\n");
    assert_eq!(cli(&["generate", "--config", &unknown, "--out", &out]).status.code(), Some(2));
    let corrupt = write(dir.path(), "c.txt", "girg-graph v1\nnonsense\n");
    assert_eq!(cli(&["route", "--graph", &corrupt]).status.code(), Some(3));
    assert_eq!(cli(&["route"]).status.code(), Some(2));
    assert_eq!(cli(&["frobnicate"]).status.code(), Some(2));
    assert!(cli(&["--help"]).status.success());

    let cfg = write(dir.path(), "g.cfg", "n = 50\n");
    let graph = path(dir.path(), "g.txt");
    ok(&["generate", "--config", &cfg, "--out", &graph]);
    assert_eq!(cli(&["route", "--graph", &graph, "--source", "99999"]).status.code(), Some(2));
    let r = cli(&["route", "--graph", &graph, "--objective", "phi-h"]);
    assert_eq!(r.status.code(), Some(2));
}
