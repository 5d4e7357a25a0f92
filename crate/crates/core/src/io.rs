//! Line-oriented text formats for graphs.
//!
//! ```text
//! girg-graph v1
//! params n=<real> d=<int> beta=<real> wmin=<real> alpha=<real|inf> kernel_c=<real> c1=<real> c2=<real> ep3=<0|1> seed=<u64>
//! vertices <count>
//! <id> <weight> <coord_1> ... <coord_d>
//! edges <count>
//! <id_u> <id_v>
//! ```
//!
//! Hyperbolic graphs use the header `hyperbolic-graph v1`, the parameter line
//! `params n=<int> alpha_h=<real> c_h=<real> t_h=<real> seed=<u64>` and vertex
//! lines `<id> <r> <nu>`. Per-vertex reals are written with 17 significant
//! digits and edges with `id_u < id_v` in lexicographic order.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::geometry::TorusPoint;
use crate::graph::{Graph, VertexId};
use crate::hyperbolic::{hyperbolic_graph_from_edges, HyperbolicParams, HyperbolicPoint};
use crate::model::{Alpha, ModelParams, Vertex};

pub const GIRG_HEADER: &str = "girg-graph v1";
pub const HYPERBOLIC_HEADER: &str = "hyperbolic-graph v1";

/// Writes `g` in its native format: hyperbolic if it carries hyperbolic
/// coordinates, GIRG otherwise.
pub fn write_graph<W: Write>(g: &Graph, out: W) -> Result<()> {
    if g.hyperbolic().is_some() {
        write_hyperbolic_graph(g, out)
    } else {
        write_girg_graph(g, out)
    }
}

/// Writes the GIRG coordinates of `g`, also for hyperbolic graphs.
pub fn write_girg_graph<W: Write>(g: &Graph, out: W) -> Result<()> {
    let mut w = BufWriter::new(out);
    let p = g.params();
    writeln!(w, "{GIRG_HEADER}")?;
    writeln!(
        w,
        "params n={} d={} beta={} wmin={} alpha={} kernel_c={} c1={} c2={} ep3={} seed={}",
        p.n,
        p.d,
        p.beta,
        p.w_min,
        p.alpha,
        p.kernel_c,
        p.c1,
        p.c2,
        u8::from(p.ep3),
        p.seed
    )?;
    writeln!(w, "vertices {}", g.vertex_count())?;
    for v in 0..g.vertex_count() {
        write!(w, "{} {:.16e}", v, g.weight(v))?;
        for c in g.pos(v) {
            write!(w, " {c:.16e}")?;
        }
        writeln!(w)?;
    }
    write_edges(g, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn write_hyperbolic_graph<W: Write>(g: &Graph, out: W) -> Result<()> {
    let layer = g
        .hyperbolic()
        .ok_or_else(|| Error::invalid("graph has no hyperbolic coordinates"))?;
    let mut w = BufWriter::new(out);
    let p = &layer.params;
    writeln!(w, "{HYPERBOLIC_HEADER}")?;
    writeln!(
        w,
        "params n={} alpha_h={} c_h={} t_h={} seed={}",
        p.n, p.alpha_h, p.c_h, p.t_h, p.seed
    )?;
    writeln!(w, "vertices {}", layer.points.len())?;
    for (v, pt) in layer.points.iter().enumerate() {
        writeln!(w, "{} {:.16e} {:.16e}", v, pt.r, pt.nu)?;
    }
    write_edges(g, &mut w)?;
    w.flush()?;
    Ok(())
}

fn write_edges<W: Write>(g: &Graph, w: &mut W) -> Result<()> {
    writeln!(w, "edges {}", g.edge_count())?;
    for (u, v) in g.edges() {
        writeln!(w, "{u} {v}")?;
    }
    Ok(())
}

/// Reads either format, dispatching on the header line.
pub fn read_graph<R: BufRead>(input: R) -> Result<Graph> {
    let mut lines = Lines::new(input);
    let (no, header) = lines.next_line()?;
    match header.trim() {
        GIRG_HEADER => read_girg_body(&mut lines),
        HYPERBOLIC_HEADER => read_hyperbolic_body(&mut lines),
        other => Err(Error::parse(no, format!("unknown header `{other}`"))),
    }
}

pub fn load_graph(path: impl AsRef<Path>) -> Result<Graph> {
    read_graph(BufReader::new(File::open(path)?))
}

pub fn save_graph(g: &Graph, path: impl AsRef<Path>) -> Result<()> {
    write_graph(g, File::create(path)?)
}

fn read_girg_body<R: BufRead>(lines: &mut Lines<R>) -> Result<Graph> {
    let (no, line) = lines.next_line()?;
    let mut kv = KeyValues::parse(no, &line)?;
    let params = ModelParams {
        n: kv.take("n")?,
        d: kv.take("d")?,
        beta: kv.take("beta")?,
        w_min: kv.take("wmin")?,
        alpha: kv.take::<Alpha>("alpha")?,
        kernel_c: kv.take("kernel_c")?,
        c1: kv.take("c1")?,
        c2: kv.take("c2")?,
        ep3: kv.take::<u8>("ep3").and_then(|b| match b {
            0 => Ok(false),
            1 => Ok(true),
            _ => Err(Error::parse(no, "ep3 must be 0 or 1")),
        })?,
        seed: kv.take("seed")?,
    };
    kv.finish()?;
    params.validate().map_err(|e| Error::parse(no, e.to_string()))?;
    let count = lines.counted("vertices")?;
    let mut vertices = Vec::with_capacity(count);
    for id in 0..count {
        let (no, line) = lines.next_line()?;
        let fields = numbers::<f64>(no, &line, 2 + params.d, id)?;
        let pos = TorusPoint::new(fields[2..].to_vec()).map_err(|e| Error::parse(no, e.to_string()))?;
        vertices.push(Vertex {
            id,
            pos,
            weight: fields[1],
        });
    }
    let edges = read_edges(lines, count)?;
    Graph::from_parts(params, &vertices, &edges)
}

fn read_hyperbolic_body<R: BufRead>(lines: &mut Lines<R>) -> Result<Graph> {
    let (no, line) = lines.next_line()?;
    let mut kv = KeyValues::parse(no, &line)?;
    let params = HyperbolicParams {
        n: kv.take("n")?,
        alpha_h: kv.take("alpha_h")?,
        c_h: kv.take("c_h")?,
        t_h: kv.take("t_h")?,
        seed: kv.take("seed")?,
    };
    kv.finish()?;
    let count = lines.counted("vertices")?;
    if count != params.n {
        return Err(Error::parse(no, format!("{count} vertices but n={}", params.n)));
    }
    let mut points = Vec::with_capacity(count);
    for id in 0..count {
        let (no, line) = lines.next_line()?;
        let f = numbers::<f64>(no, &line, 3, id)?;
        points.push(HyperbolicPoint { r: f[1], nu: f[2] });
    }
    let edges = read_edges(lines, count)?;
    hyperbolic_graph_from_edges(&params, points, &edges)
}

fn read_edges<R: BufRead>(lines: &mut Lines<R>, n: usize) -> Result<Vec<(VertexId, VertexId)>> {
    let count = lines.counted("edges")?;
    let mut edges = Vec::with_capacity(count);
    for _ in 0..count {
        let (no, line) = lines.next_line()?;
        let mut it = line.split_ascii_whitespace();
        let (Some(a), Some(b), None) = (it.next(), it.next(), it.next()) else {
            return Err(Error::parse(no, "expected `<id_u> <id_v>`"));
        };
        let u: usize = parse_token(no, a)?;
        let v: usize = parse_token(no, b)?;
        if !(u < v && v < n) {
            return Err(Error::parse(no, format!("edge ({u}, {v}) needs id_u < id_v < {n}")));
        }
        edges.push((u, v));
    }
    if let Some((no, _)) = lines.next_nonempty()? {
        return Err(Error::parse(no, "trailing content after edges"));
    }
    Ok(edges)
}

/// A vertex line: the expected id followed by `len - 1` numbers.
fn numbers<T: FromStr>(no: usize, line: &str, len: usize, id: usize) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    let tokens: Vec<&str> = line.split_ascii_whitespace().collect();
    if tokens.len() != len {
        return Err(Error::parse(no, format!("expected {len} fields, got {}", tokens.len())));
    }
    if parse_token::<usize>(no, tokens[0])? != id {
        return Err(Error::parse(no, format!("expected vertex id {id}")));
    }
    tokens.iter().map(|t| parse_token(no, t)).collect()
}

fn parse_token<T: FromStr>(no: usize, token: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    token
        .parse()
        .map_err(|e| Error::parse(no, format!("`{token}`: {e}")))
}

struct Lines<R> {
    inner: std::io::Lines<R>,
    no: usize,
}

impl<R: BufRead> Lines<R> {
    fn new(r: R) -> Self {
        Lines { inner: r.lines(), no: 0 }
    }

    fn next_nonempty(&mut self) -> Result<Option<(usize, String)>> {
        for line in self.inner.by_ref() {
            self.no += 1;
            let line = line?;
            if !line.trim().is_empty() {
                return Ok(Some((self.no, line)));
            }
        }
        Ok(None)
    }

    fn next_line(&mut self) -> Result<(usize, String)> {
        self.next_nonempty()?
            .ok_or_else(|| Error::parse(self.no + 1, "unexpected end of file"))
    }

    /// A `<keyword> <count>` line.
    fn counted(&mut self, keyword: &str) -> Result<usize> {
        let (no, line) = self.next_line()?;
        match line.split_ascii_whitespace().collect::<Vec<_>>()[..] {
            [k, c] if k == keyword => parse_token(no, c),
            _ => Err(Error::parse(no, format!("expected `{keyword} <count>`"))),
        }
    }
}

/// The `key=value` tokens of a `params` line.
struct KeyValues {
    no: usize,
    pairs: Vec<(String, String)>,
}

impl KeyValues {
    fn parse(no: usize, line: &str) -> Result<Self> {
        let mut tokens = line.split_ascii_whitespace();
        if tokens.next() != Some("params") {
            return Err(Error::parse(no, "expected `params ...`"));
        }
        let pairs = tokens
            .map(|t| {
                t.split_once('=')
                    .map(|(k, v)| (k.to_string(), v.to_string()))
                    .ok_or_else(|| Error::parse(no, format!("expected key=value, got `{t}`")))
            })
            .collect::<Result<_>>()?;
        Ok(KeyValues { no, pairs })
    }

    fn take<T: FromStr>(&mut self, key: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        let i = self
            .pairs
            .iter()
            .position(|(k, _)| k == key)
            .ok_or_else(|| Error::parse(self.no, format!("missing `{key}`")))?;
        let (_, v) = self.pairs.remove(i);
        v.parse().map_err(|e| Error::parse(self.no, format!("`{key}`: {e}")))
    }

    fn finish(self) -> Result<()> {
        match self.pairs.first() {
            Some((k, _)) => Err(Error::parse(self.no, format!("unexpected key `{k}`"))),
            None => Ok(()),
        }
    }
}
