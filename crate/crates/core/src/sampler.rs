//! Exact edge sampling in expected near-linear time.
//!
//! Vertices are split into weight buckets `[w_min 2^b, w_min 2^(b+1))`. For
//! each bucket pair the torus is refined dyadically down to a level whose cell
//! side is about the distance at which the edge probability saturates. Every
//! vertex pair of the two buckets is then covered exactly once:
//!
//! * pairs in touching cells at the finest level are tested one by one;
//! * pairs whose cells first stop touching at level `l` (the cells are not
//!   adjacent while their parents are) are separated by at least one cell
//!   side of level `l`. The probability of all such pairs is bounded by the
//!   kernel at the bucket's maximal weights and that minimal distance;
//!   candidates are drawn by geometric skipping over the bound and accepted
//!   with the ratio of true probability to bound.
//!
//! The result has exactly the distribution of independent per-pair coins.

use rand::Rng;

use crate::geometry::{axis_offsets, dist};
use crate::model::EdgeKernel;
use crate::rng::open_closed_unit;

/// Cell side relative to the saturation radius at the finest level.
const SIDE_FACTOR: f64 = 0.5;
/// Upper bound on `d * level`, limiting the size of one bucket's cell index.
const MAX_LEVEL_BITS: u32 = 24;

struct Bucket {
    /// Finest level built for this bucket.
    level: u32,
    /// Vertex ids ordered by Morton code at `level`.
    order: Vec<u32>,
    codes: Vec<u64>,
    /// `starts[c]..starts[c + 1]` is the range of cell `c` in `order`.
    starts: Vec<u32>,
    w_max: f64,
}

impl Bucket {
    #[inline]
    fn cell(&self, code: u64, level: u32, d: u32) -> &[u32] {
        let shift = d * (self.level - level);
        let lo = self.starts[(code << shift) as usize] as usize;
        let hi = self.starts[((code + 1) << shift) as usize] as usize;
        &self.order[lo..hi]
    }

    /// Distinct non-empty cells at `level`, ascending.
    fn occupied(&self, level: u32, d: u32) -> Vec<u64> {
        let shift = d * (self.level - level);
        let mut out: Vec<u64> = Vec::new();
        for &c in &self.codes {
            let c = c >> shift;
            if out.last() != Some(&c) {
                out.push(c);
            }
        }
        out
    }
}

fn morton_encode(cell: &[u64], level: u32) -> u64 {
    let mut code = 0u64;
    for bit in (0..level).rev() {
        for &c in cell {
            code = (code << 1) | ((c >> bit) & 1);
        }
    }
    code
}

fn morton_decode(code: u64, level: u32, d: usize, out: &mut [u64]) {
    out.iter_mut().for_each(|c| *c = 0);
    let mut shift = (level as usize * d) as u32;
    for _ in 0..level {
        for c in out.iter_mut() {
            shift -= 1;
            *c = (*c << 1) | ((code >> shift) & 1);
        }
    }
}

fn circ(a: u64, b: u64, k: u64) -> u64 {
    let diff = a.abs_diff(b);
    diff.min(k - diff)
}

struct Ctx<'a, R: ?Sized> {
    kernel: &'a EdgeKernel,
    d: usize,
    weights: &'a [f64],
    coords: &'a [f64],
    rng: &'a mut R,
    edges: Vec<(u32, u32)>,
}

impl<R: Rng + ?Sized> Ctx<'_, R> {
    #[inline]
    fn prob(&self, u: u32, v: u32) -> f64 {
        let (u, v) = (u as usize, v as usize);
        let d = self.d;
        let dd = dist(&self.coords[u * d..u * d + d], &self.coords[v * d..v * d + d]);
        self.kernel.prob(self.weights[u] * self.weights[v], dd)
    }

    #[inline]
    fn test(&mut self, u: u32, v: u32) {
        let p = self.prob(u, v);
        if p >= 1.0 || (p > 0.0 && self.rng.random::<f64>() < p) {
            self.push(u, v);
        }
    }

    #[inline]
    fn push(&mut self, u: u32, v: u32) {
        self.edges.push(if u < v { (u, v) } else { (v, u) });
    }

    /// Every pair of `a x b`, each tested exactly.
    fn scan(&mut self, a: &[u32], b: &[u32]) {
        for &u in a {
            for &v in b {
                self.test(u, v);
            }
        }
    }

    /// Unordered pairs within one cell.
    fn scan_within(&mut self, a: &[u32]) {
        for (i, &u) in a.iter().enumerate() {
            for &v in &a[i + 1..] {
                self.test(u, v);
            }
        }
    }

    /// Pairs of `a x b` whose probability is at most `bound < 1`.
    fn skip_sample(&mut self, a: &[u32], b: &[u32], bound: f64) {
        let total = a.len() * b.len();
        let log_q = (-bound).ln_1p();
        let mut idx = 0usize;
        loop {
            let skip = (open_closed_unit(self.rng).ln() / log_q).floor();
            if skip >= (total - idx) as f64 {
                return;
            }
            idx += skip as usize;
            let (u, v) = (a[idx / b.len()], b[idx % b.len()]);
            let p = self.prob(u, v);
            if self.rng.random::<f64>() * bound < p {
                self.push(u, v);
            }
            idx += 1;
            if idx >= total {
                return;
            }
        }
    }
}

/// Samples every vertex pair independently with the kernel probability.
/// Returns edges `(u, v)` with `u < v`, in no particular order.
pub(crate) fn sample_edges<R: Rng + ?Sized>(
    kernel: &EdgeKernel,
    w_min: f64,
    d: usize,
    weights: &[f64],
    coords: &[f64],
    rng: &mut R,
) -> Vec<(u32, u32)> {
    let n = weights.len();
    if n < 2 {
        return Vec::new();
    }
    let bucket_of = |w: f64| (w / w_min).log2().floor().max(0.0) as usize;
    let nb = weights.iter().map(|&w| bucket_of(w)).max().unwrap_or(0) + 1;
    let mut members: Vec<Vec<u32>> = vec![Vec::new(); nb];
    for (v, &w) in weights.iter().enumerate() {
        members[bucket_of(w)].push(v as u32);
    }
    let w_max: Vec<f64> = members
        .iter()
        .map(|m| m.iter().map(|&v| weights[v as usize]).fold(0.0, f64::max))
        .collect();

    let level_cap = (MAX_LEVEL_BITS / d as u32).max(1);
    let pair_level = |a: usize, b: usize| -> u32 {
        let sat = kernel.saturation_volume(w_max[a] * w_max[b]);
        let side = SIDE_FACTOR * sat.powf(1.0 / d as f64);
        if !(side < 1.0) {
            0
        } else if side <= 0.0 {
            level_cap
        } else {
            ((-side.log2()).floor() as u32).min(level_cap)
        }
    };
    let mut levels = vec![vec![0u32; nb]; nb];
    let mut bucket_level = vec![0u32; nb];
    for a in 0..nb {
        for b in a..nb {
            if members[a].is_empty() || members[b].is_empty() {
                continue;
            }
            let l = pair_level(a, b);
            levels[a][b] = l;
            levels[b][a] = l;
            bucket_level[a] = bucket_level[a].max(l);
            bucket_level[b] = bucket_level[b].max(l);
        }
    }

    let buckets: Vec<Bucket> = members
        .into_iter()
        .enumerate()
        .map(|(b, m)| build_bucket(m, bucket_level[b], w_max[b], d, coords))
        .collect();

    let mut ctx = Ctx {
        kernel,
        d,
        weights,
        coords,
        rng,
        edges: Vec::new(),
    };
    let du = d as u32;
    let mut cell_a = vec![0u64; d];
    let mut axes: Vec<Vec<u64>> = vec![Vec::new(); d];
    let mut cell_b = vec![0u64; d];

    for a in 0..nb {
        for b in a..nb {
            if buckets[a].order.is_empty() || buckets[b].order.is_empty() {
                continue;
            }
            let same = a == b;
            // iterate over the occupied cells of the sparser bucket
            let (it, pt) = if buckets[a].order.len() <= buckets[b].order.len() {
                (&buckets[a], &buckets[b])
            } else {
                (&buckets[b], &buckets[a])
            };
            let top = levels[a][b];
            let ww = it.w_max * pt.w_max;
            for level in 0..=top {
                let k = 1u64 << level;
                let side = 1.0 / k as f64;
                let type_two = level >= 1 && kernel.prob(ww, side) > 0.0;
                let type_one = level == top;
                if !type_two && !type_one {
                    continue;
                }
                for code_a in it.occupied(level, du) {
                    let la = it.cell(code_a, level, du);
                    morton_decode(code_a, level, d, &mut cell_a);
                    if type_one {
                        for (axis, &c) in cell_a.iter().enumerate() {
                            axes[axis] = axis_offsets(c as usize, 1, k as usize)
                                .into_iter()
                                .map(|x| x as u64)
                                .collect();
                        }
                        for_each_cell(&axes, &mut cell_b, &mut |cb| {
                            let code_b = morton_encode(cb, level);
                            if same && code_b < code_a {
                                return;
                            }
                            let lb = pt.cell(code_b, level, du);
                            if lb.is_empty() {
                                return;
                            }
                            if same && code_b == code_a {
                                ctx.scan_within(la);
                            } else {
                                ctx.scan(la, lb);
                            }
                        });
                    }
                    if type_two {
                        let half = (k / 2) as usize;
                        for (axis, &c) in cell_a.iter().enumerate() {
                            let parent = (c / 2) as usize;
                            let mut children: Vec<u64> = axis_offsets(parent, 1, half)
                                .into_iter()
                                .flat_map(|p| [2 * p as u64, 2 * p as u64 + 1])
                                .collect();
                            children.sort_unstable();
                            axes[axis] = children;
                        }
                        for_each_cell(&axes, &mut cell_b, &mut |cb| {
                            let cheb = cell_a
                                .iter()
                                .zip(cb)
                                .map(|(&x, &y)| circ(x, y, k))
                                .max()
                                .unwrap_or(0);
                            if cheb < 2 {
                                return;
                            }
                            let code_b = morton_encode(cb, level);
                            if same && code_b < code_a {
                                return;
                            }
                            let lb = pt.cell(code_b, level, du);
                            if lb.is_empty() {
                                return;
                            }
                            let bound = kernel.prob(ww, (cheb - 1) as f64 * side);
                            if bound <= 0.0 {
                                return;
                            }
                            if bound >= 1.0 {
                                ctx.scan(la, lb);
                            } else {
                                ctx.skip_sample(la, lb, bound);
                            }
                        });
                    }
                }
            }
        }
    }
    ctx.edges
}

fn build_bucket(members: Vec<u32>, level: u32, w_max: f64, d: usize, coords: &[f64]) -> Bucket {
    let k = 1u64 << level;
    let mut cell = vec![0u64; d];
    let mut keyed: Vec<(u64, u32)> = members
        .iter()
        .map(|&v| {
            let base = v as usize * d;
            for (axis, c) in cell.iter_mut().enumerate() {
                *c = ((coords[base + axis] * k as f64) as u64).min(k - 1);
            }
            (morton_encode(&cell, level), v)
        })
        .collect();
    keyed.sort_unstable();
    let cells = 1usize << (level as usize * d);
    let mut starts = vec![0u32; cells + 1];
    for &(c, _) in &keyed {
        starts[c as usize + 1] += 1;
    }
    for i in 0..cells {
        starts[i + 1] += starts[i];
    }
    Bucket {
        level,
        codes: keyed.iter().map(|&(c, _)| c).collect(),
        order: keyed.into_iter().map(|(_, v)| v).collect(),
        starts,
        w_max,
    }
}

fn for_each_cell(axes: &[Vec<u64>], cur: &mut [u64], f: &mut impl FnMut(&[u64])) {
    fn rec(axes: &[Vec<u64>], i: usize, cur: &mut [u64], f: &mut impl FnMut(&[u64])) {
        if i == axes.len() {
            f(cur);
            return;
        }
        for &v in &axes[i] {
            cur[i] = v;
            rec(axes, i + 1, cur, f);
        }
    }
    rec(axes, 0, cur, f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Alpha, ModelParams};
    use crate::rng::{phase_rng, Phase};

    #[test]
    fn morton_roundtrip() {
        let mut out = [0u64; 3];
        for level in 0..6 {
            let k = 1u64 << level;
            for x in 0..k {
                for y in [0, k / 2, k - 1] {
                    let cell = [x, y, (x + y) % k];
                    let code = morton_encode(&cell, level);
                    assert!(code < 1 << (3 * level));
                    morton_decode(code, level, 3, &mut out);
                    assert_eq!(out, cell);
                    if level > 0 {
                        let parent = morton_encode(&[x / 2, y / 2, ((x + y) % k) / 2], level - 1);
                        assert_eq!(code >> 3, parent);
                    }
                }
            }
        }
    }

    fn random_instance(n: usize, d: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
        let mut rng = phase_rng(seed, Phase::Positions);
        let p = ModelParams::default();
        let coords = (0..n * d).map(|_| rng.random::<f64>()).collect();
        let weights = (0..n)
            .map(|_| crate::model::sample_weight(&p, open_closed_unit(&mut rng)).unwrap())
            .collect();
        (weights, coords)
    }

    fn brute_threshold(kernel: &EdgeKernel, d: usize, w: &[f64], x: &[f64]) -> Vec<(u32, u32)> {
        let mut out = Vec::new();
        for u in 0..w.len() {
            for v in u + 1..w.len() {
                let dd = dist(&x[u * d..u * d + d], &x[v * d..v * d + d]);
                if kernel.prob(w[u] * w[v], dd) >= 1.0 {
                    out.push((u as u32, v as u32));
                }
            }
        }
        out
    }

    #[test]
    fn threshold_matches_brute_force() {
        for (d, n, nn, c1) in [(1, 300, 300.0, 1.0), (2, 400, 400.0, 1.0), (2, 500, 5000.0, 3.0), (3, 300, 300.0, 0.5)] {
            let (w, x) = random_instance(n, d, d as u64 * 31 + n as u64);
            let params = ModelParams::new(nn, d, 2.5, 1.0, Alpha::Infinite).with_c1(c1);
            let kernel = params.kernel();
            let mut rng = phase_rng(1, Phase::Edges);
            let mut got = sample_edges(&kernel, 1.0, d, &w, &x, &mut rng);
            got.sort_unstable();
            let before = got.len();
            got.dedup();
            assert_eq!(before, got.len(), "duplicate edges");
            assert_eq!(got, brute_threshold(&kernel, d, &w, &x), "d={d} n={n}");
        }
    }

    #[test]
    fn probabilistic_pairs_match_kernel() {
        // fixed vertex set, many edge resamples: per-pair frequencies must
        // match the kernel probability
        let (d, n) = (2, 40);
        let (w, x) = random_instance(n, d, 5);
        let mut params = ModelParams::new(200.0, d, 2.5, 1.0, Alpha::Finite(1.5));
        params.kernel_c = 0.7;
        let kernel = params.kernel();
        let reps = 4000;
        let mut counts = vec![0u32; n * n];
        let mut rng = phase_rng(77, Phase::Edges);
        for _ in 0..reps {
            for (u, v) in sample_edges(&kernel, 1.0, d, &w, &x, &mut rng) {
                counts[u as usize * n + v as usize] += 1;
            }
        }
        let mut chi = 0.0;
        let mut dof = 0;
        for u in 0..n {
            for v in u + 1..n {
                let dd = dist(&x[u * d..u * d + d], &x[v * d..v * d + d]);
                let p = kernel.prob(w[u] * w[v], dd);
                let obs = counts[u * n + v] as f64 / reps as f64;
                let sd = (p * (1.0 - p) / reps as f64).sqrt();
                if p >= 1.0 || p <= 0.0 {
                    assert_eq!(obs, p);
                    continue;
                }
                assert!((obs - p).abs() < 5.0 * sd + 1e-9, "pair {u},{v}: {obs} vs {p}");
                chi += ((obs - p) / sd).powi(2);
                dof += 1;
            }
        }
        // chi-square with `dof` degrees of freedom: mean dof, sd sqrt(2 dof)
        let z = (chi - dof as f64) / (2.0 * dof as f64).sqrt();
        assert!(z.abs() < 5.0, "chi2 {chi} dof {dof}");
    }
}
