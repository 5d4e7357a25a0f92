//! Torus geometry: the max-norm metric on `[0,1)^d` with wrap-around and the
//! equal-cube grid decomposition.

use crate::error::{Error, Result};

/// A point on the d-dimensional unit torus. Every coordinate lies in `[0, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusPoint(Vec<f64>);

impl TorusPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::invalid("torus point needs at least one coordinate"));
        }
        if let Some(c) = coords.iter().find(|c| !(0.0..1.0).contains(*c)) {
            return Err(Error::invalid(format!("coordinate {c} outside [0, 1)")));
        }
        Ok(TorusPoint(coords))
    }

    /// Reduces arbitrary reals modulo 1.
    pub fn wrapped(coords: impl IntoIterator<Item = f64>) -> Self {
        TorusPoint(coords.into_iter().map(wrap_unit).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.0
    }
}

/// `x mod 1` in `[0, 1)`.
pub fn wrap_unit(x: f64) -> f64 {
    let r = x - x.floor();
    // x slightly below an integer can round up to exactly 1.0
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// Max-norm torus distance between two points of equal dimension.
pub fn torus_distance(x: &TorusPoint, y: &TorusPoint) -> Result<f64> {
    if x.dim() != y.dim() {
        return Err(Error::invalid(format!(
            "dimension mismatch: {} vs {}",
            x.dim(),
            y.dim()
        )));
    }
    Ok(dist(x.coords(), y.coords()))
}

/// Unchecked max-norm torus distance on coordinate slices.
#[inline]
pub(crate) fn dist(x: &[f64], y: &[f64]) -> f64 {
    let mut m = 0.0f64;
    for (a, b) in x.iter().zip(y) {
        let diff = (a - b).abs();
        let axis = diff.min(1.0 - diff);
        if axis > m {
            m = axis;
        }
    }
    m
}

/// Cell of an equal-cube grid on the torus.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GridIndex {
    pub cell_coords: Vec<usize>,
    pub cells_per_axis: usize,
}

impl GridIndex {
    /// Row-major index of the cell in `0..cells_per_axis^d`.
    pub fn linear(&self) -> usize {
        self.cell_coords
            .iter()
            .fold(0, |acc, &c| acc * self.cells_per_axis + c)
    }

    /// Volume of one cell, computed from the realized cell count.
    pub fn cell_volume(&self) -> f64 {
        (self.cells_per_axis as f64).powi(-(self.cell_coords.len() as i32))
    }
}

/// Largest integer `k` with `k^d <= x`.
pub(crate) fn integer_root(x: f64, d: usize) -> usize {
    if x < 1.0 {
        return 0;
    }
    let mut k = x.powf(1.0 / d as f64).round().max(1.0) as usize;
    while (k as f64).powi(d as i32) > x {
        k -= 1;
    }
    while ((k + 1) as f64).powi(d as i32) <= x {
        k += 1;
    }
    k
}

/// Cell index of `x` in `k` equal intervals, half-open `[lo, hi)`.
#[inline]
pub(crate) fn axis_cell(c: f64, k: usize) -> usize {
    ((c * k as f64) as usize).min(k - 1)
}

/// The w-grid cell containing `x`.
///
/// The torus is split into `floor((n/w)^(1/d))^d` equal cubes. When `n/w` is
/// not a perfect d-th power the cubes are slightly larger than `w/n`; use
/// [`GridIndex::cell_volume`] for the actual volume.
pub fn grid_cell(x: &TorusPoint, w: f64, n: f64) -> Result<GridIndex> {
    if !(w > 0.0) || !(w < n) {
        return Err(Error::invalid(format!("w-grid needs 0 < w < n, got w={w}, n={n}")));
    }
    let k = integer_root(n / w, x.dim());
    Ok(GridIndex {
        cell_coords: x.coords().iter().map(|&c| axis_cell(c, k)).collect(),
        cells_per_axis: k,
    })
}

/// All cells within Chebyshev distance `radius_cells` of `g` on the cell torus.
pub fn neighbor_cells(g: &GridIndex, radius_cells: usize) -> Vec<GridIndex> {
    let k = g.cells_per_axis;
    let per_axis: Vec<Vec<usize>> = g
        .cell_coords
        .iter()
        .map(|&c| axis_offsets(c, radius_cells, k))
        .collect();
    let mut out = Vec::new();
    let mut cur = vec![0usize; per_axis.len()];
    cartesian(&per_axis, 0, &mut cur, &mut |cell| {
        out.push(GridIndex {
            cell_coords: cell.to_vec(),
            cells_per_axis: k,
        })
    });
    out
}

/// Distinct cell coordinates within `radius` of `c` on a cycle of length `k`.
pub(crate) fn axis_offsets(c: usize, radius: usize, k: usize) -> Vec<usize> {
    if 2 * radius + 1 >= k {
        return (0..k).collect();
    }
    (0..=2 * radius)
        .map(|o| (c + k + o - radius) % k)
        .collect()
}

fn cartesian(axes: &[Vec<usize>], i: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
    if i == axes.len() {
        f(cur);
        return;
    }
    for &v in &axes[i] {
        cur[i] = v;
        cartesian(axes, i + 1, cur, f);
    }
}
