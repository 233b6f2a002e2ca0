//! Box grids and the grid/multistart maximizer used as a falsifier.
//!
//! A `Holds` obtained from these routines is a statement about the grid at
//! its pitch, never a proof.

use crate::error::{QposError, Result};
use crate::exec::Exec;
use crate::Vector;

/// Hard cap on the number of lattice points in one scan.
pub const MAX_GRID_POINTS: usize = 20_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct BoxGrid {
    lower: Vector,
    upper: Vector,
    pitch: f64,
    multistarts: usize,
    empty: bool,
}

impl BoxGrid {
    pub fn new(lower: Vector, upper: Vector, pitch: f64, multistarts: usize) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(QposError::DimensionMismatch { expected: lower.len(), got: upper.len() });
        }
        if lower.is_empty() {
            return Err(QposError::InvalidArgument("grid needs at least one axis".into()));
        }
        if !(pitch.is_finite() && pitch > 0.0) {
            return Err(QposError::InvalidArgument(format!("grid pitch must be > 0, got {pitch}")));
        }
        if multistarts == 0 {
            return Err(QposError::InvalidArgument("multistart count must be positive".into()));
        }
        if lower.iter().zip(upper.iter()).any(|(l, u)| l >= u || !l.is_finite() || !u.is_finite()) {
            return Err(QposError::InvalidArgument("grid needs lower < upper on every axis".into()));
        }
        let g = BoxGrid { lower, upper, pitch, multistarts, empty: false };
        if g.point_count_u128() > MAX_GRID_POINTS as u128 {
            return Err(QposError::InvalidArgument(format!("grid has more than {MAX_GRID_POINTS} points")));
        }
        Ok(g)
    }

    /// Axis-aligned cube `[-half, half]^dim`.
    pub fn cube(dim: usize, half: f64, pitch: f64, multistarts: usize) -> Result<Self> {
        BoxGrid::new(Vector::from_element(dim, -half), Vector::from_element(dim, half), pitch, multistarts)
    }

    /// A grid with no points; searches over it are undecided.
    pub fn empty(dim: usize) -> Self {
        BoxGrid { lower: Vector::zeros(dim), upper: Vector::zeros(dim), pitch: 1.0, multistarts: 1, empty: true }
    }

    pub fn is_empty(&self) -> bool {
        self.empty
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn pitch(&self) -> f64 {
        self.pitch
    }

    pub fn multistarts(&self) -> usize {
        self.multistarts
    }

    pub fn lower(&self) -> &Vector {
        &self.lower
    }

    pub fn upper(&self) -> &Vector {
        &self.upper
    }

    pub fn with_multistarts(mut self, n: usize) -> Self {
        self.multistarts = n.max(1);
        self
    }

    fn axis_count(&self, i: usize) -> usize {
        ((self.upper[i] - self.lower[i]) / self.pitch + 1e-9).floor() as usize + 1
    }

    fn point_count_u128(&self) -> u128 {
        if self.empty {
            return 0;
        }
        (0..self.dim()).map(|i| self.axis_count(i) as u128).product()
    }

    pub fn point_count(&self) -> usize {
        self.point_count_u128() as usize
    }

    /// Lattice point with linear index `idx` (last axis fastest).
    pub fn point(&self, mut idx: usize) -> Vector {
        let d = self.dim();
        let mut x = Vector::zeros(d);
        for i in (0..d).rev() {
            let n = self.axis_count(i);
            let j = idx % n;
            idx /= n;
            x[i] = (self.lower[i] + j as f64 * self.pitch).min(self.upper[i]);
        }
        x
    }

    pub fn points(&self) -> impl Iterator<Item = Vector> + '_ {
        (0..self.point_count()).map(move |i| self.point(i))
    }

    pub fn contains(&self, x: &Vector) -> bool {
        !self.empty
            && x.len() == self.dim()
            && x.iter().enumerate().all(|(i, v)| *v >= self.lower[i] - 1e-12 && *v <= self.upper[i] + 1e-12)
    }

    fn clamp(&self, x: &mut Vector) {
        for i in 0..self.dim() {
            x[i] = x[i].clamp(self.lower[i], self.upper[i]);
        }
    }

    fn width(&self) -> f64 {
        (0..self.dim()).fold(0.0_f64, |m, i| m.max(self.upper[i] - self.lower[i]))
    }

    /// Distance from `x` to the box boundary, in pitches.
    pub fn boundary_distance(&self, x: &Vector) -> f64 {
        (0..self.dim()).map(|i| (x[i] - self.lower[i]).min(self.upper[i] - x[i])).fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridMax {
    pub value: f64,
    pub argmax: Vector,
    /// Best value on the lattice itself, before refinement.
    pub grid_value: f64,
    pub evaluations: usize,
}

fn checked(v: f64, x: &Vector) -> Result<f64> {
    if v.is_nan() || v == f64::INFINITY {
        Err(QposError::Evaluation(format!("objective returned {v} at {:?}", x.as_slice())))
    } else {
        Ok(v)
    }
}

fn scan<F>(f: &F, g: &BoxGrid, exec: Exec) -> Result<Vec<f64>>
where
    F: Fn(&Vector) -> f64 + Sync + Send,
{
    if g.is_empty() {
        return Err(QposError::InvalidArgument("empty grid".into()));
    }
    exec.map_range(g.point_count(), |i| {
        let x = g.point(i);
        checked(f(&x), &x)
    })
    .into_iter()
    .collect()
}

/// Indices of the `k` largest values; ties prefer the later index.
fn top_k(values: &[f64], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(b.cmp(&a)));
    idx.truncate(k);
    idx
}

/// Plain lattice scan without refinement.
pub fn grid_scan_max<F>(f: F, g: &BoxGrid, exec: Exec) -> Result<GridMax>
where
    F: Fn(&Vector) -> f64 + Sync + Send,
{
    let values = scan(&f, g, exec)?;
    let best = top_k(&values, 1)[0];
    Ok(GridMax { value: values[best], argmax: g.point(best), grid_value: values[best], evaluations: values.len() })
}

fn directions(d: usize) -> Vec<Vector> {
    let mut dirs = Vec::new();
    for i in 0..d {
        for s in [1.0, -1.0] {
            let mut e = Vector::zeros(d);
            e[i] = s;
            dirs.push(e);
        }
    }
    if d <= 8 {
        for i in 0..d {
            for j in (i + 1)..d {
                for (si, sj) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                    let mut e = Vector::zeros(d);
                    e[i] = si;
                    e[j] = sj;
                    dirs.push(e);
                }
            }
        }
    }
    dirs
}

/// Pattern search from `x0`: axis and pairwise-diagonal moves, halving the
/// step whenever no move improves.
fn refine<F>(f: &F, g: &BoxGrid, x0: Vector, v0: f64) -> Result<(Vector, f64, usize)>
where
    F: Fn(&Vector) -> f64,
{
    let dirs = directions(g.dim());
    let mut x = x0;
    let mut v = v0;
    let mut h = 0.5 * g.pitch();
    let stop = 1e-9 * g.width().max(1.0);
    let mut evals = 0;
    const BUDGET: usize = 50_000;
    while h >= stop && evals < BUDGET {
        let mut improved = false;
        for dir in &dirs {
            let mut y = &x + dir * h;
            g.clamp(&mut y);
            let fy = checked(f(&y), &y)?;
            evals += 1;
            if fy > v {
                x = y;
                v = fy;
                improved = true;
                break;
            }
        }
        if !improved {
            h *= 0.5;
        }
    }
    Ok((x, v, evals))
}

/// Grid scan followed by pattern-search refinement from the best
/// `multistarts` lattice points. Deterministic for a given grid.
///
/// The objective may return `-∞` (treated as an ordinary very low value);
/// `NaN` or `+∞` is an evaluation error.
pub fn grid_multistart_max<F>(f: F, g: &BoxGrid) -> Result<GridMax>
where
    F: Fn(&Vector) -> f64 + Sync + Send,
{
    grid_multistart_max_with(f, g, Exec::default())
}

pub fn grid_multistart_max_with<F>(f: F, g: &BoxGrid, exec: Exec) -> Result<GridMax>
where
    F: Fn(&Vector) -> f64 + Sync + Send,
{
    let values = scan(&f, g, exec)?;
    let starts = top_k(&values, g.multistarts());
    let grid_value = values[starts[0]];
    let refined: Vec<Result<(Vector, f64, usize)>> = exec.map(&starts, |&i| {
        if values[i] == f64::NEG_INFINITY {
            return Ok((g.point(i), values[i], 0));
        }
        refine(&f, g, g.point(i), values[i])
    });
    let mut evaluations = values.len();
    let mut best: Option<(Vector, f64)> = None;
    for r in refined {
        let (x, v, e) = r?;
        evaluations += e;
        if best.as_ref().is_none_or(|(_, bv)| v > *bv) {
            best = Some((x, v));
        }
    }
    let (argmax, value) = best.expect("at least one start");
    Ok(GridMax { value, argmax, grid_value, evaluations })
}
