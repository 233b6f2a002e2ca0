//! Simplex over convex-combination weights.
//!
//! Solves `min Σ λᵢ cᵢ` subject to `Σ λᵢ colᵢ = target`, `λ ≥ 0`,
//! `Σ λᵢ = 1` with a two-phase dense tableau and Bland's rule.

use crate::error::{QposError, Result};
use crate::{Matrix, Vector};

#[derive(Debug, Clone)]
pub struct SimplexLp {
    pub costs: Vector,
    /// `k × m`, one column per weight.
    pub moments: Matrix,
    pub target: Vector,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Infeasible,
    Optimal { value: f64, weights: Vector },
}

impl LpOutcome {
    pub fn value(&self) -> f64 {
        match self {
            LpOutcome::Infeasible => f64::INFINITY,
            LpOutcome::Optimal { value, .. } => *value,
        }
    }

    pub fn is_feasible(&self) -> bool {
        matches!(self, LpOutcome::Optimal { .. })
    }
}

const PIVOT_TOL: f64 = 1e-11;
const REDUCED_COST_TOL: f64 = 1e-10;

struct Tableau {
    rows: usize,
    cols: usize, // structural + artificial, rhs stored separately
    a: Vec<f64>,
    rhs: Vec<f64>,
    obj: Vec<f64>,
    obj_rhs: f64,
    basis: Vec<usize>,
    active: Vec<bool>,
}

impl Tableau {
    #[inline]
    fn at(&self, r: usize, c: usize) -> f64 {
        self.a[r * self.cols + c]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let cols = self.cols;
        let p = self.at(r, c);
        for j in 0..cols {
            self.a[r * cols + j] /= p;
        }
        self.rhs[r] /= p;
        for i in 0..self.rows {
            if i == r || !self.active[i] {
                continue;
            }
            let f = self.at(i, c);
            if f != 0.0 {
                for j in 0..cols {
                    self.a[i * cols + j] -= f * self.a[r * cols + j];
                }
                self.rhs[i] -= f * self.rhs[r];
            }
        }
        let f = self.obj[c];
        if f != 0.0 {
            for j in 0..cols {
                self.obj[j] -= f * self.a[r * cols + j];
            }
            self.obj_rhs -= f * self.rhs[r];
        }
        self.basis[r] = c;
    }

    /// Sets the objective row to reduced costs of `cost` w.r.t. the basis.
    fn price(&mut self, cost: &[f64]) {
        self.obj = cost.to_vec();
        self.obj_rhs = 0.0;
        for i in 0..self.rows {
            if !self.active[i] {
                continue;
            }
            let cb = cost[self.basis[i]];
            if cb != 0.0 {
                for j in 0..self.cols {
                    self.obj[j] -= cb * self.at(i, j);
                }
                self.obj_rhs -= cb * self.rhs[i];
            }
        }
    }

    /// Bland's-rule simplex on the current objective; `allowed` masks columns.
    fn run(&mut self, allowed: usize, cap: usize) -> Result<()> {
        for _ in 0..cap {
            let entering = (0..allowed).find(|&j| self.obj[j] < -REDUCED_COST_TOL);
            let Some(c) = entering else { return Ok(()) };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.rows {
                if !self.active[i] {
                    continue;
                }
                let aic = self.at(i, c);
                if aic > PIVOT_TOL {
                    let ratio = self.rhs[i].max(0.0) / aic;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((li, lr)) => {
                            let tie = (ratio - lr).abs() <= 1e-12 * (1.0 + lr.abs());
                            if ratio < lr && !tie || tie && self.basis[i] < self.basis[li] {
                                Some((i, ratio))
                            } else {
                                Some((li, lr))
                            }
                        }
                    };
                }
            }
            match leave {
                Some((r, _)) => self.pivot(r, c),
                None => return Err(QposError::Internal("unbounded direction in a bounded simplex LP".into())),
            }
        }
        Err(QposError::Internal(format!("simplex exceeded iteration cap {cap}")))
    }
}

/// Minimizes the linear cost over the weights; `Infeasible` when the target
/// is not a convex combination of the moment columns.
pub fn lp_min(p: &SimplexLp) -> Result<LpOutcome> {
    let m = p.costs.len();
    let k = p.target.len();
    if m == 0 {
        return Err(QposError::InvalidArgument("LP needs at least one column".into()));
    }
    if p.moments.ncols() != m || p.moments.nrows() != k {
        return Err(QposError::DimensionMismatch { expected: k * m, got: p.moments.len() });
    }
    if p.costs.iter().chain(p.moments.iter()).chain(p.target.iter()).any(|v| !v.is_finite()) {
        return Err(QposError::Evaluation("non-finite LP data".into()));
    }

    let rows = k + 1;
    let cols = m + rows;
    let mut a = vec![0.0; rows * cols];
    let mut rhs = vec![0.0; rows];
    for i in 0..rows {
        let (row_b, sign) = {
            let b = if i < k { p.target[i] } else { 1.0 };
            if b < 0.0 {
                (-b, -1.0)
            } else {
                (b, 1.0)
            }
        };
        rhs[i] = row_b;
        for j in 0..m {
            let v = if i < k { p.moments[(i, j)] } else { 1.0 };
            a[i * cols + j] = sign * v;
        }
        a[i * cols + m + i] = 1.0;
    }
    let scale = 1.0
        + p.target.iter().fold(0.0_f64, |s, v| s.max(v.abs()))
        + p.moments.iter().fold(0.0_f64, |s, v| s.max(v.abs()));

    let mut t = Tableau {
        rows,
        cols,
        a,
        rhs,
        obj: vec![0.0; cols],
        obj_rhs: 0.0,
        basis: (m..m + rows).collect(),
        active: vec![true; rows],
    };
    let cap = (10 * m * (k + 1)).max(200);

    // phase one: minimize the artificial sum
    let mut phase1 = vec![0.0; cols];
    for c in phase1.iter_mut().skip(m) {
        *c = 1.0;
    }
    t.price(&phase1);
    t.run(cols, cap)?;
    let infeas: f64 = (0..rows).filter(|&i| t.active[i] && t.basis[i] >= m).map(|i| t.rhs[i].max(0.0)).sum();
    if infeas > 1e-9 * scale {
        return Ok(LpOutcome::Infeasible);
    }

    // drive zero-level artificials out of the basis, dropping redundant rows
    for i in 0..rows {
        if t.basis[i] < m {
            continue;
        }
        let col =
            (0..m).filter(|&j| t.at(i, j).abs() > 1e-9).max_by(|&x, &y| t.at(i, x).abs().total_cmp(&t.at(i, y).abs()));
        match col {
            Some(c) => t.pivot(i, c),
            None => t.active[i] = false,
        }
    }

    let mut phase2 = vec![0.0; cols];
    phase2[..m].copy_from_slice(p.costs.as_slice());
    t.price(&phase2);
    t.run(m, cap)?;

    let mut weights = Vector::zeros(m);
    for i in 0..rows {
        if t.active[i] && t.basis[i] < m {
            weights[t.basis[i]] = t.rhs[i].max(0.0);
        }
    }
    let total: f64 = weights.sum();
    if total <= 0.0 {
        return Err(QposError::Internal("simplex returned zero weights".into()));
    }
    weights /= total;
    let value = p.costs.dot(&weights);
    Ok(LpOutcome::Optimal { value, weights })
}

/// Max-norm residual of the equality constraints at `weights`.
pub fn constraint_residual(p: &SimplexLp, weights: &Vector) -> f64 {
    let moment = (&p.moments * weights - &p.target).amax();
    moment.max((weights.sum() - 1.0).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn lp(costs: &[f64], cols: &[&[f64]], target: &[f64]) -> SimplexLp {
        let k = target.len();
        let m = costs.len();
        SimplexLp {
            costs: Vector::from_column_slice(costs),
            moments: Matrix::from_fn(k, m, |r, c| cols[c][r]),
            target: Vector::from_column_slice(target),
        }
    }

    #[test]
    fn two_point_midpoint() {
        let p = lp(&[0.0, 1.0], &[&[0.0, 0.0], &[1.0, 1.0]], &[0.5, 0.5]);
        match lp_min(&p).unwrap() {
            LpOutcome::Optimal { value, weights } => {
                assert_relative_eq!(value, 0.5, epsilon = 1e-12);
                assert_relative_eq!(weights[0], 0.5, epsilon = 1e-12);
                assert_relative_eq!(weights[1], 0.5, epsilon = 1e-12);
            }
            LpOutcome::Infeasible => panic!("feasible"),
        }
    }

    #[test]
    fn outside_hull_is_infeasible() {
        let p = lp(&[0.0, 1.0], &[&[0.0, 0.0], &[1.0, 1.0]], &[2.0, 2.0]);
        assert_eq!(lp_min(&p).unwrap(), LpOutcome::Infeasible);
        let p = lp(&[0.0, 1.0], &[&[0.0, 0.0], &[1.0, 1.0]], &[0.5, 0.6]);
        assert_eq!(lp_min(&p).unwrap(), LpOutcome::Infeasible);
    }

    #[test]
    fn single_column() {
        let p = lp(&[3.5], &[&[1.0, -2.0]], &[1.0, -2.0]);
        match lp_min(&p).unwrap() {
            LpOutcome::Optimal { value, weights } => {
                assert_eq!(value, 3.5);
                assert_eq!(weights.as_slice(), &[1.0]);
            }
            LpOutcome::Infeasible => panic!(),
        }
    }

    #[test]
    fn picks_cheapest_representation() {
        // target (0.5) is reachable as ½(0+1) with cost ½(0+0) or from the
        // expensive middle column with cost 5
        let p = lp(&[0.0, 0.0, 5.0], &[&[0.0], &[1.0], &[0.5]], &[0.5]);
        assert_relative_eq!(lp_min(&p).unwrap().value(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn duplicate_and_degenerate_columns() {
        let p = lp(&[1.0, 1.0, 2.0, 0.0], &[&[0.0, 0.0], &[0.0, 0.0], &[1.0, 0.0], &[0.0, 1.0]], &[0.0, 0.0]);
        assert_relative_eq!(lp_min(&p).unwrap().value(), 1.0, epsilon = 1e-12);
    }
}
