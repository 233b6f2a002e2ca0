//! SSD spaces, point sets, and pairwise q-positivity.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, QposError, Result};
use crate::numerics::linalg::sym_eigen;
use crate::numerics::lp::{lp_min, LpOutcome, SimplexLp};
use crate::tol::{self, RANK_TOL};
use crate::verdict::{Verdict, Witness};
use crate::{Matrix, Vector};

/// Which concrete model a space was built as. Only used to gate
/// model-specific operations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelKind {
    General,
    /// `R^k × R^k` with `⌊(x,x*),(y,y*)⌋ = ⟨x,y*⟩ + ⟨y,x*⟩`.
    Monotone {
        k: usize,
    },
    /// `R^k` with the Euclidean inner product.
    Hilbert {
        k: usize,
    },
    /// `R^{n1} × R^{n2}` with `K²⟨x1,y1⟩ − ⟨x2,y2⟩`.
    Lipschitz {
        k_const: f64,
        n1: usize,
        n2: usize,
    },
}

/// `R^n` with the symmetric bilinear form `⌊b, c⌋ = bᵀ S c`.
#[derive(Debug, Clone, PartialEq)]
pub struct SsdSpace {
    s: Matrix,
    degenerate: bool,
    kind: ModelKind,
}

impl SsdSpace {
    /// Builds a space from an exactly symmetric matrix.
    pub fn new(s: Matrix) -> Result<Self> {
        SsdSpace::with_kind(s, ModelKind::General)
    }

    pub(crate) fn with_kind(s: Matrix, kind: ModelKind) -> Result<Self> {
        let n = s.nrows();
        if n == 0 || s.ncols() != n {
            return Err(QposError::InvalidArgument(format!(
                "pairing matrix must be square and nonempty, got {}x{}",
                n,
                s.ncols()
            )));
        }
        if s != s.transpose() {
            return Err(QposError::InvalidArgument("pairing matrix is not symmetric".into()));
        }
        let eig = sym_eigen(&s)?;
        let degenerate = eig.values.iter().any(|v| v.abs() <= RANK_TOL);
        Ok(SsdSpace { s, degenerate, kind })
    }

    /// `R^k × R^k` with the duality pairing `S = [[0, I], [I, 0]]`.
    pub fn monotone(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(QposError::InvalidArgument("k must be positive".into()));
        }
        let n = 2 * k;
        let s = Matrix::from_fn(n, n, |i, j| if i + k == j || j + k == i { 1.0 } else { 0.0 });
        SsdSpace::with_kind(s, ModelKind::Monotone { k })
    }

    /// `R^k` with `S = I`.
    pub fn hilbert(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(QposError::InvalidArgument("k must be positive".into()));
        }
        SsdSpace::with_kind(Matrix::identity(k, k), ModelKind::Hilbert { k })
    }

    pub fn dim(&self) -> usize {
        self.s.nrows()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.s
    }

    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn check(&self, b: &Vector) -> Result<()> {
        check_dim(self.dim(), b.len())
    }

    /// `⌊b, c⌋ = bᵀ S c`.
    pub fn pairing(&self, b: &Vector, c: &Vector) -> Result<f64> {
        self.check(b)?;
        self.check(c)?;
        Ok(self.pair(b, c))
    }

    /// `q(b) = ½ bᵀ S b`.
    pub fn q_value(&self, b: &Vector) -> Result<f64> {
        self.check(b)?;
        Ok(self.q(b))
    }

    /// `S b`, the image of `b` under the pairing map.
    pub fn apply(&self, b: &Vector) -> Vector {
        &self.s * b
    }

    /// Summed over `i ≤ j` so that `pair(b, c)` and `pair(c, b)` agree bit for
    /// bit.
    #[inline]
    pub(crate) fn pair(&self, b: &Vector, c: &Vector) -> f64 {
        let n = self.dim();
        let mut acc = 0.0;
        for i in 0..n {
            let mut row = self.s[(i, i)] * (b[i] * c[i]);
            for j in (i + 1)..n {
                let sij = self.s[(i, j)];
                if sij != 0.0 {
                    row += sij * (b[i] * c[j] + b[j] * c[i]);
                }
            }
            acc += row;
        }
        acc
    }

    #[inline]
    pub(crate) fn q(&self, b: &Vector) -> f64 {
        tol::q_sign() * 0.5 * self.pair(b, b)
    }

    /// `q(b − c)` without allocating.
    #[inline]
    pub(crate) fn q_diff(&self, b: &Vector, c: &Vector) -> f64 {
        let n = self.dim();
        let mut acc = 0.0;
        for i in 0..n {
            let di = b[i] - c[i];
            let mut row = 0.5 * self.s[(i, i)] * (di * di);
            for j in (i + 1)..n {
                let sij = self.s[(i, j)];
                if sij != 0.0 {
                    row += sij * (di * (b[j] - c[j]));
                }
            }
            acc += row;
        }
        tol::q_sign() * acc
    }
}

/// A finite nonempty set of distinct points of a space.
#[derive(Debug, Clone)]
pub struct PointSet {
    space: Arc<SsdSpace>,
    points: Vec<Vector>,
}

/// Points closer than this are duplicates.
pub const DUPLICATE_DIST: f64 = 1e-12;

impl PointSet {
    pub fn new(space: Arc<SsdSpace>, points: Vec<Vector>) -> Result<Self> {
        if points.is_empty() {
            return Err(QposError::InvalidArgument("point set must be nonempty".into()));
        }
        for p in &points {
            space.check(p)?;
            if p.iter().any(|v| !v.is_finite()) {
                return Err(QposError::InvalidArgument("non-finite coordinate".into()));
            }
        }
        // sweep along the first coordinate; only near neighbours can collide
        let mut order: Vec<usize> = (0..points.len()).collect();
        order.sort_by(|&a, &b| points[a][0].total_cmp(&points[b][0]));
        for (k, &i) in order.iter().enumerate() {
            for &j in &order[k + 1..] {
                if points[j][0] - points[i][0] > DUPLICATE_DIST {
                    break;
                }
                if dist2(&points[i], &points[j]) <= DUPLICATE_DIST * DUPLICATE_DIST {
                    let (a, b) = (i.min(j), i.max(j));
                    return Err(QposError::InvalidArgument(format!("points {a} and {b} are duplicates")));
                }
            }
        }
        Ok(PointSet { space, points })
    }

    pub fn from_rows(space: Arc<SsdSpace>, rows: &[&[f64]]) -> Result<Self> {
        PointSet::new(space, rows.iter().map(|r| Vector::from_column_slice(r)).collect())
    }

    pub fn space(&self) -> &SsdSpace {
        &self.space
    }

    pub fn space_arc(&self) -> &Arc<SsdSpace> {
        &self.space
    }

    pub fn points(&self) -> &[Vector] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// A new set with `extra` appended, skipping points already present.
    pub fn extended(&self, extra: impl IntoIterator<Item = Vector>) -> Result<Self> {
        let mut points = self.points.clone();
        for e in extra {
            if points.iter().all(|p| (p - &e).norm() > DUPLICATE_DIST) {
                points.push(e);
            }
        }
        PointSet::new(self.space.clone(), points)
    }

    pub fn contains(&self, b: &Vector) -> bool {
        self.points.iter().any(|p| (p - b).norm() <= DUPLICATE_DIST)
    }
}

fn dist2(a: &Vector, b: &Vector) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Exhaustive pairwise check of `q(aᵢ − aⱼ) ≥ −ε`.
pub fn is_q_positive(a: &PointSet) -> Verdict {
    let sp = a.space();
    let pts = a.points();
    let mut worst: Option<(f64, usize, usize)> = None;
    for i in 0..pts.len() {
        for j in 0..i {
            let v = sp.q_diff(&pts[i], &pts[j]);
            if worst.is_none_or(|(w, _, _)| v < w) {
                worst = Some((v, i, j));
            }
        }
    }
    match worst {
        None => Verdict::holds().with_note("fewer than two points"),
        Some((v, i, j)) if v < -tol::eps() => Verdict::fails(Witness::pair(&pts[i], &pts[j])).with_measure(v),
        Some((v, _, _)) => Verdict::holds().with_measure(v),
    }
}

/// Membership of `b` in `A^π`: `q(b − a) ≥ −ε` for every `a ∈ A`.
pub fn pi_member(a: &PointSet, b: &Vector) -> Result<Verdict> {
    let sp = a.space();
    sp.check(b)?;
    let (v, idx) = min_q_to_set(a, b);
    Ok(if v < -tol::eps() {
        Verdict::fails(Witness::pair(b, &a.points()[idx])).with_measure(v)
    } else {
        Verdict::holds().with_measure(v)
    })
}

/// `min_{a ∈ A} q(b − a)` and the index attaining it.
pub(crate) fn min_q_to_set(a: &PointSet, b: &Vector) -> (f64, usize) {
    let sp = a.space();
    let mut best = (f64::INFINITY, 0);
    for (i, p) in a.points().iter().enumerate() {
        let v = sp.q_diff(b, p);
        if v < best.0 {
            best = (v, i);
        }
    }
    best
}

/// Decides `b ∈ conv^w A`.
///
/// With nonsingular `S` this is plain convex-hull membership. With singular
/// `S` the weak topology `w(B,B)` is the pull-back of the standard topology
/// through `x ↦ Sx`, so the test becomes `Sb ∈ S·conv A`.
pub fn conv_w_hull_member(a: &PointSet, b: &Vector) -> Result<Verdict> {
    let sp = a.space();
    sp.check(b)?;
    let outcome = if sp.is_degenerate() {
        let cols: Vec<Vector> = a.points().iter().map(|p| sp.apply(p)).collect();
        hull_lp(&cols, &sp.apply(b))?
    } else {
        hull_lp(a.points(), b)?
    };
    Ok(match outcome {
        LpOutcome::Infeasible => Verdict::fails(Witness::point(b)).with_note("outside the hull"),
        LpOutcome::Optimal { .. } => Verdict::holds(),
    })
}

pub(crate) fn hull_lp(cols: &[Vector], target: &Vector) -> Result<LpOutcome> {
    let k = target.len();
    let m = cols.len();
    let lp = SimplexLp {
        costs: Vector::zeros(m),
        moments: Matrix::from_fn(k, m, |r, c| cols[c][r]),
        target: target.clone(),
    };
    lp_min(&lp)
}
