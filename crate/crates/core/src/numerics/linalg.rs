use crate::error::{QposError, Result};
use crate::tol::{JACOBI_TOL, RANK_TOL};
use crate::{Matrix, Vector};

/// Eigen-decomposition of a symmetric matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub values: Vector,
    /// Orthonormal eigenvectors, one per column, in the order of `values`.
    pub vectors: Matrix,
}

impl SymEigen {
    pub fn min(&self) -> Option<(f64, Vector)> {
        if self.values.is_empty() {
            None
        } else {
            Some((self.values[0], self.vectors.column(0).into_owned()))
        }
    }

    pub fn max(&self) -> Option<(f64, Vector)> {
        let n = self.values.len();
        if n == 0 {
            None
        } else {
            Some((self.values[n - 1], self.vectors.column(n - 1).into_owned()))
        }
    }

    /// Largest absolute eigenvalue, or 0 for an empty matrix.
    pub fn spectral_radius(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Columns whose eigenvalue satisfies `pred`.
    pub fn select(&self, pred: impl Fn(f64) -> bool) -> Matrix {
        let idx: Vec<usize> = (0..self.values.len()).filter(|&i| pred(self.values[i])).collect();
        let n = self.vectors.nrows();
        Matrix::from_fn(n, idx.len(), |r, c| self.vectors[(r, idx[c])])
    }
}

/// Cyclic Jacobi eigen-decomposition.
///
/// Sweeps until the off-diagonal Frobenius mass drops below
/// `JACOBI_TOL · max(1, ‖A‖_F)`.
pub fn sym_eigen(a: &Matrix) -> Result<SymEigen> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(QposError::InvalidArgument(format!(
            "eigen-decomposition needs a square matrix, got {}x{}",
            n,
            a.ncols()
        )));
    }
    for i in 0..n {
        for j in 0..i {
            let (x, y) = (a[(i, j)], a[(j, i)]);
            if (x - y).abs() > 1e-12 * (1.0 + x.abs().max(y.abs())) {
                return Err(QposError::InvalidArgument("matrix is not symmetric".into()));
            }
        }
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(QposError::Evaluation("non-finite matrix entry".into()));
    }

    let mut m = a.clone();
    // symmetrize exactly so rotations stay consistent
    for i in 0..n {
        for j in 0..i {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    let mut v = Matrix::identity(n, n);
    let scale = m.norm().max(1.0);

    let off = |m: &Matrix| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += m[(i, j)] * m[(i, j)];
                }
            }
        }
        s.sqrt()
    };

    let mut sweeps = 0;
    while off(&m) > JACOBI_TOL * scale {
        sweeps += 1;
        if sweeps > 100 {
            return Err(QposError::Internal("Jacobi sweeps did not converge".into()));
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq.abs() < f64::MIN_POSITIVE {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].total_cmp(&m[(j, j)]));
    let values = Vector::from_iterator(n, order.iter().map(|&i| m[(i, i)]));
    let vectors = Matrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(SymEigen { values, vectors })
}

/// Orthonormal basis (as columns) of the span of the columns of `a`, by
/// modified Gram–Schmidt with one re-orthogonalization pass.
pub fn orth_basis(a: &Matrix, tol: f64) -> Matrix {
    let n = a.nrows();
    let mut basis: Vec<Vector> = Vec::new();
    let scale = a.column_iter().fold(0.0_f64, |m, c| m.max(c.norm())).max(1.0);
    for col in a.column_iter() {
        let mut w: Vector = col.into_owned();
        for _ in 0..2 {
            for b in &basis {
                let proj = b.dot(&w);
                w.axpy(-proj, b, 1.0);
            }
        }
        let norm = w.norm();
        if norm > tol * scale {
            basis.push(w / norm);
        }
    }
    if basis.is_empty() {
        Matrix::zeros(n, 0)
    } else {
        Matrix::from_columns(&basis)
    }
}

/// Orthonormal basis of the orthogonal complement of the column span of
/// `basis` (which must itself be orthonormal) in `R^n`.
pub fn complement(basis: &Matrix, n: usize) -> Matrix {
    let mut cols: Vec<Vector> = basis.column_iter().map(|c| c.into_owned()).collect();
    let start = cols.len();
    for i in 0..n {
        let mut w = Vector::zeros(n);
        w[i] = 1.0;
        for _ in 0..2 {
            for b in &cols {
                let proj = b.dot(&w);
                w.axpy(-proj, b, 1.0);
            }
        }
        let norm = w.norm();
        if norm > 1e-8 {
            cols.push(w / norm);
        }
        if cols.len() == n {
            break;
        }
    }
    let out = &cols[start..];
    if out.is_empty() {
        Matrix::zeros(n, 0)
    } else {
        Matrix::from_columns(out)
    }
}

/// Orthonormal basis of `ker(a)`.
pub fn null_space(a: &Matrix) -> Matrix {
    let rows = orth_basis(&a.transpose(), RANK_TOL);
    complement(&rows, a.ncols())
}

/// Smallest singular value of `v`, computed from the eigenvalues of `vᵀv`.
pub fn min_singular_value(v: &Matrix) -> Result<f64> {
    if v.ncols() == 0 {
        return Ok(f64::INFINITY);
    }
    let gram = v.transpose() * v;
    let eig = sym_eigen(&gram)?;
    Ok(eig.values[0].max(0.0).sqrt())
}

/// Checks that the columns of `v` are linearly independent at `RANK_TOL`.
///
/// Uses the orthogonal-projection residual of each column against the span of
/// the previous ones, which keeps the test at the singular-value scale instead
/// of its square.
pub fn has_full_column_rank(v: &Matrix) -> bool {
    orth_basis(v, RANK_TOL).ncols() == v.ncols()
}

/// Solves the square system `a x = b` with partial-pivot LU.
pub fn solve_square(a: &Matrix, b: &Vector) -> Option<Vector> {
    if a.nrows() != a.ncols() || a.nrows() != b.len() {
        return None;
    }
    if a.nrows() == 0 {
        return Some(Vector::zeros(0));
    }
    a.clone().lu().solve(b)
}
