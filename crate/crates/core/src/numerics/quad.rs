//! Quadratic forms restricted to subspaces and affine sets.

use crate::error::{check_dim, QposError, Result};
use crate::numerics::linalg::{has_full_column_rank, sym_eigen};
use crate::space::SsdSpace;
use crate::tol::{self, RANGE_TOL, RANK_TOL};
use crate::verdict::{Verdict, Witness};
use crate::{Matrix, Vector};

/// Decides `Vᵀ S V ⪰ 0` up to `ε`.
///
/// A failing verdict carries `V u` for the most negative eigenvector `u`, a
/// direction along which the form is negative.
pub fn psd_on_subspace(s: &Matrix, v: &Matrix) -> Result<Verdict> {
    check_dim(s.nrows(), v.nrows())?;
    if v.ncols() == 0 {
        return Ok(Verdict::holds().with_note("zero-dimensional subspace"));
    }
    if !has_full_column_rank(v) {
        return Err(QposError::InvalidArgument("basis is rank deficient".into()));
    }
    let m = v.transpose() * s * v;
    let m = (&m + m.transpose()) * 0.5;
    let eig = sym_eigen(&m)?;
    let (lo, u) = eig.min().expect("nonempty");
    if lo < -tol::eps() {
        Ok(Verdict::fails(Witness::point(&(v * u))).with_measure(lo))
    } else {
        Ok(Verdict::holds().with_measure(lo))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum AffineMin {
    Value { value: f64, minimizer: Vector },
    MinusInfinity,
}

impl AffineMin {
    pub fn value(&self) -> f64 {
        match self {
            AffineMin::Value { value, .. } => *value,
            AffineMin::MinusInfinity => f64::NEG_INFINITY,
        }
    }
}

/// `inf_t q(r − V t)`.
///
/// With `M = VᵀSV ⪰ 0` and `g = VᵀS r` the infimum is attained at any
/// solution of `M t = g`; when `g ∉ range(M)` the objective is an unbounded
/// linear function along `ker M`.
pub fn min_q_over_affine(space: &SsdSpace, r: &Vector, v: &Matrix) -> Result<AffineMin> {
    space.check(r)?;
    check_dim(space.dim(), v.nrows())?;
    let d = v.ncols();
    if d == 0 {
        return Ok(AffineMin::Value { value: space.q(r), minimizer: Vector::zeros(0) });
    }
    let sv = space.matrix() * v;
    let m = v.transpose() * &sv;
    let m = (&m + m.transpose()) * 0.5;
    let g = sv.transpose() * r;
    let eig = sym_eigen(&m)?;
    let scale = eig.spectral_radius().max(1.0);
    if eig.values[0] < -tol::eps() * scale {
        return Err(QposError::Precondition(format!(
            "restricted form is not positive semidefinite (min eigenvalue {:e})",
            eig.values[0]
        )));
    }
    let cut = RANK_TOL * scale;
    let gscale = 1.0 + g.norm();
    let mut t = Vector::zeros(d);
    for k in 0..d {
        let u = eig.vectors.column(k);
        let coef = u.dot(&g);
        if eig.values[k] > cut {
            t.axpy(coef / eig.values[k], &u.into_owned(), 1.0);
        } else if coef.abs() > RANGE_TOL * gscale {
            return Ok(AffineMin::MinusInfinity);
        }
    }
    let value = space.q(&(r - v * &t));
    Ok(AffineMin::Value { value, minimizer: t })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verdict::Status;

    fn swap() -> Matrix {
        Matrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])
    }

    #[test]
    fn psd_examples() {
        let v = Matrix::from_column_slice(2, 1, &[1.0, 1.0]);
        let r = psd_on_subspace(&swap(), &v).unwrap();
        assert_eq!(r.status, Status::Holds);
        assert!((r.measure.unwrap() - 2.0).abs() < 1e-12);
        let w = Matrix::from_column_slice(2, 1, &[1.0, -1.0]);
        let r = psd_on_subspace(&swap(), &w).unwrap();
        assert_eq!(r.status, Status::Fails);
        assert!((r.measure.unwrap() + 2.0).abs() < 1e-12);
        let dir = r.witness.unwrap().as_point().unwrap();
        assert!(dir.dot(&(swap() * &dir)) < 0.0);
        let id = Matrix::identity(3, 3);
        assert!(psd_on_subspace(&Matrix::from_diagonal_element(3, 3, 2.0), &id).unwrap().holds_p());
    }

    #[test]
    fn psd_rejects_rank_deficient_basis() {
        let v = Matrix::from_row_slice(2, 2, &[1.0, 2.0, 1.0, 2.0]);
        assert!(matches!(psd_on_subspace(&swap(), &v), Err(QposError::InvalidArgument(_))));
    }

    #[test]
    fn affine_min_examples() {
        let sp = SsdSpace::monotone(1).unwrap();
        let v = Matrix::from_column_slice(2, 1, &[1.0, 1.0]);
        match min_q_over_affine(&sp, &Vector::from_column_slice(&[1.0, 1.0]), &v).unwrap() {
            AffineMin::Value { value, minimizer } => {
                assert!(value.abs() < 1e-12);
                assert!((minimizer[0] - 1.0).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
        // g = 0: r = (1,-1) is S-orthogonal to (1,1)
        let r = Vector::from_column_slice(&[1.0, -1.0]);
        assert_eq!(min_q_over_affine(&sp, &r, &v).unwrap().value(), -1.0);
        // horizontal direction: M = 0, g = r₂
        let h = Matrix::from_column_slice(2, 1, &[1.0, 0.0]);
        let r = Vector::from_column_slice(&[0.0, 1.0]);
        assert_eq!(min_q_over_affine(&sp, &r, &h).unwrap(), AffineMin::MinusInfinity);
        let r = Vector::from_column_slice(&[3.0, 0.0]);
        assert_eq!(min_q_over_affine(&sp, &r, &h).unwrap().value(), 0.0);
    }

    #[test]
    fn affine_min_requires_psd() {
        let sp = SsdSpace::monotone(1).unwrap();
        let v = Matrix::from_column_slice(2, 1, &[1.0, -1.0]);
        assert!(matches!(min_q_over_affine(&sp, &Vector::zeros(2), &v), Err(QposError::Precondition(_))));
    }
}
