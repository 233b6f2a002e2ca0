//! SSDB models: an SSD space with a norm `‖b‖² = bᵀGb` for which
//! `b ↦ S b` is an isometry onto the dual, `S G⁻¹ S = G`.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::affine::{affine_is_maximal, AffineSet};
use crate::error::{check_dim, QposError, Result};
use crate::fitzpatrick::{ConvexFunction, MaxAffineFn};
use crate::numerics::grid::BoxGrid;
use crate::numerics::linalg::{min_singular_value, null_space};
use crate::space::{min_q_to_set, PointSet, SsdSpace};
use crate::tol::{self, RANK_TOL};
use crate::verdict::{Verdict, Witness};
use crate::{Matrix, Vector};

/// Largest accepted entry of `S G⁻¹ S − G`.
pub const ISOMETRY_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct SsdbSpace {
    base: Arc<SsdSpace>,
    g: Matrix,
    g_inv: Matrix,
    isometry_residual: f64,
}

impl SsdbSpace {
    pub fn new(base: Arc<SsdSpace>, g: Matrix) -> Result<Self> {
        let n = base.dim();
        if g.nrows() != n || g.ncols() != n {
            return Err(QposError::DimensionMismatch { expected: n, got: g.nrows() });
        }
        if g != g.transpose() {
            return Err(QposError::InvalidArgument("norm matrix is not symmetric".into()));
        }
        let chol = g
            .clone()
            .cholesky()
            .ok_or_else(|| QposError::InvalidArgument("norm matrix is not positive definite".into()))?;
        let g_inv = chol.inverse();
        let s = base.matrix();
        let isometry_residual = (s * &g_inv * s - &g).amax();
        if isometry_residual > ISOMETRY_TOL {
            return Err(QposError::InvalidArgument(format!(
                "b -> S b is not an isometry (residual {isometry_residual:e})"
            )));
        }
        Ok(SsdbSpace { base, g, g_inv, isometry_residual })
    }

    pub fn base(&self) -> &SsdSpace {
        &self.base
    }

    pub fn base_arc(&self) -> &Arc<SsdSpace> {
        &self.base
    }

    pub fn norm_matrix(&self) -> &Matrix {
        &self.g
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn isometry_residual(&self) -> f64 {
        self.isometry_residual
    }

    pub fn norm(&self, b: &Vector) -> f64 {
        b.dot(&(&self.g * b)).max(0.0).sqrt()
    }

    /// Norm of `S b` as a functional, `‖S b‖_{G⁻¹}`.
    pub fn dual_norm_of_image(&self, b: &Vector) -> f64 {
        let sb = self.base.apply(b);
        sb.dot(&(&self.g_inv * &sb)).max(0.0).sqrt()
    }

    /// `g₀ = ½‖·‖²`.
    pub fn g0(&self) -> HalfSquaredNorm {
        HalfSquaredNorm { space: self.base.clone(), g: self.g.clone() }
    }

    /// Orthonormal basis of `P_q(g₀) = ker(G − S)` (sign `Plus`) or
    /// `P_{−q}(g₀) = ker(G + S)` (sign `Minus`).
    pub fn pq_g0_basis(&self, sign: Sign) -> Matrix {
        let s = self.base.matrix();
        match sign {
            Sign::Plus => null_space(&(&self.g - s)),
            Sign::Minus => null_space(&(&self.g + s)),
        }
    }
}

/// `R^k × R^k`, `S = [[0, I], [I, 0]]`, `G = I`.
pub fn make_monotone_ssdb(k: usize) -> Result<SsdbSpace> {
    let base = Arc::new(SsdSpace::monotone(k)?);
    SsdbSpace::new(base, Matrix::identity(2 * k, 2 * k))
}

/// `R^k`, `S = G = I`.
pub fn make_hilbert_ssdb(k: usize) -> Result<SsdbSpace> {
    let base = Arc::new(SsdSpace::hilbert(k)?);
    SsdbSpace::new(base, Matrix::identity(k, k))
}

/// Compares `‖S b‖_{G⁻¹}` with `‖b‖_G` on random `b`; measure is the worst
/// relative gap.
pub fn isometry_check(space: &SsdbSpace, samples: usize, seed: u64) -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0_f64;
    for _ in 0..samples {
        let b = Vector::from_fn(space.dim(), |_, _| rng.gen_range(-10.0..10.0));
        let (l, r) = (space.dual_norm_of_image(&b), space.norm(&b));
        let gap = (l - r).abs() / r.max(1.0);
        if gap > 1e-8 {
            return Verdict::fails(Witness::point(&b)).with_measure(gap);
        }
        worst = worst.max(gap);
    }
    Verdict::holds().with_measure(worst)
}

/// `½ bᵀ M b` for a symmetric positive semidefinite `M`.
#[derive(Debug, Clone)]
pub struct HalfSquaredNorm {
    space: Arc<SsdSpace>,
    g: Matrix,
}

impl HalfSquaredNorm {
    pub fn new(space: Arc<SsdSpace>, g: Matrix) -> Result<Self> {
        let n = space.dim();
        if g.nrows() != n || g.ncols() != n {
            return Err(QposError::DimensionMismatch { expected: n, got: g.nrows() });
        }
        Ok(HalfSquaredNorm { space, g })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.g
    }

    /// Intrinsic conjugate `b ↦ ½ (S b)ᵀ G⁻¹ (S b)`, i.e. the same form with
    /// matrix `S G⁻¹ S`. Requires `G` invertible.
    pub fn conjugate(&self) -> HalfSquaredNorm {
        let s = self.space.matrix();
        let g_inv = self.g.clone().try_inverse().expect("norm matrix must be invertible");
        let m = s * g_inv * s;
        let m = (&m + m.transpose()) * 0.5;
        HalfSquaredNorm { space: self.space.clone(), g: m }
    }

    pub fn eval(&self, b: &Vector) -> f64 {
        0.5 * b.dot(&(&self.g * b))
    }

    /// Max-affine minorant from the tangent planes at the lattice points of
    /// `bx`: piece `(G c, ½ cᵀGc)`.
    pub fn under_approx(&self, bx: &BoxGrid) -> Result<MaxAffineFn> {
        check_dim(self.space.dim(), bx.dim())?;
        let pieces = bx
            .points()
            .map(|c| {
                let s = &self.g * &c;
                let o = 0.5 * c.dot(&s);
                (s, o)
            })
            .collect();
        MaxAffineFn::new(self.space.clone(), pieces)
    }
}

impl ConvexFunction for HalfSquaredNorm {
    fn space(&self) -> &SsdSpace {
        &self.space
    }

    fn value(&self, b: &Vector) -> Result<f64> {
        self.space.check(b)?;
        Ok(self.eval(b))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// `b ∈ P_{±q}(g₀)`: `|g₀(b) ∓ q(b)| ≤ ε`.
pub fn pq_g0_member(space: &SsdbSpace, b: &Vector, sign: Sign) -> Result<Verdict> {
    space.base.check(b)?;
    let gap = space.g0().eval(b) - sign.factor() * space.base.q(b);
    Ok(if gap.abs() <= tol::eps() {
        Verdict::holds().with_measure(gap)
    } else {
        Verdict::fails(Witness::point(b)).with_measure(gap)
    })
}

/// Splits `x = a + c` with `a ∈ A` and `c ∈ P_{−q}(g₀)`.
///
/// `A` must be maximally q-positive; the split is the solution of
/// `x0 + V t + W u = x` with `W` a basis of `ker(G + S)`.
pub fn decompose_sum(space: &SsdbSpace, a: &AffineSet, x: &Vector) -> Result<(Vector, Vector)> {
    space.base.check(x)?;
    check_dim(space.dim(), a.space().dim())?;
    if a.space().matrix() != space.base.matrix() {
        return Err(QposError::InvalidArgument("affine set lives in a different space".into()));
    }
    let max = affine_is_maximal(a)?;
    if !max.holds_p() {
        return Err(QposError::Precondition("affine set is not maximally q-positive".into()));
    }
    let w = space.pq_g0_basis(Sign::Minus);
    let v = a.basis();
    let (n, dv, dw) = (space.dim(), v.ncols(), w.ncols());
    let mut m = Matrix::zeros(n, dv + dw);
    m.view_mut((0, 0), (n, dv)).copy_from(v);
    m.view_mut((0, dv), (n, dw)).copy_from(&w);
    if dv + dw != n || min_singular_value(&m)? <= RANK_TOL {
        return Err(QposError::Internal(format!(
            "decomposition system is singular ({dv} + {dw} columns in dimension {n})"
        )));
    }
    let rhs = x - a.anchor();
    let sol = m.clone().lu().solve(&rhs).ok_or_else(|| QposError::Internal("decomposition solve failed".into()))?;
    let av = a.anchor() + v * sol.rows(0, dv);
    let cv = &w * sol.rows(dv, dw);
    let res = (&av + &cv - x).norm();
    if res > 1e-8 * (1.0 + x.norm()) {
        return Err(QposError::Internal(format!("decomposition residual {res:e}")));
    }
    Ok((av, cv))
}

/// Exercises `A + C = B` with `C = p + P_{−q}(g₀)`.
///
/// For each probe `x ∈ A^π`, looks for `y ∈ A` with `x + p = y + z`, `z ∈ C`,
/// i.e. `x − y ∈ ker(G + S)` up to `resolution`. Then `q(x − y) ≥ 0` and
/// `q(z − p) = −g₀(z − p)` force `z = p` and `x = y ∈ A`. A probe in `A^π`
/// with no such `y` is a point of `A^π ∖ A` and refutes maximality; a split
/// with `z ≠ p` would contradict `x ∈ A^π` and is reported the same way.
/// Probes outside `A^π` are skipped.
pub fn maximality_via_decomposition(
    space: &SsdbSpace,
    a: &PointSet,
    p: &Vector,
    probes: &[Vector],
    resolution: f64,
) -> Result<Verdict> {
    space.base.check(p)?;
    check_dim(space.dim(), a.space().dim())?;
    let w = space.pq_g0_basis(Sign::Minus);
    let mut checked = 0usize;
    for x in probes {
        space.base.check(x)?;
        if min_q_to_set(a, x).0 < -tol::eps() {
            continue;
        }
        checked += 1;
        let (mut best_r, mut best_c) = (f64::INFINITY, f64::INFINITY);
        for y in a.points() {
            let d = x - y;
            let along = &w * (w.transpose() * &d);
            let r = (&d - &along).norm();
            if r < best_r {
                best_r = r;
                best_c = along.norm();
            }
        }
        if best_r > resolution {
            return Ok(Verdict::fails(Witness::point(x))
                .with_resolution(resolution)
                .with_measure(best_r)
                .with_note("x + p has no split in A + C: x is in A^pi but not in A"));
        }
        if best_c > resolution {
            return Ok(Verdict::fails(Witness::point(x))
                .with_resolution(resolution)
                .with_measure(best_c)
                .with_note("split with z != p"));
        }
    }
    if checked == 0 {
        return Ok(Verdict::undecided(resolution).with_note("no probe in A^pi"));
    }
    Ok(Verdict::grid_certified(resolution).with_note(format!("{checked} probes in A^pi forced into A")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::affine::{affine_pi, AffineSet};
    use crate::fitzpatrick::conj_eval;
    use crate::verdict::Status;
    use proptest::prelude::*;
    use rand::Rng;

    fn v(x: &[f64]) -> Vector {
        Vector::from_column_slice(x)
    }

    #[test]
    fn models_are_isometric() {
        for k in 1..=5 {
            let sp = make_monotone_ssdb(k).unwrap();
            assert!(sp.isometry_residual() < 1e-10);
            assert!(isometry_check(&sp, 1000, k as u64).holds_p());
        }
        let h = make_hilbert_ssdb(3).unwrap();
        assert!(h.isometry_residual() < 1e-10);
        let bad = SsdbSpace::new(Arc::new(SsdSpace::monotone(1).unwrap()), Matrix::identity(2, 2) * 2.0);
        assert!(bad.is_err());
    }

    #[test]
    fn monotone_norm_preserved() {
        let sp = make_monotone_ssdb(3).unwrap();
        let b = v(&[1.0, -2.0, 0.5, 3.0, 0.0, -1.0]);
        assert!((sp.base().apply(&b).norm() - b.norm()).abs() < 1e-12);
        assert!((sp.base().q_value(&b).unwrap() - (3.0 + 0.0 - 0.5)).abs() < 1e-12);
    }

    #[test]
    fn g0_sets_monotone() {
        let sp = make_monotone_ssdb(1).unwrap();
        assert!(pq_g0_member(&sp, &v(&[1.0, 1.0]), Sign::Plus).unwrap().holds_p());
        assert!(pq_g0_member(&sp, &v(&[1.0, -1.0]), Sign::Minus).unwrap().holds_p());
        assert!(pq_g0_member(&sp, &v(&[1.0, 0.0]), Sign::Plus).unwrap().fails_p());
        assert!(pq_g0_member(&sp, &v(&[1.0, 0.0]), Sign::Minus).unwrap().fails_p());
    }

    #[test]
    fn g0_sets_hilbert() {
        let sp = make_hilbert_ssdb(2).unwrap();
        let g0 = sp.g0();
        for b in BoxGrid::cube(2, 1.0, 0.5, 1).unwrap().points() {
            assert_eq!(g0.eval(&b), sp.base().q_value(&b).unwrap());
            assert!(pq_g0_member(&sp, &b, Sign::Plus).unwrap().holds_p());
            let minus = pq_g0_member(&sp, &b, Sign::Minus).unwrap().holds_p();
            assert_eq!(minus, b.norm() == 0.0);
        }
        assert_eq!(sp.pq_g0_basis(Sign::Minus).ncols(), 0);
    }

    #[test]
    fn pq_g0_is_maximal_affine() {
        let sp = make_monotone_ssdb(2).unwrap();
        let a = AffineSet::new(sp.base_arc().clone(), Vector::zeros(4), sp.pq_g0_basis(Sign::Plus)).unwrap();
        assert!(affine_is_maximal(&a).unwrap().holds_p());
        let pi = affine_pi(&a).unwrap();
        for t in [v(&[1.0, 2.0, 1.0, 2.0]), v(&[0.5, -1.0, 0.5, -1.0])] {
            assert!(pi.contains(&t).unwrap());
        }
        assert!(!pi.contains(&v(&[1.0, 0.0, 0.0, 0.0])).unwrap());
    }

    #[test]
    fn decomposition_examples() {
        let sp = make_monotone_ssdb(1).unwrap();
        let a = AffineSet::line(sp.base_arc().clone(), v(&[0.0, 0.0]), v(&[1.0, 1.0])).unwrap();
        let (av, cv) = decompose_sum(&sp, &a, &v(&[1.0, -1.0])).unwrap();
        assert!(av.norm() < 1e-12);
        assert!((cv - v(&[1.0, -1.0])).norm() < 1e-12);
        let (_, cv) = decompose_sum(&sp, &a, &v(&[0.3, 0.3])).unwrap();
        assert!(cv.norm() < 1e-12);
        let half = AffineSet::line(sp.base_arc().clone(), v(&[0.0, 0.0]), v(&[1.0, 0.0])).unwrap();
        assert!(matches!(
            decompose_sum(&sp, &AffineSet::singleton(sp.base_arc().clone(), v(&[0.0, 0.0])).unwrap(), &v(&[1.0, 0.0])),
            Err(QposError::Precondition(_))
        ));
        // the horizontal axis is maximal as well
        let (av, cv) = decompose_sum(&sp, &half, &v(&[2.0, 3.0])).unwrap();
        assert!((av - v(&[5.0, 0.0])).norm() < 1e-12);
        assert!((cv - v(&[-3.0, 3.0])).norm() < 1e-12);
    }

    #[test]
    fn decomposition_random_closed_form() {
        let sp = make_monotone_ssdb(1).unwrap();
        let a = AffineSet::line(sp.base_arc().clone(), v(&[0.0, 0.0]), v(&[1.0, 1.0])).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let x = v(&[rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)]);
            let (av, cv) = decompose_sum(&sp, &a, &x).unwrap();
            let m = 0.5 * (x[0] + x[1]);
            assert!((&av - v(&[m, m])).amax() < 1e-10);
            assert!((&av + &cv - &x).amax() < 1e-10);
            assert!(pq_g0_member(&sp, &cv, Sign::Minus).unwrap().holds_p());
        }
    }

    #[test]
    fn decomposition_maximality_examples() {
        let sp = make_monotone_ssdb(1).unwrap();
        let graph: Vec<Vector> = (-10..=10).map(|i| v(&[i as f64 * 0.1, i as f64 * 0.1])).collect();
        let a = PointSet::new(sp.base_arc().clone(), graph.clone()).unwrap();
        let p = v(&[0.0, 0.0]);
        let r = maximality_via_decomposition(&sp, &a, &p, &graph, 1e-9).unwrap();
        assert!(r.is_grid_certified());
        let single = PointSet::from_rows(sp.base_arc().clone(), &[&[0.0, 0.0]]).unwrap();
        let r = maximality_via_decomposition(&sp, &single, &p, &[v(&[1.0, 1.0])], 1e-9).unwrap();
        assert!(r.fails_p());
        assert_eq!(r.witness.unwrap().as_point().unwrap(), v(&[1.0, 1.0]));
        let r = maximality_via_decomposition(&sp, &a, &p, &[], 1e-9).unwrap();
        assert_eq!(r.status, Status::Undecided);
    }

    #[test]
    fn conjugate_of_g0_is_g0() {
        for sp in [make_monotone_ssdb(2).unwrap(), make_hilbert_ssdb(3).unwrap()] {
            let c = sp.g0().conjugate();
            assert!((c.matrix() - sp.norm_matrix()).amax() < 1e-12);
        }
    }

    #[test]
    fn under_approx_conjugates_decrease_to_g0() {
        let sp = make_monotone_ssdb(1).unwrap();
        let g0 = sp.g0();
        let probes = [v(&[0.3, -0.2]), v(&[0.0, 0.5]), v(&[-0.45, 0.1])];
        let mut prev = vec![f64::INFINITY; probes.len()];
        for pitch in [1.0, 0.5, 0.25] {
            let f = g0.under_approx(&BoxGrid::cube(2, 2.0, pitch, 1).unwrap()).unwrap();
            for (i, b) in probes.iter().enumerate() {
                let c = conj_eval(&f, b).unwrap().value;
                assert!(c >= g0.eval(b) - 1e-9);
                assert!(c <= prev[i] + 1e-9);
                prev[i] = c;
            }
        }
        for (i, b) in probes.iter().enumerate() {
            assert!(prev[i] - g0.eval(b) < 0.03);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn split_lands_in_both_sets(k in 1usize..4, seed in any::<u64>()) {
            let sp = make_monotone_ssdb(k).unwrap();
            let a = AffineSet::new(sp.base_arc().clone(), Vector::zeros(2 * k), sp.pq_g0_basis(Sign::Plus)).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = Vector::from_fn(2 * k, |_, _| rng.gen_range(-5.0..5.0));
            let (av, cv) = decompose_sum(&sp, &a, &x).unwrap();
            prop_assert!((&av + &cv - &x).amax() < 1e-10);
            prop_assert!(pq_g0_member(&sp, &av, Sign::Plus).unwrap().holds_p());
            prop_assert!(pq_g0_member(&sp, &cv, Sign::Minus).unwrap().holds_p());
        }
    }
}
