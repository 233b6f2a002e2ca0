//! Affine q-positive sets `x0 + range(V)`: exact polars, maximality, and a
//! falsifier for the claim that a convex maximal set must be affine.

use std::sync::Arc;

use crate::error::{check_dim, QposError, Result};
use crate::numerics::linalg::{has_full_column_rank, null_space, orth_basis, sym_eigen};
use crate::numerics::quad::{min_q_over_affine, psd_on_subspace, AffineMin};
use crate::space::{PointSet, SsdSpace};
use crate::tol::{self, RANGE_TOL, RANK_TOL};
use crate::verdict::{Verdict, Witness};
use crate::{Matrix, Vector};

#[derive(Debug, Clone)]
pub struct AffineSet {
    space: Arc<SsdSpace>,
    x0: Vector,
    v: Matrix,
}

impl AffineSet {
    pub fn new(space: Arc<SsdSpace>, x0: Vector, v: Matrix) -> Result<Self> {
        space.check(&x0)?;
        check_dim(space.dim(), v.nrows())?;
        if !has_full_column_rank(&v) {
            return Err(QposError::InvalidArgument("direction basis is rank deficient".into()));
        }
        Ok(AffineSet { space, x0, v })
    }

    pub fn singleton(space: Arc<SsdSpace>, x0: Vector) -> Result<Self> {
        let n = space.dim();
        AffineSet::new(space, x0, Matrix::zeros(n, 0))
    }

    /// The line `x0 + t·dir`.
    pub fn line(space: Arc<SsdSpace>, x0: Vector, dir: Vector) -> Result<Self> {
        let n = dir.len();
        AffineSet::new(space, x0, Matrix::from_column_slice(n, 1, dir.as_slice()))
    }

    pub fn space(&self) -> &SsdSpace {
        &self.space
    }

    pub fn space_arc(&self) -> &Arc<SsdSpace> {
        &self.space
    }

    pub fn anchor(&self) -> &Vector {
        &self.x0
    }

    pub fn basis(&self) -> &Matrix {
        &self.v
    }

    pub fn dim(&self) -> usize {
        self.v.ncols()
    }

    pub fn point(&self, t: &Vector) -> Vector {
        &self.x0 + &self.v * t
    }

    /// Distance from `b` to the set.
    pub fn distance(&self, b: &Vector) -> f64 {
        let r = b - &self.x0;
        let q = orth_basis(&self.v, RANK_TOL);
        (&r - &q * (q.transpose() * &r)).norm()
    }

    pub fn contains(&self, b: &Vector) -> bool {
        self.distance(b) <= RANGE_TOL * (1.0 + (b - &self.x0).norm())
    }

    /// Lattice sample `x0 + V t`, `t ∈ [−half, half]^d` at the given pitch.
    pub fn sample(&self, half: f64, pitch: f64) -> Result<PointSet> {
        let d = self.dim();
        if d == 0 {
            return PointSet::new(self.space.clone(), vec![self.x0.clone()]);
        }
        let per = (2.0 * half / pitch).round() as usize + 1;
        let total = per
            .checked_pow(d as u32)
            .filter(|&c| c <= 1_000_000)
            .ok_or_else(|| QposError::InvalidArgument("affine sample too large".into()))?;
        let mut pts = Vec::with_capacity(total);
        for mut idx in 0..total {
            let mut t = Vector::zeros(d);
            for i in 0..d {
                t[i] = -half + (idx % per) as f64 * pitch;
                idx /= per;
            }
            pts.push(self.point(&t));
        }
        PointSet::new(self.space.clone(), pts)
    }
}

pub fn affine_is_q_positive(a: &AffineSet) -> Result<Verdict> {
    psd_on_subspace(a.space.matrix(), &a.v)
}

/// Exact description of `A^π` for an affine q-positive `A`:
/// `b ∈ A^π ⇔ R b = s` and `q(b − x0) − ½ gᵀM⁺g ≥ 0` with `g = VᵀS(b − x0)`.
#[derive(Debug, Clone)]
pub struct PiDescription {
    space: Arc<SsdSpace>,
    x0: Vector,
    v: Matrix,
    /// Always true for a q-positive `A`, which lies in its own polar.
    pub feasible: bool,
    pub constraints: Matrix,
    pub rhs: Vector,
}

impl PiDescription {
    pub fn constraint_violation(&self, b: &Vector) -> f64 {
        if self.constraints.nrows() == 0 {
            return 0.0;
        }
        (&self.constraints * b - &self.rhs).amax()
    }

    /// `inf_t q(b − x0 − V t)`; `−∞` off the linear constraints.
    pub fn residual(&self, b: &Vector) -> Result<f64> {
        Ok(min_q_over_affine(&self.space, &(b - &self.x0), &self.v)?.value())
    }

    pub fn member(&self, b: &Vector) -> Result<Verdict> {
        self.space.check(b)?;
        let scale = 1.0 + b.norm();
        if self.constraint_violation(b) > RANGE_TOL * scale {
            return Ok(Verdict::fails(Witness::point(b))
                .with_measure(f64::NEG_INFINITY)
                .with_note("violates the linear constraints"));
        }
        let r = self.residual(b)?;
        Ok(if r >= -tol::eps() {
            Verdict::holds().with_measure(r)
        } else {
            Verdict::fails(Witness::point(b)).with_measure(r)
        })
    }

    pub fn contains(&self, b: &Vector) -> Result<bool> {
        Ok(self.member(b)?.holds_p())
    }
}

pub fn affine_pi(a: &AffineSet) -> Result<PiDescription> {
    require_q_positive(a)?;
    let s = a.space.matrix();
    let n = a.space.dim();
    let constraints = if a.dim() == 0 {
        Matrix::zeros(0, n)
    } else {
        let m = a.v.transpose() * s * &a.v;
        let ker = kernel_sym(&m)?;
        ker.transpose() * a.v.transpose() * s
    };
    let rhs = &constraints * &a.x0;
    Ok(PiDescription { space: a.space.clone(), x0: a.x0.clone(), v: a.v.clone(), feasible: true, constraints, rhs })
}

fn require_q_positive(a: &AffineSet) -> Result<()> {
    if affine_is_q_positive(a)?.holds_p() {
        Ok(())
    } else {
        Err(QposError::Precondition("affine set is not q-positive".into()))
    }
}

/// Orthonormal basis of the numerical kernel of a symmetric matrix.
fn kernel_sym(m: &Matrix) -> Result<Matrix> {
    if m.nrows() == 0 {
        return Ok(Matrix::zeros(0, 0));
    }
    let eig = sym_eigen(m)?;
    let cut = RANK_TOL * eig.spectral_radius().max(1.0);
    Ok(eig.select(|x| x.abs() <= cut))
}

/// Shape of `A^π` as computed from the restricted form on the constraint
/// subspace.
#[derive(Debug, Clone)]
pub enum PiShape {
    Affine {
        anchor: Vector,
        basis: Matrix,
    },
    /// Not affine, hence not q-positive: `pair` lies in `A^π` and
    /// `q(pair.0 − pair.1) < 0`; `outside` is a point of `A^π ∖ A`.
    NotAffine {
        pair: (Vector, Vector),
        outside: Vector,
    },
}

impl PiShape {
    pub fn is_affine(&self) -> bool {
        matches!(self, PiShape::Affine { .. })
    }
}

/// Exact structure of `A^π`.
///
/// On `L = {y : R y = 0}` with basis `W`, `A^π − x0 = {W z : zᵀ Q z ≥ 0}` where
/// `Q = Wᵀ(S − S V M⁺ Vᵀ S)W`. It is the whole of `L` when `Q ⪰ 0`,
/// `W·ker Q` when `Q ⪯ 0`, and a non-convex double cone otherwise.
pub fn pi_shape(a: &AffineSet) -> Result<PiShape> {
    let pi = affine_pi(a)?;
    let s = a.space.matrix();
    let n = a.space.dim();
    let w = if pi.constraints.nrows() == 0 { Matrix::identity(n, n) } else { null_space(&pi.constraints) };
    if w.ncols() == 0 {
        return Ok(PiShape::Affine { anchor: a.x0.clone(), basis: w });
    }
    let proj = if a.dim() == 0 {
        Matrix::zeros(n, n)
    } else {
        let m = a.v.transpose() * s * &a.v;
        let sv = s * &a.v;
        &sv * pseudo_inverse(&m)? * sv.transpose()
    };
    let q = w.transpose() * (s - proj) * &w;
    let q = (&q + q.transpose()) * 0.5;
    let eig = sym_eigen(&q)?;
    let tolq = tol::eps().max(RANK_TOL * eig.spectral_radius());
    let (lo, zm) = eig.min().expect("nonempty");
    let (hi, zp) = eig.max().expect("nonempty");
    if lo >= -tolq {
        return Ok(PiShape::Affine { anchor: a.x0.clone(), basis: w });
    }
    if hi <= tolq {
        let k = eig.select(|x| x.abs() <= tolq);
        let basis = if k.ncols() == 0 { Matrix::zeros(n, 0) } else { orth_basis(&(&w * k), RANK_TOL) };
        return Ok(PiShape::Affine { anchor: a.x0.clone(), basis });
    }
    // y₊ = W z₊ has positive residual; d₋ is W z₋ with its V-component
    // removed so that q(d₋) = ½ λ₋ exactly.
    let yp = &w * zp;
    let ym = &w * zm;
    let dm = match min_q_over_affine(&a.space, &ym, &a.v)? {
        AffineMin::Value { minimizer, .. } => &ym - &a.v * minimizer,
        AffineMin::MinusInfinity => return Err(QposError::Internal("constraint subspace left the domain".into())),
    };
    let scale = (2.0 * lo.abs() / hi).sqrt();
    let p1 = &a.x0 + &yp * scale + &dm;
    let p2 = &a.x0 + &yp * scale - &dm;
    let outside = &a.x0 + &yp / yp.amax();
    Ok(PiShape::NotAffine { pair: (p1, p2), outside })
}

fn pseudo_inverse(m: &Matrix) -> Result<Matrix> {
    let eig = sym_eigen(m)?;
    let cut = RANK_TOL * eig.spectral_radius().max(1.0);
    let n = m.nrows();
    let mut out = Matrix::zeros(n, n);
    for k in 0..n {
        let lam = eig.values[k];
        if lam.abs() > cut {
            let u = eig.vectors.column(k);
            out += (u * u.transpose()) / lam;
        }
    }
    Ok(out)
}

/// `dom Φ_A = {x : R x = s}` for affine `A`, as an anchor and a basis.
pub fn phi_domain(a: &AffineSet) -> Result<(Vector, Matrix)> {
    let pi = affine_pi(a)?;
    let n = a.space.dim();
    let basis = if pi.constraints.nrows() == 0 { Matrix::identity(n, n) } else { null_space(&pi.constraints) };
    Ok((a.x0.clone(), basis))
}

/// `A` is maximally q-positive iff `A^π = A`.
pub fn affine_is_maximal(a: &AffineSet) -> Result<Verdict> {
    match pi_shape(a)? {
        PiShape::NotAffine { outside, .. } => {
            Ok(Verdict::fails(Witness::point(&outside)).with_note("polar is not affine"))
        }
        PiShape::Affine { basis, .. } => {
            if basis.ncols() == a.dim() {
                return Ok(Verdict::holds());
            }
            // A direction of the polar not in range(V).
            let qv = orth_basis(&a.v, RANK_TOL);
            let mut best: Option<Vector> = None;
            for c in basis.column_iter() {
                let c = c.into_owned();
                let r = &c - &qv * (qv.transpose() * &c);
                if best.as_ref().is_none_or(|b| r.norm() > b.norm()) {
                    best = Some(r);
                }
            }
            let r = best.ok_or_else(|| QposError::Internal("empty polar basis".into()))?;
            let w = &a.x0 + &r / r.amax();
            Ok(Verdict::fails(Witness::point(&w)).with_measure(basis.ncols() as f64).with_note(format!(
                "polar has dimension {} > {}",
                basis.ncols(),
                a.dim()
            )))
        }
    }
}

/// Tests the cone and symmetry consequences of "maximally q-positive and
/// convex" on a claimed set given by its membership oracle.
///
/// For each member probe `x`, the points `x0 + λ(x − x0)` and `x0 − (x − x0)`
/// must be members and must be q-positively related to every member probe.
/// A `Holds` only means no contradiction was found on the probes.
pub fn maximal_convex_affinity_falsifier<F>(
    space: &SsdSpace,
    member: F,
    x0: &Vector,
    probes: &[Vector],
    lambdas: &[f64],
) -> Result<Verdict>
where
    F: Fn(&Vector) -> bool,
{
    space.check(x0)?;
    if !member(x0) {
        return Err(QposError::Precondition("anchor is not a member".into()));
    }
    let members: Vec<&Vector> = probes.iter().filter(|p| member(p)).collect();
    let related =
        |c: &Vector| -> Option<&Vector> { members.iter().copied().find(|m| space.q_diff(c, m) < -tol::eps()) };
    for x in &members {
        let dir = *x - x0;
        let mut cands: Vec<(Vector, &str)> = lambdas.iter().map(|l| (x0 + &dir * *l, "cone")).collect();
        cands.push((x0 - &dir, "symmetric"));
        for (c, cond) in cands {
            let inside = member(&c);
            match (inside, related(&c)) {
                (true, None) => {}
                (true, Some(m)) => {
                    return Ok(Verdict::fails(Witness::pair(&c, m))
                        .with_note(format!("{cond} condition: member not q-positively related")));
                }
                (false, None) => {
                    return Ok(Verdict::fails(Witness::point(&c)).with_note(format!(
                        "{cond} condition: non-member related to every member, set is not maximal"
                    )));
                }
                (false, Some(m)) => {
                    return Ok(Verdict::fails(Witness::pair(&c, m))
                        .with_note(format!("{cond} condition: point required by maximality is missing")));
                }
            }
        }
    }
    Ok(Verdict::holds().with_note("no contradiction on probes; contrapositive check only"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::pi_member;
    use crate::verdict::Status;
    use proptest::prelude::*;

    fn v(x: &[f64]) -> Vector {
        Vector::from_column_slice(x)
    }

    fn mono() -> Arc<SsdSpace> {
        Arc::new(SsdSpace::monotone(1).unwrap())
    }

    fn diag() -> AffineSet {
        AffineSet::line(mono(), v(&[0.0, 0.0]), v(&[1.0, 1.0])).unwrap()
    }

    fn horizontal() -> AffineSet {
        AffineSet::line(mono(), v(&[0.0, 0.0]), v(&[1.0, 0.0])).unwrap()
    }

    #[test]
    fn q_positivity_examples() {
        assert!(affine_is_q_positive(&diag()).unwrap().holds_p());
        let anti = AffineSet::line(mono(), v(&[0.0, 0.0]), v(&[1.0, -1.0])).unwrap();
        assert!(affine_is_q_positive(&anti).unwrap().fails_p());
        let p = AffineSet::singleton(mono(), v(&[3.0, 1.0])).unwrap();
        assert!(affine_is_q_positive(&p).unwrap().holds_p());
    }

    #[test]
    fn pi_examples() {
        let pi = affine_pi(&diag()).unwrap();
        let r = pi.residual(&v(&[1.0, 2.0])).unwrap();
        assert!((r + 0.25).abs() < 1e-12);
        assert!(!pi.contains(&v(&[1.0, 2.0])).unwrap());
        assert!(pi.contains(&v(&[1.0, 1.0])).unwrap());
        let o = affine_pi(&AffineSet::singleton(mono(), v(&[0.0, 0.0])).unwrap()).unwrap();
        assert!(o.contains(&v(&[1.0, 1.0])).unwrap());
        assert!(!o.contains(&v(&[1.0, -1.0])).unwrap());
        let anti = AffineSet::line(mono(), v(&[0.0, 0.0]), v(&[1.0, -1.0])).unwrap();
        assert!(matches!(affine_pi(&anti), Err(QposError::Precondition(_))));
    }

    #[test]
    fn maximality_examples() {
        assert_eq!(affine_is_maximal(&diag()).unwrap().status, Status::Holds);
        let r = affine_is_maximal(&AffineSet::singleton(mono(), v(&[0.0, 0.0])).unwrap()).unwrap();
        assert_eq!(r.status, Status::Fails);
        assert_eq!(r.witness.unwrap().as_point().unwrap(), v(&[1.0, 1.0]));
        assert!(affine_is_maximal(&horizontal()).unwrap().holds_p());
    }

    #[test]
    fn horizontal_line_polar_and_domain() {
        let h = horizontal();
        let pi = affine_pi(&h).unwrap();
        assert!(pi.contains(&v(&[5.0, 0.0])).unwrap());
        assert!(!pi.contains(&v(&[0.0, 1e-3])).unwrap());
        let (anchor, basis) = phi_domain(&h).unwrap();
        assert_eq!(basis.ncols(), 1);
        assert!(h.contains(&(anchor + basis.column(0))));
    }

    #[test]
    fn not_affine_polar_pair_violates() {
        let o = AffineSet::singleton(mono(), v(&[0.0, 0.0])).unwrap();
        match pi_shape(&o).unwrap() {
            PiShape::NotAffine { pair: (p1, p2), .. } => {
                let pi = affine_pi(&o).unwrap();
                assert!(pi.contains(&p1).unwrap() && pi.contains(&p2).unwrap());
                assert!(o.space().q(&(&p1 - &p2)) < -1e-9);
            }
            s => panic!("{s:?}"),
        }
        // in the Hilbert model every polar is the whole space
        let h = Arc::new(SsdSpace::hilbert(2).unwrap());
        let p = AffineSet::singleton(h, v(&[0.0, 0.0])).unwrap();
        assert!(pi_shape(&p).unwrap().is_affine());
    }

    #[test]
    fn falsifier_examples() {
        let sp = mono();
        let probes: Vec<Vector> = (-8..=8).map(|i| v(&[i as f64 * 0.25, i as f64 * 0.25])).collect();
        let on_diag = |b: &Vector| (b[0] - b[1]).abs() < 1e-12;
        let r = maximal_convex_affinity_falsifier(&sp, on_diag, &v(&[0.0, 0.0]), &probes, &[3.0]).unwrap();
        assert!(r.holds_p());
        let ray = |b: &Vector| (b[0] - b[1]).abs() < 1e-12 && b[0] >= -1e-12;
        let r = maximal_convex_affinity_falsifier(&sp, ray, &v(&[0.0, 0.0]), &probes, &[3.0]).unwrap();
        assert!(r.fails_p());
        assert!(r.note.unwrap().contains("symmetric"));
        let ball = |b: &Vector| b.norm() <= 1.0;
        let grid: Vec<Vector> =
            (-4..=4).flat_map(|i| (-4..=4).map(move |j| v(&[i as f64 * 0.25, j as f64 * 0.25]))).collect();
        let r = maximal_convex_affinity_falsifier(&sp, ball, &v(&[0.0, 0.0]), &grid, &[3.0]).unwrap();
        assert!(r.fails_p());
    }

    proptest! {
        #[test]
        fn pi_description_matches_sampling(
            a in -2.0..2.0f64, c in -2.0..2.0f64, bx in -3.0..3.0f64, by in -3.0..3.0f64,
        ) {
            // monotone lines through the origin with slope ≥ 0 are q-positive
            let set = AffineSet::line(mono(), v(&[a, c]), v(&[1.0, 0.5])).unwrap();
            let pi = affine_pi(&set).unwrap();
            let b = v(&[bx, by]);
            let sample = set.sample(40.0, 0.01).unwrap();
            let exact = pi.residual(&b).unwrap();
            let sampled = pi_member(&sample, &b).unwrap().measure.unwrap();
            prop_assert!(sampled >= exact - 1e-9);
            prop_assert!(sampled - exact < 1e-3);
        }
    }
}
