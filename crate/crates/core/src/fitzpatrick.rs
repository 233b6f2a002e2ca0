//! Fitzpatrick functions `Φ_A`, intrinsic conjugates, and the membership
//! tests built from them (`P_q`, `∂_q`, `G_f`, the q-representable hull).

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{QposError, Result};
use crate::numerics::lp::{lp_min, LpOutcome, SimplexLp};
use crate::space::{PointSet, SsdSpace};
use crate::tol;
use crate::verdict::{Verdict, Witness};
use crate::{Matrix, Vector};

/// A convex function on an SSD space, possibly taking `+∞`.
pub trait ConvexFunction: Sync {
    fn space(&self) -> &SsdSpace;
    fn value(&self, b: &Vector) -> Result<f64>;
}

/// `f(x) = maxᵢ (sᵢᵀ x − oᵢ)`.
#[derive(Debug, Clone)]
pub struct MaxAffineFn {
    space: Arc<SsdSpace>,
    slopes: Vec<Vector>,
    offsets: Vec<f64>,
}

impl MaxAffineFn {
    pub fn new(space: Arc<SsdSpace>, pieces: Vec<(Vector, f64)>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(QposError::InvalidArgument("max-affine function needs a piece".into()));
        }
        let mut slopes = Vec::with_capacity(pieces.len());
        let mut offsets = Vec::with_capacity(pieces.len());
        for (s, o) in pieces {
            space.check(&s)?;
            if !o.is_finite() || s.iter().any(|v| !v.is_finite()) {
                return Err(QposError::InvalidArgument("non-finite piece".into()));
            }
            slopes.push(s);
            offsets.push(o);
        }
        Ok(MaxAffineFn { space, slopes, offsets })
    }

    pub fn space_arc(&self) -> &Arc<SsdSpace> {
        &self.space
    }

    pub fn len(&self) -> usize {
        self.slopes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slopes.is_empty()
    }

    pub fn pieces(&self) -> impl Iterator<Item = (&Vector, f64)> {
        self.slopes.iter().zip(self.offsets.iter().copied())
    }

    pub fn slopes(&self) -> &[Vector] {
        &self.slopes
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    pub fn eval(&self, x: &Vector) -> Result<f64> {
        self.space.check(x)?;
        Ok(self.eval_unchecked(x))
    }

    pub(crate) fn eval_unchecked(&self, x: &Vector) -> f64 {
        self.pieces().map(|(s, o)| s.dot(x) - o).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Index of the active piece at `x` (first one on ties).
    pub fn active_piece(&self, x: &Vector) -> usize {
        let mut best = (f64::NEG_INFINITY, 0);
        for (i, (s, o)) in self.pieces().enumerate() {
            let v = s.dot(x) - o;
            if v > best.0 {
                best = (v, i);
            }
        }
        best.1
    }

    /// The conjugate LP at `b`: `min Σλᵢoᵢ` s.t. `Σλᵢsᵢ = S b`, `λ ∈ Δ`.
    pub fn conj_lp(&self, b: &Vector) -> SimplexLp {
        let n = self.space.dim();
        let m = self.len();
        SimplexLp {
            costs: Vector::from_column_slice(&self.offsets),
            moments: Matrix::from_fn(n, m, |r, c| self.slopes[c][r]),
            target: self.space.apply(b),
        }
    }

    pub fn conj(&self, b: &Vector) -> Result<f64> {
        Ok(conj_eval(self, b)?.value)
    }
}

impl ConvexFunction for MaxAffineFn {
    fn space(&self) -> &SsdSpace {
        &self.space
    }

    fn value(&self, b: &Vector) -> Result<f64> {
        self.eval(b)
    }
}

/// `f^@` of a max-affine `f`, evaluated by LP.
#[derive(Debug, Clone, Copy)]
pub struct Conjugate<'a>(pub &'a MaxAffineFn);

impl ConvexFunction for Conjugate<'_> {
    fn space(&self) -> &SsdSpace {
        &self.0.space
    }

    fn value(&self, b: &Vector) -> Result<f64> {
        self.0.conj(b)
    }
}

/// `q` itself, viewed as a function.
#[derive(Debug, Clone)]
pub struct QuadraticForm(pub Arc<SsdSpace>);

impl ConvexFunction for QuadraticForm {
    fn space(&self) -> &SsdSpace {
        &self.0
    }

    fn value(&self, b: &Vector) -> Result<f64> {
        self.0.q_value(b)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConjugateQuery {
    pub b: Vector,
    /// `+∞` outside the domain.
    pub value: f64,
    pub weights: Option<Vector>,
}

impl ConjugateQuery {
    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
    }
}

/// `Φ_A` as a max-affine function: piece `i` is `(S aᵢ, q(aᵢ))`.
pub fn phi_build(a: &PointSet) -> MaxAffineFn {
    let sp = a.space();
    let slopes = a.points().iter().map(|p| sp.apply(p)).collect();
    let offsets = a.points().iter().map(|p| sp.q(p)).collect();
    MaxAffineFn { space: a.space_arc().clone(), slopes, offsets }
}

pub fn conj_eval(f: &MaxAffineFn, b: &Vector) -> Result<ConjugateQuery> {
    f.space.check(b)?;
    Ok(match lp_min(&f.conj_lp(b))? {
        LpOutcome::Infeasible => ConjugateQuery { b: b.clone(), value: f64::INFINITY, weights: None },
        LpOutcome::Optimal { value, weights } => ConjugateQuery { b: b.clone(), value, weights: Some(weights) },
    })
}

/// `b ∈ P_q(f)`, i.e. `|f(b) − q(b)| ≤ ε`. Meaningful when `f ≥ q`, which is
/// assumed, not checked.
pub fn pq_member(f: &dyn ConvexFunction, b: &Vector) -> Result<Verdict> {
    let sp = f.space();
    let qb = sp.q_value(b)?;
    let fb = f.value(b)?;
    let gap = fb - qb;
    let v = if gap.abs() <= tol::eps() { Verdict::holds() } else { Verdict::fails(Witness::point(b)) };
    Ok(v.with_measure(gap).with_note("assumes f >= q"))
}

/// Membership in `P_q(Φ_A^@)`, the smallest q-representable superset of `A`.
pub fn repr_hull_member(a: &PointSet, b: &Vector) -> Result<Verdict> {
    let f = phi_build(a);
    let c = conj_eval(&f, b)?;
    let gap = c.value - a.space().q(b);
    Ok(if c.is_finite() && gap.abs() <= tol::eps() {
        Verdict::holds().with_measure(gap)
    } else {
        Verdict::fails(Witness::point(b)).with_measure(gap)
    })
}

/// Fenchel–Young gap `f(a) + f^@(b) − ⌊a,b⌋`; holds iff `b ∈ ∂_q f(a)`.
pub fn q_subdiff_check(f: &MaxAffineFn, a: &Vector, b: &Vector) -> Result<Verdict> {
    let fa = f.eval(a)?;
    let fb = conj_eval(f, b)?.value;
    let gap = fa + fb - f.space.pair(a, b);
    Ok(if gap <= tol::eps() {
        Verdict::holds().with_measure(gap)
    } else {
        Verdict::fails(Witness::pair(a, b)).with_measure(gap)
    })
}

/// `b ∈ G_{Φ_A}`: `½(Φ_A(b) + Φ_A^@(b)) = q(b)`.
pub fn g_phi_member(a: &PointSet, b: &Vector) -> Result<Verdict> {
    let f = phi_build(a);
    g_member(&f, b)
}

pub(crate) fn g_member(f: &MaxAffineFn, b: &Vector) -> Result<Verdict> {
    let fb = f.eval(b)?;
    let cb = conj_eval(f, b)?.value;
    let gap = 0.5 * (fb + cb) - f.space.q(b);
    Ok(if gap.abs() <= tol::eps() {
        Verdict::holds().with_measure(gap)
    } else {
        Verdict::fails(Witness::point(b)).with_measure(gap)
    })
}

/// Points of `conv A`: the vertices, every edge at `steps` subdivisions, and
/// either the full barycentric lattice (when it has at most `budget` points)
/// or `budget` seeded random convex combinations.
pub fn hull_samples(a: &PointSet, steps: usize, budget: usize, seed: u64) -> Vec<Vector> {
    let pts = a.points();
    let m = pts.len();
    let steps = steps.max(1);
    let mut out: Vec<Vector> = pts.to_vec();
    for i in 0..m {
        for j in (i + 1)..m {
            for k in 1..steps {
                let t = k as f64 / steps as f64;
                out.push(&pts[i] * (1.0 - t) + &pts[j] * t);
            }
        }
    }
    if m > 2 {
        if lattice_size(m, steps).is_some_and(|c| c <= budget as u128) {
            let mut comp = vec![0usize; m];
            barycentric(&mut comp, 0, steps, &mut |c: &[usize]| {
                if c.iter().filter(|&&x| x > 0).count() > 2 {
                    let mut x = Vector::zeros(pts[0].len());
                    for (w, p) in c.iter().zip(pts) {
                        x.axpy(*w as f64 / steps as f64, p, 1.0);
                    }
                    out.push(x);
                }
            });
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..budget {
                let w: Vec<f64> = (0..m).map(|_| -rng.gen::<f64>().max(1e-300).ln()).collect();
                let total: f64 = w.iter().sum();
                let mut x = Vector::zeros(pts[0].len());
                for (wi, p) in w.iter().zip(pts) {
                    x.axpy(wi / total, p, 1.0);
                }
                out.push(x);
            }
        }
    }
    out
}

fn lattice_size(m: usize, steps: usize) -> Option<u128> {
    // C(steps + m − 1, m − 1)
    let (n, k) = ((steps + m - 1) as u128, (m - 1) as u128);
    let mut c: u128 = 1;
    for i in 0..k {
        c = c.checked_mul(n - i)? / (i + 1);
    }
    Some(c)
}

fn barycentric(comp: &mut [usize], pos: usize, left: usize, emit: &mut impl FnMut(&[usize])) {
    if pos + 1 == comp.len() {
        comp[pos] = left;
        emit(comp);
        return;
    }
    for k in 0..=left {
        comp[pos] = k;
        barycentric(comp, pos + 1, left - k, emit);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HullIneqReport {
    /// `Φ_A ≥ q` on sampled `conv A`; grid-certified at `1/steps`.
    pub ineq: Verdict,
    /// When `ineq` holds: `g_phi_member ⇔ repr_hull_member` on the probes.
    pub agreement: Option<Verdict>,
}

/// Checks the hypothesis `Φ_A ≥ q on conv^w A` by sampling `conv A`, and
/// when it is certified, that `G_{Φ_A} = P_q(Φ_A^@)` on `probes`.
pub fn check_ineq_on_hull(a: &PointSet, steps: usize, probes: &[Vector]) -> Result<HullIneqReport> {
    let f = phi_build(a);
    let sp = a.space();
    let mut worst = (f64::NEG_INFINITY, Vector::zeros(sp.dim()));
    for x in hull_samples(a, steps, 20_000, 0x5eed) {
        let v = sp.q(&x) - f.eval_unchecked(&x);
        if v > worst.0 {
            worst = (v, x);
        }
    }
    let res = 1.0 / steps.max(1) as f64;
    if worst.0 > tol::eps() {
        return Ok(HullIneqReport {
            ineq: Verdict::fails(Witness::point(&worst.1)).with_measure(worst.0),
            agreement: None,
        });
    }
    let ineq = Verdict::grid_certified(res).with_measure(worst.0);
    for b in probes {
        let g = g_member(&f, b)?;
        let r = repr_hull_member(a, b)?;
        if g.status != r.status {
            return Ok(HullIneqReport {
                ineq,
                agreement: Some(
                    Verdict::fails(Witness::point(b)).with_note(format!("G says {}, P_q says {}", g.status, r.status)),
                ),
            });
        }
    }
    Ok(HullIneqReport { ineq, agreement: Some(Verdict::grid_certified(res)) })
}
