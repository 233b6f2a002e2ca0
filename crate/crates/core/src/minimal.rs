//! Convex functions bounded below by `q`: the fundamental inequality, the
//! spike envelope `h`, self-conjugacy of Fitzpatrick functions of maximal
//! sets, and `conv min{f, f^@} ≥ q`.

use crate::error::{QposError, Result};
use crate::exec::Exec;
use crate::fitzpatrick::{conj_eval, phi_build, Conjugate, ConvexFunction, MaxAffineFn};
use crate::numerics::grid::BoxGrid;
use crate::space::PointSet;
use crate::tol;
use crate::verdict::{Verdict, Witness};
use crate::Vector;

/// `α max{f(x), q(x)} + β max{f^@(y), q(y)} ≥ q(αx + βy)`, `β = 1 − α`.
pub fn fund_ineq_check(f: &MaxAffineFn, x: &Vector, y: &Vector, alpha: f64) -> Result<Verdict> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(QposError::InvalidArgument(format!("alpha = {alpha} is outside [0, 1]")));
    }
    let sp = f.space();
    sp.check(x)?;
    sp.check(y)?;
    let beta = 1.0 - alpha;
    let fy = conj_eval(f, y)?.value;
    if beta > 0.0 && fy == f64::INFINITY {
        return Ok(Verdict::holds().with_measure(f64::INFINITY).with_note("f^@(y) is infinite"));
    }
    let left = alpha * f.eval_unchecked(x).max(sp.q(x));
    let right = if beta > 0.0 { beta * fy.max(sp.q(y)) } else { 0.0 };
    let slack = left + right - sp.q(&(x * alpha + y * beta));
    Ok(if slack >= -tol::eps() {
        Verdict::holds().with_measure(slack)
    } else {
        Verdict::fails(Witness::pair(x, y)).with_measure(slack)
    })
}

/// `h = conv min{f, δ_{x} + cap}` with `cap = max{f^@(x), q(x)}`.
#[derive(Debug, Clone)]
pub struct EnvelopeQuery {
    pub f: MaxAffineFn,
    pub x: Vector,
    pub cap: f64,
}

impl EnvelopeQuery {
    pub fn new(f: MaxAffineFn, x: Vector) -> Result<Self> {
        let c = conj_eval(&f, &x)?.value;
        let cap = c.max(f.space().q(&x));
        Ok(EnvelopeQuery { f, x, cap })
    }
}

/// `h(y) = inf_{β ∈ [0,1]} φ(β)` with
/// `φ(β) = β·cap + maxᵢ [sᵢᵀ(y − βx) − (1 − β)oᵢ]`.
///
/// `φ` is a maximum of affine functions of `β`, so its minimum over `[0, 1]`
/// is attained at an endpoint or at a crossing of two pieces; all candidates
/// are enumerated.
pub fn envelope_eval(e: &EnvelopeQuery, y: &Vector) -> Result<f64> {
    let f = &e.f;
    f.space().check(y)?;
    if e.cap == f64::INFINITY {
        return Ok(f.eval_unchecked(y));
    }
    // piece i: aᵢ + β bᵢ
    let lines: Vec<(f64, f64)> = f.pieces().map(|(s, o)| (s.dot(y) - o, o - s.dot(&e.x) + e.cap)).collect();
    let phi = |beta: f64| lines.iter().map(|(a, b)| a + beta * b).fold(f64::NEG_INFINITY, f64::max);
    let mut best = phi(0.0).min(phi(1.0));
    for i in 0..lines.len() {
        for j in 0..i {
            let db = lines[i].1 - lines[j].1;
            if db.abs() > 1e-300 {
                let beta = (lines[j].0 - lines[i].0) / db;
                if beta > 0.0 && beta < 1.0 {
                    best = best.min(phi(beta));
                }
            }
        }
    }
    Ok(best)
}

/// Checks `Φ_M^@ ≥ Φ_M − 1e-8` on probes; probes outside `dom Φ_M^@` are
/// skipped.
pub fn minimal_selfconj_probe(m: &PointSet, probes: &[Vector]) -> Result<Verdict> {
    let f = phi_build(m);
    let mut worst = f64::INFINITY;
    let mut skipped = 0usize;
    for b in probes {
        let c = conj_eval(&f, b)?.value;
        if c == f64::INFINITY {
            skipped += 1;
            continue;
        }
        let slack = c - f.eval(b)?;
        if slack < -1e-8 {
            return Ok(Verdict::fails(Witness::point(b)).with_measure(slack));
        }
        worst = worst.min(slack);
    }
    if skipped == probes.len() {
        return Ok(Verdict::undecided(0.0).with_note("every probe outside the conjugate domain"));
    }
    Ok(Verdict::holds().with_measure(worst).with_note(format!("{skipped} probes outside the conjugate domain skipped")))
}

const ALPHA_STEPS: usize = 20;

/// Estimates `conv min{f, f^@}` at each probe from feasible splits
/// `α u + β v = x` (`α` on a grid, `v` on the box lattice) and checks
/// `≥ q − 1e-6`.
///
/// Both hypotheses `f ≥ q` and `f^@ ≥ q` are first grid-certified on `bx`;
/// a failure there is a precondition error.
pub fn convmin_check(
    f: &dyn ConvexFunction,
    fconj: &dyn ConvexFunction,
    probes: &[Vector],
    bx: &BoxGrid,
) -> Result<Verdict> {
    convmin_check_with(f, fconj, probes, bx, Exec::default())
}

pub fn convmin_check_with(
    f: &dyn ConvexFunction,
    fconj: &dyn ConvexFunction,
    probes: &[Vector],
    bx: &BoxGrid,
    exec: Exec,
) -> Result<Verdict> {
    let sp = f.space();
    if bx.dim() != sp.dim() {
        return Err(QposError::DimensionMismatch { expected: sp.dim(), got: bx.dim() });
    }
    if bx.is_empty() {
        return Ok(Verdict::undecided(bx.pitch()));
    }
    let lattice: Vec<Vector> = bx.points().collect();
    let fv: Vec<f64> = collect(exec.map(&lattice, |v| f.value(v)))?;
    let cv: Vec<f64> = collect(exec.map(&lattice, |v| fconj.value(v)))?;
    for (name, vals) in [("f", &fv), ("f^@", &cv)] {
        let (i, gap) = lattice
            .iter()
            .zip(vals.iter())
            .map(|(x, v)| sp.q(x) - v)
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, g)| if g > acc.1 { (i, g) } else { acc });
        if gap > tol::eps() {
            return Err(QposError::Precondition(format!(
                "{name} >= q fails on the grid at {:?} (gap {gap:e})",
                lattice[i].as_slice()
            )));
        }
    }
    let mut worst = f64::INFINITY;
    for x in probes {
        sp.check(x)?;
        let mut best = f.value(x)?.min(fconj.value(x)?);
        let mut split_err = 0.0_f64;
        for k in 1..ALPHA_STEPS {
            let alpha = k as f64 / ALPHA_STEPS as f64;
            let beta = 1.0 - alpha;
            for (v, c) in lattice.iter().zip(&cv) {
                if !c.is_finite() {
                    continue;
                }
                let u = (x - v * beta) / alpha;
                let val = alpha * f.value(&u)? + beta * c;
                if val < best {
                    best = val;
                    split_err = (&u * alpha + v * beta - x).amax();
                }
            }
        }
        if split_err > 1e-8 {
            return Err(QposError::Internal(format!("split residual {split_err:e}")));
        }
        let slack = best - sp.q(x);
        if slack < -1e-6 {
            return Ok(Verdict::fails(Witness::point(x)).with_measure(slack));
        }
        worst = worst.min(slack);
    }
    Ok(Verdict::grid_certified(bx.pitch()).with_measure(worst))
}

/// `convmin_check` for a max-affine `f` with its LP conjugate.
pub fn convmin_check_max_affine(f: &MaxAffineFn, probes: &[Vector], bx: &BoxGrid) -> Result<Verdict> {
    convmin_check(f, &Conjugate(f), probes, bx)
}

fn collect(v: Vec<Result<f64>>) -> Result<Vec<f64>> {
    v.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::SsdSpace;
    use crate::ssdb::HalfSquaredNorm;
    use crate::{Matrix, Vector};
    use std::sync::Arc;

    fn v(x: &[f64]) -> Vector {
        Vector::from_column_slice(x)
    }

    fn mono() -> Arc<SsdSpace> {
        Arc::new(SsdSpace::monotone(1).unwrap())
    }

    fn two() -> MaxAffineFn {
        phi_build(&PointSet::from_rows(mono(), &[&[0.0, 0.0], &[1.0, 1.0]]).unwrap())
    }

    #[test]
    fn fundamental_inequality_examples() {
        let f = two();
        let r = fund_ineq_check(&f, &v(&[0.0, 1.0]), &v(&[1.0, 1.0]), 0.5).unwrap();
        assert!(r.holds_p());
        assert!(r.measure.unwrap().abs() < 1e-12);
        let x = v(&[0.3, -2.0]);
        let r = fund_ineq_check(&f, &x, &v(&[5.0, 5.0]), 1.0).unwrap();
        assert!((r.measure.unwrap() - (f.eval(&x).unwrap().max(-0.6) + 0.6)).abs() < 1e-12);
        let r = fund_ineq_check(&f, &x, &v(&[0.5, 0.5]), 0.0).unwrap();
        assert!((r.measure.unwrap() - 0.25).abs() < 1e-9);
        assert!(fund_ineq_check(&f, &x, &x, 1.5).is_err());
    }

    #[test]
    fn envelope_bounds() {
        let f = two();
        let x = v(&[0.5, 0.5]);
        let e = EnvelopeQuery::new(f.clone(), x.clone()).unwrap();
        assert!((e.cap - 0.5).abs() < 1e-12);
        assert!(envelope_eval(&e, &x).unwrap() <= e.cap + 1e-12);
        for y in [v(&[0.0, 0.0]), v(&[2.0, -1.0]), v(&[0.7, 0.2])] {
            assert!(envelope_eval(&e, &y).unwrap() <= f.eval(&y).unwrap() + 1e-12);
        }
        // outside dom f^@ the spike is infinite and h = f
        let far = EnvelopeQuery::new(f.clone(), v(&[4.0, 4.0])).unwrap();
        assert_eq!(far.cap, f64::INFINITY);
        assert_eq!(envelope_eval(&far, &v(&[1.0, 0.0])).unwrap(), f.eval(&v(&[1.0, 0.0])).unwrap());
    }

    #[test]
    fn envelope_matches_brute_force() {
        let f = two();
        let x = v(&[0.25, 0.25]);
        let e = EnvelopeQuery::new(f.clone(), x.clone()).unwrap();
        let y = v(&[0.6, -0.3]);
        let mut brute = f64::INFINITY;
        for k in 0..100_000 {
            let b = k as f64 / 100_000.0;
            let u = (&y - &x * b) / (1.0 - b);
            brute = brute.min(b * e.cap + (1.0 - b) * f.eval(&u).unwrap());
        }
        let h = envelope_eval(&e, &y).unwrap();
        assert!(h <= brute + 1e-12 && brute - h < 1e-4, "{h} vs {brute}");
    }

    #[test]
    fn selfconj_examples() {
        let diag: Vec<Vector> = (-10..=10).map(|i| v(&[i as f64 * 0.2, i as f64 * 0.2])).collect();
        let m = PointSet::new(mono(), diag).unwrap();
        let probes: Vec<Vector> = BoxGrid::cube(2, 2.0, 0.5, 1).unwrap().points().collect();
        assert!(minimal_selfconj_probe(&m, &probes).unwrap().holds_p());
        let p = PointSet::from_rows(mono(), &[&[0.5, 0.5]]).unwrap();
        assert!(minimal_selfconj_probe(&p, &probes).unwrap().holds_p());
        let r = minimal_selfconj_probe(&p, &[v(&[3.0, 3.0])]).unwrap();
        assert_eq!(r.status, crate::verdict::Status::Undecided);
    }

    #[test]
    fn convmin_identity_graph() {
        let diag: Vec<Vector> = (-8..=8).map(|i| v(&[i as f64 * 0.25, i as f64 * 0.25])).collect();
        let f = phi_build(&PointSet::new(mono(), diag).unwrap());
        let bx = BoxGrid::cube(2, 1.0, 0.25, 1).unwrap();
        let probes = vec![v(&[0.3, 0.1]), v(&[-0.5, 0.5]), v(&[0.0, 0.9])];
        let r = convmin_check_max_affine(&f, &probes, &bx).unwrap();
        assert!(r.is_grid_certified(), "{r:?}");
    }

    #[test]
    fn convmin_self_conjugate_norm() {
        let sp = Arc::new(SsdSpace::hilbert(2).unwrap());
        let g0 = HalfSquaredNorm::new(sp, Matrix::identity(2, 2)).unwrap();
        let bx = BoxGrid::cube(2, 1.0, 0.25, 1).unwrap();
        let r = convmin_check(&g0, &g0.conjugate(), &[v(&[0.3, -0.2])], &bx).unwrap();
        assert!(r.holds_p());
    }

    #[test]
    fn convmin_rejects_unmet_hypothesis() {
        let f = MaxAffineFn::new(mono(), vec![(v(&[0.0, 0.0]), 0.0)]).unwrap();
        let bx = BoxGrid::cube(2, 1.0, 0.5, 1).unwrap();
        assert!(matches!(convmin_check_max_affine(&f, &[v(&[0.0, 0.0])], &bx), Err(QposError::Precondition(_))));
    }
}
