//! Premaximality, the third-polar identity, continua of extensions, and the
//! (NI) condition in the monotone model.

use serde::{Deserialize, Serialize};

use crate::affine::{affine_is_q_positive, affine_pi, phi_domain, pi_shape, AffineSet, PiShape};
use crate::error::{QposError, Result};
use crate::exec::Exec;
use crate::fitzpatrick::phi_build;
use crate::numerics::grid::{grid_multistart_max_with, grid_scan_max, BoxGrid};
use crate::numerics::linalg::{orth_basis, sym_eigen};
use crate::numerics::quad::min_q_over_affine;
use crate::space::{is_q_positive, min_q_to_set, ModelKind, PointSet, SsdSpace};
use crate::tol::{self, RANK_TOL};
use crate::verdict::{Verdict, Witness};
use crate::{Matrix, Vector};

/// `Φ_P(x) = sup_t {⌊x, x0 + Vt⌋ − q(x0 + Vt)} = q(x) − inf_t q(x − x0 − Vt)`;
/// `+∞` off `dom Φ_P`.
pub fn phi_affine_eval(p: &AffineSet, x: &Vector) -> Result<f64> {
    let sp = p.space();
    sp.check(x)?;
    let m = min_q_over_affine(sp, &(x - p.anchor()), p.basis())?;
    Ok(sp.q(x) - m.value())
}

#[derive(Debug, Clone, Copy)]
pub enum PremaxTarget<'a> {
    Points(&'a PointSet),
    Affine(&'a AffineSet),
}

impl PremaxTarget<'_> {
    fn space(&self) -> &SsdSpace {
        match self {
            PremaxTarget::Points(p) => p.space(),
            PremaxTarget::Affine(a) => a.space(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Classification {
    PremaximalVia202,
    PremaximalViaAffinePi,
    NotPremaximal,
    Undecided,
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Classification::PremaximalVia202 => "PREMAXIMAL_VIA_202",
            Classification::PremaximalViaAffinePi => "PREMAXIMAL_VIA_AFFINE_PI",
            Classification::NotPremaximal => "NOT_PREMAXIMAL",
            Classification::Undecided => "UNDECIDED",
        })
    }
}

/// The unique maximally q-positive superset, when one was established.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MaximalSuperset {
    /// `P_q(Φ_P)`, given as a membership oracle.
    PqOfPhi,
    Affine {
        anchor: Vec<f64>,
        basis: Vec<Vec<f64>>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PremaxReport {
    /// `Φ_P ≥ q` on the box; a failing verdict carries `b` with
    /// `q(b) − Φ_P(b) > ε`.
    pub condition202: Verdict,
    /// Pairwise q-positivity of `P^π`.
    pub pi_positive: Verdict,
    pub classification: Classification,
    pub box_lower: Vec<f64>,
    pub box_upper: Vec<f64>,
    pub pitch: f64,
    pub superset: Option<MaximalSuperset>,
    /// Affine `P` only: whether `P^π = dom Φ_P` holds exactly.
    pub pi_equals_domain: Option<bool>,
}

fn affine_superset(anchor: &Vector, basis: &Matrix) -> MaximalSuperset {
    MaximalSuperset::Affine {
        anchor: anchor.iter().copied().collect(),
        basis: basis.column_iter().map(|c| c.iter().copied().collect()).collect(),
    }
}

/// Largest number of net points used for the pairwise `P^π` check.
const NET_LIMIT: usize = 400;

/// Classifies `P` as premaximal via `Φ_P ≥ q`, premaximal via an affine
/// polar, or not premaximal, certifying `Φ_P ≥ q` on `bx`.
pub fn premax_certify(p: PremaxTarget<'_>, bx: &BoxGrid) -> Result<PremaxReport> {
    premax_certify_with(p, bx, Exec::default())
}

pub fn premax_certify_with(p: PremaxTarget<'_>, bx: &BoxGrid, exec: Exec) -> Result<PremaxReport> {
    let sp = p.space();
    if bx.dim() != sp.dim() {
        return Err(QposError::DimensionMismatch { expected: sp.dim(), got: bx.dim() });
    }
    let positive = match p {
        PremaxTarget::Points(a) => is_q_positive(a),
        PremaxTarget::Affine(a) => affine_is_q_positive(a)?,
    };
    if !positive.holds_p() {
        return Err(QposError::Precondition("set is not q-positive".into()));
    }
    let mut report = PremaxReport {
        condition202: Verdict::undecided(bx.pitch()),
        pi_positive: Verdict::undecided(bx.pitch()),
        classification: Classification::Undecided,
        box_lower: bx.lower().iter().copied().collect(),
        box_upper: bx.upper().iter().copied().collect(),
        pitch: bx.pitch(),
        superset: None,
        pi_equals_domain: None,
    };
    if bx.is_empty() {
        return Ok(report);
    }
    let gap = match p {
        PremaxTarget::Points(a) => grid_multistart_max_with(|x: &Vector| min_q_to_set(a, x).0, bx, exec)?,
        PremaxTarget::Affine(a) => grid_multistart_max_with(
            |x: &Vector| {
                min_q_over_affine(a.space(), &(x - a.anchor()), a.basis()).map(|m| m.value()).unwrap_or(f64::NAN)
            },
            bx,
            exec,
        )?,
    };
    report.condition202 = if gap.value > tol::eps() {
        Verdict::fails(Witness::point(&gap.argmax)).with_measure(gap.value)
    } else {
        Verdict::grid_certified(bx.pitch()).with_measure(gap.value)
    };

    match p {
        PremaxTarget::Affine(a) => {
            let shape = pi_shape(a)?;
            let (_, dom) = phi_domain(a)?;
            let n = sp.dim();
            if let PiShape::Affine { anchor, basis } = &shape {
                let same = basis.ncols() == dom.ncols();
                report.pi_equals_domain = Some(same);
                let proper = dom.ncols() < n;
                if (proper && same) || !report.condition202.holds_p() {
                    report.classification = Classification::PremaximalViaAffinePi;
                    report.superset = Some(affine_superset(anchor, basis));
                    report.pi_positive = affine_net_check(a, anchor, basis, bx)?;
                    return Ok(report);
                }
            } else {
                report.pi_equals_domain = Some(false);
            }
            if report.condition202.holds_p() {
                report.classification = Classification::PremaximalVia202;
                report.superset = Some(MaximalSuperset::PqOfPhi);
                report.pi_positive = affine_sample_net_check(a, bx)?;
                return Ok(report);
            }
            if let PiShape::NotAffine { pair: (p1, p2), .. } = shape {
                let v = sp.q_diff(&p1, &p2);
                report.pi_positive = Verdict::fails(Witness::pair(&p1, &p2)).with_measure(v);
                report.classification = Classification::NotPremaximal;
            }
            Ok(report)
        }
        PremaxTarget::Points(a) => {
            if report.condition202.holds_p() {
                report.classification = Classification::PremaximalVia202;
                report.superset = Some(MaximalSuperset::PqOfPhi);
                report.pi_positive = points_net_check(a, bx)?;
                return Ok(report);
            }
            let eig = sym_eigen(sp.matrix())?;
            let (lo, u) = eig.min().expect("nonempty");
            if lo >= -RANK_TOL {
                // q ≥ 0 everywhere: the polar is the whole space.
                let n = sp.dim();
                report.classification = Classification::PremaximalViaAffinePi;
                report.superset = Some(affine_superset(&Vector::zeros(n), &Matrix::identity(n, n)));
                report.pi_positive = Verdict::holds().with_note("q is nonnegative");
                return Ok(report);
            }
            // b0 lies strictly inside P^π; perturb it along a q-negative
            // direction until both ends stay inside.
            let b0 = gap.argmax.clone();
            let mut lam = 1.0;
            for _ in 0..60 {
                let p1 = &b0 + &u * lam;
                let p2 = &b0 - &u * lam;
                if min_q_to_set(a, &p1).0 >= 0.0 && min_q_to_set(a, &p2).0 >= 0.0 {
                    let v = sp.q_diff(&p1, &p2);
                    if v < -tol::eps() {
                        report.pi_positive = Verdict::fails(Witness::pair(&p1, &p2)).with_measure(v);
                        report.classification = Classification::NotPremaximal;
                        return Ok(report);
                    }
                }
                lam *= 0.5;
            }
            report.pi_positive = points_net_check(a, bx)?;
            if report.pi_positive.fails_p() {
                report.classification = Classification::NotPremaximal;
            }
            Ok(report)
        }
    }
}

/// Pairwise check of a point net; fails with the worst pair.
fn pairwise(sp: &SsdSpace, net: &[Vector], res: f64) -> Verdict {
    let mut worst: Option<(f64, usize, usize)> = None;
    for i in 0..net.len() {
        for j in 0..i {
            let v = sp.q_diff(&net[i], &net[j]);
            if worst.is_none_or(|(w, _, _)| v < w) {
                worst = Some((v, i, j));
            }
        }
    }
    match worst {
        Some((v, i, j)) if v < -tol::eps() => Verdict::fails(Witness::pair(&net[i], &net[j])).with_measure(v),
        Some((v, _, _)) => Verdict::grid_certified(res).with_measure(v),
        None => Verdict::undecided(res).with_note("empty net"),
    }
}

fn thin(mut pts: Vec<Vector>) -> Vec<Vector> {
    if pts.len() > NET_LIMIT {
        let step = pts.len().div_ceil(NET_LIMIT);
        pts = pts.into_iter().step_by(step).collect();
    }
    pts
}

fn points_net_check(a: &PointSet, bx: &BoxGrid) -> Result<Verdict> {
    let net: Vec<Vector> = bx.points().filter(|x| min_q_to_set(a, x).0 >= -tol::eps()).collect();
    Ok(pairwise(a.space(), &thin(net), bx.pitch()))
}

fn affine_net_check(a: &AffineSet, anchor: &Vector, basis: &Matrix, bx: &BoxGrid) -> Result<Verdict> {
    let q = orth_basis(basis, RANK_TOL);
    let net: Vec<Vector> = bx
        .points()
        .map(|g| {
            let r = &g - anchor;
            anchor + &q * (q.transpose() * r)
        })
        .collect();
    let net = thin(net);
    let pi = affine_pi(a)?;
    for x in &net {
        if !pi.contains(x)? {
            return Err(QposError::Internal("projected net point left the polar".into()));
        }
    }
    Ok(pairwise(a.space(), &net, bx.pitch()))
}

fn affine_sample_net_check(a: &AffineSet, bx: &BoxGrid) -> Result<Verdict> {
    let pi = affine_pi(a)?;
    let mut net = Vec::new();
    for g in bx.points() {
        if pi.contains(&g)? {
            net.push(g);
        }
    }
    Ok(pairwise(a.space(), &thin(net), bx.pitch()))
}

/// Finite check of `A^{πππ} = A^π` on a net.
///
/// `P1 = net ∩ A^π` stands in for `A^π`, `P2` (points of `net ∪ A` related to
/// all of `P1`) for `A^{ππ}`. Every net point must satisfy
/// `p ∈ A^π ⇔ p related to all of P2`.
pub fn third_polar_check(a: &PointSet, net: &[Vector], resolution: f64) -> Result<Verdict> {
    let sp = a.space();
    for p in net {
        sp.check(p)?;
    }
    let related = |x: &Vector, set: &[&Vector]| set.iter().all(|y| sp.q_diff(x, y) >= -tol::eps());
    let p1: Vec<&Vector> = net.iter().filter(|x| min_q_to_set(a, x).0 >= -tol::eps()).collect();
    let p2: Vec<&Vector> = net.iter().chain(a.points().iter()).filter(|x| related(x, &p1)).collect();
    for p in net {
        let in_pi = min_q_to_set(a, p).0 >= -tol::eps();
        let in_ppp = related(p, &p2);
        if in_pi != in_ppp {
            return Ok(
                Verdict::fails(Witness::point(p)).with_note(format!("in A^pi: {in_pi}, in third polar: {in_ppp}"))
            );
        }
    }
    Ok(Verdict::grid_certified(resolution).with_note(format!("|P1| = {}, |P2| = {}", p1.len(), p2.len())))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtensionFamily {
    pub x1: Vec<f64>,
    pub x2: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub points: Vec<Vec<f64>>,
    /// `q(x1 − x2) < 0`.
    pub q_x1x2: f64,
    /// `min_a q(x_λ − a)` per λ; all `≥ −ε`.
    pub margins: Vec<f64>,
    /// Largest `|q(x_λi − x_λj) − (λi − λj)² q(x1 − x2)|` over all pairs.
    pub scaling_error: f64,
}

/// `x_λ = λ x1 + (1 − λ) x2` for `count` equally spaced `λ ∈ [0, 1]`, each
/// verified to lie in `A^π`.
///
/// For fixed `a`, `λ ↦ q(x_λ − a)` is a concave quadratic (its leading
/// coefficient is `q(x1 − x2) < 0`), so its minimum on `[0, 1]` is at an
/// endpoint; both endpoints are nonnegative by hypothesis.
pub fn extension_continuum(a: &PointSet, x1: &Vector, x2: &Vector, count: usize) -> Result<ExtensionFamily> {
    let sp = a.space();
    sp.check(x1)?;
    sp.check(x2)?;
    if count < 2 {
        return Err(QposError::InvalidArgument("need at least two samples".into()));
    }
    for (name, x) in [("x1", x1), ("x2", x2)] {
        let (v, _) = min_q_to_set(a, x);
        if v < -tol::eps() {
            return Err(QposError::Precondition(format!("{name} is not in the polar ({v:e})")));
        }
    }
    let d = x1 - x2;
    let qd = sp.q(&d);
    if qd >= -tol::eps() {
        return Err(QposError::Precondition(format!("q(x1 - x2) = {qd:e} is not negative")));
    }
    let lambdas: Vec<f64> = (0..count).map(|i| i as f64 / (count - 1) as f64).collect();
    let points: Vec<Vector> = lambdas.iter().map(|l| x1 * *l + x2 * (1.0 - l)).collect();
    let mut margins = Vec::with_capacity(count);
    for (l, x) in lambdas.iter().zip(&points) {
        let (direct, _) = min_q_to_set(a, x);
        // the same value from the quadratic in λ
        let mut poly = f64::INFINITY;
        for p in a.points() {
            let r = x2 - p;
            poly = poly.min(sp.q(&r) + l * sp.pair(&r, &d) + l * l * qd);
        }
        let m = direct.min(poly);
        if m < -tol::eps() {
            return Err(QposError::Internal(format!("x_{l} left the polar ({m:e})")));
        }
        margins.push(m);
    }
    let mut scaling_error = 0.0_f64;
    for i in 0..count {
        for j in 0..i {
            let dl = lambdas[i] - lambdas[j];
            let v = sp.q_diff(&points[i], &points[j]);
            scaling_error = scaling_error.max((v - dl * dl * qd).abs());
        }
    }
    Ok(ExtensionFamily {
        x1: x1.iter().copied().collect(),
        x2: x2.iter().copied().collect(),
        lambdas,
        points: points.iter().map(|p| p.iter().copied().collect()).collect(),
        q_x1x2: qd,
        margins,
        scaling_error,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NiReport {
    /// `sup_y inf_a ⟨a* − y*, a − y**⟩ ≤ 0` on the grid.
    pub verdict: Verdict,
    /// `Φ_{ι(A)} ≥ q` on the same grid.
    pub condition202: Verdict,
    pub agree: bool,
    /// Set when (NI) holds: `A` is unique and `ι(A)^π = P_q(Φ_{ι(A)})`.
    pub unique: Option<bool>,
}

/// `ι(x, x*) = (x*, x)`.
pub fn iota(k: usize, b: &Vector) -> Vector {
    Vector::from_fn(2 * k, |i, _| if i < k { b[i + k] } else { b[i - k] })
}

/// The (NI) condition for a finite monotone `A ⊂ R^k × R^k`, evaluated on a
/// grid over `(y*, y**)` and cross-checked against `Φ_{ι(A)} ≥ q`.
pub fn ni_type_check(a: &PointSet, bx: &BoxGrid) -> Result<NiReport> {
    ni_type_check_with(a, bx, Exec::default())
}

pub fn ni_type_check_with(a: &PointSet, bx: &BoxGrid, exec: Exec) -> Result<NiReport> {
    let k = match a.space().kind() {
        ModelKind::Monotone { k } => k,
        other => return Err(QposError::InvalidArgument(format!("(NI) needs the monotone model, got {other:?}"))),
    };
    if bx.dim() != 2 * k {
        return Err(QposError::DimensionMismatch { expected: 2 * k, got: bx.dim() });
    }
    if bx.is_empty() {
        return Ok(NiReport {
            verdict: Verdict::undecided(bx.pitch()),
            condition202: Verdict::undecided(bx.pitch()),
            agree: true,
            unique: None,
        });
    }
    let pts = a.points();
    let ni = |y: &Vector| {
        pts.iter()
            .map(|p| (0..k).map(|i| (p[k + i] - y[i]) * (p[i] - y[k + i])).sum::<f64>())
            .fold(f64::INFINITY, f64::min)
    };
    let image = PointSet::new(a.space_arc().clone(), pts.iter().map(|p| iota(k, p)).collect())?;
    let phi = phi_build(&image);
    let sp = a.space();
    let gap202 = |y: &Vector| sp.q(y) - phi.eval_unchecked(y);
    let classify = |m: f64, at: &Vector| {
        if m > tol::eps() {
            Verdict::fails(Witness::point(at)).with_measure(m)
        } else {
            Verdict::grid_certified(bx.pitch()).with_measure(m)
        }
    };
    let r1 = grid_scan_max(ni, bx, exec)?;
    let r2 = grid_scan_max(gap202, bx, exec)?;
    let verdict = classify(r1.value, &r1.argmax);
    let condition202 = classify(r2.value, &r2.argmax);
    let agree = verdict.status == condition202.status;
    let unique = verdict.holds_p().then_some(true);
    Ok(NiReport { verdict, condition202, agree, unique })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verdict::Status;
    use std::sync::Arc;

    fn v(x: &[f64]) -> Vector {
        Vector::from_column_slice(x)
    }

    fn mono() -> Arc<SsdSpace> {
        Arc::new(SsdSpace::monotone(1).unwrap())
    }

    #[test]
    fn phi_affine_examples() {
        let d = AffineSet::line(mono(), v(&[0.0, 0.0]), v(&[1.0, 1.0])).unwrap();
        assert!((phi_affine_eval(&d, &v(&[1.0, 1.0])).unwrap() - 1.0).abs() < 1e-12);
        let h = AffineSet::line(mono(), v(&[0.0, 0.0]), v(&[1.0, 0.0])).unwrap();
        assert_eq!(phi_affine_eval(&h, &v(&[0.0, 1.0])).unwrap(), f64::INFINITY);
        let p = AffineSet::singleton(mono(), v(&[1.0, 2.0])).unwrap();
        let x = v(&[0.5, -1.0]);
        let expect = mono().pairing(&x, &v(&[1.0, 2.0])).unwrap() - 2.0;
        assert!((phi_affine_eval(&p, &x).unwrap() - expect).abs() < 1e-12);
    }

    #[test]
    fn trichotomy() {
        let o = PointSet::from_rows(mono(), &[&[0.0, 0.0]]).unwrap();
        let r = premax_certify(PremaxTarget::Points(&o), &BoxGrid::cube(2, 2.0, 0.1, 3).unwrap()).unwrap();
        assert_eq!(r.classification, Classification::NotPremaximal);
        assert_eq!(r.condition202.status, Status::Fails);
        assert!((r.condition202.measure.unwrap() - 4.0).abs() < 1e-9);
        let (p1, p2) = r.pi_positive.witness.clone().unwrap().as_pair().unwrap();
        assert!(o.space().q(&(&p1 - &p2)) < -1e-9);
        assert!(min_q_to_set(&o, &p1).0 >= 0.0 && min_q_to_set(&o, &p2).0 >= 0.0);

        let g = BoxGrid::cube(2, 3.0, 0.05, 3).unwrap();
        let d = AffineSet::line(mono(), v(&[0.0, 0.0]), v(&[1.0, 1.0])).unwrap();
        let r = premax_certify(PremaxTarget::Affine(&d), &g).unwrap();
        assert_eq!(r.classification, Classification::PremaximalVia202);
        assert!(r.condition202.is_grid_certified());

        let h = AffineSet::line(mono(), v(&[0.0, 0.0]), v(&[1.0, 0.0])).unwrap();
        let r = premax_certify(PremaxTarget::Affine(&h), &g).unwrap();
        assert_eq!(r.classification, Classification::PremaximalViaAffinePi);
        assert_eq!(r.pi_equals_domain, Some(true));
        assert!(r.pi_positive.holds_p());
    }

    #[test]
    fn hilbert_sets_have_affine_polar() {
        let sp = Arc::new(SsdSpace::hilbert(2).unwrap());
        let a = PointSet::from_rows(sp, &[&[0.0, 0.0], &[1.0, 0.0]]).unwrap();
        let r = premax_certify(PremaxTarget::Points(&a), &BoxGrid::cube(2, 1.0, 0.25, 2).unwrap()).unwrap();
        assert_eq!(r.classification, Classification::PremaximalViaAffinePi);
    }

    #[test]
    fn third_polar_examples() {
        let g = BoxGrid::cube(2, 2.0, 0.2, 1).unwrap();
        let net: Vec<Vector> = g.points().collect();
        let o = PointSet::from_rows(mono(), &[&[0.0, 0.0]]).unwrap();
        assert!(third_polar_check(&o, &net, 0.2).unwrap().holds_p());
        let two = PointSet::from_rows(mono(), &[&[0.0, 0.0], &[1.0, 1.0]]).unwrap();
        assert!(third_polar_check(&two, &net, 0.2).unwrap().holds_p());
    }

    #[test]
    fn continuum_example() {
        let o = PointSet::from_rows(mono(), &[&[0.0, 0.0]]).unwrap();
        let fam = extension_continuum(&o, &v(&[1.0, 0.0]), &v(&[0.0, 1.0]), 101).unwrap();
        assert_eq!(fam.q_x1x2, -1.0);
        assert!(fam.scaling_error <= 1e-12);
        assert_eq!(fam.points[0], vec![0.0, 1.0]);
        assert_eq!(fam.points[100], vec![1.0, 0.0]);
        for (l, m) in fam.lambdas.iter().zip(&fam.margins) {
            assert!((m - l * (1.0 - l)).abs() < 1e-12);
        }
        assert!(matches!(
            extension_continuum(&o, &v(&[1.0, 0.0]), &v(&[1.0, 0.0]), 5),
            Err(QposError::Precondition(_))
        ));
        assert!(extension_continuum(&o, &v(&[1.0, -1.0]), &v(&[0.0, 1.0]), 5).is_err());
    }

    #[test]
    fn ni_examples() {
        let g = BoxGrid::cube(2, 2.0, 0.25, 1).unwrap();
        let diag: Vec<Vector> = (0..17)
            .map(|i| {
                let t = -2.0 + i as f64 * 0.25;
                v(&[t, t])
            })
            .collect();
        let id = PointSet::new(mono(), diag).unwrap();
        let r = ni_type_check(&id, &g).unwrap();
        assert!(r.verdict.is_grid_certified());
        assert!(r.agree);
        let o = PointSet::from_rows(mono(), &[&[0.0, 0.0]]).unwrap();
        let r = ni_type_check(&o, &g).unwrap();
        assert!(r.verdict.fails_p());
        assert!(r.agree);
        assert!(r.verdict.measure.unwrap() >= 1.0);
        let r = ni_type_check(&o, &BoxGrid::empty(2)).unwrap();
        assert_eq!(r.verdict.status, Status::Undecided);
        let h = PointSet::from_rows(Arc::new(SsdSpace::hilbert(2).unwrap()), &[&[0.0, 0.0]]).unwrap();
        assert!(ni_type_check(&h, &g).is_err());
    }
}
