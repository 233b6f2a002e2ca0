//! Closed sets in Euclidean space with `q = ½‖·‖²`, described exactly
//! enough to evaluate the distance function `d_A`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, QposError, Result};
use crate::numerics::grid::{grid_multistart_max, BoxGrid};
use crate::space::{PointSet, SsdSpace};
use crate::verdict::{Verdict, Witness};
use crate::Vector;

/// Points closer than this to `A` count as members.
pub const MEMBER_TOL: f64 = 1e-9;
/// Tolerance for the sup comparisons in `g_phi_closed_member` and
/// `closed_repr_member`.
pub const SUP_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClosedSetDescriptor {
    Finite {
        points: Vec<Vec<f64>>,
    },
    Segments {
        segments: Vec<(Vec<f64>, Vec<f64>)>,
    },
    /// `{x ∈ R² : x₁ x₂ = 0}`.
    AxisCross,
}

impl ClosedSetDescriptor {
    pub fn finite(points: &[&[f64]]) -> Self {
        ClosedSetDescriptor::Finite { points: points.iter().map(|p| p.to_vec()).collect() }
    }

    /// Union of closed intervals of the real line.
    pub fn intervals(iv: &[(f64, f64)]) -> Self {
        ClosedSetDescriptor::Segments { segments: iv.iter().map(|&(a, b)| (vec![a], vec![b])).collect() }
    }

    pub fn validate(&self) -> Result<()> {
        let rows: Vec<&Vec<f64>> = match self {
            ClosedSetDescriptor::Finite { points } => points.iter().collect(),
            ClosedSetDescriptor::Segments { segments } => segments.iter().flat_map(|(p, q)| [p, q]).collect(),
            ClosedSetDescriptor::AxisCross => return Ok(()),
        };
        let Some(first) = rows.first() else {
            return Err(QposError::InvalidArgument("closed set has no data".into()));
        };
        let k = first.len();
        if k == 0 {
            return Err(QposError::InvalidArgument("zero-dimensional closed set".into()));
        }
        for r in rows {
            check_dim(k, r.len())?;
            if r.iter().any(|v| !v.is_finite()) {
                return Err(QposError::InvalidArgument("non-finite coordinate".into()));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        match self {
            ClosedSetDescriptor::Finite { points } => points.first().map_or(0, |p| p.len()),
            ClosedSetDescriptor::Segments { segments } => segments.first().map_or(0, |s| s.0.len()),
            ClosedSetDescriptor::AxisCross => 2,
        }
    }

    /// Largest norm of a defining point (0 for the cross).
    pub fn extent(&self) -> f64 {
        let norm = |p: &Vec<f64>| p.iter().map(|v| v * v).sum::<f64>().sqrt();
        match self {
            ClosedSetDescriptor::Finite { points } => points.iter().map(norm).fold(0.0, f64::max),
            ClosedSetDescriptor::Segments { segments } => {
                segments.iter().map(|(p, q)| norm(p).max(norm(q))).fold(0.0, f64::max)
            }
            ClosedSetDescriptor::AxisCross => 0.0,
        }
    }

    /// `d_A(x)`.
    pub fn distance(&self, x: &Vector) -> f64 {
        match self {
            ClosedSetDescriptor::Finite { points } => points
                .iter()
                .map(|p| p.iter().zip(x.iter()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>())
                .fold(f64::INFINITY, f64::min)
                .sqrt(),
            ClosedSetDescriptor::Segments { segments } => {
                segments.iter().map(|(p, q)| segment_dist2(p, q, x)).fold(f64::INFINITY, f64::min).sqrt()
            }
            ClosedSetDescriptor::AxisCross => x[0].abs().min(x[1].abs()),
        }
    }

    pub fn contains(&self, x: &Vector) -> bool {
        self.distance(x) <= MEMBER_TOL
    }

    /// The finite set as a point set in the Hilbert model.
    pub fn point_set(&self) -> Result<PointSet> {
        match self {
            ClosedSetDescriptor::Finite { points } => {
                self.validate()?;
                let sp = Arc::new(SsdSpace::hilbert(self.dim())?);
                PointSet::new(sp, points.iter().map(|p| Vector::from_column_slice(p)).collect())
            }
            _ => Err(QposError::InvalidArgument("only finite descriptors are point sets".into())),
        }
    }
}

fn segment_dist2(p: &[f64], q: &[f64], x: &Vector) -> f64 {
    let d: Vec<f64> = p.iter().zip(q).map(|(a, b)| b - a).collect();
    let len2: f64 = d.iter().map(|v| v * v).sum();
    let t = if len2 > 0.0 {
        let dot: f64 = d.iter().zip(p).zip(x.iter()).map(|((di, pi), xi)| di * (xi - pi)).sum();
        (dot / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    p.iter()
        .zip(&d)
        .zip(x.iter())
        .map(|((pi, di), xi)| {
            let e = pi + t * di - xi;
            e * e
        })
        .sum()
}

fn check_point(a: &ClosedSetDescriptor, x: &Vector) -> Result<()> {
    a.validate()?;
    check_dim(a.dim(), x.len())
}

/// `Φ_A(x) = ½‖x‖² − ½ d_A²(x)`.
pub fn phi_closed_eval(a: &ClosedSetDescriptor, x: &Vector) -> Result<f64> {
    check_point(a, x)?;
    let d = a.distance(x);
    Ok(0.5 * x.norm_squared() - 0.5 * d * d)
}

/// Box `[-R, R]^k` with `R = 2(‖x‖ + extent) + 1`.
pub fn policy_box(a: &ClosedSetDescriptor, x: &Vector, pitch: f64, multistarts: usize) -> Result<BoxGrid> {
    check_point(a, x)?;
    let r = 2.0 * (x.norm() + a.extent()) + 1.0;
    BoxGrid::cube(a.dim(), r, pitch, multistarts)
}

/// A supremum evaluated over a recorded box.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxSup {
    /// `+∞` when `unbounded`.
    pub value: f64,
    /// Best value found in the box.
    pub box_value: f64,
    pub argmax: Vector,
    /// The objective keeps growing towards the box boundary.
    pub unbounded: bool,
    pub grid: BoxGrid,
}

impl BoxSup {
    pub fn label(&self) -> &'static str {
        if self.unbounded {
            "BOX_UNBOUNDED"
        } else {
            "BOUNDED"
        }
    }
}

/// Grid sup over `bx`. A maximizer on the boundary is re-checked against the
/// concentric half-size box; strict growth marks the sup as unbounded.
fn box_sup<F>(f: F, bx: &BoxGrid) -> Result<BoxSup>
where
    F: Fn(&Vector) -> f64 + Sync + Send,
{
    let r = grid_multistart_max(&f, bx)?;
    let mut unbounded = false;
    if bx.boundary_distance(&r.argmax) < 0.5 * bx.pitch() {
        let c = (bx.lower() + bx.upper()) * 0.5;
        let h = (bx.upper() - bx.lower()) * 0.25;
        let inner = BoxGrid::new(&c - &h, &c + &h, bx.pitch(), bx.multistarts())?;
        let ri = grid_multistart_max(&f, &inner)?;
        unbounded = r.value > ri.value + SUP_TOL;
    }
    Ok(BoxSup {
        value: if unbounded { f64::INFINITY } else { r.value },
        box_value: r.value,
        argmax: r.argmax,
        unbounded,
        grid: bx.clone(),
    })
}

/// `sup_b {d_A²(b) − ‖x − b‖²}` over the box.
fn dilation_sup(a: &ClosedSetDescriptor, x: &Vector, bx: &BoxGrid) -> Result<BoxSup> {
    check_point(a, x)?;
    check_dim(a.dim(), bx.dim())?;
    box_sup(
        |b: &Vector| {
            let d = a.distance(b);
            d * d - (x - b).norm_squared()
        },
        bx,
    )
}

/// `Φ_A^@(x) = ½‖x‖² + ½ sup_b {d_A²(b) − ‖x − b‖²}`.
pub fn phi_conj_closed_eval(a: &ClosedSetDescriptor, x: &Vector, bx: &BoxGrid) -> Result<BoxSup> {
    let mut s = dilation_sup(a, x, bx)?;
    let base = 0.5 * x.norm_squared();
    s.box_value = base + 0.5 * s.box_value;
    s.value = base + 0.5 * s.value;
    Ok(s)
}

/// `x ∈ G_{Φ_A}` iff `sup_b {d_A²(b) − ‖b − x‖²} = d_A²(x)`.
pub fn g_phi_closed_member(a: &ClosedSetDescriptor, x: &Vector, bx: &BoxGrid) -> Result<Verdict> {
    let s = dilation_sup(a, x, bx)?;
    let d = a.distance(x);
    let gap = s.value - d * d;
    let v = if gap <= SUP_TOL {
        Verdict::grid_certified(bx.pitch())
    } else {
        Verdict::fails(Witness::point(x)).with_resolution(bx.pitch())
    };
    Ok(v.with_measure(gap).with_note(s.label()))
}

/// `h(x) = sup_y {⟨y, x⟩ − ½‖y‖² + ½ d_A²(y)}`, whose `P_q` is `A`.
pub fn closed_repr_h_eval(a: &ClosedSetDescriptor, x: &Vector, bx: &BoxGrid) -> Result<BoxSup> {
    check_point(a, x)?;
    check_dim(a.dim(), bx.dim())?;
    box_sup(
        |y: &Vector| {
            let d = a.distance(y);
            y.dot(x) - 0.5 * y.norm_squared() + 0.5 * d * d
        },
        bx,
    )
}

/// `x ∈ P_q(h)`: `h(x) = q(x)` within `SUP_TOL`.
pub fn closed_repr_member(a: &ClosedSetDescriptor, x: &Vector, bx: &BoxGrid) -> Result<Verdict> {
    let h = closed_repr_h_eval(a, x, bx)?;
    let gap = h.value - 0.5 * x.norm_squared();
    if gap < -SUP_TOL {
        return Err(QposError::Internal(format!("h < q at {:?} (gap {gap:e})", x.as_slice())));
    }
    let v = if gap <= SUP_TOL {
        Verdict::grid_certified(bx.pitch())
    } else {
        Verdict::fails(Witness::point(x)).with_resolution(bx.pitch())
    };
    Ok(v.with_measure(gap).with_note(h.label()))
}

/// For `a1 ≠ a2` in `A`: the open ball around the midpoint with radius
/// `½‖a1 − a2‖` meets `A`.
pub fn midpoint_ball_check(a: &ClosedSetDescriptor, a1: &Vector, a2: &Vector) -> Result<Verdict> {
    check_point(a, a1)?;
    check_point(a, a2)?;
    if (a1 - a2).norm() <= MEMBER_TOL {
        return Err(QposError::Precondition("a1 and a2 coincide".into()));
    }
    if !a.contains(a1) || !a.contains(a2) {
        return Err(QposError::Precondition("a1 and a2 must lie in A".into()));
    }
    let mid = (a1 + a2) * 0.5;
    let r = 0.5 * (a1 - a2).norm();
    let margin = r - a.distance(&mid);
    Ok(if margin > 1e-9 {
        Verdict::holds().with_measure(margin)
    } else {
        Verdict::fails(Witness::pair(a1, a2)).with_measure(margin)
    })
}

/// Report of the real-line characterization.
#[derive(Debug, Clone)]
pub struct LineReport {
    pub verdict: Verdict,
    pub convex: bool,
    /// Every probe in `G_{Φ_A}` lies in `A`.
    pub sampled_equal: bool,
    /// Probes found in `G_{Φ_A} ∖ A`.
    pub excess: Vec<f64>,
}

/// On `R`, a finite union of closed intervals equals `G_{Φ_A}` exactly when
/// it is one interval. Compares convexity with the probe-sampled equality.
pub fn line_corollary_check(intervals: &[(f64, f64)], probes: &[f64], pitch: f64) -> Result<LineReport> {
    if intervals.is_empty() {
        return Err(QposError::InvalidArgument("no intervals".into()));
    }
    if intervals.iter().any(|&(a, b)| a > b || !a.is_finite() || !b.is_finite()) {
        return Err(QposError::InvalidArgument("intervals need finite a <= b".into()));
    }
    let mut sorted = intervals.to_vec();
    sorted.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut reach = sorted[0].1;
    let mut convex = true;
    for &(a, b) in &sorted[1..] {
        if a > reach + MEMBER_TOL {
            convex = false;
        }
        reach = reach.max(b);
    }
    let desc = ClosedSetDescriptor::intervals(intervals);
    let mut excess = Vec::new();
    for &p in probes {
        let x = Vector::from_element(1, p);
        let bx = policy_box(&desc, &x, pitch, 2)?;
        if !desc.contains(&x) && !g_phi_closed_member(&desc, &x, &bx)?.fails_p() {
            excess.push(p);
        }
    }
    let sampled_equal = excess.is_empty();
    let verdict = if convex == sampled_equal {
        Verdict::holds()
    } else if convex {
        Verdict::fails(Witness::point(&Vector::from_element(1, excess[0])))
            .with_note("convex set with a probe in G minus A")
    } else {
        Verdict::undecided(pitch).with_note("no probe reached G minus A")
    };
    Ok(LineReport { verdict, convex, sampled_equal, excess })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fitzpatrick::{conj_eval, phi_build};
    use crate::space::is_q_positive;
    use proptest::prelude::*;

    fn v(x: &[f64]) -> Vector {
        Vector::from_column_slice(x)
    }

    fn pm1() -> ClosedSetDescriptor {
        ClosedSetDescriptor::finite(&[&[-1.0], &[1.0]])
    }

    #[test]
    fn serde_kinds() {
        let d: ClosedSetDescriptor = serde_json::from_str(r#"{"kind":"axis_cross"}"#).unwrap();
        assert_eq!(d, ClosedSetDescriptor::AxisCross);
        let d: ClosedSetDescriptor = serde_json::from_str(r#"{"kind":"segments","segments":[[[0,0],[1,0]]]}"#).unwrap();
        assert!((d.distance(&v(&[0.5, 2.0])) - 2.0).abs() < 1e-15);
        let d: ClosedSetDescriptor = serde_json::from_str(r#"{"kind":"finite","points":[[1,2]]}"#).unwrap();
        assert_eq!(d.dim(), 2);
    }

    #[test]
    fn phi_examples() {
        assert_eq!(phi_closed_eval(&pm1(), &v(&[0.0])).unwrap(), -0.5);
        assert_eq!(phi_closed_eval(&pm1(), &v(&[1.0])).unwrap(), 0.5);
        assert_eq!(phi_closed_eval(&ClosedSetDescriptor::AxisCross, &v(&[1.0, 2.0])).unwrap(), 2.0);
    }

    #[test]
    fn conj_examples() {
        let a = pm1();
        let x = v(&[0.0]);
        let s = phi_conj_closed_eval(&a, &x, &policy_box(&a, &x, 0.01, 2).unwrap()).unwrap();
        assert!((s.value - 0.5).abs() < 1e-6);
        let x = v(&[1.0]);
        let s = phi_conj_closed_eval(&a, &x, &policy_box(&a, &x, 0.01, 2).unwrap()).unwrap();
        assert!((s.value - 0.5).abs() < 1e-6);
        let x = v(&[3.0]);
        let s = phi_conj_closed_eval(&a, &x, &policy_box(&a, &x, 0.01, 2).unwrap()).unwrap();
        assert!(s.unbounded && s.value == f64::INFINITY);
        let c = ClosedSetDescriptor::AxisCross;
        let x = v(&[1.0, 1.0]);
        let s = phi_conj_closed_eval(&c, &x, &policy_box(&c, &x, 0.05, 3).unwrap()).unwrap();
        assert!(s.value > 1.0 + 1e-3);
    }

    #[test]
    fn conj_matches_lp_on_finite_sets() {
        let a = ClosedSetDescriptor::finite(&[&[0.0, 0.0], &[1.0, 0.5], &[-0.5, 1.0]]);
        let f = phi_build(&a.point_set().unwrap());
        for x in [v(&[0.2, 0.3]), v(&[0.0, 0.0]), v(&[0.1, 0.6]), v(&[2.0, 2.0])] {
            let bx = policy_box(&a, &x, 0.05, 4).unwrap();
            let grid = phi_conj_closed_eval(&a, &x, &bx).unwrap();
            let lp = conj_eval(&f, &x).unwrap().value;
            if lp.is_finite() {
                assert!((grid.value - lp).abs() < 1e-6, "{x:?}: {} vs {lp}", grid.value);
            } else {
                assert!(grid.unbounded);
            }
        }
    }

    #[test]
    fn g_examples() {
        let c = ClosedSetDescriptor::AxisCross;
        let x = v(&[0.0, 1.3]);
        assert!(g_phi_closed_member(&c, &x, &policy_box(&c, &x, 0.1, 2).unwrap()).unwrap().holds_p());
        let x = v(&[1.0, 1.0]);
        assert!(g_phi_closed_member(&c, &x, &policy_box(&c, &x, 0.1, 2).unwrap()).unwrap().fails_p());
        let x = v(&[0.0]);
        let r = g_phi_closed_member(&pm1(), &x, &policy_box(&pm1(), &x, 0.01, 2).unwrap()).unwrap();
        assert!(r.holds_p());
    }

    #[test]
    fn repr_examples() {
        let a = pm1();
        for x in [v(&[1.0]), v(&[-1.0])] {
            let h = closed_repr_h_eval(&a, &x, &policy_box(&a, &x, 0.01, 2).unwrap()).unwrap();
            assert!((h.value - 0.5).abs() < 1e-6);
        }
        let o = ClosedSetDescriptor::finite(&[&[0.0]]);
        let x = v(&[1.0]);
        let h = closed_repr_h_eval(&o, &x, &policy_box(&o, &x, 0.01, 2).unwrap()).unwrap();
        assert!(h.unbounded);
        assert!(closed_repr_member(&o, &x, &policy_box(&o, &x, 0.01, 2).unwrap()).unwrap().fails_p());
        let x = v(&[0.0]);
        let r = closed_repr_member(&a, &x, &policy_box(&a, &x, 0.01, 2).unwrap()).unwrap();
        assert!(r.fails_p());
    }

    #[test]
    fn midpoint_examples() {
        let c = ClosedSetDescriptor::AxisCross;
        let r = midpoint_ball_check(&c, &v(&[1.0, 0.0]), &v(&[0.0, 1.0])).unwrap();
        assert!(r.holds_p());
        let seg = ClosedSetDescriptor::intervals(&[(0.0, 1.0)]);
        assert!(midpoint_ball_check(&seg, &v(&[0.2]), &v(&[0.9])).unwrap().holds_p());
        assert!(midpoint_ball_check(&pm1(), &v(&[-1.0]), &v(&[1.0])).unwrap().fails_p());
        assert!(matches!(midpoint_ball_check(&pm1(), &v(&[1.0]), &v(&[1.0])), Err(QposError::Precondition(_))));
    }

    #[test]
    fn line_examples() {
        let probes: Vec<f64> = (-8..=16).map(|i| i as f64 * 0.25).collect();
        let r = line_corollary_check(&[(0.0, 1.0)], &probes, 0.01).unwrap();
        assert!(r.verdict.holds_p() && r.convex && r.sampled_equal);
        let r = line_corollary_check(&[(-1.0, -1.0), (1.0, 1.0)], &[0.0], 0.01).unwrap();
        assert!(r.verdict.holds_p() && !r.convex);
        assert_eq!(r.excess, vec![0.0]);
        let r = line_corollary_check(&[(0.0, 1.0), (2.0, 3.0)], &probes, 0.01).unwrap();
        assert!(r.verdict.holds_p() && !r.convex && r.excess.contains(&1.5));
    }

    #[test]
    fn descriptors_are_q_positive() {
        let a = ClosedSetDescriptor::finite(&[&[0.0, 0.0], &[3.0, -1.0], &[1.0, 1.0]]);
        assert!(is_q_positive(&a.point_set().unwrap()).holds_p());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]
        #[test]
        fn phi_closed_matches_generic(seed in proptest::collection::vec(-3.0f64..3.0, 6), x in proptest::collection::vec(-4.0f64..4.0, 2)) {
            let a = ClosedSetDescriptor::Finite { points: seed.chunks(2).map(|c| c.to_vec()).collect() };
            let Ok(ps) = a.point_set() else { return Ok(()); };
            let x = Vector::from_vec(x);
            let direct = phi_closed_eval(&a, &x).unwrap();
            let generic = phi_build(&ps).eval(&x).unwrap();
            prop_assert!((direct - generic).abs() <= 1e-10 * (1.0 + generic.abs()));
        }
    }
}
