//! Running a prepared scenario and the JSON report it produces.

use std::time::Instant;

use qpos_core::affine::{affine_is_maximal, affine_is_q_positive, affine_pi};
use qpos_core::fitzpatrick::{conj_eval, g_phi_member, phi_build, repr_hull_member};
use qpos_core::hilbert::{
    closed_repr_member, g_phi_closed_member, midpoint_ball_check, phi_closed_eval, phi_conj_closed_eval, policy_box,
};
use qpos_core::lipschitz::{lipschitz_check, mcshane_extend_scalar, phi_graph_eval};
use qpos_core::maximality::{extension_continuum, ni_type_check, premax_certify, Classification, PremaxTarget};
use qpos_core::minimal::fund_ineq_check;
use qpos_core::numerics::grid::BoxGrid;
use qpos_core::space::{conv_w_hull_member, is_q_positive, pi_member};
use qpos_core::verdict::ext_f64_opt;
use qpos_core::{Exec, PointSet, QposError, Status, Vector, Verdict, Witness};
use serde::{Deserialize, Serialize};

use crate::scenario::{Loaded, Prepared, Query, SCHEMA_VERSION};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Report {
    pub schema_version: u32,
    pub environment: Environment,
    pub queries: Vec<Record>,
    pub summary: Summary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Environment {
    pub version: String,
    pub seed: u64,
    pub tolerance: f64,
    pub grid_half: f64,
    pub grid_pitch: f64,
    pub multistarts: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Record {
    pub index: usize,
    pub query: Query,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub status: Option<Status>,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "ext_f64_opt")]
    pub value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classification: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolution: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "ext_f64_opt")]
    pub measure: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matched: Option<bool>,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Summary {
    pub holds: usize,
    pub fails: usize,
    pub undecided: usize,
    pub values: usize,
    pub errors: usize,
    pub mismatches: usize,
}

impl Report {
    /// 2 on evaluation errors, 1 on an expectation mismatch, else 0.
    pub fn exit_code(&self) -> i32 {
        if self.summary.errors > 0 {
            2
        } else if self.summary.mismatches > 0 {
            1
        } else {
            0
        }
    }

    /// The report with timing fields zeroed, for reproducibility comparisons.
    pub fn without_timing(&self) -> Report {
        let mut r = self.clone();
        for q in &mut r.queries {
            q.wall_ms = 0.0;
        }
        r
    }
}

enum Outcome {
    Verdict(Verdict, Option<Classification>),
    Value(f64, Option<String>),
}

pub fn run(p: &Prepared, exec: Exec) -> Report {
    let sc = &p.scenario;
    let records = exec.map_range(sc.queries.len(), |i| record(p, i));
    let mut summary = Summary::default();
    for r in &records {
        match (r.status, r.error.is_some()) {
            (_, true) => summary.errors += 1,
            (Some(Status::Holds), _) => summary.holds += 1,
            (Some(Status::Fails), _) => summary.fails += 1,
            (Some(Status::Undecided), _) => summary.undecided += 1,
            (None, _) => summary.values += 1,
        }
        if r.matched == Some(false) {
            summary.mismatches += 1;
        }
    }
    Report {
        schema_version: SCHEMA_VERSION,
        environment: Environment {
            version: env!("CARGO_PKG_VERSION").into(),
            seed: sc.seed,
            tolerance: qpos_core::tol::eps(),
            grid_half: sc.grid.half,
            grid_pitch: sc.grid.pitch,
            multistarts: sc.grid.multistarts,
        },
        queries: records,
        summary,
    }
}

fn record(p: &Prepared, index: usize) -> Record {
    let q = &p.scenario.queries[index];
    let start = Instant::now();
    let out = evaluate(p, q);
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
    let mut r = Record {
        index,
        query: q.clone(),
        status: None,
        value: None,
        classification: None,
        witness: None,
        resolution: None,
        measure: None,
        note: None,
        error: None,
        matched: None,
        wall_ms,
    };
    match out {
        Ok(Outcome::Verdict(v, class)) => {
            r.status = Some(v.status);
            r.witness = v.witness;
            r.resolution = v.resolution;
            r.measure = v.measure;
            r.note = v.note;
            r.classification = class.map(|c| c.to_string());
            r.matched = q.expect.map(|e| e == v.status);
        }
        Ok(Outcome::Value(x, note)) => {
            r.value = Some(x);
            r.note = note;
        }
        Err(e) => r.error = Some(e.to_string()),
    }
    r
}

fn arg(v: &Option<Vec<f64>>, name: &str) -> qpos_core::Result<Vector> {
    v.as_deref().map(Vector::from_column_slice).ok_or_else(|| QposError::InvalidArgument(format!("missing '{name}'")))
}

fn grid(p: &Prepared, dim: usize) -> qpos_core::Result<BoxGrid> {
    let g = &p.scenario.grid;
    BoxGrid::cube(dim, g.half, g.pitch, g.multistarts)
}

fn evaluate(p: &Prepared, q: &Query) -> qpos_core::Result<Outcome> {
    let set = q.set.as_ref().and_then(|n| p.sets.get(n));
    let points = || -> qpos_core::Result<&PointSet> {
        match set {
            Some(Loaded::Points(s)) => Ok(s),
            Some(Loaded::Graph(g)) => Ok(g.point_set()),
            _ => Err(QposError::InvalidArgument("expected a point set".into())),
        }
    };
    let verdict = |v: Verdict| Ok(Outcome::Verdict(v, None));
    let value = |x: f64| Ok(Outcome::Value(x, None));
    let point = || arg(&q.point, "point");
    let other = || arg(&q.other, "other");
    match q.op.as_str() {
        "pairing" => value(p.space.pairing(&point()?, &other()?)?),
        "q_value" => value(p.space.q_value(&point()?)?),
        "is_q_positive" => verdict(is_q_positive(points()?)),
        "pi_member" => verdict(pi_member(points()?, &point()?)?),
        "conv_w_hull_member" => verdict(conv_w_hull_member(points()?, &point()?)?),
        "phi_eval" => value(phi_build(points()?).eval(&point()?)?),
        "conj_eval" => value(conj_eval(&phi_build(points()?), &point()?)?.value),
        "repr_hull_member" => verdict(repr_hull_member(points()?, &point()?)?),
        "g_phi_member" => verdict(g_phi_member(points()?, &point()?)?),
        "premax_certify" => {
            let bx = grid(p, p.space.dim())?;
            let r = match set {
                Some(Loaded::Affine(a)) => premax_certify(PremaxTarget::Affine(a), &bx)?,
                _ => premax_certify(PremaxTarget::Points(points()?), &bx)?,
            };
            let v = match r.classification {
                Classification::PremaximalVia202 => r.condition202.clone(),
                Classification::PremaximalViaAffinePi => Verdict::holds(),
                Classification::NotPremaximal => r.pi_positive.clone(),
                Classification::Undecided => Verdict::undecided(r.pitch),
            };
            Ok(Outcome::Verdict(v, Some(r.classification)))
        }
        "extension_continuum" => {
            let fam = extension_continuum(points()?, &point()?, &other()?, q.count.unwrap_or(101))?;
            verdict(Verdict::holds().with_measure(fam.scaling_error).with_note(format!(
                "{} members, q(x1 - x2) = {}",
                fam.lambdas.len(),
                fam.q_x1x2
            )))
        }
        "ni_type_check" => verdict(ni_type_check(points()?, &grid(p, p.space.dim())?)?.verdict),
        "fund_ineq_check" => {
            let alpha = q.alpha.ok_or_else(|| QposError::InvalidArgument("missing 'alpha'".into()))?;
            verdict(fund_ineq_check(&phi_build(points()?), &point()?, &other()?, alpha)?)
        }
        "affine_is_q_positive" | "affine_is_maximal" | "affine_pi_member" => {
            let Some(Loaded::Affine(a)) = set else {
                return Err(QposError::InvalidArgument("expected an affine set".into()));
            };
            match q.op.as_str() {
                "affine_is_q_positive" => verdict(affine_is_q_positive(a)?),
                "affine_is_maximal" => verdict(affine_is_maximal(a)?),
                _ => verdict(affine_pi(a)?.member(&point()?)?),
            }
        }
        "lipschitz_check" | "phi_graph_eval" | "mcshane_extend_scalar" => {
            let Some(Loaded::Graph(g)) = set else {
                return Err(QposError::InvalidArgument("expected a graph set".into()));
            };
            match q.op.as_str() {
                "lipschitz_check" => verdict(lipschitz_check(g)?),
                "phi_graph_eval" => value(phi_graph_eval(g, &point()?, &other()?)?),
                _ => value(mcshane_extend_scalar(g, &point()?)?),
            }
        }
        op => {
            let Some(Loaded::Descriptor(a)) = set else {
                return Err(QposError::InvalidArgument(format!("unknown operation '{op}'")));
            };
            let g = &p.scenario.grid;
            let bx = || policy_box(a, &point()?, g.pitch, g.multistarts);
            match op {
                "phi_closed_eval" => value(phi_closed_eval(a, &point()?)?),
                "phi_conj_closed_eval" => {
                    let s = phi_conj_closed_eval(a, &point()?, &bx()?)?;
                    Ok(Outcome::Value(s.value, Some(s.label().into())))
                }
                "g_phi_closed_member" => verdict(g_phi_closed_member(a, &point()?, &bx()?)?),
                "closed_repr_member" => verdict(closed_repr_member(a, &point()?, &bx()?)?),
                "midpoint_ball_check" => verdict(midpoint_ball_check(a, &point()?, &other()?)?),
                _ => Err(QposError::InvalidArgument(format!("unknown operation '{op}'"))),
            }
        }
    }
}
