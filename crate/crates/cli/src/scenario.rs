//! Scenario files: a space, named sets, a grid policy and a query list.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use qpos_core::affine::AffineSet;
use qpos_core::hilbert::ClosedSetDescriptor;
use qpos_core::lipschitz::{GraphSet, LipschitzSpace};
use qpos_core::{Matrix, PointSet, SsdSpace, Status, Vector};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema_version: u32,
    pub space: SpaceSpec,
    #[serde(default)]
    pub sets: BTreeMap<String, SetSpec>,
    #[serde(default)]
    pub grid: GridPolicy,
    #[serde(default)]
    pub seed: u64,
    pub queries: Vec<Query>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpaceSpec {
    Monotone { k: usize },
    Hilbert { k: usize },
    Lipschitz { lipschitz: f64, n1: usize, n2: usize },
    Matrix { s: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum SetSpec {
    /// Rows given inline or as a headerless CSV path, one point per row.
    Points {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        points: Option<Vec<Vec<f64>>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        csv: Option<PathBuf>,
    },
    Affine {
        anchor: Vec<f64>,
        basis: Vec<Vec<f64>>,
    },
    /// Rows `x1 | x2` given inline as two arrays or as one CSV with
    /// `n1 + n2` columns.
    Graph {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        domain: Option<Vec<Vec<f64>>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        values: Option<Vec<Vec<f64>>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        csv: Option<PathBuf>,
    },
    Descriptor {
        descriptor: ClosedSetDescriptor,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridPolicy {
    pub half: f64,
    pub pitch: f64,
    pub multistarts: usize,
}

impl Default for GridPolicy {
    fn default() -> Self {
        GridPolicy { half: 2.0, pitch: 0.1, multistarts: 2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Query {
    pub op: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub set: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub other: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect: Option<Status>,
}

/// Operation name and the set kind it needs (`None` when it takes no set).
pub const OPERATIONS: &[(&str, Option<Needs>)] = &[
    ("pairing", None),
    ("q_value", None),
    ("is_q_positive", Some(Needs::Points)),
    ("pi_member", Some(Needs::Points)),
    ("conv_w_hull_member", Some(Needs::Points)),
    ("phi_eval", Some(Needs::Points)),
    ("conj_eval", Some(Needs::Points)),
    ("repr_hull_member", Some(Needs::Points)),
    ("g_phi_member", Some(Needs::Points)),
    ("premax_certify", Some(Needs::PointsOrAffine)),
    ("extension_continuum", Some(Needs::Points)),
    ("ni_type_check", Some(Needs::Points)),
    ("fund_ineq_check", Some(Needs::Points)),
    ("affine_is_q_positive", Some(Needs::Affine)),
    ("affine_is_maximal", Some(Needs::Affine)),
    ("affine_pi_member", Some(Needs::Affine)),
    ("lipschitz_check", Some(Needs::Graph)),
    ("phi_graph_eval", Some(Needs::Graph)),
    ("mcshane_extend_scalar", Some(Needs::Graph)),
    ("phi_closed_eval", Some(Needs::Descriptor)),
    ("phi_conj_closed_eval", Some(Needs::Descriptor)),
    ("g_phi_closed_member", Some(Needs::Descriptor)),
    ("closed_repr_member", Some(Needs::Descriptor)),
    ("midpoint_ball_check", Some(Needs::Descriptor)),
];

/// Operations that return a number rather than a verdict.
pub const VALUE_OPS: &[&str] = &[
    "pairing",
    "q_value",
    "phi_eval",
    "conj_eval",
    "phi_graph_eval",
    "mcshane_extend_scalar",
    "phi_closed_eval",
    "phi_conj_closed_eval",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Needs {
    Points,
    Affine,
    PointsOrAffine,
    Graph,
    Descriptor,
}

/// A declared set after loading.
#[derive(Debug, Clone)]
pub enum Loaded {
    Points(PointSet),
    Affine(AffineSet),
    Graph(GraphSet),
    Descriptor(ClosedSetDescriptor),
}

impl Loaded {
    fn satisfies(&self, needs: Needs) -> bool {
        matches!(
            (self, needs),
            (Loaded::Points(_), Needs::Points | Needs::PointsOrAffine)
                | (Loaded::Graph(_), Needs::Points)
                | (Loaded::Affine(_), Needs::Affine | Needs::PointsOrAffine)
                | (Loaded::Graph(_), Needs::Graph)
                | (Loaded::Descriptor(_), Needs::Descriptor)
        )
    }
}

/// Everything a query needs, resolved and validated.
#[derive(Debug)]
pub struct Prepared {
    pub scenario: Scenario,
    pub space: Arc<SsdSpace>,
    pub sets: BTreeMap<String, Loaded>,
}

#[derive(Debug)]
pub struct SchemaError(pub String);

impl std::fmt::Display for SchemaError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for SchemaError {}

fn err<T>(msg: impl Into<String>) -> Result<T, SchemaError> {
    Err(SchemaError(msg.into()))
}

fn core<T>(r: qpos_core::Result<T>, what: &str) -> Result<T, SchemaError> {
    r.map_err(|e| SchemaError(format!("{what}: {e}")))
}

fn rows(v: &[Vec<f64>]) -> Vec<Vector> {
    v.iter().map(|r| Vector::from_column_slice(r)).collect()
}

fn read_csv(path: &Path) -> Result<Vec<Vec<f64>>, SchemaError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| SchemaError(format!("{}: {e}", path.display())))?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| SchemaError(format!("{}: {e}", path.display())))?;
        let row = rec
            .iter()
            .map(|f| f.parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| SchemaError(format!("{}: {e}", path.display())))?;
        out.push(row);
    }
    Ok(out)
}

pub fn parse(text: &str) -> Result<Scenario, SchemaError> {
    serde_json::from_str(text).map_err(|e| SchemaError(format!("scenario: {e}")))
}

pub fn load(path: &Path) -> Result<Prepared, SchemaError> {
    let text = std::fs::read_to_string(path).map_err(|e| SchemaError(format!("{}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new("."));
    prepare(parse(&text)?, base)
}

/// Validates a parsed scenario; relative CSV paths resolve against `base`.
pub fn prepare(scenario: Scenario, base: &Path) -> Result<Prepared, SchemaError> {
    if scenario.schema_version != SCHEMA_VERSION {
        return err(format!("schema_version {} unsupported (expected {SCHEMA_VERSION})", scenario.schema_version));
    }
    let g = &scenario.grid;
    if !(g.half > 0.0 && g.pitch > 0.0 && g.half.is_finite() && g.pitch.is_finite()) {
        return err("grid: half and pitch must be positive");
    }
    let (space, lipschitz) = match &scenario.space {
        SpaceSpec::Monotone { k } => (core(SsdSpace::monotone(*k), "space")?, None),
        SpaceSpec::Hilbert { k } => (core(SsdSpace::hilbert(*k), "space")?, None),
        SpaceSpec::Lipschitz { lipschitz, n1, n2 } => {
            let l = core(LipschitzSpace::new(*lipschitz, *n1, *n2), "space")?;
            ((**l.space()).clone(), Some(l))
        }
        SpaceSpec::Matrix { s } => {
            let n = s.len();
            if n == 0 || s.iter().any(|r| r.len() != n) {
                return err("space: matrix must be square and non-empty");
            }
            (core(SsdSpace::new(Matrix::from_fn(n, n, |i, j| s[i][j])), "space")?, None)
        }
    };
    let space = Arc::new(space);
    let mut sets = BTreeMap::new();
    for (name, spec) in &scenario.sets {
        let what = format!("set '{name}'");
        let loaded = match spec {
            SetSpec::Points { points, csv } => {
                let data = match (points, csv) {
                    (Some(p), None) => p.clone(),
                    (None, Some(c)) => read_csv(&base.join(c))?,
                    _ => return err(format!("{what}: give exactly one of points, csv")),
                };
                check_dims(&data, space.dim(), &what)?;
                Loaded::Points(core(PointSet::new(space.clone(), rows(&data)), &what)?)
            }
            SetSpec::Affine { anchor, basis } => {
                check_dims(std::slice::from_ref(anchor), space.dim(), &what)?;
                check_dims(basis, space.dim(), &what)?;
                let n = space.dim();
                let v = Matrix::from_fn(n, basis.len(), |i, j| basis[j][i]);
                Loaded::Affine(core(AffineSet::new(space.clone(), Vector::from_column_slice(anchor), v), &what)?)
            }
            SetSpec::Graph { domain, values, csv } => {
                let Some(l) = &lipschitz else {
                    return err(format!("{what}: graph sets need a lipschitz space"));
                };
                let (d, v) = match (domain, values, csv) {
                    (Some(d), Some(v), None) => (d.clone(), v.clone()),
                    (None, None, Some(c)) => {
                        let data = read_csv(&base.join(c))?;
                        check_dims(&data, l.n1() + l.n2(), &what)?;
                        data.iter().map(|r| (r[..l.n1()].to_vec(), r[l.n1()..].to_vec())).unzip()
                    }
                    _ => return err(format!("{what}: give domain and values, or csv")),
                };
                check_dims(&d, l.n1(), &what)?;
                check_dims(&v, l.n2(), &what)?;
                Loaded::Graph(core(GraphSet::new(l, rows(&d), rows(&v)), &what)?)
            }
            SetSpec::Descriptor { descriptor } => {
                core(descriptor.validate(), &what)?;
                Loaded::Descriptor(descriptor.clone())
            }
        };
        sets.insert(name.clone(), loaded);
    }
    for (i, q) in scenario.queries.iter().enumerate() {
        let Some((_, needs)) = OPERATIONS.iter().find(|(op, _)| *op == q.op) else {
            return err(format!("query {i}: unknown operation '{}'", q.op));
        };
        if q.expect.is_some() && VALUE_OPS.contains(&q.op.as_str()) {
            return err(format!("query {i}: '{}' returns a value and takes no expectation", q.op));
        }
        match (needs, &q.set) {
            (None, _) => {}
            (Some(_), None) => return err(format!("query {i}: '{}' needs a set", q.op)),
            (Some(n), Some(name)) => match sets.get(name) {
                None => return err(format!("query {i}: undeclared set '{name}'")),
                Some(s) if !s.satisfies(*n) => {
                    return err(format!("query {i}: set '{name}' has the wrong kind for '{}'", q.op))
                }
                Some(_) => {}
            },
        }
    }
    Ok(Prepared { scenario, space, sets })
}

fn check_dims(rows: &[Vec<f64>], n: usize, what: &str) -> Result<(), SchemaError> {
    match rows.iter().find(|r| r.len() != n) {
        Some(r) => err(format!("{what}: expected length {n}, got {}", r.len())),
        None => Ok(()),
    }
}
