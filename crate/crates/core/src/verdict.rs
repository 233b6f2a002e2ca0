use serde::{Deserialize, Serialize};

use crate::Vector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Status {
    Holds,
    Fails,
    Undecided,
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Status::Holds => "HOLDS",
            Status::Fails => "FAILS",
            Status::Undecided => "UNDECIDED",
        })
    }
}

/// Evidence attached to a failing verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    Point { point: Vec<f64> },
    Pair { first: Vec<f64>, second: Vec<f64> },
}

impl Witness {
    pub fn point(v: &Vector) -> Self {
        Witness::Point { point: v.iter().copied().collect() }
    }

    pub fn pair(a: &Vector, b: &Vector) -> Self {
        Witness::Pair { first: a.iter().copied().collect(), second: b.iter().copied().collect() }
    }

    pub fn as_point(&self) -> Option<Vector> {
        match self {
            Witness::Point { point } => Some(Vector::from_column_slice(point)),
            Witness::Pair { .. } => None,
        }
    }

    pub fn as_pair(&self) -> Option<(Vector, Vector)> {
        match self {
            Witness::Pair { first, second } => {
                Some((Vector::from_column_slice(first), Vector::from_column_slice(second)))
            }
            Witness::Point { .. } => None,
        }
    }
}

/// Three-valued answer of every decision routine.
///
/// `resolution` is set when the answer came from a grid search (a grid
/// certified `Holds`, or an `Undecided`). `measure` carries the quantity the
/// decision was made on (a gap, a maximum, a residual) when there is one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolution: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "ext_f64_opt")]
    pub measure: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Verdict {
    pub fn holds() -> Self {
        Verdict { status: Status::Holds, witness: None, resolution: None, measure: None, note: None }
    }

    pub fn fails(witness: Witness) -> Self {
        Verdict { status: Status::Fails, witness: Some(witness), resolution: None, measure: None, note: None }
    }

    pub fn undecided(resolution: f64) -> Self {
        Verdict { status: Status::Undecided, witness: None, resolution: Some(resolution), measure: None, note: None }
    }

    /// A `Holds` obtained by grid search; never a proof.
    pub fn grid_certified(resolution: f64) -> Self {
        Verdict { resolution: Some(resolution), ..Verdict::holds() }
    }

    pub fn with_measure(mut self, m: f64) -> Self {
        self.measure = Some(m);
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn with_resolution(mut self, r: f64) -> Self {
        self.resolution = Some(r);
        self
    }

    pub fn holds_p(&self) -> bool {
        self.status == Status::Holds
    }

    pub fn fails_p(&self) -> bool {
        self.status == Status::Fails
    }

    pub fn is_grid_certified(&self) -> bool {
        self.status == Status::Holds && self.resolution.is_some()
    }
}

/// JSON has no infinities; encode them as strings so reports stay valid.
pub mod ext_f64 {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("NaN")
        } else if *v > 0.0 {
            s.serialize_str("+inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    #[derive(serde::Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Str(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(x) => Ok(x),
            Repr::Str(s) => match s.as_str() {
                "+inf" | "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "NaN" => Ok(f64::NAN),
                other => Err(serde::de::Error::custom(format!("bad number {other:?}"))),
            },
        }
    }
}

pub mod ext_f64_opt {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(x) => super::ext_f64::serialize(x, s),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        #[derive(serde::Deserialize)]
        struct W(#[serde(with = "super::ext_f64")] f64);
        Ok(Option::<W>::deserialize(d)?.map(|w| w.0))
    }
}
