//! Pass/fail records shared by the library checks and the command line.

use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use crate::sampling::ZeroTest;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    Pass,
    Fail,
}

impl Status {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

/// Named coordinates of a sample point, serialized as an ordered JSON object.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Witness(pub Vec<(String, f64)>);

impl Serialize for Witness {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            m.serialize_entry(k, v)?;
        }
        m.end()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    /// Largest absolute residual observed.
    pub max_residual: f64,
    /// Quantity compared against `tolerance` (term-relative for sampled zero tests).
    pub max_scaled: f64,
    pub tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Check {
    pub fn from_zero_test(name: impl Into<String>, z: &ZeroTest, tol: f64) -> Self {
        Self {
            name: name.into(),
            status: Status::from_bool(z.passed),
            max_residual: z.max_abs,
            max_scaled: z.max_ratio,
            tolerance: tol,
            witness: (!z.witness.is_empty()).then(|| Witness(z.witness.clone())),
            note: z.first_error.clone(),
        }
    }

    /// Passes iff `value <= tol`.
    pub fn bound(name: impl Into<String>, value: f64, tol: f64) -> Self {
        Self {
            name: name.into(),
            status: Status::from_bool(value <= tol),
            max_residual: value,
            max_scaled: value,
            tolerance: tol,
            witness: None,
            note: None,
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn with_status(mut self, ok: bool) -> Self {
        self.status = Status::from_bool(ok);
        self
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}
