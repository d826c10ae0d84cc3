use serde::Serialize;
use serde_json::{json, Value};

use bstone_core::exact::{fmt_q, GaussQ};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Verified,
    Refuted,
    Error,
}

impl Status {
    pub fn exit_code(self) -> u8 {
        match self {
            Status::Verified => 0,
            Status::Refuted => 1,
            Status::Error => 2,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub command: String,
    pub status: Status,
    pub witnesses: Vec<Value>,
    pub artifacts: Value,
    /// Wall-clock milliseconds, only with `--timing`.
    pub timing: Option<u64>,
}

/// What a command found, before it is wrapped into a report.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub witnesses: Vec<Value>,
    pub artifacts: Value,
}

impl Outcome {
    pub fn verified(artifacts: Value) -> Self {
        Outcome {
            witnesses: Vec::new(),
            artifacts,
        }
    }

    pub fn refuted(witness: Value, artifacts: Value) -> Self {
        Outcome {
            witnesses: vec![witness],
            artifacts,
        }
    }

    pub fn status(&self) -> Status {
        if self.witnesses.is_empty() {
            Status::Verified
        } else {
            Status::Refuted
        }
    }
}

/// Invalid input; reported with exit code 2.
#[derive(Debug, Clone)]
pub struct InputError(pub String);

impl<E: std::fmt::Display> From<E> for InputError {
    fn from(e: E) -> Self {
        InputError(e.to_string())
    }
}

pub fn gauss_json(z: &GaussQ) -> Value {
    json!({ "re": fmt_q(&z.re), "im": fmt_q(&z.im) })
}
