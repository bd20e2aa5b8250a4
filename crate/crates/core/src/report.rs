//! Verification reports shared by every checker.

use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Outcome of one mechanically checked claim.
///
/// Serialized shape: `{claim_id, pass, margin, worst_point, grid_spec}`,
/// plus `skipped`/`note` only when they carry information.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub claim_id: String,
    pub pass: bool,
    /// Worst-case slack of the claim; negative means violated.
    pub margin: f64,
    pub worst_point: Value,
    pub grid_spec: Value,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub skipped: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl VerificationReport {
    pub fn new(claim_id: impl Into<String>, pass: bool, margin: f64) -> Self {
        Self {
            claim_id: claim_id.into(),
            pass,
            margin: sanitize(margin),
            worst_point: Value::Null,
            grid_spec: Value::Null,
            skipped: false,
            note: None,
        }
    }

    /// A claim whose preconditions do not hold on this instance.
    /// Not applicable is not a failure.
    pub fn not_applicable(claim_id: impl Into<String>, reason: impl Into<String>) -> Self {
        Self {
            skipped: true,
            note: Some(reason.into()),
            ..Self::new(claim_id, true, 0.0)
        }
    }

    pub fn with_worst_point(mut self, worst_point: Value) -> Self {
        self.worst_point = worst_point;
        self
    }

    pub fn with_grid_spec(mut self, grid_spec: Value) -> Self {
        self.grid_spec = grid_spec;
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

// JSON has no infinities; clamp so reports stay serializable.
fn sanitize(x: f64) -> f64 {
    if x.is_nan() {
        f64::MIN
    } else {
        x.clamp(f64::MIN, f64::MAX)
    }
}

/// Merge partial reports for the same claim, keeping the worst margin.
pub fn merge_worst(
    parts: impl IntoIterator<Item = VerificationReport>,
) -> Option<VerificationReport> {
    parts.into_iter().reduce(|a, b| {
        let pass = a.pass && b.pass;
        let mut worst = if b.margin < a.margin { b } else { a };
        worst.pass = pass;
        worst
    })
}
