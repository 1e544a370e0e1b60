//! Check records and the versioned report emitted by the verification suites.

use serde::{Deserialize, Serialize};

/// Bumped whenever a field is added, removed or changes meaning.
pub const SCHEMA_VERSION: &str = "qgeo-report/1";
pub const ENGINE_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    /// Pass when `residual < tolerance`.
    Below,
    /// Pass when `residual > tolerance` (sharpness and non-degeneracy checks).
    Above,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub suite: String,
    pub name: String,
    /// Short label of the identity or theorem being exercised.
    pub topic: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub values: Vec<f64>,
    /// `None` when the check could not be evaluated or the residual is not finite.
    pub residual: Option<f64>,
    pub tolerance: f64,
    pub bound: Bound,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Check {
    pub fn below(suite: &str, name: impl Into<String>, topic: &str, residual: f64, tolerance: f64) -> Self {
        Check {
            suite: suite.to_string(),
            name: name.into(),
            topic: topic.to_string(),
            values: Vec::new(),
            residual: residual.is_finite().then_some(residual),
            tolerance,
            bound: Bound::Below,
            pass: residual < tolerance,
            note: None,
        }
    }

    pub fn above(suite: &str, name: impl Into<String>, topic: &str, residual: f64, tolerance: f64) -> Self {
        Check {
            bound: Bound::Above,
            pass: residual > tolerance,
            ..Check::below(suite, name, topic, residual, tolerance)
        }
    }

    /// A check that could not be evaluated.
    pub fn error(suite: &str, name: impl Into<String>, topic: &str, err: impl std::fmt::Display) -> Self {
        Check { pass: false, note: Some(err.to_string()), ..Check::below(suite, name, topic, f64::NAN, 0.0) }
    }

    pub fn with_values(mut self, values: Vec<f64>) -> Self {
        self.values = values;
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    /// Re-evaluate `pass` under a different tolerance.
    pub fn retolerate(&mut self, tolerance: f64) {
        self.tolerance = tolerance;
        self.pass = match (self.bound, self.residual) {
            (Bound::Below, Some(r)) => r < tolerance,
            (Bound::Above, Some(r)) => r > tolerance,
            (_, None) => false,
        };
    }
}

/// A computed value reported without a pass/fail verdict.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantityRecord {
    pub scene: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub point: Vec<f64>,
    pub name: String,
    pub value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<i32>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub engine_version: String,
    pub command: String,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub quantities: Vec<QuantityRecord>,
    pub checks: Vec<Check>,
    pub summary: Summary,
}

impl Report {
    pub fn new(command: impl Into<String>, seed: u64, checks: Vec<Check>) -> Self {
        let passed = checks.iter().filter(|c| c.pass).count();
        let summary = Summary { total: checks.len(), passed, failed: checks.len() - passed };
        Report {
            schema: SCHEMA_VERSION.to_string(),
            engine_version: ENGINE_VERSION.to_string(),
            command: command.into(),
            seed,
            quantities: Vec::new(),
            checks,
            summary,
        }
    }

    pub fn with_quantities(mut self, quantities: Vec<QuantityRecord>) -> Self {
        self.quantities = quantities;
        self
    }

    pub fn all_pass(&self) -> bool {
        self.summary.failed == 0
    }
}
