use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::CheckResult;
use crate::error::{GeomError, Result};

/// Numerical settings a report was produced with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig {
    pub fd_step: f64,
    pub fd_order: usize,
    pub seed: u64,
    pub samples: usize,
    pub curvature_tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub scenario_id: String,
    pub parameters: BTreeMap<String, serde_json::Value>,
    pub checks: Vec<CheckResult>,
    pub overall_passed: bool,
    pub timestamp: String,
    pub engine_config: EngineConfig,
}

impl VerificationReport {
    /// `overall_passed` is the conjunction of the checks (false when empty).
    pub fn new(
        scenario_id: impl Into<String>,
        parameters: BTreeMap<String, serde_json::Value>,
        checks: Vec<CheckResult>,
        engine_config: EngineConfig,
    ) -> Self {
        let overall_passed = !checks.is_empty() && checks.iter().all(|c| c.passed);
        Self {
            scenario_id: scenario_id.into(),
            parameters,
            checks,
            overall_passed,
            timestamp: report_timestamp(),
            engine_config,
        }
    }

    pub fn check(&self, id: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.check_id == id)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| GeomError::Parse { line: 0, message: e.to_string() })
    }

    /// Parses a report and re-checks its invariants.
    pub fn from_json(text: &str) -> Result<Self> {
        let r: Self = serde_json::from_str(text).map_err(|e| GeomError::Parse {
            line: e.line(),
            message: e.to_string(),
        })?;
        for c in &r.checks {
            if c.passed != (c.max_residual <= c.tolerance && c.samples_used > 0) {
                return Err(GeomError::Parse {
                    line: 0,
                    message: format!("check {} has inconsistent pass flag", c.check_id),
                });
            }
        }
        let all = !r.checks.is_empty() && r.checks.iter().all(|c| c.passed);
        if all != r.overall_passed {
            return Err(GeomError::Parse { line: 0, message: "inconsistent overall_passed".into() });
        }
        Ok(r)
    }
}

/// `SOURCE_DATE_EPOCH` when set, else the Unix epoch, so reports are
/// reproducible byte for byte.
fn report_timestamp() -> String {
    let secs = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.trim().parse::<i64>().ok())
        .unwrap_or(0);
    chrono::DateTime::from_timestamp(secs, 0)
        .unwrap_or_default()
        .to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}
