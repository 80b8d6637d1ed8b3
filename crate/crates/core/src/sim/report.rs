use serde::{Deserialize, Serialize};

use crate::planner::Mode;

use super::log::{Granularity, TrajectoryLog};
use super::SimError;

/// Tracking-error summary of one run. `improvement_pct` is the RMSE
/// reduction against a baseline run, when one was supplied.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub rmse_m: f64,
    pub max_error_m: f64,
    pub improvement_pct: Option<f64>,
}

/// Percentage reductions of both metrics against a baseline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Improvement {
    pub rmse_pct: f64,
    pub max_error_pct: f64,
}

/// `100 (baseline - value) / baseline`.
pub fn improvement_pct(baseline: f64, value: f64) -> f64 {
    100.0 * (baseline - value) / baseline
}

impl ErrorReport {
    pub fn from_errors(errors: impl IntoIterator<Item = f64>) -> Option<Self> {
        let (mut n, mut sum_sq, mut max) = (0usize, 0.0, 0.0f64);
        for e in errors {
            n += 1;
            sum_sq += e * e;
            max = max.max(e);
        }
        (n > 0).then(|| Self { rmse_m: (sum_sq / n as f64).sqrt(), max_error_m: max, improvement_pct: None })
    }

    pub fn improvement_over(&self, baseline: &ErrorReport) -> Improvement {
        Improvement {
            rmse_pct: improvement_pct(baseline.rmse_m, self.rmse_m),
            max_error_pct: improvement_pct(baseline.max_error_m, self.max_error_m),
        }
    }

    pub fn with_baseline(self, baseline: &ErrorReport) -> Self {
        Self { improvement_pct: Some(improvement_pct(baseline.rmse_m, self.rmse_m)), ..self }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("plain struct serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, SimError> {
        serde_json::from_str(text).map_err(|e| SimError::Format(e.to_string()))
    }
}

/// Errors of every record at `granularity`, optionally restricted to one
/// mode.
pub fn compute_errors_in(
    log: &TrajectoryLog,
    granularity: Granularity,
    mode: Option<Mode>,
) -> Result<ErrorReport, SimError> {
    let errors = log
        .iter(granularity)
        .filter(|r| mode.is_none_or(|m| r.mode == m))
        .map(|r| r.error());
    ErrorReport::from_errors(errors).ok_or(SimError::EmptyLog)
}

pub fn compute_errors(log: &TrajectoryLog, granularity: Granularity) -> Result<ErrorReport, SimError> {
    compute_errors_in(log, granularity, None)
}
