use std::path::PathBuf;

use entropic_map::ext_f64;
use entropic_map::{EmFit, FitResult, GridResult, SimplexVector, TraceRecord};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Everything one invocation produced. Serialized as pretty JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub config: serde_json::Value,
    pub result: Payload,
    pub exit_status: i32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_clock_ms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Payload {
    Fit(FitReport),
    Oracle(OracleReport),
    Compare(CompareReport),
    Plsi(EmFit),
    Gen(GenReport),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub theta: SimplexVector,
    pub alpha: SimplexVector,
    pub iterations: usize,
    pub converged: bool,
    pub final_nu: f64,
    pub final_theta_change: f64,
    #[serde(with = "ext_f64")]
    pub log_joint: f64,
    #[serde(with = "ext_f64")]
    pub big_l: f64,
    #[serde(with = "ext_f64")]
    pub approximation_gap: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<TraceRecord>>,
}

impl From<FitResult> for FitReport {
    fn from(fit: FitResult) -> Self {
        Self {
            approximation_gap: fit.approximation_gap(),
            theta: fit.theta,
            alpha: fit.alpha,
            iterations: fit.iterations,
            converged: fit.converged,
            final_nu: fit.final_nu,
            final_theta_change: fit.final_theta_change,
            log_joint: fit.log_joint_value,
            big_l: fit.big_l_value,
            trace: fit.trace,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub theta: SimplexVector,
    #[serde(with = "ext_f64")]
    pub log_joint: f64,
    pub resolution: f64,
    pub grid_points: u64,
}

impl OracleReport {
    pub fn new(result: GridResult, resolution: f64) -> Self {
        Self {
            theta: result.theta,
            log_joint: result.value,
            resolution,
            grid_points: result.grid_points,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub a: f64,
    pub solver_theta: SimplexVector,
    pub oracle_theta: SimplexVector,
    #[serde(with = "ext_f64")]
    pub solver_log_joint: f64,
    #[serde(with = "ext_f64")]
    pub oracle_log_joint: f64,
    /// Oracle objective minus solver objective; positive means the oracle found a better point.
    #[serde(with = "ext_f64")]
    pub objective_gap: f64,
    /// L-infinity distance, minimized over permutations of categories with equal counts.
    pub theta_distance: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Set when |objective_gap| exceeds `gap_threshold`.
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub resolution: f64,
    pub gap_threshold: f64,
    pub grid_points: u64,
    pub rows: Vec<CompareRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenReport {
    pub matrix_path: PathBuf,
    pub truth_path: PathBuf,
    pub features: usize,
    pub columns: usize,
    pub components: usize,
    pub total_count: f64,
}

impl RunReport {
    pub fn to_json(&self) -> Result<String, CliError> {
        let mut text = serde_json::to_string_pretty(self)
            .map_err(|e| CliError::Input(format!("cannot serialize report: {e}")))?;
        text.push('\n');
        Ok(text)
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Input(format!("malformed report: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use entropic_map::{fit_map, CountVector, SolverConfig};

    #[test]
    fn fit_report_round_trips_with_trace_and_sentinels() {
        let counts = CountVector::new(vec![6.0, 4.0, 0.0]).unwrap();
        let config = SolverConfig {
            record_trace: true,
            ..SolverConfig::with_a(2.5)
        };
        let mut fit: FitReport = fit_map(&counts, &config).unwrap().into();
        fit.log_joint = f64::NEG_INFINITY;
        let report = RunReport {
            command: "fit".into(),
            config: serde_json::to_value(&config).unwrap(),
            result: Payload::Fit(fit),
            exit_status: 0,
            wall_clock_ms: Some(1.25),
        };
        let text = report.to_json().unwrap();
        assert!(text.contains("\"-inf\""));
        assert_eq!(RunReport::from_json(&text).unwrap(), report);
    }
}
