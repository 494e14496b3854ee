//! The JSON run report shared by every command.
//!
//! Serialization is canonical: fields appear in declaration order and floats
//! use the shortest round-trip form, so two reports of the same run are
//! byte-identical once `wall_time_secs` is cleared. Unknown fields are
//! rejected when parsing.

use std::collections::BTreeMap;
use std::path::Path;

use fairprobe_core::retrain::RetrainReport;
use fairprobe_core::{EstimationResult, Finding, SearchConfig, TestSuite};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const REPORT_FORMAT: &str = "fairprobe-report-v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunReport {
    pub format_version: String,
    /// `audit`, `estimate`, `retrain` or `compare`.
    pub command: String,
    pub config: ConfigEcho,
    pub counters: Option<Counters>,
    pub phases: Option<Phases>,
    pub termination: Option<String>,
    pub wall_time_secs: f64,
    /// The first findings of the run, at most `config.findings_cap` of them.
    pub findings_sample: Vec<FindingRecord>,
    /// Every distinct discriminatory input, in discovery order.
    pub unique_inputs: Vec<Vec<i64>>,
    pub estimation: Option<EstimationRecord>,
    pub retrain: Option<RetrainRecord>,
    pub comparison: Option<Vec<ComparisonRow>>,
    /// Set when the run stopped on a model or IO failure; the rest of the
    /// report then describes the partial run.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigEcho {
    pub domain_digest: String,
    pub model_digest: String,
    pub model_ref: String,
    pub findings_cap: usize,
    pub search: Option<SearchEcho>,
    pub estimation: Option<EstimationEcho>,
    pub retrain: Option<RetrainEcho>,
    pub compare: Option<CompareEcho>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchEcho {
    pub strategy: String,
    pub gamma: f64,
    pub global_trials: u64,
    pub local_trials: u64,
    pub delta_v: f64,
    pub delta_pr: f64,
    pub seed: u64,
    pub max_findings: Option<u64>,
    pub max_inputs: Option<u64>,
    pub time_budget_secs: Option<f64>,
}

impl From<&SearchConfig> for SearchEcho {
    fn from(c: &SearchConfig) -> Self {
        Self {
            strategy: c.strategy.as_str().to_string(),
            gamma: c.discrimination.gamma(),
            global_trials: c.global_trials,
            local_trials: c.local_trials,
            delta_v: c.delta_v,
            delta_pr: c.delta_pr,
            seed: c.seed,
            max_findings: c.max_findings,
            max_inputs: c.max_inputs,
            time_budget_secs: c.time_budget.map(|d| d.as_secs_f64()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimationEcho {
    pub gamma: f64,
    pub samples_per_trial: u64,
    pub trials: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RetrainEcho {
    pub model_kind: String,
    pub hyperparams: BTreeMap<String, String>,
    pub csv_digest: String,
    pub label_column: String,
    pub findings_digest: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareEcho {
    pub seeds: Vec<u64>,
    /// Generated inputs per strategy and seed.
    pub budget: u64,
    pub gamma: f64,
    pub global_trials: u64,
    pub local_trials: u64,
    pub delta_v: f64,
    pub delta_pr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Counters {
    pub inputs_generated: u64,
    pub discriminatory_count: u64,
    pub unique_discriminatory: u64,
    /// `100 * discriminatory_count / inputs_generated`; absent when nothing
    /// was generated.
    pub percent_discriminatory: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseCount {
    pub inputs: u64,
    pub findings: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Phases {
    pub global: PhaseCount,
    pub local: PhaseCount,
    pub baseline: PhaseCount,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FindingRecord {
    pub input: Vec<i64>,
    pub witness: Vec<i64>,
    pub label_input: i64,
    pub label_witness: i64,
    pub origin: String,
    pub step: u64,
}

impl From<&Finding> for FindingRecord {
    fn from(f: &Finding) -> Self {
        Self {
            input: f.input.values().to_vec(),
            witness: f.witness.values().to_vec(),
            label_input: f.label_input.0,
            label_witness: f.label_witness.0,
            origin: f.origin.as_str().to_string(),
            step: f.step,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimationRecord {
    pub point_estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub trials: u64,
    pub samples_per_trial: u64,
    pub per_trial: Vec<f64>,
    pub running_mean: Vec<f64>,
}

impl From<&EstimationResult> for EstimationRecord {
    fn from(r: &EstimationResult) -> Self {
        Self {
            point_estimate: r.point_estimate,
            ci_low: r.ci_low,
            ci_high: r.ci_high,
            trials: r.trials,
            samples_per_trial: r.samples_per_trial,
            per_trial: r.per_trial.clone(),
            running_mean: r.running_mean(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IterationRecord {
    pub iteration: u32,
    pub percent: f64,
    pub rows_added: u64,
    pub estimate_before: f64,
    pub estimate_after: f64,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RetrainRecord {
    pub iterations: Vec<IterationRecord>,
    pub initial_estimate: f64,
    pub final_estimate: f64,
    pub total_added: u64,
    pub percent_added: f64,
    pub improvement_percent: f64,
    pub final_model_path: String,
    pub final_model_digest: String,
}

impl RetrainRecord {
    pub fn new(r: &RetrainReport, final_model_path: String, final_model_digest: String) -> Self {
        Self {
            iterations: r
                .iterations
                .iter()
                .map(|it| IterationRecord {
                    iteration: it.iteration,
                    percent: it.percent,
                    rows_added: it.rows_added,
                    estimate_before: it.estimate_before,
                    estimate_after: it.estimate_after,
                    accepted: it.accepted,
                })
                .collect(),
            initial_estimate: r.initial_estimate,
            final_estimate: r.final_estimate,
            total_added: r.total_added,
            percent_added: r.percent_added,
            improvement_percent: r.improvement_percent,
            final_model_path,
            final_model_digest,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComparisonCell {
    pub seed: u64,
    pub inputs_generated: u64,
    pub discriminatory_count: u64,
    pub percent_discriminatory: Option<f64>,
    pub wall_time_secs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComparisonRow {
    pub strategy: String,
    pub runs: Vec<ComparisonCell>,
    pub median_percent: Option<f64>,
    pub median_wall_time_secs: f64,
}

impl Counters {
    pub fn from_suite(suite: &TestSuite) -> Self {
        Self {
            inputs_generated: suite.inputs_generated(),
            discriminatory_count: suite.findings_count(),
            unique_discriminatory: suite.unique_inputs.len() as u64,
            percent_discriminatory: suite.percent_discriminatory(),
        }
    }
}

impl Phases {
    pub fn from_suite(suite: &TestSuite) -> Self {
        let count = |c: &fairprobe_core::PhaseCounters| PhaseCount {
            inputs: c.inputs,
            findings: c.findings,
        };
        Self {
            global: count(&suite.global),
            local: count(&suite.local),
            baseline: count(&suite.baseline),
        }
    }
}

impl RunReport {
    pub fn new(command: &str, config: ConfigEcho) -> Self {
        Self {
            format_version: REPORT_FORMAT.to_string(),
            command: command.to_string(),
            config,
            counters: None,
            phases: None,
            termination: None,
            wall_time_secs: 0.0,
            findings_sample: Vec::new(),
            unique_inputs: Vec::new(),
            estimation: None,
            retrain: None,
            comparison: None,
            error: None,
        }
    }

    /// Fills counters, phases, findings and timing from an audit.
    pub fn record_suite(&mut self, suite: &TestSuite) {
        self.counters = Some(Counters::from_suite(suite));
        self.phases = Some(Phases::from_suite(suite));
        self.termination = Some(suite.termination.as_str().to_string());
        self.wall_time_secs = suite.wall_time.as_secs_f64();
        self.findings_sample = suite
            .findings
            .iter()
            .take(self.config.findings_cap)
            .map(FindingRecord::from)
            .collect();
        self.unique_inputs = suite.unique_inputs.iter().map(|x| x.values().to_vec()).collect();
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports always serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let report: RunReport = serde_json::from_str(text).map_err(|e| Error::Format(format!("report: {e}")))?;
        if report.format_version != REPORT_FORMAT {
            return Err(Error::Format(format!(
                "report format `{}`, expected `{REPORT_FORMAT}`",
                report.format_version
            )));
        }
        Ok(report)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}
