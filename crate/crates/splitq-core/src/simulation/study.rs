use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{relative_error, ProcedureRegistry, RngSeed, SimulationError, SummaryStats, TableLayout, TableRow, TruthModel};
use super::Estimate;

/// One Monte Carlo experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudySpec {
    #[serde(default)]
    pub name: String,
    pub truth: TruthModel,
    pub procedure: String,
    pub config: serde_json::Value,
    pub replicas: usize,
    /// Overrides the seed passed to `run_study`.
    #[serde(default)]
    pub seed: Option<u64>,
    /// Keep each replica's run document in the records.
    #[serde(default)]
    pub keep_documents: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicaRecord {
    pub replica: u64,
    pub estimates: Vec<Estimate>,
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub document: Option<serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantitySummary {
    pub truth: f64,
    pub estimate: SummaryStats,
    /// Absent when the truth is not a usable reference.
    pub relative_error: Option<SummaryStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyResult {
    pub name: String,
    pub procedure: String,
    pub truth: TruthModel,
    pub seed: u64,
    pub replicas: usize,
    /// Replicas that failed and are excluded from the summaries.
    pub failures: usize,
    pub summaries: BTreeMap<String, QuantitySummary>,
    pub records: Vec<ReplicaRecord>,
}

impl StudyResult {
    pub fn relative_error(&self, quantity: &str) -> Option<&SummaryStats> {
        self.summaries.get(quantity)?.relative_error.as_ref()
    }

    /// Relative errors of `quantity` in replica order.
    pub fn relative_errors(&self, quantity: &str) -> Vec<f64> {
        self.records
            .iter()
            .flat_map(|r| r.estimates.iter())
            .filter(|e| e.quantity == quantity)
            .map(|e| relative_error(e.value, e.truth))
            .collect()
    }
}

/// Runs `spec.replicas` independent replicas in parallel; records come back
/// in replica order so the result only depends on the seed.
pub fn run_study(spec: &StudySpec, seed: RngSeed, registry: &ProcedureRegistry) -> Result<StudyResult, SimulationError> {
    if spec.replicas == 0 {
        return Err(SimulationError::NoReplicas);
    }
    spec.truth.validate()?;
    let procedure = registry.build(&spec.procedure, &spec.config)?;
    procedure.check_truth(&spec.truth)?;
    let seed = spec.seed.map(RngSeed).unwrap_or(seed);
    let records: Vec<ReplicaRecord> = (0..spec.replicas as u64)
        .into_par_iter()
        .map(|replica| match procedure.run(&spec.truth, seed, replica) {
            Ok(out) => ReplicaRecord {
                replica,
                estimates: out.estimates,
                error: None,
                document: spec.keep_documents.then_some(out.document),
            },
            Err(e) => ReplicaRecord {
                replica,
                estimates: Vec::new(),
                error: Some(e.to_string()),
                document: None,
            },
        })
        .collect();

    let mut by_quantity: BTreeMap<String, (f64, Vec<f64>)> = BTreeMap::new();
    for e in records.iter().flat_map(|r| r.estimates.iter()) {
        by_quantity.entry(e.quantity.clone()).or_insert((e.truth, Vec::new())).1.push(e.value);
    }
    let summaries = by_quantity
        .into_iter()
        .filter_map(|(q, (truth, values))| {
            let estimate = SummaryStats::from_values(&values)?;
            let rel = (truth.is_finite() && truth != 0.0)
                .then(|| {
                    let errs: Vec<f64> = values.iter().map(|&v| relative_error(v, truth)).collect();
                    SummaryStats::from_values(&errs)
                })
                .flatten();
            Some((
                q,
                QuantitySummary {
                    truth,
                    estimate,
                    relative_error: rel,
                },
            ))
        })
        .collect();
    Ok(StudyResult {
        name: spec.name.clone(),
        procedure: spec.procedure.clone(),
        truth: spec.truth,
        seed: seed.0,
        replicas: spec.replicas,
        failures: records.iter().filter(|r| r.error.is_some()).count(),
        summaries,
        records,
    })
}

/// A table row: studies keyed by the layout's slot names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyRow {
    pub label: String,
    pub slots: BTreeMap<String, StudySpec>,
}

/// A study file as read by the CLI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyFile {
    pub seed: u64,
    #[serde(default)]
    pub layout: Option<TableLayout>,
    pub rows: Vec<StudyRow>,
}

const ROW_LANE: u64 = 7;

impl StudyFile {
    /// Runs every slot; returns the table rows and the full results. Rows get
    /// independent seeds derived from the file seed; slots of one row share it.
    pub fn run(&self, registry: &ProcedureRegistry) -> Result<(Vec<TableRow>, Vec<StudyResult>), SimulationError> {
        let mut rows = Vec::new();
        let mut results = Vec::new();
        for (index, row) in self.rows.iter().enumerate() {
            let row_seed = RngSeed(RngSeed(self.seed).derive(index as u64, ROW_LANE));
            let mut slots = BTreeMap::new();
            for (slot, spec) in &row.slots {
                let mut spec = spec.clone();
                if spec.name.is_empty() {
                    spec.name = format!("{} / {slot}", row.label);
                }
                let result = run_study(&spec, row_seed, registry)?;
                slots.insert(slot.clone(), result.summaries.clone());
                results.push(result);
            }
            rows.push(TableRow {
                label: row.label.clone(),
                slots,
            });
        }
        Ok((rows, results))
    }
}
