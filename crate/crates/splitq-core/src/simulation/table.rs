use std::collections::BTreeMap;
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::QuantitySummary;

/// Canonical layouts of the result tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TableLayout {
    #[serde(rename = "parIC")]
    ParIc,
    #[serde(rename = "procQuant")]
    ProcQuant,
    #[serde(rename = "procQuantm")]
    ProcQuantM,
    #[serde(rename = "ValkIt")]
    ValkIt,
    #[serde(rename = "errWeibulldeValk")]
    ErrWeibullDeValk,
    #[serde(rename = "stairexp")]
    StairExp,
    #[serde(rename = "stairgaus")]
    StairGaus,
    #[serde(rename = "CRMexp")]
    CrmExp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Stat {
    Mean,
    Std,
    Min,
    Q25,
    Median,
    Q75,
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Basis {
    RelativeError,
    Estimate,
}

#[derive(Debug, Clone, Copy)]
struct Column {
    header: &'static str,
    slot: &'static str,
    quantity: &'static str,
    basis: Basis,
    stat: Stat,
}

const fn rel(header: &'static str, slot: &'static str, quantity: &'static str, stat: Stat) -> Column {
    Column {
        header,
        slot,
        quantity,
        basis: Basis::RelativeError,
        stat,
    }
}

const fn raw(header: &'static str, slot: &'static str, stat: Stat) -> Column {
    Column {
        header,
        slot,
        quantity: "quantile",
        basis: Basis::Estimate,
        stat,
    }
}

impl TableLayout {
    pub fn id(&self) -> &'static str {
        match self {
            Self::ParIc => "parIC",
            Self::ProcQuant => "procQuant",
            Self::ProcQuantM => "procQuantm",
            Self::ValkIt => "ValkIt",
            Self::ErrWeibullDeValk => "errWeibulldeValk",
            Self::StairExp => "stairexp",
            Self::StairGaus => "stairgaus",
            Self::CrmExp => "CRMexp",
        }
    }

    /// Slot names a row is expected to fill.
    pub fn slots(&self) -> Vec<&'static str> {
        let mut s: Vec<&str> = self.columns().iter().map(|c| c.slot).collect();
        s.dedup();
        s
    }

    fn columns(&self) -> Vec<Column> {
        use Stat::*;
        match self {
            Self::ParIc => vec![rel("mean", "binary", "quantile", Mean), rel("std", "binary", "quantile", Std)],
            Self::ProcQuant => vec![
                raw("minimum", "binary", Min),
                raw("q25", "binary", Q25),
                raw("q50", "binary", Median),
                raw("mean", "binary", Mean),
                raw("q75", "binary", Q75),
                raw("maximum", "binary", Max),
            ],
            Self::ProcQuantM => vec![
                raw("k30_mean", "k30", Mean),
                raw("k30_std", "k30", Std),
                raw("k50_mean", "k50", Mean),
                raw("k50_std", "k50", Std),
            ],
            Self::ValkIt => vec![
                rel("complete_mean", "complete", "quantile", Mean),
                rel("complete_std", "complete", "quantile", Std),
                rel("binary_mean", "binary", "quantile", Mean),
                rel("binary_std", "binary", "quantile", Std),
            ],
            Self::ErrWeibullDeValk => vec![
                rel("binary_mean", "binary", "quantile", Mean),
                rel("binary_std", "binary", "quantile", Std),
                rel("complete_mean", "complete", "quantile", Mean),
                rel("complete_std", "complete", "quantile", Std),
            ],
            Self::StairExp => vec![
                rel("lambda_mean", "staircase", "lambda", Mean),
                rel("lambda_std", "staircase", "lambda", Std),
                rel("quantile_mean", "staircase", "quantile", Mean),
                rel("quantile_std", "staircase", "quantile", Std),
            ],
            Self::StairGaus => vec![
                rel("mu_mean", "staircase", "mu", Mean),
                rel("mu_std", "staircase", "mu", Std),
                rel("sigma_mean", "staircase", "sigma", Mean),
                rel("sigma_std", "staircase", "sigma", Std),
                rel("quantile_mean", "staircase", "quantile", Mean),
                rel("quantile_std", "staircase", "quantile", Std),
            ],
            Self::CrmExp => vec![
                rel("q0.1_mean", "q0.1", "quantile", Mean),
                rel("q0.1_std", "q0.1", "quantile", Std),
                rel("q0.001_mean", "q0.001", "quantile", Mean),
                rel("q0.001_std", "q0.001", "quantile", Std),
            ],
        }
    }
}

/// Per-slot summaries of one table row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub label: String,
    pub slots: BTreeMap<String, BTreeMap<String, QuantitySummary>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RenderedTable {
    pub layout: String,
    pub csv: String,
    pub text: String,
}

fn cell(row: &TableRow, col: &Column) -> Option<f64> {
    let q = row.slots.get(col.slot)?.get(col.quantity)?;
    let s = match col.basis {
        Basis::RelativeError => q.relative_error.as_ref()?,
        Basis::Estimate => &q.estimate,
    };
    match col.stat {
        Stat::Mean => Some(s.mean),
        Stat::Std => s.std,
        Stat::Min => Some(s.min),
        Stat::Q25 => Some(s.q25),
        Stat::Median => Some(s.median),
        Stat::Q75 => Some(s.q75),
        Stat::Max => Some(s.max),
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// CSV plus an aligned text rendering; missing cells read "n/a".
pub fn emit_table(rows: &[TableRow], layout: TableLayout) -> RenderedTable {
    let cols = layout.columns();
    let mut grid: Vec<Vec<String>> = vec![std::iter::once("label")
        .chain(cols.iter().map(|c| c.header))
        .map(str::to_string)
        .collect()];
    for row in rows {
        let mut line = vec![row.label.clone()];
        for col in &cols {
            line.push(match cell(row, col) {
                Some(v) if col.basis == Basis::Estimate => format!("{v:.2}"),
                Some(v) => format!("{v:.3}"),
                None => "n/a".to_string(),
            });
        }
        grid.push(line);
    }
    let mut csv = String::new();
    for line in &grid {
        let fields: Vec<String> = line.iter().map(|f| csv_field(f)).collect();
        writeln!(csv, "{}", fields.join(",")).unwrap();
    }
    let widths: Vec<usize> = (0..=cols.len())
        .map(|j| grid.iter().map(|l| l[j].chars().count()).max().unwrap_or(0))
        .collect();
    let mut text = format!("{}\n", layout.id());
    for (i, line) in grid.iter().enumerate() {
        let cells: Vec<String> = line
            .iter()
            .enumerate()
            .map(|(j, f)| if j == 0 { format!("{f:<w$}", w = widths[j]) } else { format!("{f:>w$}", w = widths[j]) })
            .collect();
        writeln!(text, "{}", cells.join("  ")).unwrap();
        if i == 0 {
            writeln!(text, "{}", "-".repeat(widths.iter().sum::<usize>() + 2 * cols.len())).unwrap();
        }
    }
    RenderedTable {
        layout: layout.id().to_string(),
        csv,
        text,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulation::SummaryStats;

    fn summary(values: &[f64], truth: f64) -> QuantitySummary {
        QuantitySummary {
            truth,
            estimate: SummaryStats::from_values(values).unwrap(),
            relative_error: SummaryStats::from_values(&values.iter().map(|v| (v - truth) / truth).collect::<Vec<_>>()),
        }
    }

    fn row(label: &str, slots: &[&str]) -> TableRow {
        TableRow {
            label: label.into(),
            slots: slots
                .iter()
                .map(|s| (s.to_string(), BTreeMap::from([("quantile".to_string(), summary(&[90.0, 110.0, 130.0], 100.0))])))
                .collect(),
        }
    }

    #[test]
    fn par_ic_shape() {
        let rows: Vec<_> = ["a", "b", "c"].iter().map(|l| row(l, &["binary"])).collect();
        let t = emit_table(&rows, TableLayout::ParIc);
        let lines: Vec<&str> = t.csv.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], "label,mean,std");
        assert_eq!(lines[1], "a,0.100,0.200");
    }

    #[test]
    fn valkit_shape_and_missing() {
        let rows: Vec<_> = ["a", "b", "c"].iter().map(|l| row(l, &["complete"])).collect();
        let t = emit_table(&rows, TableLayout::ValkIt);
        for line in t.csv.lines().skip(1) {
            let f: Vec<&str> = line.split(',').collect();
            assert_eq!(f.len(), 5);
            assert_eq!(&f[3..], ["n/a", "n/a"]);
        }
        assert!(t.text.starts_with("ValkIt\n"));
    }

    #[test]
    fn empty_is_header_only() {
        let t = emit_table(&[], TableLayout::CrmExp);
        assert_eq!(t.csv, "label,q0.1_mean,q0.1_std,q0.001_mean,q0.001_std\n");
    }

    #[test]
    fn layout_ids_round_trip() {
        for l in [
            TableLayout::ParIc,
            TableLayout::ProcQuant,
            TableLayout::ProcQuantM,
            TableLayout::ValkIt,
            TableLayout::ErrWeibullDeValk,
            TableLayout::StairExp,
            TableLayout::StairGaus,
            TableLayout::CrmExp,
        ] {
            let s = serde_json::to_string(&l).unwrap();
            assert_eq!(s, format!("\"{}\"", l.id()));
            assert_eq!(serde_json::from_str::<TableLayout>(&s).unwrap(), l);
        }
    }
}
