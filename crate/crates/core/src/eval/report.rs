// SPDX-License-Identifier: Apache-2.0

//! Saved evaluation reports and baseline-vs-augmented comparison tables.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};

use super::dataset::{MmeSubtask, Strategy};
use super::mme::MmeReport;
use super::pope::{PopeReport, PopeSummary};
use super::qa90::Qa90Report;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "benchmark", rename_all = "lowercase")]
pub enum EvalReport {
    Pope(PopeReport),
    Mme(MmeReport),
    Qa90(Qa90Report),
}

impl EvalReport {
    pub fn name(&self) -> &'static str {
        match self {
            EvalReport::Pope(_) => "pope",
            EvalReport::Mme(_) => "mme",
            EvalReport::Qa90(_) => "qa90",
        }
    }

    pub fn label(&self) -> &str {
        match self {
            EvalReport::Pope(r) => &r.label,
            EvalReport::Mme(r) => &r.label,
            EvalReport::Qa90(r) => &r.label,
        }
    }

    pub fn error_count(&self) -> usize {
        match self {
            EvalReport::Pope(r) => r.errors.len(),
            EvalReport::Mme(r) => r.errors.len(),
            EvalReport::Qa90(r) => r.errors.len(),
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }
}

/// Rendered comparison: an aligned text table plus the same numbers as JSON.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub text: String,
    pub json: Value,
}

fn cell(v: Option<f64>, decimals: usize) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.decimals$}"))
}

fn delta(a: Option<f64>, b: Option<f64>, decimals: usize) -> Option<String> {
    Some(format!("{:+.decimals$}", b? - a?))
}

fn pad_table(rows: &[Vec<String>]) -> String {
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|c| rows.iter().filter_map(|r| r.get(c)).map(|s| s.chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for r in rows {
        let line: Vec<String> = r.iter().enumerate().map(|(c, s)| format!("{s:<w$}", w = widths[c])).collect();
        let _ = writeln!(out, "{}", line.join("  ").trim_end());
    }
    out
}

fn pope_values(s: Option<&PopeSummary>) -> [Option<f64>; 4] {
    let m = s.and_then(|s| s.metrics);
    [m.map(|m| m.accuracy), m.and_then(|m| m.precision), m.and_then(|m| m.recall), m.and_then(|m| m.f1)]
}

fn compare_pope(a: &PopeReport, b: &PopeReport) -> Comparison {
    let header = ["setting", "model", "Accuracy", "Precision", "Recall", "F1-Score"];
    let mut rows = vec![header.iter().map(|s| s.to_string()).collect::<Vec<_>>()];
    let mut json_rows = Vec::new();
    let keys = ["accuracy", "precision", "recall", "f1"];
    let settings = Strategy::ALL
        .iter()
        .filter(|s| a.strategies.contains_key(s) || b.strategies.contains_key(s))
        .map(|s| (s.as_str(), a.strategies.get(s), b.strategies.get(s)))
        .chain([("overall", Some(&a.overall), Some(&b.overall))]);
    for (setting, sa, sb) in settings {
        let (va, vb) = (pope_values(sa), pope_values(sb));
        rows.push([setting.to_string(), a.label.clone()].into_iter().chain(va.iter().map(|v| cell(*v, 3))).collect());
        rows.push([String::new(), b.label.clone()].into_iter().chain(vb.iter().map(|v| cell(*v, 3))).collect());
        let d: Vec<Option<String>> = (0..4).map(|i| delta(va[i], vb[i], 3)).collect();
        rows.push(
            [String::new(), "delta".to_string()]
                .into_iter()
                .chain(d.iter().map(|x| x.clone().unwrap_or_else(|| "-".into())))
                .collect(),
        );
        let obj = |v: &[Option<f64>; 4]| -> Value {
            keys.iter().zip(v).map(|(k, x)| (k.to_string(), json!(x))).collect::<serde_json::Map<_, _>>().into()
        };
        let dv: [Option<f64>; 4] = std::array::from_fn(|i| Some(vb[i]? - va[i]?));
        json_rows.push(json!({ "setting": setting, "a": obj(&va), "b": obj(&vb), "delta": obj(&dv) }));
    }
    Comparison {
        text: pad_table(&rows),
        json: json!({ "benchmark": "pope", "a": a.label, "b": b.label, "rows": json_rows }),
    }
}

fn compare_mme(a: &MmeReport, b: &MmeReport) -> Comparison {
    let tasks = [MmeSubtask::Existence, MmeSubtask::Count];
    let score = |r: &MmeReport, t: MmeSubtask| r.subtasks.get(&t).and_then(|s| s.score).map(|s| s.score);
    let mut rows = vec![vec![String::new(), "Existence".to_string(), "Count".to_string()]];
    for r in [a, b] {
        rows.push([r.label.clone()].into_iter().chain(tasks.iter().map(|&t| cell(score(r, t), 2))).collect());
    }
    rows.push(
        ["delta".to_string()]
            .into_iter()
            .chain(tasks.iter().map(|&t| delta(score(a, t), score(b, t), 2).unwrap_or_else(|| "-".into())))
            .collect(),
    );
    let obj = |r: &MmeReport| json!({ "existence": score(r, MmeSubtask::Existence), "count": score(r, MmeSubtask::Count) });
    Comparison {
        text: pad_table(&rows),
        json: json!({ "benchmark": "mme", "a": a.label, "b": b.label, "scores": { "a": obj(a), "b": obj(b) } }),
    }
}

fn compare_qa90(a: &Qa90Report, b: &Qa90Report) -> Comparison {
    let mut rows = vec![vec![String::new(), "average accuracy".to_string(), "average detailedness".to_string()]];
    for r in [a, b] {
        rows.push(vec![r.label.clone(), cell(r.average_accuracy, 2), cell(r.average_detailedness, 2)]);
    }
    rows.push(vec![
        "delta".to_string(),
        delta(a.average_accuracy, b.average_accuracy, 2).unwrap_or_else(|| "-".into()),
        delta(a.average_detailedness, b.average_detailedness, 2).unwrap_or_else(|| "-".into()),
    ]);
    let obj = |r: &Qa90Report| json!({ "average_accuracy": r.average_accuracy, "average_detailedness": r.average_detailedness });
    Comparison {
        text: pad_table(&rows),
        json: json!({ "benchmark": "qa90", "a": a.label, "b": b.label, "scores": { "a": obj(a), "b": obj(b) } }),
    }
}

/// One-model table for a single report, in the same layout as [`compare`].
pub fn summary(report: &EvalReport) -> String {
    let mut rows = Vec::new();
    match report {
        EvalReport::Pope(r) => {
            rows.push(["setting", "Accuracy", "Precision", "Recall", "F1-Score", "unparseable"].map(String::from).to_vec());
            let settings = r.strategies.iter().map(|(s, v)| (s.as_str(), v)).chain([("overall", &r.overall)]);
            for (name, s) in settings {
                let mut row = vec![name.to_string()];
                row.extend(pope_values(Some(s)).iter().map(|v| cell(*v, 3)));
                row.push(s.unparseable.to_string());
                rows.push(row);
            }
        }
        EvalReport::Mme(r) => {
            rows.push(["subtask", "acc", "acc+", "score", "unparseable"].map(String::from).to_vec());
            for (task, s) in &r.subtasks {
                let sc = s.score;
                rows.push(vec![
                    task.as_str().to_string(),
                    cell(sc.map(|x| x.acc), 3),
                    cell(sc.map(|x| x.acc_plus), 3),
                    cell(sc.map(|x| x.score), 2),
                    s.unparseable.to_string(),
                ]);
            }
        }
        EvalReport::Qa90(r) => {
            rows.push(["average accuracy", "average detailedness", "scored", "excluded"].map(String::from).to_vec());
            rows.push(vec![
                cell(r.average_accuracy, 2),
                cell(r.average_detailedness, 2),
                r.samples.len().to_string(),
                r.exclusions.len().to_string(),
            ]);
        }
    }
    format!("{} ({}): {} records, {} errors\n{}", report.name(), report.label(), report_size(report), report.error_count(), pad_table(&rows))
}

fn report_size(report: &EvalReport) -> u64 {
    match report {
        EvalReport::Pope(r) => r.dataset_size,
        EvalReport::Mme(r) => r.dataset_size,
        EvalReport::Qa90(r) => r.dataset_size,
    }
}

/// Compares a baseline report `a` with `b`; both must be the same benchmark.
pub fn compare(a: &EvalReport, b: &EvalReport) -> Result<Comparison> {
    match (a, b) {
        (EvalReport::Pope(a), EvalReport::Pope(b)) => Ok(compare_pope(a, b)),
        (EvalReport::Mme(a), EvalReport::Mme(b)) => Ok(compare_mme(a, b)),
        (EvalReport::Qa90(a), EvalReport::Qa90(b)) => Ok(compare_qa90(a, b)),
        _ => Err(Error::invalid_input(format!("cannot compare a {} report with a {} report", a.name(), b.name()))),
    }
}
