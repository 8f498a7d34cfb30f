// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::gateway::{answer_binary, BinaryVerdict};

use super::dataset::{group_by_image, LabelBalance, PopeRecord, Strategy};
use super::metrics::{pope_metrics, ConfusionCounts, PopeMetrics};
use super::{EvalContext, EvalError};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PopeSummary {
    pub counts: ConfusionCounts,
    /// Answers that were neither yes nor no and were scored as "no".
    pub unparseable: u64,
    pub metrics: Option<PopeMetrics>,
}

impl PopeSummary {
    fn finish(&mut self) {
        self.metrics = pope_metrics(&self.counts).ok();
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopeReport {
    pub label: String,
    pub augmented: bool,
    pub dataset_size: u64,
    pub balance: LabelBalance,
    pub strategies: BTreeMap<Strategy, PopeSummary>,
    pub overall: PopeSummary,
    pub errors: Vec<EvalError>,
}

type Outcome = (usize, std::result::Result<BinaryVerdict, String>);

/// Asks every question, optionally preceded by the image's knowledge
/// sentence, and scores the answers with "yes" as the positive class.
pub fn run_pope(records: &[PopeRecord], ctx: &EvalContext<'_>) -> Result<PopeReport> {
    let groups = group_by_image(records, |r| r.image.as_str());
    let outcomes: Vec<Vec<Outcome>> = ctx.execution.map(&groups, |_, (name, idx)| {
        let prepared = ctx.images.load(name).and_then(|image| {
            let knowledge = match &ctx.augment {
                Some(aug) => aug.knowledge(&image)?,
                None => String::new(),
            };
            Ok((image, knowledge))
        });
        match prepared {
            Err(e) => idx.iter().map(|&i| (i, Err(e.to_string()))).collect(),
            Ok((image, knowledge)) => idx
                .iter()
                .map(|&i| {
                    let verdict = answer_binary(ctx.describer, &image, &records[i].question, &knowledge);
                    (i, verdict.map_err(|e| e.to_string()))
                })
                .collect(),
        }
    });

    let mut report = PopeReport {
        label: ctx.label.clone(),
        augmented: ctx.augmented(),
        dataset_size: records.len() as u64,
        balance: LabelBalance::default(),
        strategies: BTreeMap::new(),
        overall: PopeSummary::default(),
        errors: Vec::new(),
    };
    let mut flat: Vec<Outcome> = outcomes.into_iter().flatten().collect();
    flat.sort_by_key(|o| o.0);
    for (i, outcome) in flat {
        let rec = &records[i];
        match rec.ground_truth.is_yes() {
            true => report.balance.yes += 1,
            false => report.balance.no += 1,
        }
        let verdict = match outcome {
            Ok(v) => v,
            Err(message) => {
                report.errors.push(EvalError { index: i, image: rec.image.clone(), message });
                continue;
            }
        };
        let summary = report.strategies.entry(rec.strategy).or_default();
        for s in [&mut *summary, &mut report.overall] {
            s.counts.record(verdict == BinaryVerdict::Yes, rec.ground_truth.is_yes());
            if verdict == BinaryVerdict::Unparseable {
                s.unparseable += 1;
            }
        }
    }
    for s in report.strategies.values_mut() {
        s.finish();
    }
    report.overall.finish();
    Ok(report)
}
