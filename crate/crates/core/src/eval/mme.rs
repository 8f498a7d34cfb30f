// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gateway::{answer_binary, BinaryVerdict};

use super::dataset::{MmeRecord, MmeSubtask};
use super::metrics::{mme_score_pairs, MmeScore};
use super::{EvalContext, EvalError};

/// Scores records against per-question correctness.
pub fn mme_score(records: &[MmeRecord], verdicts: &[[bool; 2]]) -> Result<MmeScore> {
    if records.is_empty() {
        return Err(Error::invalid_input("MME score over an empty record set"));
    }
    if records.len() != verdicts.len() {
        return Err(Error::invalid_input(format!(
            "{} MME records but {} verdict pairs",
            records.len(),
            verdicts.len()
        )));
    }
    for r in records {
        r.validate()?;
    }
    mme_score_pairs(verdicts)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MmeSubtaskReport {
    pub images: u64,
    /// Answers that were neither yes nor no; scored as incorrect.
    pub unparseable: u64,
    pub score: Option<MmeScore>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MmeReport {
    pub label: String,
    pub augmented: bool,
    pub dataset_size: u64,
    pub subtasks: BTreeMap<MmeSubtask, MmeSubtaskReport>,
    pub errors: Vec<EvalError>,
}

/// Runs both questions of every image. A backend failure on either question
/// drops the whole image into `errors`.
pub fn run_mme(records: &[MmeRecord], ctx: &EvalContext<'_>) -> Result<MmeReport> {
    for r in records {
        r.validate()?;
    }
    let outcomes = ctx.execution.map(records, |_, rec| -> Result<[BinaryVerdict; 2]> {
        let image = ctx.images.load(&rec.image)?;
        let knowledge = match &ctx.augment {
            Some(aug) => aug.knowledge(&image)?,
            None => String::new(),
        };
        let ask = |q: usize| answer_binary(ctx.describer, &image, &rec.questions[q].question, &knowledge);
        Ok([ask(0)?, ask(1)?])
    });

    let mut per_task: BTreeMap<MmeSubtask, (Vec<[bool; 2]>, u64)> = BTreeMap::new();
    let mut errors = Vec::new();
    for (i, (rec, outcome)) in records.iter().zip(outcomes).enumerate() {
        match outcome {
            Ok(verdicts) => {
                let correct = |q: usize| {
                    let said_yes = verdicts[q] == BinaryVerdict::Yes;
                    verdicts[q] != BinaryVerdict::Unparseable && said_yes == rec.questions[q].ground_truth.is_yes()
                };
                let entry = per_task.entry(rec.subtask).or_default();
                entry.0.push([correct(0), correct(1)]);
                entry.1 += verdicts.iter().filter(|&&v| v == BinaryVerdict::Unparseable).count() as u64;
            }
            Err(e) => errors.push(EvalError { index: i, image: rec.image.clone(), message: e.to_string() }),
        }
    }
    let subtasks = per_task
        .into_iter()
        .map(|(task, (pairs, unparseable))| {
            let report = MmeSubtaskReport {
                images: pairs.len() as u64,
                unparseable,
                score: mme_score_pairs(&pairs).ok(),
            };
            (task, report)
        })
        .collect();
    Ok(MmeReport {
        label: ctx.label.clone(),
        augmented: ctx.augmented(),
        dataset_size: records.len() as u64,
        subtasks,
        errors,
    })
}
