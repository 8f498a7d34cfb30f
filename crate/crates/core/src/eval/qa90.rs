// SPDX-License-Identifier: Apache-2.0

use std::path::Path;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gateway::{describe, Describer};
use crate::prompt::build_augmented_prompt;

use super::dataset::Qa90Sample;
use super::{EvalContext, EvalError};

const DEFAULT_RUBRIC: &str = include_str!("../../config/judge_rubric.toml");

/// Judge prompt with `{query}`, `{response}` and optional `{reference}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JudgeRubric {
    pub template: String,
}

impl Default for JudgeRubric {
    fn default() -> Self {
        Self::from_toml(DEFAULT_RUBRIC).expect("bundled rubric is valid")
    }
}

impl JudgeRubric {
    pub fn from_toml(text: &str) -> Result<Self> {
        let r: Self = toml::from_str(text).map_err(|e| Error::invalid_config(format!("judge rubric: {e}")))?;
        for ph in ["{query}", "{response}"] {
            if !r.template.contains(ph) {
                return Err(Error::invalid_config(format!("judge rubric lacks {ph}")));
            }
        }
        Ok(r)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn render(&self, query: &str, response: &str, reference: Option<&str>) -> String {
        static PH: OnceLock<Regex> = OnceLock::new();
        let re = PH.get_or_init(|| Regex::new(r"\{(query|response|reference)\}").expect("valid regex"));
        // Single pass, so placeholder-like text inside a response stays literal.
        re.replace_all(self.template.trim(), |c: &regex::Captures<'_>| match &c[1] {
            "query" => query.to_string(),
            "response" => response.to_string(),
            _ => reference.unwrap_or("(none)").to_string(),
        })
        .into_owned()
    }
}

/// First two integers in the judge output, skipping "/10"-style
/// denominators. Both must be in 1..=10.
pub fn parse_judge_scores(text: &str) -> Option<(u8, u8)> {
    static NUM: OnceLock<Regex> = OnceLock::new();
    let re = NUM.get_or_init(|| Regex::new(r"(\d+)(?:\s*/\s*\d+)?").expect("valid regex"));
    let mut scores = re.captures_iter(text).map(|c| c[1].parse::<u8>().ok());
    let a = scores.next()??;
    let b = scores.next()??;
    let ok = |s: u8| (1..=10).contains(&s);
    (ok(a) && ok(b)).then_some((a, b))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JudgedSample {
    pub index: usize,
    pub image: String,
    pub query: String,
    pub response: String,
    pub accuracy_score: u8,
    pub detailedness_score: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exclusion {
    pub index: usize,
    pub judge_output: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Qa90Report {
    pub label: String,
    pub augmented: bool,
    pub dataset_size: u64,
    pub average_accuracy: Option<f64>,
    pub average_detailedness: Option<f64>,
    pub samples: Vec<JudgedSample>,
    /// Judge outputs without two parseable scores.
    pub exclusions: Vec<Exclusion>,
    pub errors: Vec<EvalError>,
}

enum SampleOutcome {
    Scored(JudgedSample),
    Excluded(Exclusion),
}

/// Generates a response per query (knowledge sentence and ordinary prompt
/// prepended when augmenting), has `judge` grade it, and averages the scores.
pub fn run_qa90(
    samples: &[Qa90Sample],
    ctx: &EvalContext<'_>,
    judge: &dyn Describer,
    rubric: &JudgeRubric,
) -> Result<Qa90Report> {
    let outcomes = ctx.execution.map(samples, |i, s| -> Result<SampleOutcome> {
        let image = ctx.images.load(&s.image)?;
        let prompt = match &ctx.augment {
            Some(aug) => build_augmented_prompt(&aug.inventory(&image)?, aug.template, &s.query),
            None => s.query.clone(),
        };
        let response = describe(ctx.describer, &image, &prompt)?;
        let verdict = describe(judge, &image, &rubric.render(&s.query, &response, s.reference.as_deref()))?;
        Ok(match parse_judge_scores(&verdict) {
            Some((acc, det)) => SampleOutcome::Scored(JudgedSample {
                index: i,
                image: s.image.clone(),
                query: s.query.clone(),
                response,
                accuracy_score: acc,
                detailedness_score: det,
            }),
            None => SampleOutcome::Excluded(Exclusion { index: i, judge_output: verdict }),
        })
    });

    let mut report = Qa90Report {
        label: ctx.label.clone(),
        augmented: ctx.augmented(),
        dataset_size: samples.len() as u64,
        average_accuracy: None,
        average_detailedness: None,
        samples: Vec::new(),
        exclusions: Vec::new(),
        errors: Vec::new(),
    };
    for (i, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok(SampleOutcome::Scored(s)) => report.samples.push(s),
            Ok(SampleOutcome::Excluded(x)) => report.exclusions.push(x),
            Err(e) => report.errors.push(EvalError {
                index: i,
                image: samples[i].image.clone(),
                message: e.to_string(),
            }),
        }
    }
    if !report.samples.is_empty() {
        let n = report.samples.len() as f64;
        report.average_accuracy = Some(report.samples.iter().map(|s| s.accuracy_score as f64).sum::<f64>() / n);
        report.average_detailedness =
            Some(report.samples.iter().map(|s| s.detailedness_score as f64).sum::<f64>() / n);
    }
    Ok(report)
}
