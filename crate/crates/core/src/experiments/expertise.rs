use alloc::string::String;
use alloc::vec::Vec;

use crate::recording::Recording;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SubjectScores {
    pub subject_id: String,
    pub mot: f64,
    pub vs: f64,
}

impl SubjectScores {
    pub fn from_recording(r: &Recording) -> Self {
        Self { subject_id: r.subject_id.clone(), mot: r.mot_score, vs: r.vs_score }
    }
}

/// A subject is an expert when both scores reach their thresholds.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct ExpertiseRule {
    pub mot_threshold: f64,
    pub vs_threshold: f64,
}

fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

impl ExpertiseRule {
    /// Thresholds at the cohort medians.
    pub fn median(cohort: &[SubjectScores]) -> Self {
        Self {
            mot_threshold: median(cohort.iter().map(|s| s.mot).collect()),
            vs_threshold: median(cohort.iter().map(|s| s.vs).collect()),
        }
    }

    pub fn is_expert(&self, s: &SubjectScores) -> bool {
        s.mot >= self.mot_threshold && s.vs >= self.vs_threshold
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ExpertisePartition {
    pub experts: Vec<String>,
    pub novices: Vec<String>,
}

/// Splits the cohort in input order; either side may come out empty.
pub fn label_expertise(cohort: &[SubjectScores], rule: &ExpertiseRule) -> ExpertisePartition {
    let mut out = ExpertisePartition::default();
    for s in cohort {
        if rule.is_expert(s) {
            out.experts.push(s.subject_id.clone());
        } else {
            out.novices.push(s.subject_id.clone());
        }
    }
    out
}
