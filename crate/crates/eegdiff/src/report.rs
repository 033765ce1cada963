//! Evaluation and selection reports: a table-style text file for people and
//! a JSON copy for programs. The text form parses back to the same report.

use std::fmt::Write as _;
use std::path::Path;

use eegdiff_core::experiments::{ClassifierKind, EvalReport, ReportError, Scheme, SelectedFeature};
use eegdiff_core::Difficulty;
use serde::{Deserialize, Serialize};

use crate::{ArtifactError, IoError};

#[derive(Debug, thiserror::Error)]
pub enum ReportIoError {
    #[error(transparent)]
    Invalid(#[from] ReportError),
    #[error(transparent)]
    Io(#[from] IoError),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("line {line}: {reason}")]
pub struct ParseError {
    pub line: usize,
    pub reason: String,
}

/// `mean±std` in percent with two decimals, e.g. `83.80±1.42`.
pub fn format_accuracy(mean: f64, std: f64) -> String {
    format!("{:.2}±{:.2}", 100.0 * mean, 100.0 * std)
}

fn scheme_from_name(s: &str) -> Option<Scheme> {
    Scheme::ALL.into_iter().find(|x| x.name() == s)
}

fn classifier_from_name(s: &str) -> Option<ClassifierKind> {
    [ClassifierKind::Svm, ClassifierKind::Cnn].into_iter().find(|x| x.name() == s)
}

fn feature_table(out: &mut String, features: &[SelectedFeature]) {
    out.push_str("| Pair | Frequency band | Count |\n|---|---|---|\n");
    for f in features {
        let _ = writeln!(out, "| {} | {} | {} |", f.pair, f.band, f.count);
    }
}

pub fn render_report(rep: &EvalReport) -> Result<String, ReportError> {
    rep.validate()?;
    let mut out = String::new();
    let _ = writeln!(out, "scheme: {}", rep.scheme.name());
    let _ = writeln!(out, "classifier: {}", rep.classifier.name());
    let _ = writeln!(out, "repeats: {}", rep.accuracies.len());
    let _ = writeln!(out, "test epochs: {}", rep.test_count());
    out.push_str("\n| Scheme | Classifier | Accuracy (%) |\n|---|---|---|\n");
    let _ = writeln!(
        out,
        "| {} | {} | {} |",
        rep.scheme.name(),
        rep.classifier.name(),
        format_accuracy(rep.accuracy_mean, rep.accuracy_std)
    );
    let _ = writeln!(out, "\naccuracy_mean: {:?}", rep.accuracy_mean);
    let _ = writeln!(out, "accuracy_std: {:?}", rep.accuracy_std);
    let accs: Vec<String> = rep.accuracies.iter().map(|a| format!("{a:?}")).collect();
    let _ = writeln!(out, "accuracies: {}", accs.join(" "));
    out.push_str("\nconfusion (rows true, columns predicted)\n| | None | Static | Dynamic |\n|---|---|---|---|\n");
    for (d, row) in Difficulty::ALL.iter().zip(&rep.confusion) {
        let _ = writeln!(out, "| {} | {} | {} | {} |", d.name(), row[0], row[1], row[2]);
    }
    out.push_str("\nsignificant features\n");
    feature_table(&mut out, &rep.selected_features);
    Ok(out)
}

fn cells(line: &str) -> Vec<&str> {
    line.trim().trim_matches('|').split('|').map(str::trim).collect()
}

pub fn parse_report(text: &str) -> Result<EvalReport, ParseError> {
    let lines: Vec<&str> = text.lines().collect();
    let err = |line: usize, reason: &str| ParseError { line: line + 1, reason: reason.into() };
    let field = |key: &str| -> Result<(usize, &str), ParseError> {
        lines
            .iter()
            .enumerate()
            .find_map(|(i, l)| l.strip_prefix(key).and_then(|r| r.strip_prefix(": ")).map(|v| (i, v)))
            .ok_or_else(|| err(lines.len(), &format!("missing {key}")))
    };
    let real = |key: &str| -> Result<f64, ParseError> {
        let (i, v) = field(key)?;
        v.parse().map_err(|_| err(i, &format!("bad {key}")))
    };

    let (i, s) = field("scheme")?;
    let scheme = scheme_from_name(s).ok_or_else(|| err(i, "unknown scheme"))?;
    let (i, s) = field("classifier")?;
    let classifier = classifier_from_name(s).ok_or_else(|| err(i, "unknown classifier"))?;
    let accuracy_mean = real("accuracy_mean")?;
    let accuracy_std = real("accuracy_std")?;
    let (i, s) = field("accuracies")?;
    let accuracies = s
        .split_whitespace()
        .map(|a| a.parse::<f64>().map_err(|_| err(i, "bad accuracy")))
        .collect::<Result<Vec<_>, _>>()?;

    let start = lines
        .iter()
        .position(|l| l.starts_with("confusion"))
        .ok_or_else(|| err(lines.len(), "missing confusion matrix"))?;
    let mut confusion = [[0u64; 3]; 3];
    for (k, row) in confusion.iter_mut().enumerate() {
        let at = start + 3 + k;
        let c = cells(lines.get(at).ok_or_else(|| err(at, "truncated confusion matrix"))?);
        if c.len() != 4 || c[0] != Difficulty::ALL[k].name() {
            return Err(err(at, "malformed confusion row"));
        }
        for (slot, v) in row.iter_mut().zip(&c[1..]) {
            *slot = v.parse().map_err(|_| err(at, "bad count"))?;
        }
    }

    let start = lines
        .iter()
        .position(|l| *l == "significant features")
        .ok_or_else(|| err(lines.len(), "missing feature table"))?;
    let mut selected_features = Vec::new();
    for (at, line) in lines.iter().enumerate().skip(start + 3) {
        if line.trim().is_empty() {
            break;
        }
        let c = cells(line);
        if c.len() != 3 {
            return Err(err(at, "malformed feature row"));
        }
        selected_features.push(SelectedFeature {
            pair: c[0].into(),
            band: c[1].into(),
            count: c[2].parse().map_err(|_| err(at, "bad count"))?,
        });
    }
    Ok(EvalReport { scheme, classifier, accuracy_mean, accuracy_std, accuracies, confusion, selected_features })
}

pub fn json_path(path: &Path) -> std::path::PathBuf {
    path.with_extension("json")
}

/// Writes the text report to `path` and the JSON copy next to it.
pub fn write_report(rep: &EvalReport, path: &Path) -> Result<(), ReportIoError> {
    let text = render_report(rep)?;
    crate::write_file(path, text.as_bytes())?;
    crate::write_json(&json_path(path), rep)?;
    Ok(())
}

pub fn read_report(path: &Path) -> Result<EvalReport, ArtifactError> {
    let text = crate::read_artifact(path)?;
    let text = String::from_utf8(text)
        .map_err(|e| ArtifactError::Corrupt { path: path.to_path_buf(), reason: e.to_string() })?;
    parse_report(&text).map_err(|e| ArtifactError::Corrupt { path: path.to_path_buf(), reason: e.to_string() })
}

/// Stable RFE outcome as written by the selection stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelectionFile {
    pub n_repeats: usize,
    /// Column indices into the feature matrix, most frequent first.
    pub selected: Vec<usize>,
    pub names: Vec<String>,
    pub table: Vec<SelectedFeature>,
    /// Every feature that survived at least once: `(name, count)`.
    pub ranked: Vec<(String, usize)>,
}

pub fn render_selection(sel: &SelectionFile) -> String {
    let mut out = format!("significant features ({} RFE repeats)\n", sel.n_repeats);
    feature_table(&mut out, &sel.table);
    out
}

/// Writes the Table II-style text to `path` and the JSON copy next to it.
pub fn write_selection(sel: &SelectionFile, path: &Path) -> Result<(), IoError> {
    crate::write_file(path, render_selection(sel).as_bytes())?;
    crate::write_json(&json_path(path), sel)
}

pub fn read_selection(path: &Path) -> Result<SelectionFile, ArtifactError> {
    crate::read_json(&json_path(path))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report() -> EvalReport {
        EvalReport {
            scheme: Scheme::SubjectIndependent,
            classifier: ClassifierKind::Cnn,
            accuracy_mean: 0.8380,
            accuracy_std: 0.0142,
            accuracies: vec![0.8238, 0.8522],
            confusion: [[30, 2, 2], [3, 28, 3], [1, 0, 33]],
            selected_features: vec![SelectedFeature { pair: "Pz-O2".into(), band: "8-10 Hz".into(), count: 10 }],
        }
    }

    #[test]
    fn table_one_and_two_rows() {
        let text = render_report(&report()).unwrap();
        assert!(text.contains("83.80±1.42"), "{text}");
        assert!(text.contains("| Pz-O2 | 8-10 Hz | 10 |"));
    }

    #[test]
    fn text_parses_back() {
        let rep = report();
        assert_eq!(parse_report(&render_report(&rep).unwrap()).unwrap(), rep);
        let empty = EvalReport { selected_features: vec![], ..rep };
        assert_eq!(parse_report(&render_report(&empty).unwrap()).unwrap(), empty);
    }

    #[test]
    fn zero_test_set_is_rejected() {
        let rep = EvalReport { confusion: [[0; 3]; 3], ..report() };
        assert_eq!(render_report(&rep), Err(ReportError::ZeroTestSet));
    }
}
