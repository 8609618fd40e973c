//! Confusion matrix, one-vs-rest class statistics and overall summary.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::label::EmotionLabel;

/// Rows are true classes, columns predicted classes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn zeros(classes: usize) -> Self {
        Self {
            counts: vec![vec![0; classes]; classes],
        }
    }

    pub fn from_counts(counts: Vec<Vec<u64>>) -> Result<Self> {
        let n = counts.len();
        if n == 0 {
            return Err(Error::EmptyMatrix);
        }
        if let Some(row) = counts.iter().find(|r| r.len() != n) {
            return Err(Error::InvalidTensor(format!(
                "confusion matrix row has {} entries, expected {n}",
                row.len()
            )));
        }
        Ok(Self { counts })
    }

    pub fn classes(&self) -> usize {
        self.counts.len()
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn get(&self, truth: usize, predicted: usize) -> u64 {
        self.counts[truth][predicted]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.classes()).map(|i| self.counts[i][i]).sum()
    }

    pub fn row_total(&self, class: usize) -> u64 {
        self.counts[class].iter().sum()
    }

    pub fn col_total(&self, class: usize) -> u64 {
        self.counts.iter().map(|r| r[class]).sum()
    }

    /// One-vs-rest `(tp, fp, fn, tn)` for `class`.
    pub fn one_vs_rest(&self, class: usize) -> (u64, u64, u64, u64) {
        let tp = self.counts[class][class];
        let fp = self.col_total(class) - tp;
        let fn_ = self.row_total(class) - tp;
        let tn = self.total() - tp - fp - fn_;
        (tp, fp, fn_, tn)
    }
}

pub fn build_confusion(truth: &[usize], predicted: &[usize], classes: usize) -> Result<ConfusionMatrix> {
    if truth.len() != predicted.len() {
        return Err(Error::LengthMismatch {
            truth: truth.len(),
            predicted: predicted.len(),
        });
    }
    if truth.is_empty() {
        return Err(Error::EmptyLabels);
    }
    let mut cm = ConfusionMatrix::zeros(classes);
    for (&t, &p) in truth.iter().zip(predicted) {
        for label in [t, p] {
            if label >= classes {
                return Err(Error::LabelOutOfRange { label, classes });
            }
        }
        cm.counts[t][p] += 1;
    }
    Ok(cm)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassStats {
    pub class: usize,
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    pub tn: u64,
    pub accuracy: f64,
    pub f1: f64,
    pub error_rate: f64,
    /// Individual classification success index: precision + sensitivity − 1.
    pub isci: f64,
    /// Optimized precision: accuracy − |specificity − sensitivity| / (specificity + sensitivity).
    pub op: f64,
    pub sensitivity: f64,
    pub specificity: f64,
    pub precision: f64,
    pub youden: f64,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl ClassStats {
    /// Statistics from one-vs-rest counts. Precision, specificity and F1
    /// are 0 when their denominators are.
    pub fn from_counts(class: usize, tp: u64, fp: u64, fn_: u64, tn: u64) -> Result<Self> {
        if tp + fn_ == 0 {
            return Err(Error::ZeroSupport(class));
        }
        let n = tp + fp + fn_ + tn;
        let sensitivity = ratio(tp, tp + fn_);
        let specificity = ratio(tn, tn + fp);
        let precision = ratio(tp, tp + fp);
        let accuracy = ratio(tp + tn, n);
        let f1 = if precision + sensitivity == 0.0 {
            0.0
        } else {
            2.0 * precision * sensitivity / (precision + sensitivity)
        };
        let balance = specificity + sensitivity;
        let op = if balance == 0.0 {
            accuracy
        } else {
            accuracy - (specificity - sensitivity).abs() / balance
        };
        Ok(Self {
            class,
            tp,
            fp,
            fn_,
            tn,
            accuracy,
            f1,
            error_rate: 1.0 - accuracy,
            isci: precision + sensitivity - 1.0,
            op,
            sensitivity,
            specificity,
            precision,
            youden: sensitivity + specificity - 1.0,
        })
    }
}

pub fn per_class_stats(cm: &ConfusionMatrix, class: usize) -> Result<ClassStats> {
    if class >= cm.classes() {
        return Err(Error::LabelOutOfRange {
            label: class,
            classes: cm.classes(),
        });
    }
    let (tp, fp, fn_, tn) = cm.one_vs_rest(class);
    ClassStats::from_counts(class, tp, fp, fn_, tn)
}

fn check_unit(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::OutOfRange { name, value })
    }
}

pub fn youden(sensitivity: f64, specificity: f64) -> Result<f64> {
    check_unit("sensitivity", sensitivity)?;
    check_unit("specificity", specificity)?;
    Ok(sensitivity + specificity - 1.0)
}

/// Cohen's kappa `(p_o − p_e) / (1 − p_e)`.
pub fn kappa(observed: f64, expected: f64) -> Result<f64> {
    check_unit("observed agreement", observed)?;
    check_unit("expected agreement", expected)?;
    if expected == 1.0 {
        return Err(Error::DegenerateAgreement);
    }
    Ok((observed - expected) / (1.0 - expected))
}

/// Chance agreement from the marginals: `Σ_c (row_c / N)·(col_c / N)`.
pub fn expected_agreement(cm: &ConfusionMatrix) -> Result<f64> {
    let n = cm.total();
    if n == 0 {
        return Err(Error::EmptyMatrix);
    }
    let n = n as f64;
    Ok((0..cm.classes())
        .map(|c| (cm.row_total(c) as f64 / n) * (cm.col_total(c) as f64 / n))
        .sum())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverallSummary {
    pub total: u64,
    pub correct: u64,
    /// Micro accuracy, `trace / total`.
    pub accuracy: f64,
    /// Mean of the per-class one-vs-rest accuracies.
    pub accuracy_macro: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Mean of the per-class specificities.
    pub specificity: f64,
    pub expected_agreement: f64,
    pub kappa: f64,
}

pub fn overall_summary(cm: &ConfusionMatrix) -> Result<OverallSummary> {
    let total = cm.total();
    if total == 0 {
        return Err(Error::EmptyMatrix);
    }
    let k = cm.classes() as f64;
    let (mut acc_sum, mut spec_sum) = (0.0, 0.0);
    for c in 0..cm.classes() {
        let (tp, fp, _, tn) = cm.one_vs_rest(c);
        acc_sum += ratio(tp + tn, total);
        spec_sum += ratio(tn, tn + fp);
    }
    let correct = cm.trace();
    let accuracy = ratio(correct, total);
    let pe = expected_agreement(cm)?;
    // Every sample is one prediction, so micro precision, recall and F1 all
    // reduce to the micro accuracy.
    Ok(OverallSummary {
        total,
        correct,
        accuracy,
        accuracy_macro: acc_sum / k,
        precision: accuracy,
        recall: accuracy,
        f1: accuracy,
        specificity: spec_sum / k,
        expected_agreement: pe,
        kappa: if pe == 1.0 { 1.0 } else { kappa(accuracy, pe)? },
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub confusion: ConfusionMatrix,
    pub classes: Vec<ClassStats>,
    pub overall: OverallSummary,
}

/// Table row: label, field accessor, whether it is printed as a percentage.
type Row = (&'static str, fn(&ClassStats) -> f64, bool);

fn class_name(class: usize, classes: usize) -> String {
    match EmotionLabel::from_code(class) {
        Some(l) if classes == EmotionLabel::ALL.len() => l.name().to_string(),
        _ => format!("class{class}"),
    }
}

impl MetricsReport {
    /// Full report. Fails with a zero-support error when a class never
    /// occurs in the ground truth.
    pub fn from_confusion(cm: ConfusionMatrix) -> Result<Self> {
        let classes = (0..cm.classes())
            .map(|c| per_class_stats(&cm, c))
            .collect::<Result<Vec<_>>>()?;
        let overall = overall_summary(&cm)?;
        Ok(Self {
            confusion: cm,
            classes,
            overall,
        })
    }

    pub fn to_text(&self) -> String {
        let n = self.confusion.classes();
        let names: Vec<String> = (0..n).map(|c| class_name(c, n)).collect();
        let mut out = String::new();
        let _ = writeln!(out, "Per-class statistics");
        let _ = write!(out, "{:<14}", "statistic");
        for name in &names {
            let _ = write!(out, "{name:>11}");
        }
        out.push('\n');
        let rows: [Row; 9] = [
            ("accuracy", |s| s.accuracy, true),
            ("f1", |s| s.f1, false),
            ("error_rate", |s| s.error_rate, false),
            ("isci", |s| s.isci, false),
            ("op", |s| s.op, false),
            ("sensitivity", |s| s.sensitivity, false),
            ("specificity", |s| s.specificity, false),
            ("precision", |s| s.precision, false),
            ("youden", |s| s.youden, false),
        ];
        for (label, get, percent) in rows {
            let _ = write!(out, "{label:<14}");
            for s in &self.classes {
                if percent {
                    let _ = write!(out, "{:>10.3}%", 100.0 * get(s));
                } else {
                    let _ = write!(out, "{:>11.5}", get(s));
                }
            }
            out.push('\n');
        }
        let o = &self.overall;
        let _ = writeln!(out, "\nOverall");
        let _ = writeln!(out, "{:<18}{:.3}%", "test accuracy", 100.0 * o.accuracy);
        let _ = writeln!(out, "{:<18}{:.3}%", "accuracy macro", 100.0 * o.accuracy_macro);
        for (label, v) in [
            ("precision", o.precision),
            ("recall", o.recall),
            ("f1", o.f1),
            ("specificity", o.specificity),
            ("kappa", o.kappa),
        ] {
            let _ = writeln!(out, "{label:<18}{v:.5}");
        }
        let _ = writeln!(out, "{:<18}{}/{}", "correct", o.correct, o.total);
        let _ = writeln!(out, "\nConfusion matrix (rows true, columns predicted)");
        for (c, row) in self.confusion.counts().iter().enumerate() {
            let _ = write!(out, "{:<11}", names[c]);
            for v in row {
                let _ = write!(out, "{v:>6}");
            }
            out.push('\n');
        }
        out
    }

    /// One `key=value` record per line, full precision.
    pub fn to_kv(&self) -> String {
        let n = self.confusion.classes();
        let mut out = String::new();
        let o = &self.overall;
        for (k, v) in [
            ("accuracy", o.accuracy),
            ("accuracy_macro", o.accuracy_macro),
            ("precision", o.precision),
            ("recall", o.recall),
            ("f1", o.f1),
            ("specificity", o.specificity),
            ("expected_agreement", o.expected_agreement),
            ("kappa", o.kappa),
        ] {
            let _ = writeln!(out, "overall.{k}={v}");
        }
        let _ = writeln!(out, "overall.correct={}", o.correct);
        let _ = writeln!(out, "overall.total={}", o.total);
        for s in &self.classes {
            let name = class_name(s.class, n);
            for (k, v) in [
                ("accuracy", s.accuracy),
                ("f1", s.f1),
                ("error_rate", s.error_rate),
                ("isci", s.isci),
                ("op", s.op),
                ("sensitivity", s.sensitivity),
                ("specificity", s.specificity),
                ("precision", s.precision),
                ("youden", s.youden),
            ] {
                let _ = writeln!(out, "class.{name}.{k}={v}");
            }
        }
        for (t, row) in self.confusion.counts().iter().enumerate() {
            let cells: Vec<String> = row.iter().map(u64::to_string).collect();
            let _ = writeln!(out, "confusion.{}={}", class_name(t, n), cells.join(","));
        }
        out
    }
}
