//! Confusion matrix and precision / recall / F1 / accuracy.
//!
//! Conventions:
//! - a ratio with a zero denominator is 0 (never-predicted class has
//!   precision 0, absent class has recall 0, F1 is 0 when both are 0);
//! - macro values are unweighted means over the classes that occur in the
//!   gold labels;
//! - micro values pool the gold-present classes.

use std::fmt;
use std::io::Write;

use crate::error::{Error, Result};
use crate::Class;

/// Counts of (gold, predicted) label pairs. Rows are gold, columns predicted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    labels: Vec<Class>,
    counts: Vec<Vec<usize>>,
    total: usize,
}

impl ConfusionMatrix {
    /// Labels in canonical order (-1, 0, 1); only those observed.
    pub fn labels(&self) -> &[Class] {
        &self.labels
    }

    pub fn total(&self) -> usize {
        self.total
    }

    /// `counts[gold][predicted]`, 0 for labels not in the matrix.
    pub fn count(&self, gold: Class, predicted: Class) -> usize {
        match (self.position(gold), self.position(predicted)) {
            (Some(g), Some(p)) => self.counts[g][p],
            _ => 0,
        }
    }

    fn position(&self, c: Class) -> Option<usize> {
        self.labels.iter().position(|&l| l == c)
    }

    pub fn trace(&self) -> usize {
        (0..self.labels.len()).map(|i| self.counts[i][i]).sum()
    }

    fn row_sum(&self, i: usize) -> usize {
        self.counts[i].iter().sum()
    }

    fn col_sum(&self, j: usize) -> usize {
        self.counts.iter().map(|r| r[j]).sum()
    }

    /// Builds a matrix from a full table indexed by [`Class::ALL`], keeping
    /// only labels with a nonzero row or column.
    pub(crate) fn from_table(table: [[usize; 3]; 3]) -> Result<Self> {
        let keep: Vec<usize> = (0..3)
            .filter(|&i| (0..3).any(|j| table[i][j] > 0 || table[j][i] > 0))
            .collect();
        if keep.is_empty() {
            return Err(Error::Empty("no labelled pairs"));
        }
        let counts = keep
            .iter()
            .map(|&g| keep.iter().map(|&p| table[g][p]).collect())
            .collect();
        Ok(ConfusionMatrix {
            labels: keep.iter().map(|&i| Class::ALL[i]).collect(),
            counts,
            total: table.iter().flatten().sum(),
        })
    }
}

pub(crate) fn class_index(c: Class) -> usize {
    (c.value() + 1) as usize
}

/// Tallies gold against predicted labels.
pub fn confusion(golds: &[Class], preds: &[Class]) -> Result<ConfusionMatrix> {
    if golds.len() != preds.len() {
        return Err(Error::LengthMismatch {
            golds: golds.len(),
            preds: preds.len(),
        });
    }
    let mut table = [[0usize; 3]; 3];
    for (&g, &p) in golds.iter().zip(preds) {
        table[class_index(g)][class_index(p)] += 1;
    }
    ConfusionMatrix::from_table(table)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassMetrics {
    pub class: Class,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Gold occurrences.
    pub support: usize,
    pub predicted: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub per_class: Vec<ClassMetrics>,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
    pub micro_precision: f64,
    pub micro_recall: f64,
    pub micro_f1: f64,
    pub accuracy: f64,
    pub total: usize,
    /// Pairs that could not be scored and were left out of the matrix.
    pub skipped: usize,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn harmonic(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

pub fn evaluate(cm: &ConfusionMatrix) -> EvalReport {
    let per_class: Vec<ClassMetrics> = cm
        .labels
        .iter()
        .enumerate()
        .map(|(i, &class)| {
            let tp = cm.counts[i][i];
            let support = cm.row_sum(i);
            let predicted = cm.col_sum(i);
            let precision = ratio(tp, predicted);
            let recall = ratio(tp, support);
            ClassMetrics {
                class,
                precision,
                recall,
                f1: harmonic(precision, recall),
                support,
                predicted,
            }
        })
        .collect();

    let present: Vec<&ClassMetrics> = per_class.iter().filter(|m| m.support > 0).collect();
    let mean = |f: fn(&ClassMetrics) -> f64| {
        if present.is_empty() {
            0.0
        } else {
            present.iter().map(|m| f(m)).sum::<f64>() / present.len() as f64
        }
    };

    let tp: usize = cm
        .labels
        .iter()
        .enumerate()
        .filter(|&(i, _)| cm.row_sum(i) > 0)
        .map(|(i, _)| cm.counts[i][i])
        .sum();
    let pooled_predicted: usize = present.iter().map(|m| m.predicted).sum();
    let pooled_support: usize = present.iter().map(|m| m.support).sum();
    let micro_precision = ratio(tp, pooled_predicted);
    let micro_recall = ratio(tp, pooled_support);

    EvalReport {
        macro_precision: mean(|m| m.precision),
        macro_recall: mean(|m| m.recall),
        macro_f1: mean(|m| m.f1),
        micro_precision,
        micro_recall,
        micro_f1: harmonic(micro_precision, micro_recall),
        accuracy: ratio(cm.trace(), cm.total),
        total: cm.total,
        skipped: 0,
        per_class,
    }
}

impl EvalReport {
    pub fn with_skipped(mut self, skipped: usize) -> Self {
        self.skipped = skipped;
        self
    }

    /// Tab-separated rows: one per class, then `macro`, `micro` and
    /// `skipped`. Columns: scope, precision, recall, f1, accuracy, support.
    pub fn write_tsv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "scope\tprecision\trecall\tf1\taccuracy\tsupport")?;
        for m in &self.per_class {
            writeln!(
                out,
                "class={}\t{:.6}\t{:.6}\t{:.6}\t-\t{}",
                m.class, m.precision, m.recall, m.f1, m.support
            )?;
        }
        writeln!(
            out,
            "macro\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{}",
            self.macro_precision, self.macro_recall, self.macro_f1, self.accuracy, self.total
        )?;
        writeln!(
            out,
            "micro\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{}",
            self.micro_precision, self.micro_recall, self.micro_f1, self.accuracy, self.total
        )?;
        writeln!(out, "skipped\t-\t-\t-\t-\t{}", self.skipped)
    }
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<10} {:>9} {:>9} {:>9} {:>9} {:>8}",
            "", "Precision", "Recall", "F1-score", "Accuracy", "Support"
        )?;
        for m in &self.per_class {
            writeln!(
                f,
                "{:<10} {:>9.4} {:>9.4} {:>9.4} {:>9} {:>8}",
                format!("class {}", m.class),
                m.precision,
                m.recall,
                m.f1,
                "",
                m.support
            )?;
        }
        for (name, p, r, f1) in [
            (
                "macro",
                self.macro_precision,
                self.macro_recall,
                self.macro_f1,
            ),
            (
                "micro",
                self.micro_precision,
                self.micro_recall,
                self.micro_f1,
            ),
        ] {
            writeln!(
                f,
                "{:<10} {:>9.4} {:>9.4} {:>9.4} {:>9.4} {:>8}",
                name, p, r, f1, self.accuracy, self.total
            )?;
        }
        write!(f, "skipped pairs: {}", self.skipped)
    }
}
