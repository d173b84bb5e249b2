//! Threshold classification of a proximity value and training of the
//! thresholds.
//!
//! With lower bound `a` and upper bound `b`:
//!
//! ```text
//!  1   if μ ≥ b
//!  0   if a ≤ μ < b
//! -1   if μ < a
//! ```
//!
//! Two-class modes keep one bound. `two_class_merge_low` folds gold class 0
//! into -1 and predicts 1 iff `μ ≥ b`; `two_class_merge_high` folds 0 into 1
//! and predicts 1 iff `μ ≥ a`.
//!
//! Training is an exhaustive search over thresholds placed at 0, 1, and the
//! midpoints between consecutive distinct training proximities. Every
//! candidate is scored from the same confusion-matrix code used for
//! evaluation, so training and evaluation numbers agree exactly.

use std::cmp::Ordering;
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;

use crate::corpus::ScoredPair;
use crate::error::{Error, Result};
use crate::metrics::{self, class_index, ConfusionMatrix, EvalReport};
use crate::Class;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    ThreeClass,
    /// Classes 0 and -1 merged (reported as -1); only `b` is used.
    TwoClassMergeLow,
    /// Classes 1 and 0 merged (reported as 1); only `a` is used.
    TwoClassMergeHigh,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::ThreeClass => "three_class",
            Mode::TwoClassMergeLow => "two_class_merge_low",
            Mode::TwoClassMergeHigh => "two_class_merge_high",
        }
    }

    /// Gold label as seen by this mode.
    pub fn map_gold(self, class: Class) -> Class {
        match (self, class) {
            (Mode::TwoClassMergeLow, Class::Unsure) => Class::NotParaphrase,
            (Mode::TwoClassMergeHigh, Class::Unsure) => Class::Paraphrase,
            (_, c) => c,
        }
    }

    fn required_classes(self) -> &'static [Class] {
        match self {
            Mode::ThreeClass => &Class::ALL,
            _ => &[Class::NotParaphrase, Class::Paraphrase],
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "three_class" => Ok(Mode::ThreeClass),
            "two_class_merge_low" => Ok(Mode::TwoClassMergeLow),
            "two_class_merge_high" => Ok(Mode::TwoClassMergeHigh),
            other => Err(Error::InvalidModel(format!("unknown mode {other:?}"))),
        }
    }
}

/// Training objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Objective {
    #[default]
    MacroPrecision,
    Accuracy,
}

impl Objective {
    pub fn name(self) -> &'static str {
        match self {
            Objective::MacroPrecision => "macro_precision",
            Objective::Accuracy => "accuracy",
        }
    }

    fn of(self, report: &EvalReport) -> f64 {
        match self {
            Objective::MacroPrecision => report.macro_precision,
            Objective::Accuracy => report.accuracy,
        }
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Objective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "macro_precision" => Ok(Objective::MacroPrecision),
            "accuracy" => Ok(Objective::Accuracy),
            other => Err(Error::InvalidModel(format!("unknown objective {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdModel {
    mode: Mode,
    lower: Option<f64>,
    upper: Option<f64>,
}

impl ThresholdModel {
    pub fn new(mode: Mode, lower: Option<f64>, upper: Option<f64>) -> Result<Self> {
        let in_unit = |x: f64| (0.0..=1.0).contains(&x);
        let ok = match (mode, lower, upper) {
            (Mode::ThreeClass, Some(a), Some(b)) => in_unit(a) && in_unit(b) && a <= b,
            (Mode::TwoClassMergeLow, None, Some(b)) => in_unit(b),
            (Mode::TwoClassMergeHigh, Some(a), None) => in_unit(a),
            _ => false,
        };
        if ok {
            Ok(ThresholdModel { mode, lower, upper })
        } else {
            Err(Error::InvalidModel(format!(
                "{mode} with lower {lower:?} and upper {upper:?}"
            )))
        }
    }

    pub fn three_class(a: f64, b: f64) -> Result<Self> {
        ThresholdModel::new(Mode::ThreeClass, Some(a), Some(b))
    }

    pub fn merge_low(b: f64) -> Result<Self> {
        ThresholdModel::new(Mode::TwoClassMergeLow, None, Some(b))
    }

    pub fn merge_high(a: f64) -> Result<Self> {
        ThresholdModel::new(Mode::TwoClassMergeHigh, Some(a), None)
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn lower(&self) -> Option<f64> {
        self.lower
    }

    pub fn upper(&self) -> Option<f64> {
        self.upper
    }

    pub fn predict(&self, mu: f64) -> Result<Class> {
        predict(mu, self)
    }
}

/// Class for proximity `mu`. Boundary values go to the higher class.
pub fn predict(mu: f64, model: &ThresholdModel) -> Result<Class> {
    if !(0.0..=1.0).contains(&mu) {
        return Err(Error::InvalidProximity(mu));
    }
    let class = match (model.mode, model.lower, model.upper) {
        (Mode::ThreeClass, Some(a), Some(b)) => {
            if mu >= b {
                Class::Paraphrase
            } else if mu >= a {
                Class::Unsure
            } else {
                Class::NotParaphrase
            }
        }
        (Mode::TwoClassMergeLow, _, Some(b)) | (Mode::TwoClassMergeHigh, Some(b), _) => {
            if mu >= b {
                Class::Paraphrase
            } else {
                Class::NotParaphrase
            }
        }
        _ => unreachable!("model invariants checked at construction"),
    };
    Ok(class)
}

/// Which rule settled the choice among equally good candidates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TieBreak {
    /// Only one candidate reached the best objective.
    Unique,
    MacroRecall,
    UpperBound,
    LowerBound,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub model: ThresholdModel,
    pub objective: Objective,
    pub objective_value: f64,
    /// Evaluation of the chosen model on the training pairs.
    pub train_eval: EvalReport,
    /// Distinct threshold values considered.
    pub thresholds: usize,
    /// Candidate models scored (pairs `a ≤ b` in three-class mode).
    pub grid_size: usize,
    /// Candidates sharing the best objective value.
    pub ties_at_objective: usize,
    /// Of those, candidates also sharing the best macro recall.
    pub ties_after_recall: usize,
    pub tie_break: TieBreak,
    /// Set when the grid collapsed to the boundary thresholds 0 and 1.
    pub note: Option<String>,
    pub used: usize,
    pub skipped: usize,
}

impl fmt::Display for TrainReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let bound = |b: Option<f64>| b.map_or_else(|| "--".to_owned(), |v| format!("{v:.4}"));
        writeln!(f, "mode: {}", self.model.mode)?;
        writeln!(f, "{:<10} {:<10}", "Lower (a)", "Upper (b)")?;
        writeln!(
            f,
            "{:<10} {:<10}",
            bound(self.model.lower),
            bound(self.model.upper)
        )?;
        writeln!(
            f,
            "training {}: {:.4} (accuracy {:.4}, macro precision {:.4})",
            self.objective,
            self.objective_value,
            self.train_eval.accuracy,
            self.train_eval.macro_precision
        )?;
        writeln!(
            f,
            "grid: {} candidates over {} thresholds; {} tied at best objective, {} after recall; tie-break: {:?}",
            self.grid_size, self.thresholds, self.ties_at_objective, self.ties_after_recall, self.tie_break
        )?;
        if let Some(note) = &self.note {
            writeln!(f, "note: {note}")?;
        }
        write!(f, "pairs used: {}, skipped: {}", self.used, self.skipped)
    }
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    lower: Option<f64>,
    upper: Option<f64>,
    objective: f64,
    recall: f64,
}

/// Total order: larger is better.
fn rank(x: &Candidate, y: &Candidate) -> Ordering {
    let bound = |p: Option<f64>, q: Option<f64>| match (p, q) {
        (Some(p), Some(q)) => q.total_cmp(&p),
        _ => Ordering::Equal,
    };
    x.objective
        .total_cmp(&y.objective)
        .then(x.recall.total_cmp(&y.recall))
        .then(bound(x.upper, y.upper))
        .then(bound(x.lower, y.lower))
}

fn better(x: Candidate, y: Candidate) -> Candidate {
    if rank(&y, &x) == Ordering::Greater {
        y
    } else {
        x
    }
}

/// Thresholds at 0, 1 and midpoints of consecutive distinct values.
pub fn candidate_thresholds(proximities: &[f64]) -> Vec<f64> {
    let mut values = proximities.to_vec();
    values.sort_by(f64::total_cmp);
    values.dedup();
    let mut out = vec![0.0];
    out.extend(values.windows(2).map(|w| w[0] + (w[1] - w[0]) / 2.0));
    out.push(1.0);
    out.sort_by(f64::total_cmp);
    out.dedup();
    out
}

/// Searches the threshold grid for the model maximizing `objective` on the
/// scored training pairs. Skipped pairs are ignored.
pub fn train(
    scored: &[ScoredPair],
    mode: Mode,
    objective: Objective,
) -> Result<(ThresholdModel, TrainReport)> {
    let mut data: Vec<(f64, usize)> = Vec::with_capacity(scored.len());
    for s in scored {
        if let Some(mu) = s.proximity() {
            if !(0.0..=1.0).contains(&mu) {
                return Err(Error::InvalidProximity(mu));
            }
            data.push((mu, class_index(mode.map_gold(s.record.gold))));
        }
    }
    let skipped = scored.len() - data.len();
    let mut class_totals = [0usize; 3];
    for &(_, g) in &data {
        class_totals[g] += 1;
    }
    let absent: Vec<String> = mode
        .required_classes()
        .iter()
        .filter(|&&c| class_totals[class_index(c)] == 0)
        .map(|c| c.to_string())
        .collect();
    if !absent.is_empty() {
        return Err(Error::DegenerateTraining(format!(
            "{mode} needs every class present; missing {} among {} usable pairs",
            absent.join(", "),
            data.len()
        )));
    }

    data.sort_by(|x, y| x.0.total_cmp(&y.0));
    let proximities: Vec<f64> = data.iter().map(|d| d.0).collect();
    let thresholds = candidate_thresholds(&proximities);

    // below[k][g]: pairs of gold g with μ < thresholds[k]
    let mut below = Vec::with_capacity(thresholds.len());
    let mut counts = [0usize; 3];
    let mut cursor = 0;
    for &t in &thresholds {
        while cursor < data.len() && data[cursor].0 < t {
            counts[data[cursor].1] += 1;
            cursor += 1;
        }
        below.push(counts);
    }

    let score = |lower: Option<usize>, upper: Option<usize>| -> Result<(Candidate, EvalReport)> {
        let mut table = [[0usize; 3]; 3];
        let (neg, mid, pos) = (0, 1, 2);
        for g in 0..3 {
            let total = class_totals[g];
            match (lower, upper) {
                (Some(i), Some(j)) => {
                    table[g][neg] = below[i][g];
                    table[g][mid] = below[j][g] - below[i][g];
                    table[g][pos] = total - below[j][g];
                }
                (Some(k), None) | (None, Some(k)) => {
                    table[g][neg] = below[k][g];
                    table[g][pos] = total - below[k][g];
                }
                (None, None) => unreachable!(),
            }
        }
        let report = metrics::evaluate(&ConfusionMatrix::from_table(table)?);
        Ok((
            Candidate {
                lower: lower.map(|i| thresholds[i]),
                upper: upper.map(|j| thresholds[j]),
                objective: objective.of(&report),
                recall: report.macro_recall,
            },
            report,
        ))
    };

    let k = thresholds.len();
    let grid: Vec<(Option<usize>, Option<usize>)> = match mode {
        Mode::ThreeClass => (0..k)
            .flat_map(|i| (i..k).map(move |j| (Some(i), Some(j))))
            .collect(),
        Mode::TwoClassMergeLow => (0..k).map(|j| (None, Some(j))).collect(),
        Mode::TwoClassMergeHigh => (0..k).map(|i| (Some(i), None)).collect(),
    };
    let scored_grid: Vec<Candidate> = grid
        .par_iter()
        .map(|&(i, j)| score(i, j).map(|(c, _)| c))
        .collect::<Result<_>>()?;
    let best = scored_grid
        .iter()
        .copied()
        .reduce(better)
        .expect("grid always holds the 0 and 1 thresholds");

    let ties_at_objective = scored_grid
        .iter()
        .filter(|c| c.objective == best.objective)
        .count();
    let ties_after_recall = scored_grid
        .iter()
        .filter(|c| c.objective == best.objective && c.recall == best.recall)
        .count();
    let ties_after_upper = scored_grid
        .iter()
        .filter(|c| {
            c.objective == best.objective && c.recall == best.recall && c.upper == best.upper
        })
        .count();
    let tie_break = if ties_at_objective == 1 {
        TieBreak::Unique
    } else if ties_after_recall == 1 {
        TieBreak::MacroRecall
    } else if ties_after_upper == 1 && mode != Mode::TwoClassMergeHigh {
        TieBreak::UpperBound
    } else {
        TieBreak::LowerBound
    };

    let model = ThresholdModel::new(mode, best.lower, best.upper)?;
    let train_eval = evaluate_scored(scored, &model)?;
    let note = (k == 2).then(|| {
        "all training proximities are equal; only the boundary thresholds 0 and 1 were available"
            .to_owned()
    });
    let report = TrainReport {
        model,
        objective,
        objective_value: best.objective,
        train_eval,
        thresholds: k,
        grid_size: grid.len(),
        ties_at_objective,
        ties_after_recall,
        tie_break,
        note,
        used: data.len(),
        skipped,
    };
    Ok((model, report))
}

/// Applies `model` to every scored pair and evaluates against the gold
/// labels (mapped through the model's mode). Skipped pairs are counted, not
/// classified.
pub fn evaluate_scored(scored: &[ScoredPair], model: &ThresholdModel) -> Result<EvalReport> {
    let mut golds = Vec::with_capacity(scored.len());
    let mut preds = Vec::with_capacity(scored.len());
    for s in scored {
        if let Some(mu) = s.proximity() {
            golds.push(model.mode.map_gold(s.record.gold));
            preds.push(predict(mu, model)?);
        }
    }
    let skipped = scored.len() - golds.len();
    if golds.is_empty() {
        return Err(Error::Empty("every pair was skipped"));
    }
    Ok(metrics::evaluate(&metrics::confusion(&golds, &preds)?).with_skipped(skipped))
}

/// Contents of a model file: one `key=value` line per field, fixed order.
///
/// ```text
/// mode=three_class
/// lower_a=0.345
/// upper_b=0.7
/// objective=macro_precision
/// objective_value=1
/// grid_size=2415
/// version=0.1.0
/// ```
///
/// An unused bound is written as `--`.
#[derive(Debug, Clone, PartialEq)]
pub struct SavedModel {
    pub model: ThresholdModel,
    pub objective: Objective,
    pub objective_value: f64,
    pub grid_size: usize,
    pub version: String,
}

impl SavedModel {
    pub fn from_report(report: &TrainReport) -> Self {
        SavedModel {
            model: report.model,
            objective: report.objective,
            objective_value: report.objective_value,
            grid_size: report.grid_size,
            version: crate::VERSION.to_owned(),
        }
    }

    pub fn write<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let bound = |b: Option<f64>| b.map_or_else(|| "--".to_owned(), |v| v.to_string());
        writeln!(out, "mode={}", self.model.mode)?;
        writeln!(out, "lower_a={}", bound(self.model.lower))?;
        writeln!(out, "upper_b={}", bound(self.model.upper))?;
        writeln!(out, "objective={}", self.objective)?;
        writeln!(out, "objective_value={}", self.objective_value)?;
        writeln!(out, "grid_size={}", self.grid_size)?;
        writeln!(out, "version={}", self.version)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut buf = Vec::new();
        self.write(&mut buf).expect("writing to a Vec cannot fail");
        std::fs::write(path, buf).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        text.parse()
    }
}

impl FromStr for SavedModel {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        const KEYS: [&str; 7] = [
            "mode",
            "lower_a",
            "upper_b",
            "objective",
            "objective_value",
            "grid_size",
            "version",
        ];
        let mut values: [Option<&str>; 7] = [None; 7];
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::InvalidModel(format!("line {line:?} is not key=value")))?;
            let slot = KEYS
                .iter()
                .position(|k| *k == key.trim())
                .ok_or_else(|| Error::InvalidModel(format!("unknown key {key:?}")))?;
            if values[slot].replace(value.trim()).is_some() {
                return Err(Error::InvalidModel(format!("duplicate key {key:?}")));
            }
        }
        let get = |i: usize| {
            values[i].ok_or_else(|| Error::InvalidModel(format!("missing key {:?}", KEYS[i])))
        };
        let bound = |i: usize| -> Result<Option<f64>> {
            match get(i)? {
                "--" => Ok(None),
                v => v.parse().map(Some).map_err(|_| {
                    Error::InvalidModel(format!("{} = {v:?} is not a number", KEYS[i]))
                }),
            }
        };
        let mode: Mode = get(0)?.parse()?;
        let model = ThresholdModel::new(mode, bound(1)?, bound(2)?)?;
        let objective_value = get(4)?
            .parse()
            .map_err(|_| Error::InvalidModel("objective_value is not a number".into()))?;
        let grid_size = get(5)?
            .parse()
            .map_err(|_| Error::InvalidModel("grid_size is not an integer".into()))?;
        Ok(SavedModel {
            model,
            objective: get(3)?.parse()?,
            objective_value,
            grid_size,
            version: get(6)?.to_owned(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::PairRecord;
    use proptest::prelude::*;

    fn pair(mu: f64, gold: Class) -> ScoredPair {
        ScoredPair {
            record: PairRecord {
                id: String::new(),
                text1: "x".into(),
                text2: "y".into(),
                gold,
            },
            outcome: Ok(mu),
        }
    }

    #[test]
    fn predict_examples() {
        let m = ThresholdModel::three_class(0.47, 0.96).unwrap();
        assert_eq!(predict(0.98, &m).unwrap(), Class::Paraphrase);
        assert_eq!(predict(0.50, &m).unwrap(), Class::Unsure);
        assert_eq!(predict(0.10, &m).unwrap(), Class::NotParaphrase);
        assert_eq!(predict(0.96, &m).unwrap(), Class::Paraphrase);
        assert_eq!(predict(0.47, &m).unwrap(), Class::Unsure);
        assert_eq!(predict(1.0, &m).unwrap(), Class::Paraphrase);
        assert!(matches!(predict(1.5, &m), Err(Error::InvalidProximity(_))));
        assert!(matches!(predict(-0.1, &m), Err(Error::InvalidProximity(_))));
        assert!(matches!(
            predict(f64::NAN, &m),
            Err(Error::InvalidProximity(_))
        ));
    }

    #[test]
    fn two_class_predictions() {
        let low = ThresholdModel::merge_low(0.96).unwrap();
        assert_eq!(predict(0.97, &low).unwrap(), Class::Paraphrase);
        assert_eq!(predict(0.5, &low).unwrap(), Class::NotParaphrase);
        let high = ThresholdModel::merge_high(0.47).unwrap();
        assert_eq!(predict(0.5, &high).unwrap(), Class::Paraphrase);
        assert_eq!(predict(0.4, &high).unwrap(), Class::NotParaphrase);
    }

    #[test]
    fn model_invariants() {
        assert!(ThresholdModel::three_class(0.6, 0.5).is_err());
        assert!(ThresholdModel::three_class(-0.1, 0.5).is_err());
        assert!(ThresholdModel::new(Mode::TwoClassMergeLow, Some(0.1), Some(0.5)).is_err());
        assert!(ThresholdModel::new(Mode::TwoClassMergeHigh, None, Some(0.5)).is_err());
        assert!(ThresholdModel::merge_low(1.2).is_err());
        assert!(ThresholdModel::three_class(0.5, 0.5).is_ok());
    }

    #[test]
    fn candidate_grid() {
        assert_eq!(
            candidate_thresholds(&[0.2, 0.4, 0.4, 0.8]),
            vec![0.0, 0.30000000000000004, 0.6000000000000001, 1.0]
        );
        assert_eq!(candidate_thresholds(&[0.5]), vec![0.0, 1.0]);
        assert_eq!(candidate_thresholds(&[0.0, 1.0]), vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn separable_two_class_training() {
        let mut scored = Vec::new();
        for i in 0..20 {
            scored.push(pair(0.9 + 0.005 * i as f64, Class::Paraphrase));
            scored.push(pair(0.5 - 0.02 * i as f64, Class::Unsure));
            scored.push(pair(0.3 - 0.01 * i as f64, Class::NotParaphrase));
        }
        let (model, report) =
            train(&scored, Mode::TwoClassMergeLow, Objective::MacroPrecision).unwrap();
        let b = model.upper().unwrap();
        assert!(b > 0.5 && b < 0.9, "{b}");
        assert_eq!(model.lower(), None);
        assert_eq!(report.objective_value, 1.0);
        assert_eq!(report.train_eval.accuracy, 1.0);
    }

    #[test]
    fn planted_three_class_bands() {
        let mut scored = Vec::new();
        for i in 0..30 {
            let t = i as f64 / 30.0;
            scored.push(pair(0.3 * t, Class::NotParaphrase));
            scored.push(pair(0.4 + 0.2 * t, Class::Unsure));
            scored.push(pair(0.8 + 0.2 * t, Class::Paraphrase));
        }
        let (model, report) = train(&scored, Mode::ThreeClass, Objective::MacroPrecision).unwrap();
        let (a, b) = (model.lower().unwrap(), model.upper().unwrap());
        assert!(a > 0.3 && a < 0.4, "{a}");
        assert!(b > 0.6 && b < 0.8, "{b}");
        assert_eq!(report.objective_value, 1.0);
        assert_eq!(report.tie_break, TieBreak::Unique);
        let k = report.thresholds;
        assert_eq!(report.grid_size, k * (k + 1) / 2);
    }

    #[test]
    fn single_value_uses_boundaries_and_says_so() {
        let scored = vec![
            pair(0.5, Class::Paraphrase),
            pair(0.5, Class::NotParaphrase),
            pair(0.5, Class::Unsure),
        ];
        let (model, report) =
            train(&scored, Mode::TwoClassMergeLow, Objective::MacroPrecision).unwrap();
        assert_eq!(report.thresholds, 2);
        assert!(report.note.is_some());
        // b = 0 predicts everything 1: precision (1/3 + 0)/2; b = 1 predicts all -1: (0 + 2/3)/2
        assert_eq!(model.upper(), Some(1.0));
        assert!((report.objective_value - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(report.tie_break, TieBreak::Unique);
    }

    #[test]
    fn ties_prefer_lower_upper_bound() {
        // b = 0.3 and b = 0.7 both reach precision 5/6 and recall 3/4
        let scored = vec![
            pair(0.2, Class::NotParaphrase),
            pair(0.4, Class::Paraphrase),
            pair(0.6, Class::NotParaphrase),
            pair(0.8, Class::Paraphrase),
        ];
        let (model, report) =
            train(&scored, Mode::TwoClassMergeLow, Objective::MacroPrecision).unwrap();
        assert!((model.upper().unwrap() - 0.3).abs() < 1e-12);
        assert!((report.objective_value - 5.0 / 6.0).abs() < 1e-12);
        assert_eq!((report.ties_at_objective, report.ties_after_recall), (2, 2));
        assert_eq!(report.tie_break, TieBreak::UpperBound);
    }

    #[test]
    fn missing_class_is_degenerate() {
        let scored = vec![pair(0.2, Class::Paraphrase), pair(0.3, Class::Unsure)];
        assert!(matches!(
            train(&scored, Mode::ThreeClass, Objective::MacroPrecision),
            Err(Error::DegenerateTraining(_))
        ));
        // merged-high folds 0 into 1, so -1 is missing
        assert!(matches!(
            train(&scored, Mode::TwoClassMergeHigh, Objective::MacroPrecision),
            Err(Error::DegenerateTraining(_))
        ));
        // merged-low folds 0 into -1: both sides present
        assert!(train(&scored, Mode::TwoClassMergeLow, Objective::MacroPrecision).is_ok());
    }

    #[test]
    fn skipped_pairs_are_ignored_in_training() {
        let mut scored = vec![
            pair(0.1, Class::NotParaphrase),
            pair(0.9, Class::Paraphrase),
        ];
        scored.push(ScoredPair {
            outcome: Err(crate::corpus::SkipReason::Measure("x".into())),
            ..pair(0.0, Class::Paraphrase)
        });
        let (_, report) =
            train(&scored, Mode::TwoClassMergeLow, Objective::MacroPrecision).unwrap();
        assert_eq!((report.used, report.skipped), (2, 1));
        assert_eq!(report.train_eval.skipped, 1);
    }

    #[test]
    fn saved_model_round_trip_and_layout() {
        let saved = SavedModel {
            model: ThresholdModel::merge_low(0.9612).unwrap(),
            objective: Objective::MacroPrecision,
            objective_value: 0.75,
            grid_size: 12,
            version: "0.1.0".into(),
        };
        let mut buf = Vec::new();
        saved.write(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "mode=two_class_merge_low\nlower_a=--\nupper_b=0.9612\nobjective=macro_precision\n\
             objective_value=0.75\ngrid_size=12\nversion=0.1.0\n"
        );
        assert_eq!(text.parse::<SavedModel>().unwrap(), saved);
    }

    #[test]
    fn saved_model_rejects_garbage() {
        assert!("mode=three_class\n".parse::<SavedModel>().is_err());
        assert!("nonsense".parse::<SavedModel>().is_err());
        let bad_bounds = "mode=three_class\nlower_a=0.9\nupper_b=0.1\nobjective=accuracy\n\
                          objective_value=1\ngrid_size=1\nversion=x\n";
        assert!(matches!(
            bad_bounds.parse::<SavedModel>(),
            Err(Error::InvalidModel(_))
        ));
    }

    proptest! {
        #[test]
        fn predict_is_monotone_and_total(
            a in 0.0f64..=1.0, b in 0.0f64..=1.0, x in 0.0f64..=1.0, y in 0.0f64..=1.0,
        ) {
            let (a, b) = if a <= b { (a, b) } else { (b, a) };
            let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
            for m in [
                ThresholdModel::three_class(a, b).unwrap(),
                ThresholdModel::merge_low(b).unwrap(),
                ThresholdModel::merge_high(a).unwrap(),
            ] {
                prop_assert!(predict(lo, &m).unwrap() <= predict(hi, &m).unwrap());
            }
        }

        #[test]
        fn merge_low_agrees_with_three_class_at_zero_lower(b in 0.0f64..=1.0, mu in 0.0f64..=1.0) {
            let three = ThresholdModel::three_class(0.0, b).unwrap();
            let low = ThresholdModel::merge_low(b).unwrap();
            let mapped = Mode::TwoClassMergeLow.map_gold(predict(mu, &three).unwrap());
            prop_assert_eq!(mapped, predict(mu, &low).unwrap());
        }

        #[test]
        fn chosen_model_beats_every_grid_candidate(
            points in prop::collection::vec((0u8..=20, 0usize..3), 3..40),
        ) {
            let scored: Vec<ScoredPair> = points
                .iter()
                .map(|&(q, c)| pair(q as f64 / 20.0, Class::ALL[c]))
                .collect();
            let Ok((model, report)) = train(&scored, Mode::ThreeClass, Objective::MacroPrecision) else {
                return Ok(());
            };
            let best = evaluate_scored(&scored, &model).unwrap().macro_precision;
            prop_assert_eq!(best, report.objective_value);
            let mus: Vec<f64> = points.iter().map(|&(q, _)| q as f64 / 20.0).collect();
            let grid = candidate_thresholds(&mus);
            for (i, &a) in grid.iter().enumerate() {
                for &b in &grid[i..] {
                    let m = ThresholdModel::three_class(a, b).unwrap();
                    prop_assert!(evaluate_scored(&scored, &m).unwrap().macro_precision <= best);
                }
            }
        }
    }
}
