//! Labelled paraphrase pairs: loading, seeded splitting, batch scoring.
//!
//! Pair files are UTF-8, tab separated, four columns: `id`, `text1`,
//! `text2`, `class` with class in {-1, 0, 1}. A first line whose class field
//! is not an integer is taken as a header. Blank ids are replaced by
//! `L<line number>`.
//!
//! Splits shuffle with a 64-bit linear congruential generator
//!
//! ```text
//! state ← state · 6364136223846793005 + 1442695040888963407   (mod 2⁶⁴)
//! ```
//!
//! seeded with `state = seed`, then Fisher–Yates from the last index down:
//! for `i = N-1 … 1`, advance the state and swap `i` with
//! `j = (state >> 32) mod (i + 1)`. The first `round(fraction · N)` items
//! (clamped to `1 ..= N-1`) form the training part.

use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::embeddings::{sentence_to_group, tokenize, EmbeddingTable};
use crate::error::{Error, Result};
use crate::groupsim::{pairwise_mean_cosine, sim_symmetric_with, SimOptions};
use crate::{Class, ParseClassError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairRecord {
    pub id: String,
    pub text1: String,
    pub text2: String,
    pub gold: Class,
}

pub fn load_pairs(path: impl AsRef<Path>) -> Result<Vec<PairRecord>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_pairs(BufReader::new(file), path)
}

pub fn read_pairs<R: BufRead>(reader: R, source: impl AsRef<Path>) -> Result<Vec<PairRecord>> {
    let source = source.as_ref();
    let parse_err = |line: usize, message: String| Error::Parse {
        path: source.to_path_buf(),
        line,
        message,
    };

    let mut records = Vec::new();
    let mut seen_content = false;
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::io(source, e))?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let first = !seen_content;
        seen_content = true;

        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 4 {
            return Err(parse_err(
                lineno,
                format!("expected 4 tab-separated columns, found {}", fields.len()),
            ));
        }
        let gold = match fields[3].parse::<Class>() {
            Ok(c) => c,
            Err(ParseClassError::NotAnInteger) if first => continue,
            Err(ParseClassError::NotAnInteger) => {
                return Err(parse_err(
                    lineno,
                    format!("class {:?} is not an integer", fields[3]),
                ))
            }
            Err(ParseClassError::OutOfRange(_)) => {
                return Err(Error::InvalidClass {
                    path: source.to_path_buf(),
                    line: lineno,
                    value: fields[3].trim().to_owned(),
                })
            }
        };
        for (col, text) in [(2, fields[1]), (3, fields[2])] {
            if text.trim().is_empty() {
                return Err(parse_err(lineno, format!("column {col} is empty")));
            }
        }
        let id = match fields[0].trim() {
            "" => format!("L{lineno}"),
            id => id.to_owned(),
        };
        records.push(PairRecord {
            id,
            text1: fields[1].to_owned(),
            text2: fields[2].to_owned(),
            gold,
        });
    }
    Ok(records)
}

/// Writes records in the pair format, with a header line.
pub fn write_pairs<W: Write>(records: &[PairRecord], mut out: W) -> std::io::Result<()> {
    writeln!(out, "id\ttext1\ttext2\tclass")?;
    for r in records {
        writeln!(out, "{}\t{}\t{}\t{}", r.id, r.text1, r.text2, r.gold)?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            train_fraction: 0.7,
            seed: 42,
        }
    }
}

pub(crate) struct Lcg(pub(crate) u64);

impl Lcg {
    const MUL: u64 = 6364136223846793005;
    const INC: u64 = 1442695040888963407;

    pub(crate) fn next(&mut self) -> u64 {
        self.0 = self.0.wrapping_mul(Self::MUL).wrapping_add(Self::INC);
        self.0
    }

    pub(crate) fn below(&mut self, bound: usize) -> usize {
        ((self.next() >> 32) % bound as u64) as usize
    }
}

/// Deterministic shuffled partition into (train, test).
pub fn split<T: Clone>(items: &[T], spec: &SplitSpec) -> Result<(Vec<T>, Vec<T>)> {
    let f = spec.train_fraction;
    if !(f > 0.0 && f < 1.0) {
        return Err(Error::InvalidFraction(f));
    }
    let n = items.len();
    if n < 2 {
        return Err(Error::TooFewRecords(n));
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = Lcg(spec.seed);
    for i in (1..n).rev() {
        let j = rng.below(i + 1);
        order.swap(i, j);
    }
    let n_train = ((f * n as f64).round() as usize).clamp(1, n - 1);
    let train = order[..n_train].iter().map(|&i| items[i].clone()).collect();
    let test = order[n_train..].iter().map(|&i| items[i].clone()).collect();
    Ok((train, test))
}

/// Proximity measure used to score a pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Measure {
    /// Symmetrized projection similarity, in `[0, 1]`.
    #[default]
    ProjectionSim,
    /// Mean pairwise cosine `c ∈ [-1, 1]`, reported as `(1 + c) / 2` so that
    /// thresholds live on the same `[0, 1]` scale.
    PairwiseMean,
}

impl Measure {
    pub fn name(self) -> &'static str {
        match self {
            Measure::ProjectionSim => "projection_sim",
            Measure::PairwiseMean => "pairwise_mean",
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreOptions {
    pub measure: Measure,
    pub sim: SimOptions,
    /// Repeated tokens contribute one row.
    pub dedup: bool,
}

impl Default for ScoreOptions {
    fn default() -> Self {
        ScoreOptions {
            measure: Measure::default(),
            sim: SimOptions::default(),
            dedup: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SkipReason {
    /// No token of text 1 or 2 (`side`) has an embedding.
    EmptyGroup { side: u8, missing: Vec<String> },
    /// The measure itself failed (e.g. singular Gram matrix).
    Measure(String),
}

impl fmt::Display for SkipReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SkipReason::EmptyGroup { side, missing } => {
                write!(f, "text{side} has no known tokens")?;
                if !missing.is_empty() {
                    write!(f, " (missing: {})", missing.join(" "))?;
                }
                Ok(())
            }
            SkipReason::Measure(msg) => write!(f, "measure failed: {msg}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredPair {
    pub record: PairRecord,
    pub outcome: std::result::Result<f64, SkipReason>,
}

impl ScoredPair {
    pub fn proximity(&self) -> Option<f64> {
        self.outcome.as_ref().ok().copied()
    }

    pub fn is_skipped(&self) -> bool {
        self.outcome.is_err()
    }
}

/// Scores one pair of texts.
pub fn score_texts(
    text1: &str,
    text2: &str,
    table: &EmbeddingTable,
    options: &ScoreOptions,
) -> std::result::Result<f64, SkipReason> {
    let group = |side: u8, text: &str| {
        sentence_to_group(&tokenize(text), table, options.dedup).map_err(|e| match e {
            Error::EmptySentenceGroup { missing } => SkipReason::EmptyGroup { side, missing },
            other => SkipReason::Measure(other.to_string()),
        })
    };
    let a = group(1, text1)?;
    let b = group(2, text2)?;
    let value = match options.measure {
        Measure::ProjectionSim => {
            sim_symmetric_with(&a.group, &b.group, &options.sim).map(|s| s.value)
        }
        Measure::PairwiseMean => pairwise_mean_cosine(&a.group, &b.group).map(|c| (1.0 + c) / 2.0),
    };
    value.map_err(|e| SkipReason::Measure(e.to_string()))
}

/// Scores every record; output order matches input order regardless of
/// how the work is spread over threads.
pub fn score_pairs(
    records: &[PairRecord],
    table: &EmbeddingTable,
    options: &ScoreOptions,
) -> Vec<ScoredPair> {
    records
        .par_iter()
        .map(|r| ScoredPair {
            record: r.clone(),
            outcome: score_texts(&r.text1, &r.text2, table, options),
        })
        .collect()
}

/// TSV with columns `id`, `proximity`, `gold_class`, `skipped_reason`.
/// Skipped rows leave `proximity` empty; scored rows leave the reason empty.
pub fn write_scored<W: Write>(scored: &[ScoredPair], mut out: W) -> std::io::Result<()> {
    writeln!(out, "id\tproximity\tgold_class\tskipped_reason")?;
    for s in scored {
        match &s.outcome {
            Ok(p) => writeln!(out, "{}\t{:.6}\t{}\t", s.record.id, p, s.record.gold)?,
            Err(reason) => writeln!(out, "{}\t\t{}\t{}", s.record.id, s.record.gold, reason)?,
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn read(text: &str) -> Result<Vec<PairRecord>> {
        read_pairs(text.as_bytes(), "pairs.tsv")
    }

    fn table() -> EmbeddingTable {
        EmbeddingTable::from_entries(
            4,
            [
                ("red", [1.0, 0.0, 0.0, 0.0]),
                ("fox", [0.0, 1.0, 0.0, 0.0]),
                ("blue", [0.0, 0.0, 1.0, 0.0]),
                ("owl", [0.0, 0.0, 0.0, 1.0]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn loads_three_classes() {
        let r = read("1\ta b\tc d\t1\n2\te\tf\t0\n3\tg\th\t-1\n").unwrap();
        assert_eq!(r.len(), 3);
        assert_eq!(
            r.iter().map(|p| p.gold).collect::<Vec<_>>(),
            [Class::Paraphrase, Class::Unsure, Class::NotParaphrase]
        );
        assert_eq!(r[0].text1, "a b");
    }

    #[test]
    fn invalid_class_names_line() {
        let text = "1\ta\tb\t1\n2\ta\tb\t0\n3\ta\tb\t1\n4\ta\tb\t-1\n5\ta\tb\t2\n";
        match read(text).unwrap_err() {
            Error::InvalidClass { line, value, .. } => assert_eq!((line, value.as_str()), (5, "2")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn header_is_skipped_only_on_first_line() {
        let r = read("id\ttext1\ttext2\tclass\n7\ta\tb\t1\n").unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].id, "7");
        assert!(matches!(
            read("7\ta\tb\t1\nid\ttext1\ttext2\tclass\n"),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn malformed_rows() {
        assert!(matches!(
            read("1\ta\tb\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            read("1\ta\t \t1\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        let r = read("\n\t a \tb\t0\r\n").unwrap();
        assert_eq!(r[0].id, "L2");
    }

    #[test]
    fn split_sizes_and_determinism() {
        let items: Vec<u32> = (0..10).collect();
        let spec = SplitSpec {
            train_fraction: 0.7,
            seed: 42,
        };
        let (train, test) = split(&items, &spec).unwrap();
        assert_eq!((train.len(), test.len()), (7, 3));
        assert_eq!(split(&items, &spec).unwrap(), (train, test));

        let items: Vec<u32> = (0..1913).collect();
        let (train, test) = split(&items, &spec).unwrap();
        assert_eq!((train.len(), test.len()), (1339, 574));
    }

    #[test]
    fn split_errors() {
        let spec = SplitSpec::default();
        assert!(matches!(split(&[1], &spec), Err(Error::TooFewRecords(1))));
        assert!(matches!(
            split(
                &[1, 2],
                &SplitSpec {
                    train_fraction: 1.0,
                    seed: 0
                }
            ),
            Err(Error::InvalidFraction(_))
        ));
        // tiny fractions still leave both sides nonempty
        let (train, test) = split(
            &[1, 2],
            &SplitSpec {
                train_fraction: 0.01,
                seed: 0,
            },
        )
        .unwrap();
        assert_eq!((train.len(), test.len()), (1, 1));
    }

    #[test]
    fn split_shuffles() {
        let items: Vec<u32> = (0..100).collect();
        let (train, _) = split(&items, &SplitSpec::default()).unwrap();
        assert_ne!(train, (0..70).collect::<Vec<_>>());
        let (other, _) = split(
            &items,
            &SplitSpec {
                seed: 43,
                ..SplitSpec::default()
            },
        )
        .unwrap();
        assert_ne!(train, other);
    }

    #[test]
    fn scoring_examples() {
        let records = read(
            "a\tRed fox\tthe fox, red!\t1\n\
             b\tred fox\tblue owl\t-1\n\
             c\tunicorn\tred\t0\n",
        )
        .unwrap();
        let scored = score_pairs(
            &records,
            &table(),
            &ScoreOptions {
                dedup: true,
                ..Default::default()
            },
        );
        assert_eq!(scored.len(), 3);
        assert!((scored[0].proximity().unwrap() - 1.0).abs() < 1e-10);
        assert_eq!(scored[1].proximity().unwrap(), 0.0);
        assert!(matches!(
            &scored[2].outcome,
            Err(SkipReason::EmptyGroup { side: 1, missing }) if missing == &["unicorn"]
        ));

        let mut buf = Vec::new();
        write_scored(&scored, &mut buf).unwrap();
        let out = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines[0], "id\tproximity\tgold_class\tskipped_reason");
        assert_eq!(lines[2], "b\t0.000000\t-1\t");
        assert!(lines[3].starts_with("c\t\t0\ttext1 has no known tokens"));
    }

    #[test]
    fn pairwise_measure_is_rescaled() {
        let options = ScoreOptions {
            measure: Measure::PairwiseMean,
            dedup: true,
            ..Default::default()
        };
        assert_eq!(score_texts("red", "red", &table(), &options), Ok(1.0));
        assert_eq!(score_texts("red", "fox", &table(), &options), Ok(0.5));
    }

    #[test]
    fn pairs_round_trip_through_writer() {
        let records = read("x\tone two\tthree\t-1\ny\tfour\tfive six\t1\n").unwrap();
        let mut buf = Vec::new();
        write_pairs(&records, &mut buf).unwrap();
        assert_eq!(read_pairs(&buf[..], "x").unwrap(), records);
    }

    proptest! {
        #[test]
        fn split_is_a_partition(n in 2usize..300, f in 0.01f64..0.99, seed in any::<u64>()) {
            let items: Vec<usize> = (0..n).collect();
            let spec = SplitSpec { train_fraction: f, seed };
            let (train, test) = split(&items, &spec).unwrap();
            prop_assert_eq!(train.len() + test.len(), n);
            prop_assert!(!train.is_empty() && !test.is_empty());
            let mut all: Vec<usize> = train.iter().chain(&test).copied().collect();
            all.sort_unstable();
            prop_assert_eq!(all, items.clone());
            prop_assert_eq!(split(&items, &spec).unwrap(), (train, test));
        }
    }
}
